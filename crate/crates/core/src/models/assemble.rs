use std::sync::Arc;

use num_complex::Complex64;

use super::layout::{CouplingAssignment, CouplingClass, LatticeLayout};
use crate::error::{Error, Result};
use crate::hilbert::{twice_sz, SpinBasis};
use crate::Operator;

/// Which piece of a (possibly twisted) exchange bond to build.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BondPart {
    /// `S^z S^z + ½(e^{iΦ} S⁺_i S⁻_j + h.c.)`
    Full(f64),
    /// `S^z S^z`
    Zz,
    /// `½(e^{iΦ} S⁺_i S⁻_j + h.c.)`
    Flip(f64),
}

/// `Σ_b w_b h_b` over Heisenberg bonds, built in one pass over the basis.
pub fn heisenberg_sum(
    basis: &Arc<SpinBasis>,
    bonds: &[(usize, usize, f64)],
    part: BondPart,
) -> Result<Operator> {
    for &(i, j, _) in bonds {
        basis.check_site(i)?;
        basis.check_site(j)?;
        if i == j {
            return Err(Error::invalid(format!("self-bond on site {i}")));
        }
    }
    let (diag, phase) = match part {
        BondPart::Full(p) => (true, Some(p)),
        BondPart::Zz => (true, None),
        BondPart::Flip(p) => (false, Some(p)),
    };
    let mut t = Vec::with_capacity(basis.dim() * (1 + bonds.len() / 2));
    for (col, &c) in basis.configs().iter().enumerate() {
        if diag {
            let d: f64 = bonds
                .iter()
                .map(|&(i, j, w)| w * f64::from(twice_sz(c, i) * twice_sz(c, j)) / 4.0)
                .sum();
            t.push((col, col, Complex64::new(d, 0.0)));
        }
        if let Some(p) = phase {
            let fwd = Complex64::from_polar(0.5, p);
            for &(i, j, w) in bonds {
                let (ui, uj) = ((c >> i) & 1 == 1, (c >> j) & 1 == 1);
                if ui == uj {
                    continue;
                }
                let row = basis
                    .index_of(c ^ (1 << i) ^ (1 << j))
                    .expect("exchange preserves the sector");
                let v = if uj { fwd } else { fwd.conj() };
                t.push((row, col, v * w));
            }
        }
    }
    Operator::from_triplets(basis.clone(), basis.clone(), t, true)
}

fn ising_class(layout: &LatticeLayout, basis: &Arc<SpinBasis>, class: CouplingClass) -> Result<Operator> {
    match class {
        CouplingClass::IsingLambda => {
            let bonds: Vec<_> = layout.bonds_of(class).map(|b| (b.i, b.j, b.weight)).collect();
            Ok(Operator::diagonal(
                basis.clone(),
                |c| {
                    let v: f64 = bonds
                        .iter()
                        .map(|&(i, j, w)| w * f64::from(twice_sz(c, i) * twice_sz(c, j)))
                        .sum();
                    Complex64::new(-v, 0.0)
                },
                true,
            ))
        }
        CouplingClass::TransverseField => {
            if basis.is_sector_restricted() {
                return Err(Error::invalid("transverse field needs the unrestricted basis"));
            }
            let fields: Vec<_> = layout
                .fields
                .iter()
                .filter(|f| f.class == class)
                .map(|f| (f.site, f.weight))
                .collect();
            let mut t = Vec::new();
            for (col, &c) in basis.configs().iter().enumerate() {
                for &(s, w) in &fields {
                    let row = basis.index_of(c ^ (1 << s)).unwrap();
                    t.push((row, col, Complex64::new(-w, 0.0)));
                }
            }
            Operator::from_triplets(basis.clone(), basis.clone(), t, true)
        }
        _ => unreachable!("not an Ising class"),
    }
}

fn check_basis(layout: &LatticeLayout, basis: &SpinBasis) -> Result<()> {
    if basis.n_sites() != layout.n_sites() {
        return Err(Error::BasisMismatch(format!(
            "basis has {} sites, layout {}",
            basis.n_sites(),
            layout.n_sites()
        )));
    }
    Ok(())
}

/// One unscaled operator per coupling class present in the layout.
pub fn class_operators(
    layout: &LatticeLayout,
    basis: &Arc<SpinBasis>,
) -> Result<Vec<(CouplingClass, Operator)>> {
    check_basis(layout, basis)?;
    layout
        .classes()
        .into_iter()
        .map(|class| {
            let op = if class.is_ising() {
                ising_class(layout, basis, class)?
            } else {
                let bonds: Vec<_> = layout.bonds_of(class).map(|b| (b.i, b.j, b.weight)).collect();
                heisenberg_sum(basis, &bonds, BondPart::Full(0.0))?
            };
            Ok((class, op))
        })
        .collect()
}

/// Flux-dependence of a class term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FluxPart {
    /// Independent of the flux.
    Static,
    /// Multiplied by `cos Φ`.
    Cos,
    /// Multiplied by `sin Φ`.
    Sin,
}

/// A class operator piece entering `H(Φ) = Σ value(class) · f(Φ) · op`.
#[derive(Clone, Debug)]
pub struct ClassTerm {
    pub class: CouplingClass,
    pub part: FluxPart,
    pub op: Operator,
}

/// Class operators with a Peierls phase `Φ` on the bonds listed in `cut`.
///
/// A cut entry `(i, j)` puts `e^{iΦ}` on `S⁺_i S⁻_j`. Terms with no weight
/// are dropped.
pub fn flux_class_terms(
    layout: &LatticeLayout,
    basis: &Arc<SpinBasis>,
    cut: &[(usize, usize)],
) -> Result<Vec<ClassTerm>> {
    check_basis(layout, basis)?;
    let mut out = Vec::new();
    for class in layout.classes() {
        if class.is_ising() {
            out.push(ClassTerm {
                class,
                part: FluxPart::Static,
                op: ising_class(layout, basis, class)?,
            });
            continue;
        }
        let mut plain = Vec::new();
        let mut twisted = Vec::new();
        for b in layout.bonds_of(class) {
            if let Some(&(i, j)) = cut
                .iter()
                .find(|&&(i, j)| (i, j) == (b.i, b.j) || (j, i) == (b.i, b.j))
            {
                twisted.push((i, j, b.weight));
            } else {
                plain.push((b.i, b.j, b.weight));
            }
        }
        let mut stat = heisenberg_sum(basis, &plain, BondPart::Full(0.0))?;
        if !twisted.is_empty() {
            stat = stat.add(&heisenberg_sum(basis, &twisted, BondPart::Zz)?)?;
            out.push(ClassTerm {
                class,
                part: FluxPart::Cos,
                op: heisenberg_sum(basis, &twisted, BondPart::Flip(0.0))?,
            });
            out.push(ClassTerm {
                class,
                part: FluxPart::Sin,
                op: heisenberg_sum(basis, &twisted, BondPart::Flip(std::f64::consts::FRAC_PI_2))?,
            });
        }
        out.push(ClassTerm {
            class,
            part: FluxPart::Static,
            op: stat,
        });
    }
    out.sort_by_key(|t| (t.class, t.part as u8));
    Ok(out)
}

/// `H = Σ_class value · Σ_bonds weight · term`.
pub fn assemble(
    layout: &LatticeLayout,
    couplings: &CouplingAssignment,
    basis: &Arc<SpinBasis>,
) -> Result<Operator> {
    assemble_with_flux(layout, couplings, basis, &[], 0.0)
}

/// [`assemble`] with Peierls phase `phi` on the `cut` bonds.
pub fn assemble_with_flux(
    layout: &LatticeLayout,
    couplings: &CouplingAssignment,
    basis: &Arc<SpinBasis>,
    cut: &[(usize, usize)],
    phi: f64,
) -> Result<Operator> {
    couplings.validate()?;
    for class in layout.classes() {
        couplings.require(class)?;
    }
    let terms = flux_class_terms(layout, basis, cut)?;
    let mut h = Operator::zero(basis.clone());
    for t in &terms {
        let f = match t.part {
            FluxPart::Static => 1.0,
            FluxPart::Cos => phi.cos(),
            FluxPart::Sin => phi.sin(),
        };
        let v = couplings.require(t.class)? * f;
        if v != 0.0 {
            h = h.add(&t.op.scaled_real(v))?;
        }
    }
    h.assert_hermitian()
}

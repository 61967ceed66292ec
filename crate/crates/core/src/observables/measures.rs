use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{twice_sz, SpinBasis};
use crate::models::{heisenberg_sum, BondPart, LatticeLayout};
use crate::{Operator, State};

/// `⟨S_i·S_j⟩ / ⟨ψ|ψ⟩`.
pub fn bond_correlation(psi: &State, i: usize, j: usize) -> Result<f64> {
    let b = psi.basis();
    b.check_site(i)?;
    b.check_site(j)?;
    if i == j {
        return Err(Error::invalid("correlation needs two sites"));
    }
    let amps = psi.amplitudes();
    let mut zz = 0.0;
    let mut flip = 0.0;
    for (k, &c) in b.configs().iter().enumerate() {
        let p = amps[k].norm_sqr();
        let (si, sj) = (twice_sz(c, i), twice_sz(c, j));
        zz += p * f64::from(si * sj) / 4.0;
        if si < sj {
            let other = b.index_of(c ^ (1 << i) ^ (1 << j)).expect("sector preserved");
            flip += (amps[other].conj() * amps[k]).re;
        }
    }
    Ok((zz + flip) / psi.norm_sqr())
}

fn leg_sites(layout: &LatticeLayout, leg: usize) -> Result<&[usize]> {
    layout
        .rings
        .get(leg)
        .map(|v| v.as_slice())
        .ok_or_else(|| Error::invalid(format!("layout has no leg {leg}")))
}

fn leg_bonds(layout: &LatticeLayout, leg: usize) -> Result<Vec<(usize, usize, f64)>> {
    let sites = leg_sites(layout, leg)?;
    let l = sites.len();
    let nb = if layout.pbc { l } else { l - 1 };
    // covering (s0,s1), (s2,s3), … counts positive
    Ok((0..nb)
        .map(|n| {
            let w = if n % 2 == 0 { -2.0 / l as f64 } else { 2.0 / l as f64 };
            (sites[n], sites[(n + 1) % l], w)
        })
        .collect())
}

/// `D = (2/L) Σ_n (−1)^{n+1} ⟨S_n·S_{n+1}⟩` along a leg, so that the
/// covering with singlets on `(s0, s1), (s2, s3), …` has `D = +3/4`.
pub fn dimer_order(psi: &State, layout: &LatticeLayout, leg: usize) -> Result<f64> {
    let mut d = 0.0;
    for (i, j, w) in leg_bonds(layout, leg)? {
        d += w * bond_correlation(psi, i, j)?;
    }
    Ok(d)
}

/// [`dimer_order`] as an operator.
pub fn dimer_order_operator(basis: &Arc<SpinBasis>, layout: &LatticeLayout, leg: usize) -> Result<Operator> {
    heisenberg_sum(basis, &leg_bonds(layout, leg)?, BondPart::Full(0.0))
}

/// `(1/L) Σ_n (1/4 − ⟨S_{n,1}·S_{n,2}⟩)`.
pub fn rung_singlet_density(psi: &State, layout: &LatticeLayout) -> Result<f64> {
    let (a, b) = (leg_sites(layout, 0)?, leg_sites(layout, 1)?);
    let mut acc = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        acc += 0.25 - bond_correlation(psi, x, y)?;
    }
    Ok(acc / a.len() as f64)
}

/// `−Re⟨S^z_i exp(iπ Σ_{i<k<j} S^z_k) S^z_j⟩` with `S^z_n` the rung sum.
pub fn string_order(psi: &State, layout: &LatticeLayout, i: usize, j: usize) -> Result<f64> {
    if j < i + 2 {
        return Err(Error::invalid(format!("string order needs j - i >= 2, got ({i}, {j})")));
    }
    let (a, b) = (leg_sites(layout, 0)?, leg_sites(layout, 1)?);
    if j >= a.len() {
        return Err(Error::invalid(format!("rung {j} outside ladder of {}", a.len())));
    }
    let rung = |c: u64, n: usize| f64::from(twice_sz(c, a[n]) + twice_sz(c, b[n])) / 2.0;
    let basis = psi.basis();
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &c) in basis.configs().iter().enumerate() {
        let p = psi.amplitudes()[k].norm_sqr();
        if p == 0.0 {
            continue;
        }
        let inner: f64 = (i + 1..j).map(|n| rung(c, n)).sum();
        acc += Complex64::from_polar(p * rung(c, i) * rung(c, j), std::f64::consts::PI * inner);
    }
    Ok(-acc.re / psi.norm_sqr())
}

/// `⟨ψ|F|ψ⟩`.
pub fn twist_expectation(psi: &State, twist: &Operator) -> Result<Complex64> {
    twist.expectation(psi)
}

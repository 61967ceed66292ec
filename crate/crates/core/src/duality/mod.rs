//! Kramers–Wannier duality of the transverse-field Ising chain.
//!
//! `H(λ) = -Σ X_n - λ Σ Z_n Z_{n+1}`. The dual Paulis live on the bonds of
//! the open chain: `σ̃^x_n = Z_n Z_{n+1}` and `σ̃^z_n = Π_{m≤n} X_m`, the string
//! anchored at site 0. On the periodic chain the even-parity block of `H(λ)`
//! is isospectral with the even-parity block of `λ H(1/λ)`.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::dense::to_dense;
use crate::hilbert::ops::{pauli_x_string, pauli_zz};
use crate::hilbert::SpinBasis;
use crate::models::{assemble, tfim_chain};
use crate::{Operator, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Eigenspace of the global parity `P = Π X_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Sector pairing fixed by [`anchor_pairing`] on the periodic chain at `L = 4`.
pub const MATCHED_PAIRING: (Parity, Parity) = (Parity::Even, Parity::Even);
pub const MATCHED_BOUNDARY: Boundary = Boundary::Periodic;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualPair {
    pub l: usize,
    pub lambda: f64,
    pub boundary: Boundary,
    /// Sector of `H(λ)`.
    pub original_sector: Parity,
    /// Sector of `λ H(1/λ)`.
    pub dual_sector: Parity,
    pub original: Vec<f64>,
    pub dual: Vec<f64>,
    pub max_deviation: f64,
}

fn full_basis(l: usize) -> Result<Arc<SpinBasis>> {
    if l < 2 {
        return Err(Error::invalid(format!("Ising chain needs L >= 2, got {l}")));
    }
    Ok(Arc::new(SpinBasis::full(l)?))
}

/// `H(λ)` on the unrestricted basis.
pub fn tfim_hamiltonian(l: usize, lambda: f64, boundary: Boundary) -> Result<Operator> {
    let layout = tfim_chain(l, lambda, boundary == Boundary::Periodic)?;
    assemble(&layout, &layout.couplings, &full_basis(l)?)
}

/// Global parity `Π X_n`.
pub fn parity_operator(l: usize) -> Result<Operator> {
    pauli_x_string(&full_basis(l)?, &(0..l).collect::<Vec<_>>())
}

/// Dual `(σ̃^x, σ̃^z)` lists on the `L - 1` bonds of the open chain.
pub fn dual_operators(l: usize) -> Result<(Vec<Operator>, Vec<Operator>)> {
    if l < 3 {
        return Err(Error::invalid(format!("dual operators need L >= 3, got {l}")));
    }
    let basis = full_basis(l)?;
    let xs = (0..l - 1).map(|n| pauli_zz(&basis, n, n + 1)).collect::<Result<_>>()?;
    let zs = (0..l - 1)
        .map(|n| pauli_x_string(&basis, &(0..=n).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    Ok((xs, zs))
}

/// Outcome of the exhaustive Pauli-table check of [`dual_operators`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraCheck {
    pub l: usize,
    pub relations: usize,
    pub violations: usize,
}

/// Checks `(σ̃^x)² = (σ̃^z)² = 1`, mutual commutation of the `σ̃^x` and of the
/// `σ̃^z`, and `{σ̃^x_a, σ̃^z_b} = 0` exactly when `a = b` (commuting otherwise).
pub fn check_dual_algebra(l: usize) -> Result<AlgebraCheck> {
    let (xs, zs) = dual_operators(l)?;
    let id = Operator::identity(xs[0].basis().clone());
    let tol = 1e-12;
    let mut relations = 0;
    let mut violations = 0;
    let mut record = |ok: bool| {
        relations += 1;
        violations += usize::from(!ok);
    };
    for a in 0..xs.len() {
        record(xs[a].compose(&xs[a])?.max_abs_diff(&id)? < tol);
        record(zs[a].compose(&zs[a])?.max_abs_diff(&id)? < tol);
        for b in 0..xs.len() {
            record(xs[a].commutator(&xs[b])?.max_abs() < tol);
            record(zs[a].commutator(&zs[b])?.max_abs() < tol);
            let r = if a == b {
                xs[a].anticommutator(&zs[b])?
            } else {
                xs[a].commutator(&zs[b])?
            };
            record(r.max_abs() < tol);
        }
    }
    Ok(AlgebraCheck { l, relations, violations })
}

/// Block of a dense operator on the `P = ±1` sector, in the basis
/// `(|c⟩ ± |c̄⟩)/√2` over configurations with the last spin down.
fn parity_block(h: &DMatrix<Complex64>, l: usize, p: Parity) -> DMatrix<Complex64> {
    let mask = (1usize << l) - 1;
    let reps: Vec<usize> = (0..1usize << (l - 1)).collect();
    let s = p.sign();
    DMatrix::from_fn(reps.len(), reps.len(), |a, b| {
        let (ra, rb) = (reps[a], reps[b]);
        let (fa, fb) = (ra ^ mask, rb ^ mask);
        (h[(ra, rb)] + h[(ra, fb)] * s + h[(fa, rb)] * s + h[(fa, fb)]) * 0.5
    })
}

fn sorted_eigenvalues(m: DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn sector_spectrum(h: &Operator, l: usize, p: Parity) -> Vec<f64> {
    sorted_eigenvalues(parity_block(&to_dense(h), l, p))
}

/// Per-sector spectra `(even, odd)` of the open chain.
pub fn parity_split(l: usize, lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    parity_split_with(l, lambda, Boundary::Open)
}

pub fn parity_split_with(l: usize, lambda: f64, boundary: Boundary) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!("lambda must be >= 0, got {lambda}")));
    }
    let h = to_dense(&tfim_hamiltonian(l, lambda, boundary)?);
    Ok((
        sorted_eigenvalues(parity_block(&h, l, Parity::Even)),
        sorted_eigenvalues(parity_block(&h, l, Parity::Odd)),
    ))
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Spectra of `H(λ)` in `sectors.0` and of `λ H(1/λ)` in `sectors.1`.
pub fn compare_sectors(l: usize, lambda: f64, boundary: Boundary, sectors: (Parity, Parity)) -> Result<DualPair> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("lambda must be > 0, got {lambda}")));
    }
    let h = tfim_hamiltonian(l, lambda, boundary)?;
    let hd = tfim_hamiltonian(l, 1.0 / lambda, boundary)?.scaled_real(lambda);
    let original = sector_spectrum(&h, l, sectors.0);
    let dual = sector_spectrum(&hd, l, sectors.1);
    Ok(DualPair {
        l,
        lambda,
        boundary,
        original_sector: sectors.0,
        dual_sector: sectors.1,
        max_deviation: max_dev(&original, &dual),
        original,
        dual,
    })
}

/// Tries all four sector pairings at `L = 4` and returns the best one with its deviation.
pub fn anchor_pairing(boundary: Boundary, lambda: f64) -> Result<((Parity, Parity), f64)> {
    let mut best = ((Parity::Even, Parity::Even), f64::INFINITY);
    for a in [Parity::Even, Parity::Odd] {
        for b in [Parity::Even, Parity::Odd] {
            let d = compare_sectors(4, lambda, boundary, (a, b))?.max_deviation;
            if d < best.1 {
                best = ((a, b), d);
            }
        }
    }
    Ok(best)
}

/// Compares `H(λ)` with `λ H(1/λ)` in the matched sectors.
pub fn spectrum_duality_check(l: usize, lambda: f64) -> Result<DualPair> {
    compare_sectors(l, lambda, MATCHED_BOUNDARY, MATCHED_PAIRING)
}

/// Ground-state order and disorder correlators of the open chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderDisorder {
    pub lambda: f64,
    pub ground_energy: f64,
    /// Lowest odd minus lowest even energy.
    pub parity_gap: f64,
    /// `⟨Z_m Z_{m+1}⟩` at the middle bond.
    pub order: f64,
    /// `⟨σ̃^z_a σ̃^z_b⟩ = ⟨Π_{a<k≤b} X_k⟩` across the central half.
    pub disorder: f64,
}

pub fn order_disorder(l: usize, lambda: f64) -> Result<OrderDisorder> {
    if l < 4 {
        return Err(Error::invalid(format!("order/disorder needs L >= 4, got {l}")));
    }
    let h = tfim_hamiltonian(l, lambda, Boundary::Open)?;
    let basis = h.basis().clone();
    let hd = to_dense(&h);
    let odd = sorted_eigenvalues(parity_block(&hd, l, Parity::Odd));
    // ground state of the even block, which holds the global minimum for λ < ∞
    let eig = parity_block(&hd, l, Parity::Even).symmetric_eigen();
    let k0 = (0..eig.eigenvalues.len())
        .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .expect("nonempty block");
    let e0 = eig.eigenvalues[k0];
    let mask = (1usize << l) - 1;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << l];
    for (r, v) in eig.eigenvectors.column(k0).iter().enumerate() {
        amps[r] = v * std::f64::consts::FRAC_1_SQRT_2;
        amps[r ^ mask] = v * std::f64::consts::FRAC_1_SQRT_2;
    }
    let psi = State::from_amplitudes(basis.clone(), amps)?;
    let m = l / 2 - 1;
    let order = pauli_zz(&basis, m, m + 1)?.expectation(&psi)?.re;
    let (a, b) = (l / 4, 3 * l / 4);
    let disorder = pauli_x_string(&basis, &(a + 1..=b).collect::<Vec<_>>())?
        .expectation(&psi)?
        .re;
    Ok(OrderDisorder {
        lambda,
        ground_energy: e0,
        parity_gap: odd[0] - e0,
        order,
        disorder,
    })
}

/// Order/disorder over a λ grid, in grid order.
pub fn order_disorder_scan(l: usize, lambdas: &[f64]) -> Result<Vec<OrderDisorder>> {
    lambdas.par_iter().map(|&x| order_disorder(l, x)).collect()
}

pub fn write_scan_csv<W: Write>(rows: &[OrderDisorder], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "ground_energy", "parity_gap", "order", "disorder"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record(
            [r.lambda, r.ground_energy, r.parity_gap, r.order, r.disorder].map(|x| format!("{x:.16e}")),
        )
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per matched eigenvalue.
pub fn write_spectra_csv<W: Write>(pair: &DualPair, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "original", "dual", "deviation"]).map_err(csv_err)?;
    for (k, (a, b)) in pair.original.iter().zip(&pair.dual).enumerate() {
        w.write_record([
            k.to_string(),
            format!("{a:.16e}"),
            format!("{b:.16e}"),
            format!("{:.16e}", (a - b).abs()),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests;

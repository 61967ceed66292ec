//! Spin operators built directly on a [`SpinBasis`].

use std::sync::Arc;

use num_complex::Complex;

use super::basis::{twice_sz, SpinBasis};
use super::operator::SparseOperator;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

fn check_pair(basis: &SpinBasis, i: usize, j: usize) -> Result<()> {
    basis.check_site(i)?;
    basis.check_site(j)?;
    if i == j {
        return Err(Error::invalid(format!("bond needs two distinct sites, got ({i}, {i})")));
    }
    Ok(())
}

/// Parts of a twisted exchange bond.
///
/// `h(Φ) = zz + cos Φ · flip + sin Φ · flip_sin`, where `flip` is
/// `½(S⁺_i S⁻_j + h.c.)` and `flip_sin` is `½ i (S⁺_i S⁻_j − h.c.)`.
#[derive(Clone, Debug)]
pub struct BondParts<T: Real> {
    pub zz: SparseOperator<T>,
    pub flip: SparseOperator<T>,
    pub flip_sin: SparseOperator<T>,
}

/// `S^z_i S^z_j`.
pub fn sz_sz<T: Real>(basis: &Arc<SpinBasis>, i: usize, j: usize) -> Result<SparseOperator<T>> {
    check_pair(basis, i, j)?;
    Ok(SparseOperator::diagonal(
        basis.clone(),
        |c| {
            let v = (twice_sz(c, i) * twice_sz(c, j)) as f64 / 4.0;
            Complex::new(lit(v), T::zero())
        },
        true,
    ))
}

/// `e^{iΦ} S⁺_i S⁻_j / 2 + h.c.`
pub fn spin_flip<T: Real>(
    basis: &Arc<SpinBasis>,
    i: usize,
    j: usize,
    phase: f64,
) -> Result<SparseOperator<T>> {
    check_pair(basis, i, j)?;
    let fwd = Complex::new(lit::<T>(0.5 * phase.cos()), lit::<T>(0.5 * phase.sin()));
    let mut t = Vec::new();
    let (bi, bj) = (1u64 << i, 1u64 << j);
    for (col, &c) in basis.configs().iter().enumerate() {
        let (ui, uj) = (c & bi != 0, c & bj != 0);
        if ui == uj {
            continue;
        }
        let flipped = c ^ bi ^ bj;
        let row = basis
            .index_of(flipped)
            .expect("exchange preserves the sector");
        // S⁺_i S⁻_j raises i
        let v = if uj { fwd } else { fwd.conj() };
        t.push((row, col, v));
    }
    SparseOperator::from_triplets(basis.clone(), basis.clone(), t, true)
}

/// Heisenberg bond `S_i · S_j`.
pub fn exchange_bond<T: Real>(
    basis: &Arc<SpinBasis>,
    i: usize,
    j: usize,
) -> Result<SparseOperator<T>> {
    twisted_exchange_bond(basis, i, j, 0.0)
}

/// `S^z_i S^z_j + ½(e^{iΦ} S⁺_i S⁻_j + h.c.)`, the bond with a Peierls phase.
pub fn twisted_exchange_bond<T: Real>(
    basis: &Arc<SpinBasis>,
    i: usize,
    j: usize,
    phase: f64,
) -> Result<SparseOperator<T>> {
    sz_sz(basis, i, j)?.add(&spin_flip(basis, i, j, phase)?)
}

pub fn bond_parts<T: Real>(basis: &Arc<SpinBasis>, i: usize, j: usize) -> Result<BondParts<T>> {
    let flip = spin_flip(basis, i, j, 0.0)?;
    let flip_sin = spin_flip(basis, i, j, std::f64::consts::FRAC_PI_2)?;
    Ok(BondParts {
        zz: sz_sz(basis, i, j)?,
        flip,
        flip_sin,
    })
}

/// `S^z_i`.
pub fn sz<T: Real>(basis: &Arc<SpinBasis>, i: usize) -> Result<SparseOperator<T>> {
    basis.check_site(i)?;
    Ok(SparseOperator::diagonal(
        basis.clone(),
        |c| Complex::new(lit(twice_sz(c, i) as f64 / 2.0), T::zero()),
        true,
    ))
}

/// Total `S^z`.
pub fn sz_total<T: Real>(basis: &Arc<SpinBasis>) -> SparseOperator<T> {
    let n = basis.n_sites();
    SparseOperator::diagonal(
        basis.clone(),
        |c| {
            let up = (c.count_ones()) as f64;
            Complex::new(lit(up - n as f64 / 2.0), T::zero())
        },
        true,
    )
}

/// Total spin `S²` assembled from all pair exchanges.
pub fn s_squared<T: Real>(basis: &Arc<SpinBasis>) -> Result<SparseOperator<T>> {
    let n = basis.n_sites();
    let mut terms = vec![SparseOperator::identity(basis.clone()).scaled_real(lit(0.75 * n as f64))];
    for i in 0..n {
        for j in (i + 1)..n {
            terms.push(exchange_bond(basis, i, j)?.scaled_real(lit(2.0)));
        }
    }
    SparseOperator::sum(basis.clone(), terms.iter())
}

fn require_full(basis: &SpinBasis, what: &str) -> Result<()> {
    if basis.is_sector_restricted() {
        return Err(Error::invalid(format!("{what} needs the unrestricted basis")));
    }
    Ok(())
}

/// Pauli `X_i` (not `S^x`), on the unrestricted basis.
pub fn pauli_x<T: Real>(basis: &Arc<SpinBasis>, i: usize) -> Result<SparseOperator<T>> {
    basis.check_site(i)?;
    require_full(basis, "Pauli X")?;
    let one = Complex::new(T::one(), T::zero());
    let t = basis
        .configs()
        .iter()
        .enumerate()
        .map(|(col, &c)| (basis.index_of(c ^ (1 << i)).unwrap(), col, one))
        .collect();
    SparseOperator::from_triplets(basis.clone(), basis.clone(), t, true)
}

/// Pauli `Z_i`.
pub fn pauli_z<T: Real>(basis: &Arc<SpinBasis>, i: usize) -> Result<SparseOperator<T>> {
    basis.check_site(i)?;
    Ok(SparseOperator::diagonal(
        basis.clone(),
        |c| Complex::new(lit(twice_sz(c, i) as f64), T::zero()),
        true,
    ))
}

/// Pauli `Z_i Z_j`.
pub fn pauli_zz<T: Real>(basis: &Arc<SpinBasis>, i: usize, j: usize) -> Result<SparseOperator<T>> {
    Ok(sz_sz(basis, i, j)?.scaled_real(lit(4.0)))
}

/// Product `Π_{i in sites} X_i`.
pub fn pauli_x_string<T: Real>(basis: &Arc<SpinBasis>, sites: &[usize]) -> Result<SparseOperator<T>> {
    require_full(basis, "Pauli X string")?;
    let mut mask = 0u64;
    for &s in sites {
        basis.check_site(s)?;
        mask ^= 1 << s;
    }
    let one = Complex::new(T::one(), T::zero());
    let t = basis
        .configs()
        .iter()
        .enumerate()
        .map(|(col, &c)| (basis.index_of(c ^ mask).unwrap(), col, one))
        .collect();
    SparseOperator::from_triplets(basis.clone(), basis.clone(), t, true)
}

/// Checks that `perm` is a bijection on `0..n`.
pub fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!(
            "length {} for {n} sites",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not a bijection")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Relabels sites: the spin on site `i` moves to site `perm[i]`.
pub fn permute_config(config: u64, perm: &[usize]) -> u64 {
    perm.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &p)| acc | (((config >> i) & 1) << p))
}

/// Unitary permutation operator `P|c⟩ = |perm(c)⟩`.
///
/// Composition follows site maps: `P(σ∘τ) = P(σ)P(τ)` with
/// `(σ∘τ)[i] = σ[τ[i]]`.
pub fn permutation_operator<T: Real>(
    basis: &Arc<SpinBasis>,
    perm: &[usize],
) -> Result<SparseOperator<T>> {
    check_permutation(perm, basis.n_sites())?;
    let one = Complex::new(T::one(), T::zero());
    let t = basis
        .configs()
        .iter()
        .enumerate()
        .map(|(col, &c)| (basis.index_of(permute_config(c, perm)).unwrap(), col, one))
        .collect();
    let op = SparseOperator::from_triplets(basis.clone(), basis.clone(), t, false)?;
    Ok(op)
}

/// Cyclic shift `i ↦ i + k (mod L)` restricted to `sites` (in ring order);
/// other sites are fixed.
pub fn ring_shift(n_sites: usize, sites: &[usize], k: isize) -> Vec<usize> {
    let l = sites.len() as isize;
    let mut perm: Vec<usize> = (0..n_sites).collect();
    for (pos, &s) in sites.iter().enumerate() {
        let to = (pos as isize + k).rem_euclid(l) as usize;
        perm[s] = sites[to];
    }
    perm
}

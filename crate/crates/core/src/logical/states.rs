use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::ops::{permutation_operator, ring_shift};
use crate::hilbert::{twice_sz, SpinBasis};
use crate::models::LatticeLayout;
use crate::{Operator, State};

/// Nearest-neighbour covering of a ring given in traversal order.
///
/// Parity 0 pairs `(s0,s1), (s2,s3), …`; parity 1 pairs `(s1,s2), …` and
/// ends with the wrap pair `(s_{L-1}, s0)`.
pub fn ring_covering(sites: &[usize], parity: usize) -> Vec<(usize, usize)> {
    let l = sites.len();
    (0..l / 2)
        .map(|k| {
            let a = 2 * k + parity % 2;
            (sites[a % l], sites[(a + 1) % l])
        })
        .collect()
}

/// Product of singlets `(|↑_i↓_j⟩ − |↓_i↑_j⟩)/√2` over the pairs `(i, j)`,
/// with `i` taken as listed.
pub fn dimer_state(basis: &Arc<SpinBasis>, covering: &[(usize, usize)]) -> Result<State> {
    let n = basis.n_sites();
    let mut seen = vec![false; n];
    for &(i, j) in covering {
        for s in [i, j] {
            basis.check_site(s)?;
            if seen[s] {
                return Err(Error::invalid(format!("site {s} appears twice in the covering")));
            }
            seen[s] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::invalid("covering is not a perfect matching of all sites"));
    }
    if let Some(up) = basis.n_up() {
        if 2 * up != n {
            return Err(Error::invalid("dimer states live in the S^z = 0 sector"));
        }
    }
    let p = covering.len();
    let amp = 0.5f64.powf(p as f64 / 2.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
    for mask in 0..(1u64 << p) {
        let mut cfg = 0u64;
        let mut sign = 1.0;
        for (k, &(i, j)) in covering.iter().enumerate() {
            if (mask >> k) & 1 == 0 {
                cfg |= 1 << i;
            } else {
                cfg |= 1 << j;
                sign = -sign;
            }
        }
        let idx = basis.index_of(cfg).expect("S^z = 0 configuration");
        amps[idx] = Complex64::new(sign * amp, 0.0);
    }
    State::from_amplitudes(basis.clone(), amps)
}

/// Twist `F = Π_n exp(i (2π/L) n S^z_n)` with `n = 1..L` along `sites`.
pub fn twist_operator(basis: &Arc<SpinBasis>, sites: &[usize]) -> Result<Operator> {
    for &s in sites {
        basis.check_site(s)?;
    }
    let l = sites.len() as f64;
    Ok(Operator::diagonal(
        basis.clone(),
        |c| {
            let ph: f64 = sites
                .iter()
                .enumerate()
                .map(|(k, &s)| (k + 1) as f64 * f64::from(twice_sz(c, s)) / 2.0)
                .sum();
            Complex64::from_polar(1.0, 2.0 * PI / l * ph)
        },
        false,
    ))
}

/// Twist over rung-summed `S^z`: `Π_n exp(i (2π/L) n (S^z_{n,1} + S^z_{n,2}))`.
pub fn plus_twist_operator(basis: &Arc<SpinBasis>, rungs: &[(usize, usize)]) -> Result<Operator> {
    for &(a, b) in rungs {
        basis.check_site(a)?;
        basis.check_site(b)?;
    }
    let l = rungs.len() as f64;
    Ok(Operator::diagonal(
        basis.clone(),
        |c| {
            let ph: f64 = rungs
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| (k + 1) as f64 * f64::from(twice_sz(c, a) + twice_sz(c, b)) / 2.0)
                .sum();
            Complex64::from_polar(1.0, 2.0 * PI / l * ph)
        },
        false,
    ))
}

/// Translation by `k` sites along a ring (other sites fixed).
pub fn ring_translation(basis: &Arc<SpinBasis>, sites: &[usize], k: isize) -> Result<Operator> {
    permutation_operator(basis, &ring_shift(basis.n_sites(), sites, k))
}

/// Ladder translation by one rung: `T_1 T_2`, or `T_1 T_2⁻¹` when
/// `counter` is set.
pub fn ladder_translation(basis: &Arc<SpinBasis>, layout: &LatticeLayout, counter: bool) -> Result<Operator> {
    if layout.rings.len() != 2 {
        return Err(Error::invalid("ladder translation needs a two-leg layout"));
    }
    let n = basis.n_sites();
    let p1 = ring_shift(n, &layout.rings[0], 1);
    let p2 = ring_shift(n, &layout.rings[1], if counter { -1 } else { 1 });
    let perm: Vec<usize> = (0..n).map(|i| p2[p1[i]]).collect();
    permutation_operator(basis, &perm)
}

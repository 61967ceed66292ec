use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hilbert::{inner, norm, SparseOperator, StateVector};
use crate::scalar::{lit, to_f64, Real};

/// Eigenpairs in ascending order of energy.
#[derive(Clone, Debug)]
pub struct EigenSolution<T: Real> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Vec<StateVector<T>>,
    pub residuals: Vec<T>,
}

impl<T: Real> EigenSolution<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn ground_energy(&self) -> T {
        self.eigenvalues[0]
    }
}

/// Solver settings. `projector`, when set, is applied to every Krylov vector
/// and must be an orthogonal projector commuting with the operator.
pub struct LanczosOptions<'a, T: Real> {
    pub k: usize,
    /// Residual tolerance `‖H v − E v‖`.
    pub tol: f64,
    /// Largest Krylov basis per restart cycle.
    pub max_krylov: usize,
    pub max_restarts: usize,
    pub seed: u64,
    pub projector: Option<&'a (dyn Fn(&mut [Complex<T>]) + Sync)>,
}

impl<'a, T: Real> LanczosOptions<'a, T> {
    pub fn new(k: usize, tol: f64) -> Self {
        LanczosOptions {
            k,
            tol,
            max_krylov: 160,
            max_restarts: 60,
            seed: 0x5eed,
            projector: None,
        }
    }

    pub fn with_projector(mut self, p: &'a (dyn Fn(&mut [Complex<T>]) + Sync)) -> Self {
        self.projector = Some(p);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// The `k` lowest eigenpairs of a Hermitian operator.
///
/// Lanczos with full reorthogonalization; converged Ritz pairs are locked
/// and later runs work in their orthogonal complement, which resolves
/// degenerate copies one at a time. A final run in the complement of the
/// locked set confirms nothing was missed below the `k`-th value.
pub fn lowest_eigenpairs<T: Real>(
    h: &SparseOperator<T>,
    k: usize,
    tol: f64,
) -> Result<EigenSolution<T>> {
    lowest_eigenpairs_with(h, &LanczosOptions::new(k, tol))
}

type Locked<T> = Vec<(T, Vec<Complex<T>>)>;

pub fn lowest_eigenpairs_with<T: Real>(
    h: &SparseOperator<T>,
    opts: &LanczosOptions<'_, T>,
) -> Result<EigenSolution<T>> {
    if !h.is_hermitian() {
        return Err(Error::invalid("eigensolver needs a Hermitian operator"));
    }
    let dim = h.nrows();
    if opts.k == 0 || opts.k > dim {
        return Err(Error::invalid(format!("k = {} not in 1..={dim}", opts.k)));
    }
    let mut locked: Locked<T> = Vec::new();
    let mut best = vec![f64::INFINITY];
    let mut run = 0u64;
    loop {
        let mut start = StateVector::<T>::random(h.basis().clone(), opts.seed.wrapping_add(run))
            .into_amplitudes();
        if let Some(p) = opts.projector {
            p(&mut start);
        }
        orthogonalize(&mut start, locked.iter().map(|(_, v)| v.as_slice()));
        let nrm = to_f64(norm(&start));
        if nrm < 1e-10 {
            break;
        }
        scale(&mut start, T::one() / lit(nrm));
        let found = match single_run(h, start, &locked, opts, &mut best)? {
            Some(f) => f,
            None => break,
        };
        run += 1;
        if locked.len() >= opts.k {
            let kth = to_f64(locked[opts.k - 1].0);
            let slack = opts.tol.max(1e-12) * kth.abs().max(1.0);
            if to_f64(found[0].0) >= kth - slack {
                break;
            }
        }
        locked.extend(found);
        locked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if run > 4 * opts.k as u64 + 8 {
            return Err(Error::NoConvergence {
                iterations: run as usize,
                residuals: best,
            });
        }
    }
    if locked.len() < opts.k {
        return Err(Error::NoConvergence {
            iterations: run as usize,
            residuals: best,
        });
    }
    locked.truncate(opts.k);
    let basis = h.basis().clone();
    let mut out = EigenSolution {
        eigenvalues: vec![],
        eigenvectors: vec![],
        residuals: vec![],
    };
    let mut hv = vec![Complex::new(T::zero(), T::zero()); dim];
    for (e, v) in locked {
        h.apply_slice(&v, &mut hv);
        let r: T = hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (*a - *b * e).norm_sqr())
            .sum::<T>()
            .sqrt();
        out.eigenvalues.push(e);
        out.residuals.push(r);
        out.eigenvectors
            .push(StateVector::from_amplitudes(basis.clone(), v).expect("dimension"));
    }
    Ok(out)
}

fn scale<T: Real>(v: &mut [Complex<T>], s: T) {
    for x in v {
        *x = x.scale(s);
    }
}

// two passes of classical Gram-Schmidt
fn orthogonalize<'v, T: Real>(w: &mut [Complex<T>], against: impl Iterator<Item = &'v [Complex<T>]> + Clone) {
    // second pass only when the first removed most of the norm
    let mut before = to_f64(norm(w));
    for _ in 0..2 {
        for q in against.clone() {
            let c = inner(q, w);
            for (x, y) in w.iter_mut().zip(q) {
                *x = *x - *y * c;
            }
        }
        let after = to_f64(norm(w));
        if after > 0.7 * before {
            break;
        }
        before = after;
    }
}

// eigenvectors of the Lanczos tridiagonal, columns sorted by eigenvalue
fn tridiag_eigen(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])])
}

/// Runs restarted Lanczos from `start` until at least the lowest Ritz pair
/// converges; returns every leading converged pair.
fn single_run<T: Real>(
    h: &SparseOperator<T>,
    mut start: Vec<Complex<T>>,
    locked: &Locked<T>,
    opts: &LanczosOptions<'_, T>,
    best: &mut Vec<f64>,
) -> Result<Option<Locked<T>>> {
    let dim = h.nrows();
    let free = dim - locked.len();
    let m_max = opts.max_krylov.min(free).max(1);
    let zero = Complex::new(T::zero(), T::zero());
    for _restart in 0..=opts.max_restarts {
        let mut q: Vec<Vec<Complex<T>>> = vec![start.clone()];
        let mut alpha: Vec<f64> = vec![];
        let mut beta: Vec<f64> = vec![];
        let mut w = vec![zero; dim];
        let mut exhausted = false;
        let ritz = loop {
            let j = q.len() - 1;
            h.apply_slice(&q[j], &mut w);
            if let Some(p) = opts.projector {
                p(&mut w);
            }
            let a = to_f64(inner(&q[j], &w).re);
            alpha.push(a);
            orthogonalize(
                &mut w,
                q.iter()
                    .map(|v| v.as_slice())
                    .chain(locked.iter().map(|(_, v)| v.as_slice())),
            );
            let b = to_f64(norm(&w));
            let m = alpha.len();
            let check = m == m_max || m % 8 == 0 || b < 1e-12 * a.abs().max(1.0) || m < 4;
            if check {
                let vecs = tridiag_eigen(&alpha, &beta);
                let res0 = (b * vecs[(m - 1, 0)]).abs();
                best[0] = best[0].min(res0);
                let done = res0 < opts.tol * 0.5 || b < 1e-12 * a.abs().max(1.0) || m == m_max;
                if b < 1e-12 * a.abs().max(1.0) {
                    exhausted = true;
                }
                if done {
                    // count leading converged Ritz values
                    let mut conv = 0;
                    while conv < m && (b * vecs[(m - 1, conv)]).abs() < opts.tol * 0.5 {
                        conv += 1;
                    }
                    break vecs.columns(0, conv.max(1)).into_owned();
                }
            }
            beta.push(b);
            scale(&mut w, T::one() / lit(b));
            q.push(std::mem::replace(&mut w, vec![zero; dim]));
        };
        let n = ritz.ncols();
        let mut pairs: Locked<T> = Vec::new();
        let mut first_ok = false;
        let mut hv = vec![zero; dim];
        for c in 0..n {
            let mut v = vec![zero; dim];
            for (jj, qj) in q.iter().enumerate().take(ritz.nrows()) {
                let s: T = lit(ritz[(jj, c)]);
                for (x, y) in v.iter_mut().zip(qj) {
                    *x = *x + y.scale(s);
                }
            }
            orthogonalize(&mut v, locked.iter().map(|(_, v)| v.as_slice()));
            let nv = norm(&v);
            scale(&mut v, T::one() / nv);
            h.apply_slice(&v, &mut hv);
            let e = inner(&v, &hv).re;
            let r: f64 = to_f64(
                hv.iter()
                    .zip(&v)
                    .map(|(a, b)| (*a - *b * e).norm_sqr())
                    .sum::<T>()
                    .sqrt(),
            );
            if c == 0 {
                best[0] = best[0].min(r);
            }
            if r < opts.tol || (exhausted && r < opts.tol * 10.0) {
                if c == 0 {
                    first_ok = true;
                }
                pairs.push((e, v));
            } else if c == 0 {
                start = v;
                break;
            } else {
                break;
            }
        }
        if first_ok {
            // later pairs must stay orthogonal to earlier ones
            let mut clean: Locked<T> = Vec::new();
            for (e, mut v) in pairs {
                orthogonalize(&mut v, clean.iter().map(|(_, x)| x.as_slice()));
                let nv = to_f64(norm(&v));
                if nv < 0.5 {
                    continue;
                }
                scale(&mut v, T::one() / lit(nv));
                clean.push((e, v));
            }
            return Ok(Some(clean));
        }
        if exhausted && free <= 1 {
            return Ok(None);
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_restarts * m_max,
        residuals: best.clone(),
    })
}

/// Default degeneracy threshold `1e-8 · max(1, |E0|)`.
pub fn default_split_tol(e0: f64) -> f64 {
    1e-8 * e0.abs().max(1.0)
}

/// Number of eigenvalues within `split_tol` of the lowest one.
pub fn degeneracy<T: Real>(sol: &EigenSolution<T>, split_tol: Option<f64>) -> usize {
    let e0 = to_f64(sol.eigenvalues[0]);
    let tol = split_tol.unwrap_or_else(|| default_split_tol(e0));
    sol.eigenvalues
        .iter()
        .filter(|&&e| to_f64(e) - e0 <= tol)
        .count()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::hilbert::dense::eigvalsh;
    use crate::hilbert::{HalfInt, SpinBasis};
    use crate::models::{assemble, chain_j1j2, ladder, CouplingAssignment};
    use crate::Operator;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn diag(vals: &[f64]) -> Operator {
        let n = vals.len();
        let b = Arc::new(SpinBasis::full(n.next_power_of_two().trailing_zeros() as usize).unwrap());
        let t = (0..b.dim())
            .map(|i| (i, i, Complex64::new(*vals.get(i).unwrap_or(&100.0), 0.0)))
            .collect();
        Operator::from_triplets(b.clone(), b, t, true).unwrap()
    }

    #[test]
    fn diagonal_toys() {
        let sol = lowest_eigenpairs(&diag(&[3.0, 0.0, 2.0, 1.0]), 2, 1e-10).unwrap();
        assert!((sol.eigenvalues[0]).abs() < 1e-12 && (sol.eigenvalues[1] - 1.0).abs() < 1e-12);
        let sol = lowest_eigenpairs(&diag(&[0.0, 0.0, 0.0, 5.0]), 3, 1e-10).unwrap();
        assert_eq!(degeneracy(&sol, Some(1e-8)), 3);
    }

    fn mg(l: usize) -> Operator {
        let lay = chain_j1j2(l, 1.0, 0.5, true).unwrap();
        let b = Arc::new(SpinBasis::new(l, Some(HalfInt(0))).unwrap());
        assemble(&lay, &lay.couplings, &b).unwrap()
    }

    #[test]
    fn majumdar_ghosh_l8_matches_dense() {
        let h = mg(8);
        let sol = lowest_eigenpairs(&h, 4, 1e-10).unwrap();
        let dense = eigvalsh(&h).unwrap();
        for (a, b) in sol.eigenvalues.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!((sol.eigenvalues[0] + 3.0).abs() < 1e-9);
        assert!((sol.eigenvalues[1] + 3.0).abs() < 1e-9);
        assert!(sol.eigenvalues[2] > sol.eigenvalues[1] + 0.1);
        assert_eq!(degeneracy(&sol, None), 2);
        for r in &sol.residuals {
            assert!(*r < 1e-8);
        }
        for i in 0..4 {
            for j in 0..4 {
                let o = sol.eigenvectors[i].inner(&sol.eigenvectors[j]).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((o - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn rung_singlet_point_is_unique() {
        let lay = ladder(4, 1.0, 0.0, 5.0, 0.0, true).unwrap();
        let b = Arc::new(SpinBasis::new(8, Some(HalfInt(0))).unwrap());
        let h = assemble(&lay, &lay.couplings, &b).unwrap();
        let sol = lowest_eigenpairs(&h, 3, 1e-10).unwrap();
        assert_eq!(degeneracy(&sol, None), 1);
    }

    #[test]
    fn projector_restricts_the_search() {
        // keep only amplitudes on even indices
        let h = diag(&[5.0, 0.0, 4.0, 1.0, 3.0, 2.0, 6.0, 7.0]);
        let p = |v: &mut [Complex64]| {
            for (i, x) in v.iter_mut().enumerate() {
                if i % 2 == 1 {
                    *x = Complex64::new(0.0, 0.0);
                }
            }
        };
        let opts = LanczosOptions::new(2, 1e-10).with_projector(&p);
        let sol = lowest_eigenpairs_with(&h, &opts).unwrap();
        assert!((sol.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((sol.eigenvalues[1] - 4.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn matches_dense_on_random_chains(
            l in 4usize..=8,
            j2 in -0.5f64..1.0,
            seed in 0u64..1000,
        ) {
            let lay = chain_j1j2(l, 1.0, j2, true).unwrap();
            let b = Arc::new(SpinBasis::full(l).unwrap());
            let h = assemble(&lay, &CouplingAssignment::new()
                .with(crate::models::CouplingClass::JLeg, 1.0)
                .with(crate::models::CouplingClass::J2nn, j2), &b).unwrap();
            let opts = LanczosOptions::new(3, 1e-10).with_seed(seed);
            let sol = lowest_eigenpairs_with(&h, &opts).unwrap();
            let dense = eigvalsh(&h).unwrap();
            for (a, b) in sol.eigenvalues.iter().zip(&dense) {
                prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
            }
        }
    }
}

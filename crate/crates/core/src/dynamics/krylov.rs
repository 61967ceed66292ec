use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hilbert::{inner, norm, SparseOperator, StateVector};
use crate::scalar::{lit, to_f64, Real};

/// Krylov propagation settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    /// Krylov dimension `m`.
    pub m: usize,
    /// Local error bound per substep.
    pub tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions { m: 20, tol: 1e-12 }
    }
}

/// `exp(-i H t) ψ` by adaptive Lanczos propagation.
pub fn evolve_static<T: Real>(
    h: &SparseOperator<T>,
    psi: &StateVector<T>,
    t: f64,
) -> Result<StateVector<T>> {
    evolve_static_with(h, psi, t, KrylovOptions::default())
}

pub fn evolve_static_with<T: Real>(
    h: &SparseOperator<T>,
    psi: &StateVector<T>,
    t: f64,
    opts: KrylovOptions,
) -> Result<StateVector<T>> {
    if !h.is_hermitian() {
        return Err(Error::invalid("propagator needs a Hermitian operator"));
    }
    if **psi.basis() != **h.basis() {
        return Err(Error::BasisMismatch("state and Hamiltonian bases differ".into()));
    }
    if opts.m < 2 {
        return Err(Error::invalid("Krylov dimension must be at least 2"));
    }
    let mut v = psi.amplitudes().to_vec();
    let mut ws = Workspace::new(h.nrows(), opts.m);
    let hn = to_f64(h.inf_norm()).max(1e-300);
    let mut tau = (t.abs()).min(opts.m as f64 / (2.0 * hn)).max(t.abs() * 1e-6);
    let mut done = 0.0;
    let total = t.abs();
    let sign = t.signum();
    while done < total {
        let step = tau.min(total - done);
        match ws.step(h, &v, sign * step, opts.tol)? {
            Ok(next) => {
                v = next;
                done += step;
                if step == tau {
                    tau *= 1.5;
                }
            }
            Err(err) => {
                tau = step * 0.5;
                if tau < total * 1e-12 || tau < 1e-14 {
                    return Err(Error::StepFailure {
                        achieved: err,
                        tolerance: opts.tol,
                    });
                }
            }
        }
    }
    StateVector::from_amplitudes(psi.basis().clone(), v)
}

struct Workspace<T: Real> {
    q: Vec<Vec<Complex<T>>>,
    w: Vec<Complex<T>>,
}

impl<T: Real> Workspace<T> {
    fn new(dim: usize, m: usize) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        Workspace {
            q: (0..=m.min(dim)).map(|_| vec![zero; dim]).collect(),
            w: vec![zero; dim],
        }
    }

    /// One substep; `Err(estimate)` when the error estimate exceeds `tol`.
    fn step(
        &mut self,
        h: &SparseOperator<T>,
        v: &[Complex<T>],
        dt: f64,
        tol: f64,
    ) -> Result<std::result::Result<Vec<Complex<T>>, f64>> {
        let nrm = to_f64(norm(v));
        if nrm == 0.0 {
            return Ok(Ok(v.to_vec()));
        }
        let m_cap = self.q.len() - 1;
        let inv = T::one() / lit(nrm);
        for (a, b) in self.q[0].iter_mut().zip(v) {
            *a = b.scale(inv);
        }
        let mut alpha = Vec::with_capacity(m_cap);
        let mut beta = Vec::with_capacity(m_cap);
        let mut m = 0;
        let mut happy = false;
        let mut beta_last = 0.0;
        while m < m_cap {
            h.apply_slice(&self.q[m], &mut self.w);
            let a = inner(&self.q[m], &self.w).re;
            alpha.push(to_f64(a));
            // full reorthogonalization, two passes
            for _ in 0..2 {
                for qj in &self.q[..=m] {
                    let c = inner(qj, &self.w);
                    for (x, y) in self.w.iter_mut().zip(qj) {
                        *x = *x - *y * c;
                    }
                }
            }
            let b = to_f64(norm(&self.w));
            m += 1;
            beta_last = b;
            if b < 1e-13 * (alpha[0].abs() + 1.0) {
                happy = true;
                break;
            }
            if m < m_cap {
                beta.push(b);
                let s = T::one() / lit(b);
                let (head, tail) = self.q.split_at_mut(m);
                let _ = head;
                for (x, y) in tail[0].iter_mut().zip(&self.w) {
                    *x = y.scale(s);
                }
            }
        }
        let tm = DMatrix::from_fn(m, m, |i, j| {
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
        let eig = tm.symmetric_eigen();
        // c = exp(-i dt T) e1
        let coeffs: Vec<Complex<f64>> = (0..m)
            .map(|r| {
                (0..m)
                    .map(|k| {
                        let s = eig.eigenvectors[(r, k)] * eig.eigenvectors[(0, k)];
                        Complex::from_polar(s, -dt * eig.eigenvalues[k])
                    })
                    .sum()
            })
            .collect();
        let err = if happy { 0.0 } else { beta_last * coeffs[m - 1].norm() * nrm };
        if err > tol {
            return Ok(Err(err));
        }
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = vec![zero; v.len()];
        for (k, ck) in coeffs.iter().enumerate() {
            let c = Complex::new(lit::<T>(ck.re * nrm), lit::<T>(ck.im * nrm));
            for (x, y) in out.iter_mut().zip(&self.q[k]) {
                *x = *x + *y * c;
            }
        }
        Ok(Ok(out))
    }
}

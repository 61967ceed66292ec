use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::basis::SpinBasis;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Amplitudes over a [`SpinBasis`].
#[derive(Clone, Debug)]
pub struct StateVector<T: Real> {
    basis: Arc<SpinBasis>,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn zeros(basis: Arc<SpinBasis>) -> Self {
        let amps = vec![Complex::new(T::zero(), T::zero()); basis.dim()];
        StateVector { basis, amps }
    }

    pub fn from_amplitudes(basis: Arc<SpinBasis>, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::BasisMismatch(format!(
                "{} amplitudes for basis of dimension {}",
                amps.len(),
                basis.dim()
            )));
        }
        Ok(StateVector { basis, amps })
    }

    /// Computational basis state `|config⟩`.
    pub fn basis_state(basis: Arc<SpinBasis>, config: u64) -> Result<Self> {
        let idx = basis
            .index_of(config)
            .ok_or_else(|| Error::invalid(format!("config {config:#b} not in basis")))?;
        let mut s = Self::zeros(basis);
        s.amps[idx] = Complex::new(T::one(), T::zero());
        Ok(s)
    }

    /// Normalized random state with Gaussian components, reproducible from `seed`.
    pub fn random(basis: Arc<SpinBasis>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..basis.dim())
            .map(|_| {
                let (a, b) = gaussian_pair(&mut rng);
                Complex::new(lit(a), lit(b))
            })
            .collect();
        let mut s = StateVector { basis, amps };
        s.normalize();
        s
    }

    pub fn basis(&self) -> &Arc<SpinBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Scales to unit norm and returns the previous norm.
    pub fn normalize(&mut self) -> T {
        let n = self.norm();
        if n > T::zero() {
            let inv = T::one() / n;
            for a in &mut self.amps {
                *a = a.scale(inv);
            }
        }
        n
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    fn check(&self, other: &Self) -> Result<()> {
        if *self.basis != *other.basis {
            return Err(Error::BasisMismatch("states live on different bases".into()));
        }
        Ok(())
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check(other)?;
        Ok(inner(&self.amps, &other.amps))
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: Complex<T>, other: &Self) -> Result<()> {
        self.check(other)?;
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a = *a + alpha * *b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: Complex<T>) {
        for a in &mut self.amps {
            *a = *a * alpha;
        }
    }

    pub fn scaled(mut self, alpha: Complex<T>) -> Self {
        self.scale(alpha);
        self
    }

    /// Linear combination `Σ_k w_k |s_k⟩` of states on a common basis.
    pub fn combination(states: &[&Self], weights: &[Complex<T>]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::invalid("empty combination"))?;
        let mut out = Self::zeros(first.basis.clone());
        for (s, &w) in states.iter().zip(weights) {
            out.axpy(w, s)?;
        }
        Ok(out)
    }

    /// `|⟨self|other⟩|²` for normalized inputs.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr())
    }
}

/// `Σ conj(a_i) b_i` with a fixed left-to-right reduction order.
#[inline]
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for (x, y) in a.iter().zip(b) {
        acc = acc + x.conj() * *y;
    }
    acc
}

#[inline]
pub fn norm<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt()
}

fn gaussian_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    // Box-Muller
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use super::basis::SpinBasis;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

// rows per rayon task; below this the matvec runs on the calling thread
const PAR_MIN_ROWS: usize = 4096;

/// Sparse complex matrix between two spin bases, stored as canonical CSR.
///
/// Entries are sorted row-major with duplicates merged and exact zeros
/// dropped, so two operators built from the same terms compare equal.
#[derive(Clone, Debug)]
pub struct SparseOperator<T: Real> {
    basis_in: Arc<SpinBasis>,
    basis_out: Arc<SpinBasis>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex<T>>,
    hermitian: bool,
}

impl<T: Real> SparseOperator<T> {
    /// Builds a canonical operator from `(row, col, value)` triplets.
    ///
    /// When `hermitian` is set the result is checked against its adjoint to
    /// within `1e-12` (relative to the largest entry).
    pub fn from_triplets(
        basis_in: Arc<SpinBasis>,
        basis_out: Arc<SpinBasis>,
        mut triplets: Vec<(usize, usize, Complex<T>)>,
        hermitian: bool,
    ) -> Result<Self> {
        let (nr, nc) = (basis_out.dim(), basis_in.dim());
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= nr || *c >= nc) {
            return Err(Error::invalid(format!(
                "entry ({r}, {c}) outside {nr}x{nc} operator"
            )));
        }
        if hermitian && *basis_in != *basis_out {
            return Err(Error::BasisMismatch(
                "a Hermitian operator needs equal input and output bases".into(),
            ));
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nr + 1];
        let mut cols: Vec<u32> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex<T>> = Vec::with_capacity(triplets.len());
        let mut rows: Vec<usize> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc as usize == c {
                    let last = vals.last_mut().unwrap();
                    *last = *last + v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c as u32);
            vals.push(v);
        }
        let zero = Complex::new(T::zero(), T::zero());
        let mut kc = Vec::with_capacity(cols.len());
        let mut kv = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != zero {
                row_ptr[r + 1] += 1;
                kc.push(c);
                kv.push(v);
            }
        }
        for r in 0..nr {
            row_ptr[r + 1] += row_ptr[r];
        }
        let op = SparseOperator {
            basis_in,
            basis_out,
            row_ptr,
            cols: kc,
            vals: kv,
            hermitian,
        };
        if hermitian {
            let scale = op.max_abs().max(T::one());
            let dev = op.hermiticity_defect();
            if dev > lit::<T>(1e-12) * scale {
                return Err(Error::invalid(format!(
                    "operator flagged Hermitian deviates from its adjoint by {dev}"
                )));
            }
        }
        Ok(op)
    }

    pub(crate) fn from_csr_unchecked(
        basis: Arc<SpinBasis>,
        row_ptr: Vec<usize>,
        cols: Vec<u32>,
        vals: Vec<Complex<T>>,
        hermitian: bool,
    ) -> Self {
        SparseOperator {
            basis_in: basis.clone(),
            basis_out: basis,
            row_ptr,
            cols,
            vals,
            hermitian,
        }
    }

    pub fn zero(basis: Arc<SpinBasis>) -> Self {
        let n = basis.dim();
        SparseOperator::from_csr_unchecked(basis, vec![0; n + 1], vec![], vec![], true)
    }

    pub fn identity(basis: Arc<SpinBasis>) -> Self {
        Self::diagonal(basis, |_| Complex::new(T::one(), T::zero()), true)
    }

    /// Diagonal operator with entry `f(config)` on each basis state.
    pub fn diagonal<F>(basis: Arc<SpinBasis>, f: F, hermitian: bool) -> Self
    where
        F: Fn(u64) -> Complex<T>,
    {
        let n = basis.dim();
        let zero = Complex::new(T::zero(), T::zero());
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(n);
        let mut vals = Vec::with_capacity(n);
        row_ptr.push(0);
        for (i, &cfg) in basis.configs().iter().enumerate() {
            let v = f(cfg);
            if v != zero {
                cols.push(i as u32);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseOperator::from_csr_unchecked(basis, row_ptr, cols, vals, hermitian)
    }

    pub fn basis(&self) -> &Arc<SpinBasis> {
        &self.basis_in
    }

    pub fn basis_in(&self) -> &Arc<SpinBasis> {
        &self.basis_in
    }

    pub fn basis_out(&self) -> &Arc<SpinBasis> {
        &self.basis_out
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn nrows(&self) -> usize {
        self.basis_out.dim()
    }

    pub fn ncols(&self) -> usize {
        self.basis_in.dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Canonical `(row, col, value)` entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex<T>)> + '_ {
        (0..self.nrows()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k] as usize, self.vals[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.cols[lo..hi].binary_search(&(col as u32)) {
            Ok(k) => self.vals[lo + k],
            Err(_) => Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn max_abs(&self) -> T {
        self.vals
            .iter()
            .map(|v| v.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Largest absolute row sum, an upper bound on the spectral norm of a
    /// Hermitian operator.
    pub fn inf_norm(&self) -> T {
        (0..self.nrows())
            .map(|r| {
                self.vals[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.norm())
                    .sum::<T>()
            })
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// `y = A x` on raw amplitude slices. Rows are reduced sequentially in
    /// column order, so the result does not depend on the thread count.
    pub fn apply_slice(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        debug_assert_eq!(x.len(), self.ncols());
        debug_assert_eq!(y.len(), self.nrows());
        let row = |r: usize| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc = acc + self.vals[k] * x[self.cols[k] as usize];
            }
            acc
        };
        if y.len() >= 2 * PAR_MIN_ROWS && rayon::current_num_threads() > 1 {
            y.par_chunks_mut(PAR_MIN_ROWS)
                .enumerate()
                .for_each(|(chunk, ys)| {
                    let base = chunk * PAR_MIN_ROWS;
                    for (i, yi) in ys.iter_mut().enumerate() {
                        *yi = row(base + i);
                    }
                });
        } else {
            for (r, yi) in y.iter_mut().enumerate() {
                *yi = row(r);
            }
        }
    }

    pub fn apply(&self, psi: &StateVector<T>) -> Result<StateVector<T>> {
        if **psi.basis() != *self.basis_in {
            return Err(Error::BasisMismatch(
                "state basis differs from operator input basis".into(),
            ));
        }
        let mut out = StateVector::zeros(self.basis_out.clone());
        self.apply_slice(psi.amplitudes(), out.amplitudes_mut());
        Ok(out)
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector<T>) -> Result<Complex<T>> {
        let a = self.apply(psi)?;
        psi.inner(&a)
    }

    /// `⟨φ|A|ψ⟩`.
    pub fn matrix_element(&self, phi: &StateVector<T>, psi: &StateVector<T>) -> Result<Complex<T>> {
        let a = self.apply(psi)?;
        phi.inner(&a)
    }

    pub fn scaled(&self, alpha: Complex<T>) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v = *v * alpha;
        }
        out.hermitian = self.hermitian && alpha.im == T::zero();
        out
    }

    pub fn scaled_real(&self, alpha: T) -> Self {
        self.scaled(Complex::new(alpha, T::zero()))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if *self.basis_in != *other.basis_in || *self.basis_out != *other.basis_out {
            return Err(Error::BasisMismatch("operators act on different bases".into()));
        }
        Ok(())
    }

    /// `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, Complex::new(T::one(), T::zero()))
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, other: &Self, alpha: Complex<T>) -> Result<Self> {
        self.check_same(other)?;
        let mut t: Vec<_> = self.triplets().collect();
        t.extend(other.triplets().map(|(r, c, v)| (r, c, v * alpha)));
        let mut out = Self::from_triplets(self.basis_in.clone(), self.basis_out.clone(), t, false)?;
        out.hermitian = self.hermitian && other.hermitian && alpha.im == T::zero();
        Ok(out)
    }

    /// Sum of operators on a common basis.
    pub fn sum<'a, I>(basis: Arc<SpinBasis>, ops: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Self>,
        T: 'a,
    {
        let mut t = Vec::new();
        let mut herm = true;
        for op in ops {
            if *op.basis_in != *basis || *op.basis_out != *basis {
                return Err(Error::BasisMismatch("operator sum over different bases".into()));
            }
            herm &= op.hermitian;
            t.extend(op.triplets());
        }
        let mut out = Self::from_triplets(basis.clone(), basis, t, false)?;
        out.hermitian = herm;
        Ok(out)
    }

    /// Operator product `self · other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if *self.basis_in != *other.basis_out {
            return Err(Error::BasisMismatch("incompatible operator product".into()));
        }
        let mut t = Vec::new();
        for r in 0..self.nrows() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let mid = self.cols[k] as usize;
                let a = self.vals[k];
                for k2 in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    t.push((r, other.cols[k2] as usize, a * other.vals[k2]));
                }
            }
        }
        Self::from_triplets(other.basis_in.clone(), self.basis_out.clone(), t, false)
    }

    pub fn adjoint(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        let mut out = Self::from_triplets(self.basis_out.clone(), self.basis_in.clone(), t, false)
            .expect("adjoint of a valid operator");
        out.hermitian = self.hermitian;
        out
    }

    /// Largest elementwise deviation `|A_ij - conj(A_ji)|`.
    pub fn hermiticity_defect(&self) -> T {
        if self.nrows() != self.ncols() {
            return T::infinity();
        }
        let mut worst = T::zero();
        for (r, c, v) in self.triplets() {
            let d = (v - self.get(c, r).conj()).norm();
            worst = worst.max(d);
        }
        worst
    }

    /// Largest elementwise deviation between two operators.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        let d = self.add_scaled(other, Complex::new(-T::one(), T::zero()))?;
        Ok(d.max_abs())
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        ab.add_scaled(&ba, Complex::new(-T::one(), T::zero()))
    }

    /// Anticommutator `{self, other}`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        ab.add(&ba)
    }

    /// Marks the operator Hermitian after checking it.
    pub fn assert_hermitian(mut self) -> Result<Self> {
        let scale = self.max_abs().max(T::one());
        let dev = self.hermiticity_defect();
        if dev > lit::<T>(1e-12) * scale {
            return Err(Error::invalid(format!("operator is not Hermitian (defect {dev})")));
        }
        self.hermitian = true;
        Ok(self)
    }
}

/// Real linear combination `Σ_k c_k A_k` of operators sharing one sparsity
/// union, evaluated without re-sorting entries.
#[derive(Clone, Debug)]
pub struct OperatorCombination<T: Real> {
    basis: Arc<SpinBasis>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    // term-major: terms[k][entry]
    terms: Vec<Vec<Complex<T>>>,
    hermitian: Vec<bool>,
}

impl<T: Real> OperatorCombination<T> {
    pub fn new(basis: Arc<SpinBasis>, ops: &[&SparseOperator<T>]) -> Result<Self> {
        for op in ops {
            if *op.basis_in != *basis || *op.basis_out != *basis {
                return Err(Error::BasisMismatch("combination over different bases".into()));
            }
        }
        let n = basis.dim();
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut terms: Vec<Vec<Complex<T>>> = vec![Vec::new(); ops.len()];
        let zero = Complex::new(T::zero(), T::zero());
        let mut merged: Vec<u32> = Vec::new();
        for r in 0..n {
            merged.clear();
            for op in ops {
                merged.extend_from_slice(&op.cols[op.row_ptr[r]..op.row_ptr[r + 1]]);
            }
            merged.sort_unstable();
            merged.dedup();
            for (t, op) in ops.iter().enumerate() {
                let lo = op.row_ptr[r];
                let hi = op.row_ptr[r + 1];
                let mut k = lo;
                for &c in &merged {
                    if k < hi && op.cols[k] == c {
                        terms[t].push(op.vals[k]);
                        k += 1;
                    } else {
                        terms[t].push(zero);
                    }
                }
            }
            cols.extend_from_slice(&merged);
            row_ptr[r + 1] = cols.len();
        }
        Ok(OperatorCombination {
            basis,
            row_ptr,
            cols,
            terms,
            hermitian: ops.iter().map(|o| o.hermitian).collect(),
        })
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Evaluates `Σ_k coeffs[k] A_k`.
    pub fn evaluate(&self, coeffs: &[T]) -> SparseOperator<T> {
        assert_eq!(coeffs.len(), self.terms.len(), "one coefficient per term");
        let mut vals = vec![Complex::new(T::zero(), T::zero()); self.cols.len()];
        for (term, &ck) in self.terms.iter().zip(coeffs) {
            if ck == T::zero() {
                continue;
            }
            for (v, t) in vals.iter_mut().zip(term) {
                *v = *v + t.scale(ck);
            }
        }
        let herm = self
            .hermitian
            .iter()
            .zip(coeffs)
            .all(|(&h, &ck)| h || ck == T::zero());
        SparseOperator::from_csr_unchecked(
            self.basis.clone(),
            self.row_ptr.clone(),
            self.cols.clone(),
            vals,
            herm,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::dense::{to_dense, to_dvector};
    use crate::hilbert::ops::{exchange_bond, permutation_operator, sz_total};
    use crate::hilbert::HalfInt;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(basis: &Arc<SpinBasis>, seed: u64, density: f64) -> SparseOperator<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = basis.dim();
        let mut t = Vec::new();
        for r in 0..n {
            for c in r..n {
                if rng.random::<f64>() < density {
                    let v = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    if r == c {
                        t.push((r, c, Complex64::new(v.re, 0.0)));
                    } else {
                        t.push((r, c, v));
                        t.push((c, r, v.conj()));
                    }
                }
            }
        }
        SparseOperator::from_triplets(basis.clone(), basis.clone(), t, true).unwrap()
    }

    #[test]
    fn canonical_merging() {
        let b = Arc::new(SpinBasis::full(2).unwrap());
        let one = Complex64::new(1.0, 0.0);
        let t = vec![(1, 0, one), (0, 1, one), (1, 0, one), (2, 2, one), (2, 2, -one)];
        let op = SparseOperator::from_triplets(b.clone(), b, t, false).unwrap();
        let e: Vec<_> = op.triplets().collect();
        assert_eq!(e, vec![(0, 1, one), (1, 0, one * 2.0)]);
    }

    #[test]
    fn hermitian_flag_is_validated() {
        let b = Arc::new(SpinBasis::full(1).unwrap());
        let t = vec![(0, 1, Complex64::new(1.0, 0.0))];
        assert!(SparseOperator::from_triplets(b.clone(), b, t, true).is_err());
    }

    #[test]
    fn identity_apply_and_mismatch() {
        let b = Arc::new(SpinBasis::full(3).unwrap());
        let psi = StateVector::<f64>::random(b.clone(), 3);
        let out = SparseOperator::identity(b).apply(&psi).unwrap();
        assert_eq!(out.amplitudes(), psi.amplitudes());
        let other = Arc::new(SpinBasis::full(4).unwrap());
        let h = exchange_bond::<f64>(&other, 0, 1).unwrap();
        assert!(h.apply(&psi).is_err());
    }

    #[test]
    fn bonds_do_not_cross_sectors() {
        let b = Arc::new(SpinBasis::full(6).unwrap());
        let szt = sz_total::<f64>(&b);
        for (i, j) in [(0, 1), (2, 5), (5, 0)] {
            let h = exchange_bond::<f64>(&b, i, j).unwrap();
            for (r, c, _) in h.triplets() {
                assert_eq!(b.config_of(r).count_ones(), b.config_of(c).count_ones());
            }
            assert_eq!(h.commutator(&szt).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn combination_matches_sum() {
        let b = Arc::new(SpinBasis::new(6, Some(HalfInt(0))).unwrap());
        let h1 = exchange_bond::<f64>(&b, 0, 1).unwrap();
        let h2 = exchange_bond::<f64>(&b, 2, 4).unwrap();
        let comb = OperatorCombination::new(b.clone(), &[&h1, &h2]).unwrap();
        let direct = h1.scaled_real(0.3).add(&h2.scaled_real(-1.7)).unwrap();
        let v = comb.evaluate(&[0.3, -1.7]);
        assert!(v.is_hermitian());
        let psi = StateVector::random(b, 1);
        let (a, c) = (v.apply(&psi).unwrap(), direct.apply(&psi).unwrap());
        for (x, y) in a.amplitudes().iter().zip(c.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn f32_operators_work() {
        let b = Arc::new(SpinBasis::full(2).unwrap());
        let h = exchange_bond::<f32>(&b, 0, 1).unwrap();
        let up = StateVector::<f32>::basis_state(b, 0b11).unwrap();
        assert!((h.expectation(&up).unwrap().re - 0.25).abs() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn apply_matches_dense(n in 2usize..=8, seed in any::<u64>(), density in 0.05f64..0.6) {
            let b = Arc::new(SpinBasis::full(n).unwrap());
            let a = random_hermitian(&b, seed, density);
            let psi = StateVector::random(b, seed ^ 0x5a5a);
            let sparse = a.apply(&psi).unwrap();
            let dense = to_dense(&a) * to_dvector(&psi);
            for (x, y) in sparse.amplitudes().iter().zip(dense.iter()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn hermitian_forms(n in 2usize..=7, seed in any::<u64>()) {
            let b = Arc::new(SpinBasis::full(n).unwrap());
            let a = random_hermitian(&b, seed, 0.3);
            let phi = StateVector::random(b.clone(), seed.wrapping_add(1));
            let psi = StateVector::random(b, seed.wrapping_add(2));
            prop_assert!(a.expectation(&psi).unwrap().im.abs() < 1e-12);
            let l = a.matrix_element(&phi, &psi).unwrap();
            let r = a.matrix_element(&psi, &phi).unwrap().conj();
            prop_assert!((l - r).norm() < 1e-12);
        }

        #[test]
        fn permutations_compose(seed in any::<u64>(), n in 3usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sigma: Vec<usize> = (0..n).collect();
            let mut tau: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                sigma.swap(i, rng.random_range(0..=i));
                tau.swap(i, rng.random_range(0..=i));
            }
            let comp: Vec<usize> = (0..n).map(|i| sigma[tau[i]]).collect();
            let b = Arc::new(SpinBasis::full(n).unwrap());
            let ps = permutation_operator::<f64>(&b, &sigma).unwrap();
            let pt = permutation_operator::<f64>(&b, &tau).unwrap();
            let pc = permutation_operator::<f64>(&b, &comp).unwrap();
            let psi = StateVector::random(b, seed);
            let lhs = pc.apply(&psi).unwrap();
            let rhs = ps.apply(&pt.apply(&psi).unwrap()).unwrap();
            for (x, y) in lhs.amplitudes().iter().zip(rhs.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }
}

//! Dense complex operator algebra over finite, multi-mode Hilbert spaces.
//!
//! Every state, measurement element and unitary in this crate is an
//! [`Operator`]: a square complex matrix tagged with the per-mode dimensions
//! of the space it acts on. Multi-mode indices follow the left-operand-major
//! Kronecker convention, so for dims `[d0, d1]` the basis vector `|i⟩|k⟩`
//! sits at flat index `i * d1 + k`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Absolute tolerance used by the numerical predicates unless overridden.
pub const DEFAULT_TOL: f64 = 1e-9;

const EXP_MAX_TERMS: usize = 64;
const EXP_MAX_SQUARINGS: i32 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("mode dimensions must be nonempty with every entry >= 1, got {0:?}")]
    InvalidDims(Vec<usize>),
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("matrix side {side} does not match total dimension {total} of {dims:?}")]
    ShapeMismatch { dims: Vec<usize>, total: usize, side: usize },
    #[error("operator contains non-finite entries")]
    NonFinite,
    #[error("mode index {index} out of range for {modes} modes")]
    InvalidMode { index: usize, modes: usize },
    #[error("matrix exponential did not converge within {0} series terms")]
    NoConvergence(usize),
    #[error("ket of length {len} does not match total dimension {total}")]
    KetLength { len: usize, total: usize },
}

/// Ordered per-mode dimensions of a multi-mode space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeDims(Vec<usize>);

impl ModeDims {
    pub fn new(dims: Vec<usize>) -> Result<Self, HilbertError> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(HilbertError::InvalidDims(dims));
        }
        Ok(Self(dims))
    }

    /// Single-mode space of dimension `dim`.
    pub fn single(dim: usize) -> Result<Self, HilbertError> {
        Self::new(vec![dim])
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    fn concat(&self, other: &ModeDims) -> ModeDims {
        let mut dims = self.0.clone();
        dims.extend_from_slice(&other.0);
        ModeDims(dims)
    }
}

/// Square complex matrix acting on the space described by its [`ModeDims`].
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dims: ModeDims,
    mat: DMatrix<Complex64>,
}

impl Operator {
    /// Wraps a matrix, checking that it is square, matches `dims` and is finite.
    pub fn from_matrix(dims: ModeDims, mat: DMatrix<Complex64>) -> Result<Self, HilbertError> {
        let total = dims.total();
        if mat.nrows() != total || mat.ncols() != total {
            return Err(HilbertError::ShapeMismatch { dims: dims.0, total, side: mat.nrows().max(mat.ncols()) });
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(HilbertError::NonFinite);
        }
        Ok(Self { dims, mat })
    }

    /// Builds a single-mode operator from row-major rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, HilbertError> {
        let n = rows.len();
        let dims = ModeDims::single(n.max(1))?;
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(HilbertError::ShapeMismatch {
                dims: dims.0,
                total: n,
                side: rows.iter().map(Vec::len).max().unwrap_or(0),
            });
        }
        let mat = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_matrix(dims, mat)
    }

    pub fn identity(dims: &ModeDims) -> Self {
        let n = dims.total();
        Self { dims: dims.clone(), mat: DMatrix::identity(n, n) }
    }

    pub fn zeros(dims: &ModeDims) -> Self {
        let n = dims.total();
        Self { dims: dims.clone(), mat: DMatrix::zeros(n, n) }
    }

    /// Diagonal operator on a single mode.
    pub fn diagonal(entries: &[Complex64]) -> Result<Self, HilbertError> {
        let dims = ModeDims::single(entries.len())?;
        let n = entries.len();
        Self::from_matrix(dims, DMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { Complex64::ZERO }))
    }

    /// Real diagonal operator on a single mode.
    pub fn real_diagonal(entries: &[f64]) -> Result<Self, HilbertError> {
        let c: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&c)
    }

    /// Outer product `|ket⟩⟨ket|` on `dims`.
    pub fn projector(dims: &ModeDims, ket: &[Complex64]) -> Result<Self, HilbertError> {
        Self::outer(dims, ket, ket)
    }

    /// Outer product `|ket⟩⟨bra|` on `dims`; `bra` is conjugated here.
    pub fn outer(dims: &ModeDims, ket: &[Complex64], bra: &[Complex64]) -> Result<Self, HilbertError> {
        let total = dims.total();
        for v in [ket, bra] {
            if v.len() != total {
                return Err(HilbertError::KetLength { len: v.len(), total });
            }
        }
        Self::from_matrix(dims.clone(), DMatrix::from_fn(total, total, |i, j| ket[i] * bra[j].conj()))
    }

    /// `|k⟩⟨k|` on a single mode of dimension `dim`.
    pub fn basis_projector(dim: usize, k: usize) -> Result<Self, HilbertError> {
        let mut diag = vec![0.0; dim];
        if k >= dim {
            return Err(HilbertError::KetLength { len: k + 1, total: dim });
        }
        diag[k] = 1.0;
        Self::real_diagonal(&diag)
    }

    pub fn dims(&self) -> &ModeDims {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.side()).map(|i| (0..self.side()).map(|j| self.mat[(i, j)]).collect()).collect()
    }

    /// Real parts of the diagonal.
    pub fn real_diagonal_entries(&self) -> Vec<f64> {
        (0..self.side()).map(|i| self.mat[(i, i)].re).collect()
    }

    /// Relabels the mode structure without touching entries.
    pub fn with_dims(self, dims: ModeDims) -> Result<Self, HilbertError> {
        Self::from_matrix(dims, self.mat)
    }

    fn check_same(&self, other: &Operator) -> Result<(), HilbertError> {
        if self.dims != other.dims {
            return Err(HilbertError::DimensionMismatch { left: self.dims.0.clone(), right: other.dims.0.clone() });
        }
        Ok(())
    }

    /// Kronecker product, `self` on the slower-varying index.
    pub fn tensor(&self, other: &Operator) -> Operator {
        Operator { dims: self.dims.concat(&other.dims), mat: self.mat.kronecker(&other.mat) }
    }

    /// Traces out mode `mode`, leaving the remaining modes in order.
    pub fn partial_trace(&self, mode: usize) -> Result<Operator, HilbertError> {
        let dims = self.dims.dims();
        if mode >= dims.len() {
            return Err(HilbertError::InvalidMode { index: mode, modes: dims.len() });
        }
        let outer: usize = dims[..mode].iter().product();
        let traced = dims[mode];
        let inner: usize = dims[mode + 1..].iter().product();
        let reduced = outer * inner;
        let mut out = DMatrix::<Complex64>::zeros(reduced, reduced);
        for (ro, ri, r) in iter_split(outer, inner) {
            for (co, ci, c) in iter_split(outer, inner) {
                let mut acc = Complex64::ZERO;
                for t in 0..traced {
                    let row = (ro * traced + t) * inner + ri;
                    let col = (co * traced + t) * inner + ci;
                    acc += self.mat[(row, col)];
                }
                out[(r, c)] = acc;
            }
        }
        let mut rest: Vec<usize> = dims.to_vec();
        rest.remove(mode);
        if rest.is_empty() {
            rest.push(1);
        }
        Ok(Operator { dims: ModeDims(rest), mat: out })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Operator {
        Operator { dims: self.dims.clone(), mat: self.mat.adjoint() }
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator, HilbertError> {
        self.check_same(other)?;
        Ok(Operator { dims: self.dims.clone(), mat: &self.mat * &other.mat })
    }

    pub fn scale(&self, factor: Complex64) -> Operator {
        Operator { dims: self.dims.clone(), mat: self.mat.map(|z| z * factor) }
    }

    pub fn scale_real(&self, factor: f64) -> Operator {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn add(&self, other: &Operator) -> Result<Operator, HilbertError> {
        self.check_same(other)?;
        Ok(Operator { dims: self.dims.clone(), mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator, HilbertError> {
        self.check_same(other)?;
        Ok(Operator { dims: self.dims.clone(), mat: &self.mat - &other.mat })
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Operator) -> Result<Complex64, HilbertError> {
        self.check_same(other)?;
        let n = self.side();
        let mut acc = Complex64::ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.mat[(i, k)] * other.mat[(k, i)];
            }
        }
        Ok(acc)
    }

    /// Largest elementwise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64, HilbertError> {
        self.check_same(other)?;
        Ok(self.mat.iter().zip(other.mat.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Largest elementwise modulus.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Matrix exponential by scaling and squaring of a truncated Taylor series.
    pub fn matrix_exp(&self) -> Result<Operator, HilbertError> {
        let n = self.side();
        let norm = one_norm(&self.mat);
        let mut squarings = 0;
        if norm > 0.5 {
            squarings = (norm / 0.5).log2().ceil() as i32;
        }
        if squarings > EXP_MAX_SQUARINGS {
            return Err(HilbertError::NoConvergence(EXP_MAX_TERMS));
        }
        let scaled = self.mat.map(|z| z / 2f64.powi(squarings));
        let mut sum = DMatrix::<Complex64>::identity(n, n);
        let mut term = DMatrix::<Complex64>::identity(n, n);
        let mut converged = false;
        for k in 1..=EXP_MAX_TERMS {
            term = (&term * &scaled).map(|z| z / k as f64);
            sum += &term;
            if one_norm(&term) <= f64::EPSILON * 1e-2 * one_norm(&sum) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(HilbertError::NoConvergence(EXP_MAX_TERMS));
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        Operator::from_matrix(self.dims.clone(), sum)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.side();
        (0..n).all(|i| (i..n).all(|j| (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm() <= tol))
    }

    /// Eigenvalues of the hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.mat + self.mat.adjoint()).map(|z| z * 0.5);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Hermitian within `tol` and no eigenvalue below `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        self.hermitian_eigenvalues().first().is_none_or(|&min| min >= -tol)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let n = self.side();
        let prod = self.mat.adjoint() * &self.mat;
        let id = DMatrix::<Complex64>::identity(n, n);
        prod.iter().zip(id.iter()).all(|(a, b)| (a - b).norm() <= tol)
    }

    /// `⟨ket| self |ket⟩`.
    pub fn expectation(&self, ket: &[Complex64]) -> Result<Complex64, HilbertError> {
        let n = self.side();
        if ket.len() != n {
            return Err(HilbertError::KetLength { len: ket.len(), total: n });
        }
        let mut acc = Complex64::ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += ket[i].conj() * self.mat[(i, j)] * ket[j];
            }
        }
        Ok(acc)
    }
}

fn iter_split(outer: usize, inner: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..outer).flat_map(move |o| (0..inner).map(move |i| (o, i, o * inner + i)))
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `|⟨a|b⟩|²` for normalized kets.
pub fn ket_fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

/// Normalizes a ket in place, returning its original norm.
pub fn normalize(ket: &mut [Complex64]) -> f64 {
    let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        ket.iter_mut().for_each(|z| *z /= norm);
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_x() -> Operator {
        Operator::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]).unwrap()
    }

    #[test]
    fn identity_and_trace() {
        let d2 = ModeDims::single(2).unwrap();
        assert_eq!(Operator::identity(&d2).matrix(), &DMatrix::identity(2, 2));
        let d23 = ModeDims::new(vec![2, 3]).unwrap();
        let id = Operator::identity(&d23);
        assert_eq!(id.side(), 6);
        assert_eq!(id.matrix(), &DMatrix::identity(6, 6));
        let d22 = ModeDims::new(vec![2, 2]).unwrap();
        assert_eq!(Operator::identity(&d22).trace(), c(4., 0.));
    }

    #[test]
    fn invalid_dims_rejected() {
        assert!(ModeDims::new(vec![]).is_err());
        assert!(ModeDims::new(vec![2, 0]).is_err());
    }

    #[test]
    fn tensor_index_convention() {
        let i2 = Operator::identity(&ModeDims::single(2).unwrap());
        let i4 = i2.tensor(&i2);
        assert_eq!(i4.dims().dims(), &[2, 2]);
        assert_eq!(i4.matrix(), &DMatrix::identity(4, 4));
        let a = Operator::real_diagonal(&[1., 0.]).unwrap();
        let b = Operator::real_diagonal(&[0., 1.]).unwrap();
        assert_eq!(a.tensor(&b).real_diagonal_entries(), vec![0., 1., 0., 0.]);
    }

    #[test]
    fn partial_trace_of_single_mode_is_scalar() {
        let op = Operator::real_diagonal(&[0.25, 0.5, 2.0]).unwrap();
        let r = op.partial_trace(0).unwrap();
        assert_eq!(r.side(), 1);
        assert!((r.get(0, 0) - c(2.75, 0.)).norm() < 1e-15);
        assert_eq!(op.partial_trace(1), Err(HilbertError::InvalidMode { index: 1, modes: 1 }));
    }

    #[test]
    fn partial_trace_product_state() {
        let rho_b = Operator::from_rows(&[vec![c(0.7, 0.), c(0.1, 0.2)], vec![c(0.1, -0.2), c(0.3, 0.)]]).unwrap();
        let rho_c = Operator::real_diagonal(&[0.2, 0.5, 0.3]).unwrap();
        let joint = rho_b.tensor(&rho_c);
        assert!(joint.partial_trace(1).unwrap().max_abs_diff(&rho_b).unwrap() < 1e-15);
        assert!(joint.partial_trace(0).unwrap().max_abs_diff(&rho_c).unwrap() < 1e-15);
    }

    #[test]
    fn algebra_basics() {
        let a = Operator::from_rows(&[vec![c(1., 2.), c(3., -1.)], vec![c(0., 1.), c(-2., 0.5)]]).unwrap();
        let b = Operator::from_rows(&[vec![c(0.5, 0.), c(1., 1.)], vec![c(2., -3.), c(0., 0.)]]).unwrap();
        assert_eq!(a.adjoint().adjoint(), a);
        let ab = a.matmul(&b).unwrap().trace();
        let ba = b.matmul(&a).unwrap().trace();
        assert!((ab - ba).norm() < 1e-12);
        assert!((a.trace_product(&b).unwrap() - ab).norm() < 1e-12);
        let half = Operator::identity(&ModeDims::single(2).unwrap()).scale_real(0.5);
        assert_eq!(half.trace(), c(1., 0.));
        let three = Operator::identity(&ModeDims::single(3).unwrap());
        assert!(matches!(a.matmul(&three), Err(HilbertError::DimensionMismatch { .. })));
        assert!(a.add(&three).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let bad = DMatrix::from_element(1, 1, c(f64::NAN, 0.));
        assert_eq!(Operator::from_matrix(ModeDims::single(1).unwrap(), bad), Err(HilbertError::NonFinite));
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = Operator::zeros(&ModeDims::new(vec![2, 3]).unwrap());
        assert_eq!(z.matrix_exp().unwrap(), Operator::identity(z.dims()));
    }

    #[test]
    fn exp_of_pauli_x_rotation() {
        // exp(iθσx) = cosθ I + i sinθ σx
        let theta = 0.3;
        let u = sigma_x().scale(c(0., theta)).matrix_exp().unwrap();
        let expected = Operator::from_rows(&[
            vec![c(theta.cos(), 0.), c(0., theta.sin())],
            vec![c(0., theta.sin()), c(theta.cos(), 0.)],
        ])
        .unwrap();
        assert!(u.max_abs_diff(&expected).unwrap() < 1e-14);
        assert!(u.is_unitary(1e-12));
    }

    #[test]
    fn exp_large_norm_still_unitary() {
        let h = sigma_x().scale(c(0., 250.0));
        let u = h.matrix_exp().unwrap();
        assert!(u.is_unitary(1e-9));
        let expected_cos = 250f64.cos();
        assert!((u.get(0, 0).re - expected_cos).abs() < 1e-9);
    }

    #[test]
    fn predicates() {
        let v = [c(1., 0.), c(0., 0.)];
        let p = Operator::projector(&ModeDims::single(2).unwrap(), &v).unwrap();
        assert!(p.is_psd(DEFAULT_TOL));
        let neg = Operator::real_diagonal(&[1., -1e-3]).unwrap();
        assert!(neg.is_hermitian(1e-9));
        assert!(!neg.is_psd(1e-9));
        let skew = Operator::from_rows(&[vec![c(1., 0.), c(0., 1.)], vec![c(0., 1.), c(1., 0.)]]).unwrap();
        assert!(!skew.is_hermitian(1e-9));
        assert!(!skew.is_psd(1e-9));
        assert!(sigma_x().is_unitary(1e-12));
        assert!(!neg.is_unitary(1e-9));
    }

    #[test]
    fn fidelity_ignores_global_phase() {
        let mut a = vec![c(1., 0.), c(0., 1.)];
        normalize(&mut a);
        let b: Vec<Complex64> = a.iter().map(|z| z * Complex64::from_polar(1.0, 0.77)).collect();
        assert!((ket_fidelity(&a, &b) - 1.0).abs() < 1e-15);
    }
}

//! Dense complex linear algebra for the small matrices that show up here
//! (density matrices, Hamiltonians, unitaries up to a few dozen rows).
//!
//! Everything is row-major `Vec<Complex64>` storage. The Hermitian
//! eigensolver is a cyclic complex Jacobi method, which is accurate to
//! machine precision at these sizes and needs no LAPACK.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Maximum deviation from (skew-)Hermiticity accepted on input.
pub const SYMMETRY_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;
const MAX_EIGH_DIM: usize = 64;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count does not match shape");
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count does not match shape");
        Self { rows, cols, data: data.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Outer product |a⟩⟨b|.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |r, c| a[r] * b[c].conj())
    }

    /// Projector |v⟩⟨v|.
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// max |a − b| over entries. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Real part of tr(A†B), the Frobenius inner product used for search directions.
    pub fn inner_re(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
    }

    /// max |m − m†|.
    pub fn hermiticity_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                err = err.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        err
    }

    /// max |m + m†|.
    pub fn skewness_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                err = err.max((self[(r, c)] + self[(c, r)].conj()).norm());
            }
        }
        err
    }

    /// (m + m†)/2
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    /// (m − m†)/2
    pub fn skew_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| (self[(r, c)] - self[(c, r)].conj()) * 0.5)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Sub-matrix made of the first `n` columns.
    pub fn leading_columns(&self, n: usize) -> Self {
        assert!(n <= self.cols);
        Self::from_fn(self.rows, n, |r, c| self[(r, c)])
    }

    /// max |A†A − I|, the deviation of the columns from orthonormality.
    pub fn unitarity_error(&self) -> f64 {
        self.adjoint().matmul(self).max_abs_diff(&Self::identity(self.cols))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector of `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> Vec<C64> {
        self.eigenvectors.column(i)
    }

    /// V diag(f(λ)) V†
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let fl: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |r, c| {
            (0..n).map(|k| v[(r, k)] * fl[k] * v[(c, k)].conj()).sum()
        })
    }

    /// V diag(scale·w) V†, with one weight per eigenvalue.
    pub fn map_spectrum_weights(&self, weights: &[f64], scale: f64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(n, n, |r, c| {
            (0..n).filter(|&k| weights[k] != 0.0).map(|k| v[(r, k)] * (weights[k] * scale) * v[(c, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| C64::new(l, 0.0))
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// The input is symmetrized before the sweeps start, so entry-level
/// asymmetry up to [`SYMMETRY_TOL`] is absorbed.
pub fn eigh(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("eigh needs a square matrix, got {}x{}", m.rows, m.cols)));
    }
    let n = m.rows;
    if n > MAX_EIGH_DIM {
        return Err(Error::DimensionMismatch(format!("eigh supports dimension <= {MAX_EIGH_DIM}, got {n}")));
    }
    if !m.is_finite() {
        return Err(Error::InvalidState("matrix has non-finite entries".into()));
    }
    let asym = m.hermiticity_error();
    if asym > SYMMETRY_TOL {
        return Err(Error::NotHermitian(asym));
    }
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let total: f64 = a.data.iter().map(|z| z.norm_sqr()).sum();
    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = off_diagonal_sqr(&a);
        if off <= total * 1e-34 || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        let off = off_diagonal_sqr(&a);
        if off > total * 1e-30 && off > 0.0 {
            return Err(Error::NoConvergence(format!("Jacobi eigensolver after {MAX_SWEEPS} sweeps")));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { eigenvalues, eigenvectors })
}

fn off_diagonal_sqr(a: &ComplexMatrix) -> f64 {
    let n = a.rows;
    let mut off = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                off += a[(p, q)].norm_sqr();
            }
        }
    }
    off
}

/// One two-sided rotation zeroing a[p,q]. The pivot block
/// [[α, a],[ā, β]] is reduced to a real symmetric one by the phase of `a`,
/// then rotated with the usual small-angle Jacobi parameters.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // Q = [[c, s], [-s·conj(e), c·conj(e)]] on the (p, q) plane.
    let ep = phase;
    let em = phase.conj();
    let n = a.rows;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * em * s;
        a[(k, q)] = akp * s + akq * em * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * ep * s;
        a[(q, k)] = apk * s + aqk * ep * c;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * em * s;
        v[(k, q)] = vkp * s + vkq * em * c;
    }
}

/// Kronecker product: entry (i·rows_b + k, j·cols_b + l) = a[i,j]·b[k,l].
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    ComplexMatrix::from_fn(rows, cols, |r, c| {
        a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)]
    })
}

pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut out = ComplexMatrix::identity(1);
    for f in factors {
        out = kron(&out, f);
    }
    out
}

/// Partial trace over the subsystems listed in `traced` (zero-based).
///
/// Subsystem 0 is the most significant factor of the tensor product.
pub fn partial_trace(rho: &ComplexMatrix, dims: &[usize], traced: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !rho.is_square() || rho.rows != total {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {}x{} but subsystems multiply to {total}",
            rho.rows, rho.cols
        )));
    }
    if traced.is_empty() {
        return Err(Error::DimensionMismatch("no subsystem to trace out".into()));
    }
    let mut is_traced = vec![false; dims.len()];
    for &t in traced {
        if t >= dims.len() || is_traced[t] {
            return Err(Error::DimensionMismatch(format!("invalid traced subsystem index {t}")));
        }
        is_traced[t] = true;
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|&i| !is_traced[i]).collect();
    let gone: Vec<usize> = (0..dims.len()).filter(|&i| is_traced[i]).collect();
    let kept_dim: usize = kept.iter().map(|&i| dims[i]).product();
    let gone_dim: usize = gone.iter().map(|&i| dims[i]).product();

    // strides of each subsystem in the full index
    let mut stride = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * dims[i + 1];
    }
    let compose = |sub: &[usize], idx: usize| -> usize {
        let mut rem = idx;
        let mut full = 0;
        for &s in sub.iter().rev() {
            full += (rem % dims[s]) * stride[s];
            rem /= dims[s];
        }
        full
    };

    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for r in 0..kept_dim {
        let rf = compose(&kept, r);
        for c in 0..kept_dim {
            let cf = compose(&kept, c);
            let mut acc = ZERO;
            for g in 0..gone_dim {
                let gf = compose(&gone, g);
                acc += rho[(rf + gf, cf + gf)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// exp(t·x) for skew-Hermitian x, through the eigendecomposition of i·x.
pub fn expm_skew(x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(SkewExp::new(x)?.at(t))
}

/// A skew-Hermitian generator with its spectral data cached, so that
/// exp(t·x) is cheap to evaluate for many `t` along a geodesic.
#[derive(Clone, Debug)]
pub struct SkewExp {
    eig: HermitianEigen,
}

impl SkewExp {
    pub fn new(x: &ComplexMatrix) -> Result<Self> {
        if !x.is_square() {
            return Err(Error::DimensionMismatch("generator must be square".into()));
        }
        let skew = x.skewness_error();
        if skew > SYMMETRY_TOL {
            return Err(Error::NotSkewHermitian(skew));
        }
        // i·x is Hermitian; x = −i·h
        let h = x.skew_part().scale(I);
        Ok(Self { eig: eigh(&h)? })
    }

    /// Largest |eigenvalue| of the generator (its spectral norm).
    pub fn spectral_radius(&self) -> f64 {
        self.eig.eigenvalues.iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    pub fn at(&self, t: f64) -> ComplexMatrix {
        self.eig.map_spectrum(|l| C64::from_polar(1.0, -t * l))
    }
}

/// Nearest unitary (polar factor) of a square, full-rank matrix: U (U†U)^{-1/2}.
pub fn polar_unitary(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let gram = u.adjoint().matmul(u);
    let eig = eigh(&gram)?;
    if eig.eigenvalues[0] <= 0.0 {
        return Err(Error::InvalidState("rank-deficient matrix has no unitary polar factor".into()));
    }
    let inv_sqrt = eig.map_spectrum(|l| C64::new(1.0 / l.sqrt(), 0.0));
    Ok(u.matmul(&inv_sqrt))
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_major(2, 2, vec![ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨a|b⟩
pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let a = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        a.hermitian_part()
    }

    fn random_skew(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let a = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        a.skew_part()
    }

    #[test]
    fn eigh_diagonal_sorts_and_permutes() {
        let m = ComplexMatrix::from_real_diag(&[3.0, 1.0, 2.0]);
        let e = eigh(&m).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
        let expect = ComplexMatrix::from_real(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(e.eigenvectors.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn eigh_pauli_x() {
        let e = eigh(&pauli_x()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigh_random_8x8_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_hermitian(8, &mut rng);
        let e = eigh(&m).unwrap();
        assert!(e.reconstruct().max_abs_diff(&m) <= 1e-12);
        assert!(e.eigenvectors.unitarity_error() <= 1e-12);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(eigh(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eigh_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_hermitian(6, &mut rng);
        let a = eigh(&m).unwrap();
        let b = eigh(&m).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let d = kron(&ComplexMatrix::from_real_diag(&[1.0, 2.0]), &ComplexMatrix::from_real_diag(&[3.0, 4.0]));
        assert_eq!(d, ComplexMatrix::from_real_diag(&[3.0, 4.0, 6.0, 8.0]));
        // σx ⊗ σz: block (0,1) of σx is 1, so entry (0, 2) = σz[0,0] = 1
        let xz = kron(&pauli_x(), &pauli_z());
        assert_eq!(xz[(0, 2)], ONE);
        assert_eq!(xz[(1, 3)], -ONE);
        assert_eq!(xz[(0, 0)], ZERO);
    }

    #[test]
    fn partial_trace_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = [C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)];
        let red = partial_trace(&ComplexMatrix::projector(&phi), &[2, 2], &[1]).unwrap();
        assert!(red.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);

        let r1 = ComplexMatrix::from_row_major(2, 2, vec![C64::new(0.7, 0.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), C64::new(0.3, 0.0)]);
        let r2 = ComplexMatrix::from_real(2, 2, &[0.4, 0.0, 0.0, 0.6]);
        let red = partial_trace(&kron(&r1, &r2), &[2, 2], &[1]).unwrap();
        assert!(red.max_abs_diff(&r1) < 1e-15);
        let red = partial_trace(&kron(&r1, &r2), &[2, 2], &[0]).unwrap();
        assert!(red.max_abs_diff(&r2) < 1e-15);

        let mut ghz = vec![ZERO; 8];
        ghz[0] = C64::new(s, 0.0);
        ghz[7] = C64::new(s, 0.0);
        let red = partial_trace(&ComplexMatrix::projector(&ghz), &[2, 2, 2], &[1, 2]).unwrap();
        assert!(red.max_abs_diff(&ComplexMatrix::from_real_diag(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = ComplexMatrix::identity(4);
        assert!(partial_trace(&rho, &[2, 3], &[0]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[2]).is_err());
    }

    #[test]
    fn partial_trace_keeps_order_of_remaining_factors() {
        let a = ComplexMatrix::from_real_diag(&[0.9, 0.1]);
        let b = ComplexMatrix::from_real_diag(&[0.2, 0.3, 0.5]);
        let c = ComplexMatrix::from_real_diag(&[0.6, 0.4]);
        let red = partial_trace(&kron_all(&[&a, &b, &c]), &[2, 3, 2], &[1]).unwrap();
        assert!(red.max_abs_diff(&kron(&a, &c)) < 1e-15);
    }

    #[test]
    fn expm_skew_examples() {
        let z = ComplexMatrix::zeros(3, 3);
        assert!(expm_skew(&z, 2.5).unwrap().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);

        let theta = 0.7;
        let x = ComplexMatrix::from_real(2, 2, &[0.0, theta, -theta, 0.0]);
        let r = expm_skew(&x, 1.0).unwrap();
        let expect = ComplexMatrix::from_real(2, 2, &[theta.cos(), theta.sin(), -theta.sin(), theta.cos()]);
        assert!(r.max_abs_diff(&expect) < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_skew(6, &mut rng);
        assert!(expm_skew(&x, 0.3).unwrap().unitarity_error() <= 1e-12);
    }

    #[test]
    fn expm_skew_rejects_hermitian() {
        assert!(matches!(expm_skew(&pauli_x(), 1.0), Err(Error::NotSkewHermitian(_))));
    }

    #[test]
    fn polar_unitary_projects() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_skew(5, &mut rng);
        let u = expm_skew(&x, 1.0).unwrap();
        let noisy = &u + &ComplexMatrix::from_fn(5, 5, |_, _| C64::new(rng.gen_range(-1e-6..1e-6), 0.0));
        let p = polar_unitary(&noisy).unwrap();
        assert!(p.unitarity_error() < 1e-14);
        assert!(p.max_abs_diff(&u) < 1e-5);
    }

    fn hermitian_strategy() -> impl Strategy<Value = ComplexMatrix> {
        (1usize..=16, any::<u64>()).prop_map(|(n, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
            random_hermitian(n, &mut rng).scale_real(scale)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn eigh_reconstruction(m in hermitian_strategy()) {
            let e = eigh(&m).unwrap();
            let tol = 1e-12 * m.max_abs().max(1.0);
            prop_assert!(e.reconstruct().max_abs_diff(&m) <= tol);
            prop_assert!(e.eigenvectors.unitarity_error() <= 1e-12);
            prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn partial_trace_preserves_trace(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = ComplexMatrix::from_fn(8, 8, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let rho = a.matmul(&a.adjoint());
            let rho = rho.scale_real(1.0 / rho.trace().re);
            for traced in [&[0usize][..], &[1], &[2], &[0, 2], &[1, 2]] {
                let red = partial_trace(&rho, &[2, 2, 2], traced).unwrap();
                prop_assert!((red.trace() - rho.trace()).norm() <= 1e-13);
                prop_assert!(red.hermiticity_error() <= 1e-15);
            }
        }

        #[test]
        fn expm_skew_group_property(seed in any::<u64>(), s in -2.0f64..2.0, t in -2.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_skew(5, &mut rng);
            let g = SkewExp::new(&x).unwrap();
            let lhs = g.at(s).matmul(&g.at(t));
            prop_assert!(lhs.max_abs_diff(&g.at(s + t)) <= 1e-11);
        }

        #[test]
        fn kron_mixed_product(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut r = || ComplexMatrix::from_fn(2, 2, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let (a, b, c, d) = (r(), r(), r(), r());
            let lhs = kron(&a, &b).matmul(&kron(&c, &d));
            let rhs = kron(&a.matmul(&c), &b.matmul(&d));
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        }
    }
}

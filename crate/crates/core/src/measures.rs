//! Pure-state entanglement measures that serve as convex-roof integrands.

use crate::error::{Error, Result};
use crate::linalg::{eigh, partial_trace, vec_norm, ComplexMatrix, C64, ZERO};
use crate::state::{DensityMatrix, PureState, NORM_TOL};

/// Tolerance below zero that is still read as zero for quantities that are
/// non-negative analytically.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// A function on normalized pure states, the integrand of a convex roof.
pub trait PureMeasure: Sync {
    /// Dimension of the state space the measure acts on.
    fn dim(&self) -> usize;

    /// Value on a unit-norm state vector.
    fn evaluate(&self, psi: &[C64]) -> Result<f64>;

    fn upper_bound(&self) -> f64;

    fn label(&self) -> String;
}

/// The measures shipped with the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    /// Three-qubit residual tangle.
    ThreeTangle,
    /// von Neumann entropy (bits) of the first factor of a d₁×d₂ split.
    EntanglementEntropy { d1: usize, d2: usize },
    /// Squared concurrence of a two-qubit pure state, 4|ad − bc|².
    ConcurrenceSquared,
}

impl PureMeasure for Measure {
    fn dim(&self) -> usize {
        match *self {
            Measure::ThreeTangle => 8,
            Measure::EntanglementEntropy { d1, d2 } => d1 * d2,
            Measure::ConcurrenceSquared => 4,
        }
    }

    fn evaluate(&self, psi: &[C64]) -> Result<f64> {
        match *self {
            Measure::ThreeTangle => tangle_amplitudes(psi),
            Measure::EntanglementEntropy { d1, d2 } => entropy_amplitudes(psi, d1, d2),
            Measure::ConcurrenceSquared => {
                check_amplitudes(psi, 4)?;
                Ok(pure_concurrence(psi).powi(2))
            }
        }
    }

    fn upper_bound(&self) -> f64 {
        match *self {
            Measure::ThreeTangle | Measure::ConcurrenceSquared => 1.0,
            Measure::EntanglementEntropy { d1, d2 } => (d1.min(d2) as f64).log2(),
        }
    }

    fn label(&self) -> String {
        match *self {
            Measure::ThreeTangle => "three-tangle".into(),
            Measure::EntanglementEntropy { d1, d2 } => format!("entropy({d1}x{d2})"),
            Measure::ConcurrenceSquared => "concurrence^2".into(),
        }
    }
}

fn check_amplitudes(psi: &[C64], dim: usize) -> Result<()> {
    if psi.len() != dim {
        return Err(Error::InvalidState(format!("expected a {dim}-dimensional state, got {}", psi.len())));
    }
    let n = vec_norm(psi);
    if (n - 1.0).abs() > 1e3 * NORM_TOL {
        return Err(Error::InvalidState(format!("state norm {n} is not 1")));
    }
    Ok(())
}

/// σy ⊗ σy applied to a two-qubit vector.
#[inline]
fn spin_flip(v: &[C64]) -> [C64; 4] {
    [-v[3], v[2], v[1], -v[0]]
}

#[inline]
fn bilinear(a: &[C64], b: &[C64]) -> C64 {
    let fb = spin_flip(b);
    a.iter().zip(fb.iter()).map(|(x, y)| x * y).sum()
}

/// 2|ad − bc| for amplitudes (a, b, c, d).
pub fn pure_concurrence(psi: &[C64]) -> f64 {
    2.0 * (psi[0] * psi[3] - psi[1] * psi[2]).norm()
}

/// Squared concurrence of ρ = W W†, given the 4×R factor as a list of its
/// R columns.
///
/// The Wootters values μᵢ (square roots of the spectrum of ρ ρ̃) are the
/// singular values of the complex symmetric R×R matrix Z = Wᵀ(σy⊗σy)W. For
/// R ≤ 2 the result follows from ‖Z‖² and |det Z| without any square root of
/// a small eigenvalue.
pub fn concurrence_sq_from_factor(columns: &[&[C64]]) -> Result<f64> {
    let r = columns.len();
    match r {
        0 => Ok(0.0),
        1 => Ok(bilinear(columns[0], columns[0]).norm_sqr()),
        2 => {
            let z00 = bilinear(columns[0], columns[0]);
            let z01 = bilinear(columns[0], columns[1]);
            let z11 = bilinear(columns[1], columns[1]);
            let fro = z00.norm_sqr() + 2.0 * z01.norm_sqr() + z11.norm_sqr();
            let det = (z00 * z11 - z01 * z01).norm();
            Ok((fro - 2.0 * det).max(0.0))
        }
        _ => {
            let z = ComplexMatrix::from_fn(r, r, |i, j| bilinear(columns[i], columns[j]));
            let zz = z.adjoint().matmul(&z);
            let eig = eigh(&zz)?;
            let mut mu: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
            mu.sort_by(|a, b| b.total_cmp(a));
            let c = mu[0] - mu[1..].iter().sum::<f64>();
            Ok(c.max(0.0).powi(2))
        }
    }
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence_mixed(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::InvalidState(format!("concurrence needs a 4x4 state, got {}", rho.dim())));
    }
    let eig = rho.eigen()?;
    let lmax = eig.eigenvalues[3].max(0.0);
    let cols: Vec<Vec<C64>> = (0..4)
        .filter(|&i| eig.eigenvalues[i] > 1e-14 * lmax)
        .map(|i| {
            let s = eig.eigenvalues[i].sqrt();
            eig.eigenvector(i).into_iter().map(|z| z * s).collect()
        })
        .collect();
    let refs: Vec<&[C64]> = cols.iter().map(|c| c.as_slice()).collect();
    Ok(concurrence_sq_from_factor(&refs)?.sqrt())
}

/// Three-tangle 4 det ρ₁ − C²(ρ₁₂) − C²(ρ₁₃) of a three-qubit pure state.
pub fn tangle_pure(psi: &PureState) -> Result<f64> {
    tangle_amplitudes(psi.amplitudes())
}

fn tangle_amplitudes(psi: &[C64]) -> Result<f64> {
    check_amplitudes(psi, 8)?;
    // ρ₁ = Tr₂,₃ |ψ⟩⟨ψ|
    let mut r00 = 0.0;
    let mut r11 = 0.0;
    let mut r01 = ZERO;
    for k in 0..4 {
        r00 += psi[k].norm_sqr();
        r11 += psi[4 + k].norm_sqr();
        r01 += psi[k] * psi[4 + k].conj();
    }
    let det1 = r00 * r11 - r01.norm_sqr();

    // ρ₁₂ = Tr₃ |ψ⟩⟨ψ| = Σ_c φ_c φ_c†, φ_c[2a+b] = ψ[4a+2b+c]
    let p0 = [psi[0], psi[2], psi[4], psi[6]];
    let p1 = [psi[1], psi[3], psi[5], psi[7]];
    let c12 = concurrence_sq_from_factor(&[&p0, &p1])?;
    // ρ₁₃ = Tr₂ |ψ⟩⟨ψ| = Σ_b φ_b φ_b†, φ_b[2a+c] = ψ[4a+2b+c]
    let q0 = [psi[0], psi[1], psi[4], psi[5]];
    let q1 = [psi[2], psi[3], psi[6], psi[7]];
    let c13 = concurrence_sq_from_factor(&[&q0, &q1])?;

    clamp_unit(4.0 * det1 - c12 - c13, 1.0)
}

fn clamp_unit(value: f64, upper: f64) -> Result<f64> {
    if value < -NEGATIVE_CLAMP {
        return Err(Error::Numerical(format!("negative measure value {value:e}")));
    }
    if value > upper + NEGATIVE_CLAMP {
        return Err(Error::Numerical(format!("measure value {value} above {upper}")));
    }
    Ok(value.clamp(0.0, upper))
}

/// Entanglement entropy in bits of a d₁×d₂ pure state.
pub fn entanglement_entropy(psi: &PureState, d1: usize, d2: usize) -> Result<f64> {
    entropy_amplitudes(psi.amplitudes(), d1, d2)
}

fn entropy_amplitudes(psi: &[C64], d1: usize, d2: usize) -> Result<f64> {
    check_amplitudes(psi, d1 * d2)?;
    // reduced state M M†, M[i, j] = ψ[i·d₂ + j]
    let reduced = ComplexMatrix::from_fn(d1, d1, |i, k| {
        (0..d2).map(|j| psi[i * d2 + j] * psi[k * d2 + j].conj()).sum()
    });
    let spectrum: Vec<f64> = if d1 == 2 {
        let a = reduced[(0, 0)].re;
        let d = reduced[(1, 1)].re;
        let det = (a * d - reduced[(0, 1)].norm_sqr()).max(0.0);
        let half = 0.5 * (a + d);
        let big = half + (half * half - det).max(0.0).sqrt();
        let small = if big > 0.0 { det / big } else { 0.0 };
        vec![big, small]
    } else {
        eigh(&reduced)?.eigenvalues
    };
    let s: f64 = spectrum
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum();
    clamp_unit(s, (d1.min(d2) as f64).log2())
}

/// Reduced state on the first factor, exposed for reporting.
pub fn reduced_first(psi: &PureState, d1: usize, d2: usize) -> Result<ComplexMatrix> {
    partial_trace(&psi.projector(), &[d1, d2], &[1])
}

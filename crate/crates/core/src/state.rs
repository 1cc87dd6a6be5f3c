//! Pure and mixed quantum states, plus the three-qubit reference states.
//!
//! Basis convention: |s₁s₂s₃⟩ with site 1 the most significant bit and
//! ↑ ↔ 0, so |↑↑↑⟩ is index 0 and |↓↓↓⟩ index 7.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{eigh, vec_norm, ComplexMatrix, HermitianEigen, C64, ZERO};

pub const NORM_TOL: f64 = 1e-12;
pub const DENSITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Wraps amplitudes that must already be normalized to within 1e-12.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n = vec_norm(&amplitudes);
        if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {n} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let n = vec_norm(&amplitudes);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidState("cannot normalize a zero or non-finite vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= n);
        Ok(Self { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut a = vec![ZERO; dim];
        a[index] = C64::new(1.0, 0.0);
        Self { amplitudes: a }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.amplitudes)
    }

    /// |⟨self|other⟩|²
    pub fn fidelity(&self, other: &PureState) -> f64 {
        crate::linalg::vdot(&self.amplitudes, &other.amplitudes).norm_sqr()
    }
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let herm = matrix.hermiticity_error();
        if herm > DENSITY_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let matrix = matrix.hermitian_part();
        let eig = eigh(&matrix)?;
        if eig.eigenvalues[0] < -DENSITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {:e}", eig.eigenvalues[0])));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self { matrix: psi.projector() }
    }

    /// Σ wᵢ |ψᵢ⟩⟨ψᵢ| with weights summing to one.
    pub fn mixture(terms: &[(f64, &PureState)]) -> Result<Self> {
        let dim = terms.first().map(|(_, s)| s.dim()).ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (w, s) in terms {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch("mixture components differ in dimension".into()));
            }
            m = &m + &s.projector().scale_real(*w);
        }
        Self::new(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn eigen(&self) -> Result<HermitianEigen> {
        eigh(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).trace().re
    }

    /// U ρ U†
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::new(u.matmul(&self.matrix).matmul(&u.adjoint()))
    }
}

pub fn ghz_plus() -> PureState {
    ghz(1.0)
}

pub fn ghz_minus() -> PureState {
    ghz(-1.0)
}

fn ghz(sign: f64) -> PureState {
    let mut a = vec![ZERO; 8];
    a[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    a[7] = C64::new(sign * FRAC_1_SQRT_2, 0.0);
    PureState { amplitudes: a }
}

/// (|↑↑↓⟩ + |↑↓↑⟩ + |↓↑↑⟩)/√3
pub fn w_state() -> PureState {
    let s = 1.0 / 3f64.sqrt();
    let mut a = vec![ZERO; 8];
    for i in [1, 2, 4] {
        a[i] = C64::new(s, 0.0);
    }
    PureState { amplitudes: a }
}

/// Spin-flipped W: (|↓↓↑⟩ + |↓↑↓⟩ + |↑↓↓⟩)/√3
pub fn w_flipped() -> PureState {
    let s = 1.0 / 3f64.sqrt();
    let mut a = vec![ZERO; 8];
    for i in [6, 5, 3] {
        a[i] = C64::new(s, 0.0);
    }
    PureState { amplitudes: a }
}

/// Σᵢ|ii⟩/√d
pub fn max_entangled(d: usize) -> PureState {
    let s = 1.0 / (d as f64).sqrt();
    let mut a = vec![ZERO; d * d];
    for i in 0..d {
        a[i * d + i] = C64::new(s, 0.0);
    }
    PureState { amplitudes: a }
}

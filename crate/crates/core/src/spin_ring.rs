//! Three spin-1/2 sites on a ring with anisotropic Heisenberg exchange and
//! site-dependent Zeeman fields:
//!
//! H = −J_xy Σᵢ (SᵢˣSᵢ₊₁ˣ + SᵢʸSᵢ₊₁ʸ) − J_z Σᵢ SᵢᶻSᵢ₊₁ᶻ + Σᵢ bᵢ·Sᵢ,  S₄ = S₁.
//!
//! Energies (couplings, Zeeman energies, k_B·T) share one unit; ħ = k_B = 1.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{eigh, kron_all, pauli_x, pauli_y, pauli_z, ComplexMatrix};
use crate::state::{DensityMatrix, PureState};

pub mod classical;

pub const SITES: usize = 3;
pub const DIM: usize = 8;
/// Relative tolerance deciding when two levels count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldKind {
    /// In-plane, pointing outwards along the site azimuths 2π(i−1)/3.
    Radial,
    /// Homogeneous along z.
    UniformZ,
    /// Homogeneous in-plane along x.
    UniformX,
    /// Explicit Zeeman vectors per site; `b` is ignored.
    Custom([[f64; 3]; 3]),
}

impl FieldKind {
    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::Radial => "radial",
            FieldKind::UniformZ => "z",
            FieldKind::UniformX => "x",
            FieldKind::Custom(_) => "custom",
        }
    }
}

impl std::str::FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "radial" => Ok(FieldKind::Radial),
            "z" | "uniform-z" | "uniformz" => Ok(FieldKind::UniformZ),
            "x" | "uniform-x" | "uniformx" => Ok(FieldKind::UniformX),
            other => Err(Error::Config(format!("unknown field kind '{other}' (radial, z, x)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinRingParams {
    pub jxy: f64,
    pub jz: f64,
    pub field: FieldKind,
    /// Zeeman energy |bᵢ|.
    pub b: f64,
    /// k_B·T
    pub temperature: f64,
}

impl SpinRingParams {
    pub fn isotropic(j: f64, field: FieldKind, b: f64, temperature: f64) -> Self {
        Self { jxy: j, jz: j, field, b, temperature }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.jxy.is_finite() && self.jz.is_finite()) {
            return Err(Error::Config("exchange couplings must be finite".into()));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::Config(format!("Zeeman energy must be >= 0, got {}", self.b)));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::Config(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        if let FieldKind::Custom(v) = self.field {
            if v.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::Config("custom field vectors must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn with_b(self, b: f64) -> Self {
        Self { b, ..self }
    }

    pub fn with_temperature(self, temperature: f64) -> Self {
        Self { temperature, ..self }
    }

    pub fn is_isotropic_radial(&self) -> bool {
        self.jxy == self.jz && matches!(self.field, FieldKind::Radial)
    }
}

/// Zeeman vectors of the three sites.
pub fn field_vectors(kind: FieldKind, b: f64) -> [[f64; 3]; 3] {
    match kind {
        FieldKind::Radial => {
            let mut out = [[0.0; 3]; 3];
            for (i, v) in out.iter_mut().enumerate() {
                let phi = TAU * i as f64 / 3.0;
                *v = [b * phi.cos(), b * phi.sin(), 0.0];
            }
            // site 1 exactly on the x axis, sum exactly zero in x
            out[0] = [b, 0.0, 0.0];
            out[2][0] = out[1][0];
            out[2][1] = -out[1][1];
            out
        }
        FieldKind::UniformZ => [[0.0, 0.0, b]; 3],
        FieldKind::UniformX => [[b, 0.0, 0.0]; 3],
        FieldKind::Custom(v) => v,
    }
}

/// Spin operator S^α on `site` (0-based) of the three-site register.
pub fn spin_operator(site: usize, axis: usize) -> ComplexMatrix {
    let pauli = match axis {
        0 => pauli_x(),
        1 => pauli_y(),
        _ => pauli_z(),
    };
    let half = pauli.scale_real(0.5);
    let id = ComplexMatrix::identity(2);
    let mut factors = [&id, &id, &id];
    factors[site] = &half;
    kron_all(&factors)
}

pub fn build_hamiltonian(params: &SpinRingParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let s: Vec<[ComplexMatrix; 3]> = (0..SITES).map(|i| [0, 1, 2].map(|a| spin_operator(i, a))).collect();
    let mut h = ComplexMatrix::zeros(DIM, DIM);
    for i in 0..SITES {
        let j = (i + 1) % SITES;
        let xx = s[i][0].matmul(&s[j][0]);
        let yy = s[i][1].matmul(&s[j][1]);
        let zz = s[i][2].matmul(&s[j][2]);
        h = &h - &(&xx + &yy).scale_real(params.jxy);
        h = &h - &zz.scale_real(params.jz);
    }
    let fields = field_vectors(params.field, params.b);
    for (i, bvec) in fields.iter().enumerate() {
        for (axis, &component) in bvec.iter().enumerate() {
            if component != 0.0 {
                h = &h + &s[i][axis].scale_real(component);
            }
        }
    }
    Ok(h.hermitian_part())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub energies: Vec<f64>,
    pub ground_degeneracy: usize,
    pub splitting_01: f64,
}

fn degeneracy_scale(energies: &[f64]) -> f64 {
    energies.iter().fold(1.0f64, |m, e| m.max(e.abs()))
}

pub fn spectrum(h: &ComplexMatrix) -> Result<SpectrumReport> {
    let energies = eigh(h)?.eigenvalues;
    Ok(spectrum_from_energies(energies))
}

fn spectrum_from_energies(energies: Vec<f64>) -> SpectrumReport {
    let tol = DEGENERACY_TOL * degeneracy_scale(&energies);
    let e0 = energies[0];
    let ground_degeneracy = energies.iter().take_while(|&&e| e - e0 <= tol).count();
    let splitting_01 = energies.get(ground_degeneracy).map_or(0.0, |&e| e - e0);
    SpectrumReport { energies, ground_degeneracy, splitting_01 }
}

/// Canonical state exp(−H/T)/Z; at T = 0 the uniform mixture over the
/// (numerically) degenerate ground space.
pub fn thermal_state(h: &ComplexMatrix, temperature: f64) -> Result<DensityMatrix> {
    if !(temperature >= 0.0) {
        return Err(Error::Domain(format!("temperature must be >= 0, got {temperature}")));
    }
    let eig = eigh(h)?;
    let e0 = eig.eigenvalues[0];
    let weights: Vec<f64> = if temperature == 0.0 {
        let tol = DEGENERACY_TOL * degeneracy_scale(&eig.eigenvalues);
        eig.eigenvalues.iter().map(|&e| if e - e0 <= tol { 1.0 } else { 0.0 }).collect()
    } else {
        eig.eigenvalues.iter().map(|&e| (-(e - e0) / temperature).exp()).collect()
    };
    let z: f64 = weights.iter().sum();
    let rho = eig.map_spectrum_weights(&weights, 1.0 / z);
    DensityMatrix::new(rho)
}

/// Fidelity with the W class representative of the field-favoured
/// magnetization sector: max(|⟨W|ψ⟩|², |⟨W̄|ψ⟩|²), W̄ the spin-flipped W.
pub fn w_class_fidelity(psi: &PureState) -> f64 {
    psi.fidelity(&crate::state::w_state()).max(psi.fidelity(&crate::state::w_flipped()))
}

/// Ground-state vector and its energy (lowest eigenpair).
pub fn ground_state(h: &ComplexMatrix) -> Result<(f64, PureState)> {
    let eig = eigh(h)?;
    let psi = PureState::normalized(eig.eigenvector(0))?;
    Ok((eig.eigenvalues[0], psi))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WConditions {
    pub b_opt: f64,
    pub delta_e_opt: f64,
}

/// Optimal z-field for the W ground state, `None` outside J_xy > 0, J_xy > J_z.
pub fn w_conditions(jxy: f64, jz: f64) -> Option<WConditions> {
    if !(jxy > 0.0 && jxy > jz) {
        return None;
    }
    let b_opt = (jxy - jz) / 2.0;
    let delta_e_opt = if jz < -2.0 * jxy { 1.5 * jxy } else { (jxy - jz) / 2.0 };
    Some(WConditions { b_opt, delta_e_opt })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalEnergy {
    pub value: f64,
    /// Set when b/J ≥ 0.5, where the small-field expansion degrades.
    pub domain_warning: bool,
}

/// Small-field expansion of the classical energy (units of J, constant
/// exchange offset dropped) at mean zenith `theta` and azimuth `phi`.
pub fn classical_energy(bj: f64, theta: f64, phi: f64) -> Result<ClassicalEnergy> {
    if !(bj > 0.0 && bj < 1.0) {
        return Err(Error::Domain(format!("b/J must lie in (0, 1), got {bj}")));
    }
    let value = -(bj * bj / 8.0) * (3.0 + (2.0 * theta).cos()) + (bj.powi(3) / 24.0) * (3.0 * phi).sin() * theta.sin().powi(3);
    Ok(ClassicalEnergy { value, domain_warning: bj >= 0.5 })
}

/// Height of the lowest classical barrier between the two poles, [bj² − bj³/6]/4.
pub fn classical_barrier(bj: f64) -> Result<f64> {
    if !(bj > 0.0 && bj < 1.0) {
        return Err(Error::Domain(format!("b/J must lie in (0, 1), got {bj}")));
    }
    Ok((bj * bj - bj.powi(3) / 6.0) / 4.0)
}

/// Tangle of the isotropic, radial-field ground state: (3 − 8x)/C + 2/√C with
/// C = 9 + 4x(4x − 3), x = b/J > 0.
pub fn ground_tangle_closed_form(bj: f64) -> Result<f64> {
    if !(bj > 0.0) || !bj.is_finite() {
        return Err(Error::Domain(format!("closed form needs b/J > 0, got {bj}")));
    }
    let c = 9.0 + 4.0 * bj * (4.0 * bj - 3.0);
    Ok((3.0 - 8.0 * bj) / c + 2.0 / c.sqrt())
}

/// Second-order overlap of the radial-field ground state with its GHZ
/// counterpart, 1 − (b/J)²/3.
pub fn ghz_overlap_leading_order(bj: f64) -> Result<f64> {
    if !(bj >= 0.0) || !bj.is_finite() {
        return Err(Error::Domain(format!("b/J must be >= 0, got {bj}")));
    }
    Ok(1.0 - bj * bj / 3.0)
}

/// The Hamiltonian with the three sites relabelled cyclically (1→2→3→1),
/// with the field vectors carried along.
pub fn cyclically_relabelled(params: &SpinRingParams) -> Result<ComplexMatrix> {
    let f = field_vectors(params.field, params.b);
    let rotated = SpinRingParams { field: FieldKind::Custom([f[2], f[0], f[1]]), ..*params };
    build_hamiltonian(&rotated)
}

/// Convenience: the full spectrum report of a parameter set.
pub fn spectrum_of(params: &SpinRingParams) -> Result<SpectrumReport> {
    spectrum(&build_hamiltonian(params)?)
}

/// Convenience: thermal state at the parameter set's own temperature.
pub fn thermal_state_of(params: &SpinRingParams) -> Result<DensityMatrix> {
    thermal_state(&build_hamiltonian(params)?, params.temperature)
}

//! Closed-form reference values for states whose convex roofs are known.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::measures::Measure;
use crate::spin_ring::{build_hamiltonian, ground_tangle_closed_form, thermal_state, FieldKind, SpinRingParams};
use crate::state::{ghz_plus, max_entangled, w_state, DensityMatrix, PureState};

/// Start of the nonzero branch of the GHZ/W mixture tangle.
pub fn ghz_w_threshold() -> f64 {
    let c = 4.0 * 2f64.cbrt();
    c / (3.0 + c)
}

/// Where the GHZ/W mixture tangle turns linear.
pub fn ghz_w_linear_threshold() -> f64 {
    0.5 + 3.0 * 465f64.sqrt() / 310.0
}

/// Three-tangle of p|GHZ⁺⟩⟨GHZ⁺| + (1−p)|W⟩⟨W|.
pub fn ghz_w_mixture_tangle(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
    }
    let p0 = ghz_w_threshold();
    let p1 = ghz_w_linear_threshold();
    let v = if p <= p0 {
        0.0
    } else if p <= p1 {
        p * p - 8.0 * 6f64.sqrt() / 9.0 * (p * (1.0 - p).powi(3)).sqrt()
    } else {
        1.0 - (1.0 - p) * (1.5 + 465f64.sqrt() / 18.0)
    };
    Ok(v.max(0.0))
}

pub fn ghz_w_mixture(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
    }
    DensityMatrix::mixture(&[(p, &ghz_plus()), (1.0 - p, &w_state())])
}

fn binary_entropy(x: f64) -> f64 {
    [x, 1.0 - x].iter().filter(|&&q| q > 0.0).map(|&q| -q * q.log2()).sum()
}

fn check_isotropic(fidelity: f64, d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Domain(format!("local dimension must be at least 2, got {d}")));
    }
    let lo = 1.0 / (d * d) as f64;
    if !(fidelity >= lo - 1e-15 && fidelity <= 1.0 + 1e-15) {
        return Err(Error::Domain(format!("fidelity must lie in [1/d², 1], got {fidelity}")));
    }
    Ok(())
}

/// Entanglement of formation (bits) of the d×d isotropic state of fidelity F,
/// for d = 2 and d = 3.
pub fn isotropic_eof(fidelity: f64, d: usize) -> Result<f64> {
    check_isotropic(fidelity, d)?;
    if d > 3 {
        return Err(Error::Domain(format!("isotropic EOF implemented for d = 2, 3; got {d}")));
    }
    let f = fidelity.clamp(0.0, 1.0);
    let df = d as f64;
    if f <= 1.0 / df {
        return Ok(0.0);
    }
    let hull_start = 4.0 * (df - 1.0) / (df * df);
    if d == 3 && f > hull_start {
        // linear segment of the convex hull
        return Ok(df * (df - 1.0).log2() / (df - 2.0) * (f - 1.0) + df.log2());
    }
    let gamma = ((f.sqrt() + ((df - 1.0) * (1.0 - f)).sqrt()).powi(2) / df).min(1.0);
    Ok(binary_entropy(gamma) + (1.0 - gamma) * (df - 1.0).log2())
}

/// F|Φ⁺⟩⟨Φ⁺| + (1−F)(I − |Φ⁺⟩⟨Φ⁺|)/(d²−1).
pub fn isotropic_state(fidelity: f64, d: usize) -> Result<DensityMatrix> {
    check_isotropic(fidelity, d)?;
    let n = d * d;
    let phi = max_entangled(d).projector();
    let rest = &ComplexMatrix::identity(n) - &phi;
    let m = &phi.scale_real(fidelity) + &rest.scale_real((1.0 - fidelity) / (n as f64 - 1.0));
    DensityMatrix::new(m)
}

/// Cayley hyperdeterminant form of the pure three-tangle, 4|d₁ − 2d₂ + 4d₃|.
pub fn tangle_hyperdeterminant(psi: &[C64]) -> Result<f64> {
    if psi.len() != 8 {
        return Err(Error::InvalidState(format!("expected 8 amplitudes, got {}", psi.len())));
    }
    let a = |s: &str| psi[usize::from_str_radix(s, 2).unwrap()];
    let d1 = a("000").powi(2) * a("111").powi(2)
        + a("001").powi(2) * a("110").powi(2)
        + a("010").powi(2) * a("101").powi(2)
        + a("100").powi(2) * a("011").powi(2);
    let d2 = a("000") * a("111") * a("011") * a("100")
        + a("000") * a("111") * a("101") * a("010")
        + a("000") * a("111") * a("110") * a("001")
        + a("011") * a("100") * a("101") * a("010")
        + a("011") * a("100") * a("110") * a("001")
        + a("101") * a("010") * a("110") * a("001");
    let d3 = a("000") * a("110") * a("101") * a("011") + a("111") * a("001") * a("010") * a("100");
    Ok(4.0 * (d1 - 2.0 * d2 + 4.0 * d3).norm())
}

#[derive(Clone, Debug)]
pub struct OracleCase {
    pub label: String,
    pub family: String,
    pub state: DensityMatrix,
    pub measure: Measure,
    pub expected: f64,
    pub tolerance: f64,
}

pub const GHZ_W_TOLERANCE: f64 = 1e-6;
pub const ISOTROPIC_TOLERANCE: f64 = 1e-6;
pub const PURE_TOLERANCE: f64 = 1e-9;

/// p ∈ {0, 0.1, …, 1}.
pub fn ghz_w_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// Nine fidelities from 1/d to 1.
pub fn isotropic_grid(d: usize) -> Vec<f64> {
    let lo = 1.0 / d as f64;
    (0..9).map(|i| lo + (1.0 - lo) * i as f64 / 8.0).collect()
}

/// Field strengths b/J of the ground-state cases.
pub const GROUND_STATE_FIELDS: [f64; 4] = [0.1, 0.3, 0.5, 0.8];

pub fn oracle_suite() -> Result<Vec<OracleCase>> {
    let mut cases = Vec::new();
    for p in ghz_w_grid() {
        cases.push(OracleCase {
            label: format!("ghz-w p={p:.1}"),
            family: "ghz-w".into(),
            state: ghz_w_mixture(p)?,
            measure: Measure::ThreeTangle,
            expected: ghz_w_mixture_tangle(p)?,
            tolerance: GHZ_W_TOLERANCE,
        });
    }
    for d in [2, 3] {
        for f in isotropic_grid(d) {
            cases.push(OracleCase {
                label: format!("isotropic d={d} F={f:.4}"),
                family: format!("isotropic-{d}"),
                state: isotropic_state(f, d)?,
                measure: Measure::EntanglementEntropy { d1: d, d2: d },
                expected: isotropic_eof(f, d)?,
                tolerance: ISOTROPIC_TOLERANCE,
            });
        }
    }
    // pure states: the roof is the measure itself
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let pure = [
        ("pure ghz", PureState::from_real(&[s, 0., 0., 0., 0., 0., 0., s])?, Measure::ThreeTangle, 1.0),
        ("pure w", w_state(), Measure::ThreeTangle, 0.0),
        ("pure product", PureState::basis(8, 3), Measure::ThreeTangle, 0.0),
        ("pure bell", max_entangled(2), Measure::EntanglementEntropy { d1: 2, d2: 2 }, 1.0),
        ("pure qutrit", max_entangled(3), Measure::EntanglementEntropy { d1: 3, d2: 3 }, 3f64.log2()),
    ];
    for (label, psi, measure, expected) in pure {
        cases.push(OracleCase {
            label: label.into(),
            family: "pure".into(),
            state: DensityMatrix::from_pure(&psi),
            measure,
            expected,
            tolerance: PURE_TOLERANCE,
        });
    }
    for bj in GROUND_STATE_FIELDS {
        let params = SpinRingParams::isotropic(1.0, FieldKind::Radial, bj, 0.0);
        cases.push(OracleCase {
            label: format!("ground state b/J={bj}"),
            family: "ground-state".into(),
            state: thermal_state(&build_hamiltonian(&params)?, 0.0)?,
            measure: Measure::ThreeTangle,
            expected: ground_tangle_closed_form(bj)?,
            tolerance: PURE_TOLERANCE,
        });
    }
    Ok(cases)
}

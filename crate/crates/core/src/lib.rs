//! Convex-roof entanglement measures evaluated by conjugate gradients on the
//! unitary manifold, together with the three-qubit Heisenberg ring whose
//! thermal states they are applied to.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod convex_roof;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod measures;
pub mod optimize;
pub mod oracles;
pub mod spin_ring;
pub mod state;

pub use convex_roof::{minimize, ConvexRoofResult, OptimizerOptions, PureDecomposition};
pub use error::{Error, Result};
pub use experiments::{PowerLawFit, SweepConfig, SweepRecord};
pub use linalg::{ComplexMatrix, HermitianEigen, C64};
pub use measures::{Measure, PureMeasure};
pub use oracles::OracleCase;
pub use spin_ring::{FieldKind, SpinRingParams, SpectrumReport};
pub use state::{DensityMatrix, PureState};

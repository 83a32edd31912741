//! Planning and validation of certification protocols for high-dimensional
//! entanglement of bipartite pure states.
//!
//! The crate computes separation probabilities and test counts in closed
//! form, builds the verification strategies they refer to, cross-checks
//! them with brute-force optimizers and samples Haar-random ensembles.

pub mod cli;
pub mod error;
pub mod figures;
pub mod linalg;
pub mod montecarlo;
pub mod operators;
pub mod oracle;
pub mod roots;
pub mod separation;
pub mod spectra;
pub mod twoqubit;
pub mod verify;

pub use error::{Error, Result};
pub use operators::{HermitianOperator, SpectralGap, Strategy};
pub use separation::{AdversarySet, Bounds, CertificationPlan, StrategyId};
pub use spectra::{PureState, SchmidtSpectrum};

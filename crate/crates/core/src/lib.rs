//! Panel unit-root statistics and their exact local asymptotic power.

pub mod case;
pub mod edgeworth;
pub mod error;
pub mod estimators;
pub mod fredholm;
pub mod io;
pub mod kernels;
pub mod montecarlo;
pub mod panel;
pub mod power;
pub mod quadrature;
pub mod sawa;

pub use case::DeterministicCase;
pub use error::{Error, Result};
pub use estimators::{TestOutcome, UnitRegression, VarianceDivisor};
pub use panel::PanelDataset;
pub use power::{CDistribution, CMomentSummary, TestVariant};

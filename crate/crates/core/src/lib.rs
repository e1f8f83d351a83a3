//! Numerical models of the generalized Gromoll-Meyer spheres `Σ^7_n`.
//!
//! * [`algebra`]: quaternions, octonions and the Hermitian product on `H^2`.
//! * [`powermaps`]: the octonion power maps `ρ_n` of `S^7` and the clutching data `b`, `σ`.
//! * [`bundle`]: the spaces `E^10_n`, their group actions and submanifold strata.
//! * [`geometry`]: the connection metric, horizontal lifts and geodesic checks.
//! * [`models`]: Milnor bundles and Brieskorn varieties used for comparison.
//! * [`verify`]: named verification suites, JSON reports and CSV traces.

pub mod algebra;
pub mod bundle;
pub mod error;
pub mod geometry;
pub mod models;
pub mod powermaps;
pub mod verify;

pub use algebra::{hermitian, qexp, ImaginaryQuaternion, Octonion, QuatPair, Quaternion, Sampler};
pub use bundle::{BundlePoint, GroupElement, OrbitWitness, Sp2Element};
pub use error::{GeomError, Result};
pub use geometry::{MetricParams, TangentVector};
pub use powermaps::{ClutchValue, SuspensionCoords};
pub use models::{BrieskornPoint5, BrieskornPoint7, MilnorGroupElement, MilnorPoint};
pub use verify::{run_suite, Report, Suite, SuiteConfig};

//! Certification of limited-detection-local (LDL) and
//! measurement-dependent-local (MDL) explanations of Bell-test data.
//!
//! Membership questions are answered by a phase-one simplex that returns a
//! checkable certificate either way: a mixture of polytope vertices, or a
//! dual vector that separates the data from every vertex. Both float and
//! exact rational arithmetic are supported.
//!
//! ```
//! use ldlcert::analysis::{critical_ratio, extract_hardy_terms};
//! use ldlcert::ldl::{membership_ldlps, DetectionBounds, Efficiencies};
//! use ldlcert::lp::SolverOptions;
//! use ldlcert::quantum::hardy_behavior;
//!
//! let b = hardy_behavior();
//! assert!(critical_ratio(&extract_hardy_terms(&b)?) < 1e-12);
//!
//! let bounds = DetectionBounds::per_party(0.1, 1.0)?;
//! let m = membership_ldlps::<f64>(&b, &Efficiencies::UniformUnknown, &bounds, &SolverOptions::default())?;
//! assert!(!m.certificate.is_feasible());
//! # Ok::<(), ldlcert::Error>(())
//! ```

pub mod analysis;
pub mod bridge;
pub mod correlations;
pub mod error;
pub mod files;
pub mod ldl;
pub mod lp;
pub mod mdl;
pub mod quantum;
pub mod strategies;

pub use error::{Error, Result};

//! Total, aleatoric and epistemic uncertainty for exponential-family
//! predictive distributions under a second-order distribution over their
//! parameters.
//!
//! Two decompositions are provided: entropy-based (conditional entropy and
//! expected KL to the mean-parameter predictive) and variance-based (law of
//! total variance). The [`axioms`] module checks both against a set of
//! desirable properties and reproduces known counterexamples.

pub mod axioms;
pub mod config;
pub mod error;
pub mod expfam;
pub mod measures;
pub mod numerics;
pub mod oracle;
pub mod second_order;

pub use error::{Result, UqError};
pub use expfam::{Family, ParamPoint};
pub use measures::{MeasureKind, UncertaintyReport};
pub use second_order::{Law1d, SecondOrderDist};

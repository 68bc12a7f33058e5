//! Life-contingency moments under fractional-age interpolation.
//!
//! Survival is known at integer ages (a table or a parametric law) and is
//! interpolated within each year under the uniform-distribution-of-deaths,
//! Balducci (hyperbolic), or constant-force assumption. Under Balducci the
//! moments of the usual insurance payoffs reduce to sums of exponential
//! integral differences; [`premiums`] evaluates those closed forms and
//! [`oracle`] recomputes the same expectations by quadrature and Monte Carlo.

pub mod error;
pub mod fractional;
pub mod mortality;
pub mod numeric;
pub mod oracle;
pub mod plot;
pub mod premiums;
pub mod special;

pub use error::{Error, Result};
pub use fractional::{FractionalAge, FractionalAssumption, LifetimeSampler};
pub use mortality::{Mortality, MortalityTable, Probabilities, SurvivalLaw, SurvivalModel};
pub use premiums::{ContractSpec, InterestEnvironment, MomentResult, PayoffKind, Term};

//! Closed-form moments of discounted future-lifetime payoffs under the
//! Balducci assumption.
//!
//! Every operation sums year by year (ascending, compensated) over the window
//! `[l, l + n)` after issue age `x`. A year with `p < P_SWITCH` contributes
//! the zero summand of a dead year; a year with `q < Q_SWITCH` uses the
//! `q -> 0` limit of its summand. `i = 0` (or `m = 0`) goes to the
//! undiscounted reductions instead of evaluating `Ei` at zero.

mod continuous;
mod kernel;
mod mthly;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::FractionalAssumption;
use crate::mortality::{Probabilities, SurvivalModel};

pub use continuous::{
    annually_increasing_moment, increasing_continuous_moment, lifetime_moment,
    term_insurance_moment, whole_life_moment,
};
pub use mthly::{mthly_increasing_moment, mthly_insurance_moment, mthly_mean_payment_time};

/// Summands with `q` below this use the limiting form.
pub const Q_SWITCH: f64 = 1e-12;

/// Summands with `p` below this are those of a year in which everybody dies.
pub const P_SWITCH: f64 = 1e-300;

/// Below this `q` the continuous-payoff integrals of orders 1 and 2 are
/// summed as a power series in `q` instead of the printed `Ei`/`log` forms.
pub const Q_SERIES: f64 = 0.05;

/// Per-year absolute tolerance of the quadrature used for orders `m >= 3`.
pub const HIGH_ORDER_TOL: f64 = 1e-13;

/// Annual effective rate with its discount factor and force of interest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterestEnvironment {
    pub i: f64,
    pub delta: f64,
    pub nu: f64,
}

impl InterestEnvironment {
    pub fn new(i: f64) -> Result<Self> {
        if !(i.is_finite() && i > -1.0) {
            return Err(Error::Domain(format!(
                "interest rate must be finite and > -1, got {i}"
            )));
        }
        Ok(Self {
            i,
            delta: i.ln_1p(),
            nu: 1.0 / (1.0 + i),
        })
    }

    /// `nu^t`.
    pub fn discount(&self, t: f64) -> f64 {
        (-self.delta * t).exp()
    }
}

/// Length of the window after the deferment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Term {
    Years(u32),
    /// Run to the model's horizon for the issue age.
    ToOmega,
}

/// Which life and window a moment is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractSpec {
    /// Issue age.
    pub x: u32,
    /// Whole years of deferment.
    pub l: u32,
    pub n: Term,
    /// Moment order. `0` gives the window's death probability.
    pub m: u32,
    /// Periods per year.
    pub j: u32,
    /// Extra deferment in periods of length `1/j`.
    pub n1: u32,
}

impl ContractSpec {
    pub fn new(x: u32, l: u32, n: Term, m: u32) -> Result<Self> {
        Self {
            x,
            l,
            n,
            m,
            j: 1,
            n1: 0,
        }
        .validated()
    }

    pub fn with_periods(self, j: u32, n1: u32) -> Result<Self> {
        Self { j, n1, ..self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.j == 0 {
            return Err(Error::InvalidContract(
                "periods per year j must be at least 1".into(),
            ));
        }
        if self.n1 >= self.j {
            return Err(Error::InvalidContract(format!(
                "sub-year deferment n1={} must be below j={}",
                self.n1, self.j
            )));
        }
        if self.n == Term::Years(0) {
            return Err(Error::InvalidContract(
                "term must be at least one year".into(),
            ));
        }
        Ok(self)
    }
}

/// Payoff families with a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayoffKind {
    /// `nu^T`
    Level,
    /// `T` (undiscounted)
    Lifetime,
    /// `T nu^T`
    IncreasingContinuous,
    /// `([T] + 1) nu^T`
    IncreasingAnnual,
    /// `nu^((floor(jT) + 1)/j)`
    Mthly,
    /// `([jT] + 1) nu^T`
    MthlyIncreasing,
    /// `(floor(jT) + 1)/j` (undiscounted)
    PaymentTime,
}

impl PayoffKind {
    pub const ALL: [PayoffKind; 7] = [
        Self::Level,
        Self::Lifetime,
        Self::IncreasingContinuous,
        Self::IncreasingAnnual,
        Self::Mthly,
        Self::MthlyIncreasing,
        Self::PaymentTime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Level => "level",
            Self::Lifetime => "lifetime",
            Self::IncreasingContinuous => "increasing-continuous",
            Self::IncreasingAnnual => "increasing-annual",
            Self::Mthly => "mthly",
            Self::MthlyIncreasing => "mthly-increasing",
            Self::PaymentTime => "payment-time",
        }
    }

    /// Whether the kind uses the sub-year grid `j`.
    pub fn is_periodic(self) -> bool {
        matches!(
            self,
            Self::Mthly | Self::MthlyIncreasing | Self::PaymentTime
        )
    }
}

impl std::fmt::Display for PayoffKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PayoffKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown payoff kind `{s}`")))
    }
}

/// A moment together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    pub value: f64,
    /// Number of years `n` actually summed.
    pub truncation_age: u32,
    /// Summands replaced by a limiting form (`q -> 0` or `p = 0`).
    pub limit_branches_used: u32,
    pub assumption: FractionalAssumption,
}

/// Evaluates the closed form for `kind`.
pub fn price(
    model: &(impl SurvivalModel + ?Sized),
    env: &InterestEnvironment,
    spec: &ContractSpec,
    kind: PayoffKind,
) -> Result<MomentResult> {
    match kind {
        PayoffKind::Level => term_insurance_moment(model, env, spec),
        PayoffKind::Lifetime => lifetime_moment(model, spec),
        PayoffKind::IncreasingContinuous => increasing_continuous_moment(model, env, spec),
        PayoffKind::IncreasingAnnual => annually_increasing_moment(model, env, spec),
        PayoffKind::Mthly => mthly_insurance_moment(model, env, spec),
        PayoffKind::MthlyIncreasing => mthly_increasing_moment(model, env, spec),
        PayoffKind::PaymentTime => mthly_mean_payment_time(model, spec),
    }
}

/// Number of years in the window, resolving [`Term::ToOmega`].
pub fn resolve_term(model: &(impl SurvivalModel + ?Sized), spec: &ContractSpec) -> Result<u32> {
    let spec = spec.validated()?;
    match spec.n {
        Term::Years(n) => Ok(n),
        Term::ToOmega => {
            let h = model.horizon(spec.x)?;
            if h <= spec.l {
                return Err(Error::InvalidContract(format!(
                    "deferment {} reaches the horizon {h} of age {}",
                    spec.l, spec.x
                )));
            }
            Ok(h - spec.l)
        }
    }
}

/// Probabilities for every year of `[l, l + n)`.
pub(crate) fn window_years(
    model: &(impl SurvivalModel + ?Sized),
    x: u32,
    l: u32,
    n: u32,
) -> Result<Vec<(u32, Probabilities)>> {
    (l..l + n)
        .map(|k| model.probabilities(x, k).map(|pr| (k, pr)))
        .collect()
}

/// Which branch a year's summand takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Branch {
    Dead,
    Limit,
    Regular,
}

pub(crate) fn branch(pr: &Probabilities) -> Branch {
    if pr.p < P_SWITCH {
        Branch::Dead
    } else if pr.q < Q_SWITCH {
        Branch::Limit
    } else {
        Branch::Regular
    }
}

pub(crate) fn result(value: f64, n: u32, limits: u32) -> MomentResult {
    MomentResult {
        value,
        truncation_age: n,
        limit_branches_used: limits,
        assumption: FractionalAssumption::Balducci,
    }
}

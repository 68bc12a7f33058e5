//! Independent evaluation of `E g(T)`: year-by-year quadrature of `g`
//! against the interpolated density, inverse-CDF Monte Carlo, and the
//! comparison of the Balducci and UDD expectations for monotone payoffs.

use std::sync::Arc;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::{
    atom_at_year_start, density_in_year, FractionalAssumption, LifetimeSampler,
};
use crate::mortality::SurvivalModel;
use crate::numeric::{CompensatedSum, GaussKronrod};
use crate::premiums::{resolve_term, ContractSpec, InterestEnvironment, PayoffKind};

/// Samples per Monte Carlo work unit.
const CHUNK: usize = 8192;

/// Monotonicity of a payoff, used by [`ordering_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    NonIncreasing,
    NonDecreasing,
    Unknown,
}

/// A payoff `g(t)` as a function of the time of death after issue.
#[derive(Clone)]
pub struct Payoff {
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub monotonicity: Monotonicity,
    /// Equal pieces per year at whose edges `g` may jump.
    pub grid: u32,
}

impl std::fmt::Debug for Payoff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Payoff")
            .field("monotonicity", &self.monotonicity)
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl Payoff {
    pub fn new(g: impl Fn(f64) -> f64 + Send + Sync + 'static, monotonicity: Monotonicity) -> Self {
        Self {
            g: Arc::new(g),
            monotonicity,
            grid: 1,
        }
    }

    pub fn with_grid(mut self, grid: u32) -> Self {
        self.grid = grid.max(1);
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.g)(t)
    }
}

/// Years `[l, l + n)` after issue age `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub x: u32,
    pub l: u32,
    pub n: u32,
}

impl Window {
    pub fn new(x: u32, l: u32, n: u32) -> Self {
        Self { x, l, n }
    }

    fn contains(&self, t: f64) -> bool {
        t >= self.l as f64 && t < (self.l + self.n) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Absolute tolerance per integration piece.
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Initial equal splits of each piece.
    pub initial_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_subdivisions: 60,
            initial_subdivisions: 1,
        }
    }
}

/// `sum_k int_k^{k+1} g(t) f_x(t) dt` over the window, plus any atoms.
pub fn quadrature_expectation(
    model: &(impl SurvivalModel + ?Sized),
    assumption: FractionalAssumption,
    payoff: &Payoff,
    window: Window,
    config: &QuadratureConfig,
) -> Result<f64> {
    if config.abs_tol.is_nan() || config.abs_tol <= 0.0 {
        return Err(Error::Domain(
            "quadrature tolerance must be positive".into(),
        ));
    }
    let gk = GaussKronrod {
        abs_tol: config.abs_tol,
        rel_tol: 0.0,
        max_subdivisions: config.max_subdivisions,
        initial_subdivisions: config.initial_subdivisions,
    };
    let jf = payoff.grid as f64;
    let mut acc = CompensatedSum::new();
    for k in window.l..window.l + window.n {
        let pr = model.probabilities(window.x, k)?;
        let kf = k as f64;
        let atom = atom_at_year_start(&pr, assumption);
        if atom > 0.0 {
            acc.add(payoff.eval(kf) * atom);
        }
        if pr.kpx == pr.k1px || pr.kpx == 0.0 {
            continue;
        }
        for d in 0..payoff.grid {
            let a = kf + d as f64 / jf;
            let b = kf + (d + 1) as f64 / jf;
            let r = gk.integrate(
                // The only density error is the atom at t = 0, already added above.
                |t| payoff.eval(t) * density_in_year(&pr, assumption, t - kf).unwrap_or(0.0),
                a,
                b,
            )?;
            acc.add(r.value);
        }
    }
    Ok(acc.value())
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Mean of `g(T) 1{T in window}` over inverse-CDF draws.
///
/// Draw `i` takes the 64-bit word at position `i` of the ChaCha8 stream
/// seeded with `seed`, and chunks are reduced in index order, so the
/// estimate does not depend on how rayon schedules the chunks.
pub fn monte_carlo_expectation(
    model: &(impl SurvivalModel + ?Sized),
    assumption: FractionalAssumption,
    payoff: &Payoff,
    window: Window,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::Domain(
            "Monte Carlo needs at least one sample".into(),
        ));
    }
    let sampler = LifetimeSampler::new(model, assumption, window.x, window.l + window.n)?;
    let tail = sampler.tail_survival();
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(samples);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_word_pos(2 * start as u128);
            let mut sum = CompensatedSum::new();
            let mut sum_sq = CompensatedSum::new();
            for _ in start..end {
                let u: f64 = rng.sample(Open01);
                if u <= tail {
                    // Survives past the window.
                    continue;
                }
                let t = sampler.sample(u)?;
                if window.contains(t) {
                    let g = payoff.eval(t);
                    sum.add(g);
                    sum_sq.add(g * g);
                }
            }
            Ok((sum.value(), sum_sq.value()))
        })
        .collect::<Result<_>>()?;
    let mut sum = CompensatedSum::new();
    let mut sum_sq = CompensatedSum::new();
    for (s, s2) in partial {
        sum.add(s);
        sum_sq.add(s2);
    }
    let n = samples as f64;
    let mean = sum.value() / n;
    let var = if samples > 1 {
        ((sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        estimate: mean,
        std_error: (var / n).sqrt(),
        samples,
    })
}

/// Balducci and UDD expectations of a monotone payoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub balducci: f64,
    pub udd: f64,
    pub ordering_holds: bool,
}

/// Slack allowed in [`ordering_check`].
pub const ORDERING_SLACK: f64 = 1e-10;

/// Balducci's expectation is at least UDD's for non-increasing payoffs and
/// at most UDD's for non-decreasing ones.
pub fn ordering_check(
    model: &(impl SurvivalModel + ?Sized),
    payoff: &Payoff,
    window: Window,
    config: &QuadratureConfig,
) -> Result<OrderingReport> {
    if payoff.monotonicity == Monotonicity::Unknown {
        return Err(Error::Domain(
            "ordering check needs a monotone payoff".into(),
        ));
    }
    let balducci = quadrature_expectation(
        model,
        FractionalAssumption::Balducci,
        payoff,
        window,
        config,
    )?;
    let udd = quadrature_expectation(model, FractionalAssumption::Udd, payoff, window, config)?;
    let ordering_holds = match payoff.monotonicity {
        Monotonicity::NonIncreasing => balducci >= udd - ORDERING_SLACK,
        _ => balducci <= udd + ORDERING_SLACK,
    };
    Ok(OrderingReport {
        balducci,
        udd,
        ordering_holds,
    })
}

/// Payoff and window whose expectation the closed form for `kind` computes.
pub fn payoff_for(
    model: &(impl SurvivalModel + ?Sized),
    env: &InterestEnvironment,
    spec: &ContractSpec,
    kind: PayoffKind,
) -> Result<(Payoff, Window)> {
    let n = resolve_term(model, spec)?;
    let (l, j, n1) = (spec.l, spec.j, spec.n1);
    let mi = spec.m as i32;
    let md = spec.m as f64 * env.delta;
    let jf = j as f64;
    let discount = move |t: f64| (-md * t).exp();
    // (year, period) of t on the grid.
    let cell = move |t: f64| {
        let k = t.floor();
        let d = (((t - k) * jf).floor() as u32).min(j - 1);
        (k as u32, d)
    };
    // Cells the closed forms sum over.
    let in_layout = move |t: f64| {
        let (k, d) = cell(t);
        (k >= l && k < l + n && d >= n1) || (k == l + n && d < n1)
    };
    let decreasing_in_t = if md >= 0.0 {
        Monotonicity::NonIncreasing
    } else {
        Monotonicity::NonDecreasing
    };
    let payoff = match kind {
        PayoffKind::Level => Payoff::new(discount, decreasing_in_t),
        PayoffKind::Lifetime => Payoff::new(move |t| t.powi(mi), Monotonicity::NonDecreasing),
        PayoffKind::IncreasingContinuous => {
            Payoff::new(move |t| t.powi(mi) * discount(t), Monotonicity::Unknown)
        }
        PayoffKind::IncreasingAnnual => Payoff::new(
            move |t| (t.floor() + 1.0).powi(mi) * discount(t),
            Monotonicity::Unknown,
        ),
        PayoffKind::Mthly => Payoff::new(
            move |t| {
                if !in_layout(t) {
                    return 0.0;
                }
                let (k, d) = cell(t);
                discount(k as f64 + (d + 1) as f64 / jf)
            },
            Monotonicity::Unknown,
        )
        .with_grid(j),
        PayoffKind::MthlyIncreasing => Payoff::new(
            move |t| {
                if !in_layout(t) {
                    return 0.0;
                }
                let (k, d) = cell(t);
                ((j * k + d + 1) as f64).powi(mi) * discount(t)
            },
            Monotonicity::Unknown,
        )
        .with_grid(j),
        PayoffKind::PaymentTime => Payoff::new(
            move |t| {
                let (k, d) = cell(t);
                (k as f64 + (d + 1) as f64 / jf).powi(mi)
            },
            Monotonicity::NonDecreasing,
        )
        .with_grid(j),
    };
    let years = if kind.is_periodic() && n1 > 0 {
        n + 1
    } else {
        n
    };
    Ok((payoff, Window::new(spec.x, l, years)))
}

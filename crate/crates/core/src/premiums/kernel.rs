//! The year integral shared by the continuous payoffs:
//!
//! `K_r(beta) = int_k^{k+1} t^r e^{-beta t} / (1 - (k+1-t) q) dt`,
//!
//! i.e. `t^r e^{-beta t}` against the Balducci survival curve divided by
//! `_{k+1}p_x`. The printed closed forms evaluate it through `Ei` and `log`
//! and lose digits as `q -> 0`; here it is summed as a power series in `q`.

use crate::error::{Error, Result};
use crate::numeric::{CompensatedSum, GaussKronrod};

const MAX_TERMS: usize = 400;

/// `int_0^1 s^n e^{beta s} ds`.
fn moment_exp(n: u32, beta: f64) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    let mut pow = 1.0; // beta^j / j!
    for j in 0..MAX_TERMS {
        if j > 0 {
            pow *= beta / j as f64;
        }
        let term = pow / (n as f64 + j as f64 + 1.0);
        acc.add(term);
        if j > 0 && term.abs() <= 1e-18 * acc.value().abs() {
            return Ok(acc.value());
        }
    }
    Err(Error::NoConvergence {
        what: "exponential moment series",
        terms: MAX_TERMS,
    })
}

fn binomial(r: u32, i: u32) -> f64 {
    (0..i).fold(1.0, |c, s| c * (r - s) as f64 / (s + 1) as f64)
}

/// `K_r(beta)` for year `k` by the series `1/(1 - s q) = sum q^n s^n`, `q < 1`.
pub(crate) fn series(r: u32, beta: f64, k: u32, q: f64) -> Result<f64> {
    debug_assert!((0.0..1.0).contains(&q));
    let n_max = if q == 0.0 {
        0
    } else {
        ((1e-18f64).ln() / q.ln()).ceil().max(0.0) as u32
    };
    let a = k as f64 + 1.0;
    // With t = k + 1 - s the integrand is (a - s)^r e^{-beta a} e^{beta s} sum (q s)^n.
    let coef: Vec<f64> = (0..=r)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(r, i) * a.powi((r - i) as i32)
        })
        .collect();
    let moments: Vec<f64> = (0..=n_max + r)
        .map(|n| moment_exp(n, beta))
        .collect::<Result<_>>()?;
    let mut acc = CompensatedSum::new();
    let mut qn = 1.0;
    for n in 0..=n_max {
        let inner: f64 = coef
            .iter()
            .enumerate()
            .map(|(i, c)| c * moments[n as usize + i])
            .sum();
        acc.add(qn * inner);
        qn *= q;
    }
    Ok((-beta * a).exp() * acc.value())
}

/// `int_k^{k+1} w(t) / (1 - (k+1-t) q) dt` by adaptive quadrature.
pub(crate) fn quadrature<W: Fn(f64) -> f64>(w: W, k: u32, q: f64, abs_tol: f64) -> Result<f64> {
    let a = k as f64 + 1.0;
    let gk = GaussKronrod {
        abs_tol,
        rel_tol: 1e-14,
        max_subdivisions: 400,
        ..GaussKronrod::default()
    };
    gk.integrate(|t| w(t) / (1.0 - (a - t) * q), k as f64, a)
        .map(|r| r.value)
}

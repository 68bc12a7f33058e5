//! Payoffs paid at the moment of death: level, lifetime, continuously and
//! annually increasing.

use super::kernel;
use super::{
    branch, resolve_term, result, window_years, Branch, ContractSpec, InterestEnvironment,
    MomentResult, Term, HIGH_ORDER_TOL, Q_SERIES,
};
use crate::error::{Error, Result};
use crate::mortality::{Probabilities, SurvivalModel};
use crate::numeric::CompensatedSum;
use crate::special::ei_difference_scaled;

struct Window {
    n: u32,
    years: Vec<(u32, Probabilities)>,
    /// `_l p_x`
    start: f64,
    /// `_{l+n} p_x`
    end: f64,
}

fn window(model: &(impl SurvivalModel + ?Sized), spec: &ContractSpec) -> Result<Window> {
    if spec.j != 1 || spec.n1 != 0 {
        return Err(Error::InvalidContract(
            "payoffs at the moment of death take j = 1 and n1 = 0; use the periodic kinds".into(),
        ));
    }
    let n = resolve_term(model, spec)?;
    let years = window_years(model, spec.x, spec.l, n)?;
    let start = years.first().map(|(_, pr)| pr.kpx).unwrap_or(1.0);
    let end = years.last().map(|(_, pr)| pr.k1px).unwrap_or(start);
    Ok(Window {
        n,
        years,
        start,
        end,
    })
}

fn log_p(pr: &Probabilities) -> f64 {
    if pr.q < 0.5 {
        (-pr.q).ln_1p()
    } else {
        pr.p.ln()
    }
}

/// `E[nu^(mT); l <= T < l+n]`.
pub fn term_insurance_moment(
    model: &(impl SurvivalModel + ?Sized),
    env: &InterestEnvironment,
    spec: &ContractSpec,
) -> Result<MomentResult> {
    let w = window(model, spec)?;
    let md = spec.m as f64 * env.delta;
    if md == 0.0 {
        return Ok(result(w.start - w.end, w.n, 0));
    }
    let m = spec.m as f64;
    let (l, n) = (spec.l as f64, w.n as f64);
    let mut acc = CompensatedSum::new();
    acc.add(env.discount(m * l) * w.start);
    acc.add(-env.discount(m * (l + n)) * w.end);
    let mut limits = 0;
    for (k, pr) in &w.years {
        let k = *k as f64;
        let summand = match branch(pr) {
            Branch::Dead => {
                limits += 1;
                0.0
            }
            Branch::Limit => {
                limits += 1;
                env.discount(m * k) * (env.discount(m) - 1.0) * pr.kpx
            }
            Branch::Regular => {
                md * env.discount(m * (1.0 + k))
                    * (pr.k1px / pr.q)
                    * ei_difference_scaled(pr.p, pr.q, md)?
            }
        };
        acc.add(summand);
    }
    Ok(result(acc.value(), w.n, limits))
}

/// `E[nu^(mT); T >= l]`, summed up to the model's horizon.
pub fn whole_life_moment(
    model: &(impl SurvivalModel + ?Sized),
    env: &InterestEnvironment,
    spec: &ContractSpec,
) -> Result<MomentResult> {
    if spec.n != Term::ToOmega {
        return Err(Error::InvalidContract(
            "whole-life moment needs the term `to omega`".into(),
        ));
    }
    term_insurance_moment(model, env, spec)
}

/// `E[T^m; l <= T < l+n]`; `m = 0` gives the window's death probability.
pub fn lifetime_moment(
    model: &(impl SurvivalModel + ?Sized),
    spec: &ContractSpec,
) -> Result<MomentResult> {
    let w = window(model, spec)?;
    if spec.m == 0 {
        return Ok(result(w.start - w.end, w.n, 0));
    }
    let m = spec.m as i32;
    let (l, n) = (spec.l as f64, w.n as f64);
    let mut acc = CompensatedSum::new();
    acc.add(l.powi(m) * w.start);
    acc.add(-(l + n).powi(m) * w.end);
    let mut limits = 0;
    for (k, pr) in &w.years {
        let kf = *k as f64;
        let summand = match (branch(pr), spec.m) {
            (Branch::Dead, _) => {
                limits += 1;
                0.0
            }
            // log p / q -> -1
            (Branch::Limit, 1) => {
                limits += 1;
                pr.k1px
            }
            // (q + (p - kq) log p) / q^2 -> 1/2 + k
            (Branch::Limit, 2) => {
                limits += 1;
                2.0 * pr.k1px * (0.5 + kf)
            }
            (_, 1) => -pr.k1px * log_p(pr) / pr.q,
            (_, 2) if pr.q < Q_SERIES => 2.0 * pr.k1px * kernel::series(1, 0.0, *k, pr.q)?,
            (_, 2) => {
                let (p, q) = (pr.p, pr.q);
                2.0 * pr.k1px * (q + (p - kf * q) * log_p(pr)) / (q * q)
            }
            (_, _) => {
                let integral = kernel::quadrature(|t| t.powi(m - 1), *k, pr.q, HIGH_ORDER_TOL)?;
                spec.m as f64 * pr.k1px * integral
            }
        };
        acc.add(summand);
    }
    Ok(result(acc.value(), w.n, limits))
}

/// `E[(T nu^T)^m; l <= T < l+n]`.
pub fn increasing_continuous_moment(
    model: &(impl SurvivalModel + ?Sized),
    env: &InterestEnvironment,
    spec: &ContractSpec,
) -> Result<MomentResult> {
    if env.delta == 0.0 || spec.m == 0 {
        return lifetime_moment(model, spec);
    }
    let w = window(model, spec)?;
    let (i, delta, nu) = (env.i, env.delta, env.nu);
    let mi = spec.m as i32;
    let m = spec.m as f64;
    let md = m * delta;
    let (l, n) = (spec.l as f64, w.n as f64);
    let mut acc = CompensatedSum::new();
    acc.add(l.powi(mi) * env.discount(m * l) * w.start);
    acc.add(-(l + n).powi(mi) * env.discount(m * (l + n)) * w.end);
    let mut limits = 0;
    for (k, pr) in &w.years {
        let kf = *k as f64;
        let q = pr.q;
        let summand = match (branch(pr), spec.m) {
            (Branch::Dead, _) => {
                limits += 1;
                0.0
            }
            (Branch::Limit, 1) => {
                limits += 1;
                nu.powf(kf + 1.0) * pr.kpx * (1.0 - i * kf)
            }
            (Branch::Limit, 2) => {
                limits += 1;
                nu.powf(2.0 * kf + 2.0) * pr.kpx * (1.0 + 2.0 * kf - kf * kf * (i * i + 2.0 * i))
            }
            (_, 1 | 2) if q < Q_SERIES => {
                let k0 = kernel::series(spec.m - 1, md, *k, q)?;
                let k1 = kernel::series(spec.m, md, *k, q)?;
                m * pr.k1px * (k0 - delta * k1)
            }
            (_, 1 | 2) => increasing_printed(spec.m, kf, pr, env)?,
            (_, _) => {
                let integral = kernel::quadrature(
                    |t| t.powi(mi - 1) * (-md * t).exp() * (1.0 - delta * t),
                    *k,
                    q,
                    HIGH_ORDER_TOL,
                )?;
                m * pr.k1px * integral
            }
        };
        acc.add(summand);
    }
    Ok(result(acc.value(), w.n, limits))
}

/// Year-`k` summand of the order-1 and order-2 continuously increasing
/// moments in their `Ei` form.
fn increasing_printed(
    m: u32,
    kf: f64,
    pr: &Probabilities,
    env: &InterestEnvironment,
) -> Result<f64> {
    let (p, q) = (pr.p, pr.q);
    let (i, delta, nu) = (env.i, env.delta, env.nu);
    if m == 1 {
        let e1 = ei_difference_scaled(p, q, delta)?;
        let v = env.discount(kf + 1.0);
        return Ok(
            -i * pr.k1px * v / q - (1.0 - delta * (1.0 + kf - 1.0 / q)) * (pr.k1px / q) * v * e1
        );
    }
    let e2 = ei_difference_scaled(p, q, 2.0 * delta)?;
    let nu2 = nu * nu;
    let v2k = env.discount(2.0 * kf);
    let c = 1.0 + kf - 1.0 / q;
    let i1 = (v2k / q) * ((1.0 - nu2) / delta - 2.0 * c * nu2 * e2);
    let i2 = (v2k / q)
        * ((1.0 - nu2) / q
            + (-1.0 + nu2 + delta * (-2.0 + 4.0 * nu2 + 4.0 * kf * (-1.0 + nu2))) / (2.0 * delta)
            + 2.0 * delta * c * c * nu2 * e2);
    Ok(pr.k1px * (i1 + i2))
}

/// `E[(([T] + 1) nu^T)^m; l <= T < l+n]`.
pub fn annually_increasing_moment(
    model: &(impl SurvivalModel + ?Sized),
    env: &InterestEnvironment,
    spec: &ContractSpec,
) -> Result<MomentResult> {
    let w = window(model, spec)?;
    let mi = spec.m as i32;
    let m = spec.m as f64;
    let md = m * env.delta;
    let mut acc = CompensatedSum::new();
    let mut limits = 0;
    for (k, pr) in &w.years {
        let kf = *k as f64;
        let weight = (kf + 1.0).powi(mi);
        if md == 0.0 {
            acc.add(weight * (pr.kpx - pr.k1px));
            continue;
        }
        acc.add(pr.kpx * weight * env.discount(m * kf) * (1.0 - pr.p * env.discount(m)));
        let ei_part = match branch(pr) {
            Branch::Dead => {
                limits += 1;
                0.0
            }
            Branch::Limit => {
                limits += 1;
                weight * pr.kpx * env.discount(m * kf) * (env.discount(m) - 1.0)
            }
            Branch::Regular => {
                md * pr.k1px * weight * env.discount(m * (1.0 + kf)) / pr.q
                    * ei_difference_scaled(pr.p, pr.q, md)?
            }
        };
        acc.add(ei_part);
    }
    Ok(result(acc.value(), w.n, limits))
}

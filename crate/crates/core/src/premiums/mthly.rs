//! Payoffs on the grid of `j` periods per year.
//!
//! Cells are laid out as in the closed forms: every year `k` of `[l, l+n)`
//! contributes its periods `d = n1, ..., j-1`, and year `l + n` contributes
//! `d = 0, ..., n1-1`.

use super::{
    branch, resolve_term, result, Branch, ContractSpec, InterestEnvironment, MomentResult,
};
use crate::error::{Error, Result};
use crate::fractional::subyear_mass;
use crate::mortality::{Probabilities, SurvivalModel};
use crate::numeric::CompensatedSum;
use crate::special::ei_difference_subyear_scaled;

struct Cell {
    k: u32,
    d: u32,
    pr: Probabilities,
}

fn cells(model: &(impl SurvivalModel + ?Sized), spec: &ContractSpec) -> Result<(u32, Vec<Cell>)> {
    let n = resolve_term(model, spec)?;
    let mut out = Vec::with_capacity((n as usize + 1) * spec.j as usize);
    for k in spec.l..spec.l + n {
        let pr = model.probabilities(spec.x, k)?;
        out.extend((spec.n1..spec.j).map(|d| Cell { k, d, pr }));
    }
    if spec.n1 > 0 {
        let k = spec.l + n;
        let pr = model.probabilities(spec.x, k)?;
        out.extend((0..spec.n1).map(|d| Cell { k, d, pr }));
    }
    Ok((n, out))
}

/// `E[nu^(m (floor(jT)+1)/j)]` over the cells of the window.
pub fn mthly_insurance_moment(
    model: &(impl SurvivalModel + ?Sized),
    env: &InterestEnvironment,
    spec: &ContractSpec,
) -> Result<MomentResult> {
    let (n, cells) = cells(model, spec)?;
    let (m, jf) = (spec.m as f64, spec.j as f64);
    let value = cells
        .iter()
        .map(|c| {
            let pay = c.k as f64 + (c.d + 1) as f64 / jf;
            env.discount(m * pay) * subyear_mass(&c.pr, c.d, spec.j)
        })
        .collect::<CompensatedSum>()
        .value();
    Ok(result(value, n, 0))
}

/// `E[(([jT] + 1) nu^T)^m]` over the cells of the window.
pub fn mthly_increasing_moment(
    model: &(impl SurvivalModel + ?Sized),
    env: &InterestEnvironment,
    spec: &ContractSpec,
) -> Result<MomentResult> {
    let (n, cells) = cells(model, spec)?;
    let j = spec.j;
    let (m, jf) = (spec.m as f64, j as f64);
    let md = m * env.delta;
    let mut plain = CompensatedSum::new();
    let mut ei = CompensatedSum::new();
    let mut limits = 0;
    for c in &cells {
        let (pr, kf, df) = (&c.pr, c.k as f64, c.d as f64);
        let w = ((c.d + j * c.k + 1) as f64).powi(spec.m as i32);
        if md == 0.0 {
            plain.add(w * subyear_mass(pr, c.d, j));
            continue;
        }
        let start = kf + df / jf;
        let s_lo = if pr.p == 0.0 {
            if c.d == 0 {
                pr.kpx
            } else {
                0.0
            }
        } else {
            pr.k1px / (pr.p + df / jf * pr.q)
        };
        let s_hi = if pr.p == 0.0 {
            0.0
        } else {
            pr.k1px / (pr.p + (df + 1.0) / jf * pr.q)
        };
        plain.add(w * env.discount(m * start) * (s_lo - env.discount(m / jf) * s_hi));
        let b = match branch(pr) {
            Branch::Dead => {
                limits += 1;
                0.0
            }
            Branch::Limit => {
                limits += 1;
                w * pr.k1px * env.discount(m * start) * (1.0 - env.discount(m / jf))
            }
            Branch::Regular => {
                md * w * pr.k1px * env.discount(m * (1.0 + kf)) / pr.q
                    * ei_difference_subyear_scaled(pr.p, pr.q, md, c.d, j)?
            }
        };
        ei.add(b);
    }
    Ok(result(plain.value() - ei.value(), n, limits))
}

/// `E[((floor(jT) + 1)/j)^m; l <= T < l+n]` (no discounting, `n1 = 0`).
pub fn mthly_mean_payment_time(
    model: &(impl SurvivalModel + ?Sized),
    spec: &ContractSpec,
) -> Result<MomentResult> {
    if spec.n1 != 0 {
        return Err(Error::InvalidContract(
            "mean payment time is defined without sub-year deferment (n1 = 0)".into(),
        ));
    }
    let (n, cells) = cells(model, spec)?;
    let jf = spec.j as f64;
    let value = cells
        .iter()
        .map(|c| {
            let pay = c.k as f64 + (c.d + 1) as f64 / jf;
            pay.powi(spec.m as i32) * subyear_mass(&c.pr, c.d, spec.j)
        })
        .collect::<CompensatedSum>()
        .value();
    Ok(result(value, n, 0))
}

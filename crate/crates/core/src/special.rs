//! Exponential integrals `E1`, `Ei`, and the Ei differences that appear when
//! `nu^(m t)` is integrated against the Balducci density.
//!
//! Every premium formula multiplies an Ei difference by `nu^(-m/q) = e^(m delta/q)`,
//! which overflows long before the product does. The `*_scaled` variants
//! return that product directly, built from `e^(-y) Ei(y)`, which is bounded
//! for all `y != 0`.

use crate::error::{domain, Error, Result};
use crate::numeric::CompensatedSum;

/// Euler–Mascheroni constant, 20 significant digits.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `E1` uses its power series up to this argument and a continued fraction above.
pub const E1_SERIES_MAX: f64 = 1.0;

/// Positive-argument `Ei` uses its power series up to this argument and the
/// asymptotic expansion above.
pub const EI_SERIES_MAX: f64 = 40.0;

/// Hard cap on series and continued-fraction terms.
pub const MAX_TERMS: usize = 500;

const SERIES_RTOL: f64 = 1e-18;
const CF_RTOL: f64 = 1e-16;

fn check_finite(v: f64, name: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite, got {v}")))
    }
}

/// `sum_{k>=1} s^k / (k k!)` with `s = sign * z`.
fn power_series(z: f64, alternating: bool, what: &'static str) -> Result<f64> {
    let x = if alternating { -z } else { z };
    let mut acc = CompensatedSum::new();
    let mut power = 1.0; // x^k / k!
    for k in 1..=MAX_TERMS {
        power *= x / k as f64;
        let term = power / k as f64;
        acc.add(term);
        if term.abs() < SERIES_RTOL * acc.value().abs() {
            return Ok(acc.value());
        }
    }
    Err(Error::NoConvergence {
        what,
        terms: MAX_TERMS,
    })
}

/// `E1(z)` for `0 < z <= E1_SERIES_MAX`.
fn e1_series(z: f64) -> Result<f64> {
    let s = power_series(z, true, "E1 power series")?;
    Ok(-EULER_GAMMA - z.ln() - s)
}

/// `e^z E1(z)` by the continued fraction, modified Lentz.
fn e1_scaled_cf(z: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_TERMS {
        let an = -((i * i) as f64);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < CF_RTOL {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        what: "E1 continued fraction",
        terms: MAX_TERMS,
    })
}

/// `sum_{k>=0} k! / y^k`, truncated at its smallest term.
fn ei_asymptotic_sum(y: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    let mut term = 1.0;
    acc.add(term);
    for k in 1..=MAX_TERMS {
        let next = term * k as f64 / y;
        if next >= term || next < SERIES_RTOL * acc.value() {
            break;
        }
        term = next;
        acc.add(term);
    }
    acc.value()
}

/// `E1(z) = int_z^inf e^-t / t dt` for `z > 0`.
///
/// Results below the smallest normal double are flushed to zero.
pub fn exp_integral_e1(z: f64) -> Result<f64> {
    check_finite(z, "E1 argument")?;
    if z <= 0.0 {
        return Err(domain(format!("E1 requires z > 0, got {z}")));
    }
    let v = if z <= E1_SERIES_MAX {
        e1_series(z)?
    } else {
        (-z).exp() * e1_scaled_cf(z)?
    };
    Ok(if v < f64::MIN_POSITIVE { 0.0 } else { v })
}

/// `e^z E1(z)` for `z > 0`; finite for every positive argument.
pub fn exp_integral_e1_scaled(z: f64) -> Result<f64> {
    check_finite(z, "E1 argument")?;
    if z <= 0.0 {
        return Err(domain(format!("E1 requires z > 0, got {z}")));
    }
    if z <= E1_SERIES_MAX {
        Ok(z.exp() * e1_series(z)?)
    } else {
        e1_scaled_cf(z)
    }
}

/// Principal value `Ei(y) = int_-inf^y e^t / t dt` for `y != 0`.
///
/// Negative arguments go through `-E1(-y)`, so `Ei(-z) == -E1(z)` bit for bit.
pub fn exp_integral_ei(y: f64) -> Result<f64> {
    check_finite(y, "Ei argument")?;
    if y == 0.0 {
        return Err(domain("Ei is singular at 0"));
    }
    if y < 0.0 {
        return exp_integral_e1(-y).map(|v| -v);
    }
    if y <= EI_SERIES_MAX {
        let s = power_series(y, false, "Ei power series")?;
        return Ok(EULER_GAMMA + y.ln() + s);
    }
    let v = y.exp() / y * ei_asymptotic_sum(y);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(format!("Ei({y}) overflows")))
    }
}

/// `e^(-y) Ei(y)` for `y != 0`.
pub fn exp_integral_ei_scaled(y: f64) -> Result<f64> {
    check_finite(y, "Ei argument")?;
    if y == 0.0 {
        return Err(domain("Ei is singular at 0"));
    }
    if y < 0.0 {
        return exp_integral_e1_scaled(-y).map(|v| -v);
    }
    if y <= EI_SERIES_MAX {
        let s = power_series(y, false, "Ei power series")?;
        return Ok((-y).exp() * (EULER_GAMMA + y.ln() + s));
    }
    Ok(ei_asymptotic_sum(y) / y)
}

fn check_pq(p: f64, q: f64, delta: f64) -> Result<()> {
    check_finite(p, "p")?;
    check_finite(q, "q")?;
    check_finite(delta, "delta")?;
    if p <= 0.0 || q <= 0.0 {
        return Err(domain(format!(
            "Ei difference needs p > 0 and q > 0, got p={p}, q={q}"
        )));
    }
    if (p + q - 1.0).abs() > 1e-12 {
        return Err(domain(format!("p + q must equal 1, got {}", p + q)));
    }
    if delta == 0.0 {
        return Err(domain("Ei difference needs delta != 0"));
    }
    Ok(())
}

fn check_period(d: u32, j: u32) -> Result<()> {
    if j == 0 || d >= j {
        return Err(domain(format!(
            "sub-period index needs 0 <= d < j, got d={d}, j={j}"
        )));
    }
    Ok(())
}

/// `Ei(-delta p/q) - Ei(-delta/q)`.
pub fn ei_difference(p: f64, q: f64, delta: f64) -> Result<f64> {
    check_pq(p, q, delta)?;
    Ok(exp_integral_ei(-delta * p / q)? - exp_integral_ei(-delta / q)?)
}

/// `e^(delta/q) * [Ei(-delta p/q) - Ei(-delta/q)]`.
pub fn ei_difference_scaled(p: f64, q: f64, delta: f64) -> Result<f64> {
    check_pq(p, q, delta)?;
    // e^(delta/q) Ei(-delta p/q) = e^(delta (1-p)/q) G(-delta p/q) = e^delta G(..)
    Ok(delta.exp() * exp_integral_ei_scaled(-delta * p / q)? - exp_integral_ei_scaled(-delta / q)?)
}

/// `Ei(-delta (p/q + (d+1)/j)) - Ei(-delta (p/q + d/j))`.
///
/// With `(d, j) = (0, 1)` this is `-ei_difference(p, q, delta)`: the two
/// differences are taken in opposite order.
pub fn ei_difference_subyear(p: f64, q: f64, delta: f64, d: u32, j: u32) -> Result<f64> {
    check_pq(p, q, delta)?;
    check_period(d, j)?;
    let r = p / q;
    let hi = r + (d + 1) as f64 / j as f64;
    let lo = r + d as f64 / j as f64;
    Ok(exp_integral_ei(-delta * hi)? - exp_integral_ei(-delta * lo)?)
}

/// `e^(delta/q) * ei_difference_subyear(p, q, delta, d, j)`.
pub fn ei_difference_subyear_scaled(p: f64, q: f64, delta: f64, d: u32, j: u32) -> Result<f64> {
    check_pq(p, q, delta)?;
    check_period(d, j)?;
    let r = p / q;
    let c_hi = (d + 1) as f64 / j as f64;
    let c_lo = d as f64 / j as f64;
    let hi = (delta * (1.0 - c_hi)).exp() * exp_integral_ei_scaled(-delta * (r + c_hi))?;
    let lo = (delta * (1.0 - c_lo)).exp() * exp_integral_ei_scaled(-delta * (r + c_lo))?;
    Ok(hi - lo)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::numeric::GaussKronrod;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Reference values: 25-digit mpmath evaluations.
    const E1_TABLE: &[(f64, f64)] = &[
        (1e-12, 27.053_805_451_028_015),
        (1e-8, 17.843_465_089_050_833),
        (0.1, 1.822_923_958_419_390_7),
        (0.5, 0.559_773_594_776_160_8),
        (1.0, 0.219_383_934_395_520_27),
        (2.0, 0.048_900_510_708_061_12),
        (5.0, 0.001_148_295_591_275_325_8),
        (10.0, 4.156_968_929_685_324_3e-6),
        (39.9, 1.148_616_282_532_706e-19),
        (50.0, 3.783_264_029_550_459e-24),
        (100.0, 3.683_597_761_682_032e-46),
        (300.0, 1.710_384_276_804_510_1e-133),
        (700.0, 1.406_518_766_234_033e-307),
    ];

    const EI_TABLE: &[(f64, f64)] = &[
        (0.1, -1.622_812_813_969_276_7),
        (1.0, 1.895_117_816_355_936_8),
        (5.0, 40.185_275_355_803_18),
        (20.0, 25_615_652.664_056_59),
        (39.9, 5_479_032_048_901_901.0),
        (40.0, 6_039_718_263_611_241.0),
        (40.1, 6_657_825_191_607_091.0),
        (50.0, 1.058_563_689_713_169e20),
        (100.0, 2.715_552_744_853_88e41),
        (700.0, 1.450_978_736_052_560_9e301),
    ];

    #[test]
    fn e1_matches_reference() {
        for &(z, want) in E1_TABLE {
            let got = exp_integral_e1(z).unwrap();
            assert!(rel(got, want) < 1e-13, "E1({z}) = {got}, want {want}");
        }
    }

    #[test]
    fn ei_matches_reference() {
        for &(y, want) in EI_TABLE {
            let got = exp_integral_ei(y).unwrap();
            assert!(rel(got, want) < 1e-12, "Ei({y}) = {got}, want {want}");
        }
    }

    #[test]
    fn scaled_variants_match_reference() {
        let e1s = [
            (0.1, 2.014_642_544_708_451_7),
            (1.0, 0.596_347_362_323_194_1),
            (40.0, 0.024_404_115_079_628_576),
            (700.0, 0.001_426_536_418_300_886_6),
        ];
        for (z, want) in e1s {
            assert!(
                rel(exp_integral_e1_scaled(z).unwrap(), want) < 1e-13,
                "z={z}"
            );
        }
        let eis = [
            (1.0, 0.697_174_883_235_066_1),
            (40.0, 0.025_658_862_785_975_145),
            (700.0, 0.001_430_618_100_935_163_4),
            (-1.0, -0.596_347_362_323_194_1),
        ];
        for (y, want) in eis {
            assert!(
                rel(exp_integral_ei_scaled(y).unwrap(), want) < 1e-13,
                "y={y}"
            );
        }
        // Far beyond the range where the unscaled value is representable.
        let big = exp_integral_e1_scaled(1e8).unwrap();
        assert!(rel(big, 1.0 / (1e8 + 1.0)) < 1e-15);
    }

    #[test]
    fn e1_at_one() {
        assert!(rel(exp_integral_e1(1.0).unwrap(), 0.219_383_934_395_520_3) < 1e-15);
    }

    #[test]
    fn e1_small_argument_tracks_log() {
        let z = 1e-8;
        let gap = exp_integral_e1(z).unwrap() - (-EULER_GAMMA - z.ln());
        // The exact gap is z - z^2/4 + ...; allow rounding of the O(20) operands.
        assert!(gap.abs() <= 1e-8 + 1e-14);
    }

    #[test]
    fn ei_negative_is_minus_e1() {
        for z in [0.5, 2.0] {
            assert_eq!(exp_integral_ei(-z).unwrap(), -exp_integral_e1(z).unwrap());
        }
        assert!(rel(exp_integral_ei(-1.0).unwrap(), -0.219_383_934_395_520_3) < 1e-15);
    }

    #[test]
    fn e1_underflows_to_zero() {
        assert_eq!(exp_integral_e1(800.0).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(exp_integral_e1(0.0).is_err());
        assert!(exp_integral_e1(-1.0).is_err());
        assert!(exp_integral_e1(f64::NAN).is_err());
        assert!(exp_integral_e1(f64::INFINITY).is_err());
        assert!(exp_integral_ei(0.0).is_err());
        assert!(exp_integral_ei(f64::NAN).is_err());
        assert!(exp_integral_ei(800.0).is_err());
        assert!(ei_difference(0.0, 1.0, 0.05).is_err());
        assert!(ei_difference(0.6, 0.6, 0.05).is_err());
        assert!(ei_difference(0.5, 0.5, 0.0).is_err());
        assert!(ei_difference_subyear(0.5, 0.5, 0.05, 2, 2).is_err());
        assert!(ei_difference_subyear(0.5, 0.5, 0.05, 0, 0).is_err());
    }

    #[test]
    fn crossover_continuity() {
        // Jump across each switch after removing the first-order change.
        let jump = |f: &dyn Fn(f64) -> f64, df: f64, x: f64| {
            let (lo, hi) = (x * (1.0 - 1e-12), x * (1.0 + 1e-12));
            let (a, b) = (f(lo), f(hi));
            (b - a - df * (hi - lo)).abs() / a.abs()
        };
        let e1 = |z: f64| exp_integral_e1(z).unwrap();
        let ei = |y: f64| exp_integral_ei(y).unwrap();
        for x in [E1_SERIES_MAX, EI_SERIES_MAX] {
            assert!(jump(&e1, -(-x).exp() / x, x) < 1e-12, "E1 jump at {x}");
        }
        assert!(jump(&ei, EI_SERIES_MAX.exp() / EI_SERIES_MAX, EI_SERIES_MAX) < 1e-12);
        let a = exp_integral_e1(E1_SERIES_MAX).unwrap();
        let b = exp_integral_e1(f64::from_bits(E1_SERIES_MAX.to_bits() + 1)).unwrap();
        assert!(rel(a, b) < 1e-12);
    }

    #[test]
    fn subyear_difference_reverses_whole_year_difference() {
        let (p, q, delta) = (0.5, 0.5, 1.05f64.ln());
        let whole = ei_difference(p, q, delta).unwrap();
        let sub = ei_difference_subyear(p, q, delta, 0, 1).unwrap();
        assert!(rel(sub, -whole) < 1e-14);
        let direct = exp_integral_ei(-delta).unwrap() - exp_integral_ei(-2.0 * delta).unwrap();
        assert!(rel(whole, direct) < 1e-15);
    }

    #[test]
    fn scaled_differences_match_unscaled() {
        for &(p, q, delta) in &[(0.9, 0.1, 0.05), (0.2, 0.8, 0.3), (0.7, 0.3, -0.02)] {
            let s = ei_difference_scaled(p, q, delta).unwrap();
            let u = (delta / q).exp() * ei_difference(p, q, delta).unwrap();
            assert!(rel(s, u) < 1e-12, "p={p}");
            for (d, j) in [(0, 1), (3, 12), (11, 12)] {
                let s = ei_difference_subyear_scaled(p, q, delta, d, j).unwrap();
                let u = (delta / q).exp() * ei_difference_subyear(p, q, delta, d, j).unwrap();
                assert!(rel(s, u) < 1e-11, "p={p} d={d}");
            }
        }
    }

    #[test]
    fn whole_year_difference_limit_as_q_vanishes() {
        let delta = 1.05f64.ln();
        let q = 1e-6;
        let lhs = delta / q * ei_difference_scaled(1.0 - q, q, delta).unwrap();
        let want = 1.0 - 1.0 / (-delta).exp();
        assert!(rel(lhs, want) < 1e-4);
    }

    #[test]
    fn subyear_difference_limit_as_q_vanishes() {
        let (m, delta) = (2.0, 1.05f64.ln());
        let nu = (-delta).exp();
        let q = 1e-6;
        for (d, j) in [(0u32, 1u32), (5, 12), (1, 2)] {
            let lhs =
                m * delta / q * ei_difference_subyear_scaled(1.0 - q, q, m * delta, d, j).unwrap();
            let want = nu.powf(m * (d as f64 / j as f64 - 1.0)) * (1.0 - nu.powf(m / j as f64));
            assert!(rel(lhs, want) < 1e-4, "d={d} j={j}");
        }
    }

    fn kernel_integral(k: f64, m: f64, q: f64, delta: f64, a: f64, b: f64) -> f64 {
        let gk = GaussKronrod {
            abs_tol: 1e-15,
            ..GaussKronrod::default()
        };
        gk.integrate(
            |t| (-m * delta * t).exp() / (1.0 - (1.0 + k - t) * q),
            k + a,
            k + b,
        )
        .unwrap()
        .value
    }

    fn kernel_closed_form(k: f64, m: f64, q: f64, delta: f64, d: u32, j: u32) -> f64 {
        // nu^(m(1+k-1/q))/q * Ei_k(m delta, d, j), with the e^(m delta/q) factor folded in.
        (-m * delta * (1.0 + k)).exp() / q
            * ei_difference_subyear_scaled(1.0 - q, q, m * delta, d, j).unwrap()
    }

    #[test]
    fn whole_year_integral_identity() {
        // k=3, m=2, q=0.1, i=5%: the whole-year kernel equals -nu^(..)/q * Ei_k(m delta).
        let (k, m, q, delta) = (3.0, 2.0, 0.1, 1.05f64.ln());
        let quad = kernel_integral(k, m, q, delta, 0.0, 1.0);
        let closed = -(-m * delta * (1.0 + k - 1.0 / q)).exp() / q
            * ei_difference(1.0 - q, q, m * delta).unwrap();
        assert!(rel(closed, quad) < 1e-10, "{closed} vs {quad}");
        assert!(rel(kernel_closed_form(k, m, q, delta, 0, 1), quad) < 1e-10);
    }

    #[test]
    fn monthly_integral_identity() {
        let (k, q, delta) = (2.0, 0.01, 1.05f64.ln());
        let quad = kernel_integral(k, 1.0, q, delta, 5.0 / 12.0, 6.0 / 12.0);
        let closed = kernel_closed_form(k, 1.0, q, delta, 5, 12);
        assert!(rel(closed, quad) < 1e-10, "{closed} vs {quad}");
    }

    #[test]
    fn whole_year_difference_is_negative_for_positive_delta() {
        // Ei decreases on (-inf, 0) and -delta p/q > -delta/q.
        assert!(ei_difference(0.9, 0.1, 0.05).unwrap() < 0.0);
        // Ei increases on (0, inf), so negative delta gives a negative difference too.
        assert!(ei_difference(0.9, 0.1, -0.05).unwrap() < 0.0);
    }

    proptest! {
        #[test]
        fn e1_strictly_decreasing_and_positive(a in 1e-6f64..300.0, frac in 0.01f64..0.99) {
            let b = a / frac;
            prop_assume!(b < 700.0);
            let ea = exp_integral_e1(a).unwrap();
            let eb = exp_integral_e1(b).unwrap();
            prop_assert!(ea > eb);
            prop_assert!(eb > 0.0);
        }

        #[test]
        fn subperiod_kernel_identity_random(
            k in 0u32..20,
            m in 1u32..4,
            q in 1e-4f64..0.9,
            i in prop::sample::select(vec![-0.02, 0.01, 0.05, 0.25]),
            j in 1u32..13,
            d_frac in 0.0f64..1.0,
        ) {
            let d = ((d_frac * j as f64) as u32).min(j - 1);
            let delta = (1.0f64 + i).ln();
            let quad = kernel_integral(k as f64, m as f64, q, delta, d as f64 / j as f64, (d + 1) as f64 / j as f64);
            let closed = kernel_closed_form(k as f64, m as f64, q, delta, d, j);
            prop_assert!(rel(closed, quad) < 1e-9, "{} vs {}", closed, quad);
        }
    }
}

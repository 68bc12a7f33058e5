//! Survival between integer ages under UDD, Balducci, and constant force.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mortality::{Probabilities, SurvivalModel};

/// How survival is interpolated within each year of age.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FractionalAssumption {
    /// `s` linear in `t`.
    Udd,
    /// `1/s` linear in `t`.
    Balducci,
    /// `ln s` linear in `t`.
    ConstantForce,
}

impl FractionalAssumption {
    pub const ALL: [FractionalAssumption; 3] = [Self::Udd, Self::Balducci, Self::ConstantForce];

    pub fn name(self) -> &'static str {
        match self {
            Self::Udd => "udd",
            Self::Balducci => "balducci",
            Self::ConstantForce => "constant-force",
        }
    }
}

impl std::fmt::Display for FractionalAssumption {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FractionalAssumption {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "udd" => Ok(Self::Udd),
            "balducci" => Ok(Self::Balducci),
            "constant-force" | "constant_force" | "cf" => Ok(Self::ConstantForce),
            other => Err(domain(format!(
                "unknown fractional-age assumption `{other}`"
            ))),
        }
    }
}

/// The age `x + k + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalAge {
    pub x: u32,
    pub k: u32,
    pub t: f64,
}

impl FractionalAge {
    pub fn new(x: u32, k: u32, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(domain(format!(
                "fraction of year must lie in [0, 1], got {t}"
            )));
        }
        Ok(Self { x, k, t })
    }

    /// Splits a duration `s >= 0` into whole years and a fraction in `[0, 1)`.
    pub fn from_duration(x: u32, s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(domain(format!(
                "duration must be finite and non-negative, got {s}"
            )));
        }
        let k = s.floor();
        Ok(Self {
            x,
            k: k as u32,
            t: s - k,
        })
    }
}

fn checked(model: &(impl SurvivalModel + ?Sized), fa: FractionalAge) -> Result<Probabilities> {
    if !(0.0..=1.0).contains(&fa.t) {
        return Err(domain(format!(
            "fraction of year must lie in [0, 1], got {}",
            fa.t
        )));
    }
    model.probabilities(fa.x, fa.k)
}

/// `_{k+t} p_x`, the probability of surviving from `x` to `x + k + t`.
pub fn survival_fraction(
    model: &(impl SurvivalModel + ?Sized),
    assumption: FractionalAssumption,
    fa: FractionalAge,
) -> Result<f64> {
    let pr = checked(model, fa)?;
    Ok(survival_in_year(&pr, assumption, fa.t))
}

/// `_{k+t} p_x` from the year's probabilities.
pub fn survival_in_year(pr: &Probabilities, assumption: FractionalAssumption, t: f64) -> f64 {
    if t == 0.0 {
        return pr.kpx;
    }
    if t == 1.0 || pr.p == 0.0 {
        // Balducci and constant force put a dead year's whole mass at its start.
        return match assumption {
            FractionalAssumption::Udd if t < 1.0 => pr.kpx - t * (pr.kpx - pr.k1px),
            _ => pr.k1px,
        };
    }
    match assumption {
        FractionalAssumption::Udd => pr.kpx - t * (pr.kpx - pr.k1px),
        FractionalAssumption::Balducci => pr.k1px / (pr.p + t * pr.q),
        FractionalAssumption::ConstantForce => pr.kpx * pr.p.powf(t),
    }
}

/// Density `f_x(k + t)` of the future lifetime.
///
/// In a year with `p = 0` Balducci and constant force carry the year's mass
/// as an atom at `t = 0`; the continuous part is zero there and the density
/// at `t = 0` itself is an error.
pub fn conditional_density(
    model: &(impl SurvivalModel + ?Sized),
    assumption: FractionalAssumption,
    fa: FractionalAge,
) -> Result<f64> {
    let pr = checked(model, fa)?;
    density_in_year(&pr, assumption, fa.t)
}

/// Density `f_x(k + t)` from the year's probabilities.
pub fn density_in_year(
    pr: &Probabilities,
    assumption: FractionalAssumption,
    t: f64,
) -> Result<f64> {
    match assumption {
        FractionalAssumption::Udd => Ok(pr.kpx - pr.k1px),
        _ if pr.p == 0.0 => {
            if t == 0.0 && pr.kpx > 0.0 {
                Err(domain(
                    "density has an atom at the start of a year with p = 0",
                ))
            } else {
                Ok(0.0)
            }
        }
        FractionalAssumption::Balducci => {
            let den = pr.p + t * pr.q;
            Ok(pr.k1px * pr.q / (den * den))
        }
        FractionalAssumption::ConstantForce => Ok(pr.kpx * pr.p.powf(t) * -pr.p.ln()),
    }
}

/// Probability mass sitting exactly at `t = 0` of the year (zero unless `p = 0`).
pub fn atom_at_year_start(pr: &Probabilities, assumption: FractionalAssumption) -> f64 {
    match assumption {
        FractionalAssumption::Udd => 0.0,
        _ if pr.p == 0.0 => pr.kpx,
        _ => 0.0,
    }
}

/// Force of mortality `mu_{x+k+t}` for `0 < t < 1`.
pub fn force_of_mortality(
    model: &(impl SurvivalModel + ?Sized),
    assumption: FractionalAssumption,
    fa: FractionalAge,
) -> Result<f64> {
    if !(fa.t > 0.0 && fa.t < 1.0) {
        return Err(domain(format!(
            "force of mortality is defined for 0 < t < 1, got {}",
            fa.t
        )));
    }
    let pr = model.probabilities(fa.x, fa.k)?;
    if pr.terminal {
        return Err(domain("force of mortality is undefined after death"));
    }
    let (p, q, t) = (pr.p, pr.q, fa.t);
    match assumption {
        FractionalAssumption::Udd => Ok(q / (1.0 - t * q)),
        FractionalAssumption::Balducci => Ok(q / (1.0 - (1.0 - t) * q)),
        FractionalAssumption::ConstantForce if p == 0.0 => {
            Err(domain("constant force is infinite when p = 0"))
        }
        FractionalAssumption::ConstantForce => Ok(-p.ln()),
    }
}

/// Balducci probability of death in the `d`-th of `j` equal parts of year `a`:
/// `_{a+d/j} p_x - _{a+(d+1)/j} p_x`.
pub fn subyear_death_probability(
    model: &(impl SurvivalModel + ?Sized),
    a: u32,
    d: u32,
    j: u32,
    x: u32,
) -> Result<f64> {
    if j == 0 || d >= j {
        return Err(domain(format!(
            "sub-period index needs 0 <= d < j, got d={d}, j={j}"
        )));
    }
    let pr = model.probabilities(x, a)?;
    Ok(subyear_mass(&pr, d, j))
}

/// Probability of death in sub-period `d` of `j`, from the year's probabilities.
pub fn subyear_mass(pr: &Probabilities, d: u32, j: u32) -> f64 {
    if pr.p == 0.0 {
        return if d == 0 { pr.kpx } else { 0.0 };
    }
    let jf = j as f64;
    let lo = pr.p + d as f64 / jf * pr.q;
    let hi = pr.p + (d + 1) as f64 / jf * pr.q;
    pr.k1px * pr.q / (jf * lo * hi)
}

/// Inverse-CDF sampler of the future lifetime of a life aged `x`.
#[derive(Debug, Clone)]
pub struct LifetimeSampler {
    assumption: FractionalAssumption,
    years: Vec<Probabilities>,
    kpx: Vec<f64>,
}

impl LifetimeSampler {
    /// Sampler over the first `years` years after `x`.
    pub fn new(
        model: &(impl SurvivalModel + ?Sized),
        assumption: FractionalAssumption,
        x: u32,
        years: u32,
    ) -> Result<Self> {
        let mut probs = Vec::with_capacity(years as usize);
        let mut kpx = Vec::with_capacity(years as usize + 1);
        kpx.push(1.0);
        for k in 0..years {
            let pr = model.probabilities(x, k)?;
            kpx.push(pr.k1px);
            probs.push(pr);
        }
        Ok(Self {
            assumption,
            years: probs,
            kpx,
        })
    }

    /// Sampler over the model's full horizon for `x`.
    pub fn full(
        model: &(impl SurvivalModel + ?Sized),
        assumption: FractionalAssumption,
        x: u32,
    ) -> Result<Self> {
        Self::new(model, assumption, x, model.horizon(x)?)
    }

    /// Survival to the end of the sampled horizon.
    pub fn tail_survival(&self) -> f64 {
        *self.kpx.last().expect("kpx starts with 1")
    }

    /// `T` with `P(T >= T(u)) = u`.
    pub fn sample(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain(format!(
                "uniform variate must lie in (0, 1), got {u}"
            )));
        }
        if u <= self.tail_survival() {
            return Err(Error::MassBeyondTruncation {
                target: u,
                floor: self.tail_survival(),
            });
        }
        // First k with kpx[k+1] < u <= kpx[k].
        let k = self.kpx.partition_point(|&s| s >= u) - 1;
        let pr = &self.years[k];
        let t = match self.assumption {
            _ if u == pr.kpx => 0.0,
            FractionalAssumption::Udd => (pr.kpx - u) / (pr.kpx - pr.k1px),
            _ if pr.p == 0.0 => 0.0,
            FractionalAssumption::Balducci => (pr.k1px / u - pr.p) / pr.q,
            FractionalAssumption::ConstantForce => (u / pr.kpx).ln() / pr.p.ln(),
        };
        Ok(k as f64 + t.clamp(0.0, 1.0))
    }
}

/// One inverse-CDF draw of the future lifetime.
pub fn sample_lifetime(
    model: &(impl SurvivalModel + ?Sized),
    assumption: FractionalAssumption,
    x: u32,
    u: f64,
) -> Result<f64> {
    LifetimeSampler::full(model, assumption, x)?.sample(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mortality::{load_table, MortalityTable, SurvivalLaw};
    use crate::numeric::GaussKronrod;
    use proptest::prelude::*;
    use FractionalAssumption::*;

    fn uniform_table() -> MortalityTable {
        let rows: Vec<_> = (0..=100).map(|a| (a, 100.0 - a as f64)).collect();
        load_table(&rows).unwrap()
    }

    fn at(k: u32, t: f64) -> FractionalAge {
        FractionalAge::new(0, k, t).unwrap()
    }

    #[test]
    fn endpoints_agree() {
        let tab = uniform_table();
        for a in FractionalAssumption::ALL {
            for k in [0, 5, 98, 99] {
                let pr = tab.probabilities(0, k).unwrap();
                assert_eq!(survival_fraction(&tab, a, at(k, 0.0)).unwrap(), pr.kpx);
                assert_eq!(survival_fraction(&tab, a, at(k, 1.0)).unwrap(), pr.k1px);
            }
        }
    }

    #[test]
    fn balducci_half_year() {
        let s = survival_fraction(&uniform_table(), Balducci, at(0, 0.5)).unwrap();
        assert!((s - 0.99 / 0.995).abs() < 1e-15);
        assert!((s - 0.994975).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_fraction() {
        assert!(FractionalAge::new(0, 0, 1.5).is_err());
        let fa = FractionalAge {
            x: 0,
            k: 0,
            t: -0.1,
        };
        assert!(survival_fraction(&uniform_table(), Udd, fa).is_err());
    }

    #[test]
    fn densities() {
        let tab = uniform_table();
        let pr = tab.probabilities(0, 3).unwrap();
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(
                conditional_density(&tab, Udd, at(3, t)).unwrap(),
                pr.kpx - pr.k1px
            );
        }
        let f1 = conditional_density(&tab, Balducci, at(3, 1.0)).unwrap();
        assert!((f1 - pr.k1px * pr.q).abs() < 1e-16);
    }

    #[test]
    fn density_integrates_to_year_mass() {
        let law = SurvivalLaw::weibull(20.0, 2.5, None).unwrap();
        let gk = GaussKronrod::default();
        for a in FractionalAssumption::ALL {
            for k in [0, 7, 30] {
                let pr = law.probabilities(0, k).unwrap();
                let r = gk
                    .integrate(
                        |u| conditional_density(&law, a, at(k, u)).unwrap(),
                        0.0,
                        1.0,
                    )
                    .unwrap();
                assert!((r.value - (pr.kpx - pr.k1px)).abs() < 1e-10, "{a} {k}");
            }
        }
    }

    #[test]
    fn forces() {
        let tab = load_table(&[(0, 10.0), (1, 10.0), (2, 4.0)]).unwrap();
        for a in FractionalAssumption::ALL {
            assert_eq!(force_of_mortality(&tab, a, at(0, 0.4)).unwrap(), 0.0);
            assert!(force_of_mortality(&tab, a, at(1, 0.0)).is_err());
            assert!(force_of_mortality(&tab, a, at(1, 1.0)).is_err());
        }
        let q = 0.6;
        let b = force_of_mortality(&tab, Balducci, at(1, 1.0 - 1e-12)).unwrap();
        let u = force_of_mortality(&tab, Udd, at(1, 1e-12)).unwrap();
        assert!((b - q).abs() < 1e-11 && (u - q).abs() < 1e-11);
        let b1 = force_of_mortality(&tab, Balducci, at(1, 0.2)).unwrap();
        let b2 = force_of_mortality(&tab, Balducci, at(1, 0.8)).unwrap();
        let u1 = force_of_mortality(&tab, Udd, at(1, 0.2)).unwrap();
        let u2 = force_of_mortality(&tab, Udd, at(1, 0.8)).unwrap();
        assert!(b1 > b2 && u1 < u2);
    }

    #[test]
    fn subyear_masses() {
        let tab = uniform_table();
        let pr = tab.probabilities(0, 4).unwrap();
        let whole = subyear_death_probability(&tab, 4, 0, 1, 0).unwrap();
        assert!((whole - (pr.kpx - pr.k1px)).abs() < 1e-16);
        let total: f64 = (0..12)
            .map(|d| subyear_death_probability(&tab, 4, d, 12, 0).unwrap())
            .sum();
        assert!((total - (pr.kpx - pr.k1px)).abs() < 1e-15);
        let closed = subyear_death_probability(&tab, 0, 0, 2, 0).unwrap();
        let direct = survival_fraction(&tab, Balducci, at(0, 0.0)).unwrap()
            - survival_fraction(&tab, Balducci, at(0, 0.5)).unwrap();
        assert!((closed - direct).abs() < 1e-14);
        assert!(subyear_death_probability(&tab, 0, 2, 2, 0).is_err());
    }

    #[test]
    fn dead_year_is_an_atom() {
        let tab = uniform_table();
        assert_eq!(survival_fraction(&tab, Balducci, at(99, 0.3)).unwrap(), 0.0);
        assert!((survival_fraction(&tab, Udd, at(99, 0.3)).unwrap() - 0.007).abs() < 1e-15);
        let pr = tab.probabilities(0, 99).unwrap();
        assert_eq!(atom_at_year_start(&pr, Balducci), 0.01);
        assert_eq!(subyear_death_probability(&tab, 99, 0, 4, 0).unwrap(), 0.01);
        assert_eq!(subyear_death_probability(&tab, 99, 1, 4, 0).unwrap(), 0.0);
        let s = LifetimeSampler::full(&tab, Balducci, 0).unwrap();
        assert_eq!(s.sample(0.005).unwrap(), 99.0);
    }

    #[test]
    fn sampler_endpoints_and_truncation() {
        let tab = uniform_table();
        for a in FractionalAssumption::ALL {
            let s = LifetimeSampler::full(&tab, a, 0).unwrap();
            assert_eq!(s.sample(0.9).unwrap(), 10.0);
            assert!(s.sample(0.0).is_err() && s.sample(1.0).is_err());
        }
        let law = SurvivalLaw::weibull(50.0, 3.0, Some(20)).unwrap();
        let s = LifetimeSampler::full(&law, Balducci, 0).unwrap();
        assert!(matches!(
            s.sample(1e-3),
            Err(Error::MassBeyondTruncation { .. })
        ));
    }

    #[test]
    fn empirical_cdf_matches() {
        use rand::{Rng, SeedableRng};
        let law = SurvivalLaw::weibull(30.0, 2.0, None).unwrap();
        let n = 200_000;
        for a in FractionalAssumption::ALL {
            let s = LifetimeSampler::full(&law, a, 0).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
            let mut draws: Vec<f64> = (0..n)
                .map(|_| s.sample(rng.random_range(f64::MIN_POSITIVE..1.0)).unwrap())
                .collect();
            draws.sort_by(f64::total_cmp);
            let mut sup: f64 = 0.0;
            for (i, &t) in draws.iter().enumerate().step_by(97) {
                let fa = FractionalAge::from_duration(0, t).unwrap();
                let cdf = 1.0 - survival_fraction(&law, a, fa).unwrap();
                sup = sup.max((cdf - i as f64 / n as f64).abs());
            }
            // DKW at 99%: sqrt(ln(2/0.01) / (2n)).
            assert!(sup < (200f64.ln() / (2.0 * n as f64)).sqrt(), "{a}: {sup}");
        }
    }

    proptest! {
        #[test]
        fn survival_monotone_in_t(q in 0.0f64..1.0, t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
            let tab = load_table(&[(0, 1.0), (1, 1.0 - q)]).unwrap();
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            for a in FractionalAssumption::ALL {
                let s_lo = survival_fraction(&tab, a, at(0, lo)).unwrap();
                let s_hi = survival_fraction(&tab, a, at(0, hi)).unwrap();
                prop_assert!(s_hi <= s_lo + 1e-16);
            }
        }

        #[test]
        fn force_matches_density_over_survival(q in 1e-6f64..0.999, t in 0.001f64..0.999, k in 0u32..5) {
            let mut rows = vec![(0u32, 1.0)];
            let mut l = 1.0;
            for i in 0..6 {
                l *= 1.0 - q / (1.0 + i as f64);
                rows.push((i + 1, l));
            }
            let tab = load_table(&rows).unwrap();
            for a in FractionalAssumption::ALL {
                let f = conditional_density(&tab, a, at(k, t)).unwrap();
                let s = survival_fraction(&tab, a, at(k, t)).unwrap();
                let mu = force_of_mortality(&tab, a, at(k, t)).unwrap();
                prop_assert!((f - s * mu).abs() < 1e-10 * (1.0 + f));
            }
        }

        #[test]
        fn sampler_round_trip(u in 1e-6f64..0.999_999, q in 0.01f64..0.9) {
            let rows: Vec<_> = (0..12u32).map(|a| (a, if a == 11 { 0.0 } else { (1.0 - q).powi(a as i32) })).collect();
            let tab = load_table(&rows).unwrap();
            for a in FractionalAssumption::ALL {
                let t = sample_lifetime(&tab, a, 0, u).unwrap();
                let fa = FractionalAge::from_duration(0, t).unwrap();
                let s = survival_fraction(&tab, a, fa).unwrap();
                let pr = tab.probabilities(0, fa.k).unwrap();
                // In a dead year the whole mass sits at t = 0.
                if pr.p == 0.0 && fa.t == 0.0 {
                    prop_assert!(u <= pr.kpx);
                } else {
                    prop_assert!((s - u).abs() < 1e-12, "{a}: s={s} u={u}");
                }
            }
        }
    }
}

//! Grids of interpolated survival and density for plotting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::{density_in_year, survival_in_year, FractionalAssumption};
use crate::mortality::SurvivalModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotMode {
    /// `t, s_udd, s_balducci`
    Survival,
    /// `t, f_udd, f_balducci`
    Density,
}

impl PlotMode {
    pub fn header(self) -> [&'static str; 3] {
        match self {
            PlotMode::Survival => ["t", "s_udd", "s_balducci"],
            PlotMode::Density => ["t", "f_udd", "f_balducci"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub t: f64,
    pub udd: f64,
    pub balducci: f64,
}

/// Samples years `[l, l + years)` after age `x` at `steps_per_year` points
/// per year.
///
/// Integer points belong to the year they start, except the last one.
/// Density columns hold the continuous part only: a year with `p = 0` is an
/// atom under Balducci and shows as zero.
pub fn plot_data(
    model: &(impl SurvivalModel + ?Sized),
    x: u32,
    l: u32,
    years: u32,
    steps_per_year: u32,
    mode: PlotMode,
) -> Result<Vec<PlotRow>> {
    if years == 0 || steps_per_year == 0 {
        return Err(Error::Domain(
            "plot grid needs at least one year and one step".into(),
        ));
    }
    let spy = steps_per_year as f64;
    let mut rows = Vec::with_capacity((years * steps_per_year + 1) as usize);
    for k in l..l + years {
        let pr = model.probabilities(x, k)?;
        let last = k + 1 == l + years;
        let steps = if last {
            steps_per_year + 1
        } else {
            steps_per_year
        };
        for s in 0..steps {
            let frac = s as f64 / spy;
            let eval = |a| match mode {
                PlotMode::Survival => survival_in_year(&pr, a, frac),
                PlotMode::Density => density_in_year(&pr, a, frac).unwrap_or(0.0),
            };
            rows.push(PlotRow {
                t: k as f64 + frac,
                udd: eval(FractionalAssumption::Udd),
                balducci: eval(FractionalAssumption::Balducci),
            });
        }
    }
    Ok(rows)
}

/// Steps per year for a step length that divides one year.
pub fn steps_per_year(step: f64) -> Result<u32> {
    let inv = 1.0 / step;
    let n = inv.round();
    if !(step > 0.0 && step <= 1.0) || (inv - n).abs() > 1e-9 * n {
        return Err(Error::Domain(format!(
            "step {step} must divide one year evenly"
        )));
    }
    Ok(n as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mortality::load_table;

    fn table() -> crate::mortality::MortalityTable {
        let rows: Vec<_> = (0..=100).map(|a| (a, 100.0 - a as f64)).collect();
        load_table(&rows).unwrap()
    }

    #[test]
    fn grid_shape() {
        let rows = plot_data(&table(), 0, 0, 3, 100, PlotMode::Survival).unwrap();
        assert_eq!(rows.len(), 301);
        assert_eq!(rows[0].t, 0.0);
        assert_eq!(rows[300].t, 3.0);
        assert_eq!(rows[100].t, 1.0);
    }

    #[test]
    fn curves_meet_at_integers() {
        let rows = plot_data(&table(), 0, 0, 10, 4, PlotMode::Survival).unwrap();
        for r in rows.iter().filter(|r| r.t.fract() == 0.0) {
            assert_eq!(r.udd, r.balducci);
        }
    }

    #[test]
    fn deferred_window() {
        let rows = plot_data(&table(), 0, 5, 2, 4, PlotMode::Density).unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!(rows[0].t, 5.0);
        assert_eq!(rows[8].t, 7.0);
        assert!((rows[0].udd - 0.01).abs() < 1e-15);
    }

    #[test]
    fn step_parsing() {
        assert_eq!(steps_per_year(0.01).unwrap(), 100);
        assert_eq!(steps_per_year(0.25).unwrap(), 4);
        assert!(steps_per_year(0.3).is_err());
        assert!(steps_per_year(0.0).is_err());
        assert!(steps_per_year(2.0).is_err());
    }
}

//! Integer-age mortality: life tables and parametric survival laws.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-year and k-year probabilities for a life aged `x` at duration `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probabilities {
    /// `p_{x+k}`
    pub p: f64,
    /// `q_{x+k}`
    pub q: f64,
    /// `_k p_x`
    pub kpx: f64,
    /// `_{k+1} p_x`
    pub k1px: f64,
    /// `s(x+k) = 0`: the life is already dead and `p`, `q` are conventional.
    pub terminal: bool,
}

impl Probabilities {
    fn dead() -> Self {
        Self {
            p: 0.0,
            q: 1.0,
            kpx: 0.0,
            k1px: 0.0,
            terminal: true,
        }
    }
}

/// Anything that can report integer-age survival probabilities.
pub trait SurvivalModel: Send + Sync {
    /// Probabilities for year `k` after age `x`.
    fn probabilities(&self, x: u32, k: u32) -> Result<Probabilities>;

    /// Number of whole years after `x` that closed forms should run over
    /// when the term is "to the end of life".
    fn horizon(&self, x: u32) -> Result<u32>;

    /// `_k p_x`.
    fn kpx(&self, x: u32, k: u32) -> Result<f64> {
        if k == 0 {
            // Still validates the age.
            return self.probabilities(x, 0).map(|_| 1.0);
        }
        self.probabilities(x, k - 1).map(|pr| pr.k1px)
    }
}

/// Survivor counts `l_x` at consecutive integer ages.
#[derive(Debug, Clone, PartialEq)]
pub struct MortalityTable {
    base_age: u32,
    survivors: Vec<f64>,
    omega: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    age: u32,
    lx: f64,
}

/// Validates `(age, l_x)` rows into a table.
pub fn load_table(rows: &[(u32, f64)]) -> Result<MortalityTable> {
    MortalityTable::new(rows)
}

impl MortalityTable {
    pub fn new(rows: &[(u32, f64)]) -> Result<Self> {
        let Some(&(base_age, first)) = rows.first() else {
            return Err(Error::InvalidTable("table has no rows".into()));
        };
        if !(first.is_finite() && first > 0.0) {
            return Err(Error::InvalidTable(format!(
                "first survivor count must be positive and finite, got {first} at age {base_age}"
            )));
        }
        let mut survivors = Vec::with_capacity(rows.len());
        let mut omega = None;
        for (idx, &(age, lx)) in rows.iter().enumerate() {
            let expected = base_age as u64 + idx as u64;
            if age as u64 != expected {
                return Err(Error::InvalidTable(format!(
                    "non-contiguous ages: expected {expected}, got {age}"
                )));
            }
            if !lx.is_finite() {
                return Err(Error::InvalidTable(format!(
                    "non-finite survivor count at age {age}"
                )));
            }
            if lx < 0.0 {
                return Err(Error::InvalidTable(format!(
                    "negative survivor count {lx} at age {age}"
                )));
            }
            if let Some(&prev) = survivors.last() {
                if prev == 0.0 && lx > 0.0 {
                    return Err(Error::InvalidTable(format!(
                        "survivor count resurrected after zero at age {age}"
                    )));
                }
                if lx > prev {
                    return Err(Error::InvalidTable(format!(
                        "increasing survivor count at age {age}: {prev} -> {lx}"
                    )));
                }
            }
            if lx == 0.0 && omega.is_none() {
                omega = Some(idx as u32);
            }
            survivors.push(lx);
        }
        let omega = omega.unwrap_or(survivors.len() as u32);
        Ok(Self {
            base_age,
            survivors,
            omega,
        })
    }

    /// Reads a CSV with header `age,lx`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Format(e.to_string()))?
            .clone();
        if headers.is_empty() {
            return Err(Error::Format(
                "empty input: expected header `age,lx`".into(),
            ));
        }
        if headers.len() != 2 || &headers[0] != "age" || &headers[1] != "lx" {
            return Err(Error::Format(format!(
                "line 1: expected header `age,lx`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for rec in rdr.deserialize::<Row>() {
            let row = rec.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                Error::Format(format!("line {line}: {e}"))
            })?;
            rows.push((row.age, row.lx));
        }
        if rows.is_empty() {
            return Err(Error::Format("no data rows after header".into()));
        }
        Self::new(&rows)
    }

    /// Writes the table as CSV with header `age,lx`.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for (age, lx) in self.rows() {
            wtr.serialize(Row { age, lx })
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        wtr.flush().map_err(|e| Error::Format(e.to_string()))
    }

    pub fn rows(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.survivors
            .iter()
            .enumerate()
            .map(|(i, &lx)| (self.base_age + i as u32, lx))
    }

    pub fn base_age(&self) -> u32 {
        self.base_age
    }

    pub fn last_age(&self) -> u32 {
        self.base_age + self.survivors.len() as u32 - 1
    }

    /// Offset from the base age of the first zero count, or one past the last row.
    pub fn omega(&self) -> u32 {
        self.omega
    }

    /// Whether the table runs down to zero survivors.
    pub fn is_terminal(&self) -> bool {
        (self.omega as usize) < self.survivors.len()
    }

    pub fn survivors(&self) -> &[f64] {
        &self.survivors
    }

    fn lx(&self, idx: usize) -> Option<f64> {
        match self.survivors.get(idx) {
            Some(&v) => Some(v),
            None if self.is_terminal() => Some(0.0),
            None => None,
        }
    }
}

impl SurvivalModel for MortalityTable {
    fn probabilities(&self, x: u32, k: u32) -> Result<Probabilities> {
        if x < self.base_age || x > self.last_age() {
            return Err(Error::OutOfRange {
                age: x,
                detail: format!("table covers ages {}..={}", self.base_age, self.last_age()),
            });
        }
        let ix = (x - self.base_age) as usize;
        let ia = ix + k as usize;
        let lx = self.survivors[ix];
        if lx == 0.0 {
            return Ok(Probabilities::dead());
        }
        let (Some(la), Some(lb)) = (self.lx(ia), self.lx(ia + 1)) else {
            return Err(Error::OutOfRange {
                age: x.saturating_add(k),
                detail: format!(
                    "one-year probability needs l at age {}, table ends at {}",
                    x as u64 + k as u64 + 1,
                    self.last_age()
                ),
            });
        };
        if la == 0.0 {
            return Ok(Probabilities::dead());
        }
        Ok(Probabilities {
            p: lb / la,
            q: (la - lb) / la,
            kpx: la / lx,
            k1px: lb / lx,
            terminal: false,
        })
    }

    fn horizon(&self, x: u32) -> Result<u32> {
        if x < self.base_age || x > self.last_age() {
            return Err(Error::OutOfRange {
                age: x,
                detail: format!("table covers ages {}..={}", self.base_age, self.last_age()),
            });
        }
        let off = x - self.base_age;
        if self.is_terminal() {
            Ok(self.omega.saturating_sub(off))
        } else {
            Ok(self.omega - 1 - off)
        }
    }
}

/// Discrete Weibull law `_k p_x = exp{(x/a)^b - ((x+k)/a)^b}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalLaw {
    alpha: f64,
    beta: f64,
    omega_hint: u32,
}

/// Survival below this level is treated as extinct when choosing a default horizon.
pub const DEFAULT_TRUNCATION_SURVIVAL: f64 = 1e-16;

impl SurvivalLaw {
    /// Weibull law; `omega_hint` defaults to the first `k` with `_k p_0 < 1e-16`.
    pub fn weibull(alpha: f64, beta: f64, omega_hint: Option<u32>) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!(
                "Weibull parameters must be positive and finite, got alpha={alpha}, beta={beta}"
            )));
        }
        let mut law = Self {
            alpha,
            beta,
            omega_hint: 0,
        };
        law.omega_hint = match omega_hint {
            Some(0) => {
                return Err(Error::Domain("omega hint must be positive".into()));
            }
            Some(w) => w,
            None => {
                // Cumulative hazard (k/alpha)^beta must exceed -ln(1e-16).
                let h = -DEFAULT_TRUNCATION_SURVIVAL.ln();
                let guess = alpha * h.powf(1.0 / beta);
                if guess.is_nan() || guess >= 1e6 {
                    return Err(Error::Domain(format!(
                        "default truncation age {guess} is too large; pass an omega hint"
                    )));
                }
                let mut k = (guess.floor() as u32).saturating_sub(1);
                while law.kpx_raw(0, k) >= DEFAULT_TRUNCATION_SURVIVAL {
                    k += 1;
                }
                while k > 1 && law.kpx_raw(0, k - 1) < DEFAULT_TRUNCATION_SURVIVAL {
                    k -= 1;
                }
                k.max(1)
            }
        };
        Ok(law)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn omega_hint(&self) -> u32 {
        self.omega_hint
    }

    fn hazard(&self, age: f64) -> f64 {
        (age / self.alpha).powf(self.beta)
    }

    fn kpx_raw(&self, x: u32, k: u32) -> f64 {
        (self.hazard(x as f64) - self.hazard(x as f64 + k as f64)).exp()
    }
}

impl SurvivalModel for SurvivalLaw {
    fn probabilities(&self, x: u32, k: u32) -> Result<Probabilities> {
        let a = x as f64 + k as f64;
        let step = self.hazard(a) - self.hazard(a + 1.0);
        let kpx = self.kpx_raw(x, k);
        let k1px = self.kpx_raw(x, k + 1);
        if kpx == 0.0 {
            return Ok(Probabilities::dead());
        }
        Ok(Probabilities {
            p: step.exp(),
            q: -step.exp_m1(),
            kpx,
            k1px,
            terminal: false,
        })
    }

    fn horizon(&self, x: u32) -> Result<u32> {
        if x >= self.omega_hint {
            return Err(Error::OutOfRange {
                age: x,
                detail: format!("age is at or beyond the truncation age {}", self.omega_hint),
            });
        }
        Ok(self.omega_hint - x)
    }
}

/// A table or a parametric law behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Mortality {
    Table(MortalityTable),
    Law(SurvivalLaw),
}

impl From<MortalityTable> for Mortality {
    fn from(t: MortalityTable) -> Self {
        Mortality::Table(t)
    }
}

impl From<SurvivalLaw> for Mortality {
    fn from(l: SurvivalLaw) -> Self {
        Mortality::Law(l)
    }
}

impl SurvivalModel for Mortality {
    fn probabilities(&self, x: u32, k: u32) -> Result<Probabilities> {
        match self {
            Mortality::Table(t) => t.probabilities(x, k),
            Mortality::Law(l) => l.probabilities(x, k),
        }
    }

    fn horizon(&self, x: u32) -> Result<u32> {
        match self {
            Mortality::Table(t) => t.horizon(x),
            Mortality::Law(l) => l.horizon(x),
        }
    }
}

impl<M: SurvivalModel + ?Sized> SurvivalModel for &M {
    fn probabilities(&self, x: u32, k: u32) -> Result<Probabilities> {
        (**self).probabilities(x, k)
    }

    fn horizon(&self, x: u32) -> Result<u32> {
        (**self).horizon(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform_table() -> MortalityTable {
        let rows: Vec<_> = (0..=100).map(|a| (a, 100.0 - a as f64)).collect();
        load_table(&rows).unwrap()
    }

    #[test]
    fn uniform_table_probabilities() {
        let t = uniform_table();
        for k in 0..10 {
            let pr = t.probabilities(0, k).unwrap();
            let kf = k as f64;
            assert!((pr.p - (99.0 - kf) / (100.0 - kf)).abs() < 1e-15);
            assert!((pr.q - 1.0 / (100.0 - kf)).abs() < 1e-15);
            assert!((pr.kpx - (100.0 - kf) / 100.0).abs() < 1e-15);
        }
        assert_eq!(t.probabilities(0, 0).unwrap().q, 0.01);
        assert_eq!(t.omega(), 100);
        assert_eq!(t.horizon(0).unwrap(), 100);
    }

    #[test]
    fn terminal_year() {
        let t = uniform_table();
        let pr = t.probabilities(0, 99).unwrap();
        assert_eq!((pr.p, pr.q), (0.0, 1.0));
        assert!(!pr.terminal);
        let dead = t.probabilities(0, 100).unwrap();
        assert!(dead.terminal);
        assert_eq!(dead.kpx, 0.0);
        assert!(t.probabilities(0, 500).unwrap().terminal);
    }

    #[test]
    fn single_row() {
        let t = load_table(&[(0, 1.0)]).unwrap();
        assert_eq!(t.omega(), 1);
        assert!(matches!(
            t.probabilities(0, 0),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn rejects_invalid_rows() {
        let err = load_table(&[(3, 50.0), (4, 51.0)]).unwrap_err();
        assert!(err.to_string().contains("increasing survivor count"));
        assert!(load_table(&[]).is_err());
        assert!(load_table(&[(0, 10.0), (2, 5.0)])
            .unwrap_err()
            .to_string()
            .contains("non-contiguous"));
        assert!(load_table(&[(0, 10.0), (1, -1.0)]).is_err());
        assert!(load_table(&[(0, 10.0), (1, 0.0), (2, 0.0)]).is_ok());
        let err = load_table(&[(0, 10.0), (1, 0.0), (2, 1.0)]).unwrap_err();
        assert!(err.to_string().contains("resurrected"));
        assert!(load_table(&[(0, 0.0)]).is_err());
    }

    #[test]
    fn out_of_range_is_not_terminal() {
        let t = load_table(&[(5, 10.0), (6, 9.0), (7, 8.0)]).unwrap();
        assert!(t.probabilities(4, 0).is_err());
        assert!(t.probabilities(5, 1).is_ok());
        assert!(t.probabilities(5, 2).is_err());
        assert_eq!(t.horizon(5).unwrap(), 2);
    }

    #[test]
    fn csv_round_trip() {
        let t = load_table(&[(20, 1000.0), (21, 998.3), (22, 0.1 + 0.2), (23, 0.0)]).unwrap();
        let mut buf = Vec::new();
        t.to_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"age,lx\n"));
        let back = MortalityTable::from_csv_reader(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let err = MortalityTable::from_csv_reader("age,lx\n0,10\n1,abc\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(MortalityTable::from_csv_reader("".as_bytes()).is_err());
        assert!(MortalityTable::from_csv_reader("x,y\n0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn weibull_scale_50_shape_3() {
        let law = SurvivalLaw::weibull(50.0, 3.0, None).unwrap();
        let pr = law.probabilities(0, 0).unwrap();
        assert!((pr.p - (-0.000008f64).exp()).abs() < 1e-16);
        assert!((pr.p - 0.999992).abs() < 1e-7);
        assert_eq!(law.kpx(7, 0).unwrap(), 1.0);
        let p2 = law.kpx(0, 2).unwrap();
        let p1 = law.kpx(0, 1).unwrap();
        let p11 = law.kpx(1, 1).unwrap();
        assert!((p2 - p1 * p11).abs() < 1e-14);
        let p10 = law.probabilities(0, 10).unwrap().p;
        let direct = ((10.0f64 / 50.0).powi(3) - (11.0f64 / 50.0).powi(3)).exp();
        assert!((p10 - direct).abs() < 1e-14);
    }

    #[test]
    fn weibull_default_horizon() {
        let law = SurvivalLaw::weibull(50.0, 3.0, None).unwrap();
        let w = law.omega_hint();
        assert!(law.kpx(0, w).unwrap() < 1e-16);
        assert!(law.kpx(0, w - 1).unwrap() >= 1e-16);
        assert!(SurvivalLaw::weibull(-1.0, 3.0, None).is_err());
        assert!(SurvivalLaw::weibull(1.0, 0.0, None).is_err());
    }

    #[test]
    fn total_death_probability_telescopes() {
        let t = uniform_table();
        let total: f64 = (0..t.horizon(0).unwrap())
            .map(|k| {
                let pr = t.probabilities(0, k).unwrap();
                pr.kpx * pr.q
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn chain_rule_table(decr in prop::collection::vec(0.0f64..0.5, 2..20), k in 0u32..18) {
            let mut l = 1000.0;
            let mut rows = vec![(0u32, l)];
            for (i, q) in decr.iter().enumerate() {
                l *= 1.0 - q;
                rows.push((i as u32 + 1, l));
            }
            let t = load_table(&rows).unwrap();
            prop_assume!(k < t.horizon(0).unwrap());
            let pr = t.probabilities(0, k).unwrap();
            prop_assert!((pr.k1px - pr.kpx * pr.p).abs() < 1e-13);
            prop_assert!((pr.p + pr.q - 1.0).abs() < 1e-15);
        }

        #[test]
        fn chain_rule_weibull(alpha in 5.0f64..100.0, beta in 0.5f64..5.0, x in 0u32..40, k in 0u32..40) {
            let law = SurvivalLaw::weibull(alpha, beta, Some(200)).unwrap();
            let pr = law.probabilities(x, k).unwrap();
            prop_assert!((pr.k1px - pr.kpx * pr.p).abs() < 1e-13);
            let next = law.kpx(x, k + 1).unwrap();
            prop_assert!(next <= pr.kpx);
            prop_assert!((next - pr.kpx * law.kpx(x + k, 1).unwrap()).abs() < 1e-12);
        }
    }
}

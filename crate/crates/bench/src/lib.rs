//! Fixtures shared by the benchmarks.

use balducci_core::mortality::load_table;
use balducci_core::{ContractSpec, InterestEnvironment, MortalityTable, SurvivalLaw, Term};

/// `l_x = 100 - x` for ages 0 to 100.
pub fn uniform_table() -> MortalityTable {
    let rows: Vec<_> = (0..=100).map(|a| (a, 100.0 - a as f64)).collect();
    load_table(&rows).expect("valid table")
}

/// Discrete Weibull law with scale 50 and shape 3.
pub fn weibull() -> SurvivalLaw {
    SurvivalLaw::weibull(50.0, 3.0, None).expect("valid law")
}

pub fn five_percent() -> InterestEnvironment {
    InterestEnvironment::new(0.05).expect("valid rate")
}

pub fn ten_year(m: u32) -> ContractSpec {
    ContractSpec::new(0, 0, Term::Years(10), m).expect("valid contract")
}

pub fn deferred_whole_life(m: u32, j: u32, n1: u32) -> ContractSpec {
    ContractSpec::new(0, 1, Term::ToOmega, m)
        .and_then(|s| s.with_periods(j, n1))
        .expect("valid contract")
}

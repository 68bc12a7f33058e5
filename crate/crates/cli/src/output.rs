use std::io::Write;

use serde::Serialize;

use crate::error::CliResult;

/// `v` rounded to `digits` significant digits.
pub fn round_sig(v: f64, digits: u32) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let s = format!("{:.*e}", digits.saturating_sub(1) as usize, v);
    s.parse().unwrap_or(v)
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum TermOut {
    Years(u32),
    Named(&'static str),
}

#[derive(Debug, Serialize)]
pub struct SpecOut {
    pub model: String,
    pub x: u32,
    pub l: u32,
    pub n1: u32,
    pub j: u32,
    pub n: TermOut,
    pub interest: f64,
    pub assumption: String,
}

#[derive(Debug, Serialize)]
pub struct ResultOut {
    pub kind: String,
    pub m: u32,
    pub value: f64,
    pub truncation_age: u32,
    pub limit_branches_used: u32,
}

#[derive(Debug, Serialize)]
pub struct OracleOut {
    pub quadrature: f64,
    pub monte_carlo: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
    pub abs_delta: f64,
    pub rel_delta: f64,
    pub mc_sigmas: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub spec: SpecOut,
    pub results: Vec<ResultOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleOut>,
}

impl Report {
    pub fn write_json(&self, out: &mut impl Write) -> CliResult<()> {
        serde_json::to_writer_pretty(&mut *out, self).map_err(std::io::Error::from)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write_csv(&self, out: &mut impl Write) -> CliResult<()> {
        match &self.oracle {
            None => {
                writeln!(out, "kind,m,value,truncation_age,limit_branches_used")?;
                for r in &self.results {
                    writeln!(
                        out,
                        "{},{},{},{},{}",
                        r.kind, r.m, r.value, r.truncation_age, r.limit_branches_used
                    )?;
                }
            }
            Some(o) => {
                writeln!(
                    out,
                    "kind,m,closed,quadrature,monte_carlo,std_error,abs_delta,rel_delta,limit_branches_used"
                )?;
                for r in &self.results {
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{}",
                        r.kind,
                        r.m,
                        r.value,
                        o.quadrature,
                        o.monte_carlo,
                        o.std_error,
                        o.abs_delta,
                        o.rel_delta,
                        r.limit_branches_used
                    )?;
                }
            }
        }
        Ok(())
    }
}

mod args;
mod error;
mod output;

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use balducci_core::oracle::{
    monte_carlo_expectation, payoff_for, quadrature_expectation, QuadratureConfig,
};
use balducci_core::plot::{plot_data, steps_per_year, PlotMode};
use balducci_core::premiums::{price, resolve_term};
use balducci_core::{
    ContractSpec, FractionalAssumption, InterestEnvironment, Mortality, MortalityTable, PayoffKind,
    SurvivalLaw, Term,
};
use clap::Parser;
use serde::Serialize;

use args::{Cli, Command, ContractArgs, Format, ModelArgs, OutputArgs, PlotModeArg, TermArgs};
use error::{CliError, CliResult};
use output::{round_sig, OracleOut, Report, ResultOut, SpecOut, TermOut};

/// Relative gap between closed form and quadrature that fails `compare`.
const COMPARE_TOLERANCE: f64 = 1e-6;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Validate { table, format } => validate(&table, format, &mut out),
        Command::Price {
            contract,
            m,
            output,
        } => {
            let report = priced("price", &contract, &[m])?;
            emit(report, &output, &mut out)
        }
        Command::Moments {
            contract,
            orders,
            output,
        } => {
            let report = priced("moments", &contract, &orders)?;
            emit(report, &output, &mut out)
        }
        Command::Compare {
            contract,
            m,
            samples,
            seed,
            output,
        } => compare(&contract, m, samples, seed, &output, &mut out),
        Command::PlotData {
            model,
            x,
            defer,
            term,
            mode,
            step,
            precision,
        } => {
            if defer.periods != 0 {
                return Err(CliError::Usage("plot windows start at whole years".into()));
            }
            let (model, _) = load_model(&model)?;
            let x = x.unwrap_or_else(|| first_age(&model));
            let years = match term_of(&term) {
                Term::Years(n) => n,
                Term::ToOmega => resolve_term(
                    &model,
                    &ContractSpec::new(x, defer.years, Term::ToOmega, 0)?,
                )?,
            };
            let mode = match mode {
                PlotModeArg::Survival => PlotMode::Survival,
                PlotModeArg::Density => PlotMode::Density,
            };
            let rows = plot_data(&model, x, defer.years, years, steps_per_year(step)?, mode)?;
            writeln!(out, "{}", mode.header().join(","))?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{}",
                    round_sig(r.t, precision),
                    round_sig(r.udd, precision),
                    round_sig(r.balducci, precision)
                )?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ValidateOut {
    command: &'static str,
    valid: bool,
    first_age: u32,
    last_age: u32,
    rows: usize,
    omega: u32,
    terminal: bool,
}

fn validate(path: &Path, format: Format, out: &mut impl Write) -> CliResult<()> {
    let table = read_table(path)?;
    let report = ValidateOut {
        command: "validate",
        valid: true,
        first_age: table.base_age(),
        last_age: table.last_age(),
        rows: table.survivors().len(),
        omega: table.omega(),
        terminal: table.is_terminal(),
    };
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "valid,first_age,last_age,rows,omega,terminal")?;
            writeln!(
                out,
                "true,{},{},{},{},{}",
                report.first_age, report.last_age, report.rows, report.omega, report.terminal
            )?;
        }
        Format::Text => {
            let end = if report.terminal {
                "terminal"
            } else {
                "open-ended"
            };
            writeln!(
                out,
                "valid: ages {}..{} ({} rows), omega {} (offset {}), {end}",
                report.first_age,
                report.last_age,
                report.rows,
                report.omega,
                report.omega - report.first_age
            )?;
        }
    }
    Ok(())
}

fn read_table(path: &Path) -> CliResult<MortalityTable> {
    let bytes = fs::read(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(MortalityTable::from_csv_reader(bytes.as_slice())?)
}

fn load_model(args: &ModelArgs) -> CliResult<(Mortality, String)> {
    match (&args.table, &args.law) {
        (Some(path), _) => Ok((
            read_table(path)?.into(),
            format!("table:{}", path.display()),
        )),
        (None, Some(law)) => {
            let name = match law.omega {
                Some(o) => format!("weibull:{}:{}:{o}", law.alpha, law.beta),
                None => format!("weibull:{}:{}", law.alpha, law.beta),
            };
            Ok((
                SurvivalLaw::weibull(law.alpha, law.beta, law.omega)?.into(),
                name,
            ))
        }
        (None, None) => Err(CliError::Usage(
            "one of --table or --law is required".into(),
        )),
    }
}

fn first_age(model: &Mortality) -> u32 {
    match model {
        Mortality::Table(t) => t.base_age(),
        Mortality::Law(_) => 0,
    }
}

fn term_of(args: &TermArgs) -> Term {
    match args.term {
        Some(n) if !args.to_omega => Term::Years(n),
        _ => Term::ToOmega,
    }
}

struct Priced {
    model: Mortality,
    env: InterestEnvironment,
    spec_out: SpecOut,
    base: ContractSpec,
}

fn prepare(contract: &ContractArgs) -> CliResult<Priced> {
    if contract.assumption != FractionalAssumption::Balducci {
        return Err(CliError::Usage(format!(
            "closed forms are derived under balducci; `{}` is available through plot-data only",
            contract.assumption
        )));
    }
    let (model, name) = load_model(&contract.model)?;
    let env = InterestEnvironment::new(contract.interest)?;
    let x = contract.x.unwrap_or_else(|| first_age(&model));
    let term = term_of(&contract.term);
    let base = ContractSpec::new(x, contract.defer.years, term, 0)?;
    let spec_out = SpecOut {
        model: name,
        x,
        l: contract.defer.years,
        n1: contract.defer.periods,
        j: contract.j,
        n: match term {
            Term::Years(n) => TermOut::Years(n),
            Term::ToOmega => TermOut::Named("to-omega"),
        },
        interest: contract.interest,
        assumption: contract.assumption.to_string(),
    };
    Ok(Priced {
        model,
        env,
        spec_out,
        base,
    })
}

fn spec_for(
    base: &ContractSpec,
    contract: &ContractArgs,
    kind: PayoffKind,
    m: u32,
) -> CliResult<ContractSpec> {
    let spec = ContractSpec { m, ..*base };
    if kind.is_periodic() {
        return Ok(spec.with_periods(contract.j, contract.defer.periods)?);
    }
    if contract.defer.periods != 0 || contract.j != 1 {
        return Err(CliError::Usage(format!(
            "`{kind}` pays at the moment of death; --j and sub-year deferment apply to periodic kinds only"
        )));
    }
    Ok(spec)
}

fn priced(command: &'static str, contract: &ContractArgs, orders: &[u32]) -> CliResult<Report> {
    let p = prepare(contract)?;
    closed_forms(command, p, contract, orders)
}

fn closed_forms(
    command: &'static str,
    p: Priced,
    contract: &ContractArgs,
    orders: &[u32],
) -> CliResult<Report> {
    let mut results = Vec::new();
    for &kind in &contract.kind {
        for &m in orders {
            let spec = spec_for(&p.base, contract, kind, m)?;
            let r = price(&p.model, &p.env, &spec, kind)?;
            results.push(ResultOut {
                kind: kind.to_string(),
                m,
                value: r.value,
                truncation_age: r.truncation_age,
                limit_branches_used: r.limit_branches_used,
            });
        }
    }
    Ok(Report {
        command,
        spec: p.spec_out,
        results,
        oracle: None,
    })
}

fn compare(
    contract: &ContractArgs,
    m: u32,
    samples: usize,
    seed: u64,
    output: &OutputArgs,
    out: &mut impl Write,
) -> CliResult<()> {
    let [kind] = contract.kind[..] else {
        return Err(CliError::Usage("compare takes exactly one --kind".into()));
    };
    let seed = match std::env::var("BALDUCCI_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "BALDUCCI_SEED must be an unsigned integer, got `{s}`"
            ))
        })?,
        Err(_) => seed,
    };
    let p = prepare(contract)?;
    let spec = spec_for(&p.base, contract, kind, m)?;
    let (g, window) = payoff_for(&p.model, &p.env, &spec, kind)?;
    let quad = quadrature_expectation(
        &p.model,
        FractionalAssumption::Balducci,
        &g,
        window,
        &QuadratureConfig::default(),
    )?;
    let mc = monte_carlo_expectation(
        &p.model,
        FractionalAssumption::Balducci,
        &g,
        window,
        samples,
        seed,
    )?;
    let mut report = closed_forms("compare", p, contract, &[m])?;
    let closed = report.results[0].value;
    let abs_delta = (closed - quad).abs();
    let rel_delta = if quad != 0.0 {
        abs_delta / quad.abs()
    } else {
        abs_delta
    };
    let mc_sigmas = if mc.std_error > 0.0 {
        (mc.estimate - quad).abs() / mc.std_error
    } else {
        0.0
    };
    report.oracle = Some(OracleOut {
        quadrature: quad,
        monte_carlo: mc.estimate,
        std_error: mc.std_error,
        samples,
        seed,
        abs_delta,
        rel_delta,
        mc_sigmas,
    });
    emit(report, output, out)?;
    if rel_delta > COMPARE_TOLERANCE {
        return Err(CliError::Tolerance {
            relative: rel_delta,
            limit: COMPARE_TOLERANCE,
        });
    }
    Ok(())
}

fn emit(mut report: Report, output: &OutputArgs, out: &mut impl Write) -> CliResult<()> {
    let d = output.precision;
    for r in &mut report.results {
        r.value = round_sig(r.value, d);
    }
    if let Some(o) = &mut report.oracle {
        for v in [
            &mut o.quadrature,
            &mut o.monte_carlo,
            &mut o.std_error,
            &mut o.abs_delta,
            &mut o.rel_delta,
            &mut o.mc_sigmas,
        ] {
            *v = round_sig(*v, d);
        }
    }
    match output.format {
        Format::Csv => report.write_csv(out),
        Format::Json | Format::Text => report.write_json(out),
    }
}

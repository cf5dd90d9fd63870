//! `qmf`: expand generators, solve WDVV systems, run verification suites and
//! print Gromov-Witten invariant tables.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
//! 3 computation error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use qmf::modforms::{generator, GeneratorId, ModformError};
use qmf::rat::format_rat;
use qmf::series::QSeries;
use qmf::surd::SurdSeries;
use qmf::verify::{default_trunc, run_suite, system_suite, SuiteReport, VerifyError, SUITES};
use qmf::wdvv::{builtin_system, closed_form_series, solve_ode, OdeSystem, Orbifold, Variant, WdvvError};

#[derive(Parser)]
#[command(name = "qmf", version, about = "Exact q-series of quasi-modular forms and elliptic orbifold WDVV systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Q-expansion of a generator such as `Ei2`, `C@3` or `A@4(Q^2)`
    Expand {
        id: String,
        /// Truncation order in Q
        #[arg(long, default_value_t = 10)]
        order: i64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Add decimal approximations (text output only)
        #[arg(long)]
        decimal: bool,
    },
    /// Solve an orbifold's WDVV system from its seeds
    Solve {
        #[arg(long)]
        orbifold: Orbifold,
        #[arg(long, default_value = "full")]
        variant: Variant,
        /// Truncation order in q
        #[arg(long, default_value_t = 20)]
        order: i64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Solve a system read from this file instead of the built-in one
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// Run a verification suite and print its JSON report
    Verify {
        /// One of the suite names, or `all`
        #[arg(long, default_value = "all")]
        suite: String,
        /// Truncation order; defaults per suite
        #[arg(long)]
        order: Option<i64>,
        /// Verify a WDVV system file (e.g. an edited copy of a built-in one)
        #[arg(long, conflicts_with = "suite")]
        fixture: Option<PathBuf>,
    },
    /// Print the degree-d invariants of a correlator
    Table {
        #[arg(long)]
        orbifold: Orbifold,
        #[arg(long)]
        correlator: String,
        #[arg(long, allow_negative_numbers = true)]
        max_degree: i64,
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
    },
}

enum Failure {
    Usage(String),
    Compute(String),
    Verification,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification => 1,
            Failure::Usage(_) => 2,
            Failure::Compute(_) => 3,
        }
    }
}

impl From<WdvvError> for Failure {
    fn from(e: WdvvError) -> Self {
        match e {
            WdvvError::UnsupportedOrbifold(_)
            | WdvvError::UnknownOrbifold(_)
            | WdvvError::UnknownCorrelator { .. }
            | WdvvError::UnknownVariable(_)
            | WdvvError::Fixture { .. }
            | WdvvError::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

impl From<ModformError> for Failure {
    fn from(e: ModformError) -> Self {
        match e {
            ModformError::Parse(_) | ModformError::UnsupportedCombination(_) => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Expand {
            id,
            order,
            format,
            decimal,
        } => expand(&id, order, format, decimal),
        Command::Solve {
            orbifold,
            variant,
            order,
            format,
            fixture,
        } => solve(orbifold, variant, order, format, fixture.as_deref()),
        Command::Verify { suite, order, fixture } => verify(&suite, order, fixture.as_deref()),
        Command::Table {
            orbifold,
            correlator,
            max_degree,
            format,
        } => table(orbifold, &correlator, max_degree, format),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Compute(m) => eprintln!("error: {m}"),
                Failure::Verification => {}
            }
            ExitCode::from(f.code())
        }
    }
}

fn positive(order: i64) -> Result<i64, Failure> {
    if order > 0 {
        Ok(order)
    } else {
        Err(Failure::Usage(format!("--order must be positive, got {order}")))
    }
}

fn decimal_lines(s: &SurdSeries) -> String {
    let mut by_exp: BTreeMap<Rational64, f64> = BTreeMap::new();
    for (rad, part) in s.parts() {
        for (e, c) in part.terms() {
            *by_exp.entry(e).or_default() += c.to_f64().unwrap_or(f64::NAN) * rad.to_f64();
        }
    }
    let mut out = String::from("decimal approximation (not exact):\n");
    for (e, v) in by_exp {
        let _ = writeln!(out, "  Q^{e} ~ {v:.12e}");
    }
    out
}

fn expand(id: &str, order: i64, format: Format, decimal: bool) -> Result<String, Failure> {
    let order = positive(order)?;
    let gid: GeneratorId = id.parse()?;
    let s = generator(&gid, order)?;
    match format {
        Format::Json => {
            if decimal {
                return Err(Failure::Usage("--decimal applies to text output only".into()));
            }
            let v = json!({ "id": gid.to_string(), "order": order, "series": s.to_json() });
            Ok(format!("{}\n", serde_json::to_string_pretty(&v).expect("json")))
        }
        Format::Text => {
            let mut out = format!("{gid} = {s}\n");
            if decimal {
                out.push_str(&decimal_lines(&s));
            }
            Ok(out)
        }
    }
}

/// Series of the solution are in the orbifold variable `q`.
fn in_q(s: &QSeries) -> String {
    s.to_string().replace('Q', "q")
}

fn solve(orbifold: Orbifold, variant: Variant, order: i64, format: Format, fixture: Option<&Path>) -> Result<String, Failure> {
    let order = positive(order)?;
    let sys = match fixture {
        Some(p) => read_fixture(p, variant)?,
        None => builtin_system(orbifold, variant)?,
    };
    let sol = solve_ode(&sys, order)?;
    Ok(match format {
        Format::Text => {
            let mut out = String::new();
            for (name, s) in &sol.series {
                let _ = writeln!(out, "{name} = {}", in_q(s));
            }
            out
        }
        Format::Json => {
            let series: serde_json::Map<String, Value> = sol.series.iter().map(|(k, s)| (k.clone(), s.to_json())).collect();
            let v = json!({
                "orbifold": sys.orbifold.to_string(),
                "variant": sys.variant.to_string(),
                "order": order,
                "variable": "q",
                "series": series,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
    })
}

fn read_fixture(path: &Path, variant: Variant) -> Result<OdeSystem, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(OdeSystem::parse(&text, variant)?)
}

fn summary(r: &SuiteReport) -> String {
    let fails = r.failures().count();
    let errata = r.errata().count();
    format!(
        "{}: {} checks, {} pass, {errata} errata, {fails} fail",
        r.suite,
        r.checks.len(),
        r.checks.len() - fails - errata
    )
}

fn verify(suite: &str, order: Option<i64>, fixture: Option<&Path>) -> Result<String, Failure> {
    let reports: Vec<SuiteReport> = if let Some(p) = fixture {
        let sys = read_fixture(p, Variant::Full)?;
        vec![system_suite(&sys, positive(order.unwrap_or(40))?)]
    } else {
        let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
        let mut out = Vec::new();
        for n in names {
            let t = match order {
                Some(o) => positive(o)?,
                None => default_trunc(n)?,
            };
            out.push(run_suite(n, t)?);
        }
        out
    };
    for r in &reports {
        eprintln!("{}", summary(r));
        for c in r.failures() {
            eprintln!("  FAIL {}: {}", c.id, c.detail);
        }
    }
    let v = if reports.len() == 1 {
        reports[0].to_json()
    } else {
        Value::Array(reports.iter().map(SuiteReport::to_json).collect())
    };
    let text = format!("{}\n", serde_json::to_string_pretty(&v).expect("json"));
    if reports.iter().all(SuiteReport::passed) {
        Ok(text)
    } else {
        print!("{text}");
        Err(Failure::Verification)
    }
}

fn table(orbifold: Orbifold, name: &str, max_degree: i64, format: TableFormat) -> Result<String, Failure> {
    if max_degree < 0 {
        return Err(Failure::Usage(format!("--max-degree must be non-negative, got {max_degree}")));
    }
    let s = closed_form_series(orbifold, name, max_degree + 1)?;
    let values: Vec<_> = (0..=max_degree).map(|d| s.coeff(Rational64::from(d))).collect();
    Ok(match format {
        TableFormat::Csv => {
            let mut out = String::from("degree,invariant\n");
            for (d, v) in values.iter().enumerate() {
                let _ = writeln!(out, "{d},{}", format_rat(v));
            }
            out
        }
        TableFormat::Json => {
            let v = json!({
                "orbifold": orbifold.to_string(),
                "correlator": name,
                "invariants": values.iter().map(format_rat).collect::<Vec<_>>(),
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
    })
}

//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 no plan within the scan cap,
//! 4 validation failure.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::Error;
use crate::planner::{self, optimal_plan_capped, plan_table, PlanResult, DEFAULT_SCAN_CAP};
use crate::prob_kernel::{binomial_cdf, hypergeometric_cdf, LotSize, Plan, Probability};
use crate::risk_model::{
    monte_carlo_acceptance, oc_curve, oc_json, realizable_count, write_oc_csv, Proportion,
    QualityLevel, QualitySpec, RiskBounds,
};
use crate::scheme::{
    default_mid_scheme, scheme_lookup, validate_scheme, validation_text, write_validation_csv,
    Scheme, DEFAULT_VALIDATION_CAP,
};
use crate::welmec::compare_interpretations;

#[derive(Debug, Parser)]
#[command(
    name = "mid-sampling",
    version,
    about = "Hypothesis-test acceptance sampling plans"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Acceptable quality level (proportion non-conforming)
    #[arg(long, global = true)]
    pub aql: Option<String>,
    /// Limit quality (proportion non-conforming)
    #[arg(long, global = true)]
    pub lq: Option<String>,
    /// Maximum producers' risk
    #[arg(long, global = true)]
    pub alpha_max: Option<f64>,
    /// Maximum consumers' risk
    #[arg(long, global = true)]
    pub beta_max: Option<f64>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// `key = value` file with defaults for the options above
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Largest lot size checked for the unbounded scheme row
    #[arg(long, global = true)]
    pub n_cap: Option<u64>,
    /// Largest sample size scanned for infinite lots
    #[arg(long, global = true)]
    pub scan_cap: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal plan for one lot size
    Plan {
        #[arg(long)]
        lot_size: LotSize,
    },
    /// Optimal plans for a range of lot sizes
    Table {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
    /// Operating characteristic data for a plan
    Oc {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        c: u64,
        #[arg(long)]
        lot_size: LotSize,
        /// Comma-separated quality levels (default: all k/N, or 151 points on [0, 0.15])
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
    /// Simplified sampling schemes
    Scheme {
        #[command(subcommand)]
        action: SchemeAction,
    },
    /// Hypothesis-test and WELMEC risks for candidate plans
    Compare {
        #[arg(long)]
        lot_size: LotSize,
        /// Comma-separated `n:c` pairs
        #[arg(long, value_delimiter = ',', required = true)]
        candidates: Vec<Plan>,
    },
    /// Monte Carlo check of the acceptance probability
    Simulate {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        c: u64,
        #[arg(long)]
        lot_size: LotSize,
        /// Quality level as a decimal or `k/N`
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SchemeSource {
    /// Use the built-in ten-row scheme
    #[arg(long)]
    pub builtin: bool,
    /// Read a scheme file (`from,to,rule,c` lines)
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SchemeAction {
    /// Risk extrema and admissibility for every row
    Validate {
        #[command(flatten)]
        source: SchemeSource,
    },
    /// Plan prescribed for one lot size
    Lookup {
        #[command(flatten)]
        source: SchemeSource,
        #[arg(long)]
        lot_size: u64,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NoPlan(String),
    Validation(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::NoPlan(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::NoPlan(m) | CliError::Validation(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoPlanWithinCap { .. } => CliError::NoPlan(e.to_string()),
            Error::SchemeCoverage(_) | Error::SchemeRule { .. } => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Resolved settings: flags over config file over built-in defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: QualitySpec,
    pub bounds: RiskBounds,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub n_cap: u64,
    pub scan_cap: u64,
}

const CONFIG_KEYS: [&str; 9] = [
    "aql",
    "lq",
    "alpha_max",
    "beta_max",
    "format",
    "output",
    "seed",
    "n_cap",
    "scan_cap",
];

fn read_config(path: &Path) -> CliResult<HashMap<String, String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "{}:{}: expected `key = value`",
                path.display(),
                i + 1
            ))
        })?;
        let key = key.trim().replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "{}:{}: unknown key `{key}`",
                path.display(),
                i + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("invalid value `{v}` for {key}")))
}

impl RunConfig {
    pub fn resolve(global: &GlobalArgs) -> CliResult<Self> {
        let file = match &global.config {
            Some(p) => read_config(p)?,
            None => HashMap::new(),
        };
        let pick = |flag: Option<String>, key: &str| flag.or_else(|| file.get(key).cloned());

        let aql: Proportion = parse_value(
            "aql",
            &pick(global.aql.clone(), "aql").unwrap_or_else(|| "0.01".into()),
        )?;
        let lq: Proportion = parse_value(
            "lq",
            &pick(global.lq.clone(), "lq").unwrap_or_else(|| "0.07".into()),
        )?;
        let spec = QualitySpec::from_proportions(aql, lq)?;

        let num = |flag: Option<f64>, key: &str, default: f64| -> CliResult<f64> {
            match flag {
                Some(v) => Ok(v),
                None => file.get(key).map_or(Ok(default), |v| parse_value(key, v)),
            }
        };
        let bounds = RiskBounds::new(
            num(global.alpha_max, "alpha_max", 0.05)?,
            num(global.beta_max, "beta_max", 0.05)?,
        )?;

        let format = match (global.format, file.get("format")) {
            (Some(f), _) => Some(f),
            (None, Some(v)) => Some(
                Format::from_str(v, true)
                    .map_err(|_| CliError::Usage(format!("invalid value `{v}` for format")))?,
            ),
            (None, None) => None,
        };
        let int = |flag: Option<u64>, key: &str| -> CliResult<Option<u64>> {
            match flag {
                Some(v) => Ok(Some(v)),
                None => file.get(key).map(|v| parse_value(key, v)).transpose(),
            }
        };
        Ok(RunConfig {
            spec,
            bounds,
            format,
            output: global
                .output
                .clone()
                .or_else(|| file.get("output").map(PathBuf::from)),
            seed: int(global.seed, "seed")?,
            n_cap: int(global.n_cap, "n_cap")?.unwrap_or(DEFAULT_VALIDATION_CAP),
            scan_cap: int(global.scan_cap, "scan_cap")?.unwrap_or(DEFAULT_SCAN_CAP),
        })
    }
}

/// Runs one invocation and returns the bytes to emit. Validation failures
/// still produce their report, returned alongside the error.
pub fn execute(cli: &Cli) -> (Vec<u8>, CliResult<()>, Option<PathBuf>) {
    let cfg = match RunConfig::resolve(&cli.global) {
        Ok(c) => c,
        Err(e) => return (Vec::new(), Err(e), None),
    };
    let mut out = Vec::new();
    let status = dispatch(&cli.command, &cfg, &mut out);
    (out, status, cfg.output)
}

/// Parses `args`, runs, writes output, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (bytes, status, output) = execute(&cli);
    let written = match output {
        Some(path) => fs::write(path, &bytes),
        None => io::stdout().lock().write_all(&bytes),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 1;
    }
    match status {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig, out: &mut Vec<u8>) -> CliResult<()> {
    match cmd {
        Command::Plan { lot_size } => cmd_plan(*lot_size, cfg, out),
        Command::Table { from, to } => cmd_table(*from, *to, cfg, out),
        Command::Oc {
            n,
            c,
            lot_size,
            grid,
        } => cmd_oc(*n, *c, *lot_size, grid.as_deref(), cfg, out),
        Command::Scheme { action } => cmd_scheme(action, cfg, out),
        Command::Compare {
            lot_size,
            candidates,
        } => cmd_compare(*lot_size, candidates, cfg, out),
        Command::Simulate {
            n,
            c,
            lot_size,
            p,
            trials,
        } => cmd_simulate(*n, *c, *lot_size, p, *trials, cfg, out),
    }
}

fn round6(p: Probability) -> f64 {
    (p.value() * 1e6).round() / 1e6
}

fn pct(p: Probability) -> String {
    format!("{:.2} %", 100.0 * p.value())
}

fn level_text(level: &QualityLevel) -> String {
    match *level {
        QualityLevel::Realized { defectives, lot } => format!("{defectives}/{lot}"),
        QualityLevel::Nominal(p) => format!("{p}"),
    }
}

fn level_numerator(level: &QualityLevel) -> String {
    match *level {
        QualityLevel::Realized { defectives, .. } => defectives.to_string(),
        QualityLevel::Nominal(p) => format!("{p}"),
    }
}

fn plan_json(lot: LotSize, r: &PlanResult) -> serde_json::Value {
    json!({
        "lot": lot,
        "plan": { "n": r.plan.n(), "c": r.plan.c() },
        "risks": { "alpha": round6(r.risks.alpha), "beta": round6(r.risks.beta) },
        "realized": { "p_alpha": level_text(&r.realized.p_alpha), "p_beta": level_text(&r.realized.p_beta) },
    })
}

fn write_json(out: &mut Vec<u8>, value: &serde_json::Value) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::from)?;
    out.push(b'\n');
    Ok(())
}

fn cmd_plan(lot: LotSize, cfg: &RunConfig, out: &mut Vec<u8>) -> CliResult<()> {
    let r = optimal_plan_capped(lot, &cfg.spec, &cfg.bounds, cfg.scan_cap)?;
    match cfg.format.unwrap_or(Format::Text) {
        Format::Text => {
            writeln!(out, "N        {lot}")?;
            writeln!(out, "n        {}", r.plan.n())?;
            writeln!(out, "c        {}", r.plan.c())?;
            writeln!(out, "alpha    {}", pct(r.risks.alpha))?;
            writeln!(out, "beta     {}", pct(r.risks.beta))?;
            writeln!(out, "p_alpha  {}", level_text(&r.realized.p_alpha))?;
            writeln!(out, "p_beta   {}", level_text(&r.realized.p_beta))?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(planner::TABLE_HEADER)?;
            w.write_record([
                lot.to_string(),
                r.plan.n().to_string(),
                r.plan.c().to_string(),
                format!("{:.6}", r.risks.alpha.value()),
                format!("{:.6}", r.risks.beta.value()),
                level_numerator(&r.realized.p_alpha),
                level_numerator(&r.realized.p_beta),
            ])?;
            w.flush()?;
        }
        Format::Json => write_json(out, &plan_json(lot, &r))?,
    }
    Ok(())
}

fn cmd_table(from: u64, to: u64, cfg: &RunConfig, out: &mut Vec<u8>) -> CliResult<()> {
    if from == 0 || from > to {
        return Err(CliError::Usage(format!(
            "invalid range: need 1 <= from <= to, got {from}..{to}"
        )));
    }
    let table = plan_table(from, to, &cfg.spec, &cfg.bounds)?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => planner::write_table_csv(&table, &mut *out)?,
        Format::Json => {
            let rows: Vec<_> = table
                .rows
                .iter()
                .map(|row| plan_json(LotSize::Finite(row.lot), &row.result))
                .collect();
            write_json(out, &serde_json::Value::Array(rows))?;
        }
        Format::Text => {
            writeln!(
                out,
                "{:>7} {:>5} {:>3} {:>8} {:>8}",
                "N", "n", "c", "alpha %", "beta %"
            )?;
            for row in &table.rows {
                let r = &row.result;
                writeln!(
                    out,
                    "{:>7} {:>5} {:>3} {:>8.2} {:>8.2}",
                    row.lot,
                    r.plan.n(),
                    r.plan.c(),
                    100.0 * r.risks.alpha.value(),
                    100.0 * r.risks.beta.value()
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_oc(
    n: u64,
    c: u64,
    lot: LotSize,
    grid: Option<&[f64]>,
    cfg: &RunConfig,
    out: &mut Vec<u8>,
) -> CliResult<()> {
    let plan = Plan::new(n, c)?;
    plan.check_lot(lot)?;
    let points = oc_curve(plan, lot, grid)?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => write_oc_csv(&points, &mut *out)?,
        Format::Json => write_json(out, &oc_json(&points))?,
        Format::Text => {
            writeln!(out, "{:>10} {:>10}", "p", "Pac")?;
            for pt in &points {
                writeln!(out, "{:>10.6} {:>10.6}", pt.p, pt.pac.value())?;
            }
        }
    }
    Ok(())
}

fn load_scheme(source: &SchemeSource) -> CliResult<Scheme> {
    match &source.file {
        Some(path) if !source.builtin => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read scheme {}: {e}", path.display()))
            })?;
            match Scheme::parse(&text) {
                Ok(s) => Ok(s),
                Err(e @ Error::SchemeParse { .. }) => {
                    Err(CliError::Usage(format!("{}: {e}", path.display())))
                }
                Err(e) => Err(e.into()),
            }
        }
        _ => Ok(default_mid_scheme()),
    }
}

fn cmd_scheme(action: &SchemeAction, cfg: &RunConfig, out: &mut Vec<u8>) -> CliResult<()> {
    match action {
        SchemeAction::Lookup { source, lot_size } => {
            let scheme = load_scheme(source)?;
            if *lot_size == 0 {
                return Err(CliError::Usage("lot size must be at least 1".into()));
            }
            let plan = scheme_lookup(*lot_size, &scheme)?;
            match cfg.format.unwrap_or(Format::Text) {
                Format::Text => writeln!(out, "N={} n={} c={}", lot_size, plan.n(), plan.c())?,
                Format::Csv => writeln!(out, "N,n,c\n{},{},{}", lot_size, plan.n(), plan.c())?,
                Format::Json => write_json(
                    out,
                    &json!({ "lot": lot_size, "plan": { "n": plan.n(), "c": plan.c() } }),
                )?,
            }
            Ok(())
        }
        SchemeAction::Validate { source } => {
            let scheme = load_scheme(source)?;
            let report = validate_scheme(&scheme, &cfg.spec, &cfg.bounds, cfg.n_cap)?;
            let all_ok = report.iter().all(|r| r.admissible);
            match cfg.format.unwrap_or(Format::Text) {
                Format::Text => {
                    out.extend_from_slice(validation_text(&report).as_bytes());
                    writeln!(
                        out,
                        "\nverdict: {}",
                        if all_ok {
                            "all rows admissible"
                        } else {
                            "NOT admissible"
                        }
                    )?;
                }
                Format::Csv => write_validation_csv(&report, &mut *out)?,
                Format::Json => {
                    let value =
                        serde_json::to_value(json!({ "rows": report, "admissible": all_ok }))
                            .map_err(io::Error::from)?;
                    write_json(out, &value)?;
                }
            }
            if all_ok {
                Ok(())
            } else {
                let bad: Vec<String> = report
                    .iter()
                    .filter(|r| !r.admissible)
                    .map(|r| r.row.to_string())
                    .collect();
                Err(CliError::Validation(format!(
                    "inadmissible rows: {}",
                    bad.join(", ")
                )))
            }
        }
    }
}

fn cmd_compare(
    lot: LotSize,
    candidates: &[Plan],
    cfg: &RunConfig,
    out: &mut Vec<u8>,
) -> CliResult<()> {
    let report = compare_interpretations(lot, &cfg.spec, &cfg.bounds, candidates)?;
    match cfg.format.unwrap_or(Format::Text) {
        Format::Text => out.extend_from_slice(report.to_text().as_bytes()),
        Format::Json => {
            let value = serde_json::to_value(&report).map_err(io::Error::from)?;
            write_json(out, &value)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record([
                "n",
                "c",
                "alpha",
                "beta",
                "hypothesis_admissible",
                "alpha_cont",
                "beta_cont",
                "continuous_admissible",
                "pointwise_admissible",
            ])?;
            for e in &report.evaluated_plans {
                w.write_record([
                    e.plan.n().to_string(),
                    e.plan.c().to_string(),
                    format!("{:.6}", e.risks.alpha.value()),
                    format!("{:.6}", e.risks.beta.value()),
                    e.hypothesis_admissible.to_string(),
                    format!("{:.6}", e.welmec.alpha_cont.value()),
                    format!("{:.6}", e.welmec.beta_cont.value()),
                    e.continuous_admissible.to_string(),
                    e.pointwise_admissible
                        .map_or_else(String::new, |b| b.to_string()),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Decimal, or `k/N` with integer parts.
fn parse_quality(s: &str) -> CliResult<f64> {
    let bad = || CliError::Usage(format!("invalid quality level `{s}`"));
    let v = match s.split_once('/') {
        Some((k, n)) => {
            let k: u64 = k.trim().parse().map_err(|_| bad())?;
            let n: u64 = n.trim().parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            k as f64 / n as f64
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn cmd_simulate(
    n: u64,
    c: u64,
    lot: LotSize,
    p: &str,
    trials: u64,
    cfg: &RunConfig,
    out: &mut Vec<u8>,
) -> CliResult<()> {
    let plan = Plan::new(n, c)?;
    plan.check_lot(lot)?;
    let p = parse_quality(p)?;
    let analytic = match lot {
        LotSize::Finite(size) => hypergeometric_cdf(c, n, realizable_count(p, size)?, size)?,
        LotSize::Infinite => binomial_cdf(c, n, p)?,
    };
    let seed = cfg.seed.unwrap_or(0);
    let empirical = monte_carlo_acceptance(plan, lot, p, trials, seed)?;
    let a = analytic.value();
    let sigma = (a * (1.0 - a) / trials as f64).sqrt();
    let diff = empirical.value() - a;
    let deviation = if sigma > 0.0 {
        diff / sigma
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    };
    match cfg.format.unwrap_or(Format::Text) {
        Format::Text => {
            writeln!(out, "empirical  {:.6}", empirical.value())?;
            writeln!(out, "analytic   {a:.6}")?;
            writeln!(out, "deviation  {deviation:.2} sigma")?;
        }
        Format::Json => write_json(
            out,
            &json!({
                "trials": trials,
                "seed": seed,
                "empirical": round6(empirical),
                "analytic": round6(analytic),
                "sigma": (sigma * 1e6).round() / 1e6,
                "deviation_sigma": (deviation * 100.0).round() / 100.0,
            }),
        )?,
        Format::Csv => {
            writeln!(out, "trials,seed,empirical,analytic,deviation_sigma")?;
            writeln!(
                out,
                "{trials},{seed},{:.6},{a:.6},{deviation:.2}",
                empirical.value()
            )?;
        }
    }
    Ok(())
}

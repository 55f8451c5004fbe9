//! Interval-based sampling schemes: one plan rule per range of lot sizes.
//!
//! Text format, one row per line (`#` starts a comment):
//!
//! ```text
//! from,to,rule,c
//! 1,14,full,0
//! 19,25,offset:4,0
//! 1500,inf,n:109,3
//! ```
//!
//! `rule` is `n:<int>` (fixed sample size), `full` (`n = N`) or
//! `offset:<int>` (`n = N - k`).

use std::fmt;
use std::io;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob_kernel::{LotSize, Plan, Probability};
use crate::risk_model::{risks, QualitySpec, RiskBounds, RiskPair};

/// Default upper lot size for validating the unbounded row.
pub const DEFAULT_VALIDATION_CAP: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanRule {
    Fixed { n: u64, c: u64 },
    Full { c: u64 },
    Offset { k: u64, c: u64 },
}

impl PlanRule {
    pub fn c(&self) -> u64 {
        match *self {
            PlanRule::Fixed { c, .. } | PlanRule::Full { c } | PlanRule::Offset { c, .. } => c,
        }
    }

    /// The plan this rule prescribes for a lot of `lot` items.
    pub fn instantiate(&self, lot: u64) -> Result<Plan> {
        let n = match *self {
            PlanRule::Fixed { n, .. } => n,
            PlanRule::Full { .. } => lot,
            PlanRule::Offset { k, .. } => lot.saturating_sub(k),
        };
        let plan = Plan::new(n, self.c())?;
        plan.check_lot(LotSize::finite(lot)?)?;
        Ok(plan)
    }

    /// Sample size column as printed in reports: `N`, `N-4` or a number.
    pub fn sample_label(&self) -> String {
        match *self {
            PlanRule::Fixed { n, .. } => n.to_string(),
            PlanRule::Full { .. } => "N".to_string(),
            PlanRule::Offset { k, .. } => format!("N-{k}"),
        }
    }
}

impl fmt::Display for PlanRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PlanRule::Fixed { n, .. } => write!(f, "n:{n}"),
            PlanRule::Full { .. } => f.write_str("full"),
            PlanRule::Offset { k, .. } => write!(f, "offset:{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SchemeRow {
    pub from: u64,
    /// `None` for an unbounded row.
    pub to: Option<u64>,
    pub rule: PlanRule,
}

impl SchemeRow {
    pub fn contains(&self, lot: u64) -> bool {
        lot >= self.from && self.to.is_none_or(|to| lot <= to)
    }
}

fn fmt_upper(to: Option<u64>) -> String {
    to.map_or_else(|| "inf".to_string(), |t| t.to_string())
}

/// Contiguous rows covering every lot size from 1 upwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Scheme {
    rows: Vec<SchemeRow>,
}

impl Scheme {
    pub fn new(rows: Vec<SchemeRow>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::SchemeCoverage("scheme has no rows".into()));
        };
        if first.from != 1 {
            return Err(Error::SchemeCoverage(format!(
                "first row starts at {} instead of 1",
                first.from
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            let last = i + 1 == rows.len();
            match row.to {
                Some(to) if to < row.from => {
                    return Err(Error::SchemeCoverage(format!(
                        "row {i}: upper bound {to} below {}",
                        row.from
                    )));
                }
                Some(to) if last => {
                    return Err(Error::SchemeCoverage(format!(
                        "lot sizes above {to} are not covered"
                    )));
                }
                None if !last => {
                    return Err(Error::SchemeCoverage(format!(
                        "row {i} is unbounded but not the last row"
                    )));
                }
                None if !matches!(row.rule, PlanRule::Fixed { .. }) => {
                    return Err(Error::SchemeCoverage(format!(
                        "row {i}: the unbounded row needs a fixed sample size, got `{}`",
                        row.rule
                    )));
                }
                _ => {}
            }
            if let Some(next) = rows.get(i + 1) {
                let to = row.to.expect("checked above");
                if next.from != to + 1 {
                    return Err(Error::SchemeCoverage(format!(
                        "row {} starts at {} but row {i} ends at {to}",
                        i + 1,
                        next.from
                    )));
                }
            }
        }
        Ok(Scheme { rows })
    }

    pub fn rows(&self) -> &[SchemeRow] {
        &self.rows
    }

    /// Parses the line-based text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            rows.push(parse_row(line).map_err(|message| Error::SchemeParse {
                line: line_no,
                message,
            })?);
        }
        Scheme::new(rows)
    }

    pub fn to_text(&self) -> String {
        self.rows
            .iter()
            .map(|r| format!("{},{},{},{}\n", r.from, fmt_upper(r.to), r.rule, r.rule.c()))
            .collect()
    }

    fn row_index(&self, lot: u64) -> Option<usize> {
        let i = self.rows.partition_point(|r| r.from <= lot);
        i.checked_sub(1).filter(|&i| self.rows[i].contains(lot))
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::parse(s)
    }
}

fn parse_row(line: &str) -> std::result::Result<SchemeRow, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    let [from, to, rule, c] = fields[..] else {
        return Err(format!(
            "expected 4 comma-separated fields, found {}",
            fields.len()
        ));
    };
    let int = |what: &str, s: &str| s.parse::<u64>().map_err(|_| format!("bad {what} `{s}`"));
    let from = int("lower bound", from)?;
    let to = if to.eq_ignore_ascii_case("inf") {
        None
    } else {
        Some(int("upper bound", to)?)
    };
    let c = int("acceptance number", c)?;
    let rule = if rule == "full" {
        PlanRule::Full { c }
    } else if let Some(n) = rule.strip_prefix("n:") {
        PlanRule::Fixed {
            n: int("sample size", n)?,
            c,
        }
    } else if let Some(k) = rule.strip_prefix("offset:") {
        PlanRule::Offset {
            k: int("offset", k)?,
            c,
        }
    } else {
        return Err(format!(
            "unknown rule `{rule}` (expected n:<int>, full or offset:<int>)"
        ));
    };
    Ok(SchemeRow { from, to, rule })
}

/// The simplified ten-row scheme for `p_aql = 1 %`, `p_lq = 7 %` and 5 % risks.
pub fn default_mid_scheme() -> Scheme {
    use PlanRule::*;
    let rows = [
        (1, Some(14), Full { c: 0 }),
        (15, Some(18), Fixed { n: 14, c: 0 }),
        (19, Some(25), Offset { k: 4, c: 0 }),
        (26, Some(35), Fixed { n: 22, c: 0 }),
        (36, Some(54), Fixed { n: 28, c: 0 }),
        (55, Some(99), Fixed { n: 34, c: 0 }),
        (100, Some(199), Fixed { n: 58, c: 1 }),
        (200, Some(449), Fixed { n: 82, c: 2 }),
        (450, Some(1499), Fixed { n: 86, c: 2 }),
        (1500, None, Fixed { n: 109, c: 3 }),
    ];
    Scheme::new(
        rows.into_iter()
            .map(|(from, to, rule)| SchemeRow { from, to, rule })
            .collect(),
    )
    .expect("built-in scheme is contiguous")
}

pub fn scheme_lookup(lot: u64, scheme: &Scheme) -> Result<Plan> {
    let i = scheme.row_index(lot).ok_or(Error::SchemeLookup { lot })?;
    scheme.rows[i]
        .rule
        .instantiate(lot)
        .map_err(|e| Error::SchemeRule {
            row: i,
            lot,
            reason: e.to_string(),
        })
}

/// A risk extremum and where it occurs; `at == None` is the binomial limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub value: Probability,
    pub at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowValidation {
    pub row: usize,
    pub from: u64,
    pub to: Option<u64>,
    pub rule: PlanRule,
    pub alpha_min: Extremum,
    pub alpha_max: Extremum,
    pub beta_min: Extremum,
    pub beta_max: Extremum,
    pub admissible: bool,
}

#[derive(Debug, Clone, Copy)]
struct Extrema {
    alpha_min: Extremum,
    alpha_max: Extremum,
    beta_min: Extremum,
    beta_max: Extremum,
}

impl Extrema {
    fn seed(at: Option<u64>, r: RiskPair) -> Self {
        let a = Extremum { value: r.alpha, at };
        let b = Extremum { value: r.beta, at };
        Extrema {
            alpha_min: a,
            alpha_max: a,
            beta_min: b,
            beta_max: b,
        }
    }

    // ties keep the earlier point
    fn update(&mut self, at: Option<u64>, r: RiskPair) {
        if r.alpha < self.alpha_min.value {
            self.alpha_min = Extremum { value: r.alpha, at };
        }
        if r.alpha > self.alpha_max.value {
            self.alpha_max = Extremum { value: r.alpha, at };
        }
        if r.beta < self.beta_min.value {
            self.beta_min = Extremum { value: r.beta, at };
        }
        if r.beta > self.beta_max.value {
            self.beta_max = Extremum { value: r.beta, at };
        }
    }
}

/// Risk extrema of every row over all lot sizes it covers. The unbounded
/// row is evaluated for `N` in `[from, n_cap]` plus the binomial limit.
pub fn validate_scheme(
    scheme: &Scheme,
    spec: &QualitySpec,
    bounds: &RiskBounds,
    n_cap: u64,
) -> Result<Vec<RowValidation>> {
    let largest_finite = scheme.rows.iter().filter_map(|r| r.to).max().unwrap_or(0);
    if n_cap < largest_finite {
        return Err(crate::error::domain(format!(
            "validation cap {n_cap} is below the largest finite row boundary {largest_finite}"
        )));
    }
    scheme
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| validate_row(i, row, spec, bounds, n_cap))
        .collect()
}

fn validate_row(
    i: usize,
    row: &SchemeRow,
    spec: &QualitySpec,
    bounds: &RiskBounds,
    n_cap: u64,
) -> Result<RowValidation> {
    let upper = row.to.unwrap_or(n_cap);
    let per_lot: Vec<(u64, RiskPair)> = (row.from..=upper)
        .into_par_iter()
        .map(|lot| {
            let rule_err = |e: Error| Error::SchemeRule {
                row: i,
                lot,
                reason: e.to_string(),
            };
            let plan = row.rule.instantiate(lot).map_err(rule_err)?;
            let r = risks(plan, LotSize::Finite(lot), spec).map_err(rule_err)?;
            Ok((lot, r))
        })
        .collect::<Result<_>>()?;

    let mut points = per_lot.into_iter().map(|(lot, r)| (Some(lot), r));
    let limit = match (row.to, row.rule) {
        (None, PlanRule::Fixed { n, c }) => {
            Some((None, risks(Plan::new(n, c)?, LotSize::Infinite, spec)?))
        }
        _ => None,
    };
    let (first_at, first) = points
        .next()
        .or(limit)
        .expect("row covers at least one lot size");
    let mut ext = Extrema::seed(first_at, first);
    for (at, r) in points.chain(if first_at.is_some() { limit } else { None }) {
        ext.update(at, r);
    }

    let admissible = ext.alpha_max.value.value() <= bounds.alpha_max()
        && ext.beta_max.value.value() <= bounds.beta_max();
    Ok(RowValidation {
        row: i,
        from: row.from,
        to: row.to,
        rule: row.rule,
        alpha_min: ext.alpha_min,
        alpha_max: ext.alpha_max,
        beta_min: ext.beta_min,
        beta_max: ext.beta_max,
        admissible,
    })
}

fn pct(p: Probability) -> String {
    format!("{:.2}", 100.0 * p.value())
}

/// CSV with Table-1 columns; risks in percent with two decimals.
pub fn write_validation_csv<W: io::Write>(report: &[RowValidation], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "from",
        "to",
        "n",
        "c",
        "alpha_from",
        "alpha_to",
        "beta_from",
        "beta_to",
        "admissible",
    ])?;
    for v in report {
        w.write_record([
            v.from.to_string(),
            fmt_upper(v.to),
            v.rule.sample_label(),
            v.rule.c().to_string(),
            pct(v.alpha_min.value),
            pct(v.alpha_max.value),
            pct(v.beta_min.value),
            pct(v.beta_max.value),
            v.admissible.to_string(),
        ])?;
    }
    w.flush()
}

/// Aligned terminal table with the same columns as the CSV.
pub fn validation_text(report: &[RowValidation]) -> String {
    let mut s = format!(
        "{:>6} {:>6} {:>6} {:>3} | {:>7} {:>7} | {:>7} {:>7} | {}\n",
        "from", "to", "n", "c", "α from", "α to", "β from", "β to", "admissible"
    );
    for v in report {
        s.push_str(&format!(
            "{:>6} {:>6} {:>6} {:>3} | {:>7} {:>7} | {:>7} {:>7} | {}\n",
            v.from,
            fmt_upper(v.to),
            v.rule.sample_label(),
            v.rule.c(),
            pct(v.alpha_min.value),
            pct(v.alpha_max.value),
            pct(v.beta_min.value),
            pct(v.beta_max.value),
            if v.admissible { "yes" } else { "NO" },
        ));
    }
    s
}

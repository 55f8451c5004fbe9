//! Minimal-sample-size plan search and plan tables.
//!
//! For a fixed `n`, `α` is non-increasing and `β` non-decreasing in `c`, so
//! `(n, c)` is admissible for some `c` iff `(n, c_max)` is, where `c_max` is
//! the largest `c` meeting the consumers' bound. The search therefore only
//! risk-checks `c_max` for each `n`.

use std::io;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob_kernel::{
    hypergeometric_cdf, Binomial, CountDistribution, Hypergeometric, LotSize, Plan, Probability,
};
use crate::risk_model::{
    realized_quality_levels, QualitySpec, RealizedLevels, RiskBounds, RiskPair,
};

/// Default sample-size cap for the infinite-lot scan.
pub const DEFAULT_SCAN_CAP: u64 = 1_000_000;

/// Largest lot the brute-force oracle accepts.
pub const BRUTE_FORCE_LIMIT: u64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanResult {
    pub plan: Plan,
    pub risks: RiskPair,
    pub realized: RealizedLevels,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanRow {
    pub lot: u64,
    pub result: PlanResult,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PlanTable {
    pub rows: Vec<PlanRow>,
}

/// Acceptance model at the two realized levels for a given sample size.
enum Model {
    Finite {
        alpha: Hypergeometric,
        beta: Hypergeometric,
    },
    Infinite {
        alpha: Binomial,
        beta: Binomial,
    },
}

impl Model {
    fn new(n: u64, lot: LotSize, spec: &QualitySpec) -> Result<Self> {
        Ok(match lot {
            LotSize::Finite(size) => Model::Finite {
                alpha: Hypergeometric::new(n, spec.p_aql().floor_count(size), size)?,
                beta: Hypergeometric::new(n, spec.p_lq().ceil_count(size), size)?,
            },
            LotSize::Infinite => Model::Infinite {
                alpha: Binomial::new(n, spec.p_aql().value())?,
                beta: Binomial::new(n, spec.p_lq().value())?,
            },
        })
    }

    fn max_c(&self, beta_max: f64) -> Option<u64> {
        match self {
            Model::Finite { beta, .. } => beta.largest_c_within(beta_max),
            Model::Infinite { beta, .. } => beta.largest_c_within(beta_max),
        }
    }

    fn risks(&self, c: u64) -> RiskPair {
        let (acc_alpha, acc_beta) = match self {
            Model::Finite { alpha, beta } => (alpha.cdf(c), beta.cdf(c)),
            Model::Infinite { alpha, beta } => (alpha.cdf(c), beta.cdf(c)),
        };
        RiskPair {
            alpha: Probability::clamped(1.0 - acc_alpha),
            beta: Probability::clamped(acc_beta),
        }
    }
}

/// Largest `c <= n` whose consumers' risk stays within `beta_max`; `None`
/// if even `c = 0` exceeds it. The producers' bound is not checked.
pub fn max_acceptance_number(
    n: u64,
    lot: LotSize,
    spec: &QualitySpec,
    bounds: &RiskBounds,
) -> Result<Option<u64>> {
    if n == 0 {
        return Err(Error::InvalidPlan {
            n,
            c: 0,
            reason: "sample size must be positive",
        });
    }
    Ok(Model::new(n, lot, spec)?.max_c(bounds.beta_max()))
}

/// Admissible plan with the smallest sample size (ties: largest `c`).
///
/// Finite lots always succeed since full inspection is admissible.
/// Infinite lots scan up to [`DEFAULT_SCAN_CAP`].
pub fn optimal_plan(lot: LotSize, spec: &QualitySpec, bounds: &RiskBounds) -> Result<PlanResult> {
    optimal_plan_capped(lot, spec, bounds, DEFAULT_SCAN_CAP)
}

/// As [`optimal_plan`] with an explicit cap on the scanned sample size.
/// The cap only applies to infinite lots.
pub fn optimal_plan_capped(
    lot: LotSize,
    spec: &QualitySpec,
    bounds: &RiskBounds,
    scan_cap: u64,
) -> Result<PlanResult> {
    let last = match lot {
        LotSize::Finite(size) => size,
        LotSize::Infinite => scan_cap,
    };
    for n in 1..=last {
        let model = Model::new(n, lot, spec)?;
        let Some(c) = model.max_c(bounds.beta_max()) else {
            continue;
        };
        let risks = model.risks(c);
        if risks.alpha.value() <= bounds.alpha_max() {
            return Ok(PlanResult {
                plan: Plan::new(n, c)?,
                risks,
                realized: realized_quality_levels(lot, spec),
            });
        }
    }
    Err(Error::NoPlanWithinCap { cap: last })
}

/// Optimal plans for every `N` in `[from, to]`, in ascending `N`.
pub fn plan_table(
    from: u64,
    to: u64,
    spec: &QualitySpec,
    bounds: &RiskBounds,
) -> Result<PlanTable> {
    if from == 0 || from > to {
        return Err(crate::error::domain(format!(
            "invalid lot range [{from}, {to}]"
        )));
    }
    let rows = (from..=to)
        .into_par_iter()
        .map(|size| {
            let result = optimal_plan(LotSize::Finite(size), spec, bounds)?;
            Ok(PlanRow { lot: size, result })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PlanTable { rows })
}

/// Exhaustive search over all `0 <= c <= n <= N` using only
/// [`hypergeometric_cdf`]. Returns the admissible plan with the smallest `n`
/// and, among those, the largest `c`.
pub fn brute_force_oracle(
    lot_size: u64,
    spec: &QualitySpec,
    bounds: &RiskBounds,
) -> Result<PlanResult> {
    if lot_size > BRUTE_FORCE_LIMIT {
        return Err(Error::CostGuard {
            lot: lot_size,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let lot = LotSize::finite(lot_size)?;
    let k_alpha = spec.p_aql().floor_count(lot_size);
    let k_beta = spec.p_lq().ceil_count(lot_size);
    for n in 1..=lot_size {
        let mut best = None;
        for c in 0..=n {
            let beta = hypergeometric_cdf(c, n, k_beta, lot_size)?;
            let alpha = hypergeometric_cdf(c, n, k_alpha, lot_size)?.complement();
            if alpha.value() <= bounds.alpha_max() && beta.value() <= bounds.beta_max() {
                best = Some((c, RiskPair { alpha, beta }));
            }
        }
        if let Some((c, risks)) = best {
            return Ok(PlanResult {
                plan: Plan::new(n, c)?,
                risks,
                realized: realized_quality_levels(lot, spec),
            });
        }
    }
    unreachable!("full inspection is always admissible")
}

pub const TABLE_HEADER: [&str; 7] = ["N", "n", "c", "alpha", "beta", "p_alpha_num", "p_beta_num"];

/// CSV with header `N,n,c,alpha,beta,p_alpha_num,p_beta_num`, risks to six
/// decimals.
pub fn write_table_csv<W: io::Write>(table: &PlanTable, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE_HEADER)?;
    for row in &table.rows {
        let r = &row.result;
        w.write_record([
            row.lot.to_string(),
            r.plan.n().to_string(),
            r.plan.c().to_string(),
            format!("{:.6}", r.risks.alpha.value()),
            format!("{:.6}", r.risks.beta.value()),
            level_numerator(&r.realized.p_alpha).to_string(),
            level_numerator(&r.realized.p_beta).to_string(),
        ])?;
    }
    w.flush()
}

fn level_numerator(level: &crate::risk_model::QualityLevel) -> u64 {
    match *level {
        crate::risk_model::QualityLevel::Realized { defectives, .. } => defectives,
        crate::risk_model::QualityLevel::Nominal(_) => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> (QualitySpec, RiskBounds) {
        (QualitySpec::default(), RiskBounds::default())
    }

    #[test]
    fn max_acceptance_examples() {
        let (spec, bounds) = defaults();
        assert_eq!(
            max_acceptance_number(109, LotSize::Infinite, &spec, &bounds).unwrap(),
            Some(3)
        );
        assert_eq!(
            max_acceptance_number(22, LotSize::Finite(43), &spec, &bounds).unwrap(),
            Some(0)
        );
        assert_eq!(
            max_acceptance_number(5, LotSize::Infinite, &spec, &bounds).unwrap(),
            None
        );
        assert!(max_acceptance_number(0, LotSize::Infinite, &spec, &bounds).is_err());
        assert!(max_acceptance_number(44, LotSize::Finite(43), &spec, &bounds).is_err());
    }

    #[test]
    fn optimal_examples() {
        let (spec, bounds) = defaults();
        let r = optimal_plan(LotSize::Infinite, &spec, &bounds).unwrap();
        assert_eq!(r.plan, Plan::new(109, 3).unwrap());
        assert!((r.risks.alpha.value() - 0.0243).abs() <= 5e-4);
        assert!((r.risks.beta.value() - 0.0485).abs() <= 5e-4);
        for (size, n, c) in [
            (258, 57, 1),
            (400, 82, 2),
            (10, 10, 0),
            (143, 51, 1),
            (43, 22, 0),
        ] {
            let r = optimal_plan(LotSize::Finite(size), &spec, &bounds).unwrap();
            assert_eq!((r.plan.n(), r.plan.c()), (n, c), "N={size}");
        }
        let r = optimal_plan(LotSize::Finite(143), &spec, &bounds).unwrap();
        assert_eq!(r.risks.alpha.value(), 0.0);
    }

    #[test]
    fn scan_cap_error() {
        let (spec, bounds) = defaults();
        let err = optimal_plan_capped(LotSize::Infinite, &spec, &bounds, 100).unwrap_err();
        assert_eq!(err, Error::NoPlanWithinCap { cap: 100 });
        // the cap never restricts finite lots
        assert!(optimal_plan_capped(LotSize::Finite(400), &spec, &bounds, 10).is_ok());
    }

    #[test]
    fn single_item_lot() {
        let (spec, bounds) = defaults();
        let t = plan_table(1, 1, &spec, &bounds).unwrap();
        let r = &t.rows[0].result;
        assert_eq!(r.plan, Plan::new(1, 0).unwrap());
        assert_eq!((r.risks.alpha.value(), r.risks.beta.value()), (0.0, 0.0));
    }

    #[test]
    fn table_range_validation() {
        let (spec, bounds) = defaults();
        assert!(plan_table(5, 4, &spec, &bounds).is_err());
        assert!(plan_table(0, 4, &spec, &bounds).is_err());
    }

    #[test]
    fn oracle_examples() {
        let (spec, bounds) = defaults();
        assert_eq!(
            brute_force_oracle(258, &spec, &bounds).unwrap().plan,
            Plan::new(57, 1).unwrap()
        );
        assert_eq!(
            brute_force_oracle(14, &spec, &bounds).unwrap().plan,
            Plan::new(14, 0).unwrap()
        );
        let a = brute_force_oracle(600, &spec, &bounds).unwrap();
        let b = optimal_plan(LotSize::Finite(600), &spec, &bounds).unwrap();
        assert_eq!(a.plan, b.plan);
        assert!(matches!(
            brute_force_oracle(2001, &spec, &bounds),
            Err(Error::CostGuard { .. })
        ));
    }

    #[test]
    fn csv_layout() {
        let (spec, bounds) = defaults();
        let t = plan_table(43, 43, &spec, &bounds).unwrap();
        let mut buf = Vec::new();
        write_table_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "N,n,c,alpha,beta,p_alpha_num,p_beta_num");
        assert!(
            lines[1].starts_with("43,22,0,0.000000,0.048"),
            "{}",
            lines[1]
        );
        assert!(lines[1].ends_with(",0,4"));
    }
}

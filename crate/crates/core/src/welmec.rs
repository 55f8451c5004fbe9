//! Plan evaluation under the WELMEC reading of the two anchor points
//! `(p_aql, 1 − α_max)` and `(p_lq, β_max)`: the OC curve must pass on or
//! left of both.
//!
//! The continuous variant evaluates finite lots at the nominal (generally
//! unrealizable) levels via [`interpolated_acceptance`]; the pointwise
//! variant checks every realizable OC point at or beyond each level.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::planner::{optimal_plan, PlanResult};
use crate::prob_kernel::{
    binomial_cdf, hypergeometric_cdf, interpolated_acceptance, LotSize, Plan, Probability,
};
use crate::risk_model::{risks, QualitySpec, RiskBounds, RiskPair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelmecRisks {
    pub alpha_cont: Probability,
    pub beta_cont: Probability,
}

fn nominal_acceptance(plan: Plan, lot: LotSize, p: f64) -> Result<Probability> {
    match lot {
        LotSize::Finite(size) => interpolated_acceptance(plan, size, p),
        LotSize::Infinite => binomial_cdf(plan.c(), plan.n(), p),
    }
}

/// Risks at the nominal levels `p_aql` and `p_lq`.
pub fn welmec_risks(plan: Plan, lot: LotSize, spec: &QualitySpec) -> Result<WelmecRisks> {
    plan.check_lot(lot)?;
    Ok(WelmecRisks {
        alpha_cont: nominal_acceptance(plan, lot, spec.p_aql().value())?.complement(),
        beta_cont: nominal_acceptance(plan, lot, spec.p_lq().value())?,
    })
}

/// Acceptance at `p_aql` is at most `1 − α_max` and at `p_lq` at most
/// `β_max` (both non-strict).
pub fn welmec_admissible_continuous(
    plan: Plan,
    lot: LotSize,
    spec: &QualitySpec,
    bounds: &RiskBounds,
) -> Result<bool> {
    plan.check_lot(lot)?;
    let at_aql = nominal_acceptance(plan, lot, spec.p_aql().value())?;
    let at_lq = nominal_acceptance(plan, lot, spec.p_lq().value())?;
    Ok(at_aql.value() <= 1.0 - bounds.alpha_max() && at_lq.value() <= bounds.beta_max())
}

/// Every realizable `k/N >= p_aql` has acceptance at most `1 − α_max` and
/// every `k/N >= p_lq` at most `β_max`. Levels below `p_aql` are ignored.
pub fn welmec_admissible_pointwise(
    plan: Plan,
    lot: LotSize,
    spec: &QualitySpec,
    bounds: &RiskBounds,
) -> Result<bool> {
    let LotSize::Finite(size) = lot else {
        return Err(Error::Unsupported(
            "the pointwise criterion needs a finite lot",
        ));
    };
    plan.check_lot(lot)?;
    let first_aql = spec.p_aql().ceil_count(size);
    let first_lq = spec.p_lq().ceil_count(size);
    for k in first_aql..=size {
        let pac = hypergeometric_cdf(plan.c(), plan.n(), k, size)?.value();
        let limit = if k >= first_lq {
            bounds.beta_max()
        } else {
            1.0 - bounds.alpha_max()
        };
        if pac > limit {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateEvaluation {
    pub plan: Plan,
    pub risks: RiskPair,
    pub hypothesis_admissible: bool,
    pub welmec: WelmecRisks,
    pub continuous_admissible: bool,
    /// `None` for infinite lots.
    pub pointwise_admissible: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub lot: LotSize,
    pub hypothesis_plan: PlanResult,
    pub evaluated_plans: Vec<CandidateEvaluation>,
}

pub fn evaluate_candidate(
    plan: Plan,
    lot: LotSize,
    spec: &QualitySpec,
    bounds: &RiskBounds,
) -> Result<CandidateEvaluation> {
    let risks = risks(plan, lot, spec)?;
    Ok(CandidateEvaluation {
        plan,
        risks,
        hypothesis_admissible: risks.within(bounds),
        welmec: welmec_risks(plan, lot, spec)?,
        continuous_admissible: welmec_admissible_continuous(plan, lot, spec, bounds)?,
        pointwise_admissible: match lot {
            LotSize::Finite(_) => Some(welmec_admissible_pointwise(plan, lot, spec, bounds)?),
            LotSize::Infinite => None,
        },
    })
}

/// The hypothesis-optimal plan for `lot` next to both interpretations'
/// risks for each candidate.
pub fn compare_interpretations(
    lot: LotSize,
    spec: &QualitySpec,
    bounds: &RiskBounds,
    candidates: &[Plan],
) -> Result<ComparisonReport> {
    let hypothesis_plan = optimal_plan(lot, spec, bounds)?;
    let evaluated_plans = candidates
        .iter()
        .map(|&plan| evaluate_candidate(plan, lot, spec, bounds))
        .collect::<Result<_>>()?;
    Ok(ComparisonReport {
        lot,
        hypothesis_plan,
        evaluated_plans,
    })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

impl ComparisonReport {
    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let h = &self.hypothesis_plan;
        let mut s = format!(
            "lot size {}: hypothesis-optimal plan {} with alpha={:.6} beta={:.6}\n\n",
            self.lot,
            h.plan,
            h.risks.alpha.value(),
            h.risks.beta.value()
        );
        s.push_str(&format!(
            "{:<12} {:>9} {:>9} {:>4} | {:>10} {:>10} {:>10} {:>9}\n",
            "plan", "alpha", "beta", "hyp", "alpha_cont", "beta_cont", "continuous", "pointwise"
        ));
        for e in &self.evaluated_plans {
            s.push_str(&format!(
                "{:<12} {:>9.6} {:>9.6} {:>4} | {:>10.6} {:>10.6} {:>10} {:>9}\n",
                e.plan.to_string(),
                e.risks.alpha.value(),
                e.risks.beta.value(),
                yes_no(e.hypothesis_admissible),
                e.welmec.alpha_cont.value(),
                e.welmec.beta_cont.value(),
                yes_no(e.continuous_admissible),
                e.pointwise_admissible.map_or("n/a", yes_no),
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(n: u64, c: u64) -> Plan {
        Plan::new(n, c).unwrap()
    }

    fn defaults() -> (QualitySpec, RiskBounds) {
        (QualitySpec::default(), RiskBounds::default())
    }

    #[test]
    fn retro_risk_examples() {
        let (spec, _) = defaults();
        let w = welmec_risks(plan(27, 0), LotSize::Finite(43), &spec).unwrap();
        assert!((w.alpha_cont.value() - 0.343).abs() <= 2e-3);
        assert!((w.beta_cont.value() - 0.045).abs() <= 2e-3);
        let w = welmec_risks(plan(56, 1), LotSize::Finite(143), &spec).unwrap();
        assert!((w.alpha_cont.value() - 0.055).abs() <= 2e-3);
        let w = welmec_risks(plan(88, 2), LotSize::Infinite, &spec).unwrap();
        assert!((w.alpha_cont.value() - 0.0587).abs() <= 5e-4);
    }

    #[test]
    fn infinite_lots_match_hypothesis_risks() {
        let (spec, _) = defaults();
        for (n, c) in [(42, 0), (66, 1), (88, 2), (109, 3)] {
            let w = welmec_risks(plan(n, c), LotSize::Infinite, &spec).unwrap();
            let r = risks(plan(n, c), LotSize::Infinite, &spec).unwrap();
            assert_eq!((w.alpha_cont, w.beta_cont), (r.alpha, r.beta));
        }
    }

    #[test]
    fn continuous_examples() {
        let (spec, bounds) = defaults();
        assert!(
            !welmec_admissible_continuous(plan(101, 1), LotSize::Finite(101), &spec, &bounds)
                .unwrap()
        );
        assert!(
            welmec_admissible_continuous(plan(36, 0), LotSize::Finite(143), &spec, &bounds)
                .unwrap()
        );
        assert!(
            !welmec_admissible_continuous(plan(109, 3), LotSize::Infinite, &spec, &bounds).unwrap()
        );
        assert!(
            !welmec_admissible_continuous(plan(57, 1), LotSize::Finite(258), &spec, &bounds)
                .unwrap()
        );
    }

    #[test]
    fn pointwise_examples() {
        let (spec, bounds) = defaults();
        assert!(
            welmec_admissible_pointwise(plan(57, 1), LotSize::Finite(258), &spec, &bounds).unwrap()
        );
        assert!(
            !welmec_admissible_pointwise(plan(50, 50), LotSize::Finite(50), &spec, &bounds)
                .unwrap()
        );
        assert_eq!(
            welmec_admissible_pointwise(plan(57, 1), LotSize::Infinite, &spec, &bounds),
            Err(Error::Unsupported(
                "the pointwise criterion needs a finite lot"
            ))
        );
    }

    #[test]
    fn full_inspection_at_hundreds_is_continuous_inadmissible() {
        let (spec, bounds) = defaults();
        for c in 1..=5u64 {
            for size in [100 * c, 100 * c + 1] {
                let full = plan(size, c);
                assert!(
                    !welmec_admissible_continuous(full, LotSize::Finite(size), &spec, &bounds)
                        .unwrap(),
                    "N={size}"
                );
                assert!(crate::risk_model::is_admissible(
                    full,
                    LotSize::Finite(size),
                    &spec,
                    &bounds
                )
                .unwrap());
            }
        }
    }

    #[test]
    fn comparison_report() {
        let (spec, bounds) = defaults();
        let cands = [plan(40, 0), plan(62, 1), plan(101, 2)];
        let rep = compare_interpretations(LotSize::Finite(400), &spec, &bounds, &cands).unwrap();
        assert_eq!(rep.hypothesis_plan.plan, plan(82, 2));
        let got: Vec<f64> = rep
            .evaluated_plans
            .iter()
            .map(|e| e.welmec.alpha_cont.value())
            .collect();
        for (g, want) in got.iter().zip([0.345, 0.115, 0.051]) {
            assert!((g - want).abs() <= 2e-3, "{got:?}");
        }
        let rep =
            compare_interpretations(LotSize::Finite(43), &spec, &bounds, &[plan(27, 0)]).unwrap();
        let e = &rep.evaluated_plans[0];
        assert_eq!(e.risks.alpha.value(), 0.0);
        assert!(e.risks.beta.value() <= 0.015);
        let text = rep.to_text();
        assert!(text.contains("(22, 0)"));
        assert!(text.contains("(27, 0)"));
        let json = serde_json::to_value(&rep).unwrap();
        assert_eq!(json["lot"], 43);
        assert_eq!(json["hypothesis_plan"]["plan"]["n"], 22);
    }

    #[test]
    fn invalid_candidate() {
        let (spec, bounds) = defaults();
        assert!(
            compare_interpretations(LotSize::Finite(43), &spec, &bounds, &[plan(44, 0)]).is_err()
        );
    }
}

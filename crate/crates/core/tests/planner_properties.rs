use mid_sampling::planner::{brute_force_oracle, max_acceptance_number, optimal_plan, plan_table};
use mid_sampling::prob_kernel::{hypergeometric_cdf, LotSize, Plan};
use mid_sampling::risk_model::{
    is_admissible, oc_curve, producers_risk, realized_quality_levels, risks, QualityLevel,
    QualitySpec, RiskBounds,
};
use mid_sampling::welmec::welmec_risks;
use rayon::prelude::*;

fn defaults() -> (QualitySpec, RiskBounds) {
    (QualitySpec::default(), RiskBounds::default())
}

#[test]
fn oracle_agrees_up_to_200() {
    let (spec, bounds) = defaults();
    for lot in 1..=200 {
        let fast = optimal_plan(LotSize::Finite(lot), &spec, &bounds).unwrap();
        let slow = brute_force_oracle(lot, &spec, &bounds).unwrap();
        assert_eq!(fast, slow, "N={lot}");
    }
}

#[test]
fn returned_plan_is_admissible_and_minimal() {
    let (spec, bounds) = defaults();
    for lot in (1..=3000).step_by(7) {
        let lot_size = LotSize::Finite(lot);
        let r = optimal_plan(lot_size, &spec, &bounds).unwrap();
        assert!(is_admissible(r.plan, lot_size, &spec, &bounds).unwrap());
        let n = r.plan.n();
        if n > 1 {
            for c in 0..n {
                let smaller = Plan::new(n - 1, c).unwrap();
                assert!(
                    !is_admissible(smaller, lot_size, &spec, &bounds).unwrap(),
                    "N={lot} ({}, {c})",
                    n - 1
                );
            }
        }
    }
}

#[test]
fn largest_feasible_c_is_sufficient() {
    let (spec, bounds) = defaults();
    (1..=300u64).into_par_iter().for_each(|lot| {
        let lot_size = LotSize::Finite(lot);
        for n in 1..=lot {
            let c_max = max_acceptance_number(n, lot_size, &spec, &bounds).unwrap();
            let best = match c_max {
                Some(c) => {
                    is_admissible(Plan::new(n, c).unwrap(), lot_size, &spec, &bounds).unwrap()
                }
                None => false,
            };
            let mut prev = None;
            let mut any = false;
            for c in 0..=n {
                let r = risks(Plan::new(n, c).unwrap(), lot_size, &spec).unwrap();
                if let Some((a, b)) = prev {
                    assert!(r.alpha <= a && r.beta >= b, "N={lot} n={n} c={c}");
                }
                prev = Some((r.alpha, r.beta));
                any |= r.within(&bounds);
            }
            assert_eq!(any, best, "N={lot} n={n}");
        }
    });
}

#[test]
fn hypothesis_risks_never_exceed_interpolated_risks() {
    let spec = QualitySpec::default();
    (1..=300u64).into_par_iter().for_each(|lot| {
        let lot_size = LotSize::Finite(lot);
        for n in 1..=lot {
            for c in 0..=n {
                let plan = Plan::new(n, c).unwrap();
                let r = risks(plan, lot_size, &spec).unwrap();
                let w = welmec_risks(plan, lot_size, &spec).unwrap();
                assert!(
                    r.alpha.value() <= w.alpha_cont.value() + 1e-12,
                    "alpha N={lot} {plan}"
                );
                assert!(
                    r.beta.value() <= w.beta_cont.value() + 1e-12,
                    "beta N={lot} {plan}"
                );
            }
        }
    });
}

#[test]
fn producers_risk_vanishes_below_hundred_per_acceptance_number() {
    let (spec, bounds) = defaults();
    let table = plan_table(1, 2000, &spec, &bounds).unwrap();
    for row in &table.rows {
        let c = row.result.plan.c();
        if row.lot < 100 * (c + 1) {
            assert_eq!(row.result.risks.alpha.value(), 0.0, "N={}", row.lot);
        }
    }
    for lot in 1..=600u64 {
        for c in 0..=5u64 {
            if lot < 100 * (c + 1) && c <= lot {
                let plan = Plan::new(lot.min(c + 20), c).unwrap();
                assert_eq!(
                    producers_risk(plan, LotSize::Finite(lot), &spec)
                        .unwrap()
                        .value(),
                    0.0
                );
            }
        }
    }
}

#[test]
fn risks_are_hypergeometric_at_realized_levels() {
    let spec = QualitySpec::default();
    for lot in [50u64, 143, 258, 700, 1499, 4321] {
        let levels = realized_quality_levels(LotSize::Finite(lot), &spec);
        let (
            QualityLevel::Realized { defectives: ka, .. },
            QualityLevel::Realized { defectives: kb, .. },
        ) = (levels.p_alpha, levels.p_beta)
        else {
            panic!("finite lot must give realized levels");
        };
        assert_eq!(ka, lot / 100);
        assert_eq!(kb, (7 * lot).div_ceil(100));
        for (n, c) in [(20, 0), (50, 1), (50, 2)] {
            let plan = Plan::new(n, c).unwrap();
            let r = risks(plan, LotSize::Finite(lot), &spec).unwrap();
            assert_eq!(
                r.alpha,
                hypergeometric_cdf(c, n, ka, lot).unwrap().complement()
            );
            assert_eq!(r.beta, hypergeometric_cdf(c, n, kb, lot).unwrap());
        }
    }
}

#[test]
fn oc_curves_start_at_one_and_decrease() {
    for (lot, n, c) in [
        (LotSize::Finite(258), 57, 1),
        (LotSize::Finite(43), 22, 0),
        (LotSize::Infinite, 109, 3),
    ] {
        let pts = oc_curve(Plan::new(n, c).unwrap(), lot, None).unwrap();
        assert_eq!((pts[0].p, pts[0].pac.value()), (0.0, 1.0));
        for w in pts.windows(2) {
            assert!(w[1].p > w[0].p && w[1].pac <= w[0].pac);
        }
    }
}

#[test]
fn acceptance_number_structure_above_1500() {
    let (spec, bounds) = defaults();
    let table = plan_table(1500, 10_000, &spec, &bounds).unwrap();
    let in_band = |lo: u64, hi: u64| -> Vec<u64> {
        let mut cs: Vec<u64> = table
            .rows
            .iter()
            .filter(|r| (lo..hi).contains(&r.lot))
            .map(|r| r.result.plan.c())
            .collect();
        cs.sort_unstable();
        cs.dedup();
        cs
    };
    assert_eq!(in_band(1500, 2900), vec![2, 3]);
    assert_eq!(in_band(2900, 10_001), vec![3]);
}

use mid_sampling::prob_kernel::{
    binomial_cdf, binomial_pmf, hypergeometric_cdf, hypergeometric_pmf, interpolated_acceptance,
    Plan,
};
use proptest::prelude::*;

fn lot_sample_defectives(max_lot: u64) -> impl Strategy<Value = (u64, u64, u64)> {
    (1..=max_lot).prop_flat_map(|lot| (Just(lot), 1..=lot, 0..=lot))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn hypergeometric_pmf_sums_to_one((lot, n, k) in lot_sample_defectives(500)) {
        let total: f64 = (0..=n).map(|x| hypergeometric_pmf(x, n, k, lot).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-10, "sum={total}");
    }

    #[test]
    fn binomial_pmf_sums_to_one(n in 1u64..=1000, p in 0.0f64..=1.0) {
        let total: f64 = (0..=n).map(|x| binomial_pmf(x, n, p).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-10, "sum={total}");
    }

    #[test]
    fn hypergeometric_cdf_monotone_in_c((lot, n, k) in lot_sample_defectives(500)) {
        let mut prev = 0.0;
        for c in 0..=n.min(60) {
            let v = hypergeometric_cdf(c, n, k, lot).unwrap().value();
            prop_assert!(v >= prev, "c={c}: {v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn binomial_cdf_monotone_in_c(n in 1u64..=1000, p in 0.0f64..=1.0) {
        let mut prev = 0.0;
        for c in 0..=n.min(60) {
            let v = binomial_cdf(c, n, p).unwrap().value();
            prop_assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn binomial_cdf_nonincreasing_in_p(n in 1u64..=1000, c in 0u64..=10, p in 0.0f64..=1.0, dp in 0.0f64..=0.2) {
        let c = c.min(n);
        let q = (p + dp).min(1.0);
        let lo = binomial_cdf(c, n, p).unwrap().value();
        let hi = binomial_cdf(c, n, q).unwrap().value();
        prop_assert!(hi <= lo + 1e-12, "Pac({q})={hi} > Pac({p})={lo}");
    }

    #[test]
    fn hypergeometric_cdf_nonincreasing_in_k((lot, n, k) in lot_sample_defectives(500), c in 0u64..=10) {
        prop_assume!(k < lot);
        let c = c.min(n);
        let lo = hypergeometric_cdf(c, n, k, lot).unwrap().value();
        let hi = hypergeometric_cdf(c, n, k + 1, lot).unwrap().value();
        prop_assert!(hi <= lo + 1e-12);
    }

    #[test]
    fn interpolation_reduces_at_integer_levels((lot, n, k) in lot_sample_defectives(500), c in 0u64..=8) {
        let plan = Plan::new(n, c.min(n)).unwrap();
        let p = k as f64 / lot as f64;
        let exact = hypergeometric_cdf(plan.c(), n, k, lot).unwrap().value();
        let interp = interpolated_acceptance(plan, lot, p).unwrap().value();
        prop_assert!((exact - interp).abs() <= 1e-9, "{exact} vs {interp}");
    }

    #[test]
    fn interpolation_stays_between_neighbouring_integers(lot in 20u64..=500, n in 1u64..=20, c in 0u64..=3, t in 0.01f64..0.99) {
        let c = c.min(n);
        let plan = Plan::new(n, c).unwrap();
        let k = (lot / 10).max(1);
        let p = (k as f64 + t) / lot as f64;
        let v = interpolated_acceptance(plan, lot, p).unwrap().value();
        let upper = hypergeometric_cdf(c, n, k, lot).unwrap().value();
        let lower = hypergeometric_cdf(c, n, k + 1, lot).unwrap().value();
        prop_assert!(lower - 1e-12 <= v && v <= upper + 1e-12, "{lower} <= {v} <= {upper}");
    }
}

#[test]
fn hypergeometric_approaches_binomial_for_large_lots() {
    let lot = 1_000_000;
    let k = lot / 100;
    for n in 1..=200 {
        for c in 0..=5u64.min(n) {
            let h = hypergeometric_cdf(c, n, k, lot).unwrap().value();
            let b = binomial_cdf(c, n, 0.01).unwrap().value();
            assert!((h - b).abs() < 1e-3, "n={n} c={c}: {h} vs {b}");
        }
    }
}

#[test]
fn interpolation_reduces_on_a_grid() {
    for lot in (100..=500).step_by(100) {
        for n in [1, 5, 20, 57, 86] {
            for c in 0..=3.min(n) {
                let plan = Plan::new(n, c).unwrap();
                let k = lot / 100;
                let exact = hypergeometric_cdf(c, n, k, lot).unwrap().value();
                let interp = interpolated_acceptance(plan, lot, 0.01).unwrap().value();
                assert!((exact - interp).abs() <= 1e-9, "N={lot} n={n} c={c}");
            }
        }
    }
}

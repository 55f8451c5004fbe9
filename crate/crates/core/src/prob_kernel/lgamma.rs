//! Log-Gamma evaluation and log binomial coefficients.
//!
//! Integer arguments up to the table cap are served from a precomputed
//! `ln k!` table; everything else goes through `libm::lgamma`.

use std::sync::OnceLock;

/// Default number of `ln k!` entries (covers lots up to 10^5).
pub const DEFAULT_TABLE_CAP: u64 = 100_002;

/// Below this `min(b, a - b)` the coefficient of a large integer `a` is
/// summed term by term instead of differencing three huge log-factorials.
const SMALL_K_PRODUCT: u64 = 64;

static TABLE: OnceLock<LnFactorialTable> = OnceLock::new();

/// Read-only table of `ln k!` for `k = 0..=cap`.
#[derive(Debug, Clone)]
pub struct LnFactorialTable {
    values: Vec<f64>,
}

impl LnFactorialTable {
    pub fn new(cap: u64) -> Self {
        let values = (0..=cap).map(|k| libm::lgamma(k as f64 + 1.0)).collect();
        Self { values }
    }

    pub fn cap(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    #[inline]
    pub fn get(&self, k: u64) -> Option<f64> {
        self.values.get(k as usize).copied()
    }
}

/// Installs a table with a custom cap. Returns `false` if the shared table
/// was already built (by an earlier call or by first use).
pub fn init_table(cap: u64) -> bool {
    TABLE.set(LnFactorialTable::new(cap)).is_ok()
}

#[inline]
pub(crate) fn table() -> &'static LnFactorialTable {
    TABLE.get_or_init(|| LnFactorialTable::new(DEFAULT_TABLE_CAP))
}

/// `ln k!`
#[inline]
pub fn ln_factorial(k: u64) -> f64 {
    match table().get(k) {
        Some(v) => v,
        None => libm::lgamma(k as f64 + 1.0),
    }
}

/// `ln C(a, b)` for integers, `None` when `b > a`.
#[inline]
pub(crate) fn ln_choose_int(a: u64, b: u64) -> Option<f64> {
    if b > a {
        return None;
    }
    let k = b.min(a - b);
    if k == 0 {
        return Some(0.0);
    }
    let tab = table();
    if a <= tab.cap() {
        // all three entries are in range
        let v = tab.values[a as usize] - tab.values[b as usize] - tab.values[(a - b) as usize];
        return Some(v);
    }
    if k <= SMALL_K_PRODUCT {
        let base = (a - k) as f64;
        let mut acc = super::sum::NeumaierSum::new();
        for i in 1..=k {
            acc.add(((base + i as f64) / i as f64).ln());
        }
        return Some(acc.value());
    }
    Some(ln_factorial(a) - ln_factorial(b) - ln_factorial(a - b))
}

/// Gamma-generalized `ln C(a, b)` for real `a >= 0` and integer `b`.
///
/// Defined while `Γ(a - b + 1)` has a positive argument; at or beyond the
/// first pole (`b >= a + 1`) the coefficient is treated as zero and `None`
/// is returned. For integral `a` this is exactly the `b > a` rule.
#[inline]
pub(crate) fn ln_choose_real(a: f64, b: u64) -> Option<f64> {
    if a.fract() == 0.0 && a <= u64::MAX as f64 {
        return ln_choose_int(a as u64, b);
    }
    let b = b as f64;
    let rest = a - b + 1.0;
    if rest <= 0.0 {
        return None;
    }
    Some(libm::lgamma(a + 1.0) - libm::lgamma(b + 1.0) - libm::lgamma(rest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_factorials() {
        let mut f = 1.0f64;
        for k in 1..=20u64 {
            f *= k as f64;
            assert!((ln_factorial(k) - f.ln()).abs() < 1e-13, "k={k}");
        }
        assert_eq!(ln_factorial(0), 0.0);
    }

    #[test]
    fn table_and_libm_agree_at_cap() {
        let cap = table().cap();
        let a = ln_factorial(cap);
        let b = libm::lgamma(cap as f64 + 1.0);
        assert!((a - b).abs() <= 1e-15 * b.abs());
    }

    #[test]
    fn product_path_above_table() {
        // C(10^6, 2) = 499999500000
        let v = ln_choose_int(1_000_000, 2).unwrap();
        let exact = (499_999_500_000f64).ln();
        assert!(((v - exact) / exact).abs() < 1e-14);
        assert_eq!(ln_choose_int(1_000_000, 1_000_000), Some(0.0));
    }

    #[test]
    fn real_path_cutoff() {
        assert!(ln_choose_real(99.99, 100).is_some());
        assert!(ln_choose_real(99.99, 101).is_none());
        assert!(ln_choose_real(3.0, 4).is_none());
        assert_eq!(ln_choose_real(5.0, 2), ln_choose_int(5, 2));
    }

    #[test]
    fn custom_table() {
        let t = LnFactorialTable::new(10);
        assert_eq!(t.cap(), 10);
        assert!(t.get(11).is_none());
        assert!((t.get(5).unwrap() - 120f64.ln()).abs() < 1e-14);
    }
}

//! Binomial, hypergeometric and Gamma-interpolated hypergeometric
//! acceptance probabilities.
//!
//! Every pmf term is evaluated in log space, exponentiated individually and
//! accumulated with a compensated sum. Cumulative sums run in ascending `x`.

mod lgamma;
mod sum;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{domain, Error, Result};

pub use lgamma::{init_table, ln_factorial, LnFactorialTable, DEFAULT_TABLE_CAP};
pub use sum::NeumaierSum;

pub(crate) use lgamma::{ln_choose_int, ln_choose_real};

/// Lot size: a finite count `N >= 1` or the infinite-lot idealization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LotSize {
    Finite(u64),
    Infinite,
}

impl LotSize {
    pub fn finite(size: u64) -> Result<Self> {
        if size == 0 {
            return Err(domain("lot size must be at least 1"));
        }
        Ok(LotSize::Finite(size))
    }

    pub fn size(&self) -> Option<u64> {
        match *self {
            LotSize::Finite(n) => Some(n),
            LotSize::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, LotSize::Infinite)
    }
}

impl fmt::Display for LotSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LotSize::Finite(n) => write!(f, "{n}"),
            LotSize::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for LotSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(LotSize::Infinite);
        }
        let n: u64 = s.parse().map_err(|_| {
            domain(format!(
                "lot size must be a positive integer or `inf`, got `{s}`"
            ))
        })?;
        LotSize::finite(n)
    }
}

/// Serialized as the integer `N`, or the string `"inf"`.
impl Serialize for LotSize {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LotSize::Finite(n) => serializer.serialize_u64(*n),
            LotSize::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// Single sampling plan: inspect `n` items, accept iff at most `c` are
/// non-conforming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Plan {
    n: u64,
    c: u64,
}

impl Plan {
    pub fn new(n: u64, c: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPlan {
                n,
                c,
                reason: "sample size must be positive",
            });
        }
        if c > n {
            return Err(Error::InvalidPlan {
                n,
                c,
                reason: "acceptance number exceeds sample size",
            });
        }
        Ok(Plan { n, c })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn c(&self) -> u64 {
        self.c
    }

    /// Checks `n <= N` for finite lots.
    pub fn check_lot(&self, lot: LotSize) -> Result<()> {
        match lot {
            LotSize::Finite(size) if self.n > size => Err(Error::InvalidPlan {
                n: self.n,
                c: self.c,
                reason: "sample size exceeds lot size",
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n, self.c)
    }
}

/// Parses `n:c`.
impl FromStr for Plan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (n, c) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| domain(format!("plan must be written `n:c`, got `{s}`")))?;
        let n = n
            .trim()
            .parse()
            .map_err(|_| domain(format!("bad sample size in `{s}`")))?;
        let c = c
            .trim()
            .parse()
            .map_err(|_| domain(format!("bad acceptance number in `{s}`")))?;
        Plan::new(n, c)
    }
}

const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// A value in `[0, 1]`. Inputs within `1e-12` of the interval are clamped.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (-PROBABILITY_TOLERANCE..=1.0 + PROBABILITY_TOLERANCE).contains(&value) {
            Ok(Probability(value.clamp(0.0, 1.0)))
        } else {
            Err(domain(format!("{value} is not a probability")))
        }
    }

    pub(crate) fn clamped(value: f64) -> Self {
        Probability(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Probability {
        Probability(1.0 - self.0)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// A discrete count distribution with contiguous support `[lo, hi]`.
pub(crate) trait CountDistribution {
    fn support(&self) -> (u64, u64);

    fn pmf(&self, x: u64) -> f64;

    /// `P(X <= c)`; exactly 0 below and exactly 1 at or above the support.
    fn cdf(&self, c: u64) -> f64 {
        let (lo, hi) = self.support();
        if c < lo {
            return 0.0;
        }
        if c >= hi {
            return 1.0;
        }
        let acc: NeumaierSum = (lo..=c).map(|x| self.pmf(x)).sum();
        acc.value().clamp(0.0, 1.0)
    }

    /// Largest `c` with `cdf(c) <= bound`, or `None` if `cdf(0) > bound`.
    /// `bound` must be below 1. Uses the same summation order as `cdf`.
    fn largest_c_within(&self, bound: f64) -> Option<u64> {
        let (lo, hi) = self.support();
        let mut acc = NeumaierSum::new();
        for c in lo..hi {
            acc.add(self.pmf(c));
            if acc.value().clamp(0.0, 1.0) > bound {
                return c.checked_sub(1);
            }
        }
        hi.checked_sub(1)
    }
}

/// Number of non-conforming items in a sample of `n` drawn without
/// replacement from `lot` items of which `defectives` are non-conforming.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Hypergeometric {
    n: u64,
    defectives: u64,
    lot: u64,
    ln_norm: f64,
}

impl Hypergeometric {
    pub(crate) fn new(n: u64, defectives: u64, lot: u64) -> Result<Self> {
        if defectives > lot {
            return Err(domain(format!("K={defectives} exceeds N={lot}")));
        }
        if n > lot {
            return Err(domain(format!("n={n} exceeds N={lot}")));
        }
        let ln_norm = ln_choose_int(lot, n).expect("n <= N");
        Ok(Hypergeometric {
            n,
            defectives,
            lot,
            ln_norm,
        })
    }
}

impl CountDistribution for Hypergeometric {
    fn support(&self) -> (u64, u64) {
        let lo = (self.n + self.defectives).saturating_sub(self.lot);
        (lo, self.defectives.min(self.n))
    }

    #[inline]
    fn pmf(&self, x: u64) -> f64 {
        if x > self.n {
            return 0.0;
        }
        match (
            ln_choose_int(self.defectives, x),
            ln_choose_int(self.lot - self.defectives, self.n - x),
        ) {
            (Some(a), Some(b)) => (a + b - self.ln_norm).exp(),
            _ => 0.0,
        }
    }
}

/// Number of non-conforming items among `n` independent draws.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Binomial {
    n: u64,
    p: f64,
    ln_p: f64,
    ln_q: f64,
}

impl Binomial {
    pub(crate) fn new(n: u64, p: f64) -> Result<Self> {
        check_unit(p, "p")?;
        Ok(Binomial {
            n,
            p,
            ln_p: p.ln(),
            ln_q: (-p).ln_1p(),
        })
    }
}

impl CountDistribution for Binomial {
    fn support(&self) -> (u64, u64) {
        if self.p == 0.0 {
            (0, 0)
        } else if self.p == 1.0 {
            (self.n, self.n)
        } else {
            (0, self.n)
        }
    }

    #[inline]
    fn pmf(&self, x: u64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        if lo == hi {
            return 1.0;
        }
        let ln_c = ln_choose_int(self.n, x).expect("x <= n");
        (ln_c + x as f64 * self.ln_p + (self.n - x) as f64 * self.ln_q).exp()
    }
}

fn check_unit(p: f64, name: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(domain(format!("{name}={p} is outside [0, 1]")))
    }
}

/// `ln C(a, b)` via `lnΓ(a+1) - lnΓ(b+1) - lnΓ(a-b+1)` for real `0 <= b <= a`.
///
/// Integer arguments use the exact log-factorial paths.
pub fn log_binomial_coefficient(a: f64, b: f64) -> Result<f64> {
    if !a.is_finite() || a < 0.0 {
        return Err(domain(format!("a={a} must be a non-negative real")));
    }
    if !b.is_finite() || b < 0.0 || b > a {
        return Err(domain(format!("b={b} must lie within [0, {a}]")));
    }
    if a.fract() == 0.0 && b.fract() == 0.0 && a <= u64::MAX as f64 {
        return Ok(ln_choose_int(a as u64, b as u64).expect("b <= a"));
    }
    Ok(libm::lgamma(a + 1.0) - libm::lgamma(b + 1.0) - libm::lgamma(a - b + 1.0))
}

pub fn binomial_pmf(x: u64, n: u64, p: f64) -> Result<f64> {
    Ok(Binomial::new(n, p)?.pmf(x))
}

/// `P(X <= c)` for `X ~ Binomial(n, p)`.
pub fn binomial_cdf(c: u64, n: u64, p: f64) -> Result<Probability> {
    if c > n {
        return Err(domain(format!("c={c} exceeds n={n}")));
    }
    Ok(Probability::clamped(Binomial::new(n, p)?.cdf(c)))
}

pub fn hypergeometric_pmf(x: u64, n: u64, defectives: u64, lot: u64) -> Result<f64> {
    Ok(Hypergeometric::new(n, defectives, lot)?.pmf(x))
}

/// `P(X <= c)` for a sample of `n` drawn without replacement from a lot of
/// `lot` items containing `defectives` non-conforming ones.
pub fn hypergeometric_cdf(c: u64, n: u64, defectives: u64, lot: u64) -> Result<Probability> {
    if c > n {
        return Err(domain(format!("c={c} exceeds n={n}")));
    }
    Ok(Probability::clamped(
        Hypergeometric::new(n, defectives, lot)?.cdf(c),
    ))
}

/// Snap distance for treating `p * N` as an integer defective count.
const INTEGRAL_SNAP: f64 = 1e-9;

/// Acceptance probability of `plan` for a lot of `lot` items with a real,
/// possibly non-integer, number `p * lot` of non-conforming items.
///
/// The hypergeometric pmf is continued by replacing factorials with Gamma
/// functions in the two coefficients that involve `p * lot`. A coefficient
/// `C(a, x)` with `x >= a + 1` (at or past the first pole of `Γ(a - x + 1)`)
/// contributes zero. At integer `p * lot` this is exactly the hypergeometric
/// cdf.
pub fn interpolated_acceptance(plan: Plan, lot: u64, p: f64) -> Result<Probability> {
    plan.check_lot(LotSize::finite(lot)?)?;
    if !p.is_finite() {
        return Err(domain("p must be finite"));
    }
    let mut defectives = p * lot as f64;
    if defectives < 0.0 || defectives > lot as f64 {
        return Err(domain(format!("p*N={defectives} is outside [0, {lot}]")));
    }
    let nearest = defectives.round();
    if (defectives - nearest).abs() <= INTEGRAL_SNAP {
        defectives = nearest;
    }
    if defectives.fract() == 0.0 {
        return hypergeometric_cdf(plan.c(), plan.n(), defectives as u64, lot);
    }

    let good = lot as f64 - defectives;
    let ln_norm = ln_choose_int(lot, plan.n()).expect("n <= N");
    let acc: NeumaierSum = (0..=plan.c())
        .filter_map(|x| {
            let a = ln_choose_real(defectives, x)?;
            let b = ln_choose_real(good, plan.n() - x)?;
            Some((a + b - ln_norm).exp())
        })
        .sum();
    Ok(Probability::clamped(acc.value()))
}

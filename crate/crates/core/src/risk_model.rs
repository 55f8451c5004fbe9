//! Realized quality levels, producers'/consumers' risks, admissibility and
//! OC-curve data for a plan against a finite or infinite lot.

use std::fmt;
use std::io;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::prob_kernel::{binomial_cdf, hypergeometric_cdf, LotSize, Plan, Probability};

/// Largest power of ten usable as an exact decimal denominator.
const MAX_DECIMALS: usize = 18;

/// A proportion in `[0, 1]` kept both as `f64` and as the exact decimal
/// fraction it was written as, so that `⌊pN⌋` and `⌈pN⌉` are computed in
/// integer arithmetic (`0.07 * 700` is `49.00000000000001` in floating point).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "f64")]
pub struct Proportion {
    value: f64,
    numerator: u64,
    denominator: u64,
}

impl Proportion {
    /// Interprets `value` as its shortest round-trip decimal representation.
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(domain(format!("proportion {value} is outside [0, 1]")));
        }
        let text = format!("{value}");
        let (int_part, frac_part) = text.split_once('.').unwrap_or((text.as_str(), ""));
        if frac_part.len() > MAX_DECIMALS {
            return Err(domain(format!(
                "proportion {value} needs more than {MAX_DECIMALS} decimal digits"
            )));
        }
        let denominator = 10u64.pow(frac_part.len() as u32);
        let digits = format!("{int_part}{frac_part}");
        let numerator: u64 = digits
            .parse()
            .map_err(|_| domain(format!("bad proportion {value}")))?;
        Ok(Proportion {
            value,
            numerator,
            denominator,
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// `⌊p·N⌋`
    pub fn floor_count(&self, lot: u64) -> u64 {
        (self.numerator as u128 * lot as u128 / self.denominator as u128) as u64
    }

    /// `⌈p·N⌉`
    pub fn ceil_count(&self, lot: u64) -> u64 {
        (self.numerator as u128 * lot as u128).div_ceil(self.denominator as u128) as u64
    }

    /// `p·N` when it is an integer.
    pub fn exact_count(&self, lot: u64) -> Option<u64> {
        let scaled = self.numerator as u128 * lot as u128;
        scaled
            .is_multiple_of(self.denominator as u128)
            .then(|| (scaled / self.denominator as u128) as u64)
    }
}

impl From<Proportion> for f64 {
    fn from(p: Proportion) -> f64 {
        p.value
    }
}

impl FromStr for Proportion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| domain(format!("`{s}` is not a number")))?;
        Proportion::new(v)
    }
}

impl fmt::Display for Proportion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Nominal quality levels: acceptable quality and limit quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualitySpec {
    p_aql: Proportion,
    p_lq: Proportion,
}

impl QualitySpec {
    pub fn new(p_aql: f64, p_lq: f64) -> Result<Self> {
        Self::from_proportions(Proportion::new(p_aql)?, Proportion::new(p_lq)?)
    }

    pub fn from_proportions(p_aql: Proportion, p_lq: Proportion) -> Result<Self> {
        let (a, l) = (p_aql.value(), p_lq.value());
        if !(0.0 < a && a < l && l < 1.0) {
            return Err(domain(format!(
                "need 0 < p_aql < p_lq < 1, got {a} and {l}"
            )));
        }
        Ok(QualitySpec { p_aql, p_lq })
    }

    pub fn p_aql(&self) -> Proportion {
        self.p_aql
    }

    pub fn p_lq(&self) -> Proportion {
        self.p_lq
    }
}

impl Default for QualitySpec {
    fn default() -> Self {
        QualitySpec::new(0.01, 0.07).expect("valid defaults")
    }
}

/// Maximum tolerated producers' and consumers' risks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskBounds {
    alpha_max: f64,
    beta_max: f64,
}

impl RiskBounds {
    pub fn new(alpha_max: f64, beta_max: f64) -> Result<Self> {
        for (name, v) in [("alpha_max", alpha_max), ("beta_max", beta_max)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(domain(format!(
                    "{name}={v} must lie strictly between 0 and 1"
                )));
            }
        }
        Ok(RiskBounds {
            alpha_max,
            beta_max,
        })
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn beta_max(&self) -> f64 {
        self.beta_max
    }
}

impl Default for RiskBounds {
    fn default() -> Self {
        RiskBounds {
            alpha_max: 0.05,
            beta_max: 0.05,
        }
    }
}

/// A quality level: `k/N` non-conforming items in a finite lot, or a
/// nominal proportion for the binomial model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum QualityLevel {
    Realized { defectives: u64, lot: u64 },
    Nominal(f64),
}

impl QualityLevel {
    pub fn value(&self) -> f64 {
        match *self {
            QualityLevel::Realized { defectives, lot } => defectives as f64 / lot as f64,
            QualityLevel::Nominal(p) => p,
        }
    }

    /// `Pac(c; n, level)`
    pub fn acceptance(&self, plan: Plan) -> Result<Probability> {
        match *self {
            QualityLevel::Realized { defectives, lot } => {
                hypergeometric_cdf(plan.c(), plan.n(), defectives, lot)
            }
            QualityLevel::Nominal(p) => binomial_cdf(plan.c(), plan.n(), p),
        }
    }
}

/// Quality levels at which the risks are evaluated: the closest realizable
/// levels not above the AQL and not below the LQ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealizedLevels {
    pub p_alpha: QualityLevel,
    pub p_beta: QualityLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskPair {
    pub alpha: Probability,
    pub beta: Probability,
}

pub fn realized_quality_levels(lot: LotSize, spec: &QualitySpec) -> RealizedLevels {
    match lot {
        LotSize::Finite(n) => RealizedLevels {
            p_alpha: QualityLevel::Realized {
                defectives: spec.p_aql.floor_count(n),
                lot: n,
            },
            p_beta: QualityLevel::Realized {
                defectives: spec.p_lq.ceil_count(n),
                lot: n,
            },
        },
        LotSize::Infinite => RealizedLevels {
            p_alpha: QualityLevel::Nominal(spec.p_aql.value()),
            p_beta: QualityLevel::Nominal(spec.p_lq.value()),
        },
    }
}

/// `α = 1 − Pac(p_α)`
pub fn producers_risk(plan: Plan, lot: LotSize, spec: &QualitySpec) -> Result<Probability> {
    plan.check_lot(lot)?;
    let levels = realized_quality_levels(lot, spec);
    Ok(levels.p_alpha.acceptance(plan)?.complement())
}

/// `β = Pac(p_β)`
pub fn consumers_risk(plan: Plan, lot: LotSize, spec: &QualitySpec) -> Result<Probability> {
    plan.check_lot(lot)?;
    let levels = realized_quality_levels(lot, spec);
    levels.p_beta.acceptance(plan)
}

pub fn risks(plan: Plan, lot: LotSize, spec: &QualitySpec) -> Result<RiskPair> {
    Ok(RiskPair {
        alpha: producers_risk(plan, lot, spec)?,
        beta: consumers_risk(plan, lot, spec)?,
    })
}

impl RiskPair {
    pub fn within(&self, bounds: &RiskBounds) -> bool {
        self.alpha.value() <= bounds.alpha_max && self.beta.value() <= bounds.beta_max
    }
}

pub fn is_admissible(
    plan: Plan,
    lot: LotSize,
    spec: &QualitySpec,
    bounds: &RiskBounds,
) -> Result<bool> {
    Ok(risks(plan, lot, spec)?.within(bounds))
}

pub const DEFAULT_OC_POINTS: usize = 151;
pub const DEFAULT_OC_UPPER: f64 = 0.15;

/// `points` equally spaced levels on `[0, upper]`.
pub fn uniform_grid(points: usize, upper: f64) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let steps = (points - 1) as f64;
            (0..points).map(|i| i as f64 * upper / steps).collect()
        }
    }
}

/// One OC point. For finite lots `p = numerator / denominator`; for
/// infinite lots `denominator` is 0 and `numerator` is the grid index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OcPoint {
    pub numerator: u64,
    pub denominator: u64,
    pub p: f64,
    pub pac: Probability,
}

/// Acceptance probability against quality level.
///
/// Finite lots default to every realizable level `k/N`; a custom grid must
/// consist of realizable levels. Infinite lots default to 151 points on
/// `[0, 0.15]`.
pub fn oc_curve(plan: Plan, lot: LotSize, grid: Option<&[f64]>) -> Result<Vec<OcPoint>> {
    plan.check_lot(lot)?;
    if let Some(g) = grid {
        if let Some(bad) = g.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(domain(format!("grid value {bad} is outside [0, 1]")));
        }
    }
    match lot {
        LotSize::Finite(size) => {
            let counts: Vec<u64> = match grid {
                None => (0..=size).collect(),
                Some(g) => g
                    .iter()
                    .map(|&p| realizable_count(p, size))
                    .collect::<Result<_>>()?,
            };
            counts
                .into_iter()
                .map(|k| {
                    let pac = hypergeometric_cdf(plan.c(), plan.n(), k, size)?;
                    Ok(OcPoint {
                        numerator: k,
                        denominator: size,
                        p: k as f64 / size as f64,
                        pac,
                    })
                })
                .collect()
        }
        LotSize::Infinite => {
            let owned;
            let levels = match grid {
                Some(g) => g,
                None => {
                    owned = uniform_grid(DEFAULT_OC_POINTS, DEFAULT_OC_UPPER);
                    &owned[..]
                }
            };
            levels
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    let pac = binomial_cdf(plan.c(), plan.n(), p)?;
                    Ok(OcPoint {
                        numerator: i as u64,
                        denominator: 0,
                        p,
                        pac,
                    })
                })
                .collect()
        }
    }
}

/// Integer defective count `p·N`, tolerating floating-point noise.
pub(crate) fn realizable_count(p: f64, lot: u64) -> Result<u64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("quality level {p} is outside [0, 1]")));
    }
    let scaled = p * lot as f64;
    let k = scaled.round();
    if (scaled - k).abs() > 1e-9 * (1.0 + scaled) {
        return Err(domain(format!(
            "p*N = {scaled} is not an integer for N={lot}"
        )));
    }
    Ok(k as u64)
}

/// CSV with header `p_numerator,p_denominator_or_0_for_infinite,p_value,acceptance_probability`.
pub fn write_oc_csv<W: io::Write>(points: &[OcPoint], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "p_numerator",
        "p_denominator_or_0_for_infinite",
        "p_value",
        "acceptance_probability",
    ])?;
    for pt in points {
        w.write_record([
            pt.numerator.to_string(),
            pt.denominator.to_string(),
            format!("{:.6}", pt.p),
            format!("{:.6}", pt.pac.value()),
        ])?;
    }
    w.flush()
}

/// JSON array of `{p, pac}`.
pub fn oc_json(points: &[OcPoint]) -> serde_json::Value {
    serde_json::Value::Array(
        points
            .iter()
            .map(|pt| serde_json::json!({ "p": pt.p, "pac": pt.pac.value() }))
            .collect(),
    )
}

/// Fraction of `trials` simulated lots accepted by `plan` at quality `p`.
///
/// Finite lots: each trial draws `n` distinct items from a lot with exactly
/// `p·N` non-conforming ones. Infinite lots: `n` independent Bernoulli(p)
/// items. Deterministic for a fixed `seed`.
pub fn monte_carlo_acceptance(
    plan: Plan,
    lot: LotSize,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<Probability> {
    plan.check_lot(lot)?;
    if trials == 0 {
        return Err(domain("trials must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("quality level {p} is outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, c) = (plan.n(), plan.c());
    let mut accepted = 0u64;
    match lot {
        LotSize::Finite(size) => {
            let defectives = realizable_count(p, size)?;
            let size = usize::try_from(size).map_err(|_| domain("lot too large to simulate"))?;
            for _ in 0..trials {
                let found = index::sample(&mut rng, size, n as usize)
                    .into_iter()
                    .filter(|&i| (i as u64) < defectives)
                    .count() as u64;
                if found <= c {
                    accepted += 1;
                }
            }
        }
        LotSize::Infinite => {
            for _ in 0..trials {
                let mut found = 0u64;
                for _ in 0..n {
                    if rng.gen::<f64>() < p {
                        found += 1;
                        if found > c {
                            break;
                        }
                    }
                }
                if found <= c {
                    accepted += 1;
                }
            }
        }
    }
    Ok(Probability::clamped(accepted as f64 / trials as f64))
}

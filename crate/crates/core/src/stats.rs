//! Rank statistics and the geometric-specificity coefficient.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{MsiqError, Result};
use crate::transforms::DegradationKind;

/// Whether a metric improves by going down or up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricPolarity {
    LowerIsBetter,
    HigherIsBetter,
}

/// Threshold below which a JPEG increment is treated as zero.
pub const DIVISION_EPSILON: f64 = 1e-15;

/// Ranks starting at 1, ties sharing the average of their positions.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end (0-based) share rank mean(start+1 ..= end)
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with average ranks for ties.
///
/// NaN inputs are rejected; infinities rank as the extreme values.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(MsiqError::param(format!(
            "spearman needs equal lengths, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(MsiqError::param("spearman needs at least two observations"));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(MsiqError::param("spearman input contains NaN"));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
        .ok_or_else(|| MsiqError::UndefinedCorrelation("zero rank variance".into()))
}

/// Metric increment relative to the undegraded value; positive means "got worse".
pub fn delta_m(at_lambda: f64, at_zero: f64, polarity: MetricPolarity) -> Result<f64> {
    if !at_lambda.is_finite() || !at_zero.is_finite() {
        return Err(MsiqError::param(format!(
            "increment needs finite values, got {at_lambda} and {at_zero}"
        )));
    }
    Ok(match polarity {
        MetricPolarity::LowerIsBetter => at_lambda - at_zero,
        MetricPolarity::HigherIsBetter => at_zero - at_lambda,
    })
}

/// Outcome of a specificity ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Specificity {
    Value(f64),
    /// The JPEG increment was numerically zero.
    Unstable,
}

impl Specificity {
    pub fn value(self) -> Option<f64> {
        match self {
            Specificity::Value(v) => Some(v),
            Specificity::Unstable => None,
        }
    }
}

/// Mean geometric increment divided by the JPEG increment.
pub fn specificity_r(geom_deltas: &BTreeMap<DegradationKind, f64>, jpeg_delta: f64) -> Result<Specificity> {
    let mut sum = 0.0;
    for kind in DegradationKind::GEOMETRIC {
        sum += geom_deltas
            .get(&kind)
            .ok_or_else(|| MsiqError::param(format!("missing increment for {kind}")))?;
    }
    Ok(ratio(sum / DegradationKind::GEOMETRIC.len() as f64, jpeg_delta))
}

pub(crate) fn ratio(numerator: f64, jpeg_delta: f64) -> Specificity {
    if jpeg_delta.abs() < DIVISION_EPSILON || !jpeg_delta.is_finite() || !numerator.is_finite() {
        Specificity::Unstable
    } else {
        Specificity::Value(numerator / jpeg_delta)
    }
}

/// Spearman correlation between strength and metric, sign-flipped for
/// higher-is-better metrics so that +1 always means a correct monotone response.
pub fn signed_tracking(lambdas: &[f64], values: &[f64], polarity: MetricPolarity) -> Result<f64> {
    let rho = spearman(lambdas, values)?;
    Ok(match polarity {
        MetricPolarity::LowerIsBetter => rho,
        MetricPolarity::HigherIsBetter => -rho,
    })
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

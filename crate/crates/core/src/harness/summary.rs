//! Aggregates derived from records. Every function here is pure, so a report
//! loaded from JSON reproduces its own summary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::record::{ExperimentRecord, MetricName, RecordValue};
use crate::error::{MsiqError, Result};
use crate::stats::{delta_m, median, signed_tracking, specificity_r, spearman, Specificity};
use crate::transforms::{DegradationKind, ResizeMethod};

/// Count, mean, median and range of a sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Distribution {
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        Some(Distribution {
            count: xs.len(),
            mean: xs.iter().sum::<f64>() / xs.len() as f64,
            median: median(xs)?,
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolatorRow {
    pub interpolator: ResizeMethod,
    pub metric: MetricName,
    pub stats: Option<Distribution>,
}

/// Spread of PSNR/SSIM over return methods, grouped by scaling method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForcedResizeRow {
    pub interpolator: ResizeMethod,
    /// (image, scale) groups seen.
    pub groups: usize,
    /// Finite PSNR spread (max - min) per group with at least two finite values.
    pub psnr_spread: Option<Distribution>,
    pub ssim_spread: Option<Distribution>,
    pub inf_psnr: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exp1Summary {
    pub msiq: Vec<InterpolatorRow>,
    pub forced: Vec<ForcedResizeRow>,
    pub median_psnr_spread: Option<f64>,
    pub median_ssim_spread: Option<f64>,
    pub inf_psnr: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackingRow {
    pub metric: MetricName,
    /// Mean signed Spearman over geometric trajectories with a defined value.
    pub mean_rho: Option<f64>,
    pub trajectories: usize,
    pub undefined: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecificityRow {
    pub metric: MetricName,
    pub lambda: f64,
    /// Mean geometric increment over units divided by the mean JPEG increment.
    pub r: Option<f64>,
    /// Smallest per-kind mean increment divided by the mean JPEG increment.
    pub min_kind_r: Option<f64>,
    /// The mean JPEG increment was numerically zero.
    pub unstable: bool,
    pub mean_geometric_delta: Option<f64>,
    pub mean_jpeg_delta: Option<f64>,
    pub units: usize,
    /// Units where an increment could not be formed (e.g. infinite PSNR at the anchor).
    pub undefined: usize,
    /// Mean of the per-unit ratios, over units with a usable JPEG increment.
    pub unit_mean_r: Option<f64>,
    pub unit_unstable: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodDelta {
    pub method: String,
    pub mean_delta: f64,
}

/// Per-method mean increment for one degradation at one strength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub metric: MetricName,
    pub degradation: DegradationKind,
    pub lambda: f64,
    pub per_method: Vec<MethodDelta>,
    /// (max - min) / mean over the per-method values.
    pub relative_spread: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecificitySummary {
    pub tracking: Vec<TrackingRow>,
    pub specificity: Vec<SpecificityRow>,
    pub stability: Vec<StabilityRow>,
}

impl SpecificitySummary {
    pub fn tracking(&self, metric: MetricName) -> Option<&TrackingRow> {
        self.tracking.iter().find(|r| r.metric == metric)
    }

    pub fn specificity(&self, metric: MetricName, lambda: f64) -> Option<&SpecificityRow> {
        self.specificity
            .iter()
            .find(|r| r.metric == metric && (r.lambda - lambda).abs() < 1e-12)
    }
}

/// Descriptor statistics for one moment order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub order: usize,
    pub nan: bool,
    pub inf: bool,
    pub mean_abs_nu: f64,
    pub rho_psnr: Option<f64>,
    pub rho_ssim: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationSummary {
    pub rows: Vec<AblationRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Summary {
    Exp1(Exp1Summary),
    Specificity(SpecificitySummary),
    Ablation(AblationSummary),
}

pub fn summarize_exp1(records: &[ExperimentRecord]) -> Result<Exp1Summary> {
    let mut msiq: BTreeMap<(ResizeMethod, MetricName), Vec<f64>> = BTreeMap::new();
    // (scaling method, image, scale bits) -> metric -> values over return methods
    type GroupKey<'a> = (ResizeMethod, &'a str, u64);
    let mut forced: BTreeMap<GroupKey, BTreeMap<MetricName, Vec<RecordValue>>> = BTreeMap::new();
    for r in records {
        let scale = r
            .scale
            .ok_or_else(|| MsiqError::param("scale-invariance record without a scale"))?;
        match r.sr_method.split_once("->") {
            None => {
                let m: ResizeMethod = r.sr_method.parse()?;
                if let Some(v) = r.value.finite() {
                    msiq.entry((m, r.metric)).or_default().push(v);
                }
            }
            Some((scaling, _)) => {
                let m: ResizeMethod = scaling.parse()?;
                forced
                    .entry((m, r.image_id.as_str(), scale.to_bits()))
                    .or_default()
                    .entry(r.metric)
                    .or_default()
                    .push(r.value);
            }
        }
    }

    let msiq_rows = msiq
        .iter()
        .map(|(&(interpolator, metric), xs)| InterpolatorRow {
            interpolator,
            metric,
            stats: Distribution::of(xs),
        })
        .collect();

    let mut per_method: BTreeMap<ResizeMethod, (usize, Vec<f64>, Vec<f64>, usize)> = BTreeMap::new();
    for ((m, _, _), metrics) in &forced {
        let entry = per_method.entry(*m).or_default();
        entry.0 += 1;
        if let Some(vals) = metrics.get(&MetricName::Psnr) {
            entry.3 += vals.iter().filter(|v| **v == RecordValue::Inf).count();
            let finite: Vec<f64> = vals.iter().filter_map(|v| v.finite()).collect();
            if finite.len() >= 2 {
                entry.1.push(spread(&finite));
            }
        }
        if let Some(vals) = metrics.get(&MetricName::Ssim) {
            let finite: Vec<f64> = vals.iter().filter_map(|v| v.finite()).collect();
            if finite.len() >= 2 {
                entry.2.push(spread(&finite));
            }
        }
    }
    let mut all_psnr = Vec::new();
    let mut all_ssim = Vec::new();
    let mut inf_total = 0;
    let forced_rows = per_method
        .into_iter()
        .map(|(interpolator, (groups, ps, ss, inf))| {
            all_psnr.extend_from_slice(&ps);
            all_ssim.extend_from_slice(&ss);
            inf_total += inf;
            ForcedResizeRow {
                interpolator,
                groups,
                psnr_spread: Distribution::of(&ps),
                ssim_spread: Distribution::of(&ss),
                inf_psnr: inf,
            }
        })
        .collect();
    Ok(Exp1Summary {
        msiq: msiq_rows,
        forced: forced_rows,
        median_psnr_spread: median(&all_psnr),
        median_ssim_spread: median(&all_ssim),
        inf_psnr: inf_total,
    })
}

fn spread(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// (image, sr_method, scale): one independent trajectory family.
type UnitKey<'a> = (&'a str, &'a str, Option<u64>);
/// kind -> metric -> [(lambda, value)] in ascending lambda.
type UnitData = BTreeMap<DegradationKind, BTreeMap<MetricName, Vec<(f64, RecordValue)>>>;

fn group_units(records: &[ExperimentRecord]) -> Result<BTreeMap<UnitKey<'_>, UnitData>> {
    let mut units: BTreeMap<UnitKey, UnitData> = BTreeMap::new();
    for r in records {
        let kind: DegradationKind = r.degradation.parse()?;
        units
            .entry((r.image_id.as_str(), r.sr_method.as_str(), r.scale.map(f64::to_bits)))
            .or_default()
            .entry(kind)
            .or_default()
            .entry(r.metric)
            .or_default()
            .push((r.lambda, r.value));
    }
    for data in units.values_mut() {
        for metrics in data.values_mut() {
            for traj in metrics.values_mut() {
                traj.sort_by(|a, b| a.0.total_cmp(&b.0));
            }
        }
    }
    Ok(units)
}

fn value_at(traj: &[(f64, RecordValue)], lambda: f64) -> Option<RecordValue> {
    traj.iter().find(|(l, _)| *l == lambda).map(|(_, v)| *v)
}

fn increment(traj: &[(f64, RecordValue)], lambda: f64, metric: MetricName) -> Option<f64> {
    let at = value_at(traj, lambda)?.finite()?;
    let zero = value_at(traj, 0.0)?.finite()?;
    delta_m(at, zero, metric.polarity()).ok()
}

/// Tracking, specificity, and (when `with_stability`) per-method stability.
pub fn summarize_specificity(records: &[ExperimentRecord], with_stability: bool) -> Result<SpecificitySummary> {
    let units = group_units(records)?;
    let metrics: Vec<MetricName> = {
        let mut m: Vec<_> = records.iter().map(|r| r.metric).collect();
        m.sort();
        m.dedup();
        m
    };
    let mut lambdas: Vec<f64> = records.iter().map(|r| r.lambda).filter(|l| *l > 0.0).collect();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();

    let mut tracking = Vec::new();
    for &metric in &metrics {
        let mut rhos = Vec::new();
        let mut undefined = 0;
        for data in units.values() {
            for kind in DegradationKind::GEOMETRIC {
                let Some(traj) = data.get(&kind).and_then(|m| m.get(&metric)) else {
                    continue;
                };
                let values: Option<Vec<f64>> = traj.iter().map(|(_, v)| v.as_f64()).collect();
                let lams: Vec<f64> = traj.iter().map(|(l, _)| *l).collect();
                match values.map(|v| signed_tracking(&lams, &v, metric.polarity())) {
                    Some(Ok(rho)) => rhos.push(rho),
                    _ => undefined += 1,
                }
            }
        }
        tracking.push(TrackingRow {
            metric,
            mean_rho: crate::stats::mean(&rhos),
            trajectories: rhos.len() + undefined,
            undefined,
        });
    }

    let mut specificity = Vec::new();
    for &metric in &metrics {
        for &lambda in &lambdas {
            let mut rs = Vec::new();
            let (mut unit_unstable, mut undefined) = (0, 0);
            let mut geo_sums: BTreeMap<DegradationKind, f64> = BTreeMap::new();
            let (mut geo_means, mut jpeg_deltas) = (Vec::new(), Vec::new());
            for data in units.values() {
                let delta = |kind| {
                    data.get(&kind)
                        .and_then(|m| m.get(&metric))
                        .and_then(|t| increment(t, lambda, metric))
                };
                let geo: Option<BTreeMap<DegradationKind, f64>> = DegradationKind::GEOMETRIC
                    .into_iter()
                    .map(|k| delta(k).map(|d| (k, d)))
                    .collect();
                let jpeg = delta(DegradationKind::Jpeg);
                let (Some(geo), Some(jpeg)) = (geo, jpeg) else {
                    undefined += 1;
                    continue;
                };
                for (k, d) in &geo {
                    *geo_sums.entry(*k).or_default() += d;
                }
                geo_means.push(geo.values().sum::<f64>() / geo.len() as f64);
                jpeg_deltas.push(jpeg);
                match specificity_r(&geo, jpeg)? {
                    Specificity::Value(r) => rs.push(r),
                    Specificity::Unstable => unit_unstable += 1,
                }
            }
            let mean_jpeg = crate::stats::mean(&jpeg_deltas);
            let (pooled, min_kind_r) = match mean_jpeg {
                Some(j) => {
                    let n = jpeg_deltas.len() as f64;
                    let geo: BTreeMap<_, _> = geo_sums.into_iter().map(|(k, v)| (k, v / n)).collect();
                    let weakest = geo.values().copied().fold(f64::INFINITY, f64::min);
                    (Some(specificity_r(&geo, j)?), crate::stats::ratio(weakest, j).value())
                }
                None => (None, None),
            };
            specificity.push(SpecificityRow {
                metric,
                lambda,
                r: pooled.and_then(Specificity::value),
                min_kind_r,
                unstable: pooled == Some(Specificity::Unstable),
                mean_geometric_delta: crate::stats::mean(&geo_means),
                mean_jpeg_delta: mean_jpeg,
                units: units.len(),
                undefined,
                unit_mean_r: crate::stats::mean(&rs),
                unit_unstable,
            });
        }
    }

    let mut stability = Vec::new();
    if with_stability {
        for &metric in metrics.iter().filter(|m| m.is_msiq()) {
            for kind in DegradationKind::GEOMETRIC {
                for &lambda in &lambdas {
                    let mut by_method: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
                    for ((_, method, _), data) in &units {
                        if let Some(d) = data
                            .get(&kind)
                            .and_then(|m| m.get(&metric))
                            .and_then(|t| increment(t, lambda, metric))
                        {
                            by_method.entry(method).or_default().push(d);
                        }
                    }
                    let per_method: Vec<MethodDelta> = by_method
                        .into_iter()
                        .map(|(method, ds)| MethodDelta {
                            method: method.to_string(),
                            mean_delta: ds.iter().sum::<f64>() / ds.len() as f64,
                        })
                        .collect();
                    let means: Vec<f64> = per_method.iter().map(|m| m.mean_delta).collect();
                    let relative_spread = crate::stats::mean(&means)
                        .filter(|m| m.abs() > 0.0)
                        .map(|m| spread(&means) / m.abs());
                    stability.push(StabilityRow {
                        metric,
                        degradation: kind,
                        lambda,
                        per_method,
                        relative_spread,
                    });
                }
            }
        }
    }

    Ok(SpecificitySummary {
        tracking,
        specificity,
        stability,
    })
}

/// Recomputes the correlation columns of an ablation summary from records,
/// keeping the descriptor statistics (`nan`, `inf`, `mean_abs_nu`) of `stats`.
pub fn summarize_ablation(records: &[ExperimentRecord], stats: &[AblationRow]) -> Result<AblationSummary> {
    // (image, degradation, lambda bits) -> baselines; order -> same key -> msiq
    type PointKey<'a> = (&'a str, &'a str, u64);
    let mut baseline: BTreeMap<PointKey, BTreeMap<MetricName, RecordValue>> = BTreeMap::new();
    let mut by_order: BTreeMap<usize, BTreeMap<PointKey, RecordValue>> = BTreeMap::new();
    for r in records {
        let key = (r.image_id.as_str(), r.degradation.as_str(), r.lambda.to_bits());
        match r.sr_method.strip_prefix("order=") {
            Some(n) => {
                let n: usize = n
                    .parse()
                    .map_err(|_| MsiqError::param(format!("bad ablation method '{}'", r.sr_method)))?;
                by_order.entry(n).or_default().insert(key, r.value);
            }
            None => {
                baseline.entry(key).or_default().insert(r.metric, r.value);
            }
        }
    }
    let rho = |msiq: &BTreeMap<PointKey, RecordValue>, metric: MetricName| -> Option<f64> {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (key, v) in msiq {
            let (Some(x), Some(y)) = (
                baseline.get(key).and_then(|b| b.get(&metric)).and_then(|v| v.as_f64()),
                v.as_f64(),
            ) else {
                continue;
            };
            xs.push(x);
            ys.push(y);
        }
        spearman(&xs, &ys).ok()
    };
    let rows = stats
        .iter()
        .map(|s| {
            let msiq = by_order.get(&s.order);
            AblationRow {
                rho_psnr: msiq.and_then(|m| rho(m, MetricName::Psnr)),
                rho_ssim: msiq.and_then(|m| rho(m, MetricName::Ssim)),
                ..s.clone()
            }
        })
        .collect();
    Ok(AblationSummary { rows })
}

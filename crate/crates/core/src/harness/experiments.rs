use std::path::Path;

use rayon::prelude::*;

use super::record::{sort_records, ExperimentRecord, MetricName, RecordValue};
use super::summary::{summarize_ablation, summarize_exp1, summarize_specificity, AblationRow, Summary};
use super::{ConfigSnapshot, ExperimentKind, ExperimentReport, HarnessConfig};
use crate::baseline::{psnr, ssim};
use crate::error::{MsiqError, Result};
use crate::image::GrayImage;
use crate::moments::{descriptor, normalized_values, MomentDescriptor};
use crate::msiq::{msiq_rmse, msiq_weighted, MomentWeights};
use crate::testset::{load_directory, NamedImage};
use crate::transforms::{degrade_with, resize, resize_to, DegradationKind, DegradationSpec, ResizeMethod};

/// Interpolators standing in for super-resolution models.
pub const CLASSICAL_SR_METHODS: [ResizeMethod; 4] = [
    ResizeMethod::Nearest,
    ResizeMethod::Bilinear,
    ResizeMethod::Bicubic,
    ResizeMethod::Lanczos4,
];

const NONE: &str = "none";

fn require_images(images: &[NamedImage]) -> Result<()> {
    if images.is_empty() {
        return Err(MsiqError::param("experiment needs at least one image"));
    }
    Ok(())
}

fn run_units<U, F>(cfg: &HarnessConfig, units: &[U], work: F) -> Result<Vec<ExperimentRecord>>
where
    U: Sync,
    F: Fn(&U) -> Result<Vec<ExperimentRecord>> + Sync + Send,
{
    let pool = cfg.pool()?;
    let chunks = pool.install(|| units.par_iter().map(&work).collect::<Result<Vec<_>>>())?;
    let mut records: Vec<ExperimentRecord> = chunks.into_iter().flatten().collect();
    sort_records(&mut records);
    Ok(records)
}

/// Scores test images against one reference.
struct Scorer<'a> {
    cfg: &'a HarnessConfig,
    reference: &'a GrayImage,
    descriptor: MomentDescriptor,
    weights: MomentWeights,
}

impl<'a> Scorer<'a> {
    fn new(cfg: &'a HarnessConfig, reference: &'a GrayImage) -> Result<Self> {
        Ok(Scorer {
            cfg,
            reference,
            descriptor: descriptor(reference, cfg.order, cfg.scheme)?,
            weights: MomentWeights::InverseOrder,
        })
    }

    /// MSIQ variants only; sizes may differ.
    fn msiq(&self, test: &GrayImage) -> Result<Vec<(MetricName, RecordValue)>> {
        let d = descriptor(test, self.cfg.order, self.cfg.scheme)?;
        let mut out = Vec::new();
        for metric in self.cfg.metrics() {
            let v = match metric {
                MetricName::MsiqRmse => msiq_rmse(&self.descriptor, &d)?,
                MetricName::MsiqW => msiq_weighted(&self.descriptor, &d, &self.weights)?,
                _ => continue,
            };
            out.push((metric, RecordValue::from_f64(v)));
        }
        Ok(out)
    }

    /// PSNR and SSIM on a same-size test image.
    fn pixel(&self, test: &GrayImage) -> Result<Vec<(MetricName, RecordValue)>> {
        Ok(vec![
            (MetricName::Psnr, psnr(self.reference, test)?.into()),
            (MetricName::Ssim, RecordValue::from_f64(ssim(self.reference, test)?)),
        ])
    }

    fn all(&self, test: &GrayImage) -> Result<Vec<(MetricName, RecordValue)>> {
        let mut v = self.pixel(test)?;
        v.extend(self.msiq(test)?);
        Ok(v)
    }
}

struct RowTemplate<'a> {
    image_id: &'a str,
    sr_method: String,
    scale: Option<f64>,
    degradation: &'a str,
    lambda: f64,
}

impl RowTemplate<'_> {
    fn rows(&self, values: Vec<(MetricName, RecordValue)>) -> impl Iterator<Item = ExperimentRecord> + '_ {
        values.into_iter().map(move |(metric, value)| ExperimentRecord {
            image_id: self.image_id.to_string(),
            sr_method: self.sr_method.clone(),
            scale: self.scale,
            degradation: self.degradation.to_string(),
            lambda: self.lambda,
            metric,
            value,
        })
    }
}

/// Scale invariance of MSIQ at native sizes, and PSNR/SSIM after forcing each
/// scaled copy back to the original grid with every return method.
pub fn run_exp1(images: &[NamedImage], cfg: &HarnessConfig) -> Result<ExperimentReport> {
    require_images(images)?;
    cfg.validate()?;
    let scorers = images
        .iter()
        .map(|im| Scorer::new(cfg, &im.image))
        .collect::<Result<Vec<_>>>()?;
    let mut units = Vec::new();
    for i in 0..images.len() {
        for &m in &cfg.interpolators {
            for &s in &cfg.scales {
                units.push((i, m, s));
            }
        }
    }
    let records = run_units(cfg, &units, |&(i, method, s)| {
        let (img, scorer) = (&images[i], &scorers[i]);
        let scaled = resize(&img.image, s, method)?;
        let mut out: Vec<ExperimentRecord> = RowTemplate {
            image_id: &img.id,
            sr_method: method.name().into(),
            scale: Some(s),
            degradation: NONE,
            lambda: 0.0,
        }
        .rows(scorer.msiq(&scaled)?)
        .collect();
        let (h, w) = img.image.dims();
        for &back in &cfg.return_methods {
            let returned = resize_to(&scaled, h, w, back)?;
            let t = RowTemplate {
                image_id: &img.id,
                sr_method: format!("{method}->{back}"),
                scale: Some(s),
                degradation: NONE,
                lambda: 0.0,
            };
            out.extend(t.rows(scorer.pixel(&returned)?));
        }
        Ok(out)
    })?;
    let summary = Summary::Exp1(summarize_exp1(&records)?);
    Ok(ExperimentReport {
        config: ConfigSnapshot::new(ExperimentKind::Exp1, cfg),
        records,
        summary,
    })
}

/// All four metrics along every degradation trajectory of every image.
pub fn run_exp2(images: &[NamedImage], cfg: &HarnessConfig) -> Result<ExperimentReport> {
    require_images(images)?;
    cfg.validate()?;
    let grid = cfg.lambda_grid();
    let scorers = images
        .iter()
        .map(|im| Scorer::new(cfg, &im.image))
        .collect::<Result<Vec<_>>>()?;
    let units: Vec<(usize, DegradationKind)> = (0..images.len())
        .flat_map(|i| DegradationKind::ALL.into_iter().map(move |k| (i, k)))
        .collect();
    let records = run_units(cfg, &units, |&(i, kind)| {
        let img = &images[i];
        let mut out = Vec::new();
        for &lambda in &grid {
            let degraded = degrade_with(&img.image, DegradationSpec::new(kind, lambda)?, &cfg.degrade)?;
            let t = RowTemplate {
                image_id: &img.id,
                sr_method: NONE.into(),
                scale: None,
                degradation: kind.name(),
                lambda,
            };
            out.extend(t.rows(scorers[i].all(&degraded)?));
        }
        Ok(out)
    })?;
    let summary = Summary::Specificity(summarize_specificity(&records, false)?);
    Ok(ExperimentReport {
        config: ConfigSnapshot::new(ExperimentKind::Exp2, cfg),
        records,
        summary,
    })
}

/// Downsample by bicubic, upsample with each interpolator, degrade, and
/// score against the ground truth.
pub fn run_controlled_sr(images: &[NamedImage], cfg: &HarnessConfig) -> Result<ExperimentReport> {
    controlled(images, cfg, ExperimentKind::Controlled)
}

/// [`run_controlled_sr`] over every image in a directory.
pub fn run_benchmark_dir(dir: impl AsRef<Path>, cfg: &HarnessConfig) -> Result<ExperimentReport> {
    let images = load_directory(dir)?;
    controlled(&images, cfg, ExperimentKind::Benchmark)
}

fn controlled(images: &[NamedImage], cfg: &HarnessConfig, kind: ExperimentKind) -> Result<ExperimentReport> {
    require_images(images)?;
    cfg.validate()?;
    if cfg.sr_methods.is_empty() || cfg.sr_scales.is_empty() {
        return Err(MsiqError::param("controlled run needs super-resolution methods and scales"));
    }
    let grid = cfg.lambda_grid();
    let scorers = images
        .iter()
        .map(|im| Scorer::new(cfg, &im.image))
        .collect::<Result<Vec<_>>>()?;
    let mut units = Vec::new();
    for i in 0..images.len() {
        for &m in &cfg.sr_methods {
            for &s in &cfg.sr_scales {
                units.push((i, m, s));
            }
        }
    }
    let records = run_units(cfg, &units, |&(i, method, s)| {
        let img = &images[i];
        let (h, w) = img.image.dims();
        let lr_h = ((h as f64 / s).round() as usize).max(1);
        let lr_w = ((w as f64 / s).round() as usize).max(1);
        let low = resize_to(&img.image, lr_h, lr_w, ResizeMethod::Bicubic)?;
        let sr = resize_to(&low, h, w, method)?;
        let mut out = Vec::new();
        for kind in DegradationKind::ALL {
            for &lambda in &grid {
                let degraded = degrade_with(&sr, DegradationSpec::new(kind, lambda)?, &cfg.degrade)?;
                let t = RowTemplate {
                    image_id: &img.id,
                    sr_method: method.name().into(),
                    scale: Some(s),
                    degradation: kind.name(),
                    lambda,
                };
                out.extend(t.rows(scorers[i].all(&degraded)?));
            }
        }
        Ok(out)
    })?;
    let summary = Summary::Specificity(summarize_specificity(&records, true)?);
    Ok(ExperimentReport {
        config: ConfigSnapshot::new(kind, cfg),
        records,
        summary,
    })
}

/// Moment-order ablation over the degradation grid.
///
/// PSNR/SSIM rows carry `sr_method = "none"`; MSIQ_RMSE rows carry
/// `sr_method = "order=N"`. Descriptor statistics live in the summary only.
pub fn run_ablation(images: &[NamedImage], cfg: &HarnessConfig) -> Result<ExperimentReport> {
    require_images(images)?;
    cfg.validate()?;
    if cfg.ablation_orders.is_empty() {
        return Err(MsiqError::param("ablation needs at least one order"));
    }
    let grid = cfg.lambda_grid();
    let orders = &cfg.ablation_orders;
    let references: Vec<Vec<Vec<f64>>> = images
        .iter()
        .map(|im| {
            orders
                .iter()
                .map(|&n| normalized_values(&im.image, n, cfg.scheme))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let units: Vec<(usize, DegradationKind)> = (0..images.len())
        .flat_map(|i| DegradationKind::ALL.into_iter().map(move |k| (i, k)))
        .collect();

    // per unit: records plus, per order, whether any degraded descriptor was non-finite
    let pool = cfg.pool()?;
    let results = pool.install(|| {
        units
            .par_iter()
            .map(|&(i, kind)| -> Result<(Vec<ExperimentRecord>, Vec<(bool, bool)>)> {
                let img = &images[i];
                let mut out = Vec::new();
                let mut flags = vec![(false, false); orders.len()];
                for &lambda in &grid {
                    let degraded = degrade_with(&img.image, DegradationSpec::new(kind, lambda)?, &cfg.degrade)?;
                    let base = RowTemplate {
                        image_id: &img.id,
                        sr_method: NONE.into(),
                        scale: None,
                        degradation: kind.name(),
                        lambda,
                    };
                    let pixel = vec![
                        (MetricName::Psnr, psnr(&img.image, &degraded)?.into()),
                        (MetricName::Ssim, RecordValue::from_f64(ssim(&img.image, &degraded)?)),
                    ];
                    out.extend(base.rows(pixel));
                    for (j, &n) in orders.iter().enumerate() {
                        let values = normalized_values(&degraded, n, cfg.scheme)?;
                        flags[j].0 |= values.iter().any(|v| v.is_nan());
                        flags[j].1 |= values.iter().any(|v| v.is_infinite());
                        let reference = &references[i][j];
                        let sum: f64 = reference.iter().zip(&values).map(|(a, b)| (a - b) * (a - b)).sum();
                        let rmse = (sum / values.len() as f64).sqrt();
                        let t = RowTemplate {
                            sr_method: format!("order={n}"),
                            ..base
                        };
                        out.extend(t.rows(vec![(MetricName::MsiqRmse, RecordValue::from_f64(rmse))]));
                    }
                }
                Ok((out, flags))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut records = Vec::new();
    let mut flags = vec![(false, false); orders.len()];
    for (recs, f) in results {
        records.extend(recs);
        for (acc, x) in flags.iter_mut().zip(f) {
            acc.0 |= x.0;
            acc.1 |= x.1;
        }
    }
    sort_records(&mut records);

    let stats: Vec<AblationRow> = orders
        .iter()
        .enumerate()
        .map(|(j, &order)| {
            let all: Vec<f64> = references.iter().flat_map(|r| r[j].iter().copied()).collect();
            let nan = flags[j].0 || all.iter().any(|v| v.is_nan());
            let inf = flags[j].1 || all.iter().any(|v| v.is_infinite());
            AblationRow {
                order,
                nan,
                inf,
                mean_abs_nu: all.iter().map(|v| v.abs()).sum::<f64>() / all.len() as f64,
                rho_psnr: None,
                rho_ssim: None,
            }
        })
        .collect();
    let summary = Summary::Ablation(summarize_ablation(&records, &stats)?);
    Ok(ExperimentReport {
        config: ConfigSnapshot::new(ExperimentKind::Ablation, cfg),
        records,
        summary,
    })
}

//! Experiment runners and their reports.
//!
//! Every runner returns an [`ExperimentReport`]: canonical-ordered records, a
//! summary that is a pure function of those records, and a snapshot of the
//! configuration. Work is split into independent units and may run on any
//! number of threads; the output does not depend on the thread count.

mod experiments;
mod record;
mod render;
mod sanity;
mod summary;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MsiqError, Result};
use crate::moments::MomentScheme;
use crate::msiq::VariantChoice;
use crate::transforms::{DegradeConfig, ResizeMethod};

pub use experiments::{
    run_ablation, run_benchmark_dir, run_controlled_sr, run_exp1, run_exp2, CLASSICAL_SR_METHODS,
};
pub use record::{format_sig, write_records_csv, ExperimentRecord, MetricName, RecordValue, CSV_HEADER};
pub use sanity::{verify_sanity, SanityCheck, SanityReport};
pub use summary::{
    summarize_ablation, summarize_exp1, summarize_specificity, AblationRow, AblationSummary, Distribution,
    Exp1Summary, ForcedResizeRow, InterpolatorRow, MethodDelta, SpecificityRow, SpecificitySummary, StabilityRow,
    Summary, TrackingRow,
};

pub const DEFAULT_LAMBDAS: [f64; 5] = [0.0, 0.05, 0.10, 0.15, 0.20];
pub const DEFAULT_SCALES: [f64; 5] = [0.5, 0.75, 1.5, 2.0, 3.0];
pub const DEFAULT_SR_SCALES: [f64; 3] = [2.0, 3.0, 4.0];

/// Parameters shared by all experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub order: usize,
    pub scheme: MomentScheme,
    pub variants: VariantChoice,
    pub lambdas: Vec<f64>,
    /// Scale factors of the scale-invariance run.
    pub scales: Vec<f64>,
    pub interpolators: Vec<ResizeMethod>,
    /// Methods used to force a scaled copy back to the original grid.
    pub return_methods: Vec<ResizeMethod>,
    pub sr_methods: Vec<ResizeMethod>,
    pub sr_scales: Vec<f64>,
    pub ablation_orders: Vec<usize>,
    pub degrade: DegradeConfig,
    /// Worker threads; 0 uses every core. Not part of the report.
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            order: 4,
            scheme: MomentScheme::RawGrid,
            variants: VariantChoice::Both,
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            scales: DEFAULT_SCALES.to_vec(),
            interpolators: ResizeMethod::ALL.to_vec(),
            return_methods: ResizeMethod::RETURN_METHODS.to_vec(),
            sr_methods: CLASSICAL_SR_METHODS.to_vec(),
            sr_scales: DEFAULT_SR_SCALES.to_vec(),
            ablation_orders: (3..=12).collect(),
            degrade: DegradeConfig::default(),
            jobs: 0,
        }
    }
}

impl HarnessConfig {
    /// Metrics reported, honoring the MSIQ variant selection.
    pub fn metrics(&self) -> Vec<MetricName> {
        let mut m = vec![MetricName::Psnr, MetricName::Ssim];
        if matches!(self.variants, VariantChoice::Rmse | VariantChoice::Both) {
            m.push(MetricName::MsiqRmse);
        }
        if matches!(self.variants, VariantChoice::Weighted | VariantChoice::Both) {
            m.push(MetricName::MsiqW);
        }
        m
    }

    /// Sorted strength grid, always anchored at zero.
    pub fn lambda_grid(&self) -> Vec<f64> {
        let mut grid = self.lambdas.clone();
        grid.push(0.0);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(MsiqError::param(format!("order must be >= 2, got {}", self.order)));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(0.0..1.0).contains(*l)) {
            return Err(MsiqError::param(format!("lambda must lie in [0, 1), got {l}")));
        }
        if let Some(s) = self
            .scales
            .iter()
            .chain(&self.sr_scales)
            .find(|s| !(s.is_finite() && **s > 0.0))
        {
            return Err(MsiqError::param(format!("scale must be positive, got {s}")));
        }
        if let Some(n) = self.ablation_orders.iter().find(|n| **n < 2) {
            return Err(MsiqError::param(format!("ablation order must be >= 2, got {n}")));
        }
        Ok(())
    }

    pub(crate) fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| MsiqError::param(format!("cannot start worker pool: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Exp1,
    Exp2,
    Controlled,
    Benchmark,
    Ablation,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Exp1 => "exp1",
            ExperimentKind::Exp2 => "exp2",
            ExperimentKind::Controlled => "controlled",
            ExperimentKind::Benchmark => "benchmark",
            ExperimentKind::Ablation => "ablation",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = MsiqError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp1" => Ok(ExperimentKind::Exp1),
            "exp2" => Ok(ExperimentKind::Exp2),
            "controlled" => Ok(ExperimentKind::Controlled),
            "benchmark" => Ok(ExperimentKind::Benchmark),
            "ablation" => Ok(ExperimentKind::Ablation),
            other => Err(MsiqError::param(format!("unknown experiment '{other}'"))),
        }
    }
}

/// Self-describing record of how a report was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub experiment: ExperimentKind,
    #[serde(flatten)]
    pub settings: HarnessConfig,
    pub weights: String,
    pub rotation: String,
    pub border: String,
    pub jpeg_quality: String,
    pub notes: Vec<String>,
}

impl ConfigSnapshot {
    pub fn new(experiment: ExperimentKind, settings: &HarnessConfig) -> Self {
        let mut notes = vec![
            "R_M is the mean geometric increment over units divided by the mean JPEG increment; \
             a unit is an image (image, method and scale for super-resolution runs); \
             per-unit ratios are reported alongside, with unstable units counted and excluded"
                .to_string(),
            "tracking is the mean signed Spearman rho over geometric trajectories".to_string(),
        ];
        if matches!(experiment, ExperimentKind::Controlled | ExperimentKind::Benchmark) {
            notes.push(
                "the super-resolution stage uses classical interpolators in place of learned models; \
                 stability is checked across interpolators only"
                    .to_string(),
            );
        }
        ConfigSnapshot {
            experiment,
            settings: settings.clone(),
            weights: "w_pq = 1/(1+p+q)".into(),
            rotation: format!(
                "theta = {} rad per unit lambda",
                settings.degrade.rotation_radians_per_lambda
            ),
            border: format!(
                "warps fill with {}; resizing replicates edge pixels",
                settings.degrade.border_fill
            ),
            jpeg_quality: "q = max(1, round(100 - 80 lambda)), 8-bit grayscale baseline".into(),
            notes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ConfigSnapshot,
    pub records: Vec<ExperimentRecord>,
    pub summary: Summary,
}

impl ExperimentReport {
    /// Recomputes the summary from the records alone.
    pub fn recompute_summary(&self) -> Result<Summary> {
        Ok(match (&self.config.experiment, &self.summary) {
            (ExperimentKind::Exp1, _) => Summary::Exp1(summarize_exp1(&self.records)?),
            (ExperimentKind::Exp2, _) => Summary::Specificity(summarize_specificity(&self.records, false)?),
            (ExperimentKind::Controlled | ExperimentKind::Benchmark, _) => {
                Summary::Specificity(summarize_specificity(&self.records, true)?)
            }
            (ExperimentKind::Ablation, Summary::Ablation(a)) => {
                Summary::Ablation(summarize_ablation(&self.records, &a.rows)?)
            }
            (ExperimentKind::Ablation, _) => {
                return Err(MsiqError::param("ablation report without ablation summary"))
            }
        })
    }

    pub fn specificity(&self) -> Option<&SpecificitySummary> {
        match &self.summary {
            Summary::Specificity(s) => Some(s),
            _ => None,
        }
    }

    pub fn exp1(&self) -> Option<&Exp1Summary> {
        match &self.summary {
            Summary::Exp1(s) => Some(s),
            _ => None,
        }
    }

    pub fn ablation(&self) -> Option<&AblationSummary> {
        match &self.summary {
            Summary::Ablation(s) => Some(s),
            _ => None,
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        write_records_csv(&self.records, &mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| MsiqError::param(format!("bad report JSON: {e}")))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_csv_string().as_bytes())
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json().as_bytes())
    }

    /// Human-readable summary tables.
    pub fn render(&self) -> String {
        render::render_report(self)
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| MsiqError::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes)
        .and_then(|_| w.flush())
        .map_err(|e| MsiqError::io(path, e))
}

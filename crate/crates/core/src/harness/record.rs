use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::baseline::PsnrValue;
use crate::error::{MsiqError, Result};
use crate::stats::MetricPolarity;

/// Metric column of a record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Psnr,
    Ssim,
    MsiqRmse,
    MsiqW,
}

impl MetricName {
    pub const ALL: [MetricName; 4] = [MetricName::Psnr, MetricName::Ssim, MetricName::MsiqRmse, MetricName::MsiqW];

    pub fn name(self) -> &'static str {
        match self {
            MetricName::Psnr => "psnr",
            MetricName::Ssim => "ssim",
            MetricName::MsiqRmse => "msiq_rmse",
            MetricName::MsiqW => "msiq_w",
        }
    }

    pub fn polarity(self) -> MetricPolarity {
        match self {
            MetricName::Psnr | MetricName::Ssim => MetricPolarity::HigherIsBetter,
            MetricName::MsiqRmse | MetricName::MsiqW => MetricPolarity::LowerIsBetter,
        }
    }

    pub fn is_msiq(self) -> bool {
        matches!(self, MetricName::MsiqRmse | MetricName::MsiqW)
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricName {
    type Err = MsiqError;

    fn from_str(s: &str) -> Result<Self> {
        MetricName::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| MsiqError::param(format!("unknown metric '{s}'")))
    }
}

/// A metric value; infinity is only produced by PSNR.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RecordValue {
    Finite(f64),
    Inf,
    Undefined,
}

impl RecordValue {
    pub fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            RecordValue::Finite(v)
        } else if v == f64::INFINITY {
            RecordValue::Inf
        } else {
            RecordValue::Undefined
        }
    }

    /// Numeric view: `Inf` is `+inf`, `Undefined` is `None`.
    pub fn as_f64(self) -> Option<f64> {
        match self {
            RecordValue::Finite(v) => Some(v),
            RecordValue::Inf => Some(f64::INFINITY),
            RecordValue::Undefined => None,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            RecordValue::Finite(v) => Some(v),
            _ => None,
        }
    }

    fn csv_field(self) -> String {
        match self {
            RecordValue::Finite(v) => format_sig(v),
            RecordValue::Inf => "inf".into(),
            RecordValue::Undefined => "undefined".into(),
        }
    }
}

impl From<PsnrValue> for RecordValue {
    fn from(v: PsnrValue) -> Self {
        match v {
            PsnrValue::Finite(db) => RecordValue::from_f64(db),
            PsnrValue::Infinite => RecordValue::Inf,
        }
    }
}

impl Serialize for RecordValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RecordValue::Finite(v) => s.serialize_f64(*v),
            RecordValue::Inf => s.serialize_str("inf"),
            RecordValue::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for RecordValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(RecordValue::from_f64(v)),
            Raw::Text(t) if t == "inf" => Ok(RecordValue::Inf),
            Raw::Text(t) if t == "undefined" => Ok(RecordValue::Undefined),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad metric value '{t}'"))),
        }
    }
}

/// One metric evaluation; the row type of every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub image_id: String,
    /// Interpolator name, `"scaling->return"` pair, `"order=N"`, or `"none"`.
    pub sr_method: String,
    pub scale: Option<f64>,
    /// Degradation kind name or `"none"`.
    pub degradation: String,
    pub lambda: f64,
    pub metric: MetricName,
    pub value: RecordValue,
}

impl ExperimentRecord {
    pub(crate) fn canonical_cmp(&self, other: &Self) -> Ordering {
        let scale = |s: Option<f64>| s.unwrap_or(f64::NEG_INFINITY);
        self.image_id
            .cmp(&other.image_id)
            .then_with(|| self.sr_method.cmp(&other.sr_method))
            .then_with(|| scale(self.scale).total_cmp(&scale(other.scale)))
            .then_with(|| self.degradation.cmp(&other.degradation))
            .then_with(|| self.lambda.total_cmp(&other.lambda))
            .then_with(|| self.metric.cmp(&other.metric))
    }
}

pub(crate) fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by(ExperimentRecord::canonical_cmp);
}

pub const CSV_HEADER: [&str; 7] = ["image_id", "sr_method", "scale", "degradation", "lambda", "metric", "value"];

/// Writes records as CSV with 9 significant digits.
pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| MsiqError::param(format!("CSV write failed: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        let scale = r.scale.map(format_sig).unwrap_or_default();
        w.write_record([
            r.image_id.as_str(),
            r.sr_method.as_str(),
            scale.as_str(),
            r.degradation.as_str(),
            format_sig(r.lambda).as_str(),
            r.metric.name(),
            r.value.csv_field().as_str(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| MsiqError::param(format!("CSV write failed: {e}")))
}

/// Formats like C's `%.9g`.
pub fn format_sig(v: f64) -> String {
    const DIGITS: i32 = 9;
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // round first so that e.g. 9.9999999996 picks the exponent of 10
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_fraction(format!("{v:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_fraction(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_fraction(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

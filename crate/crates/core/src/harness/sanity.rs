use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::record::format_sig;
use crate::error::{MsiqError, Result};
use crate::moments::{centroid, descriptor, normalized_moment, raw_moment, MomentScheme};
use crate::msiq::msiq_rmse;
use crate::testset::NamedImage;

const NU00_TOL: f64 = 1e-12;
const NU1_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-12;

/// Outcome of one identity check on one image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SanityCheck {
    pub image_id: String,
    /// `nu00`, `nu10`, `nu01`, `msiq_identity`, or `degenerate`.
    pub check: String,
    /// Deviation from the ideal value, when one could be computed.
    pub deviation: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SanityReport {
    pub order: usize,
    pub scheme: MomentScheme,
    pub checks: Vec<SanityCheck>,
}

impl SanityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SanityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["image_id", "check", "deviation", "tolerance", "passed"])
            .expect("in-memory CSV");
        for c in &self.checks {
            w.write_record([
                c.image_id.as_str(),
                c.check.as_str(),
                c.deviation.map(format_sig).unwrap_or_default().as_str(),
                format_sig(c.tolerance).as_str(),
                if c.passed { "true" } else { "false" },
            ])
            .expect("in-memory CSV");
        }
        String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV output is UTF-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<16} {:<14} {:>12} {:>10}  result", "image", "check", "deviation", "tolerance");
        for c in &self.checks {
            let dev = c.deviation.map(|d| format!("{d:.3e}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{:<16} {:<14} {:>12} {:>10.0e}  {}{}",
                c.image_id,
                c.check,
                dev,
                c.tolerance,
                if c.passed { "pass" } else { "FAIL" },
                c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
            );
        }
        let failed = self.failures().count();
        let _ = writeln!(s, "{} checks, {} failed", self.checks.len(), failed);
        s
    }
}

fn check(image_id: &str, name: &str, deviation: f64, tolerance: f64) -> SanityCheck {
    SanityCheck {
        image_id: image_id.to_string(),
        check: name.to_string(),
        deviation: Some(deviation),
        tolerance,
        passed: deviation <= tolerance,
        detail: None,
    }
}

fn checks_for(img: &NamedImage, order: usize, scheme: MomentScheme) -> Result<Vec<SanityCheck>> {
    let im = &img.image;
    let (xbar, ybar) = centroid(im, scheme)?;
    let m00 = raw_moment(im, 0, 0, scheme);
    let norm = m00.powf(1.5);
    let nu00 = normalized_moment(im, 0, 0, scheme)?;
    // first-order central moments formed from raw sums, not assumed zero
    let nu10 = (raw_moment(im, 1, 0, scheme) - xbar * m00) / norm;
    let nu01 = (raw_moment(im, 0, 1, scheme) - ybar * m00) / norm;
    let a = descriptor(im, order, scheme)?;
    let b = descriptor(&im.clone(), order, scheme)?;
    Ok(vec![
        check(&img.id, "nu00", (nu00 - 1.0).abs(), NU00_TOL),
        check(&img.id, "nu10", nu10.abs(), NU1_TOL),
        check(&img.id, "nu01", nu01.abs(), NU1_TOL),
        check(&img.id, "msiq_identity", msiq_rmse(&a, &b)?, IDENTITY_TOL),
    ])
}

/// Moment identities and MSIQ(I, I) = 0 for every image. Degenerate images
/// become a failed `degenerate` check rather than an error.
pub fn verify_sanity(images: &[NamedImage], order: usize, scheme: MomentScheme) -> Result<SanityReport> {
    if images.is_empty() {
        return Err(MsiqError::param("sanity check needs at least one image"));
    }
    if order < 2 {
        return Err(MsiqError::param(format!("order must be >= 2, got {order}")));
    }
    let mut checks = Vec::new();
    for img in images {
        match checks_for(img, order, scheme) {
            Ok(c) => checks.extend(c),
            Err(e @ MsiqError::DegenerateImage { .. }) => checks.push(SanityCheck {
                image_id: img.id.clone(),
                check: "degenerate".into(),
                deviation: None,
                tolerance: 0.0,
                passed: false,
                detail: Some(e.to_string()),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(SanityReport { order, scheme, checks })
}

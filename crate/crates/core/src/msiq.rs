//! Distances between moment descriptors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MsiqError, Result};
use crate::image::GrayImage;
use crate::moments::{descriptor, MomentDescriptor, MomentScheme};

/// Per-moment weights for the weighted distance, keyed by `(p, q)`.
#[derive(Clone, Debug, PartialEq)]
pub enum MomentWeights {
    /// `w_pq = 1 / (1 + p + q)`.
    InverseOrder,
    Table(BTreeMap<(usize, usize), f64>),
}

impl Default for MomentWeights {
    fn default() -> Self {
        MomentWeights::InverseOrder
    }
}

impl MomentWeights {
    pub fn table(weights: BTreeMap<(usize, usize), f64>) -> Result<Self> {
        if let Some((k, w)) = weights.iter().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(MsiqError::param(format!("weight for {k:?} must be positive, got {w}")));
        }
        Ok(MomentWeights::Table(weights))
    }

    pub fn weight(&self, p: usize, q: usize) -> Option<f64> {
        match self {
            MomentWeights::InverseOrder => Some(1.0 / (1 + p + q) as f64),
            MomentWeights::Table(t) => t.get(&(p, q)).copied(),
        }
    }
}

/// Which MSIQ distance to compute.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum MsiqVariant {
    #[default]
    Rmse,
    Weighted(MomentWeights),
}

impl MsiqVariant {
    pub fn weighted() -> Self {
        MsiqVariant::Weighted(MomentWeights::InverseOrder)
    }

    pub fn name(&self) -> &'static str {
        match self {
            MsiqVariant::Rmse => "rmse",
            MsiqVariant::Weighted(_) => "weighted",
        }
    }
}

/// Variant selector used on the command line and in configs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantChoice {
    Rmse,
    Weighted,
    Both,
}

impl fmt::Display for VariantChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VariantChoice::Rmse => "rmse",
            VariantChoice::Weighted => "weighted",
            VariantChoice::Both => "both",
        })
    }
}

impl FromStr for VariantChoice {
    type Err = MsiqError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rmse" => Ok(VariantChoice::Rmse),
            "weighted" | "w" => Ok(VariantChoice::Weighted),
            "both" => Ok(VariantChoice::Both),
            other => Err(MsiqError::param(format!("unknown MSIQ variant '{other}'"))),
        }
    }
}

fn check_compatible(a: &MomentDescriptor, b: &MomentDescriptor) -> Result<()> {
    if a.order() != b.order() || a.scheme() != b.scheme() {
        return Err(MsiqError::DescriptorMismatch(format!(
            "order/scheme {}/{} vs {}/{}",
            a.order(),
            a.scheme(),
            b.order(),
            b.scheme()
        )));
    }
    debug_assert!(a
        .entries()
        .iter()
        .zip(b.entries())
        .all(|(x, y)| (x.p, x.q) == (y.p, y.q)));
    Ok(())
}

/// Root-mean-square difference over the informative moments.
pub fn msiq_rmse(a: &MomentDescriptor, b: &MomentDescriptor) -> Result<f64> {
    check_compatible(a, b)?;
    let sum: f64 = a
        .values()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// Weighted Euclidean distance. Deliberately not divided by the weight sum,
/// so its scale differs from [`msiq_rmse`].
pub fn msiq_weighted(a: &MomentDescriptor, b: &MomentDescriptor, weights: &MomentWeights) -> Result<f64> {
    check_compatible(a, b)?;
    let mut sum = 0.0;
    for (x, y) in a.entries().iter().zip(b.entries()) {
        let w = weights
            .weight(x.p, x.q)
            .ok_or_else(|| MsiqError::param(format!("no weight for moment ({}, {})", x.p, x.q)))?;
        let d = x.value - y.value;
        sum += w * d * d;
    }
    Ok(sum.sqrt())
}

pub fn msiq(a: &MomentDescriptor, b: &MomentDescriptor, variant: &MsiqVariant) -> Result<f64> {
    match variant {
        MsiqVariant::Rmse => msiq_rmse(a, b),
        MsiqVariant::Weighted(w) => msiq_weighted(a, b, w),
    }
}

/// MSIQ between two images of arbitrary (possibly different) sizes.
pub fn msiq_images(
    reference: &GrayImage,
    test: &GrayImage,
    order: usize,
    scheme: MomentScheme,
    variant: &MsiqVariant,
) -> Result<f64> {
    let a = descriptor(reference, order, scheme)?;
    let b = descriptor(test, order, scheme)?;
    msiq(&a, &b, variant)
}

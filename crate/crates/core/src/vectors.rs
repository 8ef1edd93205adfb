//! Language-neutral test vectors.
//!
//! A JSON document of small images and the descriptor, MSIQ and degradation
//! outputs this crate produces for them. Other front ends check themselves
//! against it; [`TestVectors::verify`] checks this crate.

use serde::{Deserialize, Serialize};

use crate::error::{MsiqError, Result};
use crate::image::GrayImage;
use crate::moments::{descriptor, MomentDescriptor, MomentScheme};
use crate::msiq::{msiq_rmse, msiq_weighted, MomentWeights};
use crate::transforms::{degrade, DegradationKind, DegradationSpec};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageVector {
    pub id: String,
    pub height: usize,
    pub width: usize,
    /// Row-major intensities in [0, 1].
    pub data: Vec<f64>,
}

impl ImageVector {
    fn from_image(id: &str, img: &GrayImage) -> Self {
        ImageVector {
            id: id.to_string(),
            height: img.height(),
            width: img.width(),
            data: img.data().to_vec(),
        }
    }

    pub fn to_image(&self) -> Result<GrayImage> {
        GrayImage::new(self.height, self.width, self.data.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptorVector {
    pub image: String,
    pub descriptor: MomentDescriptor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsiqVector {
    pub reference: String,
    pub test: String,
    pub order: usize,
    pub scheme: MomentScheme,
    pub msiq_rmse: f64,
    pub msiq_w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegradeVector {
    pub image: String,
    pub kind: DegradationKind,
    pub lambda: f64,
    pub output: ImageVector,
}

/// Inputs that must be rejected as degenerate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateVector {
    pub image: ImageVector,
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestVectors {
    pub version: u32,
    pub tolerance: f64,
    pub images: Vec<ImageVector>,
    pub descriptors: Vec<DescriptorVector>,
    pub msiq: Vec<MsiqVector>,
    pub degrade: Vec<DegradeVector>,
    pub degenerate: Vec<DegenerateVector>,
}

fn fixture_images() -> Vec<(&'static str, GrayImage)> {
    let code = |v: usize| (v % 256) as f64 / 255.0;
    vec![
        ("ones_3x3", GrayImage::constant(3, 3, 1.0)),
        ("point_1x1", GrayImage::constant(1, 1, 0.6)),
        (
            "ramp_4x5",
            GrayImage::from_fn(4, 5, |r, c| code(20 + 40 * r + 9 * c)),
        ),
        (
            "blob_9x7",
            GrayImage::from_fn(9, 7, |r, c| {
                let (x, y) = (r as f64 - 3.2, c as f64 - 2.6);
                (0.85 * (-(x * x / 6.0 + y * y / 3.0)).exp() * 255.0).round() / 255.0
            }),
        ),
        (
            "texture_12x16",
            GrayImage::from_fn(12, 16, |r, c| code((r * 37 + c * 91 + r * c * 13) % 211 + 30)),
        ),
        (
            "texture_12x16_shifted",
            GrayImage::from_fn(12, 16, |r, c| code(((r + 1) * 37 + c * 91 + (r + 1) * c * 13) % 211 + 30)),
        ),
    ]
}

impl TestVectors {
    /// Computes the vectors from this crate.
    pub fn generate() -> Result<Self> {
        let images = fixture_images();
        let find = |id: &str| &images.iter().find(|(i, _)| *i == id).expect("fixture id").1;
        let weights = MomentWeights::InverseOrder;

        let mut descriptors = Vec::new();
        for (id, img) in &images {
            for scheme in MomentScheme::ALL {
                for order in [3, 4] {
                    descriptors.push(DescriptorVector {
                        image: id.to_string(),
                        descriptor: descriptor(img, order, scheme)?,
                    });
                }
            }
        }

        let pairs = [
            ("ramp_4x5", "ramp_4x5"),
            ("ramp_4x5", "blob_9x7"),
            ("blob_9x7", "texture_12x16"),
            ("texture_12x16", "texture_12x16_shifted"),
            ("ones_3x3", "texture_12x16"),
        ];
        let mut msiq = Vec::new();
        for (a, b) in pairs {
            for scheme in MomentScheme::ALL {
                let da = descriptor(find(a), 4, scheme)?;
                let db = descriptor(find(b), 4, scheme)?;
                msiq.push(MsiqVector {
                    reference: a.into(),
                    test: b.into(),
                    order: 4,
                    scheme,
                    msiq_rmse: msiq_rmse(&da, &db)?,
                    msiq_w: msiq_weighted(&da, &db, &weights)?,
                });
            }
        }

        let mut degraded = Vec::new();
        for kind in DegradationKind::ALL {
            for lambda in [0.0, 0.2] {
                let out = degrade(find("texture_12x16"), DegradationSpec::new(kind, lambda)?)?;
                degraded.push(DegradeVector {
                    image: "texture_12x16".into(),
                    kind,
                    lambda,
                    output: ImageVector::from_image("", &out),
                });
            }
        }

        Ok(TestVectors {
            version: FORMAT_VERSION,
            tolerance: DEFAULT_TOLERANCE,
            images: images.iter().map(|(id, img)| ImageVector::from_image(id, img)).collect(),
            descriptors,
            msiq,
            degrade: degraded,
            degenerate: vec![DegenerateVector {
                image: ImageVector::from_image("black_4x4", &GrayImage::constant(4, 4, 0.0)),
                order: 4,
            }],
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("vector serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| MsiqError::param(format!("bad test-vector JSON: {e}")))
    }

    fn image(&self, id: &str) -> Result<GrayImage> {
        self.images
            .iter()
            .find(|i| i.id == id)
            .ok_or_else(|| MsiqError::param(format!("test vectors have no image '{id}'")))?
            .to_image()
    }

    /// Recomputes every vector and lists the mismatches.
    pub fn verify(&self) -> Result<Vec<String>> {
        let tol = self.tolerance;
        let close = |a: f64, b: f64| (a - b).abs() <= tol;
        let mut problems = Vec::new();
        for v in &self.descriptors {
            let d = descriptor(&self.image(&v.image)?, v.descriptor.order(), v.descriptor.scheme())?;
            let same = d.len() == v.descriptor.len() && d.values().zip(v.descriptor.values()).all(|(a, b)| close(a, b));
            if !same {
                problems.push(format!(
                    "descriptor {} order {} {}",
                    v.image,
                    v.descriptor.order(),
                    v.descriptor.scheme()
                ));
            }
        }
        for v in &self.msiq {
            let a = descriptor(&self.image(&v.reference)?, v.order, v.scheme)?;
            let b = descriptor(&self.image(&v.test)?, v.order, v.scheme)?;
            if !close(msiq_rmse(&a, &b)?, v.msiq_rmse) {
                problems.push(format!("msiq_rmse {} vs {} {}", v.reference, v.test, v.scheme));
            }
            if !close(msiq_weighted(&a, &b, &MomentWeights::InverseOrder)?, v.msiq_w) {
                problems.push(format!("msiq_w {} vs {} {}", v.reference, v.test, v.scheme));
            }
        }
        for v in &self.degrade {
            let out = degrade(&self.image(&v.image)?, DegradationSpec::new(v.kind, v.lambda)?)?;
            let same = out.dims() == (v.output.height, v.output.width)
                && out.data().iter().zip(&v.output.data).all(|(a, b)| close(*a, *b));
            if !same {
                problems.push(format!("degrade {} {} {}", v.image, v.kind, v.lambda));
            }
        }
        for v in &self.degenerate {
            match descriptor(&v.image.to_image()?, v.order, MomentScheme::RawGrid) {
                Err(MsiqError::DegenerateImage { .. }) => {}
                _ => problems.push(format!("degenerate {} accepted", v.image.id)),
            }
        }
        Ok(problems)
    }
}

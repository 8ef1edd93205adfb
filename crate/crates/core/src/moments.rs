//! Geometric, central and normalized central moments.
//!
//! Coordinate convention: the first image index (the row) is `x` and the
//! second (the column) is `y`, so `m_pq = sum_ij i^p j^q I(i, j)`. Swapping the
//! axes transposes every descriptor, so keep this in mind when comparing
//! against tools that use Cartesian `(column, row)` coordinates.
//!
//! Three mass models are provided, see [`MomentScheme`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MsiqError, Result};
use crate::image::GrayImage;

/// How pixel intensities are turned into a mass distribution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MomentScheme {
    /// Point masses at integer grid coordinates `(i, j)`.
    #[default]
    #[serde(rename = "raw")]
    RawGrid,
    /// Point masses at pixel centers `(i + 1/2, j + 1/2)`.
    #[serde(rename = "pixel_center_delta")]
    PixelCenterDelta,
    /// Piecewise-constant intensity over `[i, i+1) x [j, j+1)`, monomials integrated exactly.
    #[serde(rename = "pixel_integrated_constant")]
    PixelIntegratedConstant,
}

impl MomentScheme {
    pub const ALL: [MomentScheme; 3] = [
        MomentScheme::RawGrid,
        MomentScheme::PixelCenterDelta,
        MomentScheme::PixelIntegratedConstant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MomentScheme::RawGrid => "raw",
            MomentScheme::PixelCenterDelta => "pixel_center_delta",
            MomentScheme::PixelIntegratedConstant => "pixel_integrated_constant",
        }
    }
}

impl fmt::Display for MomentScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MomentScheme {
    type Err = MsiqError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" | "raw_grid" => Ok(MomentScheme::RawGrid),
            "pixel_center_delta" | "center" => Ok(MomentScheme::PixelCenterDelta),
            "pixel_integrated_constant" | "integrated" => Ok(MomentScheme::PixelIntegratedConstant),
            other => Err(MsiqError::param(format!(
                "unknown moment scheme '{other}' (expected raw, pixel_center_delta or pixel_integrated_constant)"
            ))),
        }
    }
}

/// Total mass at or below which an image is treated as degenerate.
pub fn mass_threshold(img: &GrayImage) -> f64 {
    1e-12 * (img.height() * img.width()) as f64
}

/// Per-axis weight table: `table[k * len + i]` is the weight of power `k` at index `i`.
struct AxisTable {
    len: usize,
    values: Vec<f64>,
}

impl AxisTable {
    /// Point-mass weights `(i + shift)^k`.
    fn point(len: usize, max_pow: usize, shift: f64) -> Self {
        let mut values = vec![0.0; len * (max_pow + 1)];
        for i in 0..len {
            let x = i as f64 + shift;
            let mut acc = 1.0;
            for k in 0..=max_pow {
                values[k * len + i] = acc;
                acc *= x;
            }
        }
        AxisTable { len, values }
    }

    /// Exact integrals of `(x - origin)^k` over `[i, i + 1]`.
    ///
    /// Uses `(a^(k+1) - b^(k+1)) / (a - b) = a^k + b * S_(k-1)` with `a - b = 1`,
    /// which avoids subtracting two large powers.
    fn integrated(len: usize, max_pow: usize, origin: f64) -> Self {
        let mut values = vec![0.0; len * (max_pow + 1)];
        for i in 0..len {
            let b = i as f64 - origin;
            let a = b + 1.0;
            let mut a_pow = 1.0;
            let mut s = 0.0;
            for k in 0..=max_pow {
                s = a_pow + b * s;
                values[k * len + i] = s / (k + 1) as f64;
                a_pow *= a;
            }
        }
        AxisTable { len, values }
    }

    #[inline]
    fn power(&self, k: usize) -> &[f64] {
        &self.values[k * self.len..(k + 1) * self.len]
    }
}

/// Moment grid indexed by `(p, q)` with `p, q <= max`.
#[derive(Clone, Debug)]
struct Grid {
    max: usize,
    values: Vec<f64>,
}

impl Grid {
    #[inline]
    fn get(&self, p: usize, q: usize) -> f64 {
        self.values[p * (self.max + 1) + q]
    }
}

/// Computes `sum_ij X_p(i) Y_q(j) I(i, j)` for all `p, q <= max` with `p + q <= max_total`.
fn separable_sums(img: &GrayImage, rows: &AxisTable, cols: &AxisTable, max: usize, max_total: usize) -> Grid {
    let stride = max + 1;
    let mut values = vec![0.0; stride * stride];
    let mut row_sums = vec![0.0; stride];
    for i in 0..img.height() {
        let line = img.row(i);
        for (q, slot) in row_sums.iter_mut().enumerate().take(max_total.min(max) + 1) {
            *slot = cols.power(q).iter().zip(line).map(|(w, v)| w * v).sum();
        }
        for p in 0..=max.min(max_total) {
            let xp = rows.power(p)[i];
            if xp == 0.0 {
                continue;
            }
            for q in 0..=(max_total - p).min(max) {
                values[p * stride + q] += xp * row_sums[q];
            }
        }
    }
    Grid { max, values }
}

fn raw_grid(img: &GrayImage, max: usize, max_total: usize, scheme: MomentScheme) -> Grid {
    let (rows, cols) = match scheme {
        MomentScheme::RawGrid => (
            AxisTable::point(img.height(), max, 0.0),
            AxisTable::point(img.width(), max, 0.0),
        ),
        MomentScheme::PixelCenterDelta => (
            AxisTable::point(img.height(), max, 0.5),
            AxisTable::point(img.width(), max, 0.5),
        ),
        MomentScheme::PixelIntegratedConstant => (
            AxisTable::integrated(img.height(), max, 0.0),
            AxisTable::integrated(img.width(), max, 0.0),
        ),
    };
    let mut grid = separable_sums(img, &rows, &cols, max, max_total);
    // Same summation as the mass check, so mu00 == m00 bit for bit.
    grid.values[0] = img.sum();
    grid
}

/// Raw geometric moment `m_pq` under the given mass model.
pub fn raw_moment(img: &GrayImage, p: usize, q: usize, scheme: MomentScheme) -> f64 {
    let max = p.max(q);
    raw_grid(img, max, p + q, scheme).get(p, q)
}

fn checked_mass(img: &GrayImage) -> Result<f64> {
    // m00 is the same under every scheme: unit pixel area, unit weight.
    let mass = img.sum();
    let threshold = mass_threshold(img);
    if !(mass > threshold) {
        return Err(MsiqError::DegenerateImage { mass, threshold });
    }
    Ok(mass)
}

/// Intensity centroid `(m10 / m00, m01 / m00)`.
pub fn centroid(img: &GrayImage, scheme: MomentScheme) -> Result<(f64, f64)> {
    let m00 = checked_mass(img)?;
    let g = raw_grid(img, 1, 1, scheme);
    Ok((g.get(1, 0) / m00, g.get(0, 1) / m00))
}

/// All central moments with `p + q <= order`.
#[derive(Clone, Debug)]
pub struct CentralMoments {
    order: usize,
    grid: Grid,
}

impl CentralMoments {
    pub fn compute(img: &GrayImage, order: usize, scheme: MomentScheme) -> Result<Self> {
        let m00 = checked_mass(img)?;
        let first = raw_grid(img, 1, 1, scheme);
        let (cx, cy) = (first.get(1, 0) / m00, first.get(0, 1) / m00);
        let grid = match scheme {
            MomentScheme::RawGrid | MomentScheme::PixelCenterDelta => {
                let shift = if scheme == MomentScheme::RawGrid { 0.0 } else { 0.5 };
                let rows = AxisTable::point(img.height(), order, shift - cx);
                let cols = AxisTable::point(img.width(), order, shift - cy);
                separable_sums(img, &rows, &cols, order, order)
            }
            MomentScheme::PixelIntegratedConstant => {
                // Exact raw moments about a nearby integer origin, then binomial re-centering.
                let (ox, oy) = (cx.round(), cy.round());
                let rows = AxisTable::integrated(img.height(), order, ox);
                let cols = AxisTable::integrated(img.width(), order, oy);
                let local = separable_sums(img, &rows, &cols, order, order);
                recenter(&local, order, cx - ox, cy - oy)
            }
        };
        let mut grid = grid;
        // Exact by definition; removes rounding residue.
        let stride = order + 1;
        grid.values[0] = m00;
        if order >= 1 {
            grid.values[stride] = 0.0;
            grid.values[1] = 0.0;
        }
        Ok(CentralMoments { order, grid })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Central moment `mu_pq`; panics if `p + q` exceeds the computed order.
    pub fn mu(&self, p: usize, q: usize) -> f64 {
        assert!(p + q <= self.order, "moment ({p}, {q}) exceeds order {}", self.order);
        self.grid.get(p, q)
    }

    /// Normalized central moment `nu_pq = mu_pq / mu_00^(1 + (p+q)/2)`.
    pub fn nu(&self, p: usize, q: usize) -> f64 {
        let mu00 = self.grid.get(0, 0);
        self.mu(p, q) / mu00.powf(1.0 + (p + q) as f64 / 2.0)
    }
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        c[i][0] = 1.0;
        for k in 1..=i {
            c[i][k] = c[i - 1][k - 1] + if k < i { c[i - 1][k] } else { 0.0 };
        }
    }
    c
}

/// `mu_pq = sum_{a<=p, b<=q} C(p,a) C(q,b) (-dx)^(p-a) (-dy)^(q-b) m_ab`.
fn recenter(raw: &Grid, order: usize, dx: f64, dy: f64) -> Grid {
    let c = binomials(order);
    let stride = order + 1;
    let neg_pow = |d: f64, k: usize| (-d).powi(k as i32);
    let mut values = vec![0.0; stride * stride];
    for p in 0..=order {
        for q in 0..=(order - p) {
            let mut acc = 0.0;
            for a in 0..=p {
                let fx = c[p][a] * neg_pow(dx, p - a);
                for b in 0..=q {
                    acc += fx * c[q][b] * neg_pow(dy, q - b) * raw.get(a, b);
                }
            }
            values[p * stride + q] = acc;
        }
    }
    Grid { max: order, values }
}

pub fn central_moment(img: &GrayImage, p: usize, q: usize, scheme: MomentScheme) -> Result<f64> {
    Ok(CentralMoments::compute(img, p + q, scheme)?.mu(p, q))
}

pub fn normalized_moment(img: &GrayImage, p: usize, q: usize, scheme: MomentScheme) -> Result<f64> {
    Ok(CentralMoments::compute(img, p + q, scheme)?.nu(p, q))
}

/// Informative moment indices for order `n`, in canonical `(p + q, p)` order.
///
/// The trivial entries `(0,0)`, `(1,0)` and `(0,1)` are excluded.
pub fn informative_indices(order: usize) -> Vec<(usize, usize)> {
    (2..=order)
        .flat_map(|k| (0..=k).map(move |p| (p, k - p)))
        .collect()
}

pub fn informative_count(order: usize) -> usize {
    if order < 2 {
        0
    } else {
        (order + 1) * (order + 2) / 2 - 3
    }
}

/// One descriptor component `nu_pq`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEntry {
    pub p: usize,
    pub q: usize,
    pub value: f64,
}

/// Normalized central moments over the informative index set, canonical order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DescriptorRepr", into = "DescriptorRepr")]
pub struct MomentDescriptor {
    order: usize,
    scheme: MomentScheme,
    entries: Vec<MomentEntry>,
}

impl MomentDescriptor {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn scheme(&self) -> MomentScheme {
        self.scheme
    }

    pub fn entries(&self) -> &[MomentEntry] {
        &self.entries
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.value)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, p: usize, q: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.p == p && e.q == q)
            .map(|e| e.value)
    }

    /// Builds a descriptor from raw values laid out in canonical order.
    pub fn from_values(order: usize, scheme: MomentScheme, values: &[f64]) -> Result<Self> {
        let idx = informative_indices(order);
        if order < 2 || values.len() != idx.len() {
            return Err(MsiqError::param(format!(
                "order {order} needs {} values, got {}",
                idx.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MsiqError::param("descriptor values must be finite"));
        }
        let entries = idx
            .into_iter()
            .zip(values)
            .map(|((p, q), &value)| MomentEntry { p, q, value })
            .collect();
        Ok(MomentDescriptor {
            order,
            scheme,
            entries,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| MsiqError::param(format!("bad descriptor JSON: {e}")))
    }
}

#[derive(Serialize, Deserialize)]
struct DescriptorRepr {
    order: usize,
    scheme: MomentScheme,
    entries: Vec<(usize, usize, f64)>,
}

impl From<MomentDescriptor> for DescriptorRepr {
    fn from(d: MomentDescriptor) -> Self {
        DescriptorRepr {
            order: d.order,
            scheme: d.scheme,
            entries: d.entries.iter().map(|e| (e.p, e.q, e.value)).collect(),
        }
    }
}

impl TryFrom<DescriptorRepr> for MomentDescriptor {
    type Error = MsiqError;

    fn try_from(r: DescriptorRepr) -> Result<Self> {
        let expected = informative_indices(r.order);
        let got: Vec<_> = r.entries.iter().map(|&(p, q, _)| (p, q)).collect();
        if got != expected {
            return Err(MsiqError::DescriptorMismatch(format!(
                "entries are not the canonical index set for order {}",
                r.order
            )));
        }
        let values: Vec<f64> = r.entries.iter().map(|e| e.2).collect();
        MomentDescriptor::from_values(r.order, r.scheme, &values)
    }
}

/// Normalized moments for every informative index, without the finiteness check.
pub fn normalized_values(img: &GrayImage, order: usize, scheme: MomentScheme) -> Result<Vec<f64>> {
    if order < 2 {
        return Err(MsiqError::param(format!("descriptor order must be >= 2, got {order}")));
    }
    let cm = CentralMoments::compute(img, order, scheme)?;
    Ok(informative_indices(order)
        .into_iter()
        .map(|(p, q)| cm.nu(p, q))
        .collect())
}

/// Moment descriptor of order `order` under `scheme`.
pub fn descriptor(img: &GrayImage, order: usize, scheme: MomentScheme) -> Result<MomentDescriptor> {
    let values = normalized_values(img, order, scheme)?;
    MomentDescriptor::from_values(order, scheme, &values)
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: [MomentScheme; 3] = MomentScheme::ALL;

    fn ones(h: usize, w: usize) -> GrayImage {
        GrayImage::constant(h, w, 1.0)
    }

    fn sample(h: usize, w: usize) -> GrayImage {
        GrayImage::from_fn(h, w, |r, c| {
            0.2 + 0.6 * ((r as f64 * 0.37 + c as f64 * 0.11).sin() * 0.5 + 0.5) * ((c + 1) as f64 / w as f64)
        })
    }

    #[test]
    fn total_mass_is_m00() {
        for s in S {
            assert_eq!(raw_moment(&ones(2, 2), 0, 0, s), 4.0);
        }
    }

    #[test]
    fn first_order_hand_sums() {
        // rows 0 and 1, two pixels each: 0*2 + 1*2
        assert_eq!(raw_moment(&ones(2, 2), 1, 0, MomentScheme::RawGrid), 2.0);
        // per pixel ((i+1)^2 - i^2)/2 = 0.5, 1.5; two columns each
        assert_eq!(raw_moment(&ones(2, 2), 1, 0, MomentScheme::PixelIntegratedConstant), 4.0);
        assert_eq!(raw_moment(&ones(2, 2), 1, 0, MomentScheme::PixelCenterDelta), 4.0);
    }

    #[test]
    fn centroid_of_uniform_and_point() {
        let (h, w) = (5, 8);
        let (x, y) = centroid(&ones(h, w), MomentScheme::RawGrid).unwrap();
        assert!((x - 2.0).abs() < 1e-12 && (y - 3.5).abs() < 1e-12);
        let (x, y) = centroid(&ones(h, w), MomentScheme::PixelCenterDelta).unwrap();
        assert!((x - 2.5).abs() < 1e-12 && (y - 4.0).abs() < 1e-12);
        let pt = GrayImage::from_fn(6, 7, |r, c| if (r, c) == (4, 2) { 0.7 } else { 0.0 });
        assert_eq!(centroid(&pt, MomentScheme::RawGrid).unwrap(), (4.0, 2.0));
    }

    #[test]
    fn black_image_is_degenerate() {
        let black = GrayImage::constant(4, 4, 0.0);
        for s in S {
            assert!(matches!(centroid(&black, s), Err(MsiqError::DegenerateImage { .. })));
            assert!(matches!(descriptor(&black, 4, s), Err(MsiqError::DegenerateImage { .. })));
        }
    }

    #[test]
    fn central_second_order_hand_sum() {
        // sum_i (i-1)^2 * 3 = 6
        let mu = central_moment(&ones(3, 3), 2, 0, MomentScheme::RawGrid).unwrap();
        assert!((mu - 6.0).abs() < 1e-12);
        let nu = normalized_moment(&ones(3, 3), 2, 0, MomentScheme::RawGrid).unwrap();
        assert!((nu - 6.0 / 81.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_moments() {
        let img = sample(13, 17);
        for s in S {
            let cm = CentralMoments::compute(&img, 4, s).unwrap();
            assert_eq!(cm.mu(0, 0), img.sum());
            assert_eq!(cm.nu(0, 0), 1.0);
            assert!(cm.nu(1, 0).abs() < 1e-9 && cm.nu(0, 1).abs() < 1e-9);
        }
    }

    #[test]
    fn integrated_central_matches_pointwise_plus_pixel_variance() {
        // For a piecewise-constant pixel, int (x - c)^2 over the pixel = (i + 1/2 - c)^2 + 1/12.
        let img = sample(9, 11);
        let pcd = CentralMoments::compute(&img, 2, MomentScheme::PixelCenterDelta).unwrap();
        let pic = CentralMoments::compute(&img, 2, MomentScheme::PixelIntegratedConstant).unwrap();
        let m00 = img.sum();
        assert!((pic.mu(2, 0) - (pcd.mu(2, 0) + m00 / 12.0)).abs() < 1e-9);
        assert!((pic.mu(1, 1) - pcd.mu(1, 1)).abs() < 1e-9);
    }

    #[test]
    fn descriptor_sizes() {
        let img = sample(20, 20);
        assert_eq!(descriptor(&img, 4, MomentScheme::RawGrid).unwrap().len(), 12);
        assert_eq!(descriptor(&img, 3, MomentScheme::RawGrid).unwrap().len(), 7);
        let d12 = descriptor(&img, 12, MomentScheme::RawGrid).unwrap();
        assert_eq!(d12.len(), 88);
        assert!(d12.values().all(f64::is_finite));
        assert!(matches!(descriptor(&img, 1, MomentScheme::RawGrid), Err(MsiqError::Parameter(_))));
        for n in 2..=12 {
            assert_eq!(informative_indices(n).len(), informative_count(n));
        }
    }

    #[test]
    fn canonical_order() {
        let idx = informative_indices(4);
        assert_eq!(&idx[..5], &[(0, 2), (1, 1), (2, 0), (0, 3), (1, 2)]);
        let mut sorted = idx.clone();
        sorted.sort_by_key(|&(p, q)| (p + q, p));
        assert_eq!(idx, sorted);
    }

    #[test]
    fn descriptor_json_shape() {
        let d = descriptor(&sample(8, 8), 2, MomentScheme::RawGrid).unwrap();
        let v: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();
        assert_eq!(v["order"], 2);
        assert_eq!(v["scheme"], "raw");
        assert_eq!(v["entries"][2][0], 2);
        assert_eq!(v["entries"][2][1], 0);
        assert_eq!(MomentDescriptor::from_json(&d.to_json()).unwrap(), d);
        let bad = r#"{"order":2,"scheme":"raw","entries":[[1,1,0.1],[0,2,0.1],[2,0,0.1]]}"#;
        assert!(MomentDescriptor::from_json(bad).is_err());
    }

    #[test]
    fn single_pixel_image() {
        let img = GrayImage::new(1, 1, vec![0.4]).unwrap();
        let d = descriptor(&img, 4, MomentScheme::RawGrid).unwrap();
        assert!(d.values().all(|v| v == 0.0));
    }
}

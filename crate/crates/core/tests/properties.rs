use msiq_core::stats::{signed_tracking, spearman};
use msiq_core::{
    degrade, descriptor, msiq_rmse, msiq_weighted, psnr, resize, resize_to, ssim, DegradationKind, DegradationSpec,
    GrayImage, MetricPolarity, MomentDescriptor, MomentScheme, MomentWeights, PsnrValue, ResizeMethod,
};
use proptest::prelude::*;

fn image(max_h: usize, max_w: usize) -> impl Strategy<Value = GrayImage> {
    (1..=max_h, 1..=max_w).prop_flat_map(|(h, w)| {
        prop::collection::vec(0.0f64..=1.0, h * w).prop_map(move |d| GrayImage::new(h, w, d).unwrap())
    })
}

/// Images with enough mass to never be degenerate.
fn massive_image(max_h: usize, max_w: usize) -> impl Strategy<Value = GrayImage> {
    image(max_h, max_w).prop_map(|img| img.map(|v| 0.05 + 0.95 * v))
}

fn descriptor_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

fn desc(v: &[f64]) -> MomentDescriptor {
    MomentDescriptor::from_values(4, MomentScheme::RawGrid, v).unwrap()
}

fn scheme() -> impl Strategy<Value = MomentScheme> {
    prop::sample::select(MomentScheme::ALL.to_vec())
}

fn method() -> impl Strategy<Value = ResizeMethod> {
    prop::sample::select(ResizeMethod::ALL.to_vec())
}

fn kind() -> impl Strategy<Value = DegradationKind> {
    prop::sample::select(DegradationKind::ALL.to_vec())
}

fn in_unit_range(img: &GrayImage) -> bool {
    img.data().iter().all(|v| (0.0..=1.0).contains(v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn msiq_is_a_metric_on_descriptors(a in descriptor_values(12), b in descriptor_values(12), c in descriptor_values(12)) {
        let (a, b, c) = (desc(&a), desc(&b), desc(&c));
        let w = MomentWeights::InverseOrder;
        for d in [
            |x: &MomentDescriptor, y: &MomentDescriptor| msiq_rmse(x, y).unwrap(),
            |x: &MomentDescriptor, y: &MomentDescriptor| msiq_weighted(x, y, &MomentWeights::InverseOrder).unwrap(),
        ] {
            prop_assert_eq!(d(&a, &a), 0.0);
            prop_assert!(d(&a, &b) >= 0.0);
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
        }
        prop_assert!(msiq_weighted(&a, &b, &w).unwrap() >= 0.0);
    }

    #[test]
    fn msiq_of_image_with_itself_is_zero(img in massive_image(12, 12), s in scheme(), n in 2usize..=6) {
        let a = descriptor(&img, n, s).unwrap();
        let b = descriptor(&img.clone(), n, s).unwrap();
        prop_assert_eq!(msiq_rmse(&a, &b).unwrap(), 0.0);
        prop_assert!(a.values().all(f64::is_finite));
    }

    #[test]
    fn descriptor_is_intensity_scale_covariant(img in massive_image(10, 10), c in 0.2f64..1.0, s in scheme()) {
        // nu_pq scales by c^(-(p+q)/2) under I -> c I
        let a = descriptor(&img, 4, s).unwrap();
        let b = descriptor(&img.map(|v| v * c), 4, s).unwrap();
        for (e, v) in a.entries().iter().zip(b.values()) {
            let expect = e.value * c.powf(-((e.p + e.q) as f64) / 2.0);
            prop_assert!((v - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn translation_with_zero_padding(img in massive_image(8, 8), dr in 0usize..6, dc in 0usize..6, s in scheme()) {
        let a = descriptor(&img.embed(14, 14, 0, 0).unwrap(), 4, s).unwrap();
        let b = descriptor(&img.embed(14, 14, dr, dc).unwrap(), 4, s).unwrap();
        prop_assert!(msiq_rmse(&a, &b).unwrap() <= 1e-9);
    }

    #[test]
    fn transpose_swaps_moment_indices(img in massive_image(9, 9), s in scheme()) {
        let t = GrayImage::from_fn(img.width(), img.height(), |r, c| img.get(c, r));
        let a = descriptor(&img, 4, s).unwrap();
        let b = descriptor(&t, 4, s).unwrap();
        for e in a.entries() {
            let v = b.get(e.q, e.p).unwrap();
            prop_assert!((v - e.value).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn psnr_and_ssim_are_symmetric(a in image(16, 16), noise in prop::collection::vec(-0.2f64..0.2, 256)) {
        let b = GrayImage::from_fn(a.height(), a.width(), |r, c| (a.get(r, c) + noise[(r * 16 + c) % 256]).clamp(0.0, 1.0));
        prop_assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
        prop_assert_eq!(psnr(&a, &a).unwrap(), PsnrValue::Infinite);
        if a.height() >= 11 && a.width() >= 11 {
            let s = ssim(&a, &b).unwrap();
            prop_assert!((s - ssim(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!(s <= 1.0 + 1e-12 && s >= -1.0 - 1e-12);
            prop_assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn resize_output_in_range(img in image(12, 12), s in 0.3f64..3.5, m in method()) {
        if let Ok(out) = resize(&img, s, m) {
            prop_assert!(in_unit_range(&out));
            prop_assert_eq!(out.height(), (img.height() as f64 * s).round() as usize);
        }
    }

    #[test]
    fn resize_to_output_in_range(img in image(12, 12), h in 1usize..20, w in 1usize..20, m in method()) {
        let out = resize_to(&img, h, w, m).unwrap();
        prop_assert!(in_unit_range(&out));
        prop_assert_eq!(out.dims(), (h, w));
    }

    #[test]
    fn resize_preserves_constants(v in 0.0f64..=1.0, h in 2usize..10, w in 2usize..10, s in 0.5f64..3.0, m in method()) {
        let img = GrayImage::constant(h, w, v);
        if let Ok(out) = resize(&img, s, m) {
            prop_assert!(out.data().iter().all(|x| (x - v).abs() < 1e-12));
        }
    }

    #[test]
    fn degrade_output_in_range(img in image(20, 20), k in kind(), lambda in 0.0f64..0.99) {
        let out = degrade(&img, DegradationSpec::new(k, lambda).unwrap()).unwrap();
        prop_assert_eq!(out.dims(), img.dims());
        prop_assert!(in_unit_range(&out));
    }

    #[test]
    fn geometric_degradation_at_zero_is_identity(img in image(16, 16), k in kind()) {
        prop_assume!(k.is_geometric());
        let out = degrade(&img, DegradationSpec::new(k, 0.0).unwrap()).unwrap();
        prop_assert_eq!(out, img);
    }

    #[test]
    fn spearman_bounded_and_rank_invariant(xs in prop::collection::vec(-10.0f64..10.0, 3..20)) {
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x * x - i as f64).collect();
        if let Ok(r) = spearman(&xs, &ys) {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
            let mono: Vec<f64> = ys.iter().map(|y| y.exp().min(1e300)).collect();
            let r2 = spearman(&xs, &mono).unwrap();
            prop_assert!((r - r2).abs() < 1e-9);
        }
        if let Ok(r) = spearman(&xs, &xs) {
            prop_assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tracking_sign_follows_polarity(vals in prop::collection::vec(0.0f64..1.0, 5)) {
        let lambdas = [0.0, 0.05, 0.1, 0.15, 0.2];
        if let Ok(lo) = signed_tracking(&lambdas, &vals, MetricPolarity::LowerIsBetter) {
            let hi = signed_tracking(&lambdas, &vals, MetricPolarity::HigherIsBetter).unwrap();
            prop_assert_eq!(lo, -hi);
        }
    }
}

#[test]
fn out_of_range_lambda_is_rejected() {
    for k in DegradationKind::ALL {
        assert!(DegradationSpec::new(k, -0.01).is_err());
        assert!(DegradationSpec::new(k, 1.0).is_err());
        assert!(DegradationSpec::new(k, f64::NAN).is_err());
    }
}

#[test]
fn resize_rejects_bad_scale() {
    let img = GrayImage::constant(4, 4, 0.5);
    for s in [0.0, -1.0, f64::NAN, f64::INFINITY, 0.01] {
        assert!(resize(&img, s, ResizeMethod::Bilinear).is_err(), "{s}");
    }
}

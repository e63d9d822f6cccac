use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use waveseg_core::features::{
    apply_weighting, feature_field, feature_field_reference, FeatureField, WeightingConfig,
    WeightingMode,
};
use waveseg_core::filterbank::{FilterPair, BUILTIN_NAMES};
use waveseg_core::pipeline::{build_features, FeatureSpec, TreeAnchor};
use waveseg_core::GrayImage;

fn random_image(w: usize, h: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(w, h, |_, _| rng.random_range(0.0..1.0))
}

fn max_relative_gap(a: &FeatureField, b: &FeatureField) -> f64 {
    let scale = a
        .data()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs() / scale.max(x.abs()))
        .fold(0.0, f64::max)
}

#[test]
fn fast_path_matches_literal_construction() {
    let img = random_image(16, 16, 2024);
    for name in BUILTIN_NAMES {
        let pair = FilterPair::builtin(name).unwrap();
        for levels in 1..=3 {
            let fast = feature_field(&img, &pair, levels).unwrap();
            let slow = feature_field_reference(&img, &pair, levels).unwrap();
            assert_eq!(fast.dim(), slow.dim());
            assert_eq!(fast.lowfreq_mask(), slow.lowfreq_mask());
            let gap = max_relative_gap(&slow, &fast);
            assert!(gap <= 1e-9, "{name} K={levels}: {gap:e}");
        }
    }
}

#[test]
fn rectangular_images_agree_too() {
    let img = random_image(24, 8, 5);
    let pair = FilterPair::builtin("bio1").unwrap();
    let fast = feature_field(&img, &pair, 2).unwrap();
    let slow = feature_field_reference(&img, &pair, 2).unwrap();
    assert!(max_relative_gap(&slow, &fast) <= 1e-9);
}

#[test]
fn intensity_field_ignores_weighting() {
    let img = random_image(8, 8, 1);
    let ff = FeatureField::from_intensity(&img);
    for mode in [WeightingMode::SignedPower, WeightingMode::ScalarScale] {
        let cfg = WeightingConfig::new(3.0, mode).unwrap();
        assert_eq!(apply_weighting(&ff, &cfg).unwrap(), ff);
    }
    assert!(WeightingConfig::new(0.0, WeightingMode::SignedPower).is_err());
    assert!(WeightingConfig::new(f64::NAN, WeightingMode::ScalarScale).is_err());
}

#[test]
fn levels_zero_spec_gives_intensities() {
    let img = random_image(8, 8, 9);
    let pair = FilterPair::builtin("bio2").unwrap();
    let ff = build_features(&img, &pair, &FeatureSpec::intensity()).unwrap();
    assert_eq!(ff.dim(), 1);
    assert_eq!(ff.data(), img.pixels());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn feature_field_is_shift_equivariant(seed in any::<u64>(), dr in 0usize..16, dc in 0usize..16) {
        let pair = FilterPair::builtin("bio2").unwrap();
        let img = random_image(16, 16, seed);
        let shifted = feature_field(&img.roll(dr, dc), &pair, 2).unwrap();
        let expect = feature_field(&img, &pair, 2).unwrap().roll(dr, dc);
        prop_assert!(max_relative_gap(&expect, &shifted) < 1e-12);
    }

    #[test]
    fn centred_features_are_shift_equivariant(seed in any::<u64>(), dr in 0usize..16, dc in 0usize..16) {
        let pair = FilterPair::builtin("bio1").unwrap();
        let img = random_image(16, 16, seed);
        let spec = FeatureSpec::wavelet(2, WeightingConfig::new(0.7, WeightingMode::SignedPower).unwrap());
        let shifted = build_features(&img.roll(dr, dc), &pair, &spec).unwrap();
        let expect = build_features(&img, &pair, &spec).unwrap().roll(dr, dc);
        prop_assert!(max_relative_gap(&expect, &shifted) < 1e-12);
    }

    #[test]
    fn feature_field_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let pair = FilterPair::builtin("o1").unwrap();
        let x = random_image(8, 8, seed);
        let y = random_image(8, 8, !seed);
        let z = GrayImage::from_fn(8, 8, |r, c| a * x.get(r, c) + b * y.get(r, c));
        let fx = feature_field(&x, &pair, 3).unwrap();
        let fy = feature_field(&y, &pair, 3).unwrap();
        let fz = feature_field(&z, &pair, 3).unwrap();
        for ((p, q), s) in fx.data().iter().zip(fy.data()).zip(fz.data()) {
            prop_assert!((a * p + b * q - s).abs() < 1e-9);
        }
    }

    #[test]
    fn weighting_touches_only_low_frequency(seed in any::<u64>(), w in 0.2f64..4.0, scale in any::<bool>()) {
        let pair = FilterPair::builtin("bio2").unwrap();
        let ff = feature_field(&random_image(8, 8, seed), &pair, 2).unwrap();
        let mode = if scale { WeightingMode::ScalarScale } else { WeightingMode::SignedPower };
        let cfg = WeightingConfig::new(w, mode).unwrap();
        let out = apply_weighting(&ff, &cfg).unwrap();
        for (v, u) in ff.vectors().zip(out.vectors()) {
            for (i, (&x, &y)) in v.iter().zip(u).enumerate() {
                if ff.lowfreq_mask()[i] {
                    let expect = match mode {
                        WeightingMode::SignedPower => x.signum() * x.abs().powf(w),
                        WeightingMode::ScalarScale => w * x,
                    };
                    prop_assert!((y - expect).abs() <= 1e-12 * expect.abs().max(1.0));
                    // sign is preserved
                    prop_assert!(x == 0.0 || y.signum() == x.signum());
                } else {
                    prop_assert_eq!(x, y);
                }
            }
        }
    }

    #[test]
    fn unit_weight_is_exact_identity(seed in any::<u64>(), scale in any::<bool>()) {
        let pair = FilterPair::builtin("bio1").unwrap();
        let ff = feature_field(&random_image(8, 8, seed), &pair, 3).unwrap();
        let mode = if scale { WeightingMode::ScalarScale } else { WeightingMode::SignedPower };
        prop_assert_eq!(apply_weighting(&ff, &WeightingConfig::new(1.0, mode).unwrap()).unwrap(), ff);
    }
}

#[test]
fn corner_and_centred_hold_the_same_values() {
    let img = random_image(16, 16, 77);
    let pair = FilterPair::builtin("o1-corrected").unwrap();
    let mut spec = FeatureSpec::wavelet(3, WeightingConfig::default());
    spec.anchor = TreeAnchor::Corner;
    let corner = build_features(&img, &pair, &spec).unwrap();
    spec.anchor = TreeAnchor::Centered;
    let centred = build_features(&img, &pair, &spec).unwrap();
    for i in 0..corner.dim() {
        let mut a = corner.component(i).into_pixels();
        let mut b = centred.component(i).into_pixels();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b, "component {i}");
    }
}

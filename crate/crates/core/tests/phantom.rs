use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use waveseg_core::clustering::HardLabeling;
use waveseg_core::metrics::misclassification;
use waveseg_core::phantom::*;
use waveseg_core::{Error, GrayImage};

fn spec(kind: PhantomKind, noise: f64, seed: u64) -> PhantomSpec {
    PhantomSpec {
        kind,
        width: 64,
        height: 64,
        noise_sigma: noise,
        seed,
    }
}

#[test]
fn minefield_fraction_matches_disk_area() {
    let PhantomKind::Minefield { mines, radius, .. } = PhantomKind::default_minefield() else {
        unreachable!()
    };
    let expect = mines as f64 * std::f64::consts::PI * radius * radius / (64.0 * 64.0);
    for seed in 0..10 {
        let ph = make_phantom(&spec(PhantomKind::default_minefield(), 0.25, seed)).unwrap();
        let fg = ph.truth.labels().iter().filter(|&&l| l == 1).count() as f64 / 4096.0;
        assert!(
            (fg - expect).abs() <= 0.2 * expect,
            "seed {seed}: {fg} vs {expect}"
        );
    }
}

#[test]
fn noiseless_minefield_is_its_truth() {
    let ph = make_phantom(&spec(PhantomKind::default_minefield(), 0.0, 5)).unwrap();
    for (&v, &l) in ph.image.pixels().iter().zip(ph.truth.labels()) {
        assert_eq!(l == 1, v > 0.5);
        assert!(v == 0.3 || v == 0.7);
    }
}

#[test]
fn same_seed_same_image() {
    for kind in ["minefield", "disk", "composite"] {
        let s = spec(PhantomKind::default_for(kind).unwrap(), 0.1, 42);
        assert_eq!(make_phantom(&s).unwrap(), make_phantom(&s).unwrap());
        let other = PhantomSpec { seed: 43, ..s };
        assert_ne!(
            make_phantom(&s).unwrap().image,
            make_phantom(&other).unwrap().image
        );
    }
}

#[test]
fn noisy_images_stay_in_unit_range() {
    let ph = make_phantom(&spec(PhantomKind::default_minefield(), 0.5, 1)).unwrap();
    assert!(ph.image.pixels().iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn composite_regions_partition_the_image() {
    let ph = make_phantom(&spec(PhantomKind::default_composite(), 0.0, 0)).unwrap();
    let masks: Vec<Vec<bool>> = ["background", "texture", "blob"]
        .iter()
        .map(|r| ph.region_mask(r).unwrap())
        .collect();
    for j in 0..4096 {
        assert_eq!(masks.iter().filter(|m| m[j]).count(), 1);
    }
    let band = masks[1].iter().filter(|&&b| b).count() as f64 / 4096.0;
    assert!((band - 0.25).abs() < 1e-12, "band fraction {band}");
    let blob = masks[2].iter().filter(|&&b| b).count() as f64;
    let area = std::f64::consts::PI * 144.0;
    assert!((blob - area).abs() <= 0.1 * area);
}

#[test]
fn overcrowded_minefield_is_rejected() {
    let kind = PhantomKind::Minefield {
        mines: 200,
        radius: 10.0,
        background: 0.3,
        foreground: 0.7,
    };
    assert!(matches!(
        make_phantom(&spec(kind, 0.0, 0)),
        Err(Error::Placement { .. })
    ));
}

#[test]
fn otsu_splits_a_two_value_image_exactly() {
    let ph = make_phantom(&spec(PhantomKind::default_disk(), 0.0, 0)).unwrap();
    let (mask, t) = otsu_binarize(&ph.image, 256).unwrap();
    assert!(t > 0.2 && t < 0.8);
    assert_eq!(mask, ph.region_mask("disk").unwrap());
}

#[test]
fn otsu_on_gaussian_mixture() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let lo = Normal::<f64>::new(0.25, 0.05).unwrap();
    let hi = Normal::<f64>::new(0.75, 0.05).unwrap();
    let (w, h) = (128, 128);
    let truth: Vec<bool> = (0..w * h).map(|j| (j / w) < h / 2).collect();
    let pixels: Vec<f64> = truth
        .iter()
        .map(|&t| {
            if t {
                hi.sample(&mut rng)
            } else {
                lo.sample(&mut rng)
            }
            .clamp(0.0, 1.0)
        })
        .collect();
    let (mask, _) = otsu_binarize(&GrayImage::new(w, h, pixels).unwrap(), 256).unwrap();
    let r = misclassification(
        &HardLabeling::from_mask(w, h, &mask).unwrap(),
        &HardLabeling::from_mask(w, h, &truth).unwrap(),
        2,
    )
    .unwrap();
    assert!(
        r.misclassification_rate <= 0.01,
        "{}",
        r.misclassification_rate
    );
}

#[test]
fn otsu_depends_only_on_the_histogram() {
    // moving every value within its bin keeps the split
    let ph = make_phantom(&spec(PhantomKind::default_minefield(), 0.2, 3)).unwrap();
    let jiggled = ph.image.map(|v| {
        let b = ((v * 256.0) as usize).min(255) as f64;
        (b + 0.5) / 256.0
    });
    let (a, ta) = otsu_binarize(&ph.image, 256).unwrap();
    let (b, tb) = otsu_binarize(&jiggled, 256).unwrap();
    assert_eq!(a, b);
    assert_eq!(ta, tb);
}

#[test]
fn otsu_rejects_constant_images() {
    assert!(matches!(
        otsu_binarize(&GrayImage::filled(8, 8, 0.4), 256),
        Err(Error::ConstantImage)
    ));
    assert!(otsu_binarize(&GrayImage::filled(8, 8, 0.4), 1).is_err());
}

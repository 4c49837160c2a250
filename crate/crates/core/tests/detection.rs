use std::f64::consts::TAU;

use ornament_core::detect::{detect_lattice, isometry_mismatch, regenerate, DEFAULT_THETA};
use ornament_core::fixtures::{moroccan_composite, random_fixture};
use ornament_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 3] = [11, 12, 13];

fn salt_and_pepper(p: &RasterPattern, fraction: f64, seed: u64) -> RasterPattern {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rgb = p
        .rgb()
        .iter()
        .map(|c| {
            if rng.random_bool(fraction) {
                if rng.random_bool(0.5) {
                    [0, 0, 0]
                } else {
                    [255, 255, 255]
                }
            } else {
                *c
            }
        })
        .collect();
    RasterPattern::from_rgb(p.width(), p.height(), rgb).unwrap()
}

fn check_containment(sig: &SymmetrySignature) {
    let keys: Vec<u32> = sig.rotation_centers.keys().copied().collect();
    if keys.contains(&6) {
        assert!(keys.contains(&3) && keys.contains(&2), "{}: {keys:?}", sig.group);
    }
    if keys.contains(&4) {
        assert!(keys.contains(&2), "{}: {keys:?}", sig.group);
        assert!(!keys.contains(&3) && !keys.contains(&6), "{}: {keys:?}", sig.group);
    }
}

#[test]
fn round_trip_identifies_every_group() {
    let mut wrong = Vec::new();
    for seed in SEEDS {
        for g in GroupName::ALL {
            let f = random_fixture(g, 256, 64.0, seed).unwrap();
            let sig = classify(&f.pattern).unwrap();
            if sig.group != g {
                wrong.push(format!("{g} (seed {seed}) -> {}", sig.group));
                continue;
            }
            check_containment(&sig);
            let accepted = sig
                .rotation_centers
                .values()
                .flatten()
                .map(|c| c.score)
                .chain(sig.mirror_axes.iter().map(|a| a.score))
                .chain(sig.glide_axes.iter().map(|a| a.score));
            for s in accepted {
                assert!(s < 0.02, "{g} (seed {seed}): accepted score {s}");
            }
            assert!((0.0..=1.0).contains(&sig.confidence));
            assert_eq!(sig.highest_order(), g.group().highest_rotation_order, "{g}");
        }
    }
    assert!(wrong.is_empty(), "{wrong:?}");
}

#[test]
fn salt_and_pepper_noise_keeps_the_label() {
    let opts = ClassifyOptions { theta: 0.15, ..ClassifyOptions::default() };
    let mut wrong = Vec::new();
    for seed in SEEDS {
        for g in GroupName::ALL {
            let f = random_fixture(g, 256, 64.0, seed).unwrap();
            let noisy = salt_and_pepper(&f.pattern, 0.10, seed);
            match classify_with(&noisy, &opts) {
                Ok(sig) if sig.group == g => check_containment(&sig),
                other => wrong.push(format!("{g} (seed {seed}) -> {:?}", other.map(|s| s.group))),
            }
        }
    }
    assert!(wrong.is_empty(), "{wrong:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn label_is_invariant_under_translation(gi in 0usize..17, dx in 0usize..64, dy in 0usize..64) {
        let g = GroupName::ALL[gi];
        let big = random_fixture(g, 320, 64.0, 21).unwrap();
        let a = big.pattern.crop(0, 0, 256, 256).unwrap();
        let b = big.pattern.crop(dx, dy, 256, 256).unwrap();
        let sa = classify(&a).unwrap();
        let sb = classify(&b).unwrap();
        prop_assert_eq!(sa.group, g);
        prop_assert_eq!(sb.group, g);
        prop_assert!((sa.lattice.area() - sb.lattice.area()).abs() < 0.02 * sa.lattice.area());
    }
}

#[test]
fn detected_lattice_matches_the_generating_one() {
    for g in [GroupName::P1, GroupName::Cm, GroupName::P3, GroupName::P4g] {
        let f = random_fixture(g, 256, 64.0, 8).unwrap();
        let l = detect_lattice(&f.pattern, DEFAULT_THETA).unwrap();
        let rel = (l.area() - f.lattice.area()).abs() / f.lattice.area();
        assert!(rel < 0.02, "{g}: {} vs {}", l.area(), f.lattice.area());
        for v in [l.a, l.b] {
            let fr = f.lattice.to_frac(v);
            assert!((fr.x - fr.x.round()).abs() < 0.02 && (fr.y - fr.y.round()).abs() < 0.02, "{g}: {v}");
        }
    }
}

#[test]
fn overlapped_composite_is_cmm() {
    let c = moroccan_composite(512, 120.0).unwrap();
    let score = |order: u32, p: Point2| isometry_mismatch(&c.pattern, &Isometry2::rotation(p, TAU / order as f64)).unwrap();
    assert!(score(6, c.dodecagram_center) > DEFAULT_THETA);
    assert!(score(3, c.three_leaf_center) > DEFAULT_THETA);
    assert!(score(4, c.dodecagram_center) > DEFAULT_THETA);
    let sig = classify(&c.pattern).unwrap();
    assert_eq!(sig.group, GroupName::Cmm);
    assert_eq!(sig.two_fold_class_count, 3);
    assert!(!sig.mirror_axes.is_empty() && !sig.glide_axes.is_empty());
    for order in [6, 4, 3] {
        assert!(sig.rejected_orders.get(&order).is_some_and(|s| *s > DEFAULT_THETA), "order {order}");
    }
    let (_, err) = regenerate(&c.pattern, &sig).unwrap();
    assert!(err < 0.05, "regeneration error {err}");
}

#[test]
fn uniform_and_tiny_inputs_are_errors() {
    let flat = RasterPattern::uniform(128, 128, [90, 90, 90]).unwrap();
    assert!(matches!(classify(&flat), Err(Error::NoPeriodicity(_))));
    let tiny = RasterPattern::uniform(8, 8, [0, 0, 0]).unwrap();
    assert!(classify(&tiny).is_err());
}

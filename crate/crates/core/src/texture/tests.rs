use super::*;
use crate::candidates::Candidate;
use crate::image::ChannelImage;
use rand::{Rng, SeedableRng};

fn constant(side: usize, level: u8) -> QuantizedWindow {
    QuantizedWindow::new(side, vec![level; side * side])
}

fn checkerboard(side: usize) -> QuantizedWindow {
    QuantizedWindow::new(side, (0..side * side).map(|k| if (k % side + k / side).is_multiple_of(2) { 1 } else { 2 }).collect())
}

fn cand(x: usize, y: usize) -> Candidate {
    Candidate {
        x,
        y,
        intensity: 0,
        radius: 0,
    }
}

#[test]
fn quantization_bins() {
    let w = Window::new(2, vec![0, 255, 8, 7]);
    assert_eq!(w.quantize().levels(), &[1, 32, 2, 1]);
}

#[test]
fn glcm_constant_window_totals() {
    for side in [7usize, 11] {
        for d in 1..=3usize {
            let m = glcm(&constant(side, 5), d);
            let axis = side * (side - d);
            let diag = (side - d) * (side - d);
            let expected = 2 * (2 * axis + 2 * diag) as u32;
            assert_eq!(m.get(5, 4), expected);
            assert_eq!(m.total(), expected as u64);
        }
    }
}

#[test]
fn glcm_checkerboard_axis_pairs_are_off_diagonal() {
    let side = 7;
    let m = glcm(&checkerboard(side), 1);
    let axis_pairs = 2 * side * (side - 1);
    let diag_pairs = 2 * (side - 1) * (side - 1);
    assert_eq!((m.get(1, 1) + m.get(2, 0)) as usize, 2 * axis_pairs);
    assert_eq!(m.get(1, 1), m.get(2, 0));
    assert_eq!((m.get(1, 0) + m.get(2, 1)) as usize, 2 * diag_pairs);
}

#[test]
fn glrlm_examples() {
    let m = glrlm(&constant(7, 3));
    // full rows and columns, plus the two main diagonals
    assert_eq!(m.get(3, 6), 7 + 7 + 1 + 1);
    let m = glrlm(&checkerboard(7));
    // 0 and 90 degree runs are all length 1; two corner diagonals per
    // diagonal direction are length 1 too
    let ones = m.get(1, 0) + m.get(2, 0);
    assert_eq!(ones, 49 + 49 + 4);
}

#[test]
fn glszm_examples() {
    let m = glszm(&constant(7, 9));
    assert_eq!(m.get(9, 48), 1);
    assert_eq!(m.total(), 1);

    let mut levels = vec![1u8; 49];
    levels[0] = 20;
    levels[48] = 20;
    let m = glszm(&QuantizedWindow::new(7, levels));
    assert_eq!(m.get(20, 0), 2);
    assert_eq!(m.get(1, 46), 1);
}

#[test]
fn gldm_constant_census() {
    let m = gldm(&constant(7, 4), 1, 0);
    assert_eq!(m.get(4, 8), 25);
    assert_eq!(m.get(4, 5), 20);
    assert_eq!(m.get(4, 3), 4);
    assert_eq!(m.total(), 49);
}

#[test]
fn gldm_unique_levels_have_zero_dependence() {
    let q = QuantizedWindow::new(5, (0..25).map(|k| (k + 1) as u8).collect());
    let m = gldm(&q, 2, 0);
    for level in 1..=25 {
        assert_eq!(m.get(level, 0), 1);
    }
    assert_eq!(feature_ldhgle(&m), 0.0);
}

#[test]
fn ngtdm_examples() {
    let n = ngtdm(&constant(7, 6), 3);
    assert_eq!(n.s[5], 0.0);
    assert_eq!(n.counts[5], 49);

    let mut levels = vec![1u8; 49];
    levels[24] = 10;
    let n = ngtdm(&QuantizedWindow::new(7, levels), 3);
    assert_eq!(n.counts[9], 1);
    assert_eq!(n.s[9], 9.0);
}

#[test]
fn energy_and_variance() {
    assert_eq!(feature_energy(&Window::new(7, vec![2; 49])), 196.0);
    assert_eq!(feature_energy(&Window::new(7, vec![0; 49])), 0.0);
    assert_eq!(feature_variance(&Window::new(7, vec![77; 49])), 0.0);
    assert_eq!(feature_variance(&Window::new(2, vec![0, 255, 255, 0])), 16256.25);
}

#[test]
fn coarseness_examples() {
    assert_eq!(feature_coarseness(&ngtdm(&constant(7, 2), 1)), COARSENESS_CAP);
    // 3x3, centre level 2 on level 1: s1 = 4/3 + 4/5, s2 = 1
    let mut levels = vec![1u8; 9];
    levels[4] = 2;
    let n = ngtdm(&QuantizedWindow::new(3, levels), 1);
    let s1 = 4.0 / 3.0 + 4.0 / 5.0;
    assert!((n.s[0] - s1).abs() < 1e-12);
    assert_eq!(n.s[1], 1.0);
    let expected = 1.0 / (8.0 / 9.0 * s1 + 1.0 / 9.0 * 1.0);
    let got = feature_coarseness(&n);
    assert!((got - expected).abs() < 1e-12 * expected);
    assert!((got - 135.0 / 271.0).abs() < 1e-12);

    let mut doubled = n.clone();
    doubled.s.iter_mut().for_each(|s| *s *= 2.0);
    assert!((feature_coarseness(&doubled) - got / 2.0).abs() < 1e-12);
}

/// Neighbours within Chebyshev `d` of `x` on one axis of length `side`,
/// including `x`.
fn axis_span(x: usize, side: usize, d: usize) -> usize {
    x.min(d) + (side - 1 - x).min(d) + 1
}

fn constant_ldhgle(side: usize, level: f64, d: usize) -> f64 {
    let mut sum = 0.0;
    for y in 0..side {
        for x in 0..side {
            let dep = (axis_span(x, side, d) * axis_span(y, side, d) - 1) as f64;
            sum += level * level * dep * dep;
        }
    }
    sum / (side * side) as f64
}

#[test]
fn ldhgle_and_lahgle_closed_forms() {
    let m = gldm(&constant(7, 5), 1, 0);
    assert_eq!(feature_ldhgle(&m), 25.0 * 2136.0 / 49.0);
    assert_eq!(feature_ldhgle(&m), constant_ldhgle(7, 5.0, 1));

    assert_eq!(feature_lahgle(&glszm(&constant(7, 5))), 25.0 * 49.0 * 49.0);

    let q = QuantizedWindow::new(5, (1..=25).collect());
    let expected = (1..=25).map(|i| (i * i) as f64).sum::<f64>() / 25.0;
    assert!((feature_lahgle(&glszm(&q)) - expected).abs() < 1e-12);
}

#[test]
fn manifest_layout() {
    let full = manifest(FeatureSet::Full);
    assert_eq!(full.len(), FULL_DIMS);
    assert_eq!(FULL_DIMS, 1578);
    let names: std::collections::HashSet<_> = full.iter().map(|m| m.name()).collect();
    assert_eq!(names.len(), full.len());
    let reduced = manifest(FeatureSet::Reduced);
    assert_eq!(reduced.len(), 24);
    assert_eq!(reduced[3].name(), "gray_w7_gldm_LargeDependenceHighGrayLevelEmphasis_d3_a2");
    assert_eq!(reduced[2].name(), "gray_w7_ngtdm_Coarseness_d3");
    assert_eq!(reduced_indices().len(), 24);
}

#[test]
fn reduced_on_constant_patch() {
    let img = ChannelImage::filled(30, 30, 255);
    let ch = FeatureChannels {
        gray: img.clone(),
        haem: img.clone(),
        rnascope: img,
    };
    let v = extract_reduced(&ch, &cand(3, 15));
    for (k, side) in [7usize, 11, 7, 11, 7, 11].into_iter().enumerate() {
        let ctx = &v[k * 4..k * 4 + 4];
        assert_eq!(ctx[0], (side * side) as f64 * 255.0 * 255.0);
        assert_eq!(ctx[1], 0.0);
        assert_eq!(ctx[2], COARSENESS_CAP);
        assert_eq!(ctx[3], constant_ldhgle(side, 32.0, 3));
    }
}

fn random_channels(seed: u64, w: usize, h: usize) -> FeatureChannels {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut plane = || ChannelImage::from_fn(w, h, |_, _| rng.random());
    FeatureChannels {
        gray: plane(),
        haem: plane(),
        rnascope: plane(),
    }
}

#[test]
fn reduced_matches_full_subset() {
    let ch = random_channels(1, 40, 30);
    let idx = reduced_indices();
    for c in [cand(0, 0), cand(39, 29), cand(17, 4)] {
        let full = extract_full(&ch, &c);
        let reduced = extract_reduced(&ch, &c);
        assert_eq!(extract_reduced(&ch, &c), reduced);
        for (r, &i) in reduced.iter().zip(&idx) {
            assert_eq!(r.to_bits(), full[i].to_bits());
        }
    }
}

#[test]
fn constant_windows_are_degenerate_but_finite() {
    let img = ChannelImage::filled(20, 20, 130);
    let ch = FeatureChannels {
        gray: img.clone(),
        haem: img.clone(),
        rnascope: img,
    };
    let v = extract_full(&ch, &cand(10, 10));
    assert!(v.iter().all(|x| x.is_finite()));
    let full = manifest(FeatureSet::Full);
    let get = |family: Family, feature: &str| {
        full.iter()
            .zip(&v)
            .filter(|(m, _)| m.family == family && m.feature == feature)
            .map(|(_, &x)| x)
            .collect::<Vec<_>>()
    };
    for f in ["Contrast", "DifferenceAverage", "DifferenceVariance", "Correlation", "ClusterTendency"] {
        assert!(get(Family::Glcm, f).iter().all(|&x| x == 0.0), "{f}");
    }
    for f in ["Idm", "Idmn", "Id", "Idn", "JointEnergy", "MaximumProbability"] {
        assert!(get(Family::Glcm, f).iter().all(|&x| x == 1.0), "{f}");
    }
    for f in ["Contrast", "Busyness", "Complexity", "Strength"] {
        assert!(get(Family::Ngtdm, f).iter().all(|&x| x == 0.0), "{f}");
    }
    assert!(get(Family::FirstOrder, "Variance").iter().all(|&x| x == 0.0));
    assert!(get(Family::FirstOrder, "Uniformity").iter().all(|&x| x == 1.0));
}

#[test]
fn features_are_translation_invariant() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    let base: Vec<u8> = (0..40 * 40).map(|_| rng.random()).collect();
    let shifted = |dx: usize, dy: usize| {
        ChannelImage::from_fn(60, 60, |x, y| {
            if x >= dx && y >= dy && x - dx < 40 && y - dy < 40 {
                base[(y - dy) * 40 + (x - dx)]
            } else {
                0
            }
        })
    };
    let ch = |img: ChannelImage| FeatureChannels {
        gray: img.clone(),
        haem: img.clone(),
        rnascope: img,
    };
    let a = extract_full(&ch(shifted(0, 0)), &cand(20, 20));
    let b = extract_full(&ch(shifted(13, 7)), &cand(33, 27));
    assert_eq!(a, b);
}

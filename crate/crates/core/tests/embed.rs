mod common;

use std::f64::consts::PI;

use heatlab::embed::{
    bilipschitz_report, choose_truncation, distortion_field, distortion_norm, embedding, embedding_coords,
    pullback_metric, smoothable_set, DimensionConstants, DistortionReport, Normalization,
};
use heatlab::{build_model_space, ModelKind, SpectralSpace};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn circle(p: usize, l: usize) -> SpectralSpace {
    build_model_space(ModelKind::circle(), p, l).unwrap()
}

fn interval(p: usize, l: usize) -> SpectralSpace {
    build_model_space(ModelKind::interval(), p, l).unwrap()
}

/// `(1/π) Σ_k k² e^{−2k²t}`
fn circle_series(t: f64) -> f64 {
    (1..400).map(|k| (k * k) as f64 * (-2.0 * t * (k * k) as f64).exp()).sum::<f64>() / PI
}

#[test]
fn embedding_coordinates_at_zero() {
    let s = circle(256, 10);
    let t = 0.02;
    let x = embedding_coords(&s, 0, t, 2).unwrap();
    let amp = (4.0 * (8.0 * PI).sqrt()).sqrt() * t.powf(0.75) * (-t).exp() / PI.sqrt();
    assert!((x[0] - amp).abs() < 1e-14);
    assert!(x[1].abs() < 1e-14);
}

#[test]
fn embedding_is_rotation_invariant() {
    let s = circle(256, 80);
    let l = choose_truncation(&s, 0.02, 1e-8).unwrap().l;
    let phi = embedding(&s, 0.02, l).unwrap();
    let dist = |p: usize, q: usize| {
        phi[p * l..(p + 1) * l]
            .iter()
            .zip(&phi[q * l..(q + 1) * l])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let (p, q) = (rng.random_range(0..256), rng.random_range(0..256));
        let shift = rng.random_range(0..256);
        assert!((dist(p, q) - dist((p + shift) % 256, (q + shift) % 256)).abs() < 1e-10);
    }
}

#[test]
fn truncation_examples() {
    let s = circle(256, 41);
    let tr = choose_truncation(&s, 0.05, 1e-6).unwrap();
    assert!(tr.l <= 41 && tr.tail < 1e-6);
    // direct summation on twice the cutoff
    let big = circle(256, 82);
    let scale = DimensionConstants::new(1).scale_a(0.05);
    let direct: f64 = (tr.l + 1..=82)
        .map(|i| {
            let sup = (0..256).map(|p| big.eigengradient(i, p)[0].powi(2)).fold(0.0, f64::max);
            scale * (-0.1 * big.eigenvalues()[i]).exp() * sup
        })
        .sum();
    assert!((tr.tail - direct).abs() < 0.1 * direct.max(tr.tail));
    // the first cluster {cos θ, sin θ} is kept whole
    assert_eq!(choose_truncation(&s, 0.05, 1e9).unwrap().l, 2);
    assert_eq!(choose_truncation(&interval(65, 20), 0.05, 1e9).unwrap().l, 1);
    for t in [0.02, 0.05, 0.1, 0.2] {
        assert!(choose_truncation(&s, 2.0 * t, 1e-6).unwrap().l <= choose_truncation(&s, t, 1e-6).unwrap().l);
    }
}

#[test]
fn circle_metric_matches_series() {
    let s = circle(256, 80);
    let g = pullback_metric(&s, 0.02, 80).unwrap();
    let series = circle_series(0.02);
    let scale = DimensionConstants::new(1).scale_a(0.02);
    for p in 0..256 {
        assert!((g.get(p, 0, 0) - series).abs() < 1e-9 * series);
        assert!((scale * g.get(p, 0, 0) - 1.0).abs() < 0.01);
    }
}

#[test]
fn distortion_examples() {
    let s = circle(256, 80);
    let a = distortion_field(&s, 0.02, 80, Normalization::A).unwrap();
    assert!(a.values.iter().all(|v| *v < 0.02));
    let fine = circle(4096, 80);
    let b = distortion_field(&fine, 0.02, 80, Normalization::B).unwrap();
    assert!(!b.under_resolved);
    let a = distortion_field(&fine, 0.02, 80, Normalization::A).unwrap();
    let g = pullback_metric(&fine, 0.02, 80).unwrap();
    // both rescalings of g_t agree within 3%
    let k = DimensionConstants::new(1);
    for p in (0..4096).step_by(97) {
        let sa = k.scale_a(0.02);
        let sb = (1.0 - b.values[p]) / g.get(p, 0, 0);
        assert!((sb / sa - 1.0).abs() < 0.03, "{} vs {}", sb, sa);
        assert!(a.values[p] < 0.02);
    }
    let ones = vec![1.0; 256];
    assert!((distortion_norm(&ones, 1.0, &s).unwrap() - 2.0 * PI).abs() < 1e-12);
    assert_eq!(distortion_norm(&ones, f64::INFINITY, &s).unwrap(), 1.0);
}

#[test]
fn distortion_schedule_on_circle_and_interval() {
    let c = circle(512, 120);
    let i = interval(513, 160);
    let mut l1 = Vec::new();
    for t in [0.04, 0.02, 0.01] {
        let rc = DistortionReport::compute(&c, t, 1e-8, Normalization::A, &[1.0], false).unwrap();
        let ri = DistortionReport::compute(&i, t, 1e-8, Normalization::A, &[1.0], true).unwrap();
        assert!(rc.norm(1.0).unwrap() < 0.05 && rc.linf < 0.05);
        assert!(ri.linf >= 0.99);
        assert_eq!(ri.field.as_ref().unwrap()[0], 1.0);
        l1.push(ri.norm(1.0).unwrap());
    }
    assert!(l1.windows(2).all(|w| w[1] < w[0]), "{l1:?}");
}

#[test]
fn smoothable_examples() {
    let c = circle(512, 120);
    assert_eq!(smoothable_set(&c, 0.05, 0.01, 1.0, None).unwrap().fraction, 1.0);
    let i = interval(513, 160);
    let s = smoothable_set(&i, 0.05, 0.01, 0.5, None).unwrap();
    assert!(s.fraction < 1.0);
    assert!(!s.mask[0] && !s.mask[512]);
    assert!(s.mask[256]);
    assert_eq!(smoothable_set(&i, 10.0, 0.01, 0.5, None).unwrap().fraction, 1.0);
    assert!(smoothable_set(&i, 0.05, 0.01, 0.5, Some(&[0.1, 0.2])).is_err());
}

#[test]
fn bilipschitz_profiles() {
    let c = circle(512, 200);
    let l = choose_truncation(&c, 0.01, 1e-8).unwrap().l;
    let r = bilipschitz_report(&c, 0.01, l, 0.1, 2000, 5).unwrap();
    assert!(r.local.min.ratio >= 0.95 && r.local.max.ratio <= 1.05);
    assert!(r.injectivity_proxy.unwrap() > 0.0);
    let again = bilipschitz_report(&c, 0.01, l, 0.1, 2000, 5).unwrap();
    assert_eq!(r, again);

    let i = interval(1025, 200);
    let l = choose_truncation(&i, 0.01, 1e-8).unwrap().l;
    let r = bilipschitz_report(&i, 0.01, l, 0.1, 2000, 5).unwrap();
    let w = r.local.min;
    let near = |p: usize| {
        let x = i.coords(p).unwrap()[0];
        x.min(PI - x) <= 0.05
    };
    assert!(w.ratio < 0.5 && (near(w.p) || near(w.q)));
    assert!(r.injectivity_proxy.unwrap() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn metric_is_psd_and_distortion_nonnegative(t in 0.005f64..0.5, sphere in any::<bool>()) {
        let s = if sphere {
            build_model_space(ModelKind::RoundSphere, 450, 80).unwrap()
        } else {
            interval(129, 60)
        };
        let l = s.cutoff();
        let g = pullback_metric(&s, t, l).unwrap();
        for p in 0..s.sample_count() {
            let m = g.matrix(p);
            let (tr, det) = if s.intrinsic_dim() == 1 {
                (m[0], m[0])
            } else {
                (m[0] + m[3], m[0] * m[3] - m[1] * m[2])
            };
            prop_assert!(tr >= 0.0 && det >= -1e-12 * tr * tr);
        }
        let d = distortion_field(&s, t, l, Normalization::A).unwrap();
        prop_assert!(d.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn doubling_l_moves_norms_by_less_than_two_delta(t in 0.01f64..0.2, delta_exp in 3i32..8) {
        let delta = 10f64.powi(-delta_exp);
        let s = circle(512, 200);
        let l = choose_truncation(&s, t, delta).unwrap().l;
        let l2 = (2 * l).min(200);
        let a = distortion_field(&s, t, l, Normalization::A).unwrap();
        let b = distortion_field(&s, t, l2, Normalization::A).unwrap();
        for p in [1.0, 2.0, f64::INFINITY] {
            let na = distortion_norm(&a.values, p, &s).unwrap();
            let nb = distortion_norm(&b.values, p, &s).unwrap();
            let scale = if p.is_finite() { s.total_measure().powf(1.0 / p) } else { 1.0 };
            prop_assert!((na - nb).abs() < 2.0 * delta * scale, "p={p}: {na} vs {nb}");
        }
    }
}

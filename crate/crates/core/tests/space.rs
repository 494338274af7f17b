mod common;

use std::f64::consts::PI;

use heatlab::embed::{heat_kernel, pullback_metric};
use heatlab::{build_from_mesh, build_model_space, Mesh, ModelKind, SpectralSpace};
use proptest::prelude::*;

fn circle(p: usize, l: usize) -> SpectralSpace {
    build_model_space(ModelKind::circle(), p, l).unwrap()
}

#[test]
fn circle_spectrum_and_orthonormality() {
    let s = circle(256, 41);
    let want: Vec<f64> = (0..=41).map(|i| (((i + 1) / 2) * ((i + 1) / 2)) as f64).collect();
    assert_eq!(s.eigenvalues(), &want[..]);
    assert!(s.orthonormality_residual() < 1e-10);
}

#[test]
fn interval_eigenfunction_at_endpoint() {
    let s = build_model_space(ModelKind::interval(), 257, 40).unwrap();
    assert!((s.eigenfunction(3)[0] - (2.0 / PI).sqrt()).abs() < 1e-14);
    assert_eq!(s.eigengradient(3, 0)[0].abs(), 0.0);
}

#[test]
fn round_sphere_low_spectrum() {
    let s = build_model_space(ModelKind::RoundSphere, 800, 15).unwrap();
    let mut want = vec![0.0];
    for l in 1..=3usize {
        want.extend(std::iter::repeat((l * (l + 1)) as f64).take(2 * l + 1));
    }
    assert_eq!(s.eigenvalues(), &want[..]);
    assert!(s.orthonormality_residual() < 1e-10);
}

#[test]
fn icosphere_spectrum_matches_round_sphere() {
    let s = build_from_mesh(Mesh::icosphere(4), 16).unwrap();
    assert_eq!(s.sample_count(), 2562);
    let model = build_model_space(ModelKind::RoundSphere, 800, 8).unwrap();
    let lam = s.eigenvalues();
    for i in 1..=3 {
        assert!((lam[i] / model.eigenvalues()[i] - 1.0).abs() < 0.02, "λ{i} = {}", lam[i]);
    }
    for i in 4..=8 {
        assert!((lam[i] / model.eigenvalues()[i] - 1.0).abs() < 0.05, "λ{i} = {}", lam[i]);
    }
    let phi = s.eigenfunction(1);
    let norm: f64 = phi.iter().zip(s.mass()).map(|(f, m)| m * f * f).sum();
    assert!((norm - 1.0).abs() < 1e-8);
}

#[test]
fn torus_mesh_first_eigenvalue() {
    let a = 2.0 * PI;
    let s = build_from_mesh(Mesh::flat_torus(32, 32, a, a).unwrap(), 6).unwrap();
    let analytic = (2.0 * PI / a).powi(2);
    assert!((s.eigenvalues()[1] / analytic - 1.0).abs() < 0.02);
    let norm: f64 = s.eigenfunction(1).iter().zip(s.mass()).map(|(f, m)| m * f * f).sum();
    assert!((norm - 1.0).abs() < 1e-8);
}

#[test]
fn ball_queries() {
    let s = circle(256, 4);
    let all = s.ball_query(17, PI + 0.1).unwrap();
    assert_eq!(all.ids.len(), 256);
    assert!((all.measure - 2.0 * PI).abs() < 1e-12);
    let b = s.ball_query(17, 0.1).unwrap();
    assert!((b.measure - 0.2).abs() <= 2.0 * 2.0 * PI / 256.0);
    assert!(b.distances.iter().all(|d| *d <= 0.1));

    let i = build_model_space(ModelKind::interval(), 257, 4).unwrap();
    let b = i.ball_query(0, 0.5).unwrap();
    assert!((b.measure - 0.5).abs() <= 2.0 * PI / 256.0);
}

#[test]
fn heat_kernel_oracles() {
    let s = circle(256, 60);
    for (p, q) in [(0, 0), (5, 200), (100, 31)] {
        assert!((heat_kernel(&s, p, q, 50.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-10);
    }
    let series = 1.0 / (2.0 * PI) + (1..100).map(|k| (-0.5 * (k * k) as f64).exp()).sum::<f64>() / PI;
    assert!((heat_kernel(&s, 9, 9, 0.5).unwrap() - series).abs() < 1e-12);
}

#[test]
fn stochastic_completeness() {
    let spaces = [
        circle(128, 40),
        build_model_space(ModelKind::interval(), 129, 40).unwrap(),
        build_model_space(ModelKind::RoundSphere, 450, 99).unwrap(),
        build_from_mesh(Mesh::icosphere(2), 20).unwrap(),
    ];
    for s in &spaces {
        for t in [0.05, 0.2, 1.0] {
            for p in [0, s.sample_count() / 3] {
                let total: f64 = (0..s.sample_count())
                    .map(|q| s.mass()[q] * heat_kernel(s, p, q, t).unwrap())
                    .sum();
                assert!((total - 1.0).abs() < 1e-6, "{} t={t}: {total}", s.id());
            }
        }
    }
}

#[test]
fn cluster_remix_leaves_metric_unchanged() {
    for s in [
        circle(128, 30),
        build_model_space(ModelKind::RoundSphere, 450, 48).unwrap(),
        build_model_space(ModelKind::FlatTorus { a: 2.0 * PI, b: 2.0 * PI }, 1024, 40).unwrap(),
    ] {
        let r = common::remix_clusters(&s, 3);
        assert_ne!(r.eigenfunction(1), s.eigenfunction(1));
        let g0 = pullback_metric(&s, 0.05, s.cutoff()).unwrap();
        let g1 = pullback_metric(&r, 0.05, s.cutoff()).unwrap();
        for p in 0..s.sample_count() {
            assert!(common::max_rel_diff(g0.packed(p), g1.packed(p)) < 1e-12);
        }
    }
}

#[test]
fn document_round_trip_through_disk() {
    let s = build_from_mesh(Mesh::icosphere(1), 6).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("space.json");
    s.save_json(&path).unwrap();
    let r = SpectralSpace::load_json(&path).unwrap();
    assert_eq!(r.eigenvalues(), s.eigenvalues());
    assert_eq!(r.distance(3, 40), s.distance(3, 40));
}

#[test]
fn icosphere_refinement_approaches_sphere_spectrum() {
    let exact = [2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0, 6.0];
    let errors: Vec<f64> = (2..=4)
        .map(|level| {
            let s = build_from_mesh(Mesh::icosphere(level), 9).unwrap();
            (1..=8)
                .map(|i| (s.eigenvalues()[i] / exact[i - 1] - 1.0).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errors.windows(2) {
        // the tolerance halves per level; second-order convergence gives a quarter
        assert!(w[1] < 0.5 * w[0], "{errors:?}");
    }
}

fn model_kinds() -> impl Strategy<Value = (ModelKind, usize)> {
    prop_oneof![
        (0.5f64..2.0).prop_map(|r| (ModelKind::Circle { radius: r }, 128)),
        (1.0f64..4.0).prop_map(|l| (ModelKind::Interval { length: l }, 129)),
        (3.0f64..7.0, 3.0f64..7.0).prop_map(|(a, b)| (ModelKind::FlatTorus { a, b }, 1024)),
        Just((ModelKind::RoundSphere, 450)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn truncated_kernel_within_tail_bound((kind, p) in model_kinds(), t in 0.05f64..0.5, a in 0usize..100, b in 0usize..100) {
        let big = build_model_space(kind.clone(), p, 80).unwrap();
        let small = build_model_space(kind, p, 40).unwrap();
        let (x, y) = (a * p / 100, b * p / 100);
        let full = heat_kernel(&big, x, y, t).unwrap();
        let cut = heat_kernel(&small, x, y, t).unwrap();
        let tail: f64 = (41..=80)
            .map(|i| {
                let sup = big.eigenfunction(i).iter().fold(0.0f64, |m, v| m.max(v.abs()));
                (-big.eigenvalues()[i] * t).exp() * sup * sup
            })
            .sum();
        prop_assert!((full - cut).abs() <= tail * (1.0 + 1e-9) + 1e-14);
    }

    #[test]
    fn weyl_lower_bound((kind, p) in model_kinds()) {
        let s = build_model_space(kind, p, 60).unwrap();
        let m = s.intrinsic_dim() as f64;
        // fitted constant from the tail of the stored spectrum
        let c = (30..=60).map(|i| (i as f64).powf(2.0 / m) / s.eigenvalues()[i]).fold(0.0, f64::max);
        for i in 1..=60 {
            prop_assert!(s.eigenvalues()[i] >= (i as f64).powf(2.0 / m) / (4.0 * c));
        }
    }

    #[test]
    fn stored_gradients_match_finite_differences((kind, p) in model_kinds(), i in 1usize..12) {
        let s = build_model_space(kind, p, 12).unwrap();
        let fd = s.discrete_gradient(s.eigenfunction(i));
        let m = s.intrinsic_dim();
        let h = s.spacing();
        let lam = s.eigenvalues()[i];
        let mut worst: f64 = 0.0;
        for q in 0..s.sample_count() {
            for a in 0..m {
                worst = worst.max((fd[q * m + a] - s.eigengradient(i, q)[a]).abs());
            }
        }
        let sup = s.eigenfunction(i).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        // centered differences: error ≲ h² |φ'''| ~ h² λ^{3/2} sup|φ|
        prop_assert!(worst <= 2.0 * h * h * lam.powf(1.5) * sup + 1e-9, "worst {worst}");
    }
}

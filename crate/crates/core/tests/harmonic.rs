use std::f64::consts::PI;

use heatlab::harmonic::{
    eigenmap, el_residual, harmonic_flow, sphere_energy, takahashi_check, FlowOptions, SphereMap, TakahashiOptions,
};
use heatlab::{build_from_mesh, build_model_space, Mesh, ModelKind, SpectralSpace};
use nalgebra::{DMatrix, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn sphere_mesh(level: usize) -> SpectralSpace {
    build_from_mesh(Mesh::relaxed_icosphere(level), 16).unwrap()
}

fn noisy_cover(s: &SpectralSpace, degree: i32, amplitude: f64, seed: u64) -> SphereMap<'_> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..s.sample_count())
        .flat_map(|p| {
            let th = degree as f64 * s.coords(p).unwrap()[0];
            let xi: f64 = rng.sample(StandardNormal);
            [th.cos() - amplitude * xi * th.sin(), th.sin() + amplitude * xi * th.cos()]
        })
        .collect();
    SphereMap::new(s, 1, values).unwrap()
}

#[test]
fn position_on_meshed_sphere() {
    let s = sphere_mesh(3);
    let f = SphereMap::position(&s).unwrap();
    let e = sphere_energy(&f);
    assert!(e.density.iter().all(|d| (d - 2.0).abs() < 1e-9));
    assert!((e.total / (4.0 * PI) - 1.0).abs() < 0.01, "{}", e.total);
}

#[test]
fn residual_shrinks_under_refinement() {
    let norms: Vec<f64> = (2..=4)
        .map(|level| {
            let s = sphere_mesh(level);
            el_residual(&SphereMap::position(&s).unwrap()).norm
        })
        .collect();
    assert!(norms[1] < norms[0] && norms[2] < norms[1], "{norms:?}");

    let s = sphere_mesh(2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let values = (0..3 * s.sample_count()).map(|_| rng.sample(StandardNormal)).collect();
    let random = SphereMap::new(&s, 2, values).unwrap();
    assert!(el_residual(&random).norm > 10.0 * norms[0]);
}

#[test]
fn energy_gradient_matches_laplacian() {
    let s = sphere_mesh(2);
    let n = s.sample_count();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let energy = |u: &[Vec<f64>]| -> f64 {
        0.5 * u
            .iter()
            .map(|c| s.dirichlet_density(c).iter().zip(s.mass()).map(|(d, m)| d * m).sum::<f64>())
            .sum::<f64>()
    };
    for _ in 0..16 {
        let psi: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let h = 1e-4;
        let shifted = |sign: f64| -> Vec<Vec<f64>> {
            u.iter().zip(&psi).map(|(c, d)| c.iter().zip(d).map(|(a, b)| a + sign * h * b).collect()).collect()
        };
        let fd = (energy(&shifted(1.0)) - energy(&shifted(-1.0))) / (2.0 * h);
        let exact: f64 = u
            .iter()
            .zip(&psi)
            .map(|(c, d)| -s.laplacian(c).iter().zip(d).zip(s.mass()).map(|((l, p), m)| l * p * m).sum::<f64>())
            .sum();
        assert!((fd - exact).abs() <= 1e-5 * exact.abs(), "{fd} vs {exact}");
    }
}

#[test]
fn degree_two_flow_returns_to_four_pi() {
    let s = build_model_space(ModelKind::circle(), 33, 32).unwrap();
    let f0 = noisy_cover(&s, 2, 0.05, 2);
    let out = harmonic_flow(&f0, FlowOptions::default()).unwrap();
    assert!(out.converged);
    assert!((out.trace.last().unwrap().energy / (4.0 * PI) - 1.0).abs() < 0.01);
    for p in 0..s.sample_count() {
        let r = out.map.row(p);
        assert!((r[0] * r[0] + r[1] * r[1] - 1.0).abs() < 1e-12);
    }
    assert!(out.trace.windows(2).all(|w| w[1].energy <= w[0].energy));
}

#[test]
fn step_outside_stable_range_is_rejected() {
    let s = build_model_space(ModelKind::circle(), 33, 32).unwrap();
    let f0 = noisy_cover(&s, 1, 0.05, 1);
    let bound = heatlab::harmonic::flow_spectral_bound(&s);
    let opts = FlowOptions {
        eta: Some(2.5 / bound),
        ..FlowOptions::default()
    };
    assert!(harmonic_flow(&f0, opts).is_err());
}

#[test]
fn meshed_eigenmap_is_a_rotated_position() {
    let s = sphere_mesh(3);
    let e = eigenmap(&s, 2.0, 2, 0.1).unwrap();
    assert!((e.eigenvalue - 2.0).abs() < 0.05);
    // orthogonal Procrustes: best Q with f·Q ≈ x
    let n = s.sample_count();
    let f = DMatrix::from_row_slice(n, 3, e.map.values());
    let x = DMatrix::from_row_slice(n, 3, SphereMap::position(&s).unwrap().values());
    let svd = (f.transpose() * &x).svd(true, true);
    let q = svd.u.unwrap() * svd.v_t.unwrap();
    let q3 = Matrix3::from_iterator(q.iter().copied());
    assert!((q3.transpose() * q3 - Matrix3::identity()).norm() < 1e-10);
    let worst = (0..n)
        .map(|p| (f.row(p) * &q - x.row(p)).norm())
        .fold(0.0, f64::max);
    assert!(worst < 0.05, "{worst}");
}

#[test]
fn takahashi_examples() {
    let schedule = [0.1, 0.05];
    let circle = build_model_space(ModelKind::circle(), 256, 40).unwrap();
    let opts = TakahashiOptions::for_space(&circle);
    let one = takahashi_check(&SphereMap::circle_power(&circle, 1).unwrap(), &schedule, &opts).unwrap();
    assert!(one.pass && one.converse_consistent);
    let (lo, hi) = one.local_bilipschitz;
    assert!(lo > 0.99 && hi < 1.01);
    let two = takahashi_check(&SphereMap::circle_power(&circle, 2).unwrap(), &schedule, &opts).unwrap();
    assert!(!two.pass);
    assert!(two.violated.iter().any(|v| v == "eigen"));
    assert!(two.violated.iter().any(|v| v == "isometry"));
    assert!((two.fitted_eigenvalue - 4.0).abs() < 1e-8);

    // composed target functions are differentiated on the grid, which must be fine
    let sphere = build_model_space(ModelKind::RoundSphere, 20_000, 8).unwrap();
    let r = takahashi_check(
        &SphereMap::position(&sphere).unwrap(),
        &schedule,
        &TakahashiOptions::for_space(&sphere),
    )
    .unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn flow_output_is_consistent_with_takahashi() {
    // a full basis leaves no grid frequencies outside the Laplacian's reach
    let s = build_model_space(ModelKind::circle(), 65, 64).unwrap();
    let flow = FlowOptions {
        max_steps: 50_000,
        ..FlowOptions::default()
    };
    let out = harmonic_flow(&noisy_cover(&s, 1, 0.05, 9), flow).unwrap();
    assert!(out.converged);
    let final_energy = sphere_energy(&out.map).total;
    assert!((out.trace.last().unwrap().energy - final_energy).abs() < 1e-12 * final_energy);
    let mut opts = TakahashiOptions::for_space(&s);
    opts.rho = 0.3;
    opts.eigen_tol = 1e-5;
    opts.density_tol = 1e-5;
    let r = takahashi_check(&out.map, &[0.2, 0.1], &opts).unwrap();
    assert!(r.converse_consistent, "{r:?}");
    assert_eq!(r.pass, r.violated.is_empty());
}

#![allow(dead_code)]

use heatlab::SpectralSpace;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Random orthogonal `k x k` matrix (QR of a Gaussian matrix).
pub fn random_orthogonal(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(k, k, |_, _| StandardNormal.sample(rng));
    g.qr().q()
}

/// Copy of `space` whose eigenfunctions and gradients are mixed by a random
/// orthogonal matrix inside every multiplicity cluster, through the JSON
/// document.
pub fn remix_clusters(space: &SpectralSpace, seed: u64) -> SpectralSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut doc = space.to_document();
    let p = space.sample_count();
    let m = space.intrinsic_dim();
    for cluster in space.clusters() {
        if cluster.len() < 2 {
            continue;
        }
        let q = random_orthogonal(cluster.len(), &mut rng);
        let phi: Vec<Vec<f64>> = cluster.clone().map(|i| doc.eigenfunctions[i * p..(i + 1) * p].to_vec()).collect();
        let grad: Vec<Vec<f64>> = cluster
            .clone()
            .map(|i| doc.gradients[i * p * m..(i + 1) * p * m].to_vec())
            .collect();
        for (a, i) in cluster.clone().enumerate() {
            for s in 0..p {
                doc.eigenfunctions[i * p + s] = (0..cluster.len()).map(|b| q[(a, b)] * phi[b][s]).sum();
            }
            for s in 0..p * m {
                doc.gradients[i * p * m + s] = (0..cluster.len()).map(|b| q[(a, b)] * grad[b][s]).sum();
            }
        }
    }
    SpectralSpace::from_document(doc).expect("remixed document")
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

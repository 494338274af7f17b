//! Projected gradient flow from a perturbed circle identity back to energy π.

use heatlab::harmonic::{harmonic_flow, FlowOptions, SphereMap};
use heatlab::{build_model_space, ModelKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> heatlab::Result<()> {
    let s = build_model_space(ModelKind::circle(), 33, 32)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let values = (0..s.sample_count())
        .flat_map(|p| {
            let th = s.coords(p).unwrap()[0];
            let xi: f64 = rng.sample(StandardNormal);
            [th.cos() - 0.05 * xi * th.sin(), th.sin() + 0.05 * xi * th.cos()]
        })
        .collect();
    let out = harmonic_flow(&SphereMap::new(&s, 1, values)?, FlowOptions::default())?;
    for step in out.trace.iter().step_by(500).chain(out.trace.last()) {
        println!("{:>5} energy {:.9} residual {:.3e}", step.step, step.energy, step.residual);
    }
    println!("converged: {}", out.converged);
    Ok(())
}

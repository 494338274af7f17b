//! Normalized t-energies of circle covers approach π k².

use std::f64::consts::PI;

use heatlab::maps::{normalized_energy, AnalyticMap, PointMap};
use heatlab::{build_model_space, ModelKind};

fn main() -> heatlab::Result<()> {
    let s = build_model_space(ModelKind::circle(), 512, 160)?;
    for k in 1..=3 {
        let f = PointMap::analytic(&s, &s, AnalyticMap::CircleCover { degree: k })?;
        let e = normalized_energy(&f, &[0.04, 0.02, 0.01], 1e-8)?;
        let along: Vec<String> = e.entries.iter().map(|x| format!("{:.5}", x.a)).collect();
        println!(
            "degree {k}: {} -> {:.5} (π k² = {:.5})",
            along.join(", "),
            e.extrapolated_a,
            PI * (k * k) as f64
        );
    }
    Ok(())
}

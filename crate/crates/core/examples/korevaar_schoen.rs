//! The normalized t-energy is (n+2)/2 times the Korevaar-Schoen energy.

use heatlab::ks::ks_compare;
use heatlab::maps::{AnalyticMap, PointMap};
use heatlab::{build_model_space, ModelKind};

fn main() -> heatlab::Result<()> {
    let source = build_model_space(ModelKind::circle(), 4096, 4)?;
    let target = build_model_space(ModelKind::circle(), 256, 120)?;
    for k in [1, 2] {
        let f = PointMap::analytic(&source, &target, AnalyticMap::CircleCover { degree: k })?;
        let r = ks_compare(&f, &[0.04, 0.02, 0.01], &[0.2, 0.15, 0.1], 1e-8, 0.05, false)?;
        println!(
            "degree {k}: t-energy {:.5}, ks {:.5}, ratio {:.4} (expected {}), density gap {:.2e}",
            r.energy.extrapolated_a, r.ks_extrapolated, r.ratio, r.expected_ratio, r.density_gap
        );
    }
    Ok(())
}

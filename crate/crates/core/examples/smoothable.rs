//! Mass fraction of samples where ball averages of the distortion stay small.

use heatlab::embed::smoothable_set;
use heatlab::{build_model_space, ModelKind};

fn main() -> heatlab::Result<()> {
    let s = build_model_space(ModelKind::interval(), 1025, 200)?;
    for t in [0.04, 0.01, 0.0025] {
        let set = smoothable_set(&s, 0.1, t, 0.2, None)?;
        let first = set.mask.iter().position(|&m| m).unwrap_or(set.mask.len());
        println!(
            "t={t:<6} fraction={:.4} first marked x={:.4}",
            set.fraction,
            s.coords(first).map_or(f64::NAN, |c| c[0])
        );
    }
    Ok(())
}

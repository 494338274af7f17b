//! Truncation levels and the normalized embedding of the circle.

use heatlab::embed::{choose_truncation, embedding_coords, pullback_metric, DimensionConstants};
use heatlab::{build_model_space, ModelKind};

fn main() -> heatlab::Result<()> {
    let s = build_model_space(ModelKind::circle(), 256, 120)?;
    for t in [0.1, 0.04, 0.01] {
        let trunc = choose_truncation(&s, t, 1e-8)?;
        let g = pullback_metric(&s, t, trunc.l)?;
        let scale = DimensionConstants::new(1).scale_a(t);
        let phi = embedding_coords(&s, 0, t, trunc.l)?;
        let norm: f64 = phi.iter().map(|x| x * x).sum::<f64>().sqrt();
        println!(
            "t={t:<5} l={:<3} tail={:.1e} c t^1.5 g_t={:.9} |Φ(x0)|={norm:.5}",
            trunc.l,
            trunc.tail,
            scale * g.trace(0)
        );
    }
    Ok(())
}

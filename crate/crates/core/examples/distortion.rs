//! Circle against interval: the boundary keeps the sup distortion at 1.

use heatlab::embed::{DistortionReport, Normalization};
use heatlab::{build_model_space, ModelKind};

fn main() -> heatlab::Result<()> {
    let circle = build_model_space(ModelKind::circle(), 512, 200)?;
    let interval = build_model_space(ModelKind::interval(), 1025, 200)?;
    println!("{:>6} {:>12} {:>12} {:>12}", "t", "circle Linf", "interval L1", "interval Linf");
    for t in [0.04, 0.02, 0.01, 0.005] {
        let c = DistortionReport::compute(&circle, t, 1e-8, Normalization::A, &[1.0], false)?;
        let i = DistortionReport::compute(&interval, t, 1e-8, Normalization::A, &[1.0], false)?;
        println!("{t:>6} {:>12.3e} {:>12.5} {:>12.5}", c.linf, i.norm(1.0).unwrap(), i.linf);
    }
    Ok(())
}

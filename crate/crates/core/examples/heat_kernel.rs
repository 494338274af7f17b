//! Truncated heat kernel on the circle against the method-of-images sum.

use std::f64::consts::PI;

use heatlab::embed::heat_kernel;
use heatlab::{build_model_space, ModelKind};

fn images(d: f64, t: f64) -> f64 {
    (-20..=20)
        .map(|k| {
            let x = d + 2.0 * PI * k as f64;
            (-x * x / (4.0 * t)).exp()
        })
        .sum::<f64>()
        / (4.0 * PI * t).sqrt()
}

fn main() -> heatlab::Result<()> {
    let s = build_model_space(ModelKind::circle(), 256, 120)?;
    println!("{:>6} {:>6} {:>14} {:>14}", "t", "d", "spectral", "images");
    for t in [0.1, 0.02, 0.005] {
        for q in [0, 16, 64, 128] {
            let d = s.distance(0, q);
            println!("{t:>6} {d:>6.3} {:>14.8} {:>14.8}", heat_kernel(&s, 0, q, t)?, images(d, t));
        }
    }
    Ok(())
}

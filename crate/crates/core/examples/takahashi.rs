//! Position on meshed spheres passes; a degree-2 circle map does not.

use heatlab::harmonic::{takahashi_check, SphereMap, TakahashiOptions};
use heatlab::{build_from_mesh, build_model_space, Mesh, ModelKind};

fn main() -> heatlab::Result<()> {
    let schedule = [0.1, 0.05];
    for level in [2, 3, 4] {
        let s = build_from_mesh(Mesh::relaxed_icosphere(level), 16)?;
        let r = takahashi_check(&SphereMap::position(&s)?, &schedule, &TakahashiOptions::for_space(&s))?;
        println!(
            "icosphere {level}: residual {:.3e} isometry {:.3e} density [{:.4}, {:.4}] pass {}",
            r.eigen_residual, r.isometry_error, r.density_min, r.density_max, r.pass
        );
    }
    let circle = build_model_space(ModelKind::circle(), 256, 40)?;
    let two = SphereMap::circle_power(&circle, 2)?;
    let r = takahashi_check(&two, &schedule, &TakahashiOptions::for_space(&circle))?;
    println!("circle degree 2: fitted eigenvalue {:.4}, violated {:?}", r.fitted_eigenvalue, r.violated);
    Ok(())
}

//! Eigenvalues of the model spaces and of a meshed sphere, side by side.

use heatlab::{build_from_mesh, build_model_space, Mesh, ModelKind};

fn main() -> heatlab::Result<()> {
    let spaces = [
        build_model_space(ModelKind::circle(), 256, 12)?,
        build_model_space(ModelKind::interval(), 257, 12)?,
        build_model_space(ModelKind::RoundSphere, 450, 15)?,
        build_from_mesh(Mesh::relaxed_icosphere(3), 15)?,
    ];
    for s in &spaces {
        let clusters: Vec<String> = s
            .clusters()
            .iter()
            .map(|c| format!("{:.4}x{}", s.eigenvalues()[c.start], c.len()))
            .collect();
        println!("{:<28} {}", s.id(), clusters.join(" "));
    }
    Ok(())
}

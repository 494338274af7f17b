//! Write a torus mesh as OFF, read it back and save the spectral space as JSON.

use heatlab::{build_from_mesh, Mesh, SpectralSpace};

fn main() -> heatlab::Result<()> {
    let dir = std::env::temp_dir().join("heatlab-mesh-io");
    std::fs::create_dir_all(&dir)?;
    let torus = Mesh::flat_torus(24, 24, 1.0, 1.0)?;
    let off = dir.join("torus.off");
    std::fs::write(&off, torus.to_off_string())?;
    let back = Mesh::read(&off)?;
    println!("{} vertices, {} triangles", back.vertex_count(), back.triangles.len());

    let space = build_from_mesh(torus, 8)?;
    let json = dir.join("torus.json");
    space.save_json(&json)?;
    let loaded = SpectralSpace::load_json(&json)?;
    println!("eigenvalues {:?}", &loaded.eigenvalues()[..5]);
    println!("written to {}", dir.display());
    Ok(())
}

//! Regenerates the literal JSON fixtures under `configs/fixtures/`.
//!
//! Usage: `cargo run -p holonomy-cli --example gen_fixtures` from the
//! workspace root. Fixtures are checked in so nothing downstream depends on
//! the generator's PRNG.

use holonomy_core::geometry::{ConeSurface, Surface};
use holonomy_core::io::{GridSurfaceJson, PathJson};
use holonomy_core::states::{
    project, random_orbit_loop, DensityMatrix, Frame, OrbitCurve, OrbitPath, SpectralWeights,
};

fn main() {
    let dir = std::path::Path::new("configs/fixtures");
    std::fs::create_dir_all(dir).unwrap();
    let weights = SpectralWeights::new(vec![0.7, 0.3]).unwrap();

    // sampled random loop, matching the seed of random_loop_n3k2.json
    let curve = random_orbit_loop(&weights, 3, 3, 7).unwrap();
    let path = curve.sample(64);
    write(dir, "loop_n3k2_seed7_s64.json", &PathJson::from_path(&path));

    // the cone over the same loop as a dense grid; 17 = 64/4 + 1 keeps the
    // grid boundary on the path samples exactly
    let (nu, nv) = (17usize, 17usize);
    let cone = ConeSurface::new(&curve);
    let mut rho = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (u, v) = (i as f64 / (nu - 1) as f64, j as f64 / (nv - 1) as f64);
            rho.push(holonomy_core::io::matrix_to_pairs(cone.density(u, v).matrix()));
        }
    }
    write(
        dir,
        "cone_grid_n3k2_seed7.json",
        &GridSurfaceJson {
            nu,
            nv,
            n: 3,
            k: 2,
            weights: weights.values().to_vec(),
            rho,
        },
    );

    // constant loop: all phases vanish
    let rho0 = project(&Frame::canonical(3, 2), &weights).unwrap();
    let samples: Vec<(f64, DensityMatrix)> =
        (0..=16).map(|i| (i as f64 / 16.0, rho0.clone())).collect();
    let constant = OrbitPath::new(weights, samples, true).unwrap();
    write(dir, "constant_n3k2.json", &PathJson::from_path(&constant));

    println!("fixtures written to {}", dir.display());
}

fn write<T: serde::Serialize>(dir: &std::path::Path, name: &str, value: &T) {
    let path = dir.join(name);
    let mut text = serde_json::to_string(value).unwrap();
    text.push('\n');
    std::fs::write(&path, text).unwrap();
    println!("  {}", path.display());
}

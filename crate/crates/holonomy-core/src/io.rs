//! JSON schemas for paths, grid surfaces, and matrices, plus float
//! formatting for CSV output.
//!
//! Complex numbers serialize as two-element `[re, im]` arrays and matrices
//! as row-major arrays of those pairs. A discretized path is
//! `{"n":…, "k":…, "weights":[…], "samples":[{"s":…, "rho":[[re,im],…]},…]}`;
//! a dense surface grid is
//! `{"nu":…, "nv":…, "n":…, "k":…, "weights":[…], "rho":[[[re,im],…],…]}`
//! with the `nu·nv` matrices stored u-major (index `i·nv + j`).

use serde::{Deserialize, Serialize};

use crate::algebra::{CMatrix, C64};
use crate::error::{Error, Result};
use crate::geometry::GridSurface;
use crate::states::{DensityMatrix, OrbitPath, SpectralWeights, CLOSURE_TOL};

/// Row-major `[re, im]` pairs of a matrix.
pub fn matrix_to_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push([m[(r, c)].re, m[(r, c)].im]);
        }
    }
    out
}

pub fn pairs_to_matrix(rows: usize, cols: usize, pairs: &[[f64; 2]]) -> Result<CMatrix> {
    if pairs.len() != rows * cols {
        return Err(Error::Validation(format!(
            "matrix needs {rows}×{cols} = {} entries, got {}",
            rows * cols,
            pairs.len()
        )));
    }
    Ok(CMatrix::from_fn(rows, cols, |r, c| {
        let [re, im] = pairs[r * cols + c];
        C64::new(re, im)
    }))
}

/// Floats printed with 17 significant digits round-trip exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSampleJson {
    pub s: f64,
    pub rho: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathJson {
    pub n: usize,
    pub k: usize,
    pub weights: Vec<f64>,
    pub samples: Vec<PathSampleJson>,
}

impl PathJson {
    pub fn from_path(path: &OrbitPath) -> Self {
        Self {
            n: path.n(),
            k: path.k(),
            weights: path.weights.values().to_vec(),
            samples: path
                .samples
                .iter()
                .map(|(s, rho)| PathSampleJson {
                    s: *s,
                    rho: matrix_to_pairs(rho.matrix()),
                })
                .collect(),
        }
    }

    /// Validates every sample as a density matrix; the path is flagged
    /// closed when its endpoints coincide.
    pub fn to_path(&self) -> Result<OrbitPath> {
        let weights = SpectralWeights::new(self.weights.clone())?;
        if weights.k() != self.k {
            return Err(Error::Validation(format!(
                "weights: {} entries but k = {}",
                weights.k(),
                self.k
            )));
        }
        let mut samples = Vec::with_capacity(self.samples.len());
        for sample in &self.samples {
            let m = pairs_to_matrix(self.n, self.n, &sample.rho)?;
            samples.push((sample.s, DensityMatrix::new(m)?));
        }
        let closed = samples.len() >= 2
            && samples[0].1.distance(&samples[samples.len() - 1].1) <= CLOSURE_TOL;
        OrbitPath::new(weights, samples, closed)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSurfaceJson {
    pub nu: usize,
    pub nv: usize,
    pub n: usize,
    pub k: usize,
    pub weights: Vec<f64>,
    /// `nu·nv` matrices, u-major: entry `i·nv + j` sits at
    /// `(u, v) = (i/(nu−1), j/(nv−1))`.
    pub rho: Vec<Vec<[f64; 2]>>,
}

impl GridSurfaceJson {
    pub fn to_surface(&self) -> Result<GridSurface> {
        let weights = SpectralWeights::new(self.weights.clone())?;
        if self.rho.len() != self.nu * self.nv {
            return Err(Error::Validation(format!(
                "surface grid needs {}×{} = {} matrices, got {}",
                self.nu,
                self.nv,
                self.nu * self.nv,
                self.rho.len()
            )));
        }
        let mut data = Vec::with_capacity(self.rho.len());
        for pairs in &self.rho {
            data.push(DensityMatrix::new(pairs_to_matrix(self.n, self.n, pairs)?)?);
        }
        GridSurface::new(self.nu, self.nv, weights, data)
    }

    pub fn from_surface(grid: &GridSurface, n: usize) -> Self {
        Self {
            nu: grid.nu,
            nv: grid.nv,
            n,
            k: grid.weights.k(),
            weights: grid.weights.values().to_vec(),
            rho: grid.data.iter().map(|d| matrix_to_pairs(d.matrix())).collect(),
        }
    }
}

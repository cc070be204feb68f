//! Scenario configuration: JSON in, validated curve/surface builders out.

use serde::{Deserialize, Serialize};

use holonomy_core::error::{Error, Result};
use holonomy_core::fixtures::{BlochCircleLoop, GeodesicArc};
use holonomy_core::geometry::{GridSurface, QuadratureOptions};
use holonomy_core::io::{pairs_to_matrix, GridSurfaceJson, PathJson};
use holonomy_core::rng::SplitMix64;
use holonomy_core::states::{
    random_orbit_loop, project, ExponentialLoop, Frame, OrbitCurve, OrbitPath, OrbitPoint,
    SpectralWeights,
};
use holonomy_core::transport::{HamiltonianLoop, PhaseOptions};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub id: Option<String>,
    pub n: usize,
    pub k: usize,
    pub weights: Vec<f64>,
    pub curve: CurveSpec,
    #[serde(default)]
    pub surface: SurfaceSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Base step count for lifts; refinement may double it.
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Vertex spread for generated triangles (`npc --triangle`).
    #[serde(default)]
    pub triangle_scale: Option<f64>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    /// Bloch circle at polar angle θ (n = 2, k ∈ {1, 2}).
    BlochCircle { theta: f64 },
    /// Random closed loop from sine-enveloped traceless generators.
    RandomLoop { modes: usize },
    /// Cyclic Hamiltonian evolution; the matrix is row-major `[re, im]`
    /// pairs and must commute with `ρ₀` after time `t`.
    Hamiltonian { matrix: Vec<[f64; 2]>, t: f64 },
    /// Seeded pure-state geodesic arc (k = 1), an NPC fixture.
    Geodesic,
    /// Seeded arc into an orthogonal state (k = 1): fails class I.
    OrthogonalPair,
    /// Literal samples from a path JSON file.
    SamplesFile { path: String },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", untagged)]
pub enum SurfaceSpec {
    #[default]
    #[serde(skip)]
    Unset,
    Named(NamedSurface),
    File {
        file: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedSurface {
    None,
    Cone,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_phase_tol")]
    pub phase_tol: f64,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default = "default_orbit_tol")]
    pub orbit_tol: f64,
}

fn default_phase_tol() -> f64 {
    1e-6
}
fn default_quad_tol() -> f64 {
    1e-6
}
fn default_orbit_tol() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            phase_tol: default_phase_tol(),
            quad_tol: default_quad_tol(),
            orbit_tol: default_orbit_tol(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Polar angle of a Bloch circle.
    Theta,
    /// Leading weight of a k = 2 orbit (the second is 1 − κ₁).
    Kappa1,
}

/// A built curve, either with its generating unitary family or as bare
/// samples.
pub enum BuiltCurve {
    Exponential(ExponentialLoop),
    Bloch(BlochCircleLoop),
    Hamiltonian(HamiltonianLoop),
    Geodesic(GeodesicArc),
    Sampled(OrbitPath),
}

impl BuiltCurve {
    pub fn as_curve(&self) -> Option<&dyn OrbitCurve> {
        match self {
            BuiltCurve::Exponential(c) => Some(c),
            BuiltCurve::Bloch(c) => Some(c),
            BuiltCurve::Hamiltonian(c) => Some(c),
            BuiltCurve::Geodesic(c) => Some(c),
            BuiltCurve::Sampled(_) => None,
        }
    }

    pub fn sample(&self, steps: usize) -> OrbitPath {
        match self {
            BuiltCurve::Sampled(path) => path.clone(),
            other => other.as_curve().unwrap().sample(steps),
        }
    }

    pub fn closed(&self) -> bool {
        match self {
            BuiltCurve::Sampled(path) => path.closed,
            other => other.as_curve().unwrap().closed(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
        let config: ScenarioConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.k {
            return Err(Error::Validation(format!(
                "weights: expected {} entries, got {}",
                self.k,
                self.weights.len()
            )));
        }
        SpectralWeights::new(self.weights.clone())
            .map_err(|e| Error::Validation(format!("weights: {e}")))?;
        if self.k >= self.n && !matches!(self.curve, CurveSpec::RandomLoop { .. }) {
            // full-rank loops are only supported through the generator route
            if self.k > self.n {
                return Err(Error::Validation(format!(
                    "k = {} exceeds n = {}",
                    self.k, self.n
                )));
            }
        }
        let t = &self.tolerances;
        if t.phase_tol <= 0.0 || t.quad_tol <= 0.0 || t.orbit_tol <= 0.0 {
            return Err(Error::Validation("tolerances must be positive".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.param == SweepParam::Kappa1 && self.k != 2 {
                return Err(Error::Validation("sweep: kappa1 needs k = 2".into()));
            }
        }
        match &self.curve {
            CurveSpec::BlochCircle { .. } if self.n != 2 => {
                Err(Error::Validation("bloch_circle needs n = 2".into()))
            }
            CurveSpec::Geodesic | CurveSpec::OrthogonalPair if self.k != 1 => {
                Err(Error::Validation("geodesic fixtures need k = 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn weights(&self) -> SpectralWeights {
        SpectralWeights::new(self.weights.clone()).expect("validated")
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn phase_options(&self) -> PhaseOptions {
        PhaseOptions {
            phase_tol: self.tolerances.phase_tol,
            initial_steps: self.steps.unwrap_or(2048),
            ..Default::default()
        }
    }

    pub fn quad_options(&self) -> QuadratureOptions {
        QuadratureOptions {
            quad_tol: self.tolerances.quad_tol,
            ..Default::default()
        }
    }

    pub fn build_curve(&self) -> Result<BuiltCurve> {
        let weights = self.weights();
        match &self.curve {
            CurveSpec::BlochCircle { theta } => {
                Ok(BuiltCurve::Bloch(BlochCircleLoop::new(*theta, weights)?))
            }
            CurveSpec::RandomLoop { modes } => Ok(BuiltCurve::Exponential(random_orbit_loop(
                &weights,
                self.n,
                *modes,
                self.seed(),
            )?)),
            CurveSpec::Hamiltonian { matrix, t } => {
                let h = pairs_to_matrix(self.n, self.n, matrix)?;
                let rho0 = project(&Frame::canonical(self.n, self.k), &weights)?;
                let point = OrbitPoint::new(rho0, weights)?;
                Ok(BuiltCurve::Hamiltonian(HamiltonianLoop::new(h, point, *t)?))
            }
            CurveSpec::Geodesic => {
                let mut rng = SplitMix64::new(self.seed());
                let a = rng.complex_vector(self.n);
                let b = rng.complex_vector(self.n);
                Ok(BuiltCurve::Geodesic(GeodesicArc::new(&a, &b)?))
            }
            CurveSpec::OrthogonalPair => {
                let mut rng = SplitMix64::new(self.seed());
                let a = rng.complex_vector(self.n);
                let raw = rng.complex_vector(self.n);
                let ov = a.dotc(&raw) / holonomy_core::algebra::C64::new(a.norm_squared(), 0.0);
                let perp = &raw - &a * ov;
                Ok(BuiltCurve::Geodesic(GeodesicArc::orthogonal(
                    &(&a / holonomy_core::algebra::C64::new(a.norm(), 0.0)),
                    &(&perp / holonomy_core::algebra::C64::new(perp.norm(), 0.0)),
                )?))
            }
            CurveSpec::SamplesFile { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Validation(format!("cannot read {path}: {e}")))?;
                let json: PathJson = serde_json::from_str(&text)?;
                let parsed = json.to_path()?;
                // check the samples sit on the configured orbit
                let tol = self.tolerances.orbit_tol;
                for (s, rho) in &parsed.samples {
                    let (_, w) = holonomy_core::states::spectral_frame(rho, self.k)
                        .map_err(|e| Error::Validation(format!("sample at s={s}: {e}")))?;
                    if !w.close_to(&self.weights(), tol) {
                        return Err(Error::NotOnOrbit(format!(
                            "sample at s={s} has spectrum {:?}",
                            w.values()
                        )));
                    }
                }
                Ok(BuiltCurve::Sampled(parsed))
            }
        }
    }

    pub fn load_grid_surface(&self, file: &str) -> Result<GridSurface> {
        let text = std::fs::read_to_string(file)
            .map_err(|e| Error::Validation(format!("cannot read {file}: {e}")))?;
        let json: GridSurfaceJson = serde_json::from_str(&text)?;
        json.to_surface()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_json() {
        let text = r#"{
            "id": "rt",
            "n": 3, "k": 2,
            "weights": [0.7, 0.3],
            "curve": {"generator": "random_loop", "modes": 3},
            "surface": "cone",
            "tolerances": {"phase_tol": 1e-7, "quad_tol": 1e-6, "orbit_tol": 1e-9},
            "steps": 512,
            "seed": 7
        }"#;
        let parsed: ScenarioConfig = serde_json::from_str(text).unwrap();
        parsed.validate().unwrap();
        let serialized = serde_json::to_string(&parsed).unwrap();
        let reparsed: ScenarioConfig = serde_json::from_str(&serialized).unwrap();
        assert_eq!(serialized, serde_json::to_string(&reparsed).unwrap());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"n": 2, "k": 1, "weights": [1.0],
            "curve": {"generator": "bloch_circle", "theta": 1.0},
            "typo_field": true}"#;
        assert!(serde_json::from_str::<ScenarioConfig>(text).is_err());
    }

    #[test]
    fn surface_spec_accepts_string_and_object() {
        for (text, expect_file) in [
            (r#""cone""#, false),
            (r#""none""#, false),
            (r#"{"file": "x.json"}"#, true),
        ] {
            let spec: SurfaceSpec = serde_json::from_str(text).unwrap();
            match (&spec, expect_file) {
                (SurfaceSpec::Named(_), false) | (SurfaceSpec::File { .. }, true) => {}
                other => panic!("unexpected parse: {other:?}"),
            }
        }
    }
}

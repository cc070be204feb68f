//! Reusable fixtures: Bloch-sphere loops and caps, pure-state geodesics,
//! vertex-interpolating triangle segments, and two-parameter patches.
//! Everything is seeded and deterministic.

use crate::algebra::{expm_skew, gram_schmidt, CMatrix, CVector, C64};
use crate::error::{Error, Result};
use crate::geometry::{FrameTangent, Surface};
use crate::rng::SplitMix64;
use crate::states::{
    project, DensityMatrix, Frame, OrbitCurve, SpectralWeights,
};

pub fn pure_weights() -> SpectralWeights {
    SpectralWeights::new(vec![1.0]).unwrap()
}

/// Random n×k frame from Gaussian columns.
pub fn random_frame(rng: &mut SplitMix64, n: usize, k: usize) -> Frame {
    loop {
        let cols: Vec<CVector> = (0..k).map(|_| rng.complex_vector(n)).collect();
        if let Ok(m) = gram_schmidt(&cols) {
            return Frame::new_unchecked(m);
        }
    }
}

/// Random tangent at a frame: Hermitian `h` plus a perpendicular block.
pub fn random_frame_tangent(rng: &mut SplitMix64, frame: &Frame) -> FrameTangent {
    let (n, k) = (frame.n(), frame.k());
    let h = rng.hermitian(k);
    let raw = rng.complex_matrix(n, k);
    let psi = frame.matrix();
    let chi = &raw - psi * (psi.adjoint() * &raw);
    FrameTangent::new(h, chi)
}

/// Random unitary via the exponential of a random Hermitian matrix.
pub fn random_unitary(rng: &mut SplitMix64, n: usize) -> CMatrix {
    expm_skew(&rng.hermitian(n), 1.0).unwrap()
}

/// Bloch-sphere state `ψ(θ, φ) = (cos(θ/2), sin(θ/2) e^{iφ})`.
pub fn bloch_state(theta: f64, phi: f64) -> CVector {
    CVector::from_vec(vec![
        C64::new((theta / 2.0).cos(), 0.0),
        C64::new(0.0, phi).exp() * (theta / 2.0).sin(),
    ])
}

/// n = 2 density matrix with Bloch direction (θ, φ): the pure projector for
/// k = 1, or `κ₁P₊ + κ₂P₋` for k = 2.
pub fn bloch_density(theta: f64, phi: f64, weights: &SpectralWeights) -> Result<DensityMatrix> {
    let psi = bloch_state(theta, phi);
    let plus = &psi * psi.adjoint();
    match weights.k() {
        1 => Ok(DensityMatrix::new_unchecked(plus)),
        2 => {
            let minus = crate::algebra::identity(2) - &plus;
            Ok(DensityMatrix::new_unchecked(
                plus * C64::new(weights.get(0), 0.0) + minus * C64::new(weights.get(1), 0.0),
            ))
        }
        k => Err(Error::DimensionMismatch(format!(
            "Bloch fixtures need k ∈ {{1, 2}}, got {k}"
        ))),
    }
}

/// Circle at fixed polar angle θ, azimuth `2πs`, generated by the periodic
/// diagonal family `V(s) = diag(1, e^{2πis})` (so the unitary family closes
/// exactly and accumulated phases are branch-pinned for every θ).
pub struct BlochCircleLoop {
    theta: f64,
    weights: SpectralWeights,
}

impl BlochCircleLoop {
    pub fn new(theta: f64, weights: SpectralWeights) -> Result<Self> {
        if weights.k() > 2 {
            return Err(Error::DimensionMismatch("Bloch circle needs k ≤ 2".into()));
        }
        Ok(Self { theta, weights })
    }
}

impl OrbitCurve for BlochCircleLoop {
    fn n(&self) -> usize {
        2
    }

    fn weights(&self) -> &SpectralWeights {
        &self.weights
    }

    fn density(&self, s: f64) -> DensityMatrix {
        bloch_density(self.theta, std::f64::consts::TAU * s, &self.weights)
            .expect("validated at construction")
    }

    fn unitary_at(&self, s: f64) -> CMatrix {
        let mut v = CMatrix::zeros(2, 2);
        v[(0, 0)] = C64::new(1.0, 0.0);
        v[(1, 1)] = C64::new(0.0, std::f64::consts::TAU * s).exp();
        v
    }

    fn closed_unitary_family(&self) -> bool {
        true
    }
}

/// Polar cap spanning a Bloch circle, for the pure-state case only: the
/// k = 2 cap lift is singular at the apex (the second level winds), so the
/// plain area identity holds just for k = 1. Boundary at `v = 0`, apex at
/// `v = 1`.
pub struct BlochCapSurface {
    theta: f64,
    weights: SpectralWeights,
}

impl BlochCapSurface {
    pub fn new(theta: f64) -> Self {
        Self {
            theta,
            weights: pure_weights(),
        }
    }
}

impl Surface for BlochCapSurface {
    fn n(&self) -> usize {
        2
    }

    fn weights(&self) -> &SpectralWeights {
        &self.weights
    }

    fn density(&self, u: f64, v: f64) -> DensityMatrix {
        bloch_density(
            self.theta * (1.0 - v),
            std::f64::consts::TAU * u,
            &self.weights,
        )
        .expect("k = 1")
    }
}

/// Open segment interpolating two loop generators in the Lie algebra:
/// `ρ(t) = G(t) ρ_base G(t)†` with `G(t) = exp(i((1−t)Y_a + tY_b))`.
/// Chained cyclically over a triangle of vertices, the composed unitary
/// family closes exactly.
pub struct InterpolatedSegment {
    y_from: CMatrix,
    y_to: CMatrix,
    base: DensityMatrix,
    weights: SpectralWeights,
}

impl InterpolatedSegment {
    pub fn new(
        y_from: CMatrix,
        y_to: CMatrix,
        base: DensityMatrix,
        weights: SpectralWeights,
    ) -> Self {
        Self { y_from, y_to, base, weights }
    }

    fn g(&self, t: f64) -> CMatrix {
        let y = &self.y_from * C64::new(1.0 - t, 0.0) + &self.y_to * C64::new(t, 0.0);
        expm_skew(&y, -1.0).expect("interpolated generator is Hermitian")
    }
}

impl OrbitCurve for InterpolatedSegment {
    fn n(&self) -> usize {
        self.base.n()
    }

    fn weights(&self) -> &SpectralWeights {
        &self.weights
    }

    fn density(&self, s: f64) -> DensityMatrix {
        let g = self.g(s);
        self.base.conjugate(&g)
    }

    fn unitary_at(&self, s: f64) -> CMatrix {
        self.g(s) * self.g(0.0).adjoint()
    }

    fn closed(&self) -> bool {
        false
    }

    fn closed_unitary_family(&self) -> bool {
        false
    }
}

/// Three chained segments between random vertices near the canonical base
/// point: a closed triangle of generic class I curves. `scale` controls the
/// vertex spread (keep ≲ 0.5 so every phase stays well inside a branch).
pub fn random_triangle(
    weights: &SpectralWeights,
    n: usize,
    seed: u64,
    scale: f64,
) -> Result<[InterpolatedSegment; 3]> {
    let k = weights.k();
    let base = project(&Frame::canonical(n, k), weights)?;
    let mut rng = SplitMix64::new(seed);
    let y: Vec<CMatrix> = (0..3)
        .map(|_| rng.hermitian_traceless(n) * C64::new(scale, 0.0))
        .collect();
    Ok([
        InterpolatedSegment::new(y[0].clone(), y[1].clone(), base.clone(), weights.clone()),
        InterpolatedSegment::new(y[1].clone(), y[2].clone(), base.clone(), weights.clone()),
        InterpolatedSegment::new(y[2].clone(), y[0].clone(), base, weights.clone()),
    ])
}

/// Pure-state great-circle arc between two unit vectors, `ψ(t)` sweeping
/// the angle `arccos|⟨a, b⟩|` in the plane they span. The second endpoint
/// is phase-aligned to the first, so every intermediate overlap is real.
pub struct GeodesicArc {
    start: CVector,
    perp: CVector,
    angle: f64,
    weights: SpectralWeights,
}

impl GeodesicArc {
    /// Arc from `a` to `b` (non-orthogonal).
    pub fn new(a: &CVector, b: &CVector) -> Result<Self> {
        let a = a / C64::new(a.norm(), 0.0);
        let mut b = b / C64::new(b.norm(), 0.0);
        let ov = a.dotc(&b);
        if ov.norm() < 1e-8 {
            return Err(Error::DegenerateInput(
                "geodesic endpoints are orthogonal; use `orthogonal` instead".into(),
            ));
        }
        // align b in phase with a
        b *= ov.conj() / C64::new(ov.norm(), 0.0);
        let cos = ov.norm().min(1.0);
        let angle = cos.acos();
        if angle < 1e-12 {
            return Err(Error::DegenerateInput("geodesic endpoints coincide".into()));
        }
        let perp = (&b - &a * C64::new(cos, 0.0)) / C64::new(angle.sin(), 0.0);
        Ok(Self {
            start: a,
            perp,
            angle,
            weights: pure_weights(),
        })
    }

    /// Quarter-turn arc from `a` to an orthogonal unit vector `e`: endpoints
    /// project to orthogonal pure states (not even class I).
    pub fn orthogonal(a: &CVector, e: &CVector) -> Result<Self> {
        let a = a / C64::new(a.norm(), 0.0);
        let e = e / C64::new(e.norm(), 0.0);
        if a.dotc(&e).norm() > 1e-10 {
            return Err(Error::Contract("second vector must be orthogonal".into()));
        }
        Ok(Self {
            start: a,
            perp: e,
            angle: std::f64::consts::FRAC_PI_2,
            weights: pure_weights(),
        })
    }

    pub fn state(&self, t: f64) -> CVector {
        let th = self.angle * t;
        &self.start * C64::new(th.cos(), 0.0) + &self.perp * C64::new(th.sin(), 0.0)
    }
}

impl OrbitCurve for GeodesicArc {
    fn n(&self) -> usize {
        self.start.len()
    }

    fn weights(&self) -> &SpectralWeights {
        &self.weights
    }

    fn density(&self, s: f64) -> DensityMatrix {
        let psi = self.state(s);
        DensityMatrix::new_unchecked(&psi * psi.adjoint())
    }

    /// Rotation by `θ·s` in the plane spanned by the endpoints.
    fn unitary_at(&self, s: f64) -> CMatrix {
        let n = self.start.len();
        let th = self.angle * s;
        let a = &self.start;
        let e = &self.perp;
        let mut v = crate::algebra::identity(n);
        let c = C64::new(th.cos() - 1.0, 0.0);
        let s_ = C64::new(th.sin(), 0.0);
        v += (a * a.adjoint() + e * e.adjoint()) * c;
        v += (e * a.adjoint() - a * e.adjoint()) * s_;
        v
    }

    fn closed(&self) -> bool {
        false
    }

    fn closed_unitary_family(&self) -> bool {
        false
    }
}

/// Two-parameter family whose frames are real linear combinations of a
/// fixed real orthonormal set: all Bargmann triples are real, so every
/// curve inside is a null phase curve on a small enough patch. Needs n ≥ 4.
pub struct TorusPatch {
    weights: SpectralWeights,
    n: usize,
    span: f64,
}

impl TorusPatch {
    pub fn new(n: usize, weights: SpectralWeights, span: f64) -> Result<Self> {
        if weights.k() != 2 || n < 4 {
            return Err(Error::DimensionMismatch(
                "torus patch fixture needs k = 2 and n ≥ 4".into(),
            ));
        }
        Ok(Self { weights, n, span })
    }

    fn frame(&self, u: f64, v: f64) -> Frame {
        let n = self.n;
        let (a, b) = (self.span * u, self.span * v);
        let mut m = CMatrix::zeros(n, 2);
        m[(0, 0)] = C64::new(a.cos(), 0.0);
        m[(1, 0)] = C64::new(a.sin(), 0.0);
        m[(2, 1)] = C64::new(b.cos(), 0.0);
        m[(3, 1)] = C64::new(b.sin(), 0.0);
        Frame::new_unchecked(m)
    }
}

impl Surface for TorusPatch {
    fn n(&self) -> usize {
        self.n
    }

    fn weights(&self) -> &SpectralWeights {
        &self.weights
    }

    fn density(&self, u: f64, v: f64) -> DensityMatrix {
        project(&self.frame(u, v), &self.weights).expect("frame is orthonormal")
    }
}

/// Generic two-parameter patch `ρ(u,v) = e^{iuA} e^{ivB} ρ₀ e^{−ivB} e^{−iuA}`
/// from two random directions; its pulled-back symplectic form is generically
/// nonzero.
pub struct TwoGeneratorPatch {
    a: CMatrix,
    b: CMatrix,
    base: DensityMatrix,
    weights: SpectralWeights,
}

impl TwoGeneratorPatch {
    pub fn random(weights: &SpectralWeights, n: usize, seed: u64, scale: f64) -> Result<Self> {
        let k = weights.k();
        let base = project(&Frame::canonical(n, k), weights)?;
        let mut rng = SplitMix64::new(seed);
        Ok(Self {
            a: rng.hermitian_traceless(n) * C64::new(scale, 0.0),
            b: rng.hermitian_traceless(n) * C64::new(scale, 0.0),
            base,
            weights: weights.clone(),
        })
    }
}

impl Surface for TwoGeneratorPatch {
    fn n(&self) -> usize {
        self.base.n()
    }

    fn weights(&self) -> &SpectralWeights {
        &self.weights
    }

    fn density(&self, u: f64, v: f64) -> DensityMatrix {
        let ua = expm_skew(&self.a, -u).expect("Hermitian");
        let ub = expm_skew(&self.b, -v).expect("Hermitian");
        self.base.conjugate(&(ua * ub))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::spectral_frame;

    #[test]
    fn bloch_density_matches_circle_parametrization() {
        let weights = SpectralWeights::new(vec![0.7, 0.3]).unwrap();
        let curve = BlochCircleLoop::new(1.0, weights.clone()).unwrap();
        for i in 0..8 {
            let s = i as f64 / 8.0;
            let direct = bloch_density(1.0, std::f64::consts::TAU * s, &weights).unwrap();
            assert!(curve.density(s).distance(&direct) < 1e-14);
            // unitary family reproduces the same loop
            let v = curve.unitary_at(s);
            let moved = curve.density(0.0).conjugate(&v);
            assert!(moved.distance(&direct) < 1e-14);
        }
    }

    #[test]
    fn geodesic_arc_is_normalized_and_real_overlapped() {
        let mut rng = SplitMix64::new(3);
        let a = rng.complex_vector(3);
        let b = rng.complex_vector(3);
        let arc = GeodesicArc::new(&a, &b).unwrap();
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            let psi = arc.state(t);
            assert!((psi.norm() - 1.0).abs() < 1e-13);
            let ov = arc.state(0.0).dotc(&psi);
            assert!(ov.im.abs() < 1e-13);
            assert!(ov.re > 0.0);
            // unitary family carries the start to the arc point
            let v = arc.unitary_at(t);
            assert!((v.adjoint() * &v - crate::algebra::identity(3)).norm() < 1e-12);
            assert!((&v * arc.state(0.0) - &psi).norm() < 1e-12);
        }
    }

    #[test]
    fn triangle_chains_and_closes() {
        let weights = SpectralWeights::new(vec![0.7, 0.3]).unwrap();
        let [s1, s2, s3] = random_triangle(&weights, 3, 11, 0.4).unwrap();
        assert!(s1.density(1.0).distance(&s2.density(0.0)) < 1e-12);
        assert!(s2.density(1.0).distance(&s3.density(0.0)) < 1e-12);
        assert!(s3.density(1.0).distance(&s1.density(0.0)) < 1e-12);
    }

    #[test]
    fn torus_patch_stays_on_orbit() {
        let weights = SpectralWeights::new(vec![0.6, 0.4]).unwrap();
        let patch = TorusPatch::new(4, weights, 0.5).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let rho = patch.density(i as f64 / 3.0, j as f64 / 3.0);
                let (_, w) = spectral_frame(&rho, 2).unwrap();
                assert!((w.get(0) - 0.6).abs() < 1e-12);
            }
        }
    }
}

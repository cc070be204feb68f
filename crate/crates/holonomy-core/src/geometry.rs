//! Connection one-forms, tangent calculus, local charts, the
//! Kostant–Kirillov–Souriau two-form, and surface quadrature on orbits.
//!
//! Tangents to frame space at `Ψ` are pairs `(h, χ)` with `h` a k×k
//! Hermitian matrix and `χ` an n×k block orthogonal to `Ψ`, packaged as
//! `Φ = iΨh + χ`. The diagonal of `h` is the vertical (fiber) part; the
//! connection one-forms read it off: `A⁽ᵃ⁾(Φ) = −i(ψ_a, φ_a) = h_aa`.
//! Orbit tangents drop the diagonal entirely and push forward to
//! `X = iΨ[h,κ]Ψ† + Ψκχ† + χκΨ†`, realized as `X = −i[K, ρ]` for the
//! Hermitian generator `K = i(χΨ† − Ψχ†) − Ψ·offdiag(h)·Ψ†`.
//!
//! The KKS form is evaluated two independent ways: the defining trace
//! `Ω(X′,X″) = −i Tr(ρ[K′,K″])` and a closed form in the `(h, χ)`
//! coordinates; their agreement, and the pullback identity
//! `Σ_a κ_a dA⁽ᵃ⁾ = π*Ω`, are the backbone of the test suite.

use crate::algebra::{
    self, hermitian_eigen_desc, inner, max_abs, polar_decompose, sqrtm_psd, CMatrix, C64,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::states::{
    project, spectral_frame, DensityMatrix, ExponentialLoop, Frame, OrbitCurve,
    SpectralWeights,
};

/// Tangency tolerance: `Ψ†χ` entries and Hermiticity of `h`.
pub const TANGENT_TOL: f64 = 1e-12;
/// Base-point matching tolerance for two-tangent operations.
pub const BASE_TOL: f64 = 1e-10;

/// Tangent vector to frame space at some frame: `Φ = iΨh + χ`.
#[derive(Debug, Clone)]
pub struct FrameTangent {
    /// k×k Hermitian matrix; its diagonal is the vertical part.
    pub h: CMatrix,
    /// n×k block with every column orthogonal to the frame.
    pub chi: CMatrix,
}

impl FrameTangent {
    pub fn new(h: CMatrix, chi: CMatrix) -> Self {
        Self { h, chi }
    }

    pub fn validate_at(&self, frame: &Frame) -> Result<()> {
        let (n, k) = (frame.n(), frame.k());
        if self.h.nrows() != k || self.h.ncols() != k {
            return Err(Error::DimensionMismatch(format!(
                "tangent h must be {k}×{k}"
            )));
        }
        if self.chi.nrows() != n || self.chi.ncols() != k {
            return Err(Error::DimensionMismatch(format!(
                "tangent χ must be {n}×{k}"
            )));
        }
        let herm = algebra::hermitian_deviation(&self.h);
        if herm > TANGENT_TOL {
            return Err(Error::Contract(format!(
                "tangent h not Hermitian: deviation {herm:.3e}"
            )));
        }
        let overlap = max_abs(&(frame.matrix().adjoint() * &self.chi));
        if overlap > TANGENT_TOL {
            return Err(Error::Contract(format!(
                "tangent χ not orthogonal to frame: overlap {overlap:.3e}"
            )));
        }
        Ok(())
    }

    /// The n×k matrix `Φ = iΨh + χ`.
    pub fn phi_matrix(&self, frame: &Frame) -> CMatrix {
        frame.matrix() * &self.h * C64::new(0.0, 1.0) + &self.chi
    }
}

/// Tangent vector to the orbit at a base point, in frame coordinates:
/// off-diagonal `h` plus perpendicular block `χ`.
#[derive(Debug, Clone)]
pub struct OrbitTangent {
    /// k×k Hermitian with zero diagonal.
    pub h: CMatrix,
    pub chi: CMatrix,
    pub frame: Frame,
    pub weights: SpectralWeights,
}

impl OrbitTangent {
    /// `X = iΨ[h,κ]Ψ† + Ψκχ† + χκΨ†`, the pushed-forward tangent as a
    /// Hermitian traceless matrix.
    pub fn x_matrix(&self) -> CMatrix {
        let psi = self.frame.matrix();
        let kappa = self.weights.kappa_matrix();
        let comm = &self.h * &kappa - &kappa * &self.h;
        psi * comm * psi.adjoint() * C64::new(0.0, 1.0)
            + psi * &kappa * self.chi.adjoint()
            + &self.chi * kappa * psi.adjoint()
    }

    pub fn shares_base_with(&self, other: &OrbitTangent) -> bool {
        self.frame.distance(&other.frame) < BASE_TOL
            && self.weights.close_to(&other.weights, BASE_TOL)
    }
}

/// `A⁽ᵃ⁾(Φ) = −i(ψ_a, φ_a)` for each level; equals the diagonal of `h`.
pub fn connection_eval(frame: &Frame, phi: &FrameTangent) -> Result<Vec<f64>> {
    phi.validate_at(frame)?;
    let full = phi.phi_matrix(frame);
    let mut out = Vec::with_capacity(frame.k());
    for a in 0..frame.k() {
        let ov = inner(&frame.column(a), &full.column(a).into_owned());
        // −i·(i h_aa) = h_aa; the real part of the overlap vanishes on
        // genuine tangents.
        out.push(ov.im);
    }
    Ok(out)
}

/// Drop the vertical part: zero the diagonal of `h`, keep everything else.
pub fn horizontal_project(frame: &Frame, phi: &FrameTangent) -> Result<FrameTangent> {
    phi.validate_at(frame)?;
    let mut h = phi.h.clone();
    for a in 0..h.nrows() {
        h[(a, a)] = C64::new(0.0, 0.0);
    }
    Ok(FrameTangent::new(h, phi.chi.clone()))
}

/// Push a frame tangent down to the orbit. The diagonal of `h` does not
/// enter: it commutes with `κ` and projects to zero.
pub fn tangent_to_orbit(
    frame: &Frame,
    weights: &SpectralWeights,
    phi: &FrameTangent,
) -> Result<OrbitTangent> {
    phi.validate_at(frame)?;
    if weights.k() != frame.k() {
        return Err(Error::DimensionMismatch("weights/frame rank mismatch".into()));
    }
    let mut h = phi.h.clone();
    for a in 0..h.nrows() {
        h[(a, a)] = C64::new(0.0, 0.0);
    }
    Ok(OrbitTangent {
        h,
        chi: phi.chi.clone(),
        frame: frame.clone(),
        weights: weights.clone(),
    })
}

/// Hermitian generator with `X = −i[K, ρ]`:
/// `K = i(χΨ† − Ψχ†) − Ψ·offdiag(h)·Ψ†`. The zero tangent returns exactly
/// zero (the additive freedom of operators commuting with ρ is not used).
pub fn generator_for(tangent: &OrbitTangent) -> CMatrix {
    let psi = tangent.frame.matrix();
    let chi = &tangent.chi;
    (chi * psi.adjoint() - psi * chi.adjoint()) * C64::new(0.0, 1.0)
        - psi * &tangent.h * psi.adjoint()
}

/// The KKS two-form by its defining trace: `Ω(X′,X″) = −i Tr(ρ [K′, K″])`.
pub fn kks_eval(rho: &DensityMatrix, k1: &CMatrix, k2: &CMatrix) -> Result<f64> {
    algebra::check_hermitian(k1, "KKS generator")?;
    algebra::check_hermitian(k2, "KKS generator")?;
    let comm = algebra::commutator(k1, k2);
    let val = (rho.matrix() * comm).trace() * C64::new(0.0, -1.0);
    Ok(val.re)
}

/// The KKS two-form in frame coordinates:
/// `Ω = Σ_{a<b} 2(κ_a−κ_b) Im(h′_ab h″_ab*) + Σ_a 2κ_a Im(χ′_a, χ″_a)`.
/// Independent of the trace route in [`kks_eval`]; the two must agree.
pub fn kks_closed_form(t1: &OrbitTangent, t2: &OrbitTangent) -> Result<f64> {
    if !t1.shares_base_with(t2) {
        return Err(Error::Contract("orbit tangents have different base points".into()));
    }
    let k = t1.weights.k();
    let mut val = 0.0;
    for a in 0..k {
        for b in (a + 1)..k {
            let x = t1.h[(a, b)] * t2.h[(a, b)].conj();
            val += 2.0 * (t1.weights.get(a) - t1.weights.get(b)) * x.im;
        }
    }
    for a in 0..k {
        let c = t1.chi.column(a).dotc(&t2.chi.column(a));
        val += 2.0 * t1.weights.get(a) * c.im;
    }
    Ok(val)
}

/// Decompose an ambient direction `X` (Hermitian, tangent to the orbit at
/// `ρ = ΨκΨ†`) into orbit-tangent coordinates at the given spectral frame:
/// `h_ab = (Ψ†XΨ)_ab / (i(κ_b−κ_a))` off the diagonal and
/// `χ = (1−ΨΨ†) X Ψ κ⁻¹`.
pub fn lift_direction(
    frame: &Frame,
    weights: &SpectralWeights,
    x: &CMatrix,
) -> Result<OrbitTangent> {
    let (n, k) = (frame.n(), frame.k());
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::DimensionMismatch(format!("direction must be {n}×{n}")));
    }
    let psi = frame.matrix();
    let core = psi.adjoint() * x * psi;
    let mut h = CMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            if a != b {
                let denom = C64::new(0.0, weights.get(b) - weights.get(a));
                h[(a, b)] = core[(a, b)] / denom;
            }
        }
    }
    let mut chi = x * psi - psi * core;
    for a in 0..k {
        let scale = C64::new(1.0 / weights.get(a), 0.0);
        for r in 0..n {
            chi[(r, a)] *= scale;
        }
    }
    Ok(OrbitTangent {
        h,
        chi,
        frame: frame.clone(),
        weights: weights.clone(),
    })
}

/// Ω on two ambient directions at a point, lifting both through the point's
/// own spectral frame. Convention-independent: per-column phase changes of
/// the frame are compensated inside the `(h, χ)` coordinates.
pub fn kks_of_directions(
    rho: &DensityMatrix,
    k: usize,
    xu: &CMatrix,
    xv: &CMatrix,
) -> Result<f64> {
    let (frame, weights) = spectral_frame(rho, k)?;
    let tu = lift_direction(&frame, &weights, xu)?;
    let tv = lift_direction(&frame, &weights, xv)?;
    kks_closed_form(&tu, &tv)
}

// ---------------------------------------------------------------------------
// Local chart (rank 2)
// ---------------------------------------------------------------------------

/// Chart coordinates around a reference frame `Ψ₀` (rank 2 only):
/// `Ψ = (Ψ₀ · 𝒰(z) · (1 − χ₀†χ₀)^{1/2} + χ₀) · diag(e^{iα₁}, e^{iα₂})`,
/// with `𝒰(z)` the SU(2) element with real positive diagonal
/// `[[√(1−|z|²), z], [−z*, √(1−|z|²)]]`.
#[derive(Debug, Clone)]
pub struct ChartCoords {
    pub z: C64,
    /// n×2 block orthogonal to the reference frame, with both eigenvalues of
    /// `χ₀†χ₀` in [0, 1).
    pub chi0: CMatrix,
    pub alpha: [f64; 2],
}

impl ChartCoords {
    pub fn origin(n: usize) -> Self {
        Self {
            z: C64::new(0.0, 0.0),
            chi0: CMatrix::zeros(n, 2),
            alpha: [0.0, 0.0],
        }
    }
}

fn su2_of_z(z: C64) -> CMatrix {
    let c = C64::new((1.0 - z.norm_sqr()).max(0.0).sqrt(), 0.0);
    let mut u = CMatrix::zeros(2, 2);
    u[(0, 0)] = c;
    u[(0, 1)] = z;
    u[(1, 0)] = -z.conj();
    u[(1, 1)] = c;
    u
}

fn require_rank2(frame: &Frame, what: &str) -> Result<()> {
    if frame.k() != 2 {
        return Err(Error::Contract(format!("{what} requires rank k = 2")));
    }
    Ok(())
}

/// Chart coordinates of `psi` around `reference`. The unitary polar factor
/// of `S = Ψ₀†Ψ` splits as `W = 𝒰(z)·diag(e^{iα})`; the same phases are
/// stripped from the perpendicular block so that encode and decode invert
/// each other exactly. Points outside the chart fail loudly; nothing
/// re-centers silently.
pub fn chart_encode(reference: &Frame, psi: &Frame) -> Result<ChartCoords> {
    require_rank2(reference, "chart")?;
    require_rank2(psi, "chart")?;
    if reference.n() != psi.n() {
        return Err(Error::DimensionMismatch("chart frames differ in n".into()));
    }
    let s = reference.matrix().adjoint() * psi.matrix();
    let (w, _p) = polar_decompose(&s).map_err(|e| match e {
        Error::Singular { sigma_min } => Error::OutsideChart(format!(
            "overlap matrix singular (σ_min = {sigma_min:.3e}): a perpendicular-block eigenvalue reached 1"
        )),
        other => other,
    })?;
    let mut alpha = [0.0; 2];
    let mut phases = CMatrix::zeros(2, 2);
    for a in 0..2 {
        let waa = w[(a, a)];
        if waa.norm() < 1e-12 {
            return Err(Error::OutsideChart(format!(
                "unitary polar factor has vanishing diagonal at {a}"
            )));
        }
        alpha[a] = waa.arg();
        phases[(a, a)] = C64::new(alpha[a].cos(), -alpha[a].sin());
    }
    let zmat = &w * &phases;
    let z = zmat[(0, 1)];
    if z.norm() >= 1.0 {
        return Err(Error::OutsideChart(format!("|z| = {} is not < 1", z.norm())));
    }
    let chi0 = (psi.matrix() - reference.matrix() * &s) * &phases;
    let gram = chi0.adjoint() * &chi0;
    let (ev, _) = hermitian_eigen_desc(&gram)?;
    if ev[0] >= 1.0 {
        return Err(Error::OutsideChart(format!(
            "perpendicular-block eigenvalue {} is not < 1",
            ev[0]
        )));
    }
    Ok(ChartCoords { z, chi0, alpha })
}

/// Rebuild the frame from chart coordinates. Orthonormality holds by
/// construction: `Ψ†Ψ = P² + χ₀†χ₀ = I`.
pub fn chart_decode(reference: &Frame, coords: &ChartCoords) -> Result<Frame> {
    require_rank2(reference, "chart")?;
    let n = reference.n();
    if coords.chi0.nrows() != n || coords.chi0.ncols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "chart χ₀ must be {n}×2"
        )));
    }
    if coords.z.norm() >= 1.0 {
        return Err(Error::OutsideChart(format!(
            "|z| = {} is not < 1",
            coords.z.norm()
        )));
    }
    let perp_overlap = max_abs(&(reference.matrix().adjoint() * &coords.chi0));
    if perp_overlap > BASE_TOL {
        return Err(Error::Contract(format!(
            "chart χ₀ not orthogonal to the reference: overlap {perp_overlap:.3e}"
        )));
    }
    let gram = coords.chi0.adjoint() * &coords.chi0;
    let (ev, _) = hermitian_eigen_desc(&gram)?;
    if ev[0] >= 1.0 {
        return Err(Error::OutsideChart(format!(
            "perpendicular-block eigenvalue {} is not < 1",
            ev[0]
        )));
    }
    let p = sqrtm_psd(&(algebra::identity(2) - gram))?;
    let u = su2_of_z(coords.z);
    let mut phases = CMatrix::zeros(2, 2);
    for a in 0..2 {
        phases[(a, a)] = C64::new(coords.alpha[a].cos(), coords.alpha[a].sin());
    }
    let m = (reference.matrix() * u * p + &coords.chi0) * phases;
    Frame::new(m)
}

/// Closed forms of the curvature pair `(dA⁽¹⁾, dA⁽²⁾)` at the chart center
/// of the tangents' common base frame (rank 2):
/// `dA⁽¹⁾ = 2 Im(h′₁₂ h″₁₂*) + 2 Im(χ′₁, χ″₁)` and the z-term enters
/// `dA⁽²⁾` with the opposite sign. Valid only at the chart center; callers
/// re-center rather than evaluating at displaced points.
pub fn da_closed_form(t1: &FrameTangent, t2: &FrameTangent) -> Result<(f64, f64)> {
    if t1.h.nrows() != 2 || t2.h.nrows() != 2 {
        return Err(Error::Contract("curvature closed form requires rank k = 2".into()));
    }
    let hterm = 2.0 * (t1.h[(0, 1)] * t2.h[(0, 1)].conj()).im;
    let chi1 = 2.0 * t1.chi.column(0).dotc(&t2.chi.column(0)).im;
    let chi2 = 2.0 * t1.chi.column(1).dotc(&t2.chi.column(1)).im;
    Ok((hterm + chi1, -hterm + chi2))
}

/// Both sides of the pullback identity `Σ_a κ_a dA⁽ᵃ⁾ = π*Ω` on a pair of
/// frame tangents: the left from the curvature closed forms, the right from
/// the generator/trace route on the pushed-forward tangents.
pub fn pullback_check(
    frame: &Frame,
    weights: &SpectralWeights,
    t1: &FrameTangent,
    t2: &FrameTangent,
) -> Result<(f64, f64)> {
    let (da1, da2) = da_closed_form(t1, t2)?;
    let lhs = weights.get(0) * da1 + weights.get(1) * da2;

    let o1 = tangent_to_orbit(frame, weights, t1)?;
    let o2 = tangent_to_orbit(frame, weights, t2)?;
    let k1 = generator_for(&o1);
    let k2 = generator_for(&o2);
    let rho = project(frame, weights)?;
    let rhs = kks_eval(&rho, &k1, &k2)?;
    Ok((lhs, rhs))
}

// ---------------------------------------------------------------------------
// Surfaces and quadrature
// ---------------------------------------------------------------------------

/// Two-parameter map `(u, v) ∈ [0,1]² → ρ(u,v)` into one orbit. When the
/// surface spans a loop, the loop is the `v = 0` edge traversed in the `+u`
/// direction and the remaining edges are degenerate; with that orientation
/// the weighted holonomy phases of the loop equal minus the surface
/// integral of Ω.
pub trait Surface: Sync {
    fn n(&self) -> usize;
    fn weights(&self) -> &SpectralWeights;
    fn density(&self, u: f64, v: f64) -> DensityMatrix;

    /// Sampler for a fixed u-column. Implementations with per-column
    /// structure (e.g. a frozen generator) override this to share work
    /// across the column.
    fn column<'a>(&'a self, u: f64) -> Box<dyn Fn(f64) -> DensityMatrix + 'a> {
        Box::new(move |v| self.density(u, v))
    }
}

/// Cone over an exponential loop: `ρ(u,v) = e^{i(1−v)X(u)} ρ₀ e^{−i(1−v)X(u)}`.
/// The `v = 0` edge is the loop itself; `v = 1` and the side edges sit at
/// the apex `ρ₀`.
pub struct ConeSurface<'a> {
    curve: &'a ExponentialLoop,
}

impl<'a> ConeSurface<'a> {
    pub fn new(curve: &'a ExponentialLoop) -> Self {
        Self { curve }
    }
}

impl Surface for ConeSurface<'_> {
    fn n(&self) -> usize {
        OrbitCurve::n(self.curve)
    }

    fn weights(&self) -> &SpectralWeights {
        OrbitCurve::weights(self.curve)
    }

    fn density(&self, u: f64, v: f64) -> DensityMatrix {
        let x = self.curve.generator_at(u);
        let w = algebra::expm_skew(&x, v - 1.0).expect("cone generator is Hermitian");
        self.curve.base().conjugate(&w)
    }

    fn column<'b>(&'b self, u: f64) -> Box<dyn Fn(f64) -> DensityMatrix + 'b> {
        // One eigendecomposition of X(u) serves every v in the column.
        let x = self.curve.generator_at(u);
        let n = x.nrows();
        let (vals, vecs) = hermitian_eigen_desc(&x).expect("cone generator is Hermitian");
        let base = self.curve.base().clone();
        Box::new(move |v: f64| {
            let mut d = CMatrix::zeros(n, n);
            for (i, &lambda) in vals.iter().enumerate() {
                let phase = (1.0 - v) * lambda;
                d[(i, i)] = C64::new(phase.cos(), phase.sin());
            }
            let w = &vecs * d * vecs.adjoint();
            base.conjugate(&w)
        })
    }
}

/// Surface from an arbitrary closure.
pub struct FnSurface<F> {
    pub n: usize,
    pub weights: SpectralWeights,
    pub f: F,
}

impl<F> Surface for FnSurface<F>
where
    F: Fn(f64, f64) -> DensityMatrix + Sync,
{
    fn n(&self) -> usize {
        self.n
    }

    fn weights(&self) -> &SpectralWeights {
        &self.weights
    }

    fn density(&self, u: f64, v: f64) -> DensityMatrix {
        (self.f)(u, v)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    /// Cauchy stopping tolerance between successive dyadic refinements.
    pub quad_tol: f64,
    pub initial_grid: usize,
    pub max_grid: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            quad_tol: 1e-6,
            initial_grid: 8,
            max_grid: 1024,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    /// Grid size m (m×m cells) at which the Cauchy criterion was met.
    pub grid: usize,
}

/// One midpoint pass over an m×m grid: central differences of ρ at each
/// cell center give the two ambient directions, the cell's own spectral
/// frame lifts them, and the KKS closed form evaluates the integrand.
/// Columns are mapped in parallel; the final sum runs in fixed index order.
pub fn surface_integral_fixed(surface: &dyn Surface, m: usize) -> Result<f64> {
    let k = surface.weights().k();
    let delta = 1.0 / m as f64;
    let fd = 0.5 * delta;

    let columns: Vec<Result<f64>> = exec::map_indexed(m, |i| {
        let u = (i as f64 + 0.5) * delta;
        let col_mid = surface.column(u);
        let col_lo = surface.column(u - fd);
        let col_hi = surface.column(u + fd);
        let mut acc = 0.0;
        for j in 0..m {
            let v = (j as f64 + 0.5) * delta;
            let rho = col_mid(v);
            let (hi, lo) = (col_hi(v), col_lo(v));
            let (up, dn) = (col_mid(v + fd), col_mid(v - fd));
            let xu = (hi.matrix() - lo.matrix()) / C64::new(2.0 * fd, 0.0);
            let xv = (up.matrix() - dn.matrix()) / C64::new(2.0 * fd, 0.0);
            let (frame, w) = spectral_frame(&rho, k)?;
            let tu = lift_direction(&frame, &w, &xu)?;
            let tv = lift_direction(&frame, &w, &xv)?;
            acc += kks_closed_form(&tu, &tv)?;
        }
        Ok(acc * delta * delta)
    });

    let mut total = 0.0;
    for c in columns {
        total += c?;
    }
    Ok(total)
}

/// `∬_S Ω` with dyadic grid refinement until two successive estimates agree
/// to `quad_tol`. The midpoint sums carry a clean Δ² error series (the
/// stencil step is tied to the cell size), so each estimate Richardson-
/// combines the last two grids; the Cauchy test runs on those estimates.
pub fn surface_integral(surface: &dyn Surface, opts: &QuadratureOptions) -> Result<QuadratureResult> {
    let mut m = opts.initial_grid.max(2);
    let mut raw_prev = surface_integral_fixed(surface, m)?;
    let mut estimate_prev: Option<f64> = None;
    loop {
        if m >= opts.max_grid {
            return Err(Error::QuadratureDiverged {
                prev: estimate_prev.unwrap_or(raw_prev),
                last: raw_prev,
            });
        }
        m *= 2;
        let raw = surface_integral_fixed(surface, m)?;
        let estimate = (4.0 * raw - raw_prev) / 3.0;
        if let Some(p) = estimate_prev {
            if (estimate - p).abs() < opts.quad_tol {
                return Ok(QuadratureResult { value: estimate, grid: m });
            }
        }
        log::debug!("surface_integral: grid {m} raw {raw:.9e} estimate {estimate:.9e}");
        raw_prev = raw;
        estimate_prev = Some(estimate);
    }
}

/// Dense-grid surface: samples at `u_i = i/(nu−1)`, `v_j = j/(nv−1)`,
/// row-major in u (index `i·nv + j`).
pub struct GridSurface {
    pub nu: usize,
    pub nv: usize,
    pub weights: SpectralWeights,
    pub data: Vec<DensityMatrix>,
}

impl GridSurface {
    pub fn new(
        nu: usize,
        nv: usize,
        weights: SpectralWeights,
        data: Vec<DensityMatrix>,
    ) -> Result<Self> {
        if nu < 2 || nv < 2 {
            return Err(Error::Validation("grid surface needs at least 2×2 samples".into()));
        }
        if data.len() != nu * nv {
            return Err(Error::DimensionMismatch(format!(
                "grid surface expects {}×{} = {} samples, got {}",
                nu,
                nv,
                nu * nv,
                data.len()
            )));
        }
        Ok(Self { nu, nv, weights, data })
    }

    pub fn at(&self, i: usize, j: usize) -> &DensityMatrix {
        &self.data[i * self.nv + j]
    }
}

/// `∬_S Ω` over a dense grid at its own resolution (no refinement):
/// per-cell corner differences for the directions, the corner's spectral
/// frame for the lift. The grid must be at least 8×8.
pub fn surface_integral_grid(grid: &GridSurface) -> Result<f64> {
    if grid.nu < 8 || grid.nv < 8 {
        return Err(Error::Validation(format!(
            "grid surface must be at least 8×8, got {}×{}",
            grid.nu, grid.nv
        )));
    }
    let k = grid.weights.k();
    let du = 1.0 / (grid.nu - 1) as f64;
    let dv = 1.0 / (grid.nv - 1) as f64;
    let cells_u = grid.nu - 1;
    let cells_v = grid.nv - 1;

    let columns: Vec<Result<f64>> = exec::map_indexed(cells_u, |i| {
        let mut acc = 0.0;
        for j in 0..cells_v {
            let p00 = grid.at(i, j).matrix();
            let p10 = grid.at(i + 1, j).matrix();
            let p01 = grid.at(i, j + 1).matrix();
            let p11 = grid.at(i + 1, j + 1).matrix();
            let xu = (p10 + p11 - p00 - p01) / C64::new(2.0 * du, 0.0);
            let xv = (p01 + p11 - p00 - p10) / C64::new(2.0 * dv, 0.0);
            let (frame, w) = spectral_frame(grid.at(i, j), k)?;
            let tu = lift_direction(&frame, &w, &xu)?;
            let tv = lift_direction(&frame, &w, &xv)?;
            acc += kks_closed_form(&tu, &tv)?;
        }
        Ok(acc * du * dv)
    });

    let mut total = 0.0;
    for c in columns {
        total += c?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CVector;
    use crate::fixtures::{random_frame, random_frame_tangent};
    use crate::rng::SplitMix64;
    use crate::states::random_orbit_loop;

    fn w2(a: f64, b: f64) -> SpectralWeights {
        SpectralWeights::new(vec![a, b]).unwrap()
    }

    #[test]
    fn connection_reads_h_diagonal() {
        let mut rng = SplitMix64::new(31);
        let frame = random_frame(&mut rng, 4, 2);
        // φ = iΨ·diag(2, 5): pure vertical motion
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 0)] = C64::new(2.0, 0.0);
        h[(1, 1)] = C64::new(5.0, 0.0);
        let phi = FrameTangent::new(h, CMatrix::zeros(4, 2));
        let a = connection_eval(&frame, &phi).unwrap();
        assert!((a[0] - 2.0).abs() < 1e-12);
        assert!((a[1] - 5.0).abs() < 1e-12);

        // horizontal input evaluates to zero
        let phi = random_frame_tangent(&mut rng, &frame);
        let hor = horizontal_project(&frame, &phi).unwrap();
        let a = connection_eval(&frame, &hor).unwrap();
        assert!(a.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn connection_matches_finite_difference() {
        // −i(ψ_a, dψ_a/dε) along an orthonormality-restoring retraction
        let mut rng = SplitMix64::new(37);
        let frame = random_frame(&mut rng, 4, 2);
        let phi = random_frame_tangent(&mut rng, &frame);
        let a = connection_eval(&frame, &phi).unwrap();
        let eps = 1e-6;
        let retract = |e: f64| {
            let m = frame.matrix() + phi.phi_matrix(&frame) * C64::new(e, 0.0);
            let cols: Vec<CVector> = (0..2).map(|c| m.column(c).into_owned()).collect();
            Frame::gram_schmidt(&cols).unwrap()
        };
        let plus = retract(eps);
        let minus = retract(-eps);
        for lvl in 0..2 {
            let d = (plus.column(lvl) - minus.column(lvl)) / C64::new(2.0 * eps, 0.0);
            let fd = inner(&frame.column(lvl), &d).im;
            assert!(
                (fd - a[lvl]).abs() < 1e-5,
                "level {lvl}: fd {fd} vs closed {}",
                a[lvl]
            );
        }
    }

    #[test]
    fn horizontal_projection_splits_cleanly() {
        let mut rng = SplitMix64::new(41);
        let frame = random_frame(&mut rng, 5, 2);
        let phi = random_frame_tangent(&mut rng, &frame);
        let hor = horizontal_project(&frame, &phi).unwrap();
        // idempotent
        let hor2 = horizontal_project(&frame, &hor).unwrap();
        assert!((&hor.h - &hor2.h).norm() < 1e-15);
        // vertical remainder restores the input exactly
        let vert = &phi.h - &hor.h;
        assert!((&vert + &hor.h - &phi.h).norm() < 1e-15);
        for a in 0..2 {
            for b in 0..2 {
                if a != b {
                    assert!(vert[(a, b)].norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn pure_vertical_tangent_projects_to_zero() {
        let mut rng = SplitMix64::new(43);
        let frame = random_frame(&mut rng, 4, 2);
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 0)] = C64::new(1.0, 0.0);
        h[(1, 1)] = C64::new(1.0, 0.0);
        let phi = FrameTangent::new(h, CMatrix::zeros(4, 2));
        let t = tangent_to_orbit(&frame, &w2(0.7, 0.3), &phi).unwrap();
        assert!(max_abs(&t.x_matrix()) < 1e-15);
    }

    #[test]
    fn chi_only_tangent_matches_direct_formula() {
        let mut rng = SplitMix64::new(47);
        let frame = random_frame(&mut rng, 4, 2);
        let weights = w2(0.7, 0.3);
        let mut phi = random_frame_tangent(&mut rng, &frame);
        phi.h = CMatrix::zeros(2, 2);
        let t = tangent_to_orbit(&frame, &weights, &phi).unwrap();
        let x = t.x_matrix();
        let psi1 = frame.column(0);
        let psi2 = frame.column(1);
        let chi1 = phi.chi.column(0).into_owned();
        let chi2 = phi.chi.column(1).into_owned();
        let direct = (&psi1 * chi1.adjoint() + &chi1 * psi1.adjoint()) * C64::new(0.7, 0.0)
            + (&psi2 * chi2.adjoint() + &chi2 * psi2.adjoint()) * C64::new(0.3, 0.0);
        assert!(max_abs(&(x - direct)) < 1e-13);
    }

    #[test]
    fn tangent_diagonal_h_does_not_enter_x() {
        let mut rng = SplitMix64::new(53);
        let frame = random_frame(&mut rng, 4, 2);
        let weights = w2(0.6, 0.4);
        let phi = random_frame_tangent(&mut rng, &frame);
        let mut dressed = phi.clone();
        dressed.h[(0, 0)] += C64::new(3.0, 0.0);
        dressed.h[(1, 1)] -= C64::new(1.5, 0.0);
        let x1 = tangent_to_orbit(&frame, &weights, &phi).unwrap().x_matrix();
        let x2 = tangent_to_orbit(&frame, &weights, &dressed).unwrap().x_matrix();
        assert!(max_abs(&(x1 - x2)) < 1e-14);
    }

    #[test]
    fn tangent_matches_projection_derivative() {
        // X = d/dε project(retract(Ψ + εΦ), κ) at ε = 0
        let mut rng = SplitMix64::new(59);
        let frame = random_frame(&mut rng, 4, 2);
        let weights = w2(0.7, 0.3);
        let phi = random_frame_tangent(&mut rng, &frame);
        let x = tangent_to_orbit(&frame, &weights, &phi).unwrap().x_matrix();
        let eps = 1e-6;
        let project_at = |e: f64| {
            let m = frame.matrix() + phi.phi_matrix(&frame) * C64::new(e, 0.0);
            let cols: Vec<CVector> = (0..2).map(|c| m.column(c).into_owned()).collect();
            project(&Frame::gram_schmidt(&cols).unwrap(), &weights).unwrap()
        };
        let fd = (project_at(eps).matrix() - project_at(-eps).matrix()) / C64::new(2.0 * eps, 0.0);
        assert!(max_abs(&(x - fd)) < 1e-5);
    }

    #[test]
    fn generator_reproduces_tangent() {
        let mut rng = SplitMix64::new(61);
        for _ in 0..10 {
            let frame = random_frame(&mut rng, 4, 2);
            let weights = w2(0.7, 0.3);
            let phi = random_frame_tangent(&mut rng, &frame);
            let t = tangent_to_orbit(&frame, &weights, &phi).unwrap();
            let k = generator_for(&t);
            let rho = project(&frame, &weights).unwrap();
            let reproduced = algebra::commutator(&k, rho.matrix()) * C64::new(0.0, -1.0);
            assert!(max_abs(&(reproduced - t.x_matrix())) < 1e-12);
        }
    }

    #[test]
    fn generator_hand_checkable_case() {
        // χ = 0, h₁₂ = 1, canonical frame in C³: K = −(e₁e₂† + e₂e₁†)
        let frame = Frame::canonical(3, 2);
        let weights = w2(0.7, 0.3);
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = C64::new(1.0, 0.0);
        h[(1, 0)] = C64::new(1.0, 0.0);
        let phi = FrameTangent::new(h, CMatrix::zeros(3, 2));
        let t = tangent_to_orbit(&frame, &weights, &phi).unwrap();
        let k = generator_for(&t);
        let mut expect = CMatrix::zeros(3, 3);
        expect[(0, 1)] = C64::new(-1.0, 0.0);
        expect[(1, 0)] = C64::new(-1.0, 0.0);
        assert!(max_abs(&(&k - expect)) < 1e-15);
        let rho = project(&frame, &weights).unwrap();
        let x = algebra::commutator(&k, rho.matrix()) * C64::new(0.0, -1.0);
        assert!(max_abs(&(x - t.x_matrix())) < 1e-14);
    }

    #[test]
    fn kks_antisymmetric_and_consistent() {
        let mut rng = SplitMix64::new(67);
        let frame = random_frame(&mut rng, 4, 2);
        let weights = w2(0.7, 0.3);
        let rho = project(&frame, &weights).unwrap();
        for _ in 0..50 {
            let p1 = random_frame_tangent(&mut rng, &frame);
            let p2 = random_frame_tangent(&mut rng, &frame);
            let t1 = tangent_to_orbit(&frame, &weights, &p1).unwrap();
            let t2 = tangent_to_orbit(&frame, &weights, &p2).unwrap();
            let k1 = generator_for(&t1);
            let k2 = generator_for(&t2);
            let ab = kks_eval(&rho, &k1, &k2).unwrap();
            let ba = kks_eval(&rho, &k2, &k1).unwrap();
            assert!((ab + ba).abs() < 1e-12);
            let closed = kks_closed_form(&t1, &t2).unwrap();
            assert!((ab - closed).abs() < 1e-12, "trace {ab} vs closed {closed}");
            assert!(kks_eval(&rho, &k1, &k1).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn kks_pure_state_reduction() {
        // k = 1: Ω(X′, X″) = 2 Im(χ′, χ″)
        let mut rng = SplitMix64::new(71);
        let frame = random_frame(&mut rng, 3, 1);
        let weights = SpectralWeights::new(vec![1.0]).unwrap();
        let rho = project(&frame, &weights).unwrap();
        for _ in 0..20 {
            let p1 = random_frame_tangent(&mut rng, &frame);
            let p2 = random_frame_tangent(&mut rng, &frame);
            let chi1 = p1.chi.column(0).into_owned();
            let chi2 = p2.chi.column(0).into_owned();
            let k1 = (&chi1 * frame.column(0).adjoint() - frame.column(0) * chi1.adjoint())
                * C64::new(0.0, 1.0);
            let k2 = (&chi2 * frame.column(0).adjoint() - frame.column(0) * chi2.adjoint())
                * C64::new(0.0, 1.0);
            let val = kks_eval(&rho, &k1, &k2).unwrap();
            let expect = 2.0 * inner(&chi1, &chi2).im;
            assert!((val - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn kks_closed_form_pinned_value() {
        let frame = Frame::canonical(3, 2);
        let weights = w2(0.7, 0.3);
        let mut h1 = CMatrix::zeros(2, 2);
        h1[(0, 1)] = C64::new(1.0, 0.0);
        h1[(1, 0)] = C64::new(1.0, 0.0);
        let mut h2 = CMatrix::zeros(2, 2);
        h2[(0, 1)] = C64::new(0.0, 1.0);
        h2[(1, 0)] = C64::new(0.0, -1.0);
        let t1 = OrbitTangent {
            h: h1,
            chi: CMatrix::zeros(3, 2),
            frame: frame.clone(),
            weights: weights.clone(),
        };
        let t2 = OrbitTangent {
            h: h2,
            chi: CMatrix::zeros(3, 2),
            frame,
            weights,
        };
        let val = kks_closed_form(&t1, &t2).unwrap();
        assert!((val - (-0.8)).abs() < 1e-14);
        assert!(kks_closed_form(&t1, &t1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn da_closed_form_pinned_values() {
        let mut h1 = CMatrix::zeros(2, 2);
        h1[(0, 1)] = C64::new(1.0, 0.0);
        h1[(1, 0)] = C64::new(1.0, 0.0);
        let mut h2 = CMatrix::zeros(2, 2);
        h2[(0, 1)] = C64::new(0.0, 1.0);
        h2[(1, 0)] = C64::new(0.0, -1.0);
        let t1 = FrameTangent::new(h1, CMatrix::zeros(4, 2));
        let t2 = FrameTangent::new(h2, CMatrix::zeros(4, 2));
        let (da1, da2) = da_closed_form(&t1, &t2).unwrap();
        assert!((da1 - (-2.0)).abs() < 1e-14);
        assert!((da2 - 2.0).abs() < 1e-14);
        let (z1, z2) = da_closed_form(&t1, &t1).unwrap();
        assert!(z1.abs() < 1e-15 && z2.abs() < 1e-15);
    }

    #[test]
    fn pullback_identity_random_pairs() {
        let mut rng = SplitMix64::new(73);
        for n in [3usize, 4, 5] {
            let frame = random_frame(&mut rng, n, 2);
            let weights = w2(0.7, 0.3);
            for _ in 0..20 {
                let t1 = random_frame_tangent(&mut rng, &frame);
                let t2 = random_frame_tangent(&mut rng, &frame);
                let (lhs, rhs) = pullback_check(&frame, &weights, &t1, &t2).unwrap();
                assert!((lhs - rhs).abs() < 1e-10, "n={n}: {lhs} vs {rhs}");
            }
            // purely vertical first argument: both sides vanish
            let mut h = CMatrix::zeros(2, 2);
            h[(0, 0)] = C64::new(1.3, 0.0);
            h[(1, 1)] = C64::new(-0.4, 0.0);
            let vert = FrameTangent::new(h, CMatrix::zeros(n, 2));
            let t2 = random_frame_tangent(&mut rng, &frame);
            let (lhs, rhs) = pullback_check(&frame, &weights, &vert, &t2).unwrap();
            assert!(lhs.abs() < 1e-12 && rhs.abs() < 1e-12);
        }
    }

    #[test]
    fn chart_round_trip() {
        let mut rng = SplitMix64::new(79);
        for _ in 0..20 {
            let reference = random_frame(&mut rng, 4, 2);
            // a frame near the reference: retract a modest tangent move
            let phi = random_frame_tangent(&mut rng, &reference);
            let m = reference.matrix() + phi.phi_matrix(&reference) * C64::new(0.15, 0.0);
            let cols: Vec<CVector> = (0..2).map(|c| m.column(c).into_owned()).collect();
            let psi = Frame::gram_schmidt(&cols).unwrap();

            let coords = chart_encode(&reference, &psi).unwrap();
            let back = chart_decode(&reference, &coords).unwrap();
            assert!(psi.distance(&back) < 1e-10);

            let coords2 = chart_encode(&reference, &back).unwrap();
            assert!((coords.z - coords2.z).norm() < 1e-10);
            assert!((&coords.chi0 - &coords2.chi0).norm() < 1e-10);
            assert!((coords.alpha[0] - coords2.alpha[0]).abs() < 1e-10);
            assert!((coords.alpha[1] - coords2.alpha[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn chart_center_and_fiber_motion() {
        let mut rng = SplitMix64::new(83);
        let reference = random_frame(&mut rng, 4, 2);
        let coords = chart_encode(&reference, &reference).unwrap();
        assert!(coords.z.norm() < 1e-14);
        assert!(coords.chi0.norm() < 1e-14);
        assert!(coords.alpha[0].abs() < 1e-14 && coords.alpha[1].abs() < 1e-14);

        let dressed = reference.apply_phases(&[0.9, -1.7]);
        let coords = chart_encode(&reference, &dressed).unwrap();
        assert!(coords.z.norm() < 1e-13);
        assert!(coords.chi0.norm() < 1e-13);
        assert!((coords.alpha[0] - 0.9).abs() < 1e-12);
        assert!((coords.alpha[1] - (-1.7 + std::f64::consts::TAU)).abs() < 1e-12
            || (coords.alpha[1] - (-1.7)).abs() < 1e-12);
    }

    #[test]
    fn chart_decode_z_only() {
        let reference = Frame::canonical(4, 2);
        let mut coords = ChartCoords::origin(4);
        coords.z = C64::new(0.6, 0.0);
        let psi = chart_decode(&reference, &coords).unwrap();
        // Ψ = Ψ₀·𝒰(0.6): diagonal entries √(1−0.36) = 0.8
        assert!((psi.matrix()[(0, 0)] - C64::new(0.8, 0.0)).norm() < 1e-14);
        assert!((psi.matrix()[(0, 1)] - C64::new(0.6, 0.0)).norm() < 1e-14);
        assert!((psi.matrix()[(1, 0)] - C64::new(-0.6, 0.0)).norm() < 1e-14);
        assert!((psi.matrix()[(1, 1)] - C64::new(0.8, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn chart_rejects_out_of_domain() {
        let reference = Frame::canonical(4, 2);
        // orthogonal frame: S is singular
        let far = Frame::new(CMatrix::from_fn(4, 2, |r, c| {
            C64::new(((r, c) == (2, 0) || (r, c) == (3, 1)) as u8 as f64, 0.0)
        }))
        .unwrap();
        assert!(matches!(
            chart_encode(&reference, &far),
            Err(Error::OutsideChart(_))
        ));

        let mut coords = ChartCoords::origin(4);
        coords.z = C64::new(1.2, 0.0);
        assert!(matches!(
            chart_decode(&reference, &coords),
            Err(Error::OutsideChart(_))
        ));
    }

    #[test]
    fn surface_integral_constant_surface_is_zero() {
        let weights = w2(0.7, 0.3);
        let rho = project(&Frame::canonical(3, 2), &weights).unwrap();
        let surf = FnSurface {
            n: 3,
            weights,
            f: move |_u: f64, _v: f64| rho.clone(),
        };
        let val = surface_integral_fixed(&surf, 8).unwrap();
        assert!(val.abs() < 1e-12);
    }

    #[test]
    fn surface_integral_additive_and_orientation() {
        let weights = w2(0.7, 0.3);
        let curve = random_orbit_loop(&weights, 3, 2, 2024).unwrap();
        let cone = ConeSurface::new(&curve);
        let opts = QuadratureOptions {
            quad_tol: 1e-6,
            initial_grid: 8,
            max_grid: 512,
        };
        let whole = surface_integral(&cone, &opts).unwrap().value;

        // split the u-domain in half
        let left = FnSurface {
            n: 3,
            weights: weights.clone(),
            f: |u: f64, v: f64| cone.density(0.5 * u, v),
        };
        let right = FnSurface {
            n: 3,
            weights: weights.clone(),
            f: |u: f64, v: f64| cone.density(0.5 + 0.5 * u, v),
        };
        let sum = surface_integral(&left, &opts).unwrap().value
            + surface_integral(&right, &opts).unwrap().value;
        assert!((whole - sum).abs() < 5e-6, "{whole} vs split {sum}");

        // orientation-preserving reparametrization u → u²
        let reparam = FnSurface {
            n: 3,
            weights: weights.clone(),
            f: |u: f64, v: f64| cone.density(u * u, v),
        };
        let rep = surface_integral(&reparam, &opts).unwrap().value;
        assert!((whole - rep).abs() < 5e-6, "{whole} vs reparam {rep}");

        // orientation reversal flips the sign
        let flipped = FnSurface {
            n: 3,
            weights,
            f: |u: f64, v: f64| cone.density(v, u),
        };
        let neg = surface_integral(&flipped, &opts).unwrap().value;
        assert!((whole + neg).abs() < 5e-6, "{whole} vs flipped {neg}");
    }
}

//! Horizontal lifts, accumulated per-level geometric phases, the weighted
//! area identity, and the path-ordered exponential.
//!
//! Two phase estimators coexist:
//!
//! * [`geometric_phases`] on an [`OrbitCurve`] with a closed unitary family
//!   uses the moving gauge `m_a(s) = V(s) r_a(0)`: per-step increments
//!   `arg(r_a(0), V(s_i)†V(s_{i+1}) r_a(0))` are small, independent of any
//!   eigenvector phase choice, and their sum fixes the accumulated
//!   (non-mod-2π) value of each level — including windings beyond ±π that
//!   the density samples alone cannot resolve.
//! * [`geometric_phases_sampled`] on a bare [`OrbitPath`] sums the args of
//!   consecutive spectral-frame overlaps in the deterministic phase
//!   convention. It agrees with the moving-gauge rule whenever per-level
//!   phases stay inside (−π, π]; for larger windings only the curve form is
//!   branch-reliable.
//!
//! Phases are accumulated step by step as small args and never reduced
//! mod 2π at the end; the weighted average is what the symplectic area of a
//! spanning surface reproduces with opposite sign.

use crate::algebra::{self, expm_skew, inner, CMatrix, C64};
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{surface_integral, QuadratureOptions, Surface};
use crate::states::{
    spectral_frame, DensityMatrix, Frame, FramePath, OrbitCurve, OrbitPath, OrbitPoint,
    SpectralWeights,
};

/// Consecutive-overlap magnitude below which a step is rejected as too
/// large.
pub const MIN_STEP_OVERLAP: f64 = 0.1;

#[derive(Debug, Clone, Copy)]
pub struct PhaseOptions {
    /// Refinement stops when no per-level phase changes by more than this
    /// between successive step doublings.
    pub phase_tol: f64,
    pub initial_steps: usize,
    pub max_steps: usize,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self {
            phase_tol: 1e-6,
            initial_steps: 2048,
            max_steps: 1 << 21,
        }
    }
}

/// Accumulated per-level phases and their κ-weighted average.
#[derive(Debug, Clone)]
pub struct PhaseReport {
    pub per_level: Vec<f64>,
    pub weighted: f64,
    pub steps: usize,
    /// Both estimators are kinematic: the phases depend on the traced loop
    /// alone, with no dynamical contribution from traversal speed or a
    /// generating Hamiltonian.
    pub dynamical_free: bool,
}

impl PhaseReport {
    fn new(weights: &SpectralWeights, per_level: Vec<f64>, steps: usize) -> Self {
        let weighted = weights.weighted_sum(&per_level);
        Self { per_level, weighted, steps, dynamical_free: true }
    }
}

/// One moving-gauge pass at a fixed step count.
fn phases_pass_curve(curve: &dyn OrbitCurve, steps: usize) -> Result<Vec<f64>> {
    let k = curve.weights().k();
    let rho0 = curve.density(0.0);
    let (frame0, _) = spectral_frame(&rho0, k)?;
    let cols: Vec<_> = (0..k).map(|a| frame0.column(a)).collect();

    let unitaries: Vec<CMatrix> =
        exec::map_indexed(steps + 1, |i| curve.unitary_at(i as f64 / steps as f64));

    let mut sums = vec![0.0; k];
    for i in 0..steps {
        let g = unitaries[i].adjoint() * &unitaries[i + 1];
        for (a, col) in cols.iter().enumerate() {
            let ov = inner(col, &(&g * col));
            if ov.norm() < MIN_STEP_OVERLAP {
                return Err(Error::StepTooLarge {
                    s: i as f64 / steps as f64,
                    level: a,
                    overlap: ov.norm(),
                });
            }
            sums[a] += ov.arg();
        }
    }

    // Closure of the moving gauge: V(1) = I for a closed family, so this
    // term only absorbs roundoff there.
    let v_end = &unitaries[steps];
    let mut phases = Vec::with_capacity(k);
    for (a, col) in cols.iter().enumerate() {
        let closure = inner(col, &(v_end * col)).arg();
        phases.push(closure - sums[a]);
    }
    Ok(phases)
}

/// One convention-gauge pass over fixed samples.
fn phases_pass_sampled(path: &OrbitPath) -> Result<Vec<f64>> {
    let k = path.k();
    let frames: Vec<Result<Frame>> = exec::map_indexed(path.len(), |i| {
        Ok(spectral_frame(&path.samples[i].1, k)?.0)
    });
    let mut collected = Vec::with_capacity(path.len());
    for f in frames {
        collected.push(f?);
    }

    // Guard against eigensolver column swaps: with a strictly decreasing
    // spectrum the maximal-overlap pairing must be the identity.
    for w in collected.windows(2) {
        let overlap = w[0].matrix().adjoint() * w[1].matrix();
        for a in 0..k {
            let mut best = 0;
            let mut best_mod = 0.0;
            for b in 0..k {
                if overlap[(a, b)].norm() > best_mod {
                    best_mod = overlap[(a, b)].norm();
                    best = b;
                }
            }
            if best != a {
                return Err(Error::Contract(format!(
                    "spectral frame columns swapped between samples (level {a} pairs with {best})"
                )));
            }
        }
    }

    let mut sums = vec![0.0; k];
    for i in 0..collected.len() - 1 {
        for a in 0..k {
            let ov = inner(&collected[i].column(a), &collected[i + 1].column(a));
            if ov.norm() < MIN_STEP_OVERLAP {
                return Err(Error::StepTooLarge {
                    s: path.samples[i].0,
                    level: a,
                    overlap: ov.norm(),
                });
            }
            sums[a] += ov.arg();
        }
    }
    Ok(sums.into_iter().map(|s| -s).collect())
}

/// Accumulated per-level phases of a closed loop, with dyadic step
/// refinement until every level moves by less than `phase_tol`.
pub fn geometric_phases(curve: &dyn OrbitCurve, opts: &PhaseOptions) -> Result<PhaseReport> {
    if !curve.closed() {
        return Err(Error::Contract("geometric phases need a closed loop".into()));
    }
    let mut steps = opts.initial_steps.max(2);
    let mut prev: Option<Vec<f64>> = None;
    loop {
        let phases = if curve.closed_unitary_family() {
            phases_pass_curve(curve, steps)?
        } else {
            phases_pass_sampled(&curve.sample(steps))?
        };
        if let Some(p) = &prev {
            let change = p
                .iter()
                .zip(&phases)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if change < opts.phase_tol {
                return Ok(PhaseReport::new(curve.weights(), phases, steps));
            }
            if steps >= opts.max_steps {
                return Err(Error::PhaseDiverged {
                    tol: opts.phase_tol,
                    change,
                    steps,
                });
            }
        } else if steps >= opts.max_steps {
            return Err(Error::PhaseDiverged {
                tol: opts.phase_tol,
                change: f64::NAN,
                steps,
            });
        }
        prev = Some(phases);
        steps *= 2;
    }
}

/// Single-pass phases of an already-sampled closed path (no refinement).
pub fn geometric_phases_sampled(path: &OrbitPath) -> Result<PhaseReport> {
    if !path.closed {
        return Err(Error::Contract("geometric phases need a closed loop".into()));
    }
    let gap = path.endpoint_gap();
    if gap > crate::states::CLOSURE_TOL {
        return Err(Error::NotClosed(gap));
    }
    let phases = phases_pass_sampled(path)?;
    Ok(PhaseReport::new(&path.weights, phases, path.len() - 1))
}

/// Discrete horizontal lift: at each step take the next sample's spectral
/// frame and rescale each column by the unit phase that makes the overlap
/// with the previous lifted column real positive (per-step Pancharatnam
/// alignment). The initial frame must project onto the path start.
pub fn horizontal_lift(path: &OrbitPath, initial: &Frame) -> Result<FramePath> {
    let k = path.k();
    if initial.k() != k || initial.n() != path.n() {
        return Err(Error::DimensionMismatch("initial frame shape mismatch".into()));
    }
    let projected = crate::states::project(initial, &path.weights)?;
    let gap = projected.distance(path.first());
    if gap > 1e-10 {
        return Err(Error::Contract(format!(
            "initial frame projects {gap:.3e} away from the path start"
        )));
    }

    let frames: Vec<Result<Frame>> = exec::map_indexed(path.len(), |i| {
        Ok(spectral_frame(&path.samples[i].1, k)?.0)
    });
    let mut raw = Vec::with_capacity(path.len());
    for f in frames {
        raw.push(f?);
    }

    let mut lifted: Vec<(f64, Frame)> = Vec::with_capacity(path.len());
    lifted.push((path.samples[0].0, initial.clone()));
    for i in 1..path.len() {
        let prev = &lifted[i - 1].1;
        let mut m = raw[i].matrix().clone();
        for a in 0..k {
            let ov = inner(&prev.column(a), &raw[i].column(a));
            if ov.norm() < MIN_STEP_OVERLAP {
                return Err(Error::StepTooLarge {
                    s: path.samples[i].0,
                    level: a,
                    overlap: ov.norm(),
                });
            }
            let phase = ov.conj() / C64::new(ov.norm(), 0.0);
            for r in 0..m.nrows() {
                m[(r, a)] *= phase;
            }
        }
        lifted.push((path.samples[i].0, Frame::new_unchecked(m)));
    }
    Ok(FramePath {
        weights: path.weights.clone(),
        samples: lifted,
    })
}

/// Outcome of checking the weighted phases against the symplectic area of a
/// spanning surface.
#[derive(Debug, Clone)]
pub struct AreaIdentity {
    pub phases: PhaseReport,
    /// `∬_S Ω` as integrated.
    pub area: f64,
    /// `−∬_S Ω`, the value the weighted phase should equal.
    pub minus_area: f64,
    pub residual: f64,
    pub grid: usize,
}

/// Verify `Σ_a κ_a φ⁽ᵃ⁾ = −∬_S Ω` for a loop and a surface spanning it
/// (the loop must be the surface's `v = 0` edge).
pub fn verify_area_identity(
    curve: &dyn OrbitCurve,
    surface: &dyn Surface,
    phase_opts: &PhaseOptions,
    quad_opts: &QuadratureOptions,
) -> Result<AreaIdentity> {
    let checks = 17;
    for i in 0..=checks {
        let u = i as f64 / checks as f64;
        let gap = surface.density(u, 0.0).distance(&curve.density(u));
        if gap > 1e-9 {
            return Err(Error::BoundaryMismatch(format!(
                "at u = {u}: surface edge differs from loop by {gap:.3e}"
            )));
        }
    }
    let phases = geometric_phases(curve, phase_opts)?;
    let quad = surface_integral(surface, quad_opts)?;
    let residual = (phases.weighted + quad.value).abs();
    Ok(AreaIdentity {
        phases,
        area: quad.value,
        minus_area: -quad.value,
        residual,
        grid: quad.grid,
    })
}

/// Coefficient sampling rule for the ordered product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderedExpMethod {
    /// Left sample of each interval.
    Product,
    /// Average of the two interval endpoints.
    Midpoint,
}

/// Path-ordered exponential `P exp(−i ∫ 𝒜(s) ds)` of a sampled Hermitian
/// coefficient, as an ordered product of step exponentials with later
/// parameter values to the left. For commuting samples this equals the
/// exponential of the summed integral.
pub fn path_ordered_exp(
    samples: &[(f64, CMatrix)],
    method: OrderedExpMethod,
) -> Result<CMatrix> {
    if samples.len() < 2 {
        return Err(Error::Validation("ordered exponential needs at least two samples".into()));
    }
    let d = samples[0].1.nrows();
    for (s, m) in samples {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "coefficient at s={s} is not {d}×{d}"
            )));
        }
        algebra::check_hermitian(m, "ordered-exponential coefficient")?;
    }
    for w in samples.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Validation("sample parameters must strictly increase".into()));
        }
    }
    let mut u = algebra::identity(d);
    for i in 0..samples.len() - 1 {
        let dt = samples[i + 1].0 - samples[i].0;
        let coeff = match method {
            OrderedExpMethod::Product => samples[i].1.clone(),
            OrderedExpMethod::Midpoint => (&samples[i].1 + &samples[i + 1].1) * C64::new(0.5, 0.0),
        };
        let step = expm_skew(&coeff, dt)?;
        u = step * u;
    }
    Ok(u)
}

/// Holonomy of a closed loop for a connection given by a coefficient
/// sampler along the loop parameter.
pub fn holonomy_of_loop(
    path: &OrbitPath,
    sampler: &dyn Fn(f64) -> CMatrix,
) -> Result<CMatrix> {
    if !path.closed {
        return Err(Error::Contract("holonomy needs a closed loop".into()));
    }
    let samples: Vec<(f64, CMatrix)> = path.samples.iter().map(|(s, _)| (*s, sampler(*s))).collect();
    path_ordered_exp(&samples, OrderedExpMethod::Midpoint)
}

/// Cyclic Hamiltonian evolution `ρ(s) = e^{−i s T H} ρ₀ e^{+i s T H}`.
/// Cyclicity means `exp(−iTH)` commutes with `ρ₀`; the unitary family
/// itself does not close, so phase estimates fall back to the sampled rule.
pub struct HamiltonianLoop {
    h: CMatrix,
    rho0: OrbitPoint,
    t_total: f64,
}

impl HamiltonianLoop {
    pub fn new(h: CMatrix, rho0: OrbitPoint, t_total: f64) -> Result<Self> {
        algebra::check_hermitian(&h, "Hamiltonian")?;
        if h.nrows() != rho0.n() {
            return Err(Error::DimensionMismatch("Hamiltonian dimension mismatch".into()));
        }
        let u_t = expm_skew(&h, t_total)?;
        let comm = algebra::commutator(&u_t, rho0.density.matrix());
        let norm = comm.norm();
        if norm > 1e-10 {
            return Err(Error::NonCyclic(norm));
        }
        Ok(Self { h, rho0, t_total })
    }
}

impl OrbitCurve for HamiltonianLoop {
    fn n(&self) -> usize {
        self.rho0.n()
    }

    fn weights(&self) -> &SpectralWeights {
        &self.rho0.weights
    }

    fn density(&self, s: f64) -> DensityMatrix {
        self.rho0.density.conjugate(&self.unitary_at(s))
    }

    fn unitary_at(&self, s: f64) -> CMatrix {
        expm_skew(&self.h, s * self.t_total).expect("Hamiltonian is Hermitian")
    }

    fn closed_unitary_family(&self) -> bool {
        false
    }
}

/// Cyclic evolution sampled into a path; the closure flag is set after the
/// cyclicity check.
pub fn hamiltonian_loop(
    h: CMatrix,
    rho0: OrbitPoint,
    t_total: f64,
    steps: usize,
) -> Result<OrbitPath> {
    let curve = HamiltonianLoop::new(h, rho0, t_total)?;
    Ok(curve.sample(steps))
}

// ---------------------------------------------------------------------------
// Curve combinators
// ---------------------------------------------------------------------------

/// Concatenation of chained segments over a uniform parameter split. The
/// unitary family composes through the junctions; the loop counts as a
/// closed family when the composed `V(1)` lands back on the identity.
pub struct ConcatCurve {
    parts: Vec<Box<dyn OrbitCurve>>,
    prefixes: Vec<CMatrix>,
    closed_family: bool,
    closed: bool,
}

impl ConcatCurve {
    pub fn new(parts: Vec<Box<dyn OrbitCurve>>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Validation("concatenation needs at least one part".into()));
        }
        let n = parts[0].n();
        for w in parts.windows(2) {
            let gap = w[0].density(1.0).distance(&w[1].density(0.0));
            if gap > 1e-9 {
                return Err(Error::ChainingMismatch(format!(
                    "segment endpoints differ by {gap:.3e}"
                )));
            }
        }
        let mut prefixes = vec![algebra::identity(n)];
        for p in &parts {
            let last = prefixes.last().unwrap();
            prefixes.push(p.unitary_at(1.0) * last);
        }
        let total = prefixes.last().unwrap();
        let closed_family = (total - algebra::identity(n)).norm() < 1e-10;
        let closed = parts
            .last()
            .unwrap()
            .density(1.0)
            .distance(&parts[0].density(0.0))
            < 1e-9;
        Ok(Self { parts, prefixes, closed_family, closed })
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let p = self.parts.len() as f64;
        let scaled = (s.clamp(0.0, 1.0)) * p;
        let mut idx = scaled.floor() as usize;
        if idx >= self.parts.len() {
            idx = self.parts.len() - 1;
        }
        (idx, scaled - idx as f64)
    }
}

impl OrbitCurve for ConcatCurve {
    fn n(&self) -> usize {
        self.parts[0].n()
    }

    fn weights(&self) -> &SpectralWeights {
        self.parts[0].weights()
    }

    fn density(&self, s: f64) -> DensityMatrix {
        let (idx, t) = self.locate(s);
        self.parts[idx].density(t)
    }

    fn unitary_at(&self, s: f64) -> CMatrix {
        let (idx, t) = self.locate(s);
        self.parts[idx].unitary_at(t) * &self.prefixes[idx]
    }

    fn closed(&self) -> bool {
        self.closed
    }

    fn closed_unitary_family(&self) -> bool {
        self.closed_family
    }
}

/// Orientation reversal: `ρ_rev(s) = ρ(1−s)`.
pub struct Reversed<C: OrbitCurve>(pub C);

impl<C: OrbitCurve> OrbitCurve for Reversed<C> {
    fn n(&self) -> usize {
        self.0.n()
    }

    fn weights(&self) -> &SpectralWeights {
        self.0.weights()
    }

    fn density(&self, s: f64) -> DensityMatrix {
        self.0.density(1.0 - s)
    }

    fn unitary_at(&self, s: f64) -> CMatrix {
        self.0.unitary_at(1.0 - s) * self.0.unitary_at(1.0).adjoint()
    }

    fn closed(&self) -> bool {
        self.0.closed()
    }

    fn closed_unitary_family(&self) -> bool {
        self.0.closed_unitary_family()
    }
}

/// Monotone reparametrization `s ↦ f(s)` with `f(0) = 0`, `f(1) = 1`.
pub struct Reparam<C: OrbitCurve, F: Fn(f64) -> f64 + Sync> {
    pub curve: C,
    pub f: F,
}

impl<C: OrbitCurve, F: Fn(f64) -> f64 + Sync> OrbitCurve for Reparam<C, F> {
    fn n(&self) -> usize {
        self.curve.n()
    }

    fn weights(&self) -> &SpectralWeights {
        self.curve.weights()
    }

    fn density(&self, s: f64) -> DensityMatrix {
        self.curve.density((self.f)(s))
    }

    fn unitary_at(&self, s: f64) -> CMatrix {
        self.curve.unitary_at((self.f)(s))
    }

    fn closed(&self) -> bool {
        self.curve.closed()
    }

    fn closed_unitary_family(&self) -> bool {
        self.curve.closed_unitary_family()
    }
}

//! Frames, spectral weights, density matrices, and the projection between
//! frame space and orbit space.
//!
//! A `Frame` is an ordered k-tuple of orthonormal vectors in Cⁿ (an n×k
//! matrix `Ψ` with `Ψ†Ψ = I`). `SpectralWeights` is the strictly decreasing
//! positive spectrum `κ` that labels a coadjoint orbit. `project` maps a
//! frame to the density matrix `Ψ κ Ψ†`; `spectral_frame` inverts it up to
//! the per-column phase freedom, which a deterministic phase convention then
//! removes.

use crate::algebra::{
    self, expm_skew, hermitian_eigen_desc, max_abs, CMatrix, CVector, C64,
};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Non-degeneracy threshold for eigenvalue gaps; the framework assumes a
/// non-degenerate nonzero spectrum, so near-degenerate inputs are rejected
/// rather than perturbed.
pub const GAP_TOL: f64 = 1e-8;
/// Spectrum-matching tolerance for orbit membership.
pub const ORBIT_TOL: f64 = 1e-9;
/// Residual-eigenvalue bound defining the rank of an orbit point.
pub const RANK_RESIDUAL_TOL: f64 = 1e-10;
/// Endpoint tolerance for a closed discretized path.
pub const CLOSURE_TOL: f64 = 1e-10;

/// Strictly decreasing positive weights summing to one. For k = 1 the single
/// weight is exactly 1 (the pure-state case).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWeights {
    values: Vec<f64>,
}

impl SpectralWeights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_sum_tol(values, 1e-12)
    }

    fn with_sum_tol(values: Vec<f64>, sum_tol: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("weights: empty".into()));
        }
        for w in values.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::Validation(format!(
                    "weights must be strictly decreasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if values.iter().any(|&v| v <= 0.0 || v > 1.0 + sum_tol) {
            return Err(Error::Validation(format!("weights out of (0, 1]: {values:?}")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > sum_tol {
            return Err(Error::Validation(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { values })
    }

    /// From eigenvalues of a unit-trace matrix; allows eigensolver-level
    /// slack in the sum, bounded by the orbit tolerance.
    pub(crate) fn from_eigenvalues(values: Vec<f64>) -> Result<Self> {
        Self::with_sum_tol(values, ORBIT_TOL)
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, a: usize) -> f64 {
        self.values[a]
    }

    /// k×k diagonal matrix `κ`.
    pub fn kappa_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.k(), self.k(), |r, c| {
            if r == c {
                C64::new(self.values[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Weighted sum `Σ κ_a x_a`.
    pub fn weighted_sum(&self, xs: &[f64]) -> f64 {
        self.values.iter().zip(xs).map(|(k, x)| k * x).sum()
    }

    pub fn close_to(&self, other: &Self, tol: f64) -> bool {
        self.k() == other.k()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Ordered orthonormal k-frame in Cⁿ.
#[derive(Debug, Clone)]
pub struct Frame {
    matrix: CMatrix,
}

impl Frame {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let (n, k) = (matrix.nrows(), matrix.ncols());
        if k == 0 || k > n {
            return Err(Error::DimensionMismatch(format!(
                "frame needs 1 ≤ k ≤ n, got n={n}, k={k}"
            )));
        }
        let gram = matrix.adjoint() * &matrix;
        let dev = max_abs(&(gram - algebra::identity(k)));
        if dev > algebra::HERMITIAN_TOL {
            return Err(Error::Contract(format!(
                "frame columns not orthonormal: deviation {dev:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Skips the orthonormality check; for internal construction from
    /// operations that preserve it.
    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// Orthonormalize the given columns; rank-deficient input is rejected.
    pub fn gram_schmidt(columns: &[CVector]) -> Result<Self> {
        Ok(Self::new_unchecked(algebra::gram_schmidt(columns)?))
    }

    /// First k canonical basis vectors of Cⁿ.
    pub fn canonical(n: usize, k: usize) -> Self {
        Self::new_unchecked(CMatrix::from_fn(n, k, |r, c| {
            C64::new((r == c) as u8 as f64, 0.0)
        }))
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn k(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn column(&self, a: usize) -> CVector {
        self.matrix.column(a).into_owned()
    }

    /// Multiply column a by `e^{i α_a}` (motion along the fiber).
    pub fn apply_phases(&self, alphas: &[f64]) -> Frame {
        assert_eq!(alphas.len(), self.k());
        let mut m = self.matrix.clone();
        for (a, &alpha) in alphas.iter().enumerate() {
            let phase = C64::new(alpha.cos(), alpha.sin());
            for r in 0..self.n() {
                m[(r, a)] *= phase;
            }
        }
        Self::new_unchecked(m)
    }

    /// Distance `‖Ψ − Φ‖` in Frobenius norm.
    pub fn distance(&self, other: &Frame) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

/// Deterministic per-column phase convention: the entry of largest modulus
/// (lowest index on ties) is made real positive. The fiber phase is free in
/// the geometry; fixing it makes round trips and resampled paths exact.
pub(crate) fn fix_column_phases(m: &mut CMatrix) {
    let (n, k) = (m.nrows(), m.ncols());
    for c in 0..k {
        let mut best = 0;
        let mut best_mod = 0.0;
        for r in 0..n {
            let q = m[(r, c)].norm();
            if q > best_mod {
                best_mod = q;
                best = r;
            }
        }
        if best_mod > 0.0 {
            let phase = m[(best, c)].conj() / C64::new(best_mod, 0.0);
            for r in 0..n {
                m[(r, c)] *= phase;
            }
        }
    }
}

/// Hermitian, PSD, unit-trace matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        algebra::check_hermitian(&matrix, "density matrix")?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::Contract(format!("density trace is {tr}, not 1")));
        }
        let (values, _) = hermitian_eigen_desc(&matrix)?;
        if let Some(&min) = values.last() {
            if min < -1e-12 {
                return Err(Error::Contract(format!(
                    "density matrix has negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { matrix })
    }

    /// For construction by operations that preserve validity (unitary
    /// conjugation, projection of a frame).
    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }

    /// Conjugate by a unitary: `U ρ U†`.
    pub fn conjugate(&self, u: &CMatrix) -> DensityMatrix {
        DensityMatrix::new_unchecked(u * &self.matrix * u.adjoint())
    }
}

/// A density matrix together with the orbit it claims to live on; the claim
/// is checked on construction.
#[derive(Debug, Clone)]
pub struct OrbitPoint {
    pub density: DensityMatrix,
    pub weights: SpectralWeights,
}

impl OrbitPoint {
    pub fn new(density: DensityMatrix, weights: SpectralWeights) -> Result<Self> {
        let (values, _) = hermitian_eigen_desc(density.matrix())?;
        let k = weights.k();
        for a in 0..k {
            if (values[a] - weights.get(a)).abs() > ORBIT_TOL {
                return Err(Error::NotOnOrbit(format!(
                    "eigenvalue {a} is {:.12}, expected {:.12}",
                    values[a],
                    weights.get(a)
                )));
            }
        }
        for &v in &values[k..] {
            if v.abs() > ORBIT_TOL {
                return Err(Error::NotOnOrbit(format!(
                    "residual eigenvalue {v:.3e} exceeds orbit tolerance"
                )));
            }
        }
        Ok(Self { density, weights })
    }

    pub fn n(&self) -> usize {
        self.density.n()
    }

    pub fn k(&self) -> usize {
        self.weights.k()
    }
}

/// `ρ = Ψ κ Ψ† = Σ_a κ_a ψ_a ψ_a†`. Invariant under per-column phase
/// changes of the frame.
pub fn project(frame: &Frame, weights: &SpectralWeights) -> Result<DensityMatrix> {
    if frame.k() != weights.k() {
        return Err(Error::DimensionMismatch(format!(
            "frame has k={}, weights have k={}",
            frame.k(),
            weights.k()
        )));
    }
    let m = frame.matrix() * weights.kappa_matrix() * frame.matrix().adjoint();
    Ok(DensityMatrix::new_unchecked(m))
}

/// Canonical spectral decomposition: the frame of the k leading eigenvectors
/// (phase-fixed by the deterministic convention) and the leading eigenvalues
/// as weights. Requires a positive, pairwise-separated leading spectrum and
/// negligible residual eigenvalues.
pub fn spectral_frame(rho: &DensityMatrix, k: usize) -> Result<(Frame, SpectralWeights)> {
    let n = rho.n();
    if k == 0 || k > n {
        return Err(Error::DimensionMismatch(format!(
            "spectral frame needs 1 ≤ k ≤ n, got k={k}, n={n}"
        )));
    }
    let (values, vectors) = hermitian_eigen_desc(rho.matrix())?;
    if values[k - 1] <= 0.0 {
        return Err(Error::NotOnOrbit(format!(
            "leading eigenvalue {k} is {:.3e}, not positive",
            values[k - 1]
        )));
    }
    for a in 0..k.saturating_sub(1) {
        let gap = values[a] - values[a + 1];
        if gap < GAP_TOL {
            return Err(Error::Degeneracy { gap, min_gap: GAP_TOL });
        }
    }
    for &v in &values[k..] {
        if v.abs() > RANK_RESIDUAL_TOL {
            return Err(Error::NotOnOrbit(format!(
                "rank exceeds {k}: residual eigenvalue {v:.3e}"
            )));
        }
    }
    let mut m = CMatrix::from_fn(n, k, |r, c| vectors[(r, c)]);
    fix_column_phases(&mut m);
    let weights = SpectralWeights::from_eigenvalues(values[..k].to_vec())?;
    Ok((Frame::new_unchecked(m), weights))
}

/// Real dimensions of the frame space and the orbit: `(k(2n−k), k(2n−k−1))`.
pub fn dims(n: usize, k: usize) -> Result<(usize, usize)> {
    if k == 0 || k >= n {
        return Err(Error::DimensionMismatch(format!(
            "dims needs 1 ≤ k < n, got n={n}, k={k}"
        )));
    }
    Ok((k * (2 * n - k), k * (2 * n - k - 1)))
}

/// A curve of density matrices on one orbit, parametrized over [0, 1] and
/// realized by a continuous unitary family: `ρ(s) = V(s) ρ(0) V(s)†` with
/// `V(0) = I`.
///
/// The family pins down more than the density samples do: accumulated
/// (non-mod-2π) holonomy phases are branch-ambiguous given only the points
/// of a large loop, and the propagator `V(s_{i+1}) V(s_i)†` supplies the
/// canonical small-step increments that resolve the winding.
pub trait OrbitCurve: Sync {
    fn n(&self) -> usize;
    fn weights(&self) -> &SpectralWeights;
    fn density(&self, s: f64) -> DensityMatrix;

    /// `V(s)` with `ρ(s) = V(s) ρ(0) V(s)†` and `V(0) = I`.
    fn unitary_at(&self, s: f64) -> CMatrix;

    fn closed(&self) -> bool {
        true
    }

    /// Whether the unitary family itself closes: `V(1) = I`. Loops built
    /// from envelope generators or concatenated there-and-back segments
    /// close exactly; a Hamiltonian evolution generally does not, even when
    /// the density loop is cyclic.
    fn closed_unitary_family(&self) -> bool;

    /// Sample at `steps + 1` equally spaced parameters including both
    /// endpoints.
    fn sample(&self, steps: usize) -> OrbitPath {
        let samples = (0..=steps)
            .map(|i| {
                let s = i as f64 / steps as f64;
                (s, self.density(s))
            })
            .collect();
        OrbitPath {
            weights: self.weights().clone(),
            samples,
            closed: self.closed(),
        }
    }
}

/// Discretized curve in orbit space.
#[derive(Debug, Clone)]
pub struct OrbitPath {
    pub weights: SpectralWeights,
    pub samples: Vec<(f64, DensityMatrix)>,
    pub closed: bool,
}

impl OrbitPath {
    pub fn new(
        weights: SpectralWeights,
        samples: Vec<(f64, DensityMatrix)>,
        closed: bool,
    ) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Validation("path needs at least two samples".into()));
        }
        let n = samples[0].1.n();
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Validation(format!(
                    "path parameters must strictly increase, got {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if samples.iter().any(|(_, rho)| rho.n() != n) {
            return Err(Error::DimensionMismatch("path mixes dimensions".into()));
        }
        let path = Self { weights, samples, closed };
        if closed {
            let gap = path.endpoint_gap();
            if gap > CLOSURE_TOL {
                return Err(Error::NotClosed(gap));
            }
        }
        Ok(path)
    }

    pub fn n(&self) -> usize {
        self.samples[0].1.n()
    }

    pub fn k(&self) -> usize {
        self.weights.k()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &DensityMatrix {
        &self.samples[0].1
    }

    pub fn last(&self) -> &DensityMatrix {
        &self.samples[self.samples.len() - 1].1
    }

    pub fn endpoint_gap(&self) -> f64 {
        self.first().distance(self.last())
    }
}

/// Discretized curve in frame space.
#[derive(Debug, Clone)]
pub struct FramePath {
    pub weights: SpectralWeights,
    pub samples: Vec<(f64, Frame)>,
}

impl FramePath {
    pub fn k(&self) -> usize {
        self.weights.k()
    }
}

/// Closed loop `ρ(s) = V(s) ρ₀ V(s)†` with `V(s) = exp(i X(s))` and
/// `X(s) = Σ_m sin(πms) X_m`. The sine envelopes vanish at both endpoints,
/// so the loop closes by construction, not by tolerance.
pub struct ExponentialLoop {
    rho0: DensityMatrix,
    weights: SpectralWeights,
    modes: Vec<CMatrix>,
}

impl ExponentialLoop {
    pub fn new(rho0: DensityMatrix, weights: SpectralWeights, modes: Vec<CMatrix>) -> Result<Self> {
        let n = rho0.n();
        for (i, x) in modes.iter().enumerate() {
            if x.nrows() != n || x.ncols() != n {
                return Err(Error::DimensionMismatch(format!("mode {i} is not {n}×{n}")));
            }
            algebra::check_hermitian(x, "loop mode")?;
        }
        OrbitPoint::new(rho0.clone(), weights.clone())?;
        Ok(Self { rho0, weights, modes })
    }

    pub fn base(&self) -> &DensityMatrix {
        &self.rho0
    }

    /// `X(s) = Σ_m sin(πms) X_m`, exactly zero at the endpoints.
    pub fn generator_at(&self, s: f64) -> CMatrix {
        let n = self.rho0.n();
        let mut x = CMatrix::zeros(n, n);
        if s == 0.0 || s == 1.0 {
            return x;
        }
        for (i, mode) in self.modes.iter().enumerate() {
            let m = (i + 1) as f64;
            let env = (std::f64::consts::PI * m * s).sin();
            x += mode * C64::new(env, 0.0);
        }
        x
    }
}

impl OrbitCurve for ExponentialLoop {
    fn n(&self) -> usize {
        self.rho0.n()
    }

    fn weights(&self) -> &SpectralWeights {
        &self.weights
    }

    fn density(&self, s: f64) -> DensityMatrix {
        let v = self.unitary_at(s);
        self.rho0.conjugate(&v)
    }

    /// `V(s) = exp(iX(s))`; the sine envelopes make `V(0) = V(1) = I`.
    fn unitary_at(&self, s: f64) -> CMatrix {
        let x = self.generator_at(s);
        expm_skew(&x, -1.0).expect("loop generator is Hermitian")
    }

    fn closed_unitary_family(&self) -> bool {
        true
    }
}

/// Random closed loop through the canonical base point
/// `ρ₀ = diag(κ₁, …, κ_k, 0, …)`, generated by `modes` random traceless
/// Hermitian matrices with amplitude decaying as 1/m.
pub fn random_orbit_loop(
    weights: &SpectralWeights,
    n: usize,
    modes: usize,
    seed: u64,
) -> Result<ExponentialLoop> {
    if modes == 0 {
        return Err(Error::Validation("loop needs at least one mode".into()));
    }
    let k = weights.k();
    if k > n {
        return Err(Error::DimensionMismatch(format!(
            "rank k={k} exceeds ambient dimension {n}"
        )));
    }
    let frame = Frame::canonical(n, k);
    let rho0 = project(&frame, weights)?;
    let mut rng = SplitMix64::new(seed);
    let mode_mats = (0..modes)
        .map(|m| rng.hermitian_traceless(n) * C64::new(0.8 / (m + 1) as f64, 0.0))
        .collect();
    ExponentialLoop::new(rho0, weights.clone(), mode_mats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(values: &[f64]) -> SpectralWeights {
        SpectralWeights::new(values.to_vec()).unwrap()
    }

    #[test]
    fn weights_validation() {
        assert!(SpectralWeights::new(vec![0.7, 0.3]).is_ok());
        assert!(SpectralWeights::new(vec![1.0]).is_ok());
        // swapped order is rejected: weights must stay decreasing
        assert!(SpectralWeights::new(vec![0.3, 0.7]).is_err());
        assert!(SpectralWeights::new(vec![0.5, 0.5]).is_err());
        assert!(SpectralWeights::new(vec![0.7, 0.2]).is_err());
    }

    #[test]
    fn project_diagonal_case() {
        let frame = Frame::canonical(3, 2);
        let rho = project(&frame, &w(&[0.7, 0.3])).unwrap();
        let m = rho.matrix();
        assert!((m[(0, 0)] - C64::new(0.7, 0.0)).norm() < 1e-15);
        assert!((m[(1, 1)] - C64::new(0.3, 0.0)).norm() < 1e-15);
        assert!(m[(2, 2)].norm() < 1e-15);
    }

    #[test]
    fn project_fiber_invariant() {
        let mut rng = SplitMix64::new(2);
        let cols: Vec<CVector> = (0..2).map(|_| rng.complex_vector(4)).collect();
        let frame = Frame::gram_schmidt(&cols).unwrap();
        let weights = w(&[0.6, 0.4]);
        let rho = project(&frame, &weights).unwrap();
        let dressed = frame.apply_phases(&[1.234, -0.777]);
        let rho2 = project(&dressed, &weights).unwrap();
        assert!(rho.distance(&rho2) < 1e-15);
    }

    #[test]
    fn project_spectrum_matches_weights() {
        let mut rng = SplitMix64::new(4);
        let cols: Vec<CVector> = (0..2).map(|_| rng.complex_vector(5)).collect();
        let frame = Frame::gram_schmidt(&cols).unwrap();
        let rho = project(&frame, &w(&[0.6, 0.4])).unwrap();
        let (values, _) = hermitian_eigen_desc(rho.matrix()).unwrap();
        assert!((values[0] - 0.6).abs() < 1e-12);
        assert!((values[1] - 0.4).abs() < 1e-12);
        for &v in &values[2..] {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_frame_round_trip() {
        let mut rng = SplitMix64::new(6);
        let weights = w(&[0.7, 0.3]);
        let u = expm_skew(&rng.hermitian(3), 1.0).unwrap();
        let rho0 = project(&Frame::canonical(3, 2), &weights).unwrap();
        let rho = rho0.conjugate(&u);
        let (frame, back) = spectral_frame(&rho, 2).unwrap();
        assert!(back.close_to(&weights, 1e-12));
        let again = project(&frame, &back).unwrap();
        assert!(again.distance(&rho) < 1e-10);
    }

    #[test]
    fn spectral_frame_diagonal_case() {
        let rho = project(&Frame::canonical(3, 2), &w(&[0.7, 0.3])).unwrap();
        let (frame, weights) = spectral_frame(&rho, 2).unwrap();
        assert!(frame.distance(&Frame::canonical(3, 2)) < 1e-12);
        assert!((weights.get(0) - 0.7).abs() < 1e-14);
        assert!((weights.get(1) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn spectral_frame_rejects_degenerate() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(0.5, 0.0),
            C64::new(0.5, 0.0),
        ]));
        let rho = DensityMatrix::new(m).unwrap();
        assert!(matches!(
            spectral_frame(&rho, 2),
            Err(Error::Degeneracy { .. })
        ));
    }

    #[test]
    fn spectral_frame_is_exact_inverse_after_convention() {
        // spectral_frame ∘ project = identity on frames once both sides
        // carry the deterministic phase convention.
        let mut rng = SplitMix64::new(8);
        let cols: Vec<CVector> = (0..2).map(|_| rng.complex_vector(4)).collect();
        let mut m = Frame::gram_schmidt(&cols).unwrap().matrix().clone();
        fix_column_phases(&mut m);
        let frame = Frame::new(m).unwrap();
        let weights = w(&[0.7, 0.3]);
        let rho = project(&frame, &weights).unwrap();
        let (frame2, _) = spectral_frame(&rho, 2).unwrap();
        assert!(frame.distance(&frame2) < 1e-10);
    }

    #[test]
    fn dims_formula() {
        assert_eq!(dims(3, 2).unwrap(), (8, 6));
        assert_eq!(dims(2, 1).unwrap(), (3, 2));
        assert_eq!(dims(5, 3).unwrap(), (21, 18));
        assert!(dims(2, 2).is_err());
        // chart parameter count for k=2: 4(n−2) from the perpendicular block
        // plus 2 from z equals the orbit dimension
        for n in 3..=6 {
            let (_, dim_r) = dims(n, 2).unwrap();
            assert_eq!(4 * (n - 2) + 2, dim_r);
        }
    }

    #[test]
    fn unitary_conjugation_preserves_orbit() {
        let mut rng = SplitMix64::new(10);
        let weights = w(&[0.6, 0.4]);
        let rho = project(&Frame::canonical(4, 2), &weights).unwrap();
        let point = OrbitPoint::new(rho, weights.clone()).unwrap();
        let u = expm_skew(&rng.hermitian(4), 0.9).unwrap();
        let moved = point.density.conjugate(&u);
        assert!(OrbitPoint::new(moved, weights).is_ok());
    }

    #[test]
    fn random_loop_closes_exactly_and_stays_on_orbit() {
        let weights = w(&[0.7, 0.3]);
        let curve = random_orbit_loop(&weights, 3, 3, 123).unwrap();
        let path = curve.sample(16);
        assert_eq!(path.endpoint_gap(), 0.0);
        for (_, rho) in &path.samples {
            let (values, _) = hermitian_eigen_desc(rho.matrix()).unwrap();
            assert!((values[0] - 0.7).abs() < 1e-12);
            assert!((values[1] - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_modes_give_constant_path() {
        let weights = w(&[0.7, 0.3]);
        let rho0 = project(&Frame::canonical(3, 2), &weights).unwrap();
        let zero = CMatrix::zeros(3, 3);
        let curve = ExponentialLoop::new(rho0.clone(), weights, vec![zero]).unwrap();
        for i in 0..5 {
            let s = i as f64 / 4.0;
            assert!(curve.density(s).distance(&rho0) < 1e-15);
        }
    }
}

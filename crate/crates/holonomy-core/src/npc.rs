//! Bargmann invariants, null phase curves, Pancharatnam lifts, open-curve
//! geometric phases, and the non-additivity relation.
//!
//! Classification is per spectral level: a curve is class I when the
//! endpoint overlaps are nonzero, class II when all pairwise overlaps are,
//! and a null phase curve (NPC) when every three-point Bargmann invariant
//! `Tr(ρ_a(s) ρ_a(s′) ρ_a(s″))` is real positive. NPCs carry zero geometric
//! phase, their Pancharatnam lifts are horizontal, and closing an open curve
//! with an NPC defines its geometric phase through the symplectic area.

use crate::algebra::{inner, CMatrix, CVector, C64};
use crate::error::{Error, Result};
use crate::exec;
use crate::states::{
    project, spectral_frame, DensityMatrix, Frame, FramePath, OrbitPath,
};
use crate::transport::{geometric_phases_sampled, MIN_STEP_OVERLAP};

/// Absolute floor for the real part of a "real positive" quantity.
pub const REAL_POSITIVE_MIN: f64 = 1e-10;
/// Scale-relative bound on the imaginary part: `|Im| ≤ ratio · max(Re, floor)`.
pub const REAL_POSITIVE_IM_RATIO: f64 = 1e-8;
/// Curves are never triple-checked on more than this many subsampled points.
pub const MAX_TRIPLE_POINTS: usize = 30;

pub fn is_real_positive(z: C64) -> bool {
    z.re > REAL_POSITIVE_MIN && z.im.abs() <= REAL_POSITIVE_IM_RATIO * z.re.max(REAL_POSITIVE_MIN)
}

/// Three-point Bargmann invariant `Tr(P₁P₂P₃)` of rank-1 projectors.
/// Cyclically invariant; conjugated under order reversal.
pub fn bargmann3(p1: &CMatrix, p2: &CMatrix, p3: &CMatrix) -> Result<C64> {
    for (i, p) in [p1, p2, p3].iter().enumerate() {
        let n = p.nrows();
        if p.ncols() != n || n != p1.nrows() {
            return Err(Error::DimensionMismatch("projectors must be square, same size".into()));
        }
        let herm = crate::algebra::hermitian_deviation(p);
        let idem = (*p * *p - *p).norm();
        let tr = (p.trace() - C64::new(1.0, 0.0)).norm();
        if herm > 1e-10 || idem > 1e-10 || tr > 1e-10 {
            return Err(Error::Contract(format!(
                "input {i} is not a rank-1 projector (herm {herm:.1e}, idem {idem:.1e}, trace dev {tr:.1e})"
            )));
        }
    }
    Ok((p1 * p2 * p3).trace())
}

/// Curve classes ordered by strength: NPC ⊂ class II ⊂ class I.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CurveClass {
    #[serde(rename = "NPC")]
    Npc,
    #[serde(rename = "classII")]
    ClassII,
    #[serde(rename = "classI")]
    ClassI,
    #[serde(rename = "invalid")]
    Invalid,
}

/// First failure witnessed during classification, by sample index.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Witness {
    EndpointOverlap { level: usize, modulus: f64 },
    PairOverlap { level: usize, i: usize, j: usize, modulus: f64 },
    Triple { level: usize, i: usize, j: usize, k: usize, re: f64, im: f64 },
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Classification {
    pub class: CurveClass,
    pub witness: Option<Witness>,
}

/// Per-level rank-1 projectors at selected samples of a path.
fn level_projectors(path: &OrbitPath, indices: &[usize]) -> Result<Vec<Vec<CMatrix>>> {
    let k = path.k();
    let frames: Vec<Result<Frame>> = exec::map_indexed(indices.len(), |ii| {
        Ok(spectral_frame(&path.samples[indices[ii]].1, k)?.0)
    });
    let mut out = vec![Vec::with_capacity(indices.len()); k];
    for f in frames {
        let f = f?;
        for (a, row) in out.iter_mut().enumerate() {
            let col = f.column(a);
            row.push(&col * col.adjoint());
        }
    }
    Ok(out)
}

fn subsample_indices(len: usize, max_points: usize) -> Vec<usize> {
    if len <= max_points {
        return (0..len).collect();
    }
    let mut idx: Vec<usize> = (0..max_points)
        .map(|i| i * (len - 1) / (max_points - 1))
        .collect();
    idx.dedup();
    idx
}

/// Classify a discretized curve. `tol` is the overlap-modulus threshold for
/// the class I/II conditions; triple real-positivity uses the fixed
/// scale-relative bounds. The witness is the lexicographically first
/// failure, independent of evaluation order.
pub fn classify_curve(path: &OrbitPath, tol: f64) -> Result<Classification> {
    let k = path.k();
    let idx = subsample_indices(path.len(), MAX_TRIPLE_POINTS);
    let projs = level_projectors(path, &idx)?;
    let m = idx.len();

    // class I: endpoint overlaps per level
    for (a, row) in projs.iter().enumerate() {
        let modulus = (&row[0] * &row[m - 1]).trace().re.max(0.0).sqrt();
        if modulus <= tol {
            return Ok(Classification {
                class: CurveClass::Invalid,
                witness: Some(Witness::EndpointOverlap { level: a, modulus }),
            });
        }
    }

    // class II: all sampled pairs per level
    for (a, row) in projs.iter().enumerate() {
        for i in 0..m {
            for j in (i + 1)..m {
                let modulus = (&row[i] * &row[j]).trace().re.max(0.0).sqrt();
                if modulus <= tol {
                    return Ok(Classification {
                        class: CurveClass::ClassI,
                        witness: Some(Witness::PairOverlap { level: a, i: idx[i], j: idx[j], modulus }),
                    });
                }
            }
        }
    }

    // NPC: all sampled triples per level, in parallel with a deterministic
    // first-witness reduction
    let mut triples = Vec::new();
    for a in 0..k {
        for i in 0..m {
            for j in (i + 1)..m {
                for l in (j + 1)..m {
                    triples.push((a, i, j, l));
                }
            }
        }
    }
    let failures: Vec<Option<Witness>> = exec::map_indexed(triples.len(), |t| {
        let (a, i, j, l) = triples[t];
        let val = (&projs[a][i] * &projs[a][j] * &projs[a][l]).trace();
        if is_real_positive(val) {
            None
        } else {
            Some(Witness::Triple {
                level: a,
                i: idx[i],
                j: idx[j],
                k: idx[l],
                re: val.re,
                im: val.im,
            })
        }
    });
    if let Some(w) = failures.into_iter().flatten().next() {
        return Ok(Classification {
            class: CurveClass::ClassII,
            witness: Some(w),
        });
    }
    Ok(Classification {
        class: CurveClass::Npc,
        witness: None,
    })
}

/// Pancharatnam lift: `ψ_a(s) = ρ_a(s) ψ_a(s₀) / √(Tr(ρ_a(s₀) ρ_a(s)))`.
/// Every lifted point is in phase with the reference per component; the
/// lift projects back onto the path.
pub fn pancharatnam_lift(path: &OrbitPath, reference: &Frame, tol: f64) -> Result<FramePath> {
    let k = path.k();
    if reference.k() != k || reference.n() != path.n() {
        return Err(Error::DimensionMismatch("reference frame shape mismatch".into()));
    }
    let projected = project(reference, &path.weights)?;
    let gap = projected.distance(path.first());
    if gap > 1e-9 {
        return Err(Error::Contract(format!(
            "reference projects {gap:.3e} away from the path start"
        )));
    }

    let frames: Vec<Result<Frame>> = exec::map_indexed(path.len(), |i| {
        Ok(spectral_frame(&path.samples[i].1, k)?.0)
    });
    let mut lifted = Vec::with_capacity(path.len());
    for (i, f) in frames.into_iter().enumerate() {
        let f = f?;
        let mut m = f.matrix().clone();
        for a in 0..k {
            let ov = inner(&f.column(a), &reference.column(a));
            if ov.norm() <= tol {
                return Err(Error::LiftUndefined {
                    s: path.samples[i].0,
                    level: a,
                });
            }
            // ρ_a ψ⁰_a = f_a (f_a, ψ⁰_a); normalizing leaves f_a times the
            // unit phase that points it at the reference
            let phase = ov / C64::new(ov.norm(), 0.0);
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

/// Per-level line integral `∫ A_a` along a lifted path, accumulated as
/// per-step args of consecutive overlaps.
pub fn line_integral_a(lift: &FramePath) -> Result<Vec<f64>> {
    let k = lift.k();
    let mut sums = vec![0.0; k];
    for i in 0..lift.samples.len() - 1 {
        for (a, sum) in sums.iter_mut().enumerate() {
            let ov = inner(&lift.samples[i].1.column(a), &lift.samples[i + 1].1.column(a));
            if ov.norm() < MIN_STEP_OVERLAP {
                return Err(Error::StepTooLarge {
                    s: lift.samples[i].0,
                    level: a,
                    overlap: ov.norm(),
                });
            }
            *sum += ov.arg();
        }
    }
    Ok(sums)
}

/// Kinematic geometric phase of an open class I curve:
/// `Σ_a κ_a (arg(ψ_a(s₁), ψ_a(s₂)) − ∫ A_a)` along the spectral-frame lift.
/// Lift-independent; reduces to the closed-loop weighted phase when the
/// path closes, and vanishes on NPCs.
pub fn gp_open_curve(path: &OrbitPath, tol: f64) -> Result<f64> {
    let k = path.k();
    let frames: Vec<Result<Frame>> = exec::map_indexed(path.len(), |i| {
        Ok(spectral_frame(&path.samples[i].1, k)?.0)
    });
    let mut collected = Vec::with_capacity(path.len());
    for f in frames {
        collected.push(f?);
    }
    let first = &collected[0];
    let last = &collected[collected.len() - 1];

    let mut value = 0.0;
    for a in 0..k {
        let endpoint = inner(&first.column(a), &last.column(a));
        if endpoint.norm() <= tol {
            return Err(Error::NotClassI(format!(
                "level {a} endpoint overlap {:.3e}",
                endpoint.norm()
            )));
        }
        let mut line = 0.0;
        for i in 0..collected.len() - 1 {
            let ov = inner(&collected[i].column(a), &collected[i + 1].column(a));
            if ov.norm() < MIN_STEP_OVERLAP {
                return Err(Error::StepTooLarge {
                    s: path.samples[i].0,
                    level: a,
                    overlap: ov.norm(),
                });
            }
            line += ov.arg();
        }
        value += path.weights.get(a) * (endpoint.arg() - line);
    }
    Ok(value)
}

#[derive(Debug, Clone)]
pub struct NonAdditivity {
    /// Weighted phase of the concatenated closed triangle.
    pub lhs: f64,
    /// Sum of segment phases minus the κ-weighted Bargmann args.
    pub rhs: f64,
    pub residual: f64,
    pub segment_phases: [f64; 3],
    /// `arg Tr(ρ_a(v₁) ρ_a(v₂) ρ_a(v₃))` per level.
    pub bargmann_args: Vec<f64>,
}

/// Non-additivity of the geometric phase over a closed triangle of class I
/// segments: the loop phase exceeds the segment sum by minus the κ-weighted
/// Bargmann args of the vertices.
pub fn nonadditivity_check(
    p1: &OrbitPath,
    p2: &OrbitPath,
    p3: &OrbitPath,
    tol: f64,
) -> Result<NonAdditivity> {
    let k = p1.k();
    for (x, y, what) in [(p1, p2, "p1→p2"), (p2, p3, "p2→p3"), (p3, p1, "p3→p1")] {
        let gap = x.last().distance(y.first());
        if gap > 1e-9 {
            return Err(Error::ChainingMismatch(format!("{what}: endpoint gap {gap:.3e}")));
        }
        if x.k() != k || x.n() != y.n() {
            return Err(Error::DimensionMismatch("triangle segments mix shapes".into()));
        }
    }

    // vertices and their per-level projectors
    let verts = [p1.first(), p2.first(), p3.first()];
    let mut vert_projs: Vec<Vec<CMatrix>> = Vec::with_capacity(3);
    for v in verts {
        let (f, _) = spectral_frame(v, k)?;
        vert_projs.push(
            (0..k)
                .map(|a| {
                    let col = f.column(a);
                    &col * col.adjoint()
                })
                .collect(),
        );
    }
    let mut bargmann_args = Vec::with_capacity(k);
    for a in 0..k {
        let t = (&vert_projs[0][a] * &vert_projs[1][a] * &vert_projs[2][a]).trace();
        if t.norm() <= tol * tol {
            return Err(Error::NotClassI(format!(
                "level {a} vertex Bargmann invariant has modulus {:.3e}",
                t.norm()
            )));
        }
        bargmann_args.push(t.arg());
    }

    let segment_phases = [
        gp_open_curve(p1, tol)?,
        gp_open_curve(p2, tol)?,
        gp_open_curve(p3, tol)?,
    ];

    // concatenated loop, segments mapped onto thirds of [0, 1]
    let mut samples = Vec::with_capacity(p1.len() + p2.len() + p3.len() - 2);
    for (off, p) in [(0.0, p1), (1.0, p2), (2.0, p3)] {
        let span = p.samples.last().unwrap().0 - p.samples[0].0;
        for (i, (s, rho)) in p.samples.iter().enumerate() {
            if off > 0.0 && i == 0 {
                continue;
            }
            let local = (s - p.samples[0].0) / span;
            samples.push(((off + local) / 3.0, rho.clone()));
        }
    }
    let loop_path = OrbitPath::new(p1.weights.clone(), samples, true)?;
    let lhs = geometric_phases_sampled(&loop_path)?.weighted;

    let mut rhs: f64 = segment_phases.iter().sum();
    for a in 0..k {
        rhs -= p1.weights.get(a) * bargmann_args[a];
    }
    Ok(NonAdditivity {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        segment_phases,
        bargmann_args,
    })
}

// ---------------------------------------------------------------------------
// Null phase manifolds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct NpmOptions {
    pub grid_u: usize,
    pub grid_v: usize,
    /// Bound on the finite-difference pullback of Ω for isotropy.
    pub iso_tol: f64,
    /// Minimum component overlap with the fiducial point.
    pub overlap_tol: f64,
    pub fd_step: f64,
}

impl Default for NpmOptions {
    fn default() -> Self {
        Self {
            grid_u: 6,
            grid_v: 5,
            iso_tol: 1e-6,
            overlap_tol: 1e-6,
            fd_step: 1e-4,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct NpmReport {
    /// The pulled-back symplectic form vanishes on the sampled patch.
    pub isotropic: bool,
    /// All sampled Bargmann triples are real positive per component.
    pub npm: bool,
    /// The manifold Pancharatnam lift has all mutual overlaps real positive.
    pub pancharatnam_exact: bool,
    pub max_pullback: f64,
}

/// Check a two-parameter patch of orbit points for isotropy, the
/// triple-positivity (NPM) condition, and exactness of its Pancharatnam
/// lift. An NPM patch is necessarily isotropic; the converse fails.
pub fn npm_check(patch: &dyn crate::geometry::Surface, opts: &NpmOptions) -> Result<NpmReport> {
    let k = patch.weights().k();
    let (gu, gv) = (opts.grid_u.max(2), opts.grid_v.max(2));
    if gu * gv > MAX_TRIPLE_POINTS {
        return Err(Error::Validation(format!(
            "patch grid {}×{} exceeds the {MAX_TRIPLE_POINTS}-point triple budget",
            gu, gv
        )));
    }

    let points: Vec<(f64, f64)> = (0..gu)
        .flat_map(|i| {
            (0..gv).map(move |j| (i as f64 / (gu - 1) as f64, j as f64 / (gv - 1) as f64))
        })
        .collect();

    let frames: Vec<Result<Frame>> = exec::map_indexed(points.len(), |p| {
        let (u, v) = points[p];
        Ok(spectral_frame(&patch.density(u, v), k)?.0)
    });
    let mut collected = Vec::with_capacity(points.len());
    for f in frames {
        collected.push(f?);
    }

    // fiducial-overlap precondition per component
    let fiducial = &collected[0];
    for (p, f) in collected.iter().enumerate() {
        for a in 0..k {
            let ov = inner(&fiducial.column(a), &f.column(a));
            if ov.norm() <= opts.overlap_tol {
                return Err(Error::LiftUndefined {
                    s: points[p].0,
                    level: a,
                });
            }
        }
    }

    // isotropy: FD pullback of Ω at every grid point
    let delta = opts.fd_step;
    let omegas: Vec<Result<f64>> = exec::map_indexed(points.len(), |p| {
        let (u, v) = points[p];
        let (u0, v0) = (
            u.clamp(delta, 1.0 - delta),
            v.clamp(delta, 1.0 - delta),
        );
        let (pu, mu) = (patch.density(u0 + delta, v0), patch.density(u0 - delta, v0));
        let (pv, mv) = (patch.density(u0, v0 + delta), patch.density(u0, v0 - delta));
        let xu = (pu.matrix() - mu.matrix()) / C64::new(2.0 * delta, 0.0);
        let xv = (pv.matrix() - mv.matrix()) / C64::new(2.0 * delta, 0.0);
        crate::geometry::kks_of_directions(&patch.density(u0, v0), k, &xu, &xv)
    });
    let mut max_pullback: f64 = 0.0;
    for o in omegas {
        max_pullback = max_pullback.max(o?.abs());
    }
    let isotropic = max_pullback < opts.iso_tol;

    // NPM: every sampled triple real positive per component
    let m = collected.len();
    let projs: Vec<Vec<CMatrix>> = (0..k)
        .map(|a| {
            collected
                .iter()
                .map(|f| {
                    let col = f.column(a);
                    &col * col.adjoint()
                })
                .collect()
        })
        .collect();
    let mut triples = Vec::new();
    for a in 0..k {
        for i in 0..m {
            for j in (i + 1)..m {
                for l in (j + 1)..m {
                    triples.push((a, i, j, l));
                }
            }
        }
    }
    let bad: Vec<bool> = exec::map_indexed(triples.len(), |t| {
        let (a, i, j, l) = triples[t];
        let val = (&projs[a][i] * &projs[a][j] * &projs[a][l]).trace();
        !is_real_positive(val)
    });
    let npm = !bad.iter().any(|&b| b);

    // Pancharatnam-lifted patch: all mutual overlaps real positive
    let mut lifted = Vec::with_capacity(m);
    for f in &collected {
        let mut mm = f.matrix().clone();
        for a in 0..k {
            let ov = inner(&f.column(a), &fiducial.column(a));
            let phase = ov / C64::new(ov.norm(), 0.0);
            for r in 0..mm.nrows() {
                mm[(r, a)] *= phase;
            }
        }
        lifted.push(Frame::new_unchecked(mm));
    }
    let mut pancharatnam_exact = true;
    'outer: for i in 0..m {
        for j in (i + 1)..m {
            for a in 0..k {
                let ov = inner(&lifted[i].column(a), &lifted[j].column(a));
                if !is_real_positive(ov) {
                    pancharatnam_exact = false;
                    break 'outer;
                }
            }
        }
    }

    Ok(NpmReport {
        isotropic,
        npm,
        pancharatnam_exact,
        max_pullback,
    })
}

// ---------------------------------------------------------------------------
// Null-phase closures
// ---------------------------------------------------------------------------

/// Geodesic interpolation of each component between two frames, valid when
/// the interpolated columns stay orthonormal (sufficient condition: all
/// cross-component overlaps vanish, as in block-separated fixtures).
/// Returns the interpolated frames from `from` to `to`.
pub fn component_geodesic_frames(from: &Frame, to: &Frame, steps: usize) -> Result<Vec<Frame>> {
    let (n, k) = (from.n(), from.k());
    if to.n() != n || to.k() != k {
        return Err(Error::DimensionMismatch("frame shapes differ".into()));
    }
    // per-component geodesic data: aligned target, angle, perpendicular
    let mut arcs: Vec<(CVector, f64, CVector)> = Vec::with_capacity(k);
    for a in 0..k {
        let x = from.column(a);
        let mut y = to.column(a);
        let ov = inner(&x, &y);
        if ov.norm() < 1e-8 {
            return Err(Error::ClosureUnavailable(format!(
                "component {a} endpoints nearly orthogonal (overlap {:.3e})",
                ov.norm()
            )));
        }
        y *= ov.conj() / C64::new(ov.norm(), 0.0);
        let cos = ov.norm().min(1.0);
        let angle = cos.acos();
        let perp = if angle < 1e-12 {
            CVector::zeros(n)
        } else {
            (&y - &x * C64::new(cos, 0.0)) / C64::new(angle.sin(), 0.0)
        };
        arcs.push((x, angle, perp));
    }
    let mut frames = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let mut m = CMatrix::zeros(n, k);
        for (a, (x, angle, perp)) in arcs.iter().enumerate() {
            let th = angle * t;
            let col = x * C64::new(th.cos(), 0.0) + perp * C64::new(th.sin(), 0.0);
            for r in 0..n {
                m[(r, a)] = col[r];
            }
        }
        let gram_dev =
            (m.adjoint() * &m - crate::algebra::identity(k)).norm();
        if gram_dev > 1e-10 {
            return Err(Error::ClosureUnavailable(format!(
                "interpolated frame loses orthonormality at t={t}: deviation {gram_dev:.3e}"
            )));
        }
        frames.push(Frame::new_unchecked(m));
    }
    Ok(frames)
}

/// Geometric phase of an open curve through its null-phase closure: append
/// the component-geodesic closure from the end back to the start and take
/// the weighted phase of the resulting closed loop (the surface-area route,
/// computed by machinery independent of the kinematic formula). Fails with
/// `ClosureUnavailable` when no valid closure exists.
pub fn gp_via_npc_closure(path: &OrbitPath, closure_steps: usize) -> Result<f64> {
    let k = path.k();
    let (end_frame, _) = spectral_frame(path.last(), k)?;
    let (start_frame, _) = spectral_frame(path.first(), k)?;
    let closure = component_geodesic_frames(&end_frame, &start_frame, closure_steps)?;

    let mut samples: Vec<(f64, DensityMatrix)> = Vec::new();
    let span = path.samples.last().unwrap().0 - path.samples[0].0;
    for (s, rho) in &path.samples {
        samples.push(((s - path.samples[0].0) / span * 0.5, rho.clone()));
    }
    for (i, f) in closure.iter().enumerate().skip(1) {
        let t = i as f64 / closure_steps as f64;
        samples.push((0.5 + 0.5 * t, project(f, &path.weights)?));
    }
    let loop_path = OrbitPath::new(path.weights.clone(), samples, true)?;
    Ok(geometric_phases_sampled(&loop_path)?.weighted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::SpectralWeights;
    use crate::fixtures::{
        pure_weights, random_frame, random_triangle, GeodesicArc, TorusPatch, TwoGeneratorPatch,
    };
    use crate::rng::SplitMix64;
    use crate::states::{random_orbit_loop, OrbitCurve};

    fn w(values: &[f64]) -> SpectralWeights {
        SpectralWeights::new(values.to_vec()).unwrap()
    }

    fn proj(v: &CVector) -> CMatrix {
        let v = v / C64::new(v.norm(), 0.0);
        &v * v.adjoint()
    }

    #[test]
    fn bargmann_pinned_value() {
        let e1 = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let d = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let c = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let t = bargmann3(&proj(&e1), &proj(&d), &proj(&c)).unwrap();
        assert!((t - C64::new(0.25, 0.25)).norm() < 1e-14);
        assert!((t.arg() - std::f64::consts::FRAC_PI_4).abs() < 1e-14);
    }

    #[test]
    fn bargmann_identities() {
        let mut rng = SplitMix64::new(101);
        let p1 = proj(&rng.complex_vector(3));
        let p2 = proj(&rng.complex_vector(3));
        let p3 = proj(&rng.complex_vector(3));
        let t = bargmann3(&p1, &p2, &p3).unwrap();
        let cyc = bargmann3(&p2, &p3, &p1).unwrap();
        let rev = bargmann3(&p3, &p2, &p1).unwrap();
        assert!((t - cyc).norm() < 1e-14);
        assert!((t - rev.conj()).norm() < 1e-14);
        // identical projectors give 1; orthogonal third gives 0
        let same = bargmann3(&p1, &p1, &p1).unwrap();
        assert!((same - C64::new(1.0, 0.0)).norm() < 1e-12);
        let e1 = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let e2 = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let mid = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        let z = bargmann3(&proj(&e1), &proj(&mid), &proj(&e2)).unwrap();
        assert!(z.norm() < 1e-14);
        // non-projector input is rejected
        assert!(bargmann3(&(p1.clone() * C64::new(2.0, 0.0)), &p2, &p3).is_err());
    }

    #[test]
    fn classify_constant_and_geodesic_as_npc() {
        let weights = w(&[0.7, 0.3]);
        let rho = crate::states::project(&crate::states::Frame::canonical(3, 2), &weights).unwrap();
        let samples: Vec<_> = (0..=16).map(|i| (i as f64 / 16.0, rho.clone())).collect();
        let path = OrbitPath::new(weights, samples, true).unwrap();
        let c = classify_curve(&path, 1e-6).unwrap();
        assert_eq!(c.class, CurveClass::Npc);

        let mut rng = SplitMix64::new(7);
        let arc = GeodesicArc::new(&rng.complex_vector(3), &rng.complex_vector(3)).unwrap();
        let path = arc.sample(64);
        let c = classify_curve(&path, 1e-6).unwrap();
        assert_eq!(c.class, CurveClass::Npc, "witness: {:?}", c.witness);
    }

    #[test]
    fn classify_orthogonal_endpoints_invalid() {
        let e1 = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        let e2 = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let arc = GeodesicArc::orthogonal(&e1, &e2).unwrap();
        let path = arc.sample(64);
        let c = classify_curve(&path, 1e-6).unwrap();
        assert_eq!(c.class, CurveClass::Invalid);
        assert!(matches!(c.witness, Some(Witness::EndpointOverlap { .. })));
    }

    #[test]
    fn classify_generic_loop_not_npc() {
        let weights = w(&[0.7, 0.3]);
        let curve = random_orbit_loop(&weights, 3, 2, 55).unwrap();
        let path = curve.sample(64);
        let c = classify_curve(&path, 1e-6).unwrap();
        assert!(matches!(c.class, CurveClass::ClassII | CurveClass::ClassI));
    }

    #[test]
    fn pancharatnam_lift_properties() {
        let weights = w(&[0.7, 0.3]);
        let curve = random_orbit_loop(&weights, 4, 2, 21).unwrap();
        let path = curve.sample(128);
        let (reference, _) = spectral_frame(path.first(), 2).unwrap();
        let lift = pancharatnam_lift(&path, &reference, 1e-6).unwrap();
        for (i, (_, f)) in lift.samples.iter().enumerate() {
            for a in 0..2 {
                let ov = inner(&reference.column(a), &f.column(a));
                assert!(ov.im.abs() < 1e-12, "arg {}", ov.arg());
                assert!(ov.re > 0.0);
            }
            let rho = crate::states::project(f, &weights).unwrap();
            assert!(rho.distance(&path.samples[i].1) < 1e-10);
        }
        // constant path at the reference lifts to the reference
        let rho0 = crate::states::project(&reference, &weights).unwrap();
        let samples: Vec<_> = (0..=8).map(|i| (i as f64 / 8.0, rho0.clone())).collect();
        let constant = OrbitPath::new(weights.clone(), samples, true).unwrap();
        let lift = pancharatnam_lift(&constant, &reference, 1e-6).unwrap();
        for (_, f) in &lift.samples {
            assert!(f.distance(&reference) < 1e-10);
        }
    }

    #[test]
    fn line_integral_vanishes_on_npc_lift_and_tracks_dressing() {
        let mut rng = SplitMix64::new(9);
        let arc = GeodesicArc::new(&rng.complex_vector(3), &rng.complex_vector(3)).unwrap();
        let path = arc.sample(512);
        let (reference, _) = spectral_frame(path.first(), 1).unwrap();
        let lift = pancharatnam_lift(&path, &reference, 1e-6).unwrap();
        let ints = line_integral_a(&lift).unwrap();
        assert!(ints[0].abs() < 1e-6, "∫A = {}", ints[0]);

        // dress with α(s) = 2πs: the integral becomes 2π
        let dressed = FramePath {
            weights: lift.weights.clone(),
            samples: lift
                .samples
                .iter()
                .map(|(s, f)| (*s, f.apply_phases(&[std::f64::consts::TAU * *s])))
                .collect(),
        };
        let ints = line_integral_a(&dressed).unwrap();
        assert!((ints[0] - std::f64::consts::TAU).abs() < 1e-6, "∫A = {}", ints[0]);
    }

    #[test]
    fn gp_open_matches_closed_loop_and_vanishes_on_npc() {
        let weights = w(&[0.7, 0.3]);
        let curve = random_orbit_loop(&weights, 3, 2, 61).unwrap();
        let path = curve.sample(2048);
        let closed = geometric_phases_sampled(&path).unwrap().weighted;
        let open = gp_open_curve(&path, 1e-8).unwrap();
        assert!((closed - open).abs() < 1e-9, "{closed} vs {open}");

        let mut rng = SplitMix64::new(63);
        let arc = GeodesicArc::new(&rng.complex_vector(4), &rng.complex_vector(4)).unwrap();
        let gp = gp_open_curve(&arc.sample(512), 1e-8).unwrap();
        assert!(gp.abs() < 1e-6, "geodesic gp = {gp}");
    }

    #[test]
    fn gp_lift_independence() {
        // the kinematic value is unchanged by smooth phase dressings of the
        // lift: evaluate via an explicitly dressed line integral. The loop
        // is kept small so no endpoint arg crosses a branch cut.
        let weights = w(&[0.6, 0.4]);
        let rho0 = crate::states::project(&crate::states::Frame::canonical(3, 2), &weights).unwrap();
        let mut mode_rng = SplitMix64::new(67);
        let modes = vec![mode_rng.hermitian_traceless(3) * C64::new(0.3, 0.0)];
        let curve = crate::states::ExponentialLoop::new(rho0, weights.clone(), modes).unwrap();
        let path = curve.sample(1024);
        let base = gp_open_curve(&path, 1e-8).unwrap();

        let (reference, _) = spectral_frame(path.first(), 2).unwrap();
        let lift = pancharatnam_lift(&path, &reference, 1e-8).unwrap();
        let value_from = |fp: &FramePath| -> f64 {
            let ints = line_integral_a(fp).unwrap();
            let first = &fp.samples[0].1;
            let last = &fp.samples[fp.samples.len() - 1].1;
            (0..2)
                .map(|a| {
                    weights.get(a)
                        * (inner(&first.column(a), &last.column(a)).arg() - ints[a])
                })
                .sum()
        };
        let v1 = value_from(&lift);
        let dressed = FramePath {
            weights: lift.weights.clone(),
            samples: lift
                .samples
                .iter()
                .map(|(s, f)| (*s, f.apply_phases(&[1.3 * s, -0.7 * s.powi(2)])))
                .collect(),
        };
        let v2 = value_from(&dressed);
        assert!((v1 - v2).abs() < 1e-8, "{v1} vs {v2}");
        assert!((v1 - base).abs() < 1e-8, "{v1} vs gp {base}");
    }

    #[test]
    fn nonadditivity_degenerate_triangle_is_zero() {
        let weights = w(&[0.7, 0.3]);
        let rho = crate::states::project(&crate::states::Frame::canonical(3, 2), &weights).unwrap();
        let samples: Vec<_> = (0..=8).map(|i| (i as f64 / 8.0, rho.clone())).collect();
        let p = OrbitPath::new(weights, samples, true).unwrap();
        let r = nonadditivity_check(&p, &p, &p, 1e-8).unwrap();
        assert!(r.lhs.abs() < 1e-12);
        assert!(r.rhs.abs() < 1e-12);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn nonadditivity_random_triangles() {
        for seed in [1u64, 2, 3] {
            let weights = w(&[0.7, 0.3]);
            let [s1, s2, s3] = random_triangle(&weights, 3, seed, 0.35).unwrap();
            let r = nonadditivity_check(
                &s1.sample(1024),
                &s2.sample(1024),
                &s3.sample(1024),
                1e-8,
            )
            .unwrap();
            assert!(
                r.residual < 1e-5,
                "seed {seed}: lhs {} rhs {} residual {}",
                r.lhs,
                r.rhs,
                r.residual
            );
        }
    }

    #[test]
    fn npm_reports() {
        // single-point patch: everything true
        let weights = w(&[0.6, 0.4]);
        let rho = crate::states::project(&crate::states::Frame::canonical(4, 2), &weights).unwrap();
        let point = crate::geometry::FnSurface {
            n: 4,
            weights: weights.clone(),
            f: move |_u: f64, _v: f64| rho.clone(),
        };
        let r = npm_check(&point, &NpmOptions::default()).unwrap();
        assert!(r.isotropic && r.npm && r.pancharatnam_exact);

        // real-span torus patch: npm and isotropic
        let patch = TorusPatch::new(4, weights.clone(), 0.5).unwrap();
        let r = npm_check(&patch, &NpmOptions::default()).unwrap();
        assert!(r.npm, "torus patch should satisfy the triple condition");
        assert!(r.isotropic, "max pullback {}", r.max_pullback);
        assert!(r.pancharatnam_exact);

        // generic patch: not isotropic, and npm ⇒ isotropic must hold
        let generic = TwoGeneratorPatch::random(&weights, 4, 5, 0.8).unwrap();
        let r = npm_check(&generic, &NpmOptions::default()).unwrap();
        assert!(!r.isotropic, "max pullback {}", r.max_pullback);
        assert!(!r.npm || r.isotropic);
    }

    #[test]
    fn closure_gp_matches_kinematic_on_block_fixture() {
        // components in orthogonal 2D blocks of C⁴: cross overlaps vanish,
        // so the geodesic closure is valid
        let weights = w(&[0.7, 0.3]);
        let block_frame = |a: f64, b: f64| {
            let mut m = CMatrix::zeros(4, 2);
            m[(0, 0)] = C64::new(a.cos(), 0.0);
            m[(1, 0)] = C64::new(a.sin(), 0.0);
            m[(2, 1)] = C64::new(b.cos(), 0.0);
            m[(3, 1)] = C64::new(b.sin(), 0.0);
            Frame::new_unchecked(m)
        };
        // an open path inside the block family with a phase twist
        let steps = 512;
        let samples: Vec<(f64, DensityMatrix)> = (0..=steps)
            .map(|i| {
                let t = i as f64 / steps as f64;
                let f = block_frame(0.9 * t, 0.5 * t);
                (t, project(&f, &weights).unwrap())
            })
            .collect();
        let path = OrbitPath::new(weights.clone(), samples, false).unwrap();
        let kinematic = gp_open_curve(&path, 1e-8).unwrap();
        let via_closure = gp_via_npc_closure(&path, 256).unwrap();
        assert!(
            (kinematic - via_closure).abs() < 1e-5,
            "kinematic {kinematic} vs closure {via_closure}"
        );

        // generic frames admit no closure
        let mut rng = SplitMix64::new(17);
        let f1 = random_frame(&mut rng, 4, 2);
        let f2 = random_frame(&mut rng, 4, 2);
        assert!(matches!(
            component_geodesic_frames(&f1, &f2, 64),
            Err(Error::ClosureUnavailable(_))
        ));
    }

    #[test]
    fn npc_triangle_matches_bargmann_only() {
        // three component-geodesic (hence NPC) segments between block frames
        let weights = w(&[0.7, 0.3]);
        let block_frame = |a: f64, b: f64| {
            let mut m = CMatrix::zeros(4, 2);
            m[(0, 0)] = C64::new(a.cos(), 0.0);
            m[(1, 0)] = C64::new(a.sin(), 0.0);
            m[(2, 1)] = C64::new(b.cos(), 0.0);
            m[(3, 1)] = C64::new(b.sin(), 0.0);
            Frame::new_unchecked(m)
        };
        let verts = [
            block_frame(0.0, 0.0),
            block_frame(0.8, 0.3),
            block_frame(0.3, 0.9),
        ];
        let seg = |x: &Frame, y: &Frame| -> OrbitPath {
            let frames = component_geodesic_frames(x, y, 512).unwrap();
            let samples: Vec<(f64, DensityMatrix)> = frames
                .iter()
                .enumerate()
                .map(|(i, f)| (i as f64 / 512.0, project(f, &weights).unwrap()))
                .collect();
            OrbitPath::new(weights.clone(), samples, false).unwrap()
        };
        let p1 = seg(&verts[0], &verts[1]);
        let p2 = seg(&verts[1], &verts[2]);
        let p3 = seg(&verts[2], &verts[0]);
        let r = nonadditivity_check(&p1, &p2, &p3, 1e-10).unwrap();
        for (i, gp) in r.segment_phases.iter().enumerate() {
            assert!(gp.abs() < 1e-6, "segment {i} gp {gp}");
        }
        // real-span vertices have real positive triples: args vanish and so
        // does the loop phase
        for arg in &r.bargmann_args {
            assert!(arg.abs() < 1e-10);
        }
        assert!(r.residual < 1e-6);
    }
}

//! Complex dense linear algebra and the u(n) Lie-algebra toolkit.
//!
//! Everything downstream works over `DMatrix<Complex<f64>>` at desk scale
//! (n ≤ ~6); dense decompositions from nalgebra back the plumbing here.
//! Inner products follow the physics convention: `(u, v) = u† v`,
//! conjugate-linear in the first argument.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Threshold below which a Gram or squared-singular-value spectrum counts as
/// rank deficient.
pub const RANK_TOL: f64 = 1e-10;
/// Hermiticity / orthonormality contract tolerance.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `(u, v) = u† v`.
pub fn inner(u: &CVector, v: &CVector) -> C64 {
    u.dotc(v)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Largest entry deviation from Hermiticity.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn check_hermitian(m: &CMatrix, what: &str) -> Result<()> {
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL {
        return Err(Error::Contract(format!(
            "{what} is not Hermitian: deviation {dev:.3e}"
        )));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted in
/// decreasing order. Returns `(eigenvalues, eigenvectors)` with eigenvectors
/// as columns matching the eigenvalue order.
pub fn hermitian_eigen_desc(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_hermitian(m, "eigendecomposition input")?;
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Unique Hermitian PSD square root of a Hermitian PSD matrix. Eigenvalues
/// in `[-RANK_TOL, 0)` are clamped to zero; anything below that is rejected.
pub fn sqrtm_psd(m: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen_desc(m)?;
    let n = m.nrows();
    let mut d = CMatrix::zeros(n, n);
    for (i, &v) in values.iter().enumerate() {
        if v < -RANK_TOL {
            return Err(Error::Contract(format!(
                "matrix is not PSD: eigenvalue {v:.3e}"
            )));
        }
        d[(i, i)] = C64::new(v.max(0.0).sqrt(), 0.0);
    }
    Ok(&vectors * d * vectors.adjoint())
}

/// Orthonormalize a set of column vectors by modified Gram–Schmidt with one
/// re-orthogonalization pass. The surviving direction of each column keeps
/// its input phase: columns are only combined and scaled by real positive
/// norms, so already-orthonormal inputs come back unchanged.
pub fn gram_schmidt(columns: &[CVector]) -> Result<CMatrix> {
    let k = columns.len();
    if k == 0 {
        return Err(Error::DimensionMismatch("no columns given".into()));
    }
    let n = columns[0].len();
    if columns.iter().any(|c| c.len() != n) || k > n {
        return Err(Error::DimensionMismatch(format!(
            "need k ≤ n equal-length columns, got k={k}, n={n}"
        )));
    }

    // Rank check on the Gram matrix before touching the vectors.
    let a = CMatrix::from_fn(n, k, |r, c| columns[c][r]);
    let gram = a.adjoint() * &a;
    let (gram_eigs, _) = hermitian_eigen_desc(&gram)?;
    if gram_eigs[k - 1] < RANK_TOL {
        return Err(Error::DegenerateInput(format!(
            "columns are linearly dependent: smallest Gram eigenvalue {:.3e}",
            gram_eigs[k - 1]
        )));
    }

    let mut q: Vec<CVector> = Vec::with_capacity(k);
    for col in columns {
        let mut v = col.clone();
        for _pass in 0..2 {
            for prev in &q {
                let c = inner(prev, &v);
                v -= prev * c;
            }
        }
        let norm = v.norm();
        q.push(v / C64::new(norm, 0.0));
    }
    Ok(CMatrix::from_fn(n, k, |r, c| q[c][r]))
}

/// Polar decomposition `S = W·P` of a nonsingular square matrix: `W` unitary,
/// `P` the unique Hermitian positive square root of `S†S`. Computed from the
/// SVD (`W = UV†`, `P = VΣV†`) so `W` stays unitary to machine precision
/// regardless of conditioning; the eigendecomposition route of `S†S` serves
/// as a cross-check in tests.
pub fn polar_decompose(s: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    if s.nrows() != s.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "polar decomposition needs a square matrix, got {}×{}",
            s.nrows(),
            s.ncols()
        )));
    }
    let svd = s.clone().svd(true, true);
    let sigma_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if sigma_min <= RANK_TOL {
        return Err(Error::Singular { sigma_min });
    }
    let u = svd.u.as_ref().expect("svd: U requested");
    let v_t = svd.v_t.as_ref().expect("svd: V^H requested");
    let w = u * v_t;
    let k = s.nrows();
    let mut d = CMatrix::zeros(k, k);
    for i in 0..k {
        d[(i, i)] = C64::new(svd.singular_values[i], 0.0);
    }
    let p = v_t.adjoint() * d * v_t;
    Ok((w, p))
}

/// `exp(−i t K)` for Hermitian `K`, via eigendecomposition; unitary by
/// construction since the eigenvalue phases are unimodular.
pub fn expm_skew(k: &CMatrix, t: f64) -> Result<CMatrix> {
    check_hermitian(k, "exponential generator")?;
    let (values, vectors) = hermitian_eigen_desc(k)?;
    let n = k.nrows();
    let mut d = CMatrix::zeros(n, n);
    for (i, &lambda) in values.iter().enumerate() {
        let phase = -t * lambda;
        d[(i, i)] = C64::new(phase.cos(), phase.sin());
    }
    Ok(&vectors * d * vectors.adjoint())
}

/// Antisymmetric generator: entries `i/√2` at (j,k) and `−i/√2` at (k,j).
/// Antisymmetric in its indices; zero when j = k.
pub fn j_generator(n: usize, j: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    if j != k {
        let c = C64::new(0.0, 1.0 / std::f64::consts::SQRT_2);
        m[(j, k)] = c;
        m[(k, j)] = -c;
    }
    m
}

/// Symmetric generator: entries `1/√2` at (j,k) and (k,j); the diagonal case
/// j = k carries `√2` at (j,j).
pub fn q_generator(n: usize, j: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    let c = C64::new(1.0 / std::f64::consts::SQRT_2, 0.0);
    m[(j, k)] += c;
    m[(k, j)] += c;
    m
}

/// Diagonal torus generator: a single unit entry at (j,j). This is the
/// normalization that makes the diagonal generators trace-orthonormal
/// against themselves and everything else.
pub fn diag_generator(n: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(j, j)] = C64::new(1.0, 0.0);
    m
}

/// Strictly trace-orthonormal Hermitian basis of u(n): the n diagonal
/// generators first, then the antisymmetric pairs J(j,k) for j < k in
/// lexicographic order, then the symmetric pairs Q(j,k) likewise. The
/// ordering is fixed so serialized bases are reproducible.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    pub n: usize,
    pub generators: Vec<CMatrix>,
}

pub fn un_basis(n: usize) -> HermitianBasis {
    assert!(n >= 1, "u(n) basis needs n ≥ 1");
    let mut generators = Vec::with_capacity(n * n);
    for j in 0..n {
        generators.push(diag_generator(n, j));
    }
    for j in 0..n {
        for k in (j + 1)..n {
            generators.push(j_generator(n, j, k));
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            generators.push(q_generator(n, j, k));
        }
    }
    HermitianBasis { n, generators }
}

/// `Tr(A B)` as a complex number.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    (a * b).trace()
}

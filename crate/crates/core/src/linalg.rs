//! Dense complex matrix substrate.
//!
//! Hermitian spectral routines, PSD certification and square roots,
//! Kronecker products, orthonormal subspace frames, and nearest-Kronecker
//! factorization. All matrices are `nalgebra` dynamic matrices over
//! `Complex64`; operations are pure functions over immutable values.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Numerical thresholds shared by every certification routine.
///
/// All members are strictly positive and below one. `tol_psd` floors
/// eigenvalues in positivity tests, `tol_residual` gates operator-norm
/// residuals, `tol_ortho` gates frame orthonormality, and `tol_rank`
/// thresholds singular values relative to the largest when deciding rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub tol_psd: f64,
    pub tol_residual: f64,
    pub tol_ortho: f64,
    pub tol_rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        // Double-precision spectra of d <= 200 matrices.
        Self {
            tol_psd: 1e-10,
            tol_residual: 1e-8,
            tol_ortho: 1e-10,
            tol_rank: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), LinalgError> {
        let all = [self.tol_psd, self.tol_residual, self.tol_ortho, self.tol_rank];
        if all.iter().all(|&t| t > 0.0 && t < 1.0) {
            Ok(())
        } else {
            Err(LinalgError::InvalidTolerances)
        }
    }
}

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds {allowed:.3e}")]
    NonHermitian { deviation: f64, allowed: f64 },
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("columns do not form an orthonormal frame: deviation {deviation:.3e}")]
    NotAFrame { deviation: f64 },
    #[error("tolerances must lie strictly inside (0, 1)")]
    InvalidTolerances,
}

/// Frobenius norm.
pub fn fro_norm(a: &CMatrix) -> f64 {
    a.norm()
}

/// Operator 2-norm (largest singular value).
///
/// Exact SVD up to a size cutoff; beyond it, power iteration on `A* A`
/// with random restarts. The iterative branch is only reached by large
/// product-space residual matrices, whose norms are far from the
/// tolerance boundary in every workflow that produces them.
pub fn op_norm(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let small = a.nrows().min(a.ncols());
    if small <= 1 || a.nrows().max(a.ncols()) <= 640 {
        return a
            .clone()
            .singular_values()
            .iter()
            .fold(0.0f64, |m, &s| m.max(s));
    }
    power_iteration_norm(a)
}

fn power_iteration_norm(a: &CMatrix) -> f64 {
    let n = a.ncols();
    let mut best = 0.0f64;
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state as f64 / u64::MAX as f64) - 0.5
    };
    for _ in 0..3 {
        let mut v = CVector::from_fn(n, |_, _| Complex64::new(next(), next()));
        let mut sigma = 0.0f64;
        for _ in 0..400 {
            let w = a * &v;
            let u = a.adjoint() * &w;
            let nu = u.norm();
            if nu == 0.0 {
                break;
            }
            let new_sigma = nu.sqrt();
            v = u / Complex64::new(nu, 0.0);
            if (new_sigma - sigma).abs() <= 1e-12 * new_sigma.max(1.0) {
                sigma = new_sigma;
                break;
            }
            sigma = new_sigma;
        }
        best = best.max(sigma);
    }
    best
}

/// Exact operator 2-norm of the product `L R*` without forming it.
///
/// Reduces to the singular values of a small core: `L = Q_l S_l`,
/// `R = Q_r S_r` (thin QR), and `||L R*|| = ||S_l S_r*||`.
pub fn op_norm_lowrank(l: &CMatrix, r: &CMatrix) -> f64 {
    assert_eq!(l.nrows(), r.nrows(), "factors must share ambient dimension");
    assert_eq!(l.ncols(), r.ncols(), "L R* needs equal inner dimensions");
    if l.ncols() == 0 {
        return 0.0;
    }
    let ql = l.clone().qr();
    let qr = r.clone().qr();
    let core = ql.r() * qr.r().adjoint();
    core.singular_values().iter().fold(0.0f64, |m, &s| m.max(s))
}

/// Hermitian deviation `||H - H*||`.
pub fn hermitian_deviation(h: &CMatrix) -> f64 {
    op_norm(&(h - h.adjoint()))
}

/// `(H + H*) / 2`.
pub fn symmetrize(h: &CMatrix) -> CMatrix {
    (h + h.adjoint()).map(|z| z * 0.5)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
/// The input is symmetrized before factorization.
pub fn hermitian_eigen(h: &CMatrix) -> (DVector<f64>, CMatrix) {
    let se = symmetrize(h).symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let vals = DVector::from_fn(order.len(), |i, _| se.eigenvalues[order[i]]);
    let vecs = CMatrix::from_fn(h.nrows(), order.len(), |r, c| se.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Result of a PSD test: the verdict and the smallest eigenvalue of the
/// symmetrized input.
#[derive(Debug, Clone, Copy)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eig: f64,
}

/// Checks positive semidefiniteness of a Hermitian matrix.
///
/// Rejects inputs whose Hermitian deviation exceeds
/// `tol_residual * (1 + ||H||)`; otherwise symmetrizes and reports the
/// smallest eigenvalue. `is_psd` holds iff `min_eig >= -tol_psd`.
pub fn psd_check(h: &CMatrix, tol: &Tolerances) -> Result<PsdReport, LinalgError> {
    require_square(h)?;
    let deviation = hermitian_deviation(h);
    let allowed = tol.tol_residual * (1.0 + op_norm(h));
    if deviation > allowed {
        return Err(LinalgError::NonHermitian { deviation, allowed });
    }
    let (vals, _) = hermitian_eigen(h);
    let min_eig = vals.min();
    Ok(PsdReport {
        is_psd: min_eig >= -tol.tol_psd,
        min_eig,
    })
}

/// Hermitian PSD square root.
///
/// Eigenvalues in `[-tol_psd, 0)` are clamped to zero (defect operators
/// are PSD in exact arithmetic; small negative drift is roundoff).
/// Fails with `NotPsd` below the clamp window.
pub fn psd_sqrt(h: &CMatrix, tol: &Tolerances) -> Result<CMatrix, LinalgError> {
    let report = psd_check(h, tol)?;
    if !report.is_psd {
        return Err(LinalgError::NotPsd {
            min_eig: report.min_eig,
        });
    }
    let (vals, vecs) = hermitian_eigen(h);
    let roots = DVector::from_fn(vals.len(), |i, _| vals[i].max(0.0).sqrt());
    let scaled = CMatrix::from_fn(vecs.nrows(), vecs.ncols(), |r, c| {
        vecs[(r, c)] * roots[c]
    });
    Ok(&scaled * vecs.adjoint())
}

/// Kronecker product, first factor varying slowest:
/// `(A (x) B)[(i,k),(j,l)] = A[i,j] B[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Spectral radius of a square complex matrix.
///
/// Computed from the eigenvalues of the real 2n x 2n companion
/// `[[Re, -Im], [Im, Re]]`, whose spectrum is the original spectrum
/// together with its conjugates.
pub fn spectral_radius(t: &CMatrix) -> f64 {
    assert_eq!(t.nrows(), t.ncols(), "spectral radius needs a square matrix");
    let n = t.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut real = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = t[(i, j)];
            real[(i, j)] = z.re;
            real[(i, j + n)] = -z.im;
            real[(i + n, j)] = z.im;
            real[(i + n, j + n)] = z.re;
        }
    }
    real.complex_eigenvalues()
        .iter()
        .fold(0.0f64, |m, ev| m.max(ev.norm()))
}

/// Orthonormal columns spanning a closed subspace of `C^ambient_dim`.
#[derive(Debug, Clone)]
pub struct SubspaceFrame {
    ambient_dim: usize,
    frame: CMatrix,
}

impl SubspaceFrame {
    /// Wraps a matrix whose columns are verified orthonormal within `tol_ortho`.
    pub fn new(frame: CMatrix, tol: &Tolerances) -> Result<Self, LinalgError> {
        if frame.ncols() > frame.nrows() {
            return Err(LinalgError::ShapeMismatch(format!(
                "frame has {} columns in ambient dimension {}",
                frame.ncols(),
                frame.nrows()
            )));
        }
        let gram = frame.adjoint() * &frame;
        let deviation = op_norm(&(&gram - CMatrix::identity(frame.ncols(), frame.ncols())));
        if deviation > tol.tol_ortho * (1.0 + frame.ncols() as f64) {
            return Err(LinalgError::NotAFrame { deviation });
        }
        Ok(Self {
            ambient_dim: frame.nrows(),
            frame,
        })
    }

    /// Frame for the zero subspace.
    pub fn empty(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            frame: CMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.frame
    }

    /// Orthogonal projection `F F*` onto the spanned subspace.
    pub fn projection(&self) -> CMatrix {
        &self.frame * self.frame.adjoint()
    }
}

/// Deterministic orthonormal basis of the numerical column space of `a`.
///
/// Left singular vectors whose singular value is at least
/// `tol_rank * sigma_max`, each rotated so that its first entry of
/// non-negligible magnitude is real positive.
pub fn orthonormal_range(a: &CMatrix, tol: &Tolerances) -> SubspaceFrame {
    if a.ncols() == 0 || a.nrows() == 0 {
        return SubspaceFrame::empty(a.nrows());
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    if sigma_max == 0.0 {
        return SubspaceFrame::empty(a.nrows());
    }
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s >= tol.tol_rank * sigma_max)
        .count();
    let mut frame = CMatrix::zeros(a.nrows(), rank);
    for c in 0..rank {
        let col = u.column(c);
        frame.set_column(c, &col);
    }
    fix_column_phases(&mut frame);
    SubspaceFrame {
        ambient_dim: a.nrows(),
        frame,
    }
}

/// Orthonormal basis of the orthogonal complement of the column space of `a`.
pub fn orthonormal_complement(a: &CMatrix, tol: &Tolerances) -> SubspaceFrame {
    let n = a.nrows();
    if a.ncols() == 0 {
        let mut frame = CMatrix::identity(n, n);
        fix_column_phases(&mut frame);
        return SubspaceFrame {
            ambient_dim: n,
            frame,
        };
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let rank = if sigma_max == 0.0 {
        0
    } else {
        svd.singular_values
            .iter()
            .filter(|&&s| s >= tol.tol_rank * sigma_max)
            .count()
    };
    // nalgebra's thin SVD only returns min(nrows, ncols) left vectors, so
    // complete the basis by projecting out the range from the identity.
    let range = CMatrix::from_fn(n, rank, |r, c| u[(r, c)]);
    let proj = CMatrix::identity(n, n) - &range * range.adjoint();
    let mut frame_cols: Vec<CVector> = Vec::with_capacity(n - rank);
    for j in 0..n {
        let mut v: CVector = proj.column(j).into();
        for q in &frame_cols {
            let inner = q.dotc(&v);
            v -= q * inner;
        }
        let nv = v.norm();
        if nv > 1e-7 {
            frame_cols.push(v / Complex64::new(nv, 0.0));
            if frame_cols.len() == n - rank {
                break;
            }
        }
    }
    let mut frame = CMatrix::zeros(n, frame_cols.len());
    for (c, v) in frame_cols.iter().enumerate() {
        frame.set_column(c, v);
    }
    fix_column_phases(&mut frame);
    SubspaceFrame {
        ambient_dim: n,
        frame,
    }
}

/// Rotates each column by a unimodular scalar so its first entry with
/// magnitude above threshold is real positive. Reproducible output phase.
pub fn fix_column_phases(m: &mut CMatrix) {
    for c in 0..m.ncols() {
        let col = m.column(c);
        let lead = col.iter().find(|z| z.norm() > 1e-9).copied();
        if let Some(z) = lead {
            let phase = z / z.norm();
            let correction = phase.conj();
            for r in 0..m.nrows() {
                m[(r, c)] *= correction;
            }
        }
    }
}

/// Outcome of a nearest-Kronecker factorization.
#[derive(Debug, Clone)]
pub struct KronFactorization {
    pub factors: Vec<CMatrix>,
    /// `||P - F_1 (x) ... (x) F_n||_F / ||P||_F`.
    pub relative_residual: f64,
}

/// Nearest Kronecker factorization `P ~ F_1 (x) ... (x) F_n` with square
/// factors of the given sizes.
///
/// Pairwise rearrangement plus dominant singular pair, applied
/// recursively: the rearranged matrix of an exact product is rank one
/// with singular vectors the vectorized factors.
pub fn nearest_kron_factorization(
    p: &CMatrix,
    dims: &[usize],
) -> Result<KronFactorization, LinalgError> {
    if dims.len() < 2 {
        return Err(LinalgError::ShapeMismatch(
            "at least two factor dimensions required".into(),
        ));
    }
    let total: usize = dims.iter().product();
    if p.nrows() != total || p.ncols() != total {
        return Err(LinalgError::ShapeMismatch(format!(
            "matrix is {}x{} but factor dimensions multiply to {}",
            p.nrows(),
            p.ncols(),
            total
        )));
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(LinalgError::ShapeMismatch("zero factor dimension".into()));
    }
    let mut factors = Vec::with_capacity(dims.len());
    let mut rest = p.clone();
    for i in 0..dims.len() - 1 {
        let d1 = dims[i];
        let d2: usize = dims[i + 1..].iter().product();
        let (a, b) = dominant_kron_pair(&rest, d1, d2);
        factors.push(a);
        rest = b;
    }
    factors.push(rest);
    let mut recombined = factors[0].clone();
    for f in &factors[1..] {
        recombined = kron(&recombined, f);
    }
    let denom = fro_norm(p);
    let relative_residual = if denom == 0.0 {
        0.0
    } else {
        fro_norm(&(p - recombined)) / denom
    };
    Ok(KronFactorization {
        factors,
        relative_residual,
    })
}

/// Best rank-one Kronecker approximation `P ~ A (x) B` with `A` of size
/// `d1 x d1` and `B` of size `d2 x d2`, via the dominant singular pair of
/// the block rearrangement.
fn dominant_kron_pair(p: &CMatrix, d1: usize, d2: usize) -> (CMatrix, CMatrix) {
    // Rearrangement: row (i,j) of R holds vec(block(i,j)) where
    // P[(i,k),(j,l)] = block(i,j)[k,l]; row-major vecs match the
    // first-factor-varies-slowest convention.
    let mut r = CMatrix::zeros(d1 * d1, d2 * d2);
    for i in 0..d1 {
        for j in 0..d1 {
            for k in 0..d2 {
                for l in 0..d2 {
                    r[(i * d1 + j, k * d2 + l)] = p[(i * d2 + k, j * d2 + l)];
                }
            }
        }
    }
    let svd = r.svd(true, true);
    let (mut top, mut idx) = (0.0f64, 0usize);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > top {
            top = s;
            idx = i;
        }
    }
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let scale = top.sqrt();
    let mut a = CMatrix::zeros(d1, d1);
    for i in 0..d1 {
        for j in 0..d1 {
            a[(i, j)] = u[(i * d1 + j, idx)] * scale;
        }
    }
    let mut b = CMatrix::zeros(d2, d2);
    for k in 0..d2 {
        for l in 0..d2 {
            b[(k, l)] = vt[(idx, k * d2 + l)] * scale;
        }
    }
    (a, b)
}

fn require_square(m: &CMatrix) -> Result<(), LinalgError> {
    if m.nrows() != m.ncols() {
        Err(LinalgError::ShapeMismatch(format!(
            "expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    } else {
        Ok(())
    }
}

/// True when every entry is finite.
pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

//! Isometric dilations into truncated weighted Bergman spaces.
//!
//! A certified operator dilates through rows `sqrt(c_k) F* D T*^k`; a
//! certified doubly commuting tuple dilates through the composition of
//! per-axis stage maps, which must agree with the closed product-form
//! rows `sqrt(prod c) F* (prod_i D_i) T*^k`. Model projections, the
//! product formula, and the intertwining identities are verified with
//! explicit truncation-tail budgets.

use crate::bergman::{weight_coefficient, TruncatedSpace};
use crate::hereditary::{
    certify, defect, Certificate, CertifyMode,
    HereditaryError, OperatorTuple, WeightMultiIndex,
};
use crate::linalg::{self, CMatrix, CVector, LinalgError, Tolerances};
use crate::bergman::BergmanError;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Hard cap on automatically selected truncation degrees.
pub const DEGREE_CAP: usize = 512;
/// Construction fails when the truncation tail exceeds this.
pub const MAX_TAIL: f64 = 0.1;

#[derive(Debug, Error)]
pub enum DilationError {
    #[error("operator is not a certified contraction for the requested weight")]
    NotBmContraction(Box<Certificate>),
    #[error("tuple is not a certified doubly commuting contraction for the weights")]
    NotDoublyCommutingJoint(Box<Certificate>),
    #[error("truncation tail {tail:.3e} exceeds {MAX_TAIL}; raise the degree")]
    TailBoundTooLarge { tail: f64 },
    #[error("no finite tail bound: power norms show no geometric decay")]
    TailBoundUnavailable,
    #[error("tail target {epsilon:.3e} needs degree beyond the cap {cap}")]
    DegreeCapExceeded { cap: usize, epsilon: f64 },
    #[error("stage composition disagrees with the product form: residual {residual:.3e}")]
    StagePathMismatch { residual: f64 },
    #[error(transparent)]
    Hereditary(#[from] HereditaryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Bergman(#[from] BergmanError),
}

/// Rigorous upper bounds for one-axis truncation tails.
///
/// Holds `c_k = binom(m + k - 1, k)`, upper bounds `u_k >= ||T^k||`
/// (direct norms up to a split cap, extended by submultiplicativity), and
/// a geometric majorant for everything beyond the stored range.
#[derive(Debug, Clone)]
pub struct TailTable {
    coeffs: Vec<f64>,
    norms: Vec<f64>,
    /// `u_k <= geo_scale * geo_rate^k` for k beyond the table.
    geo_rate: f64,
    geo_scale: f64,
    m: u32,
}

const DIRECT_POWER_CAP: usize = 64;

impl TailTable {
    /// Builds the table for `(T, m)` with entries up to at least `k_max`.
    ///
    /// The table is extended past `k_max` until the term ratio of the
    /// geometric majorant drops below one (the binomial growth decays
    /// like `(m + k)/(k + 1)`), so the closed-form remainder is finite
    /// whenever the power norms show any geometric decay.
    pub fn build(t: &CMatrix, m: u32, k_max: usize) -> Self {
        let mut k_max = k_max.max(2 * DIRECT_POWER_CAP);
        let mut norms = Vec::with_capacity(k_max + 1);
        norms.push(1.0f64);
        let mut power = CMatrix::identity(t.nrows(), t.ncols());
        for _ in 1..=DIRECT_POWER_CAP.min(k_max) {
            power = t * &power;
            norms.push(linalg::op_norm(&power));
        }
        // Best geometric rate available from the direct norms.
        let mut geo_rate = f64::INFINITY;
        let mut best_q = 1usize;
        for q in 1..norms.len() {
            let rate = norms[q].powf(1.0 / q as f64);
            if rate < geo_rate {
                geo_rate = rate;
                best_q = q;
            }
        }
        let mut geo_scale = 1.0f64;
        if geo_rate > 0.0 && geo_rate < 1.0 {
            for b in 0..best_q {
                geo_scale = geo_scale.max(norms[b] / geo_rate.powi(b as i32));
            }
            // Extend until (m + k)/(k + 1) * rate^2 < 1.
            let gamma_sq = geo_rate * geo_rate;
            if gamma_sq < 1.0 && m > 1 {
                let needed =
                    ((m as f64 - 1.0) * gamma_sq / (1.0 - gamma_sq)).ceil() as usize + 8;
                k_max = k_max.max(needed.min(60_000));
            }
        } else if geo_rate <= 0.0 {
            geo_rate = 0.0;
        } else {
            // No decay within the direct window; remainders are infinite.
            geo_rate = f64::INFINITY;
            geo_scale = 1.0;
        }
        for k in norms.len()..=k_max {
            let mut best = f64::INFINITY;
            for j in 1..=DIRECT_POWER_CAP.min(k - 1).max(1) {
                let candidate = norms[j] * norms[k - j];
                if candidate < best {
                    best = candidate;
                }
            }
            norms.push(best);
        }
        let coeffs = (0..=k_max).map(|k| weight_coefficient(m, k)).collect();
        Self {
            coeffs,
            norms,
            geo_rate,
            geo_scale,
            m,
        }
    }

    pub fn k_max(&self) -> usize {
        self.norms.len() - 1
    }

    /// Bound on `sum_{k > k_max} c_k u_k^2 w^(2k)` via the geometric
    /// majorant; infinite when no decay is available.
    fn remainder_sq(&self, w: f64) -> f64 {
        if self.geo_rate == 0.0 {
            return 0.0;
        }
        let k = self.k_max();
        // c ratios decrease, so beyond k the coefficient ratio is at most g.
        let g = (self.m as f64 + k as f64) / (k as f64 + 1.0);
        let rho = g * (self.geo_rate * w).powi(2);
        if rho >= 1.0 {
            return f64::INFINITY;
        }
        let t_k = self.coeffs[k] * (self.geo_scale * self.geo_rate.powi(k as i32) * w.powi(k as i32)).powi(2);
        t_k * rho / (1.0 - rho)
    }

    /// Tail bound `sqrt(sum_{k > n} c_k u_k^2)`.
    pub fn tail(&self, n: usize) -> f64 {
        self.tail_weighted(n, 1.0)
    }

    /// Tail bound with a radial factor:
    /// `sqrt(sum_{k > n} c_k u_k^2 w^(2k))`.
    pub fn tail_weighted(&self, n: usize, w: f64) -> f64 {
        let mut sum = self.remainder_sq(w);
        for k in (n + 1)..=self.k_max() {
            sum += self.coeffs[k] * (self.norms[k] * w.powi(k as i32)).powi(2);
        }
        sum.sqrt()
    }

    /// Bound on `sum_{k >= 0} c_k u_k w^k` (first-power weighted sum used
    /// by kernel-identity budgets).
    pub fn weighted_total(&self, w: f64) -> f64 {
        let mut sum = 0.0;
        for k in 0..=self.k_max() {
            sum += self.coeffs[k] * self.norms[k] * w.powi(k as i32);
        }
        if self.geo_rate > 0.0 {
            let k = self.k_max();
            let g = (self.m as f64 + k as f64) / (k as f64 + 1.0);
            let rho = g * self.geo_rate * w;
            if rho >= 1.0 {
                return f64::INFINITY;
            }
            let t_k = self.coeffs[k] * self.geo_scale * (self.geo_rate * w).powi(k as i32);
            sum += t_k * rho / (1.0 - rho);
        }
        sum
    }

    /// Like [`weighted_total`](Self::weighted_total) but starting after `n`.
    pub fn weighted_from(&self, n: usize, w: f64) -> f64 {
        let mut sum = 0.0;
        for k in (n + 1)..=self.k_max() {
            sum += self.coeffs[k] * self.norms[k] * w.powi(k as i32);
        }
        if self.geo_rate > 0.0 {
            let k = self.k_max();
            let g = (self.m as f64 + k as f64) / (k as f64 + 1.0);
            let rho = g * self.geo_rate * w;
            if rho >= 1.0 {
                return f64::INFINITY;
            }
            let t_k = self.coeffs[k] * self.geo_scale * (self.geo_rate * w).powi(k as i32);
            sum += t_k * rho / (1.0 - rho);
        }
        sum
    }
}

fn table_span(n_degree: usize) -> usize {
    (4 * (n_degree + 1)).max(2 * DIRECT_POWER_CAP)
}

/// Smallest degree whose one-axis tail is at most `epsilon`.
pub fn select_degree_single(
    t: &CMatrix,
    m: u32,
    epsilon: f64,
    cap: usize,
) -> Result<usize, DilationError> {
    let table = TailTable::build(t, m, table_span(cap));
    for n in 0..=cap {
        let tail = table.tail(n);
        if tail <= epsilon {
            return Ok(n);
        }
        if !tail.is_finite() && n == cap {
            return Err(DilationError::TailBoundUnavailable);
        }
    }
    Err(DilationError::DegreeCapExceeded { cap, epsilon })
}

/// Smallest shared degree whose accumulated per-axis tails stay within
/// `epsilon`.
pub fn select_degree_joint(
    t: &OperatorTuple,
    m: &WeightMultiIndex,
    epsilon: f64,
    cap: usize,
) -> Result<usize, DilationError> {
    let tables: Vec<TailTable> = (0..t.n())
        .map(|i| TailTable::build(t.op(i), m.entries()[i], table_span(cap)))
        .collect();
    for n in 0..=cap {
        let total: f64 = tables.iter().map(|tb| tb.tail(n)).sum();
        if total <= epsilon {
            return Ok(n);
        }
    }
    if tables.iter().any(|tb| !tb.tail(cap).is_finite()) {
        return Err(DilationError::TailBoundUnavailable);
    }
    Err(DilationError::DegreeCapExceeded { cap, epsilon })
}

/// Isometric (up to tail) dilation of a certified tuple into a truncated
/// weighted Bergman space.
#[derive(Debug, Clone)]
pub struct DilationMap {
    /// Dimension of the dilated Hilbert space.
    pub source_dim: usize,
    /// Target truncated space; its coefficient dimension is the joint
    /// defect rank.
    pub target: TruncatedSpace,
    /// `total_dim x source_dim` matrix of the dilation.
    pub matrix: CMatrix,
    /// A-priori bound on the norm lost to truncation.
    pub tail_bound: f64,
    pub weights: WeightMultiIndex,
    /// Embedding of the defect coefficient space into the ambient
    /// `C^source_dim` (orthonormal columns). All downstream maps reuse it.
    pub coeff_frame: CMatrix,
}

/// One-axis dilation rows `sqrt(c_k) F* D (T*)^k` stacked over degrees.
fn dilation_rows(
    op: &CMatrix,
    defect_op: &CMatrix,
    frame: &CMatrix,
    m: u32,
    n_degree: usize,
) -> CMatrix {
    let h = op.nrows();
    let r = frame.ncols();
    let lead = frame.adjoint() * defect_op;
    let adj = op.adjoint();
    let mut rows = CMatrix::zeros((n_degree + 1) * r, h);
    let mut power = CMatrix::identity(h, h);
    for k in 0..=n_degree {
        let block = (&lead * &power).map(|z| z * weight_coefficient(m, k).sqrt());
        rows.view_mut((k * r, 0), (r, h)).copy_from(&block);
        if k < n_degree {
            power = &adj * power;
        }
    }
    rows
}

/// Dilation of a single certified operator at truncation degree `n_degree`.
///
/// Rows at degree `k` are `sqrt(binom(m+k-1,k)) F* D (T*)^k` in the
/// orthonormal basis; the coefficient space of the target is the defect
/// space of `(T, m)`.
pub fn agler_dilation(
    t: &OperatorTuple,
    m: &WeightMultiIndex,
    n_degree: usize,
    tol: &Tolerances,
) -> Result<DilationMap, DilationError> {
    let cert = certify(t, m, CertifyMode::Bm, tol)?;
    if !cert.verdict {
        return Err(DilationError::NotBmContraction(Box::new(cert)));
    }
    let d = defect(t, m, tol)?;
    let table = TailTable::build(t.op(0), m.entries()[0], table_span(n_degree));
    let tail_bound = table.tail(n_degree);
    if !(tail_bound <= MAX_TAIL) {
        return Err(DilationError::TailBoundTooLarge { tail: tail_bound });
    }
    let matrix = dilation_rows(
        t.op(0),
        &d.defect_op,
        d.defect_frame.matrix(),
        m.entries()[0],
        n_degree,
    );
    let target = TruncatedSpace::new(m.clone(), n_degree, d.rank.max(1));
    Ok(DilationMap {
        source_dim: t.dim(),
        target,
        matrix,
        tail_bound,
        weights: m.clone(),
        coeff_frame: d.defect_frame.matrix().clone(),
    })
}

/// Joint dilation together with its construction diagnostics.
#[derive(Debug, Clone)]
pub struct JointDilation {
    pub map: DilationMap,
    /// Disagreement between the stage composition and the closed product
    /// form, in operator norm.
    pub stage_agreement: f64,
    pub certificate: Certificate,
}

/// Dilation of a certified doubly commuting tuple.
///
/// The stage path dilates one axis at a time, each stage acting on the
/// defect space accumulated so far; the result must agree with the
/// closed product-form rows within `tol_residual`. The returned matrix is
/// the closed form, expressed in the stage-constructed coefficient frame
/// so that both paths share coordinates.
pub fn joint_dilation(
    t: &OperatorTuple,
    m: &WeightMultiIndex,
    n_degree: usize,
    tol: &Tolerances,
) -> Result<JointDilation, DilationError> {
    let cert = certify(t, m, CertifyMode::DoublyCommutingJoint, tol)?;
    if !cert.verdict {
        return Err(DilationError::NotDoublyCommutingJoint(Box::new(cert)));
    }
    let h = t.dim();
    let n = t.n();
    let per = n_degree + 1;

    // Stage path: V_j = I (x) v_{m_j, T_j restricted to the accumulated
    // defect space}.
    let mut embedding = CMatrix::identity(h, h);
    let mut v_stage = CMatrix::identity(h, h);
    let mut tail_bound = 0.0f64;
    for axis in 0..n {
        let m_axis = m.entries()[axis];
        let restricted = embedding.adjoint() * t.op(axis) * &embedding;
        let single = OperatorTuple::single(restricted.clone())?;
        let weight = WeightMultiIndex::single(m_axis);
        let d = defect(&single, &weight, tol)?;
        let v_axis = dilation_rows(
            &restricted,
            &d.defect_op,
            d.defect_frame.matrix(),
            m_axis,
            n_degree,
        );
        let r_prev = embedding.ncols();
        let r_new = d.defect_frame.dim();
        // Apply I_{(N+1)^axis} (x) v_axis to the accumulated map.
        let groups = per.pow(axis as u32);
        let mut next = CMatrix::zeros(groups * per * r_new, h);
        for g in 0..groups {
            let block = v_stage.view((g * r_prev, 0), (r_prev, h));
            let mapped = &v_axis * block;
            next.view_mut((g * per * r_new, 0), (per * r_new, h))
                .copy_from(&mapped);
        }
        v_stage = next;
        embedding = &embedding * d.defect_frame.matrix();
        let table = TailTable::build(t.op(axis), m_axis, table_span(n_degree));
        tail_bound += table.tail(n_degree);
    }
    if !(tail_bound <= MAX_TAIL) {
        return Err(DilationError::TailBoundTooLarge { tail: tail_bound });
    }
    let rank = embedding.ncols().max(1);

    // Closed product form in the same coefficient frame:
    // rows sqrt(prod c) E* (prod_i D_i) T*^k.
    let mut defect_product = CMatrix::identity(h, h);
    for axis in 0..n {
        let single = OperatorTuple::single(t.op(axis).clone())?;
        let d = defect(&single, &WeightMultiIndex::single(m.entries()[axis]), tol)?;
        defect_product *= d.defect_op;
    }
    let lead = embedding.adjoint() * &defect_product;
    let target = TruncatedSpace::new(m.clone(), n_degree, rank);
    let mut v_closed = CMatrix::zeros(target.total_dim() / rank.max(1) * embedding.ncols(), h);
    let adjoints: Vec<CMatrix> = t.ops().iter().map(|op| op.adjoint()).collect();
    let mut block_row = 0usize;
    let mut emit = |power: &CMatrix, k: &[usize]| {
        let scale = target.box_weight(k).sqrt();
        let block = (&lead * power).map(|z| z * scale);
        v_closed
            .view_mut((block_row, 0), (embedding.ncols(), h))
            .copy_from(&block);
        block_row += embedding.ncols();
    };
    // Lattice walk over the degree box in lexicographic order; adjoint
    // powers accumulate along the walk per axis.
    fn walk(
        axis: usize,
        n_axes: usize,
        per: usize,
        prefix: &CMatrix,
        adjoints: &[CMatrix],
        k: &mut Vec<usize>,
        emit: &mut dyn FnMut(&CMatrix, &[usize]),
    ) {
        if axis == n_axes {
            emit(prefix, k);
            return;
        }
        let mut current = prefix.clone();
        for deg in 0..per {
            k.push(deg);
            walk(axis + 1, n_axes, per, &current, adjoints, k, emit);
            k.pop();
            if deg + 1 < per {
                current = &adjoints[axis] * current;
            }
        }
    }
    let identity = CMatrix::identity(h, h);
    let mut k = Vec::with_capacity(n);
    walk(0, n, per, &identity, &adjoints, &mut k, &mut emit);

    let diff = &v_closed - &v_stage;
    let stage_agreement = linalg::op_norm(&diff);
    if stage_agreement > tol.tol_residual * (1.0 + linalg::op_norm(&v_closed)) {
        return Err(DilationError::StagePathMismatch {
            residual: stage_agreement,
        });
    }
    Ok(JointDilation {
        map: DilationMap {
            source_dim: h,
            target,
            matrix: v_closed,
            tail_bound,
            weights: m.clone(),
            coeff_frame: embedding,
        },
        stage_agreement,
        certificate: cert,
    })
}

/// Verification report for the dilation identities.
#[derive(Debug, Clone)]
pub struct DilationIdentityReport {
    /// `||V* V - I||`.
    pub isometry_residual: f64,
    pub isometry_threshold: f64,
    /// `||V T_i* - M_{z_i}* V||` per axis.
    pub intertwining_residuals: Vec<f64>,
    pub intertwining_threshold: f64,
    /// Worst residual of `V V* K_w eta` against the direct-inversion
    /// evaluation of the reproducing identity over the sample grid.
    pub kernel_identity_max: f64,
    pub kernel_identity_threshold: f64,
    pub pass: bool,
}

/// Checks isometry, adjoint intertwining, and the reproducing-kernel
/// action of `V V*` on a deterministic grid of interior points.
///
/// Pass thresholds scale with the recorded tail bound: the truncated
/// shift never leaves the box, so every deviation is either roundoff or
/// tail.
pub fn verify_dilation_identities(
    v: &DilationMap,
    t: &OperatorTuple,
    tol: &Tolerances,
) -> Result<DilationIdentityReport, DilationError> {
    let h = v.source_dim;
    let gram = v.matrix.adjoint() * &v.matrix;
    let isometry_residual = linalg::op_norm(&(gram - CMatrix::identity(h, h)));
    let isometry_threshold = 2.0 * v.tail_bound + 10.0 * tol.tol_psd;

    let mut intertwining_residuals = Vec::with_capacity(t.n());
    for axis in 0..t.n() {
        let left = &v.matrix * t.op(axis).adjoint();
        let right = v.target.apply_shift_adjoint_mat(axis, &v.matrix)?;
        intertwining_residuals.push(linalg::op_norm(&(left - right)));
    }
    let intertwining_threshold = 10.0 * (v.tail_bound + tol.tol_psd);

    // Kernel identity on 5 random points per axis inside radius 0.9.
    let mut rng = ChaCha8Rng::seed_from_u64(0xB5D1);
    let n = t.n();
    let r = v.target.coeff_dim();
    let tables: Vec<TailTable> = (0..n)
        .map(|i| TailTable::build(t.op(i), v.weights.entries()[i], table_span(v.target.degree_cap())))
        .collect();
    let mut axis_points: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let pts = (0..5)
            .map(|_| {
                let radius = 0.9 * rng.gen::<f64>().sqrt();
                let angle = rng.gen::<f64>() * std::f64::consts::TAU;
                Complex64::from_polar(radius, angle)
            })
            .collect();
        axis_points.push(pts);
    }
    // Per-axis defect operators for the direct evaluation.
    let mut axis_defects = Vec::with_capacity(n);
    for i in 0..n {
        let single = OperatorTuple::single(t.op(i).clone())?;
        let d = defect(&single, &WeightMultiIndex::single(v.weights.entries()[i]), tol)?;
        axis_defects.push(d.defect_op);
    }
    let mut kernel_identity_max = 0.0f64;
    let mut kernel_identity_threshold = tol.tol_residual;
    let mut grid = vec![0usize; n];
    loop {
        let w: Vec<Complex64> = (0..n).map(|i| axis_points[i][grid[i]]).collect();
        for trial in 0..2usize {
            let mut eta = CVector::from_fn(r, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            if trial == 0 {
                eta = CVector::from_fn(r, |i, _| {
                    Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)
                });
            }
            let nrm = eta.norm();
            if nrm == 0.0 {
                continue;
            }
            eta /= Complex64::new(nrm, 0.0);
            let kvec = v.target.kernel_vector(&w, &eta)?;
            let projected = v.matrix.adjoint() * kvec.coeffs();
            // Direct inversion: u = prod_i (I - conj(w_i) T_i)^(-m_i) D_i (F eta).
            let mut u = &v.coeff_frame * &eta;
            for i in 0..n {
                u = &axis_defects[i] * u;
                let factor = CMatrix::identity(h, h) - t.op(i).map(|z| z * w[i].conj());
                let inv = factor
                    .try_inverse()
                    .expect("I - conj(w) T is invertible inside the disc");
                for _ in 0..v.weights.entries()[i] {
                    u = &inv * u;
                }
            }
            let resid = (&v.matrix * (projected - u)).norm();
            kernel_identity_max = kernel_identity_max.max(resid);
        }
        // The truncated kernel vector misses the tail of one axis while
        // the rest stay inside the unit ball of the weighted sum.
        let mut budget = 0.0f64;
        for i in 0..n {
            let mut term = tables[i].weighted_from(v.target.degree_cap(), w[i].norm());
            for j in 0..n {
                if j != i {
                    term *= tables[j].weighted_total(w[j].norm());
                }
            }
            budget += term;
        }
        kernel_identity_threshold =
            kernel_identity_threshold.max(10.0 * (budget + v.tail_bound) + tol.tol_residual);

        let mut axis = n;
        let mut done = false;
        loop {
            if axis == 0 {
                done = true;
                break;
            }
            axis -= 1;
            if grid[axis] + 1 < 5 {
                grid[axis] += 1;
                break;
            }
            grid[axis] = 0;
        }
        if done {
            break;
        }
    }
    let pass = isometry_residual <= isometry_threshold
        && intertwining_residuals
            .iter()
            .all(|&x| x <= intertwining_threshold)
        && kernel_identity_max <= kernel_identity_threshold;
    Ok(DilationIdentityReport {
        isometry_residual,
        isometry_threshold,
        intertwining_residuals,
        intertwining_threshold,
        kernel_identity_max,
        kernel_identity_threshold,
        pass,
    })
}

/// Projection `R_j`: identity on the other axes tensored with the range
/// projection of the one-axis dilation, restricted to the joint-defect
/// coefficient space. Stored in factored form.
#[derive(Debug, Clone)]
pub struct ModelProjection {
    pub target: TruncatedSpace,
    pub axis: usize,
    /// One-axis compression `C_j` with `P_j = C_j C_j*` on the single-axis
    /// truncated space over the joint defect coefficients.
    pub axis_compression: CMatrix,
    /// Orthonormal lifted frame `G_j`.
    lifted_frame: CMatrix,
    /// One-axis core `M` with `P_j = Q M Q*`; the lifted core is
    /// `I (x) M` against the lifted frame's column blocks.
    axis_core: CMatrix,
    pub idempotency_residual: f64,
    /// Residual of the reducing-subspace property of the restriction.
    pub rd_invariance_residual: f64,
}

impl ModelProjection {
    /// Orthonormal frame `G` and core `K` with `R = G K G*`.
    pub fn factored(&self) -> (&CMatrix, CMatrix) {
        let per_blocks = self.lifted_frame.ncols() / self.axis_core.nrows();
        let k = block_diag(&self.axis_core, per_blocks);
        (&self.lifted_frame, k)
    }

    /// Dense `total x total` matrix of the projection.
    pub fn matrix(&self) -> CMatrix {
        let (g, k) = self.factored();
        g * k * g.adjoint()
    }
}

fn block_diag(m: &CMatrix, copies: usize) -> CMatrix {
    let (r, c) = (m.nrows(), m.ncols());
    let mut out = CMatrix::zeros(r * copies, c * copies);
    for b in 0..copies {
        out.view_mut((b * r, b * c), (r, c)).copy_from(m);
    }
    out
}

/// Builds `R_j` for a certified tuple from the joint coefficient frame of
/// an existing dilation.
pub fn model_projection(
    t: &OperatorTuple,
    v: &DilationMap,
    axis: usize,
    tol: &Tolerances,
) -> Result<ModelProjection, DilationError> {
    let h = v.source_dim;
    let m_axis = v.weights.entries()[axis];
    let single = OperatorTuple::single(t.op(axis).clone())?;
    let d = defect(&single, &WeightMultiIndex::single(m_axis), tol)?;
    let n_degree = v.target.degree_cap();
    // C_j rows at degree k: sqrt(c_k) F* D_j (T_j*)^k, F the joint frame.
    let c_j = dilation_rows(t.op(axis), &d.defect_op, &v.coeff_frame, m_axis, n_degree);
    // Reducing-subspace residual: the part of the one-axis projection that
    // leaves the restricted coefficient space.
    let complement = CMatrix::identity(h, h) - &v.coeff_frame * v.coeff_frame.adjoint();
    let l_out = dilation_rows(t.op(axis), &d.defect_op, &complement.adjoint(), m_axis, n_degree);
    let rd_invariance_residual = linalg::op_norm_lowrank(&l_out, &c_j);

    let qr = c_j.clone().qr();
    let q = qr.q();
    let r_factor = qr.r();
    let core = &r_factor * r_factor.adjoint();
    let idempotency_residual = linalg::op_norm(&(&core * &core - &core));
    let lifted = v.target.lift_axis_map(axis, &q)?;
    Ok(ModelProjection {
        target: v.target.clone(),
        axis,
        axis_compression: c_j,
        lifted_frame: lifted,
        axis_core: core,
        idempotency_residual,
        rd_invariance_residual,
    })
}

/// Residual report for the product formula `V V* = prod_i R_i`.
#[derive(Debug, Clone)]
pub struct ProductFormulaReport {
    /// `||R_i R_j - R_j R_i||` for `i < j`.
    pub commutator_residuals: Vec<(usize, usize, f64)>,
    /// `||R_i^2 - R_i||` per axis.
    pub idempotency_residuals: Vec<f64>,
    /// `||R_i* - R_i||` per axis.
    pub hermiticity_residuals: Vec<f64>,
    /// `||V V* - prod_i R_i||` in ascending axis order.
    pub product_residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Verifies that the model projections commute, are orthogonal
/// projections, and multiply to the range projection of the dilation.
/// All norms are exact, computed through low-rank factorizations.
pub fn verify_product_formula(
    v: &DilationMap,
    projections: &[ModelProjection],
    tol: &Tolerances,
) -> ProductFormulaReport {
    let mut commutator_residuals = Vec::new();
    let mut idempotency_residuals = Vec::new();
    let mut hermiticity_residuals = Vec::new();
    let factored: Vec<(&CMatrix, CMatrix)> = projections.iter().map(|p| p.factored()).collect();
    for (i, (g_i, k_i)) in factored.iter().enumerate() {
        // G is orthonormal, so conjugation by it preserves norms.
        idempotency_residuals.push(linalg::op_norm(&(k_i * k_i - k_i)));
        hermiticity_residuals.push(linalg::op_norm(&(k_i.adjoint() - k_i)));
        for (j, (g_j, k_j)) in factored.iter().enumerate().skip(i + 1) {
            let cross = g_i.adjoint() * *g_j;
            let left_i = *g_i * (k_i * &cross * k_j);
            let left_j = *g_j * (k_j * cross.adjoint() * k_i);
            let mut l = CMatrix::zeros(left_i.nrows(), left_i.ncols() + left_j.ncols());
            l.view_mut((0, 0), left_i.shape()).copy_from(&left_i);
            l.view_mut((0, left_i.ncols()), left_j.shape())
                .copy_from(&(-left_j));
            let mut r = CMatrix::zeros(g_j.nrows(), g_j.ncols() + g_i.ncols());
            r.view_mut((0, 0), g_j.shape()).copy_from(g_j);
            r.view_mut((0, g_j.ncols()), g_i.shape()).copy_from(g_i);
            commutator_residuals.push((i, j, linalg::op_norm_lowrank(&l, &r)));
        }
    }
    // prod R_i in ascending order, kept in factored form L R*.
    let (g0, k0) = &factored[0];
    let mut left = *g0 * k0;
    let mut right: CMatrix = (*g0).clone();
    for (g, k) in factored.iter().skip(1) {
        left = &left * (right.adjoint() * *g * k);
        right = (*g).clone();
    }
    let mut l = CMatrix::zeros(v.matrix.nrows(), v.matrix.ncols() + left.ncols());
    l.view_mut((0, 0), v.matrix.shape()).copy_from(&v.matrix);
    l.view_mut((0, v.matrix.ncols()), left.shape())
        .copy_from(&(-left.clone()));
    let mut r = CMatrix::zeros(v.matrix.nrows(), v.matrix.ncols() + right.ncols());
    r.view_mut((0, 0), v.matrix.shape()).copy_from(&v.matrix);
    r.view_mut((0, v.matrix.ncols()), right.shape()).copy_from(&right);
    let product_residual = linalg::op_norm_lowrank(&l, &r);
    let threshold = 20.0 * (v.tail_bound + tol.tol_psd);
    let pass = product_residual <= threshold
        && commutator_residuals.iter().all(|&(_, _, x)| x <= threshold)
        && idempotency_residuals.iter().all(|&x| x <= threshold)
        && hermiticity_residuals.iter().all(|&x| x <= threshold);
    ProductFormulaReport {
        commutator_residuals,
        idempotency_residuals,
        hermiticity_residuals,
        product_residual,
        threshold,
        pass,
    }
}

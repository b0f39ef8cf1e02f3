//! Diagonal reproducing-kernel framework.
//!
//! A diagonal kernel `k(z, w) = sum c_k z^k conj(w)^k` with positive
//! nondecreasing coefficients and `c_0 = 1` spans a space with monomial
//! orthonormal basis `psi_k = sqrt(c_k) z^k` and a contractive shift. The
//! reciprocal series of the kernel drives a contractivity test whose
//! limit operator generalizes the inverse-kernel positivity matrices, and
//! the associated dilation specializes entrywise to the weighted Bergman
//! construction for binomial coefficients. Operator limits are evaluated
//! as norm limits of partial sums, which is legitimate for finite
//! matrices.

use crate::bergman::weight_coefficient;
use crate::hereditary::{HereditaryError, OperatorTuple, SPECTRAL_MARGIN};
use crate::linalg::{self, CMatrix, LinalgError, Tolerances};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SrkhError {
    #[error("kernel coefficients must be positive with c_0 = 1")]
    InvalidCoefficients,
    #[error("kernel coefficients must be nondecreasing (contractive shift); violated at k = {0}")]
    ShiftNotContractive(usize),
    #[error("spectral radius {rho} is not strictly below one")]
    SpectralRadiusTooLarge { rho: f64 },
    #[error("operator is not kernel-contractive: {0}")]
    NotKContractive(String),
    #[error("tuple is not doubly commuting: residual {residual:.3e}")]
    NotDoublyCommuting { residual: f64 },
    #[error("one kernel per axis is required: {kernels} kernels for {axes} axes")]
    AxisMismatch { kernels: usize, axes: usize },
    #[error(transparent)]
    Hereditary(#[from] HereditaryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Diagonal kernel with stored coefficients `c_0, ..., c_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalKernel {
    coeffs: Vec<f64>,
}

impl DiagonalKernel {
    /// Validates positivity, normalization, and the shift-contraction
    /// witness `c_k <= c_{k+1}`.
    pub fn new(coeffs: Vec<f64>) -> Result<Self, SrkhError> {
        if coeffs.is_empty() || (coeffs[0] - 1.0).abs() > 1e-14 {
            return Err(SrkhError::InvalidCoefficients);
        }
        if coeffs.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(SrkhError::InvalidCoefficients);
        }
        for k in 0..coeffs.len() - 1 {
            if coeffs[k] > coeffs[k + 1] * (1.0 + 1e-14) {
                return Err(SrkhError::ShiftNotContractive(k));
            }
        }
        Ok(Self { coeffs })
    }

    /// Hardy kernel: all coefficients one.
    pub fn hardy(len: usize) -> Self {
        Self {
            coeffs: vec![1.0; len.max(1)],
        }
    }

    /// Weighted Bergman kernel coefficients `binom(m + k - 1, k)`.
    pub fn bergman(m: u32, len: usize) -> Self {
        Self {
            coeffs: (0..len.max(1)).map(|k| weight_coefficient(m, k)).collect(),
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Matrix of the shift on the truncated kernel space: basis `psi_k`
    /// maps to `sqrt(c_k / c_{k+1}) psi_{k+1}`; norm at most one by the
    /// monotonicity witness.
    pub fn shift_matrix(&self, n_degree: usize) -> CMatrix {
        let n_degree = n_degree.min(self.coeffs.len() - 1);
        let mut out = CMatrix::zeros(n_degree + 1, n_degree + 1);
        for k in 0..n_degree {
            out[(k + 1, k)] =
                Complex64::new((self.coeffs[k] / self.coeffs[k + 1]).sqrt(), 0.0);
        }
        out
    }
}

/// Coefficients of `1 / k(z, w)` as a diagonal series.
#[derive(Debug, Clone)]
pub struct ReciprocalSeries {
    coeffs: Vec<f64>,
    /// Largest deviation of the convolution identity over the stored range.
    pub convolution_residual: f64,
}

impl ReciprocalSeries {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Power-series inversion: `b_0 = 1`,
/// `b_k = -sum_{j=1..k} c_j b_{k-j}`, verified against the convolution
/// identity `sum_{j<=k} b_j c_{k-j} = [k = 0]`.
pub fn reciprocal_series(kernel: &DiagonalKernel, n_degree: usize) -> ReciprocalSeries {
    let c = kernel.coeffs();
    let len = (n_degree + 1).min(c.len());
    let mut b = vec![0.0f64; len];
    b[0] = 1.0;
    for k in 1..len {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += c[j] * b[k - j];
        }
        b[k] = -acc;
    }
    let mut convolution_residual = 0.0f64;
    for k in 0..len {
        let mut conv = 0.0;
        for j in 0..=k {
            conv += b[j] * c[k - j];
        }
        let expected = if k == 0 { 1.0 } else { 0.0 };
        convolution_residual = convolution_residual.max((conv - expected).abs());
    }
    ReciprocalSeries {
        coeffs: b,
        convolution_residual,
    }
}

/// Certificate for kernel-contractivity of a single operator.
#[derive(Debug, Clone)]
pub struct KContractCertificate {
    /// Limit candidate: symmetrized partial sum of `b_k T^k T*^k`.
    pub limit: CMatrix,
    /// `||S_N - S_{N/2}||`.
    pub convergence_residual: f64,
    pub min_eig: f64,
    /// `(K, ||f_K||)` samples of the remainder
    /// `f_K = I - sum_{k<K} psi_k(T) C psi_k(T)*`.
    pub remainder_decay: Vec<(usize, f64)>,
    /// Observed sup of `||p_K(M_z, M_z*)||` on the truncated kernel shift.
    pub shift_calculus_sup: f64,
    pub verdict: bool,
}

/// Tests kernel-contractivity by evaluating the reciprocal partial sums
/// at `(T, T*)` and the remainder decay at the limit candidate.
pub fn k_contractivity(
    t: &CMatrix,
    kernel: &DiagonalKernel,
    n_degree: usize,
    tol: &Tolerances,
) -> Result<KContractCertificate, SrkhError> {
    let rho = linalg::spectral_radius(t);
    if rho >= 1.0 - SPECTRAL_MARGIN {
        return Err(SrkhError::SpectralRadiusTooLarge { rho });
    }
    let n_degree = n_degree.min(kernel.len() - 1);
    let recip = reciprocal_series(kernel, n_degree);
    let b = recip.coeffs();
    let dim = t.nrows();
    let adj = t.adjoint();
    // Partial sums of b_k T^k T*^k with the half-way snapshot retained.
    let mut sum = CMatrix::zeros(dim, dim);
    let mut half = CMatrix::zeros(dim, dim);
    let mut power = CMatrix::identity(dim, dim);
    for (k, &bk) in b.iter().enumerate() {
        if bk != 0.0 {
            sum += (&power * power.adjoint()).map(|z| z * bk);
        }
        if k == n_degree / 2 {
            half = sum.clone();
        }
        if k < n_degree {
            power = &adj * power;
        }
    }
    let convergence_residual = linalg::op_norm(&(&sum - &half));
    let limit = linalg::symmetrize(&sum);
    let psd = linalg::psd_check(&limit, tol)?;

    // Remainder decay f_K = I - sum_{k<K} c_k T^k C T*^k at a few scales.
    let samples = [n_degree / 4, n_degree / 2, n_degree];
    let mut remainder_decay = Vec::new();
    let mut running = CMatrix::identity(dim, dim);
    let mut power = CMatrix::identity(dim, dim);
    let c = kernel.coeffs();
    let mut next_sample = 0usize;
    for k in 0..=n_degree {
        while next_sample < samples.len() && samples[next_sample] == k {
            remainder_decay.push((k, linalg::op_norm(&running)));
            next_sample += 1;
        }
        let term = (&power * &limit * power.adjoint()).map(|z| z * c[k]);
        running -= term;
        power = &adj * &power;
    }
    remainder_decay.push((n_degree + 1, linalg::op_norm(&running)));
    let final_remainder = remainder_decay.last().map(|&(_, v)| v).unwrap_or(1.0);

    // Observed boundedness of the reciprocal calculus on the truncated
    // kernel shift.
    let shift = kernel.shift_matrix(n_degree);
    let shift_adj = shift.adjoint();
    let mut shift_sum = CMatrix::zeros(n_degree + 1, n_degree + 1);
    let mut shift_power = CMatrix::identity(n_degree + 1, n_degree + 1);
    let mut shift_calculus_sup = 0.0f64;
    for (k, &bk) in b.iter().enumerate() {
        if bk != 0.0 {
            shift_sum += (&shift_power * shift_power.adjoint()).map(|z| z * bk);
        }
        shift_calculus_sup = shift_calculus_sup.max(linalg::op_norm(&shift_sum));
        if k < n_degree {
            shift_power = &shift_adj * shift_power;
        }
    }

    let decay_tol = (100.0 * tol.tol_residual).max(10.0 * rho.powi(n_degree as i32));
    let verdict = psd.is_psd
        && convergence_residual <= decay_tol
        && final_remainder <= decay_tol;
    Ok(KContractCertificate {
        limit,
        convergence_residual,
        min_eig: psd.min_eig,
        remainder_decay,
        shift_calculus_sup,
        verdict,
    })
}

/// Truncated diagonal-kernel space metadata for a dilation target.
#[derive(Debug, Clone)]
pub struct KernelSpace {
    pub kernel: DiagonalKernel,
    pub degree_cap: usize,
    pub coeff_dim: usize,
}

/// Dilation into the truncated diagonal-kernel space.
#[derive(Debug, Clone)]
pub struct SrkhDilation {
    pub space: KernelSpace,
    /// Rows `sqrt(c_k) F* C^(1/2) (T*)^k` stacked over degrees.
    pub matrix: CMatrix,
    /// Defect square root `C^(1/2)`.
    pub defect: CMatrix,
    /// Frame of the defect coefficient space in the ambient space.
    pub coeff_frame: CMatrix,
    /// `||V* V - I||`.
    pub isometry_residual: f64,
    /// `||V T* - M_z* V||`.
    pub intertwining_residual: f64,
}

/// Builds the kernel-space dilation `(V h)_k = sqrt(c_k) C^(1/2) T*^k h`
/// of a kernel-contractive operator.
pub fn srkh_dilation(
    t: &CMatrix,
    kernel: &DiagonalKernel,
    n_degree: usize,
    tol: &Tolerances,
) -> Result<SrkhDilation, SrkhError> {
    let cert = k_contractivity(t, kernel, kernel.len() - 1, tol)?;
    if !cert.verdict {
        return Err(SrkhError::NotKContractive(format!(
            "convergence {:.3e}, min eig {:.3e}, remainder {:.3e}",
            cert.convergence_residual,
            cert.min_eig,
            cert.remainder_decay.last().map(|&(_, v)| v).unwrap_or(1.0)
        )));
    }
    let defect = linalg::psd_sqrt(&cert.limit, tol)?;
    let frame = linalg::orthonormal_range(&defect, tol);
    let r = frame.dim().max(1);
    let dim = t.nrows();
    let lead = frame.matrix().adjoint() * &defect;
    let adj = t.adjoint();
    let c = kernel.coeffs();
    let n_degree = n_degree.min(c.len() - 1);
    let mut matrix = CMatrix::zeros((n_degree + 1) * r, dim);
    let mut power = CMatrix::identity(dim, dim);
    for k in 0..=n_degree {
        if frame.dim() > 0 {
            let block = (&lead * &power).map(|z| z * c[k].sqrt());
            matrix
                .view_mut((k * r, 0), (frame.dim(), dim))
                .copy_from(&block);
        }
        if k < n_degree {
            power = &adj * power;
        }
    }
    let isometry_residual = linalg::op_norm(
        &(matrix.adjoint() * &matrix - CMatrix::identity(dim, dim)),
    );
    // Adjoint-shift intertwining on the truncated kernel space, block by
    // block: (M_z* V) rows at k are sqrt(c_k/c_{k+1}) times V rows at k+1.
    let mut shifted = CMatrix::zeros(matrix.nrows(), dim);
    for k in 0..n_degree {
        let upper = matrix.view(((k + 1) * r, 0), (r, dim));
        let w = (c[k] / c[k + 1]).sqrt();
        shifted
            .view_mut((k * r, 0), (r, dim))
            .copy_from(&upper.map(|z| z * w));
    }
    let intertwining_residual = linalg::op_norm(&(&matrix * &adj - shifted));
    Ok(SrkhDilation {
        space: KernelSpace {
            kernel: kernel.clone(),
            degree_cap: n_degree,
            coeff_dim: frame.dim(),
        },
        matrix,
        defect,
        coeff_frame: frame.matrix().clone(),
        isometry_residual,
        intertwining_residual,
    })
}

/// Joint certificate for a doubly commuting tuple against a product of
/// diagonal kernels.
#[derive(Debug, Clone)]
pub struct ProductKernelCertificate {
    /// Per-axis limit operators.
    pub axis_limits: Vec<CMatrix>,
    /// Per-axis verdicts.
    pub axis_verdicts: Vec<bool>,
    /// `||C_i C_j - C_j C_i||` for `i < j`.
    pub commutation_residuals: Vec<(usize, usize, f64)>,
    /// Symmetrized product of the per-axis limits.
    pub joint_limit: CMatrix,
    pub joint_min_eig: f64,
    pub verdict: bool,
}

/// Certifies each axis against its kernel and the product positivity of
/// the per-axis limits.
pub fn product_kernel_certify(
    t: &OperatorTuple,
    kernels: &[DiagonalKernel],
    n_degree: usize,
    tol: &Tolerances,
) -> Result<ProductKernelCertificate, SrkhError> {
    if kernels.len() != t.n() {
        return Err(SrkhError::AxisMismatch {
            kernels: kernels.len(),
            axes: t.n(),
        });
    }
    if !t.is_doubly_commuting(tol) {
        return Err(SrkhError::NotDoublyCommuting {
            residual: t
                .double_commutation_residual()
                .max(t.commutation_residual()),
        });
    }
    let mut axis_limits = Vec::with_capacity(t.n());
    let mut axis_verdicts = Vec::with_capacity(t.n());
    for (i, kernel) in kernels.iter().enumerate() {
        let cert = k_contractivity(t.op(i), kernel, n_degree.min(kernel.len() - 1), tol)?;
        axis_limits.push(cert.limit.clone());
        axis_verdicts.push(cert.verdict);
    }
    let mut commutation_residuals = Vec::new();
    for i in 0..t.n() {
        for j in i + 1..t.n() {
            let comm = &axis_limits[i] * &axis_limits[j] - &axis_limits[j] * &axis_limits[i];
            commutation_residuals.push((i, j, linalg::op_norm(&comm)));
        }
    }
    let mut product = CMatrix::identity(t.dim(), t.dim());
    for c in &axis_limits {
        product *= c.clone();
    }
    let joint_limit = linalg::symmetrize(&product);
    let psd = linalg::psd_check(&joint_limit, tol)?;
    let verdict = axis_verdicts.iter().all(|&v| v) && psd.is_psd;
    Ok(ProductKernelCertificate {
        axis_limits,
        axis_verdicts,
        commutation_residuals,
        joint_limit,
        joint_min_eig: psd.min_eig,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hereditary::{bergman_inverse_poly, hereditary_apply, WeightMultiIndex};
    use crate::linalg::op_norm;

    fn c64(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar(v: f64) -> CMatrix {
        CMatrix::from_element(1, 1, c64(v))
    }

    fn jordan(a: f64) -> CMatrix {
        let mut j = CMatrix::zeros(2, 2);
        j[(0, 1)] = c64(a);
        j
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn kernel_validation() {
        assert!(DiagonalKernel::new(vec![1.0, 1.0, 2.0]).is_ok());
        assert!(matches!(
            DiagonalKernel::new(vec![2.0, 1.0]),
            Err(SrkhError::InvalidCoefficients)
        ));
        assert!(matches!(
            DiagonalKernel::new(vec![1.0, 0.5]),
            Err(SrkhError::ShiftNotContractive(0))
        ));
        assert!(matches!(
            DiagonalKernel::new(vec![1.0, -1.0]),
            Err(SrkhError::InvalidCoefficients)
        ));
    }

    #[test]
    fn reciprocal_of_hardy_kernel() {
        let kernel = DiagonalKernel::hardy(10);
        let recip = reciprocal_series(&kernel, 9);
        assert_eq!(recip.coeffs()[0], 1.0);
        assert_eq!(recip.coeffs()[1], -1.0);
        for k in 2..10 {
            assert!(recip.coeffs()[k].abs() < 1e-14);
        }
        assert!(recip.convolution_residual < 1e-12);
    }

    #[test]
    fn reciprocal_of_bergman_kernels_gives_binomials() {
        for m in 1..=8u32 {
            let kernel = DiagonalKernel::bergman(m, 20);
            let recip = reciprocal_series(&kernel, 19);
            for (k, &bk) in recip.coeffs().iter().enumerate() {
                // Signed binomial, zero past m.
                let mut expected = 1.0f64;
                for j in 1..=k {
                    expected *= (m as f64 - j as f64 + 1.0) / j as f64;
                }
                if k % 2 == 1 {
                    expected = -expected;
                }
                if k > m as usize {
                    expected = 0.0;
                }
                assert!(
                    (bk - expected).abs() < 1e-10,
                    "m = {m}, k = {k}: {bk} vs {expected}"
                );
            }
            assert!(recip.convolution_residual < 1e-12);
        }
    }

    #[test]
    fn reciprocal_of_linear_coefficient_kernel() {
        // c = (1, 2, 3, ...) inverts to (1, -2, 1, 0, ...).
        let kernel = DiagonalKernel::new((1..=12).map(|k| k as f64).collect()).unwrap();
        let recip = reciprocal_series(&kernel, 11);
        assert!((recip.coeffs()[0] - 1.0).abs() < 1e-14);
        assert!((recip.coeffs()[1] + 2.0).abs() < 1e-14);
        assert!((recip.coeffs()[2] - 1.0).abs() < 1e-14);
        for k in 3..12 {
            assert!(recip.coeffs()[k].abs() < 1e-12);
        }
    }

    #[test]
    fn k_contractivity_scalar_hardy() {
        let lambda: f64 = 0.6;
        let n = 64usize;
        let kernel = DiagonalKernel::hardy(n + 1);
        let cert = k_contractivity(&scalar(lambda), &kernel, n, &tol()).unwrap();
        assert!(cert.verdict, "{cert:?}");
        assert!((cert.limit[(0, 0)].re - (1.0 - lambda * lambda)).abs() < 1e-12);
        // Geometric remainder: |lambda|^(2 (n+1)).
        let (_, final_rem) = *cert.remainder_decay.last().unwrap();
        assert!((final_rem - lambda.powi(2 * (n as i32 + 1))).abs() < 1e-12);
    }

    #[test]
    fn k_contractivity_zero_operator() {
        let kernel = DiagonalKernel::bergman(3, 20);
        let cert = k_contractivity(&CMatrix::zeros(2, 2), &kernel, 16, &tol()).unwrap();
        assert!(cert.verdict);
        assert!(op_norm(&(&cert.limit - CMatrix::identity(2, 2))) < 1e-14);
        // f_K vanishes for every K >= 1.
        for &(k, v) in &cert.remainder_decay {
            if k >= 1 {
                assert!(v < 1e-14);
            }
        }
    }

    #[test]
    fn k_contractivity_matches_hereditary_route() {
        let kernel = DiagonalKernel::bergman(2, 40);
        let a = 0.5;
        let cert = k_contractivity(&jordan(a), &kernel, 39, &tol()).unwrap();
        assert!(cert.verdict);
        let t = OperatorTuple::single(jordan(a)).unwrap();
        let hered = hereditary_apply(
            &bergman_inverse_poly(&WeightMultiIndex::single(2)),
            &t,
            &tol(),
        )
        .unwrap();
        assert!(op_norm(&(&cert.limit - hered)) < 1e-12);
    }

    #[test]
    fn k_contractivity_rejects_large_radius() {
        let kernel = DiagonalKernel::hardy(8);
        assert!(matches!(
            k_contractivity(&scalar(1.0), &kernel, 7, &tol()),
            Err(SrkhError::SpectralRadiusTooLarge { .. })
        ));
    }

    #[test]
    fn remainder_decay_is_monotone_for_contractions() {
        let kernel = DiagonalKernel::bergman(2, 64);
        let cert = k_contractivity(&jordan(0.45), &kernel, 63, &tol()).unwrap();
        assert!(cert.verdict);
        for pair in cert.remainder_decay.windows(2) {
            assert!(pair[1].1 <= pair[0].1 + 1e-12);
        }
    }

    #[test]
    fn srkh_dilation_specializes_to_bergman() {
        // For binomial coefficients the kernel dilation must reproduce
        // the weighted Bergman construction entrywise.
        let n_degree = 24usize;
        let a = 0.4;
        for m in [1u32, 2] {
            let kernel = DiagonalKernel::bergman(m, 4 * (n_degree + 1));
            let srkh = srkh_dilation(&jordan(a), &kernel, n_degree, &tol()).unwrap();
            let t = OperatorTuple::single(jordan(a)).unwrap();
            let agler = crate::dilation::agler_dilation(
                &t,
                &WeightMultiIndex::single(m),
                n_degree,
                &tol(),
            )
            .unwrap();
            assert_eq!(srkh.matrix.shape(), agler.matrix.shape());
            assert!(
                op_norm(&(&srkh.matrix - &agler.matrix)) < 1e-10,
                "m = {m}"
            );
            assert!(srkh.isometry_residual <= 2.0 * agler.tail_bound + 1e-10);
        }
    }

    #[test]
    fn srkh_dilation_zero_operator_embeds_constants() {
        let kernel = DiagonalKernel::bergman(2, 12);
        let v = srkh_dilation(&CMatrix::zeros(3, 3), &kernel, 8, &tol()).unwrap();
        assert!(v.isometry_residual < 1e-13);
        assert!(v.intertwining_residual < 1e-13);
        for k in 1..=8usize {
            let block = v.matrix.view((k * 3, 0), (3, 3));
            assert!(block.iter().all(|z| z.norm() < 1e-14));
        }
    }

    #[test]
    fn shift_contraction_witness_on_matrix() {
        for kernel in [
            DiagonalKernel::hardy(16),
            DiagonalKernel::bergman(2, 16),
            DiagonalKernel::bergman(5, 16),
        ] {
            let s = kernel.shift_matrix(15);
            assert!(op_norm(&s) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn product_kernel_scalar_pair() {
        let t = OperatorTuple::new(vec![scalar(0.5), scalar(0.3)]).unwrap();
        let kernels = vec![DiagonalKernel::hardy(64), DiagonalKernel::hardy(64)];
        let cert = product_kernel_certify(&t, &kernels, 63, &tol()).unwrap();
        assert!(cert.verdict);
        let expected = (1.0 - 0.25) * (1.0 - 0.09);
        assert!((cert.joint_limit[(0, 0)].re - expected).abs() < 1e-12);
    }

    #[test]
    fn product_kernel_matches_joint_hereditary_defect() {
        let j = jordan(0.4);
        let i2 = CMatrix::identity(2, 2);
        let t = OperatorTuple::new(vec![
            linalg::kron(&j, &i2),
            linalg::kron(&i2, &j),
        ])
        .unwrap();
        let kernels = vec![
            DiagonalKernel::bergman(2, 64),
            DiagonalKernel::bergman(2, 64),
        ];
        let cert = product_kernel_certify(&t, &kernels, 63, &tol()).unwrap();
        assert!(cert.verdict);
        for (_, _, r) in &cert.commutation_residuals {
            assert!(*r < 1e-10);
        }
        let m = WeightMultiIndex::new(vec![2, 2]).unwrap();
        let hered = hereditary_apply(&bergman_inverse_poly(&m), &t, &tol()).unwrap();
        assert!(op_norm(&(&cert.joint_limit - hered)) < 1e-10);
    }

    #[test]
    fn product_kernel_reports_failing_axis() {
        // Second axis violates the order-2 positivity.
        let t = OperatorTuple::new(vec![
            linalg::kron(&jordan(0.3), &CMatrix::identity(2, 2)),
            linalg::kron(&CMatrix::identity(2, 2), &jordan(0.8)),
        ])
        .unwrap();
        let kernels = vec![
            DiagonalKernel::bergman(2, 32),
            DiagonalKernel::bergman(2, 32),
        ];
        let cert = product_kernel_certify(&t, &kernels, 31, &tol()).unwrap();
        assert!(!cert.verdict);
        assert!(cert.axis_verdicts[0]);
        assert!(!cert.axis_verdicts[1]);
    }

    #[test]
    fn product_kernel_rejects_non_doubly_commuting() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = c64(0.4);
        let b = CMatrix::from_diagonal(&crate::linalg::CVector::from_vec(vec![
            c64(0.2),
            c64(0.5),
        ]));
        let t = OperatorTuple::new(vec![a, b]).unwrap();
        let kernels = vec![DiagonalKernel::hardy(8), DiagonalKernel::hardy(8)];
        assert!(matches!(
            product_kernel_certify(&t, &kernels, 7, &tol()),
            Err(SrkhError::NotDoublyCommuting { .. })
        ));
    }
}

//! Partially isometric multipliers for shift-invariant subspaces.
//!
//! Given a shift-invariant subspace `S` of a one-axis truncated weighted
//! Bergman space, the factorization compresses the shift to `S`, builds
//! the Hardy-space dilation of the compression, and composes the
//! resulting co-isometry with the inclusion of `S`. The outcome is a
//! polynomial multiplier `Theta` from a truncated Hardy space whose
//! multiplication operator is a partial isometry onto `S`. All residuals
//! are split into an interior part and a top-degree slack caused by the
//! truncation convention.

use crate::bergman::{weight_coefficient, BergmanError, TruncatedSpace};
use crate::hereditary::SPECTRAL_MARGIN;
use crate::linalg::{self, CMatrix, LinalgError, SubspaceFrame, Tolerances};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BlhError {
    #[error("subspace is not shift-invariant: interior residual {interior:.3e} (full {full:.3e})")]
    NotInvariant { interior: f64, full: f64 },
    #[error("compressed shift has spectral radius {rho}; pure-contraction dilation unavailable")]
    NotC0 { rho: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("the subspace is trivial")]
    EmptySubspace,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Bergman(#[from] BergmanError),
}

/// Matrix-coefficient polynomial `Theta(z) = sum_k Theta_k z^k` acting as
/// a multiplier from a truncated Hardy space into a one-axis weighted
/// Bergman space.
#[derive(Debug, Clone)]
pub struct MultiplierPoly {
    /// Dimension of the source coefficient space.
    pub source_coeff_dim: usize,
    /// One-axis target space (weight, degree cap, coefficient dimension).
    pub target_space: TruncatedSpace,
    /// Taylor coefficients; `coeffs[k]` is `target_coeff x source_coeff`.
    pub coeffs: Vec<CMatrix>,
}

impl MultiplierPoly {
    pub fn new(
        target_space: TruncatedSpace,
        source_coeff_dim: usize,
        coeffs: Vec<CMatrix>,
    ) -> Result<Self, BlhError> {
        if target_space.axes() != 1 {
            return Err(BlhError::ShapeMismatch(
                "multiplier target must be a one-axis space".into(),
            ));
        }
        for (k, c) in coeffs.iter().enumerate() {
            if c.nrows() != target_space.coeff_dim() || c.ncols() != source_coeff_dim {
                return Err(BlhError::ShapeMismatch(format!(
                    "coefficient {k} is {}x{}, expected {}x{}",
                    c.nrows(),
                    c.ncols(),
                    target_space.coeff_dim(),
                    source_coeff_dim
                )));
            }
        }
        Ok(Self {
            source_coeff_dim,
            target_space,
            coeffs,
        })
    }

    /// Degree of the polynomial (index of the last stored coefficient).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Source truncated Hardy space on the same degree box.
    pub fn source_space(&self) -> TruncatedSpace {
        TruncatedSpace::new(
            crate::hereditary::WeightMultiIndex::single(1),
            self.target_space.degree_cap(),
            self.source_coeff_dim.max(1),
        )
    }

    /// Multiplication matrix in the orthonormal bases:
    /// entry `[(k,e),(l,f)] = Theta_{k-l}[e,f] / sqrt(c_k)` with `c_k` the
    /// target weight coefficient. Products beyond the degree cap are
    /// truncated to zero.
    pub fn multiplication_matrix(&self) -> CMatrix {
        let n_degree = self.target_space.degree_cap();
        let r = self.target_space.coeff_dim();
        let q = self.source_coeff_dim;
        let m = self.target_space.weights().entries()[0];
        let mut out = CMatrix::zeros((n_degree + 1) * r, (n_degree + 1) * q.max(1));
        if q == 0 {
            return out;
        }
        for l in 0..=n_degree {
            for (j, theta_j) in self.coeffs.iter().enumerate() {
                let k = l + j;
                if k > n_degree {
                    break;
                }
                let scale = 1.0 / weight_coefficient(m, k).sqrt();
                for e in 0..r {
                    for f in 0..q {
                        out[(k * r + e, l * q + f)] += theta_j[(e, f)] * scale;
                    }
                }
            }
        }
        out
    }
}

/// Constructed factorization: the multiplier, the exact operator it came
/// from, and the residuals recorded at construction.
#[derive(Debug, Clone)]
pub struct BlhFactorization {
    pub theta: MultiplierPoly,
    /// The operator `F_S w*` the coefficients were read from.
    pub matrix: CMatrix,
    /// `||M M* - P_S||`.
    pub range_residual: f64,
    /// `||M M* M - M||`.
    pub partial_isometry_residual: f64,
    /// Interior-column disagreement between `matrix` and the banded
    /// matrix rebuilt from the read-off coefficients.
    pub interior_rebuild_residual: f64,
    /// Shift-invariance residuals of the input subspace.
    pub invariance_interior: f64,
    pub invariance_full: f64,
}

/// Interior projector on a one-axis space: degrees at most `max_degree`.
fn degree_projector(space: &TruncatedSpace, max_degree: usize) -> CMatrix {
    let r = space.coeff_dim();
    let n = space.degree_cap();
    let mut p = CMatrix::zeros((n + 1) * r, (n + 1) * r);
    for k in 0..=n.min(max_degree) {
        for e in 0..r {
            p[(k * r + e, k * r + e)] = Complex64::new(1.0, 0.0);
        }
    }
    p
}

/// Computes a partially isometric multiplier with range `S`.
///
/// `s` holds orthonormal columns spanning a shift-invariant subspace of
/// the one-axis `space`. The compression of the shift to `S` is dilated
/// into a truncated Hardy space over the defect of its adjoint; composing
/// the адjoint of that dilation with the inclusion of `S` yields the
/// multiplication operator, and the Taylor coefficients are read off its
/// action on degree-zero source vectors.
pub fn blh_multiplier(
    s: &SubspaceFrame,
    space: &TruncatedSpace,
    tol: &Tolerances,
) -> Result<BlhFactorization, BlhError> {
    if space.axes() != 1 {
        return Err(BlhError::ShapeMismatch(
            "factorization needs a one-axis space".into(),
        ));
    }
    if s.ambient_dim() != space.total_dim() {
        return Err(BlhError::ShapeMismatch(format!(
            "frame ambient dimension {} does not match the space dimension {}",
            s.ambient_dim(),
            space.total_dim()
        )));
    }
    let dim_s = s.dim();
    if dim_s == 0 {
        return Err(BlhError::EmptySubspace);
    }
    let f_s = s.matrix();
    let shift = space.shift_matrix(0)?;
    let p_s = s.projection();
    let total = space.total_dim();
    let id = CMatrix::identity(total, total);
    let shifted = &shift * f_s;
    let outside = (&id - &p_s) * &shifted;
    let invariance_full = linalg::op_norm(&outside);
    let interior = degree_projector(space, space.degree_cap().saturating_sub(1));
    let invariance_interior = linalg::op_norm(&((&id - &p_s) * &shift * &interior * &p_s));
    if invariance_interior > 10.0 * tol.tol_residual {
        return Err(BlhError::NotInvariant {
            interior: invariance_interior,
            full: invariance_full,
        });
    }

    // Compression of the shift to S; equal to the restriction when S is
    // exactly invariant.
    let x = f_s.adjoint() * &shifted;
    let rho = linalg::spectral_radius(&x);
    if rho >= 1.0 - SPECTRAL_MARGIN {
        return Err(BlhError::NotC0 { rho });
    }
    let c = CMatrix::identity(dim_s, dim_s) - &x * x.adjoint();
    let d_x = linalg::psd_sqrt(&c, tol)?;
    let source_frame = linalg::orthonormal_range(&d_x, tol);
    let q_dim = source_frame.dim();

    // Hardy dilation of X over the defect of X*: rows F_E* D (X*)^k.
    let n_degree = space.degree_cap();
    let lead = source_frame.matrix().adjoint() * &d_x;
    let x_adj = x.adjoint();
    let mut w = CMatrix::zeros((n_degree + 1) * q_dim, dim_s);
    let mut power = CMatrix::identity(dim_s, dim_s);
    for k in 0..=n_degree {
        let block = &lead * &power;
        w.view_mut((k * q_dim, 0), (q_dim, dim_s)).copy_from(&block);
        if k < n_degree {
            power = &x_adj * power;
        }
    }
    // Multiplication operator: inclusion composed with the co-isometry.
    let matrix = f_s * w.adjoint();
    let mm = &matrix * matrix.adjoint();
    let range_residual = linalg::op_norm(&(&mm - &p_s));
    let partial_isometry_residual = linalg::op_norm(&(&mm * &matrix - &matrix));

    // Taylor coefficients from the degree-zero source columns.
    let r = space.coeff_dim();
    let m_weight = space.weights().entries()[0];
    let mut coeffs = Vec::with_capacity(n_degree + 1);
    for k in 0..=n_degree {
        let mut theta_k = CMatrix::zeros(r, q_dim);
        for e in 0..r {
            for f in 0..q_dim {
                theta_k[(e, f)] =
                    matrix[(k * r + e, f)] * weight_coefficient(m_weight, k).sqrt();
            }
        }
        coeffs.push(theta_k);
    }
    while coeffs.len() > 1 && coeffs.last().map(linalg::op_norm).unwrap_or(0.0) < 1e-12 {
        coeffs.pop();
    }
    let theta = MultiplierPoly::new(space.clone(), q_dim, coeffs)?;

    // The rebuilt banded matrix must agree with the construction on
    // source degrees that stay inside the box.
    let rebuilt = theta.multiplication_matrix();
    let interior_cols = n_degree.saturating_sub(theta.degree());
    let mut interior_rebuild_residual = 0.0f64;
    if q_dim > 0 {
        let cols = (interior_cols + 1) * q_dim;
        let diff = rebuilt.columns(0, cols) - matrix.columns(0, cols);
        interior_rebuild_residual = linalg::op_norm(&diff.into_owned());
    }
    Ok(BlhFactorization {
        theta,
        matrix,
        range_residual,
        partial_isometry_residual,
        interior_rebuild_residual,
        invariance_interior,
        invariance_full,
    })
}

/// Residual report for the multiplier properties of a polynomial.
#[derive(Debug, Clone)]
pub struct PartialIsometryReport {
    /// `||M M* M - M||` on interior source degrees.
    pub partial_isometry_interior: f64,
    /// `||M M* - P_ran||` on interior target degrees.
    pub range_projection_interior: f64,
    /// `||M M_z - M_z M||` on interior source degrees.
    pub intertwining_interior: f64,
    /// The same residuals without the interior restriction.
    pub partial_isometry_full: f64,
    pub range_projection_full: f64,
    pub intertwining_full: f64,
    pub pass: bool,
}

/// Verifies partial isometry, range projection, and shift intertwining
/// for the matrix rebuilt from the stored coefficients. Interior
/// residuals exclude source degrees whose image leaves the truncation
/// box; the full residuals carry that top-degree slack.
pub fn verify_partial_isometry(
    theta: &MultiplierPoly,
    tol: &Tolerances,
) -> Result<PartialIsometryReport, BlhError> {
    let space = &theta.target_space;
    let source = theta.source_space();
    let m = theta.multiplication_matrix();
    let n_degree = space.degree_cap();
    let interior_degree = n_degree.saturating_sub(theta.degree());
    let pi_src = degree_projector(&source, interior_degree);
    let pi_src_shift = degree_projector(&source, interior_degree.saturating_sub(1));

    let ran = linalg::orthonormal_range(&m, tol);
    let p_ran = ran.projection();
    let mm = &m * m.adjoint();

    let pim_full = linalg::op_norm(&(&mm * &m - &m));
    let pim_interior = linalg::op_norm(&((&mm * &m - &m) * &pi_src));
    let range_full = linalg::op_norm(&(&mm - &p_ran));
    let pi_tgt = degree_projector(space, interior_degree);
    let range_interior = linalg::op_norm(&((&mm - &p_ran) * &pi_tgt));

    let shift_src = source.shift_matrix(0)?;
    let shift_tgt = space.shift_matrix(0)?;
    let comm = &m * &shift_src - &shift_tgt * &m;
    let intertwining_full = linalg::op_norm(&comm);
    let intertwining_interior = linalg::op_norm(&(&comm * &pi_src_shift));

    let threshold = 100.0 * tol.tol_residual;
    let pass = pim_interior <= threshold
        && range_interior <= threshold
        && intertwining_interior <= threshold;
    Ok(PartialIsometryReport {
        partial_isometry_interior: pim_interior,
        range_projection_interior: range_interior,
        intertwining_interior,
        partial_isometry_full: pim_full,
        range_projection_full: range_full,
        intertwining_full,
        pass,
    })
}

/// Lift of a one-axis multiplier to the product box: identity on the
/// other axes. The source is the hat-weight space (Hardy on the lifted
/// axis) over the multiplier's source coefficients; the target is the
/// given product space.
pub fn theta_lift(
    theta: &MultiplierPoly,
    product: &TruncatedSpace,
    axis: usize,
) -> Result<CMatrix, BlhError> {
    if axis >= product.axes() {
        return Err(BlhError::ShapeMismatch(format!(
            "axis {axis} out of range for {} axes",
            product.axes()
        )));
    }
    if product.weights().entries()[axis] != theta.target_space.weights().entries()[0] {
        return Err(BlhError::ShapeMismatch(
            "axis weight differs from the multiplier target weight".into(),
        ));
    }
    if product.coeff_dim() != theta.target_space.coeff_dim() {
        return Err(BlhError::ShapeMismatch(
            "product coefficient dimension differs from the multiplier target".into(),
        ));
    }
    if product.degree_cap() != theta.target_space.degree_cap() {
        return Err(BlhError::ShapeMismatch(
            "degree caps differ between product space and multiplier".into(),
        ));
    }
    let q = theta.source_coeff_dim;
    let r = product.coeff_dim();
    let n_degree = product.degree_cap();
    let source = TruncatedSpace::new(
        crate::bergman::hat_weight(product.weights(), axis)?,
        n_degree,
        q.max(1),
    );
    let m_axis = theta.multiplication_matrix();
    let mut out = CMatrix::zeros(product.total_dim(), source.total_dim());
    if q == 0 {
        return Ok(out);
    }
    for l in source.degrees() {
        for f in 0..q {
            let col = source.index_of(&l, f);
            for k_axis in 0..=n_degree {
                let mut k = l.clone();
                k[axis] = k_axis;
                for e in 0..r {
                    let val = m_axis[(k_axis * r + e, l[axis] * q + f)];
                    if val != Complex64::new(0.0, 0.0) {
                        out[(product.index_of(&k, e), col)] = val;
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hereditary::WeightMultiIndex;
    use crate::linalg::{op_norm, CVector};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_axis(m: u32, cap: usize, d: usize) -> TruncatedSpace {
        TruncatedSpace::new(WeightMultiIndex::single(m), cap, d)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn full_frame(space: &TruncatedSpace) -> SubspaceFrame {
        SubspaceFrame::new(CMatrix::identity(space.total_dim(), space.total_dim()), &tol())
            .unwrap()
    }

    /// Frame spanning z^start..z^N в a scalar one-axis space.
    fn tail_degrees_frame(space: &TruncatedSpace, start: usize) -> SubspaceFrame {
        let total = space.total_dim();
        let mut f = CMatrix::zeros(total, total - start);
        for (col, k) in (start..total).enumerate() {
            f[(k, col)] = c(1.0, 0.0);
        }
        SubspaceFrame::new(f, &tol()).unwrap()
    }

    #[test]
    fn full_hardy_space_gives_unimodular_constant() {
        let space = one_axis(1, 8, 1);
        let s = full_frame(&space);
        let out = blh_multiplier(&s, &space, &tol()).unwrap();
        assert_eq!(out.theta.source_coeff_dim, 1);
        assert_eq!(out.theta.degree(), 0);
        assert!((out.theta.coeffs[0][(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(out.range_residual < 1e-12);
        assert!(out.partial_isometry_residual < 1e-12);
        // M is unitary on the truncated space.
        let m = out.theta.multiplication_matrix();
        assert!(op_norm(&(m.adjoint() * &m - CMatrix::identity(9, 9))) < 1e-12);
    }

    #[test]
    fn shifted_hardy_space_gives_unimodular_z() {
        // Wandering subspace oracle for the unilateral shift: S = z H^2
        // is represented by Theta(z) = c z with |c| = 1.
        let space = one_axis(1, 10, 1);
        let s = tail_degrees_frame(&space, 1);
        let out = blh_multiplier(&s, &space, &tol()).unwrap();
        assert_eq!(out.theta.source_coeff_dim, 1);
        assert_eq!(out.theta.degree(), 1);
        assert!(out.theta.coeffs[0].norm() < 1e-12);
        assert!((out.theta.coeffs[1][(0, 0)].norm() - 1.0).abs() < 1e-10);
        assert!(out.range_residual < 1e-10);
        let report = verify_partial_isometry(&out.theta, &tol()).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.partial_isometry_interior < 1e-12);
        // Top-degree slack: the full residual sees the truncated column.
        assert!(report.intertwining_interior < 1e-12);
    }

    #[test]
    fn shifted_bergman_space_factorizes() {
        // S = closure of z A^2_2 inside the truncated A^2_2.
        let space = one_axis(2, 12, 1);
        let s = tail_degrees_frame(&space, 1);
        let out = blh_multiplier(&s, &space, &tol()).unwrap();
        assert!(out.range_residual < 1e-8, "range {}", out.range_residual);
        assert!(
            out.partial_isometry_residual < 1e-8,
            "pim {}",
            out.partial_isometry_residual
        );
        assert!(out.interior_rebuild_residual < 1e-10);
        let report = verify_partial_isometry(&out.theta, &tol()).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn rejects_non_invariant_subspace() {
        // span{1} is co-invariant but not invariant for the shift.
        let space = one_axis(1, 6, 1);
        let mut f = CMatrix::zeros(7, 1);
        f[(0, 0)] = c(1.0, 0.0);
        let s = SubspaceFrame::new(f, &tol()).unwrap();
        assert!(matches!(
            blh_multiplier(&s, &space, &tol()),
            Err(BlhError::NotInvariant { .. })
        ));
    }

    #[test]
    fn vector_valued_invariant_subspace() {
        // S = z H^2(C^2) + span{z^0 (x) e_0}: invariant, mixed ranks.
        let space = one_axis(1, 9, 2);
        let total = space.total_dim();
        let mut f = CMatrix::zeros(total, total - 1);
        // First column: the constant section e_0.
        f[(0, 0)] = c(1.0, 0.0);
        // Rest: all degree >= 1 basis vectors.
        for (col, idx) in (2..total).enumerate() {
            f[(idx, col + 1)] = c(1.0, 0.0);
        }
        let s = SubspaceFrame::new(f, &tol()).unwrap();
        let out = blh_multiplier(&s, &space, &tol()).unwrap();
        assert!(out.range_residual < 1e-10);
        let report = verify_partial_isometry(&out.theta, &tol()).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn lift_of_constant_unitary_is_unitary() {
        let product = TruncatedSpace::new(WeightMultiIndex::new(vec![1, 1]).unwrap(), 4, 1);
        let one = one_axis(1, 4, 1);
        let theta = MultiplierPoly::new(
            one,
            1,
            vec![CMatrix::from_element(1, 1, c(0.6, 0.8))],
        )
        .unwrap();
        for axis in 0..2 {
            let lifted = theta_lift(&theta, &product, axis).unwrap();
            let gram = lifted.adjoint() * &lifted;
            assert!(op_norm(&(gram - CMatrix::identity(25, 25))) < 1e-12);
        }
    }

    #[test]
    fn lift_of_z_maps_degrees_up() {
        let product = TruncatedSpace::new(WeightMultiIndex::new(vec![1, 1]).unwrap(), 3, 1);
        let one = one_axis(1, 3, 1);
        let theta = MultiplierPoly::new(
            one,
            1,
            vec![CMatrix::zeros(1, 1), CMatrix::identity(1, 1)],
        )
        .unwrap();
        let lifted = theta_lift(&theta, &product, 1).unwrap();
        let source = TruncatedSpace::new(WeightMultiIndex::new(vec![1, 1]).unwrap(), 3, 1);
        for k in source.degrees() {
            let col = source.index_of(&k, 0);
            for kt in product.degrees() {
                let row = product.index_of(&kt, 0);
                let expected = if kt[0] == k[0] && kt[1] == k[1] + 1 {
                    1.0
                } else {
                    0.0
                };
                assert!((lifted[(row, col)].re - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lift_preserves_partial_isometry_residuals() {
        // Kronecker-norm identity: the lifted residual equals the
        // one-variable residual.
        let space = one_axis(2, 8, 1);
        let s = tail_degrees_frame(&space, 2);
        let out = blh_multiplier(&s, &space, &tol()).unwrap();
        let product = TruncatedSpace::new(WeightMultiIndex::new(vec![1, 2]).unwrap(), 8, 1);
        let lifted = theta_lift(&out.theta, &product, 1).unwrap();
        let one_var = out.theta.multiplication_matrix();
        let lifted_resid = {
            let mm = &lifted * lifted.adjoint();
            op_norm(&(&mm * &lifted - &lifted))
        };
        let one_resid = {
            let mm = &one_var * one_var.adjoint();
            op_norm(&(&mm * &one_var - &one_var))
        };
        assert!((lifted_resid - one_resid).abs() < 1e-12);
    }

    #[test]
    fn lifted_range_projections_commute_across_axes() {
        let space1 = one_axis(1, 6, 1);
        let space2 = one_axis(2, 6, 1);
        let out1 = blh_multiplier(&tail_degrees_frame(&space1, 1), &space1, &tol()).unwrap();
        let out2 = blh_multiplier(&tail_degrees_frame(&space2, 2), &space2, &tol()).unwrap();
        let product = TruncatedSpace::new(WeightMultiIndex::new(vec![1, 2]).unwrap(), 6, 1);
        let l1 = theta_lift(&out1.theta, &product, 0).unwrap();
        let l2 = theta_lift(&out2.theta, &product, 1).unwrap();
        let p1 = &l1 * l1.adjoint();
        let p2 = &l2 * l2.adjoint();
        assert!(op_norm(&(&p1 * &p2 - &p2 * &p1)) < 1e-10);
    }

    #[test]
    fn random_invariant_subspaces_regression() {
        // Invariant subspaces arising as complements of adjoint-shift
        // Krylov spaces are exactly invariant on the truncated box.
        let space = one_axis(3, 10, 2);
        let total = space.total_dim();
        let mut state = 12345u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        for _trial in 0..5 {
            let g = CVector::from_fn(total, |_, _| c(next(), next()));
            // Krylov closure under the adjoint shift.
            let mut basis: Vec<CVector> = Vec::new();
            let mut queue = vec![g];
            while let Some(mut v) = queue.pop() {
                for b in &basis {
                    let inner = b.dotc(&v);
                    v -= b * inner;
                }
                if v.norm() > 1e-9 {
                    let v = &v / c(v.norm(), 0.0);
                    basis.push(v.clone());
                    queue.push(space.apply_shift_adjoint(0, &v).unwrap());
                }
            }
            let mut q = CMatrix::zeros(total, basis.len());
            for (i, b) in basis.iter().enumerate() {
                q.set_column(i, b);
            }
            let s = linalg::orthonormal_complement(&q, &tol());
            if s.dim() == 0 {
                continue;
            }
            let out = blh_multiplier(&s, &space, &tol()).unwrap();
            assert!(out.range_residual < 1e-8, "range {}", out.range_residual);
            assert!(out.partial_isometry_residual < 1e-8);
            let report = verify_partial_isometry(&out.theta, &tol()).unwrap();
            assert!(report.pass, "{report:?}");
        }
    }
}

//! Truncated vector-valued weighted Bergman spaces over the polydisc.
//!
//! A space is determined by a weight multi-index, a per-axis degree cap,
//! and a coefficient dimension. The orthonormal basis vector for the
//! multi-degree `k` and coefficient slot `e` represents
//! `(prod_i binom(m_i + k_i - 1, k_i))^(1/2) z^k (x) e`, and indices are
//! enumerated lexicographically in `(k_1, ..., k_n, e)`. The degree cap is
//! a full box so the tensor factorization across axes is preserved
//! exactly at finite level.

use crate::hereditary::WeightMultiIndex;
use crate::linalg::{CMatrix, CVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BergmanError {
    #[error("axis {axis} out of range for {n} variables")]
    AxisOutOfRange { axis: usize, n: usize },
    #[error("evaluation point lies outside the open polydisc: |w_{axis}| = {modulus}")]
    PointOutsideDisc { axis: usize, modulus: f64 },
    #[error("coefficient vector has length {got}, expected {expected}")]
    CoefficientMismatch { got: usize, expected: usize },
}

/// `binom(m + k - 1, k)`: the diagonal power-series coefficient of
/// `(1 - x)^(-m)`, computed by a running product to avoid factorial
/// overflow.
pub fn weight_coefficient(m: u32, k: usize) -> f64 {
    let mut c = 1.0f64;
    for j in 1..=k {
        c *= (m as f64 + j as f64 - 1.0) / j as f64;
    }
    c
}

/// Norm of the monomial `z^k` in the weight-`m` Bergman space:
/// `binom(m + k - 1, k)^(-1/2)`.
pub fn monomial_norm(m: u32, k: usize) -> f64 {
    1.0 / weight_coefficient(m, k).sqrt()
}

/// Truncated weighted Bergman space `A^2_m (x) C^d` with per-axis degree
/// cap `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSpace {
    weights: WeightMultiIndex,
    degree_cap: usize,
    coeff_dim: usize,
}

impl TruncatedSpace {
    pub fn new(weights: WeightMultiIndex, degree_cap: usize, coeff_dim: usize) -> Self {
        assert!(coeff_dim >= 1, "coefficient dimension must be positive");
        Self {
            weights,
            degree_cap,
            coeff_dim,
        }
    }

    pub fn weights(&self) -> &WeightMultiIndex {
        &self.weights
    }

    /// Number of variables.
    pub fn axes(&self) -> usize {
        self.weights.len()
    }

    /// Per-axis maximal degree.
    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    /// Number of degrees per axis (`N + 1`).
    pub fn degrees_per_axis(&self) -> usize {
        self.degree_cap + 1
    }

    /// Total dimension `(N + 1)^n * d`.
    pub fn total_dim(&self) -> usize {
        self.degrees_per_axis().pow(self.axes() as u32) * self.coeff_dim
    }

    /// Flat index of the basis vector for multi-degree `k` and coefficient
    /// slot `e` (lexicographic in `(k_1, ..., k_n, e)`).
    pub fn index_of(&self, k: &[usize], e: usize) -> usize {
        debug_assert_eq!(k.len(), self.axes());
        debug_assert!(e < self.coeff_dim);
        let per = self.degrees_per_axis();
        let mut idx = 0;
        for &ki in k {
            debug_assert!(ki <= self.degree_cap);
            idx = idx * per + ki;
        }
        idx * self.coeff_dim + e
    }

    /// Inverse of [`index_of`](Self::index_of).
    pub fn decode(&self, mut idx: usize) -> (Vec<usize>, usize) {
        let e = idx % self.coeff_dim;
        idx /= self.coeff_dim;
        let per = self.degrees_per_axis();
        let n = self.axes();
        let mut k = vec![0usize; n];
        for i in (0..n).rev() {
            k[i] = idx % per;
            idx /= per;
        }
        (k, e)
    }

    /// Iterates over all multi-degrees in the box, lexicographically.
    pub fn degrees(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let per = self.degrees_per_axis();
        let n = self.axes();
        let count = per.pow(n as u32);
        (0..count).map(move |mut flat| {
            let mut k = vec![0usize; n];
            for i in (0..n).rev() {
                k[i] = flat % per;
                flat /= per;
            }
            k
        })
    }

    /// `prod_i binom(m_i + k_i - 1, k_i)` for a multi-degree.
    pub fn box_weight(&self, k: &[usize]) -> f64 {
        self.weights
            .entries()
            .iter()
            .zip(k)
            .map(|(&m, &ki)| weight_coefficient(m, ki))
            .product()
    }

    fn check_axis(&self, axis: usize) -> Result<(), BergmanError> {
        if axis >= self.axes() {
            Err(BergmanError::AxisOutOfRange {
                axis,
                n: self.axes(),
            })
        } else {
            Ok(())
        }
    }

    /// Matrix of multiplication by `z_axis` in the orthonormal basis.
    ///
    /// Maps basis `(k, e)` to `sqrt((k_j + 1)/(m_j + k_j))` times basis
    /// `(k + delta_j, e)`; top-degree basis vectors map to zero so the
    /// matrix stays square. Operator norm is at most one.
    pub fn shift_matrix(&self, axis: usize) -> Result<CMatrix, BergmanError> {
        self.check_axis(axis)?;
        let total = self.total_dim();
        let m = self.weights.entries()[axis] as f64;
        let mut out = CMatrix::zeros(total, total);
        for k in self.degrees() {
            if k[axis] == self.degree_cap {
                continue;
            }
            let w = ((k[axis] as f64 + 1.0) / (m + k[axis] as f64)).sqrt();
            let mut up = k.clone();
            up[axis] += 1;
            for e in 0..self.coeff_dim {
                out[(self.index_of(&up, e), self.index_of(&k, e))] = Complex64::new(w, 0.0);
            }
        }
        Ok(out)
    }

    /// Applies the shift along `axis` to raw coordinates without forming
    /// the matrix.
    pub fn apply_shift(&self, axis: usize, v: &CVector) -> Result<CVector, BergmanError> {
        self.check_axis(axis)?;
        debug_assert_eq!(v.len(), self.total_dim());
        let m = self.weights.entries()[axis] as f64;
        let mut out = CVector::zeros(v.len());
        for k in self.degrees() {
            if k[axis] == self.degree_cap {
                continue;
            }
            let w = ((k[axis] as f64 + 1.0) / (m + k[axis] as f64)).sqrt();
            let mut up = k.clone();
            up[axis] += 1;
            for e in 0..self.coeff_dim {
                out[self.index_of(&up, e)] = v[self.index_of(&k, e)] * w;
            }
        }
        Ok(out)
    }

    /// Applies the adjoint shift along `axis` to raw coordinates.
    pub fn apply_shift_adjoint(&self, axis: usize, v: &CVector) -> Result<CVector, BergmanError> {
        self.check_axis(axis)?;
        debug_assert_eq!(v.len(), self.total_dim());
        let m = self.weights.entries()[axis] as f64;
        let mut out = CVector::zeros(v.len());
        for k in self.degrees() {
            if k[axis] == self.degree_cap {
                continue;
            }
            let w = ((k[axis] as f64 + 1.0) / (m + k[axis] as f64)).sqrt();
            let mut up = k.clone();
            up[axis] += 1;
            for e in 0..self.coeff_dim {
                out[self.index_of(&k, e)] = v[self.index_of(&up, e)] * w;
            }
        }
        Ok(out)
    }

    /// Column-wise [`apply_shift_adjoint`](Self::apply_shift_adjoint).
    pub fn apply_shift_adjoint_mat(
        &self,
        axis: usize,
        m: &CMatrix,
    ) -> Result<CMatrix, BergmanError> {
        let mut out = CMatrix::zeros(m.nrows(), m.ncols());
        for c in 0..m.ncols() {
            let col: CVector = m.column(c).into();
            out.set_column(c, &self.apply_shift_adjoint(axis, &col)?);
        }
        Ok(out)
    }

    /// Column-wise [`apply_shift`](Self::apply_shift).
    pub fn apply_shift_mat(&self, axis: usize, m: &CMatrix) -> Result<CMatrix, BergmanError> {
        let mut out = CMatrix::zeros(m.nrows(), m.ncols());
        for c in 0..m.ncols() {
            let col: CVector = m.column(c).into();
            out.set_column(c, &self.apply_shift(axis, &col)?);
        }
        Ok(out)
    }

    /// Truncation of the kernel section `B_m(., w) eta` in the
    /// orthonormal basis: the `(k, e)` coordinate is
    /// `(prod_i binom(m_i + k_i - 1, k_i))^(1/2) prod_i conj(w_i)^(k_i) eta_e`.
    pub fn kernel_vector(
        &self,
        w: &[Complex64],
        eta: &CVector,
    ) -> Result<SpaceVector, BergmanError> {
        if eta.len() != self.coeff_dim {
            return Err(BergmanError::CoefficientMismatch {
                got: eta.len(),
                expected: self.coeff_dim,
            });
        }
        for (axis, wi) in w.iter().enumerate() {
            if wi.norm() >= 1.0 {
                return Err(BergmanError::PointOutsideDisc {
                    axis,
                    modulus: wi.norm(),
                });
            }
        }
        assert_eq!(w.len(), self.axes());
        let mut coeffs = CVector::zeros(self.total_dim());
        for k in self.degrees() {
            let mut factor = Complex64::new(self.box_weight(&k).sqrt(), 0.0);
            for (wi, &ki) in w.iter().zip(&k) {
                factor *= wi.conj().powu(ki as u32);
            }
            for e in 0..self.coeff_dim {
                coeffs[self.index_of(&k, e)] = factor * eta[e];
            }
        }
        Ok(SpaceVector {
            space: self.clone(),
            coeffs,
        })
    }

    /// Lifts a one-axis operator to the product space.
    ///
    /// `op` acts on the coordinates of the single-axis truncated space
    /// `A^2_{m_axis} (x) C^d` (degree-major, coefficient-minor layout, the
    /// same as a one-axis `TruncatedSpace`); the lift acts as the identity
    /// on every other axis. Both matrix dimensions of `op` must equal
    /// `(N + 1) * d`.
    pub fn lift_axis_op(&self, axis: usize, op: &CMatrix) -> Result<CMatrix, BergmanError> {
        self.check_axis(axis)?;
        let per = self.degrees_per_axis();
        let d = self.coeff_dim;
        let one = per * d;
        assert_eq!(op.nrows(), one, "one-axis operator has wrong row count");
        assert_eq!(op.ncols(), one, "one-axis operator has wrong column count");
        let total = self.total_dim();
        let mut out = CMatrix::zeros(total, total);
        for k in self.degrees() {
            for e in 0..d {
                let col = self.index_of(&k, e);
                let src = k[axis] * d + e;
                for kj in 0..per {
                    let mut kt = k.clone();
                    kt[axis] = kj;
                    for f in 0..d {
                        let z = op[(kj * d + f, src)];
                        if z != Complex64::new(0.0, 0.0) {
                            out[(self.index_of(&kt, f), col)] = z;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Lifts a tall one-axis map (such as a single-axis frame) to the
    /// product space: identity on the other axes, `map` on
    /// `(k_axis, e)` coordinates. `map` is `(N + 1) d x c` and the result
    /// is `total x (N + 1)^(n-1) c`, its column blocks lexicographic in
    /// (other-axis degrees, source column).
    pub fn lift_axis_map(&self, axis: usize, map: &CMatrix) -> Result<CMatrix, BergmanError> {
        self.check_axis(axis)?;
        let per = self.degrees_per_axis();
        let d = self.coeff_dim;
        assert_eq!(map.nrows(), per * d, "one-axis map has wrong row count");
        let cols_one = map.ncols();
        let n = self.axes();
        let rest: usize = per.pow((n - 1) as u32);
        let mut out = CMatrix::zeros(self.total_dim(), rest * cols_one);
        // Enumerate degrees of the other axes lexicographically.
        for other_flat in 0..rest {
            let mut rem = other_flat;
            let mut k_other = vec![0usize; n - 1];
            for i in (0..n - 1).rev() {
                k_other[i] = rem % per;
                rem /= per;
            }
            for c in 0..cols_one {
                let col_out = other_flat * cols_one + c;
                for kj in 0..per {
                    let mut k = Vec::with_capacity(n);
                    k.extend_from_slice(&k_other[..axis]);
                    k.push(kj);
                    k.extend_from_slice(&k_other[axis..]);
                    for f in 0..d {
                        let z = map[(kj * d + f, c)];
                        if z != Complex64::new(0.0, 0.0) {
                            out[(self.index_of(&k, f), col_out)] = z;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Element of a truncated space, stored as coordinates in the
/// orthonormal basis.
#[derive(Debug, Clone)]
pub struct SpaceVector {
    space: TruncatedSpace,
    coeffs: CVector,
}

impl SpaceVector {
    pub fn new(space: TruncatedSpace, coeffs: CVector) -> Self {
        assert_eq!(coeffs.len(), space.total_dim());
        Self { space, coeffs }
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    pub fn coeffs(&self) -> &CVector {
        &self.coeffs
    }

    /// Pointwise value of the represented function at `z` in the
    /// polydisc, as a coefficient-space vector.
    pub fn evaluate(&self, z: &[Complex64]) -> CVector {
        assert_eq!(z.len(), self.space.axes());
        let mut value = CVector::zeros(self.space.coeff_dim());
        for k in self.space.degrees() {
            let mut monomial = Complex64::new(self.space.box_weight(&k).sqrt(), 0.0);
            for (zi, &ki) in z.iter().zip(&k) {
                monomial *= zi.powu(ki as u32);
            }
            for e in 0..self.space.coeff_dim() {
                value[e] += self.coeffs[self.space.index_of(&k, e)] * monomial;
            }
        }
        value
    }

    pub fn inner(&self, other: &SpaceVector) -> Complex64 {
        other.coeffs.dotc(&self.coeffs)
    }
}

/// Copy of `m` with the `axis`-th entry replaced by the Hardy weight 1.
pub fn hat_weight(m: &WeightMultiIndex, axis: usize) -> Result<WeightMultiIndex, BergmanError> {
    if axis >= m.len() {
        return Err(BergmanError::AxisOutOfRange { axis, n: m.len() });
    }
    let mut entries = m.entries().to_vec();
    entries[axis] = 1;
    Ok(WeightMultiIndex::new(entries).expect("entries stay positive"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::op_norm;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Series oracle: coefficients of (1 - x)^(-m) by m-fold convolution
    /// of the geometric series, independent of the binomial formula.
    fn series_coefficient(m: u32, k: usize) -> f64 {
        let mut coeffs = vec![1.0f64; k + 1];
        for _ in 1..m {
            let mut next = vec![0.0f64; k + 1];
            for i in 0..=k {
                for j in 0..=i {
                    next[i] += coeffs[j];
                }
            }
            coeffs = next;
        }
        coeffs[k]
    }

    #[test]
    fn monomial_norm_examples() {
        // Hardy space: all monomials are unit vectors.
        for k in 0..10 {
            assert!((monomial_norm(1, k) - 1.0).abs() < 1e-15);
        }
        assert!((monomial_norm(2, 1) - 1.0 / series_coefficient(2, 1).sqrt()).abs() < 1e-12);
        assert!((monomial_norm(2, 1) - 0.7071067811865476).abs() < 1e-12);
        assert!((monomial_norm(3, 2) - 1.0 / series_coefficient(3, 2).sqrt()).abs() < 1e-12);
        assert!((monomial_norm(3, 2) - 1.0 / 6.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn monomial_norm_monotone() {
        for m in 2..5u32 {
            for k in 0..20 {
                assert!(monomial_norm(m, k + 1) < monomial_norm(m, k));
            }
        }
    }

    fn space(ms: &[u32], cap: usize, d: usize) -> TruncatedSpace {
        TruncatedSpace::new(WeightMultiIndex::new(ms.to_vec()).unwrap(), cap, d)
    }

    #[test]
    fn index_roundtrip() {
        let sp = space(&[2, 3], 4, 3);
        assert_eq!(sp.total_dim(), 25 * 3);
        for idx in 0..sp.total_dim() {
            let (k, e) = sp.decode(idx);
            assert_eq!(sp.index_of(&k, e), idx);
        }
    }

    #[test]
    fn kernel_vector_at_origin_is_constant_section() {
        let sp = space(&[2, 2], 3, 2);
        let eta = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, -2.0)]);
        let kv = sp.kernel_vector(&[c(0.0, 0.0), c(0.0, 0.0)], &eta).unwrap();
        for idx in 0..sp.total_dim() {
            let (k, e) = sp.decode(idx);
            let expected = if k.iter().all(|&ki| ki == 0) {
                eta[e]
            } else {
                c(0.0, 0.0)
            };
            assert!((kv.coeffs()[idx] - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn kernel_vector_hardy_geometric() {
        let sp = space(&[1], 3, 1);
        let kv = sp
            .kernel_vector(&[c(0.5, 0.0)], &CVector::from_vec(vec![c(1.0, 0.0)]))
            .unwrap();
        let expected = [1.0, 0.5, 0.25, 0.125];
        for (k, &x) in expected.iter().enumerate() {
            assert!((kv.coeffs()[k] - c(x, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn kernel_vector_reproduces_truncated_functions() {
        // Direct evaluation oracle; exact for functions inside the box.
        let sp = space(&[2, 3], 5, 2);
        let mut state = 99u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        let f = SpaceVector::new(
            sp.clone(),
            CVector::from_fn(sp.total_dim(), |_, _| c(next(), next())),
        );
        let w = [c(0.31, -0.2), c(-0.45, 0.17)];
        let eta = CVector::from_vec(vec![c(0.7, 0.1), c(-0.3, 0.6)]);
        let kv = sp.kernel_vector(&w, &eta).unwrap();
        let lhs = f.inner(&kv);
        let rhs = {
            let fw = f.evaluate(&w);
            eta.dotc(&fw)
        };
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn kernel_rejects_boundary_points() {
        let sp = space(&[1], 3, 1);
        assert!(matches!(
            sp.kernel_vector(&[c(1.0, 0.0)], &CVector::from_vec(vec![c(1.0, 0.0)])),
            Err(BergmanError::PointOutsideDisc { .. })
        ));
    }

    #[test]
    fn hardy_shift_is_truncated_unilateral() {
        let sp = space(&[1], 3, 1);
        let s = sp.shift_matrix(0).unwrap();
        for k in 0..3 {
            assert!((s[(k + 1, k)] - c(1.0, 0.0)).norm() < 1e-15);
        }
        // Top-degree column vanishes.
        assert!(s.column(3).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn bergman_shift_weights_match_norm_ratios() {
        let sp = space(&[2], 4, 1);
        let s = sp.shift_matrix(0).unwrap();
        for k in 0..4usize {
            // Ratio-of-norms oracle: the weight is ||z^(k+1)|| / ||z^k||.
            let expected = monomial_norm(2, k + 1) / monomial_norm(2, k);
            assert!((s[(k + 1, k)].re - expected).abs() < 1e-13);
        }
        assert!((s[(1, 0)].re - 0.5f64.sqrt()).abs() < 1e-13);
        assert!((s[(2, 1)].re - (2.0f64 / 3.0).sqrt()).abs() < 1e-13);
        assert!((s[(3, 2)].re - 0.75f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn shift_norm_at_most_one() {
        for ms in [[1u32, 1], [2, 3], [3, 1]] {
            let sp = space(&ms, 5, 2);
            for axis in 0..2 {
                let s = sp.shift_matrix(axis).unwrap();
                assert!(op_norm(&s) <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn product_shifts_doubly_commute_across_axes() {
        let sp = space(&[2, 3], 4, 1);
        let s1 = sp.shift_matrix(0).unwrap();
        let s2 = sp.shift_matrix(1).unwrap();
        assert!(op_norm(&(&s1 * &s2 - &s2 * &s1)) < 1e-14);
        assert!(op_norm(&(&s1 * s2.adjoint() - s2.adjoint() * &s1)) < 1e-14);
    }

    #[test]
    fn structured_shift_matches_matrix() {
        let sp = space(&[2, 3], 3, 2);
        let mut state = 7u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        let v = CVector::from_fn(sp.total_dim(), |_, _| c(next(), next()));
        for axis in 0..2 {
            let s = sp.shift_matrix(axis).unwrap();
            assert!((&s * &v - sp.apply_shift(axis, &v).unwrap()).norm() < 1e-13);
            assert!((s.adjoint() * &v - sp.apply_shift_adjoint(axis, &v).unwrap()).norm() < 1e-13);
        }
    }

    #[test]
    fn gram_identity_for_kernel_vectors() {
        // <K_w eta, K_v xi> = B_m(v, w) <eta, xi> up to the computable
        // truncation tail.
        let sp = space(&[2, 1], 14, 1);
        let w = [c(0.4, 0.1), c(-0.3, 0.2)];
        let v = [c(0.2, -0.5), c(0.1, 0.3)];
        let eta = CVector::from_vec(vec![c(1.0, 0.0)]);
        let kw = sp.kernel_vector(&w, &eta).unwrap();
        let kv = sp.kernel_vector(&v, &eta).unwrap();
        let got = kw.inner(&kv); // <K_w, K_v>
        let mut expected = c(1.0, 0.0);
        for i in 0..2 {
            let base = c(1.0, 0.0) - v[i] * w[i].conj();
            expected *= base.powf(-(sp.weights().entries()[i] as f64));
        }
        // Tail bound: sum over degrees outside the box of
        // prod binom |v_i conj(w_i)|^(k_i).
        let mut tail = 0.0;
        for k1 in 0..60usize {
            for k2 in 0..60usize {
                if k1 <= sp.degree_cap() && k2 <= sp.degree_cap() {
                    continue;
                }
                tail += weight_coefficient(2, k1)
                    * weight_coefficient(1, k2)
                    * (v[0] * w[0].conj()).norm().powi(k1 as i32)
                    * (v[1] * w[1].conj()).norm().powi(k2 as i32);
            }
        }
        assert!(
            (got - expected).norm() <= tail + 1e-13,
            "deviation {} vs tail {}",
            (got - expected).norm(),
            tail
        );
    }

    #[test]
    fn hat_weight_examples() {
        let m = WeightMultiIndex::new(vec![2, 3]).unwrap();
        assert_eq!(hat_weight(&m, 0).unwrap().entries(), &[1, 3]);
        assert_eq!(hat_weight(&m, 1).unwrap().entries(), &[2, 1]);
        let ones = WeightMultiIndex::new(vec![1, 1, 1]).unwrap();
        for axis in 0..3 {
            assert_eq!(hat_weight(&ones, axis).unwrap().entries(), &[1, 1, 1]);
        }
        assert!(hat_weight(&m, 2).is_err());
    }

    #[test]
    fn lift_axis_op_places_blocks() {
        let sp = space(&[1, 2], 2, 1);
        let one = 3usize; // (N+1) * d for the one-axis space
        let mut op = CMatrix::zeros(one, one);
        for i in 0..one {
            for j in 0..one {
                op[(i, j)] = c((i * one + j) as f64, 1.0);
            }
        }
        for axis in 0..2 {
            let lifted = sp.lift_axis_op(axis, &op).unwrap();
            for k in sp.degrees() {
                for kt in sp.degrees() {
                    let same_elsewhere =
                        (0..2).filter(|&i| i != axis).all(|i| k[i] == kt[i]);
                    let entry = lifted[(sp.index_of(&kt, 0), sp.index_of(&k, 0))];
                    if same_elsewhere {
                        assert_eq!(entry, op[(kt[axis], k[axis])]);
                    } else {
                        assert_eq!(entry, c(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn lift_axis_map_is_isometric_for_frames() {
        let sp = space(&[2, 2], 2, 2);
        // A one-axis frame: orthonormal columns in C^((N+1) d).
        let one = sp.degrees_per_axis() * sp.coeff_dim();
        let mut frame = CMatrix::zeros(one, 2);
        frame[(0, 0)] = c(1.0, 0.0);
        frame[(3, 1)] = c(0.6, 0.0);
        frame[(4, 1)] = c(0.0, 0.8);
        for axis in 0..2 {
            let lifted = sp.lift_axis_map(axis, &frame).unwrap();
            let gram = lifted.adjoint() * &lifted;
            assert!(op_norm(&(gram - CMatrix::identity(6, 6))) < 1e-12);
        }
    }
}

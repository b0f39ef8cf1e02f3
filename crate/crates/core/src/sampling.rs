//! Seeded random generators for tuples, subspaces, and regression suites.

use crate::bergman::TruncatedSpace;
use crate::hereditary::{OperatorTuple, WeightMultiIndex};
use crate::linalg::{self, CMatrix, CVector, SubspaceFrame, Tolerances};
use num_complex::Complex64;
use rand::Rng;

/// Complex Gaussian matrix.
pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    })
}

/// Random matrix rescaled to the requested operator norm.
pub fn random_with_norm(rng: &mut impl Rng, dim: usize, norm: f64) -> CMatrix {
    let m = random_matrix(rng, dim, dim);
    let current = linalg::op_norm(&m);
    if current == 0.0 {
        return m;
    }
    m.map(|z| z * (norm / current))
}

/// Random strictly upper triangular (nilpotent) matrix rescaled to the
/// requested norm; `dim = 1` yields the zero матрица.
pub fn random_nilpotent(rng: &mut impl Rng, dim: usize, norm: f64) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i + 1..dim {
            m[(i, j)] = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
    }
    let current = linalg::op_norm(&m);
    if current == 0.0 {
        return m;
    }
    m.map(|z| z * (norm / current))
}

/// Configuration of the tensor-form pair generator.
#[derive(Debug, Clone)]
pub struct TensorPairConfig {
    /// Inclusive factor dimension range.
    pub factor_dims: (usize, usize),
    /// Product of the two factor dimensions stays at or below this.
    pub max_product_dim: usize,
    /// Inclusive weight range per axis.
    pub weight_range: (u32, u32),
    /// Probability that a factor is strictly nilpotent.
    pub nilpotent_probability: f64,
    /// Norm range for non-nilpotent factors; the upper end must stay
    /// below `1/sqrt(max weight)` so positivity is automatic.
    pub dense_norm_range: (f64, f64),
}

impl Default for TensorPairConfig {
    fn default() -> Self {
        Self {
            factor_dims: (1, 4),
            max_product_dim: 8,
            weight_range: (1, 3),
            nilpotent_probability: 0.5,
            dense_norm_range: (0.05, 0.35),
        }
    }
}

impl TensorPairConfig {
    /// Every factor nilpotent: identities become exact at small degree.
    pub fn nilpotent_only() -> Self {
        Self {
            nilpotent_probability: 1.0,
            ..Self::default()
        }
    }
}

/// A doubly commuting pair in tensor form with its weights.
#[derive(Debug, Clone)]
pub struct TensorPair {
    pub tuple: OperatorTuple,
    pub weights: WeightMultiIndex,
    pub all_nilpotent: bool,
    /// Largest factor dimension, an upper bound for the nilpotency index.
    pub max_factor_dim: usize,
}

/// Draws a doubly commuting pair `(A (x) I, I (x) B)` with random
/// weights. Factor norms stay small enough that every draw is certified.
pub fn random_tensor_pair<R: Rng>(rng: &mut R, cfg: &TensorPairConfig) -> TensorPair {
    let (lo, hi) = cfg.factor_dims;
    let (d1, d2) = loop {
        let d1 = rng.gen_range(lo..=hi);
        let d2 = rng.gen_range(lo..=hi);
        if d1 * d2 <= cfg.max_product_dim {
            break (d1, d2);
        }
    };
    let mut all_nilpotent = true;
    let mut factor = |rng: &mut R, dim: usize| -> CMatrix {
        if rng.gen::<f64>() < cfg.nilpotent_probability {
            let norm = rng.gen_range(0.1..=cfg.dense_norm_range.1.max(0.2));
            random_nilpotent(rng, dim, norm)
        } else {
            all_nilpotent = false;
            let norm = rng.gen_range(cfg.dense_norm_range.0..=cfg.dense_norm_range.1);
            random_with_norm(rng, dim, norm)
        }
    };
    let a = factor(rng, d1);
    let b = factor(rng, d2);
    let t1 = linalg::kron(&a, &CMatrix::identity(d2, d2));
    let t2 = linalg::kron(&CMatrix::identity(d1, d1), &b);
    let m1 = rng.gen_range(cfg.weight_range.0..=cfg.weight_range.1);
    let m2 = rng.gen_range(cfg.weight_range.0..=cfg.weight_range.1);
    TensorPair {
        tuple: OperatorTuple::new(vec![t1, t2]).expect("square factors"),
        weights: WeightMultiIndex::new(vec![m1, m2]).expect("positive weights"),
        all_nilpotent,
        max_factor_dim: d1.max(d2),
    }
}

/// Krylov closure of the given vectors under every adjoint shift,
/// orthonormalized. The result is exactly jointly co-invariant on the
/// truncated box.
pub fn coinvariant_closure(
    space: &TruncatedSpace,
    seeds: Vec<CVector>,
    tol: &Tolerances,
) -> SubspaceFrame {
    let mut basis: Vec<CVector> = Vec::new();
    let mut queue = seeds;
    while let Some(mut v) = queue.pop() {
        for b in &basis {
            let inner = b.dotc(&v);
            v -= b * inner;
        }
        let norm = v.norm();
        if norm > 1e-9 {
            let v = v / Complex64::new(norm, 0.0);
            for axis in 0..space.axes() {
                queue.push(space.apply_shift_adjoint(axis, &v).expect("valid axis"));
            }
            basis.push(v);
        }
    }
    if basis.is_empty() {
        return SubspaceFrame::empty(space.total_dim());
    }
    let mut frame = CMatrix::zeros(space.total_dim(), basis.len());
    for (i, b) in basis.iter().enumerate() {
        frame.set_column(i, b);
    }
    SubspaceFrame::new(frame, tol).expect("Gram-Schmidt output is orthonormal")
}

/// Random vector supported on degrees at most `degree_cap` per axis.
pub fn random_low_degree_vector(
    rng: &mut impl Rng,
    space: &TruncatedSpace,
    degree_cap: usize,
) -> CVector {
    let mut v = CVector::zeros(space.total_dim());
    for k in space.degrees() {
        if k.iter().any(|&ki| ki > degree_cap) {
            continue;
        }
        for e in 0..space.coeff_dim() {
            v[space.index_of(&k, e)] =
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
    }
    v
}

/// Random jointly co-invariant subspace built from low-degree seeds.
///
/// Keeping seeds away from the top of the box by `buffer` degrees makes
/// the compressed tuple see no truncation boundary, so the quotient
/// behaves exactly like its infinite-space counterpart for polynomials of
/// degree up to `buffer` per axis.
pub fn random_coinvariant_frame(
    rng: &mut impl Rng,
    space: &TruncatedSpace,
    generators: usize,
    buffer: usize,
    tol: &Tolerances,
) -> SubspaceFrame {
    let cap = space.degree_cap().saturating_sub(buffer);
    let seeds = (0..generators.max(1))
        .map(|_| random_low_degree_vector(rng, space, cap))
        .collect();
    coinvariant_closure(space, seeds, tol)
}

/// Random shift-invariant subspace of a one-axis space: the complement
/// of an adjoint-shift Krylov closure. Exactly invariant on the box.
pub fn random_invariant_frame(
    rng: &mut impl Rng,
    space: &TruncatedSpace,
    generators: usize,
    tol: &Tolerances,
) -> SubspaceFrame {
    assert_eq!(space.axes(), 1, "one-axis spaces only");
    let seeds = (0..generators.max(1))
        .map(|_| {
            CVector::from_fn(space.total_dim(), |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            })
        })
        .collect();
    let q = coinvariant_closure(space, seeds, tol);
    linalg::orthonormal_complement(q.matrix(), tol)
}

/// Non-tensor co-invariant subspace `span{1, a z_1 + b z_2}` with both
/// mixing amplitudes bounded away from zero, a certified counterexample
/// to double commutation.
pub fn nontensor_quotient_frame<R: Rng>(
    rng: &mut R,
    space: &TruncatedSpace,
    tol: &Tolerances,
) -> SubspaceFrame {
    assert!(space.axes() == 2 && space.coeff_dim() == 1 && space.degree_cap() >= 2);
    let amp = |rng: &mut R| {
        let magnitude = rng.gen_range(0.5..=1.0);
        let angle = rng.gen::<f64>() * std::f64::consts::TAU;
        Complex64::from_polar(magnitude, angle)
    };
    let a = amp(rng);
    let b = amp(rng);
    let mut v = CVector::zeros(space.total_dim());
    // Coordinates in the orthonormal basis: monomial norms divide out.
    let m = space.weights().entries();
    v[space.index_of(&[1, 0], 0)] = a * crate::bergman::monomial_norm(m[0], 1);
    v[space.index_of(&[0, 1], 0)] = b * crate::bergman::monomial_norm(m[1], 1);
    let norm = v.norm();
    v /= Complex64::new(norm, 0.0);
    let mut frame = CMatrix::zeros(space.total_dim(), 2);
    frame[(space.index_of(&[0, 0], 0), 0)] = Complex64::new(1.0, 0.0);
    frame.set_column(1, &v);
    SubspaceFrame::new(frame, tol).expect("orthonormal by construction")
}

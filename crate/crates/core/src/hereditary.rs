//! Hereditary functional calculus and contractivity certificates.
//!
//! The calculus evaluates polynomials `p(z, conj(w))` at a commuting
//! tuple `(T, T*)`, placing every power of `T` to the left of every power
//! of `T*`. The inverse-kernel symbols of the weighted Bergman kernels
//! give the positivity conditions certified here: single-operator weights,
//! hypercontractions (all lower orders), joint products across axes, and
//! joint products with the doubly commuting hypothesis.

use crate::linalg::{self, CMatrix, LinalgError, SubspaceFrame, Tolerances};
use num_complex::Complex64;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// Margin used when deciding that a spectral radius is strictly below one.
pub const SPECTRAL_MARGIN: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum HereditaryError {
    #[error("polynomial has {poly} variables but the tuple has {tuple}")]
    ArityMismatch { poly: usize, tuple: usize },
    #[error("tuple is not commuting: residual {residual:.3e}")]
    NonCommutingTuple { residual: f64 },
    #[error("tuple is not doubly commuting: residual {residual:.3e}")]
    NotDoublyCommuting { residual: f64 },
    #[error("positivity fails: {0}")]
    NotPsd(String),
    #[error("weight multi-index entries must all be at least 1")]
    InvalidWeight,
    #[error("operator tuple is empty or has mismatched dimensions")]
    MalformedTuple,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Multi-index of Bergman weights, one integer `>= 1` per axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMultiIndex(Vec<u32>);

impl WeightMultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self, HereditaryError> {
        if entries.is_empty() || entries.iter().any(|&m| m < 1) {
            return Err(HereditaryError::InvalidWeight);
        }
        Ok(Self(entries))
    }

    pub fn single(m: u32) -> Self {
        Self::new(vec![m]).expect("positive weight")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }
}

/// Tuple of commuting square matrices with commutation metadata recorded
/// at construction.
#[derive(Debug, Clone)]
pub struct OperatorTuple {
    ops: Vec<CMatrix>,
    dim: usize,
    commutation_residual: f64,
    double_commutation_residual: f64,
}

impl OperatorTuple {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self, HereditaryError> {
        if ops.is_empty() {
            return Err(HereditaryError::MalformedTuple);
        }
        let dim = ops[0].nrows();
        for op in &ops {
            if op.nrows() != dim || op.ncols() != dim || dim == 0 || !linalg::all_finite(op) {
                return Err(HereditaryError::MalformedTuple);
            }
        }
        let mut commutation_residual = 0.0f64;
        let mut double_commutation_residual = 0.0f64;
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                let comm = &ops[i] * &ops[j] - &ops[j] * &ops[i];
                commutation_residual = commutation_residual.max(linalg::op_norm(&comm));
                let dc = &ops[i] * ops[j].adjoint() - ops[j].adjoint() * &ops[i];
                double_commutation_residual =
                    double_commutation_residual.max(linalg::op_norm(&dc));
            }
        }
        Ok(Self {
            ops,
            dim,
            commutation_residual,
            double_commutation_residual,
        })
    }

    pub fn single(op: CMatrix) -> Result<Self, HereditaryError> {
        Self::new(vec![op])
    }

    pub fn n(&self) -> usize {
        self.ops.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> &CMatrix {
        &self.ops[i]
    }

    /// `max_{i<j} ||T_i T_j - T_j T_i||`, zero for a single operator.
    pub fn commutation_residual(&self) -> f64 {
        self.commutation_residual
    }

    /// `max_{p<q} ||T_p T_q* - T_q* T_p||`, zero for a single operator.
    pub fn double_commutation_residual(&self) -> f64 {
        self.double_commutation_residual
    }

    pub fn is_commuting(&self, tol: &Tolerances) -> bool {
        self.commutation_residual <= tol.tol_residual
    }

    pub fn is_doubly_commuting(&self, tol: &Tolerances) -> bool {
        self.is_commuting(tol) && self.double_commutation_residual <= tol.tol_residual
    }

    pub fn spectral_radii(&self) -> Vec<f64> {
        self.ops.iter().map(linalg::spectral_radius).collect()
    }
}

/// Sparse hereditary polynomial: finitely many terms
/// `(p, q) -> a_{p q}` representing `sum a_{p q} z^p conj(w)^q`.
#[derive(Debug, Clone, PartialEq)]
pub struct HereditaryPolynomial {
    n: usize,
    terms: BTreeMap<(Vec<u32>, Vec<u32>), Complex64>,
}

impl HereditaryPolynomial {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// The constant polynomial 1 in `n` variables.
    pub fn one(n: usize) -> Self {
        let mut p = Self::new(n);
        p.add_term(vec![0; n], vec![0; n], Complex64::new(1.0, 0.0));
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<(Vec<u32>, Vec<u32>), Complex64> {
        &self.terms
    }

    /// Adds `a z^p conj(w)^q`. Coefficients on the same index pair
    /// accumulate; entries that cancel to zero are removed.
    pub fn add_term(&mut self, p: Vec<u32>, q: Vec<u32>, a: Complex64) {
        assert_eq!(p.len(), self.n, "multi-index arity");
        assert_eq!(q.len(), self.n, "multi-index arity");
        let key = (p, q);
        let entry = self.terms.entry(key.clone()).or_insert(Complex64::new(0.0, 0.0));
        *entry += a;
        if entry.norm() == 0.0 {
            self.terms.remove(&key);
        }
    }

    /// Whether `a_{p q} = conj(a_{q p})` for every stored term, which is
    /// what positivity tests require of the symbol.
    pub fn has_self_adjoint_symbol(&self) -> bool {
        self.terms.iter().all(|((p, q), &a)| {
            let mirrored = self
                .terms
                .get(&(q.clone(), p.clone()))
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0));
            (a - mirrored.conj()).norm() <= 1e-14 * (1.0 + a.norm())
        })
    }

    /// Sum of two polynomials over the same variables.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for ((p, q), &a) in &other.terms {
            out.add_term(p.clone(), q.clone(), a);
        }
        out
    }
}

/// Inverse-kernel symbol `prod_i sum_k (-1)^k binom(m_i, k) z_i^k conj(w_i)^k`.
///
/// The term count is `prod_i (m_i + 1)` and every term sits on a diagonal
/// index pair `(k, k)`.
pub fn bergman_inverse_poly(m: &WeightMultiIndex) -> HereditaryPolynomial {
    let n = m.len();
    let mut poly = HereditaryPolynomial::new(n);
    // Odometer over 0..=m_i per axis.
    let mut k = vec![0u32; n];
    loop {
        let mut coeff = 1.0f64;
        for (i, &ki) in k.iter().enumerate() {
            let mi = m.entries()[i];
            let mut binom = 1.0f64;
            for j in 1..=ki {
                binom *= (mi as f64 - j as f64 + 1.0) / j as f64;
            }
            coeff *= if ki % 2 == 0 { binom } else { -binom };
        }
        poly.add_term(k.clone(), k.clone(), Complex64::new(coeff, 0.0));
        let mut axis = n;
        loop {
            if axis == 0 {
                return poly;
            }
            axis -= 1;
            if k[axis] < m.entries()[axis] {
                k[axis] += 1;
                break;
            }
            k[axis] = 0;
        }
    }
}

/// Power cache for `T^p` along the multi-index lattice.
struct PowerCache<'a> {
    tuple: &'a OperatorTuple,
    powers: HashMap<Vec<u32>, CMatrix>,
}

impl<'a> PowerCache<'a> {
    fn new(tuple: &'a OperatorTuple) -> Self {
        let mut powers = HashMap::new();
        powers.insert(
            vec![0; tuple.n()],
            CMatrix::identity(tuple.dim(), tuple.dim()),
        );
        Self { tuple, powers }
    }

    fn get(&mut self, p: &[u32]) -> CMatrix {
        if let Some(m) = self.powers.get(p) {
            return m.clone();
        }
        let axis = p.iter().position(|&x| x > 0).expect("nonzero index");
        let mut lower = p.to_vec();
        lower[axis] -= 1;
        let prev = self.get(&lower);
        let next = self.tuple.op(axis) * prev;
        self.powers.insert(p.to_vec(), next.clone());
        next
    }
}

/// Evaluates the hereditary polynomial at `(T, T*)`:
/// `sum a_{p q} T^p (T^q)*`, powers memoized along a lattice walk. When
/// the symbol is self-adjoint the result is symmetrized before return.
pub fn hereditary_apply(
    p: &HereditaryPolynomial,
    t: &OperatorTuple,
    tol: &Tolerances,
) -> Result<CMatrix, HereditaryError> {
    if p.n() != t.n() {
        return Err(HereditaryError::ArityMismatch {
            poly: p.n(),
            tuple: t.n(),
        });
    }
    if !t.is_commuting(tol) {
        return Err(HereditaryError::NonCommutingTuple {
            residual: t.commutation_residual(),
        });
    }
    let mut cache = PowerCache::new(t);
    let mut out = CMatrix::zeros(t.dim(), t.dim());
    for ((pk, qk), &a) in p.terms() {
        let left = cache.get(pk);
        let right = cache.get(qk);
        out += (left * right.adjoint()).map(|z| z * a);
    }
    if p.has_self_adjoint_symbol() {
        out = linalg::symmetrize(&out);
    }
    Ok(out)
}

/// Defect operator, defect space frame, and spectrum floor of the
/// positivity matrix for a certified tuple.
#[derive(Debug, Clone)]
pub struct DefectData {
    pub defect_op: CMatrix,
    pub defect_frame: SubspaceFrame,
    pub rank: usize,
    pub min_eig_of_square: f64,
}

/// Defect data of `(T, m)`: the PSD square root of the inverse-kernel
/// positivity matrix together with an orthonormal basis of its numerical
/// range.
pub fn defect(
    t: &OperatorTuple,
    m: &WeightMultiIndex,
    tol: &Tolerances,
) -> Result<DefectData, HereditaryError> {
    if m.len() != t.n() {
        return Err(HereditaryError::ArityMismatch {
            poly: m.len(),
            tuple: t.n(),
        });
    }
    let square = hereditary_apply(&bergman_inverse_poly(m), t, tol)?;
    let report = linalg::psd_check(&square, tol)?;
    if !report.is_psd {
        return Err(HereditaryError::NotPsd(format!(
            "inverse-kernel positivity matrix has min eigenvalue {:.3e}",
            report.min_eig
        )));
    }
    let defect_op = linalg::psd_sqrt(&square, tol)?;
    let defect_frame = linalg::orthonormal_range(&defect_op, tol);
    let rank = defect_frame.dim();
    Ok(DefectData {
        defect_op,
        defect_frame,
        rank,
        min_eig_of_square: report.min_eig,
    })
}

/// Which contractivity notion a certificate tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertifyMode {
    /// Single-operator inverse-kernel positivity at the given weight.
    Bm,
    /// Positivity at every order `1 <= p <= m` (single operator).
    Hypercontraction,
    /// Per-axis positivity plus joint product positivity.
    JointBm,
    /// `JointBm` plus the doubly commuting hypothesis.
    DoublyCommutingJoint,
}

/// One named threshold test inside a certificate.
#[derive(Debug, Clone)]
pub struct Witness {
    pub label: String,
    /// Measured value: a minimum eigenvalue for positivity witnesses, a
    /// residual norm for commutation witnesses, a spectral radius for
    /// pureness witnesses.
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Outcome of a contractivity test: the verdict is the conjunction of all
/// witness thresholds.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub kind: CertifyMode,
    pub verdict: bool,
    pub witnesses: Vec<Witness>,
    pub spectral_radii: Vec<f64>,
}

fn eig_witness(label: String, min_eig: f64, tol: &Tolerances) -> Witness {
    Witness {
        label,
        value: min_eig,
        threshold: -tol.tol_psd,
        pass: min_eig >= -tol.tol_psd,
    }
}

fn radius_witness(label: String, rho: f64) -> Witness {
    Witness {
        label,
        value: rho,
        threshold: 1.0 - SPECTRAL_MARGIN,
        pass: rho < 1.0 - SPECTRAL_MARGIN,
    }
}

fn residual_witness(label: String, value: f64, tol: &Tolerances) -> Witness {
    Witness {
        label,
        value,
        threshold: tol.tol_residual,
        pass: value <= tol.tol_residual,
    }
}

fn min_eig_of(
    t: &OperatorTuple,
    m: &WeightMultiIndex,
    tol: &Tolerances,
) -> Result<f64, HereditaryError> {
    let h = hereditary_apply(&bergman_inverse_poly(m), t, tol)?;
    Ok(linalg::psd_check(&h, tol)?.min_eig)
}

/// Certifies a contractivity mode for a tuple.
///
/// Every mathematical failure is reported through a false verdict with
/// its witness; only structural problems (arity mismatch) are errors.
/// The pure-operator condition is tested as a spectral radius strictly
/// below one, the finite-dimensional criterion for powers of the adjoint
/// tending to zero. Non-commuting inputs fail the commutation witness
/// rather than being silently reordered.
pub fn certify(
    t: &OperatorTuple,
    m: &WeightMultiIndex,
    mode: CertifyMode,
    tol: &Tolerances,
) -> Result<Certificate, HereditaryError> {
    match mode {
        CertifyMode::Bm | CertifyMode::Hypercontraction => {
            if t.n() != 1 || m.len() != 1 {
                return Err(HereditaryError::ArityMismatch {
                    poly: m.len(),
                    tuple: t.n(),
                });
            }
        }
        CertifyMode::JointBm | CertifyMode::DoublyCommutingJoint => {
            if m.len() != t.n() {
                return Err(HereditaryError::ArityMismatch {
                    poly: m.len(),
                    tuple: t.n(),
                });
            }
        }
    }
    let spectral_radii = t.spectral_radii();
    let mut witnesses = Vec::new();
    for (i, &rho) in spectral_radii.iter().enumerate() {
        witnesses.push(radius_witness(format!("spectral-radius[{i}]"), rho));
    }
    if t.n() > 1 {
        witnesses.push(residual_witness(
            "commutation".into(),
            t.commutation_residual(),
            tol,
        ));
    }
    let commuting = t.is_commuting(tol);
    match mode {
        CertifyMode::Bm => {
            if commuting {
                witnesses.push(eig_witness(
                    format!("positivity[m={}]", m.entries()[0]),
                    min_eig_of(t, m, tol)?,
                    tol,
                ));
            }
        }
        CertifyMode::Hypercontraction => {
            // Each order is tested explicitly even though the top order
            // implies the rest for pure operators; the lower orders act
            // as a cross-check.
            if commuting {
                for p in 1..=m.entries()[0] {
                    witnesses.push(eig_witness(
                        format!("positivity[p={p}]"),
                        min_eig_of(t, &WeightMultiIndex::single(p), tol)?,
                        tol,
                    ));
                }
            }
        }
        CertifyMode::JointBm | CertifyMode::DoublyCommutingJoint => {
            if mode == CertifyMode::DoublyCommutingJoint {
                witnesses.push(residual_witness(
                    "double-commutation".into(),
                    t.double_commutation_residual(),
                    tol,
                ));
            }
            if commuting {
                for (i, &mi) in m.entries().iter().enumerate() {
                    let single = OperatorTuple::single(t.op(i).clone())?;
                    witnesses.push(eig_witness(
                        format!("positivity[axis={i}, m={mi}]"),
                        min_eig_of(&single, &WeightMultiIndex::single(mi), tol)?,
                        tol,
                    ));
                }
                witnesses.push(eig_witness(
                    "positivity[joint]".into(),
                    min_eig_of(t, m, tol)?,
                    tol,
                ));
            }
        }
    }
    let verdict = witnesses.iter().all(|w| w.pass);
    Ok(Certificate {
        kind: mode,
        verdict,
        witnesses,
        spectral_radii,
    })
}

/// Residual report for the commutation relations between per-axis defect
/// operators of a doubly commuting tuple.
#[derive(Debug, Clone)]
pub struct DefectCommutationReport {
    /// `||T_i D_j - D_j T_i||` for `i != j`.
    pub op_defect: Vec<(usize, usize, f64)>,
    /// `||D_i D_j - D_j D_i||` for `i < j`.
    pub defect_defect: Vec<(usize, usize, f64)>,
    /// `||D_joint - prod_i D_i||`.
    pub product_residual: f64,
    pub pass: bool,
}

/// Verifies that per-axis defects commute with the other operators and
/// among themselves, and that their product equals the joint defect.
pub fn verify_defect_commutation(
    t: &OperatorTuple,
    m: &WeightMultiIndex,
    tol: &Tolerances,
) -> Result<DefectCommutationReport, HereditaryError> {
    let cert = certify(t, m, CertifyMode::DoublyCommutingJoint, tol)?;
    if !cert.verdict {
        return Err(HereditaryError::NotDoublyCommuting {
            residual: t.double_commutation_residual(),
        });
    }
    let n = t.n();
    let mut axis_defects = Vec::with_capacity(n);
    for i in 0..n {
        let single = OperatorTuple::single(t.op(i).clone())?;
        let d = defect(&single, &WeightMultiIndex::single(m.entries()[i]), tol)?;
        axis_defects.push(d.defect_op);
    }
    let mut op_defect = Vec::new();
    let mut pass = true;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let resid =
                linalg::op_norm(&(t.op(i) * &axis_defects[j] - &axis_defects[j] * t.op(i)));
            let scale = 1.0 + linalg::op_norm(t.op(i));
            pass &= resid <= tol.tol_residual * scale;
            op_defect.push((i, j, resid));
        }
    }
    let mut defect_defect = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let resid = linalg::op_norm(
                &(&axis_defects[i] * &axis_defects[j] - &axis_defects[j] * &axis_defects[i]),
            );
            pass &= resid <= tol.tol_residual;
            defect_defect.push((i, j, resid));
        }
    }
    let joint = defect(t, m, tol)?;
    let mut product = CMatrix::identity(t.dim(), t.dim());
    for d in &axis_defects {
        product *= d.clone();
    }
    let product_residual = linalg::op_norm(&(&joint.defect_op - product));
    pass &= product_residual <= tol.tol_residual * (1.0 + linalg::op_norm(&joint.defect_op));
    Ok(DefectCommutationReport {
        op_defect,
        defect_defect,
        product_residual,
        pass,
    })
}

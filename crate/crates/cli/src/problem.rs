//! Problem-file parsing and validation.

use dilation_core::hereditary::{OperatorTuple, WeightMultiIndex};
use dilation_core::linalg::{CMatrix, SubspaceFrame, Tolerances};
use dilation_core::srkh::DiagonalKernel;
use num_complex::Complex64;
use serde::Deserialize;

/// Truncation request: an explicit degree or automatic selection against
/// a tail target.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DegreeSpec {
    Auto(String),
    Fixed(usize),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    pub degree: Option<DegreeSpec>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub tol_psd: Option<f64>,
    pub tol_residual: Option<f64>,
    pub tol_ortho: Option<f64>,
    pub tol_rank: Option<f64>,
}

/// Raw problem document. Complex entries are `[re, im]` pairs; matrices
/// are nested row-major arrays.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: String,
    /// Commands this file is intended for; when present the invoked
    /// command must be listed.
    pub commands: Option<Vec<String>>,
    pub tuple: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    pub weights: Option<Vec<u32>>,
    pub kernel_coeffs: Option<Vec<Vec<f64>>>,
    pub truncation: Option<TruncationSpec>,
    pub tolerances: Option<ToleranceSpec>,
    /// Frame matrix whose columns span a subspace, row-major.
    pub subspace: Option<Vec<Vec<[f64; 2]>>>,
    /// Certification mode override for the `certify` command.
    pub mode: Option<String>,
}

/// A validation failure with the offending path spelled out.
#[derive(Debug)]
pub struct ValidationError(pub String);

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ValidationError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ValidationError> {
    Err(ValidationError(msg.into()))
}

pub fn parse_matrix(raw: &[Vec<[f64; 2]>], path: &str) -> Result<CMatrix, ValidationError> {
    if raw.is_empty() {
        return err(format!("{path}: matrix has no rows"));
    }
    let cols = raw[0].len();
    if cols == 0 {
        return err(format!("{path}[0]: matrix has no columns"));
    }
    for (i, row) in raw.iter().enumerate() {
        if row.len() != cols {
            return err(format!(
                "{path}[{i}]: row has {} entries, expected {cols}",
                row.len()
            ));
        }
        for (j, entry) in row.iter().enumerate() {
            if !entry[0].is_finite() || !entry[1].is_finite() {
                return err(format!("{path}[{i}][{j}]: entries must be finite"));
            }
        }
    }
    Ok(CMatrix::from_fn(raw.len(), cols, |i, j| {
        Complex64::new(raw[i][j][0], raw[i][j][1])
    }))
}

/// Validated inputs shared by the commands.
pub struct ValidatedProblem {
    pub tuple: Option<OperatorTuple>,
    pub weights: Option<WeightMultiIndex>,
    pub kernels: Option<Vec<DiagonalKernel>>,
    pub subspace: Option<CMatrix>,
    pub tolerances: Tolerances,
    pub degree: Option<DegreeSpec>,
    pub epsilon: f64,
    pub mode: Option<String>,
}

impl ProblemFile {
    pub fn validate(&self, command: &str) -> Result<ValidatedProblem, ValidationError> {
        if self.version != "1" {
            return err(format!("version: expected \"1\", got {:?}", self.version));
        }
        if let Some(commands) = &self.commands {
            if !commands.iter().any(|c| c == command) {
                return err(format!(
                    "commands: file targets {commands:?}, not {command:?}"
                ));
            }
        }
        if self.weights.is_some() && self.kernel_coeffs.is_some() {
            return err("weights/kernel_coeffs: exactly one of the two may be present");
        }
        let tuple = match &self.tuple {
            Some(raw) => {
                if raw.is_empty() {
                    return err("tuple: must hold at least one matrix");
                }
                let mut mats = Vec::with_capacity(raw.len());
                for (i, m) in raw.iter().enumerate() {
                    let parsed = parse_matrix(m, &format!("tuple[{i}]"))?;
                    if parsed.nrows() != parsed.ncols() {
                        return err(format!(
                            "tuple[{i}]: matrix is {}x{}, must be square",
                            parsed.nrows(),
                            parsed.ncols()
                        ));
                    }
                    mats.push(parsed);
                }
                let dim = mats[0].nrows();
                for (i, m) in mats.iter().enumerate() {
                    if m.nrows() != dim {
                        return err(format!(
                            "tuple[{i}]: dimension {} differs from tuple[0] ({dim})",
                            m.nrows()
                        ));
                    }
                }
                Some(OperatorTuple::new(mats).map_err(|e| ValidationError(format!("tuple: {e}")))?)
            }
            None => None,
        };
        let weights = match &self.weights {
            Some(ws) => {
                if let Some(t) = &tuple {
                    if ws.len() != t.n() {
                        return err(format!(
                            "weights: {} entries for a {}-tuple",
                            ws.len(),
                            t.n()
                        ));
                    }
                }
                Some(
                    WeightMultiIndex::new(ws.clone())
                        .map_err(|e| ValidationError(format!("weights: {e}")))?,
                )
            }
            None => None,
        };
        let kernels = match &self.kernel_coeffs {
            Some(lists) => {
                if let Some(t) = &tuple {
                    if lists.len() != t.n() {
                        return err(format!(
                            "kernel_coeffs: {} axes for a {}-tuple",
                            lists.len(),
                            t.n()
                        ));
                    }
                }
                let mut kernels = Vec::with_capacity(lists.len());
                for (i, coeffs) in lists.iter().enumerate() {
                    kernels.push(DiagonalKernel::new(coeffs.clone()).map_err(|e| {
                        ValidationError(format!("kernel_coeffs[{i}]: {e}"))
                    })?);
                }
                Some(kernels)
            }
            None => None,
        };
        let subspace = match &self.subspace {
            Some(raw) => Some(parse_matrix(raw, "subspace")?),
            None => None,
        };
        let mut tolerances = Tolerances::default();
        if let Some(spec) = &self.tolerances {
            if let Some(x) = spec.tol_psd {
                tolerances.tol_psd = x;
            }
            if let Some(x) = spec.tol_residual {
                tolerances.tol_residual = x;
            }
            if let Some(x) = spec.tol_ortho {
                tolerances.tol_ortho = x;
            }
            if let Some(x) = spec.tol_rank {
                tolerances.tol_rank = x;
            }
            tolerances
                .validate()
                .map_err(|e| ValidationError(format!("tolerances: {e}")))?;
        }
        let (degree, epsilon) = match &self.truncation {
            Some(spec) => {
                if let Some(DegreeSpec::Auto(word)) = &spec.degree {
                    if word != "auto" {
                        return err(format!(
                            "truncation.degree: expected an integer or \"auto\", got {word:?}"
                        ));
                    }
                }
                let eps = spec.epsilon.unwrap_or(1e-9);
                if !(eps > 0.0) || !eps.is_finite() {
                    return err("truncation.epsilon: must be a positive number");
                }
                (spec.degree.clone(), eps)
            }
            None => (None, 1e-9),
        };
        if let Some(mode) = &self.mode {
            let known = [
                "bm",
                "hypercontraction",
                "joint",
                "doubly-commuting-joint",
            ];
            if !known.contains(&mode.as_str()) {
                return err(format!("mode: unknown certification mode {mode:?}"));
            }
        }
        Ok(ValidatedProblem {
            tuple,
            weights,
            kernels,
            subspace,
            tolerances,
            degree,
            epsilon,
            mode: self.mode.clone(),
        })
    }
}

/// Builds a validated orthonormal frame from a subspace matrix,
/// orthonormalizing when the columns are independent but not orthonormal.
pub fn subspace_frame(
    matrix: &CMatrix,
    expected_ambient: usize,
    tol: &Tolerances,
) -> Result<SubspaceFrame, ValidationError> {
    if matrix.nrows() != expected_ambient {
        return err(format!(
            "subspace: {} rows, expected the space dimension {}",
            matrix.nrows(),
            expected_ambient
        ));
    }
    match SubspaceFrame::new(matrix.clone(), tol) {
        Ok(frame) => Ok(frame),
        Err(_) => {
            let frame = dilation_core::linalg::orthonormal_range(matrix, tol);
            if frame.dim() == 0 {
                return err("subspace: columns span the zero subspace");
            }
            if frame.dim() < matrix.ncols() {
                return err(format!(
                    "subspace: columns are dependent (rank {} of {})",
                    frame.dim(),
                    matrix.ncols()
                ));
            }
            Ok(frame)
        }
    }
}

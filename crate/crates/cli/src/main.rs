//! Batch front end: parse operator-tuple problem files, run the
//! certification, dilation, model, factorization, quotient, and kernel
//! pipelines, and emit structured reports with truncation diagnostics.

mod problem;
mod report;

use clap::{Args, Parser, Subcommand};
use dilation_core::bergman::TruncatedSpace;
use dilation_core::blh;
use dilation_core::dilation::{self, DilationError, DEGREE_CAP};
use dilation_core::hereditary::{certify, CertifyMode, WeightMultiIndex};
use dilation_core::model;
use dilation_core::srkh;
use problem::{DegreeSpec, ProblemFile, ValidatedProblem, ValidationError};
use report::{Report, EXIT_TRUNCATION, EXIT_VALIDATION, EXIT_VERDICT_FALSE};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "dilation-lab",
    version,
    about = "Operator positivity certificates, Bergman-space dilations, and analytic models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Problem file (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Write the machine-readable report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Truncation degree: an integer or "auto".
    #[arg(long)]
    degree: Option<String>,
    /// Tail target for automatic degree selection.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Override the residual tolerance.
    #[arg(long)]
    tol_residual: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Contractivity certificates for an operator tuple.
    Certify(RunArgs),
    /// Isometric dilation with identity verification.
    Dilate(RunArgs),
    /// Analytic model with the Beurling-type complement.
    Model(RunArgs),
    /// Partially isometric multiplier for a shift-invariant subspace.
    Blh(RunArgs),
    /// Quotient-module analysis of a co-invariant subspace.
    Quotient(RunArgs),
    /// Diagonal-kernel contractivity and dilation.
    Srkh(RunArgs),
}

fn main() {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Certify(a) => ("certify", a),
        Command::Dilate(a) => ("dilate", a),
        Command::Model(a) => ("model", a),
        Command::Blh(a) => ("blh", a),
        Command::Quotient(a) => ("quotient", a),
        Command::Srkh(a) => ("srkh", a),
    };
    let started = Instant::now();
    let mut report = Report::new(name);
    let status = match run(name, args, &mut report) {
        Ok(()) => report.exit_status,
        Err(e) => {
            report.notes.push(e.to_string());
            report.verdict = false;
            report.exit_status = e.exit_status();
            report.exit_status
        }
    };
    let elapsed = started.elapsed().as_secs_f64() * 1e3;
    print!("{}", report.to_text(elapsed));
    if let Some(out) = &args.out {
        if let Err(e) = std::fs::write(out, report.to_json()) {
            eprintln!("failed to write report to {}: {e}", out.display());
            std::process::exit(EXIT_VALIDATION);
        }
    }
    std::process::exit(status);
}

#[derive(Debug)]
enum RunError {
    Validation(String),
    Truncation(String),
    Verdict(String),
}

impl RunError {
    fn exit_status(&self) -> i32 {
        match self {
            RunError::Validation(_) => EXIT_VALIDATION,
            RunError::Truncation(_) => EXIT_TRUNCATION,
            RunError::Verdict(_) => EXIT_VERDICT_FALSE,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Validation(m) => write!(f, "validation: {m}"),
            RunError::Truncation(m) => write!(f, "truncation budget: {m}"),
            RunError::Verdict(m) => write!(f, "verdict: {m}"),
        }
    }
}

impl From<ValidationError> for RunError {
    fn from(e: ValidationError) -> Self {
        RunError::Validation(e.0)
    }
}

fn map_dilation_error(e: DilationError, report: &mut Report) -> RunError {
    match e {
        DilationError::NotBmContraction(cert) | DilationError::NotDoublyCommutingJoint(cert) => {
            report.push_witnesses(&cert.witnesses);
            report.spectral_radii = cert.spectral_radii.clone();
            RunError::Verdict("tuple failed certification".into())
        }
        DilationError::TailBoundTooLarge { tail } => {
            RunError::Truncation(format!("tail bound {tail:.3e} exceeds the hard cap"))
        }
        DilationError::TailBoundUnavailable => {
            RunError::Truncation("no geometric decay in the power norms".into())
        }
        DilationError::DegreeCapExceeded { cap, epsilon } => RunError::Truncation(format!(
            "tail target {epsilon:.3e} needs degree beyond the cap {cap}"
        )),
        other => RunError::Validation(other.to_string()),
    }
}

fn load(args: &RunArgs, command: &str) -> Result<ValidatedProblem, RunError> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| RunError::Validation(format!("{}: {e}", args.input.display())))?;
    let file: ProblemFile = serde_json::from_str(&text).map_err(|e| {
        RunError::Validation(format!(
            "{}: line {}, column {}: {e}",
            args.input.display(),
            e.line(),
            e.column()
        ))
    })?;
    let mut validated = file.validate(command)?;
    if let Some(degree) = &args.degree {
        validated.degree = Some(if degree == "auto" {
            DegreeSpec::Auto("auto".into())
        } else {
            let n: usize = degree.parse().map_err(|_| {
                RunError::Validation(format!(
                    "--degree: expected an integer or \"auto\", got {degree:?}"
                ))
            })?;
            DegreeSpec::Fixed(n)
        });
    }
    if let Some(eps) = args.epsilon {
        if !(eps > 0.0) {
            return Err(RunError::Validation("--epsilon: must be positive".into()));
        }
        validated.epsilon = eps;
    }
    if let Some(r) = args.tol_residual {
        validated.tolerances.tol_residual = r;
        validated
            .tolerances
            .validate()
            .map_err(|e| RunError::Validation(e.to_string()))?;
    }
    Ok(validated)
}

fn require_tuple(
    p: &ValidatedProblem,
) -> Result<&dilation_core::hereditary::OperatorTuple, RunError> {
    p.tuple
        .as_ref()
        .ok_or_else(|| RunError::Validation("tuple: required for this command".into()))
}

fn require_weights(p: &ValidatedProblem) -> Result<&WeightMultiIndex, RunError> {
    p.weights
        .as_ref()
        .ok_or_else(|| RunError::Validation("weights: required for this command".into()))
}

/// Resolves the truncation degree, running the selection helper for
/// "auto" (the default when nothing is specified).
fn resolve_degree(p: &ValidatedProblem, report: &mut Report) -> Result<usize, RunError> {
    let tuple = require_tuple(p)?;
    let weights = require_weights(p)?;
    let n = match &p.degree {
        Some(DegreeSpec::Fixed(n)) => *n,
        _ => {
            let selected = if tuple.n() == 1 {
                dilation::select_degree_single(
                    tuple.op(0),
                    weights.entries()[0],
                    p.epsilon,
                    DEGREE_CAP,
                )
            } else {
                dilation::select_degree_joint(tuple, weights, p.epsilon, DEGREE_CAP)
            };
            report.epsilon = Some(p.epsilon);
            selected.map_err(|e| map_dilation_error(e, report))?
        }
    };
    report.resolved_degree = Some(n);
    Ok(n)
}

fn fixed_degree(p: &ValidatedProblem) -> Result<usize, RunError> {
    match &p.degree {
        Some(DegreeSpec::Fixed(n)) => Ok(*n),
        _ => Err(RunError::Validation(
            "truncation.degree: an explicit integer degree is required for this command".into(),
        )),
    }
}

fn run(name: &str, args: &RunArgs, report: &mut Report) -> Result<(), RunError> {
    let p = load(args, name)?;
    match name {
        "certify" => run_certify(&p, report),
        "dilate" => run_dilate(&p, report),
        "model" => run_model(&p, report),
        "blh" => run_blh(&p, report),
        "quotient" => run_quotient(&p, report),
        "srkh" => run_srkh(&p, report),
        _ => unreachable!("clap restricts the command set"),
    }
}

fn run_certify(p: &ValidatedProblem, report: &mut Report) -> Result<(), RunError> {
    let tuple = require_tuple(p)?;
    let weights = require_weights(p)?;
    let mode = match p.mode.as_deref() {
        Some("bm") => CertifyMode::Bm,
        Some("hypercontraction") => CertifyMode::Hypercontraction,
        Some("joint") => CertifyMode::JointBm,
        Some("doubly-commuting-joint") => CertifyMode::DoublyCommutingJoint,
        None => {
            if tuple.n() == 1 {
                CertifyMode::Hypercontraction
            } else {
                CertifyMode::DoublyCommutingJoint
            }
        }
        Some(other) => {
            return Err(RunError::Validation(format!(
                "mode: unknown certification mode {other:?}"
            )))
        }
    };
    let cert = certify(tuple, weights, mode, &p.tolerances)
        .map_err(|e| RunError::Validation(e.to_string()))?;
    report.spectral_radii = cert.spectral_radii.clone();
    report.push_witnesses(&cert.witnesses);
    report.finalize();
    Ok(())
}

fn run_dilate(p: &ValidatedProblem, report: &mut Report) -> Result<(), RunError> {
    let tuple = require_tuple(p)?;
    let weights = require_weights(p)?;
    let tol = &p.tolerances;
    let degree = resolve_degree(p, report)?;
    let (map, stage_agreement) = if tuple.n() == 1 {
        let map = dilation::agler_dilation(tuple, weights, degree, tol)
            .map_err(|e| map_dilation_error(e, report))?;
        (map, None)
    } else {
        let jd = dilation::joint_dilation(tuple, weights, degree, tol)
            .map_err(|e| map_dilation_error(e, report))?;
        (jd.map, Some(jd.stage_agreement))
    };
    report.tail_bound = Some(map.tail_bound);
    report.spectral_radii = tuple.spectral_radii();
    let identities = dilation::verify_dilation_identities(&map, tuple, tol)
        .map_err(|e| map_dilation_error(e, report))?;
    report.push_identity(
        "dil1-isometry",
        identities.isometry_residual,
        identities.isometry_threshold,
    );
    for (axis, r) in identities.intertwining_residuals.iter().enumerate() {
        report.push_identity(
            &format!("dil1-intertwine-z{}", axis + 1),
            *r,
            identities.intertwining_threshold,
        );
    }
    report.push_identity(
        "vv*-kernel-action",
        identities.kernel_identity_max,
        identities.kernel_identity_threshold,
    );
    if let Some(stage) = stage_agreement {
        report.push_identity("V_j-stage-consistency", stage, tol.tol_residual * 2.0);
    }
    if tuple.n() > 1 {
        let projections: Result<Vec<_>, _> = (0..tuple.n())
            .map(|axis| dilation::model_projection(tuple, &map, axis, tol))
            .collect();
        let projections = projections.map_err(|e| map_dilation_error(e, report))?;
        for proj in &projections {
            report.push_identity(
                &format!("RD-reducing-z{}", proj.axis + 1),
                proj.rd_invariance_residual,
                20.0 * (map.tail_bound + tol.tol_residual),
            );
        }
        let product = dilation::verify_product_formula(&map, &projections, tol);
        for (i, j, r) in &product.commutator_residuals {
            report.push_identity(
                &format!("VR-commute-z{}z{}", i + 1, j + 1),
                *r,
                product.threshold,
            );
        }
        report.push_identity("VR-product", product.product_residual, product.threshold);
    }
    report.finalize();
    Ok(())
}

fn run_model(p: &ValidatedProblem, report: &mut Report) -> Result<(), RunError> {
    let tuple = require_tuple(p)?;
    let weights = require_weights(p)?;
    let tol = &p.tolerances;
    let degree = resolve_degree(p, report)?;
    let data = model::model_space(tuple, weights, degree, tol).map_err(|e| match e {
        model::ModelError::Dilation(d) => map_dilation_error(d, report),
        other => RunError::Validation(other.to_string()),
    })?;
    report.tail_bound = Some(data.dilation.tail_bound);
    report.spectral_radii = tuple.spectral_radii();
    let slack = 20.0 * (data.dilation.tail_bound + tol.tol_residual);
    let unitary_residual = {
        let u = &data.unitary;
        let id = dilation_core::linalg::CMatrix::identity(u.ncols(), u.ncols());
        dilation_core::linalg::op_norm(&(u.adjoint() * u - id))
    };
    report.push_identity("dil-H-unitary", unitary_residual, slack);
    for (axis, r) in data.intertwining_residuals.iter().enumerate() {
        report.push_identity(&format!("dil-H-intertwine-z{}", axis + 1), *r, slack);
    }
    for (axis, r) in data.coinvariance_residuals.iter().enumerate() {
        report.push_identity(&format!("model-coinvariance-z{}", axis + 1), *r, slack);
    }
    let complement = model::beurling_complement(tuple, &data, tol).map_err(|e| match e {
        model::ModelError::Dilation(d) => map_dilation_error(d, report),
        other => RunError::Validation(other.to_string()),
    })?;
    let threshold = 50.0 * (data.dilation.tail_bound + tol.tol_residual);
    report.push_identity("MT-complement", complement.product_residual, threshold);
    report.push_identity("PF-span", complement.span_residual, threshold);
    for axis in &complement.axes {
        report.push_identity(
            &format!("MT-blh-range-z{}", axis.axis + 1),
            axis.range_residual,
            threshold,
        );
        if axis.theta.is_none() {
            report
                .notes
                .push(format!("axis {}: degenerate complement", axis.axis + 1));
        }
    }
    report.finalize();
    Ok(())
}

fn run_blh(p: &ValidatedProblem, report: &mut Report) -> Result<(), RunError> {
    let weights = require_weights(p)?;
    if weights.len() != 1 {
        return Err(RunError::Validation(
            "weights: the factorization command needs a single weight".into(),
        ));
    }
    let degree = fixed_degree(p)?;
    let raw = p
        .subspace
        .as_ref()
        .ok_or_else(|| RunError::Validation("subspace: required for this command".into()))?;
    let rows = raw.nrows();
    if rows % (degree + 1) != 0 {
        return Err(RunError::Validation(format!(
            "subspace: {rows} rows is not a multiple of degree+1 = {}",
            degree + 1
        )));
    }
    let coeff_dim = rows / (degree + 1);
    let space = TruncatedSpace::new(weights.clone(), degree, coeff_dim);
    report.resolved_degree = Some(degree);
    let frame = problem::subspace_frame(raw, space.total_dim(), &p.tolerances)?;
    let outcome = blh::blh_multiplier(&frame, &space, &p.tolerances).map_err(|e| match e {
        blh::BlhError::NotInvariant { .. } | blh::BlhError::NotC0 { .. } => {
            RunError::Verdict(e.to_string())
        }
        other => RunError::Validation(other.to_string()),
    })?;
    report.notes.push(format!(
        "source dimension: {}",
        outcome.theta.source_coeff_dim
    ));
    report
        .notes
        .push(format!("multiplier degree: {}", outcome.theta.degree()));
    let threshold = 100.0 * p.tolerances.tol_residual;
    report.push_identity("MT-blh-range", outcome.range_residual, threshold);
    report.push_identity(
        "MT-blh-partial-isometry",
        outcome.partial_isometry_residual,
        threshold,
    );
    let verify = blh::verify_partial_isometry(&outcome.theta, &p.tolerances)
        .map_err(|e| RunError::Validation(e.to_string()))?;
    report.push_identity("MT-blh-intertwine", verify.intertwining_interior, threshold);
    report.push_identity(
        "MT-blh-rebuild",
        outcome.interior_rebuild_residual,
        threshold,
    );
    report.finalize();
    Ok(())
}

fn run_quotient(p: &ValidatedProblem, report: &mut Report) -> Result<(), RunError> {
    let weights = require_weights(p)?;
    let degree = fixed_degree(p)?;
    let space = TruncatedSpace::new(weights.clone(), degree, 1);
    report.resolved_degree = Some(degree);
    let raw = p
        .subspace
        .as_ref()
        .ok_or_else(|| RunError::Validation("subspace: required for this command".into()))?;
    let frame = problem::subspace_frame(raw, space.total_dim(), &p.tolerances)?;
    let analysis = model::quotient_analysis(&frame, &space, &p.tolerances).map_err(|e| match e {
        model::ModelError::NotCoinvariant { .. } => RunError::Verdict(e.to_string()),
        other => RunError::Validation(other.to_string()),
    })?;
    report.push_identity("qm-dc", analysis.dc_residual, model::DC_DECISION);
    report.push_identity(
        "C-rank",
        analysis.defect_rank as f64,
        if analysis.doubly_commuting { 1.0 } else { f64::MAX },
    );
    report.push_identity(
        "qm-defect-cross",
        analysis.defect_cross_residual,
        100.0 * p.tolerances.tol_residual,
    );
    if let Some(residual) = analysis.factorization_residual {
        report.push_identity("qm-factorization", residual, 1e-7);
        if let Some(frames) = &analysis.factor_frames {
            let dims: Vec<String> = frames.iter().map(|f| f.dim().to_string()).collect();
            report
                .notes
                .push(format!("tensor factor dimensions: [{}]", dims.join(", ")));
        }
    }
    report.finalize();
    if !analysis.rank_consistent {
        report
            .notes
            .push("inconsistency: defect rank exceeds one for a doubly commuting module".into());
        report.verdict = false;
        report.exit_status = EXIT_VERDICT_FALSE;
    }
    Ok(())
}

fn run_srkh(p: &ValidatedProblem, report: &mut Report) -> Result<(), RunError> {
    let tuple = require_tuple(p)?;
    let kernels = p
        .kernels
        .as_ref()
        .ok_or_else(|| RunError::Validation("kernel_coeffs: required for this command".into()))?;
    if kernels.len() != tuple.n() {
        return Err(RunError::Validation(format!(
            "kernel_coeffs: {} axes for a {}-tuple",
            kernels.len(),
            tuple.n()
        )));
    }
    let tol = &p.tolerances;
    let series_cap = kernels.iter().map(|k| k.len() - 1).min().unwrap_or(0);
    let degree = match &p.degree {
        Some(DegreeSpec::Fixed(n)) => (*n).min(series_cap),
        _ => series_cap.min(64),
    };
    report.resolved_degree = Some(degree);
    report.spectral_radii = tuple.spectral_radii();
    for (i, kernel) in kernels.iter().enumerate() {
        let recip = srkh::reciprocal_series(kernel, series_cap);
        report.push_identity(
            &format!("recip-convolution-z{}", i + 1),
            recip.convolution_residual,
            1e-12,
        );
    }
    if tuple.n() == 1 {
        let cert = srkh::k_contractivity(tuple.op(0), &kernels[0], series_cap, tol)
            .map_err(|e| RunError::Verdict(e.to_string()))?;
        report.witnesses.push(report::WitnessOut {
            label: "k-limit-min-eig".into(),
            value: cert.min_eig,
            threshold: -tol.tol_psd,
            pass: cert.min_eig >= -tol.tol_psd,
        });
        report.witnesses.push(report::WitnessOut {
            label: "shift-calculus-sup".into(),
            value: cert.shift_calculus_sup,
            threshold: f64::MAX,
            pass: true,
        });
        if !cert.verdict {
            return Err(RunError::Verdict(
                "operator is not kernel-contractive".into(),
            ));
        }
        let v = srkh::srkh_dilation(tuple.op(0), &kernels[0], degree, tol)
            .map_err(|e| RunError::Verdict(e.to_string()))?;
        report.push_identity(
            "AE-dilation-isometry",
            v.isometry_residual,
            100.0 * tol.tol_residual,
        );
        report.push_identity(
            "AE-intertwine",
            v.intertwining_residual,
            100.0 * tol.tol_residual,
        );
    } else {
        let cert = srkh::product_kernel_certify(tuple, kernels, series_cap, tol)
            .map_err(|e| RunError::Verdict(e.to_string()))?;
        for (i, ok) in cert.axis_verdicts.iter().enumerate() {
            report.witnesses.push(report::WitnessOut {
                label: format!("k-contractive-z{}", i + 1),
                value: if *ok { 1.0 } else { 0.0 },
                threshold: 1.0,
                pass: *ok,
            });
        }
        for (i, j, r) in &cert.commutation_residuals {
            report.push_identity(
                &format!("K-limit-commute-z{}z{}", i + 1, j + 1),
                *r,
                100.0 * tol.tol_residual,
            );
        }
        report.witnesses.push(report::WitnessOut {
            label: "K-product-min-eig".into(),
            value: cert.joint_min_eig,
            threshold: -tol.tol_psd,
            pass: cert.joint_min_eig >= -tol.tol_psd,
        });
    }
    report.finalize();
    Ok(())
}

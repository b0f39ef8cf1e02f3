//! Structured reports: a human-readable text rendering and a
//! deterministic machine-readable JSON document.
//!
//! The JSON document carries no wall-clock data, so identical inputs
//! produce byte-identical reports; timings appear only in the text
//! rendering.

use serde::Serialize;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERDICT_FALSE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_TRUNCATION: i32 = 3;

#[derive(Debug, Clone, Serialize)]
pub struct WitnessOut {
    pub label: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// One verified identity, keyed by its check identifier.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub id: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub command: String,
    pub verdict: bool,
    pub exit_status: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolved_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    pub spectral_radii: Vec<f64>,
    pub witnesses: Vec<WitnessOut>,
    pub identities: Vec<IdentityCheck>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            version: "1",
            command: command.to_string(),
            verdict: true,
            exit_status: EXIT_PASS,
            resolved_degree: None,
            epsilon: None,
            tail_bound: None,
            spectral_radii: Vec::new(),
            witnesses: Vec::new(),
            identities: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push_witnesses(&mut self, witnesses: &[dilation_core::hereditary::Witness]) {
        for w in witnesses {
            self.witnesses.push(WitnessOut {
                label: w.label.clone(),
                value: w.value,
                threshold: w.threshold,
                pass: w.pass,
            });
        }
    }

    pub fn push_identity(&mut self, id: &str, residual: f64, threshold: f64) {
        self.identities.push(IdentityCheck {
            id: id.to_string(),
            residual,
            threshold,
            pass: residual <= threshold,
        });
    }

    /// Folds witness and identity outcomes into the verdict and exit
    /// status (validation and truncation failures are set elsewhere).
    pub fn finalize(&mut self) {
        let ok = self.witnesses.iter().all(|w| w.pass)
            && self.identities.iter().all(|c| c.pass);
        self.verdict = ok;
        if !ok {
            self.exit_status = EXIT_VERDICT_FALSE;
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Text rendering; `elapsed_ms` appears only here.
    pub fn to_text(&self, elapsed_ms: f64) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "command: {}\nverdict: {}\n",
            self.command,
            if self.verdict { "PASS" } else { "FAIL" }
        ));
        if let Some(n) = self.resolved_degree {
            out.push_str(&format!("resolved degree: {n}\n"));
        }
        if let Some(e) = self.epsilon {
            out.push_str(&format!("tail target: {e:.3e}\n"));
        }
        if let Some(t) = self.tail_bound {
            out.push_str(&format!("tail bound: {t:.3e}\n"));
        }
        if !self.spectral_radii.is_empty() {
            let radii: Vec<String> = self
                .spectral_radii
                .iter()
                .map(|r| format!("{r:.6}"))
                .collect();
            out.push_str(&format!("spectral radii: [{}]\n", radii.join(", ")));
        }
        if !self.witnesses.is_empty() {
            out.push_str("witnesses:\n");
            for w in &self.witnesses {
                out.push_str(&format!(
                    "  {:<32} {:>14.6e}  (threshold {:>10.3e})  {}\n",
                    w.label,
                    w.value,
                    w.threshold,
                    if w.pass { "pass" } else { "FAIL" }
                ));
            }
        }
        if !self.identities.is_empty() {
            out.push_str("identities:\n");
            for c in &self.identities {
                out.push_str(&format!(
                    "  {:<32} {:>14.6e}  (threshold {:>10.3e})  {}\n",
                    c.id,
                    c.residual,
                    c.threshold,
                    if c.pass { "pass" } else { "FAIL" }
                ));
            }
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out.push_str(&format!("elapsed: {elapsed_ms:.1} ms\n"));
        out
    }
}

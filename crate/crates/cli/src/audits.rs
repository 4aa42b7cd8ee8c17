use anyhow::Result;
use consensus_dyn::graphs::{CommPattern, PatternSpec};
use consensus_dyn::simulator::RunTrace;
use consensus_dyn::verification::{
    audit_safeness, check_moreau_assumptions, reconstruct_matrices, MoreauReport, SafenessViolation,
};
use consensus_dyn::Error;
use serde::Serialize;

use crate::config::Audits;

/// Violations listed in full in a summary; the rest are only counted.
const LISTED_VIOLATIONS: usize = 100;

#[derive(Debug, Default, Serialize)]
pub struct AuditSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub safeness: Option<SafenessSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrices: Option<MatrixSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moreau: Option<MoreauSummary>,
}

#[derive(Debug, Serialize)]
pub struct SafenessSummary {
    pub passed: bool,
    pub claimed_alpha: f64,
    pub worst_alpha: Option<f64>,
    pub violation_count: usize,
    pub violations: Vec<SafenessViolation>,
    pub rounding_excused: usize,
}

#[derive(Debug, Serialize)]
pub struct MatrixSummary {
    pub passed: bool,
    pub averaging_rounds: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct MoreauSummary {
    pub passed: bool,
    /// Lower bound used for positive entries: `alpha / n`.
    pub a: f64,
    pub window: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<MoreauReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl AuditSummary {
    pub fn passed(&self) -> bool {
        self.safeness.as_ref().is_none_or(|s| s.passed)
            && self.matrices.as_ref().is_none_or(|m| m.passed)
            && self.moreau.as_ref().is_none_or(|m| m.passed)
    }

    pub fn worst_alpha(&self) -> Option<f64> {
        self.safeness.as_ref().and_then(|s| s.worst_alpha)
    }
}

pub fn safeness(trace: &RunTrace, pattern: &CommPattern) -> Result<SafenessSummary> {
    let alpha = trace.spec.algorithm.alpha(trace.spec.n, trace.spec.d);
    let rep = audit_safeness(trace, pattern, alpha)?;
    Ok(SafenessSummary {
        passed: rep.passed(),
        claimed_alpha: alpha,
        worst_alpha: rep.worst_alpha,
        violation_count: rep.violations.len(),
        violations: rep.violations.iter().take(LISTED_VIOLATIONS).copied().collect(),
        rounding_excused: rep.rounding_excused,
    })
}

/// Runs the audits enabled in `audits`. Errors are reserved for inputs the
/// audits cannot interpret; failed checks are recorded in the summary.
pub fn run_audits(trace: &RunTrace, audits: &Audits) -> Result<AuditSummary> {
    let spec = &trace.spec;
    let pattern = spec.build_pattern()?;
    let mut out = AuditSummary::default();
    if trace.rounds() == 0 {
        return Ok(out);
    }
    if audits.safeness {
        out.safeness = Some(safeness(trace, &pattern)?);
    }
    if !(audits.matrices || audits.moreau) {
        return Ok(out);
    }
    let alpha = spec.algorithm.alpha(spec.n, spec.d);
    let seq = match reconstruct_matrices(trace, &pattern, alpha) {
        Ok(seq) => Ok(seq),
        Err(e @ Error::SafenessViolation { .. }) => Err(e.to_string()),
        Err(e) => return Err(e.into()),
    };
    if audits.matrices {
        out.matrices = Some(match &seq {
            Ok(seq) => MatrixSummary {
                passed: true,
                averaging_rounds: seq.rounds.len(),
                error: None,
            },
            Err(e) => MatrixSummary {
                passed: false,
                averaging_rounds: 0,
                error: Some(e.clone()),
            },
        });
    }
    if audits.moreau {
        let a = alpha / spec.n as f64;
        let window = audits.moreau_window.unwrap_or_else(|| match spec.pattern {
            PatternSpec::BidirectionalIntermittent { period, .. } => period.max(trace.period()),
            _ => trace.period(),
        });
        out.moreau = Some(match seq {
            Ok(seq) => {
                let report = check_moreau_assumptions(&seq, &pattern, a, window)?;
                MoreauSummary {
                    passed: report.all_hold(),
                    a,
                    window,
                    report: Some(report),
                    error: None,
                }
            }
            Err(e) => MoreauSummary {
                passed: false,
                a,
                window,
                report: None,
                error: Some(e),
            },
        });
    }
    Ok(out)
}

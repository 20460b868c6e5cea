//! Deterministic rendering of study results as text, CSV, or JSON lines.
//!
//! Every format carries the same records: a configuration echo, one row per
//! (replication, variant), a summary row per variant, and one row per
//! pairwise test. Output is a pure function of its inputs — no timestamps,
//! no locale-dependent formatting — so identical runs produce identical
//! bytes.

use super::{OracleSource, ReplicationResult, StudySummary};
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Output format for rendered results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Csv,
    JsonLines,
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OutputFormat::Text => write!(f, "text"),
            OutputFormat::Csv => write!(f, "csv"),
            OutputFormat::JsonLines => write!(f, "jsonl"),
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" | "json-lines" => Ok(OutputFormat::JsonLines),
            other => Err(Error::Config(format!(
                "unknown format `{other}`; valid: text, csv, jsonl"
            ))),
        }
    }
}

/// Configuration echo included at the top of rendered output.
#[derive(Debug, Clone, Default)]
pub struct StudyMeta {
    entries: BTreeMap<String, String>,
}

impl StudyMeta {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }
}

// Cache hits are reported on stderr, never here: rendered output must be
// byte-identical whether the oracle was computed or loaded.
fn describe_oracle(source: &OracleSource) -> String {
    match source {
        OracleSource::Analytic => "analytic".to_string(),
        OracleSource::MonteCarlo { reps, seed, .. } => {
            format!("monte-carlo reps={reps} seed={seed}")
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum JsonRecord<'a> {
    Config {
        entries: &'a BTreeMap<String, String>,
    },
    Replication {
        replication: usize,
        variant: &'a str,
        relative_norm: f64,
    },
    Summary {
        variant: &'a str,
        mean: f64,
        ci_lower: f64,
        ci_upper: f64,
    },
    Comparison {
        lhs: &'a str,
        rhs: &'a str,
        p_value: f64,
        degenerate: bool,
    },
}

/// Renders only the summary block (variant means, intervals, and tests).
pub fn render_table(summary: &StudySummary, format: OutputFormat) -> Result<String> {
    render_parts(None, summary, format, &StudyMeta::new())
}

/// Renders the full study document: configuration echo, per-replication
/// records, and the summary block.
pub fn render_study(
    results: &[ReplicationResult],
    summary: &StudySummary,
    format: OutputFormat,
    meta: &StudyMeta,
) -> Result<String> {
    render_parts(Some(results), summary, format, meta)
}

fn render_parts(
    results: Option<&[ReplicationResult]>,
    summary: &StudySummary,
    format: OutputFormat,
    meta: &StudyMeta,
) -> Result<String> {
    if summary.variants.is_empty() {
        return Err(Error::InvalidInput(
            "summary has no variants to render".into(),
        ));
    }
    if let Some(rows) = results {
        for row in rows {
            if row.norms.len() != summary.variants.len() {
                return Err(Error::DimensionMismatch {
                    expected: summary.variants.len(),
                    got: row.norms.len(),
                });
            }
        }
    }
    let mut meta = meta.clone();
    meta.set("replications", summary.replications);
    meta.set("paired", summary.paired);
    meta.set("seed", summary.seed);
    meta.set("oracle", describe_oracle(&summary.oracle_source));
    match format {
        OutputFormat::Text => Ok(render_text(results, summary, &meta)),
        OutputFormat::Csv => Ok(render_csv(results, summary, &meta)),
        OutputFormat::JsonLines => render_jsonl(results, summary, &meta),
    }
}

fn render_text(
    results: Option<&[ReplicationResult]>,
    summary: &StudySummary,
    meta: &StudyMeta,
) -> String {
    let mut out = String::new();
    for (key, value) in meta.entries() {
        let _ = writeln!(out, "# {key} = {value}");
    }
    let label_width = summary
        .variants
        .iter()
        .map(|v| v.label.len())
        .max()
        .unwrap_or(8)
        .max(8);
    if let Some(rows) = results {
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<12} {:<label_width$} relative_norm", "replication", "variant");
        for row in rows {
            for (variant, norm) in summary.variants.iter().zip(&row.norms) {
                let _ = writeln!(
                    out,
                    "{:<12} {:<label_width$} {:.6e}",
                    row.replication, variant.label, norm
                );
            }
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<label_width$} mean relative norm [95% CI]",
        "variant"
    );
    for v in &summary.variants {
        let _ = writeln!(
            out,
            "{:<label_width$} {:.4} [{:.4}, {:.4}]",
            v.label, v.mean, v.ci_lower, v.ci_upper
        );
    }
    if !summary.comparisons.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "one-sided t-tests (H1: left mean norm > right)");
        for c in &summary.comparisons {
            let warn = if c.degenerate {
                "  [degenerate: zero variance and zero mean difference]"
            } else {
                ""
            };
            let _ = writeln!(out, "{} > {}: p = {:.3e}{warn}", c.lhs, c.rhs, c.p_value);
        }
    }
    out
}

fn render_csv(
    results: Option<&[ReplicationResult]>,
    summary: &StudySummary,
    meta: &StudyMeta,
) -> String {
    let mut out = String::new();
    for (key, value) in meta.entries() {
        let _ = writeln!(out, "# {key} = {value}");
    }
    let _ = writeln!(
        out,
        "kind,replication,variant,value,ci_lower,ci_upper,versus,p_value,degenerate"
    );
    if let Some(rows) = results {
        for row in rows {
            for (variant, norm) in summary.variants.iter().zip(&row.norms) {
                let _ = writeln!(
                    out,
                    "replication,{},{},{:.17e},,,,,",
                    row.replication, variant.label, norm
                );
            }
        }
    }
    for v in &summary.variants {
        let _ = writeln!(
            out,
            "summary,,{},{:.17e},{:.17e},{:.17e},,,",
            v.label, v.mean, v.ci_lower, v.ci_upper
        );
    }
    for c in &summary.comparisons {
        let _ = writeln!(
            out,
            "comparison,,{},,,,{},{:.17e},{}",
            c.lhs, c.rhs, c.p_value, c.degenerate
        );
    }
    out
}

fn render_jsonl(
    results: Option<&[ReplicationResult]>,
    summary: &StudySummary,
    meta: &StudyMeta,
) -> Result<String> {
    let mut out = String::new();
    let mut push = |record: &JsonRecord| -> Result<()> {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))?;
        out.push_str(&line);
        out.push('\n');
        Ok(())
    };
    push(&JsonRecord::Config {
        entries: meta.entries(),
    })?;
    if let Some(rows) = results {
        for row in rows {
            for (variant, norm) in summary.variants.iter().zip(&row.norms) {
                push(&JsonRecord::Replication {
                    replication: row.replication,
                    variant: &variant.label,
                    relative_norm: *norm,
                })?;
            }
        }
    }
    for v in &summary.variants {
        push(&JsonRecord::Summary {
            variant: &v.label,
            mean: v.mean,
            ci_lower: v.ci_lower,
            ci_upper: v.ci_upper,
        })?;
    }
    for c in &summary.comparisons {
        push(&JsonRecord::Comparison {
            lhs: &c.lhs,
            rhs: &c.rhs,
            p_value: c.p_value,
            degenerate: c.degenerate,
        })?;
    }
    Ok(out)
}

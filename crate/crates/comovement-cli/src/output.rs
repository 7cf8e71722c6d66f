//! Output plumbing: formats, writing artifacts, outcome wrappers.

use anyhow::{Context, Result};
use comovement::exact::ExactReport;
use comovement::mc::TestReport;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl Format {
    pub fn parse(name: &str) -> Result<Format> {
        match name {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            other => anyhow::bail!("unknown format {other:?}"),
        }
    }
}

/// Writes the primary artifact to `--out` or stdout.
pub fn emit(content: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            if !content.ends_with('\n') {
                writeln!(stdout)?;
            }
        }
    }
    Ok(())
}

/// Writes a secondary artifact next to the primary one (or stdout).
pub fn emit_aux(content: &str, out: Option<&PathBuf>, suffix: &str) -> Result<()> {
    match out {
        Some(path) => {
            let aux = aux_path(path, suffix);
            std::fs::write(&aux, content).with_context(|| format!("writing {}", aux.display()))?;
        }
        None => emit(content, None)?,
    }
    Ok(())
}

fn aux_path(primary: &Path, suffix: &str) -> PathBuf {
    let stem = primary
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("out");
    primary.with_file_name(format!("{stem}.{suffix}"))
}

/// An exact check outcome together with its expectation. A negative-control
/// model is supposed to fail certain checks; that counts as `ok`.
#[derive(Serialize)]
pub struct CheckOutcome {
    pub expected_pass: bool,
    pub ok: bool,
    #[serde(flatten)]
    pub report: ExactReport,
}

impl CheckOutcome {
    pub fn new(report: ExactReport, expected_pass: bool) -> CheckOutcome {
        CheckOutcome {
            expected_pass,
            ok: report.pass == expected_pass,
            report,
        }
    }
}

/// A Monte Carlo outcome with its expectation.
#[derive(Serialize)]
pub struct McOutcome {
    pub expected_pass: bool,
    pub ok: bool,
    #[serde(flatten)]
    pub report: TestReport,
}

impl McOutcome {
    pub fn new(report: TestReport, expected_pass: bool) -> McOutcome {
        McOutcome {
            expected_pass,
            ok: report.pass == expected_pass,
            report,
        }
    }
}

pub fn render_check_table(outcomes: &[CheckOutcome]) -> String {
    let mut out = String::new();
    for oc in outcomes {
        let status = if oc.ok { "ok  " } else { "FAIL" };
        let expectation = if oc.expected_pass {
            ""
        } else {
            " (negative control)"
        };
        out.push_str(&format!(
            "{status} {}{expectation}: lhs = {}, rhs = {}\n",
            oc.report.claim, oc.report.lhs, oc.report.rhs
        ));
        if let Some(w) = &oc.report.witness {
            out.push_str(&format!("     witness: {}\n", w.detail));
        }
    }
    out
}

pub fn render_mc_table(outcomes: &[McOutcome]) -> String {
    let mut out = String::new();
    for oc in outcomes {
        let status = if oc.ok { "ok  " } else { "FAIL" };
        let expectation = if oc.expected_pass {
            ""
        } else {
            " (negative control)"
        };
        out.push_str(&format!("{status} {}{expectation}", oc.report.test_name));
        if let Some(est) = oc.report.estimate {
            out.push_str(&format!(": estimate {est:.6}"));
            if let Some(t) = oc.report.target {
                out.push_str(&format!(" vs target {t:.6}"));
            }
            if let Some(se) = oc.report.std_error {
                out.push_str(&format!(" (se {se:.2e})"));
            }
        }
        if let Some(p) = oc.report.p_value {
            out.push_str(&format!(", p = {p:.4e}"));
        }
        out.push('\n');
    }
    out
}

pub fn render_check_csv(outcomes: &[CheckOutcome]) -> String {
    let mut out = String::from("claim,pass,expected_pass,ok,lhs,rhs,witness\n");
    for oc in outcomes {
        let witness = oc
            .report
            .witness
            .as_ref()
            .map(|w| w.detail.clone())
            .unwrap_or_default();
        out.push_str(&format!(
            "{:?},{},{},{},{},{},{witness:?}\n",
            oc.report.claim, oc.report.pass, oc.expected_pass, oc.ok, oc.report.lhs, oc.report.rhs
        ));
    }
    out
}

pub fn render_mc_csv(outcomes: &[McOutcome]) -> String {
    let mut out = String::from(
        "test_name,pass,expected_pass,ok,sample_size,estimate,target,std_error,statistic,df,p_value\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for oc in outcomes {
        let r = &oc.report;
        out.push_str(&format!(
            "{:?},{},{},{},{},{},{},{},{},{},{}\n",
            r.test_name,
            r.pass,
            oc.expected_pass,
            oc.ok,
            r.sample_size,
            opt(r.estimate),
            opt(r.target),
            opt(r.std_error),
            opt(r.statistic),
            r.df.map(|d| d.to_string()).unwrap_or_default(),
            opt(r.p_value),
        ));
    }
    out
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

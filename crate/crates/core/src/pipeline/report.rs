//! Report rendering: one CSV row per grid cell and one markdown table per
//! regime, metrics at 4 decimal places.

use std::path::Path;

use super::{CellOutcome, ExperimentReport, PipelineError};

pub struct ReportFiles {
    pub csv: String,
    pub markdown: String,
}

pub fn render_report(report: &ExperimentReport) -> Result<ReportFiles, PipelineError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["model", "regime", "f1", "recall", "precision", "auc_roc", "error"])?;
    for cell in &report.cells {
        match cell {
            CellOutcome::Ok(m) => writer.write_record([
                m.model_name.as_str(),
                m.regime_name.as_str(),
                &format!("{:.4}", m.f1),
                &format!("{:.4}", m.recall),
                &format!("{:.4}", m.precision),
                &format!("{:.4}", m.auc),
                "",
            ])?,
            CellOutcome::Failed {
                model_name,
                regime_name,
                error,
            } => writer.write_record([
                model_name.as_str(),
                regime_name.as_str(),
                "",
                "",
                "",
                "",
                error.as_str(),
            ])?,
        }
    }
    let csv = String::from_utf8(writer.into_inner().map_err(|e| e.into_error())?)
        .expect("csv output is utf-8");

    let mut md = String::new();
    md.push_str("# Experiment report\n\n");
    md.push_str(&format!(
        "seed: {}  \nconfig: {}\n",
        report.seed, report.config_hash
    ));
    let mut regimes: Vec<&str> = Vec::new();
    for cell in &report.cells {
        if !regimes.contains(&cell.regime_name()) {
            regimes.push(cell.regime_name());
        }
    }
    for regime in regimes {
        md.push_str(&format!("\n## Regime: {regime}\n\n"));
        md.push_str("| Model | F1 | Recall | Precision | AUC-ROC |\n");
        md.push_str("|---|---|---|---|---|\n");
        for cell in report.cells.iter().filter(|c| c.regime_name() == regime) {
            match cell {
                CellOutcome::Ok(m) => md.push_str(&format!(
                    "| {} | {:.4} | {:.4} | {:.4} | {:.4} |\n",
                    m.model_name, m.f1, m.recall, m.precision, m.auc
                )),
                CellOutcome::Failed {
                    model_name, error, ..
                } => md.push_str(&format!("| {model_name} | error | | | {error} |\n")),
            }
        }
    }
    Ok(ReportFiles { csv, markdown: md })
}

/// Writes `report.csv`, `report.md`, and `run_info.json` under `out_dir`,
/// creating it if needed. The timestamp lives only in `run_info.json` so the
/// CSV stays byte-identical across reruns of the same seeded config.
pub fn write_report(report: &ExperimentReport, out_dir: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(out_dir)?;
    let files = render_report(report)?;
    std::fs::write(out_dir.join("report.csv"), files.csv)?;
    std::fs::write(out_dir.join("report.md"), files.markdown)?;
    let run_info = serde_json::json!({
        "seed": report.seed,
        "config_hash": report.config_hash,
        "timestamp_unix": report.timestamp_unix,
        "cells": report.cells.len(),
        "failed": report.n_failed(),
    });
    std::fs::write(
        out_dir.join("run_info.json"),
        serde_json::to_string_pretty(&run_info)?,
    )?;
    Ok(())
}

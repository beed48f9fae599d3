//! `report.json`, `rows.csv` and `plotdata/*.csv`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::annulus::AnnulusTable;
use super::pipeline::AnalysisReport;
use super::sweep::SweepResult;
use crate::error::Result;

pub const ROW_COLUMNS: [&str; 10] = [
    "scenario",
    "param",
    "delta",
    "cs_deficit",
    "serrin_deficit",
    "fi_residual",
    "m",
    "sym_diff",
    "hausdorff",
    "perim_diff",
];

/// One flat CSV row; absent quantities are left empty.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub scenario: String,
    pub param: Option<f64>,
    pub delta: Option<f64>,
    pub cs_deficit: Option<f64>,
    pub serrin_deficit: Option<f64>,
    pub fi_residual: Option<f64>,
    pub m: Option<usize>,
    pub sym_diff: Option<f64>,
    pub hausdorff: Option<f64>,
    pub perim_diff: Option<f64>,
}

impl Row {
    pub fn from_analysis(r: &AnalysisReport) -> Row {
        let ids = r.identities.as_ref().map(|i| &i.deficits);
        let dec = r.decomposition.as_ref();
        Row {
            scenario: r.scenario.clone(),
            param: r.param,
            delta: Some(r.summary.delta),
            cs_deficit: ids.map(|d| d.cs_deficit),
            serrin_deficit: ids.map(|d| d.serrin_deficit),
            fi_residual: ids.map(|d| d.fi_residual),
            m: dec.map(|d| d.m),
            sym_diff: dec.map(|d| d.metrics.sym_diff),
            hausdorff: dec.map(|d| d.metrics.hausdorff),
            perim_diff: dec.map(|d| d.metrics.perim_diff),
        }
    }
}

/// Everything a command produces.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Output {
    Analyze { reports: Vec<AnalysisReport> },
    Identity { reports: Vec<AnalysisReport> },
    Sweep { scenario: String, sweep: SweepResult },
    Annulus { scenario: String, table: AnnulusTable },
}

impl Output {
    pub fn rows(&self) -> Vec<Row> {
        match self {
            Output::Analyze { reports } | Output::Identity { reports } => reports.iter().map(Row::from_analysis).collect(),
            Output::Sweep { sweep, .. } => sweep.reports.iter().map(Row::from_analysis).collect(),
            Output::Annulus { scenario, table } => table
                .rows
                .iter()
                .map(|r| Row {
                    scenario: scenario.clone(),
                    param: Some(r.epsilon),
                    delta: Some(r.delta),
                    ..Default::default()
                })
                .collect(),
        }
    }

    /// Every recorded check failure.
    pub fn violations(&self) -> Vec<String> {
        match self {
            Output::Analyze { reports } | Output::Identity { reports } => {
                reports.iter().flat_map(|r| r.violations.iter().map(move |v| format!("{}: {v}", r.scenario))).collect()
            }
            Output::Sweep { sweep, .. } => sweep
                .reports
                .iter()
                .flat_map(|r| r.violations.iter().map(move |v| format!("{}: {v}", r.scenario)))
                .collect(),
            Output::Annulus { .. } => vec![],
        }
    }
}

fn fmt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn write_rows<W: std::io::Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ROW_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            fmt(r.param),
            fmt(r.delta),
            fmt(r.cs_deficit),
            fmt(r.serrin_deficit),
            fmt(r.fi_residual),
            r.m.map(|m| m.to_string()).unwrap_or_default(),
            fmt(r.sym_diff),
            fmt(r.hausdorff),
            fmt(r.perim_diff),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_table<W: std::io::Write>(header: &[&str], rows: &[Vec<f64>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|x| format!("{x:e}")))?;
    }
    w.flush()?;
    Ok(())
}

fn safe_name(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' }).collect()
}

fn plotdata(output: &Output, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = vec![];
    let mut put = |name: String, header: &[&str], rows: Vec<Vec<f64>>| -> Result<()> {
        let p = dir.join(safe_name(&name));
        write_table(header, &rows, fs::File::create(&p)?)?;
        written.push(p);
        Ok(())
    };
    let analyses: &[AnalysisReport] = match output {
        Output::Analyze { reports } | Output::Identity { reports } => reports,
        Output::Sweep { sweep, .. } => &sweep.reports,
        Output::Annulus { .. } => &[],
    };
    for r in analyses {
        if let Some(t) = &r.tubular {
            let rows = t.reports.iter().map(|t| vec![t.eta, t.measured, t.bound, t.ratio]).collect();
            put(format!("tubular_{}.csv", r.scenario), &["eta", "measured", "bound", "ratio"], rows)?;
        }
        let curv = r.summary.curvature_measure.iter().map(|&(h, w)| vec![h, w]).collect();
        put(format!("curvature_{}.csv", r.scenario), &["H", "weight"], curv)?;
    }
    match output {
        Output::Sweep { scenario, sweep } => {
            let rows = sweep
                .rows
                .iter()
                .map(|r| vec![r.param, r.delta, r.sym_diff, r.hausdorff, r.perim_diff, r.m as f64, r.radius_err_max])
                .collect();
            put(
                format!("sweep_{scenario}.csv"),
                &["param", "delta", "sym_diff", "hausdorff", "perim_diff", "m", "radius_err_max"],
                rows,
            )?;
        }
        Output::Annulus { scenario, table } => {
            let rows = table
                .rows
                .iter()
                .map(|r| vec![r.epsilon, r.delta, r.m0_minus, r.r, r.radius_gap_lower, r.hole_volume, r.radius_bound])
                .collect();
            put(
                format!("annulus_{scenario}.csv"),
                &["epsilon", "delta", "m0_minus", "R", "radius_gap_lower", "hole_volume", "radius_bound"],
                rows,
            )?;
        }
        _ => {}
    }
    Ok(written)
}

/// Write `report.json`, `rows.csv` and `plotdata/` under `dir`.
pub fn emit_report(output: &Output, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("plotdata"))?;
    let json = serde_json::to_string_pretty(output)?;
    fs::write(dir.join("report.json"), json + "\n")?;
    write_rows(&output.rows(), fs::File::create(dir.join("rows.csv"))?)?;
    plotdata(output, &dir.join("plotdata"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_results_give_header_only() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(&Output::Analyze { reports: vec![] }, dir.path()).unwrap();
        let csv = fs::read_to_string(dir.path().join("rows.csv")).unwrap();
        assert_eq!(csv, ROW_COLUMNS.join(",") + "\n");
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(v["kind"], "analyze");
    }
}

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::registry::ExperimentKind;

/// How a row's value is compared with its tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Below,
    AtMost,
    AtLeast,
    Above,
    /// Recorded without a tolerance.
    Info,
}

impl Relation {
    pub fn holds(self, value: f64, tolerance: f64) -> bool {
        match self {
            Relation::Below => value < tolerance,
            Relation::AtMost => value <= tolerance,
            Relation::AtLeast => value >= tolerance,
            Relation::Above => value > tolerance,
            Relation::Info => true,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Below => "<",
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Above => ">",
            Relation::Info => "",
        }
    }
}

/// One statistic at one parameter point. Rows are built through the
/// constructors, so `pass` always agrees with `relation(value, tolerance)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: ExperimentKind,
    pub parameter: String,
    pub statistic: String,
    pub value: f64,
    pub error_bar: Option<f64>,
    pub relation: Relation,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl ReportRow {
    pub fn check(
        experiment: ExperimentKind,
        parameter: impl Into<String>,
        statistic: impl Into<String>,
        value: f64,
        relation: Relation,
        tolerance: f64,
    ) -> Self {
        ReportRow {
            experiment,
            parameter: parameter.into(),
            statistic: statistic.into(),
            value,
            error_bar: None,
            relation,
            tolerance: (relation != Relation::Info).then_some(tolerance),
            pass: relation.holds(value, tolerance),
        }
    }

    pub fn info(
        experiment: ExperimentKind,
        parameter: impl Into<String>,
        statistic: impl Into<String>,
        value: f64,
    ) -> Self {
        Self::check(experiment, parameter, statistic, value, Relation::Info, 0.0)
    }

    pub fn with_error_bar(mut self, e: f64) -> Self {
        self.error_bar = Some(e);
        self
    }

    pub fn is_consistent(&self) -> bool {
        match self.tolerance {
            Some(t) => self.pass == self.relation.holds(self.value, t),
            None => self.pass && self.relation == Relation::Info,
        }
    }
}

/// A plot-ready CSV file.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotData {
    pub file_name: String,
    pub contents: Vec<u8>,
}

impl PlotData {
    pub fn table(file_name: &str, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        Ok(PlotData {
            file_name: file_name.to_string(),
            contents: w.into_inner().map_err(|e| e.into_error())?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    /// Experiment-specific structured results for the JSON summary.
    pub details: serde_json::Value,
    pub plots: Vec<PlotData>,
}

/// `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub pass: bool,
    pub checks: usize,
    pub failures: Vec<ReportRow>,
    pub files: Vec<String>,
    pub details: serde_json::Value,
}

pub const REPORT_FILE: &str = "report.csv";
pub const SUMMARY_FILE: &str = "summary.json";

impl Report {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn summary(&self) -> Summary {
        let mut files = vec![REPORT_FILE.to_string(), SUMMARY_FILE.to_string()];
        files.extend(self.plots.iter().map(|p| p.file_name.clone()));
        Summary {
            experiment: self.experiment,
            seed: self.seed,
            pass: self.pass(),
            checks: self.rows.iter().filter(|r| r.tolerance.is_some()).count(),
            failures: self.failures().cloned().collect(),
            files,
            details: self.details.clone(),
        }
    }

    pub fn report_csv(&self) -> std::io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "experiment",
            "parameter",
            "statistic",
            "value",
            "error_bar",
            "relation",
            "tolerance",
            "pass",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.experiment.name().to_string(),
                r.parameter.clone(),
                r.statistic.clone(),
                r.value.to_string(),
                opt(r.error_bar),
                r.relation.symbol().to_string(),
                opt(r.tolerance),
                r.pass.to_string(),
            ])?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }

    /// Writes `report.csv`, `summary.json` and the plot files into `dir`,
    /// in that order, creating the directory when needed.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(REPORT_FILE), self.report_csv()?)?;
        let mut json = serde_json::to_vec_pretty(&self.summary())?;
        json.push(b'\n');
        fs::write(dir.join(SUMMARY_FILE), json)?;
        for p in &self.plots {
            fs::write(dir.join(&p.file_name), &p.contents)?;
        }
        Ok(())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} (seed {})", self.experiment, self.seed)?;
        for r in self.rows.iter().filter(|r| r.tolerance.is_some()) {
            writeln!(
                f,
                "  {} {:<34} {:<30} {:>12.6} {:<2} {:<8} {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.parameter,
                r.statistic,
                r.value,
                r.relation.symbol(),
                r.tolerance.map(|t| t.to_string()).unwrap_or_default(),
                r.error_bar.map(|e| format!("(± {e:.2e})")).unwrap_or_default(),
            )?;
        }
        write!(f, "overall: {}", if self.pass() { "PASS" } else { "FAIL" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const K: ExperimentKind = ExperimentKind::TorusSweep;

    #[test]
    fn pass_flags_follow_relations() {
        assert!(ReportRow::check(K, "a", "s", 0.04, Relation::Below, 0.05).pass);
        assert!(!ReportRow::check(K, "a", "s", 0.05, Relation::Below, 0.05).pass);
        assert!(ReportRow::check(K, "a", "s", 0.05, Relation::AtMost, 0.05).pass);
        assert!(!ReportRow::check(K, "a", "s", 0.8, Relation::AtLeast, 0.9).pass);
        assert!(!ReportRow::check(K, "a", "s", f64::NAN, Relation::AtLeast, 0.9).pass);
        let info = ReportRow::info(K, "a", "s", 3.0);
        assert!(info.pass && info.tolerance.is_none() && info.is_consistent());
    }

    #[test]
    fn csv_and_summary_layout() {
        let report = Report {
            experiment: K,
            seed: 7,
            rows: vec![
                ReportRow::check(K, "alpha=80", "max_abs_coeff", 0.01, Relation::Below, 0.05).with_error_bar(0.5),
                ReportRow::check(K, "alpha=100", "max_abs_coeff", 0.07, Relation::Below, 0.05),
            ],
            details: serde_json::json!({"n": 1}),
            plots: vec![PlotData::table("p.csv", &["x"], &[vec!["1".into()]]).unwrap()],
        };
        let text = String::from_utf8(report.report_csv().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "experiment,parameter,statistic,value,error_bar,relation,tolerance,pass"
        );
        assert_eq!(lines.next().unwrap(), "torus_sweep,alpha=80,max_abs_coeff,0.01,0.5,<,0.05,true");
        let s = report.summary();
        assert!(!s.pass);
        assert_eq!(s.checks, 2);
        assert_eq!(s.failures.len(), 1);
        assert_eq!(s.files, vec!["report.csv", "summary.json", "p.csv"]);
    }
}

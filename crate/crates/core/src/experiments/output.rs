use std::io::Write;

use serde::Serialize;

use super::{ExperimentReport, Records, SweepPoints, SweepReport};
use crate::error::{Error, Result};

/// `json`: one document with config, stats, metrics, gates and records.
/// `jsonl`: one record per line. `csv`: one record per row, header taken
/// from the record's field names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Jsonl,
    Csv,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "jsonl" => Ok(Self::Jsonl),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

pub(crate) fn write_rows<T: Serialize, W: Write>(rows: &[T], format: OutputFormat, w: &mut W) -> Result<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *w, rows)?;
            writeln!(w)?;
        }
        OutputFormat::Jsonl => {
            for row in rows {
                serde_json::to_writer(&mut *w, row)?;
                writeln!(w)?;
            }
        }
        OutputFormat::Csv => {
            let mut csv = csv::Writer::from_writer(&mut *w);
            for row in rows {
                csv.serialize(row)?;
            }
            csv.flush()?;
        }
    }
    Ok(())
}

pub fn write_records<W: Write>(records: &Records, format: OutputFormat, w: &mut W) -> Result<()> {
    match records {
        Records::Game(v) => write_rows(v, format, w),
        Records::BiggestCell(v) => write_rows(v, format, w),
        Records::ManyLarge(v) => write_rows(v, format, w),
        Records::Center(v) => write_rows(v, format, w),
        Records::BallsBins(v) => write_rows(v, format, w),
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a super::ExperimentConfig,
    stats: &'a std::collections::BTreeMap<String, super::SummaryStats>,
    metrics: &'a std::collections::BTreeMap<String, f64>,
    gates: &'a [super::Gate],
}

/// The report without its per-trial records.
pub fn summary_json(report: &ExperimentReport) -> Result<String> {
    let s = Summary { config: &report.config, stats: &report.stats, metrics: &report.metrics, gates: &report.gates };
    Ok(serde_json::to_string_pretty(&s)?)
}

pub fn write_report<W: Write>(report: &ExperimentReport, format: OutputFormat, w: &mut W) -> Result<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *w, report)?;
            writeln!(w)?;
            Ok(())
        }
        _ => write_records(&report.records, format, w),
    }
}

pub fn write_sweep<W: Write>(report: &SweepReport, format: OutputFormat, w: &mut W) -> Result<()> {
    match (format, &report.points) {
        (OutputFormat::Json, _) => {
            serde_json::to_writer_pretty(&mut *w, report)?;
            writeln!(w)?;
            Ok(())
        }
        (_, SweepPoints::Game(p)) => write_rows(p, format, w),
        (_, SweepPoints::Beta(p)) => write_rows(p, format, w),
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    #[test]
    fn csv_header_is_fixed() {
        let report = run_experiment(&ExperimentConfig::new(ExperimentKind::Game, 40, 3)).unwrap();
        let mut buf = Vec::new();
        write_report(&report, OutputFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "n,seed,chosen_index,triggered,trigger_radius,disk_hits,player_area,prophet_area,prophet_index,mean_area"
        );
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn jsonl_lines_parse_back() {
        let report = run_experiment(&ExperimentConfig::new(ExperimentKind::Game, 40, 4)).unwrap();
        let mut buf = Vec::new();
        write_report(&report, OutputFormat::Jsonl, &mut buf).unwrap();
        let parsed: Vec<crate::game::TrialResult> =
            String::from_utf8(buf).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        let Records::Game(trials) = &report.records else { panic!() };
        assert_eq!(&parsed, trials);
    }

    #[test]
    fn json_report_shape() {
        let report = run_experiment(&ExperimentConfig::new(ExperimentKind::BallsBins, 5000, 2)).unwrap();
        let mut buf = Vec::new();
        write_report(&report, OutputFormat::Json, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        for key in ["config", "stats", "metrics", "gates", "records"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v["config"].get("threads").is_none());
        let gate = &v["gates"][0];
        for key in ["name", "value", "threshold", "pass"] {
            assert!(gate.get(key).is_some());
        }
        let summary: serde_json::Value = serde_json::from_str(&summary_json(&report).unwrap()).unwrap();
        assert!(summary.get("records").is_none());
    }
}

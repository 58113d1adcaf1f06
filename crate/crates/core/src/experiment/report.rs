use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use super::config::ExperimentConfig;
use super::run::{ExperimentReport, ReportRow, ThresholdSamples};
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 12] = [
    "t",
    "r_t",
    "p_hat",
    "std_err",
    "limit_prob",
    "abs_error",
    "mean_F",
    "F_std_err",
    "predicted_mean_F",
    "ks_stat",
    "wall_time_s",
    "degenerate_resamples",
];

const CONFIG_PREFIX: &str = "# config: ";

/// One header comment holding the resolved configuration, the column line,
/// then one line per `t`. Absent values are empty fields.
pub fn to_csv(report: &ExperimentReport) -> Result<String> {
    let mut out = format!("{CONFIG_PREFIX}{}\n", serde_json::to_string(&report.config)?).into_bytes();
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
        w.write_record(CSV_COLUMNS).map_err(csv_error)?;
        for r in &report.rows {
            w.serialize(r).map_err(csv_error)?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(out).expect("csv output is UTF-8"))
}

/// The CSV without its configuration comment: the part that a re-run with
/// the echoed configuration reproduces byte for byte.
pub fn csv_body(csv: &str) -> &str {
    match csv.strip_prefix(CONFIG_PREFIX) {
        Some(rest) => rest.split_once('\n').map_or("", |(_, body)| body),
        None => csv,
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Config(format!("line {}: {e}", p.line())),
        None => Error::Config(e.to_string()),
    }
}

/// Parses CSV written by [`to_csv`], returning the echoed configuration when
/// present. Other `#` lines are comments.
pub fn parse_csv(text: &str) -> Result<(Option<ExperimentConfig>, Vec<ReportRow>)> {
    let config = match text.strip_prefix(CONFIG_PREFIX) {
        Some(rest) => Some(
            serde_json::from_str(rest.lines().next().unwrap_or(""))
                .map_err(|e| Error::Config(format!("line 1: {e}")))?,
        ),
        None => None,
    };
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_error)?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::Config(format!("unexpected CSV header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let rows = r.deserialize().collect::<std::result::Result<Vec<ReportRow>, _>>().map_err(csv_error)?;
    Ok((config, rows))
}

pub fn to_json(report: &ExperimentReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(text: &str) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(text)?)
}

/// Threshold samples as one value per line, each `t` introduced by a
/// `# t=<value>` line.
pub fn samples_to_text(samples: &[ThresholdSamples]) -> String {
    let mut s = String::new();
    for block in samples {
        writeln!(s, "# t={} ks_stat={}", block.t, block.ks_stat).expect("string write");
        for v in &block.values {
            writeln!(s, "{v}").expect("string write");
        }
    }
    s
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RadiusLaw, ScalingSchedule, ScheduleVariant};

    fn report() -> ExperimentReport {
        let s = ScalingSchedule::new(2, 1, 0.0, ScheduleVariant::Corrected).unwrap();
        let row = |t: f64, f: Option<f64>| ReportRow {
            t,
            r_t: 0.1 / 3.0,
            p_hat: 0.25,
            std_err: 0.1,
            limit_prob: (-1.0f64).exp(),
            abs_error: 0.117_879,
            mean_f: f,
            f_std_err: f.map(|x| x / 10.0),
            predicted_mean_f: 1.0,
            ks_stat: None,
            wall_time_s: 0.0,
            degenerate_resamples: 3,
        };
        ExperimentReport {
            config: ExperimentConfig::new(s, RadiusLaw::Deterministic(1.0), vec![1e3, 1e4], 8, 5),
            rows: vec![row(1e3, None), row(1e4, Some(1.125))],
            rate_fit: None,
            warnings: vec![],
            threshold_samples: vec![],
        }
    }

    #[test]
    fn csv_round_trip() {
        let r = report();
        let csv = to_csv(&r).unwrap();
        assert!(csv.lines().nth(1).unwrap() == CSV_COLUMNS.join(","));
        assert!(csv.contains("1000.0,0.03333333333333333,0.25,0.1,"));
        let (cfg, rows) = parse_csv(&csv).unwrap();
        assert_eq!(cfg.unwrap(), r.config);
        assert_eq!(rows, r.rows);
        assert!(csv_body(&csv).starts_with("t,r_t"));
    }

    #[test]
    fn json_round_trip() {
        let r = report();
        let js = to_json(&r).unwrap();
        assert!(js.contains("\"mean_F\": null") && js.contains("\"F_std_err\""));
        assert_eq!(parse_json(&js).unwrap(), r);
    }

    #[test]
    fn rejects_malformed_csv() {
        assert!(parse_csv("a,b\n").is_err());
        assert!(parse_csv("").is_err());
        let bad_row = format!("{}\n1,2\n", CSV_COLUMNS.join(","));
        let err = parse_csv(&bad_row).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn samples_text() {
        let s = samples_to_text(&[ThresholdSamples {
            t: 100.0,
            values: vec![0.5, f64::INFINITY],
            ks_stat: 0.25,
        }]);
        assert_eq!(s, "# t=100 ks_stat=0.25\n0.5\ninf\n");
    }
}

use std::io::{Read, Write};

use serde::Serialize;

use super::aggregate::AggregateRow;
use super::band::Classification;
use super::config::ExperimentConfig;
use super::sweep::{StatRecord, SweepResult};
use crate::error::{Error, Result};
use crate::simulator::bitstring;

/// Record columns in file order.
pub const CSV_COLUMNS: [&str; 14] = [
    "epsilon",
    "theta0",
    "phi0",
    "shots",
    "p_ideal",
    "p_est",
    "sigma",
    "band_lo",
    "band_hi",
    "classification",
    "theta1_ideal",
    "theta1_est",
    "seed",
    "outcomes",
];

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::MalformedCsv {
        line,
        message: e.to_string(),
    }
}

/// `00=0.25;01=0.25;...`; empty when no distribution is stored.
pub fn format_outcomes(p: &[f64]) -> String {
    let width = p.len().trailing_zeros() as usize;
    p.iter()
        .enumerate()
        .map(|(i, v)| format!("{}={v}", bitstring(i, width)))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn parse_outcomes(s: &str) -> std::result::Result<Vec<f64>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (i, item) in s.split(';').enumerate() {
        let (k, v) = item.split_once('=').ok_or_else(|| format!("outcome entry {item:?} lacks '='"))?;
        let width = k.len();
        if usize::from_str_radix(k, 2).ok() != Some(i) || width == 0 {
            return Err(format!("outcome key {k:?} out of order"));
        }
        out.push(v.parse::<f64>().map_err(|e| format!("outcome {k}: {e}"))?);
    }
    if !out.len().is_power_of_two() {
        return Err(format!("{} outcomes is not a power of two", out.len()));
    }
    Ok(out)
}

fn record_fields(r: &StatRecord) -> [String; 14] {
    [
        r.epsilon.to_string(),
        r.theta0.to_string(),
        r.phi0.to_string(),
        r.shots.to_string(),
        r.p_ideal.to_string(),
        r.p_est.to_string(),
        r.sigma.to_string(),
        r.band_lo.to_string(),
        r.band_hi.to_string(),
        r.classification.as_str().to_string(),
        r.theta1_ideal.to_string(),
        r.theta1_est.map(|t| t.to_string()).unwrap_or_default(),
        r.seed.to_string(),
        format_outcomes(&r.outcomes),
    ]
}

pub fn write_records_csv<W: Write>(records: &[StatRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::CsvWrite(e.to_string());
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in records {
        w.write_record(record_fields(r)).map_err(io)?;
    }
    w.flush().map_err(|e| Error::CsvWrite(e.to_string()))?;
    Ok(())
}

pub fn records_to_csv_string(records: &[StatRecord]) -> String {
    let mut buf = Vec::new();
    write_records_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

/// Reads records written by [`write_records_csv`]. Columns are matched by name, so
/// extra columns are ignored.
pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<StatRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers().map_err(csv_err)?.clone();
    let mut idx = [0usize; 14];
    for (slot, name) in idx.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers.iter().position(|h| h == name).ok_or_else(|| Error::MalformedCsv {
            line: 1,
            message: format!("missing column {name:?}"),
        })?;
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |col: &str, msg: String| Error::MalformedCsv {
            line,
            message: format!("column {col}: {msg}"),
        };
        let field = |k: usize| row.get(idx[k]).unwrap_or("");
        let float = |k: usize| -> Result<f64> {
            field(k)
                .parse::<f64>()
                .map_err(|e| bad(CSV_COLUMNS[k], format!("{:?}: {e}", field(k))))
        };
        let int = |k: usize| -> Result<u64> {
            field(k)
                .parse::<u64>()
                .map_err(|e| bad(CSV_COLUMNS[k], format!("{:?}: {e}", field(k))))
        };
        let classification = Classification::parse(field(9))
            .ok_or_else(|| bad("classification", format!("unknown value {:?}", field(9))))?;
        let theta1_est = match field(11) {
            "" => None,
            _ => Some(float(11)?),
        };
        out.push(StatRecord {
            epsilon: float(0)?,
            theta0: float(1)?,
            phi0: float(2)?,
            shots: int(3)?,
            p_ideal: float(4)?,
            p_est: float(5)?,
            sigma: float(6)?,
            band_lo: float(7)?,
            band_hi: float(8)?,
            classification,
            theta1_ideal: float(10)?,
            theta1_est,
            seed: int(12)?,
            outcomes: parse_outcomes(field(13)).map_err(|m| bad("outcomes", m))?,
        });
    }
    Ok(out)
}

/// Structured summary of a sweep; contains no wall-clock data so it is reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary<'a> {
    pub toolkit_version: &'a str,
    pub config: &'a ExperimentConfig,
    pub record_count: usize,
    pub device_error_count: usize,
    pub device_error_fraction: f64,
    pub theta1_missing: usize,
    pub aggregates: &'a [AggregateRow],
}

impl SweepResult {
    pub fn summary(&self) -> SweepSummary<'_> {
        let errors = self
            .records
            .iter()
            .filter(|r| r.classification == Classification::DeviceError)
            .count();
        SweepSummary {
            toolkit_version: self.toolkit_version,
            config: &self.config,
            record_count: self.records.len(),
            device_error_count: errors,
            device_error_fraction: errors as f64 / self.records.len().max(1) as f64,
            theta1_missing: self.records.iter().filter(|r| r.theta1_est.is_none()).count(),
            aggregates: &self.aggregates,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{run_sweep, ExperimentConfig, ThetaGrid};

    fn cfg() -> ExperimentConfig {
        ExperimentConfig {
            epsilon: vec![0.7],
            theta0: ThetaGrid {
                count: 3,
                start: 0.0,
                end: 3.0,
            },
            shots: 64,
            phi0: crate::stats::PhiPolicy {
                count: 2,
                ..Default::default()
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn csv_round_trip() {
        let r = run_sweep(&cfg()).unwrap();
        let text = records_to_csv_string(&r.records);
        assert!(text.starts_with("epsilon,theta0,phi0,shots,p_ideal,p_est,sigma,band_lo,band_hi,classification,theta1_ideal,theta1_est,seed,outcomes\n"));
        let back = read_records_csv(text.as_bytes()).unwrap();
        assert_eq!(back, r.records);
    }

    #[test]
    fn malformed_csv_reports_line() {
        let r = run_sweep(&cfg()).unwrap();
        let text = records_to_csv_string(&r.records);
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[3] = lines[3].replacen("0.7", "zero-point-seven", 1);
        let broken = lines.join("\n");
        match read_records_csv(broken.as_bytes()) {
            Err(Error::MalformedCsv { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            read_records_csv("a,b\n1,2\n".as_bytes()),
            Err(Error::MalformedCsv { line: 1, .. })
        ));
    }

    #[test]
    fn outcome_format() {
        assert_eq!(format_outcomes(&[0.5, 0.0, 0.25, 0.25]), "00=0.5;01=0;10=0.25;11=0.25");
        assert_eq!(parse_outcomes("00=0.5;01=0;10=0.25;11=0.25").unwrap(), vec![0.5, 0.0, 0.25, 0.25]);
        assert!(parse_outcomes("01=0.5;00=0.5").is_err());
        assert_eq!(format_outcomes(&[]), "");
    }

    #[test]
    fn summary_counts() {
        let r = run_sweep(&cfg()).unwrap();
        let s = r.summary();
        assert_eq!(s.record_count, 6);
        assert_eq!(s.aggregates.len(), 3);
    }
}

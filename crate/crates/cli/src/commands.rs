use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use qsmatch_core::kak::{synthesize_u_epsilon, verify_decomposition, SYNTHESIS_TOL};
use qsmatch_core::mitigation::{build_confusion, mitigate, run_calibration, ConfusionMatrix, DEFAULT_CALIBRATION_SHOTS};
use qsmatch_core::simulator::{theta1_from_weights, NoiseSpec};
use qsmatch_core::stats::{derive_seed, parse_outcomes, run_sweep, write_records_csv, ExperimentConfig};
use qsmatch_core::{build_u_epsilon, Epsilon};
use serde::Serialize;

use crate::config::{config_hash, load_config};
use crate::error::{CliError, Result};
use crate::manifest::{write_json, RunManifest};

const CALIBRATION_STREAM: u64 = 3;

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub struct DecomposeReport {
    pub path: PathBuf,
    pub residual: f64,
    pub cnot_count: usize,
}

pub fn decompose(epsilon: f64, out_dir: &Path) -> Result<DecomposeReport> {
    let eps = Epsilon::new(epsilon).map_err(|e| CliError::Usage(e.to_string()))?;
    let seq = synthesize_u_epsilon(eps)?;
    let residual = verify_decomposition(&seq, &build_u_epsilon(eps));
    create_dir(out_dir)?;
    let path = out_dir.join(format!("gates-eps-{epsilon}.json"));
    write_json(&path, &seq)?;
    #[derive(Serialize)]
    struct Params {
        epsilon: f64,
    }
    let mut manifest = RunManifest::new("decompose", config_hash(&Params { epsilon }), None, out_dir);
    manifest.artifacts.push(path.clone());
    manifest.write()?;
    if residual > SYNTHESIS_TOL {
        return Err(CliError::Residual(residual));
    }
    Ok(DecomposeReport {
        path,
        residual,
        cnot_count: seq.cnot_count,
    })
}

/// Two-qubit noise seen by the calibration runs: the settings of qubits 0 and 1.
fn pair_noise(noise: &NoiseSpec) -> NoiseSpec {
    let readout = if noise.has_readout() {
        (0..2)
            .map(|q| {
                let m = noise.readout_matrix(q).expect("readout present");
                [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
            })
            .collect()
    } else {
        Vec::new()
    };
    NoiseSpec {
        readout,
        damping: (0..2).map(|q| noise.damping_for(q)).collect(),
        prep_overrotation: 0.0,
    }
}

pub struct SweepOptions<'a> {
    pub config: &'a Path,
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub out_dir: &'a Path,
}

pub struct SweepReport {
    pub records: usize,
    pub device_errors: usize,
    pub artifacts: Vec<PathBuf>,
}

pub fn sweep(opts: &SweepOptions) -> Result<SweepReport> {
    let mut config: ExperimentConfig = load_config(opts.config)?;
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    if let Some(shots) = opts.shots {
        config.shots = shots;
    }
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let result = run_sweep(&config)?;

    create_dir(opts.out_dir)?;
    let csv_path = opts.out_dir.join("sweep.csv");
    write_records_csv(&result.records, create_file(&csv_path)?)?;
    let summary_path = opts.out_dir.join("summary.json");
    let summary = result.summary();
    write_json(&summary_path, &summary)?;

    let calibration = run_calibration(
        &pair_noise(&config.noise),
        DEFAULT_CALIBRATION_SHOTS,
        derive_seed(config.seed, CALIBRATION_STREAM, 0),
    )?;
    let confusion_path = opts.out_dir.join("confusion.json");
    write_json(&confusion_path, &build_confusion(&calibration)?)?;

    let mut manifest = RunManifest::new("sweep", config_hash(&config), Some(opts.config), opts.out_dir);
    manifest.artifacts = vec![csv_path, summary_path, confusion_path];
    let manifest_path = manifest.write()?;
    let mut artifacts = manifest.artifacts;
    artifacts.push(manifest_path);
    Ok(SweepReport {
        records: summary.record_count,
        device_errors: summary.device_error_count,
        artifacts,
    })
}

pub fn read_confusion(path: &Path) -> Result<ConfusionMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(path, e))
}

pub struct MitigateReport {
    pub path: PathBuf,
    pub rows: usize,
}

/// Appends `p_est_mitigated` and `theta1_est_mitigated` to every row of a sweep CSV.
pub fn mitigate_csv(csv_path: &Path, confusion_path: &Path, out_dir: &Path) -> Result<MitigateReport> {
    let confusion = read_confusion(confusion_path)?;
    let file = File::open(csv_path).map_err(|e| CliError::io(csv_path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers().map_err(|e| CliError::input(csv_path, e))?.clone();
    let col = headers
        .iter()
        .position(|h| h == "outcomes")
        .ok_or_else(|| CliError::input(csv_path, "line 1: missing column \"outcomes\""))?;

    let mut out_rows = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CliError::input(csv_path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |m: String| CliError::input(csv_path, format!("line {line}: {m}"));
        let outcomes = parse_outcomes(row.get(col).unwrap_or("")).map_err(bad)?;
        let raw: [f64; 4] = outcomes
            .try_into()
            .map_err(|v: Vec<f64>| bad(format!("expected 4 two-qubit outcomes, found {}", v.len())))?;
        let x = mitigate(&raw, &confusion)?;
        let mut out = row.clone();
        out.push_field(&(x[0] + x[2]).to_string());
        out.push_field(&theta1_from_weights(x[0], x[2]).map(|t| t.to_string()).unwrap_or_default());
        out_rows.push(out);
    }
    let rows = out_rows.len();

    // Nothing is written until every row has been corrected.
    create_dir(out_dir)?;
    let out_path = out_dir.join("mitigated.csv");
    let mut writer = csv::Writer::from_writer(create_file(&out_path)?);
    let write_err = |e: csv::Error| CliError::input(&out_path, e);
    let mut header = headers.clone();
    header.push_field("p_est_mitigated");
    header.push_field("theta1_est_mitigated");
    writer.write_record(&header).map_err(write_err)?;
    for out in &out_rows {
        writer.write_record(out).map_err(write_err)?;
    }
    writer.flush().map_err(|e| CliError::io(&out_path, e))?;
    drop(writer);

    #[derive(Serialize)]
    struct Inputs<'a> {
        sweep: &'a Path,
        confusion: &'a ConfusionMatrix,
    }
    let hash = config_hash(&Inputs {
        sweep: csv_path,
        confusion: &confusion,
    });
    let mut manifest = RunManifest::new("mitigate", hash, Some(confusion_path), out_dir);
    manifest.artifacts.push(out_path.clone());
    manifest.write()?;
    Ok(MitigateReport { path: out_path, rows })
}

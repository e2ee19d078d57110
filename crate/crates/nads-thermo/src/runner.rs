//! Config-driven experiment runner: builds the system, fills the pressure
//! grid, optionally runs the duality layer, and writes the artifact files.
//!
//! Artifacts (all under the output directory):
//!
//! * `samples.csv` — `mode,potential,n,scale,value` rows, one per grid cell;
//! * `summary.json` — the full `PressureEstimate` per potential per mode;
//! * with duality: `gamma.json`, `entropy_map.csv` (one row per candidate
//!   measure) and `theoremB_report.json`.
//!
//! Outputs are byte-identical across runs with the same config and seed:
//! iteration orders are fixed, floats print in shortest round-trip form, and
//! file writes happen once at the end. Partial outputs are removed when a
//! run fails.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog::{build_potential, build_system, SpaceParams};
use crate::config::{DualityConfig, ExperimentConfig};
use crate::duality::{
    build_dictionary, candidate_measures, entropy_dict, gamma_table, theorem_b_report,
    ClosureParams, ReportTolerances,
};
use crate::error::{NadsError, Result};
use crate::measures::{invariance_defect, Measure};
use crate::nads::{MapSequence, Mode, OrbitCache};
use crate::pressure::{pressure_estimate_cached, PressureEstimate};
use crate::space::{point_budget, SampledSpace};

/// Paths written by a successful run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Summary<'a> {
    system: &'a str,
    seed: u64,
    schedule: &'a [usize],
    scales: &'a [f64],
    estimates: &'a [PressureEstimate],
}

/// A custom system document: a space plus one or more step maps cycled
/// periodically. `maps[k][p]` is the image of point `p` under map `k`.
#[derive(Deserialize)]
struct CustomSystemDoc {
    points: Vec<serde_json::Value>,
    metric: Vec<Vec<f64>>,
    maps: Vec<Vec<usize>>,
}

fn build_custom_system(path: &Path) -> Result<MapSequence> {
    let doc: CustomSystemDoc = serde_json::from_str(&fs::read_to_string(path)?)?;
    let labels = doc
        .points
        .iter()
        .map(|v| match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
        .collect();
    let space = Arc::new(SampledSpace::custom(labels, doc.metric)?);
    if doc.maps.is_empty() {
        return Err(NadsError::InvalidConfig(
            "custom system needs at least one map".into(),
        ));
    }
    for (k, map) in doc.maps.iter().enumerate() {
        if map.len() != space.len() || map.iter().any(|&q| q >= space.len()) {
            return Err(NadsError::InvalidConfig(format!(
                "custom map {k} is not a self-map of the {} points",
                space.len()
            )));
        }
    }
    let maps = doc.maps;
    let period = maps.len();
    Ok(MapSequence::new(
        format!("custom:{}", path.display()),
        space,
        move |n, p| maps[(n - 1) % period][p],
        Some(period),
    ))
}

/// Builds the system named by the config (catalog key or `custom:PATH`).
pub fn build_configured_system(config: &ExperimentConfig) -> Result<MapSequence> {
    if let Some(path) = config.system.strip_prefix("custom:") {
        return build_custom_system(Path::new(path));
    }
    let params = SpaceParams {
        size: config.space.size,
        depth: config.space.depth,
        budget: point_budget(),
    };
    build_system(&config.system, &params)
}

fn modes_of(config: &ExperimentConfig) -> Vec<Mode> {
    match config.mode.as_str() {
        "top" => vec![Mode::Bowen],
        "mis" => vec![Mode::Misiurewicz],
        _ => vec![Mode::Bowen, Mode::Misiurewicz],
    }
}

struct ArtifactWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl ArtifactWriter {
    fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path)?;
        f.write_all(contents.as_bytes())?;
        self.written.push(path.clone());
        Ok(path)
    }

    fn cleanup(&self) {
        for path in &self.written {
            let _ = fs::remove_file(path);
        }
    }
}

/// Runs one experiment end to end. `force_duality` makes the duality layer
/// run with default parameters even when the config has no duality block.
pub fn run_experiment(config: &ExperimentConfig, force_duality: bool) -> Result<RunArtifacts> {
    config.validate()?;
    let out_dir = config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out_dir)?;
    let mut writer = ArtifactWriter {
        dir: out_dir.clone(),
        written: Vec::new(),
    };
    match run_inner(config, force_duality, &mut writer) {
        Ok(()) => Ok(RunArtifacts {
            output_dir: out_dir,
            files: writer.written,
        }),
        Err(e) => {
            writer.cleanup();
            Err(e)
        }
    }
}

fn run_inner(
    config: &ExperimentConfig,
    force_duality: bool,
    writer: &mut ArtifactWriter,
) -> Result<()> {
    let seq = build_configured_system(config)?;
    let space = seq.space().clone();
    let potentials: Vec<(String, Vec<f64>)> = config
        .resolved_potentials()
        .iter()
        .map(|spec| build_potential(spec, &space))
        .collect::<Result<_>>()?;

    let n_max = *config.schedule.last().unwrap();
    let cache = OrbitCache::new(&seq, n_max);

    let mut estimates = Vec::new();
    for mode in modes_of(config) {
        for (label, values) in &potentials {
            estimates.push(pressure_estimate_cached(
                &cache,
                values,
                label,
                &config.schedule,
                &config.scales,
                mode,
            )?);
        }
    }

    // samples.csv: '.' decimal, shortest round-trip floats
    let mut csv = String::from("mode,potential,n,scale,value\n");
    for est in &estimates {
        for row in &est.samples {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                est.mode, est.potential_label, row.n, row.scale, row.value
            ));
        }
    }
    writer.write("samples.csv", &csv)?;

    let summary = Summary {
        system: seq.label(),
        seed: config.seed,
        schedule: &config.schedule,
        scales: &config.scales,
        estimates: &estimates,
    };
    writer.write("summary.json", &serde_json::to_string_pretty(&summary)?)?;

    let duality_config = match (&config.duality, force_duality) {
        (Some(d), _) => Some(d.clone()),
        (None, true) => Some(DualityConfig::default()),
        (None, false) => None,
    };
    if let Some(dcfg) = duality_config {
        run_duality(config, &dcfg, &seq, &potentials, writer)?;
    }
    Ok(())
}

fn run_duality(
    config: &ExperimentConfig,
    dcfg: &DualityConfig,
    seq: &MapSequence,
    potentials: &[(String, Vec<f64>)],
    writer: &mut ArtifactWriter,
) -> Result<()> {
    let mode = if config.mode == "mis" {
        Mode::Misiurewicz
    } else {
        Mode::Bowen
    };
    let closure = ClosureParams {
        coboundary_steps: dcfg.coboundary_steps,
        scaling_max: dcfg.scaling_max,
    };
    let dict = build_dictionary(potentials, seq, closure)?;
    let gamma = gamma_table(seq, &dict, &config.schedule, &config.scales, mode)?;
    writer.write("gamma.json", &serde_json::to_string_pretty(&gamma)?)?;

    let n_max = *config.schedule.last().unwrap();
    let mut candidates = candidate_measures(seq, n_max, dcfg.coboundary_steps)?;
    for &at in &dcfg.dirac_candidates {
        if at >= seq.space().len() {
            return Err(NadsError::InvalidConfig(format!(
                "dirac candidate {at} is outside the space"
            )));
        }
        let label = format!("dirac:{at}");
        if !candidates.iter().any(|m| m.label == label) {
            candidates.push(Measure::dirac(label, seq.space().len(), at));
        }
    }

    let mut entropy_csv = String::from("measure,entropy_dict,attaining_potential\n");
    for mu in &candidates {
        let (h, attaining) = entropy_dict(&dict, &gamma, mu)?;
        entropy_csv.push_str(&format!("{},{},{}\n", mu.label, h, attaining));
    }
    writer.write("entropy_map.csv", &entropy_csv)?;

    // bucket the candidates: exactly invariant ones go to the invariant
    // set, and the "non-invariant" side holds only measures the coboundary
    // family actually refutes with margin >= 1 (candidates in neither
    // bucket still appear in entropy_map.csv)
    let defect_dict: Vec<(String, Vec<f64>)> = dict
        .entries
        .iter()
        .map(|e| (e.label.clone(), e.values.clone()))
        .collect();
    let mut invariant_set = Vec::new();
    let mut noninvariant = Vec::new();
    for mu in &candidates {
        let defect = invariance_defect(seq, mu, &defect_dict, dcfg.coboundary_steps);
        if defect <= 1e-9 {
            invariant_set.push(mu.clone());
        } else if crate::duality::non_invariance_witness(&dict, &gamma, mu, 1.0)?.is_some() {
            noninvariant.push(mu.clone());
        }
    }
    let report = theorem_b_report(
        seq,
        &dict,
        &gamma,
        &invariant_set,
        &noninvariant,
        &candidates,
        None,
        &ReportTolerances::default(),
    )?;
    writer.write(
        "theoremB_report.json",
        &serde_json::to_string_pretty(&report)?,
    )?;
    Ok(())
}

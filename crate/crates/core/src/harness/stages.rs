//! One function per CLI stage. Each reads its inputs from disk and writes its
//! artifact atomically.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::experiment::{evaluate_plan, fit_plan, prepare, run_experiment, PlanResult, ResultsFile, TrainedModel};
use super::io::{read_dataset, read_json, read_jsonl, write_atomic, write_json, write_jsonl};
use super::HarnessError;
use crate::ecfp::{enumerate_substructures, EnumerationConfig, FingerprintSet, Occurrence};
use crate::mmp::{clean_dataset, find_mmps, ActivityUnits, DroppedRecord};
use crate::pooling::{self, FitContext, PoolMethod, PoolSpec};
use crate::smiles::parse_smiles;
use crate::split::{repeated_cv, SplitPlan};
use crate::synth::{generate, to_csv, SynthConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanedCompound {
    pub id: String,
    pub smiles: String,
    pub activity: f64,
    /// 0-based data rows merged into this compound.
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanedFile {
    pub units: ActivityUnits,
    pub compounds: Vec<CleanedCompound>,
    pub dropped: Vec<DroppedRecord>,
}

fn clean(input: &Path, units: ActivityUnits) -> Result<CleanedFile, HarnessError> {
    let rows = read_dataset(input)?;
    let pairs: Vec<(String, f64)> = rows.iter().map(|r| (r.smiles.clone(), r.label)).collect();
    let cleaned = clean_dataset(&pairs, units);
    Ok(CleanedFile {
        units,
        compounds: cleaned
            .records
            .into_iter()
            .map(|r| CleanedCompound {
                id: rows[r.rows[0]].id.clone(),
                smiles: r.smiles,
                activity: r.activity,
                rows: r.rows,
            })
            .collect(),
        dropped: cleaned.dropped,
    })
}

/// Parses, canonicalises and merges a dataset.
pub fn cmd_parse(input: &Path, units: ActivityUnits, output: &Path) -> Result<CleanedFile, HarnessError> {
    let file = clean(input, units)?;
    write_json(output, &file)?;
    Ok(file)
}

/// One line of a fingerprint file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerprintRow {
    pub id: String,
    pub smiles: String,
    pub label: f64,
    pub fp: Vec<u32>,
    pub occurrences: std::collections::BTreeMap<u32, Vec<Occurrence>>,
}

impl FingerprintRow {
    pub fn set(&self) -> FingerprintSet {
        FingerprintSet {
            occurrences: self.occurrences.clone(),
        }
    }
}

pub fn cmd_fingerprint(
    input: &Path,
    units: ActivityUnits,
    ecfp: &EnumerationConfig,
    output: &Path,
) -> Result<Vec<FingerprintRow>, HarnessError> {
    ecfp.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    let cleaned = clean(input, units)?;
    let rows = cleaned
        .compounds
        .par_iter()
        .map(|c| {
            let g = parse_smiles(&c.smiles).map_err(|e| HarnessError::Config(format!("{}: {e}", c.id)))?;
            let set = enumerate_substructures(&g, ecfp);
            Ok(FingerprintRow {
                id: c.id.clone(),
                smiles: c.smiles.clone(),
                label: c.activity,
                fp: set.id_vec(),
                occurrences: set.occurrences,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    write_jsonl(output, &rows)?;
    Ok(rows)
}

pub fn read_fingerprints(path: &Path) -> Result<Vec<FingerprintRow>, HarnessError> {
    read_jsonl(path)
}

pub fn cmd_pool_fit(fps: &Path, method: PoolMethod, dim: usize, output: &Path) -> Result<PoolSpec, HarnessError> {
    let rows = read_fingerprints(fps)?;
    let sets: Vec<FingerprintSet> = rows.iter().map(FingerprintRow::set).collect();
    let labels: Vec<f64> = rows.iter().map(|r| r.label).collect();
    let spec = pooling::fit(method, &FitContext::new(&sets, Some(&labels)), dim)?;
    write_json(output, &spec)?;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledRow {
    pub id: String,
    pub x: Vec<u8>,
}

pub fn cmd_pool_transform(spec: &Path, fps: &Path, output: &Path) -> Result<Vec<PooledRow>, HarnessError> {
    let spec: PoolSpec = read_json(spec)?;
    let rows: Vec<PooledRow> = read_fingerprints(fps)?
        .iter()
        .map(|r| PooledRow {
            id: r.id.clone(),
            x: spec.transform_ids(r.fp.iter().copied()),
        })
        .collect();
    write_jsonl(output, &rows)?;
    Ok(rows)
}

/// One line of an MMP listing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmpRow {
    pub i: usize,
    pub j: usize,
    pub id_i: String,
    pub id_j: String,
    pub core: String,
    pub var_i: String,
    pub var_j: String,
    pub core_heavy: usize,
    pub var_heavy_i: usize,
    pub var_heavy_j: usize,
    pub ac_label: String,
    pub pd_label: String,
}

pub fn cmd_mmp(input: &Path, units: ActivityUnits, output: &Path) -> Result<Vec<MmpRow>, HarnessError> {
    let cleaned = clean(input, units)?;
    let graphs = cleaned
        .compounds
        .iter()
        .map(|c| parse_smiles(&c.smiles).map_err(|e| HarnessError::Config(format!("{}: {e}", c.id))))
        .collect::<Result<Vec<_>, _>>()?;
    let acts: Vec<f64> = cleaned.compounds.iter().map(|c| c.activity).collect();
    let mmps = find_mmps(&graphs, &acts).map_err(|e| HarnessError::Config(e.to_string()))?;
    let rows: Vec<MmpRow> = mmps
        .iter()
        .map(|m| MmpRow {
            i: m.i,
            j: m.j,
            id_i: cleaned.compounds[m.i].id.clone(),
            id_j: cleaned.compounds[m.j].id.clone(),
            core: m.core.clone(),
            var_i: m.var_i.clone(),
            var_j: m.var_j.clone(),
            core_heavy: m.core_heavy,
            var_heavy_i: m.var_heavy_i,
            var_heavy_j: m.var_heavy_j,
            ac_label: m.ac_label.as_str().into(),
            pd_label: format!("{:?}", m.pd_label).to_lowercase(),
        })
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row).map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Config(e.to_string()))?;
    write_atomic(output, &bytes)?;
    Ok(rows)
}

pub fn cmd_split(
    input: &Path,
    units: ActivityUnits,
    k: usize,
    seeds: &[u64],
    output: &Path,
) -> Result<Vec<SplitPlan>, HarnessError> {
    let mut cfg = ExperimentConfig::new(input);
    cfg.units = units;
    cfg.split.k = k;
    cfg.split.seeds = seeds.to_vec();
    let prep = prepare(&cfg)?;
    let plans =
        repeated_cv(prep.activities.len(), &prep.mmps, k, seeds).map_err(|e| HarnessError::Config(e.to_string()))?;
    write_json(output, &plans)?;
    Ok(plans)
}

/// Fits pooling and the configured model on plan `plan` of the config's split.
pub fn cmd_train(cfg: &ExperimentConfig, plan: usize, output: &Path) -> Result<TrainedModel, HarnessError> {
    let prep = prepare(cfg)?;
    let p = prep
        .plans
        .get(plan)
        .ok_or_else(|| HarnessError::Config(format!("plan {plan} out of range ({} plans)", prep.plans.len())))?;
    let trained = fit_plan(&prep, cfg, p)?;
    write_json(output, &trained)?;
    Ok(trained)
}

/// Evaluates a trained model on the plan it was trained for.
pub fn cmd_evaluate(cfg: &ExperimentConfig, model: &Path, output: &Path) -> Result<PlanResult, HarnessError> {
    let trained: TrainedModel = read_json(model)?;
    let prep = prepare(cfg)?;
    let plan = prep
        .plans
        .iter()
        .find(|p| p.seed == trained.seed && p.fold == trained.fold)
        .ok_or_else(|| {
            HarnessError::Config(format!(
                "config has no plan with seed {} and fold {}",
                trained.seed, trained.fold
            ))
        })?;
    let result = evaluate_plan(&prep, cfg, plan, &trained)?;
    write_json(output, &result)?;
    Ok(result)
}

/// Runs the pipeline and writes the results to `output`, falling back to the
/// config's own output path.
pub fn cmd_experiment(cfg: &ExperimentConfig, output: Option<&Path>) -> Result<ResultsFile, HarnessError> {
    let results = run_experiment(cfg)?;
    if let Some(path) = output.or(cfg.output.as_deref()) {
        write_json(path, &results)?;
    }
    Ok(results)
}

pub fn cmd_synth(cfg: &SynthConfig, output: &Path) -> Result<usize, HarnessError> {
    let rows = generate(cfg);
    write_atomic(output, to_csv(&rows).as_bytes())?;
    Ok(rows.len())
}

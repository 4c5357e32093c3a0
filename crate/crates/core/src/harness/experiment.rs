//! clean → fingerprint → MMPs → split plans → pool → model → metrics.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ModelConfig};
use super::io::{read_dataset, DatasetRow};
use super::HarnessError;
use crate::ecfp::{enumerate_substructures, FingerprintSet};
use crate::metrics::{mae, mcc_binary, mcc_multiclass, BinaryCounts, Confusion};
use crate::mmp::{clean_dataset, find_mmps, AcLabel, CleanedDataset, Mmp, PdLabel};
use crate::molgraph::MolGraph;
use crate::neural::{
    class_weights, train_regressor, train_twin, ClassWeights, MlpRegressor, MlpShape, TrainConfig, TwinModel, TwinPair,
};
use crate::pooling::{self, FitContext, PoolSpec};
use crate::predictors::{inter_mode_inputs, qsar_ac_binary, qsar_ac_ternary, qsar_pd, KnnModel};
use crate::smiles::parse_smiles;
use crate::split::{repeated_cv, SplitPlan};

/// Cleaned compounds with fingerprints, MMPs and split plans.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub cleaned: CleanedDataset,
    pub ids: Vec<String>,
    pub activities: Vec<f64>,
    pub graphs: Vec<MolGraph>,
    pub fps: Vec<FingerprintSet>,
    pub mmps: Vec<Mmp>,
    pub plans: Vec<SplitPlan>,
}

pub fn prepare_rows(rows: &[DatasetRow], cfg: &ExperimentConfig) -> Result<Prepared, HarnessError> {
    cfg.validate()?;
    let input: Vec<(String, f64)> = rows.iter().map(|r| (r.smiles.clone(), r.label)).collect();
    let cleaned = clean_dataset(&input, cfg.units);
    let ids = cleaned.records.iter().map(|r| rows[r.rows[0]].id.clone()).collect();
    let activities: Vec<f64> = cleaned.records.iter().map(|r| r.activity).collect();
    let graphs = cleaned
        .records
        .par_iter()
        .map(|r| parse_smiles(&r.smiles))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| HarnessError::Config(format!("canonical SMILES failed to re-parse: {e}")))?;
    let fps = graphs
        .par_iter()
        .map(|g| enumerate_substructures(g, &cfg.ecfp))
        .collect();
    let mmps = find_mmps(&graphs, &activities).map_err(|e| HarnessError::Config(e.to_string()))?;
    let plans = repeated_cv(activities.len(), &mmps, cfg.split.k, &cfg.split.seeds)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(Prepared {
        cleaned,
        ids,
        activities,
        graphs,
        fps,
        mmps,
        plans,
    })
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared, HarnessError> {
    prepare_rows(&read_dataset(&cfg.dataset)?, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ModelArtifact {
    Knn(KnnModel),
    Mlp(MlpRegressor),
    Twin { model: TwinModel, weights: ClassWeights },
}

/// A pooling operator and a model fitted on one plan's training compounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub seed: u64,
    pub fold: usize,
    pub pool: PoolSpec,
    pub model: ModelArtifact,
    pub loss_trace: Vec<f64>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Training seed for one plan, so that plans train independently.
pub fn plan_seed(base: u64, plan: &SplitPlan) -> u64 {
    splitmix(base ^ splitmix(plan.seed ^ splitmix(plan.fold as u64)))
}

fn count_labels(mmps: &[Mmp], idx: &[usize]) -> (usize, usize, usize) {
    idx.iter().fold((0, 0, 0), |(a, h, n), &m| match mmps[m].ac_label {
        AcLabel::Ac => (a + 1, h, n),
        AcLabel::HalfAc => (a, h + 1, n),
        AcLabel::NonAc => (a, h, n + 1),
    })
}

pub fn fit_plan(prep: &Prepared, cfg: &ExperimentConfig, plan: &SplitPlan) -> Result<TrainedModel, HarnessError> {
    let train_fps: Vec<FingerprintSet> = plan.d_train.iter().map(|&i| prep.fps[i].clone()).collect();
    let train_y: Vec<f64> = plan.d_train.iter().map(|&i| prep.activities[i]).collect();
    let pool = pooling::fit(
        cfg.pooling.method,
        &FitContext::new(&train_fps, Some(&train_y)),
        cfg.pooling.dim,
    )?;
    let xs_train: Vec<Vec<f64>> = train_fps.iter().map(|fp| pool.transform_f64(fp)).collect();
    let (model, loss_trace) = match &cfg.model {
        ModelConfig::Knn {
            k,
            minkowski_p,
            weighting,
        } => {
            let k = (*k).min(xs_train.len());
            let m = KnnModel::fit(xs_train, train_y, k, *minkowski_p, *weighting)?;
            (ModelArtifact::Knn(m), Vec::new())
        }
        ModelConfig::Mlp { hidden, train } => {
            let seed = plan_seed(train.seed, plan);
            let shape = MlpShape {
                input: cfg.pooling.dim,
                hidden: hidden.clone(),
            };
            let mut m = MlpRegressor::init(&shape, seed)?;
            let tc = TrainConfig { seed, ..*train };
            let report = train_regressor(&mut m, &xs_train, &train_y, &tc)?;
            (ModelArtifact::Mlp(m), report.loss_trace)
        }
        ModelConfig::Twin { train, .. } => {
            let seed = plan_seed(train.seed, plan);
            let shape = cfg
                .model
                .twin_shape(cfg.pooling.dim)
                .ok_or(HarnessError::Config("twin shape".into()))?;
            let mut m = TwinModel::init(&shape, seed)?;
            let features: Vec<Vec<f64>> = prep.fps.iter().map(|fp| pool.transform_f64(fp)).collect();
            let pairs: Vec<TwinPair> = plan
                .m_train
                .iter()
                .map(|&k| {
                    let p = &prep.mmps[k];
                    TwinPair {
                        i: p.i,
                        j: p.j,
                        ac: p.ac_label,
                        pd: p.pd_label,
                    }
                })
                .collect();
            // absent classes would make the weights undefined; count them once
            let (a, h, n) = count_labels(&prep.mmps, &plan.m_train);
            let weights = class_weights(a.max(1), h.max(1), n.max(1))?;
            let report = if pairs.is_empty() {
                Default::default()
            } else {
                train_twin(&mut m, &features, &pairs, &weights, &TrainConfig { seed, ..*train })?
            };
            (ModelArtifact::Twin { model: m, weights }, report.loss_trace)
        }
    };
    Ok(TrainedModel {
        seed: plan.seed,
        fold: plan.fold,
        pool,
        model,
        loss_trace,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub ac: Option<f64>,
    pub half_ac: Option<f64>,
    pub non_ac: Option<f64>,
}

impl ClassScores {
    fn from_fn(f: impl Fn(usize) -> Option<f64>) -> Self {
        Self {
            ac: f(AcLabel::Ac.index()),
            half_ac: f(AcLabel::HalfAc.index()),
            non_ac: f(AcLabel::NonAc.index()),
        }
    }
}

/// AC and PD metrics on one MMP set. Undefined values are `null`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SetMetrics {
    pub n_pairs: usize,
    /// Three-class MCC.
    pub ac_mcc: Option<f64>,
    pub ac_sensitivity: ClassScores,
    pub ac_precision: ClassScores,
    /// AC vs non-AC with half-ACs removed from the ground truth.
    pub binary_n_pairs: usize,
    pub binary_mcc: Option<f64>,
    pub binary_sensitivity: Option<f64>,
    pub binary_precision: Option<f64>,
    pub pd_accuracy: Option<f64>,
    pub pd_accuracy_pred_half_ac: Option<f64>,
    pub pd_accuracy_pred_ac: Option<f64>,
}

/// Per-pair predictions.
#[derive(Debug, Clone, Copy)]
pub struct PairPrediction {
    pub ternary: AcLabel,
    pub binary_ac: bool,
    pub pd: PdLabel,
}

pub fn set_metrics(truth: &[&Mmp], pred: &[PairPrediction]) -> SetMetrics {
    let n = truth.len();
    if n == 0 {
        return SetMetrics::default();
    }
    let t: Vec<usize> = truth.iter().map(|m| m.ac_label.index()).collect();
    let p: Vec<usize> = pred.iter().map(|p| p.ternary.index()).collect();
    let conf = Confusion::from_predictions(&p, &t, 3).ok();
    let (mut bp, mut bt) = (Vec::new(), Vec::new());
    for (m, q) in truth.iter().zip(pred) {
        if m.ac_label != AcLabel::HalfAc {
            bt.push(m.ac_label == AcLabel::Ac);
            bp.push(q.binary_ac);
        }
    }
    let bin = BinaryCounts::from_predictions(&bp, &bt).ok();
    let pd_acc = |filter: &dyn Fn(&PairPrediction) -> bool| {
        let (hit, tot) = truth
            .iter()
            .zip(pred)
            .filter(|(_, q)| filter(q))
            .fold((0usize, 0usize), |(h, c), (m, q)| {
                (h + usize::from(m.pd_label == q.pd), c + 1)
            });
        (tot > 0).then(|| hit as f64 / tot as f64)
    };
    SetMetrics {
        n_pairs: n,
        ac_mcc: conf.as_ref().map(mcc_multiclass),
        ac_sensitivity: conf
            .as_ref()
            .map_or_else(ClassScores::default, |c| ClassScores::from_fn(|k| c.sensitivity(k))),
        ac_precision: conf
            .as_ref()
            .map_or_else(ClassScores::default, |c| ClassScores::from_fn(|k| c.precision(k))),
        binary_n_pairs: bt.len(),
        binary_mcc: bin.as_ref().map(mcc_binary),
        binary_sensitivity: bin.as_ref().and_then(BinaryCounts::sensitivity),
        binary_precision: bin.as_ref().and_then(BinaryCounts::precision),
        pd_accuracy: pd_acc(&|_| true),
        pd_accuracy_pred_half_ac: pd_acc(&|q| q.ternary == AcLabel::HalfAc),
        pd_accuracy_pred_ac: pd_acc(&|q| q.ternary == AcLabel::Ac),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub seed: u64,
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub n_mmp_train: usize,
    pub n_mmp_inter: usize,
    pub n_mmp_test: usize,
    pub n_mmp_cores: usize,
    /// Test-compound MAE; `null` for the twin model.
    pub mae: Option<f64>,
    pub final_loss: Option<f64>,
    pub inter: SetMetrics,
    pub test: SetMetrics,
    pub cores: SetMetrics,
}

pub fn evaluate_plan(
    prep: &Prepared,
    cfg: &ExperimentConfig,
    plan: &SplitPlan,
    trained: &TrainedModel,
) -> Result<PlanResult, HarnessError> {
    let n = prep.activities.len();
    let features = |i: usize| trained.pool.transform_f64(&prep.fps[i]);
    let mut in_train = vec![false; n];
    for &i in &plan.d_train {
        in_train[i] = true;
    }
    let qsar: Option<Box<dyn Fn(&[f64]) -> Result<f64, HarnessError> + Sync>> = match &trained.model {
        ModelArtifact::Knn(m) => Some(Box::new(move |x| Ok(m.predict(x)?))),
        ModelArtifact::Mlp(m) => Some(Box::new(move |x| Ok(m.predict(x)?))),
        ModelArtifact::Twin { .. } => None,
    };
    let mut predicted = vec![f64::NAN; n];
    let mut mae_value = None;
    if let Some(q) = &qsar {
        for &i in &plan.d_test {
            predicted[i] = q(&features(i))?;
        }
        if !plan.d_test.is_empty() {
            let p: Vec<f64> = plan.d_test.iter().map(|&i| predicted[i]).collect();
            let t: Vec<f64> = plan.d_test.iter().map(|&i| prep.activities[i]).collect();
            mae_value = Some(mae(&p, &t)?);
        }
    }
    let t = &cfg.thresholds;
    let predict_pair = |m: &Mmp| -> Result<PairPrediction, HarnessError> {
        match &trained.model {
            ModelArtifact::Twin { model, .. } => {
                let out = model.forward(&features(m.i), &features(m.j))?;
                let ternary = out.ac_label();
                Ok(PairPrediction {
                    ternary,
                    binary_ac: ternary == AcLabel::Ac,
                    pd: out.pd_label(),
                })
            }
            _ => {
                let (a, b) = inter_mode_inputs(m, &in_train, &prep.activities, &predicted)?;
                Ok(PairPrediction {
                    ternary: qsar_ac_ternary(a, b, t),
                    binary_ac: qsar_ac_binary(a, b, t) == AcLabel::Ac,
                    pd: qsar_pd(a, b),
                })
            }
        }
    };
    let eval_set = |idx: &[usize]| -> Result<SetMetrics, HarnessError> {
        let truth: Vec<&Mmp> = idx.iter().map(|&k| &prep.mmps[k]).collect();
        let pred = truth.iter().map(|m| predict_pair(m)).collect::<Result<Vec<_>, _>>()?;
        Ok(set_metrics(&truth, &pred))
    };
    Ok(PlanResult {
        seed: plan.seed,
        fold: plan.fold,
        n_train: plan.d_train.len(),
        n_test: plan.d_test.len(),
        n_mmp_train: plan.m_train.len(),
        n_mmp_inter: plan.m_inter.len(),
        n_mmp_test: plan.m_test.len(),
        n_mmp_cores: plan.m_cores.len(),
        mae: mae_value,
        final_loss: trained.loss_trace.last().copied(),
        inter: eval_set(&plan.m_inter)?,
        test: eval_set(&plan.m_test)?,
        cores: eval_set(&plan.m_cores)?,
    })
}

/// Mean and sample standard deviation over the plans that define a value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub model: String,
    pub config: ExperimentConfig,
    pub n_rows: usize,
    pub n_compounds: usize,
    pub n_dropped: usize,
    pub n_mmps: usize,
    pub plans: Vec<PlanResult>,
    /// Keyed by dotted path into [`PlanResult`], e.g. `test.ac_mcc`.
    pub summary: BTreeMap<String, Summary>,
}

fn collect_leaves(prefix: &str, v: &serde_json::Value, out: &mut BTreeMap<String, Vec<Option<f64>>>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                collect_leaves(&key, child, out);
            }
        }
        serde_json::Value::Number(x) => out.entry(prefix.to_string()).or_default().push(x.as_f64()),
        serde_json::Value::Null => out.entry(prefix.to_string()).or_default().push(None),
        _ => {}
    }
}

pub fn summarize(plans: &[PlanResult]) -> BTreeMap<String, Summary> {
    let mut leaves = BTreeMap::new();
    for p in plans {
        let v = serde_json::to_value(p).unwrap_or_default();
        collect_leaves("", &v, &mut leaves);
    }
    leaves.remove("seed");
    leaves.remove("fold");
    leaves
        .into_iter()
        .map(|(k, vals)| {
            let xs: Vec<f64> = vals.into_iter().flatten().collect();
            let n = xs.len();
            let mean = (n > 0).then(|| xs.iter().sum::<f64>() / n as f64);
            let sd = mean
                .filter(|_| n > 1)
                .map(|m| (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64).sqrt());
            (k, Summary { n, mean, sd })
        })
        .collect()
}

/// Runs `f` on a rayon pool capped by `FORGE_THREADS` when that is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let cap = std::env::var("FORGE_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match cap.map(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build()) {
        Some(Ok(pool)) => pool.install(f),
        _ => f(),
    }
}

/// Sizes the global rayon pool; only the first call has an effect.
pub fn init_threads(n: usize) {
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        log::debug!("thread pool already initialised: {e}");
    }
}

pub fn run_prepared(prep: &Prepared, cfg: &ExperimentConfig, n_rows: usize) -> Result<ResultsFile, HarnessError> {
    let plans = prep
        .plans
        .par_iter()
        .map(|plan| {
            let trained = fit_plan(prep, cfg, plan)?;
            evaluate_plan(prep, cfg, plan, &trained)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ResultsFile {
        model: cfg.model.name().into(),
        config: cfg.clone(),
        n_rows,
        n_compounds: prep.activities.len(),
        n_dropped: prep.cleaned.dropped.len(),
        n_mmps: prep.mmps.len(),
        summary: summarize(&plans),
        plans,
    })
}

/// The whole pipeline for one config; nothing is written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultsFile, HarnessError> {
    with_thread_cap(|| {
        let rows = read_dataset(&cfg.dataset)?;
        let prep = prepare_rows(&rows, cfg)?;
        run_prepared(&prep, cfg, rows.len())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mmp(ac: AcLabel, pd: PdLabel) -> Mmp {
        Mmp {
            i: 0,
            j: 1,
            core: "c".into(),
            var_i: "[*]C".into(),
            var_j: "[*]N".into(),
            core_heavy: 6,
            var_heavy_i: 1,
            var_heavy_j: 1,
            ac_label: ac,
            pd_label: pd,
        }
    }

    #[test]
    fn empty_set_is_all_null() {
        let m = set_metrics(&[], &[]);
        assert_eq!(m.ac_mcc, None);
        let v = serde_json::to_value(&m).unwrap();
        assert!(v["pd_accuracy"].is_null());
        assert!(v["ac_sensitivity"]["ac"].is_null());
    }

    #[test]
    fn set_metric_values() {
        let truth = [
            mmp(AcLabel::Ac, PdLabel::Left),
            mmp(AcLabel::HalfAc, PdLabel::Right),
            mmp(AcLabel::NonAc, PdLabel::Right),
        ];
        let refs: Vec<&Mmp> = truth.iter().collect();
        let pred = [
            PairPrediction {
                ternary: AcLabel::Ac,
                binary_ac: true,
                pd: PdLabel::Left,
            },
            PairPrediction {
                ternary: AcLabel::Ac,
                binary_ac: true,
                pd: PdLabel::Left,
            },
            PairPrediction {
                ternary: AcLabel::NonAc,
                binary_ac: false,
                pd: PdLabel::Right,
            },
        ];
        let m = set_metrics(&refs, &pred);
        assert_eq!(m.binary_n_pairs, 2);
        assert_eq!(m.binary_mcc, Some(1.0));
        assert_eq!(m.ac_sensitivity.half_ac, Some(0.0));
        assert_eq!(m.ac_precision.ac, Some(0.5));
        assert_eq!(m.ac_precision.half_ac, None);
        assert_eq!(m.pd_accuracy, Some(2.0 / 3.0));
        assert_eq!(m.pd_accuracy_pred_ac, Some(0.5));
        assert_eq!(m.pd_accuracy_pred_half_ac, None);
    }

    #[test]
    fn summary_skips_nulls() {
        let mut a = PlanResult {
            seed: 0,
            fold: 0,
            n_train: 2,
            n_test: 2,
            n_mmp_train: 0,
            n_mmp_inter: 0,
            n_mmp_test: 0,
            n_mmp_cores: 0,
            mae: Some(1.0),
            final_loss: None,
            inter: SetMetrics::default(),
            test: SetMetrics::default(),
            cores: SetMetrics::default(),
        };
        let mut b = a.clone();
        b.mae = Some(3.0);
        a.fold = 1;
        let s = summarize(&[a, b]);
        assert_eq!(s["mae"].mean, Some(2.0));
        assert_eq!(s["mae"].sd, Some(2f64.sqrt()));
        assert_eq!(
            s["final_loss"],
            Summary {
                n: 0,
                mean: None,
                sd: None
            }
        );
        assert!(!s.contains_key("fold"));
    }
}

//! Config-driven Monte Carlo sweeps: one record per (grid point, trial),
//! theory values from the other modules, CSV/JSON/plot-spec output.

mod figures;
mod output;

pub use figures::{figure_config, FIGURES};
pub use output::{emit_plot_script, write_csv, write_outputs, PlotStyle, Summary, SummaryPoint};

use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::apps::{
    csbm_overlap, csbm_sample, csbm_snr, decode_build, flip_probability, kikuchi_matrix, kikuchi_params, kikuchi_test, label_overlap, scov_closed_forms,
    scov_sample, theta_prime, CsbmInstance, GraphDecodingInstance, RegularGraph, ScovParams, TensorPcaInstance,
};
use crate::block::{phase_classify, sample_block, BlockModelSpec};
use crate::error::{Error, Result};
use crate::free::{default_eta, default_threshold, free_support};
use crate::iso::{bbp_overlap, bbp_value};
use crate::linalg::{c, eigh_real, real_part, CVec, RMat};
use crate::model::{hausdorff_distance, sample, sample_universal, GaussianSeriesModel, ScalarLaw, SupportSet, UniversalModel};
use crate::rng::{sub_seed, trial_seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Goe,
    Gue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryLaw {
    Gaussian,
    Rademacher,
    Uniform,
}

/// Which matrix's top eigenvalue a covariance sweep records.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScovMatrix {
    /// Σ̂, against S.
    Sample,
    /// Σ̂ − Σ, against H₊.
    Error,
    /// Σ − Σ̂, against −H₋.
    NegError,
}

/// The swept family and its fixed parameters. The grid value is θ for the
/// spiked sweeps and decoding, a factor multiplying B for block-phase,
/// λ√k* for kikuchi, λ² + μ²/γ for csbm and λ for scov.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    SpikedBand {
        d: usize,
        width: usize,
        #[serde(default = "rademacher")]
        law: EntryLaw,
    },
    BbpSweep {
        d: usize,
        #[serde(default = "goe")]
        ensemble: Ensemble,
    },
    BlockPhase {
        spec: Value,
    },
    Kikuchi {
        n: usize,
        p: usize,
        ell: usize,
    },
    Decode {
        d: usize,
        k: usize,
    },
    Csbm {
        n: usize,
        p: usize,
    },
    Scov {
        n: usize,
        p: usize,
        #[serde(default = "sample_matrix")]
        matrix: ScovMatrix,
    },
}

fn rademacher() -> EntryLaw {
    EntryLaw::Rademacher
}
fn goe() -> Ensemble {
    Ensemble::Goe
}
fn sample_matrix() -> ScovMatrix {
    ScovMatrix::Sample
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    /// Hausdorff distance from each sample spectrum to the free support.
    #[serde(default)]
    pub hausdorff: bool,
    /// Not part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Not part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: Value = serde_json::from_str(s).map_err(|e| Error::Invalid(format!("config: {e}")))?;
        let cfg: ExperimentConfig = serde_json::from_value(raw.clone()).map_err(|e| Error::Invalid(format!("config: {e}")))?;
        // serde cannot combine flatten with deny_unknown_fields, so compare
        // key sets against the serialized form instead
        let known = serde_json::to_value(&cfg)?;
        if let (Some(given), Some(known)) = (raw.as_object(), known.as_object()) {
            if let Some(k) = given.keys().find(|k| !known.contains_key(*k) && !matches!(k.as_str(), "threads" | "output")) {
                return Err(Error::Invalid(format!("config: unknown field `{k}`")));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.grid.is_empty() {
            return Err(Error::invalid("grid must be nonempty"));
        }
        if self.grid.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::invalid("grid values must be finite and nonnegative"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads must be positive"));
        }
        let max_grid = self.grid.iter().copied().fold(0.0, f64::max);
        match &self.experiment {
            Experiment::SpikedBand { d, width, .. } => {
                GaussianSeriesModel::band(*d, *width)?;
            }
            Experiment::BbpSweep { d, .. } => {
                if *d < 2 {
                    return Err(Error::invalid("d must be at least 2"));
                }
            }
            Experiment::BlockPhase { spec } => {
                let s = BlockModelSpec::from_value(spec)?;
                if self.grid.contains(&0.0) {
                    return Err(Error::invalid("block-phase scale factors must be positive"));
                }
                if self.hausdorff && s.d() > crate::block::BLOCK_MODEL_MAX_DIM {
                    return Err(Error::MemoryCap("hausdorff needs the block model materialized".into()));
                }
            }
            Experiment::Kikuchi { n, p, ell } => {
                kikuchi_params(*n, *p, *ell)?;
            }
            Experiment::Decode { d, k } => {
                RegularGraph::circulant(*d, k / 2, k % 2 == 1)?;
                flip_probability(max_grid, *k)?;
            }
            Experiment::Csbm { n, p } => {
                if *n == 0 || *p == 0 {
                    return Err(Error::invalid("n and p must be positive"));
                }
            }
            Experiment::Scov { n, p, .. } => {
                ScovParams::new(*n, *p, 0.0)?;
            }
        }
        if self.hausdorff && !matches!(self.experiment, Experiment::SpikedBand { .. } | Experiment::BbpSweep { .. } | Experiment::BlockPhase { .. }) {
            return Err(Error::invalid("hausdorff is available for spiked-band, bbp-sweep and block-phase"));
        }
        Ok(())
    }

    pub fn plot_style(&self) -> PlotStyle {
        let (x, y, stat) = match &self.experiment {
            Experiment::SpikedBand { .. } | Experiment::BbpSweep { .. } => ("theta", "top eigenvalue", "lambda_max"),
            Experiment::BlockPhase { .. } => ("scale of B", "top eigenvalue", "lambda_max"),
            Experiment::Kikuchi { .. } => ("lambda sqrt(k*)", "normalized top eigenvalue", "lambda_max"),
            Experiment::Decode { .. } => ("theta", "label overlap", "overlap"),
            Experiment::Csbm { .. } => ("lambda^2 + mu^2/gamma", "top eigenvalue", "lambda_max"),
            Experiment::Scov { .. } => ("lambda", "top eigenvalue", "lambda_max"),
        };
        let kind = serde_json::to_value(&self.experiment).ok().and_then(|v| v["kind"].as_str().map(String::from)).unwrap_or_default();
        PlotStyle { title: kind, x_label: x.into(), y_label: y.into(), statistic: stat.into() }
    }

    /// The config without run-local fields (threads, output).
    pub fn canonical(&self) -> ExperimentConfig {
        ExperimentConfig { threads: None, output: None, ..self.clone() }
    }

    /// SHA-256 of the canonical JSON.
    pub fn hash(&self) -> String {
        let s = serde_json::to_string(&self.canonical()).expect("config serializes");
        hex::encode(Sha256::digest(s.as_bytes()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub config_hash: String,
    pub grid_index: usize,
    pub grid_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub lambda_max: f64,
    pub lambda_2: Option<f64>,
    pub overlap: Option<f64>,
    pub hausdorff: Option<f64>,
    pub theory_value: Option<f64>,
    pub theory_error_radius: Option<f64>,
    pub wall_time: f64,
}

pub struct RunOutput {
    pub config: ExperimentConfig,
    pub config_hash: String,
    /// Sorted by (grid index, trial).
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

/// Per-grid-point theory shared by its trials.
struct GridTheory {
    value: Option<f64>,
    radius: Option<f64>,
    markers: Vec<(String, f64)>,
    support: Option<SupportSet>,
    /// Prepared model for the spiked sweeps.
    model: Option<Prepared>,
}

enum Prepared {
    Gaussian(GaussianSeriesModel),
    Universal(UniversalModel),
    Block(BlockModelSpec),
    Graph(RegularGraph),
}

struct Stats {
    lambda_max: f64,
    lambda_2: Option<f64>,
    overlap: Option<f64>,
    spectrum: Option<Vec<f64>>,
}

fn flat_spike(d: usize) -> CVec {
    CVec::from_element(d, c(1.0 / (d as f64).sqrt()))
}

fn top_two_and_overlap(m: &RMat, v: &DVector<f64>) -> Stats {
    let (vals, vecs) = eigh_real(m);
    let d = vals.len();
    let ip = vecs.column(d - 1).dot(v);
    Stats { lambda_max: vals[d - 1], lambda_2: (d > 1).then(|| vals[d - 2]), overlap: Some(ip * ip), spectrum: Some(vals) }
}

fn support_of(model: &GaussianSeriesModel) -> Result<SupportSet> {
    free_support(model, default_eta(model), default_threshold(model))
}

impl ExperimentConfig {
    fn theory(&self, g: f64, graph: Option<&RegularGraph>) -> Result<GridTheory> {
        let mut t = GridTheory { value: None, radius: None, markers: Vec::new(), support: None, model: None };
        match &self.experiment {
            Experiment::SpikedBand { d, width, law } => {
                let model = GaussianSeriesModel::band(*d, *width)?.spiked(g, &flat_spike(*d))?;
                t.value = Some(bbp_value(g)?);
                if self.hausdorff {
                    t.support = Some(support_of(&model)?);
                }
                t.model = Some(match law {
                    EntryLaw::Gaussian => Prepared::Gaussian(model),
                    EntryLaw::Rademacher => Prepared::Universal(UniversalModel::from_gaussian(&model, ScalarLaw::Rademacher)?),
                    EntryLaw::Uniform => Prepared::Universal(UniversalModel::from_gaussian(&model, ScalarLaw::Uniform)?),
                });
            }
            Experiment::BbpSweep { d, ensemble } => {
                let base = match ensemble {
                    Ensemble::Goe => GaussianSeriesModel::goe(*d)?,
                    Ensemble::Gue => GaussianSeriesModel::gue(*d)?,
                };
                let model = base.spiked(g, &flat_spike(*d))?;
                t.value = Some(bbp_value(g)?);
                if self.hausdorff {
                    t.support = Some(support_of(&model)?);
                }
                t.model = Some(Prepared::Gaussian(model));
            }
            Experiment::BlockPhase { spec } => {
                let base = BlockModelSpec::from_value(spec)?;
                let s = base.with_b(base.b() * g)?;
                let report = phase_classify(&s)?;
                t.value = Some(report.lambda);
                t.radius = Some(report.error_radius);
                t.markers = vec![("lambda0".into(), report.lambda0), ("snr".into(), report.snr)];
                if self.hausdorff {
                    t.support = Some(support_of(&crate::block::build_block_model(&s, true)?)?);
                }
                t.model = Some(Prepared::Block(s));
            }
            Experiment::Kikuchi { n, .. } => {
                t.value = Some(bbp_value(g)?);
                t.markers = vec![("threshold".into(), 2.0 + (*n as f64).powf(-0.2))];
            }
            Experiment::Decode { k, .. } => {
                let p = flip_probability(g, *k)?;
                t.value = Some(bbp_overlap(theta_prime(*k, p)));
                t.model = graph.cloned().map(Prepared::Graph);
            }
            Experiment::Csbm { n, p } => {
                let gamma = *n as f64 / *p as f64;
                let (lam, mu) = csbm_split(g, gamma);
                t.value = Some(csbm_snr(lam, mu, gamma)?.snr);
                t.markers = vec![("threshold".into(), 1.0)];
            }
            Experiment::Scov { n, p, matrix } => {
                let v = scov_closed_forms(g, *p as f64 / *n as f64)?;
                t.value = Some(match matrix {
                    ScovMatrix::Sample => v.s,
                    ScovMatrix::Error => v.h_plus,
                    ScovMatrix::NegError => -v.h_minus,
                });
                t.markers = vec![("S".into(), v.s), ("H+".into(), v.h_plus), ("H-".into(), v.h_minus)];
            }
        }
        Ok(t)
    }

    fn trial(&self, g: f64, theory: &GridTheory, seed: u64) -> Result<Stats> {
        match (&self.experiment, &theory.model) {
            (Experiment::SpikedBand { d, .. } | Experiment::BbpSweep { d, .. }, Some(m)) => {
                let x = match m {
                    Prepared::Gaussian(model) => sample(model, seed),
                    Prepared::Universal(model) => sample_universal(model, seed),
                    _ => unreachable!(),
                };
                let v = DVector::from_element(*d, 1.0 / (*d as f64).sqrt());
                if crate::linalg::is_real(&x) {
                    Ok(top_two_and_overlap(&real_part(&x), &v))
                } else {
                    let e = crate::linalg::eigh(&x);
                    let n = e.values.len();
                    let ip = e.vectors.column(n - 1).iter().map(|z| z.re / (*d as f64).sqrt()).sum::<f64>();
                    let ipi = e.vectors.column(n - 1).iter().map(|z| z.im / (*d as f64).sqrt()).sum::<f64>();
                    Ok(Stats { lambda_max: e.values[n - 1], lambda_2: Some(e.values[n - 2]), overlap: Some(ip * ip + ipi * ipi), spectrum: Some(e.values) })
                }
            }
            (Experiment::BlockPhase { .. }, Some(Prepared::Block(s))) => {
                let x = sample_block(s, true, seed);
                let z = s.z() / (s.d() as f64).sqrt();
                Ok(top_two_and_overlap(&x, &z))
            }
            (Experiment::Kikuchi { n, p, ell }, _) => {
                let k = kikuchi_params(*n, *p, *ell)?;
                let inst = TensorPcaInstance::new(*n, *p, *ell, g / (k.k_star as f64).sqrt(), seed)?;
                let t = kikuchi_test(&kikuchi_matrix(&inst)?, *n, *p, *ell)?;
                Ok(Stats { lambda_max: t.statistic, lambda_2: None, overlap: None, spectrum: None })
            }
            (Experiment::Decode { k, .. }, Some(Prepared::Graph(graph))) => {
                let inst = GraphDecodingInstance::new(graph.clone(), flip_probability(g, *k)?, seed)?;
                let m = decode_build(&inst);
                let (vals, vecs) = eigh_real(&m.y_prime);
                let n = vals.len();
                let top = vecs.column(n - 1).into_owned();
                Ok(Stats { lambda_max: vals[n - 1], lambda_2: Some(vals[n - 2]), overlap: Some(label_overlap(&inst.x, &top)), spectrum: None })
            }
            (Experiment::Csbm { n, p }, _) => {
                let (lam, mu) = csbm_split(g, *n as f64 / *p as f64);
                let inst = CsbmInstance::new(*n, *p, lam, mu, seed)?;
                let est = csbm_sample(&inst).estimate()?;
                Ok(Stats { lambda_max: est.lambda_max, lambda_2: Some(est.lambda_max - est.gap), overlap: Some(csbm_overlap(&inst.v, &est.v_hat)), spectrum: None })
            }
            (Experiment::Scov { n, p, matrix }, _) => {
                let v = scov_sample(&ScovParams::new(*n, *p, g)?, seed);
                let lm = match matrix {
                    ScovMatrix::Sample => v.s,
                    ScovMatrix::Error => v.h_plus,
                    ScovMatrix::NegError => -v.h_minus,
                };
                Ok(Stats { lambda_max: lm, lambda_2: None, overlap: None, spectrum: None })
            }
            _ => unreachable!("theory prepares the model for every kind that needs one"),
        }
    }
}

/// λ = √(s/2), μ = √(sγ/2), so that λ² + μ²/γ = s with the two channels
/// contributing equally.
pub fn csbm_split(s: f64, gamma: f64) -> (f64, f64) {
    ((s / 2.0).sqrt(), (s * gamma / 2.0).sqrt())
}

/// Environment variable consulted when no thread count is given on the
/// command line.
pub const THREADS_ENV: &str = "FREESPEC_THREADS";

/// Flag, then environment, then config, then all logical cores.
pub fn resolve_threads(flag: Option<usize>, config: &ExperimentConfig) -> Result<usize> {
    if let Some(t) = flag {
        return if t == 0 { Err(Error::invalid("threads must be positive")) } else { Ok(t) };
    }
    if let Ok(s) = std::env::var(THREADS_ENV) {
        return s.trim().parse::<usize>().ok().filter(|&t| t > 0).ok_or_else(|| Error::invalid(format!("{THREADS_ENV} must be a positive integer, got {s:?}")));
    }
    Ok(config.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

/// Run every (grid point, trial) pair on `threads` workers.
pub fn run(config: &ExperimentConfig, threads: usize) -> Result<RunOutput> {
    config.validate()?;
    let hash = config.hash();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let graph = match &config.experiment {
        Experiment::Decode { d, k } => Some(RegularGraph::random_regular(*d, *k, sub_seed(config.master_seed, 0x6a))?),
        _ => None,
    };
    pool.install(|| {
        let theories: Vec<GridTheory> = config.grid.par_iter().map(|&g| config.theory(g, graph.as_ref())).collect::<Result<_>>()?;
        let jobs: Vec<(usize, usize)> = (0..config.grid.len()).flat_map(|gi| (0..config.trials).map(move |t| (gi, t))).collect();
        let mut records: Vec<TrialRecord> = jobs
            .par_iter()
            .map(|&(gi, t)| {
                let start = Instant::now();
                let g = config.grid[gi];
                let seed = trial_seed(config.master_seed, gi as u64, t as u64);
                let th = &theories[gi];
                let stats = config.trial(g, th, seed)?;
                let hausdorff = match (&th.support, &stats.spectrum) {
                    (Some(sup), Some(sp)) => Some(hausdorff_distance(&eigen_spectrum_of(sp)?, sup)?),
                    _ => None,
                };
                Ok(TrialRecord {
                    config_hash: hash.clone(),
                    grid_index: gi,
                    grid_value: g,
                    trial: t,
                    seed,
                    lambda_max: stats.lambda_max,
                    lambda_2: stats.lambda_2,
                    overlap: stats.overlap,
                    hausdorff,
                    theory_value: th.value,
                    theory_error_radius: th.radius,
                    wall_time: start.elapsed().as_secs_f64(),
                })
            })
            .collect::<Result<_>>()?;
        records.sort_by_key(|r| (r.grid_index, r.trial));
        let summary = Summary::from_records(&config.grid, &records, theories.iter().map(|t| t.markers.clone()).collect());
        Ok(RunOutput { config: config.clone(), config_hash: hash.clone(), records, summary })
    })
}

fn eigen_spectrum_of(vals: &[f64]) -> Result<crate::model::SpectrumSet> {
    crate::model::SpectrumSet::new(vals.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(s: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(s).unwrap()
    }

    #[test]
    fn config_validation() {
        let ok = r#"{"kind":"scov","n":50,"p":20,"grid":[0,1],"trials":2,"master_seed":1}"#;
        assert_eq!(cfg(ok).experiment, Experiment::Scov { n: 50, p: 20, matrix: ScovMatrix::Sample });
        for bad in [
            r#"{"kind":"scov","n":50,"p":20,"grid":[0,1],"trials":2,"master_seed":1,"extra":3}"#,
            r#"{"kind":"scov","n":50,"p":20,"grid":[],"trials":2,"master_seed":1}"#,
            r#"{"kind":"scov","n":50,"p":20,"grid":[1],"trials":0,"master_seed":1}"#,
            r#"{"kind":"warp","grid":[1],"trials":1,"master_seed":1}"#,
            r#"{"kind":"kikuchi","n":10,"p":4,"ell":4,"grid":[1],"trials":1,"master_seed":1}"#,
            r#"{"kind":"scov","n":50,"p":20,"grid":[1],"trials":1,"master_seed":1,"hausdorff":true}"#,
        ] {
            assert!(matches!(ExperimentConfig::from_json(bad), Err(Error::Invalid(_))), "{bad}");
        }
    }

    #[test]
    fn hash_ignores_run_local_fields() {
        let a = cfg(r#"{"kind":"scov","n":50,"p":20,"grid":[0,1],"trials":2,"master_seed":1}"#);
        let b = cfg(r#"{"kind":"scov","n":50,"p":20,"grid":[0,1],"trials":2,"master_seed":1,"threads":3,"output":"x.csv"}"#);
        let c = cfg(r#"{"kind":"scov","n":50,"p":20,"grid":[0,1],"trials":2,"master_seed":2}"#);
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn thread_precedence() {
        let c = cfg(r#"{"kind":"scov","n":50,"p":20,"grid":[0],"trials":1,"master_seed":1,"threads":3}"#);
        assert_eq!(resolve_threads(Some(2), &c).unwrap(), 2);
        assert!(resolve_threads(Some(0), &c).is_err());
    }

    #[test]
    fn run_is_thread_count_independent() {
        let c = cfg(r#"{"kind":"spiked-band","d":40,"width":7,"grid":[0,2],"trials":3,"master_seed":9,"hausdorff":true}"#);
        let a = run(&c, 1).unwrap();
        let b = run(&c, 3).unwrap();
        assert_eq!(a.records.len(), 6);
        let strip = |r: &RunOutput| r.records.iter().map(|t| TrialRecord { wall_time: 0.0, ..t.clone() }).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
        assert!(a.records.iter().all(|r| r.hausdorff.is_some() && r.overlap.is_some()));
        assert_eq!(a.records[3].theory_value, Some(2.5));
    }

    #[test]
    fn every_kind_runs() {
        for s in [
            r#"{"kind":"bbp-sweep","d":30,"ensemble":"gue","grid":[1.5],"trials":1,"master_seed":1}"#,
            r#"{"kind":"block-phase","spec":{"block_sizes":[10,20],"B":[[2,0.5],[0.5,1]]},"grid":[1],"trials":1,"master_seed":1}"#,
            r#"{"kind":"kikuchi","n":8,"p":4,"ell":2,"grid":[3],"trials":1,"master_seed":1}"#,
            r#"{"kind":"decode","d":40,"k":6,"grid":[1.5],"trials":1,"master_seed":1}"#,
            r#"{"kind":"csbm","n":40,"p":30,"grid":[2],"trials":1,"master_seed":1}"#,
            r#"{"kind":"scov","n":60,"p":20,"matrix":"neg-error","grid":[1],"trials":1,"master_seed":1}"#,
        ] {
            let out = run(&cfg(s), 1).unwrap_or_else(|e| panic!("{s}: {e}"));
            assert_eq!(out.records.len(), 1);
            assert!(out.records[0].lambda_max.is_finite());
            assert!(out.records[0].theory_value.is_some());
        }
    }

    #[test]
    fn outputs_on_disk() {
        let c = cfg(r#"{"kind":"scov","n":60,"p":20,"grid":[0,2],"trials":2,"master_seed":4}"#);
        let out = run(&c, 1).unwrap();
        let dir = std::env::temp_dir().join(format!("freespec-harness-{}", std::process::id()));
        let paths = write_outputs(&out, &dir.join("run.csv"), &c.plot_style()).unwrap();
        let csv = std::fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(csv.lines().count(), 2 + 4);
        let vl: Value = serde_json::from_str(&std::fs::read_to_string(&paths[2]).unwrap()).unwrap();
        assert_eq!(vl["layer"].as_array().unwrap().len(), 5);
        assert!(paths[1].ends_with("run.summary.json"));
        std::fs::remove_dir_all(dir).unwrap();
    }
}

//! Seeded multi-run experiments driven by a JSON config, with CSV/JSON
//! artifacts and a manifest of content hashes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::direction_estimator::{combine_runs, CapVisitAccumulator, DirectionSetEstimate, EstimatorConfig};
use crate::error::{Error, Result};
use crate::hull_tracker::{hull_growth_report, HullObserver, HullReport, HullState};
use crate::projection_classifier::{
    classify, projections_csv, scan_exceptional, ClassifierThresholds, ExceptionalCandidate, ProjectionObserver,
    ProjectionStats,
};
use crate::samplers::{make_increment_sampler, IncrementSampler, IncrementSpec, ScalarLaw};
use crate::sphere_geom::direction_grid;
use crate::walk_engine::{run_walk_stream, sha256_hex, Observer, RunOptions, TrajectoryRecord};
use crate::rng;

fn one() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("angwalk-out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: IncrementSpec,
    pub n_steps: u64,
    #[serde(default = "one")]
    pub n_runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub classifier: ClassifierThresholds,
    /// Projection directions; defaults to the estimator grid size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection_grid: Option<usize>,
    #[serde(default)]
    pub track_hull: bool,
    /// Record every step up to this index in the trajectory CSV.
    #[serde(default)]
    pub dense_cap: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(spec: IncrementSpec, n_steps: u64) -> Self {
        ExperimentConfig {
            spec,
            n_steps,
            n_runs: 1,
            base_seed: 0,
            estimator: EstimatorConfig::default(),
            classifier: ClassifierThresholds::default(),
            projection_grid: None,
            track_hull: false,
            dense_cap: 0,
            workers: None,
            output_dir: default_output(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate().map_err(|e| match e {
            Error::InvalidSpec { field, reason } => Error::config(format!("spec.{field}"), reason),
            other => other,
        })?;
        if self.n_steps < 8 {
            return Err(Error::config("n_steps", format!("must be at least 8, got {}", self.n_steps)));
        }
        if self.n_runs == 0 {
            return Err(Error::config("n_runs", "must be at least 1"));
        }
        if self.projection_grid == Some(0) {
            return Err(Error::config("projection_grid", "must be positive"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be positive"));
        }
        self.estimator.validate()?;
        self.classifier.validate()?;
        Ok(())
    }

    /// Estimator settings with dimension- and law-dependent defaults filled in.
    pub fn resolved_estimator(&self) -> EstimatorConfig {
        let mut e = self.estimator.clone();
        let d = self.spec.dimension;
        e.grid_size.get_or_insert(crate::direction_estimator::default_grid_size(d));
        let log_tail = self.spec.laws.contains(&ScalarLaw::LogTail);
        e.r0.get_or_insert(if log_tail { 1e3 } else { 10.0 });
        e
    }

    /// SHA-256 of the config with run-environment fields cleared.
    pub fn config_hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.workers = None;
        sha256_hex(serde_json::to_string(&c).expect("config serializes").as_bytes())
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub index: usize,
    pub seed: String,
    pub record: TrajectoryRecord,
    pub estimate: DirectionSetEstimate,
    pub projections: Vec<ProjectionStats>,
    pub exceptional: Vec<ExceptionalCandidate>,
    pub hull: Option<HullReport>,
}

fn run_one(cfg: &ExperimentConfig, sampler: &IncrementSampler, est: &EstimatorConfig, index: usize) -> Result<RunResult> {
    let d = cfg.spec.dimension;
    let mut acc = CapVisitAccumulator::new(d, est)?;
    let m = cfg.projection_grid.or(est.grid_size).unwrap_or(64);
    let mut proj = ProjectionObserver::new(direction_grid(d, m, est.grid_seed)?);
    let mut hull = if cfg.track_hull {
        Some(HullObserver::new(HullState::with_defaults(d)?))
    } else {
        None
    };
    let mut observers: Vec<&mut dyn Observer> = vec![&mut acc, &mut proj];
    if let Some(h) = hull.as_mut() {
        observers.push(h);
    }
    let opts = RunOptions { dense_cap: cfg.dense_cap };
    let record = run_walk_stream(sampler, cfg.n_steps, cfg.base_seed, index as u64, &mut observers, &opts)?;
    let seed = rng::split_label(cfg.base_seed, index as u64);
    let estimate = acc.finalize_with_meta(seed.clone(), cfg.n_steps)?;
    let projections = proj.stats();
    let exceptional = if projections.first().is_some_and(|p| p.checkpoints.len() >= 4) {
        scan_exceptional(&projections, &cfg.classifier)?
    } else {
        Vec::new()
    };
    Ok(RunResult {
        index,
        seed,
        record,
        estimate,
        projections,
        exceptional,
        hull: hull.as_ref().map(hull_growth_report),
    })
}

/// Runs every walk of the experiment without writing anything. Results come
/// back ordered by run index whatever the scheduling.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    let sampler = make_increment_sampler(&cfg.spec)?;
    let est = cfg.resolved_estimator();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig {
            field: "workers".into(),
            reason: e.to_string(),
        })?;
    pool.install(|| {
        (0..cfg.n_runs)
            .into_par_iter()
            .map(|i| run_one(cfg, &sampler, &est, i))
            .collect()
    })
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
    pub manifest: serde_json::Value,
}

fn verdict_counts(stats: &[ProjectionStats], thr: &ClassifierThresholds) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::new();
    for s in stats {
        let v = classify(s, thr).map_or("UNDECIDED", |v| v.as_str());
        *out.entry(v).or_insert(0) += 1;
    }
    out
}

pub fn summarize(cfg: &ExperimentConfig, runs: &[RunResult]) -> Result<serde_json::Value> {
    let est_cfg = cfg.resolved_estimator();
    let per_run: Vec<serde_json::Value> = runs
        .iter()
        .map(|r| {
            let last = r.record.final_row();
            json!({
                "index": r.index,
                "seed": r.seed,
                "steps_completed": last.map_or(0, |l| l.n),
                "overflowed": r.record.overflowed,
                "saturation_events": r.record.saturation_events,
                "final_ln_norm": last.map(|l| l.ln_norm),
                "final_direction": last.map(|l| l.unit.clone()),
                "coverage": r.estimate.coverage(),
                "in_points": r.estimate.in_points(),
                "global_top_level": r.estimate.global_top,
                "projection_verdicts": verdict_counts(&r.projections, &cfg.classifier),
                "exceptional_candidates": r.exceptional.len(),
                "hull_flags": r.hull.as_ref().map(|h| h.flags.clone()),
                "trajectory_sha256": r.record.content_hash(),
            })
        })
        .collect();
    let consensus = if runs.len() >= 2 {
        let estimates: Vec<DirectionSetEstimate> = runs.iter().map(|r| r.estimate.clone()).collect();
        let c = combine_runs(&estimates)?;
        json!({
            "verdicts": c.points.iter().map(|p| p.verdict).collect::<Vec<_>>(),
            "agreement_per_point": c.points.iter().map(|p| p.agreement).collect::<Vec<_>>(),
            "agreement": c.agreement,
            "coverage": c.coverage,
            "union_coverage": c.union_coverage,
            "mean_run_coverage": c.mean_run_coverage,
        })
    } else {
        serde_json::Value::Null
    };
    Ok(json!({
        "config_hash": cfg.config_hash(),
        "n_runs": cfg.n_runs,
        "n_steps": cfg.n_steps,
        "position_mode": cfg.spec.position_mode(),
        "thresholds": {
            "estimator": est_cfg,
            "classifier": cfg.classifier,
            "note": "verdict thresholds are finite-sample heuristics",
        },
        "runs": per_run,
        "consensus": consensus,
    }))
}

/// Runs the experiment and writes its artifact set into `output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let runs = simulate(cfg)?;
    let dir = &cfg.output_dir;
    let mut written: Vec<(String, String)> = Vec::new();
    let mut write = |name: String, body: String| -> Result<()> {
        fs::write(dir.join(&name), &body)?;
        written.push((name, sha256_hex(body.as_bytes())));
        Ok(())
    };
    for r in &runs {
        let tag = format!("run_{:03}", r.index);
        let mut traj = r.record.to_csv();
        if cfg.dense_cap > 0 {
            traj = r.record.dense_csv();
        }
        write(format!("{tag}_trajectory.csv"), traj)?;
        write(format!("{tag}_directions.csv"), r.estimate.to_csv())?;
        write(format!("{tag}_projections.csv"), projections_csv(&r.projections, &cfg.classifier))?;
        if let Some(h) = &r.hull {
            write(format!("{tag}_hull.csv"), h.to_csv())?;
        }
    }
    if runs.len() >= 2 {
        let estimates: Vec<DirectionSetEstimate> = runs.iter().map(|r| r.estimate.clone()).collect();
        let c = combine_runs(&estimates)?;
        write("consensus.csv".into(), c.to_csv(&estimates[0].grid))?;
    }
    let summary = summarize(cfg, &runs)?;
    write("summary.json".into(), serde_json::to_string_pretty(&summary)? + "\n")?;
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": cfg.config_hash(),
        "base_seed": cfg.base_seed,
        "seeds": runs.iter().map(|r| r.seed.clone()).collect::<Vec<_>>(),
        "files": written.iter().map(|(n, h)| json!({"name": n, "sha256": h})).collect::<Vec<_>>(),
    });
    let mut files: Vec<PathBuf> = written.iter().map(|(n, _)| dir.join(n)).collect();
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    files.push(dir.join("manifest.json"));
    Ok(ExperimentOutcome {
        files,
        summary,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drift_config(dir: &Path) -> ExperimentConfig {
        let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Constant { value: 1.0 }, ScalarLaw::Rademacher]);
        let mut c = ExperimentConfig::new(spec, 1000);
        c.base_seed = 7;
        c.output_dir = dir.to_path_buf();
        c
    }

    #[test]
    fn minimal_config_writes_five_files() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = drift_config(tmp.path());
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.files.len(), 5);
        let m1 = fs::read(tmp.path().join("manifest.json")).unwrap();
        run_experiment(&cfg).unwrap();
        assert_eq!(m1, fs::read(tmp.path().join("manifest.json")).unwrap());
    }

    #[test]
    fn ten_runs_report_agreement() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = drift_config(tmp.path());
        cfg.n_runs = 10;
        cfg.track_hull = true;
        let out = run_experiment(&cfg).unwrap();
        let per_point = out.summary["consensus"]["agreement_per_point"].as_array().unwrap();
        assert_eq!(per_point.len(), 64);
        assert!(tmp.path().join("consensus.csv").exists());
        assert!(tmp.path().join("run_009_hull.csv").exists());
    }

    #[test]
    fn scheduling_does_not_change_bytes() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut ca = drift_config(a.path());
        ca.n_runs = 4;
        ca.workers = Some(1);
        let mut cb = drift_config(b.path());
        cb.n_runs = 4;
        cb.workers = Some(3);
        run_experiment(&ca).unwrap();
        run_experiment(&cb).unwrap();
        for name in ["run_002_trajectory.csv", "run_003_directions.csv", "summary.json", "manifest.json"] {
            assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
        }
    }

    #[test]
    fn bad_alpha_names_the_field() {
        let text = r#"{"spec":{"dimension":2,"form":"coordinate_product",
            "laws":[{"kind":"rademacher"},{"kind":"s_two_sided","alpha":-1.0}]},"n_steps":100}"#;
        let msg = ExperimentConfig::from_json(text).unwrap_err().to_string();
        assert!(msg.contains("spec.laws[1]") && msg.contains("alpha"), "{msg}");
        let text = r#"{"spec":{"dimension":1,"form":"coordinate_product","laws":[{"kind":"rademacher"}]},
            "n_steps":100,"n_runs":0}"#;
        assert!(ExperimentConfig::from_json(text).unwrap_err().to_string().contains("n_runs"));
        let text = r#"{"spec":{"dimension":1,"form":"coordinate_product","laws":[{"kind":"rademacher"}]},
            "n_steps":100,"estimator":{"levels":0}}"#;
        assert!(ExperimentConfig::from_json(text).unwrap_err().to_string().contains("estimator.levels"));
    }

    #[test]
    fn log_tail_raises_the_ladder() {
        let spec = IncrementSpec::radial_product(vec![vec![1.0, 0.0], vec![0.0, 1.0]], None, ScalarLaw::LogTail);
        let cfg = ExperimentConfig::new(spec, 100);
        assert_eq!(cfg.resolved_estimator().r0, Some(1e3));
    }
}

//! Monte-Carlo comparison of alignment solvers on a simulated stereo scene.
//!
//! Each trial observes a fixed 12-landmark pyramid from two camera poses
//! related by `T_gt`, backprojects the noisy stereo measurements, builds
//! propagated weights, and starts every solver from the same random guess.
//! Trial `k` draws from its own stream seeded with `seed + k`, so serial and
//! parallel runs agree bit-for-bit.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve, stereo, AlignmentProblem, PointPair, SolverConfig, StereoRig, UpdateMap};
use crate::error::{Error, Result};
use crate::genfun::GeneratingFunction;
use crate::se3::TransformMatrix;
use crate::so3::{rot_from_vec, RotationVector3};

/// Four landmarks on each of the planes `z = 5, 10, 15`, narrowing with depth.
pub fn pyramid_landmarks() -> [Vector3<f64>; 12] {
    const PLANES: [(f64, f64); 3] = [(5.0, 1.0), (10.0, 0.7), (15.0, 0.4)];
    const CORNERS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
    let mut out = [Vector3::zeros(); 12];
    for (i, (z, s)) in PLANES.iter().enumerate() {
        for (j, (x, y)) in CORNERS.iter().enumerate() {
            out[4 * i + j] = Vector3::new(x * s, y * s, *z);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub name: String,
    pub config: SolverConfig,
}

impl SolverSpec {
    pub fn new(config: SolverConfig) -> Self {
        SolverSpec { name: config.update_map.to_string(), config }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub solvers: Vec<SolverSpec>,
    /// Worker threads; results do not depend on it.
    pub threads: usize,
    pub rig: StereoRig,
    /// Maps first-frame points onto second-frame points.
    pub ground_truth: TransformMatrix,
    /// Initial rotation angle is uniform on `[0, init_angle_max]`.
    pub init_angle_max: f64,
    /// Initial translation components are uniform on `[−w, w]`.
    pub init_translation_half_width: f64,
    /// A run succeeds if its final cost is within this relative margin of the trial's best.
    pub success_rel_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            trials: 1000,
            solvers: vec![
                SolverSpec::new(SolverConfig::with_map(UpdateMap::ExpMap)),
                SolverSpec::new(SolverConfig::with_map(UpdateMap::CayPer)),
            ],
            threads: 1,
            rig: StereoRig::default(),
            ground_truth: TransformMatrix::from_translation(&Vector3::new(0.0, 0.0, -1.0)),
            init_angle_max: 0.7 * PI,
            init_translation_half_width: 2.0,
            success_rel_tol: 0.01,
        }
    }
}

/// The data and initial guess shared by all solvers within one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub problem: AlignmentProblem,
    pub init: TransformMatrix,
}

/// Rotation axis uniform on the sphere, angle and translation uniform.
pub fn random_initial_guess<G: Rng + ?Sized>(rng: &mut G, angle_max: f64, half_width: f64) -> TransformMatrix {
    let axis: [f64; 3] = UnitSphere.sample(rng);
    let angle = rng.random_range(0.0..=angle_max);
    let r = Vector3::from_fn(|_, _| rng.random_range(-half_width..=half_width));
    let phi = RotationVector3 { v: Vector3::from(axis) * angle, gen: GeneratingFunction::RotationVector };
    // angle ≤ π < 2π is always inside the rotation-vector range
    let c = rot_from_vec(&phi).expect("initial angle within range");
    TransformMatrix::from_parts(&c, &r)
}

pub fn generate_trial(cfg: &ExperimentConfig, index: usize) -> Result<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(index as u64));
    let mut pairs = Vec::with_capacity(12);
    for l in pyramid_landmarks() {
        let l2 = cfg.ground_truth.rotation().matrix() * l + cfg.ground_truth.translation();
        let y_p = stereo::stereo_project_noisy(&cfg.rig, &l, &mut rng)?;
        let y_q = stereo::stereo_project_noisy(&cfg.rig, &l2, &mut rng)?;
        pairs.push(PointPair {
            p: stereo::stereo_backproject(&cfg.rig, &y_p)?,
            q: stereo::stereo_backproject(&cfg.rig, &y_q)?,
            w: stereo::stereo_weights(&cfg.rig, &y_p, &y_q)?,
        });
    }
    let init = random_initial_guess(&mut rng, cfg.init_angle_max, cfg.init_translation_half_width);
    Ok(Trial { problem: AlignmentProblem::new(pairs)?, init })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSolverResult {
    pub solver: String,
    /// `None` when the solver raised an error.
    pub final_cost: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub success: bool,
    pub cost_history: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Lowest final cost over all solvers and the ground-truth-initialized runs.
    pub best_cost: f64,
    pub results: Vec<TrialSolverResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub name: String,
    pub success_rate: f64,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub final_costs: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub trials: usize,
    pub per_solver: Vec<SolverSummary>,
    pub per_trial: Vec<TrialRecord>,
}

impl ExperimentReport {
    pub fn solver(&self, name: &str) -> Option<&SolverSummary> {
        self.per_solver.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn run_trial(cfg: &ExperimentConfig, index: usize) -> Result<TrialRecord> {
    let trial = generate_trial(cfg, index)?;
    let runs: Vec<_> = cfg.solvers.iter().map(|s| solve(&trial.problem, &s.config, &trial.init)).collect();
    let reference = cfg
        .solvers
        .iter()
        .filter_map(|s| solve(&trial.problem, &s.config, &cfg.ground_truth).ok())
        .map(|r| r.final_cost());
    let best_cost = runs
        .iter()
        .filter_map(|r| r.as_ref().ok().map(|r| r.final_cost()))
        .chain(reference)
        .filter(|c| c.is_finite())
        .fold(f64::INFINITY, f64::min);
    let threshold = best_cost + cfg.success_rel_tol * best_cost.abs();
    let results = cfg
        .solvers
        .iter()
        .zip(runs)
        .map(|(spec, run)| match run {
            Ok(r) => {
                let fc = r.final_cost();
                TrialSolverResult {
                    solver: spec.name.clone(),
                    final_cost: Some(fc),
                    iterations: r.iterations,
                    converged: r.converged,
                    success: fc <= threshold,
                    cost_history: r.cost_history,
                    error: None,
                }
            }
            Err(e) => TrialSolverResult {
                solver: spec.name.clone(),
                final_cost: None,
                iterations: 0,
                converged: false,
                success: false,
                cost_history: Vec::new(),
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(TrialRecord { trial: index, best_cost, results })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.trials == 0 || cfg.solvers.is_empty() {
        return Err(Error::Domain("experiment needs at least one trial and one solver".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.max(1))
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let per_trial: Vec<TrialRecord> =
        pool.install(|| (0..cfg.trials).into_par_iter().map(|k| run_trial(cfg, k)).collect::<Result<Vec<_>>>())?;
    let per_solver = cfg
        .solvers
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let rs: Vec<_> = per_trial.iter().map(|t| &t.results[i]).collect();
            let n = rs.len() as f64;
            SolverSummary {
                name: spec.name.clone(),
                success_rate: rs.iter().filter(|r| r.success).count() as f64 / n,
                mean_iterations: rs.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
                max_iterations: rs.iter().map(|r| r.iterations).max().unwrap_or(0),
                final_costs: rs.iter().map(|r| r.final_cost).collect(),
            }
        })
        .collect();
    Ok(ExperimentReport { seed: cfg.seed, trials: cfg.trials, per_solver, per_trial })
}

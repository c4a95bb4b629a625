//! Weighted point-cloud alignment with known correspondences.
//!
//! The cost is `J(T) = ½ Σ eⱼᵀ Wⱼ eⱼ` with `eⱼ = qⱼ − T pⱼ` on homogeneous
//! points. Two iterative solvers are provided:
//!
//! * [`solve_general`]: Gauss–Newton with the perturbation `T ← T(ξ) T`
//!   for any generating function (the exponential map by default);
//! * [`solve_cayper`]: the same scheme but linearized through the Cayley
//!   transform, `T ← (1 − ½ξ^∧)⁻¹(1 + ½ξ^∧) T`. Multiplying the new error by
//!   `(1 − ½ξ^∧)` makes it *exactly* linear in `ξ`, so the first iteration from
//!   the identity is already a closed-form linear estimate.

mod experiment;
mod io;
mod stereo;

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Matrix4x6, Matrix6, SymmetricEigen, Vector3, Vector4, Vector6};

use crate::error::{Error, Result};
use crate::genfun::GeneratingFunction;
use crate::linalg;
use crate::se3::{hat6, pose_from_vec, CouplingChoice, PoseVector6, TransformMatrix};
use crate::so3::hat3;

pub use experiment::{
    generate_trial, pyramid_landmarks, random_initial_guess, run_experiment, ExperimentConfig, ExperimentReport,
    SolverSpec, SolverSummary, Trial, TrialRecord, TrialSolverResult,
};
pub use io::{read_problem_csv, write_cost_history_csv, write_problem_csv};
pub use stereo::{
    backprojection_jacobian, stereo_backproject, stereo_project, stereo_project_noisy, stereo_weights, StereoRig,
};

/// Normal matrices with a larger eigenvalue ratio are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;
const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// A Euclidean point in homogeneous form `(v, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousPoint {
    pub v: Vector3<f64>,
}

impl HomogeneousPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        HomogeneousPoint { v: Vector3::new(x, y, z) }
    }

    pub fn to_vector4(&self) -> Vector4<f64> {
        self.v.push(1.0)
    }

    pub fn transformed(&self, t: &TransformMatrix) -> HomogeneousPoint {
        HomogeneousPoint { v: t.rotation().matrix() * self.v + t.translation() }
    }
}

impl From<Vector3<f64>> for HomogeneousPoint {
    fn from(v: Vector3<f64>) -> Self {
        HomogeneousPoint { v }
    }
}

/// One correspondence with its 4×4 weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointPair {
    pub p: HomogeneousPoint,
    pub q: HomogeneousPoint,
    pub w: Matrix4<f64>,
}

/// A validated set of weighted correspondences.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentProblem {
    pairs: Vec<PointPair>,
}

impl AlignmentProblem {
    /// Checks that every weight is symmetric (to 1e-12) and positive semidefinite.
    pub fn new(pairs: Vec<PointPair>) -> Result<Self> {
        for (j, pair) in pairs.iter().enumerate() {
            let asym = (pair.w - pair.w.transpose()).amax();
            if asym > SYMMETRY_TOL {
                return Err(Error::Constraint(format!("weight {j} is not symmetric ({asym:e})")));
            }
            let min_eig = pair.w.symmetric_eigenvalues().min();
            if min_eig < -PSD_TOL {
                return Err(Error::Constraint(format!("weight {j} is not PSD (eigenvalue {min_eig:e})")));
            }
        }
        Ok(AlignmentProblem { pairs })
    }

    /// Unit 3D weights on every pair.
    pub fn unweighted(p: &[Vector3<f64>], q: &[Vector3<f64>]) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::Constraint("point lists differ in length".into()));
        }
        let mut w = Matrix4::identity();
        w[(3, 3)] = 0.0;
        Self::new(p.iter().zip(q).map(|(p, q)| PointPair { p: (*p).into(), q: (*q).into(), w }).collect())
    }

    pub fn pairs(&self) -> &[PointPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// `p^⊙` for a point with unit homogeneous coordinate: `[1, −v^∧; 0ᵀ, 0ᵀ]`.
pub fn odot(p: &HomogeneousPoint) -> Matrix4x6<f64> {
    odot4(&p.to_vector4())
}

/// `p^⊙ = [s 1, −v^∧; 0ᵀ, 0ᵀ]` for a general homogeneous `p = (v, s)`, so that `ξ^∧ p = p^⊙ ξ`.
pub fn odot4(p: &Vector4<f64>) -> Matrix4x6<f64> {
    let mut m = Matrix4x6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&(nalgebra::Matrix3::identity() * p[3]));
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-hat3(&p.xyz())));
    m
}

pub fn cost(problem: &AlignmentProblem, t: &TransformMatrix) -> f64 {
    problem
        .pairs
        .iter()
        .map(|pair| {
            let e = pair.q.to_vector4() - t.matrix() * pair.p.to_vector4();
            0.5 * (e.transpose() * pair.w * e)[(0, 0)]
        })
        .sum()
}

/// `Σ (T p)^⊙ᵀ W e`, the (negated) gradient of `J` under a left perturbation.
pub fn gradient(problem: &AlignmentProblem, t: &TransformMatrix) -> Vector6<f64> {
    normal_equations(problem, t, Linearization::Left).1
}

/// How the pose update is applied after each linear solve.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum UpdateMap {
    /// `T ← exp(ξ^∧) T`, the rotation-vector pose map.
    #[default]
    ExpMap,
    /// `T ← T(ξ) T` with the given generating function and the screw coupling.
    Gen(GeneratingFunction),
    /// `T ← (1 − ½ξ^∧)⁻¹(1 + ½ξ^∧) T` with the Cayley linearization.
    CayPer,
}

impl fmt::Display for UpdateMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpdateMap::ExpMap => f.write_str("expmap"),
            UpdateMap::CayPer => f.write_str("cayper"),
            UpdateMap::Gen(g) => write!(f, "{g}"),
        }
    }
}

impl FromStr for UpdateMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expmap" => Ok(UpdateMap::ExpMap),
            "cayper" => Ok(UpdateMap::CayPer),
            other => other.parse::<GeneratingFunction>().map(UpdateMap::Gen).map_err(|_| {
                Error::Parse(format!("unknown solver '{s}' (expected expmap, cayper or a generating function)"))
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub update_map: UpdateMap,
    /// Stop once `ξᵀξ` falls below this.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { update_map: UpdateMap::ExpMap, tol: 1e-10, max_iters: 100 }
    }
}

impl SolverConfig {
    pub fn new(update_map: UpdateMap, tol: f64, max_iters: usize) -> Result<Self> {
        if !(tol > 0.0) || max_iters == 0 {
            return Err(Error::Domain(format!("solver needs tol > 0 and max_iters ≥ 1 (got {tol}, {max_iters})")));
        }
        Ok(SolverConfig { update_map, tol, max_iters })
    }

    pub fn with_map(update_map: UpdateMap) -> Self {
        SolverConfig { update_map, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub t_final: TransformMatrix,
    /// `J` at the initial guess and after every iteration.
    pub cost_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl SolverReport {
    pub fn final_cost(&self) -> f64 {
        *self.cost_history.last().expect("history holds the initial cost")
    }
}

/// Runs whichever solver the config names.
pub fn solve(problem: &AlignmentProblem, config: &SolverConfig, init: &TransformMatrix) -> Result<SolverReport> {
    match config.update_map {
        UpdateMap::CayPer => solve_cayper(problem, config, init),
        _ => solve_general(problem, config, init),
    }
}

/// Gauss–Newton with `T ← T(ξ) T`, solving `(Σ GᵀWG) ξ = Σ GᵀW e` with `G = (T p)^⊙`.
pub fn solve_general(
    problem: &AlignmentProblem,
    config: &SolverConfig,
    init: &TransformMatrix,
) -> Result<SolverReport> {
    let gen = match config.update_map {
        UpdateMap::ExpMap => GeneratingFunction::RotationVector,
        UpdateMap::Gen(g) => g,
        UpdateMap::CayPer => return Err(Error::Constraint("solve_general does not handle the CayPer update".into())),
    };
    iterate(problem, config, init, Linearization::Left, |xi| {
        pose_from_vec(&PoseVector6::from_xi(xi, gen, CouplingChoice::Screw)?)
    })
}

/// CayPer: solve `(Σ HᵀWH) ζ = Σ HᵀW e` with `H = (q + T p)^⊙`, set `ξ = 2ζ` and
/// update through the first-order Cayley transform.
pub fn solve_cayper(problem: &AlignmentProblem, config: &SolverConfig, init: &TransformMatrix) -> Result<SolverReport> {
    iterate(problem, config, init, Linearization::Cayley, |xi| {
        linalg::rational_factor(&hat6(xi), 0.5, 0.5).map(TransformMatrix::new_unchecked)
    })
}

/// The perturbation `ξ` from a single CayPer linear solve at `t`.
pub fn cayper_step(problem: &AlignmentProblem, t: &TransformMatrix) -> Result<Vector6<f64>> {
    let (a, b) = normal_equations(problem, t, Linearization::Cayley);
    Ok(solve_spd(&a, &b)? * 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Linearization {
    Left,
    Cayley,
}

fn normal_equations(
    problem: &AlignmentProblem,
    t: &TransformMatrix,
    lin: Linearization,
) -> (Matrix6<f64>, Vector6<f64>) {
    let mut a = Matrix6::zeros();
    let mut b = Vector6::zeros();
    for pair in &problem.pairs {
        let tp = t.matrix() * pair.p.to_vector4();
        let q = pair.q.to_vector4();
        let e = q - tp;
        let g = match lin {
            Linearization::Left => odot4(&tp),
            Linearization::Cayley => odot4(&(q + tp)),
        };
        let wg = pair.w * g;
        a += g.transpose() * wg;
        b += wg.transpose() * e;
    }
    (a, b)
}

fn iterate(
    problem: &AlignmentProblem,
    config: &SolverConfig,
    init: &TransformMatrix,
    lin: Linearization,
    perturb: impl Fn(&Vector6<f64>) -> Result<TransformMatrix>,
) -> Result<SolverReport> {
    let mut t = *init;
    let mut history = vec![cost(problem, &t)];
    for it in 1..=config.max_iters {
        let (a, b) = normal_equations(problem, &t, lin);
        let mut xi = solve_spd(&a, &b)?;
        if lin == Linearization::Cayley {
            xi *= 2.0;
        }
        t = perturb(&xi)? * t;
        history.push(cost(problem, &t));
        if xi.dot(&xi) < config.tol {
            return Ok(SolverReport { t_final: t, cost_history: history, iterations: it, converged: true });
        }
    }
    Ok(SolverReport { t_final: t, cost_history: history, iterations: config.max_iters, converged: false })
}

/// Cholesky solve guarded by the eigenvalue ratio of the symmetric normal matrix.
fn solve_spd(a: &Matrix6<f64>, b: &Vector6<f64>) -> Result<Vector6<f64>> {
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let asym = (a - a.transpose()).amax();
    assert!(asym <= SYMMETRY_TOL * scale, "normal matrix lost symmetry ({asym:e} relative to {scale:e})");
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    if !(lo > 0.0) || hi / lo > CONDITION_LIMIT {
        return Err(Error::DegenerateGeometry(format!(
            "normal matrix condition {:e} exceeds {CONDITION_LIMIT:e}",
            hi / lo
        )));
    }
    sym.cholesky()
        .map(|c| c.solve(b))
        .ok_or_else(|| Error::DegenerateGeometry("normal matrix is not positive definite".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::se3::PoseVector6;
    use approx::assert_relative_eq;

    fn pyramid() -> Vec<Vector3<f64>> {
        pyramid_landmarks().to_vec()
    }

    fn gt() -> TransformMatrix {
        let xi = Vector6::new(0.3, -0.5, 1.0, 0.4, -0.2, 0.6);
        pose_from_vec(&PoseVector6::from_xi(&xi, GeneratingFunction::RotationVector, CouplingChoice::Screw).unwrap())
            .unwrap()
    }

    fn noiseless() -> AlignmentProblem {
        let t = gt();
        let p = pyramid();
        let q: Vec<_> = p.iter().map(|x| HomogeneousPoint::from(*x).transformed(&t).v).collect();
        AlignmentProblem::unweighted(&p, &q).unwrap()
    }

    #[test]
    fn odot_examples() {
        let o = odot(&HomogeneousPoint::new(0.0, 0.0, 0.0));
        let mut want = Matrix4x6::zeros();
        want.fixed_view_mut::<3, 3>(0, 0).fill_with_identity();
        assert_eq!(o, want);
        let o = odot(&HomogeneousPoint::new(1.0, 0.0, 0.0));
        assert_eq!(o.fixed_view::<3, 3>(0, 3), -hat3(&Vector3::x()));
    }

    #[test]
    fn cost_examples() {
        let p = [Vector3::new(1.0, 0.0, 0.0)];
        let q = [Vector3::zeros()];
        let mut w = Matrix4::identity();
        w[(3, 3)] = 0.0;
        let prob = AlignmentProblem::new(vec![PointPair { p: p[0].into(), q: q[0].into(), w }]).unwrap();
        assert_eq!(cost(&prob, &TransformMatrix::identity()), 0.5);
        assert_eq!(cost(&noiseless(), &gt()), 0.0);
    }

    #[test]
    fn rejects_bad_weights() {
        let mut w = Matrix4::identity();
        w[(0, 1)] = 1e-6;
        let pair = PointPair { p: HomogeneousPoint::new(0.0, 0.0, 1.0), q: HomogeneousPoint::new(0.0, 0.0, 1.0), w };
        assert!(matches!(AlignmentProblem::new(vec![pair]), Err(Error::Constraint(_))));
        let pair = PointPair { w: -Matrix4::identity(), ..pair };
        assert!(matches!(AlignmentProblem::new(vec![pair]), Err(Error::Constraint(_))));
    }

    #[test]
    fn converges_in_one_step_from_ground_truth() {
        for map in [UpdateMap::ExpMap, UpdateMap::CayPer] {
            let r = solve(&noiseless(), &SolverConfig::with_map(map), &gt()).unwrap();
            assert!(r.converged);
            assert_eq!(r.iterations, 1);
            assert_eq!(r.cost_history.len(), 2);
        }
    }

    #[test]
    fn recovers_ground_truth_from_identity() {
        for map in [UpdateMap::ExpMap, UpdateMap::CayPer, UpdateMap::Gen(GeneratingFunction::CayleyGibbsRodrigues)] {
            let r = solve(&noiseless(), &SolverConfig::with_map(map), &TransformMatrix::identity()).unwrap();
            assert!(r.converged, "{map}");
            assert_relative_eq!(*r.t_final.matrix(), *gt().matrix(), epsilon = 1e-8);
            assert_eq!(r.cost_history.len(), r.iterations + 1);
        }
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let p: Vec<_> = (0..5).map(|k| Vector3::new(k as f64, 0.0, 5.0)).collect();
        let prob = AlignmentProblem::unweighted(&p, &p).unwrap();
        let r = solve(&prob, &SolverConfig::default(), &TransformMatrix::identity());
        assert!(matches!(r, Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn parse_update_maps() {
        assert_eq!("expmap".parse::<UpdateMap>().unwrap(), UpdateMap::ExpMap);
        assert_eq!("cayper".parse::<UpdateMap>().unwrap(), UpdateMap::CayPer);
        assert_eq!("mrp".parse::<UpdateMap>().unwrap(), UpdateMap::Gen(GeneratingFunction::ModifiedRodrigues));
        assert!("newton".parse::<UpdateMap>().is_err());
        assert!(SolverConfig::new(UpdateMap::ExpMap, 0.0, 10).is_err());
        assert!(SolverConfig::new(UpdateMap::ExpMap, 1e-9, 0).is_err());
    }
}

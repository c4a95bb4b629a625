//! Trajectory generators built on the pose maps: straight-line interpolation
//! in parameter space and a first-order pose-servoing simulation.

use std::io::{Read, Write};

use nalgebra::{Matrix3, Matrix4, Vector3};

use crate::error::{Error, Result};
use crate::se3::{pose_from_vec, vec_from_pose, PoseVector6, TransformMatrix};

/// Linear interpolation between two pose vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationSpec {
    pub xi_initial: PoseVector6,
    pub xi_final: PoseVector6,
    pub steps: usize,
}

impl InterpolationSpec {
    pub fn new(xi_initial: PoseVector6, xi_final: PoseVector6, steps: usize) -> Result<Self> {
        if !xi_initial.gen.same_function(xi_final.gen) || xi_initial.coupling != xi_final.coupling {
            return Err(Error::Constraint(
                "interpolation endpoints must share generating function and coupling".into(),
            ));
        }
        if steps < 2 {
            return Err(Error::Domain(format!("need at least 2 interpolation steps, got {steps}")));
        }
        Ok(InterpolationSpec { xi_initial, xi_final, steps })
    }

    /// `s_k = k/(steps − 1)`.
    pub fn s_values(&self) -> Vec<f64> {
        let n = (self.steps - 1) as f64;
        (0..self.steps).map(|k| k as f64 / n).collect()
    }

    /// The interpolated parameter vectors `ξ(s) = (1 − s) ξ_final + s ξ_initial`.
    ///
    /// `s = 0` is `ξ_final`; callers wanting the conventional direction swap
    /// the endpoints.
    pub fn vectors(&self) -> Result<Vec<PoseVector6>> {
        let (a, b) = (self.xi_final, self.xi_initial);
        self.s_values()
            .into_iter()
            .map(|s| PoseVector6::new(a.rho * (1.0 - s) + b.rho * s, a.phi * (1.0 - s) + b.phi * s, a.gen, a.coupling))
            .collect()
    }
}

pub fn interpolate(spec: &InterpolationSpec) -> Result<Vec<TransformMatrix>> {
    spec.vectors()?.iter().map(pose_from_vec).collect()
}

/// A reference pose moving along a straight line at constant velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePath {
    pub start: TransformMatrix,
    pub velocity: Vector3<f64>,
}

impl ReferencePath {
    pub fn fixed(pose: TransformMatrix) -> Self {
        ReferencePath { start: pose, velocity: Vector3::zeros() }
    }

    pub fn at(&self, t: f64) -> TransformMatrix {
        TransformMatrix::from_parts(&self.start.rotation(), &(self.start.translation() + self.velocity * t))
    }
}

impl Default for ReferencePath {
    fn default() -> Self {
        ReferencePath { start: TransformMatrix::identity(), velocity: Vector3::new(0.5, 0.0, 0.0) }
    }
}

/// Servoing simulation parameters. `gain` is the control gain `κ` in `ξ̇ = −κ ξ_error`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServoSpec {
    pub gain: f64,
    pub dt: f64,
    pub duration: f64,
    pub reference: ReferencePath,
    pub xi0: PoseVector6,
}

impl ServoSpec {
    pub fn new(gain: f64, dt: f64, duration: f64, reference: ReferencePath, xi0: PoseVector6) -> Result<Self> {
        if !(gain > 0.0) || !(dt > 0.0) || !(duration >= dt) {
            return Err(Error::Domain(format!(
                "servo needs gain > 0, dt > 0 and duration ≥ dt (got {gain}, {dt}, {duration})"
            )));
        }
        Ok(ServoSpec { gain, dt, duration, reference, xi0 })
    }

    /// Defaults: gain 1, dt 0.01 s, 10 s, reference moving along x at 0.5 m/s from the identity.
    pub fn with_defaults(xi0: PoseVector6) -> Self {
        ServoSpec { gain: 1.0, dt: 0.01, duration: 10.0, reference: ReferencePath::default(), xi0 }
    }

    pub fn num_steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServoSample {
    pub t: f64,
    pub pose: TransformMatrix,
    pub error_norm: f64,
}

/// Forward-Euler integration of `ξ̇ = −κ ξ_error`, with
/// `ξ_error = vec_from_pose(T(ξ) T_ref(t)⁻¹)` recomputed from the group element every step.
pub fn servo_simulate(spec: &ServoSpec) -> Result<Vec<ServoSample>> {
    let (gen, coupling) = (spec.xi0.gen, spec.xi0.coupling);
    let mut xi = spec.xi0;
    let n = spec.num_steps();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 * spec.dt;
        let pose = pose_from_vec(&xi)?;
        let err = vec_from_pose(&(pose * spec.reference.at(t).inverse()), gen, coupling)?;
        out.push(ServoSample { t, pose, error_norm: err.xi().norm() });
        if k < n {
            let step = spec.gain * spec.dt;
            xi = PoseVector6::new(xi.rho - err.rho * step, xi.phi - err.phi * step, gen, coupling)?;
        }
    }
    Ok(out)
}

/// One row of a trajectory file: `step,s_or_t,tx,ty,tz,C00..C22[,error_norm]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub s_or_t: f64,
    pub pose: TransformMatrix,
    pub error_norm: Option<f64>,
}

pub fn interpolation_rows(spec: &InterpolationSpec) -> Result<Vec<TrajectoryRow>> {
    let poses = interpolate(spec)?;
    Ok(spec
        .s_values()
        .into_iter()
        .zip(poses)
        .enumerate()
        .map(|(step, (s, pose))| TrajectoryRow { step, s_or_t: s, pose, error_norm: None })
        .collect())
}

pub fn servo_rows(samples: &[ServoSample]) -> Vec<TrajectoryRow> {
    samples
        .iter()
        .enumerate()
        .map(|(step, s)| TrajectoryRow { step, s_or_t: s.t, pose: s.pose, error_norm: Some(s.error_norm) })
        .collect()
}

const POSE_COLUMNS: [&str; 12] = ["tx", "ty", "tz", "C00", "C01", "C02", "C10", "C11", "C12", "C20", "C21", "C22"];

/// `{:.16e}` keeps 17 significant digits, enough for an exact `f64` round trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectory_csv<W: Write>(w: W, rows: &[TrajectoryRow]) -> Result<()> {
    let with_error = rows.first().is_some_and(|r| r.error_norm.is_some());
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["step", "s_or_t"];
    header.extend(POSE_COLUMNS);
    if with_error {
        header.push("error_norm");
    }
    wr.write_record(&header)?;
    for r in rows {
        let t = r.pose.translation();
        let c = r.pose.rotation();
        let mut rec = vec![r.step.to_string(), fmt_f64(r.s_or_t)];
        rec.extend(t.iter().map(|&x| fmt_f64(x)));
        for i in 0..3 {
            for j in 0..3 {
                rec.push(fmt_f64(c.matrix()[(i, j)]));
            }
        }
        if with_error {
            rec.push(fmt_f64(r.error_norm.unwrap_or(f64::NAN)));
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_trajectory_csv<R: Read>(r: R) -> Result<Vec<TrajectoryRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let with_error = rd.headers()?.iter().any(|h| h == "error_norm");
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            let s = rec.get(i).ok_or_else(|| Error::Parse(format!("missing column {i}")))?;
            s.parse().map_err(|_| Error::Parse(format!("invalid number '{s}'")))
        };
        let step = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse("invalid step column".into()))?;
        let t = Vector3::new(num(2)?, num(3)?, num(4)?);
        let mut c = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                c[(i, j)] = num(5 + 3 * i + j)?;
            }
        }
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&c);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
        rows.push(TrajectoryRow {
            step,
            s_or_t: num(1)?,
            pose: TransformMatrix::new_unchecked(m),
            error_norm: if with_error { Some(num(14)?) } else { None },
        });
    }
    Ok(rows)
}

/// Largest translational distance between corresponding poses of two paths.
pub fn max_path_distance(a: &[TransformMatrix], b: &[TransformMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.matrix() - y.matrix()).amax()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::GeneratingFunction::{self, *};
    use crate::se3::CouplingChoice;

    fn pv(r: [f64; 3], p: [f64; 3], gen: GeneratingFunction) -> PoseVector6 {
        PoseVector6::new(Vector3::from(r), Vector3::from(p), gen, CouplingChoice::Screw).unwrap()
    }

    #[test]
    fn constant_when_endpoints_match() {
        let a = pv([1.0, 0.0, -1.0], [0.2, 0.3, 0.1], ModifiedRodrigues);
        let spec = InterpolationSpec::new(a, a, 5).unwrap();
        let poses = interpolate(&spec).unwrap();
        assert_eq!(poses.len(), 5);
        assert!(poses.iter().all(|p| *p == poses[0]));
    }

    #[test]
    fn endpoints_follow_the_printed_formula() {
        let a = pv([0.0; 3], [0.0; 3], RotationVector);
        let b = pv([2.0, 1.0, 0.0], [0.0, 0.0, 1.5], RotationVector);
        let spec = InterpolationSpec::new(a, b, 11).unwrap();
        let poses = interpolate(&spec).unwrap();
        assert_eq!(poses[0], pose_from_vec(&b).unwrap());
        assert_eq!(poses[10], pose_from_vec(&a).unwrap());
    }

    #[test]
    fn pure_translation_is_a_straight_line() {
        let a = pv([0.0; 3], [0.0; 3], CayleyGibbsRodrigues);
        let b = pv([3.0, -1.0, 2.0], [0.0; 3], CayleyGibbsRodrigues);
        let spec = InterpolationSpec::new(a, b, 4).unwrap();
        for (p, s) in interpolate(&spec).unwrap().iter().zip(spec.s_values()) {
            assert!((p.translation() - b.rho * (1.0 - s)).amax() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let a = pv([0.0; 3], [0.0; 3], CayleyGibbsRodrigues);
        let b = pv([0.0; 3], [0.0; 3], RotationVector);
        assert!(InterpolationSpec::new(a, b, 4).is_err());
        assert!(InterpolationSpec::new(a, a, 1).is_err());
        let base = ServoSpec::with_defaults(a);
        assert!(ServoSpec::new(0.0, 0.01, 1.0, base.reference, a).is_err());
        assert!(ServoSpec::new(1.0, 0.1, 0.05, base.reference, a).is_err());
    }

    #[test]
    fn servo_equilibrium_is_exact() {
        let xi0 = PoseVector6::zero(EulerRodrigues, CouplingChoice::Screw);
        let spec = ServoSpec::new(1.0, 0.01, 1.0, ReferencePath::fixed(TransformMatrix::identity()), xi0).unwrap();
        let out = servo_simulate(&spec).unwrap();
        assert_eq!(out.len(), 101);
        assert!(out.iter().all(|s| s.error_norm == 0.0));
    }

    #[test]
    fn servo_tracks_moving_reference() {
        let xi0 = pv([0.0, 1.0, 0.0], [0.0, 0.0, 0.5], RotationVector);
        let out = servo_simulate(&ServoSpec::with_defaults(xi0)).unwrap();
        let tail = &out[out.len() - 100..];
        // with a ramp reference the first-order loop settles at |v|/κ
        for s in tail {
            assert!((s.error_norm - 0.5).abs() < 1e-2, "{}", s.error_norm);
        }
    }

    #[test]
    fn csv_round_trip() {
        let xi0 = pv([0.1, 0.2, 0.3], [0.4, -0.2, 0.1], BauchauTrainelli);
        let mut spec = ServoSpec::with_defaults(xi0);
        spec.duration = 0.1;
        let rows = servo_rows(&servo_simulate(&spec).unwrap());
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &rows).unwrap();
        let back = read_trajectory_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
    }
}

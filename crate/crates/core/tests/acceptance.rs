//! Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned below.

mod common;

use std::f64::consts::PI;
use std::io::{self, Write};
use std::time::{Duration, Instant};

use common::*;
use nalgebra::{Matrix3, Vector3, Vector6};
use rand::Rng;
use vecpose::align::{run_experiment, ExperimentConfig};
use vecpose::apps::{interpolate, max_path_distance, servo_simulate, InterpolationSpec, ReferencePath, ServoSpec};
use vecpose::se3::adjoint_factor_series;
use vecpose::tables::{check_tables, GRID_SIZE, TABLE_TOL};
use vecpose::{
    adjoint_cayley_higher, adjoint_factor, adjoint_from_vec, adjoint_of, compound_pose, curlyhat6, hat3, hat6,
    pose_cayley_higher, pose_factor, pose_from_vec, rot_factor, rot_from_vec, rot_jacobian, vec_from_pose, vee3,
    CouplingChoice, FactorOrder, GeneratingFunction, PoseVector6, TransformMatrix,
};

const TOL_EXP: f64 = 1e-12;
const TOL_DIAGRAM: f64 = 1e-12;
const TOL_EIGEN: f64 = 1e-12;
const TOL_CAYLEY: f64 = 1e-12;
const CAYLEY_GAP: f64 = 1e-6;
const TOL_FACTOR: f64 = 1e-12;
const TOL_IDENTITY: f64 = 1e-12;
const TOL_ROUND_TRIP: f64 = 1e-10;
const TOL_FD: f64 = 1e-8;
const FD_STEP: f64 = 1e-6;
const EXPMAP_FAILURE_BAND: (f64, f64) = (0.05, 0.40);
const CAYPER_MAX_ITERS: usize = 20;

const GENS: [GeneratingFunction; 5] = GeneratingFunction::TABLE;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Entry-wise error relative to the larger of one and the reference magnitude.
fn rel<const R: usize, const C: usize>(a: &nalgebra::SMatrix<f64, R, C>, b: &nalgebra::SMatrix<f64, R, C>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

/// Angle uniform on `[0, frac · min(validity, π))` along a random axis.
fn principal_phi<G: Rng>(r: &mut G, g: GeneratingFunction, frac: f64) -> Vector3<f64> {
    let w = g.validity_half_width().min(PI);
    unit(r) * g.eval(r.random_range(0.0..frac * w)).unwrap()
}

fn random_rho<G: Rng>(r: &mut G) -> Vector3<f64> {
    Vector3::from_fn(|_, _| r.random_range(-2.0..2.0))
}

fn table_equivalence() -> Outcome {
    let t0 = Instant::now();
    let rows = check_tables(&[], None).unwrap();
    let dt = t0.elapsed();
    let worst = rows.iter().map(|r| r.max_error).fold(0.0, f64::max);
    let pass =
        rows.len() == 5 && rows.iter().all(|r| r.passed() && r.samples >= GRID_SIZE) && dt < Duration::from_secs(1);
    outcome(pass, format!("{} rows, worst {worst:.2e} < {TABLE_TOL:.0e}, {dt:.2?} < 1s", rows.len()))
}

fn exponential_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(2);
    let g = GeneratingFunction::RotationVector;
    let (mut so3, mut se3) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let phi = unit(&mut r) * r.random_range(0.0..0.95 * PI);
        let c = rot_from_vec(&rotvec(g, phi)).unwrap();
        so3 = so3.max((c.matrix() - expm(&hat3(&phi))).amax());
        let xi = PoseVector6::new(random_rho(&mut r), phi, g, CouplingChoice::Screw).unwrap();
        let t = pose_from_vec(&xi).unwrap();
        se3 = se3.max((t.matrix() - expm(&hat6(&xi.xi()))).amax());
    }
    let dt = t0.elapsed();
    let pass = so3 < TOL_EXP && se3 < TOL_EXP && dt < Duration::from_secs(5);
    outcome(pass, format!("SO(3) {so3:.2e}, SE(3) {se3:.2e} < {TOL_EXP:.0e}, {dt:.2?} < 5s"))
}

fn commutative_diagram() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for g in GENS {
        for _ in 0..1000 {
            let phi = unit(&mut r) * g.eval(r.random_range(0.0..0.95 * g.validity_half_width())).unwrap();
            let xi = PoseVector6::new(random_rho(&mut r), phi, g, CouplingChoice::Screw).unwrap();
            let series = adjoint_from_vec(&xi).unwrap();
            worst = worst.max(rel(adjoint_of(&pose_from_vec(&xi).unwrap()).matrix(), series.matrix()));
        }
    }
    outcome(worst < TOL_DIAGRAM, format!("5000 samples, relative {worst:.2e} < {TOL_DIAGRAM:.0e}"))
}

fn unit_eigenvector() -> Outcome {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for g in GENS {
        for _ in 0..200 {
            let phi = principal_phi(&mut r, g, 0.95);
            let base = PoseVector6::new(random_rho(&mut r), phi, g, CouplingChoice::Screw).unwrap();
            // an explicit (a, c) pair must satisfy a − φ²c = ν²/ε; pick a, solve for c
            let n2 = phi.norm_squared();
            let mut couplings = vec![CouplingChoice::Screw, CouplingChoice::CayleyFactorable];
            if n2 > 1e-6 {
                let k = vecpose::kernel_scalars(g, g.inverse(phi.norm()).unwrap()).unwrap();
                let a = r.random_range(-1.0..1.0);
                couplings.push(CouplingChoice::Explicit { a, c: (a - k.nu * k.nu / k.eps) / n2 });
            }
            for c in couplings {
                let xi = match base.with(g, c) {
                    Ok(x) => x,
                    Err(_) => continue,
                };
                let v = xi.xi();
                let ad = adjoint_from_vec(&xi).unwrap();
                worst = worst.max((ad.matrix() * v - v).amax() / (1.0 + ad.matrix().amax() * v.amax()));
            }
        }
    }
    outcome(worst < TOL_EIGEN, format!("Screw, CayleyFactorable, Explicit: relative {worst:.2e} < {TOL_EIGEN:.0e}"))
}

/// Normalized pitch `|ρ·φ| / (|ρ||φ|)` below which 4×4 and 6×6 Cayley maps may
/// coincide: their gap is proportional to `ρ·φ` and vanishes for zero-pitch screws.
const MIN_PITCH_COSINE: f64 = 0.05;

fn cayley_results() -> Outcome {
    let mut r = rng(5);
    let g = GeneratingFunction::CayleyGibbsRodrigues;
    let (mut same, mut gap) = (0.0f64, f64::INFINITY);
    let (mut literal, mut literal_below, mut below_pitch) = (0, 0, 0.0f64);
    for _ in 0..1000 {
        let rho = random_rho(&mut r);
        let phi = principal_phi(&mut r, g, 0.95);
        if rho.norm() < 0.1 || phi.norm() < 0.1 || rho.cross(&phi).norm() < 0.05 {
            continue;
        }
        let xi = PoseVector6::new(rho, phi, g, CouplingChoice::Screw).unwrap();
        let ad6 = adjoint_cayley_higher(&xi.xi(), 1).unwrap();
        same = same.max(rel(ad6.matrix(), adjoint_from_vec(&xi).unwrap().matrix()));
        let d = (adjoint_of(&pose_cayley_higher(&xi.xi(), 1).unwrap()).matrix() - ad6.matrix()).norm();
        literal += 1;
        let pitch_cosine = rho.dot(&phi).abs() / (rho.norm() * phi.norm());
        if d <= CAYLEY_GAP {
            literal_below += 1;
            below_pitch = below_pitch.max(pitch_cosine);
        }
        if pitch_cosine >= MIN_PITCH_COSINE {
            gap = gap.min(d);
        }
    }
    let pass = same < TOL_CAYLEY && gap > CAYLEY_GAP;
    outcome(
        pass,
        format!(
            "(a) relative {same:.2e} < {TOL_CAYLEY:.0e}; (b) min gap {gap:.2e} > {CAYLEY_GAP:.0e} at pitch cosine ≥ {MIN_PITCH_COSINE} \
             ({literal_below}/{literal} samples with only ρ, φ ≠ 0 fall below, pitch cosine ≤ {below_pitch:.1e})"
        ),
    )
}

fn factorizations() -> Outcome {
    let mut r = rng(6);
    let (mut so3, mut se3, mut ad) = (0.0f64, 0.0f64, 0.0f64);
    for g in GENS {
        for _ in 0..100 {
            let phi = principal_phi(&mut r, g, 0.95);
            let xi = PoseVector6::new(random_rho(&mut r), phi, g, CouplingChoice::CayleyFactorable).unwrap();
            let v = xi.xi();
            let c = rot_from_vec(&rotvec(g, phi)).unwrap();
            let t = pose_from_vec(&xi).unwrap();
            let a = adjoint_factor_series(&v, g).unwrap();
            for order in [FactorOrder::LambdaFirst, FactorOrder::GammaFirst] {
                so3 = so3.max(rel(rot_factor(&rotvec(g, phi), order).unwrap().matrix(), c.matrix()));
                se3 = se3.max(rel(pose_factor(&v, g, order).unwrap().matrix(), t.matrix()));
                ad = ad.max(rel(adjoint_factor(&v, g, order).unwrap().matrix(), a.matrix()));
            }
            // the factored 6×6 form is a genuine adjoint (of a pose with yet another coupling)
            ad = ad.max(rel(adjoint_of(&a.to_transform()).matrix(), a.matrix()));
        }
    }
    let pass = so3 < TOL_FACTOR && se3 < TOL_FACTOR && ad < TOL_FACTOR;
    outcome(pass, format!("SO(3) {so3:.2e}, SE(3) {se3:.2e}, Ad {ad:.2e} < {TOL_FACTOR:.0e} (relative)"))
}

fn identity_suite() -> Outcome {
    let mut r = rng(7);
    let (mut cubic, mut quartic, mut quintic) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let xi = Vector6::from_fn(|_, _| r.random_range(-3.0..3.0));
        let phi = xi.fixed_rows::<3>(3).into_owned();
        let n2 = phi.norm_squared();
        let x3 = hat3(&phi);
        cubic = cubic.max((x3 * x3 * x3 + x3 * n2).amax() / (1.0 + phi.amax().powi(3)));
        let x = hat6(&xi);
        let x2 = x * x;
        quartic = quartic.max((x2 * x2 + x2 * n2).amax() / (1.0 + xi.amax().powi(4)));
        let y = curlyhat6(&xi);
        let y3 = y * y * y;
        quintic = quintic.max((y3 * y * y + y3 * (2.0 * n2) + y * (n2 * n2)).amax() / (1.0 + xi.amax().powi(5)));
    }
    let pass = cubic < TOL_IDENTITY && quartic < TOL_IDENTITY && quintic < TOL_IDENTITY;
    outcome(
        pass,
        format!("cubic {cubic:.2e}, quartic {quartic:.2e}, quintic {quintic:.2e} < {TOL_IDENTITY:.0e} (relative)"),
    )
}

fn round_trips() -> Outcome {
    let mut r = rng(8);
    let (mut trip, mut comp, mut fd) = (0.0f64, 0.0f64, 0.0f64);
    for g in GENS {
        for c in [CouplingChoice::Screw, CouplingChoice::CayleyFactorable] {
            for _ in 0..200 {
                let xi = PoseVector6::new(random_rho(&mut r), principal_phi(&mut r, g, 0.95), g, c).unwrap();
                let back = vec_from_pose(&pose_from_vec(&xi).unwrap(), g, c).unwrap();
                trip = trip.max((back.xi() - xi.xi()).amax() / (1.0 + xi.xi().amax()));

                let x1 = PoseVector6::new(random_rho(&mut r), principal_phi(&mut r, g, 0.45), g, c).unwrap();
                let x2 = PoseVector6::new(random_rho(&mut r), principal_phi(&mut r, g, 0.45), g, c).unwrap();
                let want = vec_from_pose(&(pose_from_vec(&x2).unwrap() * pose_from_vec(&x1).unwrap()), g, c).unwrap();
                let got = compound_pose(&x1, &x2).unwrap();
                comp = comp.max((got.xi() - want.xi()).amax() / (1.0 + want.xi().amax()));
            }
        }
        for _ in 0..200 {
            let phi = principal_phi(&mut r, g, 0.9);
            let d = unit(&mut r);
            let h = FD_STEP;
            let rot = |v: Vector3<f64>| *rot_from_vec(&rotvec(g, v)).unwrap().matrix();
            let omega = vee3(&((rot(phi + d * h) - rot(phi - d * h)) * rot(phi).transpose())) / (2.0 * h);
            let j: Matrix3<f64> = rot_jacobian(&rotvec(g, phi)).unwrap();
            fd = fd.max((omega - j * d).amax());
        }
    }
    let pass = trip < TOL_ROUND_TRIP && comp < TOL_ROUND_TRIP && fd < TOL_FD;
    outcome(
        pass,
        format!("round trip {trip:.2e}, compound {comp:.2e} < {TOL_ROUND_TRIP:.0e}; Jacobian FD {fd:.2e} < {TOL_FD:.0e} (h = {FD_STEP:.0e})"),
    )
}

fn alignment_experiment() -> Outcome {
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let cfg = ExperimentConfig { seed: 42, trials: 1000, threads, ..Default::default() };
    let t0 = Instant::now();
    let report = run_experiment(&cfg).unwrap();
    let dt = t0.elapsed();
    let exp = report.solver("expmap").unwrap();
    let cay = report.solver("cayper").unwrap();
    let fail = 1.0 - exp.success_rate;
    let pass = cay.success_rate == 1.0
        && cay.max_iterations <= CAYPER_MAX_ITERS
        && (EXPMAP_FAILURE_BAND.0..=EXPMAP_FAILURE_BAND.1).contains(&fail)
        && dt < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "CayPer success {:.1}% (max {} iters ≤ {CAYPER_MAX_ITERS}); ExpMap failure {:.1}% in [{:.0}%, {:.0}%]; {dt:.2?} < 60s",
            100.0 * cay.success_rate,
            cay.max_iterations,
            100.0 * fail,
            100.0 * EXPMAP_FAILURE_BAND.0,
            100.0 * EXPMAP_FAILURE_BAND.1,
        ),
    )
}

fn qualitative_substitutes() -> Outcome {
    // interpolation: one rotating example, same segment in ℝ⁶, different curves in SE(3)
    let paths: Vec<_> = GENS
        .iter()
        .map(|&g| {
            let a = PoseVector6::zero(g, CouplingChoice::Screw);
            let b =
                PoseVector6::new(Vector3::new(4.0, 2.0, 0.0), Vector3::new(0.0, 0.0, 1.6), g, CouplingChoice::Screw)
                    .unwrap();
            let spec = InterpolationSpec::new(a, b, 50).unwrap();
            (spec.vectors().unwrap(), interpolate(&spec).unwrap())
        })
        .collect();
    let mut same = true;
    let mut min_dist = f64::INFINITY;
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            same &= paths[i].0.iter().zip(&paths[j].0).all(|(x, y)| x.xi() == y.xi());
            min_dist = min_dist.min(max_path_distance(&paths[i].1, &paths[j].1));
        }
    }

    // servo: exact equilibrium, then monotone decay from a small static offset
    let mut equilibrium = true;
    let mut monotone = true;
    for g in GENS {
        let eq = ServoSpec::new(
            1.0,
            0.01,
            2.0,
            ReferencePath::fixed(TransformMatrix::identity()),
            PoseVector6::zero(g, CouplingChoice::Screw),
        )
        .unwrap();
        equilibrium &= servo_simulate(&eq).unwrap().iter().all(|s| s.error_norm == 0.0);
        let xi0 = PoseVector6::new(
            Vector3::new(0.05, -0.02, 0.03),
            Vector3::new(0.02, 0.01, -0.03),
            g,
            CouplingChoice::Screw,
        )
        .unwrap();
        let spec = ServoSpec::new(1.0, 0.01, 5.0, ReferencePath::fixed(TransformMatrix::identity()), xi0).unwrap();
        let out = servo_simulate(&spec).unwrap();
        monotone &= out.windows(2).all(|w| w[1].error_norm <= w[0].error_norm);
        monotone &= out.last().unwrap().error_norm < out[0].error_norm;
    }
    let pass = same && min_dist > 1e-6 && equilibrium && monotone;
    outcome(
        pass,
        format!("ℝ⁶ paths identical: {same}; min pairwise SE(3) distance {min_dist:.2e} > 1e-6; equilibrium exact: {equilibrium}; monotone decay: {monotone}"),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("closed-form table equivalence", table_equivalence),
        ("exponential-map oracle", exponential_oracle),
        ("commutative diagram", commutative_diagram),
        ("unit eigenvector", unit_eigenvector),
        ("Cayley results", cayley_results),
        ("Cayley-type factorizations", factorizations),
        ("identity suite", identity_suite),
        ("round trips and Jacobian", round_trips),
        ("alignment experiment", alignment_experiment),
        ("interpolation and servo properties", qualitative_substitutes),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        // written past the test harness capture so the report shows in plain `cargo test` output
        writeln!(
            io::stdout().lock(),
            "criterion {:>2} {}: {name} — {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        )
        .unwrap();
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

//! Independent oracles and random-input helpers shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{SMatrix, Vector3, Vector6};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vecpose::{CouplingChoice, GeneratingFunction, PoseVector6, RotationVector3};

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
/// Shares no code with the library's closed-form maps.
pub fn expm<const N: usize>(a: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    let norm = a.abs().row_sum().max();
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let x = a / 2f64.powi(s);
    let mut term = SMatrix::<f64, N, N>::identity();
    let mut sum = term;
    for k in 1..=24 {
        term = term * x / k as f64;
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

/// Central-difference derivative.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Rotation parameters with angle uniform on `[0, frac · validity)`.
pub fn random_phi<R: Rng>(rng: &mut R, gen: GeneratingFunction, frac: f64) -> Vector3<f64> {
    let varphi = rng.random_range(0.0..frac * gen.validity_half_width());
    unit(rng) * gen.eval(varphi).unwrap()
}

pub fn random_pose<R: Rng>(rng: &mut R, gen: GeneratingFunction, coupling: CouplingChoice, frac: f64) -> PoseVector6 {
    let rho = Vector3::from_fn(|_, _| rng.random_range(-2.0..2.0));
    PoseVector6::new(rho, random_phi(rng, gen, frac), gen, coupling).unwrap()
}

pub fn rotvec(gen: GeneratingFunction, v: Vector3<f64>) -> RotationVector3 {
    RotationVector3::new(v, gen).unwrap()
}

pub fn named_gen() -> impl Strategy<Value = GeneratingFunction> {
    prop::sample::select(GeneratingFunction::TABLE.to_vec())
}

pub fn any_gen() -> impl Strategy<Value = GeneratingFunction> {
    prop_oneof![
        4 => named_gen(),
        1 => (3u32..6).prop_map(GeneratingFunction::HigherOrderTan),
        1 => (3u32..6).prop_map(GeneratingFunction::HigherOrderSin),
    ]
}

pub fn axis() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("non-degenerate axis", |(x, y, z)| x * x + y * y + z * z > 1e-4)
        .prop_map(|(x, y, z)| Vector3::new(x, y, z).normalize())
}

pub fn vec3(r: f64) -> impl Strategy<Value = Vector3<f64>> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

/// `(gen, φ)` with the angle a fraction `frac` of the validity range at most.
pub fn gen_and_phi(frac: f64) -> impl Strategy<Value = (GeneratingFunction, Vector3<f64>)> {
    (named_gen(), axis(), 0.0..frac).prop_map(|(g, a, t)| (g, a * g.eval(t * g.validity_half_width()).unwrap()))
}

pub fn pose(frac: f64, coupling: CouplingChoice) -> impl Strategy<Value = PoseVector6> {
    (gen_and_phi(frac), vec3(2.0)).prop_map(move |((g, phi), rho)| PoseVector6::new(rho, phi, g, coupling).unwrap())
}

pub fn stack(a: &Vector3<f64>, b: &Vector3<f64>) -> Vector6<f64> {
    Vector6::new(a.x, a.y, a.z, b.x, b.y, b.z)
}

/// Like [`gen_and_phi`] but with the angle capped at `frac · min(validity, π)`,
/// the branch the inverse maps return.
pub fn gen_and_phi_principal(frac: f64) -> impl Strategy<Value = (GeneratingFunction, Vector3<f64>)> {
    (named_gen(), axis(), 0.0..frac).prop_map(|(g, a, t)| {
        let w = g.validity_half_width().min(std::f64::consts::PI);
        (g, a * g.eval(t * w).unwrap())
    })
}

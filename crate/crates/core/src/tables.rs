//! Closed-form rotation maps for the named generating functions, checked
//! against the generic series map `C = 1 + (ν²/ε) φ^∧ + ½ν² φ^∧²`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::genfun::{Family, GeneratingFunction};
use crate::linalg;
use crate::so3::{hat3, rot_from_vec, RotationVector3};

/// Maximum allowed closed-form/series discrepancy.
pub const TABLE_TOL: f64 = 1e-10;
/// Angles per row.
pub const GRID_SIZE: usize = 200;
/// The grid covers this fraction of each validity range, both signs.
pub const GRID_SPAN: f64 = 0.9;

/// The closed form `C(φ)` for a generating function, independent of the series coefficients:
///
/// * `tan:m` (including CGR and MRP): `(1 − φ^∧/2m)^(−m) (1 + φ^∧/2m)^m`
/// * rotation vector: the matrix exponential
/// * Bauchau–Trainelli: `1 + cos(ϕ/2)cos(ϕ/4) φ^∧ + ½cos²(ϕ/4) φ^∧²`
/// * Euler–Rodrigues: `1 + cos(ϕ/2) φ^∧ + ½φ^∧²`
///
/// The higher-order sine family has no closed form and is rejected.
pub fn closed_form(gen: GeneratingFunction, phi: &Vector3<f64>) -> Result<Matrix3<f64>> {
    let x = hat3(phi);
    let id = Matrix3::identity();
    match gen.family() {
        Family::Identity => Ok(x.exp()),
        Family::Tan(m) => linalg::cayley_power(&x, m),
        Family::Sin(m @ (1 | 2)) => {
            let varphi = gen.inverse(phi.norm())?;
            let (c2, c4) = ((varphi / 2.0).cos(), (varphi / 4.0).cos());
            Ok(if m == 1 { id + x * c2 + x * x * 0.5 } else { id + x * (c2 * c4) + x * x * (0.5 * c4 * c4) })
        }
        Family::Sin(_) => Err(Error::Domain(format!("no closed form for {gen}"))),
    }
}

/// Result of comparing one row on the angle grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowReport {
    pub gen: GeneratingFunction,
    pub max_error: f64,
    pub samples: usize,
}

impl RowReport {
    pub fn passed(&self) -> bool {
        self.max_error < TABLE_TOL
    }
}

/// Deliberate damage to one row's closed form, scaling `C − 1`; used to
/// exercise the failure path of the check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fault {
    pub gen: GeneratingFunction,
    pub scale: f64,
}

/// The five named rows, in table order.
pub fn table_rows() -> [GeneratingFunction; 5] {
    GeneratingFunction::TABLE
}

/// Evenly spaced angles over `±GRID_SPAN` of the validity range, cycling
/// through three fixed axes.
pub fn angle_grid(gen: GeneratingFunction) -> Vec<Vector3<f64>> {
    let axes = [Vector3::new(1.0, 2.0, 3.0).normalize(), Vector3::new(-2.0, 1.0, 0.5).normalize(), Vector3::z()];
    let w = GRID_SPAN * gen.validity_half_width();
    (0..GRID_SIZE)
        .map(|k| {
            let varphi = -w + 2.0 * w * k as f64 / (GRID_SIZE - 1) as f64;
            axes[k % 3] * gen.eval(varphi).expect("grid lies inside the validity range")
        })
        .collect()
}

pub fn check_row(gen: GeneratingFunction, fault: Option<Fault>) -> Result<RowReport> {
    let grid = angle_grid(gen);
    let mut max_error: f64 = 0.0;
    for phi in &grid {
        let series = rot_from_vec(&RotationVector3 { v: *phi, gen })?;
        let mut closed = closed_form(gen, phi)?;
        if let Some(f) = fault.filter(|f| f.gen.same_function(gen)) {
            closed = Matrix3::identity() + (closed - Matrix3::identity()) * f.scale;
        }
        max_error = max_error.max((series.matrix() - closed).amax());
    }
    Ok(RowReport { gen, max_error, samples: grid.len() })
}

/// Checks the five named rows followed by any `extra` generating functions.
pub fn check_tables(extra: &[GeneratingFunction], fault: Option<Fault>) -> Result<Vec<RowReport>> {
    table_rows().iter().chain(extra).map(|&g| check_row(g, fault)).collect()
}

//! Small dense helpers shared by the group maps.

use nalgebra::{Const, DimMin, SMatrix};

use crate::error::{Error, Result};

/// Relative pivot size below which a factor is reported singular.
const PIVOT_TOL: f64 = 1e-13;

/// `(1 − left·X)⁻¹ (1 + right·X)`, solved by LU without forming the inverse.
pub(crate) fn rational_factor<const N: usize>(
    x: &SMatrix<f64, N, N>,
    left: f64,
    right: f64,
) -> Result<SMatrix<f64, N, N>>
where
    Const<N>: DimMin<Const<N>, Output = Const<N>>,
{
    if !left.is_finite() || !right.is_finite() {
        return Err(Error::Singularity(format!("non-finite factor coefficients ({left}, {right})")));
    }
    let id = SMatrix::<f64, N, N>::identity();
    let denom = id - x * left;
    let numer = id + x * right;
    solve_left(&denom, &numer)
}

/// `(1 − X/2m)^(−m) (1 + X/2m)^m`.
pub(crate) fn cayley_power<const N: usize>(x: &SMatrix<f64, N, N>, m: u32) -> Result<SMatrix<f64, N, N>>
where
    Const<N>: DimMin<Const<N>, Output = Const<N>>,
{
    if m == 0 {
        return Err(Error::Domain("Cayley order must be positive".into()));
    }
    let k = 1.0 / (2.0 * m as f64);
    let single = rational_factor(x, k, k)?;
    // the two factors commute, so the m-th power of one Cayley step is the full map
    let mut out = single;
    for _ in 1..m {
        out *= single;
    }
    Ok(out)
}

/// Solves `A·Y = B` for `Y`.
pub(crate) fn solve_left<const N: usize>(a: &SMatrix<f64, N, N>, b: &SMatrix<f64, N, N>) -> Result<SMatrix<f64, N, N>>
where
    Const<N>: DimMin<Const<N>, Output = Const<N>>,
{
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let lu = a.lu();
    let u = lu.u();
    let min_pivot = u.diagonal().iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    if !(min_pivot > PIVOT_TOL * scale) {
        return Err(Error::Singularity(format!("matrix factor is singular (pivot {min_pivot:e})")));
    }
    lu.solve(b).ok_or_else(|| Error::Singularity("matrix factor is singular".into()))
}

/// Largest absolute entry of `a − b`.
pub fn max_abs_diff<const R: usize, const C: usize>(a: &SMatrix<f64, R, C>, b: &SMatrix<f64, R, C>) -> f64 {
    (a - b).amax()
}

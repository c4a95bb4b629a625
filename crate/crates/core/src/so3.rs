//! Rotations: the vectorial maps from `ℝ³` onto `SO(3)`.
//!
//! For a parameter vector `φ = φ(ϕ)·a` the rotation matrix is
//!
//! ```text
//! C(φ) = 1 + (ν²/ε) φ^∧ + (ν²/2) φ^∧²
//! ```
//!
//! and the Jacobian relating `φ̇` to angular velocity (`ω^∧ = Ċ Cᵀ`) is
//!
//! ```text
//! J(φ) = μ 1 + (ν²/2) φ^∧ + ((μ − ν²/ε)/|φ|²) φ^∧²
//! ```
//!
//! Every map here is exact at the origin: the `1/|φ|²` coefficients are taken
//! from series expansions below the small-angle threshold.

use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::genfun::{GeneratingFunction, Kernel};
use crate::linalg;

/// Tolerance used when accepting externally supplied matrices as group elements.
pub const GROUP_TOL: f64 = 1e-9;

/// A rotation parameter vector `φ = φ(ϕ)·a` tagged with its generating function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationVector3 {
    pub v: Vector3<f64>,
    pub gen: GeneratingFunction,
}

impl RotationVector3 {
    /// Checks that `|v|` lies in the image of the generating function.
    pub fn new(v: Vector3<f64>, gen: GeneratingFunction) -> Result<Self> {
        Kernel::from_norm(gen, v.norm())?;
        Ok(RotationVector3 { v, gen })
    }

    pub fn zero(gen: GeneratingFunction) -> Self {
        RotationVector3 { v: Vector3::zeros(), gen }
    }

    /// Builds `φ(ϕ)·axis` from an axis (normalized here) and an angle.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64, gen: GeneratingFunction) -> Result<Self> {
        let n = axis.norm();
        if n == 0.0 {
            return Err(Error::Domain("rotation axis must be nonzero".into()));
        }
        Ok(RotationVector3 { v: axis / n * gen.eval(angle)?, gen })
    }

    /// Rotation angle `ϕ = φ⁻¹(|v|) ≥ 0`.
    pub fn angle(&self) -> Result<f64> {
        self.gen.inverse(self.v.norm())
    }

    pub(crate) fn kernel(&self) -> Result<Kernel> {
        Kernel::from_norm(self.gen, self.v.norm())
    }
}

/// A 3×3 rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        RotationMatrix(Matrix3::identity())
    }

    /// Accepts `m` if `m mᵀ = 1` and `det m = 1` to within [`GROUP_TOL`].
    pub fn try_new(m: Matrix3<f64>) -> Result<Self> {
        let ortho = (m * m.transpose() - Matrix3::identity()).amax();
        let det = m.determinant();
        if !(ortho <= GROUP_TOL) || !((det - 1.0).abs() <= GROUP_TOL) {
            return Err(Error::Constraint(format!("not a rotation matrix (|C Cᵀ − 1| = {ortho:e}, det = {det})")));
        }
        Ok(RotationMatrix(m))
    }

    pub fn new_unchecked(m: Matrix3<f64>) -> Self {
        RotationMatrix(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Matrix3<f64> {
        self.0
    }

    pub fn transpose(&self) -> Self {
        RotationMatrix(self.0.transpose())
    }

    /// Deviation from orthonormality, `max |C Cᵀ − 1|`.
    pub fn orthogonality_error(&self) -> f64 {
        (self.0 * self.0.transpose() - Matrix3::identity()).amax()
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

/// `v^∧`, the cross-product matrix.
pub fn hat3(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat3`] applied to the antisymmetric part of `m`.
pub fn vee3(m: &Matrix3<f64>) -> Vector3<f64> {
    0.5 * Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)])
}

/// `C(φ) = 1 + (ν²/ε) φ^∧ + (ν²/2) φ^∧²`.
pub fn rot_from_vec(phi: &RotationVector3) -> Result<RotationMatrix> {
    let k = phi.kernel()?;
    let x = hat3(&phi.v);
    Ok(RotationMatrix(Matrix3::identity() + x * k.nu2_over_eps + x * x * k.half_nu2()))
}

/// `J(φ)`, with `ω = J(φ) φ̇` for the left angular velocity `ω^∧ = Ċ Cᵀ`.
pub fn rot_jacobian(phi: &RotationVector3) -> Result<Matrix3<f64>> {
    let k = phi.kernel()?;
    let x = hat3(&phi.v);
    Ok(Matrix3::identity() * k.mu + x * k.half_nu2() + x * x * k.screw_c)
}

/// `J(φ)⁻¹ = (1/μ) 1 − ½ φ^∧ − ((1/ε − 1/μ)/|φ|²) φ^∧²`.
pub fn rot_jacobian_inv(phi: &RotationVector3) -> Result<Matrix3<f64>> {
    let k = phi.kernel()?;
    if k.inv_eps_pole() || !k.jinv_c.is_finite() || !k.inv_mu.is_finite() {
        return Err(Error::Singularity(format!("Jacobian of {} is singular at ϕ = {}", phi.gen, k.varphi)));
    }
    let x = hat3(&phi.v);
    Ok(Matrix3::identity() * k.inv_mu - x * 0.5 - x * x * k.jinv_c)
}

/// Coefficients of the Cayley-type factorization `C = (1 − λφ^∧)⁻¹(1 + γφ^∧)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CayleyFactors {
    pub gamma: f64,
    pub lambda: f64,
}

/// Which of the two equivalent factor orderings to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorOrder {
    /// `(1 − λX)⁻¹ (1 + γX)`
    #[default]
    LambdaFirst,
    /// `(1 − γX)⁻¹ (1 + λX)`
    GammaFirst,
}

impl CayleyFactors {
    /// `(left, right)` coefficients for `(1 − left·X)⁻¹ (1 + right·X)`.
    pub(crate) fn ordered(&self, order: FactorOrder) -> (f64, f64) {
        match order {
            FactorOrder::LambdaFirst => (self.lambda, self.gamma),
            FactorOrder::GammaFirst => (self.gamma, self.lambda),
        }
    }
}

/// `γ = ½ε`, `λ = ν²/ε − ½ε(1 − ½|φ|²ν²)`.
pub fn cayley_factors(gen: GeneratingFunction, varphi: f64) -> Result<CayleyFactors> {
    let k = Kernel::from_angle(gen, varphi)?;
    cayley_factors_from_kernel(&k)
}

pub(crate) fn cayley_factors_from_kernel(k: &Kernel) -> Result<CayleyFactors> {
    if k.eps_pole() || !k.eps.is_finite() {
        return Err(Error::Singularity(format!("Cayley-type factors of {} are unbounded at ϕ = {}", k.gen, k.varphi)));
    }
    // 1 − ½|φ|²ν² = 1 − 2 sin²(ϕ/2)
    let half_norm_nu = 0.5 * k.norm * k.nu;
    let gamma = 0.5 * k.eps;
    let lambda = k.nu2_over_eps - gamma * (1.0 - 2.0 * half_norm_nu * half_norm_nu);
    Ok(CayleyFactors { gamma, lambda })
}

/// The rotation through its Cayley-type factorization.
pub fn rot_factor(phi: &RotationVector3, order: FactorOrder) -> Result<RotationMatrix> {
    let f = cayley_factors_from_kernel(&phi.kernel()?)?;
    let (l, r) = f.ordered(order);
    linalg::rational_factor(&hat3(&phi.v), l, r).map(RotationMatrix)
}

/// `C(φ)ᵀ` through the sign-flipped factorization `(1 + λX)⁻¹(1 − γX)`.
pub fn rot_factor_inverse(phi: &RotationVector3, order: FactorOrder) -> Result<RotationMatrix> {
    let f = cayley_factors_from_kernel(&phi.kernel()?)?;
    let (l, r) = f.ordered(order);
    linalg::rational_factor(&hat3(&phi.v), -l, -r).map(RotationMatrix)
}

/// Higher-order Cayley transform `(1 − φ^∧/2m)^(−m) (1 + φ^∧/2m)^m`.
pub fn rot_cayley_higher(phi: &Vector3<f64>, m: u32) -> Result<RotationMatrix> {
    linalg::cayley_power(&hat3(phi), m).map(RotationMatrix)
}

/// Recovers `φ` from a rotation matrix, with `ϕ ∈ [0, π]`.
///
/// The angle comes from `atan2(|vee(C − Cᵀ)|/2, (tr C − 1)/2)`; the axis from
/// the antisymmetric part for `ϕ ≤ π/2` and from the symmetric part
/// `½(C + Cᵀ) = cos ϕ·1 + (1 − cos ϕ) a aᵀ` beyond that. At exactly `ϕ = π`
/// the axis sign is chosen so its first nonzero component is positive.
pub fn vec_from_rot(c: &RotationMatrix, gen: GeneratingFunction) -> Result<RotationVector3> {
    let (varphi, axis) = angle_axis(c.matrix());
    if varphi == 0.0 {
        return Ok(RotationVector3::zero(gen));
    }
    let norm = gen.eval(varphi)?;
    Ok(RotationVector3 { v: axis * norm, gen })
}

/// Angle in `[0, π]` and unit axis; the axis is arbitrary (x) for the identity.
pub(crate) fn angle_axis(m: &Matrix3<f64>) -> (f64, Vector3<f64>) {
    let cos = (0.5 * (m.trace() - 1.0)).clamp(-1.0, 1.0);
    let w = vee3(m);
    let sin = w.norm();
    let varphi = sin.atan2(cos);
    if sin == 0.0 && cos > 0.0 {
        return (0.0, Vector3::x());
    }
    if cos >= 0.0 {
        return (varphi, w / sin);
    }
    let sym = 0.5 * (m + m.transpose());
    let b = (sym - Matrix3::identity() * cos) / (1.0 - cos);
    let k = (0..3).max_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)])).unwrap_or(0);
    let mut axis: Vector3<f64> = b.column(k) / b[(k, k)].max(f64::MIN_POSITIVE).sqrt();
    axis /= axis.norm();
    let d = axis.dot(&w);
    if d.abs() > 1e-15 {
        if d < 0.0 {
            axis = -axis;
        }
    } else if let Some(first) = axis.iter().copied().find(|a| a.abs() > 1e-12) {
        if first < 0.0 {
            axis = -axis;
        }
    }
    (varphi.min(PI), axis)
}

/// `φ` such that `C(φ) = C(φ₂) C(φ₁)`.
///
/// The compound angle obeys `cos(ϕ/2) = ν₁ν₂(1/(ε₁ε₂) − ¼ φ₁ᵀφ₂)`; it is
/// evaluated together with `sin(ϕ/2)` through `atan2` so small compound
/// angles keep full precision. Fails if the compound angle leaves the
/// validity range of the generating function.
pub fn compound_rot(phi1: &RotationVector3, phi2: &RotationVector3) -> Result<RotationVector3> {
    if !phi1.gen.same_function(phi2.gen) {
        return Err(Error::Constraint(format!("cannot compound {} with {}", phi1.gen, phi2.gen)));
    }
    let gen = phi1.gen;
    let k1 = phi1.kernel()?;
    let k2 = phi2.kernel()?;
    if k1.inv_eps_pole() || k2.inv_eps_pole() {
        return Err(Error::Singularity("compounding at ϕ = 2π".into()));
    }
    let nn = k1.nu * k2.nu;
    let cos_half = nn * (k1.inv_eps * k2.inv_eps - 0.25 * phi1.v.dot(&phi2.v));
    // w = sin(ϕ/2)·a
    let w = 0.5 * nn * (phi1.v * k2.inv_eps + phi2.v * k1.inv_eps - 0.5 * phi1.v.cross(&phi2.v));
    let sin_half = w.norm();
    let varphi = 2.0 * sin_half.atan2(cos_half);
    if varphi == 0.0 {
        return Ok(RotationVector3::zero(gen));
    }
    let k = Kernel::from_angle(gen, varphi)?;
    Ok(RotationVector3 { v: w * (2.0 / k.nu), gen })
}

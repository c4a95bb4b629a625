//! Poses: vectorial maps from `ℝ⁶` onto `SE(3)` and `Ad(SE(3))`.
//!
//! A pose vector `ξ = (ρ, φ)` maps to
//!
//! ```text
//! T(ξ) = 1 + a ξ^∧ + b ξ^∧² + c ξ^∧³ = [ C(φ)  D(φ)ρ ]
//!                                      [  0ᵀ     1   ]
//! ```
//!
//! with `D(φ) = a 1 + b φ^∧ + c φ^∧²`. Membership in `SE(3)` forces
//! `b = ν²/2` and `a − |φ|² c = ν²/ε`, which leaves one free coefficient; the
//! [`CouplingChoice`] fixes it. The adjoint series
//! `𝒯(ξ) = 1 + d ξ^⤊ + e ξ^⤊² + f ξ^⤊³ + g ξ^⤊⁴` is built from the same
//! `a, b, c`, so `Ad(T(ξ)) = 𝒯(ξ)`.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use nalgebra::{Matrix3, Matrix4, Matrix6, Vector3, Vector4, Vector6};

use crate::error::{Error, Result};
use crate::genfun::{GeneratingFunction, Kernel};
use crate::linalg;
use crate::so3::{
    self, cayley_factors_from_kernel, hat3, rot_from_vec, rot_jacobian_inv, FactorOrder, RotationMatrix,
    RotationVector3, GROUP_TOL,
};

/// Relative tolerance on the `a − |φ|²c = ν²/ε` condition for explicit couplings.
const EXPLICIT_TOL: f64 = 1e-9;

/// Selects the free coefficient of the pose map.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CouplingChoice {
    /// `a = μ`, `c = (μ − ν²/ε)/|φ|²`, giving `D = J` and a constant screw axis.
    #[default]
    Screw,
    /// `c = ¼ν²ε`, the choice that admits the Cayley-type factorization.
    CayleyFactorable,
    /// Caller-supplied `a` and `c`, valid only at the angle they were computed for.
    Explicit { a: f64, c: f64 },
}

impl fmt::Display for CouplingChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingChoice::Screw => f.write_str("screw"),
            CouplingChoice::CayleyFactorable => f.write_str("cayley"),
            CouplingChoice::Explicit { a, c } => write!(f, "explicit:{a},{c}"),
        }
    }
}

impl FromStr for CouplingChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "screw" => Ok(CouplingChoice::Screw),
            "cayley" => Ok(CouplingChoice::CayleyFactorable),
            _ => {
                let rest =
                    s.strip_prefix("explicit:").ok_or_else(|| Error::Parse(format!("unknown coupling '{s}'")))?;
                let (a, c) = rest
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("expected explicit:<a>,<c>, got '{s}'")))?;
                let parse = |t: &str| {
                    t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("invalid number '{t}' in '{s}'")))
                };
                Ok(CouplingChoice::Explicit { a: parse(a)?, c: parse(c)? })
            }
        }
    }
}

/// The series coefficients `a`, `b`, `c` of the 4×4 pose map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// The series coefficients of the 6×6 adjoint map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointCoefficients {
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl AdjointCoefficients {
    /// `d, e, f, g` matching `Ad(T)` for a pose map with coefficients `a, b, c`
    /// at squared parameter norm `norm2`.
    pub fn from_pose(p: &PoseCoefficients, norm2: f64) -> Self {
        let PoseCoefficients { a, b, c } = *p;
        let f = 0.5 * (a * b - c);
        let g = 0.5 * (b * b - c * (a - norm2 * c));
        AdjointCoefficients { d: a + norm2 * (f - c), e: norm2 * g + b, f, g }
    }
}

/// A pose parameter vector `ξ = (ρ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseVector6 {
    pub rho: Vector3<f64>,
    pub phi: Vector3<f64>,
    pub gen: GeneratingFunction,
    pub coupling: CouplingChoice,
}

impl PoseVector6 {
    /// Validates `|φ|` against the generating function and, for an explicit
    /// coupling, the `SE(3)` membership condition.
    pub fn new(
        rho: Vector3<f64>,
        phi: Vector3<f64>,
        gen: GeneratingFunction,
        coupling: CouplingChoice,
    ) -> Result<Self> {
        let xi = PoseVector6 { rho, phi, gen, coupling };
        xi.coefficients()?;
        Ok(xi)
    }

    pub fn from_xi(xi: &Vector6<f64>, gen: GeneratingFunction, coupling: CouplingChoice) -> Result<Self> {
        Self::new(xi.fixed_rows::<3>(0).into(), xi.fixed_rows::<3>(3).into(), gen, coupling)
    }

    pub fn zero(gen: GeneratingFunction, coupling: CouplingChoice) -> Self {
        PoseVector6 { rho: Vector3::zeros(), phi: Vector3::zeros(), gen, coupling }
    }

    /// `(ρ, φ)` stacked.
    pub fn xi(&self) -> Vector6<f64> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.rho);
        v.fixed_rows_mut::<3>(3).copy_from(&self.phi);
        v
    }

    pub fn rotation(&self) -> RotationVector3 {
        RotationVector3 { v: self.phi, gen: self.gen }
    }

    /// Same parameters with a different generating function or coupling.
    pub fn with(&self, gen: GeneratingFunction, coupling: CouplingChoice) -> Result<Self> {
        Self::new(self.rho, self.phi, gen, coupling)
    }

    /// Component-wise comparison of `ρ` and `φ` with absolute tolerance `tol`.
    pub fn approx_eq(&self, other: &PoseVector6, tol: f64) -> bool {
        (self.rho - other.rho).amax() <= tol && (self.phi - other.phi).amax() <= tol
    }

    pub(crate) fn coefficients(&self) -> Result<(Kernel, PoseCoefficients)> {
        pose_kernel(&self.phi, self.gen, self.coupling)
    }
}

/// `a`, `b`, `c` for the given rotation parameters and coupling.
pub fn pose_coefficients(
    phi: &Vector3<f64>,
    gen: GeneratingFunction,
    coupling: CouplingChoice,
) -> Result<PoseCoefficients> {
    pose_kernel(phi, gen, coupling).map(|(_, p)| p)
}

pub(crate) fn pose_kernel(
    phi: &Vector3<f64>,
    gen: GeneratingFunction,
    coupling: CouplingChoice,
) -> Result<(Kernel, PoseCoefficients)> {
    let k = Kernel::from_norm(gen, phi.norm())?;
    let n2 = k.norm * k.norm;
    let b = k.half_nu2();
    let coeffs = match coupling {
        CouplingChoice::Screw => PoseCoefficients { a: k.mu, b, c: k.screw_c },
        CouplingChoice::CayleyFactorable => {
            if k.eps_pole() {
                return Err(Error::Singularity(format!("Cayley-factorable coupling is unbounded at ϕ = {}", k.varphi)));
            }
            let c = 0.25 * k.nu * k.nu * k.eps;
            PoseCoefficients { a: k.nu2_over_eps + n2 * c, b, c }
        }
        CouplingChoice::Explicit { a, c } => {
            let lhs = a - n2 * c;
            if !((lhs - k.nu2_over_eps).abs() <= EXPLICIT_TOL * a.abs().max(1.0)) {
                return Err(Error::Constraint(format!(
                    "explicit coupling violates a − |φ|²c = ν²/ε ({lhs} vs {})",
                    k.nu2_over_eps
                )));
            }
            PoseCoefficients { a, b, c }
        }
    };
    Ok((k, coeffs))
}

/// A 4×4 homogeneous transformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformMatrix(Matrix4<f64>);

impl TransformMatrix {
    pub fn identity() -> Self {
        TransformMatrix(Matrix4::identity())
    }

    /// Accepts `m` if its rotation block is orthonormal and its bottom row is exactly `(0, 0, 0, 1)`.
    pub fn try_new(m: Matrix4<f64>) -> Result<Self> {
        if m.fixed_view::<1, 4>(3, 0) != Matrix4::<f64>::identity().fixed_view::<1, 4>(3, 0) {
            return Err(Error::Constraint("bottom row of a transform must be (0, 0, 0, 1)".into()));
        }
        RotationMatrix::try_new(m.fixed_view::<3, 3>(0, 0).into())?;
        Ok(TransformMatrix(m))
    }

    pub fn new_unchecked(m: Matrix4<f64>) -> Self {
        TransformMatrix(m)
    }

    pub fn from_parts(c: &RotationMatrix, r: &Vector3<f64>) -> Self {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(c.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(r);
        TransformMatrix(m)
    }

    pub fn from_translation(r: &Vector3<f64>) -> Self {
        Self::from_parts(&RotationMatrix::identity(), r)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Matrix4<f64> {
        self.0
    }

    pub fn rotation(&self) -> RotationMatrix {
        RotationMatrix::new_unchecked(self.0.fixed_view::<3, 3>(0, 0).into())
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.0.fixed_view::<3, 1>(0, 3).into()
    }

    /// `[Cᵀ, −Cᵀr; 0ᵀ, 1]`.
    pub fn inverse(&self) -> Self {
        let ct = self.rotation().transpose();
        let r = -(ct.matrix() * self.translation());
        Self::from_parts(&ct, &r)
    }

    pub fn transform_point(&self, p: &Vector4<f64>) -> Vector4<f64> {
        self.0 * p
    }
}

impl Mul for TransformMatrix {
    type Output = TransformMatrix;
    fn mul(self, rhs: TransformMatrix) -> TransformMatrix {
        TransformMatrix(self.0 * rhs.0)
    }
}

/// A 6×6 adjoint pose matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointMatrix(Matrix6<f64>);

impl AdjointMatrix {
    pub fn identity() -> Self {
        AdjointMatrix(Matrix6::identity())
    }

    /// Accepts `m` if it has the block structure `[C, r^∧C; 0, C]` with `C ∈ SO(3)`.
    pub fn try_new(m: Matrix6<f64>) -> Result<Self> {
        let c: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into();
        let c2: Matrix3<f64> = m.fixed_view::<3, 3>(3, 3).into();
        let zero = m.fixed_view::<3, 3>(3, 0).amax();
        RotationMatrix::try_new(c)?;
        let rx: Matrix3<f64> = m.fixed_view::<3, 3>(0, 3) * c.transpose();
        let skew = (rx + rx.transpose()).amax();
        if zero > GROUP_TOL || (c - c2).amax() > GROUP_TOL || skew > GROUP_TOL {
            return Err(Error::Constraint("matrix lacks the adjoint block structure".into()));
        }
        Ok(AdjointMatrix(m))
    }

    pub fn new_unchecked(m: Matrix6<f64>) -> Self {
        AdjointMatrix(m)
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Matrix6<f64> {
        self.0
    }

    /// The transform this adjoint represents, `r^∧ = (top-right block)·Cᵀ`.
    pub fn to_transform(&self) -> TransformMatrix {
        let c: Matrix3<f64> = self.0.fixed_view::<3, 3>(0, 0).into();
        let rx: Matrix3<f64> = self.0.fixed_view::<3, 3>(0, 3) * c.transpose();
        TransformMatrix::from_parts(&RotationMatrix::new_unchecked(c), &so3::vee3(&rx))
    }

    pub fn inverse(&self) -> Self {
        adjoint_of(&self.to_transform().inverse())
    }
}

impl Mul for AdjointMatrix {
    type Output = AdjointMatrix;
    fn mul(self, rhs: AdjointMatrix) -> AdjointMatrix {
        AdjointMatrix(self.0 * rhs.0)
    }
}

/// `ξ^∧ = [φ^∧, ρ; 0ᵀ, 0]`.
pub fn hat6(xi: &Vector6<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat3(&xi.fixed_rows::<3>(3).into()));
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&xi.fixed_rows::<3>(0));
    m
}

/// `ξ^⤊ = [φ^∧, ρ^∧; 0, φ^∧]`.
pub fn curlyhat6(xi: &Vector6<f64>) -> Matrix6<f64> {
    let rho_x = hat3(&xi.fixed_rows::<3>(0).into());
    let phi_x = hat3(&xi.fixed_rows::<3>(3).into());
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&phi_x);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&phi_x);
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&rho_x);
    m
}

/// `D(φ) = a 1 + b φ^∧ + c φ^∧²`.
pub fn coupling_matrix(phi: &Vector3<f64>, gen: GeneratingFunction, coupling: CouplingChoice) -> Result<Matrix3<f64>> {
    let p = pose_coefficients(phi, gen, coupling)?;
    let x = hat3(phi);
    Ok(Matrix3::identity() * p.a + x * p.b + x * x * p.c)
}

/// `D(φ)⁻¹`, closed form for the screw coupling and an LU solve otherwise.
pub fn coupling_matrix_inverse(
    phi: &Vector3<f64>,
    gen: GeneratingFunction,
    coupling: CouplingChoice,
) -> Result<Matrix3<f64>> {
    match coupling {
        CouplingChoice::Screw => rot_jacobian_inv(&RotationVector3 { v: *phi, gen }),
        _ => {
            let d = coupling_matrix(phi, gen, coupling)?;
            linalg::solve_left(&d, &Matrix3::identity())
        }
    }
}

/// `T(ξ) = [C(φ), D(φ)ρ; 0ᵀ, 1]`.
pub fn pose_from_vec(xi: &PoseVector6) -> Result<TransformMatrix> {
    let c = rot_from_vec(&xi.rotation())?;
    let d = coupling_matrix(&xi.phi, xi.gen, xi.coupling)?;
    Ok(TransformMatrix::from_parts(&c, &(d * xi.rho)))
}

/// The unreduced series `1 + a ξ^∧ + b ξ^∧² + c ξ^∧³`.
pub fn pose_series(xi: &PoseVector6) -> Result<Matrix4<f64>> {
    let (_, p) = xi.coefficients()?;
    let x = hat6(&xi.xi());
    let x2 = x * x;
    Ok(Matrix4::identity() + x * p.a + x2 * p.b + x2 * x * p.c)
}

/// `Ad(T) = [C, r^∧C; 0, C]`.
pub fn adjoint_of(t: &TransformMatrix) -> AdjointMatrix {
    let c = *t.rotation().matrix();
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&c);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&c);
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&(hat3(&t.translation()) * c));
    AdjointMatrix(m)
}

/// `𝒯(ξ) = 1 + d ξ^⤊ + e ξ^⤊² + f ξ^⤊³ + g ξ^⤊⁴` for the vector's coupling.
pub fn adjoint_from_vec(xi: &PoseVector6) -> Result<AdjointMatrix> {
    let (k, p) = xi.coefficients()?;
    let coeffs = AdjointCoefficients::from_pose(&p, k.norm * k.norm);
    Ok(adjoint_series(&xi.xi(), &coeffs))
}

/// Evaluates the quartic adjoint series for arbitrary coefficients.
pub fn adjoint_series(xi: &Vector6<f64>, k: &AdjointCoefficients) -> AdjointMatrix {
    let x = curlyhat6(xi);
    let x2 = x * x;
    let x3 = x2 * x;
    AdjointMatrix(Matrix6::identity() + x * k.d + x2 * k.e + x3 * k.f + x3 * x * k.g)
}

/// 4×4 higher-order Cayley map `(1 − ξ^∧/2m)^(−m) (1 + ξ^∧/2m)^m`.
pub fn pose_cayley_higher(xi: &Vector6<f64>, m: u32) -> Result<TransformMatrix> {
    linalg::cayley_power(&hat6(xi), m).map(TransformMatrix)
}

/// 6×6 higher-order Cayley map `(1 − ξ^⤊/2m)^(−m) (1 + ξ^⤊/2m)^m`.
pub fn adjoint_cayley_higher(xi: &Vector6<f64>, m: u32) -> Result<AdjointMatrix> {
    linalg::cayley_power(&curlyhat6(xi), m).map(AdjointMatrix)
}

/// Adjoint coefficients for which `𝒯` factors as `(1 − λξ^⤊)⁻¹(1 + γξ^⤊)`:
/// `f = ν²ε/(4 + |φ|²ε²)`, `g = ½εf`, `d = |φ|²f + ν²/ε`, `e = ½ε|φ|²f + ν²/2`.
pub fn adjoint_factor_coefficients(gen: GeneratingFunction, varphi: f64) -> Result<AdjointCoefficients> {
    let k = Kernel::from_angle(gen, varphi)?;
    Ok(adjoint_factor_coefficients_from_kernel(&k))
}

fn adjoint_factor_coefficients_from_kernel(k: &Kernel) -> AdjointCoefficients {
    // written with 1/ε so the ε pole at ϕ = π stays finite
    let n2 = k.norm * k.norm;
    let nu2 = k.nu * k.nu;
    let denom = 4.0 * k.inv_eps * k.inv_eps + n2;
    let f = nu2 * k.inv_eps / denom;
    let g = 0.5 * nu2 / denom;
    AdjointCoefficients { d: n2 * f + k.nu2_over_eps, e: n2 * g + 0.5 * nu2, f, g }
}

/// The pose through its Cayley-type factorization (implies the
/// [`CouplingChoice::CayleyFactorable`] coupling).
pub fn pose_factor(xi: &Vector6<f64>, gen: GeneratingFunction, order: FactorOrder) -> Result<TransformMatrix> {
    let (l, r) = factor_terms(xi, gen, order)?;
    linalg::rational_factor(&hat6(xi), l, r).map(TransformMatrix)
}

/// `T(ξ)⁻¹` by flipping the signs in the factorization.
pub fn pose_factor_inverse(xi: &Vector6<f64>, gen: GeneratingFunction, order: FactorOrder) -> Result<TransformMatrix> {
    let (l, r) = factor_terms(xi, gen, order)?;
    linalg::rational_factor(&hat6(xi), -l, -r).map(TransformMatrix)
}

/// `(1 − λξ^⤊)⁻¹(1 + γξ^⤊)` (or the swapped order).
pub fn adjoint_factor(xi: &Vector6<f64>, gen: GeneratingFunction, order: FactorOrder) -> Result<AdjointMatrix> {
    let (l, r) = factor_terms(xi, gen, order)?;
    linalg::rational_factor(&curlyhat6(xi), l, r).map(AdjointMatrix)
}

pub fn adjoint_factor_inverse(xi: &Vector6<f64>, gen: GeneratingFunction, order: FactorOrder) -> Result<AdjointMatrix> {
    let (l, r) = factor_terms(xi, gen, order)?;
    linalg::rational_factor(&curlyhat6(xi), -l, -r).map(AdjointMatrix)
}

/// Series form of the factorable adjoint map at the angle implied by `ξ`.
pub fn adjoint_factor_series(xi: &Vector6<f64>, gen: GeneratingFunction) -> Result<AdjointMatrix> {
    let phi: Vector3<f64> = xi.fixed_rows::<3>(3).into();
    let k = Kernel::from_norm(gen, phi.norm())?;
    Ok(adjoint_series(xi, &adjoint_factor_coefficients_from_kernel(&k)))
}

fn factor_terms(xi: &Vector6<f64>, gen: GeneratingFunction, order: FactorOrder) -> Result<(f64, f64)> {
    let phi: Vector3<f64> = xi.fixed_rows::<3>(3).into();
    let k = Kernel::from_norm(gen, phi.norm())?;
    Ok(cayley_factors_from_kernel(&k)?.ordered(order))
}

/// Recovers `ξ` from `T`: `φ` from the rotation block, then `ρ = D(φ)⁻¹ r`.
pub fn vec_from_pose(t: &TransformMatrix, gen: GeneratingFunction, coupling: CouplingChoice) -> Result<PoseVector6> {
    let phi = so3::vec_from_rot(&t.rotation(), gen)?;
    let dinv = coupling_matrix_inverse(&phi.v, gen, coupling)?;
    PoseVector6::new(dinv * t.translation(), phi.v, gen, coupling)
}

/// `ξ` such that `T(ξ) = T(ξ₂) T(ξ₁)`:
/// `ρ = D(φ)⁻¹ C(φ₂) D(φ₁) ρ₁ + D(φ)⁻¹ D(φ₂) ρ₂` with `φ` the compound rotation.
pub fn compound_pose(xi1: &PoseVector6, xi2: &PoseVector6) -> Result<PoseVector6> {
    if !xi1.gen.same_function(xi2.gen) || xi1.coupling != xi2.coupling {
        return Err(Error::Constraint("compounded pose vectors must share generating function and coupling".into()));
    }
    let (gen, coupling) = (xi1.gen, xi1.coupling);
    let phi = so3::compound_rot(&xi1.rotation(), &xi2.rotation())?;
    let d1 = coupling_matrix(&xi1.phi, gen, coupling)?;
    let d2 = coupling_matrix(&xi2.phi, gen, coupling)?;
    let c2 = rot_from_vec(&xi2.rotation())?;
    let dinv = coupling_matrix_inverse(&phi.v, gen, coupling)?;
    let rho = dinv * (c2.matrix() * d1 * xi1.rho + d2 * xi2.rho);
    PoseVector6::new(rho, phi.v, gen, coupling)
}

/// A screw: pitch `p`, unit axis `a` and moment arm `m ⊥ a`, with unit
/// twist `s = (p a + m^∧ a, a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Screw {
    pub pitch: f64,
    pub axis: Vector3<f64>,
    pub moment: Vector3<f64>,
}

impl Screw {
    /// Decomposes `ξ = φ(ϕ)·s`; fails for a pure translation.
    pub fn from_pose_vector(xi: &PoseVector6) -> Result<Self> {
        let n = xi.phi.norm();
        if n == 0.0 {
            return Err(Error::Domain("pure translations have no finite-pitch screw".into()));
        }
        let axis = xi.phi / n;
        let top = xi.rho / n;
        let pitch = axis.dot(&top);
        let perp = top - axis * pitch;
        Ok(Screw { pitch, axis, moment: axis.cross(&perp) })
    }

    pub fn unit_twist(&self) -> Vector6<f64> {
        let mut s = Vector6::zeros();
        s.fixed_rows_mut::<3>(0).copy_from(&(self.axis * self.pitch + self.moment.cross(&self.axis)));
        s.fixed_rows_mut::<3>(3).copy_from(&self.axis);
        s
    }

    /// `ξ = φ(ϕ)·s` with the screw coupling.
    pub fn pose_vector(&self, angle: f64, gen: GeneratingFunction) -> Result<PoseVector6> {
        PoseVector6::from_xi(&(self.unit_twist() * gen.eval(angle)?), gen, CouplingChoice::Screw)
    }
}

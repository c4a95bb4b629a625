//! Generating functions and the scalar kernels derived from them.
//!
//! A vectorial parameterization writes a rotation of angle `ϕ` about the unit
//! axis `a` as `φ(ϕ)·a`, where the generating function `φ` is odd, strictly
//! increasing on its validity range and normalized so that `φ(ϕ)/ϕ → 1`.
//! Every map in this crate is assembled from a handful of scalars of `ϕ`:
//!
//! * `μ = (dφ/dϕ)⁻¹`
//! * `ν = 2 sin(ϕ/2) / φ(ϕ)`
//! * `ε = 2 tan(ϕ/2) / φ(ϕ)`
//!
//! All three tend to one at the origin. Below [`SMALL_ANGLE`] they are
//! evaluated from fourth-order Taylor expansions, as are the two
//! "difference over `φ²`" combinations that appear in the Jacobian and in the
//! screw coupling.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Angles below this magnitude use series expansions instead of trigonometric ratios.
pub const SMALL_ANGLE: f64 = 1e-4;

/// `|cos(ϕ/2)|` below this is treated as the `ε → ∞` singularity.
const EPS_POLE_TOL: f64 = 1e-12;

/// The fixed registry of generating functions.
///
/// `HigherOrderTan(m)` is `2m tan(ϕ/2m)` and `HigherOrderSin(m)` is
/// `2m sin(ϕ/2m)`; the named Cayley-Gibbs-Rodrigues, modified Rodrigues,
/// Euler-Rodrigues and Bauchau-Trainelli functions are the `m = 1, 2` members
/// of those two families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratingFunction {
    RotationVector,
    CayleyGibbsRodrigues,
    ModifiedRodrigues,
    EulerRodrigues,
    BauchauTrainelli,
    HigherOrderTan(u32),
    HigherOrderSin(u32),
}

/// Which closed form a generating function reduces to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Family {
    Identity,
    Tan(u32),
    Sin(u32),
}

impl GeneratingFunction {
    /// The five rows of the classic table of vector parameterizations, steepest first.
    pub const TABLE: [GeneratingFunction; 5] = [
        GeneratingFunction::CayleyGibbsRodrigues,
        GeneratingFunction::ModifiedRodrigues,
        GeneratingFunction::RotationVector,
        GeneratingFunction::BauchauTrainelli,
        GeneratingFunction::EulerRodrigues,
    ];

    pub(crate) fn family(self) -> Family {
        use GeneratingFunction::*;
        match self {
            RotationVector => Family::Identity,
            CayleyGibbsRodrigues => Family::Tan(1),
            ModifiedRodrigues => Family::Tan(2),
            EulerRodrigues => Family::Sin(1),
            BauchauTrainelli => Family::Sin(2),
            HigherOrderTan(m) => Family::Tan(m),
            HigherOrderSin(m) => Family::Sin(m),
        }
    }

    /// True when both values denote the same function (e.g. `tan:1` and `cgr`).
    pub fn same_function(self, other: GeneratingFunction) -> bool {
        self.family() == other.family()
    }

    /// Maps `tan:1`, `tan:2`, `sin:1`, `sin:2` onto their named variants.
    pub fn canonical(self) -> GeneratingFunction {
        use GeneratingFunction::*;
        match self.family() {
            Family::Identity => RotationVector,
            Family::Tan(1) => CayleyGibbsRodrigues,
            Family::Tan(2) => ModifiedRodrigues,
            Family::Sin(1) => EulerRodrigues,
            Family::Sin(2) => BauchauTrainelli,
            Family::Tan(m) => HigherOrderTan(m),
            Family::Sin(m) => HigherOrderSin(m),
        }
    }

    /// Order of the Cayley transform this function corresponds to, if any.
    pub fn cayley_order(self) -> Option<u32> {
        match self.family() {
            Family::Tan(m) => Some(m),
            _ => None,
        }
    }

    /// Exclusive bound on `|ϕ|`.
    ///
    /// The rotation vector is valid below `2π`; the `tan`/`sin` families use
    /// the monotonicity interval of `tan(ϕ/2m)` / `sin(ϕ/2m)`, i.e. `|ϕ| < mπ`.
    pub fn validity_half_width(self) -> f64 {
        match self.family() {
            Family::Identity => 2.0 * PI,
            Family::Tan(m) | Family::Sin(m) => m as f64 * PI,
        }
    }

    /// `φ(ϕ)`.
    pub fn eval(self, varphi: f64) -> Result<f64> {
        self.check_angle(varphi)?;
        Ok(self.eval_unchecked(varphi))
    }

    fn eval_unchecked(self, varphi: f64) -> f64 {
        match self.family() {
            Family::Identity => varphi,
            Family::Tan(m) => {
                let k = 2.0 * m as f64;
                k * (varphi / k).tan()
            }
            Family::Sin(m) => {
                let k = 2.0 * m as f64;
                k * (varphi / k).sin()
            }
        }
    }

    /// `dφ/dϕ`.
    pub fn derivative(self, varphi: f64) -> Result<f64> {
        self.check_angle(varphi)?;
        Ok(match self.family() {
            Family::Identity => 1.0,
            Family::Tan(m) => {
                let c = (varphi / (2.0 * m as f64)).cos();
                1.0 / (c * c)
            }
            Family::Sin(m) => (varphi / (2.0 * m as f64)).cos(),
        })
    }

    /// Closed-form `ϕ = φ⁻¹(phi)`.
    ///
    /// For the `sin` family the image is `|phi| ≤ 2m`; the endpoint maps to
    /// the limiting angle `±mπ`.
    pub fn inverse(self, phi: f64) -> Result<f64> {
        if !phi.is_finite() {
            return Err(Error::Domain(format!("non-finite parameter {phi} for {self}")));
        }
        match self.family() {
            Family::Identity => {
                if phi.abs() >= 2.0 * PI {
                    return Err(Error::Domain(format!(
                        "|φ| = {} outside the rotation-vector range |φ| < 2π",
                        phi.abs()
                    )));
                }
                Ok(phi)
            }
            Family::Tan(m) => {
                if m == 0 {
                    return Err(Error::Domain("tan:0 is not a generating function".into()));
                }
                let k = 2.0 * m as f64;
                Ok(k * (phi / k).atan())
            }
            Family::Sin(m) => {
                if m == 0 {
                    return Err(Error::Domain("sin:0 is not a generating function".into()));
                }
                let k = 2.0 * m as f64;
                if phi.abs() > k {
                    return Err(Error::Domain(format!("|φ| = {} outside the image |φ| ≤ {k} of {self}", phi.abs())));
                }
                Ok(k * (phi / k).clamp(-1.0, 1.0).asin())
            }
        }
    }

    fn check_angle(self, varphi: f64) -> Result<()> {
        let w = self.validity_half_width();
        if !(varphi.abs() < w) {
            return Err(Error::Domain(format!("angle {varphi} outside the validity range |ϕ| < {w} of {self}")));
        }
        Ok(())
    }

    /// Coefficients of `φ(ϕ) = ϕ(1 + αϕ² + βϕ⁴ + …)`.
    fn taylor(self) -> (f64, f64) {
        match self.family() {
            Family::Identity => (0.0, 0.0),
            Family::Tan(m) => {
                let m2 = (m as f64).powi(2);
                (1.0 / (12.0 * m2), 1.0 / (120.0 * m2 * m2))
            }
            Family::Sin(m) => {
                let m2 = (m as f64).powi(2);
                (-1.0 / (24.0 * m2), 1.0 / (1920.0 * m2 * m2))
            }
        }
    }

    /// `μ = (dφ/dϕ)⁻¹` without the validity check, for angles already known to be in range.
    fn mu_unchecked(self, varphi: f64) -> f64 {
        match self.family() {
            Family::Identity => 1.0,
            Family::Tan(m) => {
                let c = (varphi / (2.0 * m as f64)).cos();
                c * c
            }
            Family::Sin(m) => 1.0 / (varphi / (2.0 * m as f64)).cos(),
        }
    }
}

impl fmt::Display for GeneratingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GeneratingFunction::*;
        match self {
            RotationVector => f.write_str("rotvec"),
            CayleyGibbsRodrigues => f.write_str("cgr"),
            ModifiedRodrigues => f.write_str("mrp"),
            EulerRodrigues => f.write_str("euler-rodrigues"),
            BauchauTrainelli => f.write_str("bauchau-trainelli"),
            HigherOrderTan(m) => write!(f, "tan:{m}"),
            HigherOrderSin(m) => write!(f, "sin:{m}"),
        }
    }
}

impl FromStr for GeneratingFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use GeneratingFunction::*;
        let order = |rest: &str| -> Result<u32> {
            let m: u32 =
                rest.parse().map_err(|_| Error::Parse(format!("invalid order in generating function '{s}'")))?;
            if m == 0 {
                return Err(Error::Parse(format!("order must be positive in '{s}'")));
            }
            Ok(m)
        };
        match s {
            "rotvec" => Ok(RotationVector),
            "cgr" => Ok(CayleyGibbsRodrigues),
            "mrp" => Ok(ModifiedRodrigues),
            "euler-rodrigues" => Ok(EulerRodrigues),
            "bauchau-trainelli" => Ok(BauchauTrainelli),
            _ => {
                if let Some(rest) = s.strip_prefix("tan:") {
                    Ok(HigherOrderTan(order(rest)?).canonical())
                } else if let Some(rest) = s.strip_prefix("sin:") {
                    Ok(HigherOrderSin(order(rest)?).canonical())
                } else {
                    Err(Error::Parse(format!("unknown generating function '{s}'")))
                }
            }
        }
    }
}

/// The scalars `μ`, `ν`, `ε` at a given angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelScalars {
    pub mu: f64,
    pub nu: f64,
    pub eps: f64,
    pub varphi: f64,
}

/// `φ(ϕ)`; fails outside the open validity range.
pub fn eval_phi(gen: GeneratingFunction, varphi: f64) -> Result<f64> {
    gen.eval(varphi)
}

/// `φ⁻¹(phi)` via the closed-form inverse.
pub fn eval_phi_inverse(gen: GeneratingFunction, phi: f64) -> Result<f64> {
    gen.inverse(phi)
}

/// `μ`, `ν`, `ε` at `varphi`.
///
/// Fails with [`Error::Singularity`] where `ε` has a pole (`cos(ϕ/2) = 0`).
pub fn kernel_scalars(gen: GeneratingFunction, varphi: f64) -> Result<KernelScalars> {
    gen.check_angle(varphi)?;
    if varphi.abs() >= SMALL_ANGLE && (0.5 * varphi).cos().abs() < EPS_POLE_TOL {
        return Err(Error::Singularity(format!("ε is unbounded at ϕ = {varphi} (cos(ϕ/2) = 0)")));
    }
    let k = Kernel::from_angle(gen, varphi)?;
    Ok(KernelScalars { mu: k.mu, nu: k.nu, eps: k.eps, varphi })
}

/// Every scalar combination the maps need, evaluated in a form that stays
/// finite wherever the underlying map is.
///
/// `ε` itself has a pole at `ϕ = π`, but the maps only use `ν²/ε = sin ϕ / φ`
/// and `1/ε`, both of which are finite there.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    pub gen: GeneratingFunction,
    /// `ϕ ≥ 0`
    pub varphi: f64,
    /// `φ(ϕ) ≥ 0`, the parameter-vector norm.
    pub norm: f64,
    pub mu: f64,
    pub inv_mu: f64,
    pub nu: f64,
    pub eps: f64,
    pub inv_eps: f64,
    /// `ν²/ε`
    pub nu2_over_eps: f64,
    /// `(μ − ν²/ε)/φ²`
    pub screw_c: f64,
    /// `(1/ε − 1/μ)/φ²`
    pub jinv_c: f64,
}

impl Kernel {
    /// Kernel for a parameter vector of norm `norm`.
    pub fn from_norm(gen: GeneratingFunction, norm: f64) -> Result<Self> {
        let varphi = gen.inverse(norm.abs())?;
        Self::from_angle(gen, varphi)
    }

    pub fn from_angle(gen: GeneratingFunction, varphi: f64) -> Result<Self> {
        gen.check_angle(varphi)?;
        let x = varphi.abs();
        if x < SMALL_ANGLE {
            return Ok(Self::series(gen, x));
        }
        let norm = gen.eval_unchecked(x);
        let mu = gen.mu_unchecked(x);
        let (s, c) = (0.5 * x).sin_cos();
        let nu = 2.0 * s / norm;
        let eps = 2.0 * s / (c * norm);
        let inv_eps = norm * c / (2.0 * s);
        let nu2_over_eps = x.sin() / norm;
        let n2 = norm * norm;
        Ok(Kernel {
            gen,
            varphi: x,
            norm,
            mu,
            inv_mu: 1.0 / mu,
            nu,
            eps,
            inv_eps,
            nu2_over_eps,
            screw_c: (mu - nu2_over_eps) / n2,
            jinv_c: (inv_eps - 1.0 / mu) / n2,
        })
    }

    fn series(gen: GeneratingFunction, x: f64) -> Self {
        let (al, be) = gen.taylor();
        let x2 = x * x;
        let x4 = x2 * x2;
        let norm = x * (1.0 + al * x2 + be * x4);
        let mu = 1.0 - 3.0 * al * x2 + (9.0 * al * al - 5.0 * be) * x4;
        let inv_mu = 1.0 + 3.0 * al * x2 + 5.0 * be * x4;
        let nu = 1.0 - (al + 1.0 / 24.0) * x2 + (al * al - be + al / 24.0 + 1.0 / 1920.0) * x4;
        let eps = 1.0 + (1.0 / 12.0 - al) * x2 + (al * al - be - al / 12.0 + 1.0 / 120.0) * x4;
        let inv_eps = 1.0 - (1.0 / 12.0 - al) * x2 + (be - al / 12.0 - 1.0 / 720.0) * x4;
        let nu2_over_eps = 1.0 - (al + 1.0 / 6.0) * x2 + (al * al - be + al / 6.0 + 1.0 / 120.0) * x4;
        let screw_c = (1.0 / 6.0 - 2.0 * al) + (12.0 * al * al - 4.0 * be - al / 2.0 - 1.0 / 120.0) * x2;
        let jinv_c = -(1.0 / 12.0 + 2.0 * al) + (4.0 * al * al - 4.0 * be + al / 12.0 - 1.0 / 720.0) * x2;
        Kernel { gen, varphi: x, norm, mu, inv_mu, nu, eps, inv_eps, nu2_over_eps, screw_c, jinv_c }
    }

    /// `ν²/2`, the fixed quadratic coefficient of every map.
    pub fn half_nu2(&self) -> f64 {
        0.5 * self.nu * self.nu
    }

    /// Whether `ε` is unbounded at this angle.
    pub fn eps_pole(&self) -> bool {
        self.varphi >= SMALL_ANGLE && (0.5 * self.varphi).cos().abs() < EPS_POLE_TOL
    }

    /// Whether `1/ε` is unbounded (`sin(ϕ/2) = 0` away from the origin).
    pub fn inv_eps_pole(&self) -> bool {
        self.varphi >= 1.0 && (0.5 * self.varphi).sin().abs() < 1e-9
    }
}

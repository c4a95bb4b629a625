//! Rectified stereo camera: projection, midpoint backprojection and
//! first-order weight construction.

use nalgebra::{Matrix3, Matrix3x4, Matrix4, Vector3, Vector4};
use rand::Rng;
use rand_distr::StandardNormal;

use super::HomogeneousPoint;
use crate::error::{Error, Result};

/// Intrinsics and image-noise covariance of a rectified stereo pair.
/// Measurements are ordered `(u_ℓ, v_ℓ, u_r, v_r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StereoRig {
    /// Focal length in pixels.
    pub f: f64,
    /// Baseline in meters.
    pub b: f64,
    pub cu: f64,
    pub cv: f64,
    /// Image-noise covariance in pixels².
    pub r: Matrix4<f64>,
}

impl Default for StereoRig {
    fn default() -> Self {
        StereoRig { f: 200.0, b: 0.25, cu: 0.0, cv: 0.0, r: Matrix4::identity() * (0.25 * 0.25) }
    }
}

impl StereoRig {
    pub fn new(f: f64, b: f64, cu: f64, cv: f64, r: Matrix4<f64>) -> Result<Self> {
        if !(f > 0.0) || !(b > 0.0) {
            return Err(Error::Constraint(format!("stereo rig needs f > 0 and b > 0 (got {f}, {b})")));
        }
        if (r - r.transpose()).amax() > 1e-12 || r.symmetric_eigenvalues().min() < -1e-10 {
            return Err(Error::Constraint("image-noise covariance must be symmetric PSD".into()));
        }
        Ok(StereoRig { f, b, cu, cv, r })
    }

    /// `L` with `L Lᵀ = R`, via the symmetric eigendecomposition so a singular `R` is fine.
    fn noise_factor(&self) -> Matrix4<f64> {
        let eig = self.r.symmetric_eigen();
        let sqrt = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        eig.eigenvectors * Matrix4::from_diagonal(&sqrt)
    }
}

/// `y = M (x, y, z, 1)ᵀ / z`.
pub fn stereo_project(rig: &StereoRig, point: &Vector3<f64>) -> Result<Vector4<f64>> {
    let (x, y, z) = (point.x, point.y, point.z);
    if !(z > 0.0) {
        return Err(Error::Domain(format!("point must lie in front of the rig (z = {z})")));
    }
    let (f, half) = (rig.f, 0.5 * rig.f * rig.b);
    let u = f * x / z + rig.cu;
    let v = f * y / z + rig.cv;
    Ok(Vector4::new(u + half / z, v, u - half / z, v))
}

/// Projection plus a zero-mean Gaussian draw with covariance `R`.
pub fn stereo_project_noisy<G: Rng + ?Sized>(
    rig: &StereoRig,
    point: &Vector3<f64>,
    rng: &mut G,
) -> Result<Vector4<f64>> {
    let y = stereo_project(rig, point)?;
    let n = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    Ok(y + rig.noise_factor() * n)
}

/// Midpoint inverse: depth from the horizontal disparity, elevation from the averaged `v`.
pub fn stereo_backproject(rig: &StereoRig, y: &Vector4<f64>) -> Result<HomogeneousPoint> {
    let d = disparity(y)?;
    let z = rig.f * rig.b / d;
    let x = z * (0.5 * (y[0] + y[2]) - rig.cu) / rig.f;
    let yy = z * (0.5 * (y[1] + y[3]) - rig.cv) / rig.f;
    Ok(HomogeneousPoint::new(x, yy, z))
}

/// Jacobian of [`stereo_backproject`] with respect to the four measurements.
pub fn backprojection_jacobian(rig: &StereoRig, y: &Vector4<f64>) -> Result<Matrix3x4<f64>> {
    let d = disparity(y)?;
    let f = rig.f;
    let z = f * rig.b / d;
    let dz = f * rig.b / (d * d); // ∂z/∂u_r; ∂z/∂u_ℓ = −dz
    let mu = 0.5 * (y[0] + y[2]) - rig.cu;
    let mv = 0.5 * (y[1] + y[3]) - rig.cv;
    Ok(Matrix3x4::new(
        (-dz * mu + 0.5 * z) / f,
        0.0,
        (dz * mu + 0.5 * z) / f,
        0.0,
        -dz * mv / f,
        0.5 * z / f,
        dz * mv / f,
        0.5 * z / f,
        -dz,
        0.0,
        dz,
        0.0,
    ))
}

/// `W = [Σ⁻¹, 0; 0ᵀ, 0]` with `Σ = J_p R J_pᵀ + J_q R J_qᵀ` propagated through
/// the backprojection at the two measured observations of one landmark.
pub fn stereo_weights(rig: &StereoRig, y_p: &Vector4<f64>, y_q: &Vector4<f64>) -> Result<Matrix4<f64>> {
    let jp = backprojection_jacobian(rig, y_p)?;
    let jq = backprojection_jacobian(rig, y_q)?;
    let cov: Matrix3<f64> = jp * rig.r * jp.transpose() + jq * rig.r * jq.transpose();
    let inv = cov
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Singularity("propagated point covariance is singular".into()))?;
    let mut w = Matrix4::zeros();
    w.fixed_view_mut::<3, 3>(0, 0).copy_from(&((inv + inv.transpose()) * 0.5));
    Ok(w)
}

fn disparity(y: &Vector4<f64>) -> Result<f64> {
    let d = y[0] - y[2];
    if !(d > 0.0) {
        return Err(Error::Domain(format!("non-positive disparity {d}")));
    }
    Ok(d)
}

//! Vectorial parameterizations of `SO(3)`, `SE(3)` and `Ad(SE(3))`.
//!
//! Every map is driven by a [`GeneratingFunction`] `φ(ϕ)`: the rotation
//! vector, the Cayley–Gibbs–Rodrigues and modified Rodrigues parameters, the
//! Euler–Rodrigues and Bauchau–Trainelli parameters, and the higher-order
//! tangent and sine families. On top of the maps the crate provides
//! interpolation, a simple visual-servoing simulation and a point-cloud
//! alignment solver that updates through a Cayley-type perturbation.
//!
//! ```
//! use nalgebra::Vector3;
//! use vecpose::{rot_from_vec, vec_from_rot, GeneratingFunction, RotationVector3};
//!
//! let phi = RotationVector3::new(Vector3::new(0.1, -0.4, 0.3), GeneratingFunction::ModifiedRodrigues)?;
//! let c = rot_from_vec(&phi)?;
//! let back = vec_from_rot(&c, GeneratingFunction::ModifiedRodrigues)?;
//! assert!((back.v - phi.v).amax() < 1e-14);
//! # Ok::<(), vecpose::Error>(())
//! ```

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod align;
pub mod apps;
pub mod error;
pub mod genfun;
mod linalg;
pub mod se3;
pub mod so3;
pub mod tables;

pub use error::{Error, Result};
pub use genfun::{eval_phi, eval_phi_inverse, kernel_scalars, GeneratingFunction, KernelScalars};
pub use linalg::max_abs_diff;
pub use se3::{
    adjoint_cayley_higher, adjoint_factor, adjoint_factor_coefficients, adjoint_factor_inverse, adjoint_from_vec,
    adjoint_of, compound_pose, coupling_matrix, curlyhat6, hat6, pose_cayley_higher, pose_coefficients, pose_factor,
    pose_factor_inverse, pose_from_vec, vec_from_pose, AdjointCoefficients, AdjointMatrix, CouplingChoice,
    PoseCoefficients, PoseVector6, Screw, TransformMatrix,
};
pub use so3::{
    cayley_factors, compound_rot, hat3, rot_cayley_higher, rot_factor, rot_factor_inverse, rot_from_vec, rot_jacobian,
    rot_jacobian_inv, vec_from_rot, vee3, CayleyFactors, FactorOrder, RotationMatrix, RotationVector3,
};

// The guide's Rust snippets run as doc-tests so they cannot drift from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/generating-functions.md")]
    mod generating_functions {}
    #[doc = include_str!("../../../book/src/rotations.md")]
    mod rotations {}
    #[doc = include_str!("../../../book/src/poses.md")]
    mod poses {}
    #[doc = include_str!("../../../book/src/applications.md")]
    mod applications {}
    #[doc = include_str!("../../../book/src/alignment.md")]
    mod alignment {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

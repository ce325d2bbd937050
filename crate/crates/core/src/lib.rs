//! Constant mean curvature hypersurfaces with two principal curvatures in
//! pseudo-Riemannian space forms: the profile ODE, its moduli, the moving
//! frame and the explicit immersion.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod frame;
pub mod immersion;
pub mod metric;
pub mod moduli;
mod ode;
pub mod profile;

pub use error::{Error, Result};
pub use frame::{integrate_frame, rho0, rho_t, FrameOptions, FrameState, FrameTrajectory};
pub use immersion::{
    build_point, curvature_scalars, gauss_map, verify, ConstructionCase, CurvatureScalars,
    ImmersionOptions, ImmersionSpec, SampleRecord, VerificationReport, VerifyPlan,
};
pub use metric::{
    orth_complement_basis, pick_frame, sample_flat, sample_quadric, FrameVectors, SignTriple,
    SignatureMetric, SpaceFormSpec, Vector,
};
pub use moduli::{
    admissible, phi_bounds, sweep, threshold, thresholds, AdmissibilityReport, Boundary, Curve,
    PhiBounds, SignCase, SweepGrid, Thresholds,
};
pub use profile::{
    classify, critical_points, eval_f, eval_f_prime, find_positive_roots, integrate_profile,
    kappas, quadrature_period, BranchHint, Classification, IntegrationOptions, Interval,
    ProfileParams, ProfileSolution, Root, SolutionTag, SolutionType,
};

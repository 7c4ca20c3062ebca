//! Isothermic surfaces in Euclidean 3-space through curved flats of the
//! symmetric space `O1(5) / (O(3) x O1(2))`.
//!
//! The pipeline runs from isothermic data (a conformal factor and principal
//! curvatures on a grid) to a loop of flat connections, integrates frames,
//! and reads off Christoffel pairs, Darboux pairs and the surfaces of the
//! associated family. A second entry point starts from a solution of the
//! Calapso equation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod align;
pub mod calapso;
pub mod connection;
pub mod error;
pub mod frame;
pub mod grid;
pub mod io;
pub mod isothermic;
pub mod minkowski;
pub mod report;
pub mod surface;

pub use align::{align, rms_distance, AlignOptions, Alignment};
pub use calapso::{
    build_conformal_change_form, build_moebius_frame_form, build_revolution_moebius_form, calapso_residual,
    calapso_residual_max, chart_metric, conformality_defect, integrate_u, isothermic_from_calapso, isothermic_from_calapso_with, revolution_u0,
    CalapsoConfig, CalapsoField, SURFACE_LAMBDA, CalapsoSurface, ConformalityDefect, MoebiusFormData, UIntegration,
};
pub use connection::{
    build_degenerate_revolution_form, build_phi_lambda, build_pregauge_form, build_revolution_form,
    curved_flat_defect, flatness_report, zero_curvature_residual, ConnectionForm, CurvatureField, FlatnessReport,
};
pub use error::{Error, Result};
pub use frame::{
    apply_gauge, conformal_rescale, gauge_form, integrate_frame, integrate_frame_with, path_independence_defect,
    recompose_frames, sphere_congruence_shift, transform_form, u_gauge, FrameField, GaugeField, IntegratorConfig,
    RescaleDirection,
};
pub use grid::{Field, Grid, ScalarField};
pub use isothermic::{
    conformal_factor_k, gauss_codazzi_residual, make_cylinder_patch, make_plane_patch, revolution_patch,
    solve_meridian, GaussCodazziResidual, IsothermicPatch, MeridianCurve, Profile, TurningAngle,
};
pub use minkowski::{
    algebra_defect, expm, group_exp, gram, kp_split, minkowski_inner, orthogonality_defect, project_to_group, reorthonormalize,
    AlgebraElement, GroupElement, Mat5, MinkowskiVector,
};
pub use report::{Bound, Check, ReportDocument};
pub use surface::{
    circle_congruence_point, cross_ratio, cross_ratio_mismatch, cross_ratio_nodes, dual_forms, envelope_defect, euclidean_dual, euclidean_dual_with, extract_triple,
    isothermic_forms, light_cone_lift, project_to_affine_chart, projected_distance, second_form_diagonality, sym_surfaces, sym_surfaces_with, AffineChart, DiagonalityReport,
    DualConfig, DualSurface, EnvelopeDefect, EuclideanSurface, FormCoefficients, Point3, Quadrature, SurfaceTriple,
    SymConfig, SymSurfaces,
};

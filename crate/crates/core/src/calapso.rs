//! Calapso's equation `Δ(k_xy / k) + 2 (k^2)_xy = 0`, the potential `u`
//! it makes integrable, and the Möbius-invariant frames built from `k` and
//! `u`.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::connection::ConnectionForm;
use crate::error::{Error, Result};
use crate::frame::{integrate_frame_with, FrameField, IntegratorConfig};
use crate::grid::{Field, Grid, ScalarField};
use crate::minkowski::{AlgebraElement, GroupElement};
use crate::surface::{AffineChart, FormCoefficients, SurfaceTriple, TRIPLE_TOLERANCE};

/// Default lower bound on `|k|`.
pub const K_FLOOR: f64 = 1e-6;

/// Nodes this close to the boundary are excluded from residual norms; the
/// nested stencils are central beyond it.
pub const CALAPSO_MARGIN: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct CalapsoField {
    k: ScalarField,
    k_floor: f64,
}

impl CalapsoField {
    pub fn new(k: ScalarField) -> Result<Self> {
        Self::with_floor(k, K_FLOOR)
    }

    pub fn with_floor(k: ScalarField, k_floor: f64) -> Result<Self> {
        k.check_finite("k")?;
        for ((i, j), v) in k.iter_nodes() {
            if !(v.abs() >= k_floor) {
                return Err(Error::KBelowFloor { i, j, value: v.abs(), floor: k_floor });
            }
        }
        Ok(Self { k, k_floor })
    }

    pub fn k(&self) -> &ScalarField {
        &self.k
    }

    pub fn k_floor(&self) -> f64 {
        self.k_floor
    }

    pub fn grid(&self) -> &Grid {
        self.k.grid()
    }

    /// `q = k_xy / k`.
    pub fn q(&self) -> ScalarField {
        self.k.d2_dxdy().zip_map(&self.k, |a, b| a / b)
    }

    fn k_squared(&self) -> ScalarField {
        self.k.map(|k| k * k)
    }
}

/// `Δq + 2 (k^2)_xy` at every node; boundary values use one-sided stencils.
pub fn calapso_residual(field: &CalapsoField) -> ScalarField {
    let lap = field.q().laplacian();
    let k2xy = field.k_squared().d2_dxdy();
    lap.zip_map(&k2xy, |a, b| a + 2.0 * b)
}

/// Max of `|calapso_residual|` over nodes at least [`CALAPSO_MARGIN`] from
/// the boundary.
pub fn calapso_residual_max(field: &CalapsoField) -> f64 {
    calapso_residual(field).interior_max_abs(CALAPSO_MARGIN)
}

/// Result of integrating `du` from a Calapso field.
#[derive(Debug, Clone, PartialEq)]
pub struct UIntegration {
    pub u: ScalarField,
    /// `∂y P - ∂x Q` for `du = P dx + Q dy`; equals minus the Calapso residual.
    pub compatibility: ScalarField,
    pub compatibility_defect: f64,
}

/// Value of `λ` at which the Calapso route applied to the potential of a
/// surface of revolution returns that surface, up to a Möbius
/// transformation. Other values give its Calapso transforms.
pub const SURFACE_LAMBDA: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `u0 = λ^2 - k(origin)^2`, for which `k = k(x)` gives `u = λ^2 - k^2`.
pub fn revolution_u0(field: &CalapsoField, lambda: f64) -> f64 {
    let k0 = field.k.at(0, 0);
    lambda * lambda - k0 * k0
}

/// Integrates `du = -(q_y + (k^2)_x) dx + (q_x + (k^2)_y) dy` from the
/// origin with `u(origin) = u0`.
///
/// The exact part `-d(k^2)` is integrated exactly; the rest,
/// `-q_y dx + q_x dy`, by the trapezoid rule along row 0, then up each column.
pub fn integrate_u(field: &CalapsoField, u0: f64) -> UIntegration {
    let g = *field.grid();
    let q = field.q();
    let (qx, qy) = (q.d_dx(), q.d_dy());
    let k2 = field.k_squared();
    let (k2x, k2y) = (k2.d_dx(), k2.d_dy());

    let mut rest = vec![0.0; g.len()];
    for i in 1..g.nx {
        rest[i] = rest[i - 1] - 0.5 * g.hx * (qy.at(i - 1, 0) + qy.at(i, 0));
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            rest[g.index(i, j)] = rest[g.index(i, j - 1)] + 0.5 * g.hy * (qx.at(i, j - 1) + qx.at(i, j));
        }
    }
    let k2_origin = *k2.at(0, 0);
    let u = Field::from_fn(g, |i, j| u0 - (k2.at(i, j) - k2_origin) + rest[g.index(i, j)]);

    let p = Field::from_fn(g, |i, j| -(qy.at(i, j) + k2x.at(i, j)));
    let qq = Field::from_fn(g, |i, j| qx.at(i, j) + k2y.at(i, j));
    let compatibility = p.d_dy().zip_map(&qq.d_dx(), |a, b| a - b);
    let compatibility_defect = compatibility.interior_max_abs(CALAPSO_MARGIN);
    UIntegration { u, compatibility, compatibility_defect }
}

/// 1-form coefficients of the Möbius frame, each as `(dx, dy)` parts.
#[derive(Debug, Clone, PartialEq)]
pub struct MoebiusFormData {
    /// `τ = k_x dx - k_y dy`.
    pub tau: (ScalarField, ScalarField),
    /// `χ1 = (k^2/2 - u) dx - q dy`.
    pub chi1: (ScalarField, ScalarField),
    /// `χ2 = -q dx + (k^2/2 + u) dy`.
    pub chi2: (ScalarField, ScalarField),
    pub u: ScalarField,
}

impl MoebiusFormData {
    pub fn new(field: &CalapsoField, u: &ScalarField) -> Result<Self> {
        field.k.same_shape(u)?;
        let k = &field.k;
        let q = field.q();
        Ok(Self {
            tau: (k.d_dx(), k.d_dy().map(|v| -v)),
            chi1: (k.zip_map(u, |k, u| 0.5 * k * k - u), q.map(|q| -q)),
            chi2: (q.map(|q| -q), k.zip_map(u, |k, u| 0.5 * k * k + u)),
            u: u.clone(),
        })
    }
}

/// The adapted Möbius frame form:
///
/// ```text
///    0      0      k dx    dx   χ1
///    0      0     -k dy    dy   χ2
///   -k dx   k dy   0       0    τ
///   -χ1    -χ2    -τ       0    0
///   -dx    -dy     0       0    0
/// ```
pub fn build_moebius_frame_form(field: &CalapsoField, u: &ScalarField) -> Result<ConnectionForm> {
    let d = MoebiusFormData::new(field, u)?;
    let k = &field.k;
    let g = *field.grid();
    let ax = Field::from_fn(g, |i, j| {
        let mut a = AlgebraElement::zero();
        a.set_pair(1, 3, *k.at(i, j));
        a.set_pair(1, 4, 1.0);
        a.set_pair(1, 5, *d.chi1.0.at(i, j));
        a.set_pair(2, 5, *d.chi2.0.at(i, j));
        a.set_pair(3, 5, *d.tau.0.at(i, j));
        a
    });
    let ay = Field::from_fn(g, |i, j| {
        let mut a = AlgebraElement::zero();
        a.set_pair(2, 3, -k.at(i, j));
        a.set_pair(2, 4, 1.0);
        a.set_pair(1, 5, *d.chi1.1.at(i, j));
        a.set_pair(2, 5, *d.chi2.1.at(i, j));
        a.set_pair(3, 5, *d.tau.1.at(i, j));
        a
    });
    ConnectionForm::new(ax, ay, None)
}

/// The form after the conformal change `f -> f / k` that keeps the central
/// sphere congruence:
///
/// ```text
///    0       ω      k dx   dx/k   χ1
///   -ω       0     -k dy   dy/k   χ2
///   -k dx    k dy   0      0      0
///   -χ1     -χ2     0      0      0
///   -dx/k   -dy/k   0      0      0
/// ```
///
/// with `ω = -(k_y/k) dx + (k_x/k) dy`,
/// `χ1 = k (k_xx/k - |∇k|^2/(2k^2) + k^2/2 - u) dx` and
/// `χ2 = k (k_yy/k - |∇k|^2/(2k^2) + k^2/2 + u) dy`.
pub fn build_conformal_change_form(field: &CalapsoField, u: &ScalarField) -> Result<ConnectionForm> {
    let k = &field.k;
    k.same_shape(u)?;
    let g = *field.grid();
    let (kx, ky, kxx, kyy) = (k.d_dx(), k.d_dy(), k.d2_dx2(), k.d2_dy2());
    let coeffs = |i: usize, j: usize| {
        let (kv, uv) = (*k.at(i, j), *u.at(i, j));
        let grad = (kx.at(i, j).powi(2) + ky.at(i, j).powi(2)) / (2.0 * kv * kv);
        let chi1 = kv * (kxx.at(i, j) / kv - grad + 0.5 * kv * kv - uv);
        let chi2 = kv * (kyy.at(i, j) / kv - grad + 0.5 * kv * kv + uv);
        (kv, chi1, chi2)
    };
    let ax = Field::from_fn(g, |i, j| {
        let (kv, chi1, _) = coeffs(i, j);
        let mut a = AlgebraElement::zero();
        a.set_pair(1, 2, -ky.at(i, j) / kv);
        a.set_pair(1, 3, kv);
        a.set_pair(1, 4, 1.0 / kv);
        a.set_pair(1, 5, chi1);
        a
    });
    let ay = Field::from_fn(g, |i, j| {
        let (kv, _, chi2) = coeffs(i, j);
        let mut a = AlgebraElement::zero();
        a.set_pair(1, 2, kx.at(i, j) / kv);
        a.set_pair(2, 3, -kv);
        a.set_pair(2, 4, 1.0 / kv);
        a.set_pair(2, 5, chi2);
        a
    });
    ConnectionForm::new(ax, ay, None)
}

/// Möbius frame form of a surface of revolution with `k = k(x)` and
/// `u = λ^2 - k^2`, from given samples of `k` and `k_x`:
///
/// ```text
///    0                   0               k dx      dx   (3k^2/2 - λ^2) dx
///    0                   0              -k dy      dy   (λ^2 - k^2/2) dy
///   -k dx                k dy            0         0    k_x dx
///   -(3k^2/2 - λ^2) dx   (k^2/2 - λ^2) dy  -k_x dx  0    0
///   -dx                 -dy              0         0    0
/// ```
pub fn build_revolution_moebius_form(k: &ScalarField, kx: &ScalarField, lambda: f64) -> Result<ConnectionForm> {
    k.same_shape(kx)?;
    let g = *k.grid();
    let l2 = lambda * lambda;
    let ax = Field::from_fn(g, |i, j| {
        let kv = *k.at(i, j);
        let mut a = AlgebraElement::zero();
        a.set_pair(1, 3, kv);
        a.set_pair(1, 4, 1.0);
        a.set_pair(1, 5, 1.5 * kv * kv - l2);
        a.set_pair(3, 5, *kx.at(i, j));
        a
    });
    let ay = Field::from_fn(g, |i, j| {
        let kv = *k.at(i, j);
        let mut a = AlgebraElement::zero();
        a.set_pair(2, 3, -kv);
        a.set_pair(2, 4, 1.0);
        a.set_pair(2, 5, l2 - 0.5 * kv * kv);
        a
    });
    ConnectionForm::new(ax, ay, Some(lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalapsoConfig {
    /// Largest admissible interior Calapso residual.
    pub residual_threshold: f64,
    pub integrator: IntegratorConfig,
}

impl Default for CalapsoConfig {
    fn default() -> Self {
        Self { residual_threshold: 1e-3, integrator: IntegratorConfig::default() }
    }
}

/// Everything produced on the way from `k` to an isothermic surface.
#[derive(Debug, Clone)]
pub struct CalapsoSurface {
    pub residual: f64,
    pub u: UIntegration,
    pub form: ConnectionForm,
    pub frames: FrameField,
    pub triple: SurfaceTriple,
    /// `f` in the affine chart with infinity at `base e5`.
    pub chart_points: Field<Vector3<f64>>,
}

/// Metric of a chart-projected surface, for the isothermic check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalityDefect {
    /// `max |F| / E`.
    pub off_diagonal: f64,
    /// `max |E - G| / E`.
    pub anisotropy: f64,
}

pub fn conformality_defect(points: &Field<Vector3<f64>>, margin: usize) -> ConformalityDefect {
    let (px, py) = (points.d_dx(), points.d_dy());
    let g = *points.grid();
    let mut out = ConformalityDefect { off_diagonal: 0.0, anisotropy: 0.0 };
    for (i, j) in g.nodes() {
        if !g.is_interior(i, j, margin) {
            continue;
        }
        let (a, b) = (px.at(i, j), py.at(i, j));
        let e = a.norm_squared();
        out.off_diagonal = out.off_diagonal.max(a.dot(b).abs() / e);
        out.anisotropy = out.anisotropy.max((e - b.norm_squared()).abs() / e);
    }
    out
}

/// First fundamental form of chart-projected points.
pub fn chart_metric(points: &Field<Vector3<f64>>) -> FormCoefficients {
    let (px, py) = (points.d_dx(), points.d_dy());
    let g = *points.grid();
    FormCoefficients {
        xx: Field::from_fn(g, |i, j| px.at(i, j).norm_squared()),
        xy: Field::from_fn(g, |i, j| px.at(i, j).dot(py.at(i, j))),
        yy: Field::from_fn(g, |i, j| py.at(i, j).norm_squared()),
    }
}

pub fn isothermic_from_calapso(field: &CalapsoField, u0: f64, base: &GroupElement) -> Result<CalapsoSurface> {
    isothermic_from_calapso_with(field, u0, base, &CalapsoConfig::default())
}

/// Integrates `u`, builds the Möbius frame form, integrates frames and reads
/// off the triple.
pub fn isothermic_from_calapso_with(
    field: &CalapsoField,
    u0: f64,
    base: &GroupElement,
    config: &CalapsoConfig,
) -> Result<CalapsoSurface> {
    let residual = calapso_residual_max(field);
    if !(residual <= config.residual_threshold) {
        return Err(Error::CalapsoResidual { residual, threshold: config.residual_threshold });
    }
    let u = integrate_u(field, u0);
    let form = build_moebius_frame_form(field, &u.u)?;
    let frames = integrate_frame_with(&form, base, &config.integrator)?;
    let triple = SurfaceTriple::from_frames(&frames);
    triple.check(TRIPLE_TOLERANCE)?;
    let chart = AffineChart::new(base.column(5))?;
    let chart_points = chart.project(&triple.f)?;
    Ok(CalapsoSurface { residual, u, form, frames, triple, chart_points })
}

//! Lie-algebra valued connection 1-forms `Φ = A_x dx + A_y dy` on a grid.
//!
//! Builders follow the printed matrix forms entry by entry; each entry is set
//! together with its `o1(5)` partner through [`AlgebraElement::set_pair`], so
//! algebra membership holds exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, ScalarField};
use crate::isothermic::{IsothermicPatch, MeridianCurve};
use crate::minkowski::{AlgebraElement, Mat5};

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionForm {
    pub ax: Field<AlgebraElement>,
    pub ay: Field<AlgebraElement>,
    /// Spectral parameter of the loop this form belongs to, if any.
    pub lambda: Option<f64>,
}

impl ConnectionForm {
    pub fn new(ax: Field<AlgebraElement>, ay: Field<AlgebraElement>, lambda: Option<f64>) -> Result<Self> {
        ax.same_shape(&ay)?;
        Ok(Self { ax, ay, lambda })
    }

    pub fn zero(grid: Grid) -> Self {
        let z = Field::from_fn(grid, |_, _| AlgebraElement::zero());
        Self { ax: z.clone(), ay: z, lambda: None }
    }

    /// Form with the same coefficients at every node.
    pub fn constant(grid: Grid, ax: AlgebraElement, ay: AlgebraElement) -> Self {
        Self {
            ax: Field::from_fn(grid, |_, _| ax),
            ay: Field::from_fn(grid, |_, _| ay),
            lambda: None,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.ax.grid()
    }

    /// Largest `algebra_defect` over both coefficient fields.
    pub fn algebra_defect(&self) -> f64 {
        self.ax.values().iter().chain(self.ay.values()).map(|x| x.defect()).fold(0.0, f64::max)
    }

    pub fn k_part(&self) -> Self {
        Self { ax: self.ax.map(|x| x.k_part()), ay: self.ay.map(|x| x.k_part()), lambda: self.lambda }
    }

    pub fn p_part(&self) -> Self {
        Self { ax: self.ax.map(|x| x.p_part()), ay: self.ay.map(|x| x.p_part()), lambda: self.lambda }
    }

    /// `Φ_k + λ Φ_p`.
    pub fn with_spectral_parameter(&self, lambda: f64) -> Self {
        let scale = |x: &AlgebraElement| {
            let (k, p) = x.kp_split();
            k + p * lambda
        };
        Self { ax: self.ax.map(scale), ay: self.ay.map(scale), lambda: Some(lambda) }
    }

    pub fn to_json(&self) -> FormJson {
        FormJson {
            grid: *self.grid(),
            lambda: self.lambda,
            ax: self.ax.values().iter().map(row_major).collect(),
            ay: self.ay.values().iter().map(row_major).collect(),
        }
    }

    pub fn from_json(json: &FormJson) -> Result<Self> {
        json.grid.validate()?;
        let read = |v: &[[f64; 25]]| Field::from_vec(json.grid, v.iter().map(|m| AlgebraElement(from_row_major(m))).collect());
        Self::new(read(&json.ax)?, read(&json.ay)?, json.lambda)
    }
}

/// Debug serialization of a connection form: grid header and per-node
/// 5x5 matrices, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormJson {
    pub grid: Grid,
    pub lambda: Option<f64>,
    pub ax: Vec<[f64; 25]>,
    pub ay: Vec<[f64; 25]>,
}

pub(crate) fn row_major(x: &AlgebraElement) -> [f64; 25] {
    mat_row_major(&x.0)
}

pub(crate) fn mat_row_major(m: &Mat5) -> [f64; 25] {
    let mut out = [0.0; 25];
    for r in 0..5 {
        for c in 0..5 {
            out[5 * r + c] = m[(r, c)];
        }
    }
    out
}

pub(crate) fn from_row_major(v: &[f64; 25]) -> Mat5 {
    Mat5::from_fn(|r, c| v[5 * r + c])
}

/// The spectral loop of a curved flat built from isothermic data:
///
/// ```text
///        0              u_y dx - u_x dy   -e^u k1 dx   λ e^u dx   -λ e^-u dx
///   -u_y dx + u_x dy    0                 -e^u k2 dy   λ e^u dy    λ e^-u dy
///    e^u k1 dx          e^u k2 dy          0           0           0
///    λ e^-u dx         -λ e^-u dy          0           0           0
///   -λ e^u dx          -λ e^u dy           0           0           0
/// ```
///
/// `u_x`, `u_y` are taken by finite differences.
pub fn build_phi_lambda(patch: &IsothermicPatch, lambda: f64) -> ConnectionForm {
    let g = *patch.grid();
    let ux = patch.u.d_dx();
    let uy = patch.u.d_dy();
    let ax = Field::from_fn(g, |i, j| {
        let eu = patch.u.at(i, j).exp();
        let emu = (-patch.u.at(i, j)).exp();
        let mut a = AlgebraElement::zero();
        a.set_pair(1, 2, *uy.at(i, j));
        a.set_pair(1, 3, -eu * patch.k1.at(i, j));
        a.set_pair(1, 4, lambda * eu);
        a.set_pair(1, 5, -lambda * emu);
        a
    });
    let ay = Field::from_fn(g, |i, j| {
        let eu = patch.u.at(i, j).exp();
        let emu = (-patch.u.at(i, j)).exp();
        let mut a = AlgebraElement::zero();
        a.set_pair(1, 2, -ux.at(i, j));
        a.set_pair(2, 3, -eu * patch.k2.at(i, j));
        a.set_pair(2, 4, lambda * eu);
        a.set_pair(2, 5, lambda * emu);
        a
    });
    ConnectionForm { ax, ay, lambda: Some(lambda) }
}

/// The form of a curved-flat framing before the final `O1(2)` gauge:
/// `Ω` with `ω = u_y dx - u_x dy`, `ψ1 = e^u k1 dx`, `ψ2 = e^u k2 dy`,
/// `ν = -du` on the light-cone block and `η` in the standard form with
/// `ω1 = dx`, `ω2 = dy`, scaled by `λ`.
///
/// Right-multiplying its frames by `diag(I3, e^u, e^-u)` yields the frames
/// of [`build_phi_lambda`].
pub fn build_pregauge_form(patch: &IsothermicPatch, lambda: f64) -> ConnectionForm {
    let g = *patch.grid();
    let ux = patch.u.d_dx();
    let uy = patch.u.d_dy();
    let ax = Field::from_fn(g, |i, j| {
        let eu = patch.u.at(i, j).exp();
        let mut a = AlgebraElement::zero();
        a.set_pair(1, 2, *uy.at(i, j));
        a.set_pair(1, 3, -eu * patch.k1.at(i, j));
        a.0[(3, 3)] = -ux.at(i, j);
        a.0[(4, 4)] = *ux.at(i, j);
        a.set_pair(1, 4, lambda);
        a.set_pair(1, 5, -lambda);
        a
    });
    let ay = Field::from_fn(g, |i, j| {
        let eu = patch.u.at(i, j).exp();
        let mut a = AlgebraElement::zero();
        a.set_pair(1, 2, -ux.at(i, j));
        a.set_pair(2, 3, -eu * patch.k2.at(i, j));
        a.0[(3, 3)] = -uy.at(i, j);
        a.0[(4, 4)] = *uy.at(i, j);
        a.set_pair(2, 4, lambda);
        a.set_pair(2, 5, lambda);
        a
    });
    ConnectionForm { ax, ay, lambda: Some(lambda) }
}

/// Loop of forms of a surface of revolution, written with the meridian
/// data directly (`y` the rotation angle):
///
/// ```text
///   0                       -r'/r dy    -(r'z''-r''z')/r^2 dx   λ r dx   -λ/r dx
///   r'/r dy                  0          -z'/r dy                λ r dy    λ/r dy
///   (r'z''-r''z')/r^2 dx     z'/r dy     0                      0         0
///   λ/r dx                  -λ/r dy      0                      0         0
///  -λ r dx                  -λ r dy      0                      0         0
/// ```
pub fn build_revolution_form(meridian: &MeridianCurve, lambda: f64, grid: Grid) -> Result<ConnectionForm> {
    // Reuse the sample-alignment check of the embedding.
    meridian.embedding(grid)?;
    let m = meridian;
    let ax = Field::from_fn(grid, |i, _| {
        let r = m.r[i];
        let mut a = AlgebraElement::zero();
        a.set_pair(1, 3, -(m.dr[i] * m.ddz[i] - m.ddr[i] * m.dz[i]) / (r * r));
        a.set_pair(1, 4, lambda * r);
        a.set_pair(1, 5, -lambda / r);
        a
    });
    let ay = Field::from_fn(grid, |i, _| {
        let r = m.r[i];
        let mut a = AlgebraElement::zero();
        a.set_pair(1, 2, -m.dr[i] / r);
        a.set_pair(2, 3, -m.dz[i] / r);
        a.set_pair(2, 4, lambda * r);
        a.set_pair(2, 5, lambda / r);
        a
    });
    Ok(ConnectionForm { ax, ay, lambda: Some(lambda) })
}

/// Curved flat obtained from the Möbius frame of a surface of revolution by
/// shifting the sphere congruence `n -> n + k f` and rescaling
/// `f -> λ f`, `f^ -> f^/λ`:
///
/// ```text
///    0      0    2k dx   λ dx   -λ dx
///    0      0    0       λ dy    λ dy
///   -2k dx  0    0       0       0
///    λ dx  -λ dy 0       0       0
///   -λ dx  -λ dy 0       0       0
/// ```
///
/// `k` must not depend on `y`.
pub fn build_degenerate_revolution_form(k: &ScalarField, lambda: f64) -> Result<ConnectionForm> {
    let g = *k.grid();
    for ((i, j), v) in k.iter_nodes() {
        let k0 = *k.at(i, 0);
        if (v - k0).abs() > 1e-12 * (1.0 + k0.abs()) {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: format!("must depend on x only; differs along y at ({i}, {j})"),
            });
        }
    }
    let ax = Field::from_fn(g, |i, j| {
        let mut a = AlgebraElement::zero();
        a.set_pair(1, 3, 2.0 * k.at(i, j));
        a.set_pair(1, 4, lambda);
        a.set_pair(1, 5, -lambda);
        a
    });
    let mut ay0 = AlgebraElement::zero();
    ay0.set_pair(2, 4, lambda);
    ay0.set_pair(2, 5, lambda);
    let ay = Field::from_fn(g, |_, _| ay0);
    Ok(ConnectionForm { ax, ay, lambda: Some(lambda) })
}

/// Discrete curvature `R = ∂x A_y - ∂y A_x + [A_x, A_y]` at every node.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub r: Field<AlgebraElement>,
    /// Nodes this close to the boundary are left out of the interior norms.
    /// The default of 2 is where the nested stencils (a derivative of a
    /// finite-difference coefficient) are central throughout.
    pub margin: usize,
}

impl CurvatureField {
    pub fn grid(&self) -> &Grid {
        self.r.grid()
    }

    pub fn with_margin(mut self, margin: usize) -> Self {
        self.margin = margin;
        self
    }

    /// Max-norm over interior nodes.
    pub fn max_norm(&self) -> f64 {
        self.interior_max(|x| x.max_abs())
    }

    /// Max-norm of the `k`-part over interior nodes.
    pub fn k_part_max(&self) -> f64 {
        self.interior_max(|x| x.k_part().max_abs())
    }

    /// Max-norm of the `p`-part over interior nodes.
    pub fn p_part_max(&self) -> f64 {
        self.interior_max(|x| x.p_part().max_abs())
    }

    /// Max-norm including boundary nodes (one-sided stencils).
    pub fn max_norm_with_boundary(&self) -> f64 {
        self.r.values().iter().map(|x| x.max_abs()).fold(0.0, f64::max)
    }

    fn interior_max(&self, f: impl Fn(&AlgebraElement) -> f64) -> f64 {
        let g = *self.grid();
        self.r
            .iter_nodes()
            .filter(|((i, j), _)| g.is_interior(*i, *j, self.margin))
            .map(|(_, x)| f(x))
            .fold(0.0, f64::max)
    }
}

/// Zero-curvature report: the full residual plus its symmetric-space split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub residual: f64,
    pub k_part: f64,
    pub p_part: f64,
    pub curved_flat: f64,
}

pub fn zero_curvature_residual(form: &ConnectionForm) -> CurvatureField {
    let dx_ay = form.ay.d_dx();
    let dy_ax = form.ax.d_dy();
    let g = *form.grid();
    let r = Field::from_fn(g, |i, j| {
        *dx_ay.at(i, j) - *dy_ax.at(i, j) + form.ax.at(i, j).bracket(form.ay.at(i, j))
    });
    CurvatureField { r, margin: 2 }
}

/// `max ||[A_x,p, A_y,p]||_max` over the grid; zero for curved flats.
pub fn curved_flat_defect(form: &ConnectionForm) -> f64 {
    form.ax
        .values()
        .iter()
        .zip(form.ay.values())
        .map(|(a, b)| a.p_part().bracket(&b.p_part()).max_abs())
        .fold(0.0, f64::max)
}

pub fn flatness_report(form: &ConnectionForm) -> FlatnessReport {
    let r = zero_curvature_residual(form);
    FlatnessReport {
        residual: r.max_norm(),
        k_part: r.k_part_max(),
        p_part: r.p_part_max(),
        curved_flat: curved_flat_defect(form),
    }
}

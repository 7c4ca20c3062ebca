//! Integration of `F^-1 dF = Φ` over the grid, holonomy diagnostics and
//! gauge transformations.

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connection::{from_row_major, mat_row_major, zero_curvature_residual, ConnectionForm};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, ScalarField};
use crate::minkowski::{group_exp, max_abs, project_to_group, AlgebraElement, GroupElement, Mat5};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Reorthonormalize after this many steps along a grid line.
    pub reorth_every: usize,
    /// Largest admissible `||step * A||_max` of a single exponent.
    pub max_step_norm: f64,
    /// Warn when the curvature residual of the input exceeds this.
    pub flatness_warn: f64,
    /// Reorthonormalize every frame once integration is done.
    pub final_correction: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { reorth_every: 16, max_step_norm: 10.0, flatness_warn: 1e-3, final_correction: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameField {
    pub frames: Field<GroupElement>,
    pub base: GroupElement,
}

impl FrameField {
    pub fn grid(&self) -> &Grid {
        self.frames.grid()
    }

    pub fn at(&self, i: usize, j: usize) -> &GroupElement {
        self.frames.at(i, j)
    }

    /// Largest cached `||F^t E5 F - E5||_max` over the field.
    pub fn max_orthogonality_defect(&self) -> f64 {
        self.frames.values().iter().map(|g| g.orthogonality_defect()).fold(0.0, f64::max)
    }

    /// Largest defect relative to `||F||_max^2`.
    pub fn max_relative_defect(&self) -> f64 {
        self.frames.values().iter().map(|g| g.relative_defect()).fold(0.0, f64::max)
    }

    /// Pointwise `g * F`.
    pub fn left_multiply(&self, g: &GroupElement) -> Self {
        Self { frames: self.frames.map(|f| g * f), base: g * &self.base }
    }

    pub fn to_json(&self) -> FrameJson {
        FrameJson {
            grid: *self.grid(),
            base: mat_row_major(self.base.matrix()),
            frames: self.frames.values().iter().map(|g| mat_row_major(g.matrix())).collect(),
        }
    }

    pub fn from_json(json: &FrameJson) -> Result<Self> {
        json.grid.validate()?;
        let frames = Field::from_vec(
            json.grid,
            json.frames.iter().map(|m| GroupElement::from_matrix(from_row_major(m))).collect(),
        )?;
        Ok(Self { frames, base: GroupElement::from_matrix(from_row_major(&json.base)) })
    }
}

/// Snapshot format of a frame field: grid header, base frame and one
/// row-major 5x5 matrix per node.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameJson {
    pub grid: Grid,
    pub base: [f64; 25],
    pub frames: Vec<[f64; 25]>,
}

fn midpoint_step(a: &AlgebraElement, b: &AlgebraElement, h: f64, at: (usize, usize), limit: f64) -> Result<GroupElement> {
    let x = (*a + *b) * (0.5 * h);
    let norm = x.max_abs();
    if !norm.is_finite() || norm > limit {
        return Err(Error::StepTooLarge { i: at.0, j: at.1, norm, limit });
    }
    Ok(group_exp(&x))
}

fn advance(current: &GroupElement, step: &GroupElement, count: usize, every: usize) -> Result<GroupElement> {
    let next = current * step;
    if every > 0 && count.is_multiple_of(every) {
        project_to_group(&next)
    } else {
        Ok(next)
    }
}

pub fn integrate_frame(form: &ConnectionForm, base: &GroupElement) -> Result<FrameField> {
    integrate_frame_with(form, base, &IntegratorConfig::default())
}

/// Midpoint-exponential integration along row 0, then up every column.
pub fn integrate_frame_with(form: &ConnectionForm, base: &GroupElement, config: &IntegratorConfig) -> Result<FrameField> {
    let g = *form.grid();
    let residual = zero_curvature_residual(form).max_norm();
    if residual > config.flatness_warn {
        warn!("connection form is not flat: curvature residual {residual:.3e} exceeds {:.1e}", config.flatness_warn);
    }
    let limit = config.max_step_norm;
    let mut row = Vec::with_capacity(g.nx);
    row.push(*base);
    for i in 1..g.nx {
        let step = midpoint_step(form.ax.at(i - 1, 0), form.ax.at(i, 0), g.hx, (i, 0), limit)?;
        let next = advance(&row[i - 1], &step, i, config.reorth_every)?;
        row.push(next);
    }
    let columns: Vec<Vec<GroupElement>> = row
        .into_par_iter()
        .enumerate()
        .map(|(i, start)| {
            let mut col = Vec::with_capacity(g.ny);
            col.push(start);
            for j in 1..g.ny {
                let step = midpoint_step(form.ay.at(i, j - 1), form.ay.at(i, j), g.hy, (i, j), limit)?;
                let next = advance(&col[j - 1], &step, j, config.reorth_every)?;
                col.push(next);
            }
            if config.final_correction {
                for f in col.iter_mut().skip(1) {
                    *f = project_to_group(f)?;
                }
            }
            Ok(col)
        })
        .collect::<Result<_>>()?;
    let frames = Field::from_fn(g, |i, j| columns[i][j]);
    let out = FrameField { frames, base: *base };
    debug!("integrated {}x{} frames, max defect {:.2e}", g.nx, g.ny, out.max_orthogonality_defect());
    Ok(out)
}

/// `max ||hol - I||_max / (hx hy)` over plaquettes clear of the boundary, where `hol` is the
/// product of the four midpoint-exponential edge steps around the plaquette.
///
/// The area normalization makes this a discrete curvature: it tends to
/// `||R||` where the form is curved and is `O(h^2)` for flat forms.
pub fn path_independence_defect(form: &ConnectionForm, frames: &FrameField) -> Result<f64> {
    form.ax.same_shape(&frames.frames)?;
    let g = *form.grid();
    let plaquettes: Vec<(usize, usize)> =
        (1..g.ny.saturating_sub(2)).flat_map(|j| (1..g.nx.saturating_sub(2)).map(move |i| (i, j))).collect();
    let defects = plaquettes
        .par_iter()
        .map(|&(i, j)| {
            let lim = f64::INFINITY;
            let bottom = midpoint_step(form.ax.at(i, j), form.ax.at(i + 1, j), g.hx, (i, j), lim)?;
            let right = midpoint_step(form.ay.at(i + 1, j), form.ay.at(i + 1, j + 1), g.hy, (i + 1, j), lim)?;
            let top = midpoint_step(form.ax.at(i, j + 1), form.ax.at(i + 1, j + 1), g.hx, (i, j + 1), lim)?;
            let left = midpoint_step(form.ay.at(i, j), form.ay.at(i, j + 1), g.hy, (i, j), lim)?;
            let hol = bottom.compose(&right).compose(&top.inverse()).compose(&left.inverse());
            Ok(max_abs(&(hol.matrix() - Mat5::identity())) / (g.hx * g.hy))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

/// Block-diagonal gauge field with values in `O(3) x O1(2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeField {
    k: Field<GroupElement>,
}

fn is_block_diagonal(m: &Mat5) -> bool {
    (0..3).all(|r| (3..5).all(|c| m[(r, c)] == 0.0 && m[(c, r)] == 0.0))
}

impl GaugeField {
    pub fn new(k: Field<GroupElement>) -> Result<Self> {
        for ((i, j), g) in k.iter_nodes() {
            if !is_block_diagonal(g.matrix()) {
                return Err(Error::GaugeStructure { i, j });
            }
            if g.relative_defect() > 1e-12 {
                return Err(Error::NotNearGroup { defect: g.orthogonality_defect() });
            }
        }
        Ok(Self { k })
    }

    pub fn identity(grid: Grid) -> Self {
        Self { k: Field::from_fn(grid, |_, _| GroupElement::identity()) }
    }

    /// `diag(I3, e^s, e^-s)` at every node.
    pub fn light_cone_scaling(s: &ScalarField) -> Self {
        Self { k: s.map(|s| light_cone_scale(*s)) }
    }

    pub fn values(&self) -> &Field<GroupElement> {
        &self.k
    }

    pub fn grid(&self) -> &Grid {
        self.k.grid()
    }
}

fn light_cone_scale(s: f64) -> GroupElement {
    let mut m = Mat5::identity();
    m[(3, 3)] = s.exp();
    m[(4, 4)] = (-s).exp();
    GroupElement::from_matrix(m)
}

/// `F' = F K` pointwise.
pub fn apply_gauge(frames: &FrameField, gauge: &GaugeField) -> Result<FrameField> {
    recompose_frames(frames, &gauge.k)
}

/// `F' = F G` pointwise for an arbitrary group-valued field `G`.
pub fn recompose_frames(frames: &FrameField, g: &Field<GroupElement>) -> Result<FrameField> {
    frames.frames.same_shape(g)?;
    let out = frames.frames.zip_map(g, |f, k| f * k);
    let base = *out.at(0, 0);
    Ok(FrameField { frames: out, base })
}

/// `Φ' = G^-1 Φ G + G^-1 dG`, with `dG` by finite differences.
pub fn transform_form(form: &ConnectionForm, g: &Field<GroupElement>) -> Result<ConnectionForm> {
    form.ax.same_shape(g)?;
    let mats = g.map(|k| *k.matrix());
    let (gx, gy) = (mats.d_dx(), mats.d_dy());
    let grid = *form.grid();
    let conj = |a: &AlgebraElement, i: usize, j: usize, d: &Mat5| {
        let k = g.at(i, j);
        let kinv = k.inverse();
        AlgebraElement(kinv.matrix() * a.matrix() * k.matrix() + kinv.matrix() * d)
    };
    let ax = Field::from_fn(grid, |i, j| conj(form.ax.at(i, j), i, j, gx.at(i, j)));
    let ay = Field::from_fn(grid, |i, j| conj(form.ay.at(i, j), i, j, gy.at(i, j)));
    Ok(ConnectionForm { ax, ay, lambda: form.lambda })
}

pub fn gauge_form(form: &ConnectionForm, gauge: &GaugeField) -> Result<ConnectionForm> {
    transform_form(form, &gauge.k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaleDirection {
    /// `f -> f / λ`, `f^ -> λ f^`.
    ShrinkF,
    /// `f -> λ f`, `f^ -> f^ / λ`.
    GrowF,
}

/// Constant light-cone gauge scaling `f` and `f^` reciprocally.
pub fn conformal_rescale(frames: &FrameField, lambda: f64, direction: RescaleDirection) -> Result<FrameField> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter { name: "lambda", reason: format!("must be finite and nonzero, got {lambda}") });
    }
    let mut m = Mat5::identity();
    let s = match direction {
        RescaleDirection::ShrinkF => 1.0 / lambda,
        RescaleDirection::GrowF => lambda,
    };
    m[(3, 3)] = s;
    m[(4, 4)] = 1.0 / s;
    let k = GroupElement::from_matrix(m);
    let gauge = GaugeField { k: Field::from_fn(*frames.grid(), |_, _| k) };
    apply_gauge(frames, &gauge)
}

/// The gauge `diag(I3, e^u, e^-u)` that normalizes the light-cone block.
pub fn u_gauge(u: &ScalarField) -> GaugeField {
    GaugeField::light_cone_scaling(u)
}

/// Change of sphere congruence `n -> n + k f` with the matching change of
/// `f^` that keeps the frame in `O1(5)`, followed by `f -> λ f`,
/// `f^ -> f^ / λ`.
///
/// Applied to the Möbius frame of a surface of revolution this yields the
/// degenerate curved flat of `build_degenerate_revolution_form`.
pub fn sphere_congruence_shift(k: &ScalarField, lambda: f64) -> Result<Field<GroupElement>> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter { name: "lambda", reason: format!("must be finite and nonzero, got {lambda}") });
    }
    Ok(k.map(|&k| {
        let mut n = Mat5::identity();
        n[(3, 2)] = k;
        n[(2, 4)] = -k;
        n[(3, 4)] = -0.5 * k * k;
        let mut s = Mat5::identity();
        s[(3, 3)] = lambda;
        s[(4, 4)] = 1.0 / lambda;
        GroupElement::from_matrix(n * s)
    }))
}

//! Sphere congruence and enveloping surfaces read off a frame field, their
//! Euclidean realizations, duals and the circle congruence.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::align::{align, AlignOptions};
use crate::connection::build_phi_lambda;
use crate::error::{Error, Result};
use crate::frame::FrameField;
use crate::grid::{Field, Grid, ScalarField};
use crate::isothermic::IsothermicPatch;
use crate::minkowski::{group_exp, AlgebraElement, GroupElement, Mat5, MinkowskiVector};

pub type Point3 = Vector3<f64>;

/// Default bound on the pairing invariants of an extracted triple.
pub const TRIPLE_TOLERANCE: f64 = 1e-10;

/// `n = F e3`, `f = F e4`, `f^ = F e5` over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceTriple {
    pub n: Field<MinkowskiVector>,
    pub f: Field<MinkowskiVector>,
    pub fhat: Field<MinkowskiVector>,
}

/// Worst pairing errors of a triple, each with its grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingErrors {
    pub n_n: f64,
    pub f_f: f64,
    pub fhat_fhat: f64,
    pub f_n: f64,
    pub fhat_n: f64,
    pub f_fhat: f64,
}

impl PairingErrors {
    pub fn max(&self) -> f64 {
        [self.n_n, self.f_f, self.fhat_fhat, self.f_n, self.fhat_n, self.f_fhat].into_iter().fold(0.0, f64::max)
    }
}

impl SurfaceTriple {
    pub fn grid(&self) -> &Grid {
        self.n.grid()
    }

    /// Columns 3, 4, 5 of every frame, without checks.
    pub fn from_frames(frames: &FrameField) -> Self {
        Self {
            n: frames.frames.map(|g| g.column(3)),
            f: frames.frames.map(|g| g.column(4)),
            fhat: frames.frames.map(|g| g.column(5)),
        }
    }

    pub fn pairing_errors(&self) -> PairingErrors {
        let worst = |a: &Field<MinkowskiVector>, b: &Field<MinkowskiVector>, target: f64| {
            a.values().iter().zip(b.values()).map(|(x, y)| (x.inner(y) - target).abs()).fold(0.0, f64::max)
        };
        PairingErrors {
            n_n: worst(&self.n, &self.n, 1.0),
            f_f: worst(&self.f, &self.f, 0.0),
            fhat_fhat: worst(&self.fhat, &self.fhat, 0.0),
            f_n: worst(&self.f, &self.n, 0.0),
            fhat_n: worst(&self.fhat, &self.n, 0.0),
            f_fhat: worst(&self.f, &self.fhat, 1.0),
        }
    }

    /// Checks every pairing within `tol * max(1, |a| |b|)` (Euclidean norms
    /// of the coefficient vectors), reporting the worst offending point.
    /// Worst violation of the six pairings, each error divided by
    /// `max(1, |a| |b|)`: `(pairing, i, j, error, scaled error)`.
    pub fn worst_pairing(&self) -> (&'static str, usize, usize, f64, f64) {
        let pairs: [(&'static str, &Field<MinkowskiVector>, &Field<MinkowskiVector>, f64); 6] = [
            ("<n,n> = 1", &self.n, &self.n, 1.0),
            ("<f,f> = 0", &self.f, &self.f, 0.0),
            ("<fhat,fhat> = 0", &self.fhat, &self.fhat, 0.0),
            ("<f,n> = 0", &self.f, &self.n, 0.0),
            ("<fhat,n> = 0", &self.fhat, &self.n, 0.0),
            ("<f,fhat> = 1", &self.f, &self.fhat, 1.0),
        ];
        let mut worst = (pairs[0].0, 0, 0, 0.0, -1.0f64);
        for (what, a, b, target) in pairs {
            for ((i, j), x) in a.iter_nodes() {
                let y = b.at(i, j);
                let err = (x.inner(y) - target).abs();
                let rel = err / (x.euclidean_norm() * y.euclidean_norm()).max(1.0);
                // A NaN is kept once seen so that it gets reported.
                if !worst.4.is_nan() && !(rel <= worst.4) {
                    worst = (what, i, j, err, rel);
                }
            }
        }
        worst
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let (what, i, j, value, rel) = self.worst_pairing();
        if !(rel <= tol) {
            return Err(Error::TripleInvariant { what, i, j, value });
        }
        Ok(())
    }
}

/// Reads the triple off the frames and checks its pairings at
/// [`TRIPLE_TOLERANCE`].
pub fn extract_triple(frames: &FrameField) -> Result<SurfaceTriple> {
    let t = SurfaceTriple::from_frames(frames);
    t.check(TRIPLE_TOLERANCE)?;
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeDefect {
    pub f: f64,
    pub fhat: f64,
}

impl EnvelopeDefect {
    pub fn max(&self) -> f64 {
        self.f.max(self.fhat)
    }
}

fn envelope_part(x: &Field<MinkowskiVector>, n: &Field<MinkowskiVector>) -> f64 {
    let (xx, xy) = (x.d_dx(), x.d_dy());
    let mut on = 0.0f64;
    let mut tangent = 0.0f64;
    let g = *x.grid();
    for ((i, j), p) in x.iter_nodes() {
        let ni = n.at(i, j);
        on = on.max(p.inner(ni).abs());
        if g.is_interior(i, j, 1) {
            tangent = tangent.max(xx.at(i, j).inner(ni).abs()).max(xy.at(i, j).inner(ni).abs());
        }
    }
    on + tangent
}

/// `max|<f,n>| + max|<df,n>|` and the same for `f^`; `df` by central
/// differences, so its term covers interior nodes only.
pub fn envelope_defect(triple: &SurfaceTriple) -> EnvelopeDefect {
    EnvelopeDefect { f: envelope_part(&triple.f, &triple.n), fhat: envelope_part(&triple.fhat, &triple.n) }
}

/// Coefficients `(xx, xy, yy)` of a symmetric bilinear form in `dx, dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormCoefficients {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yy: ScalarField,
}

impl FormCoefficients {
    /// `xx dx^2 + yy dy^2`.
    pub fn diagonal(xx: ScalarField, yy: ScalarField) -> Self {
        let zero = ScalarField::constant(*xx.grid(), 0.0);
        Self { xx, xy: zero, yy }
    }

    /// Largest coefficient difference over nodes at least `margin` away from
    /// the boundary.
    pub fn max_difference(&self, other: &Self, margin: usize) -> f64 {
        let d = |a: &ScalarField, b: &ScalarField| a.zip_map(b, |p, q| p - q).interior_max_abs(margin);
        d(&self.xx, &other.xx).max(d(&self.xy, &other.xy)).max(d(&self.yy, &other.yy))
    }
}

/// `I = e^{2u}(dx^2 + dy^2)` and `II = e^{2u}(k1 dx^2 + k2 dy^2)`.
pub fn isothermic_forms(patch: &IsothermicPatch) -> (FormCoefficients, FormCoefficients) {
    let e2u = patch.u.map(|u| (2.0 * u).exp());
    let first = FormCoefficients::diagonal(e2u.clone(), e2u.clone());
    let second = FormCoefficients::diagonal(e2u.zip_map(&patch.k1, |a, k| a * k), e2u.zip_map(&patch.k2, |a, k| a * k));
    (first, second)
}

/// Forms of the Christoffel dual, measured against the normal of the
/// original: `I = e^{-2u}(dx^2 + dy^2)`, `II = -k1 dx^2 + k2 dy^2`.
pub fn dual_forms(patch: &IsothermicPatch) -> (FormCoefficients, FormCoefficients) {
    let e2u = patch.u.map(|u| (-2.0 * u).exp());
    let first = FormCoefficients::diagonal(e2u.clone(), e2u);
    let second = FormCoefficients::diagonal(patch.k1.map(|k| -k), patch.k2.clone());
    (first, second)
}

impl FormCoefficients {
    fn pairing<T>(a: &Field<T>, b: &Field<T>, dot: impl Fn(&T, &T) -> f64) -> Self
    where
        T: crate::grid::Stencil,
    {
        let (ax, ay, bx, by) = (a.d_dx(), a.d_dy(), b.d_dx(), b.d_dy());
        let g = *a.grid();
        Self {
            xx: Field::from_fn(g, |i, j| dot(ax.at(i, j), bx.at(i, j))),
            xy: Field::from_fn(g, |i, j| 0.5 * (dot(ax.at(i, j), by.at(i, j)) + dot(ay.at(i, j), bx.at(i, j)))),
            yy: Field::from_fn(g, |i, j| dot(ay.at(i, j), by.at(i, j))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalityReport {
    /// `max |<f_x,n_y> + <f_y,n_x>| / 2`.
    pub off_diagonal_f: f64,
    pub off_diagonal_fhat: f64,
    /// `<df, dn>`.
    pub second_f: FormCoefficients,
    /// `<df^, dn>`.
    pub second_fhat: FormCoefficients,
    /// `<df, df>`.
    pub metric_f: FormCoefficients,
    /// `<df^, df^>`.
    pub metric_fhat: FormCoefficients,
}

impl DiagonalityReport {
    pub fn max_off_diagonal(&self) -> f64 {
        self.off_diagonal_f.max(self.off_diagonal_fhat)
    }
}

pub fn second_form_diagonality(triple: &SurfaceTriple) -> DiagonalityReport {
    let dot = |a: &MinkowskiVector, b: &MinkowskiVector| a.inner(b);
    let second_f = FormCoefficients::pairing(&triple.f, &triple.n, dot);
    let second_fhat = FormCoefficients::pairing(&triple.fhat, &triple.n, dot);
    DiagonalityReport {
        off_diagonal_f: second_f.xy.max_abs(),
        off_diagonal_fhat: second_fhat.xy.max_abs(),
        metric_f: FormCoefficients::pairing(&triple.f, &triple.f, dot),
        metric_fhat: FormCoefficients::pairing(&triple.fhat, &triple.fhat, dot),
        second_f,
        second_fhat,
    }
}

/// A parametrized surface in Euclidean 3-space with unit normals and
/// finite-difference fundamental forms.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanSurface {
    pub points: Field<Point3>,
    pub normals: Field<Point3>,
    /// `I = E dx^2 + 2F dx dy + G dy^2`.
    pub first: FormCoefficients,
    /// `II = e dx^2 + 2f dx dy + g dy^2` with respect to `normals`.
    pub second: FormCoefficients,
}

impl EuclideanSurface {
    /// Normals `f_x x f_y`, normalized.
    pub fn from_points(points: Field<Point3>) -> Result<Self> {
        Self::build(points, None)
    }

    /// Normals `±(f_x x f_y)`, with the sign chosen pointwise to agree with
    /// `reference`.
    pub fn oriented_like(points: Field<Point3>, reference: &Field<Point3>) -> Result<Self> {
        points.same_shape(reference)?;
        Self::build(points, Some(reference))
    }

    fn build(points: Field<Point3>, reference: Option<&Field<Point3>>) -> Result<Self> {
        let g = *points.grid();
        let (px, py) = (points.d_dx(), points.d_dy());
        let mut normals = Vec::with_capacity(g.len());
        for j in 0..g.ny {
            for i in 0..g.nx {
                let c = px.at(i, j).cross(py.at(i, j));
                let scale = px.at(i, j).norm() * py.at(i, j).norm();
                if !(c.norm() > 1e-12 * scale) {
                    return Err(Error::DegenerateTangents { i, j });
                }
                let mut nrm = c.normalize();
                if reference.is_some_and(|r| nrm.dot(r.at(i, j)) < 0.0) {
                    nrm = -nrm;
                }
                normals.push(nrm);
            }
        }
        let normals = Field::from_vec(g, normals)?;
        let first = FormCoefficients::pairing(&points, &points, |a: &Point3, b: &Point3| a.dot(b));
        let (pxx, pxy, pyy) = (points.d2_dx2(), points.d2_dxdy(), points.d2_dy2());
        let second = FormCoefficients {
            xx: Field::from_fn(g, |i, j| pxx.at(i, j).dot(normals.at(i, j))),
            xy: Field::from_fn(g, |i, j| pxy.at(i, j).dot(normals.at(i, j))),
            yy: Field::from_fn(g, |i, j| pyy.at(i, j).dot(normals.at(i, j))),
        };
        Ok(Self { points, normals, first, second })
    }

    pub fn grid(&self) -> &Grid {
        self.points.grid()
    }

    pub fn point_list(&self) -> Vec<Point3> {
        self.points.values().to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// `h/2 (g_a + g_b)` per edge.
    Trapezoid,
    /// `h/6 (g_a + 4 g_mid + g_b)` per edge, the midpoint integrand taken from
    /// a half-step frame.
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymConfig {
    pub quadrature: Quadrature,
    /// Largest admissible plaquette loop sum divided by the plaquette area.
    pub closedness_threshold: f64,
}

impl Default for SymConfig {
    fn default() -> Self {
        Self { quadrature: Quadrature::Simpson, closedness_threshold: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymSurfaces {
    pub f: EuclideanSurface,
    pub fhat: EuclideanSurface,
    /// Area-normalized loop sums of the integrated differentials.
    pub closedness: f64,
}

pub fn sym_surfaces(patch: &IsothermicPatch, frames_at_zero: &FrameField) -> Result<SymSurfaces> {
    sym_surfaces_with(patch, frames_at_zero, &SymConfig::default())
}

/// Integrates `F0 Φ_p F0^-1`: its `e4` column in the upper block gives `df`,
/// its `e5` column gives `df^`.
pub fn sym_surfaces_with(patch: &IsothermicPatch, frames_at_zero: &FrameField, config: &SymConfig) -> Result<SymSurfaces> {
    patch.u.same_shape(&frames_at_zero.frames)?;
    let g = *patch.grid();
    let phi0 = build_phi_lambda(patch, 0.0);
    let phip = build_phi_lambda(patch, 1.0).p_part();
    let frames = &frames_at_zero.frames;

    // Integrand columns (f, f^) of F Φ_p F^-1 restricted to the upper block.
    let columns = |f: &GroupElement, p: &AlgebraElement| -> (Point3, Point3) {
        let m: Mat5 = f.matrix() * p.matrix() * f.inverse().matrix();
        (
            Point3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]),
            Point3::new(m[(0, 4)], m[(1, 4)], m[(2, 4)]),
        )
    };
    let node_x = Field::from_fn(g, |i, j| columns(frames.at(i, j), phip.ax.at(i, j)));
    let node_y = Field::from_fn(g, |i, j| columns(frames.at(i, j), phip.ay.at(i, j)));

    let edge = |a: (usize, usize), b: (usize, usize), along_x: bool| -> (Point3, Point3) {
        let (h, nodes, k_form, p_form) = if along_x {
            (g.hx, &node_x, &phi0.ax, &phip.ax)
        } else {
            (g.hy, &node_y, &phi0.ay, &phip.ay)
        };
        let (ga, gb) = (nodes.at(a.0, a.1), nodes.at(b.0, b.1));
        match config.quadrature {
            Quadrature::Trapezoid => ((ga.0 + gb.0) * (0.5 * h), (ga.1 + gb.1) * (0.5 * h)),
            Quadrature::Simpson => {
                let (ka, kb) = (k_form.at(a.0, a.1), k_form.at(b.0, b.1));
                let quarter = (*ka * 3.0 + *kb) * (0.25 * 0.5 * h);
                let fm = frames.at(a.0, a.1) * &group_exp(&quarter);
                let pm = (*p_form.at(a.0, a.1) + *p_form.at(b.0, b.1)) * 0.5;
                let gm = columns(&fm, &pm);
                (
                    (ga.0 + gm.0 * 4.0 + gb.0) * (h / 6.0),
                    (ga.1 + gm.1 * 4.0 + gb.1) * (h / 6.0),
                )
            }
        }
    };

    let ex = Field::from_fn(Grid { nx: g.nx - 1, ..g }, |i, j| edge((i, j), (i + 1, j), true));
    let ey = Field::from_fn(Grid { ny: g.ny - 1, ..g }, |i, j| edge((i, j), (i, j + 1), false));
    let (pf, pfh) = integrate_edges(g, &ex, &ey)?;
    let closedness = loop_defect(g, &ex, &ey);
    if !(closedness <= config.closedness_threshold) {
        return Err(Error::NotClosed { value: closedness, threshold: config.closedness_threshold });
    }
    let f = EuclideanSurface::from_points(pf)?;
    let fhat = EuclideanSurface::oriented_like(pfh, &f.normals)?;
    Ok(SymSurfaces { f, fhat, closedness })
}

/// Sums edge increments from the origin along row 0, then up each column.
fn integrate_edges(
    g: Grid,
    ex: &Field<(Point3, Point3)>,
    ey: &Field<(Point3, Point3)>,
) -> Result<(Field<Point3>, Field<Point3>)> {
    let mut a = vec![Point3::zeros(); g.len()];
    let mut b = vec![Point3::zeros(); g.len()];
    for i in 1..g.nx {
        let e = ex.at(i - 1, 0);
        a[i] = a[i - 1] + e.0;
        b[i] = b[i - 1] + e.1;
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let e = ey.at(i, j - 1);
            a[g.index(i, j)] = a[g.index(i, j - 1)] + e.0;
            b[g.index(i, j)] = b[g.index(i, j - 1)] + e.1;
        }
    }
    Ok((Field::from_vec(g, a)?, Field::from_vec(g, b)?))
}

fn loop_defect(g: Grid, ex: &Field<(Point3, Point3)>, ey: &Field<(Point3, Point3)>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let (b, r, t, l) = (ex.at(i, j), ey.at(i + 1, j), ex.at(i, j + 1), ey.at(i, j));
            let s0 = b.0 + r.0 - t.0 - l.0;
            let s1 = b.1 + r.1 - t.1 - l.1;
            worst = worst.max(s0.amax()).max(s1.amax());
        }
    }
    worst / (g.hx * g.hy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualConfig {
    pub closedness_threshold: f64,
    /// Largest admissible relative mismatch between the measured metric and
    /// `e^{2u}(dx^2 + dy^2)`.
    pub metric_tolerance: f64,
}

impl Default for DualConfig {
    fn default() -> Self {
        Self { closedness_threshold: 0.1, metric_tolerance: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSurface {
    pub surface: EuclideanSurface,
    pub closedness: f64,
    pub metric_mismatch: f64,
}

pub fn euclidean_dual(surface: &EuclideanSurface, u: &ScalarField) -> Result<DualSurface> {
    euclidean_dual_with(surface, u, &DualConfig::default())
}

/// Integrates `df^ = e^{-2u}(-f_x dx + f_y dy)` edge by edge: an `x`-edge
/// contributes `-(f_b - f_a) e^{-u_a - u_b}`, a `y`-edge
/// `(f_b - f_a) e^{-u_a - u_b}`. Applying the map twice returns the input up
/// to translation.
pub fn euclidean_dual_with(surface: &EuclideanSurface, u: &ScalarField, config: &DualConfig) -> Result<DualSurface> {
    surface.points.same_shape(u)?;
    let g = *surface.grid();
    let mut mismatch = (0.0f64, 0usize, 0usize);
    for ((i, j), uv) in u.iter_nodes() {
        let e2u = (2.0 * uv).exp();
        let worst = (surface.first.xx.at(i, j) - e2u)
            .abs()
            .max((surface.first.yy.at(i, j) - e2u).abs())
            .max(surface.first.xy.at(i, j).abs())
            / e2u;
        if worst > mismatch.0 {
            mismatch = (worst, i, j);
        }
    }
    if !(mismatch.0 <= config.metric_tolerance) {
        return Err(Error::MetricMismatch { i: mismatch.1, j: mismatch.2, value: mismatch.0 });
    }
    let p = &surface.points;
    let w = |a: (usize, usize), b: (usize, usize)| (-u.at(a.0, a.1) - u.at(b.0, b.1)).exp();
    let ex = Field::from_fn(Grid { nx: g.nx - 1, ..g }, |i, j| {
        let d = (p.at(i, j) - p.at(i + 1, j)) * w((i, j), (i + 1, j));
        (d, d)
    });
    let ey = Field::from_fn(Grid { ny: g.ny - 1, ..g }, |i, j| {
        let d = (p.at(i, j + 1) - p.at(i, j)) * w((i, j), (i, j + 1));
        (d, d)
    });
    let (points, _) = integrate_edges(g, &ex, &ey)?;
    let closedness = loop_defect(g, &ex, &ey);
    if !(closedness <= config.closedness_threshold) {
        return Err(Error::NotClosed { value: closedness, threshold: config.closedness_threshold });
    }
    Ok(DualSurface {
        surface: EuclideanSurface::oriented_like(points, &surface.normals)?,
        closedness,
        metric_mismatch: mismatch.0,
    })
}

/// `sin` and `cos` that are exact at integer multiples of `π/2`.
fn sin_cos_snapped(t: f64) -> (f64, f64) {
    let q = t / std::f64::consts::FRAC_PI_2;
    let r = q.round();
    if (q - r).abs() <= 1e-12 {
        match (r as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        t.sin_cos()
    }
}

/// `f_t = sin t / √2 · n + (1 + cos t)/2 · f - (1 - cos t)/2 · f^`, the
/// circle through `f` and `f^` meeting the sphere `n` orthogonally.
pub fn circle_congruence_point(triple: &SurfaceTriple, t: f64) -> Field<MinkowskiVector> {
    let (s, c) = sin_cos_snapped(t);
    let (a, b, d) = (s * std::f64::consts::FRAC_1_SQRT_2, 0.5 * (1.0 + c), 0.5 * (1.0 - c));
    let g = *triple.grid();
    Field::from_fn(g, |i, j| {
        *triple.n.at(i, j) * a + *triple.f.at(i, j) * b - *triple.fhat.at(i, j) * d
    })
}

/// Default lower bound on `|<v, inf>|` for chart projection.
pub const CHART_CUTOFF: f64 = 1e-8;

/// Affine chart of the projective light cone with a given point at
/// infinity `q`: `v -> v / <v, q>`, then coordinates in an orthonormal basis
/// of the complement of `{o, q}`, where `o` is a light-like origin with
/// `<o, q> = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineChart {
    pub infinity: MinkowskiVector,
    pub origin: MinkowskiVector,
    pub basis: [MinkowskiVector; 3],
    pub cutoff: f64,
}

impl AffineChart {
    pub fn new(infinity: MinkowskiVector) -> Result<Self> {
        let q = infinity;
        let scale = q.euclidean_norm();
        if !(scale > 0.0) || q.norm_sq().abs() > 1e-10 * scale * scale {
            return Err(Error::NotLightLike(q.norm_sq()));
        }
        let e4 = MinkowskiVector::basis(4);
        let w = if e4.inner(&q).abs() >= 1e-3 * scale {
            e4
        } else {
            (1..=5)
                .map(MinkowskiVector::basis)
                .max_by(|a, b| a.inner(&q).abs().total_cmp(&b.inner(&q).abs()))
                .unwrap_or(e4)
        };
        let c = w.inner(&q);
        let origin = w * (1.0 / c) - q * (w.norm_sq() / (2.0 * c * c));
        let mut basis: Vec<MinkowskiVector> = Vec::with_capacity(3);
        for k in 1..=5 {
            let v = MinkowskiVector::basis(k);
            let mut p = v - origin * v.inner(&q) - q * v.inner(&origin);
            for b in &basis {
                p = p - *b * p.inner(b);
            }
            let n2 = p.norm_sq();
            if n2 > 1e-10 {
                basis.push(p * (1.0 / n2.sqrt()));
            }
            if basis.len() == 3 {
                break;
            }
        }
        Ok(Self { infinity: q, origin, basis: [basis[0], basis[1], basis[2]], cutoff: CHART_CUTOFF })
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    /// Chart coordinates of one light-cone point; `None` at infinity.
    pub fn coordinates(&self, v: &MinkowskiVector) -> Option<Point3> {
        let s = v.inner(&self.infinity);
        if !(s.abs() >= self.cutoff) {
            return None;
        }
        let w = *v * (1.0 / s);
        Some(Point3::new(w.inner(&self.basis[0]), w.inner(&self.basis[1]), w.inner(&self.basis[2])))
    }

    pub fn project(&self, field: &Field<MinkowskiVector>) -> Result<Field<Point3>> {
        let g = *field.grid();
        let mut out = Vec::with_capacity(g.len());
        for ((i, j), v) in field.iter_nodes() {
            match self.coordinates(v) {
                Some(p) => out.push(p),
                None => return Err(Error::ChartSingularity { i, j, value: v.inner(&self.infinity) }),
            }
        }
        Field::from_vec(g, out)
    }
}

pub fn project_to_affine_chart(field: &Field<MinkowskiVector>, infinity: &MinkowskiVector) -> Result<Field<Point3>> {
    AffineChart::new(*infinity)?.project(field)
}

/// The null vector `(p, 1, -|p|^2/2)` representing the point `p`.
pub fn light_cone_lift(p: &Point3) -> MinkowskiVector {
    MinkowskiVector::new([p.x, p.y, p.z, 1.0, -0.5 * p.norm_squared()])
}

/// `<a,b><c,d> / (<a,c><b,d>)`, invariant under Möbius transformations and
/// under rescaling each argument.
pub fn cross_ratio(a: &MinkowskiVector, b: &MinkowskiVector, c: &MinkowskiVector, d: &MinkowskiVector) -> f64 {
    a.inner(b) * c.inner(d) / (a.inner(c) * b.inner(d))
}

/// Nodes at fixed fractions of the index ranges, used as sample points for
/// cross-ratio comparisons; none lies on the last row or column.
pub fn cross_ratio_nodes(grid: &Grid) -> Vec<(usize, usize)> {
    const FRACTIONS: [(f64, f64); 6] = [(0.1, 0.2), (0.8, 0.1), (0.5, 0.5), (0.2, 0.7), (0.9, 0.6), (0.4, 0.9)];
    let at = |t: f64, n: usize| ((t * (n - 1) as f64).round() as usize).min(n - 2);
    FRACTIONS.iter().map(|&(s, t)| (at(s, grid.nx), at(t, grid.ny))).collect()
}

/// Largest difference of cross ratios of the two fields over all ordered
/// quadruples of distinct `nodes`, each relative to `max(1, |cr_b|)`.
/// Zero exactly when the fields agree up to a Möbius transformation and
/// pointwise rescaling, as far as these samples can tell.
pub fn cross_ratio_mismatch(a: &Field<MinkowskiVector>, b: &Field<MinkowskiVector>, nodes: &[(usize, usize)]) -> Result<f64> {
    a.same_shape(b)?;
    let mut worst = 0.0f64;
    let n = nodes.len();
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    if p == q || p == r || p == s || q == r || q == s || r == s {
                        continue;
                    }
                    let cr = |f: &Field<MinkowskiVector>| {
                        let v = |k: usize| f.at(nodes[k].0, nodes[k].1);
                        cross_ratio(v(p), v(q), v(r), v(s))
                    };
                    let (x, y) = (cr(a), cr(b));
                    let d = (x - y).abs() / y.abs().max(1.0);
                    worst = if d.is_nan() || worst.is_nan() { f64::NAN } else { worst.max(d) };
                }
            }
        }
    }
    Ok(worst)
}

/// RMS distance between the chart images of two light-like fields after the
/// best similarity alignment of the first onto the second.
pub fn projected_distance(a: &Field<MinkowskiVector>, b: &Field<MinkowskiVector>, infinity: &MinkowskiVector) -> Result<f64> {
    a.same_shape(b)?;
    let chart = AffineChart::new(*infinity)?;
    let (pa, pb) = (chart.project(a)?, chart.project(b)?);
    Ok(align(pa.values(), pb.values(), AlignOptions::similarity())?.rms)
}

//! Isothermic surface data `(u, k1, k2)` on a coordinate grid.
//!
//! A patch describes a surface with fundamental forms
//! `I = e^{2u}(dx^2 + dy^2)` and `II = e^{2u}(k1 dx^2 + k2 dy^2)`; the second
//! form is measured against the normal `f_x x f_y / |f_x x f_y|`.

mod meridian;

pub use meridian::{conformal_factor_k, revolution_patch, solve_meridian, MeridianCurve, Profile, TurningAngle};

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

#[derive(Debug, Clone, PartialEq)]
pub struct IsothermicPatch {
    pub u: ScalarField,
    pub k1: ScalarField,
    pub k2: ScalarField,
}

impl IsothermicPatch {
    pub fn new(u: ScalarField, k1: ScalarField, k2: ScalarField) -> Result<Self> {
        u.grid().validate()?;
        u.same_shape(&k1)?;
        u.same_shape(&k2)?;
        u.check_finite("u")?;
        k1.check_finite("k1")?;
        k2.check_finite("k2")?;
        Ok(Self { u, k1, k2 })
    }

    /// Patch from closed-form data.
    pub fn from_fns(
        grid: Grid,
        u: impl Fn(f64, f64) -> f64,
        k1: impl Fn(f64, f64) -> f64,
        k2: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        Self::new(ScalarField::sample(grid, u), ScalarField::sample(grid, k1), ScalarField::sample(grid, k2))
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    /// Exchanges the roles of `x` and `y` (transposes the grid and swaps
    /// `k1` with `k2`). The result describes the same surface.
    pub fn transposed(&self) -> Self {
        let g = *self.grid();
        let tg = Grid { nx: g.ny, ny: g.nx, hx: g.hy, hy: g.hx, x0: g.y0, y0: g.x0 };
        let t = |f: &ScalarField| ScalarField::from_fn(tg, |i, j| *f.at(j, i));
        Self { u: t(&self.u), k1: t(&self.k2), k2: t(&self.k1) }
    }
}

/// Residuals of the Gauss equation and the two Codazzi equations.
#[derive(Debug, Clone)]
pub struct GaussCodazziResidual {
    /// `Δu + e^{2u} k1 k2`
    pub gauss: ScalarField,
    /// `k1_y + (k1 - k2) u_y`
    pub codazzi_x: ScalarField,
    /// `k2_x - (k1 - k2) u_x`
    pub codazzi_y: ScalarField,
}

impl GaussCodazziResidual {
    pub fn max_abs(&self) -> f64 {
        self.gauss.max_abs().max(self.codazzi_x.max_abs()).max(self.codazzi_y.max_abs())
    }

    pub fn interior_max_abs(&self, margin: usize) -> f64 {
        self.gauss
            .interior_max_abs(margin)
            .max(self.codazzi_x.interior_max_abs(margin))
            .max(self.codazzi_y.interior_max_abs(margin))
    }
}

pub fn gauss_codazzi_residual(patch: &IsothermicPatch) -> GaussCodazziResidual {
    let IsothermicPatch { u, k1, k2 } = patch;
    let (ux, uy) = (u.d_dx(), u.d_dy());
    let lap = u.laplacian();
    let g = *u.grid();
    let gauss = ScalarField::from_fn(g, |i, j| lap.at(i, j) + (2.0 * u.at(i, j)).exp() * k1.at(i, j) * k2.at(i, j));
    let k1y = k1.d_dy();
    let k2x = k2.d_dx();
    let codazzi_x = ScalarField::from_fn(g, |i, j| k1y.at(i, j) + (k1.at(i, j) - k2.at(i, j)) * uy.at(i, j));
    let codazzi_y = ScalarField::from_fn(g, |i, j| k2x.at(i, j) - (k1.at(i, j) - k2.at(i, j)) * ux.at(i, j));
    GaussCodazziResidual { gauss, codazzi_x, codazzi_y }
}

/// Circular cylinder of the given radius in the coordinates
/// `x = angle`, `y = height / radius`.
pub fn make_cylinder_patch(radius: f64, grid: Grid) -> Result<IsothermicPatch> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter { name: "radius", reason: format!("must be positive, got {radius}") });
    }
    IsothermicPatch::new(
        ScalarField::constant(grid, radius.ln()),
        ScalarField::constant(grid, 1.0 / radius),
        ScalarField::constant(grid, 0.0),
    )
}

pub fn make_plane_patch(grid: Grid) -> Result<IsothermicPatch> {
    IsothermicPatch::new(
        ScalarField::constant(grid, 0.0),
        ScalarField::constant(grid, 0.0),
        ScalarField::constant(grid, 0.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::spanning(17, 13, (0.0, 2.0), (-1.0, 1.0)).unwrap()
    }

    #[test]
    fn plane_and_cylinder_satisfy_gauss_codazzi() {
        assert_eq!(gauss_codazzi_residual(&make_plane_patch(grid()).unwrap()).max_abs(), 0.0);
        let cyl = make_cylinder_patch(1.0, grid()).unwrap();
        assert_eq!(cyl.u.max_abs(), 0.0);
        assert_eq!(*cyl.k1.at(3, 4), 1.0);
        assert_eq!(cyl.k2.max_abs(), 0.0);
        assert_eq!(gauss_codazzi_residual(&cyl).max_abs(), 0.0);
    }

    #[test]
    fn cylinder_of_radius_two() {
        let cyl = make_cylinder_patch(2.0, grid()).unwrap();
        assert_eq!(*cyl.u.at(0, 0), 2f64.ln());
        assert_eq!(*cyl.k1.at(5, 5), 0.5);
        assert!(gauss_codazzi_residual(&cyl).max_abs() < 1e-13);
        assert!(make_cylinder_patch(0.0, grid()).is_err());
        assert!(make_cylinder_patch(-1.0, grid()).is_err());
    }

    #[test]
    fn sphere_like_data_fails_gauss() {
        let p = IsothermicPatch::from_fns(grid(), |_, _| 0.0, |_, _| 1.0, |_, _| 1.0).unwrap();
        let r = gauss_codazzi_residual(&p);
        for (_, v) in r.gauss.iter_nodes() {
            assert_eq!(*v, 1.0);
        }
        assert_eq!(r.codazzi_x.max_abs(), 0.0);
        assert_eq!(r.codazzi_y.max_abs(), 0.0);
    }

    #[test]
    fn residual_is_translation_invariant() {
        // Same data shifted by whole grid cells gives the same residual on
        // the overlap.
        let g = grid();
        let f = |x: f64, y: f64| 0.1 * (x + 0.3 * y).sin();
        let p = IsothermicPatch::from_fns(g, f, |x, y| 0.2 * x * y, |x, _| x.cos()).unwrap();
        let shifted = Grid { x0: g.x0 + 2.0 * g.hx, y0: g.y0 + 3.0 * g.hy, ..g };
        let q = IsothermicPatch::from_fns(shifted, f, |x, y| 0.2 * x * y, |x, _| x.cos()).unwrap();
        let (rp, rq) = (gauss_codazzi_residual(&p), gauss_codazzi_residual(&q));
        for j in 2..g.ny - 5 {
            for i in 2..g.nx - 4 {
                assert!((rp.gauss.at(i + 2, j + 3) - rq.gauss.at(i, j)).abs() < 1e-12);
                assert!((rp.codazzi_y.at(i + 2, j + 3) - rq.codazzi_y.at(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_finite_fields() {
        let g = grid();
        let bad = ScalarField::from_fn(g, |i, _| if i == 3 { f64::NAN } else { 0.0 });
        let err = IsothermicPatch::new(ScalarField::constant(g, 0.0), bad, ScalarField::constant(g, 0.0));
        assert!(matches!(err, Err(Error::NonFinite { i: 3, .. })));
    }

    #[test]
    fn transposing_swaps_curvatures() {
        let cyl = make_cylinder_patch(1.0, grid()).unwrap().transposed();
        assert_eq!(cyl.k1.max_abs(), 0.0);
        assert_eq!(*cyl.k2.at(0, 0), 1.0);
        assert_eq!(cyl.grid().nx, 13);
    }
}

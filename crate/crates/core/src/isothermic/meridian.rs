//! Surfaces of revolution `f(x, y) = (r cos y, r sin y, z)` whose meridian
//! `(r, z)` is parametrized by hyperbolic arc length, `r^2 = r'^2 + z'^2`.
//!
//! The meridian is generated from its turning angle `θ(x)`:
//! `r' = r cos θ`, `z' = r sin θ`, which makes the arc-length constraint hold
//! identically.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, ScalarField};

use super::IsothermicPatch;

/// Turning angle of a meridian as an analytic function of `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TurningAngle {
    Constant { value: f64 },
    /// `base + amplitude * sin(frequency * x + phase)`
    Sine {
        base: f64,
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl TurningAngle {
    /// `θ ≡ π/2`: the meridian of a circular cylinder.
    pub fn cylinder() -> Self {
        Self::Constant { value: std::f64::consts::FRAC_PI_2 }
    }

    /// Returns `(θ, θ', θ'')` at `x`.
    pub fn jet(&self, x: f64) -> (f64, f64, f64) {
        match *self {
            Self::Constant { value } => (value, 0.0, 0.0),
            Self::Sine { base, amplitude, frequency, phase } => {
                let (s, c) = (frequency * x + phase).sin_cos();
                (
                    base + amplitude * s,
                    amplitude * frequency * c,
                    -amplitude * frequency * frequency * s,
                )
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(x).0
    }
}

/// Samples of a function of `x` alone on the nodes `x0 + i*hx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub x0: f64,
    pub hx: f64,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    /// Extends the profile constantly in `y`.
    pub fn to_field(&self, grid: Grid) -> Result<ScalarField> {
        check_alignment(self.x0, self.hx, self.values.len(), &grid)?;
        Ok(ScalarField::from_fn(grid, |i, _| self.values[i]))
    }
}

fn check_alignment(x0: f64, hx: f64, n: usize, grid: &Grid) -> Result<()> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
    if grid.nx != n || !close(grid.x0, x0) || !close(grid.hx, hx) {
        return Err(Error::InvalidGrid(format!(
            "grid x-nodes (nx={}, x0={}, hx={}) do not match the meridian samples (n={n}, x0={x0}, hx={hx})",
            grid.nx, grid.x0, grid.hx
        )));
    }
    Ok(())
}

/// Meridian samples `r, z` and their first two derivatives at grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct MeridianCurve {
    pub x0: f64,
    pub hx: f64,
    pub theta: TurningAngle,
    pub r: Vec<f64>,
    pub dr: Vec<f64>,
    pub ddr: Vec<f64>,
    pub z: Vec<f64>,
    pub dz: Vec<f64>,
    pub ddz: Vec<f64>,
    /// Spectral/integration constant suggested for downstream constructions.
    pub lambda_hint: f64,
}

impl MeridianCurve {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    /// `max |r^2 - r'^2 - z'^2| / r^2` over the samples.
    pub fn constraint_residual(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let r2 = self.r[i] * self.r[i];
                (r2 - self.dr[i] * self.dr[i] - self.dz[i] * self.dz[i]).abs() / r2
            })
            .fold(0.0, f64::max)
    }

    /// Points of the surface of revolution; `y` is the rotation angle.
    pub fn embedding(&self, grid: Grid) -> Result<Field<Vector3<f64>>> {
        check_alignment(self.x0, self.hx, self.len(), &grid)?;
        Ok(Field::from_fn(grid, |i, j| {
            let (s, c) = grid.y(j).sin_cos();
            Vector3::new(self.r[i] * c, self.r[i] * s, self.z[i])
        }))
    }

    /// The same curve scaled by `c > 0`; still arc-length parametrized.
    pub fn scaled(&self, c: f64) -> Self {
        let s = |v: &Vec<f64>| v.iter().map(|a| a * c).collect();
        Self {
            r: s(&self.r),
            dr: s(&self.dr),
            ddr: s(&self.ddr),
            z: s(&self.z),
            dz: s(&self.dz),
            ddz: s(&self.ddz),
            ..self.clone()
        }
    }
}

const MAX_SUBSTEPS: usize = 1 << 12;
const SUBSTEP_TOL: f64 = 1e-13;

fn rhs(theta: &TurningAngle, x: f64, r: f64) -> (f64, f64) {
    let (s, c) = theta.value(x).sin_cos();
    (r * c, r * s)
}

/// Classical RK4 over `[x, x + h]` in `m` equal substeps.
fn rk4(theta: &TurningAngle, x: f64, h: f64, (mut r, mut z): (f64, f64), m: usize) -> (f64, f64) {
    let dt = h / m as f64;
    for k in 0..m {
        let t = x + k as f64 * dt;
        let (a1, b1) = rhs(theta, t, r);
        let (a2, b2) = rhs(theta, t + 0.5 * dt, r + 0.5 * dt * a1);
        let (a3, b3) = rhs(theta, t + 0.5 * dt, r + 0.5 * dt * a2);
        let (a4, b4) = rhs(theta, t + dt, r + dt * a3);
        r += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        z += dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    }
    (r, z)
}

/// Integrates the meridian ODE from `(r_init, 0)` at `x0` over `nx` nodes.
///
/// Each grid interval is subdivided until halving the substep changes the
/// result by less than `1e-13` relative; intervals that need more than 4096
/// substeps are rejected.
pub fn solve_meridian(theta: TurningAngle, r_init: f64, x0: f64, hx: f64, nx: usize) -> Result<MeridianCurve> {
    if !(r_init > 0.0 && r_init.is_finite()) {
        return Err(Error::InvalidParameter { name: "r_init", reason: format!("must be positive, got {r_init}") });
    }
    if !(hx > 0.0) || nx < 2 {
        return Err(Error::InvalidParameter { name: "hx", reason: "need hx > 0 and at least two nodes".into() });
    }
    let mut r = Vec::with_capacity(nx);
    let mut z = Vec::with_capacity(nx);
    let mut state = (r_init, 0.0);
    r.push(state.0);
    z.push(state.1);
    let mut m = 4;
    for i in 0..nx - 1 {
        let x = x0 + i as f64 * hx;
        loop {
            let coarse = rk4(&theta, x, hx, state, m);
            let fine = rk4(&theta, x, hx, state, 2 * m);
            let scale = fine.0.abs().max(fine.1.abs()).max(1.0);
            if (coarse.0 - fine.0).abs().max((coarse.1 - fine.1).abs()) <= SUBSTEP_TOL * scale {
                state = fine;
                break;
            }
            m *= 2;
            if m > MAX_SUBSTEPS {
                return Err(Error::MeridianStepSize { x });
            }
        }
        if !(state.0 > 0.0 && state.0.is_finite()) {
            return Err(Error::MeridianStepSize { x });
        }
        r.push(state.0);
        z.push(state.1);
    }

    let mut curve = MeridianCurve {
        x0,
        hx,
        theta,
        dr: vec![0.0; nx],
        ddr: vec![0.0; nx],
        dz: vec![0.0; nx],
        ddz: vec![0.0; nx],
        r,
        z,
        lambda_hint: 1.0,
    };
    for i in 0..nx {
        let (t, dt, _) = theta.jet(curve.x(i));
        let (s, c) = t.sin_cos();
        let ri = curve.r[i];
        let (dr, dz) = (ri * c, ri * s);
        curve.dr[i] = dr;
        curve.dz[i] = dz;
        curve.ddr[i] = dr * c - ri * s * dt;
        curve.ddz[i] = dr * s + ri * c * dt;
    }
    if curve.constraint_residual() > 1e-10 {
        return Err(Error::MeridianStepSize { x: x0 });
    }
    Ok(curve)
}

/// `k = (r z' - r' z'' + r'' z') / (2 r^2)`, the conformal factor of the
/// central sphere congruence of the surface of revolution.
pub fn conformal_factor_k(meridian: &MeridianCurve) -> Profile {
    let values = (0..meridian.len())
        .map(|i| {
            let (r, dr, ddr, dz, ddz) =
                (meridian.r[i], meridian.dr[i], meridian.ddr[i], meridian.dz[i], meridian.ddz[i]);
            (r * dz - dr * ddz + ddr * dz) / (2.0 * r * r)
        })
        .collect();
    Profile { x0: meridian.x0, hx: meridian.hx, values }
}

/// Isothermic data of the surface of revolution with `y` the rotation angle:
/// `u = ln r`, `k1 = (r' z'' - r'' z') / r^3`, `k2 = z' / r^2`.
pub fn revolution_patch(meridian: &MeridianCurve, grid: Grid) -> Result<IsothermicPatch> {
    check_alignment(meridian.x0, meridian.hx, meridian.len(), &grid)?;
    let m = meridian;
    let u = ScalarField::from_fn(grid, |i, _| m.r[i].ln());
    let k1 = ScalarField::from_fn(grid, |i, _| (m.dr[i] * m.ddz[i] - m.ddr[i] * m.dz[i]) / m.r[i].powi(3));
    let k2 = ScalarField::from_fn(grid, |i, _| m.dz[i] / (m.r[i] * m.r[i]));
    IsothermicPatch::new(u, k1, k2)
}

//! Uniform coordinate grids, fields over them and finite differences.
//!
//! Values are stored row-major with `x` varying fastest: the node `(i, j)`
//! sits at `(x0 + i*hx, y0 + j*hy)` and has flat index `j*nx + i`.
//!
//! Derivatives use second-order central stencils in the interior and
//! second-order one-sided stencils on the boundary, so every node gets a
//! value.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest grid size; the one-sided second-derivative stencil spans four
/// nodes and the nested operators of the Calapso residual need two rings.
pub const MIN_NODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub y0: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, hx: f64, hy: f64, x0: f64, y0: f64) -> Result<Self> {
        let g = Self { nx, ny, hx, hy, x0, y0 };
        g.validate()?;
        Ok(g)
    }

    /// Grid with `nx x ny` nodes spanning `[x0, x1] x [y0, y1]`.
    pub fn spanning(nx: usize, ny: usize, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes per axis, got {nx}x{ny}")));
        }
        Self::new(nx, ny, (x1 - x0) / (nx - 1) as f64, (y1 - y0) / (ny - 1) as f64, x0, y0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < MIN_NODES || self.ny < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "grid must have at least {MIN_NODES}x{MIN_NODES} nodes, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.hx > 0.0 && self.hy > 0.0 && self.hx.is_finite() && self.hy.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacings must be positive, got hx={}, hy={}", self.hx, self.hy)));
        }
        if !(self.x0.is_finite() && self.y0.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy
    }

    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x(i), self.y(j))
    }

    /// The same domain sampled with twice the resolution.
    pub fn refined(&self) -> Self {
        Self {
            nx: 2 * self.nx - 1,
            ny: 2 * self.ny - 1,
            hx: self.hx / 2.0,
            hy: self.hy / 2.0,
            ..*self
        }
    }

    /// Iterates `(i, j)` in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nx = self.nx;
        (0..self.ny).flat_map(move |j| (0..nx).map(move |i| (i, j)))
    }

    /// True when `(i, j)` is at least `margin` nodes away from every edge.
    pub fn is_interior(&self, i: usize, j: usize, margin: usize) -> bool {
        i >= margin && j >= margin && i + margin < self.nx && j + margin < self.ny
    }
}

/// A value of type `T` at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    data: Vec<T>,
}

pub type ScalarField = Field<f64>;

impl<T> Field<T> {
    pub fn from_vec(grid: Grid, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), found: data.len() });
        }
        Ok(Self { grid, data })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let data = grid.nodes().map(|(i, j)| f(i, j)).collect();
        Self { grid, data }
    }

    /// Samples a function of the coordinates `(x, y)`.
    pub fn sample(grid: Grid, mut f: impl FnMut(f64, f64) -> T) -> Self {
        Self::from_fn(grid, |i, j| f(grid.x(i), grid.y(j)))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<T> {
        self.data
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[self.grid.index(i, j)]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        let k = self.grid.index(i, j);
        &mut self.data[k]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Field<U> {
        Field { grid: self.grid, data: self.data.iter().map(f).collect() }
    }

    pub fn zip_map<U, V>(&self, other: &Field<U>, mut f: impl FnMut(&T, &U) -> V) -> Field<V> {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Field {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn iter_nodes(&self) -> impl Iterator<Item = ((usize, usize), &T)> + '_ {
        self.grid.nodes().zip(self.data.iter())
    }

    pub fn same_shape<U>(&self, other: &Field<U>) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch { expected: self.grid.len(), found: other.grid.len() });
        }
        Ok(())
    }
}

impl ScalarField {
    pub fn constant(grid: Grid, value: f64) -> Self {
        Self::from_fn(grid, |_, _| value)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max-abs over nodes at least `margin` away from the boundary.
    pub fn interior_max_abs(&self, margin: usize) -> f64 {
        self.iter_nodes()
            .filter(|((i, j), _)| self.grid.is_interior(*i, *j, margin))
            .fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    pub fn check_finite(&self, name: &str) -> Result<()> {
        for ((i, j), v) in self.iter_nodes() {
            if !v.is_finite() {
                return Err(Error::NonFinite { field: name.to_string(), i, j });
            }
        }
        Ok(())
    }
}

/// Values that finite-difference stencils can combine.
pub trait Stencil: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl<T> Stencil for T where T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

/// First derivative along a line of `n >= 3` samples with spacing `h`.
fn d1<T: Stencil>(get: impl Fn(usize) -> T, n: usize, k: usize, h: f64) -> T {
    let s = 0.5 / h;
    if k == 0 {
        (get(1) * 4.0 - get(0) * 3.0 - get(2)) * s
    } else if k == n - 1 {
        (get(n - 1) * 3.0 - get(n - 2) * 4.0 + get(n - 3)) * s
    } else {
        (get(k + 1) - get(k - 1)) * s
    }
}

/// Second derivative along a line of `n >= 4` samples.
fn d2<T: Stencil>(get: impl Fn(usize) -> T, n: usize, k: usize, h: f64) -> T {
    let s = 1.0 / (h * h);
    if k == 0 {
        (get(0) * 2.0 - get(1) * 5.0 + get(2) * 4.0 - get(3)) * s
    } else if k == n - 1 {
        (get(n - 1) * 2.0 - get(n - 2) * 5.0 + get(n - 3) * 4.0 - get(n - 4)) * s
    } else {
        (get(k + 1) - get(k) * 2.0 + get(k - 1)) * s
    }
}

impl<T: Stencil> Field<T> {
    pub fn d_dx(&self) -> Self {
        let g = self.grid;
        Self::from_fn(g, |i, j| d1(|k| *self.at(k, j), g.nx, i, g.hx))
    }

    pub fn d_dy(&self) -> Self {
        let g = self.grid;
        Self::from_fn(g, |i, j| d1(|k| *self.at(i, k), g.ny, j, g.hy))
    }

    pub fn d2_dx2(&self) -> Self {
        let g = self.grid;
        Self::from_fn(g, |i, j| d2(|k| *self.at(k, j), g.nx, i, g.hx))
    }

    pub fn d2_dy2(&self) -> Self {
        let g = self.grid;
        Self::from_fn(g, |i, j| d2(|k| *self.at(i, k), g.ny, j, g.hy))
    }

    /// Mixed derivative `D_y D_x`; the cross stencil on interior nodes.
    pub fn d2_dxdy(&self) -> Self {
        self.d_dx().d_dy()
    }

    pub fn laplacian(&self) -> Self {
        self.d2_dx2().zip_map(&self.d2_dy2(), |a, b| *a + *b)
    }
}

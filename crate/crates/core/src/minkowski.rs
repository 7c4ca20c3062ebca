//! Linear algebra of Minkowski 5-space in the light-cone basis.
//!
//! All matrices are written in the basis `e1..e5` whose Gram matrix is
//!
//! ```text
//!        | I3  0      |
//!   E5 = |     0  1   |
//!        | 0   1  0   |
//! ```
//!
//! so `e1, e2, e3` are space-like unit vectors and `e4, e5` a pair of
//! light-like vectors with `<e4, e5> = 1`. The group `O1(5)` is
//! `{A | A^t E5 A = E5}` and its Lie algebra is `{X | E5 X + (E5 X)^t = 0}`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix5, Vector5};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat5 = Matrix5<f64>;

/// Gram matrix of the light-cone basis.
pub fn gram() -> Mat5 {
    let mut e = Mat5::zeros();
    e[(0, 0)] = 1.0;
    e[(1, 1)] = 1.0;
    e[(2, 2)] = 1.0;
    e[(3, 4)] = 1.0;
    e[(4, 3)] = 1.0;
    e
}

/// The involution `Q = diag(-I3, I2)`; `Ad(Q)` splits the algebra into `k + p`.
pub fn involution() -> Mat5 {
    Mat5::from_diagonal(&Vector5::new(-1.0, -1.0, -1.0, 1.0, 1.0))
}

/// Max-norm of a matrix (largest absolute entry).
pub fn max_abs(m: &Mat5) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn one_norm(m: &Mat5) -> f64 {
    (0..5)
        .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// A vector of R^5_1 in coordinates of the light-cone basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MinkowskiVector(pub Vector5<f64>);

impl MinkowskiVector {
    pub fn new(c: [f64; 5]) -> Self {
        Self(Vector5::from(c))
    }

    pub fn zero() -> Self {
        Self(Vector5::zeros())
    }

    /// Canonical basis vector `e_index`, 1-based to match the usual labels.
    pub fn basis(index: usize) -> Self {
        assert!((1..=5).contains(&index), "basis index must be in 1..=5");
        let mut v = Vector5::zeros();
        v[index - 1] = 1.0;
        Self(v)
    }

    pub fn inner(&self, other: &Self) -> f64 {
        minkowski_inner(self, other)
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn components(&self) -> [f64; 5] {
        [self.0[0], self.0[1], self.0[2], self.0[3], self.0[4]]
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.0.norm()
    }
}

impl Add for MinkowskiVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for MinkowskiVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Mul<f64> for MinkowskiVector {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self(self.0 * rhs)
    }
}

impl Neg for MinkowskiVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

/// `a^t E5 b`.
pub fn minkowski_inner(a: &MinkowskiVector, b: &MinkowskiVector) -> f64 {
    let (a, b) = (&a.0, &b.0);
    (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) + (a[3] * b[4] + a[4] * b[3])
}

/// `||E5 X + (E5 X)^t||_max`; zero exactly on the Lie algebra `o1(5)`.
pub fn algebra_defect(x: &Mat5) -> f64 {
    let ex = gram() * x;
    max_abs(&(ex + ex.transpose()))
}

/// `||A^t E5 A - E5||_max`; zero exactly on `O1(5)`.
pub fn orthogonality_defect(a: &Mat5) -> f64 {
    let e = gram();
    max_abs(&(a.transpose() * e * a - e))
}

/// An element of the Lie algebra `o1(5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlgebraElement(pub Mat5);

impl AlgebraElement {
    pub fn zero() -> Self {
        Self(Mat5::zeros())
    }

    pub fn matrix(&self) -> &Mat5 {
        &self.0
    }

    pub fn defect(&self) -> f64 {
        algebra_defect(&self.0)
    }

    /// Sets the entry `(row, col)` (1-based) to `value` and its partner so
    /// that the result stays in `o1(5)`: the partner of `(i, j)` is `(j', i')`
    /// where `'` swaps the light-like indices 4 and 5.
    pub fn set_pair(&mut self, row: usize, col: usize, value: f64) {
        let swap = |k: usize| match k {
            4 => 5,
            5 => 4,
            k => k,
        };
        let (r, c) = (row - 1, col - 1);
        let (pr, pc) = (swap(col) - 1, swap(row) - 1);
        self.0[(r, c)] = value;
        self.0[(pr, pc)] = -value;
    }

    /// Entry by 1-based indices, matching the printed matrix forms.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.0[(row - 1, col - 1)]
    }

    pub fn bracket(&self, other: &Self) -> Self {
        Self(self.0 * other.0 - other.0 * self.0)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    /// Splits into the `+1` (`k`) and `-1` (`p`) eigenspaces of `Ad(Q)`.
    pub fn kp_split(&self) -> (Self, Self) {
        kp_split(self)
    }

    pub fn k_part(&self) -> Self {
        self.kp_split().0
    }

    pub fn p_part(&self) -> Self {
        self.kp_split().1
    }
}

impl Add for AlgebraElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for AlgebraElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Mul<f64> for AlgebraElement {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self(self.0 * rhs)
    }
}

impl Neg for AlgebraElement {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

/// `X_k = (X + QXQ)/2`, `X_p = (X - QXQ)/2`.
///
/// `Ad(Q)` only flips the sign of the off-diagonal (3x3 / 2x2) blocks, so the
/// split is done by copying blocks; `X_k + X_p == X` holds bit for bit.
pub fn kp_split(x: &AlgebraElement) -> (AlgebraElement, AlgebraElement) {
    let mut k = Mat5::zeros();
    let mut p = Mat5::zeros();
    for r in 0..5 {
        for c in 0..5 {
            if (r < 3) == (c < 3) {
                k[(r, c)] = x.0[(r, c)];
            } else {
                p[(r, c)] = x.0[(r, c)];
            }
        }
    }
    (AlgebraElement(k), AlgebraElement(p))
}

/// An element of `O1(5)` with its cached orthogonality defect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    matrix: Mat5,
    defect: f64,
}

impl GroupElement {
    pub fn identity() -> Self {
        Self { matrix: Mat5::identity(), defect: 0.0 }
    }

    /// Wraps a matrix, computing its defect. No membership test is applied.
    pub fn from_matrix(matrix: Mat5) -> Self {
        Self { defect: orthogonality_defect(&matrix), matrix }
    }

    /// Wraps a matrix, rejecting it when the defect exceeds `tol`.
    pub fn try_from_matrix(matrix: Mat5, tol: f64) -> Result<Self> {
        let g = Self::from_matrix(matrix);
        if g.defect > tol {
            return Err(Error::NotNearGroup { defect: g.defect });
        }
        Ok(g)
    }

    pub fn matrix(&self) -> &Mat5 {
        &self.matrix
    }

    pub fn orthogonality_defect(&self) -> f64 {
        self.defect
    }

    /// Defect divided by `max(1, ||G||_max^2)`, the size of the products whose
    /// cancellation it measures.
    pub fn relative_defect(&self) -> f64 {
        let n = max_abs(&self.matrix);
        self.defect / (n * n).max(1.0)
    }

    /// `G^{-1} = E5 G^t E5`.
    pub fn inverse(&self) -> Self {
        let e = gram();
        Self { matrix: e * self.matrix.transpose() * e, defect: self.defect }
    }

    /// Column `index` (1-based), i.e. the image `G e_index`.
    pub fn column(&self, index: usize) -> MinkowskiVector {
        MinkowskiVector(self.matrix.column(index - 1).into_owned())
    }

    pub fn apply(&self, v: &MinkowskiVector) -> MinkowskiVector {
        MinkowskiVector(self.matrix * v.0)
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self::from_matrix(self.matrix * other.matrix)
    }

    /// `G^{-1} X G` for an algebra element `X`.
    pub fn adjoint_inverse(&self, x: &AlgebraElement) -> AlgebraElement {
        AlgebraElement(self.inverse().matrix * x.0 * self.matrix)
    }
}

impl Mul for GroupElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.compose(&rhs)
    }
}

impl<'a> Mul<&'a GroupElement> for &'a GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: &'a GroupElement) -> GroupElement {
        self.compose(rhs)
    }
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the degree-13 Padé approximant is used unscaled.
pub const PADE13_THETA: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé core.
pub fn expm(a: &Mat5) -> Mat5 {
    let norm = one_norm(a);
    if norm == 0.0 {
        return Mat5::identity();
    }
    let s = if norm > PADE13_THETA { (norm / PADE13_THETA).log2().ceil() as i32 } else { 0 };
    let a = a * 2.0_f64.powi(-s);
    let b = &PADE13;
    let id = Mat5::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u = a * (a6 * (a6 * b[13] + a4 * b[11] + a2 * b[9])
        + a6 * b[7]
        + a4 * b[5]
        + a2 * b[3]
        + id * b[1]);
    let v = a6 * (a6 * b[12] + a4 * b[10] + a2 * b[8]) + a6 * b[6] + a4 * b[4] + a2 * b[2] + id * b[0];
    let mut r = (v - u)
        .lu()
        .solve(&(v + u))
        .expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..s {
        r = r * r;
    }
    r
}

pub fn group_exp(x: &AlgebraElement) -> GroupElement {
    GroupElement::from_matrix(expm(&x.0))
}

/// Outcome of [`reorthonormalize_with_stats`].
#[derive(Debug, Clone, Copy)]
pub struct Reorthonormalized {
    pub element: GroupElement,
    pub iterations: usize,
}

const REORTH_TARGET: f64 = 1e-13;
const REORTH_MAX_ITER: usize = 50;

/// Projects a near-group matrix back onto `O1(5)` with the averaging map
/// `G <- (G + E5 G^{-t} E5) / 2`, whose fixed points are exactly the group.
pub fn reorthonormalize(g: &GroupElement) -> Result<GroupElement> {
    reorthonormalize_with_stats(g).map(|r| r.element)
}

pub fn reorthonormalize_with_stats(g: &GroupElement) -> Result<Reorthonormalized> {
    let mut current = *g;
    if current.defect >= 0.1 {
        return Err(Error::NotNearGroup { defect: current.defect });
    }
    // Defects of matrices with large entries cannot drop below the rounding
    // level of the products in `G^t E5 G`.
    let scale = max_abs(&current.matrix).powi(2).max(1.0);
    let floor = REORTH_TARGET.max(4.0 * f64::EPSILON * scale);
    let e = gram();
    for iterations in 0..REORTH_MAX_ITER {
        if current.defect < floor {
            return Ok(Reorthonormalized { element: current, iterations });
        }
        let inv_t = current
            .matrix
            .transpose()
            .try_inverse()
            .ok_or(Error::NotNearGroup { defect: current.defect })?;
        let next = GroupElement::from_matrix((current.matrix + e * inv_t * e) * 0.5);
        if !(next.defect < current.defect) {
            if next.defect.min(current.defect) < floor * 16.0 {
                let best = if next.defect < current.defect { next } else { current };
                return Ok(Reorthonormalized { element: best, iterations: iterations + 1 });
            }
            return Err(Error::ReorthonormalizationStalled {
                iterations: iterations + 1,
                defect: next.defect,
            });
        }
        current = next;
    }
    Err(Error::ReorthonormalizationStalled { iterations: REORTH_MAX_ITER, defect: current.defect })
}

/// Nearest group element in the Frobenius norm, to first order per step:
/// `G <- G + E5 G Λ` with `(G^t G) Λ + Λ (G^t G) = -(G^t E5 G - E5)`.
///
/// Unlike [`reorthonormalize`], the correction is no larger than the
/// distance to the group, so frames with large entries keep their absolute
/// accuracy.
pub fn project_to_group(g: &GroupElement) -> Result<GroupElement> {
    if g.defect >= 0.1 {
        return Err(Error::NotNearGroup { defect: g.defect });
    }
    let scale = max_abs(&g.matrix).powi(2).max(1.0);
    let floor = REORTH_TARGET.max(4.0 * f64::EPSILON * scale);
    let e = gram();
    let mut current = *g;
    for _ in 0..4 {
        if current.defect < floor {
            break;
        }
        let eig = (current.matrix.transpose() * current.matrix).symmetric_eigen();
        let q = eig.eigenvectors;
        // The defect in the eigenbasis, computed from `G Q` so that the small
        // directions are not swamped by rounding of the large ones.
        let gq = current.matrix * q;
        let d = gq.transpose() * e * gq - q.transpose() * e * q;
        let mu = eig.eigenvalues;
        let lambda = Mat5::from_fn(|i, j| -d[(i, j)] / (mu[i] + mu[j]));
        let next = GroupElement::from_matrix(current.matrix + e * gq * lambda * q.transpose());
        if !(next.defect < current.defect) {
            break;
        }
        current = next;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(i: usize) -> MinkowskiVector {
        MinkowskiVector::basis(i)
    }

    /// Generic algebra element from 10 free parameters.
    fn algebra_from(p: &[f64]) -> AlgebraElement {
        let mut x = AlgebraElement::zero();
        let slots = [(1, 2), (1, 3), (2, 3), (1, 4), (1, 5), (2, 4), (2, 5), (3, 4), (3, 5)];
        for (v, (r, c)) in p.iter().zip(slots) {
            x.set_pair(r, c, *v);
        }
        x.0[(3, 3)] = p[9];
        x.0[(4, 4)] = -p[9];
        x
    }

    fn taylor_exp(x: &Mat5, terms: usize) -> Mat5 {
        let mut sum = Mat5::identity();
        let mut term = Mat5::identity();
        for n in 1..terms {
            term = term * x / n as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn inner_products_of_basis() {
        assert_eq!(minkowski_inner(&e(1), &e(1)), 1.0);
        assert_eq!(minkowski_inner(&e(4), &e(4)), 0.0);
        assert_eq!(minkowski_inner(&e(4), &e(5)), 1.0);
        assert_eq!(minkowski_inner(&e(5), &e(5)), 0.0);
        let v = MinkowskiVector::new([0.3, -1.0, 2.0, 5.0, 7.0]);
        assert_eq!(minkowski_inner(&MinkowskiVector::zero(), &v), 0.0);
    }

    #[test]
    fn defect_of_identity_is_two() {
        assert_eq!(algebra_defect(&Mat5::zeros()), 0.0);
        assert_eq!(algebra_defect(&Mat5::identity()), 2.0);
    }

    #[test]
    fn set_pair_stays_in_algebra() {
        let x = algebra_from(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.1]);
        assert_eq!(x.defect(), 0.0);
        assert_eq!(x.entry(1, 4), 0.4);
        assert_eq!(x.entry(5, 1), -0.4);
        assert_eq!(x.entry(4, 1), -0.5);
    }

    #[test]
    fn split_of_pure_blocks() {
        let mut k = AlgebraElement::zero();
        k.set_pair(1, 2, 0.7);
        k.0[(3, 3)] = 0.2;
        k.0[(4, 4)] = -0.2;
        let (kk, kp) = kp_split(&k);
        assert_eq!(kk, k);
        assert_eq!(kp, AlgebraElement::zero());

        let mut p = AlgebraElement::zero();
        p.set_pair(1, 4, 1.3);
        p.set_pair(3, 5, -0.4);
        let (pk, pp) = kp_split(&p);
        assert_eq!(pk, AlgebraElement::zero());
        assert_eq!(pp, p);
    }

    #[test]
    fn split_matches_conjugation_by_q() {
        let x = algebra_from(&[0.1, -0.2, 0.3, 0.4, -0.5, 0.6, 0.7, -0.8, 0.9, 1.1]);
        let q = involution();
        let qxq = q * x.0 * q;
        let (k, p) = kp_split(&x);
        assert!(max_abs(&(k.0 - (x.0 + qxq) * 0.5)) < 1e-16);
        assert!(max_abs(&(p.0 - (x.0 - qxq) * 0.5)) < 1e-16);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(expm(&Mat5::zeros()), Mat5::identity());
    }

    #[test]
    fn exp_of_single_eta_column_matches_taylor() {
        let mut x = AlgebraElement::zero();
        x.set_pair(1, 4, 0.8);
        x.set_pair(1, 5, -0.6);
        let exact = taylor_exp(&x.0, 30);
        assert!(max_abs(&(expm(&x.0) - exact)) < 1e-12);
    }

    #[test]
    fn exp_with_scaling_matches_taylor() {
        let x = algebra_from(&[1.1, -2.0, 0.3, 2.4, -1.5, 0.6, 1.7, -0.8, 0.9, 1.1]);
        assert!(one_norm(&x.0) > PADE13_THETA);
        // Taylor needs many terms at this norm; compare relatively.
        let exact = taylor_exp(&x.0, 80);
        let got = expm(&x.0);
        assert!(max_abs(&(got - exact)) / max_abs(&exact) < 1e-12);
        assert!(group_exp(&x).relative_defect() < 1e-13);
    }

    #[test]
    fn exp_preserves_k_block_structure() {
        let mut k = AlgebraElement::zero();
        k.set_pair(1, 3, 0.9);
        k.set_pair(2, 3, -0.4);
        k.0[(3, 3)] = 0.5;
        k.0[(4, 4)] = -0.5;
        let g = group_exp(&k);
        for r in 0..5 {
            for c in 0..5 {
                if (r < 3) != (c < 3) {
                    assert_eq!(g.matrix()[(r, c)], 0.0);
                }
            }
        }
    }

    #[test]
    fn reorthonormalize_fixes_group_elements() {
        let x = algebra_from(&[0.1, -0.2, 0.3, 0.4, -0.5, 0.6, 0.7, -0.8, 0.9, 0.2]);
        let g = group_exp(&x);
        let r = reorthonormalize_with_stats(&g).unwrap();
        assert!(max_abs(&(r.element.matrix() - g.matrix())) < 1e-14);
    }

    #[test]
    fn reorthonormalize_converges_quadratically() {
        let x = algebra_from(&[0.1, -0.2, 0.3, 0.4, -0.5, 0.6, 0.7, -0.8, 0.9, 0.2]);
        let g = group_exp(&x);
        let mut noise = Mat5::zeros();
        for (n, v) in noise.iter_mut().enumerate() {
            *v = 1e-6 * ((n as f64 * 1.7).sin());
        }
        let perturbed = GroupElement::from_matrix(g.matrix() + noise);
        assert!(perturbed.orthogonality_defect() > 1e-7);
        let r = reorthonormalize_with_stats(&perturbed).unwrap();
        assert!(r.element.orthogonality_defect() < 1e-13);
        assert!(r.iterations <= 4, "took {} iterations", r.iterations);
        // The correction is of the size of the perturbation.
        assert!(max_abs(&(r.element.matrix() - g.matrix())) < 1e-5);
    }

    #[test]
    fn reorthonormalize_rejects_far_matrices() {
        let mut m = Mat5::identity();
        m[(0, 1)] = 0.5;
        m[(3, 3)] = 1.5;
        let g = GroupElement::from_matrix(m);
        assert!(matches!(reorthonormalize(&g), Err(Error::NotNearGroup { .. })));
    }

    #[test]
    fn projection_keeps_large_frames_accurate() {
        let mut x = AlgebraElement::zero();
        x.set_pair(1, 3, -1.0);
        x.set_pair(1, 4, 1.0);
        x.set_pair(1, 5, -1.0);
        let exact = expm(&(x.0 * (2.0 * std::f64::consts::PI)));
        let noisy = exact + Mat5::from_fn(|r, c| 1e-12 * ((3 * r + 7 * c) % 5) as f64 - 2e-12);
        let g = GroupElement::from_matrix(noisy);
        assert!(g.orthogonality_defect() > 1e-9);
        let p = project_to_group(&g).unwrap();
        assert!(p.orthogonality_defect() < 1e-10, "{}", p.orthogonality_defect());
        assert!(max_abs(&(p.matrix() - exact)) < 1e-11, "{}", max_abs(&(p.matrix() - exact)));
        // The averaging map lands much further away.
        let r = reorthonormalize(&g).unwrap();
        assert!(max_abs(&(r.matrix() - exact)) > 1e-9);
    }

    #[test]
    fn group_columns_keep_light_cone_pairing() {
        let x = algebra_from(&[0.3, -0.2, 0.5, 0.4, -0.5, 0.6, 0.7, -0.8, 0.9, 0.2]);
        let g = group_exp(&x);
        let (f, fh) = (g.column(4), g.column(5));
        assert!(f.norm_sq().abs() < 1e-13);
        assert!((f.inner(&fh) - 1.0).abs() < 1e-13);
        let gi = g.inverse();
        assert!(max_abs(&(gi.matrix() * g.matrix() - Mat5::identity())) < 1e-13);
    }

    fn algebra_strategy() -> impl Strategy<Value = AlgebraElement> {
        prop::collection::vec(-1.0..1.0f64, 10).prop_map(|p| algebra_from(&p))
    }

    proptest! {
        #[test]
        fn inner_is_symmetric(a in prop::array::uniform5(-10.0..10.0f64), b in prop::array::uniform5(-10.0..10.0f64)) {
            let (a, b) = (MinkowskiVector::new(a), MinkowskiVector::new(b));
            prop_assert_eq!(minkowski_inner(&a, &b), minkowski_inner(&b, &a));
        }

        #[test]
        fn bracket_closes(x in algebra_strategy(), y in algebra_strategy()) {
            prop_assert!(x.bracket(&y).defect() < 1e-14);
        }

        #[test]
        fn split_is_projection(x in algebra_strategy()) {
            let (k, p) = kp_split(&x);
            prop_assert_eq!(k + p, x);
            prop_assert_eq!(kp_split(&k), (k, AlgebraElement::zero()));
            prop_assert_eq!(kp_split(&p), (AlgebraElement::zero(), p));
        }

        #[test]
        fn bracket_of_p_parts_is_in_k(x in algebra_strategy(), y in algebra_strategy()) {
            let b = x.p_part().bracket(&y.p_part());
            prop_assert_eq!(b.p_part(), AlgebraElement::zero());
        }

        #[test]
        fn exp_inverse_identity(x in algebra_strategy()) {
            let g = expm(&x.0);
            let h = expm(&(-x).0);
            prop_assert!(max_abs(&(g * h - Mat5::identity())) < 1e-12);
        }
    }
}

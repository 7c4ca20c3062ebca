//! Least-squares rigid and similarity alignment of point clouds (Kabsch and
//! Umeyama).

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlignOptions {
    /// Fit a global scale factor as well.
    pub scale: bool,
    /// Permit orientation-reversing orthogonal maps.
    pub reflection: bool,
}

impl AlignOptions {
    pub fn rigid() -> Self {
        Self::default()
    }

    pub fn similarity() -> Self {
        Self { scale: true, reflection: false }
    }
}

/// The map `p -> scale * rotation * p + translation` taking a source cloud
/// onto a target cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub rotation: Matrix3<f64>,
    pub scale: f64,
    pub translation: Vector3<f64>,
    pub rms: f64,
}

impl Alignment {
    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p * self.scale + self.translation
    }
}

fn centroid(points: &[Vector3<f64>]) -> Vector3<f64> {
    points.iter().sum::<Vector3<f64>>() / points.len() as f64
}

pub fn rms_distance(a: &[Vector3<f64>], b: &[Vector3<f64>]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(p, q)| (p - q).norm_squared()).sum();
    (sum / a.len() as f64).sqrt()
}

/// Best alignment of `source` onto `target` in the least-squares sense.
pub fn align(source: &[Vector3<f64>], target: &[Vector3<f64>], options: AlignOptions) -> Result<Alignment> {
    if source.len() != target.len() {
        return Err(Error::ShapeMismatch { expected: target.len(), found: source.len() });
    }
    if source.is_empty() {
        return Err(Error::InvalidParameter { name: "points", reason: "empty point cloud".into() });
    }
    let (cs, ct) = (centroid(source), centroid(target));
    let mut cov = Matrix3::zeros();
    let mut var = 0.0;
    for (p, q) in source.iter().zip(target) {
        let (p, q) = (p - cs, q - ct);
        cov += q * p.transpose();
        var += p.norm_squared();
    }
    let svd = cov.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut d = Matrix3::identity();
    if !options.reflection && (u * v_t).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let rotation = u * d * v_t;
    let scale = if options.scale && var > 0.0 {
        (svd.singular_values.component_mul(&d.diagonal())).sum() / var
    } else {
        1.0
    };
    let translation = ct - rotation * cs * scale;
    let mut out = Alignment { rotation, scale, translation, rms: 0.0 };
    let moved: Vec<_> = source.iter().map(|p| out.apply(p)).collect();
    out.rms = rms_distance(&moved, target);
    Ok(out)
}

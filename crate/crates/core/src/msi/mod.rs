//! Multi-sphere images: concentric RGBA layers, their radii schedule,
//! left/right blending, compositing and rendering.

mod composite;
mod container;
mod hires;
mod projection;
mod render;

pub use composite::{composite_ray, Composite};
pub use container::{export_web, read_msi, write_msi, WebMetadata, AXIS_CONVENTION, MSI_MAGIC};
pub use hires::{render_hires, OdsPair};
pub use projection::Projection;
pub(crate) use render::layer_taps;
pub use render::{expected_depth, render, render_rays, RenderOptions};

use crate::error::{ensure_arg, Result};
use crate::imaging::ErpImage;
use crate::sweep::SphereSweepVolume;

pub const DEFAULT_LAYERS: usize = 32;
pub const DEFAULT_NEAR: f64 = 1.0;
pub const DEFAULT_FAR: f64 = 100.0;

/// Radii whose reciprocals are evenly spaced between `1/near` and `1/far`.
pub fn layer_radii(n: usize, near: f64, far: f64) -> Result<Vec<f64>> {
    ensure_arg!(n >= 2, "need at least two layers, got {n}");
    ensure_arg!(
        near > 0.0 && near < far && far.is_finite(),
        "radii bounds must satisfy 0 < near < far, got [{near}, {far}]"
    );
    let (inv_near, inv_far) = (1.0 / near, 1.0 / far);
    let last = (n - 1) as f64;
    let mut radii: Vec<f64> = (0..n)
        .map(|i| 1.0 / (inv_near + (inv_far - inv_near) * i as f64 / last))
        .collect();
    radii[0] = near;
    radii[n - 1] = far;
    Ok(radii)
}

/// Concentric RGBA sphere layers ordered near to far.
///
/// Colours are straight (not premultiplied). The optional per-layer blend
/// weights record how each layer's colour mixes the left and right sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct Msi {
    radii: Vec<f64>,
    layers: Vec<ErpImage>,
    beta: Option<Vec<ErpImage>>,
}

impl Msi {
    pub fn new(radii: Vec<f64>, layers: Vec<ErpImage>, beta: Option<Vec<ErpImage>>) -> Result<Self> {
        ensure_arg!(!radii.is_empty(), "an MSI needs at least one layer");
        ensure_arg!(
            radii.len() == layers.len(),
            "{} radii for {} layers",
            radii.len(),
            layers.len()
        );
        ensure_arg!(
            radii[0] > 0.0 && radii.windows(2).all(|w| w[0] < w[1]),
            "radii must be positive and strictly increasing"
        );
        let dims = layers[0].dims();
        for (i, l) in layers.iter().enumerate() {
            ensure_arg!(l.channels() == 4, "layer {i} must be RGBA");
            ensure_arg!(l.dims() == dims, "layer {i} resolution differs from layer 0");
            ensure_arg!(
                l.data().iter().all(|v| (0.0..=1.0).contains(v)),
                "layer {i} has values outside [0, 1]"
            );
        }
        if let Some(beta) = &beta {
            ensure_arg!(beta.len() == layers.len(), "one blend map per layer required");
            for (i, b) in beta.iter().enumerate() {
                ensure_arg!(
                    b.channels() == 1 && b.dims() == dims,
                    "blend map {i} must be one channel at layer resolution"
                );
                ensure_arg!(
                    b.data().iter().all(|v| (0.0..=1.0).contains(v)),
                    "blend map {i} has values outside [0, 1]"
                );
            }
        }
        Ok(Msi { radii, layers, beta })
    }

    pub fn n_layers(&self) -> usize {
        self.radii.len()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn layers(&self) -> &[ErpImage] {
        &self.layers
    }

    pub fn beta(&self) -> Option<&[ErpImage]> {
        self.beta.as_deref()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.layers[0].dims()
    }

    pub fn without_beta(mut self) -> Self {
        self.beta = None;
        self
    }
}

/// Per-layer colours `beta * left + (1 - beta) * right`.
pub fn blend_layers(
    left: &SphereSweepVolume,
    right: &SphereSweepVolume,
    beta: &[ErpImage],
) -> Result<Vec<ErpImage>> {
    let n = left.layers().len();
    ensure_arg!(
        right.layers().len() == n && beta.len() == n,
        "layer counts differ: left {n}, right {}, beta {}",
        right.layers().len(),
        beta.len()
    );
    left.layers()
        .iter()
        .zip(right.layers())
        .zip(beta)
        .enumerate()
        .map(|(i, ((l, r), b))| {
            ensure_arg!(
                l.same_shape(r) && l.dims() == b.dims() && b.channels() == 1,
                "layer {i}: sweep and blend map shapes differ"
            );
            ensure_arg!(
                b.data().iter().all(|v| (0.0..=1.0).contains(v)),
                "layer {i}: blend weights outside [0, 1]"
            );
            let c = l.channels();
            let data = l
                .data()
                .chunks_exact(c)
                .zip(r.data().chunks_exact(c))
                .zip(b.data())
                .flat_map(|((pl, pr), &w)| {
                    pl.iter().zip(pr).map(move |(a, b)| w * a + (1.0 - w) * b)
                })
                .collect();
            let (w, h) = l.dims();
            ErpImage::from_vec(w, h, c, data)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use crate::sweep::SweepSource;
    use approx::assert_abs_diff_eq;

    #[test]
    fn radii_schedule() {
        let r = layer_radii(32, 1.0, 100.0).unwrap();
        assert_eq!(r.len(), 32);
        assert_eq!(r[0], 1.0);
        assert_eq!(r[31], 100.0);
        // Closed form for the second radius.
        assert_abs_diff_eq!(r[1], 1.0 / (1.0 - 0.99 / 31.0), epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], 1.03299, epsilon = 1e-5);
        assert_eq!(r.iter().filter(|&&x| x <= 2.0).count(), 16);
        assert_abs_diff_eq!(r[15], 1.9195, epsilon = 1e-4);
        assert_abs_diff_eq!(r[16], 2.0449, epsilon = 1e-4);
        assert!(r.windows(2).all(|w| w[0] < w[1]));
        // Reciprocals are evenly spaced.
        let step = 1.0 / r[1] - 1.0 / r[0];
        for w in r.windows(2) {
            assert_abs_diff_eq!(1.0 / w[1] - 1.0 / w[0], step, epsilon = 1e-12);
        }
    }

    #[test]
    fn radii_reject_bad_bounds() {
        assert!(layer_radii(1, 1.0, 100.0).is_err());
        assert!(layer_radii(4, 0.0, 100.0).is_err());
        assert!(layer_radii(4, 5.0, 2.0).is_err());
    }

    fn sweep(value: f64) -> SphereSweepVolume {
        SphereSweepVolume::from_layers(
            vec![1.0, 2.0],
            vec![ErpImage::filled(2, 1, 3, value); 2],
            SweepSource::Mono,
            Pose::identity(),
        )
        .unwrap()
    }

    #[test]
    fn blending_arithmetic() {
        let (l, r) = (sweep(0.8), sweep(0.4));
        let ones = vec![ErpImage::filled(2, 1, 1, 1.0); 2];
        assert_eq!(blend_layers(&l, &r, &ones).unwrap(), l.layers());
        let zeros = vec![ErpImage::filled(2, 1, 1, 0.0); 2];
        assert_eq!(blend_layers(&l, &r, &zeros).unwrap(), r.layers());
        let quarter = vec![ErpImage::filled(2, 1, 1, 0.25); 2];
        let out = blend_layers(&l, &r, &quarter).unwrap();
        assert_abs_diff_eq!(out[0].get(1, 0, 2), 0.5, epsilon = 1e-15);
        let wrong = vec![ErpImage::filled(3, 1, 1, 0.5); 2];
        assert!(blend_layers(&l, &r, &wrong).is_err());
    }

    #[test]
    fn msi_validation() {
        let layer = ErpImage::filled(4, 2, 4, 0.5);
        assert!(Msi::new(vec![1.0, 2.0], vec![layer.clone(); 2], None).is_ok());
        assert!(Msi::new(vec![2.0, 1.0], vec![layer.clone(); 2], None).is_err());
        assert!(Msi::new(vec![1.0], vec![ErpImage::filled(4, 2, 3, 0.5)], None).is_err());
        assert!(Msi::new(vec![1.0], vec![ErpImage::filled(4, 2, 4, 1.5)], None).is_err());
        let beta = Some(vec![ErpImage::filled(4, 2, 1, 0.5)]);
        assert!(Msi::new(vec![1.0], vec![layer], beta).is_ok());
    }
}

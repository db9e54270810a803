//! Sphere sweep volumes: a source panorama reprojected onto concentric
//! spheres, one ERP image per radius.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_arg, Result};
use crate::geometry::{
    angles_to_direction, angles_to_erp_pixel, erp_angles_unchecked, project_erp_unchecked,
    project_ods_with_rho, Eye, Pose, ViewingCircle,
};
use crate::imaging::ErpImage;

/// Which panorama a sweep was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepSource {
    OdsLeft,
    OdsRight,
    /// A single-centre ERP panorama.
    Mono,
}

impl From<Eye> for SweepSource {
    fn from(e: Eye) -> Self {
        match e {
            Eye::Left => SweepSource::OdsLeft,
            Eye::Right => SweepSource::OdsRight,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereSweepVolume {
    radii: Vec<f64>,
    layers: Vec<ErpImage>,
    source: SweepSource,
    rig_transform: Pose,
}

impl SphereSweepVolume {
    pub fn from_layers(
        radii: Vec<f64>,
        layers: Vec<ErpImage>,
        source: SweepSource,
        rig_transform: Pose,
    ) -> Result<Self> {
        ensure_arg!(
            !radii.is_empty() && radii.len() == layers.len(),
            "sweep needs one layer per radius"
        );
        ensure_arg!(
            layers.iter().all(|l| l.same_shape(&layers[0])),
            "sweep layers must share one shape"
        );
        Ok(SphereSweepVolume {
            radii,
            layers,
            source,
            rig_transform,
        })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn layers(&self) -> &[ErpImage] {
        &self.layers
    }

    pub fn source(&self) -> SweepSource {
        self.source
    }

    pub fn rig_transform(&self) -> &Pose {
        &self.rig_transform
    }

    pub fn dims(&self) -> (usize, usize) {
        self.layers[0].dims()
    }
}

/// Builds a `width x height` sweep of `src` over `radii`.
///
/// Each output direction is pushed out to distance `r_i`, moved by
/// `rig_transform`, projected into the source panorama and bilinearly
/// sampled. ODS points inside the viewing cylinder are pushed just outside
/// it so the lookup stays defined.
pub fn build_sweep(
    src: &ErpImage,
    source: SweepSource,
    circle: ViewingCircle,
    radii: &[f64],
    width: usize,
    height: usize,
    rig_transform: &Pose,
) -> Result<SphereSweepVolume> {
    ensure_arg!(!radii.is_empty(), "sweep needs at least one radius");
    ensure_arg!(
        radii[0] > 0.0 && radii.windows(2).all(|w| w[0] < w[1]),
        "sweep radii must be positive and strictly increasing"
    );
    ensure_arg!(width >= 1 && height >= 1, "empty sweep resolution");
    let (sw, sh) = src.dims();
    let channels = src.channels().min(3);
    let r = circle.radius;
    let min_rho = r * (1.0 + 1e-6);

    let layers = radii
        .par_iter()
        .map(|&radius| {
            let mut data = vec![0.0; width * height * channels];
            let mut px = [0.0; 4];
            for y in 0..height {
                for x in 0..width {
                    let a = erp_angles_unchecked(x as f64, y as f64, width, height);
                    let p = rig_transform.apply(&(angles_to_direction(a) * radius));
                    let angles = match source {
                        SweepSource::Mono => project_erp_unchecked(&p),
                        SweepSource::OdsLeft | SweepSource::OdsRight => {
                            let eye = if source == SweepSource::OdsLeft {
                                Eye::Left
                            } else {
                                Eye::Right
                            };
                            let rho = p.x.hypot(p.z).max(min_rho);
                            project_ods_with_rho(&p, rho, r, eye)
                        }
                    };
                    let (sx, sy) = angles_to_erp_pixel(angles, sw, sh);
                    src.bilinear_sample_into(sx, sy, &mut px[..src.channels()]);
                    let i = (y * width + x) * channels;
                    data[i..i + channels].copy_from_slice(&px[..channels]);
                }
            }
            ErpImage::from_vec(width, height, channels, data)
        })
        .collect::<Result<Vec<_>>>()?;
    SphereSweepVolume::from_layers(radii.to_vec(), layers, source, *rig_transform)
}

/// Left and right sweeps over spheres moved by `transform`.
pub fn transformed_sweep_pair(
    left: &ErpImage,
    right: &ErpImage,
    circle: ViewingCircle,
    radii: &[f64],
    width: usize,
    height: usize,
    transform: &Pose,
) -> Result<(SphereSweepVolume, SphereSweepVolume)> {
    Ok((
        build_sweep(left, SweepSource::OdsLeft, circle, radii, width, height, transform)?,
        build_sweep(right, SweepSource::OdsRight, circle, radii, width, height, transform)?,
    ))
}

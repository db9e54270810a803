use rayon::prelude::*;

use super::{Msi, Projection};
use crate::error::{Error, Result};
use crate::geometry::{angles_to_erp_pixel, project_erp_unchecked, sphere_exit_unchecked, Pose, Ray};
use crate::imaging::{BilinearTaps, ErpImage};

/// Renderer switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    /// Viewpoints may approach the innermost sphere beyond the headbox
    /// (they must still stay strictly inside it).
    pub allow_outside_headbox: bool,
    /// Headbox radius as a fraction of the innermost layer radius.
    pub headbox_fraction: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            allow_outside_headbox: false,
            headbox_fraction: 0.9,
        }
    }
}

impl RenderOptions {
    pub fn permissive() -> Self {
        RenderOptions {
            allow_outside_headbox: true,
            ..Default::default()
        }
    }

    pub(crate) fn check_origin(&self, ray: &Ray, innermost: f64) -> Result<()> {
        let d = ray.origin.norm();
        let limit = if self.allow_outside_headbox {
            innermost
        } else {
            self.headbox_fraction * innermost
        };
        if d < limit {
            Ok(())
        } else {
            Err(Error::Headbox {
                distance: d,
                limit,
                innermost_radius: innermost,
            })
        }
    }
}

/// Per-layer quantities one ray picks up.
pub(crate) struct RaySamples {
    pub colors: Vec<[f64; 3]>,
    pub alphas: Vec<f64>,
    pub depths: Vec<f64>,
}

impl RaySamples {
    fn new(n: usize) -> Self {
        RaySamples {
            colors: vec![[0.0; 3]; n],
            alphas: vec![0.0; n],
            depths: vec![0.0; n],
        }
    }
}

/// Intersects every layer sphere and returns the bilinear taps per layer.
#[inline]
pub(crate) fn layer_taps(
    ray: &Ray,
    radii: &[f64],
    width: usize,
    height: usize,
    mut visit: impl FnMut(usize, f64, BilinearTaps),
) {
    let o2 = ray.origin.norm_squared();
    for (i, &r) in radii.iter().enumerate() {
        let t = sphere_exit_unchecked(&ray.origin, &ray.direction, o2, r);
        let p = ray.at(t);
        let (x, y) = angles_to_erp_pixel(project_erp_unchecked(&p), width, height);
        visit(i, t, BilinearTaps::new(x, y, width, height));
    }
}

fn sample_ray(msi: &Msi, ray: &Ray, out: &mut RaySamples) {
    let (w, h) = msi.dims();
    layer_taps(ray, msi.radii(), w, h, |i, t, taps| {
        let d = msi.layers()[i].data();
        let mut c = [0.0; 3];
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = taps.apply(|p| d[4 * p + k]);
        }
        out.colors[i] = c;
        out.alphas[i] = taps.apply(|p| d[4 * p + 3]);
        out.depths[i] = t;
    });
}

/// Renders an MSI from `rays`, one per output pixel in row-major order.
///
/// Ray origins must lie strictly inside the innermost sphere; they are
/// additionally held to the headbox unless `opts` allow otherwise.
pub fn render_rays(
    msi: &Msi,
    width: usize,
    height: usize,
    rays: impl Fn(usize, usize) -> Ray + Sync,
    opts: RenderOptions,
) -> Result<ErpImage> {
    let data = trace(msi, width, height, &rays, opts, 3, |s, out| {
        let mut trans = 1.0;
        let mut c = [0.0; 3];
        for (col, &a) in s.colors.iter().zip(&s.alphas) {
            let w = trans * a;
            for k in 0..3 {
                c[k] += w * col[k];
            }
            trans -= w;
        }
        out.copy_from_slice(&c);
    })?;
    ErpImage::from_vec(width, height, 3, data)
}

fn trace(
    msi: &Msi,
    width: usize,
    height: usize,
    rays: &(impl Fn(usize, usize) -> Ray + Sync),
    opts: RenderOptions,
    channels: usize,
    shade: impl Fn(&RaySamples, &mut [f64]) + Sync,
) -> Result<Vec<f64>> {
    let n = msi.n_layers();
    let innermost = msi.radii()[0];
    let mut data = vec![0.0; width * height * channels];
    data.par_chunks_mut(width * channels)
        .enumerate()
        .try_for_each(|(y, row)| {
            let mut samples = RaySamples::new(n);
            for x in 0..width {
                let ray = rays(x, y);
                opts.check_origin(&ray, innermost)?;
                sample_ray(msi, &ray, &mut samples);
                shade(&samples, &mut row[x * channels..(x + 1) * channels]);
            }
            Ok::<(), Error>(())
        })?;
    Ok(data)
}

/// Renders the MSI as seen through `proj` from camera pose `pose` (camera
/// to MSI frame). Uncovered light is black.
pub fn render(msi: &Msi, pose: &Pose, proj: &Projection, opts: RenderOptions) -> Result<ErpImage> {
    proj.validate()?;
    let (w, h) = proj.dims();
    render_rays(msi, w, h, |x, y| pose.apply_ray(&proj.camera_ray(x, y)), opts)
}

/// Opacity-weighted distance along each ray; residual transmittance is
/// assigned to the farthest layer.
pub fn expected_depth(
    msi: &Msi,
    pose: &Pose,
    proj: &Projection,
    opts: RenderOptions,
) -> Result<ErpImage> {
    proj.validate()?;
    let (w, h) = proj.dims();
    let rays = |x, y| pose.apply_ray(&proj.camera_ray(x, y));
    let data = trace(msi, w, h, &rays, opts, 1, |s, out| {
        let mut trans = 1.0;
        let mut d = 0.0;
        for (&t, &a) in s.depths.iter().zip(&s.alphas) {
            let wgt = trans * a;
            d += wgt * t;
            trans -= wgt;
        }
        out[0] = d + trans * s.depths[s.depths.len() - 1];
    })?;
    ErpImage::from_vec(w, h, 1, data)
}

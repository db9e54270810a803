use rayon::prelude::*;

use super::{Msi, Projection, RenderOptions};
use crate::error::{ensure_arg, Error, Result};
use crate::geometry::{
    angles_to_erp_pixel, project_erp_unchecked, sphere_exit_unchecked, Pose, ViewingCircle,
};
use crate::imaging::{jbu_upsample, upsample_bilinear, BilinearTaps, ErpImage, JbuParams};
use crate::sweep::{build_sweep, SweepSource};

/// A full-resolution ODS pair.
#[derive(Debug, Clone, Copy)]
pub struct OdsPair<'a> {
    pub left: &'a ErpImage,
    pub right: &'a ErpImage,
    pub circle: ViewingCircle,
}

/// Renders `msi` with layer colours re-blended from a full-resolution ODS
/// pair.
///
/// Each layer is rebuilt at the resolution of `left`/`right`: both eyes
/// are swept onto the layer sphere, mixed with the layer's blend weights
/// upsampled bilinearly, and its opacities are upsampled either with
/// `jbu` (guided by the re-blended colour) or bilinearly. Layers are
/// composited front to back one at a time.
pub fn render_hires(
    msi: &Msi,
    pair: OdsPair<'_>,
    pose: &Pose,
    proj: &Projection,
    jbu: Option<JbuParams>,
    opts: RenderOptions,
) -> Result<ErpImage> {
    proj.validate()?;
    let OdsPair { left, right, circle } = pair;
    let beta = msi
        .beta()
        .ok_or_else(|| Error::Argument("high-resolution rendering needs blend weights".into()))?;
    ensure_arg!(left.same_shape(right), "left and right panoramas differ in shape");
    let (lw, lh) = msi.dims();
    let (hw, hh) = left.dims();
    ensure_arg!(
        hw >= lw && hw % lw == 0 && hh % lh == 0 && hw / lw == hh / lh,
        "panorama {hw}x{hh} is not an integer multiple of the MSI's {lw}x{lh}"
    );

    let (w, h) = proj.dims();
    let rays: Vec<_> = (0..w * h)
        .map(|i| pose.apply_ray(&proj.camera_ray(i % w, i / w)))
        .collect();
    for r in &rays {
        opts.check_origin(r, msi.radii()[0])?;
    }
    let mut color = vec![[0.0; 3]; w * h];
    let mut trans = vec![1.0; w * h];

    for (k, &radius) in msi.radii().iter().enumerate() {
        let one = [radius];
        let id = Pose::identity();
        let sl = build_sweep(left, SweepSource::OdsLeft, circle, &one, hw, hh, &id)?;
        let sr = build_sweep(right, SweepSource::OdsRight, circle, &one, hw, hh, &id)?;
        let b = upsample_bilinear(&beta[k], hw, hh);
        let (sl, sr) = (&sl.layers()[0], &sr.layers()[0]);
        let blended = ErpImage::from_fn(hw, hh, 3, |x, y, c| {
            let bv = b.get(x, y, 0);
            bv * sl.get(x, y, c) + (1.0 - bv) * sr.get(x, y, c)
        });
        let alpha_low = msi.layers()[k].channel(3);
        let alpha = match jbu {
            Some(p) => jbu_upsample(&alpha_low, &blended, p)?,
            None => upsample_bilinear(&alpha_low, hw, hh),
        };
        let (cd, ad) = (blended.data(), alpha.data());
        color
            .par_iter_mut()
            .zip(trans.par_iter_mut())
            .zip(rays.par_iter())
            .for_each(|((c, t), ray)| {
                let o2 = ray.origin.norm_squared();
                let s = sphere_exit_unchecked(&ray.origin, &ray.direction, o2, radius);
                let (x, y) = angles_to_erp_pixel(project_erp_unchecked(&ray.at(s)), hw, hh);
                let taps = BilinearTaps::new(x, y, hw, hh);
                let wgt = *t * taps.apply(|i| ad[i]);
                for (ch, cv) in c.iter_mut().enumerate() {
                    *cv += wgt * taps.apply(|i| cd[3 * i + ch]);
                }
                *t -= wgt;
            });
    }
    ErpImage::from_vec(w, h, 3, color.into_iter().flatten().collect())
}

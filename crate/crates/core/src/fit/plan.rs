use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::imaging::BilinearTaps;
use crate::msi::{layer_taps, Projection, RenderOptions};

/// Precomputed layer lookups for every pixel of one view.
///
/// Texel state is addressed as `layer * texels + index`, each entry holding
/// `[r, g, b, alpha]`.
pub(crate) struct RenderPlan {
    pub width: usize,
    pub height: usize,
    layers: usize,
    taps: Vec<BilinearTaps>,
}

impl RenderPlan {
    pub fn new(
        radii: &[f64],
        layer_dims: (usize, usize),
        pose: &Pose,
        proj: &Projection,
        opts: RenderOptions,
    ) -> Result<Self> {
        proj.validate()?;
        let (width, height) = proj.dims();
        let n = radii.len();
        let (lw, lh) = layer_dims;
        let mut taps = vec![BilinearTaps::new(0.0, 0.0, 1, 1); width * height * n];
        taps.par_chunks_mut(width * n)
            .enumerate()
            .try_for_each(|(y, row)| {
                for x in 0..width {
                    let ray = pose.apply_ray(&proj.camera_ray(x, y));
                    opts.check_origin(&ray, radii[0])?;
                    let out = &mut row[x * n..(x + 1) * n];
                    layer_taps(&ray, radii, lw, lh, |i, _, t| out[i] = t);
                }
                Ok::<(), Error>(())
            })?;
        Ok(RenderPlan {
            width,
            height,
            layers: n,
            taps,
        })
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    fn sample(&self, state: &[[f64; 4]], texels: usize, pixel: usize, out: &mut [[f64; 4]]) {
        let taps = &self.taps[pixel * self.layers..(pixel + 1) * self.layers];
        for (k, (t, o)) in taps.iter().zip(out.iter_mut()).enumerate() {
            let layer = &state[k * texels..(k + 1) * texels];
            let [a, b, c, d] = t.index.map(|i| layer[i as usize]);
            // Same operation order as `BilinearTaps::apply`.
            for ch in 0..4 {
                let top = if t.fx == 0.0 { a[ch] } else { a[ch] + t.fx * (b[ch] - a[ch]) };
                o[ch] = if t.fy == 0.0 {
                    top
                } else {
                    let bottom = if t.fx == 0.0 { c[ch] } else { c[ch] + t.fx * (d[ch] - c[ch]) };
                    top + t.fy * (bottom - top)
                };
            }
        }
    }

    /// Composites `state` along every pixel's ray.
    pub fn forward(&self, state: &[[f64; 4]], texels: usize) -> Vec<[f64; 3]> {
        let mut out = vec![[0.0; 3]; self.pixels()];
        out.par_chunks_mut(self.width)
            .enumerate()
            .for_each(|(y, row)| {
                let mut s = vec![[0.0; 4]; self.layers];
                for (x, px) in row.iter_mut().enumerate() {
                    self.sample(state, texels, y * self.width + x, &mut s);
                    let mut trans = 1.0;
                    let mut c = [0.0; 3];
                    for l in &s {
                        let w = trans * l[3];
                        for k in 0..3 {
                            c[k] += w * l[k];
                        }
                        trans -= w;
                    }
                    *px = c;
                }
            });
        out
    }

    /// Accumulates into `grad` the gradient of a scalar whose derivative with
    /// respect to the rendered image is `d_image`.
    pub fn backward(
        &self,
        state: &[[f64; 4]],
        texels: usize,
        d_image: &[[f64; 3]],
        grad: &mut [[f64; 4]],
    ) {
        let n = self.layers;
        let mut s = vec![[0.0; 4]; n];
        let mut trans = vec![0.0; n];
        for (p, g) in d_image.iter().enumerate() {
            if g == &[0.0; 3] {
                continue;
            }
            self.sample(state, texels, p, &mut s);
            let mut t = 1.0;
            for (l, tk) in s.iter().zip(trans.iter_mut()) {
                *tk = t;
                t -= t * l[3];
            }
            // `behind` is the composite of every layer farther than k.
            let mut behind = [0.0; 3];
            let taps = &self.taps[p * n..(p + 1) * n];
            for k in (0..n).rev() {
                let l = s[k];
                let (a, tk) = (l[3], trans[k]);
                let w = tk * a;
                let mut d_alpha = 0.0;
                for c in 0..3 {
                    d_alpha += g[c] * (l[c] - behind[c]);
                }
                let d = [w * g[0], w * g[1], w * g[2], tk * d_alpha];
                let base = k * texels;
                for (&i, tw) in taps[k].index.iter().zip(taps[k].weights()) {
                    if tw != 0.0 {
                        let e = &mut grad[base + i as usize];
                        for c in 0..4 {
                            e[c] += tw * d[c];
                        }
                    }
                }
                for c in 0..3 {
                    behind[c] = a * l[c] + (1.0 - a) * behind[c];
                }
            }
        }
    }
}

use rayon::prelude::*;

use super::ErpImage;
use crate::error::{ensure_arg, Result};

/// Normalized discrete Gaussian with radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|k| k / sum).collect()
}

// Weighted sums are taken relative to the centre sample so constant
// neighbourhoods reproduce their value bit-exactly.
#[inline]
fn convolve_at(kernel: &[f64], centre: f64, fetch: impl Fn(isize) -> f64) -> f64 {
    let radius = (kernel.len() / 2) as isize;
    let mut acc = 0.0;
    for (k, w) in kernel.iter().enumerate() {
        let d = fetch(k as isize - radius) - centre;
        acc += w * d;
    }
    centre + acc
}

/// Separable Gaussian blur; wraps horizontally and clamps vertically.
pub fn gaussian_blur(img: &ErpImage, sigma: f64) -> ErpImage {
    assert!(sigma >= 0.0 && sigma.is_finite(), "sigma must be >= 0");
    if sigma == 0.0 {
        return img.clone();
    }
    let kernel = gaussian_kernel(sigma);
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let src = img.data();

    let mut horiz = vec![0.0; src.len()];
    horiz
        .par_chunks_mut(w * c)
        .enumerate()
        .for_each(|(y, row)| {
            let base = y * w * c;
            for x in 0..w {
                for ch in 0..c {
                    let centre = src[base + x * c + ch];
                    row[x * c + ch] = convolve_at(&kernel, centre, |d| {
                        let xx = (x as isize + d).rem_euclid(w as isize) as usize;
                        src[base + xx * c + ch]
                    });
                }
            }
        });

    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(w * c).enumerate().for_each(|(y, row)| {
        for x in 0..w {
            for ch in 0..c {
                let centre = horiz[(y * w + x) * c + ch];
                row[x * c + ch] = convolve_at(&kernel, centre, |d| {
                    let yy = (y as isize + d).clamp(0, h as isize - 1) as usize;
                    horiz[(yy * w + x) * c + ch]
                });
            }
        }
    });
    ErpImage::from_vec(w, h, c, out).expect("blur preserves shape")
}

/// Exact area averaging over integer `fx x fy` blocks.
pub fn box_reduce(img: &ErpImage, out_w: usize, out_h: usize) -> Result<ErpImage> {
    let (w, h, c) = (img.width(), img.height(), img.channels());
    ensure_arg!(
        out_w >= 1 && out_h >= 1 && w % out_w == 0 && h % out_h == 0,
        "{w}x{h} does not reduce to {out_w}x{out_h} by an integer ratio"
    );
    let (fx, fy) = (w / out_w, h / out_h);
    let n = (fx * fy) as f64;
    let mut out = ErpImage::new(out_w, out_h, c);
    for oy in 0..out_h {
        for ox in 0..out_w {
            for ch in 0..c {
                let anchor = img.get(ox * fx, oy * fy, ch);
                let mut acc = 0.0;
                for y in oy * fy..(oy + 1) * fy {
                    for x in ox * fx..(ox + 1) * fx {
                        acc += img.get(x, y, ch) - anchor;
                    }
                }
                out.set(ox, oy, ch, anchor + acc / n);
            }
        }
    }
    Ok(out)
}

/// Gaussian prefilter with `sigma = 0.5 * ratio` followed by area reduction.
pub fn antialiased_downsample(img: &ErpImage, out_w: usize, out_h: usize) -> Result<ErpImage> {
    let (w, h) = img.dims();
    ensure_arg!(
        out_w >= 1 && out_h >= 1 && out_w <= w && out_h <= h,
        "cannot downsample {w}x{h} to {out_w}x{out_h}"
    );
    ensure_arg!(
        w % out_w == 0 && h % out_h == 0,
        "downsample ratio from {w}x{h} to {out_w}x{out_h} is not an integer"
    );
    let sigma = 0.5 * (w / out_w) as f64;
    box_reduce(&gaussian_blur(img, sigma), out_w, out_h)
}

/// Bilinear upsampling to `out_w x out_h` (pixel centres aligned).
pub fn upsample_bilinear(img: &ErpImage, out_w: usize, out_h: usize) -> ErpImage {
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let (sx, sy) = (w as f64 / out_w as f64, h as f64 / out_h as f64);
    let mut data = vec![0.0; out_w * out_h * c];
    data.par_chunks_mut(out_w * c).enumerate().for_each(|(y, row)| {
        let ly = (y as f64 + 0.5) * sy - 0.5;
        for x in 0..out_w {
            let lx = (x as f64 + 0.5) * sx - 0.5;
            img.bilinear_sample_into(lx, ly, &mut row[x * c..(x + 1) * c]);
        }
    });
    ErpImage::from_vec(out_w, out_h, c, data).expect("upsample preserves validity")
}

/// Joint bilateral upsampling parameters, in low-resolution pixels and
/// guide intensity units.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JbuParams {
    pub spatial_sigma: f64,
    pub range_sigma: f64,
    pub radius: usize,
}

impl Default for JbuParams {
    fn default() -> Self {
        JbuParams {
            spatial_sigma: 1.0,
            range_sigma: 0.1,
            radius: 2,
        }
    }
}

/// Edge-aware upsampling of a one-channel `low` image guided by `guide`.
///
/// Each output pixel is a normalized sum over the low-resolution window
/// around its footprint, weighted by spatial distance in low-resolution
/// pixels and by the guide difference between the output pixel and the
/// guide sampled at each window texel's centre.
pub fn jbu_upsample(low: &ErpImage, guide: &ErpImage, params: JbuParams) -> Result<ErpImage> {
    let (lw, lh) = low.dims();
    let (gw, gh) = guide.dims();
    ensure_arg!(low.channels() == 1, "JBU upsamples one channel");
    ensure_arg!(
        gw >= lw && gh >= lh && gw % lw == 0 && gh % lh == 0 && gw / lw == gh / lh,
        "guide {gw}x{gh} is not an integer multiple of {lw}x{lh}"
    );
    ensure_arg!(
        params.spatial_sigma > 0.0 && params.range_sigma > 0.0,
        "JBU sigmas must be positive"
    );
    let scale = gw / lw;
    let gc = guide.channels();

    // Guide colour at every low-resolution texel centre.
    let mut guide_low = vec![0.0; lw * lh * gc];
    for qy in 0..lh {
        for qx in 0..lw {
            let hx = (qx as f64 + 0.5) * scale as f64 - 0.5;
            let hy = (qy as f64 + 0.5) * scale as f64 - 0.5;
            let i = (qy * lw + qx) * gc;
            guide.bilinear_sample_into(hx, hy, &mut guide_low[i..i + gc]);
        }
    }

    let inv_s = 1.0 / (2.0 * params.spatial_sigma * params.spatial_sigma);
    let inv_r = 1.0 / (2.0 * params.range_sigma * params.range_sigma);
    let r = params.radius as isize;
    let lowd = low.data();

    let mut out = vec![0.0; gw * gh];
    out.par_chunks_mut(gw).enumerate().for_each(|(y, row)| {
        let py = (y as f64 + 0.5) / scale as f64 - 0.5;
        let cy = py.round() as isize;
        for (x, o) in row.iter_mut().enumerate() {
            let px = (x as f64 + 0.5) / scale as f64 - 0.5;
            let cx = px.round() as isize;
            let g = guide.pixel(x, y);
            let (mut num, mut den) = (0.0, 0.0);
            let (mut snum, mut sden) = (0.0, 0.0);
            for qy in (cy - r).max(0)..=(cy + r).min(lh as isize - 1) {
                for dqx in -r..=r {
                    let qx = cx + dqx;
                    let wx = qx.rem_euclid(lw as isize) as usize;
                    let qi = qy as usize * lw + wx;
                    let ds = (px - qx as f64).powi(2) + (py - qy as f64).powi(2);
                    let gq = &guide_low[qi * gc..(qi + 1) * gc];
                    let dr: f64 = g.iter().zip(gq).map(|(a, b)| (a - b) * (a - b)).sum();
                    let ws = (-ds * inv_s).exp();
                    let w = ws * (-dr * inv_r).exp();
                    num += w * lowd[qi];
                    den += w;
                    snum += ws * lowd[qi];
                    sden += ws;
                }
            }
            // All range weights underflowed: fall back to the spatial term.
            *o = if den > 0.0 { num / den } else { snum / sden };
        }
    });
    ErpImage::from_vec(gw, gh, 1, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn noise(w: usize, h: usize, c: usize, seed: u64) -> ErpImage {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ErpImage::from_fn(w, h, c, |_, _, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        })
    }

    #[test]
    fn zero_sigma_is_identity() {
        let img = noise(8, 4, 3, 1);
        assert_eq!(gaussian_blur(&img, 0.0), img);
    }

    #[test]
    fn blur_keeps_constants() {
        let img = ErpImage::filled(16, 8, 3, 0.3);
        assert_eq!(gaussian_blur(&img, 2.7), img);
    }

    #[test]
    fn impulse_response_matches_discrete_gaussian() {
        // Independent oracle: unnormalized taps e^{-i^2/2}, i in -3..=3.
        let sum: f64 = (-3..=3).map(|i: i32| (-(i * i) as f64 / 2.0).exp()).sum();
        let centre = (1.0 / sum).powi(2);
        assert_abs_diff_eq!(centre, 0.1592, epsilon = 1e-4);
        let mut img = ErpImage::new(21, 21, 1);
        img.set(10, 10, 0, 1.0);
        let out = gaussian_blur(&img, 1.0);
        assert_abs_diff_eq!(out.get(10, 10, 0), centre, epsilon = 1e-15);
        let side = (-0.5f64).exp() / sum / sum;
        assert_abs_diff_eq!(out.get(11, 10, 0), side, epsilon = 1e-15);
        let total: f64 = out.data().iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn blur_wraps_horizontally() {
        let mut img = ErpImage::new(16, 9, 1);
        img.set(0, 4, 0, 1.0);
        let out = gaussian_blur(&img, 1.0);
        assert_abs_diff_eq!(out.get(15, 4, 0), out.get(1, 4, 0), epsilon = 1e-15);
        assert!(out.get(15, 4, 0) > 0.0);
    }

    #[test]
    fn downsample_constant_is_exact() {
        let img = ErpImage::filled(64, 32, 3, 0.1);
        let out = antialiased_downsample(&img, 16, 8).unwrap();
        assert_eq!(out, ErpImage::filled(16, 8, 3, 0.1));
        let same = antialiased_downsample(&img, 64, 32).unwrap();
        assert_eq!(same, img);
    }

    #[test]
    fn checkerboard_reduces_to_mid_gray() {
        let img = ErpImage::from_fn(2, 2, 1, |x, y, _| ((x + y) % 2) as f64);
        let out = box_reduce(&img, 1, 1).unwrap();
        assert_abs_diff_eq!(out.get(0, 0, 0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn downsample_rejects_fractional_ratio() {
        let img = ErpImage::new(10, 5, 1);
        assert!(antialiased_downsample(&img, 4, 2).is_err());
        assert!(antialiased_downsample(&img, 20, 10).is_err());
    }

    #[test]
    fn jbu_constant_low_gives_constant() {
        let low = ErpImage::filled(8, 4, 1, 0.7);
        let guide = noise(32, 16, 3, 5);
        let out = jbu_upsample(&low, &guide, JbuParams::default()).unwrap();
        for v in out.data() {
            assert_abs_diff_eq!(*v, 0.7, epsilon = 1e-12);
        }
    }

    #[test]
    fn jbu_constant_guide_is_gaussian_upsampling() {
        let low = noise(6, 4, 1, 9);
        let guide = ErpImage::filled(24, 16, 3, 0.5);
        let p = JbuParams::default();
        let out = jbu_upsample(&low, &guide, p).unwrap();
        // Direct spatial-only evaluation for one pixel.
        let (x, y) = (13usize, 6usize);
        let px = (x as f64 + 0.5) / 4.0 - 0.5;
        let py = (y as f64 + 0.5) / 4.0 - 0.5;
        let (cx, cy) = (px.round() as isize, py.round() as isize);
        let (mut num, mut den) = (0.0, 0.0);
        for qy in (cy - 2).max(0)..=(cy + 2).min(3) {
            for qx in cx - 2..=cx + 2 {
                let w = (-((px - qx as f64).powi(2) + (py - qy as f64).powi(2)) / 2.0).exp();
                num += w * low.get(qx.rem_euclid(6) as usize, qy as usize, 0);
                den += w;
            }
        }
        assert_abs_diff_eq!(out.get(x, y, 0), num / den, epsilon = 1e-12);
    }

    #[test]
    fn jbu_respects_guide_edges() {
        // Low-res step between columns 7 and 8 of 16; guide step at the
        // matching high-res boundary (column 32 of 64).
        let low = ErpImage::from_fn(16, 8, 1, |x, _, _| if x < 8 { 0.0 } else { 1.0 });
        let guide =
            ErpImage::from_fn(64, 32, 3, |x, _, _| if x < 32 { 0.25 } else { 0.75 });
        let p = JbuParams {
            spatial_sigma: 1.0,
            range_sigma: 0.05,
            radius: 2,
        };
        let out = jbu_upsample(&low, &guide, p).unwrap();
        // Cross-edge terms carry a range factor of exp(-0.5 * 3 * (0.5 / 0.05)^2).
        let suppression = 1e-9;
        for y in 0..32 {
            for x in 20..44 {
                let v = out.get(x, y, 0);
                if x < 31 {
                    assert!(v <= suppression, "x={x} v={v}");
                } else if x > 32 {
                    assert!(v >= 1.0 - suppression, "x={x} v={v}");
                }
            }
        }
        // Plain bilinear upsampling smears the same step over several pixels.
        let plain = upsample_bilinear(&low, 64, 32);
        assert!(plain.get(30, 5, 0) > 0.1 || plain.get(33, 5, 0) < 0.9);
    }

    #[test]
    fn jbu_rejects_bad_shapes() {
        let low = ErpImage::new(8, 4, 1);
        assert!(jbu_upsample(&low, &ErpImage::new(20, 10, 3), JbuParams::default()).is_err());
        assert!(jbu_upsample(&ErpImage::new(8, 4, 2), &ErpImage::new(16, 8, 3), JbuParams::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn blur_preserves_range(seed in 0u64..1000, sigma in 0.3f64..4.0) {
            let img = noise(12, 6, 2, seed);
            let (lo, hi) = img.min_max();
            let (a, b) = gaussian_blur(&img, sigma).min_max();
            prop_assert!(a >= lo - 1e-12 && b <= hi + 1e-12);
        }

        #[test]
        fn jbu_stays_within_window(seed in 0u64..1000) {
            let low = noise(8, 4, 1, seed);
            let guide = noise(16, 8, 3, seed + 1);
            let (lo, hi) = low.min_max();
            let out = jbu_upsample(&low, &guide, JbuParams::default()).unwrap();
            let (a, b) = out.min_max();
            prop_assert!(a >= lo - 1e-12 && b <= hi + 1e-12);
        }
    }
}

//! Image quality and temporal consistency measures.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_arg, Result};
use crate::fit::{loss_erp_l2, loss_l2};
use crate::imaging::{gaussian_blur, ErpImage};

/// Reported for identical images.
pub const PSNR_CAP: f64 = 99.0;

/// Blur used by the frame-to-frame measures, in pixels.
pub const F2F_SIGMA: f64 = 11.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        PSNR_CAP
    } else {
        (10.0 * (1.0 / mse).log10()).min(PSNR_CAP)
    }
}

/// Peak signal-to-noise ratio in dB for unit-range images.
pub fn psnr(a: &ErpImage, b: &ErpImage) -> Result<f64> {
    Ok(psnr_from_mse(loss_l2(a, b)?))
}

/// PSNR with each pixel weighted by its solid angle.
pub fn psnr_spherical(a: &ErpImage, b: &ErpImage) -> Result<f64> {
    Ok(psnr_from_mse(loss_erp_l2(a, b)?))
}

fn luma(img: &ErpImage) -> Vec<f64> {
    let c = img.channels();
    img.data()
        .chunks_exact(c)
        .map(|p| if c >= 3 { 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2] } else { p[0] })
        .collect()
}

/// Valid-region separable filter of a `w x h` plane.
fn filter_valid(plane: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let (ow, oh) = (w + 1 - n, h + 1 - n);
    let mut tmp = vec![0.0; ow * h];
    tmp.par_chunks_mut(ow).enumerate().for_each(|(y, row)| {
        let src = &plane[y * w..(y + 1) * w];
        for (x, o) in row.iter_mut().enumerate() {
            *o = k.iter().zip(&src[x..x + n]).map(|(a, b)| a * b).sum();
        }
    });
    let mut out = vec![0.0; ow * oh];
    out.par_chunks_mut(ow).enumerate().for_each(|(y, row)| {
        for (x, o) in row.iter_mut().enumerate() {
            *o = k.iter().enumerate().map(|(j, kv)| kv * tmp[(y + j) * ow + x]).sum();
        }
    });
    out
}

/// Mean structural similarity of the luma of `a` and `b` over all
/// positions where the Gaussian window fits.
pub fn ssim(a: &ErpImage, b: &ErpImage) -> Result<f64> {
    ensure_arg!(
        a.same_shape(b),
        "image shapes differ: {:?} vs {:?}",
        a.dims(),
        b.dims()
    );
    let (w, h) = a.dims();
    ensure_arg!(
        w >= SSIM_WINDOW && h >= SSIM_WINDOW,
        "images of {w}x{h} are smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
    );
    let half = (SSIM_WINDOW / 2) as f64;
    let mut k: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| (-(i as f64 - half).powi(2) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);

    let (x, y) = (luma(a), luma(b));
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
    let [mx, my, sxx, syy, sxy] = [&x, &y, &xx, &yy, &xy].map(|p| filter_valid(p, w, h, &k));

    let c1 = (SSIM_K1 * 1.0).powi(2);
    let c2 = (SSIM_K2 * 1.0).powi(2);
    let sum: f64 = (0..mx.len())
        .map(|i| {
            let (ma, mb) = (mx[i], my[i]);
            let va = sxx[i] - ma * ma;
            let vb = syy[i] - mb * mb;
            let cov = sxy[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    Ok(sum / mx.len() as f64)
}

/// Mean absolute difference between consecutive frames after a Gaussian
/// blur of `sigma` pixels.
pub fn f2f_metric(frames: &[ErpImage], sigma: f64) -> Result<f64> {
    ensure_arg!(frames.len() >= 2, "need at least two frames, got {}", frames.len());
    for (i, f) in frames.iter().enumerate() {
        ensure_arg!(f.same_shape(&frames[0]), "frame {i} differs in shape from frame 0");
    }
    let blurred: Vec<ErpImage> = frames.iter().map(|f| gaussian_blur(f, sigma)).collect();
    let per_pair: Vec<f64> = blurred
        .windows(2)
        .map(|p| {
            let d = p[0].data();
            d.iter().zip(p[1].data()).map(|(a, b)| (a - b).abs()).sum::<f64>() / d.len() as f64
        })
        .collect();
    Ok(per_pair.iter().sum::<f64>() / per_pair.len() as f64)
}

/// Quality of one rendered image against its reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMetrics {
    pub name: String,
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    /// Mean over pairs.
    pub psnr: f64,
    pub ssim: f64,
    /// Frame-to-frame difference of the rendered sequence, unit intensity
    /// scale.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f2f_rgb: Option<f64>,
    /// Frame-to-frame difference of depth maps, metres.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f2f_depth: Option<f64>,
    pub pairs: Vec<PairMetrics>,
}

impl MetricReport {
    /// Scores named `(rendered, reference)` pairs.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (String, &'a ErpImage, &'a ErpImage)>) -> Result<Self> {
        let pairs = pairs
            .into_iter()
            .map(|(name, a, b)| {
                Ok(PairMetrics {
                    name,
                    psnr: psnr(a, b)?,
                    ssim: ssim(a, b)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ensure_arg!(!pairs.is_empty(), "nothing to evaluate");
        let n = pairs.len() as f64;
        Ok(MetricReport {
            psnr: pairs.iter().map(|p| p.psnr).sum::<f64>() / n,
            ssim: pairs.iter().map(|p| p.ssim).sum::<f64>() / n,
            f2f_rgb: None,
            f2f_depth: None,
            pairs,
        })
    }

    /// Fixed-order plain-text table.
    pub fn to_table(&self) -> String {
        let mut s = format!("{:<32} {:>9} {:>7}\n", "image", "psnr_db", "ssim");
        for p in &self.pairs {
            s.push_str(&format!("{:<32} {:>9.3} {:>7.4}\n", p.name, p.psnr, p.ssim));
        }
        s.push_str(&format!("{:<32} {:>9.3} {:>7.4}\n", "mean", self.psnr, self.ssim));
        if let Some(v) = self.f2f_rgb {
            s.push_str(&format!("f2f_rgb   {v:.6}\n"));
        }
        if let Some(v) = self.f2f_depth {
            s.push_str(&format!("f2f_depth {v:.6}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pattern(w: usize, h: usize) -> ErpImage {
        ErpImage::from_fn(w, h, 3, |x, y, c| {
            0.5 + 0.3 * ((x as f64 * 0.7 + c as f64).sin() * (y as f64 * 0.4).cos())
        })
    }

    #[test]
    fn psnr_definition() {
        let a = ErpImage::filled(8, 4, 3, 0.4);
        assert_eq!(psnr(&a, &a).unwrap(), PSNR_CAP);
        let b = ErpImage::filled(8, 4, 3, 0.5);
        assert_abs_diff_eq!(psnr(&a, &b).unwrap(), 20.0, epsilon = 1e-9);
        let d = 0.001f64.sqrt();
        let c = ErpImage::filled(8, 4, 3, 0.4 + d);
        assert_abs_diff_eq!(psnr(&a, &c).unwrap(), 30.0, epsilon = 1e-9);
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
        assert_abs_diff_eq!(psnr_spherical(&a, &b).unwrap(), 20.0, epsilon = 1e-9);
    }

    #[test]
    fn ssim_of_identical_images_is_one() {
        let a = pattern(32, 16);
        assert_abs_diff_eq!(ssim(&a, &a).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ssim_of_inverted_image_is_negative() {
        let a = pattern(32, 16);
        let inv = ErpImage::from_fn(32, 16, 3, |x, y, c| 1.0 - a.get(x, y, c));
        assert!(ssim(&a, &inv).unwrap() < 0.0);
    }

    #[test]
    fn ssim_of_constants_is_the_luminance_term() {
        let (ma, mb) = (0.3, 0.4);
        let a = ErpImage::filled(16, 16, 3, ma);
        let b = ErpImage::filled(16, 16, 3, mb);
        let c1 = 0.0001;
        let expected = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
        assert_abs_diff_eq!(ssim(&a, &b).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn ssim_rejects_small_images() {
        let a = pattern(10, 10);
        assert!(ssim(&a, &a).is_err());
    }

    #[test]
    fn f2f_of_identical_frames_is_zero() {
        let a = pattern(16, 8);
        assert_eq!(f2f_metric(&[a.clone(), a.clone(), a], F2F_SIGMA).unwrap(), 0.0);
    }

    #[test]
    fn f2f_of_alternating_constants_is_the_step() {
        let d = 0.2;
        let frames: Vec<ErpImage> = (0..4).map(|i| ErpImage::filled(16, 8, 1, if i % 2 == 0 { 0.0 } else { d })).collect();
        assert_abs_diff_eq!(f2f_metric(&frames, F2F_SIGMA).unwrap(), d, epsilon = 1e-12);
    }

    #[test]
    fn f2f_suppresses_pixel_flicker() {
        let d = 0.1;
        let frames: Vec<ErpImage> = (0..3)
            .map(|i| {
                ErpImage::from_fn(64, 32, 1, |x, y, _| {
                    let s = if (x + y + i) % 2 == 0 { 1.0 } else { -1.0 };
                    0.5 + s * d
                })
            })
            .collect();
        let v = f2f_metric(&frames, F2F_SIGMA).unwrap();
        assert!(v < 0.01 * d, "flicker survived the blur: {v}");
    }

    #[test]
    fn f2f_ignores_shared_offsets() {
        let frames: Vec<ErpImage> = (0..3).map(|i| pattern(16, 8).channel(i % 3)).collect();
        let shifted: Vec<ErpImage> = frames
            .iter()
            .map(|f| ErpImage::from_fn(16, 8, 1, |x, y, _| f.get(x, y, 0) * 0.5 + 0.25))
            .collect();
        let halved: Vec<ErpImage> = frames
            .iter()
            .map(|f| ErpImage::from_fn(16, 8, 1, |x, y, _| f.get(x, y, 0) * 0.5))
            .collect();
        assert_abs_diff_eq!(
            f2f_metric(&shifted, F2F_SIGMA).unwrap(),
            f2f_metric(&halved, F2F_SIGMA).unwrap(),
            epsilon = 1e-12
        );
        assert!(f2f_metric(&[pattern(16, 8)], F2F_SIGMA).is_err());
    }

    #[test]
    fn report_table_lists_pairs_in_order() {
        let a = pattern(16, 16);
        let b = ErpImage::from_fn(16, 16, 3, |x, y, c| (a.get(x, y, c) + 0.1).min(1.0));
        let r = MetricReport::from_pairs([("x.png".to_string(), &a, &a), ("y.png".to_string(), &a, &b)]).unwrap();
        assert_eq!(r.pairs[0].psnr, PSNR_CAP);
        let t = r.to_table();
        assert!(t.find("x.png").unwrap() < t.find("y.png").unwrap());
    }
}

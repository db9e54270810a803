//! Equirectangular image container, sub-pixel sampling, filtering and I/O.

mod filter;
mod io;

pub use filter::{
    antialiased_downsample, box_reduce, gaussian_blur, gaussian_kernel, jbu_upsample,
    upsample_bilinear, JbuParams,
};
pub use io::{read_image, read_raw, write_image, write_png, write_raw, RAW_MAGIC};

use crate::error::{ensure_arg, Result};

/// Row-major grid of samples with interleaved channels.
///
/// Rows run from the top (elevation +pi/2) to the bottom, columns from
/// azimuth -pi to +pi, so the grid always spans the full sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct ErpImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ErpImage {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self::filled(width, height, channels, 0.0)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        assert!(
            width > 0 && height > 0 && (1..=4).contains(&channels),
            "invalid image shape {width}x{height}x{channels}"
        );
        ErpImage {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        }
    }

    /// Wraps interleaved data, rejecting bad shapes and non-finite samples.
    pub fn from_vec(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        ensure_arg!(
            width > 0 && height > 0 && (1..=4).contains(&channels),
            "invalid image shape {width}x{height}x{channels}"
        );
        ensure_arg!(
            data.len() == width * height * channels,
            "expected {} samples, got {}",
            width * height * channels,
            data.len()
        );
        ensure_arg!(
            data.iter().all(|v| v.is_finite()),
            "image contains non-finite samples"
        );
        Ok(ErpImage {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut img = Self::new(width, height, channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    img.data[(y * width + x) * channels + c] = f(x, y, c);
                }
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    /// Copies one channel into a new single-channel image.
    pub fn channel(&self, c: usize) -> ErpImage {
        assert!(c < self.channels);
        let data = self.data.iter().skip(c).step_by(self.channels).copied().collect();
        ErpImage {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }

    /// Keeps the first `n` channels.
    pub fn take_channels(&self, n: usize) -> ErpImage {
        assert!(n >= 1 && n <= self.channels);
        let data = self
            .data
            .chunks_exact(self.channels)
            .flat_map(|p| p[..n].iter().copied())
            .collect();
        ErpImage {
            width: self.width,
            height: self.height,
            channels: n,
            data,
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn same_shape(&self, other: &ErpImage) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Bilinear sample at a continuous pixel coordinate (integer = texel centre).
    pub fn bilinear_sample(&self, x: f64, y: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.channels];
        self.bilinear_sample_into(x, y, &mut out);
        out
    }

    #[inline]
    pub fn bilinear_sample_into(&self, x: f64, y: f64, out: &mut [f64]) {
        let taps = BilinearTaps::new(x, y, self.width, self.height);
        let c = self.channels;
        for (ch, o) in out.iter_mut().enumerate().take(c) {
            *o = taps.apply(|i| self.data[i * c + ch]);
        }
    }
}

/// The four texels and weights a bilinear lookup touches.
///
/// Columns wrap around (azimuth is periodic) and rows clamp to the first and
/// last row centres. Fractions within `SNAP` of a texel centre snap to it so
/// that lookups landing on centres reproduce texels exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearTaps {
    /// Flat pixel indices: (x0,y0), (x1,y0), (x0,y1), (x1,y1).
    pub index: [u32; 4],
    pub fx: f64,
    pub fy: f64,
}

impl BilinearTaps {
    const SNAP: f64 = 1e-9;

    #[inline]
    pub fn new(x: f64, y: f64, width: usize, height: usize) -> Self {
        let (w, h) = (width as isize, height as isize);
        let mut x0 = x.floor();
        let mut fx = x - x0;
        if fx < Self::SNAP {
            fx = 0.0;
        } else if fx > 1.0 - Self::SNAP {
            fx = 0.0;
            x0 += 1.0;
        }
        let x0 = (x0 as isize).rem_euclid(w);
        let x1 = (x0 + 1) % w;

        let yc = y.clamp(0.0, (height - 1) as f64);
        let mut y0 = yc.floor();
        let mut fy = yc - y0;
        if fy < Self::SNAP {
            fy = 0.0;
        } else if fy > 1.0 - Self::SNAP {
            fy = 0.0;
            y0 += 1.0;
        }
        let y0 = (y0 as isize).min(h - 1);
        let y1 = (y0 + 1).min(h - 1);

        let idx = |xx: isize, yy: isize| (yy * w + xx) as u32;
        BilinearTaps {
            index: [idx(x0, y0), idx(x1, y0), idx(x0, y1), idx(x1, y1)],
            fx,
            fy,
        }
    }

    #[inline]
    pub fn weights(&self) -> [f64; 4] {
        let (fx, fy) = (self.fx, self.fy);
        [
            (1.0 - fx) * (1.0 - fy),
            fx * (1.0 - fy),
            (1.0 - fx) * fy,
            fx * fy,
        ]
    }

    /// Interpolates a per-pixel quantity fetched by flat index.
    #[inline]
    pub fn apply(&self, fetch: impl Fn(usize) -> f64) -> f64 {
        let [a, b, c, d] = self.index.map(|i| fetch(i as usize));
        let top = if self.fx == 0.0 { a } else { a + self.fx * (b - a) };
        if self.fy == 0.0 {
            return top;
        }
        let bottom = if self.fx == 0.0 { c } else { c + self.fx * (d - c) };
        top + self.fy * (bottom - top)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ramp() -> ErpImage {
        ErpImage::from_fn(5, 4, 2, |x, y, c| (x + 10 * y) as f64 * 0.01 + c as f64 * 0.5)
    }

    #[test]
    fn exact_at_texel_centres() {
        let img = ramp();
        for y in 0..4 {
            for x in 0..5 {
                assert_eq!(img.bilinear_sample(x as f64, y as f64), img.pixel(x, y));
            }
        }
    }

    #[test]
    fn horizontal_midpoint_is_mean() {
        let img = ramp();
        let v = img.bilinear_sample(1.5, 2.0);
        assert_abs_diff_eq!(v[0], 0.5 * (img.get(1, 2, 0) + img.get(2, 2, 0)), epsilon = 1e-15);
    }

    #[test]
    fn horizontal_wrap_blends_last_and_first_columns() {
        let img = ErpImage::from_vec(2, 1, 1, vec![0.2, 0.6]).unwrap();
        // x = 1.8 lies 0.8 of the way from column 1 to column 0 (wrapped).
        let v = img.bilinear_sample(1.8, 0.0)[0];
        assert_abs_diff_eq!(v, 0.6 + 0.8 * (0.2 - 0.6), epsilon = 1e-15);
        let v = img.bilinear_sample(-0.5, 0.0)[0];
        assert_abs_diff_eq!(v, 0.4, epsilon = 1e-15);
    }

    #[test]
    fn vertical_clamps() {
        let img = ramp();
        assert_eq!(img.bilinear_sample(2.0, -3.0), img.pixel(2, 0));
        assert_eq!(img.bilinear_sample(2.0, 9.0), img.pixel(2, 3));
    }

    #[test]
    fn from_vec_rejects_bad_input() {
        assert!(ErpImage::from_vec(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(ErpImage::from_vec(1, 1, 1, vec![f64::NAN]).is_err());
        assert!(ErpImage::from_vec(1, 1, 5, vec![0.0; 5]).is_err());
    }

    proptest! {
        #[test]
        fn sampling_is_continuous(x in -10.0f64..10.0, y in -2.0f64..6.0) {
            let img = ramp();
            let a = img.bilinear_sample(x, y);
            let b = img.bilinear_sample(x + 1e-7, y + 1e-7);
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - v).abs() < 1e-5);
            }
        }

        #[test]
        fn sampling_stays_in_range(x in -10.0f64..10.0, y in -2.0f64..6.0) {
            let img = ramp();
            let (lo, hi) = img.min_max();
            for v in img.bilinear_sample(x, y) {
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }
}

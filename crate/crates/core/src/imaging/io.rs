use std::fs;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, LumaA, Rgb, Rgba};

use super::ErpImage;
use crate::error::{Error, Result};

pub const RAW_MAGIC: &[u8; 4] = b"ERPF";

/// Reads a `.png` (8/16-bit) or `.erpf` raw float image.
pub fn read_image(path: impl AsRef<Path>) -> Result<ErpImage> {
    let path = path.as_ref();
    match extension(path).as_deref() {
        Some("png") => read_png(path),
        Some("erpf") => read_raw(path),
        _ => Err(Error::format(path, "unsupported image format (expected .png or .erpf)")),
    }
}

/// Writes by extension; PNG quantizes to 8 bits, `.erpf` stores 32-bit floats.
pub fn write_image(path: impl AsRef<Path>, img: &ErpImage) -> Result<()> {
    let path = path.as_ref();
    match extension(path).as_deref() {
        Some("png") => write_png(path, img),
        Some("erpf") => write_raw(path, img),
        _ => Err(Error::format(path, "unsupported image format (expected .png or .erpf)")),
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn write_png(path: impl AsRef<Path>, img: &ErpImage) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let bytes: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    let dynamic = match img.channels() {
        1 => DynamicImage::ImageLuma8(ImageBuffer::<Luma<u8>, _>::from_raw(w, h, bytes).unwrap()),
        2 => DynamicImage::ImageLumaA8(ImageBuffer::<LumaA<u8>, _>::from_raw(w, h, bytes).unwrap()),
        3 => DynamicImage::ImageRgb8(ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, bytes).unwrap()),
        _ => DynamicImage::ImageRgba8(ImageBuffer::<Rgba<u8>, _>::from_raw(w, h, bytes).unwrap()),
    };
    dynamic
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::format(path, other.to_string()),
        })
}

fn read_png(path: &Path) -> Result<ErpImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let decoded = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png)
        .map_err(|e| Error::format(path, format!("cannot decode PNG: {e}")))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let channels = decoded.color().channel_count() as usize;
    let raw: Vec<u8> = match channels {
        1 => decoded.into_luma8().into_raw(),
        2 => decoded.into_luma_alpha8().into_raw(),
        3 => decoded.into_rgb8().into_raw(),
        _ => decoded.into_rgba8().into_raw(),
    };
    let data = raw.into_iter().map(|b| b as f64 / 255.0).collect();
    ErpImage::from_vec(w, h, channels.min(4), data)
        .map_err(|e| Error::format(path, e.to_string()))
}

/// Raw container: magic, little-endian u32 width/height/channels, then
/// planar channel-major 32-bit floats.
pub fn write_raw(path: impl AsRef<Path>, img: &ErpImage) -> Result<()> {
    let path = path.as_ref();
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let mut buf = Vec::with_capacity(16 + 4 * w * h * c);
    buf.extend_from_slice(RAW_MAGIC);
    for v in [w, h, c] {
        buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for ch in 0..c {
        for px in img.data().chunks_exact(c) {
            buf.extend_from_slice(&(px[ch] as f32).to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_raw(path: impl AsRef<Path>) -> Result<ErpImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_raw(&bytes).map_err(|m| Error::format(path, m))
}

fn decode_raw(bytes: &[u8]) -> std::result::Result<ErpImage, String> {
    if bytes.len() < 16 {
        return Err("truncated raw image header".into());
    }
    if &bytes[..4] != RAW_MAGIC {
        return Err("bad magic (expected ERPF)".into());
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let (w, h, c) = (word(0), word(1), word(2));
    if w == 0 || h == 0 || !(1..=4).contains(&c) {
        return Err(format!("invalid raw image shape {w}x{h}x{c}"));
    }
    let n = w
        .checked_mul(h)
        .and_then(|v| v.checked_mul(c))
        .ok_or("raw image shape overflows")?;
    if bytes.len() != 16 + 4 * n {
        return Err(format!(
            "raw image payload is {} bytes, expected {}",
            bytes.len() - 16,
            4 * n
        ));
    }
    let payload = &bytes[16..];
    let mut data = vec![0.0; n];
    for ch in 0..c {
        for p in 0..w * h {
            let off = 4 * (ch * w * h + p);
            data[p * c + ch] = f32::from_le_bytes(payload[off..off + 4].try_into().unwrap()) as f64;
        }
    }
    ErpImage::from_vec(w, h, c, data).map_err(|e| e.to_string())
}

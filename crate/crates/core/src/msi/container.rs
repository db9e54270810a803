use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Msi;
use crate::error::{Error, Result};
use crate::imaging::{write_png, ErpImage};

pub const MSI_MAGIC: &[u8; 4] = b"MSI1";
const VERSION: u16 = 1;
const MODE_RGBA: u8 = 1;
const MODE_RGBA_BETA: u8 = 2;
const HEADER_LEN: usize = 4 + 2 + 1 + 12;

/// Frame tag written alongside exported layers.
pub const AXIS_CONVENTION: &str = "x-forward,z-left,y-down";

/// Writes the binary container. Layer samples are stored as 32-bit floats;
/// mode 2 appends the blend weight as a fifth channel.
pub fn write_msi(path: impl AsRef<Path>, msi: &Msi) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = msi.dims();
    let n = msi.n_layers();
    let mode = if msi.beta().is_some() { MODE_RGBA_BETA } else { MODE_RGBA };
    let channels = if mode == MODE_RGBA { 4 } else { 5 };
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * n + 4 * n * channels * w * h);
    buf.extend_from_slice(MSI_MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(mode);
    for v in [w, h, n] {
        buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for r in msi.radii() {
        buf.extend_from_slice(&r.to_le_bytes());
    }
    for (i, layer) in msi.layers().iter().enumerate() {
        for ch in 0..4 {
            for px in layer.data().chunks_exact(4) {
                buf.extend_from_slice(&(px[ch] as f32).to_le_bytes());
            }
        }
        if let Some(beta) = msi.beta() {
            for &b in beta[i].data() {
                buf.extend_from_slice(&(b as f32).to_le_bytes());
            }
        }
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_msi(path: impl AsRef<Path>) -> Result<Msi> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|m| Error::format(path, m))
}

fn decode(bytes: &[u8]) -> std::result::Result<Msi, String> {
    if bytes.len() < 4 || &bytes[..4] != MSI_MAGIC {
        return Err("bad magic (expected MSI1)".into());
    }
    if bytes.len() < HEADER_LEN {
        return Err("truncated MSI header".into());
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(format!("unsupported MSI version {version}"));
    }
    let mode = bytes[6];
    let channels = match mode {
        MODE_RGBA => 4,
        MODE_RGBA_BETA => 5,
        other => return Err(format!("unknown MSI mode {other}")),
    };
    let word = |i: usize| u32::from_le_bytes(bytes[7 + 4 * i..11 + 4 * i].try_into().unwrap()) as usize;
    let (w, h, n) = (word(0), word(1), word(2));
    if w == 0 || h == 0 || n == 0 {
        return Err(format!("invalid MSI shape {w}x{h}x{n}"));
    }
    let plane = w.checked_mul(h).ok_or("MSI shape overflows")?;
    let expected = n
        .checked_mul(8 + 4 * channels * plane)
        .and_then(|v| v.checked_add(HEADER_LEN))
        .ok_or("MSI shape overflows")?;
    if bytes.len() != expected {
        return Err(format!("MSI file is {} bytes, expected {expected}", bytes.len()));
    }
    let mut off = HEADER_LEN;
    let mut radii = Vec::with_capacity(n);
    for _ in 0..n {
        radii.push(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()));
        off += 8;
    }
    let mut next_plane = || {
        let vals: Vec<f64> = bytes[off..off + 4 * plane]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect();
        off += 4 * plane;
        vals
    };
    let mut layers = Vec::with_capacity(n);
    let mut betas = Vec::new();
    for _ in 0..n {
        let planes: Vec<Vec<f64>> = (0..4).map(|_| next_plane()).collect();
        let mut data = vec![0.0; plane * 4];
        for (ch, p) in planes.iter().enumerate() {
            for (i, v) in p.iter().enumerate() {
                data[i * 4 + ch] = *v;
            }
        }
        layers.push(ErpImage::from_vec(w, h, 4, data).map_err(|e| e.to_string())?);
        if channels == 5 {
            betas.push(ErpImage::from_vec(w, h, 1, next_plane()).map_err(|e| e.to_string())?);
        }
    }
    let beta = (channels == 5).then_some(betas);
    Msi::new(radii, layers, beta).map_err(|e| e.to_string())
}

/// Metadata consumed by the browser viewer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WebMetadata {
    pub width: usize,
    pub height: usize,
    pub layers: usize,
    pub radii: Vec<f64>,
    pub axis_convention: String,
    pub straight_alpha: bool,
    pub files: Vec<String>,
}

/// Writes `metadata.json` plus one 8-bit RGBA PNG per layer into `dir`.
pub fn export_web(msi: &Msi, dir: impl AsRef<Path>) -> Result<WebMetadata> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (width, height) = msi.dims();
    let mut files = Vec::with_capacity(msi.n_layers());
    for (i, layer) in msi.layers().iter().enumerate() {
        let name = format!("layer_{i:03}.png");
        write_png(dir.join(&name), layer)?;
        files.push(name);
    }
    let meta = WebMetadata {
        width,
        height,
        layers: msi.n_layers(),
        radii: msi.radii().to_vec(),
        axis_convention: AXIS_CONVENTION.to_owned(),
        straight_alpha: true,
        files,
    };
    let path = dir.join("metadata.json");
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(meta)
}

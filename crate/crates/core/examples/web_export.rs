//! Writes an MSI container, reads it back and exports it for the browser
//! viewer.

use msi_forge::imaging::ErpImage;
use msi_forge::msi::{export_web, layer_radii, read_msi, write_msi, Msi};

fn main() -> msi_forge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("msi-forge-web"));
    std::fs::create_dir_all(&out).ok();
    let radii = layer_radii(8, 1.0, 100.0)?;
    let layers = (0..radii.len())
        .map(|k| {
            ErpImage::from_fn(64, 32, 4, move |x, y, c| match c {
                3 => if (x + y + k) % 5 == 0 { 0.9 } else { 0.05 },
                _ => ((x * (c + 1) + k * 7) % 64) as f64 / 63.0,
            })
        })
        .collect();
    let msi = Msi::new(radii, layers, None)?;
    let path = out.join("demo.msi");
    write_msi(&path, &msi)?;
    let back = read_msi(&path)?;
    let meta = export_web(&back, out.join("web"))?;
    println!("{} layers, radii {:.2?}", meta.layers, meta.radii);
    println!("axis convention: {}", meta.axis_convention);
    println!("viewer bundle in {}", out.join("web").display());
    Ok(())
}

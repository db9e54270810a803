//! Hand-builds a two-layer MSI, composites it from a few viewpoints and
//! checks the opacity bookkeeping of a single ray.

use msi_forge::geometry::{Pose, Vec3};
use msi_forge::imaging::{write_image, ErpImage};
use msi_forge::msi::{composite_ray, expected_depth, render, Msi, Projection, RenderOptions};

fn main() -> msi_forge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("msi-forge-render"));
    std::fs::create_dir_all(&out).ok();

    let c = composite_ray(&[[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]], &[0.25, 0.8]);
    println!("color {:?} transmittance {}", c.color, c.transmittance);

    let (w, h) = (256, 128);
    // A checkered near shell with holes in front of an opaque striped far shell.
    let near = ErpImage::from_fn(w, h, 4, |x, y, ch| {
        let on = (x / 16 + y / 16) % 2 == 0;
        match ch {
            3 => if on { 1.0 } else { 0.0 },
            1 => 0.8,
            _ => 0.2,
        }
    });
    let far = ErpImage::from_fn(w, h, 4, |x, _, ch| match ch {
        3 => 1.0,
        0 => if (x / 8) % 2 == 0 { 0.9 } else { 0.1 },
        _ => 0.3,
    });
    let msi = Msi::new(vec![1.5, 10.0], vec![near, far], None)?;
    let proj = Projection::erp(w, h);
    for (i, t) in [[0.0, 0.0, 0.0], [0.3, 0.0, 0.0], [0.0, 0.0, 0.3]].iter().enumerate() {
        let pose = Pose::from_translation(Vec3::from(*t));
        let img = render(&msi, &pose, &proj, RenderOptions::default())?;
        write_image(out.join(format!("view_{i}.png")), &img)?;
        let depth = expected_depth(&msi, &pose, &proj, RenderOptions::default())?;
        let (lo, hi) = depth.min_max();
        println!("view {i} at {t:?}: depth range {lo:.3}..{hi:.3} m");
    }
    println!("renders written to {}", out.display());
    Ok(())
}

//! Renders a fitted low-resolution MSI at four times its resolution, once
//! by plain upsampled compositing and once re-textured from a
//! full-resolution ODS pair with joint bilateral opacity upsampling.

use msi_forge::fit::{fit_frame, FitConfig, FitTarget};
use msi_forge::geometry::{Eye, Pose, Vec3, ViewingCircle};
use msi_forge::imaging::{antialiased_downsample, write_image, JbuParams};
use msi_forge::metrics::psnr;
use msi_forge::msi::{layer_radii, render, render_hires, OdsPair, Projection, RenderOptions};
use msi_forge::sweep::transformed_sweep_pair;
use msi_forge::synth::{bundled_scene, render_view};

fn main() -> msi_forge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("msi-forge-hires"));
    std::fs::create_dir_all(&out).ok();
    let scene = bundled_scene("three-depth-shells").expect("bundled");
    let (w, h) = (128, 64);
    let circle = ViewingCircle::default();
    let id = Pose::identity();

    // Full-resolution inputs; the fit sees them box-filtered down.
    let (left, _) = render_view(&scene, &id, &Projection::ods(Eye::Left, circle, 4 * w, 4 * h), 2)?;
    let (right, _) = render_view(&scene, &id, &Projection::ods(Eye::Right, circle, 4 * w, 4 * h), 2)?;
    let small_l = antialiased_downsample(&left, 2 * w, 2 * h)?;
    let small_r = antialiased_downsample(&right, 2 * w, 2 * h)?;
    let radii = layer_radii(32, 1.0, 100.0)?;
    let (sl, sr) = transformed_sweep_pair(&small_l, &small_r, circle, &radii, w, h, &id)?;
    let proj = Projection::erp(w, h);
    let targets = [[0.0, 0.0, 0.0], [0.2, 0.0, 0.1], [-0.1, 0.05, -0.2]]
        .iter()
        .map(|t| {
            let pose = Pose::from_translation(Vec3::from(*t));
            let (image, _) = render_view(&scene, &pose, &proj, 2)?;
            Ok(FitTarget { image, pose, projection: proj })
        })
        .collect::<msi_forge::Result<Vec<_>>>()?;
    let fit = fit_frame(&sl, &sr, &targets, &FitConfig { iterations: 100, ..Default::default() })?;

    let big = Projection::erp(4 * w, 4 * h);
    let (truth, _) = render_view(&scene, &id, &big, 2)?;
    let opts = RenderOptions::default();
    let plain = render(&fit.msi, &id, &big, opts)?;
    let pair = OdsPair { left: &left, right: &right, circle };
    let jbu = render_hires(&fit.msi, pair, &id, &big, Some(JbuParams::default()), opts)?;
    println!("plain {:.2} dB, hires+jbu {:.2} dB", psnr(&plain, &truth)?, psnr(&jbu, &truth)?);
    write_image(out.join("plain.png"), &plain)?;
    write_image(out.join("hires_jbu.png"), &jbu)?;
    println!("renders written to {}", out.display());
    Ok(())
}

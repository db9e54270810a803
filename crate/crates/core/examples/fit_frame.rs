//! Fits a single-frame MSI to a bundled scene and scores held-out views at
//! growing distances from the rig centre.
//!
//! ```text
//! cargo run --release --example fit_frame -- [iterations] [out_dir]
//! ```

use msi_forge::fit::{fit_frame, write_loss_csv, FitConfig, FitTarget};
use msi_forge::geometry::{Eye, Pose, Vec3, ViewingCircle};
use msi_forge::metrics::psnr;
use msi_forge::msi::{layer_radii, render, write_msi, Projection, RenderOptions};
use msi_forge::sweep::transformed_sweep_pair;
use msi_forge::synth::{bundled_scene, render_view};

fn main() -> msi_forge::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let iterations: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(100);
    let out = args
        .get(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("msi-forge-fit"));
    std::fs::create_dir_all(&out).ok();

    let scene = bundled_scene("three-depth-shells").expect("bundled");
    let (w, h) = (128, 64);
    let circle = ViewingCircle::default();
    let id = Pose::identity();
    let (left, _) = render_view(&scene, &id, &Projection::ods(Eye::Left, circle, 2 * w, 2 * h), 2)?;
    let (right, _) = render_view(&scene, &id, &Projection::ods(Eye::Right, circle, 2 * w, 2 * h), 2)?;
    let radii = layer_radii(32, 1.0, 100.0)?;
    let (sl, sr) = transformed_sweep_pair(&left, &right, circle, &radii, w, h, &id)?;

    let proj = Projection::erp(w, h);
    let offsets = [[0.3, 0.0, 0.0], [-0.2, 0.1, 0.2], [0.0, -0.1, -0.25], [0.05, 0.0, 0.05]];
    let targets = offsets
        .iter()
        .map(|t| {
            let pose = Pose::from_translation(Vec3::from(*t));
            let (image, _) = render_view(&scene, &pose, &proj, 2)?;
            Ok(FitTarget { image, pose, projection: proj })
        })
        .collect::<msi_forge::Result<Vec<_>>>()?;

    let config = FitConfig { iterations, ..Default::default() };
    let fit = fit_frame(&sl, &sr, &targets, &config)?;
    let first = fit.curve.first().expect("curve");
    let last = fit.curve.last().expect("curve");
    println!("loss {:.4e} -> {:.4e} after {iterations} iterations", first.total, last.total);
    write_msi(out.join("frame.msi"), &fit.msi)?;
    write_loss_csv(out.join("frame.loss.csv"), &fit.curve)?;

    for offset in [0.0, 0.05, 0.15, 0.3] {
        let pose = Pose::from_translation(Vec3::new(0.0, 0.0, offset));
        let (truth, _) = render_view(&scene, &pose, &proj, 2)?;
        let img = render(&fit.msi, &pose, &proj, RenderOptions::default())?;
        println!("held-out view at {offset:.2} m: {:.2} dB", psnr(&img, &truth)?);
    }
    println!("MSI written to {}", out.join("frame.msi").display());
    Ok(())
}

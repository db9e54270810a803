//! Jointly fits a short moving-rig sequence with and without the
//! transform-inverse term and compares depth flicker between frames.
//!
//! ```text
//! cargo run --release --example ti_sequence -- [iterations] [frames]
//! ```

use msi_forge::fit::{fit_sequence, FitConfig, FitTarget, SequenceFrame};
use msi_forge::geometry::{Pose, Vec3};
use msi_forge::metrics::{f2f_metric, psnr, F2F_SIGMA};
use msi_forge::msi::{expected_depth, layer_radii, render, Projection, RenderOptions};
use msi_forge::sweep::transformed_sweep_pair;
use msi_forge::synth::{bundled_scene, render_view, synthesize_frame, SynthConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> msi_forge::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let iterations: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(100);
    let n_frames: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5);

    let scene = bundled_scene("room-box-with-pillar").expect("bundled");
    let (w, h) = (128, 64);
    let synth = SynthConfig {
        width: w,
        height: h,
        ods_width: 2 * w,
        ods_height: 2 * h,
        supersample: 2,
        ..Default::default()
    };
    let radii = layer_radii(32, 1.0, 100.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut frames = Vec::new();
    let mut rigs = Vec::new();
    for k in 0..n_frames {
        let f = synthesize_frame(&scene, k, &synth, &mut rng)?;
        let (left, right) =
            transformed_sweep_pair(&f.left, &f.right, synth.viewing_circle(), &radii, w, h, &Pose::identity())?;
        let to_rig = f.rig_pose.inverse();
        let targets = f
            .targets
            .into_iter()
            .map(|t| FitTarget { image: t.image, pose: to_rig.compose(&t.pose), projection: t.projection })
            .collect();
        frames.push(SequenceFrame { left, right, targets });
        rigs.push(f.rig_pose);
    }
    let motions: Vec<Pose> = rigs.windows(2).map(|p| p[0].inverse().compose(&p[1])).collect();

    let proj = Projection::erp(w, h);
    let opts = RenderOptions::default();
    for lambda_ti in [0.0, 10.0] {
        let config = FitConfig { iterations, lambda_ti, ..Default::default() };
        let fit = fit_sequence(&frames, &motions, &config)?;
        let depths = fit
            .msis
            .iter()
            .map(|m| expected_depth(m, &Pose::identity(), &proj, opts))
            .collect::<msi_forge::Result<Vec<_>>>()?;
        let flicker = f2f_metric(&depths, F2F_SIGMA)?;
        let mut total = 0.0;
        for (msi, rig) in fit.msis.iter().zip(&rigs) {
            let pose = Pose::from_translation(Vec3::new(0.05, 0.0, 0.1));
            let (truth, _) = render_view(&scene, &rig.compose(&pose), &proj, 2)?;
            total += psnr(&render(msi, &pose, &proj, opts)?, &truth)?;
        }
        println!(
            "lambda_ti {lambda_ti:>4}: f2f-depth {flicker:.4} m, held-out PSNR {:.2} dB",
            total / fit.msis.len() as f64
        );
    }
    Ok(())
}

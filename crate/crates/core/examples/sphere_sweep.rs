//! Builds left/right sphere sweep volumes from a rendered ODS pair and
//! shows that the two eyes agree best on the layer at the true depth.

use msi_forge::geometry::{Eye, Pose, ViewingCircle};
use msi_forge::imaging::write_image;
use msi_forge::msi::{layer_radii, Projection};
use msi_forge::sweep::transformed_sweep_pair;
use msi_forge::synth::{bundled_scene, render_view};

fn main() -> msi_forge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("msi-forge-sweep"));
    std::fs::create_dir_all(&out).ok();
    let scene = bundled_scene("three-depth-shells").expect("bundled");
    let circle = ViewingCircle::default();
    let id = Pose::identity();
    let (left, _) = render_view(&scene, &id, &Projection::ods(Eye::Left, circle, 512, 256), 2)?;
    let (right, _) = render_view(&scene, &id, &Projection::ods(Eye::Right, circle, 512, 256), 2)?;
    let (_, depth) = render_view(&scene, &id, &Projection::erp(128, 64), 1)?;

    let radii = layer_radii(32, 1.0, 100.0)?;
    let (sl, sr) = transformed_sweep_pair(&left, &right, circle, &radii, 128, 64, &id)?;

    // Photo-consistency at textured pixels on the near and middle shells.
    println!("{:>10} {:>10} {:>12}", "pixel", "depth_m", "best_radius");
    let near: Vec<(usize, usize)> = (8..56)
        .step_by(6)
        .flat_map(|y| (0..128).step_by(5).map(move |x| (x, y)))
        .filter(|&(x, y)| depth.get(x, y, 0) < 20.0)
        .collect();
    for &(x, y) in near.iter().step_by(near.len().div_ceil(10).max(1)) {
        let cost = |k: usize| -> f64 {
            (0..3).map(|c| (sl.layers()[k].get(x, y, c) - sr.layers()[k].get(x, y, c)).abs()).sum()
        };
        let best = (0..radii.len()).min_by(|&a, &b| cost(a).total_cmp(&cost(b))).expect("layers");
        println!("{:>10} {:>10.3} {:>12.3}", format!("({x},{y})"), depth.get(x, y, 0), radii[best]);
    }
    for k in [0, 8, 16, 31] {
        write_image(out.join(format!("left_r{k:02}.png")), &sl.layers()[k])?;
        write_image(out.join(format!("right_r{k:02}.png")), &sr.layers()[k])?;
    }
    println!("sweep layers written to {}", out.display());
    Ok(())
}

//! Ground-truth synthesis: analytic scenes ray-cast into ERP targets and
//! ODS pairs, plus seeded dataset generation.

mod dataset;
mod scene;

pub use dataset::{
    generate_dataset, synthesize_frame, ColorFormat, DatasetManifest, FrameRecord, SynthConfig,
    SynthFrame, SynthTarget, TargetRecord, TargetRole, MANIFEST_NAME,
};
pub use scene::{raycast_scene, Enclosure, Hit, Primitive, Rgb, SceneSpec, Shape, Texture};

use rayon::prelude::*;

use crate::error::{ensure_arg, Result};
use crate::geometry::Pose;
use crate::imaging::{antialiased_downsample, ErpImage};
use crate::msi::Projection;

/// Names of the scenes shipped with the crate.
pub const BUNDLED_SCENES: [&str; 3] = ["three-depth-shells", "room-box-with-pillar", "textured-corridor"];

/// Parses one of [`BUNDLED_SCENES`].
pub fn bundled_scene(name: &str) -> Option<SceneSpec> {
    let text = match name {
        "three-depth-shells" => include_str!("../../scenes/three-depth-shells.json"),
        "room-box-with-pillar" => include_str!("../../scenes/room-box-with-pillar.json"),
        "textured-corridor" => include_str!("../../scenes/textured-corridor.json"),
        _ => return None,
    };
    Some(SceneSpec::from_json(text).expect("bundled scenes are valid"))
}

/// Renders colour (antialiased from `supersample`x rays per axis) and exact
/// per-pixel depth from the pixel-centre ray.
pub fn render_view(
    scene: &SceneSpec,
    pose: &Pose,
    proj: &Projection,
    supersample: usize,
) -> Result<(ErpImage, ErpImage)> {
    ensure_arg!(supersample >= 1, "supersample factor must be >= 1");
    proj.validate()?;
    let (w, h) = proj.dims();
    let fine = proj.scaled(supersample);
    let (fw, fh) = fine.dims();

    let mut color = vec![0.0; fw * fh * 3];
    color.par_chunks_mut(fw * 3).enumerate().for_each(|(y, row)| {
        for x in 0..fw {
            let hit = scene.raycast(&pose.apply_ray(&fine.camera_ray(x, y)));
            row[3 * x..3 * x + 3].copy_from_slice(&hit.color);
        }
    });
    let color = antialiased_downsample(&ErpImage::from_vec(fw, fh, 3, color)?, w, h)?;

    let mut depth = vec![0.0; w * h];
    depth.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, d) in row.iter_mut().enumerate() {
            *d = scene.raycast(&pose.apply_ray(&proj.camera_ray(x, y))).depth;
        }
    });
    Ok((color, ErpImage::from_vec(w, h, 1, depth)?))
}

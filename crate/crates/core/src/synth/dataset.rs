use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{render_view, SceneSpec};
use crate::error::{ensure_arg, Error, Result};
use crate::geometry::{Eye, Pose, Vec3, ViewingCircle};
use crate::imaging::{read_image, write_image, ErpImage};
use crate::msi::Projection;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorFormat {
    Png,
    Erpf,
}

impl ColorFormat {
    fn extension(self) -> &'static str {
        match self {
            ColorFormat::Png => "png",
            ColorFormat::Erpf => "erpf",
        }
    }
}

/// Dataset generation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub width: usize,
    pub height: usize,
    pub ods_width: usize,
    pub ods_height: usize,
    pub supersample: usize,
    pub viewing_circle_radius: f64,
    /// Rig translation between consecutive frames, metres.
    pub rig_step: [f64; 3],
    /// Per-axis magnitude range of extrapolation target offsets, metres.
    pub extrapolation_offset: [f64; 2],
    pub color_format: ColorFormat,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            width: 256,
            height: 128,
            ods_width: 512,
            ods_height: 256,
            supersample: 4,
            viewing_circle_radius: ViewingCircle::DEFAULT_RADIUS,
            rig_step: [0.01, 0.0, 0.0],
            extrapolation_offset: [0.02, 0.36],
            color_format: ColorFormat::Png,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_arg!(
            self.width >= 1 && self.height >= 1 && self.ods_width >= 1 && self.ods_height >= 1,
            "resolutions must be non-empty"
        );
        ensure_arg!(self.supersample >= 1, "supersample must be >= 1");
        ViewingCircle::new(self.viewing_circle_radius)?;
        let [lo, hi] = self.extrapolation_offset;
        ensure_arg!(0.0 <= lo && lo <= hi, "extrapolation offset range must satisfy 0 <= lo <= hi");
        Ok(())
    }

    pub fn viewing_circle(&self) -> ViewingCircle {
        ViewingCircle {
            radius: self.viewing_circle_radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetRole {
    Interpolation,
    Extrapolation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetRecord {
    pub role: TargetRole,
    pub projection: Projection,
    /// Camera pose in world coordinates.
    pub pose: Pose,
    pub image: String,
    pub depth: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub index: usize,
    pub left: String,
    pub right: String,
    /// ODS rig pose in world coordinates.
    pub rig_pose: Pose,
    pub targets: Vec<TargetRecord>,
}

impl FrameRecord {
    /// Target pose relative to this frame's rig (the MSI frame).
    pub fn relative_pose(&self, target: &TargetRecord) -> Pose {
        self.rig_pose.inverse().compose(&target.pose)
    }
}

/// Index of a generated dataset; file names are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub scene: String,
    pub seed: u64,
    pub config: SynthConfig,
    pub frames: Vec<FrameRecord>,
}

impl DatasetManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, PathBuf)> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_owned(),
            source: e,
        })?;
        let base = path.parent().map(Path::to_owned).unwrap_or_default();
        Ok((manifest, base))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    /// Loads the left/right ODS pair of one frame.
    pub fn load_pair(&self, base: &Path, frame: usize) -> Result<(ErpImage, ErpImage)> {
        let f = self.frame(frame)?;
        Ok((read_image(base.join(&f.left))?, read_image(base.join(&f.right))?))
    }

    pub fn frame(&self, frame: usize) -> Result<&FrameRecord> {
        self.frames
            .get(frame)
            .ok_or_else(|| Error::Argument(format!("manifest has no frame {frame}")))
    }
}

fn signed_offset<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let mag = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// A rendered target view of one synthesized frame.
#[derive(Debug, Clone)]
pub struct SynthTarget {
    pub role: TargetRole,
    /// World pose.
    pub pose: Pose,
    pub projection: Projection,
    pub image: ErpImage,
    pub depth: ErpImage,
}

/// One frame held in memory: the ODS pair at the rig pose and its targets.
#[derive(Debug, Clone)]
pub struct SynthFrame {
    pub rig_pose: Pose,
    pub left: ErpImage,
    pub right: ErpImage,
    pub targets: Vec<SynthTarget>,
}

/// Renders frame `index` of a sequence: the rig sits at `index * rig_step`,
/// with one interpolation target inside the viewing circle and two
/// extrapolation targets around it.
pub fn synthesize_frame<R: Rng + ?Sized>(
    scene: &SceneSpec,
    index: usize,
    config: &SynthConfig,
    rng: &mut R,
) -> Result<SynthFrame> {
    config.validate()?;
    let circle = config.viewing_circle();
    let rig_pose = Pose::from_translation(Vec3::from(config.rig_step) * index as f64);
    let [lo, hi] = config.extrapolation_offset;
    let mut offsets = Vec::with_capacity(3);
    let rad = circle.radius * rng.gen::<f64>().sqrt();
    let ang = rng.gen_range(0.0..std::f64::consts::TAU);
    offsets.push((TargetRole::Interpolation, Vec3::new(rad * ang.cos(), 0.0, rad * ang.sin())));
    for _ in 0..2 {
        let o = Vec3::new(
            signed_offset(rng, lo, hi),
            signed_offset(rng, lo, hi),
            signed_offset(rng, lo, hi),
        );
        offsets.push((TargetRole::Extrapolation, o));
    }

    let ods = |eye| {
        let proj = Projection::ods(eye, circle, config.ods_width, config.ods_height);
        render_view(scene, &rig_pose, &proj, config.supersample).map(|(img, _)| img)
    };
    let (left, right) = (ods(Eye::Left)?, ods(Eye::Right)?);
    let projection = Projection::erp(config.width, config.height);
    let targets = offsets
        .into_iter()
        .map(|(role, offset)| {
            let pose = rig_pose.compose(&Pose::from_translation(offset));
            let (image, depth) = render_view(scene, &pose, &projection, config.supersample)?;
            Ok(SynthTarget {
                role,
                pose,
                projection,
                image,
                depth,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SynthFrame {
        rig_pose,
        left,
        right,
        targets,
    })
}

/// Renders `n_frames` of ODS pairs and ERP targets into `out_dir`.
///
/// `seed` is recorded in the manifest; all randomness comes from `rng`.
pub fn generate_dataset<R: Rng + ?Sized>(
    scene: &SceneSpec,
    n_frames: usize,
    config: &SynthConfig,
    seed: u64,
    rng: &mut R,
    out_dir: impl AsRef<Path>,
) -> Result<DatasetManifest> {
    ensure_arg!(n_frames >= 1, "need at least one frame");
    config.validate()?;
    scene.validate()?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let ext = config.color_format.extension();
    let mut frames = Vec::with_capacity(n_frames);

    for k in 0..n_frames {
        let frame = synthesize_frame(scene, k, config, rng)?;
        let left = format!("frame_{k:03}_left.{ext}");
        let right = format!("frame_{k:03}_right.{ext}");
        write_image(out_dir.join(&left), &frame.left)?;
        write_image(out_dir.join(&right), &frame.right)?;
        let mut targets = Vec::with_capacity(frame.targets.len());
        for (j, t) in frame.targets.iter().enumerate() {
            let image = format!("frame_{k:03}_target_{j}.{ext}");
            let depth = format!("frame_{k:03}_target_{j}_depth.erpf");
            write_image(out_dir.join(&image), &t.image)?;
            write_image(out_dir.join(&depth), &t.depth)?;
            targets.push(TargetRecord {
                role: t.role,
                projection: t.projection,
                pose: t.pose,
                image,
                depth,
            });
        }
        log::info!("rendered frame {k}");
        frames.push(FrameRecord {
            index: k,
            left,
            right,
            rig_pose: frame.rig_pose,
            targets,
        });
    }

    let manifest = DatasetManifest {
        scene: scene.name.clone(),
        seed,
        config: config.clone(),
        frames,
    };
    let path = out_dir.join(MANIFEST_NAME);
    fs::write(&path, manifest.to_json()).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

//! Renders a small synthetic dataset (ODS pairs, ERP targets and exact
//! depth) from a bundled scene.
//!
//! ```text
//! cargo run --release --example synth_dataset -- [scene] [out_dir] [frames]
//! ```

use msi_forge::synth::{bundled_scene, generate_dataset, SynthConfig, BUNDLED_SCENES};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> msi_forge::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().map(String::as_str).unwrap_or("three-depth-shells");
    let out = args
        .get(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("msi-forge-synth"));
    let frames: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2);
    let Some(scene) = bundled_scene(name) else {
        eprintln!("unknown scene {name:?}; bundled: {BUNDLED_SCENES:?}");
        std::process::exit(2);
    };
    let config = SynthConfig {
        width: 128,
        height: 64,
        ods_width: 256,
        ods_height: 128,
        supersample: 2,
        ..Default::default()
    };
    let seed = 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let manifest = generate_dataset(&scene, frames, &config, seed, &mut rng, &out)?;
    for f in &manifest.frames {
        println!("frame {} rig at {:?}", f.index, f.rig_pose.translation.as_slice());
        for t in &f.targets {
            let rel = f.relative_pose(t);
            println!("  {:?} target {} offset {:.3} m", t.role, t.image, rel.translation.norm());
        }
    }
    println!("dataset written to {}", out.display());
    Ok(())
}

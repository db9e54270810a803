//! The `msi-forge` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{
    fit_frame, fit_sequence, write_loss_csv, FitConfig, FitFailure, FitTarget, LossRecord, SequenceFrame,
};
use crate::geometry::{Eye, PinholeIntrinsics, Pose, ViewingCircle};
use crate::imaging::{read_image, write_image, ErpImage, JbuParams};
use crate::metrics::{f2f_metric, MetricReport};
use crate::msi::{
    export_web, layer_radii, DEFAULT_FAR, DEFAULT_LAYERS, DEFAULT_NEAR, read_msi, render, render_hires, write_msi, Msi, OdsPair, Projection, RenderOptions,
};
use crate::sweep::transformed_sweep_pair;
use crate::synth::{generate_dataset, DatasetManifest, SceneSpec, SynthConfig};

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable mirroring `--threads`.
pub const THREADS_ENV: &str = "MSI_FORGE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "msi-forge", version, about = "Fit and render multi-sphere images from ODS panoramas")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    /// JSON run configuration; unknown keys are rejected.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic dataset of ODS pairs and ERP targets.
    Synth(SynthArgs),
    /// Fit an MSI to one frame, or jointly to every frame of a dataset.
    Fit(FitArgs),
    /// Render an MSI from a pose.
    Render(RenderArgs),
    /// Compare a directory of renders to a directory of references.
    Eval(EvalArgs),
    /// Write an MSI as per-layer PNGs plus metadata for the web viewer.
    ExportWeb(ExportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene description (JSON).
    pub scene: PathBuf,
    pub out_dir: PathBuf,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Target resolution; ODS inputs are rendered at twice this size.
    #[arg(long, value_parser = parse_res)]
    pub res: Option<(usize, usize)>,
    #[arg(long)]
    pub supersample: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    pub manifest: PathBuf,
    /// Output container; with `--sequence`, frame `k` goes to `<stem>_<k>.msi`.
    pub out: PathBuf,
    #[arg(long, conflicts_with = "sequence")]
    pub frame: Option<usize>,
    #[arg(long)]
    pub sequence: bool,
    #[arg(long)]
    pub lambda_ti: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjKind {
    Erp,
    OdsLeft,
    OdsRight,
    Pinhole,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub msi: PathBuf,
    pub out: PathBuf,
    /// Camera pose (JSON); identity when omitted.
    #[arg(long)]
    pub pose: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub proj: Option<ProjKind>,
    /// Output resolution; the MSI's own when omitted.
    #[arg(long, value_parser = parse_res)]
    pub res: Option<(usize, usize)>,
    /// Full-resolution ODS pair to re-texture the layers from.
    #[arg(long, num_args = 2, value_names = ["LEFT", "RIGHT"])]
    pub hires: Option<Vec<PathBuf>>,
    /// Upsample opacities with joint bilateral filtering (needs `--hires`).
    #[arg(long, requires = "hires")]
    pub jbu: bool,
    #[arg(long)]
    pub allow_outside_headbox: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub rendered_dir: PathBuf,
    pub truth_dir: PathBuf,
    /// Also report frame-to-frame flicker over the sorted renders.
    #[arg(long)]
    pub f2f: bool,
    /// Write the report JSON here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub msi: PathBuf,
    pub out_dir: PathBuf,
}

/// Layer layout of fitted MSIs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayerConfig {
    pub layers: usize,
    pub near: f64,
    pub far: f64,
}

impl Default for LayerConfig {
    fn default() -> Self {
        LayerConfig {
            layers: DEFAULT_LAYERS,
            near: DEFAULT_NEAR,
            far: DEFAULT_FAR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderConfig {
    pub projection: ProjKind,
    pub allow_outside_headbox: bool,
    pub headbox_fraction: f64,
    /// Used by the ODS projections and `--hires`.
    pub viewing_circle_radius: f64,
    pub pinhole_hfov_degrees: f64,
    pub jbu: JbuParams,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            projection: ProjKind::Erp,
            allow_outside_headbox: false,
            headbox_fraction: RenderOptions::default().headbox_fraction,
            viewing_circle_radius: ViewingCircle::DEFAULT_RADIUS,
            pinhole_hfov_degrees: 90.0,
            jbu: JbuParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub f2f_sigma: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            f2f_sigma: crate::metrics::F2F_SIGMA,
        }
    }
}

/// Every setting the commands read, loadable from JSON and overridden by
/// flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub threads: Option<usize>,
    /// Dataset seed.
    pub seed: u64,
    pub frames: usize,
    pub synth: SynthConfig,
    pub msi: LayerConfig,
    pub fit: FitConfig,
    pub render: RenderConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            threads: None,
            seed: 0,
            frames: 1,
            synth: SynthConfig::default(),
            msi: LayerConfig::default(),
            fit: FitConfig::default(),
            render: RenderConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = read_input(path)?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    fn render_options(&self) -> RenderOptions {
        RenderOptions {
            allow_outside_headbox: self.render.allow_outside_headbox,
            headbox_fraction: self.render.headbox_fraction,
        }
    }
}

/// Failure of a command, with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: if e.is_usage() { EXIT_USAGE } else { EXIT_RUNTIME },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn parse_res(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w: usize = w.parse().map_err(|_| format!("bad width in {s:?}"))?;
    let h: usize = h.parse().map_err(|_| format!("bad height in {s:?}"))?;
    if w == 0 || h == 0 {
        return Err(format!("resolution must be non-empty, got {s:?}"));
    }
    Ok((w, h))
}

/// Reads a file named on the command line; a missing file is a usage error.
fn read_input(path: &Path) -> Result<String> {
    match fs::read_to_string(path) {
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(Error::Argument(format!("{}: no such file", path.display())))
        }
        r => r.map_err(|e| Error::io(path, e)),
    }
}

fn require_file(path: &Path) -> std::result::Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("{}: no such file", path.display())))
    }
}

/// Reads an image and keeps its colour channels.
fn read_rgb(path: &Path) -> Result<ErpImage> {
    let img = read_image(path)?;
    if img.channels() < 3 {
        return Err(Error::format(path, format!("expected a colour image, got {} channel(s)", img.channels())));
    }
    Ok(img.take_channels(3))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `path` with `suffix` appended to its file name.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(OsString::from).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

fn sequence_path(out: &Path, k: usize) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("frame");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("msi");
    out.with_file_name(format!("{stem}_{k:03}.{ext}"))
}

fn loss_csv_path(out: &Path) -> PathBuf {
    out.with_extension("loss.csv")
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(cli: Cli) -> std::result::Result<(), CliError> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    if let Some(n) = config.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        // Fails only if a pool already exists, e.g. when called twice in
        // one process; the existing pool is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Synth(a) => cmd_synth(&a, config),
        Command::Fit(a) => cmd_fit(&a, config),
        Command::Render(a) => cmd_render(&a, config),
        Command::Eval(a) => cmd_eval(&a, config).map(|_| ()),
        Command::ExportWeb(a) => cmd_export_web(&a),
    }
}

fn echo_config(path: &Path, config: &RunConfig) -> Result<()> {
    log::info!("effective config written to {}", path.display());
    write_text(path, &config.to_json())
}

pub fn cmd_synth(args: &SynthArgs, mut config: RunConfig) -> std::result::Result<(), CliError> {
    let text = read_input(&args.scene)?;
    let scene = SceneSpec::from_json(&text).map_err(|e| usage(format!("{}: {e}", args.scene.display())))?;
    if let Some(n) = args.frames {
        config.frames = n;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some((w, h)) = args.res {
        config.synth.width = w;
        config.synth.height = h;
        config.synth.ods_width = 2 * w;
        config.synth.ods_height = 2 * h;
    }
    if let Some(k) = args.supersample {
        config.synth.supersample = k;
    }
    config.synth.validate()?;
    echo_config(&args.out_dir.join("run_config.json"), &config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let manifest = generate_dataset(&scene, config.frames, &config.synth, config.seed, &mut rng, &args.out_dir)?;
    println!("wrote {} frame(s) to {}", manifest.frames.len(), args.out_dir.display());
    Ok(())
}

/// Sweeps and supervising views of one manifest frame, in rig coordinates.
fn load_frame(
    manifest: &DatasetManifest,
    base: &Path,
    k: usize,
    radii: &[f64],
) -> Result<SequenceFrame> {
    let record = manifest.frame(k)?;
    let (left, right) = manifest.load_pair(base, k)?;
    let (w, h) = (manifest.config.width, manifest.config.height);
    let circle = manifest.config.viewing_circle();
    let (left, right) = transformed_sweep_pair(&left, &right, circle, radii, w, h, &Pose::identity())?;
    let targets = record
        .targets
        .iter()
        .map(|t| {
            Ok(FitTarget {
                image: read_rgb(&base.join(&t.image))?,
                pose: record.relative_pose(t),
                projection: t.projection,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SequenceFrame { left, right, targets })
}

fn save_failure(out: &Path, msis: Option<(&[Msi], &[LossRecord])>, multi: bool) -> Result<()> {
    match msis {
        Some((msis, curve)) => {
            for (k, m) in msis.iter().enumerate() {
                let p = if multi { sequence_path(out, k) } else { out.to_owned() };
                write_msi(sibling(&p, ".failed"), m)?;
            }
            write_loss_csv(sibling(&loss_csv_path(out), ".failed"), curve)
        }
        None => write_loss_csv(sibling(&loss_csv_path(out), ".failed"), &[]),
    }
}

fn fit_failed<T>(out: &Path, f: &FitFailure<T>, saved: Result<()>) -> CliError {
    let mut message = f.error.to_string();
    match saved {
        Ok(()) => message.push_str(&format!("; partial state saved next to {}", out.display())),
        Err(e) => message.push_str(&format!("; saving partial state failed: {e}")),
    }
    CliError {
        code: EXIT_RUNTIME,
        message,
    }
}

pub fn cmd_fit(args: &FitArgs, mut config: RunConfig) -> std::result::Result<(), CliError> {
    require_file(&args.manifest)?;
    if let Some(l) = args.lambda_ti {
        config.fit.lambda_ti = l;
    }
    if let Some(n) = args.iterations {
        config.fit.iterations = n;
    }
    config.fit.validate()?;
    let (manifest, base) = DatasetManifest::load(&args.manifest)?;
    let radii = layer_radii(config.msi.layers, config.msi.near, config.msi.far)?;
    echo_config(&sibling(&args.out, ".config.json"), &config)?;

    if args.sequence {
        let frames = (0..manifest.frames.len())
            .map(|k| load_frame(&manifest, &base, k, &radii))
            .collect::<Result<Vec<_>>>()?;
        let motions: Vec<Pose> = manifest
            .frames
            .windows(2)
            .map(|p| p[0].rig_pose.inverse().compose(&p[1].rig_pose))
            .collect();
        let fit = match fit_sequence(&frames, &motions, &config.fit) {
            Ok(f) => f,
            Err(f) => {
                let partial = f.last_finite.as_ref().map(|r| (r.msis.as_slice(), r.curve.as_slice()));
                return Err(fit_failed(&args.out, &f, save_failure(&args.out, partial, true)));
            }
        };
        for (k, m) in fit.msis.iter().enumerate() {
            write_msi(sequence_path(&args.out, k), m)?;
        }
        write_loss_csv(loss_csv_path(&args.out), &fit.curve)?;
        let last = fit.curve.last().expect("curve is non-empty");
        println!(
            "fitted {} frames: loss {:.6e} (data {:.6e}, ti {:.6e})",
            fit.msis.len(),
            last.total,
            last.data,
            last.ti
        );
    } else {
        let k = args.frame.unwrap_or(0);
        let frame = load_frame(&manifest, &base, k, &radii)?;
        let fit = match fit_frame(&frame.left, &frame.right, &frame.targets, &config.fit) {
            Ok(f) => f,
            Err(f) => {
                let partial = f
                    .last_finite
                    .as_ref()
                    .map(|r| (std::slice::from_ref(&r.msi), r.curve.as_slice()));
                return Err(fit_failed(&args.out, &f, save_failure(&args.out, partial, false)));
            }
        };
        write_msi(&args.out, &fit.msi)?;
        write_loss_csv(loss_csv_path(&args.out), &fit.curve)?;
        let last = fit.curve.last().expect("curve is non-empty");
        println!("fitted frame {k}: loss {:.6e}", last.total);
    }
    Ok(())
}

fn projection(kind: ProjKind, (w, h): (usize, usize), render: &RenderConfig) -> Result<Projection> {
    let circle = ViewingCircle::new(render.viewing_circle_radius)?;
    Ok(match kind {
        ProjKind::Erp => Projection::erp(w, h),
        ProjKind::OdsLeft => Projection::ods(Eye::Left, circle, w, h),
        ProjKind::OdsRight => Projection::ods(Eye::Right, circle, w, h),
        ProjKind::Pinhole => Projection::pinhole(PinholeIntrinsics::from_fov(w, h, render.pinhole_hfov_degrees)?),
    })
}

pub fn cmd_render(args: &RenderArgs, mut config: RunConfig) -> std::result::Result<(), CliError> {
    require_file(&args.msi)?;
    if let Some(p) = args.proj {
        config.render.projection = p;
    }
    if args.allow_outside_headbox {
        config.render.allow_outside_headbox = true;
    }
    let pose: Pose = match &args.pose {
        Some(p) => serde_json::from_str(&read_input(p)?).map_err(|source| Error::Json {
            path: p.clone(),
            source,
        })?,
        None => Pose::identity(),
    };
    let msi = read_msi(&args.msi)?;
    let proj = projection(config.render.projection, args.res.unwrap_or(msi.dims()), &config.render)?;
    let opts = config.render_options();
    let image = match &args.hires {
        Some(paths) => {
            for p in paths {
                require_file(p)?;
            }
            let left = read_rgb(&paths[0])?;
            let right = read_rgb(&paths[1])?;
            let pair = OdsPair {
                left: &left,
                right: &right,
                circle: ViewingCircle::new(config.render.viewing_circle_radius)?,
            };
            let jbu = args.jbu.then_some(config.render.jbu);
            render_hires(&msi, pair, &pose, &proj, jbu, opts)?
        }
        None => render(&msi, &pose, &proj, opts)?,
    };
    write_image(&args.out, &image)?;
    echo_config(&sibling(&args.out, ".config.json"), &config)?;
    Ok(())
}

fn image_files(dir: &Path) -> Result<Vec<String>> {
    let entries = fs::read_dir(dir).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Argument(format!("{}: no such directory", dir.display())),
        _ => Error::io(dir, e),
    })?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let lower = name.to_ascii_lowercase();
        if lower.ends_with(".png") || lower.ends_with(".erpf") {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

/// Scores every image in `rendered_dir` against the same-named image in
/// `truth_dir`. One-channel images are treated as depth maps: they are
/// left out of PSNR/SSIM and only feed the depth flicker measure.
pub fn cmd_eval(args: &EvalArgs, config: RunConfig) -> std::result::Result<MetricReport, CliError> {
    let rendered = image_files(&args.rendered_dir)?;
    let truth = image_files(&args.truth_dir)?;
    let missing: Vec<_> = rendered.iter().filter(|n| !truth.contains(n)).collect();
    let extra: Vec<_> = truth.iter().filter(|n| !rendered.contains(n)).collect();
    if !missing.is_empty() || !extra.is_empty() {
        let mut msg = String::from("file sets differ");
        if !missing.is_empty() {
            msg.push_str(&format!("; missing from {}: {:?}", args.truth_dir.display(), missing));
        }
        if !extra.is_empty() {
            msg.push_str(&format!("; missing from {}: {:?}", args.rendered_dir.display(), extra));
        }
        return Err(usage(msg));
    }
    let mut colour = Vec::new();
    let mut depth = Vec::new();
    for name in &rendered {
        let a = read_image(args.rendered_dir.join(name))?;
        if a.channels() == 1 {
            depth.push(a);
        } else {
            colour.push((name.clone(), read_rgb(&args.rendered_dir.join(name))?, read_rgb(&args.truth_dir.join(name))?));
        }
    }
    let mut report = MetricReport::from_pairs(colour.iter().map(|(n, a, b)| (n.clone(), a, b)))?;
    if args.f2f {
        let frames: Vec<ErpImage> = colour.iter().map(|(_, a, _)| a.clone()).collect();
        if frames.len() >= 2 {
            report.f2f_rgb = Some(f2f_metric(&frames, config.eval.f2f_sigma)?);
        }
        if depth.len() >= 2 {
            report.f2f_depth = Some(f2f_metric(&depth, config.eval.f2f_sigma)?);
        }
    }
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &args.out {
        Some(p) => write_text(p, &json)?,
        None => print!("{json}"),
    }
    eprint!("{}", report.to_table());
    Ok(report)
}

pub fn cmd_export_web(args: &ExportArgs) -> std::result::Result<(), CliError> {
    require_file(&args.msi)?;
    let msi = read_msi(&args.msi)?;
    let meta = export_web(&msi, &args.out_dir)?;
    println!("exported {} layers to {}", meta.layers, args.out_dir.display());
    Ok(())
}

//! Direct optimisation of MSI opacities and blend weights against target
//! views, through an analytic gradient of the compositing renderer.

mod loss;
mod plan;

pub use loss::{loss_erp_l2, loss_l2, ti_loss, weighted_l2, LossKind};

use std::fmt;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_arg, Error, Result};
use crate::geometry::{Pose, Vec3};
use crate::imaging::ErpImage;
use crate::msi::{Msi, Projection, RenderOptions};
use crate::sweep::SphereSweepVolume;
use plan::RenderPlan;

/// Optimiser and objective settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub iterations: usize,
    pub lambda_data: f64,
    pub lambda_ti: f64,
    pub loss: LossKind,
    /// Seeds the probe poses of the temporal term.
    pub seed: u64,
    /// Probe poses are drawn in a horizontal disc of this radius (metres).
    pub ti_probe_radius: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            learning_rate: 0.05,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            iterations: 400,
            lambda_data: 1.0,
            lambda_ti: 10.0,
            loss: LossKind::ErpL2,
            seed: 0,
            ti_probe_radius: 0.032,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_arg!(
            self.learning_rate > 0.0 && self.learning_rate.is_finite(),
            "learning rate must be positive, got {}",
            self.learning_rate
        );
        ensure_arg!(
            (0.0..1.0).contains(&self.adam_beta1) && (0.0..1.0).contains(&self.adam_beta2),
            "Adam decay rates must lie in [0, 1)"
        );
        ensure_arg!(self.adam_epsilon > 0.0, "Adam epsilon must be positive");
        ensure_arg!(
            self.lambda_data >= 0.0 && self.lambda_ti >= 0.0,
            "loss weights must be non-negative"
        );
        ensure_arg!(self.ti_probe_radius >= 0.0, "probe radius must be non-negative");
        Ok(())
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Free parameters: one opacity logit and one blend logit per layer texel.
///
/// Both grids are layer-major, row-major within a layer.
#[derive(Debug, Clone, PartialEq)]
pub struct FitParams {
    layers: usize,
    width: usize,
    height: usize,
    logits: Vec<f64>,
}

impl FitParams {
    /// Opacity `2 / n` and an even left/right blend everywhere.
    pub fn init(layers: usize, width: usize, height: usize) -> Self {
        let texels = layers * width * height;
        let mut logits = vec![logit(2.0 / layers as f64); 2 * texels];
        logits[texels..].fill(0.0);
        FitParams {
            layers,
            width,
            height,
            logits,
        }
    }

    pub fn zeros_like(&self) -> Self {
        FitParams {
            logits: vec![0.0; self.logits.len()],
            ..*self
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.layers, self.width, self.height)
    }

    pub fn alpha_logits(&self) -> &[f64] {
        &self.logits[..self.logits.len() / 2]
    }

    pub fn beta_logits(&self) -> &[f64] {
        &self.logits[self.logits.len() / 2..]
    }

    pub fn alpha_logits_mut(&mut self) -> &mut [f64] {
        let h = self.logits.len() / 2;
        &mut self.logits[..h]
    }

    pub fn beta_logits_mut(&mut self) -> &mut [f64] {
        let h = self.logits.len() / 2;
        &mut self.logits[h..]
    }

    /// All logits, opacities first.
    pub fn as_slice(&self) -> &[f64] {
        &self.logits
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.logits
    }

    pub fn is_finite(&self) -> bool {
        self.logits.iter().all(|v| v.is_finite())
    }
}

/// A supervising view: an RGB image seen through `projection` from `pose`
/// (camera to MSI frame).
#[derive(Debug, Clone)]
pub struct FitTarget {
    pub image: ErpImage,
    pub pose: Pose,
    pub projection: Projection,
}

struct PreparedTarget {
    plan: RenderPlan,
    image: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

/// Sweeps and precomputed target lookups for one frame.
pub struct FrameProblem {
    radii: Vec<f64>,
    width: usize,
    height: usize,
    right: Vec<[f64; 3]>,
    diff: Vec<[f64; 3]>,
    targets: Vec<PreparedTarget>,
}

fn rgb_pixels(img: &ErpImage) -> Vec<[f64; 3]> {
    let c = img.channels();
    img.data()
        .chunks_exact(c)
        .map(|p| {
            if c >= 3 {
                [p[0], p[1], p[2]]
            } else {
                [p[0]; 3]
            }
        })
        .collect()
}

fn weighted_residual(
    rendered: &[[f64; 3]],
    reference: &[[f64; 3]],
    weights: &[f64],
    scale: f64,
) -> (f64, Vec<[f64; 3]>) {
    let mut loss = 0.0;
    let d = rendered
        .iter()
        .zip(reference)
        .zip(weights)
        .map(|((r, t), &w)| {
            let mut g = [0.0; 3];
            for c in 0..3 {
                let e = r[c] - t[c];
                loss += w * e * e / 3.0;
                g[c] = scale * 2.0 * w * e / 3.0;
            }
            g
        })
        .collect();
    (loss, d)
}

impl FrameProblem {
    pub fn new(
        left: &SphereSweepVolume,
        right: &SphereSweepVolume,
        targets: &[FitTarget],
        kind: LossKind,
    ) -> Result<Self> {
        ensure_arg!(
            left.radii() == right.radii(),
            "left and right sweeps use different radii"
        );
        ensure_arg!(left.dims() == right.dims(), "left and right sweeps differ in size");
        ensure_arg!(!targets.is_empty(), "fitting needs at least one target view");
        let radii = left.radii().to_vec();
        let (width, height) = left.dims();
        let mut r = Vec::with_capacity(radii.len() * width * height);
        let mut diff = Vec::with_capacity(r.capacity());
        for (l, rt) in left.layers().iter().zip(right.layers()) {
            for (pl, pr) in rgb_pixels(l).into_iter().zip(rgb_pixels(rt)) {
                r.push(pr);
                diff.push([pl[0] - pr[0], pl[1] - pr[1], pl[2] - pr[2]]);
            }
        }
        let targets = targets
            .iter()
            .enumerate()
            .map(|(i, t)| {
                ensure_arg!(
                    t.image.dims() == t.projection.dims(),
                    "target {i}: image is {:?} but projection is {:?}",
                    t.image.dims(),
                    t.projection.dims()
                );
                Ok(PreparedTarget {
                    plan: RenderPlan::new(
                        &radii,
                        (width, height),
                        &t.pose,
                        &t.projection,
                        RenderOptions::default(),
                    )?,
                    image: rgb_pixels(&t.image),
                    weights: kind.pixel_weights(&t.projection),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FrameProblem {
            radii,
            width,
            height,
            right: r,
            diff,
            targets,
        })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn texels(&self) -> usize {
        self.width * self.height
    }

    fn check_params(&self, params: &FitParams) -> Result<()> {
        ensure_arg!(
            params.dims() == (self.radii.len(), self.width, self.height),
            "parameters are {:?}, problem is {:?}",
            params.dims(),
            (self.radii.len(), self.width, self.height)
        );
        Ok(())
    }

    /// Blended colours and opacities for every layer texel.
    fn state(&self, params: &FitParams) -> Vec<[f64; 4]> {
        params
            .alpha_logits()
            .iter()
            .zip(params.beta_logits())
            .zip(self.right.iter().zip(&self.diff))
            .map(|((&a, &b), (r, d))| {
                let beta = sigmoid(b);
                [
                    r[0] + beta * d[0],
                    r[1] + beta * d[1],
                    r[2] + beta * d[2],
                    sigmoid(a),
                ]
            })
            .collect()
    }

    /// Mean data loss over targets. Its gradient with respect to the texel
    /// state, scaled by `scale`, is added to `d_state`.
    ///
    /// Renders run in parallel; gradients are accumulated target by target
    /// so the sum does not depend on the thread count.
    fn data_term(&self, state: &[[f64; 4]], scale: f64, d_state: &mut [[f64; 4]]) -> f64 {
        let texels = self.texels();
        let n = self.targets.len() as f64;
        let renders: Vec<Vec<[f64; 3]>> = self
            .targets
            .par_iter()
            .map(|t| t.plan.forward(state, texels))
            .collect();
        let mut total = 0.0;
        for (t, img) in self.targets.iter().zip(&renders) {
            let (loss, d) = weighted_residual(img, &t.image, &t.weights, scale / n);
            total += loss;
            if scale != 0.0 {
                t.plan.backward(state, texels, &d, d_state);
            }
        }
        total / n
    }

    /// Pulls a texel-state gradient back to the logits.
    fn chain(&self, params: &FitParams, state: &[[f64; 4]], d_state: &[[f64; 4]], out: &mut FitParams) {
        let texels = state.len();
        let (ga, gb) = out.logits.split_at_mut(texels);
        let beta_logits = params.beta_logits();
        for i in 0..texels {
            let g = d_state[i];
            let a = state[i][3];
            ga[i] = g[3] * a * (1.0 - a);
            let d = self.diff[i];
            let b = sigmoid(beta_logits[i]);
            gb[i] = (g[0] * d[0] + g[1] * d[1] + g[2] * d[2]) * b * (1.0 - b);
        }
    }

    /// Mean data loss over targets and its gradient with respect to every
    /// logit.
    pub fn loss_and_grad(&self, params: &FitParams) -> Result<(f64, FitParams)> {
        self.check_params(params)?;
        let state = self.state(params);
        let mut d_state = vec![[0.0; 4]; state.len()];
        let loss = self.data_term(&state, 1.0, &mut d_state);
        let mut grad = params.zeros_like();
        self.chain(params, &state, &d_state, &mut grad);
        Ok((loss, grad))
    }

    /// Bakes blended colours, opacities and blend weights into an MSI.
    ///
    /// Values are rounded to single precision, the precision of the file
    /// container.
    pub fn bake(&self, params: &FitParams) -> Result<Msi> {
        self.check_params(params)?;
        let texels = self.texels();
        let state = self.state(params);
        let q = |v: f64| v.clamp(0.0, 1.0) as f32 as f64;
        let mut layers = Vec::with_capacity(self.radii.len());
        let mut beta = Vec::with_capacity(self.radii.len());
        for k in 0..self.radii.len() {
            let s = &state[k * texels..(k + 1) * texels];
            let data = s.iter().flat_map(|p| p.map(q)).collect();
            layers.push(ErpImage::from_vec(self.width, self.height, 4, data)?);
            let b = params.beta_logits()[k * texels..(k + 1) * texels]
                .iter()
                .map(|&l| q(sigmoid(l)))
                .collect();
            beta.push(ErpImage::from_vec(self.width, self.height, 1, b)?);
        }
        Msi::new(self.radii.clone(), layers, Some(beta))
    }
}

/// Mean data loss of the MSI described by `params` over `targets`, and its
/// gradient with respect to every logit.
pub fn loss_and_grad(
    params: &FitParams,
    left: &SphereSweepVolume,
    right: &SphereSweepVolume,
    targets: &[FitTarget],
    config: &FitConfig,
) -> Result<(f64, FitParams)> {
    FrameProblem::new(left, right, targets, config.loss)?.loss_and_grad(params)
}

/// First- and second-moment state of Adam.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl Adam {
    pub fn new(len: usize, config: &FitConfig) -> Self {
        Adam {
            lr: config.learning_rate,
            beta1: config.adam_beta1,
            beta2: config.adam_beta2,
            eps: config.adam_epsilon,
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
        }
    }

    pub fn update(&mut self, params: &mut [f64], grad: &[f64]) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        for (((p, &g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }
}

/// One row of a loss curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub iteration: usize,
    pub total: f64,
    pub data: f64,
    pub ti: f64,
}

pub fn write_loss_csv(path: impl AsRef<Path>, curve: &[LossRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("iteration,total,data,ti\n");
    for r in curve {
        out.push_str(&format!("{},{},{},{}\n", r.iteration, r.total, r.data, r.ti));
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub msi: Msi,
    pub params: FitParams,
    /// Losses before each update, plus one entry for the returned state.
    pub curve: Vec<LossRecord>,
}

#[derive(Debug, Clone)]
pub struct SequenceResult {
    pub msis: Vec<Msi>,
    pub params: Vec<FitParams>,
    pub curve: Vec<LossRecord>,
}

/// A fit that stopped early; `last_finite` holds the last state whose loss
/// was finite, when there was one.
#[derive(Debug)]
pub struct FitFailure<T> {
    pub error: Error,
    pub last_finite: Option<T>,
}

impl<T> fmt::Display for FitFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl<T: fmt::Debug> std::error::Error for FitFailure<T> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl<T> From<Error> for FitFailure<T> {
    fn from(error: Error) -> Self {
        FitFailure {
            error,
            last_finite: None,
        }
    }
}

impl<T> From<FitFailure<T>> for Error {
    fn from(f: FitFailure<T>) -> Self {
        f.error
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Fits one frame's MSI to its target views with Adam.
pub fn fit_frame(
    left: &SphereSweepVolume,
    right: &SphereSweepVolume,
    targets: &[FitTarget],
    config: &FitConfig,
) -> std::result::Result<FitResult, FitFailure<FitResult>> {
    config.validate()?;
    let problem = FrameProblem::new(left, right, targets, config.loss)?;
    let (w, h) = problem.dims();
    let mut params = FitParams::init(problem.radii().len(), w, h);
    let mut adam = Adam::new(params.as_slice().len(), config);
    let mut curve = Vec::with_capacity(config.iterations + 1);
    let mut grad = params.zeros_like();
    let mut previous: Option<FitParams> = None;
    let mut d_state = vec![[0.0; 4]; params.as_slice().len() / 2];
    for it in 0..=config.iterations {
        let state = problem.state(&params);
        d_state.fill([0.0; 4]);
        let data = problem.data_term(&state, config.lambda_data, &mut d_state);
        let total = config.lambda_data * data;
        problem.chain(&params, &state, &d_state, &mut grad);
        if !total.is_finite() || !all_finite(grad.as_slice()) {
            let error = Error::Numerical {
                iteration: it,
                message: format!("loss became {total}"),
            };
            let last_finite = match previous {
                Some(p) => problem.bake(&p).ok().map(|msi| FitResult {
                    msi,
                    params: p,
                    curve: curve.clone(),
                }),
                None => None,
            };
            return Err(FitFailure { error, last_finite });
        }
        curve.push(LossRecord {
            iteration: it,
            total,
            data,
            ti: 0.0,
        });
        if it % 50 == 0 {
            log::debug!("iteration {it}: loss {total:.6e}");
        }
        if it == config.iterations {
            break;
        }
        previous = Some(params.clone());
        adam.update(params.as_mut_slice(), grad.as_slice());
    }
    let msi = problem.bake(&params)?;
    Ok(FitResult { msi, params, curve })
}

/// One frame of a sequence: its sweeps and supervising views.
#[derive(Debug, Clone)]
pub struct SequenceFrame {
    pub left: SphereSweepVolume,
    pub right: SphereSweepVolume,
    pub targets: Vec<FitTarget>,
}

/// Temporal coupling between frames `k` and `k + 1`: the probe view in
/// frame `k + 1` and the same physical view carried into frame `k`.
struct TiLink {
    next: RenderPlan,
    prev: RenderPlan,
    weights: Vec<f64>,
}

/// Objective of a jointly fitted sequence.
pub struct SequenceProblem {
    problems: Vec<FrameProblem>,
    links: Vec<TiLink>,
    texels: usize,
    lambda_data: f64,
    lambda_ti: f64,
}

/// Loss terms of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerms {
    pub total: f64,
    pub data: f64,
    pub ti: f64,
}

impl SequenceProblem {
    /// `motions[k]` maps frame `k + 1` coordinates to frame `k` coordinates
    /// (the rig motion between the two).
    pub fn new(frames: &[SequenceFrame], motions: &[Pose], config: &FitConfig) -> Result<Self> {
        config.validate()?;
        ensure_arg!(frames.len() >= 2, "a sequence needs at least two frames, got {}", frames.len());
        ensure_arg!(
            motions.len() == frames.len() - 1,
            "{} frames need {} motions, got {}",
            frames.len(),
            frames.len() - 1,
            motions.len()
        );
        let problems = frames
            .iter()
            .map(|f| FrameProblem::new(&f.left, &f.right, &f.targets, config.loss))
            .collect::<Result<Vec<_>>>()?;
        let (w, h) = problems[0].dims();
        let radii = problems[0].radii().to_vec();
        for (k, p) in problems.iter().enumerate() {
            ensure_arg!(
                p.dims() == (w, h) && p.radii() == radii.as_slice(),
                "frame {k} sweeps differ from frame 0"
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let proj = Projection::erp(w, h);
        let weights = config.loss.pixel_weights(&proj);
        let opts = RenderOptions::default();
        let links = if config.lambda_ti > 0.0 {
            motions
                .iter()
                .map(|t| {
                    let probe = probe_pose(&mut rng, config.ti_probe_radius);
                    Ok(TiLink {
                        next: RenderPlan::new(&radii, (w, h), &probe, &proj, opts)?,
                        prev: RenderPlan::new(&radii, (w, h), &t.compose(&probe), &proj, opts)?,
                        weights: weights.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(SequenceProblem {
            problems,
            links,
            texels: w * h,
            lambda_data: config.lambda_data,
            lambda_ti: config.lambda_ti,
        })
    }

    pub fn init_params(&self) -> Vec<FitParams> {
        self.problems
            .iter()
            .map(|p| {
                let (w, h) = p.dims();
                FitParams::init(p.radii().len(), w, h)
            })
            .collect()
    }

    /// Total loss (summed data terms plus weighted temporal terms) and its
    /// gradient for every frame's logits, written into `grads`.
    pub fn evaluate(&self, params: &[FitParams], grads: &mut [FitParams]) -> Result<LossTerms> {
        ensure_arg!(
            params.len() == self.problems.len() && grads.len() == self.problems.len(),
            "expected parameters for {} frames",
            self.problems.len()
        );
        for (pr, p) in self.problems.iter().zip(params) {
            pr.check_params(p)?;
        }
        let states: Vec<Vec<[f64; 4]>> =
            self.problems.iter().zip(params).map(|(pr, p)| pr.state(p)).collect();
        let mut data = 0.0;
        let mut d_states = Vec::with_capacity(states.len());
        for (pr, s) in self.problems.iter().zip(&states) {
            let mut d = vec![[0.0; 4]; s.len()];
            data += pr.data_term(s, self.lambda_data, &mut d);
            d_states.push(d);
        }
        let mut ti = 0.0;
        for (k, link) in self.links.iter().enumerate() {
            let next = link.next.forward(&states[k + 1], self.texels);
            let prev = link.prev.forward(&states[k], self.texels);
            let (l, d_next) = weighted_residual(&next, &prev, &link.weights, self.lambda_ti);
            ti += l;
            let d_prev: Vec<[f64; 3]> = d_next.iter().map(|g| g.map(|v| -v)).collect();
            link.next.backward(&states[k + 1], self.texels, &d_next, &mut d_states[k + 1]);
            link.prev.backward(&states[k], self.texels, &d_prev, &mut d_states[k]);
        }
        for (k, pr) in self.problems.iter().enumerate() {
            pr.chain(&params[k], &states[k], &d_states[k], &mut grads[k]);
        }
        Ok(LossTerms {
            total: self.lambda_data * data + self.lambda_ti * ti,
            data,
            ti,
        })
    }

    fn bake(&self, params: &[FitParams]) -> Result<Vec<Msi>> {
        self.problems.iter().zip(params).map(|(pr, p)| pr.bake(p)).collect()
    }
}

/// Jointly fits every frame of a sequence.
///
/// `motions[k]` maps frame `k + 1` coordinates to frame `k` coordinates.
/// The temporal term compares frame `k + 1`'s MSI seen from a probe pose
/// with frame `k`'s MSI seen from the same pose carried into its frame.
pub fn fit_sequence(
    frames: &[SequenceFrame],
    motions: &[Pose],
    config: &FitConfig,
) -> std::result::Result<SequenceResult, FitFailure<SequenceResult>> {
    let problem = SequenceProblem::new(frames, motions, config)?;
    let mut params = problem.init_params();
    let mut adams: Vec<Adam> = params.iter().map(|p| Adam::new(p.as_slice().len(), config)).collect();
    let mut grads: Vec<FitParams> = params.iter().map(FitParams::zeros_like).collect();
    let mut curve = Vec::with_capacity(config.iterations + 1);
    let mut previous: Option<Vec<FitParams>> = None;
    for it in 0..=config.iterations {
        let terms = problem.evaluate(&params, &mut grads)?;
        if !terms.total.is_finite() || !grads.iter().all(|g| g.is_finite()) {
            let error = Error::Numerical {
                iteration: it,
                message: format!("loss became {}", terms.total),
            };
            let last_finite = previous.and_then(|ps| {
                problem.bake(&ps).ok().map(|msis| SequenceResult {
                    msis,
                    params: ps,
                    curve: curve.clone(),
                })
            });
            return Err(FitFailure { error, last_finite });
        }
        curve.push(LossRecord {
            iteration: it,
            total: terms.total,
            data: terms.data,
            ti: terms.ti,
        });
        if it % 50 == 0 {
            log::debug!(
                "iteration {it}: loss {:.6e} (data {:.6e}, ti {:.6e})",
                terms.total,
                terms.data,
                terms.ti
            );
        }
        if it == config.iterations {
            break;
        }
        previous = Some(params.clone());
        for ((p, a), g) in params.iter_mut().zip(&mut adams).zip(&grads) {
            a.update(p.as_mut_slice(), g.as_slice());
        }
    }
    let msis = problem.bake(&params)?;
    Ok(SequenceResult { msis, params, curve })
}

fn probe_pose(rng: &mut impl Rng, radius: f64) -> Pose {
    if radius == 0.0 {
        return Pose::identity();
    }
    let r = radius * rng.gen::<f64>().sqrt();
    let a = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    Pose::from_translation(Vec3::new(r * a.cos(), 0.0, r * a.sin()))
}

#[cfg(test)]
mod tests;

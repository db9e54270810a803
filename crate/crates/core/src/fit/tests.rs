use super::*;
use crate::msi::{layer_radii, render};
use crate::sweep::SweepSource;
use rand::Rng;

fn noise(w: usize, h: usize, seed: u64) -> ErpImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ErpImage::from_fn(w, h, 3, |_, _, _| rng.gen())
}

fn sweep(seed: u64, source: SweepSource, radii: &[f64], w: usize, h: usize) -> SphereSweepVolume {
    let layers = (0..radii.len()).map(|k| noise(w, h, seed * 100 + k as u64)).collect();
    SphereSweepVolume::from_layers(radii.to_vec(), layers, source, Pose::identity()).unwrap()
}

struct Instance {
    left: SphereSweepVolume,
    right: SphereSweepVolume,
    targets: Vec<FitTarget>,
}

fn instance(w: usize, h: usize, n: usize) -> Instance {
    let radii = layer_radii(n, 1.0, 100.0).unwrap();
    let offsets = [Vec3::new(0.1, 0.0, -0.05), Vec3::new(-0.2, 0.05, 0.1)];
    Instance {
        left: sweep(1, SweepSource::OdsLeft, &radii, w, h),
        right: sweep(2, SweepSource::OdsRight, &radii, w, h),
        targets: offsets
            .iter()
            .enumerate()
            .map(|(i, t)| FitTarget {
                image: noise(w, h, 50 + i as u64),
                pose: Pose::from_euler(0.05 * i as f64, 0.0, 0.3, *t),
                projection: Projection::erp(w, h),
            })
            .collect(),
    }
}

fn random_params(n: usize, w: usize, h: usize, seed: u64) -> FitParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = FitParams::init(n, w, h);
    for v in p.as_mut_slice() {
        *v = rng.gen_range(-2.0..2.0);
    }
    p
}

#[test]
fn gradient_matches_central_differences() {
    let (w, h, n) = (16, 8, 4);
    let inst = instance(w, h, n);
    for kind in [LossKind::L2, LossKind::ErpL2] {
        let problem = FrameProblem::new(&inst.left, &inst.right, &inst.targets, kind).unwrap();
        let params = random_params(n, w, h, 7);
        let (_, grad) = problem.loss_and_grad(&params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let step = 1e-4;
        let scale = grad.as_slice().iter().fold(0.0f64, |m, g| m.max(g.abs()));
        for _ in 0..64 {
            let i = rng.gen_range(0..params.as_slice().len());
            let mut plus = params.clone();
            plus.as_mut_slice()[i] += step;
            let mut minus = params.clone();
            minus.as_mut_slice()[i] -= step;
            let fd = (problem.loss_and_grad(&plus).unwrap().0 - problem.loss_and_grad(&minus).unwrap().0)
                / (2.0 * step);
            let an = grad.as_slice()[i];
            let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-6 * scale);
            assert!(rel <= 1e-4, "logit {i}: analytic {an:e}, numeric {fd:e}, rel {rel:e}");
        }
    }
}

#[test]
fn gradient_vanishes_when_targets_match_the_render() {
    let (w, h, n) = (16, 8, 4);
    let mut inst = instance(w, h, n);
    let params = random_params(n, w, h, 3);
    let problem = FrameProblem::new(&inst.left, &inst.right, &inst.targets, LossKind::ErpL2).unwrap();
    let msi = problem.bake(&params).unwrap();
    // Re-render in full precision through the same plan to get an exact target.
    let state = problem.state(&params);
    for (t, prep) in inst.targets.iter_mut().zip(&problem.targets) {
        let img = prep.plan.forward(&state, w * h);
        t.image = ErpImage::from_vec(w, h, 3, img.into_iter().flatten().collect()).unwrap();
    }
    let problem = FrameProblem::new(&inst.left, &inst.right, &inst.targets, LossKind::ErpL2).unwrap();
    let (loss, grad) = problem.loss_and_grad(&params).unwrap();
    assert_eq!(loss, 0.0);
    assert!(grad.as_slice().iter().all(|&g| g == 0.0));
    // The plan renderer agrees with the general renderer.
    let direct = render(&msi, &inst.targets[0].pose, &inst.targets[0].projection, RenderOptions::default()).unwrap();
    for (a, b) in direct.data().iter().zip(inst.targets[0].image.data()) {
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn duplicated_targets_leave_the_mean_unchanged() {
    let (w, h, n) = (16, 8, 4);
    let inst = instance(w, h, n);
    let params = random_params(n, w, h, 5);
    let config = FitConfig::default();
    let (l1, g1) = loss_and_grad(&params, &inst.left, &inst.right, &inst.targets, &config).unwrap();
    let doubled: Vec<FitTarget> = inst.targets.iter().chain(&inst.targets).cloned().collect();
    let (l2, g2) = loss_and_grad(&params, &inst.left, &inst.right, &doubled, &config).unwrap();
    assert!((l1 - l2).abs() <= 1e-15 * l1);
    for (a, b) in g1.as_slice().iter().zip(g2.as_slice()) {
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-12));
    }
}

#[test]
fn zero_iterations_return_the_initial_msi() {
    let (w, h, n) = (16, 8, 4);
    let inst = instance(w, h, n);
    let config = FitConfig {
        iterations: 0,
        ..Default::default()
    };
    let fit = fit_frame(&inst.left, &inst.right, &inst.targets, &config).unwrap();
    assert_eq!(fit.params, FitParams::init(n, w, h));
    assert_eq!(fit.curve.len(), 1);
    for layer in fit.msi.layers() {
        for px in layer.data().chunks_exact(4) {
            assert_eq!(px[3], 0.5f32 as f64);
        }
    }
    for b in fit.msi.beta().unwrap() {
        assert!(b.data().iter().all(|&v| v == 0.5));
    }
}

#[test]
fn fitting_descends() {
    let (w, h, n) = (16, 8, 4);
    let inst = instance(w, h, n);
    let config = FitConfig {
        iterations: 60,
        ..Default::default()
    };
    let fit = fit_frame(&inst.left, &inst.right, &inst.targets, &config).unwrap();
    assert_eq!(fit.curve.len(), 61);
    assert!(fit.curve[60].total < fit.curve[0].total);
}

#[test]
fn non_finite_targets_fail_with_iteration_context() {
    let (w, h, n) = (16, 8, 4);
    let mut inst = instance(w, h, n);
    inst.targets[1].image.data_mut()[5] = f64::NAN;
    let err = fit_frame(&inst.left, &inst.right, &inst.targets, &FitConfig::default()).unwrap_err();
    assert!(matches!(err.error, Error::Numerical { iteration: 0, .. }));
    assert!(err.last_finite.is_none());
}

#[test]
fn decoupled_sequence_matches_independent_fits() {
    let (w, h, n) = (16, 8, 4);
    let frames: Vec<SequenceFrame> = (0..2)
        .map(|k| {
            let inst = instance(w, h, n);
            let radii = inst.left.radii().to_vec();
            SequenceFrame {
                left: sweep(10 + k, SweepSource::OdsLeft, &radii, w, h),
                right: inst.right,
                targets: inst.targets,
            }
        })
        .collect();
    let config = FitConfig {
        iterations: 20,
        lambda_ti: 0.0,
        ..Default::default()
    };
    let motions = [Pose::from_translation(Vec3::new(0.01, 0.0, 0.0))];
    let seq = fit_sequence(&frames, &motions, &config).unwrap();
    for (f, msi) in frames.iter().zip(&seq.msis) {
        let single = fit_frame(&f.left, &f.right, &f.targets, &config).unwrap();
        assert_eq!(&single.msi, msi);
    }
}

fn sequence_frames(count: u64, w: usize, h: usize, n: usize) -> Vec<SequenceFrame> {
    (0..count)
        .map(|k| {
            let inst = instance(w, h, n);
            let radii = inst.left.radii().to_vec();
            SequenceFrame {
                left: sweep(20 + k, SweepSource::OdsLeft, &radii, w, h),
                right: inst.right,
                targets: inst.targets,
            }
        })
        .collect()
}

#[test]
fn sequence_gradient_matches_central_differences() {
    let (w, h, n) = (16, 8, 4);
    let frames = sequence_frames(3, w, h, n);
    let step_motion = Pose::from_translation(Vec3::new(0.01, 0.0, 0.0));
    let config = FitConfig::default();
    let problem = SequenceProblem::new(&frames, &[step_motion, step_motion], &config).unwrap();
    let params: Vec<FitParams> = (0..3).map(|k| random_params(n, w, h, 30 + k)).collect();
    let mut grads: Vec<FitParams> = params.iter().map(FitParams::zeros_like).collect();
    let terms = problem.evaluate(&params, &mut grads).unwrap();
    assert!(terms.ti > 0.0);
    let mut scratch = grads.clone();
    let mut loss_at = |ps: &[FitParams]| problem.evaluate(ps, &mut scratch).unwrap().total;
    let scale = grads
        .iter()
        .flat_map(|g| g.as_slice())
        .fold(0.0f64, |m, g| m.max(g.abs()));
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let step = 1e-4;
    for _ in 0..64 {
        let f = rng.gen_range(0..3);
        let i = rng.gen_range(0..params[f].as_slice().len());
        let mut plus = params.clone();
        plus[f].as_mut_slice()[i] += step;
        let mut minus = params.clone();
        minus[f].as_mut_slice()[i] -= step;
        let fd = (loss_at(&plus) - loss_at(&minus)) / (2.0 * step);
        let an = grads[f].as_slice()[i];
        let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-6 * scale);
        assert!(rel <= 1e-4, "frame {f} logit {i}: analytic {an:e}, numeric {fd:e}");
    }
}

#[test]
fn coupled_sequence_descends() {
    let (w, h, n) = (16, 8, 4);
    let frames = sequence_frames(3, w, h, n);
    let m = Pose::from_translation(Vec3::new(0.01, 0.0, 0.0));
    let config = FitConfig {
        iterations: 30,
        ..Default::default()
    };
    let seq = fit_sequence(&frames, &[m, m], &config).unwrap();
    assert!(seq.curve[30].total < seq.curve[0].total);
    assert_eq!(seq.msis.len(), 3);
}

#[test]
fn single_frame_sequences_are_rejected() {
    let inst = instance(16, 8, 4);
    let frames = vec![SequenceFrame {
        left: inst.left,
        right: inst.right,
        targets: inst.targets,
    }];
    assert!(fit_sequence(&frames, &[], &FitConfig::default()).is_err());
}

#[test]
fn config_rejects_unknown_keys() {
    assert!(serde_json::from_str::<FitConfig>(r#"{"learning_rate": 0.1}"#).is_ok());
    assert!(serde_json::from_str::<FitConfig>(r#"{"learnign_rate": 0.1}"#).is_err());
    let bad = FitConfig {
        learning_rate: 0.0,
        ..Default::default()
    };
    assert!(bad.validate().is_err());
}

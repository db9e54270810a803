use serde::{Deserialize, Serialize};

use crate::error::{ensure_arg, Result};
use crate::geometry::{area_weights, Pose};
use crate::imaging::ErpImage;
use crate::msi::{render, Msi, Projection, RenderOptions};

/// Image distance used for supervision and temporal terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    L2,
    /// Squared error weighted by each pixel's solid angle.
    #[default]
    ErpL2,
}

impl LossKind {
    /// Normalised per-pixel weights for images produced by `proj`.
    ///
    /// Solid-angle weighting only applies to panoramic layouts; pinhole
    /// images are always weighted uniformly.
    pub fn pixel_weights(self, proj: &Projection) -> Vec<f64> {
        let (w, h) = proj.dims();
        match (self, proj) {
            (LossKind::ErpL2, Projection::Pinhole { .. }) | (LossKind::L2, _) => {
                vec![1.0 / (w * h) as f64; w * h]
            }
            (LossKind::ErpL2, _) => normalized(area_weights(w, h)),
        }
    }

    pub fn loss(self, a: &ErpImage, b: &ErpImage) -> Result<f64> {
        match self {
            LossKind::L2 => loss_l2(a, b),
            LossKind::ErpL2 => loss_erp_l2(a, b),
        }
    }
}

fn normalized(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Squared error averaged over channels, with pixel weights normalised to
/// sum to one.
pub fn weighted_l2(a: &ErpImage, b: &ErpImage, weights: &[f64]) -> Result<f64> {
    ensure_arg!(
        a.same_shape(b),
        "image shapes differ: {:?}x{} vs {:?}x{}",
        a.dims(),
        a.channels(),
        b.dims(),
        b.channels()
    );
    let (w, h) = a.dims();
    ensure_arg!(weights.len() == w * h, "expected {} pixel weights, got {}", w * h, weights.len());
    let total: f64 = weights.iter().sum();
    ensure_arg!(total > 0.0, "pixel weights sum to zero");
    let c = a.channels();
    let sum: f64 = a
        .data()
        .chunks_exact(c)
        .zip(b.data().chunks_exact(c))
        .zip(weights)
        .map(|((pa, pb), &wt)| wt * pa.iter().zip(pb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
        .sum();
    Ok(sum / (total * c as f64))
}

/// Mean squared per-channel difference.
pub fn loss_l2(a: &ErpImage, b: &ErpImage) -> Result<f64> {
    let (w, h) = a.dims();
    weighted_l2(a, b, &vec![1.0; w * h])
}

/// Solid-angle weighted mean squared difference of two ERP images.
pub fn loss_erp_l2(a: &ErpImage, b: &ErpImage) -> Result<f64> {
    let (w, h) = a.dims();
    weighted_l2(a, b, &area_weights(w, h))
}

/// Disagreement between `msi_b`, seen from `p`, and `msi_a`, seen from
/// `t ∘ p`.
///
/// `msi_b` is the representation built from inputs moved by `t`; when both
/// describe the same scene consistently the two renders agree.
pub fn ti_loss(
    msi_a: &Msi,
    msi_b: &Msi,
    t: &Pose,
    p: &Pose,
    proj: &Projection,
    kind: LossKind,
) -> Result<f64> {
    let opts = RenderOptions::default();
    let rb = render(msi_b, p, proj, opts)?;
    let ra = render(msi_a, &t.compose(p), proj, opts)?;
    weighted_l2(&rb, &ra, &kind.pixel_weights(proj))
}

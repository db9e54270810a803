/// Front-to-back compositing result for one ray.
#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    pub color: [f64; 3],
    /// Net opacity of each layer: `alpha_i * prod_{j<i} (1 - alpha_j)`.
    pub weights: Vec<f64>,
    /// Light passing every layer, `prod_i (1 - alpha_i)`.
    pub transmittance: f64,
}

/// Composites near-to-far layer samples.
///
/// Weights and transmittance are formed from a running transmittance so
/// that `sum(weights) + transmittance == 1` up to rounding.
pub fn composite_ray(colors: &[[f64; 3]], alphas: &[f64]) -> Composite {
    assert_eq!(colors.len(), alphas.len(), "one alpha per layer colour");
    let mut color = [0.0; 3];
    let mut weights = Vec::with_capacity(alphas.len());
    let mut trans = 1.0;
    for (c, &a) in colors.iter().zip(alphas) {
        let w = trans * a;
        for k in 0..3 {
            color[k] += w * c[k];
        }
        weights.push(w);
        trans -= w;
    }
    Composite {
        color,
        weights,
        transmittance: trans,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn opaque_front_layer_wins() {
        let c = composite_ray(&[[0.2, 0.4, 0.6], [1.0, 1.0, 1.0]], &[1.0, 0.7]);
        assert_eq!(c.color, [0.2, 0.4, 0.6]);
        assert_eq!(c.transmittance, 0.0);
    }

    #[test]
    fn transparent_layers_give_black() {
        let c = composite_ray(&[[0.5; 3]; 4], &[0.0; 4]);
        assert_eq!(c.color, [0.0; 3]);
        assert_eq!(c.transmittance, 1.0);
    }

    #[test]
    fn two_layer_expansion() {
        let c = composite_ray(&[[1.0; 3], [0.0; 3]], &[0.5, 1.0]);
        assert_abs_diff_eq!(c.color[0], 0.5, epsilon = 1e-15);
        assert_eq!(c.weights, vec![0.5, 0.5]);
    }

    proptest! {
        #[test]
        fn weights_partition_unity(alphas in prop::collection::vec(0.0f64..=1.0, 1..40)) {
            let colors = vec![[0.3, 0.6, 0.9]; alphas.len()];
            let c = composite_ray(&colors, &alphas);
            let total: f64 = c.weights.iter().sum::<f64>() + c.transmittance;
            prop_assert!((total - 1.0).abs() <= 1e-12);
            for v in c.color {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn raising_alpha_is_monotone(
            alphas in prop::collection::vec(0.0f64..=1.0, 2..12),
            k in 0usize..12,
            bump in 0.0f64..1.0,
        ) {
            let k = k % alphas.len();
            let colors = vec![[0.5; 3]; alphas.len()];
            let before = composite_ray(&colors, &alphas);
            let mut raised = alphas.clone();
            raised[k] = (raised[k] + bump).min(1.0);
            let after = composite_ray(&colors, &raised);
            prop_assert!(after.weights[k] >= before.weights[k] - 1e-15);
            prop_assert!(after.transmittance <= before.transmittance + 1e-15);
        }
    }
}

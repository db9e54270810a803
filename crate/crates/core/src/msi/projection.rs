use serde::{Deserialize, Serialize};

use crate::error::{ensure_arg, Result};
use crate::geometry::{
    angles_to_direction, erp_angles_unchecked, ods_ray, pinhole_camera_direction, Eye,
    PinholeIntrinsics, Ray, Vec3, ViewingCircle,
};

/// How an output image's pixels map to camera-frame rays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Projection {
    Erp {
        width: usize,
        height: usize,
    },
    OdsLeft {
        width: usize,
        height: usize,
        radius: f64,
    },
    OdsRight {
        width: usize,
        height: usize,
        radius: f64,
    },
    Pinhole {
        width: usize,
        height: usize,
        focal: f64,
        cx: f64,
        cy: f64,
    },
}

impl Projection {
    pub fn erp(width: usize, height: usize) -> Self {
        Projection::Erp { width, height }
    }

    pub fn ods(eye: Eye, circle: ViewingCircle, width: usize, height: usize) -> Self {
        match eye {
            Eye::Left => Projection::OdsLeft {
                width,
                height,
                radius: circle.radius,
            },
            Eye::Right => Projection::OdsRight {
                width,
                height,
                radius: circle.radius,
            },
        }
    }

    pub fn pinhole(intr: PinholeIntrinsics) -> Self {
        Projection::Pinhole {
            width: intr.width,
            height: intr.height,
            focal: intr.focal,
            cx: intr.cx,
            cy: intr.cy,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match *self {
            Projection::Erp { width, height }
            | Projection::OdsLeft { width, height, .. }
            | Projection::OdsRight { width, height, .. }
            | Projection::Pinhole { width, height, .. } => (width, height),
        }
    }

    pub fn is_erp(&self) -> bool {
        matches!(self, Projection::Erp { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let (w, h) = self.dims();
        ensure_arg!(w >= 1 && h >= 1, "projection has an empty image");
        match *self {
            Projection::OdsLeft { radius, .. } | Projection::OdsRight { radius, .. } => {
                ensure_arg!(radius >= 0.0 && radius.is_finite(), "bad ODS radius {radius}");
            }
            Projection::Pinhole { focal, cx, cy, .. } => {
                ensure_arg!(focal > 0.0 && focal.is_finite(), "pinhole focal must be > 0");
                ensure_arg!(cx.is_finite() && cy.is_finite(), "bad principal point");
            }
            Projection::Erp { .. } => {}
        }
        Ok(())
    }

    /// Same field of view at `factor` times the resolution.
    pub fn scaled(&self, factor: usize) -> Self {
        let f = factor as f64;
        match *self {
            Projection::Erp { width, height } => Projection::Erp {
                width: width * factor,
                height: height * factor,
            },
            Projection::OdsLeft { width, height, radius } => Projection::OdsLeft {
                width: width * factor,
                height: height * factor,
                radius,
            },
            Projection::OdsRight { width, height, radius } => Projection::OdsRight {
                width: width * factor,
                height: height * factor,
                radius,
            },
            Projection::Pinhole { width, height, focal, cx, cy } => Projection::Pinhole {
                width: width * factor,
                height: height * factor,
                focal: focal * f,
                cx: cx * f,
                cy: cy * f,
            },
        }
    }

    /// Camera-frame ray through the centre of pixel `(x, y)`.
    #[inline]
    pub fn camera_ray(&self, x: usize, y: usize) -> Ray {
        let (xf, yf) = (x as f64, y as f64);
        match *self {
            Projection::Erp { width, height } => Ray {
                origin: Vec3::zeros(),
                direction: angles_to_direction(erp_angles_unchecked(xf, yf, width, height)),
            },
            Projection::OdsLeft { width, height, radius } => ods_ray(
                erp_angles_unchecked(xf, yf, width, height),
                ViewingCircle { radius },
                Eye::Left,
            ),
            Projection::OdsRight { width, height, radius } => ods_ray(
                erp_angles_unchecked(xf, yf, width, height),
                ViewingCircle { radius },
                Eye::Right,
            ),
            Projection::Pinhole { width, height, focal, cx, cy } => {
                let intr = PinholeIntrinsics { focal, cx, cy, width, height };
                Ray {
                    origin: Vec3::zeros(),
                    direction: pinhole_camera_direction(xf + 0.5, yf + 0.5, &intr),
                }
            }
        }
    }
}

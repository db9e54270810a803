use serde::{Deserialize, Serialize};

use crate::error::{ensure_arg, Result};
use crate::geometry::{Ray, Vec3};

pub type Rgb = [f64; 3];

/// Procedural solid texture evaluated at world-space hit points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Texture {
    /// 3D checkerboard with cubic cells of side `scale`.
    Checker {
        scale: f64,
        color_a: Rgb,
        color_b: Rgb,
    },
    /// Colour cycles through `palette` every `period` metres along y.
    HorizontalBands { period: f64, palette: Vec<Rgb> },
    Solid { color: Rgb },
}

impl Texture {
    pub fn albedo(&self, p: &Vec3) -> Rgb {
        match self {
            Texture::Checker {
                scale,
                color_a,
                color_b,
            } => {
                let cell = (p.x / scale).floor() + (p.y / scale).floor() + (p.z / scale).floor();
                if (cell as i64).rem_euclid(2) == 0 {
                    *color_a
                } else {
                    *color_b
                }
            }
            Texture::HorizontalBands { period, palette } => {
                let k = (p.y / period).floor() as i64;
                palette[k.rem_euclid(palette.len() as i64) as usize]
            }
            Texture::Solid { color } => *color,
        }
    }

    fn validate(&self) -> Result<()> {
        let in_unit = |c: &Rgb| c.iter().all(|v| (0.0..=1.0).contains(v));
        match self {
            Texture::Checker {
                scale,
                color_a,
                color_b,
            } => {
                ensure_arg!(*scale > 0.0, "checker scale must be positive");
                ensure_arg!(in_unit(color_a) && in_unit(color_b), "colours must lie in [0, 1]");
            }
            Texture::HorizontalBands { period, palette } => {
                ensure_arg!(*period > 0.0, "band period must be positive");
                ensure_arg!(!palette.is_empty(), "band palette is empty");
                ensure_arg!(palette.iter().all(in_unit), "colours must lie in [0, 1]");
            }
            Texture::Solid { color } => ensure_arg!(in_unit(color), "colours must lie in [0, 1]"),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Shape {
    Sphere { center: [f64; 3], radius: f64 },
    /// Infinite plane through `point` with normal `normal`.
    Plane { point: [f64; 3], normal: [f64; 3] },
    /// Axis-aligned box, visible from outside and inside.
    Box { min: [f64; 3], max: [f64; 3] },
}

const EPS: f64 = 1e-9;

impl Shape {
    /// Nearest hit distance beyond `EPS` and the surface normal there.
    pub fn intersect(&self, ray: &Ray) -> Option<(f64, Vec3)> {
        match self {
            Shape::Sphere { center, radius } => {
                let c = Vec3::from(*center);
                let oc = ray.origin - c;
                let b = oc.dot(&ray.direction);
                let q = oc.norm_squared() - radius * radius;
                let disc = b * b - q;
                if disc < 0.0 {
                    return None;
                }
                let s = disc.sqrt();
                let t = [-b - s, -b + s].into_iter().find(|&t| t > EPS)?;
                Some((t, (ray.at(t) - c) / *radius))
            }
            Shape::Plane { point, normal } => {
                let n = Vec3::from(*normal).normalize();
                let denom = n.dot(&ray.direction);
                if denom.abs() < 1e-15 {
                    return None;
                }
                let t = (Vec3::from(*point) - ray.origin).dot(&n) / denom;
                (t > EPS).then_some((t, n))
            }
            Shape::Box { min, max } => {
                let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
                let (mut axis0, mut axis1) = (0, 0);
                for k in 0..3 {
                    let inv = 1.0 / ray.direction[k];
                    let mut a = (min[k] - ray.origin[k]) * inv;
                    let mut b = (max[k] - ray.origin[k]) * inv;
                    if a > b {
                        std::mem::swap(&mut a, &mut b);
                    }
                    if a > t0 {
                        t0 = a;
                        axis0 = k;
                    }
                    if b < t1 {
                        t1 = b;
                        axis1 = k;
                    }
                }
                if t0 > t1 {
                    return None;
                }
                let (t, axis) = if t0 > EPS {
                    (t0, axis0)
                } else if t1 > EPS {
                    (t1, axis1)
                } else {
                    return None;
                };
                let mut n = Vec3::zeros();
                n[axis] = if ray.at(t)[axis] > 0.5 * (min[axis] + max[axis]) { 1.0 } else { -1.0 };
                Some((t, n))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Shape::Sphere { radius, .. } => ensure_arg!(*radius > 0.0, "sphere radius must be positive"),
            Shape::Plane { normal, .. } => {
                ensure_arg!(Vec3::from(*normal).norm() > 0.0, "plane normal must be non-zero")
            }
            Shape::Box { min, max } => {
                ensure_arg!((0..3).all(|k| min[k] < max[k]), "box min must be below max")
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Primitive {
    pub shape: Shape,
    pub texture: Texture,
}

/// Sphere shell around the origin that catches every ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Enclosure {
    #[serde(default = "default_enclosure_radius")]
    pub radius: f64,
    pub texture: Texture,
}

fn default_enclosure_radius() -> f64 {
    50.0
}

/// Analytic scene used to synthesize ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub primitives: Vec<Primitive>,
    pub enclosure: Enclosure,
}

/// Colour and distance of the first surface a ray meets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub color: Rgb,
    pub depth: f64,
}

impl SceneSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let scene: SceneSpec = serde_json::from_str(text)
            .map_err(|e| crate::Error::Argument(format!("invalid scene: {e}")))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_arg!(self.enclosure.radius > 0.0, "enclosure radius must be positive");
        self.enclosure.texture.validate()?;
        for p in &self.primitives {
            p.shape.validate()?;
            p.texture.validate()?;
        }
        Ok(())
    }

    /// Unlit albedo of the nearest surface. Rays starting outside the
    /// enclosure that miss everything come back black at infinite depth.
    pub fn raycast(&self, ray: &Ray) -> Hit {
        let mut best: Option<(f64, Vec3, &Texture)> = None;
        for prim in &self.primitives {
            if let Some((t, n)) = prim.shape.intersect(ray) {
                if best.is_none_or(|(bt, _, _)| t < bt) {
                    best = Some((t, n, &prim.texture));
                }
            }
        }
        let shell = Shape::Sphere {
            center: [0.0; 3],
            radius: self.enclosure.radius,
        };
        if let Some((t, n)) = shell.intersect(ray) {
            if best.is_none_or(|(bt, _, _)| t < bt) {
                best = Some((t, n, &self.enclosure.texture));
            }
        }
        match best {
            // Texture lookups happen a hair inside the surface so faces that
            // coincide with cell boundaries resolve consistently.
            Some((t, n, tex)) => Hit {
                color: tex.albedo(&(ray.at(t) - n * 1e-6)),
                depth: t,
            },
            None => Hit {
                color: [0.0; 3],
                depth: f64::INFINITY,
            },
        }
    }
}

pub fn raycast_scene(scene: &SceneSpec, ray: &Ray) -> Hit {
    scene.raycast(ray)
}

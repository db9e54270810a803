//! Spherical, omnidirectional-stereo and pinhole projection math.
//!
//! All formulas use one fixed frame: x forward, z left, y down. Azimuth
//! `theta` grows from +x toward -z, elevation `phi` grows toward +y, and the
//! ERP pixel grid maps linearly onto (theta, phi) using pixel centres.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_arg, Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Wraps an azimuth into `[-pi, pi]`, leaving in-range values untouched.
pub fn wrap_azimuth(theta: f64) -> f64 {
    if (-PI..=PI).contains(&theta) {
        theta
    } else {
        (theta + PI).rem_euclid(2.0 * PI) - PI
    }
}

/// Azimuth/elevation pair in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles {
    pub theta: f64,
    pub phi: f64,
}

impl Angles {
    /// Builds angles, wrapping `theta` and rejecting `phi` outside `[-pi/2, pi/2]`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        ensure_arg!(
            theta.is_finite() && phi.is_finite(),
            "non-finite angles ({theta}, {phi})"
        );
        ensure_arg!(
            (-FRAC_PI_2..=FRAC_PI_2).contains(&phi),
            "elevation {phi} outside [-pi/2, pi/2]"
        );
        Ok(Angles {
            theta: wrap_azimuth(theta),
            phi,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

/// Which ODS eye a panorama belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Eye {
    Left,
    Right,
}

impl Eye {
    fn sign(self) -> f64 {
        match self {
            Eye::Left => 1.0,
            Eye::Right => -1.0,
        }
    }
}

/// The horizontal circle every ODS ray is tangent to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewingCircle {
    pub radius: f64,
}

impl ViewingCircle {
    pub const DEFAULT_RADIUS: f64 = 0.032;

    /// `radius` may be zero, which collapses ODS onto plain ERP.
    pub fn new(radius: f64) -> Result<Self> {
        ensure_arg!(
            radius.is_finite() && radius >= 0.0,
            "viewing circle radius must be non-negative, got {radius}"
        );
        Ok(ViewingCircle { radius })
    }
}

impl Default for ViewingCircle {
    fn default() -> Self {
        ViewingCircle {
            radius: Self::DEFAULT_RADIUS,
        }
    }
}

/// Ideal perspective camera. Pixel centres sit at half-integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinholeIntrinsics {
    pub focal: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl PinholeIntrinsics {
    /// Centred principal point with the given horizontal field of view.
    pub fn from_fov(width: usize, height: usize, hfov_degrees: f64) -> Result<Self> {
        ensure_arg!(width > 0 && height > 0, "empty pinhole image");
        ensure_arg!(
            hfov_degrees > 0.0 && hfov_degrees < 180.0,
            "horizontal fov must lie in (0, 180) degrees"
        );
        let focal = 0.5 * width as f64 / (0.5 * hfov_degrees.to_radians()).tan();
        Ok(PinholeIntrinsics {
            focal,
            cx: 0.5 * width as f64,
            cy: 0.5 * height as f64,
            width,
            height,
        })
    }
}

/// Maps a continuous ERP pixel coordinate (integer = texel centre) to angles.
pub fn erp_pixel_to_angles(x: f64, y: f64, width: usize, height: usize) -> Result<Angles> {
    ensure_arg!(width >= 1 && height >= 1, "ERP size must be at least 1x1");
    let (w, h) = (width as f64, height as f64);
    ensure_arg!(
        (0.0..w).contains(&x) && (0.0..h).contains(&y),
        "pixel ({x}, {y}) outside {width}x{height} image"
    );
    Ok(erp_angles_unchecked(x, y, width, height))
}

#[inline]
pub(crate) fn erp_angles_unchecked(x: f64, y: f64, width: usize, height: usize) -> Angles {
    Angles {
        theta: PI * (2.0 * (x + 0.5) / width as f64 - 1.0),
        phi: PI * (0.5 - (y + 0.5) / height as f64),
    }
}

/// Inverse of [`erp_pixel_to_angles`]: continuous pixel coordinates of a direction.
#[inline]
pub fn angles_to_erp_pixel(a: Angles, width: usize, height: usize) -> (f64, f64) {
    let x = (a.theta / PI + 1.0) * 0.5 * width as f64 - 0.5;
    let y = (0.5 - a.phi / PI) * height as f64 - 0.5;
    (x, y)
}

#[inline]
pub fn angles_to_direction(a: Angles) -> Vec3 {
    let (st, ct) = a.theta.sin_cos();
    let (sp, cp) = a.phi.sin_cos();
    Vec3::new(cp * ct, sp, -cp * st)
}

/// Projects a point onto the unit sphere around the origin.
pub fn project_point_erp(p: &Vec3) -> Result<Angles> {
    if *p == Vec3::zeros() || !p.iter().all(|v| v.is_finite()) {
        return Err(Error::Domain(format!(
            "cannot project {p:?} onto the sphere"
        )));
    }
    Ok(project_erp_unchecked(p))
}

#[inline]
pub(crate) fn project_erp_unchecked(p: &Vec3) -> Angles {
    Angles {
        theta: wrap_azimuth(-p.z.atan2(p.x)),
        phi: p.y.atan2(p.x.hypot(p.z)),
    }
}

/// Projects a point into one eye of an ODS panorama.
pub fn project_point_ods(p: &Vec3, circle: ViewingCircle, eye: Eye) -> Result<Angles> {
    let rho = p.x.hypot(p.z);
    if !(rho > circle.radius) || !p.y.is_finite() {
        return Err(Error::Domain(format!(
            "point {p:?} lies inside the viewing cylinder of radius {}",
            circle.radius
        )));
    }
    Ok(project_ods_with_rho(p, rho, circle.radius, eye))
}

/// ODS projection with an explicit horizontal distance `rho > r`.
#[inline]
pub(crate) fn project_ods_with_rho(p: &Vec3, rho: f64, r: f64, eye: Eye) -> Angles {
    let theta = eye.sign() * (r / rho).asin() - p.z.atan2(p.x);
    let horizontal = ((rho - r) * (rho + r)).sqrt();
    Angles {
        theta: wrap_azimuth(theta),
        phi: p.y.atan2(horizontal),
    }
}

/// Camera ray of an ODS eye for a panorama direction.
#[inline]
pub fn ods_ray(a: Angles, circle: ViewingCircle, eye: Eye) -> Ray {
    let r = circle.radius * eye.sign();
    let (st, ct) = a.theta.sin_cos();
    Ray {
        origin: Vec3::new(r * st, 0.0, r * ct),
        direction: angles_to_direction(a),
    }
}

/// Perspective ray through a continuous pixel coordinate.
///
/// Image rows grow toward -y so that perspective and ERP images share their
/// vertical orientation; columns grow toward -z.
pub fn pinhole_ray(x: f64, y: f64, intr: &PinholeIntrinsics, pose: &Pose) -> Ray {
    let local = pinhole_camera_direction(x, y, intr);
    Ray {
        origin: pose.translation,
        direction: pose.rotation * local,
    }
}

#[inline]
pub(crate) fn pinhole_camera_direction(x: f64, y: f64, intr: &PinholeIntrinsics) -> Vec3 {
    Vec3::new(1.0, (intr.cy - y) / intr.focal, -(x - intr.cx) / intr.focal).normalize()
}

/// Distance along a ray (origin strictly inside) to the sphere of radius `radius`.
pub fn ray_sphere_exit(ray: &Ray, radius: f64) -> Result<f64> {
    let o2 = ray.origin.norm_squared();
    if !(o2 < radius * radius) {
        return Err(Error::Domain(format!(
            "ray origin at distance {} is not inside the sphere of radius {radius}",
            o2.sqrt()
        )));
    }
    Ok(sphere_exit_unchecked(&ray.origin, &ray.direction, o2, radius))
}

#[inline]
pub(crate) fn sphere_exit_unchecked(o: &Vec3, d: &Vec3, o2: f64, radius: f64) -> f64 {
    let b = o.dot(d);
    // c < 0, so the root is positive; the product form avoids cancellation.
    let c = o2 - radius * radius;
    let disc = (b * b - c).sqrt();
    if b <= 0.0 {
        disc - b
    } else {
        -c / (b + disc)
    }
}

/// Per-row solid angle of every pixel of a `width x height` ERP grid.
///
/// Each entry is the area of the pixel's patch on the unit sphere, bounded
/// by its edge azimuths and edge elevations; the rows sum to `4 pi`.
pub fn area_weight_rows(width: usize, height: usize) -> Vec<f64> {
    let dtheta = 2.0 * PI / width as f64;
    (0..height)
        .map(|y| {
            let top = PI * (0.5 - y as f64 / height as f64);
            let bottom = PI * (0.5 - (y + 1) as f64 / height as f64);
            dtheta * (top.sin() - bottom.sin()).abs()
        })
        .collect()
}

/// Full row-major grid of per-pixel solid-angle weights.
pub fn area_weights(width: usize, height: usize) -> Vec<f64> {
    area_weight_rows(width, height)
        .into_iter()
        .flat_map(|a| std::iter::repeat_n(a, width))
        .collect()
}

/// `|sin(phi)|` at the centre of row `y`.
pub fn v_coordinate(y: usize, height: usize) -> f64 {
    (PI * (0.5 - (y as f64 + 0.5) / height as f64)).sin().abs()
}

/// Rigid camera-to-world transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Default for Pose {
    fn default() -> Self {
        Pose::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self> {
        let ortho = (rotation.transpose() * rotation - Mat3::identity()).amax();
        ensure_arg!(
            ortho <= 1e-9 && (rotation.determinant() - 1.0).abs() <= 1e-9,
            "rotation is not orthonormal with determinant +1"
        );
        ensure_arg!(
            translation.iter().all(|v| v.is_finite()),
            "non-finite translation"
        );
        Ok(Pose {
            rotation,
            translation,
        })
    }

    pub fn from_translation(t: Vec3) -> Self {
        Pose {
            rotation: Mat3::identity(),
            translation: t,
        }
    }

    /// Rotation about the vertical (y) axis, positive toward increasing azimuth.
    pub fn from_yaw(yaw: f64) -> Self {
        Pose {
            rotation: *Rotation3::from_axis_angle(&Vector3::y_axis(), yaw).matrix(),
            translation: Vec3::zeros(),
        }
    }

    /// Rotation from roll (x), pitch (z) and yaw (y) angles, then translation.
    pub fn from_euler(roll: f64, pitch: f64, yaw: f64, translation: Vec3) -> Self {
        let r = Rotation3::from_axis_angle(&Vector3::y_axis(), yaw)
            * Rotation3::from_axis_angle(&Vector3::z_axis(), pitch)
            * Rotation3::from_axis_angle(&Vector3::x_axis(), roll);
        Pose {
            rotation: *r.matrix(),
            translation,
        }
    }

    /// `self * other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    #[inline]
    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.rotation * x + self.translation
    }

    #[inline]
    pub fn apply_ray(&self, ray: &Ray) -> Ray {
        Ray {
            origin: self.apply(&ray.origin),
            direction: self.rotation * ray.direction,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseJson {
    rotation: [f64; 9],
    translation: [f64; 3],
    #[serde(default = "metres")]
    units: String,
}

fn metres() -> String {
    "metres".to_owned()
}

impl Serialize for Pose {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let r = &self.rotation;
        PoseJson {
            rotation: [
                r[(0, 0)],
                r[(0, 1)],
                r[(0, 2)],
                r[(1, 0)],
                r[(1, 1)],
                r[(1, 2)],
                r[(2, 0)],
                r[(2, 1)],
                r[(2, 2)],
            ],
            translation: [self.translation.x, self.translation.y, self.translation.z],
            units: metres(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pose {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PoseJson::deserialize(d)?;
        if raw.units != "metres" {
            return Err(D::Error::custom(format!(
                "unsupported pose units {:?}",
                raw.units
            )));
        }
        let rotation = Mat3::from_row_slice(&raw.rotation);
        let t = Vec3::from_column_slice(&raw.translation);
        Pose::new(rotation, t).map_err(D::Error::custom)
    }
}

/// Uniform random rigid perturbation within `+-scale * range` per Euler angle
/// and per translation axis.
pub fn sample_transform<R: Rng + ?Sized>(
    rot_range: f64,
    trans_range: f64,
    scale: f64,
    rng: &mut R,
) -> Result<Pose> {
    ensure_arg!(
        rot_range >= 0.0 && trans_range >= 0.0 && scale >= 0.0,
        "transform ranges must be non-negative"
    );
    let mut draw = |half: f64| {
        if half > 0.0 {
            rng.gen_range(-half..=half)
        } else {
            0.0
        }
    };
    let (ra, ta) = (rot_range * scale, trans_range * scale);
    let roll = draw(ra);
    let pitch = draw(ra);
    let yaw = draw(ra);
    let t = Vec3::new(draw(ta), draw(ta), draw(ta));
    Ok(Pose::from_euler(roll, pitch, yaw, t))
}

/// Default temporal perturbation ranges (1.7 degrees, 1 cm).
pub const TEMPORAL_ROTATION_RANGE: f64 = 1.7 * PI / 180.0;
pub const TEMPORAL_TRANSLATION_RANGE: f64 = 0.01;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn erp_pixel_centre_and_corner() {
        let a = erp_pixel_to_angles(1.5, 0.5, 4, 2).unwrap();
        assert_abs_diff_eq!(a.theta, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.phi, 0.0, epsilon = 1e-15);

        let a = erp_pixel_to_angles(0.0, 0.0, 4, 2).unwrap();
        assert_abs_diff_eq!(a.theta, -3.0 * PI / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.phi, PI / 4.0, epsilon = 1e-15);

        let a = erp_pixel_to_angles(1023.4999, 3.0, 1024, 512).unwrap();
        assert_abs_diff_eq!(a.theta, PI, epsilon = 1e-6);

        assert!(erp_pixel_to_angles(4.0, 0.0, 4, 2).is_err());
        assert!(erp_pixel_to_angles(0.0, -0.1, 4, 2).is_err());
    }

    #[test]
    fn directions_of_known_angles() {
        let d = angles_to_direction(Angles { theta: 0.0, phi: 0.0 });
        assert_abs_diff_eq!(d, Vec3::new(1.0, 0.0, 0.0), epsilon = 1e-15);
        let d = angles_to_direction(Angles { theta: PI / 2.0, phi: 0.0 });
        assert_abs_diff_eq!(d, Vec3::new(0.0, 0.0, -1.0), epsilon = 1e-15);
        let d = angles_to_direction(Angles { theta: 0.0, phi: PI / 4.0 });
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(d, Vec3::new(h, h, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn erp_projection_examples() {
        let a = project_point_erp(&Vec3::new(0.0, 0.0, -1.0)).unwrap();
        assert_abs_diff_eq!(a.theta, PI / 2.0, epsilon = 1e-15);
        let a = project_point_erp(&Vec3::new(1.0, 1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(a.phi, PI / 4.0, epsilon = 1e-15);
        assert!(matches!(
            project_point_erp(&Vec3::zeros()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn ods_projection_examples() {
        let vc = ViewingCircle::default();
        let p = Vec3::new(2.0, 0.0, 0.0);
        let l = project_point_ods(&p, vc, Eye::Left).unwrap();
        let r = project_point_ods(&p, vc, Eye::Right).unwrap();
        assert_abs_diff_eq!(l.theta, 0.016f64.asin(), epsilon = 1e-15);
        assert_abs_diff_eq!(l.theta, 0.0160007, epsilon = 1e-7);
        assert_abs_diff_eq!(r.theta, -l.theta, epsilon = 1e-15);
        assert_eq!(l.phi, 0.0);

        let inside = Vec3::new(0.01, 5.0, 0.02);
        assert!(project_point_ods(&inside, vc, Eye::Left).is_err());
        let on = Vec3::new(0.032, 0.0, 0.0);
        assert!(project_point_ods(&on, vc, Eye::Right).is_err());

        let zero = ViewingCircle::new(0.0).unwrap();
        let q = Vec3::new(-1.0, 0.3, 2.0);
        let a = project_point_ods(&q, zero, Eye::Left).unwrap();
        let b = project_point_erp(&q).unwrap();
        assert_abs_diff_eq!(a.theta, b.theta, epsilon = 1e-15);
        assert_abs_diff_eq!(a.phi, b.phi, epsilon = 1e-15);
    }

    #[test]
    fn ods_rays_are_tangent_and_round_trip() {
        let vc = ViewingCircle::default();
        let a = Angles { theta: 0.0, phi: 0.0 };
        let l = ods_ray(a, vc, Eye::Left);
        assert_abs_diff_eq!(l.origin, Vec3::new(0.0, 0.0, 0.032), epsilon = 1e-15);
        assert_abs_diff_eq!(l.direction, Vec3::new(1.0, 0.0, 0.0), epsilon = 1e-15);
        let r = ods_ray(a, vc, Eye::Right);
        assert_abs_diff_eq!(r.origin, Vec3::new(0.0, 0.0, -0.032), epsilon = 1e-15);

        let a = Angles { theta: 2.5, phi: -0.4 };
        for eye in [Eye::Left, Eye::Right] {
            let ray = ods_ray(a, vc, eye);
            for t in [0.5, 3.0, 70.0] {
                let back = project_point_ods(&ray.at(t), vc, eye).unwrap();
                assert_abs_diff_eq!(back.theta, a.theta, epsilon = 1e-12);
                assert_abs_diff_eq!(back.phi, a.phi, epsilon = 1e-12);
            }
        }

        let zero = ViewingCircle::new(0.0).unwrap();
        let ray = ods_ray(a, zero, Eye::Left);
        assert_eq!(ray.origin.norm(), 0.0);
        assert_eq!(ray.direction, angles_to_direction(a));
    }

    #[test]
    fn pinhole_rays() {
        let intr = PinholeIntrinsics {
            focal: 100.0,
            cx: 64.0,
            cy: 32.0,
            width: 128,
            height: 64,
        };
        let id = Pose::identity();
        let c = pinhole_ray(64.0, 32.0, &intr, &id);
        assert_abs_diff_eq!(c.direction, Vec3::new(1.0, 0.0, 0.0), epsilon = 1e-15);
        let side = pinhole_ray(164.0, 32.0, &intr, &id);
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(side.direction, Vec3::new(h, 0.0, -h), epsilon = 1e-15);

        let pose = Pose::from_euler(0.1, -0.2, 0.7, Vec3::new(0.1, 0.0, 0.2));
        let rotated = pinhole_ray(10.0, 50.0, &intr, &pose);
        let plain = pinhole_ray(10.0, 50.0, &intr, &id);
        assert_abs_diff_eq!(
            rotated.direction,
            pose.rotation * plain.direction,
            epsilon = 1e-15
        );
        assert_eq!(rotated.origin, pose.translation);
    }

    #[test]
    fn sphere_exit_examples() {
        let ray = |o: Vec3, d: Vec3| Ray {
            origin: o,
            direction: d,
        };
        let x = Vec3::x();
        assert_abs_diff_eq!(
            ray_sphere_exit(&ray(Vec3::zeros(), x), 1.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            ray_sphere_exit(&ray(Vec3::new(0.5, 0.0, 0.0), x), 1.0).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            ray_sphere_exit(&ray(Vec3::new(0.0, 0.6, 0.0), x), 1.0).unwrap(),
            0.8,
            epsilon = 1e-15
        );
        assert!(ray_sphere_exit(&ray(Vec3::new(1.0, 0.0, 0.0), x), 1.0).is_err());
        assert!(ray_sphere_exit(&ray(Vec3::new(0.0, 2.0, 0.0), x), 1.0).is_err());
    }

    #[test]
    fn area_weights_examples() {
        let w = area_weights(4, 2);
        assert_eq!(w.len(), 8);
        for a in w {
            assert_abs_diff_eq!(a, PI / 2.0, epsilon = 1e-15);
        }
        let rows = area_weight_rows(37, 19);
        for y in 0..19 {
            assert_abs_diff_eq!(rows[y], rows[18 - y], epsilon = 1e-15);
        }
        // Equator rows outweigh polar rows.
        assert!(rows[9] > rows[0]);
    }

    #[test]
    fn v_coordinate_examples() {
        assert_abs_diff_eq!(v_coordinate(1, 3), 0.0, epsilon = 1e-15);
        assert!(v_coordinate(0, 4096) > 0.9999);
        for y in 0..10 {
            assert_abs_diff_eq!(v_coordinate(y, 10), v_coordinate(9 - y, 10), epsilon = 1e-15);
        }
    }

    #[test]
    fn pose_algebra() {
        let p = Pose::from_euler(0.3, -0.1, 1.2, Vec3::new(0.2, -0.3, 0.5));
        let id = Pose::identity();
        assert_eq!(id.compose(&p), p);
        let e = p.compose(&p.inverse());
        assert_abs_diff_eq!(e.rotation, Mat3::identity(), epsilon = 1e-12);
        assert_abs_diff_eq!(e.translation, Vec3::zeros(), epsilon = 1e-12);
        let x = Vec3::new(1.0, 2.0, -3.0);
        assert_abs_diff_eq!(p.inverse().apply(&p.apply(&x)), x, epsilon = 1e-12);
        let t = Pose::from_translation(Vec3::new(0.1, 0.2, 0.3));
        let back = Pose::from_translation(-t.translation);
        assert_eq!(t.compose(&back), id);
        assert!(Pose::new(Mat3::identity() * 2.0, Vec3::zeros()).is_err());
        let flip = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(Pose::new(flip, Vec3::zeros()).is_err());
    }

    #[test]
    fn yaw_shifts_azimuth() {
        let yaw = Pose::from_yaw(0.3);
        let d = yaw.rotation * angles_to_direction(Angles { theta: 0.2, phi: 0.1 });
        let a = project_point_erp(&d).unwrap();
        assert_abs_diff_eq!(a.theta, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(a.phi, 0.1, epsilon = 1e-14);
    }

    #[test]
    fn pose_json_round_trip() {
        let p = Pose::from_euler(0.3, -0.1, 1.2, Vec3::new(0.2, -0.3, 0.5));
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"units\":\"metres\""));
        let q: Pose = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let bad = r#"{"rotation":[1,0,0,0,1,0,0,0,1],"translation":[0,0,0],"extra":1}"#;
        assert!(serde_json::from_str::<Pose>(bad).is_err());
        let skew = r#"{"rotation":[1,1,0,0,1,0,0,0,1],"translation":[0,0,0]}"#;
        assert!(serde_json::from_str::<Pose>(skew).is_err());
    }

    #[test]
    fn sample_transform_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let zero = sample_transform(
            TEMPORAL_ROTATION_RANGE,
            TEMPORAL_TRANSLATION_RANGE,
            0.0,
            &mut rng,
        )
        .unwrap();
        assert_eq!(zero, Pose::identity());
        for _ in 0..200 {
            let p = sample_transform(
                TEMPORAL_ROTATION_RANGE,
                TEMPORAL_TRANSLATION_RANGE,
                1.0,
                &mut rng,
            )
            .unwrap();
            assert!(p.translation.amax() <= 0.01);
            // Rotation angle of a composition of three bounded rotations.
            let angle = ((p.rotation.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
            assert!(angle <= 3.0 * TEMPORAL_ROTATION_RANGE + 1e-12);
        }
        let a = sample_transform(0.1, 0.1, 1.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = sample_transform(0.1, 0.1, 1.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }
}

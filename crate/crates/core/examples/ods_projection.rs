//! Projects a few scene points into both ODS eyes and back, and prints
//! their stereo disparity against the closed form `2 asin(r / rho)`.

use msi_forge::geometry::{
    angles_to_direction, ods_ray, project_point_erp, project_point_ods, Eye, Vec3, ViewingCircle,
};

fn main() -> msi_forge::Result<()> {
    let circle = ViewingCircle::default();
    println!("viewing circle radius {} m", circle.radius);
    println!("{:>24} {:>12} {:>12} {:>12} {:>10}", "point", "theta_L", "theta_R", "disparity", "reproj");
    for p in [
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, -0.5, 2.0),
        Vec3::new(-3.0, 1.0, -4.0),
        Vec3::new(20.0, 2.0, 0.5),
    ] {
        let l = project_point_ods(&p, circle, Eye::Left)?;
        let r = project_point_ods(&p, circle, Eye::Right)?;
        // Walk back along the left-eye ray to the point's depth.
        let ray = ods_ray(l, circle, Eye::Left);
        let t = (p - ray.origin).dot(&ray.direction);
        let err = (ray.at(t) - p).norm();
        let rho = p.x.hypot(p.z);
        let expected = 2.0 * (circle.radius / rho).asin();
        println!(
            "{:>24} {:>12.6} {:>12.6} {:>12.3e} {:>10.1e}",
            format!("({}, {}, {})", p.x, p.y, p.z),
            l.theta,
            r.theta,
            (l.theta - r.theta) - expected,
            err
        );
    }
    let a = project_point_erp(&Vec3::new(1.0, 0.0, -1.0))?;
    println!("ERP: +x/-z lies at theta {:.4} rad, direction {:?}", a.theta, angles_to_direction(a).as_slice());
    Ok(())
}

//! PSNR, SSIM and frame-to-frame flicker on a few synthetic images.

use msi_forge::imaging::ErpImage;
use msi_forge::metrics::{f2f_metric, psnr, psnr_spherical, ssim, MetricReport, F2F_SIGMA};

fn pattern(w: usize, h: usize, shift: f64) -> ErpImage {
    ErpImage::from_fn(w, h, 3, |x, y, c| {
        0.5 + 0.35 * ((x as f64 + shift) * 0.2 + c as f64).sin() * (y as f64 * 0.15).cos()
    })
}

fn main() -> msi_forge::Result<()> {
    let (w, h) = (128, 64);
    let truth = pattern(w, h, 0.0);
    let brighter = ErpImage::from_fn(w, h, 3, |x, y, c| truth.get(x, y, c) + 0.1);
    let shifted = pattern(w, h, 1.5);
    println!("constant +0.1: psnr {:.2} dB, ssim {:.4}", psnr(&brighter, &truth)?, ssim(&brighter, &truth)?);
    println!(
        "shifted: psnr {:.2} dB (solid-angle weighted {:.2} dB), ssim {:.4}",
        psnr(&shifted, &truth)?,
        psnr_spherical(&shifted, &truth)?,
        ssim(&shifted, &truth)?
    );

    let steady: Vec<ErpImage> = (0..4).map(|_| truth.clone()).collect();
    let flicker: Vec<ErpImage> = (0..4).map(|k| pattern(w, h, 3.0 * (k % 2) as f64)).collect();
    println!("f2f steady {:.5}, flickering {:.5}", f2f_metric(&steady, F2F_SIGMA)?, f2f_metric(&flicker, F2F_SIGMA)?);

    let report = MetricReport::from_pairs([
        ("brighter".to_owned(), &brighter, &truth),
        ("shifted".to_owned(), &shifted, &truth),
    ])?;
    print!("{}", report.to_table());
    Ok(())
}

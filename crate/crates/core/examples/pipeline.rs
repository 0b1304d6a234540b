//! Affine then per-slice flow on a moved and locally deformed phantom.

use regflow::metrics::pwa;
use regflow::optim::{register_volume_pipeline, PipelineConfig};
use regflow::phantom::{apply_known_flows, apply_known_transform, bump_flows, make_phantom, PhantomSpec};
use regflow::AffineTransform;

fn main() -> regflow::Result<()> {
    let dims = [64, 64, 16];
    let fixed = make_phantom(&PhantomSpec::for_grid(dims).with_blur(3.0))?;
    let c = AffineTransform::grid_center(dims);
    let t = AffineTransform::translation([1.5, 2.0, 0.0]).compose(&AffineTransform::rotate_content_z(-4.0, c));
    let (moved, _) = apply_known_transform(&fixed, &t)?;
    let moving = apply_known_flows(&moved, &bump_flows(dims, [36.0, 30.0], 8.0, 2.5, [1.0, -0.5]))?;

    let res = register_volume_pipeline(&moving.volume, &fixed.volume, &PipelineConfig::default())?;
    for w in &res.warnings {
        eprintln!("warning: {w}");
    }
    let score = |v| pwa(std::slice::from_ref(v), &fixed.volume).map(|p| p.total);
    println!("PWA unregistered {:.6}", score(&moving.volume)?);
    println!("PWA affine       {:.6}", score(&res.affine_warped)?);
    println!("PWA affine+flow  {:.6}", score(&res.warped)?);
    Ok(())
}

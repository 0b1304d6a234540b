//! Head angle of a phantom rotated in-plane by a few known angles.

use regflow::metrics::head_angle;
use regflow::phantom::{apply_known_transform, make_phantom, PhantomSpec};
use regflow::AffineTransform;

fn main() -> regflow::Result<()> {
    let dims = [256, 256, 55];
    let p = make_phantom(&PhantomSpec::for_grid(dims))?;
    let c = AffineTransform::grid_center(dims);
    for deg in [0.0, 3.0, 7.0, 12.0, -5.0] {
        let (q, _) = apply_known_transform(&p, &AffineTransform::rotate_content_z(deg, c))?;
        let a = head_angle(&q.volume)?;
        println!("rotated {deg:>5.1}°  measured {:>6.2}°", a.degrees);
    }
    Ok(())
}

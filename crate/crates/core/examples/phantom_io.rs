//! Builds a phantom, writes it in the volume format and reads it back.
//!
//! cargo run --example phantom_io -- /tmp/phantom

use regflow::io::{load_mask, load_volume, save_mask, save_volume};
use regflow::phantom::{make_phantom, PhantomSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "phantom_out".into());
    std::fs::create_dir_all(&dir)?;
    let dir = std::path::Path::new(&dir);

    let spec = PhantomSpec::for_grid([96, 96, 24]).with_noise(0.01, 3);
    let p = make_phantom(&spec)?;
    save_volume(dir.join("volume"), &p.volume)?;
    save_mask(dir.join("brain"), &p.brain)?;
    save_mask(dir.join("vent"), &p.vent)?;

    let back = load_volume(dir.join("volume"))?;
    assert_eq!(back, p.volume);
    let vent = load_mask(dir.join("vent"))?;
    println!(
        "{:?} voxels at {:?} mm; brain {} voxels, ventricles {} voxels",
        back.dims(),
        back.spacing(),
        p.brain.count(),
        vent.count()
    );
    Ok(())
}

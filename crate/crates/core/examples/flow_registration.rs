//! Dense flow between two slices: a 2 px shift plus a local bump.

use regflow::optim::{average_flow_magnitude, register_flow, OptimizerConfig, Pyramid};
use regflow::phantom::{apply_known_flows, bump_flows, make_phantom, PhantomSpec};
use regflow::resample::warp_flow;
use regflow::{LossWeights, Slice};

fn mse(a: &Slice, b: &Slice) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| ((x - y) as f64).powi(2)).sum::<f64>() / a.len() as f64
}

fn main() -> regflow::Result<()> {
    let n = 128;
    let dims = [n, n, 12];
    let p = make_phantom(&PhantomSpec::for_grid(dims).with_blur(3.0))?;
    let bumped = apply_known_flows(&p, &bump_flows(dims, [70.0, 64.0], 16.0, 3.0, [1.0, 0.5]))?;
    let f = p.volume.slice(7);
    let s = bumped.volume.slice(7);
    let m = Slice::from_fn([n, n], |x, y| if x >= 2 { s.get(x - 2, y) } else { 0.0 })?;

    let reg = register_flow(&m, &f, &LossWeights::default(), &Pyramid::for_size(n), &OptimizerConfig::flow())?;
    let warped = warp_flow(&m, &reg.flow)?;
    println!("levels {:?}", Pyramid::for_size(n).levels());
    println!("best loss per level {:.4?}", reg.level_losses);
    println!("mean flow magnitude {:.3} px", average_flow_magnitude(&reg.flow));
    println!("slice MSE {:.6} -> {:.6}", mse(&m, &f), mse(&warped, &f));
    Ok(())
}

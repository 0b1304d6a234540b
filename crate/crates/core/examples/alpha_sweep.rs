//! Average flow magnitude as the Charbonnier exponent grows.

use regflow::optim::{alpha_sweep, OptimizerConfig, Pyramid, DEFAULT_ALPHAS};
use regflow::phantom::alpha_sweep_pair;
use regflow::LossWeights;

fn main() -> regflow::Result<()> {
    let (m, f) = alpha_sweep_pair(128)?;
    let rows = alpha_sweep(
        &m,
        &f,
        &LossWeights::default(),
        &Pyramid::for_size(128),
        &OptimizerConfig::flow(),
        &DEFAULT_ALPHAS,
    )?;
    println!("alpha  magnitude  total");
    for r in rows {
        println!("{:.2}   {:.4}     {:.4}", r.alpha, r.average_flow_magnitude, r.total);
    }
    Ok(())
}

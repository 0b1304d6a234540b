//! Scores a shifted, noisy phantom against the clean one and prints the
//! report as CSV.

use regflow::metrics::{evaluate_volume, write_report_csv, EvaluationInput, StructureMasks};
use regflow::phantom::{apply_known_transform, make_phantom, PhantomSpec};
use regflow::AffineTransform;

fn main() -> regflow::Result<()> {
    let spec = PhantomSpec::for_grid([64, 64, 16]);
    let fixed = make_phantom(&spec)?;
    let noisy = make_phantom(&spec.clone().with_noise(0.03, 1))?;
    let (moved, _) = apply_known_transform(&noisy, &AffineTransform::translation([1.0, -2.0, 0.0]))?;

    let masks = |p: &regflow::phantom::Phantom| StructureMasks {
        brain: p.brain.clone(),
        vent: p.vent.clone(),
        wml: p.wml.clone(),
    };
    let (reg, orig) = (masks(&moved), masks(&noisy));
    let report = evaluate_volume(&EvaluationInput {
        name: "shifted",
        registered: &moved.volume,
        fixed: &fixed.volume,
        registered_masks: Some(&reg),
        original_masks: Some(&orig),
        fixed_brain: Some(&fixed.brain),
    });
    write_report_csv(std::io::stdout().lock(), &[report])
}

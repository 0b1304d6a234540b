//! Validation battery: structural integrity (PV, ΔPV, volume ratio, SSD),
//! spatial alignment (head angle, PWA, Dice) and intensity similarity (MI,
//! Pearson r, MAID), plus atlas and heatmap synthesis.

mod alignment;
mod head_angle;
mod intensity;
mod report;
mod structural;

pub use alignment::{brain_heatmap, dsc, pwa, Pwa};
pub use head_angle::{head_angle, otsu_bin, HeadAngle, SliceAngle, CANDIDATE_SLICES, SWEEP_STEP_DEG};
pub use intensity::{build_atlas, entropy, maid, mutual_information, pearson_r, MAID_ZP_NULLED_BINS};
pub use report::{evaluate_volume, write_report_csv, EvaluationInput, MetricReport, StructureMasks, REPORT_COLUMNS};
pub use structural::{
    boundary, delta_pv, delta_ssd, proportional_volume, squared_distance_transform, ssd, structure_volume,
    volume_ratio,
};

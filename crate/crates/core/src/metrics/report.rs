//! Per-volume metric report and its CSV layout.

use std::io::Write;

use crate::error::Result;
use crate::volume::{LabelMask, Volume};

use super::alignment::{dsc, pwa};
use super::head_angle::head_angle;
use super::intensity::{maid, mutual_information, pearson_r, MAID_ZP_NULLED_BINS};
use super::structural::{delta_pv, delta_ssd, proportional_volume, ssd, volume_ratio};

/// Column order of the report CSV. Never reordered within a major version.
pub const REPORT_COLUMNS: [&str; 19] = [
    "volume",
    "pv_vent",
    "pv_wml",
    "delta_pv_vent",
    "delta_pv_wml",
    "dv_brain",
    "dv_vent",
    "dv_wml",
    "ssd",
    "delta_ssd",
    "head_angle",
    "pwa_total",
    "dsc",
    "mi",
    "r",
    "maid",
    "maid_zp",
    "warnings",
    "error",
];

/// Brain, ventricle and lesion masks on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureMasks {
    pub brain: LabelMask,
    pub vent: LabelMask,
    pub wml: LabelMask,
}

/// Metrics for one registered volume. `None` means not computed (inputs
/// missing) or failed; failures are described in `error`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricReport {
    pub volume: String,
    pub pv_vent: Option<f64>,
    pub pv_wml: Option<f64>,
    pub delta_pv_vent: Option<f64>,
    pub delta_pv_wml: Option<f64>,
    pub dv_brain: Option<f64>,
    pub dv_vent: Option<f64>,
    pub dv_wml: Option<f64>,
    /// Ventricle-to-brain surface distance, mm.
    pub ssd: Option<f64>,
    pub delta_ssd: Option<f64>,
    pub head_angle: Option<f64>,
    pub pwa_total: Option<f64>,
    pub dsc: Option<f64>,
    pub mi: Option<f64>,
    pub r: Option<f64>,
    pub maid: Option<f64>,
    pub maid_zp: Option<f64>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

/// Everything needed to score one registered volume.
#[derive(Debug, Clone, Copy)]
pub struct EvaluationInput<'a> {
    pub name: &'a str,
    pub registered: &'a Volume,
    pub fixed: &'a Volume,
    /// Masks warped along with the volume.
    pub registered_masks: Option<&'a StructureMasks>,
    /// Masks of the moving volume before registration.
    pub original_masks: Option<&'a StructureMasks>,
    /// Brain mask of the fixed volume, for Dice.
    pub fixed_brain: Option<&'a LabelMask>,
}

impl MetricReport {
    pub fn failed(name: &str, error: String) -> Self {
        Self {
            volume: name.to_string(),
            error: Some(error),
            ..Self::default()
        }
    }

    fn record<T>(&mut self, what: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                let msg = format!("{what}: {e}");
                self.error = Some(match self.error.take() {
                    Some(prev) => format!("{prev}; {msg}"),
                    None => msg,
                });
                None
            }
        }
    }

    /// True when no metric could be computed at all.
    pub fn is_total_failure(&self) -> bool {
        self.error.is_some()
            && [self.head_angle, self.pwa_total, self.mi, self.r, self.maid, self.maid_zp, self.pv_vent, self.dsc]
                .iter()
                .all(Option::is_none)
    }

    fn cells(&self) -> Vec<String> {
        let f = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        vec![
            self.volume.clone(),
            f(self.pv_vent),
            f(self.pv_wml),
            f(self.delta_pv_vent),
            f(self.delta_pv_wml),
            f(self.dv_brain),
            f(self.dv_vent),
            f(self.dv_wml),
            f(self.ssd),
            f(self.delta_ssd),
            f(self.head_angle),
            f(self.pwa_total),
            f(self.dsc),
            f(self.mi),
            f(self.r),
            f(self.maid),
            f(self.maid_zp),
            self.warnings.join("; "),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// Runs the full battery on one volume. Individual metric failures are
/// recorded in the report rather than aborting.
pub fn evaluate_volume(input: &EvaluationInput<'_>) -> MetricReport {
    let mut rep = MetricReport {
        volume: input.name.to_string(),
        ..MetricReport::default()
    };
    let (reg, fixed) = (input.registered, input.fixed);

    if let Some(h) = rep.record("head_angle", head_angle(reg)) {
        if h.degenerate {
            rep.warnings.push("head angle: isotropic silhouette".into());
        }
        rep.head_angle = Some(h.degrees);
    }
    rep.pwa_total = rep.record("pwa", pwa(std::slice::from_ref(reg), fixed)).map(|p| p.total);
    rep.mi = rep.record("mi", mutual_information(reg, fixed));
    rep.r = rep.record("r", pearson_r(reg, fixed));
    rep.maid = rep.record("maid", maid(reg, fixed, 0));
    rep.maid_zp = rep.record("maid_zp", maid(reg, fixed, MAID_ZP_NULLED_BINS));

    if let Some(rm) = input.registered_masks {
        rep.pv_vent = rep.record("pv_vent", proportional_volume(&rm.vent, &rm.brain));
        rep.pv_wml = rep.record("pv_wml", proportional_volume(&rm.wml, &rm.brain));
        rep.ssd = rep.record("ssd", ssd(&rm.vent, &rm.brain));
        if let Some(fb) = input.fixed_brain {
            rep.dsc = rep.record("dsc", dsc(&rm.brain, fb));
        }
        if let Some(om) = input.original_masks {
            rep.delta_pv_vent = rep.record("delta_pv_vent", delta_pv(&om.vent, &om.brain, &rm.vent, &rm.brain));
            rep.delta_pv_wml = rep.record("delta_pv_wml", delta_pv(&om.wml, &om.brain, &rm.wml, &rm.brain));
            rep.dv_brain = rep.record("dv_brain", volume_ratio(&om.brain, &rm.brain));
            rep.dv_vent = rep.record("dv_vent", volume_ratio(&om.vent, &rm.vent));
            rep.dv_wml = rep.record("dv_wml", volume_ratio(&om.wml, &rm.wml));
            if let Some(reg_ssd) = rep.ssd {
                let orig = ssd(&om.vent, &om.brain);
                if let Some(orig) = rep.record("ssd_orig", orig) {
                    rep.delta_ssd = rep.record("delta_ssd", delta_ssd(orig, reg_ssd));
                }
            }
        }
    }
    rep
}

/// Writes the header and one row per report, in the given order.
pub fn write_report_csv<W: Write>(out: W, reports: &[MetricReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_COLUMNS)?;
    for r in reports {
        w.write_record(r.cells())?;
    }
    w.flush().map_err(|e| crate::error::Error::io("<report>", e))?;
    Ok(())
}

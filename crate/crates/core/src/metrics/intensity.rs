//! Intensity-similarity metrics and atlas synthesis.

use crate::error::{Error, Result};
use crate::losses::pearson;
use crate::volume::{histogram, intensity_bin, Volume, HISTOGRAM_BINS};

fn check_grid(a: &Volume, b: &Volume) -> Result<()> {
    if a.same_grid(b) {
        Ok(())
    } else {
        Err(Error::DimsMismatch(format!("{:?} vs {:?}", a.dims(), b.dims())))
    }
}

/// Mutual information (bits) from the 256 x 256 joint intensity histogram.
pub fn mutual_information(m: &Volume, f: &Volume) -> Result<f64> {
    check_grid(m, f)?;
    let n = m.len() as f64;
    let mut joint = vec![0u64; HISTOGRAM_BINS * HISTOGRAM_BINS];
    let mut pm = vec![0u64; HISTOGRAM_BINS];
    let mut pf = vec![0u64; HISTOGRAM_BINS];
    for (&a, &b) in m.data().iter().zip(f.data()) {
        let (i, j) = (intensity_bin(a), intensity_bin(b));
        joint[i * HISTOGRAM_BINS + j] += 1;
        pm[i] += 1;
        pf[j] += 1;
    }
    let mut mi = 0.0;
    for i in 0..HISTOGRAM_BINS {
        if pm[i] == 0 {
            continue;
        }
        for j in 0..HISTOGRAM_BINS {
            let c = joint[i * HISTOGRAM_BINS + j];
            if c == 0 {
                continue;
            }
            let pj = c as f64 / n;
            mi += pj * (pj / ((pm[i] as f64 / n) * (pf[j] as f64 / n))).log2();
        }
    }
    Ok(mi.max(0.0))
}

/// Shannon entropy (bits) of the 256-bin intensity histogram.
pub fn entropy(v: &Volume) -> f64 {
    histogram(v, 0)
        .expect("histogram without nulling is never empty")
        .bins()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Pearson correlation of voxel intensities.
pub fn pearson_r(m: &Volume, f: &Volume) -> Result<f64> {
    check_grid(m, f)?;
    let a: Vec<f64> = m.data().iter().map(|&x| x as f64).collect();
    let b: Vec<f64> = f.data().iter().map(|&x| x as f64).collect();
    pearson(&a, &b).ok_or_else(|| Error::Degenerate("zero-variance volume".into()))
}

/// Voxel-wise mean of registered volumes.
pub fn build_atlas(registered: &[Volume]) -> Result<Volume> {
    let first = registered
        .first()
        .ok_or_else(|| Error::Empty("no volumes to average".into()))?;
    let mut acc = vec![0.0f64; first.len()];
    for v in registered {
        check_grid(first, v)?;
        for (a, &x) in acc.iter_mut().zip(v.data()) {
            *a += x as f64;
        }
    }
    let n = registered.len() as f64;
    Volume::new(
        first.dims(),
        first.spacing(),
        acc.into_iter().map(|s| (s / n) as f32).collect(),
    )
}

/// Mean absolute difference between the normalized 256-bin histograms of
/// `a` and `f`, after zeroing bins `[0, nulled_low_bins)`.
pub fn maid(a: &Volume, f: &Volume, nulled_low_bins: usize) -> Result<f64> {
    let ha = histogram(a, nulled_low_bins)?;
    let hf = histogram(f, nulled_low_bins)?;
    Ok(ha
        .bins()
        .iter()
        .zip(hf.bins())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / HISTOGRAM_BINS as f64)
}

/// Background bins nulled for the MAID-zp variant (bins 0 through 20).
pub const MAID_ZP_NULLED_BINS: usize = 21;

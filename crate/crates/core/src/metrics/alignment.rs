//! Spatial-alignment metrics: pixelwise agreement, Dice overlap and
//! average-mask heatmaps.

use crate::error::{Error, Result};
use crate::volume::{LabelMask, Volume};

#[derive(Debug, Clone, PartialEq)]
pub struct Pwa {
    /// Mean squared error per axial slice, averaged over volumes and pixels.
    pub per_slice: Vec<f64>,
    /// Mean of `per_slice`.
    pub total: f64,
}

/// Pixelwise agreement of a registered set against the fixed volume.
pub fn pwa(registered: &[Volume], f: &Volume) -> Result<Pwa> {
    if registered.is_empty() {
        return Err(Error::Empty("registered set".into()));
    }
    if let Some(bad) = registered.iter().find(|v| !v.same_grid(f)) {
        return Err(Error::DimsMismatch(format!(
            "{:?} vs fixed {:?}",
            bad.dims(),
            f.dims()
        )));
    }
    let [nx, ny, nz] = f.dims();
    let nxy = nx * ny;
    let per_slice: Vec<f64> = (0..nz)
        .map(|z| {
            let range = z * nxy..(z + 1) * nxy;
            let fixed = &f.data()[range.clone()];
            let sum: f64 = registered
                .iter()
                .map(|v| {
                    v.data()[range.clone()]
                        .iter()
                        .zip(fixed)
                        .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
                        .sum::<f64>()
                })
                .sum();
            sum / (registered.len() * nxy) as f64
        })
        .collect();
    let total = per_slice.iter().sum::<f64>() / nz as f64;
    Ok(Pwa { per_slice, total })
}

/// Dice similarity `2|A ∩ B| / (|A| + |B|)`.
pub fn dsc(bm: &LabelMask, bf: &LabelMask) -> Result<f64> {
    if !bm.same_grid(bf) {
        return Err(Error::DimsMismatch(format!(
            "{:?} vs {:?}",
            bm.dims(),
            bf.dims()
        )));
    }
    let (mut inter, mut a, mut b) = (0usize, 0usize, 0usize);
    for (&x, &y) in bm.data().iter().zip(bf.data()) {
        let (x, y) = (x != 0, y != 0);
        inter += (x && y) as usize;
        a += x as usize;
        b += y as usize;
    }
    if a + b == 0 {
        return Err(Error::Empty("both masks are empty; Dice is undefined".into()));
    }
    Ok(2.0 * inter as f64 / (a + b) as f64)
}

/// Voxel-wise mean of binary masks, values in [0, 1].
pub fn brain_heatmap(masks: &[LabelMask]) -> Result<Volume> {
    let first = masks
        .first()
        .ok_or_else(|| Error::Empty("no masks for the heatmap".into()))?;
    if let Some(bad) = masks.iter().find(|m| !m.same_grid(first)) {
        return Err(Error::DimsMismatch(format!(
            "{:?} vs {:?}",
            bad.dims(),
            first.dims()
        )));
    }
    let mut acc = vec![0u32; first.len()];
    for m in masks {
        for (a, &v) in acc.iter_mut().zip(m.data()) {
            *a += v as u32;
        }
    }
    let n = masks.len() as f64;
    Volume::new(
        first.dims(),
        first.spacing(),
        acc.into_iter().map(|c| (c as f64 / n) as f32).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vol(vals: Vec<f32>) -> Volume {
        Volume::new([2, 2, vals.len() / 4], [1.0; 3], vals).unwrap()
    }

    #[test]
    fn pwa_examples() {
        let f = vol((0..8).map(|i| i as f32 / 10.0).collect());
        let p = pwa(&[f.clone(), f.clone()], &f).unwrap();
        assert_eq!(p.per_slice, vec![0.0, 0.0]);
        let plus = f.map(|x| x + 0.1).unwrap();
        let p = pwa(std::slice::from_ref(&plus), &f).unwrap();
        assert!(p.per_slice.iter().all(|&x| (x - 0.01).abs() < 1e-7));
        let minus = f.map(|x| x - 0.1).unwrap();
        let p = pwa(&[plus, minus], &f).unwrap();
        assert!((p.total - 0.01).abs() < 1e-7);
        assert!(pwa(&[], &f).is_err());
    }

    #[test]
    fn dsc_examples() {
        let m = |d: Vec<u8>| LabelMask::new([4, 2, 1], [1.0; 3], d).unwrap();
        let a = m(vec![1, 1, 0, 0, 1, 1, 0, 0]);
        assert_eq!(dsc(&a, &a).unwrap(), 1.0);
        let b = m(vec![0, 0, 1, 1, 0, 0, 1, 1]);
        assert_eq!(dsc(&a, &b).unwrap(), 0.0);
        let c = m(vec![0, 1, 1, 0, 0, 1, 1, 0]);
        assert_eq!(dsc(&a, &c).unwrap(), 0.5);
        assert_eq!(dsc(&c, &a).unwrap(), 0.5);
        let e = m(vec![0; 8]);
        assert!(dsc(&e, &e).is_err());
    }

    #[test]
    fn heatmap_examples() {
        let m = |d: Vec<u8>| LabelMask::new([2, 2, 1], [1.0; 3], d).unwrap();
        let a = m(vec![1, 1, 0, 0]);
        let b = m(vec![0, 0, 1, 0]);
        assert_eq!(brain_heatmap(&[a.clone(), a.clone(), a.clone()]).unwrap().data(), &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(brain_heatmap(&[a, b]).unwrap().data(), &[0.5, 0.5, 0.5, 0.0]);
        assert!(brain_heatmap(&[]).is_err());
    }
}

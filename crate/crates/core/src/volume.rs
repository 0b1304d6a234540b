//! Volumes, slices, label masks and intensity histograms.
//!
//! All grids are stored x-fastest: the linear index of voxel `(x, y, z)` is
//! `x + nx * (y + ny * z)`. Intensities are 32-bit floats; computations that
//! feed losses or metrics widen to `f64`.

use crate::error::{Error, Result};

/// Number of intensity bins used by every histogram in the toolkit.
pub const HISTOGRAM_BINS: usize = 256;

fn check_dims3(dims: [usize; 3]) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::InvalidDims(format!("{dims:?} has a zero axis")));
    }
    Ok(())
}

fn check_spacing(spacing: [f64; 3]) -> Result<()> {
    if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidDims(format!(
            "spacing {spacing:?} must be positive and finite"
        )));
    }
    Ok(())
}

/// A 3D scalar grid with physical voxel spacing in millimetres.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: [usize; 3],
    spacing: [f64; 3],
    data: Vec<f32>,
}

impl Volume {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], data: Vec<f32>) -> Result<Self> {
        check_dims3(dims)?;
        check_spacing(spacing)?;
        let n = dims[0] * dims[1] * dims[2];
        if data.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            dims,
            spacing,
            data,
        })
    }

    pub fn zeros(dims: [usize; 3], spacing: [f64; 3]) -> Result<Self> {
        Self::filled(dims, spacing, 0.0)
    }

    pub fn filled(dims: [usize; 3], spacing: [f64; 3], value: f32) -> Result<Self> {
        check_dims3(dims)?;
        Self::new(dims, spacing, vec![value; dims[0] * dims[1] * dims[2]])
    }

    /// Builds a volume by evaluating `f(x, y, z)` at every voxel.
    pub fn from_fn(
        dims: [usize; 3],
        spacing: [f64; 3],
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        check_dims3(dims)?;
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    data.push(f(x, y, z));
                }
            }
        }
        Self::new(dims, spacing, data)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f32 {
        self.data[self.index(x, y, z)]
    }

    /// Voxel value with zero outside the grid.
    #[inline]
    pub fn get_or_zero(&self, x: isize, y: isize, z: isize) -> f32 {
        let [nx, ny, nz] = self.dims;
        if x < 0 || y < 0 || z < 0 || x as usize >= nx || y as usize >= ny || z as usize >= nz {
            0.0
        } else {
            self.get(x as usize, y as usize, z as usize)
        }
    }

    /// Applies `f` to every value, keeping geometry.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> Result<Self> {
        Self::new(self.dims, self.spacing, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn same_grid(&self, other: &Volume) -> bool {
        self.dims == other.dims
    }

    pub fn min_max(&self) -> (f32, f32) {
        self.data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Axial slice `z`.
    pub fn slice(&self, z: usize) -> Slice {
        let [nx, ny, _] = self.dims;
        let start = nx * ny * z;
        Slice {
            dims: [nx, ny],
            data: self.data[start..start + nx * ny].to_vec(),
            parent_z: Some(z),
        }
    }

    /// Rebuilds a volume from axial slices, one per z.
    pub fn from_slices(slices: &[Slice], spacing: [f64; 3]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::Empty("no slices to stack".into()))?;
        let [nx, ny] = first.dims;
        let mut data = Vec::with_capacity(nx * ny * slices.len());
        for s in slices {
            if s.dims != first.dims {
                return Err(Error::DimsMismatch(format!(
                    "slice {:?} vs {:?}",
                    s.dims, first.dims
                )));
            }
            data.extend_from_slice(&s.data);
        }
        Self::new([nx, ny, slices.len()], spacing, data)
    }

    /// Rescales values to [0, 1] by `(v - min) / (max - min)`. Constant
    /// volumes map to all zeros.
    pub fn normalized(&self) -> Self {
        let (lo, hi) = self.min_max();
        let range = (hi - lo) as f64;
        let data = if range > 0.0 {
            self.data
                .iter()
                .map(|&v| ((v as f64 - lo as f64) / range) as f32)
                .collect()
        } else {
            vec![0.0; self.data.len()]
        };
        Self {
            dims: self.dims,
            spacing: self.spacing,
            data,
        }
    }
}

/// A 2D image, usually an axial slice of a [`Volume`].
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    dims: [usize; 2],
    data: Vec<f32>,
    parent_z: Option<usize>,
}

impl Slice {
    pub fn new(dims: [usize; 2], data: Vec<f32>) -> Result<Self> {
        if dims[0] == 0 || dims[1] == 0 {
            return Err(Error::InvalidDims(format!("{dims:?} has a zero axis")));
        }
        if data.len() != dims[0] * dims[1] {
            return Err(Error::SizeMismatch {
                expected: dims[0] * dims[1],
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            dims,
            data,
            parent_z: None,
        })
    }

    pub fn from_fn(dims: [usize; 2], mut f: impl FnMut(usize, usize) -> f32) -> Result<Self> {
        let mut data = Vec::with_capacity(dims[0] * dims[1]);
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                data.push(f(x, y));
            }
        }
        Self::new(dims, data)
    }

    pub fn with_parent(mut self, z: usize) -> Self {
        self.parent_z = Some(z);
        self
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn parent_z(&self) -> Option<usize> {
        self.parent_z
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[x + self.dims[0] * y]
    }

    pub fn is_constant(&self) -> bool {
        self.data.windows(2).all(|w| w[0] == w[1])
    }
}

/// Binary mask on a volume grid. Values are exactly 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    dims: [usize; 3],
    spacing: [u64; 3],
    data: Vec<u8>,
}

impl LabelMask {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], data: Vec<u8>) -> Result<Self> {
        check_dims3(dims)?;
        check_spacing(spacing)?;
        let n = dims[0] * dims[1] * dims[2];
        if data.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|&v| v > 1) {
            return Err(Error::InvalidParameter(format!(
                "mask value {} at index {i} is not 0 or 1",
                data[i]
            )));
        }
        Ok(Self {
            dims,
            spacing: spacing.map(f64::to_bits),
            data,
        })
    }

    pub fn empty_like(v: &Volume) -> Self {
        Self {
            dims: v.dims,
            spacing: v.spacing.map(f64::to_bits),
            data: vec![0; v.len()],
        }
    }

    pub fn from_fn(
        dims: [usize; 3],
        spacing: [f64; 3],
        mut f: impl FnMut(usize, usize, usize) -> bool,
    ) -> Result<Self> {
        check_dims3(dims)?;
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    data.push(f(x, y, z) as u8);
                }
            }
        }
        Self::new(dims, spacing, data)
    }

    /// Binarizes a float volume: `value >= threshold` becomes 1.
    pub fn from_threshold(v: &Volume, threshold: f32) -> Self {
        Self {
            dims: v.dims,
            spacing: v.spacing.map(f64::to_bits),
            data: v.data.iter().map(|&x| (x >= threshold) as u8).collect(),
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing.map(f64::from_bits)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.data[self.index(x, y, z)] != 0
    }

    /// Number of foreground voxels.
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn to_volume(&self) -> Volume {
        Volume {
            dims: self.dims,
            spacing: self.spacing(),
            data: self.data.iter().map(|&v| v as f32).collect(),
        }
    }

    pub fn same_grid(&self, other: &LabelMask) -> bool {
        self.dims == other.dims
    }

    /// True when every foreground voxel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &LabelMask) -> bool {
        self.same_grid(other)
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(&a, &b)| a == 0 || b != 0)
    }
}

/// Intensity histogram over [0, 1] with [`HISTOGRAM_BINS`] bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    bins: Vec<f64>,
    normalized: bool,
}

impl Histogram {
    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }
}

/// Bin index of an intensity in [0, 1]; values outside are clamped.
#[inline]
pub fn intensity_bin(v: f32) -> usize {
    let b = (v as f64 * HISTOGRAM_BINS as f64).floor();
    if b <= 0.0 {
        0
    } else {
        (b as usize).min(HISTOGRAM_BINS - 1)
    }
}

/// Normalized 256-bin histogram with bins `[0, nulled_low_bins)` zeroed
/// before normalization.
pub fn histogram(v: &Volume, nulled_low_bins: usize) -> Result<Histogram> {
    let mut bins = vec![0.0f64; HISTOGRAM_BINS];
    for &x in v.data() {
        bins[intensity_bin(x)] += 1.0;
    }
    for b in bins.iter_mut().take(nulled_low_bins.min(HISTOGRAM_BINS)) {
        *b = 0.0;
    }
    let total: f64 = bins.iter().sum();
    if total <= 0.0 {
        return Err(Error::EmptyHistogram(nulled_low_bins));
    }
    for b in &mut bins {
        *b /= total;
    }
    Ok(Histogram {
        bins,
        normalized: true,
    })
}

/// Sample positions of an align-corners linear resize along one axis.
fn axis_weights(n_in: usize, n_out: usize) -> Vec<(usize, usize, f64)> {
    (0..n_out)
        .map(|i| {
            let pos = if n_in == 1 {
                0.0
            } else if n_out == 1 {
                (n_in - 1) as f64 / 2.0
            } else {
                i as f64 * (n_in - 1) as f64 / (n_out - 1) as f64
            };
            let i0 = (pos.floor() as usize).min(n_in - 1);
            let i1 = (i0 + 1).min(n_in - 1);
            (i0, i1, pos - i0 as f64)
        })
        .collect()
}

/// Separable linear (trilinear) resize to `target` dims. Spacing is scaled by
/// the dims ratio so that `n * spacing` is unchanged.
pub fn resize_volume(v: &Volume, target: [usize; 3]) -> Result<Volume> {
    check_dims3(target)?;
    if target == v.dims {
        return Ok(v.clone());
    }
    let mut data: Vec<f64> = v.data.iter().map(|&x| x as f64).collect();
    let mut dims = v.dims;
    for axis in 0..3 {
        if dims[axis] == target[axis] {
            continue;
        }
        let w = axis_weights(dims[axis], target[axis]);
        let mut out_dims = dims;
        out_dims[axis] = target[axis];
        let mut out = vec![0.0f64; out_dims.iter().product()];
        let stride_in = match axis {
            0 => 1,
            1 => dims[0],
            _ => dims[0] * dims[1],
        };
        for z in 0..out_dims[2] {
            for y in 0..out_dims[1] {
                for x in 0..out_dims[0] {
                    let c = [x, y, z];
                    let (i0, i1, t) = w[c[axis]];
                    let mut base = c;
                    base[axis] = 0;
                    let b = base[0] + dims[0] * (base[1] + dims[1] * base[2]);
                    let a = data[b + i0 * stride_in];
                    let bb = data[b + i1 * stride_in];
                    out[x + out_dims[0] * (y + out_dims[1] * z)] = a + (bb - a) * t;
                }
            }
        }
        data = out;
        dims = out_dims;
    }
    let spacing = [0, 1, 2].map(|a| v.spacing[a] * v.dims[a] as f64 / target[a] as f64);
    Volume::new(target, spacing, data.into_iter().map(|x| x as f32).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_geometry() {
        assert!(Volume::new([0, 1, 1], [1.0; 3], vec![]).is_err());
        assert!(Volume::new([1, 1, 1], [0.0, 1.0, 1.0], vec![0.0]).is_err());
        assert!(matches!(
            Volume::new([2, 2, 1], [1.0; 3], vec![0.0; 5]),
            Err(Error::SizeMismatch { .. })
        ));
        assert!(matches!(
            Volume::new([1, 1, 1], [1.0; 3], vec![f32::NAN]),
            Err(Error::NonFinite { index: 0 })
        ));
    }

    #[test]
    fn normalization_rescales_to_unit_range() {
        let v = Volume::new([2, 2, 1], [1.0; 3], vec![0.0, 2.0, 4.0, 8.0]).unwrap();
        assert_eq!(v.normalized().data(), &[0.0, 0.25, 0.5, 1.0]);
    }

    #[test]
    fn resize_identity_and_constant() {
        let v = Volume::from_fn([3, 4, 2], [1.0, 1.0, 2.0], |x, y, z| (x + 2 * y + 5 * z) as f32)
            .unwrap();
        assert_eq!(resize_volume(&v, [3, 4, 2]).unwrap(), v);

        let c = Volume::filled([2, 2, 1], [1.0; 3], 0.7).unwrap();
        let r = resize_volume(&c, [5, 3, 4]).unwrap();
        assert!(r.data().iter().all(|&x| (x - 0.7).abs() < 1e-6));
    }

    #[test]
    fn resize_ramp_inserts_midpoint() {
        let v = Volume::new([2, 1, 1], [2.0, 1.0, 1.0], vec![0.0, 1.0]).unwrap();
        let r = resize_volume(&v, [3, 1, 1]).unwrap();
        assert_eq!(r.data(), &[0.0, 0.5, 1.0]);
        assert!((r.spacing()[0] * 3.0 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn resize_rejects_zero_target() {
        let v = Volume::zeros([2, 2, 2], [1.0; 3]).unwrap();
        assert!(resize_volume(&v, [2, 0, 2]).is_err());
    }

    #[test]
    fn histogram_single_bin() {
        let v = Volume::filled([3, 3, 3], [1.0; 3], 0.5).unwrap();
        let h = histogram(&v, 0).unwrap();
        assert_eq!(h.bins()[128], 1.0);
        assert_eq!(h.total(), 1.0);
    }

    #[test]
    fn histogram_uniform_over_bin_centers() {
        let data: Vec<f32> = (0..256).map(|k| ((k as f64 + 0.5) / 256.0) as f32).collect();
        let v = Volume::new([256, 1, 1], [1.0; 3], data).unwrap();
        let h = histogram(&v, 0).unwrap();
        for &b in h.bins() {
            assert!((b - 1.0 / 256.0).abs() < 1e-15);
        }
    }

    #[test]
    fn histogram_all_nulled_is_error() {
        let v = Volume::zeros([4, 4, 1], [1.0; 3]).unwrap();
        assert!(matches!(histogram(&v, 21), Err(Error::EmptyHistogram(21))));
    }

    #[test]
    fn mask_threshold_and_subset() {
        let v = Volume::new([4, 1, 1], [1.0; 3], vec![0.09, 0.11, 0.1, 1.0]).unwrap();
        let m = LabelMask::from_threshold(&v, 0.1);
        assert_eq!(m.data(), &[0, 1, 1, 1]);
        let small = LabelMask::new([4, 1, 1], [1.0; 3], vec![0, 1, 0, 0]).unwrap();
        assert!(small.is_subset_of(&m));
        assert!(!m.is_subset_of(&small));
        assert!(LabelMask::new([1, 1, 1], [1.0; 3], vec![2]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn histogram_mass_sums_to_one(vals in proptest::collection::vec(0.0f32..=1.0, 1..200), nulled in 0usize..40) {
            let n = vals.len();
            let v = Volume::new([n, 1, 1], [1.0; 3], vals).unwrap();
            if let Ok(h) = histogram(&v, nulled) {
                proptest::prop_assert!((h.total() - 1.0).abs() < 1e-9);
                proptest::prop_assert!(h.bins()[..nulled.min(256)].iter().all(|&b| b == 0.0));
            }
        }

        #[test]
        fn resize_constant_is_exact(c in 0.0f32..1.0, nx in 1usize..6, ny in 1usize..6, nz in 1usize..4) {
            let v = Volume::filled([2, 3, 2], [1.0; 3], c).unwrap();
            let r = resize_volume(&v, [nx, ny, nz]).unwrap();
            proptest::prop_assert!(r.data().iter().all(|&x| (x - c).abs() <= 1e-6));
        }
    }
}

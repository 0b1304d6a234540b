use crate::error::{Error, Result};
use crate::resample::FlowField;
use crate::volume::Slice;

/// Square resolutions for coarse-to-fine flow estimation, coarse first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pyramid {
    levels: Vec<usize>,
}

/// Maximum number of levels produced by [`Pyramid::for_size`].
pub const DEFAULT_LEVELS: usize = 7;

impl Pyramid {
    pub fn new(levels: Vec<usize>) -> Result<Self> {
        if levels.is_empty() || levels.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "pyramid levels {levels:?} must be non-empty and positive"
            )));
        }
        if levels.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter(format!(
                "pyramid levels {levels:?} must run coarse to fine"
            )));
        }
        Ok(Self { levels })
    }

    /// 4, 8, ..., 256: seven levels for a 256 x 256 slice.
    pub fn standard() -> Self {
        Self::for_size(256)
    }

    /// Halves `size` down to 4 (at most [`DEFAULT_LEVELS`] levels).
    pub fn for_size(size: usize) -> Self {
        let mut levels = vec![size.max(1)];
        let mut s = size;
        while s.is_multiple_of(2) && s / 2 >= 4 && levels.len() < DEFAULT_LEVELS {
            s /= 2;
            levels.push(s);
        }
        levels.reverse();
        Self { levels }
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn finest(&self) -> usize {
        *self.levels.last().expect("non-empty")
    }
}

/// Area weights of an `n_in -> n_out` box filter, per output sample.
fn box_weights(n_in: usize, n_out: usize) -> Vec<Vec<(usize, f64)>> {
    let r = n_in as f64 / n_out as f64;
    (0..n_out)
        .map(|j| {
            let (lo, hi) = (j as f64 * r, (j + 1) as f64 * r);
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(n_in);
            (first..last)
                .filter_map(|i| {
                    let w = (hi.min(i as f64 + 1.0) - lo.max(i as f64)) / r;
                    (w > 0.0).then_some((i, w))
                })
                .collect()
        })
        .collect()
}

/// Box-average `s` down to `target` dims (exact 2x2 averaging for halving).
pub fn downsample(s: &Slice, target: [usize; 2]) -> Result<Slice> {
    let [nx, ny] = s.dims();
    if target == [nx, ny] {
        return Ok(s.clone());
    }
    if target[0] == 0 || target[1] == 0 || target[0] > nx || target[1] > ny {
        return Err(Error::InvalidDims(format!(
            "cannot box-downsample {:?} to {target:?}",
            s.dims()
        )));
    }
    let wx = box_weights(nx, target[0]);
    let wy = box_weights(ny, target[1]);
    let mut rows = vec![0.0f64; target[0] * ny];
    for y in 0..ny {
        for (j, w) in wx.iter().enumerate() {
            rows[j + target[0] * y] = w.iter().map(|&(i, a)| a * s.get(i, y) as f64).sum();
        }
    }
    let mut out = Vec::with_capacity(target[0] * target[1]);
    for w in &wy {
        for x in 0..target[0] {
            out.push(w.iter().map(|&(i, a)| a * rows[x + target[0] * i]).sum::<f64>() as f32);
        }
    }
    Slice::new(target, out)
}

/// Bilinear upsampling of a flow field with displacements rescaled by the
/// resolution ratio. Pixel centres are aligned (half-pixel convention).
pub fn upsample_flow(flow: &FlowField, target: [usize; 2]) -> FlowField {
    let [cx, cy] = flow.dims();
    if target == [cx, cy] {
        return flow.clone();
    }
    let (rx, ry) = (target[0] as f64 / cx as f64, target[1] as f64 / cy as f64);
    let sample = |data: &[f64], x: f64, y: f64| -> f64 {
        let x = x.clamp(0.0, (cx - 1) as f64);
        let y = y.clamp(0.0, (cy - 1) as f64);
        let (x0, y0) = (x.floor() as usize, y.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(cx - 1), (y0 + 1).min(cy - 1));
        let (fx, fy) = (x - x0 as f64, y - y0 as f64);
        let at = |i: usize, j: usize| data[i + cx * j];
        (1.0 - fy) * ((1.0 - fx) * at(x0, y0) + fx * at(x1, y0))
            + fy * ((1.0 - fx) * at(x0, y1) + fx * at(x1, y1))
    };
    let n = target[0] * target[1];
    let (mut u, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for y in 0..target[1] {
        for x in 0..target[0] {
            let sx = (x as f64 + 0.5) / rx - 0.5;
            let sy = (y as f64 + 0.5) / ry - 0.5;
            u.push(sample(flow.u(), sx, sy) * rx);
            v.push(sample(flow.v(), sx, sy) * ry);
        }
    }
    FlowField::from_parts_unchecked(target, u, v)
}

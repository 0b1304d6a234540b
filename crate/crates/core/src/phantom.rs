//! Synthetic FLAIR-like head phantoms with exact brain, ventricle and lesion
//! masks, used as ground truth throughout the test suite.
//!
//! Geometry is specified in millimetres relative to the grid centre, so the
//! same [`PhantomSpec`] can be rasterized at any resolution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::resample::{warp_affine, warp_mask, warp_volume_slices, AffineTransform, FlowField, MaskWarp};
use crate::volume::{LabelMask, Slice, Volume};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid {
    /// Centre in mm relative to the grid centre.
    pub center: [f64; 3],
    pub semi_axes: [f64; 3],
}

impl Ellipsoid {
    fn contains(&self, p: [f64; 3]) -> bool {
        (0..3)
            .map(|a| {
                let d = (p[a] - self.center[a]) / self.semi_axes[a];
                d * d
            })
            .sum::<f64>()
            <= 1.0
    }
}

/// Spherical hyperintense lesion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lesion {
    pub center: [f64; 3],
    pub radius: f64,
    pub intensity: f32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TissueIntensities {
    pub background: f32,
    pub brain: f32,
    pub ventricle: f32,
    pub wml: f32,
}

impl Default for TissueIntensities {
    fn default() -> Self {
        Self {
            background: 0.0,
            brain: 0.45,
            ventricle: 0.15,
            wml: 0.85,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub head: Ellipsoid,
    pub ventricles: Vec<Ellipsoid>,
    pub lesions: Vec<Lesion>,
    pub intensities: TissueIntensities,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Gaussian point-spread blur of the intensities in mm, 0 for hard
    /// tissue boundaries. Masks are unaffected.
    pub blur_sigma_mm: f64,
}

/// Field of view of the default 256 x 256 x 55 grid, in mm.
const DEFAULT_FOV: [f64; 3] = [220.0, 220.0, 165.0];

impl Default for PhantomSpec {
    fn default() -> Self {
        Self::for_grid([256, 256, 55])
    }
}

impl PhantomSpec {
    /// Standard anatomy rasterized on `dims`, with spacing chosen so the field
    /// of view matches the default 256 x 256 x 55 grid.
    pub fn for_grid(dims: [usize; 3]) -> Self {
        let spacing = [0, 1, 2].map(|a| DEFAULT_FOV[a] / dims[a].max(1) as f64);
        let wml = TissueIntensities::default().wml;
        Self {
            dims,
            spacing,
            head: Ellipsoid {
                center: [0.0; 3],
                semi_axes: [68.0, 88.0, 74.0],
            },
            ventricles: vec![
                Ellipsoid {
                    center: [-11.0, -4.0, 6.0],
                    semi_axes: [7.0, 24.0, 16.0],
                },
                Ellipsoid {
                    center: [11.0, -4.0, 6.0],
                    semi_axes: [7.0, 24.0, 16.0],
                },
            ],
            lesions: vec![
                Lesion {
                    center: [26.0, 18.0, 14.0],
                    radius: 7.0,
                    intensity: wml,
                },
                Lesion {
                    center: [-28.0, -30.0, 20.0],
                    radius: 6.0,
                    intensity: wml,
                },
                Lesion {
                    center: [20.0, -38.0, -10.0],
                    radius: 5.0,
                    intensity: wml,
                },
            ],
            intensities: TissueIntensities::default(),
            noise_sigma: 0.0,
            seed: 0,
            blur_sigma_mm: 0.0,
        }
    }

    pub fn with_blur(mut self, sigma_mm: f64) -> Self {
        self.blur_sigma_mm = sigma_mm;
        self
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Self {
        self.noise_sigma = sigma;
        self.seed = seed;
        self
    }

    /// Physical position (mm, grid-centred) of a voxel.
    pub fn position(&self, x: usize, y: usize, z: usize) -> [f64; 3] {
        let c = AffineTransform::grid_center(self.dims);
        [
            (x as f64 - c[0]) * self.spacing[0],
            (y as f64 - c[1]) * self.spacing[1],
            (z as f64 - c[2]) * self.spacing[2],
        ]
    }

    fn validate(&self) -> Result<()> {
        Volume::zeros(self.dims, self.spacing)?;
        let half = [0, 1, 2].map(|a| (self.dims[a] as f64 - 1.0) / 2.0 * self.spacing[a]);
        for a in 0..3 {
            if self.head.center[a].abs() + self.head.semi_axes[a] > half[a] + 1e-9 {
                return Err(Error::OutOfBounds(format!(
                    "head extends past the grid along axis {a}"
                )));
            }
        }
        // axis extremes of every structure must sit inside the head
        let structures = self
            .ventricles
            .iter()
            .map(|e| (e.center, e.semi_axes))
            .chain(self.lesions.iter().map(|l| (l.center, [l.radius; 3])));
        for (k, (c, r)) in structures.enumerate() {
            for a in 0..3 {
                for s in [-1.0, 1.0] {
                    let mut p = c;
                    p[a] += s * r[a];
                    if !self.head.contains(p) {
                        return Err(Error::OutOfBounds(format!("structure {k} extends past the head")));
                    }
                }
            }
        }
        let i = self.intensities;
        if [i.background, i.brain, i.ventricle, i.wml]
            .iter()
            .chain(self.lesions.iter().map(|l| &l.intensity))
            .any(|v| !(0.0..=1.0).contains(v))
        {
            return Err(Error::InvalidParameter("tissue intensities must lie in [0, 1]".into()));
        }
        if !(self.blur_sigma_mm >= 0.0 && self.blur_sigma_mm.is_finite()) {
            return Err(Error::InvalidParameter("blur sigma must be >= 0".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter("noise sigma must be >= 0".into()));
        }
        Ok(())
    }
}

/// Phantom volume and its masks. `vent` and `wml` are subsets of `brain`.
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub volume: Volume,
    pub brain: LabelMask,
    pub vent: LabelMask,
    pub wml: LabelMask,
}

pub fn make_phantom(spec: &PhantomSpec) -> Result<Phantom> {
    spec.validate()?;
    let dims = spec.dims;
    let n = dims.iter().product();
    let mut values = vec![spec.intensities.background; n];
    let (mut brain, mut vent, mut wml) = (vec![0u8; n], vec![0u8; n], vec![0u8; n]);
    let mut i = 0;
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let p = spec.position(x, y, z);
                let in_head = spec.head.contains(p);
                let in_vent = spec.ventricles.iter().any(|e| e.contains(p));
                let lesion = spec.lesions.iter().find(|l| {
                    (0..3)
                        .map(|a| (p[a] - l.center[a]).powi(2))
                        .sum::<f64>()
                        <= l.radius * l.radius
                });
                if (in_vent || lesion.is_some()) && !in_head {
                    return Err(Error::OutOfBounds(format!(
                        "structure voxel ({x}, {y}, {z}) lies outside the head"
                    )));
                }
                if in_head {
                    brain[i] = 1;
                    values[i] = spec.intensities.brain;
                    if let Some(l) = lesion {
                        wml[i] = 1;
                        values[i] = l.intensity;
                    } else if in_vent {
                        vent[i] = 1;
                        values[i] = spec.intensities.ventricle;
                    }
                }
                i += 1;
            }
        }
    }
    if spec.blur_sigma_mm > 0.0 {
        let sigma = [0, 1, 2].map(|a| spec.blur_sigma_mm / spec.spacing[a]);
        values = gaussian_blur(&values, dims, sigma);
    }
    if spec.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for v in &mut values {
            *v = (*v as f64 + normal.sample(&mut rng)).clamp(0.0, 1.0) as f32;
        }
    }
    Ok(Phantom {
        volume: Volume::new(dims, spec.spacing, values)?,
        brain: LabelMask::new(dims, spec.spacing, brain)?,
        vent: LabelMask::new(dims, spec.spacing, vent)?,
        wml: LabelMask::new(dims, spec.spacing, wml)?,
    })
}

/// Separable Gaussian with per-axis sigma in voxels; the kernel is
/// renormalized where it leaves the grid.
fn gaussian_blur(values: &[f32], dims: [usize; 3], sigma: [f64; 3]) -> Vec<f32> {
    let mut cur: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    let strides = [1, dims[0], dims[0] * dims[1]];
    for a in 0..3 {
        if sigma[a] < 1e-3 || dims[a] < 2 {
            continue;
        }
        let r = (3.0 * sigma[a]).ceil() as isize;
        let kernel: Vec<f64> = (-r..=r)
            .map(|k| (-(k * k) as f64 / (2.0 * sigma[a] * sigma[a])).exp())
            .collect();
        let mut next = vec![0.0; cur.len()];
        for (i, out) in next.iter_mut().enumerate() {
            let pos = (i / strides[a] % dims[a]) as isize;
            let (mut acc, mut wsum) = (0.0, 0.0);
            for (j, &w) in kernel.iter().enumerate() {
                let q = pos + j as isize - r;
                if q >= 0 && (q as usize) < dims[a] {
                    acc += w * cur[(i as isize + (q - pos) * strides[a] as isize) as usize];
                    wsum += w;
                }
            }
            *out = acc / wsum;
        }
        cur = next;
    }
    cur.into_iter().map(|v| v as f32).collect()
}

/// Warps the volume and all masks by `t`; `t` is returned as ground truth.
pub fn apply_known_transform(p: &Phantom, t: &AffineTransform) -> Result<(Phantom, AffineTransform)> {
    let t = AffineTransform::new(*t.matrix())?;
    let warp = MaskWarp::Affine(&t);
    Ok((
        Phantom {
            volume: warp_affine(&p.volume, &t)?,
            brain: warp_mask(&p.brain, warp)?,
            vent: warp_mask(&p.vent, warp)?,
            wml: warp_mask(&p.wml, warp)?,
        },
        t,
    ))
}

/// Same as [`apply_known_transform`] for a stack of per-slice flows.
pub fn apply_known_flows(p: &Phantom, flows: &[FlowField]) -> Result<Phantom> {
    let warp = MaskWarp::Flows(flows);
    Ok(Phantom {
        volume: warp_volume_slices(&p.volume, flows)?,
        brain: warp_mask(&p.brain, warp)?,
        vent: warp_mask(&p.vent, warp)?,
        wml: warp_mask(&p.wml, warp)?,
    })
}

/// Smooth local deformation: a Gaussian-weighted displacement of
/// `amplitude` pixels along `direction`, centred at `center` (pixels),
/// identical on every slice.
pub fn bump_flows(
    dims: [usize; 3],
    center: [f64; 2],
    sigma: f64,
    amplitude: f64,
    direction: [f64; 2],
) -> Vec<FlowField> {
    let norm = direction[0].hypot(direction[1]).max(f64::MIN_POSITIVE);
    let dir = [direction[0] / norm, direction[1] / norm];
    let n = dims[0] * dims[1];
    let (mut u, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for y in 0..dims[1] {
        for x in 0..dims[0] {
            let r2 = (x as f64 - center[0]).powi(2) + (y as f64 - center[1]).powi(2);
            let w = amplitude * (-r2 / (2.0 * sigma * sigma)).exp();
            u.push(w * dir[0]);
            v.push(w * dir[1]);
        }
    }
    let f = FlowField::from_parts_unchecked([dims[0], dims[1]], u, v);
    vec![f; dims[2]]
}

/// Slice pair for sweeping the Charbonnier exponent: a mid-ventricle slice
/// of a 3 mm blurred phantom on a `size x size x 12` grid, and the same
/// slice under a smooth local bump of `6 * size / 128` pixels. Returns
/// `(moving, fixed)`.
pub fn alpha_sweep_pair(size: usize) -> Result<(Slice, Slice)> {
    let dims = [size, size, 12];
    let p = make_phantom(&PhantomSpec::for_grid(dims).with_blur(3.0))?;
    let c = size as f64 / 2.0;
    let flows = bump_flows(dims, [1.2 * c, c], size as f64 / 8.0, 6.0 * size as f64 / 128.0, [1.0, 0.5]);
    let z = 7;
    let moving = warp_volume_slices(&p.volume, &flows)?.slice(z);
    Ok((moving, p.volume.slice(z)))
}

//! Command-line front end: `register`, `evaluate`, `atlas`, `phantom` and
//! `alpha-sweep`.
//!
//! Work is spread over a rayon pool sized by `--jobs` or `REGFLOW_JOBS`.
//! Every output is written by the calling thread after the parallel part
//! finishes, and CSV rows follow input order, so reruns are bit-identical.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{load_mask, load_volume, save_flow, save_mask, save_transform, save_volume};
use crate::losses::LossWeights;
use crate::metrics::{
    brain_heatmap, build_atlas, evaluate_volume, write_report_csv, EvaluationInput, MetricReport, StructureMasks,
};
use crate::optim::{
    alpha_sweep, register_volume_pipeline, LossTrace, OptimizerConfig, PipelineConfig, PipelineResult, Pyramid, Stage,
    DEFAULT_ALPHAS,
};
use crate::phantom::{alpha_sweep_pair, apply_known_transform, make_phantom, PhantomSpec};
use crate::resample::{warp_mask, AffineTransform, MaskWarp, MASK_THRESHOLD};
use crate::volume::{resize_volume, LabelMask, Volume};

#[derive(Debug, Parser)]
#[command(name = "regflow", version, about = "Affine plus slice-wise optical-flow registration and validation metrics")]
pub struct Cli {
    /// Worker threads; 0 means one per core.
    #[arg(long, global = true, env = "REGFLOW_JOBS", default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Register a moving volume to a fixed volume.
    Register(RegisterArgs),
    /// Score registered volumes against the fixed volume.
    Evaluate(EvaluateArgs),
    /// Average registered volumes into an atlas.
    Atlas(AtlasArgs),
    /// Write a synthetic head phantom and its masks.
    Phantom(PhantomArgs),
    /// Register one slice pair for a range of Charbonnier exponents.
    AlphaSweep(AlphaSweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StageArg {
    Affine,
    Flow,
    Both,
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::Affine => Stage::Affine,
            StageArg::Flow => Stage::Flow,
            StageArg::Both => Stage::Both,
        }
    }
}

/// `brain=PATH,vent=PATH,wml=PATH`; any subset may be given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaskPaths {
    pub brain: Option<PathBuf>,
    pub vent: Option<PathBuf>,
    pub wml: Option<PathBuf>,
}

impl FromStr for MaskPaths {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut out = MaskPaths::default();
        for part in s.split(',').filter(|p| !p.is_empty()) {
            let (key, path) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=path, got {part:?}"))?;
            let slot = match key.trim() {
                "brain" => &mut out.brain,
                "vent" => &mut out.vent,
                "wml" => &mut out.wml,
                other => return Err(format!("unknown mask {other:?}; use brain, vent or wml")),
            };
            if slot.replace(PathBuf::from(path.trim())).is_some() {
                return Err(format!("mask {key:?} given twice"));
            }
        }
        Ok(out)
    }
}

impl MaskPaths {
    fn load_all(&self) -> Result<StructureMasks> {
        let get = |p: &Option<PathBuf>, name: &str| {
            p.as_ref()
                .ok_or_else(|| Error::InvalidParameter(format!("--masks needs {name}=PATH")))
                .and_then(load_mask)
        };
        Ok(StructureMasks {
            brain: get(&self.brain, "brain")?,
            vent: get(&self.vent, "vent")?,
            wml: get(&self.wml, "wml")?,
        })
    }

    fn load_brain(&self) -> Result<LabelMask> {
        let p = self
            .brain
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("--fixed-masks needs brain=PATH".into()))?;
        load_mask(p)
    }
}

fn parse_triple<T: FromStr>(s: &str) -> std::result::Result<[T; 3], String>
where
    T::Err: std::fmt::Display,
{
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, c] = parts[..] else {
        return Err(format!("expected three comma-separated values, got {s:?}"));
    };
    let p = |x: &str| x.parse::<T>().map_err(|e| format!("{x:?}: {e}"));
    Ok([p(a)?, p(b)?, p(c)?])
}

/// Loss-weight overrides; unset flags keep the defaults.
#[derive(Debug, Clone, Args)]
pub struct WeightArgs {
    /// Charbonnier exponent.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Photometric weight.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Correlation weight.
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Smoothness weight.
    #[arg(long = "lambda")]
    pub lambda: Option<f64>,
}

impl WeightArgs {
    fn weights(&self) -> Result<LossWeights> {
        let mut w = LossWeights::default();
        if let Some(a) = self.alpha {
            w.alpha = a;
        }
        if let Some(g) = self.gamma {
            w.gamma = g;
        }
        if let Some(z) = self.zeta {
            w.zeta = z;
        }
        if let Some(l) = self.lambda {
            w.lambda = l;
        }
        w.validate()?;
        Ok(w)
    }
}

#[derive(Debug, Clone, Args)]
pub struct RegisterArgs {
    #[arg(long)]
    pub moving: PathBuf,
    #[arg(long)]
    pub fixed: PathBuf,
    /// Masks of the moving volume; warped alongside it.
    #[arg(long)]
    pub masks: Option<MaskPaths>,
    /// Fixed-volume masks (brain is used for Dice in the report).
    #[arg(long)]
    pub fixed_masks: Option<MaskPaths>,
    #[arg(long, value_enum, default_value_t = StageArg::Both)]
    pub stage: StageArg,
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Flow step size in pixels of each pyramid level.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Affine step size in normalized coordinates.
    #[arg(long)]
    pub affine_lr: Option<f64>,
    /// Iteration cap for the affine stage and for each flow level.
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a metric report for the result.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Registered volumes, one row each in the report.
    #[arg(long, num_args = 1.., required = true)]
    pub moving: Vec<PathBuf>,
    #[arg(long)]
    pub fixed: PathBuf,
    /// Registered masks, once per moving volume in the same order.
    #[arg(long)]
    pub masks: Vec<MaskPaths>,
    /// Masks before registration, once per moving volume.
    #[arg(long)]
    pub orig_masks: Vec<MaskPaths>,
    #[arg(long)]
    pub fixed_masks: Option<MaskPaths>,
    #[arg(long)]
    pub report: PathBuf,
    /// Write the average of the registered volumes here.
    #[arg(long)]
    pub atlas: Option<PathBuf>,
    /// Write the average registered brain mask here (needs --masks).
    #[arg(long)]
    pub heatmap: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AtlasArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub moving: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PhantomArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Grid as NX,NY,NZ.
    #[arg(long, value_parser = parse_triple::<usize>, default_value = "256,256,55")]
    pub dims: [usize; 3],
    /// Gaussian noise sigma on the [0, 1] intensity scale.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Point-spread blur in mm.
    #[arg(long, default_value_t = 0.0)]
    pub blur: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// In-plane content rotation in degrees, counter-clockwise.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub rotate: f64,
    /// Content translation in voxels as DX,DY,DZ.
    #[arg(long, value_parser = parse_triple::<f64>, allow_hyphen_values = true)]
    pub translate: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Args)]
pub struct AlphaSweepArgs {
    /// Use the built-in phantom pair instead of --moving/--fixed.
    #[arg(long, conflicts_with_all = ["moving", "fixed"])]
    pub phantom: bool,
    /// Side of the phantom slices.
    #[arg(long, default_value_t = 128)]
    pub size: usize,
    #[arg(long, requires = "fixed")]
    pub moving: Option<PathBuf>,
    #[arg(long, requires = "moving")]
    pub fixed: Option<PathBuf>,
    /// Axial slice of the volumes; the middle one by default.
    #[arg(long)]
    pub slice: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination.
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidParameter(e.render().to_string()))?;
    run(cli)
}

pub fn run(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Register(a) => cmd_register(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Atlas(a) => cmd_atlas(&a),
        Command::Phantom(a) => cmd_phantom(&a),
        Command::AlphaSweep(a) => cmd_alpha_sweep(&a),
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Brings a mask onto `dims` by linear resize and the usual 0.1 threshold.
fn resize_mask(mask: &LabelMask, dims: [usize; 3]) -> Result<LabelMask> {
    if mask.dims() == dims {
        return Ok(mask.clone());
    }
    Ok(LabelMask::from_threshold(&resize_volume(&mask.to_volume(), dims)?, MASK_THRESHOLD))
}

fn warp_structure_masks(masks: &StructureMasks, res: &PipelineResult) -> Result<StructureMasks> {
    let warp = |m: &LabelMask| -> Result<LabelMask> {
        let affine = warp_mask(m, MaskWarp::Affine(&res.transform))?;
        warp_mask(&affine, MaskWarp::Flows(&res.flows))
    };
    Ok(StructureMasks {
        brain: warp(&masks.brain)?,
        vent: warp(&masks.vent)?,
        wml: warp(&masks.wml)?,
    })
}

fn write_flow_traces(path: &Path, traces: &[LossTrace]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_to_io(path, e))?;
    w.write_record(["slice", "iteration", "level", "loss"])?;
    for (z, trace) in traces.iter().enumerate() {
        for e in trace.entries() {
            w.write_record([
                z.to_string(),
                e.iteration.to_string(),
                e.level.to_string(),
                e.loss.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_to_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Csv(csv::Error::from(std::io::Error::other(format!("{other:?}")))),
    }
}

fn write_report(path: &Path, reports: &[MetricReport]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_report_csv(std::io::BufWriter::new(file), reports)
}

/// Writes `transform.json`, `warped.*`, `flows/slice_NNN.*` (flow stage),
/// `affine_trace.csv`, `flow_trace.csv` and warped masks into `--out`.
pub fn cmd_register(a: &RegisterArgs) -> Result<()> {
    let fixed = load_volume(&a.fixed)?;
    let mut moving = load_volume(&a.moving)?;
    if moving.dims() != fixed.dims() {
        log::info!("resizing moving {:?} to fixed {:?}", moving.dims(), fixed.dims());
        moving = resize_volume(&moving, fixed.dims())?;
    }
    // keep the fixed grid's spacing so the two volumes share one grid
    let moving = Volume::new(fixed.dims(), fixed.spacing(), moving.into_data())?;
    let masks = match &a.masks {
        Some(m) => {
            let s = m.load_all()?;
            let dims = fixed.dims();
            let regrid = |m: &LabelMask| -> Result<LabelMask> {
                let r = resize_mask(m, dims)?;
                LabelMask::new(dims, fixed.spacing(), r.data().to_vec())
            };
            Some(StructureMasks {
                brain: regrid(&s.brain)?,
                vent: regrid(&s.vent)?,
                wml: regrid(&s.wml)?,
            })
        }
        None => None,
    };
    let fixed_brain = a.fixed_masks.as_ref().map(MaskPaths::load_brain).transpose()?;

    let mut cfg = PipelineConfig {
        stage: a.stage.into(),
        weights: a.weights.weights()?,
        ..PipelineConfig::default()
    };
    cfg.affine.seed = a.seed;
    cfg.flow.seed = a.seed;
    if let Some(lr) = a.lr {
        cfg.flow.lr = lr;
    }
    if let Some(lr) = a.affine_lr {
        cfg.affine.lr = lr;
    }
    if let Some(it) = a.iters {
        cfg.affine.max_iters = it;
        cfg.flow.max_iters = it;
    }

    let res = register_volume_pipeline(&moving, &fixed, &cfg)?;
    for w in &res.warnings {
        log::warn!("{w}");
    }

    create_dir(&a.out)?;
    save_transform(a.out.join("transform.json"), &res.transform)?;
    save_volume(a.out.join("warped"), &res.warped)?;
    res.affine_trace.write_csv(a.out.join("affine_trace.csv"))?;
    if cfg.stage.runs_flow() {
        let dir = a.out.join("flows");
        create_dir(&dir)?;
        for (z, flow) in res.flows.iter().enumerate() {
            save_flow(dir.join(format!("slice_{z:03}")), flow)?;
        }
        write_flow_traces(&a.out.join("flow_trace.csv"), &res.flow_traces)?;
    }
    let warped_masks = match &masks {
        Some(m) => {
            let w = warp_structure_masks(m, &res)?;
            save_mask(a.out.join("brain"), &w.brain)?;
            save_mask(a.out.join("vent"), &w.vent)?;
            save_mask(a.out.join("wml"), &w.wml)?;
            Some(w)
        }
        None => None,
    };

    if let Some(report) = &a.report {
        let name = a.moving.display().to_string();
        let rep = evaluate_volume(&EvaluationInput {
            name: &name,
            registered: &res.warped,
            fixed: &fixed,
            registered_masks: warped_masks.as_ref(),
            original_masks: masks.as_ref(),
            fixed_brain: fixed_brain.as_ref(),
        });
        write_report(report, &[rep])?;
    }
    Ok(())
}

fn check_mask_count(flag: &str, given: usize, volumes: usize) -> Result<()> {
    if given != 0 && given != volumes {
        return Err(Error::InvalidParameter(format!(
            "{flag} given {given} times for {volumes} volumes"
        )));
    }
    Ok(())
}

struct Evaluated {
    report: MetricReport,
    volume: Option<Volume>,
    brain: Option<LabelMask>,
}

/// Scores every `--moving` volume; a volume that cannot be loaded or scored
/// gets a row with only `volume` and `error` filled. Fails only when every
/// volume failed.
pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    check_mask_count("--masks", a.masks.len(), a.moving.len())?;
    check_mask_count("--orig-masks", a.orig_masks.len(), a.moving.len())?;
    if a.heatmap.is_some() && a.masks.is_empty() {
        return Err(Error::InvalidParameter("--heatmap needs --masks".into()));
    }
    let fixed = load_volume(&a.fixed)?;
    let fixed_brain = a.fixed_masks.as_ref().map(MaskPaths::load_brain).transpose()?;
    let keep_volume = a.atlas.is_some();

    let evaluated: Vec<Evaluated> = a
        .moving
        .par_iter()
        .enumerate()
        .map(|(i, path)| {
            let name = path.display().to_string();
            let load = || -> Result<(Volume, Option<StructureMasks>, Option<StructureMasks>)> {
                let v = load_volume(path)?;
                let reg = a.masks.get(i).map(MaskPaths::load_all).transpose()?;
                let orig = a.orig_masks.get(i).map(MaskPaths::load_all).transpose()?;
                Ok((v, reg, orig))
            };
            match load() {
                Ok((v, reg, orig)) => {
                    let report = evaluate_volume(&EvaluationInput {
                        name: &name,
                        registered: &v,
                        fixed: &fixed,
                        registered_masks: reg.as_ref(),
                        original_masks: orig.as_ref(),
                        fixed_brain: fixed_brain.as_ref(),
                    });
                    Evaluated {
                        report,
                        brain: reg.map(|m| m.brain),
                        volume: keep_volume.then_some(v),
                    }
                }
                Err(e) => {
                    log::warn!("{name}: {e}");
                    Evaluated {
                        report: MetricReport::failed(&name, e.to_string()),
                        volume: None,
                        brain: None,
                    }
                }
            }
        })
        .collect();

    let reports: Vec<MetricReport> = evaluated.iter().map(|e| e.report.clone()).collect();
    write_report(&a.report, &reports)?;

    if let Some(path) = &a.atlas {
        let vols: Vec<Volume> = evaluated.iter().filter_map(|e| e.volume.clone()).collect();
        save_volume(path, &build_atlas(&vols)?)?;
    }
    if let Some(path) = &a.heatmap {
        let masks: Vec<LabelMask> = evaluated.iter().filter_map(|e| e.brain.clone()).collect();
        save_volume(path, &brain_heatmap(&masks)?)?;
    }
    if reports.iter().all(MetricReport::is_total_failure) {
        return Err(Error::Empty(format!(
            "all {} volumes failed evaluation; see {}",
            reports.len(),
            a.report.display()
        )));
    }
    Ok(())
}

pub fn cmd_atlas(a: &AtlasArgs) -> Result<()> {
    let vols = a
        .moving
        .par_iter()
        .map(load_volume)
        .collect::<Result<Vec<_>>>()?;
    save_volume(&a.out, &build_atlas(&vols)?)
}

/// Writes `volume`, `brain`, `vent` and `wml` into `--out`, plus
/// `transform.json` when a rotation or translation is applied.
pub fn cmd_phantom(a: &PhantomArgs) -> Result<()> {
    let dims = a.dims;
    let spec = PhantomSpec::for_grid(dims)
        .with_noise(a.noise, a.seed)
        .with_blur(a.blur);
    let mut p = make_phantom(&spec)?;
    let center = AffineTransform::grid_center(dims);
    let mut t = AffineTransform::rotate_content_z(a.rotate, center);
    if let Some(d) = &a.translate {
        // content moves by +d when every output voxel samples p - d
        t = AffineTransform::translation([-d[0], -d[1], -d[2]]).compose(&t);
    }
    let moved = a.rotate != 0.0 || a.translate.as_ref().is_some_and(|d| d.iter().any(|&x| x != 0.0));
    create_dir(&a.out)?;
    if moved {
        let (q, t) = apply_known_transform(&p, &t)?;
        p = q;
        save_transform(a.out.join("transform.json"), &t)?;
    }
    save_volume(a.out.join("volume"), &p.volume)?;
    save_mask(a.out.join("brain"), &p.brain)?;
    save_mask(a.out.join("vent"), &p.vent)?;
    save_mask(a.out.join("wml"), &p.wml)
}

/// CSV columns: alpha, average_flow_magnitude, total, photometric,
/// correlation, smoothness.
pub fn cmd_alpha_sweep(a: &AlphaSweepArgs) -> Result<()> {
    let (m, f) = if a.phantom {
        alpha_sweep_pair(a.size)?
    } else {
        let (Some(mp), Some(fp)) = (&a.moving, &a.fixed) else {
            return Err(Error::InvalidParameter(
                "alpha-sweep needs --phantom or both --moving and --fixed".into(),
            ));
        };
        let fv = load_volume(fp)?;
        let mut mv = load_volume(mp)?;
        if mv.dims() != fv.dims() {
            mv = resize_volume(&mv, fv.dims())?;
        }
        let z = a.slice.unwrap_or(fv.dims()[2] / 2);
        if z >= fv.dims()[2] {
            return Err(Error::InvalidParameter(format!(
                "--slice {z} outside 0..{}",
                fv.dims()[2]
            )));
        }
        (mv.slice(z), fv.slice(z))
    };
    let mut cfg = OptimizerConfig {
        seed: a.seed,
        ..OptimizerConfig::flow()
    };
    if let Some(lr) = a.lr {
        cfg.lr = lr;
    }
    if let Some(it) = a.iters {
        cfg.max_iters = it;
    }
    let alphas = a.alphas.clone().unwrap_or_else(|| DEFAULT_ALPHAS.to_vec());
    let pyr = Pyramid::for_size(f.dims()[0]);
    let rows = alpha_sweep(&m, &f, &a.weights.weights()?, &pyr, &cfg, &alphas)?;

    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    let mut w = csv::Writer::from_path(&a.out).map_err(|e| csv_to_io(&a.out, e))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(&a.out, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_paths_parse() {
        let m: MaskPaths = "brain=a.json, vent=b,wml=c/d".parse().unwrap();
        assert_eq!(m.brain, Some(PathBuf::from("a.json")));
        assert_eq!(m.vent, Some(PathBuf::from("b")));
        assert_eq!(m.wml, Some(PathBuf::from("c/d")));
        assert!("brain".parse::<MaskPaths>().is_err());
        assert!("skull=x".parse::<MaskPaths>().is_err());
        assert!("brain=x,brain=y".parse::<MaskPaths>().is_err());
    }

    #[test]
    fn weight_overrides() {
        let w = WeightArgs {
            alpha: Some(0.3),
            gamma: None,
            zeta: Some(0.0),
            lambda: None,
        }
        .weights()
        .unwrap();
        assert_eq!((w.alpha, w.gamma, w.zeta, w.lambda), (0.3, 1.0, 0.0, 0.5));
    }

    #[test]
    fn parses_every_subcommand() {
        for args in [
            vec!["regflow", "register", "--moving", "m", "--fixed", "f", "--out", "o", "--stage", "affine"],
            vec!["regflow", "evaluate", "--moving", "a", "b", "--fixed", "f", "--report", "r.csv"],
            vec!["regflow", "atlas", "--moving", "a", "--out", "o"],
            vec!["regflow", "phantom", "--out", "o", "--dims", "32,32,12", "--rotate", "-5"],
            vec!["regflow", "alpha-sweep", "--phantom", "--out", "s.csv", "--jobs", "2"],
        ] {
            Cli::try_parse_from(args.clone()).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        }
        assert!(Cli::try_parse_from(["regflow", "alpha-sweep", "--phantom", "--moving", "m", "--out", "x"]).is_err());
    }
}

//! Building stages into render steps, and running them over images.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::Value;
use sphere_edit::conformal::{
    ExpStripMap, LatticeSpec, LatticeTwist, PowerMap, PullbackMap,
};
use sphere_edit::droste::{DrosteMap, DrosteSpec};
use sphere_edit::geometry::MobiusTransform;
use sphere_edit::raster::SphericalImage;
use sphere_edit::rational::{fit_rational_auto, RationalMap};
use sphere_edit::resample::{composite_pull_back, pull_back, Region, SampleOptions, Source};
use sphere_edit::schottky::{
    circle_pairing, classify_mask_pixel, derive_disk_regions, schottky_render, Disk, MaskRegion, Regions,
    SchottkyConfig,
};
use sphere_edit::Error;

use crate::config::{
    is_animated, stage_for_frame, CompositeStage, MobiusStage, PipelineConfig, RationalStage, RegionConfig,
    SchottkyStage, StageConfig,
};

/// A failure with its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Failure { code: EXIT_IO, message: message.into() }
    }

    /// Numeric method failures exit with 4, unreadable or unusable images
    /// with 3, everything else is a configuration problem.
    pub fn from_core(context: &str, e: &Error) -> Self {
        let code = if e.is_numeric() {
            EXIT_NUMERIC
        } else if matches!(e, Error::Io(_) | Error::Image(_) | Error::Aspect { .. }) {
            EXIT_IO
        } else {
            EXIT_CONFIG
        };
        Failure { code, message: format!("{context}: {e}") }
    }

    fn within(self, context: &str) -> Self {
        Failure { message: format!("{context}: {}", self.message), ..self }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Where relative paths point and how inputs are loaded.
#[derive(Debug, Clone, Default)]
pub struct Context {
    pub base_dir: PathBuf,
    pub allow_nonstandard: bool,
}

impl Context {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn load(&self, p: &Path) -> Result<SphericalImage, Failure> {
        let path = self.resolve(p);
        let loaded = if self.allow_nonstandard {
            SphericalImage::load_padded(&path)
        } else {
            SphericalImage::load(&path)
        };
        loaded.map_err(|e| {
            let f = Failure::from_core(&path.display().to_string(), &e);
            if matches!(e, Error::Aspect { .. }) {
                Failure { message: format!("{} (use --allow-nonstandard to pad)", f.message), ..f }
            } else {
                f
            }
        })
    }
}

/// One render pass.
pub enum Step {
    Map(PullbackMap),
    Schottky(Box<SchottkyConfig>),
    Composite(Vec<BuiltSource>),
}

pub struct BuiltSource {
    region: Region,
    map: PullbackMap,
    /// `None` means the image entering the stage.
    image: Option<SphericalImage>,
}

/// A step and the stages it came from, for error messages.
pub struct LabelledStep {
    pub label: String,
    pub step: Step,
}

fn stage_label(index: usize, kind: &str) -> String {
    format!("stage {} ({kind})", index + 1)
}

pub fn build_mobius(m: &MobiusStage) -> Result<MobiusTransform, Failure> {
    let core = |e: Error| Failure::from_core("mobius", &e);
    let t = match (&m.matrix, &m.from, &m.to) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(Failure::config("give either matrix or from/to, not both"))
        }
        (Some([a, b, c, d]), None, None) => MobiusTransform::new(a.0, b.0, c.0, d.0).map_err(core)?,
        (None, Some(from), Some(to)) => {
            MobiusTransform::mapping_three(from.map(|p| p.0), to.map(|p| p.0)).map_err(core)?
        }
        (None, Some(_), None) | (None, None, Some(_)) => {
            return Err(Failure::config("from and to must be given together"))
        }
        (None, None, None) => {
            let [p, q] = m.fix.map_or([sphere_edit::geometry::ProjectivePoint::ZERO, sphere_edit::geometry::ProjectivePoint::INFINITY], |f| f.map(|p| p.0));
            if !(m.scale > 0.0 && m.scale.is_finite()) {
                return Err(Failure::config(format!("scale must be positive, got {}", m.scale)));
            }
            MobiusTransform::two_point(p, q, m.angle, m.scale).map_err(core)?
        }
    };
    Ok(if m.invert { t.inverse() } else { t })
}

fn build_rational(r: &RationalStage, ctx: &Context) -> Result<RationalMap, Failure> {
    let given = [r.numerator.is_some() || r.denominator.is_some(), r.coeffs.is_some(), r.fit.is_some()];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(Failure::config("give exactly one of numerator/denominator, coeffs, or fit"));
    }
    if let Some(path) = &r.coeffs {
        let path = ctx.resolve(path);
        let text = std::fs::read_to_string(&path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        return serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())));
    }
    if let Some(fit) = &r.fit {
        let twist = LatticeTwist::new(LatticeSpec::new(fit.lattice), fit.multiplier.0, fit.normalization)
            .map_err(|e| Failure::from_core("fit", &e))?;
        return fit_rational_auto(&twist, fit.degree, fit.seed)
            .map(|f| f.map)
            .map_err(|e| Failure::from_core("fit", &e));
    }
    let (Some(num), Some(den)) = (&r.numerator, &r.denominator) else {
        return Err(Failure::config("numerator and denominator must be given together"));
    };
    let c = |v: &Vec<crate::complex::Cx>| v.iter().map(|z| z.0).collect::<Vec<_>>();
    RationalMap::from_coefficients(c(num), c(den)).map_err(|e| Failure::from_core("rational", &e))
}

fn build_schottky(s: &SchottkyStage, ctx: &Context) -> Result<SchottkyConfig, Failure> {
    let core = |e: Error| Failure::from_core("schottky", &e);
    let (a, b, regions) = if let Some(pairs) = &s.pairs {
        if s.a.is_some() || s.b.is_some() || s.disks.is_some() || s.mask.is_some() {
            return Err(Failure::config("pairs replaces a, b, disks, and mask"));
        }
        if !(1..=2).contains(&pairs.len()) {
            return Err(Failure::config(format!("need one or two pairs, got {}", pairs.len())));
        }
        let gens: Vec<_> = pairs
            .iter()
            .map(|p| circle_pairing(p.from.center.0, p.from.radius, p.to.center.0, p.to.radius).map_err(core))
            .collect::<Result<_, _>>()?;
        let disks: Vec<_> = pairs.iter().map(|p| Disk::planar(p.from.center.0, p.from.radius)).collect();
        (gens[0], gens.get(1).copied(), Regions::Disks { a: disks[0], b: disks.get(1).copied() })
    } else {
        let a = build_mobius(s.a.as_ref().ok_or_else(|| Failure::config("need pairs or generator a"))?)?;
        let b = s.b.as_ref().map(build_mobius).transpose()?;
        let regions = match (&s.disks, &s.mask) {
            (Some(disks), None) => {
                if disks.len() != 1 + usize::from(b.is_some()) {
                    return Err(Failure::config("give one disk per generator"));
                }
                let d: Vec<_> = disks.iter().map(|d| Disk::planar(d.center.0, d.radius)).collect();
                Regions::Disks { a: d[0], b: d.get(1).copied() }
            }
            (None, Some(path)) => {
                let mask = ctx.load(path)?;
                let completed = (0..mask.height()).any(|y| {
                    (0..mask.width()).any(|x| {
                        matches!(classify_mask_pixel(mask.rgb8(x, y)), MaskRegion::DiskUpperA | MaskRegion::DiskUpperB)
                    })
                });
                if completed {
                    Regions::Mask(mask)
                } else {
                    Regions::Mask(derive_disk_regions(&mask, &a, b.as_ref(), s.overlap_tolerance).map_err(core)?)
                }
            }
            _ => return Err(Failure::config("give exactly one of disks or mask")),
        };
        (a, b, regions)
    };
    let mut cfg = SchottkyConfig::new(a, b, regions);
    cfg.max_iter = s.max_iter;
    cfg.sentinel = s.sentinel;
    cfg.validate().map_err(core)?;
    Ok(cfg)
}

fn build_composite(c: &CompositeStage, ctx: &Context, frame: usize, frames: usize) -> Result<Vec<BuiltSource>, Failure> {
    if c.sources.is_empty() {
        return Err(Failure::config("composite needs at least one source"));
    }
    c.sources
        .iter()
        .enumerate()
        .map(|(i, src)| {
            let context = format!("source {}", i + 1);
            let region = match src.region {
                RegionConfig::All => Region::All,
                RegionConfig::Hemisphere { pole } => Region::Hemisphere { pole },
                RegionConfig::Disk { center, radius } => Region::Disk { center: center.0, radius },
                RegionConfig::OutsideDisk { center, radius } => Region::OutsideDisk { center: center.0, radius },
            };
            let image = src.input.as_deref().map(|p| ctx.load(p)).transpose().map_err(|f| f.within(&context))?;
            let mut map = PullbackMap::identity();
            for (j, raw) in src.stages.iter().enumerate() {
                let stage = stage_for_frame(raw, frame, frames).map_err(|e| Failure::config(format!("{context}, stage {}: {e}", j + 1)))?;
                let label = format!("{context}, {}", stage_label(j, stage.kind()));
                match build_stage(&stage, ctx, frame, frames).map_err(|f| f.within(&label))? {
                    Step::Map(m) => map = m.then_all(&map),
                    _ => return Err(Failure::config(format!("{label}: composite sources take map stages only"))),
                }
            }
            Ok(BuiltSource { region, map, image })
        })
        .collect()
}

/// Builds one stage. Map stages become single-map steps.
pub fn build_stage(stage: &StageConfig, ctx: &Context, frame: usize, frames: usize) -> Result<Step, Failure> {
    let core = |e: Error| Failure::from_core(stage.kind(), &e);
    Ok(match stage {
        StageConfig::Mobius(m) => Step::Map(PullbackMap::mobius(build_mobius(m)?)),
        StageConfig::Power(p) => {
            if p.n < 2 {
                return Err(Failure::config(format!("power needs n ≥ 2, got {}", p.n)));
            }
            Step::Map(PullbackMap::map(PowerMap::new(p.n)))
        }
        StageConfig::ExpStrip(e) => {
            if !(e.lambda > 0.0 && e.lambda.is_finite()) {
                return Err(Failure::config(format!("exp_strip needs lambda > 0, got {}", e.lambda)));
            }
            Step::Map(PullbackMap::map(ExpStripMap::new(e.lambda)))
        }
        StageConfig::Droste(d) => {
            let spec = DrosteSpec::new(d.p.0, d.q.0, d.lambda, d.twist, d.inner_radius).map_err(core)?;
            Step::Map(PullbackMap::map(DrosteMap::new(spec).map_err(core)?))
        }
        StageConfig::LatticeTwist(t) => {
            let map = LatticeTwist::new(LatticeSpec::new(t.lattice), t.multiplier.0, t.normalization).map_err(core)?;
            Step::Map(PullbackMap::map(map))
        }
        StageConfig::Rational(r) => Step::Map(PullbackMap::map(build_rational(r, ctx)?)),
        StageConfig::Schottky(s) => Step::Schottky(Box::new(build_schottky(s, ctx)?)),
        StageConfig::Composite(c) => Step::Composite(build_composite(c, ctx, frame, frames)?),
    })
}

/// Builds the steps for one frame. Consecutive map stages are composed
/// into one pull-back, fusing neighbouring Möbius matrices.
pub fn build_steps(stages: &[Value], ctx: &Context, frame: usize, frames: usize) -> Result<Vec<LabelledStep>, Failure> {
    let mut steps = Vec::new();
    let mut pending: Option<(PullbackMap, Vec<usize>)> = None;
    let flush = |pending: &mut Option<(PullbackMap, Vec<usize>)>, steps: &mut Vec<LabelledStep>| {
        if let Some((map, idx)) = pending.take() {
            let label = match idx.as_slice() {
                [i] => format!("stage {}", i + 1),
                _ => format!("stages {}–{}", idx[0] + 1, idx[idx.len() - 1] + 1),
            };
            steps.push(LabelledStep { label, step: Step::Map(map) });
        }
    };
    for (i, raw) in stages.iter().enumerate() {
        let stage = stage_for_frame(raw, frame, frames).map_err(|e| Failure::config(format!("stage {}: {e}", i + 1)))?;
        let label = stage_label(i, stage.kind());
        match build_stage(&stage, ctx, frame, frames).map_err(|f| f.within(&label))? {
            // the output at z shows the previous result at this stage's map of z
            Step::Map(m) => {
                pending = Some(match pending.take() {
                    Some((acc, mut idx)) => {
                        idx.push(i);
                        (m.then_all(&acc), idx)
                    }
                    None => (m, vec![i]),
                });
            }
            step => {
                flush(&mut pending, &mut steps);
                steps.push(LabelledStep { label, step });
            }
        }
    }
    flush(&mut pending, &mut steps);
    Ok(steps)
}

/// Runs built steps over one image.
pub fn apply_steps(mut image: SphericalImage, steps: &[LabelledStep], opts: &SampleOptions) -> Result<SphericalImage, Failure> {
    for LabelledStep { label, step } in steps {
        let core = |e: Error| Failure::from_core(label, &e);
        image = match step {
            Step::Map(m) => pull_back(&image, m, opts).map_err(core)?,
            Step::Schottky(cfg) => {
                let out = schottky_render(&image, cfg, opts).map_err(core)?;
                if out.capped > 0 {
                    eprintln!("{label}: {} of {} samples hit max_iter", out.capped, out.samples);
                }
                out.image
            }
            Step::Composite(sources) => {
                let srcs: Vec<Source<'_>> = sources
                    .iter()
                    .map(|s| Source { region: s.region.clone(), map: &s.map, image: s.image.as_ref().unwrap_or(&image) })
                    .collect();
                composite_pull_back(&srcs, opts).map_err(core)?
            }
        };
    }
    Ok(image)
}

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Image files in `dir`, sorted by name.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
    let mut frames: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|x| x.to_str())
                    .is_some_and(|x| IMAGE_EXTENSIONS.contains(&x.to_ascii_lowercase().as_str()))
        })
        .collect();
    frames.sort();
    if frames.is_empty() {
        return Err(Failure::io(format!("{}: no image frames", dir.display())));
    }
    Ok(frames)
}

fn check_sampling(opts: &SampleOptions) -> Result<(), Failure> {
    opts.validate().map_err(|e| Failure::from_core("sampling", &e))
}

/// Renders every input of the pipeline.
pub fn run(cfg: &PipelineConfig, ctx: &Context) -> Result<(), Failure> {
    check_sampling(&cfg.sampling)?;
    let output = cfg.output.as_deref().ok_or_else(|| Failure::config("no output path"))?;
    let output = ctx.resolve(output);
    let jobs: Vec<(PathBuf, PathBuf)> = match (&cfg.frames, &cfg.input) {
        (Some(dir), None) => {
            std::fs::create_dir_all(&output).map_err(|e| Failure::io(format!("{}: {e}", output.display())))?;
            list_frames(&ctx.resolve(dir))?
                .into_iter()
                .map(|f| {
                    let name = f.file_name().expect("listed files have names").to_owned();
                    (f, output.join(name))
                })
                .collect()
        }
        (None, Some(input)) => vec![(ctx.resolve(input), output)],
        (Some(_), Some(_)) => return Err(Failure::config("give either an input image or --frames, not both")),
        (None, None) => return Err(Failure::config("no input image")),
    };
    let n = jobs.len();
    let animated = is_animated(&cfg.stages);
    let fixed = if animated { None } else { Some(build_steps(&cfg.stages, ctx, 0, n)?) };
    for (i, (input, output)) in jobs.iter().enumerate() {
        let t = Instant::now();
        let built;
        let steps = match &fixed {
            Some(s) => s,
            None => {
                built = build_steps(&cfg.stages, ctx, i, n)?;
                &built
            }
        };
        let image = ctx.load(input)?;
        let out = apply_steps(image, steps, &cfg.sampling)?;
        out.save(output).map_err(|e| Failure::from_core(&output.display().to_string(), &e))?;
        eprintln!(
            "frame {}/{n} {} -> {}: {:.0} ms",
            i + 1,
            input.display(),
            output.display(),
            t.elapsed().as_secs_f64() * 1e3
        );
    }
    Ok(())
}

/// Dry-run validation: every stage is built (fits and mask derivation
/// included) for the first and last frame, nothing is rendered. Returns
/// one diagnostic per problem.
pub fn validate(cfg: &PipelineConfig, ctx: &Context) -> Vec<Failure> {
    let mut report = Vec::new();
    if let Err(f) = check_sampling(&cfg.sampling) {
        report.push(f);
    }
    let frames = match (&cfg.frames, &cfg.input) {
        (Some(dir), _) => match list_frames(&ctx.resolve(dir)) {
            Ok(f) => f.len(),
            Err(f) => {
                report.push(f);
                1
            }
        },
        (None, Some(input)) => {
            let path = ctx.resolve(input);
            if !path.is_file() {
                report.push(Failure::io(format!("{}: input not found", path.display())));
            }
            1
        }
        (None, None) => 1,
    };
    let probe_frames = if frames > 1 && is_animated(&cfg.stages) { vec![0, frames - 1] } else { vec![0] };
    for (i, raw) in cfg.stages.iter().enumerate() {
        for &frame in &probe_frames {
            let result = stage_for_frame(raw, frame, frames)
                .map_err(|e| Failure::config(format!("stage {}: {e}", i + 1)))
                .and_then(|stage| {
                    let label = stage_label(i, stage.kind());
                    build_stage(&stage, ctx, frame, frames).map(|_| ()).map_err(|f| f.within(&label))
                });
            if let Err(f) = result {
                let f = if probe_frames.len() > 1 { f.within(&format!("frame {}", frame + 1)) } else { f };
                report.push(f);
                break;
            }
        }
    }
    report
}

//! The JSON pipeline description.
//!
//! Stages are kept as raw JSON until a frame index is known, so that
//! `animate` ramps can rewrite parameters before the typed parse.

use std::path::PathBuf;

use serde::Deserialize;
use serde_json::Value;
use sphere_edit::conformal::{LatticeKind, LatticeNormalization};
use sphere_edit::raster::Rgb8;
use sphere_edit::resample::SampleOptions;

use crate::complex::{parse_complex, Cx, Pt};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Directory of frames; `output` is then a directory too.
    pub frames: Option<PathBuf>,
    #[serde(default)]
    pub sampling: SampleOptions,
    /// Pad inputs whose aspect is not 2:1 instead of rejecting them.
    #[serde(default)]
    pub allow_nonstandard: bool,
    pub stages: Vec<Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum StageConfig {
    Mobius(MobiusStage),
    Power(PowerStage),
    ExpStrip(ExpStripStage),
    Droste(DrosteStage),
    LatticeTwist(TwistStage),
    Rational(RationalStage),
    Schottky(SchottkyStage),
    Composite(CompositeStage),
}

impl StageConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            StageConfig::Mobius(_) => "mobius",
            StageConfig::Power(_) => "power",
            StageConfig::ExpStrip(_) => "exp_strip",
            StageConfig::Droste(_) => "droste",
            StageConfig::LatticeTwist(_) => "lattice_twist",
            StageConfig::Rational(_) => "rational",
            StageConfig::Schottky(_) => "schottky",
            StageConfig::Composite(_) => "composite",
        }
    }
}

fn one() -> f64 {
    1.0
}

fn zero_point() -> Pt {
    Pt(sphere_edit::geometry::ProjectivePoint::ZERO)
}

fn infinity() -> Pt {
    Pt(sphere_edit::geometry::ProjectivePoint::INFINITY)
}

/// A Möbius map given by a matrix, by three point pairs, or by two fixed
/// points with a rotation angle and scale factor (the default fixes `0`
/// and `∞`).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobiusStage {
    pub matrix: Option<[Cx; 4]>,
    pub from: Option<[Pt; 3]>,
    pub to: Option<[Pt; 3]>,
    pub fix: Option<[Pt; 2]>,
    #[serde(default)]
    pub angle: f64,
    #[serde(default = "one")]
    pub scale: f64,
    /// Pull back by the inverse, i.e. show the image moved by the map.
    #[serde(default)]
    pub invert: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerStage {
    pub n: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpStripStage {
    pub lambda: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrosteStage {
    #[serde(default = "zero_point")]
    pub p: Pt,
    #[serde(default = "infinity")]
    pub q: Pt,
    pub lambda: f64,
    #[serde(default)]
    pub twist: i32,
    #[serde(default = "one")]
    pub inner_radius: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistStage {
    pub lattice: LatticeKind,
    pub multiplier: Cx,
    #[serde(default)]
    pub normalization: LatticeNormalization,
}

/// Coefficients inline (highest degree first), from a file written by
/// `fit-rational`, or fitted from a lattice twist.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalStage {
    pub numerator: Option<Vec<Cx>>,
    pub denominator: Option<Vec<Cx>>,
    pub coeffs: Option<PathBuf>,
    pub fit: Option<FitConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub lattice: LatticeKind,
    pub multiplier: Cx,
    pub degree: usize,
    #[serde(default)]
    pub normalization: LatticeNormalization,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskConfig {
    pub center: Cx,
    pub radius: f64,
}

/// A generator pairing the outside of `from` with the inside of `to`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub from: DiskConfig,
    pub to: DiskConfig,
}

fn default_max_iter() -> usize {
    100
}

fn default_overlap_tolerance() -> usize {
    16
}

/// Generators come from `pairs`, or from `a`/`b` together with either
/// exact `disks` (D_a, D_b) or a `mask` image. A mask with only red and
/// green regions is completed from the generators.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchottkyStage {
    pub pairs: Option<Vec<PairConfig>>,
    pub a: Option<MobiusStage>,
    pub b: Option<MobiusStage>,
    pub disks: Option<Vec<DiskConfig>>,
    pub mask: Option<PathBuf>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub sentinel: Rgb8,
    #[serde(default = "default_overlap_tolerance")]
    pub overlap_tolerance: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionConfig {
    All,
    Hemisphere { pole: [f64; 3] },
    Disk { center: Cx, radius: f64 },
    OutsideDisk { center: Cx, radius: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub region: RegionConfig,
    /// Defaults to the image entering the stage.
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub stages: Vec<Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositeStage {
    pub sources: Vec<SourceConfig>,
}

/// A linear ramp of one parameter across the frames of a sequence.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Animate {
    /// Dotted path into the stage, e.g. `angle` or `pairs.0.to.radius`.
    pub param: String,
    pub from: Value,
    pub to: Value,
}

/// The ramp value at `t ∈ [0, 1]`. Integer parameters (integer endpoints
/// and an integer current value) are rounded.
fn ramp_value(a: &Value, b: &Value, t: f64, current: Option<&Value>) -> Result<Value, String> {
    if let (Some(x), Some(y)) = (a.as_f64(), b.as_f64()) {
        let v = x + t * (y - x);
        let integral = a.is_i64() && b.is_i64() && current.is_none_or(Value::is_i64);
        return Ok(if integral { Value::from(v.round() as i64) } else { Value::from(v) });
    }
    let cx = |v: &Value| -> Result<sphere_edit::C64, String> {
        match v {
            Value::String(s) => parse_complex(s),
            _ => serde_json::from_value::<Cx>(v.clone()).map(|c| c.0).map_err(|e| e.to_string()),
        }
    };
    let (x, y) = (cx(a)?, cx(b)?);
    let z = x + t * (y - x);
    Ok(Value::from(vec![z.re, z.im]))
}

fn set_path(stage: &mut Value, path: &str, value: Value) -> Result<(), String> {
    let mut cur = stage;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let last = i + 1 == keys.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(key.to_string(), value);
                    return Ok(());
                }
                map.get_mut(*key).ok_or_else(|| format!("animate: no parameter {path:?}"))?
            }
            Value::Array(items) => {
                let k: usize = key.parse().map_err(|_| format!("animate: {key:?} is not an index in {path:?}"))?;
                let slot = items.get_mut(k).ok_or_else(|| format!("animate: index {k} out of range in {path:?}"))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(format!("animate: cannot descend into {path:?}")),
        };
    }
    Err("animate: empty parameter path".into())
}

/// Parses one stage for frame `frame` of `frames`, applying its ramps.
pub fn stage_for_frame(raw: &Value, frame: usize, frames: usize) -> Result<StageConfig, String> {
    let mut stage = raw.clone();
    let ramps = match stage.as_object_mut().map(|m| m.remove("animate")) {
        None => return Err("a stage must be a JSON object".into()),
        Some(None) => Vec::new(),
        Some(Some(v @ Value::Array(_))) => serde_json::from_value::<Vec<Animate>>(v).map_err(|e| e.to_string())?,
        Some(Some(v)) => vec![serde_json::from_value::<Animate>(v).map_err(|e| e.to_string())?],
    };
    let t = if frames > 1 { frame as f64 / (frames - 1) as f64 } else { 0.0 };
    for ramp in &ramps {
        let pointer = format!("/{}", ramp.param.replace('.', "/"));
        let value = ramp_value(&ramp.from, &ramp.to, t, stage.pointer(&pointer))?;
        set_path(&mut stage, &ramp.param, value)?;
    }
    serde_json::from_value(stage).map_err(|e| e.to_string())
}

/// True when any stage, including nested composite stages, has a ramp.
pub fn is_animated(stages: &[Value]) -> bool {
    stages.iter().any(|s| {
        s.get("animate").is_some()
            || s.get("sources").and_then(Value::as_array).is_some_and(|sources| {
                sources.iter().any(|src| src.get("stages").and_then(Value::as_array).is_some_and(|v| is_animated(v)))
            })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = json!({"type": "power", "n": 2, "m": 3});
        assert!(stage_for_frame(&bad, 0, 1).unwrap_err().contains("unknown field"));
        let bad = json!({"type": "spin"});
        assert!(stage_for_frame(&bad, 0, 1).is_err());
        let cfg = r#"{"stages": [], "extra": 1}"#;
        assert!(serde_json::from_str::<PipelineConfig>(cfg).is_err());
    }

    #[test]
    fn stage_defaults() {
        let s = stage_for_frame(&json!({"type": "droste", "lambda": 4}), 0, 1).unwrap();
        let StageConfig::Droste(d) = s else { panic!() };
        assert!(d.q.0.is_infinite());
        assert_eq!((d.twist, d.inner_radius), (0, 1.0));
        let s = stage_for_frame(&json!({"type": "lattice_twist", "lattice": "square", "multiplier": "1+1i"}), 0, 1).unwrap();
        let StageConfig::LatticeTwist(t) = s else { panic!() };
        assert_eq!(t.normalization, LatticeNormalization::Anchors);
    }

    #[test]
    fn ramps_interpolate() {
        let raw = json!({"type": "mobius", "angle": 0.0, "animate": {"param": "angle", "from": 0.0, "to": 1.0}});
        let StageConfig::Mobius(m) = stage_for_frame(&raw, 2, 5).unwrap() else { panic!() };
        assert_eq!(m.angle, 0.5);
        let raw = json!({"type": "mobius", "angle": 0.0, "animate": {"param": "angle", "from": 0, "to": 1}});
        let StageConfig::Mobius(m) = stage_for_frame(&raw, 1, 4).unwrap() else { panic!() };
        assert!((m.angle - 1.0 / 3.0).abs() < 1e-15);
        let raw = json!({"type": "power", "n": 2, "animate": {"param": "n", "from": 2, "to": 6}});
        let StageConfig::Power(p) = stage_for_frame(&raw, 1, 3).unwrap() else { panic!() };
        assert_eq!(p.n, 4);
        let raw = json!({
            "type": "schottky",
            "pairs": [{"from": {"center": "-1", "radius": 0.5}, "to": {"center": "1", "radius": 0.5}}],
            "animate": [{"param": "pairs.0.to.center", "from": "1", "to": "1+2i"}]
        });
        let StageConfig::Schottky(s) = stage_for_frame(&raw, 1, 3).unwrap() else { panic!() };
        assert_eq!(s.pairs.unwrap()[0].to.center.0, sphere_edit::C64::new(1.0, 1.0));
        assert!(is_animated(std::slice::from_ref(&raw)));
        let raw = json!({"type": "power", "n": 2, "animate": {"param": "m.k", "from": 0, "to": 1}});
        assert!(stage_for_frame(&raw, 0, 2).is_err());
    }
}

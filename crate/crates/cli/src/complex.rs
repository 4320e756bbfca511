//! `RE+IMi` literals and the `inf` keyword.

use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::Deserialize;
use sphere_edit::geometry::ProjectivePoint;
use sphere_edit::C64;

/// Parses `2`, `-1.5i`, `i`, `1+1i`, `3e-2-4i`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let z = parse_parts(s)?;
    if z.is_finite() {
        Ok(z)
    } else {
        Err(format!("{s:?} is not a finite complex number"))
    }
}

fn parse_parts(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse {s:?} as a complex number (expected RE+IMi)");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| -> Result<f64, String> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, imag(&body[k..])?))
        }
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

/// Like [`parse_complex`], plus `inf` (or `∞`) for the point at infinity.
pub fn parse_point(s: &str) -> Result<ProjectivePoint, String> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Ok(ProjectivePoint::INFINITY),
        t => parse_complex(t).map(ProjectivePoint::finite),
    }
}

/// Splits a comma-separated list of complex literals.
pub fn parse_complex_list(s: &str) -> Result<Vec<C64>, String> {
    s.split(',').map(parse_complex).collect()
}

/// A complex number in a config: a number, a `RE+IMi` string, or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cx(pub C64);

/// A point of the sphere in a config: as [`Cx`], or the string `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pt(pub ProjectivePoint);

struct CxVisitor {
    allow_infinity: bool,
}

enum Parsed {
    Finite(C64),
    Infinity,
}

impl<'de> Visitor<'de> for CxVisitor {
    type Value = Parsed;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.allow_infinity {
            f.write_str("a number, \"RE+IMi\", [re, im], or \"inf\"")
        } else {
            f.write_str("a number, \"RE+IMi\", or [re, im]")
        }
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Parsed, E> {
        Ok(Parsed::Finite(C64::new(v, 0.0)))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Parsed, E> {
        self.visit_f64(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Parsed, E> {
        self.visit_f64(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Parsed, E> {
        if self.allow_infinity {
            let p = parse_point(v).map_err(E::custom)?;
            Ok(p.affine().map_or(Parsed::Infinity, Parsed::Finite))
        } else {
            parse_complex(v).map(Parsed::Finite).map_err(E::custom)
        }
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Parsed, A::Error> {
        let re: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
        let im: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
        if seq.next_element::<f64>()?.is_some() {
            return Err(de::Error::invalid_length(3, &self));
        }
        Ok(Parsed::Finite(C64::new(re, im)))
    }
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match d.deserialize_any(CxVisitor { allow_infinity: false })? {
            Parsed::Finite(z) => Ok(Cx(z)),
            Parsed::Infinity => unreachable!("infinity is rejected by the visitor"),
        }
    }
}

impl<'de> Deserialize<'de> for Pt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Pt(match d.deserialize_any(CxVisitor { allow_infinity: true })? {
            Parsed::Finite(z) => ProjectivePoint::finite(z),
            Parsed::Infinity => ProjectivePoint::INFINITY,
        }))
    }
}

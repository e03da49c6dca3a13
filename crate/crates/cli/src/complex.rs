//! `a+bi` complex literals.

use std::fmt;

use fgaudin::C64;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComplexParseError {
    #[error("empty complex literal")]
    Empty,
    #[error("malformed number {0:?} in complex literal")]
    Number(String),
    #[error("complex literal {0:?} is not finite")]
    NonFinite(String),
}

fn parse_real(s: &str, whole: &str) -> Result<f64, ComplexParseError> {
    let t = s.trim();
    // f64::from_str is lenient about "inf"/"nan" and a doubled sign is a typo, not a number.
    if t.is_empty() || t.starts_with("++") || t.starts_with("+-") || t.starts_with("-+") || t.starts_with("--") {
        return Err(ComplexParseError::Number(t.to_string()));
    }
    if !t.chars().all(|ch| ch.is_ascii_digit() || matches!(ch, '.' | 'e' | 'E' | '+' | '-')) {
        return Err(ComplexParseError::Number(t.to_string()));
    }
    let v: f64 = t.parse().map_err(|_| ComplexParseError::Number(t.to_string()))?;
    if !v.is_finite() {
        return Err(ComplexParseError::NonFinite(whole.to_string()));
    }
    Ok(v)
}

/// Imaginary coefficient, where a bare sign means ±1.
fn parse_imag(s: &str, whole: &str) -> Result<f64, ComplexParseError> {
    let t = s.trim();
    let (sign, rest) = match t.as_bytes().first() {
        Some(b'+') => (1.0, t[1..].trim_start()),
        Some(b'-') => (-1.0, t[1..].trim_start()),
        _ => (1.0, t),
    };
    if rest.is_empty() {
        return Ok(sign);
    }
    if rest.starts_with(['+', '-']) {
        return Err(ComplexParseError::Number(t.to_string()));
    }
    Ok(sign * parse_real(rest, whole)?)
}

/// Position of the sign separating real and imaginary parts, if any.
fn split_point(body: &str) -> Option<usize> {
    let b = body.as_bytes();
    (1..b.len()).rev().find(|&k| {
        (b[k] == b'+' || b[k] == b'-') && {
            let prev = body[..k].trim_end();
            !prev.is_empty() && !prev.ends_with(['e', 'E'])
        }
    })
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`, with optional spaces around the middle sign.
pub fn parse_complex(s: &str) -> Result<C64, ComplexParseError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ComplexParseError::Empty);
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(C64::new(parse_real(t, s)?, 0.0));
    };
    match split_point(body) {
        Some(k) => Ok(C64::new(parse_real(&body[..k], s)?, parse_imag(&body[k..], s)?)),
        None => Ok(C64::new(0.0, parse_imag(body, s)?)),
    }
}

/// Shortest representation that parses back to the same bits.
pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{}{:?}i", z.re, sign, z.im.abs())
}

/// Config-file wrapper: written as a string, read from a string or a plain number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cx(pub C64);

impl Cx {
    pub fn new(re: f64, im: f64) -> Self {
        Self(C64::new(re, im))
    }
}

impl From<C64> for Cx {
    fn from(z: C64) -> Self {
        Self(z)
    }
}

impl fmt::Display for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_complex(self.0))
    }
}

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_complex(self.0))
    }
}

struct CxVisitor;

impl Visitor<'_> for CxVisitor {
    type Value = Cx;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or an \"a+bi\" string")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Cx, E> {
        parse_complex(v).map(Cx).map_err(E::custom)
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Cx, E> {
        if v.is_finite() {
            Ok(Cx::new(v, 0.0))
        } else {
            Err(E::custom("complex literal is not finite"))
        }
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Cx, E> {
        Ok(Cx::new(v as f64, 0.0))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Cx, E> {
        Ok(Cx::new(v as f64, 0.0))
    }
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(CxVisitor)
    }
}

//! Piecewise-linear paths through the Brillouin zone.
//!
//! Grammar, with momenta in reduced units `q = k·a`:
//!
//! ```text
//! path   := vertex (';' vertex)+ ['@' count]
//! vertex := label | coord ',' coord
//! label  := 'G' | 'Γ' | 'X' | 'Y' | 'M'
//! coord  := ['-'] number | ['-'] [number '*'] 'pi' ['/' number]
//! ```
//!
//! `count` is the number of points per segment (default 50). Labels mean
//! `Γ = (0, 0)`, `X = (π, 0)`, `Y = (0, π)`, `M = (π, π)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use anomalylab::model::{ModelParams, WaveVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const DEFAULT_SEGMENT_POINTS: usize = 50;
pub const MAX_SEGMENT_POINTS: usize = 1_000_000;
pub const MAX_VERTICES: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("bad k-path at {pos}: {msg}")]
pub struct KPathError {
    pub pos: usize,
    pub msg: String,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, KPathError> {
    Err(KPathError { pos, msg: msg.into() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KPath {
    /// Vertices `(qx, qy)` in reduced units.
    pub vertices: Vec<(f64, f64)>,
    pub segment_points: usize,
}

impl KPath {
    /// Points along the path in radians per length; segment ends are not
    /// repeated and the final vertex is included.
    pub fn sample(&self, p: &ModelParams) -> Vec<WaveVector> {
        let n = self.segment_points;
        let mut out = Vec::with_capacity(n * (self.vertices.len() - 1) + 1);
        for w in self.vertices.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            for i in 0..n {
                let s = i as f64 / n as f64;
                out.push(WaveVector::new((x0 + s * (x1 - x0)) / p.a_x, (y0 + s * (y1 - y0)) / p.a_y));
            }
        }
        let (x, y) = *self.vertices.last().unwrap();
        out.push(WaveVector::new(x / p.a_x, y / p.a_y));
        out
    }
}

fn parse_number(s: &str, pos: usize) -> Result<f64, KPathError> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => err(pos, format!("expected a finite number, got {s:?}")),
    }
}

fn parse_coord(raw: &str, pos: usize) -> Result<f64, KPathError> {
    let s = raw.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim_start()),
        None => (1.0, s),
    };
    let lower = body.to_ascii_lowercase();
    let Some(at) = lower.find("pi") else {
        return parse_number(s, pos);
    };
    let (pre, post) = (&body[..at], &body[at + 2..]);
    let factor = if pre.trim().is_empty() {
        1.0
    } else {
        match pre.trim().strip_suffix('*') {
            Some(f) => parse_number(f, pos)?,
            None => return err(pos, format!("expected `<number>*pi`, got {raw:?}")),
        }
    };
    let divisor = if post.trim().is_empty() {
        1.0
    } else {
        match post.trim().strip_prefix('/') {
            Some(d) => parse_number(d, pos)?,
            None => return err(pos, format!("expected `pi/<number>`, got {raw:?}")),
        }
    };
    if divisor == 0.0 {
        return err(pos, "division by zero");
    }
    let v = sign * factor * PI / divisor;
    if !v.is_finite() {
        return err(pos, "coordinate overflows");
    }
    Ok(v)
}

fn parse_vertex(raw: &str, pos: usize) -> Result<(f64, f64), KPathError> {
    let s = raw.trim();
    match s {
        "G" | "g" | "Γ" => return Ok((0.0, 0.0)),
        "X" | "x" => return Ok((PI, 0.0)),
        "Y" | "y" => return Ok((0.0, PI)),
        "M" | "m" => return Ok((PI, PI)),
        _ => {}
    }
    let Some((a, b)) = s.split_once(',') else {
        return err(pos, format!("expected a label or `qx,qy`, got {s:?}"));
    };
    Ok((parse_coord(a, pos)?, parse_coord(b, pos + a.len() + 1)?))
}

impl FromStr for KPath {
    type Err = KPathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (body, count) = match s.rsplit_once('@') {
            Some((b, c)) => {
                let n: usize = c
                    .trim()
                    .parse()
                    .map_err(|_| KPathError { pos: b.len() + 1, msg: format!("bad point count {c:?}") })?;
                if n == 0 || n > MAX_SEGMENT_POINTS {
                    return err(b.len() + 1, format!("point count must lie in 1..={MAX_SEGMENT_POINTS}"));
                }
                (b, n)
            }
            None => (s, DEFAULT_SEGMENT_POINTS),
        };
        let mut vertices = Vec::new();
        let mut pos = 0;
        for part in body.split(';') {
            if vertices.len() == MAX_VERTICES {
                return err(pos, format!("more than {MAX_VERTICES} vertices"));
            }
            vertices.push(parse_vertex(part, pos)?);
            pos += part.len() + 1;
        }
        if vertices.len() < 2 {
            return err(0, "a path needs at least two vertices");
        }
        if (vertices.len() - 1).saturating_mul(count) > MAX_SEGMENT_POINTS {
            return err(0, format!("path would have more than {MAX_SEGMENT_POINTS} points"));
        }
        Ok(KPath { vertices, segment_points: count })
    }
}

impl fmt::Display for KPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, y)) in self.vertices.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{x:?},{y:?}")?;
        }
        write!(f, "@{}", self.segment_points)
    }
}

impl Serialize for KPath {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for KPath {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_and_counts() {
        let k: KPath = "G;X;M;G@4".parse().unwrap();
        assert_eq!(k.vertices, vec![(0.0, 0.0), (PI, 0.0), (PI, PI), (0.0, 0.0)]);
        let pts = k.sample(&ModelParams::default());
        assert_eq!(pts.len(), 13);
        assert_eq!(pts[4], WaveVector::new(PI, 0.0));
        assert_eq!(pts[8], WaveVector::new(PI, PI / 2.0));
    }

    #[test]
    fn coordinate_forms() {
        let k: KPath = "0.5, -pi/2 ; 2*pi,-3*pi/4; -pi,1e-3".parse().unwrap();
        assert_eq!(k.vertices[0], (0.5, -PI / 2.0));
        assert_eq!(k.vertices[1], (2.0 * PI, -3.0 * PI / 4.0));
        assert_eq!(k.vertices[2], (-PI, 1e-3));
        assert_eq!(k.segment_points, DEFAULT_SEGMENT_POINTS);
    }

    #[test]
    fn rejects() {
        for bad in
            ["", "G", "G;Q", "G;X@0", "G;X@-1", "1;2", "pi/0,0;G", "G;X@99999999", "nan,0;G", "3pi,0;G", "pi*2,0;G"]
        {
            assert!(bad.parse::<KPath>().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn display_round_trips() {
        let k: KPath = "0,pi/3;-2*pi/7,1e-300;M@9".parse().unwrap();
        assert_eq!(k.to_string().parse::<KPath>().unwrap(), k);
    }
}

//! Concrete point models: unit vectors over R, C or H, with quaternions stored
//! as four real components per coordinate.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{clamp_unit, Family, Field, Space};
use crate::error::{Error, Result};

/// Deterministic generator for the independent stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A unit vector in F^d, stored as `d * dim_R(F)` reals in field-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub field: Field,
    pub coords: Vec<f64>,
}

type Quat = [f64; 4];

#[inline]
fn qmul(p: Quat, q: Quat) -> Quat {
    [
        p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
        p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
        p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
        p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0],
    ]
}

#[inline]
fn qconj(p: Quat) -> Quat {
    [p[0], -p[1], -p[2], -p[3]]
}

impl Point {
    /// Builds a point, normalising the coordinate vector.
    pub fn new(field: Field, coords: Vec<f64>) -> Result<Point> {
        let k = field.real_dim();
        if coords.is_empty() || !coords.len().is_multiple_of(k) {
            return Err(Error::InvalidParams(format!(
                "{} coordinates do not form a vector over {}",
                coords.len(),
                field.tag()
            )));
        }
        let norm = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParams("point coordinates must be a non-zero finite vector".into()));
        }
        Ok(Point { field, coords: coords.into_iter().map(|x| x / norm).collect() })
    }

    /// Number of field coordinates d.
    pub fn len(&self) -> usize {
        self.coords.len() / self.field.real_dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    fn entry(&self, i: usize) -> Quat {
        let k = self.field.real_dim();
        let mut q = [0.0; 4];
        q[..k].copy_from_slice(&self.coords[i * k..(i + 1) * k]);
        q
    }

    /// Field inner product sum_i conj(x_i) y_i, embedded in the quaternions.
    pub fn inner(&self, other: &Point) -> Quat {
        match self.field {
            Field::R => {
                let s: f64 = self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum();
                [s, 0.0, 0.0, 0.0]
            }
            Field::C => {
                let mut re = 0.0;
                let mut im = 0.0;
                for (a, b) in self.coords.chunks_exact(2).zip(other.coords.chunks_exact(2)) {
                    re += a[0] * b[0] + a[1] * b[1];
                    im += a[0] * b[1] - a[1] * b[0];
                }
                [re, im, 0.0, 0.0]
            }
            Field::H => {
                let mut acc = [0.0; 4];
                for i in 0..self.len() {
                    let p = qmul(qconj(self.entry(i)), other.entry(i));
                    for j in 0..4 {
                        acc[j] += p[j];
                    }
                }
                acc
            }
        }
    }

    /// Right multiplication by a unit field scalar (the projective re-phasing).
    pub fn rephase(&self, u: Quat) -> Point {
        let k = self.field.real_dim();
        let mut coords = Vec::with_capacity(self.coords.len());
        for i in 0..self.len() {
            let p = qmul(self.entry(i), u);
            coords.extend_from_slice(&p[..k]);
        }
        Point { field: self.field, coords }
    }

    /// Euclidean norm of the coordinate vector.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl Space {
    fn check_point(&self, x: &Point) -> Result<()> {
        let field = self
            .field()
            .ok_or_else(|| Error::Unsupported(format!("{} has no concrete point model", self.name())))?;
        if x.field != field || x.len() != self.d {
            return Err(Error::InvalidParams(format!(
                "point over {} with {} coordinates does not belong to {}",
                x.field.tag(),
                x.len(),
                self.name()
            )));
        }
        Ok(())
    }

    /// Uniformly distributed point (normalised Gaussian vector).
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Point> {
        let field = self.field().ok_or_else(|| {
            Error::Unsupported(format!("uniform sampling is not available on {}", self.name()))
        })?;
        let n = self.d * field.real_dim();
        loop {
            let coords: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm2: f64 = coords.iter().map(|x| x * x).sum();
            if norm2 > 1e-300 {
                let norm = norm2.sqrt();
                return Ok(Point { field, coords: coords.into_iter().map(|x| x / norm).collect() });
            }
        }
    }

    /// Zonal variable t between two points: <x,y> on spheres and
    /// 2|<x,y>|^2 - 1 on projective spaces.
    pub fn distance_t(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        self.distance_t_unchecked(x, y)
    }

    /// As [`Space::distance_t`] without the model check; used in hot loops.
    pub fn distance_t_unchecked(&self, x: &Point, y: &Point) -> Result<f64> {
        let ip = x.inner(y);
        let t = match self.family {
            Family::Sphere => ip[0],
            _ => 2.0 * (ip[0] * ip[0] + ip[1] * ip[1] + ip[2] * ip[2] + ip[3] * ip[3]) - 1.0,
        };
        clamp_unit(t)
    }

    /// The point e_1.
    pub fn base_point(&self) -> Result<Point> {
        let field = self
            .field()
            .ok_or_else(|| Error::Unsupported(format!("{} has no concrete point model", self.name())))?;
        let mut coords = vec![0.0; self.d * field.real_dim()];
        coords[0] = 1.0;
        Ok(Point { field, coords })
    }
}

/// Product of random Householder reflections over R, C or H; an isometry of
/// every catalog point model.
#[derive(Clone, Debug)]
pub struct Isometry {
    field: Field,
    vectors: Vec<Point>,
}

impl Isometry {
    pub fn random<R: Rng + ?Sized>(space: &Space, reflections: usize, rng: &mut R) -> Result<Isometry> {
        let field = space.field().ok_or_else(|| Error::Unsupported(format!("{} has no point model", space.name())))?;
        let mut vectors = Vec::with_capacity(reflections);
        for _ in 0..reflections {
            vectors.push(space.sample_point(rng)?);
        }
        Ok(Isometry { field, vectors })
    }

    /// Applies `H_k ... H_1` with `H v = x - 2 v <v, x>`.
    pub fn apply(&self, x: &Point) -> Point {
        let k = self.field.real_dim();
        let mut cur = x.clone();
        for v in &self.vectors {
            let s = v.inner(&cur);
            let mut coords = cur.coords.clone();
            for i in 0..cur.len() {
                let p = qmul(v.entry(i), s);
                for j in 0..k {
                    coords[i * k + j] -= 2.0 * p[j];
                }
            }
            cur = Point { field: self.field, coords };
        }
        cur
    }
}

/// Writes a point file: a header line followed by one point per row.
pub fn write_points<W: Write>(mut w: W, space: &Space, points: &[Point]) -> Result<()> {
    let field = space.field().ok_or_else(|| Error::Unsupported(format!("{} has no point model", space.name())))?;
    writeln!(w, "# space={} field={} d={}", space.name(), field.tag(), space.d)?;
    for p in points {
        let row: Vec<String> = p.coords.iter().map(|x| format!("{x:e}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads a point file, returning its space and points.
pub fn read_points<R: BufRead>(r: R) -> Result<(Space, Vec<Point>)> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::InvalidParams("empty point file".into()))??;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| Error::InvalidParams("point file must start with '# space=... field=... d=...'".into()))?;
    let mut name = None;
    let mut field = None;
    let mut d = None;
    for tok in header.split_whitespace() {
        if let Some(v) = tok.strip_prefix("space=") {
            name = Some(v.to_string());
        } else if let Some(v) = tok.strip_prefix("field=") {
            field = Field::from_tag(v);
        } else if let Some(v) = tok.strip_prefix("d=") {
            d = v.parse::<usize>().ok();
        }
    }
    let (name, field, d) = match (name, field, d) {
        (Some(n), Some(f), Some(d)) => (n, f, d),
        _ => return Err(Error::InvalidParams("malformed point file header".into())),
    };
    let space = Space::parse(&name)?;
    if space.field() != Some(field) || space.d != d {
        return Err(Error::InvalidParams(format!("header field/d do not match space {name}")));
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::InvalidParams(format!("row {}: {e}", i + 2)))?;
        if coords.len() != d * field.real_dim() {
            return Err(Error::InvalidParams(format!(
                "row {} has {} values, expected {}",
                i + 2,
                coords.len(),
                d * field.real_dim()
            )));
        }
        let p = Point { field, coords };
        if (p.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("row {} is not a unit vector", i + 2)));
        }
        points.push(p);
    }
    Ok((space, points))
}

/// Reads one weight per line (blank lines and `#` comments ignored).
pub fn read_weights<R: BufRead>(r: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(
            line.parse::<f64>()
                .map_err(|e| Error::InvalidParams(format!("weight '{line}': {e}")))?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_distance_basics() {
        let s2 = Space::parse("S2").unwrap();
        let mut rng = stream_rng(1, 0);
        let x = s2.sample_point(&mut rng).unwrap();
        assert!((x.norm() - 1.0).abs() < 1e-12);
        assert!((s2.distance_t(&x, &x).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projective_orthogonal_and_rephased() {
        let cp2 = Space::parse("CP2").unwrap();
        let x = Point::new(Field::C, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let y = Point::new(Field::C, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(cp2.distance_t(&x, &y).unwrap(), -1.0);
        let u = [0.6, 0.8, 0.0, 0.0];
        assert!((cp2.distance_t(&x, &x.rephase(u)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unsupported_models() {
        let op2 = Space::parse("OP2").unwrap();
        let mut rng = stream_rng(0, 0);
        assert!(matches!(op2.sample_point(&mut rng), Err(Error::Unsupported(_))));
    }

    #[test]
    fn point_file_round_trip() {
        let hp2 = Space::parse("HP2").unwrap();
        let mut rng = stream_rng(3, 0);
        let pts: Vec<Point> = (0..3).map(|_| hp2.sample_point(&mut rng).unwrap()).collect();
        let mut buf = Vec::new();
        write_points(&mut buf, &hp2, &pts).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# space=HP2 field=H d=3\n"));
        let (space, back) = read_points(&buf[..]).unwrap();
        assert_eq!(space, hp2);
        assert_eq!(back.len(), 3);
        for (a, b) in pts.iter().zip(&back) {
            assert!((hp2.distance_t(a, b).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}

//! Points of a slice `ℝⁿ × [0,ε]ᵏ`: `n` main coordinates followed by `k`
//! slab coordinates.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::scalar::{format_rational, parse_rational, Backing, BackingKind, Rational};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PointError {
    #[error("coordinate {index} is not finite")]
    NonFinite { index: usize },
    #[error("point has {got} coordinates, expected n + k = {expected}")]
    Arity { got: usize, expected: usize },
    #[error("slab coordinate {index} = {value} lies outside [0, {eps}]")]
    OutsideSlab {
        index: usize,
        value: String,
        eps: String,
    },
    #[error("slice dimensions (n={n}, k={k}) do not match point dimensions (n={pn}, k={pk})")]
    SliceMismatch {
        n: usize,
        k: usize,
        pn: usize,
        pk: usize,
    },
    #[error("invalid slice: n must be >= 1 and eps > 0")]
    InvalidSlice,
    #[error("schema: {0}")]
    Schema(String),
    #[error("expected backing {expected}, found {found}")]
    Backing {
        expected: BackingKind,
        found: BackingKind,
    },
}

/// A point split into `dim_main` main coordinates and the remaining slab
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<T> {
    coords: Vec<T>,
    dim_main: usize,
}

pub type ExactPoint = Point<Rational>;
pub type FloatPoint = Point<f64>;

impl<T: Backing> Point<T> {
    pub fn new(main: Vec<T>, slab: Vec<T>) -> Result<Self, PointError> {
        let dim_main = main.len();
        let mut coords = main;
        coords.extend(slab);
        Self::from_coords(coords, dim_main)
    }

    pub fn from_coords(coords: Vec<T>, dim_main: usize) -> Result<Self, PointError> {
        if dim_main > coords.len() {
            return Err(PointError::Arity {
                got: coords.len(),
                expected: dim_main,
            });
        }
        if T::KIND == BackingKind::Float {
            if let Some(index) = coords.iter().position(|c| !c.to_f64_lossy().is_finite()) {
                return Err(PointError::NonFinite { index });
            }
        }
        Ok(Point { coords, dim_main })
    }

    /// Point in `ℝ^d` with no slab block.
    pub fn plain(coords: Vec<T>) -> Self {
        let dim_main = coords.len();
        Point { coords, dim_main }
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn main(&self) -> &[T] {
        &self.coords[..self.dim_main]
    }

    pub fn slab(&self) -> &[T] {
        &self.coords[self.dim_main..]
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn dim_main(&self) -> usize {
        self.dim_main
    }

    pub fn dim_slab(&self) -> usize {
        self.coords.len() - self.dim_main
    }

    pub fn dist_sq(&self, other: &Self) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(T::zero(), |acc, (a, b)| {
                let d = a.clone() - b.clone();
                acc + d.clone() * d
            })
    }

    pub fn to_float(&self) -> FloatPoint {
        Point {
            coords: self.coords.iter().map(|c| c.to_f64_lossy()).collect(),
            dim_main: self.dim_main,
        }
    }

    pub fn translated(&self, offset: &[T]) -> Self {
        Point {
            coords: self
                .coords
                .iter()
                .zip(offset)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
            dim_main: self.dim_main,
        }
    }
}

impl FloatPoint {
    pub fn dist(&self, other: &Self) -> f64 {
        self.dist_sq(other).sqrt()
    }
}

/// The slice `ℝⁿ × [0,ε]ᵏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub n: usize,
    pub k: usize,
    #[serde(with = "crate::scalar::serde_rational")]
    pub eps: Rational,
}

impl SliceSpec {
    pub fn new(n: usize, k: usize, eps: Rational) -> Result<Self, PointError> {
        use num::traits::Signed;
        if n == 0 || !eps.is_positive() {
            return Err(PointError::InvalidSlice);
        }
        Ok(SliceSpec { n, k, eps })
    }

    /// Checks dimensions and that every slab coordinate lies in `[0, ε]`.
    pub fn check<T: SlabCompare>(&self, p: &Point<T>) -> Result<(), PointError> {
        if p.dim_main() != self.n || p.dim_slab() != self.k {
            return Err(PointError::SliceMismatch {
                n: self.n,
                k: self.k,
                pn: p.dim_main(),
                pk: p.dim_slab(),
            });
        }
        for (i, y) in p.slab().iter().enumerate() {
            if !y.within(&self.eps) {
                return Err(PointError::OutsideSlab {
                    index: p.dim_main() + i,
                    value: y.render(),
                    eps: format_rational(&self.eps),
                });
            }
        }
        Ok(())
    }
}

/// Slab membership test against a rational width, per backing.
pub trait SlabCompare: Backing {
    fn within(&self, eps: &Rational) -> bool;
    fn render(&self) -> String;
}

impl SlabCompare for Rational {
    fn within(&self, eps: &Rational) -> bool {
        use num::traits::Zero;
        *self >= Rational::zero() && self <= eps
    }
    fn render(&self) -> String {
        format_rational(self)
    }
}

impl SlabCompare for f64 {
    fn within(&self, eps: &Rational) -> bool {
        use num::traits::ToPrimitive;
        let e = eps.to_f64().unwrap_or(f64::INFINITY);
        *self >= 0.0 && *self <= e
    }
    fn render(&self) -> String {
        format!("{self:e}")
    }
}

/// Coordinate (de)serialization for the JSON schemas: rationals as `"p/q"`
/// strings, floats as JSON numbers.
pub trait JsonCoord: Backing {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self, PointError>;
}

impl JsonCoord for Rational {
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
    fn from_json(v: &Value) -> Result<Self, PointError> {
        match v {
            Value::String(s) => parse_rational(s).map_err(|e| PointError::Schema(e.to_string())),
            Value::Number(n) if n.is_i64() => Ok(crate::scalar::int(n.as_i64().unwrap())),
            other => Err(PointError::Schema(format!(
                "exact coordinate must be a \"p/q\" string, got {other}"
            ))),
        }
    }
}

impl JsonCoord for f64 {
    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }
    fn from_json(v: &Value) -> Result<Self, PointError> {
        v.as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| PointError::Schema(format!("float coordinate must be a finite number, got {v}")))
    }
}

/// `{"backing":..,"n":..,"k":..,"coords":[[..],..]}`: a point list (a
/// simplex is the same document with 2+ rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSetDoc {
    pub backing: BackingKind,
    pub n: usize,
    pub k: usize,
    pub coords: Vec<Vec<Value>>,
}

impl PointSetDoc {
    pub fn from_points<T: JsonCoord>(n: usize, k: usize, points: &[Point<T>]) -> Self {
        PointSetDoc {
            backing: T::KIND,
            n,
            k,
            coords: points
                .iter()
                .map(|p| p.coords().iter().map(JsonCoord::to_json).collect())
                .collect(),
        }
    }

    pub fn to_points<T: JsonCoord>(&self) -> Result<Vec<Point<T>>, PointError> {
        if self.backing != T::KIND {
            return Err(PointError::Backing {
                expected: T::KIND,
                found: self.backing,
            });
        }
        parse_rows(&self.coords, self.n, self.k)
    }
}

pub(crate) fn parse_rows<T: JsonCoord>(
    rows: &[Vec<Value>],
    n: usize,
    k: usize,
) -> Result<Vec<Point<T>>, PointError> {
    rows.iter()
        .map(|row| {
            if row.len() != n + k {
                return Err(PointError::Arity {
                    got: row.len(),
                    expected: n + k,
                });
            }
            let coords = row.iter().map(T::from_json).collect::<Result<Vec<_>, _>>()?;
            Point::from_coords(coords, n)
        })
        .collect()
}

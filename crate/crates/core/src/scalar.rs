//! Numeric backings shared by every geometric routine.
//!
//! Two backings exist: `f64` for sphere constructions and sampling
//! experiments, and [`Rational`] (arbitrary-precision fractions) for
//! everything that must be decided exactly. Generic code is written once
//! against [`Backing`]; mixing backings is a type error.

use std::fmt::{self, Debug, Display};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use num::Integer;
use serde::{Deserialize, Serialize};

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Default tolerance for float "equals" predicates.
pub const TAU_GEOM: f64 = 1e-10;

/// Float Cayley–Menger determinants below this magnitude, relative to
/// `(max squared edge)^m` for an `m`-simplex, mark it as degenerate.
pub const FLOAT_DEGENERATE_DET: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackingKind {
    Exact,
    Float,
}

impl Display for BackingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackingKind::Exact => f.write_str("exact"),
            BackingKind::Float => f.write_str("float"),
        }
    }
}

/// Field operations plus the few backing-specific decisions geometry needs.
pub trait Backing:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Signed
    + ToPrimitive
    + Send
    + Sync
    + for<'a> std::ops::AddAssign<&'a Self>
    + 'static
{
    const KIND: BackingKind;

    fn from_int(v: i64) -> Self;

    /// Is a Cayley–Menger determinant small enough to call the simplex flat?
    /// `scale` is `(max squared edge)^m`; exact backings ignore it.
    fn det_is_degenerate(det: &Self, scale: f64) -> bool;

    /// Exact square root when one exists in the backing.
    fn sqrt_exact(&self) -> Option<Self>;

    /// Exact equality for rationals, `|a - b| <= tol` for floats.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Backing for f64 {
    const KIND: BackingKind = BackingKind::Float;

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn det_is_degenerate(det: &Self, scale: f64) -> bool {
        det.abs() < FLOAT_DEGENERATE_DET * scale
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if *self < 0.0 {
            None
        } else {
            Some(self.sqrt())
        }
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }
}

impl Backing for Rational {
    const KIND: BackingKind = BackingKind::Exact;

    fn from_int(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn det_is_degenerate(det: &Self, _scale: f64) -> bool {
        det.is_zero()
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(Rational::new(n, d))
        } else {
            None
        }
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?} (expected \"p/q\" or an integer)")]
pub struct ParseRationalError(pub String);

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.01"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| err())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = int.starts_with('-');
        let int_part = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| err())?
        };
        let scale = num::pow(BigInt::from(10), frac.len());
        let frac_part = BigInt::from_str(frac).map_err(|_| err())?;
        let mag = int_part.abs() * &scale + frac_part;
        let numer = if negative { -mag } else { mag };
        return Ok(Rational::new(numer, scale));
    }
    BigInt::from_str(t)
        .map(Rational::from_integer)
        .map_err(|_| err())
}

/// Canonical `"p/q"` rendering (denominator always written).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Exact conversion of a finite float into a rational.
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_f64(x).expect("finite float")
}

pub fn rational(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Extended Euclid: returns `(g, s, t)` with `s*a + t*b = g = gcd(a, b) >= 0`.
pub fn extended_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter writing big integers as decimal strings.
pub mod serde_bigint {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::from_str(s.trim()).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse_rational("6/8").unwrap(), rational(3, 4));
        assert_eq!(parse_rational("-7").unwrap(), int(-7));
        assert_eq!(parse_rational("0.01").unwrap(), rational(1, 100));
        assert_eq!(parse_rational("-1.5").unwrap(), rational(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn canonical_form_has_positive_denominator() {
        let r = parse_rational("3/-6").unwrap();
        assert_eq!(format_rational(&r), "-1/2");
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(rational(9, 4).sqrt_exact(), Some(rational(3, 2)));
        assert_eq!(rational(2, 1).sqrt_exact(), None);
        assert_eq!(rational(-1, 1).sqrt_exact(), None);
    }

    #[test]
    fn float_to_rational_is_exact() {
        let r = rational_from_f64(0.1);
        assert_eq!(r.to_f64().unwrap(), 0.1);
        assert_ne!(r, rational(1, 10));
    }
}

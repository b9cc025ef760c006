//! Finite 4-chromatic unit-distance graphs in `ℚ² × [0,ε]²`.
//!
//! Pairs `(a, b)` with `3b² − a² = 2` give rhombi `A, B, C, D` whose five
//! unit edges force `A` and `D` to share a color in any 3-coloring, with
//! `|AD| = a/b`. Chaining rhombi of two consecutive spans `a_n/b_n` and
//! `a_{n+1}/b_{n+1}` reaches distance 1, and the closing unit edge makes the
//! graph not 3-colorable.

use std::ops::Mul;

use num::bigint::BigInt;
use num::integer::Integer;
use num::traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::point::{ExactPoint, Point, SliceSpec};
use crate::scalar::{extended_gcd, int, Rational};
use crate::udg::{build_udg, Predicate, UdgError, UnitDistanceGraph};

/// Vertex cap for [`witness_graph`].
pub const WITNESS_VERTEX_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SliceError {
    #[error("slab condition 1/(2b^2) < eps fails for b = {b} (eps = {eps})")]
    SlabViolation { b: BigInt, eps: String },
    #[error("eps must be positive")]
    NonPositiveEps,
    #[error("witness graph would need {needed} vertices (cap {cap})")]
    TooLarge { needed: String, cap: usize },
    #[error(transparent)]
    Udg(#[from] UdgError),
    #[error("construction check failed: {0}")]
    Internal(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PellPair {
    #[serde(with = "crate::scalar::serde_bigint")]
    pub a: BigInt,
    #[serde(with = "crate::scalar::serde_bigint")]
    pub b: BigInt,
    pub index: usize,
}

impl PellPair {
    /// `3b² − a²`.
    pub fn defect(&self) -> BigInt {
        BigInt::from(3) * &self.b * &self.b - &self.a * &self.a
    }

    pub fn next(&self) -> PellPair {
        let a = BigInt::from(7) * &self.a + BigInt::from(12) * &self.b;
        let b = BigInt::from(4) * &self.a + BigInt::from(7) * &self.b;
        PellPair {
            a,
            b,
            index: self.index + 1,
        }
    }

    /// `a / b`, the span of the rhombus built on this pair.
    pub fn span(&self) -> Rational {
        Rational::new(self.a.clone(), self.b.clone())
    }
}

pub fn pell_pair(index: usize) -> PellPair {
    let mut p = PellPair {
        a: BigInt::one(),
        b: BigInt::one(),
        index: 0,
    };
    for _ in 0..index {
        p = p.next();
    }
    p
}

pub fn pell_solutions(count: usize) -> Vec<PellPair> {
    let mut out: Vec<PellPair> = Vec::with_capacity(count);
    let mut p = pell_pair(0);
    for _ in 0..count {
        assert_eq!(p.defect(), BigInt::from(2));
        out.push(p.clone());
        p = p.next();
    }
    out
}

/// Five-unit-edge rhombus `A, B, C, D` with `D − A = (a/b, 0, 0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhombusGadget {
    pub a: ExactPoint,
    pub b: ExactPoint,
    pub c: ExactPoint,
    pub d: ExactPoint,
    pub q: Rational,
    pub alpha: Rational,
    pub beta: Rational,
}

impl RhombusGadget {
    pub fn points(&self) -> [&ExactPoint; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// Squared lengths of AB, AC, BC, BD, CD.
    pub fn edge_lengths_sq(&self) -> [Rational; 5] {
        [
            self.a.dist_sq(&self.b),
            self.a.dist_sq(&self.c),
            self.b.dist_sq(&self.c),
            self.b.dist_sq(&self.d),
            self.c.dist_sq(&self.d),
        ]
    }

    /// Largest slab coordinate above the translation's own.
    pub fn slab_extent(&self) -> Rational {
        self.alpha.clone().max(self.beta.clone())
    }
}

fn slab_ok(p: &PellPair, eps: &Rational) -> Result<(), SliceError> {
    if !eps.is_positive() {
        return Err(SliceError::NonPositiveEps);
    }
    let need = Rational::new(BigInt::one(), BigInt::from(2) * &p.b * &p.b);
    if need < *eps {
        Ok(())
    } else {
        Err(SliceError::SlabViolation {
            b: p.b.clone(),
            eps: crate::scalar::format_rational(eps),
        })
    }
}

/// Rhombus on `p` translated by `translate`, with `q = a/(2b)` and
/// `α = β = 1/(2b)`. Requires `1/(2b²) < eps`.
pub fn rhombus_gadget(p: &PellPair, eps: &Rational, translate: &[Rational; 4]) -> Result<RhombusGadget, SliceError> {
    slab_ok(p, eps)?;
    let two_b = BigInt::from(2) * &p.b;
    let q = Rational::new(p.a.clone(), two_b.clone());
    let alpha = Rational::new(BigInt::one(), two_b);
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let at = |dx: Rational, dy: Rational, s: Rational| -> ExactPoint {
        Point::new(
            vec![translate[0].clone() + dx, translate[1].clone() + dy],
            vec![translate[2].clone() + s.clone(), translate[3].clone() + s],
        )
        .expect("four coordinates")
    };
    let zero = Rational::zero();
    let g = RhombusGadget {
        a: at(zero.clone(), zero.clone(), zero.clone()),
        b: at(q.clone(), half.clone(), alpha.clone()),
        c: at(q.clone(), -half, alpha.clone()),
        d: at(q.clone() * int(2), zero.clone(), zero),
        q,
        beta: alpha.clone(),
        alpha,
    };
    if g.edge_lengths_sq().iter().any(|l| !l.is_one()) {
        return Err(SliceError::Internal("rhombus edge is not unit"));
    }
    Ok(g)
}

/// Signed `(x, y)` with `x·a_n/b_n + y·a_{n+1}/b_{n+1} = 1`, minimizing
/// `|x| + |y|` (ties: smaller `|x|`, then larger `x`).
pub fn bezout_combination(n: usize) -> (BigInt, BigInt) {
    let p0 = pell_pair(n);
    let p1 = p0.next();
    let big_p = &p0.a * &p1.b;
    let big_q = &p1.a * &p0.b;
    let target = &p0.b * &p1.b;
    let (g, s, t) = extended_gcd(&big_p, &big_q);
    assert!(g.is_one(), "gcd(a_n b_(n+1), a_(n+1) b_n) = 1");
    let x0 = s * &target;
    let y0 = t * &target;
    // x = x0 + kQ, y = y0 − kP; |x|+|y| is convex in k with kinks near
    // −x0/Q and y0/P
    let mut ks = Vec::new();
    for (num, den) in [(-&x0, &big_q), (y0.clone(), &big_p)] {
        let f = num.div_floor(den);
        ks.extend([&f - 1, f.clone(), &f + 1, &f + 2]);
    }
    let cost = |k: &BigInt| {
        let x = &x0 + k * &big_q;
        let y = &y0 - k * &big_p;
        (x.abs() + y.abs(), x.abs(), -x.clone(), x, y)
    };
    let best = ks.iter().map(cost).min().expect("candidates");
    (best.3, best.4)
}

pub fn gcd_of_cross_terms(n: usize) -> BigInt {
    let p0 = pell_pair(n);
    let p1 = p0.next();
    (&p0.a * &p1.b).gcd(&(&p1.a * &p0.b))
}

/// Smallest `n` whose rhombi (spans `a_n/b_n` and `a_{n+1}/b_{n+1}`) have
/// slab extent `1/(2b) ≤ eps`.
pub fn smallest_index_within_slab(eps: &Rational) -> Result<usize, SliceError> {
    if !eps.is_positive() {
        return Err(SliceError::NonPositiveEps);
    }
    let mut p = pell_pair(0);
    loop {
        if Rational::new(BigInt::one(), BigInt::from(2) * &p.b) <= *eps {
            return Ok(p.index);
        }
        p = p.next();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessGraph {
    pub graph: UnitDistanceGraph<Rational>,
    pub x: BigInt,
    pub y: BigInt,
    pub gadgets: usize,
    /// Largest slab coordinate used.
    pub slab_extent: Rational,
    /// Whether every point lies in `ℚ² × [0,eps]²`; when true the slice is
    /// attached to the graph.
    pub in_slice: bool,
}

/// Chains `|x|` rhombi of span `a_n/b_n` then `|y|` of span
/// `a_{n+1}/b_{n+1}` along the first axis from the origin (negative counts
/// go left), ending at `(1, 0, 0, 0)`, and builds the exact unit-distance
/// graph on all their vertices.
pub fn witness_graph(n: usize, eps: &Rational) -> Result<WitnessGraph, SliceError> {
    let p0 = pell_pair(n);
    let p1 = p0.next();
    slab_ok(&p0, eps)?;
    slab_ok(&p1, eps)?;
    let (x, y) = bezout_combination(n);
    let steps = x.abs() + y.abs();
    let needed: BigInt = &steps * BigInt::from(3) + BigInt::one();
    if needed > BigInt::from(WITNESS_VERTEX_CAP) {
        return Err(SliceError::TooLarge {
            needed: needed.to_string(),
            cap: WITNESS_VERTEX_CAP,
        });
    }
    let mut points: Vec<ExactPoint> = vec![origin()];
    let mut pos = Rational::zero();
    let mut extent = Rational::zero();
    let mut gadgets = 0;
    for (pair, count) in [(&p0, &x), (&p1, &y)] {
        let span = pair.span();
        let step = if count.is_negative() { -span.clone() } else { span.clone() };
        let reps: usize = count.abs().try_into().expect("bounded by cap");
        for _ in 0..reps {
            let next = pos.clone() + step.clone();
            let left = pos.clone().min(next.clone());
            let t = [left, Rational::zero(), Rational::zero(), Rational::zero()];
            let g = rhombus_gadget(pair, eps, &t)?;
            extent = extent.max(g.slab_extent());
            points.extend([g.a, g.b, g.c, g.d]);
            pos = next;
            gadgets += 1;
        }
    }
    if !pos.is_one() {
        return Err(SliceError::Internal("chain does not end at distance 1"));
    }
    let in_slice = extent <= *eps;
    let slice = in_slice.then(|| SliceSpec::new(2, 2, eps.clone()).expect("positive eps"));
    let graph = build_udg(points, Predicate::Exact, slice)?;
    let start = graph.points.iter().position(|p| *p == origin());
    let end = graph.points.iter().position(|p| *p == unit_x());
    match (start, end) {
        (Some(i), Some(j)) if graph.edges.contains(&(i.min(j), i.max(j))) => {}
        _ => return Err(SliceError::Internal("closing edge missing")),
    }
    Ok(WitnessGraph {
        graph,
        x,
        y,
        gadgets,
        slab_extent: extent,
        in_slice,
    })
}

fn origin() -> ExactPoint {
    Point::new(vec![int(0), int(0)], vec![int(0), int(0)]).expect("point")
}

fn unit_x() -> ExactPoint {
    Point::new(vec![int(1), int(0)], vec![int(0), int(0)]).expect("point")
}

/// Element `a + b√3` of `ℤ[√3]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZSqrt3 {
    pub a: BigInt,
    pub b: BigInt,
}

impl ZSqrt3 {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        ZSqrt3 { a: a.into(), b: b.into() }
    }

    pub fn norm(&self) -> BigInt {
        z_sqrt3_norm(&self.a, &self.b)
    }
}

impl Mul for &ZSqrt3 {
    type Output = ZSqrt3;
    fn mul(self, o: &ZSqrt3) -> ZSqrt3 {
        ZSqrt3 {
            a: &self.a * &o.a + BigInt::from(3) * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

/// `N(a + b√3) = a² − 3b²`.
pub fn z_sqrt3_norm(a: &BigInt, b: &BigInt) -> BigInt {
    a * a - BigInt::from(3) * b * b
}

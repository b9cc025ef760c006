//! Unit-distance graphs over exact or float point sets.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coloring::{max_clique, Graph};
use crate::point::{parse_rows, JsonCoord, Point, PointError, SlabCompare, SliceSpec};
use crate::scalar::{Backing, BackingKind, Rational, TAU_GEOM};

/// Default adjacency tolerance for float point sets.
pub const DEFAULT_TAU: f64 = 1e-9;

const SCREEN_COORD_BOUND: f64 = 1e6;
const SCREEN_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Predicate {
    /// Squared distance exactly 1; exact backing only.
    Exact,
    /// `| |p − q| − 1 | ≤ τ`, with `τ ∈ [0, 0.1]`.
    Tolerance(f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UdgError {
    #[error("exact predicate requires exact backing")]
    ExactOnFloat,
    #[error("tolerance {0} outside [0, 0.1]")]
    Tolerance(f64),
    #[error("points have mismatched dimensions")]
    Dimension,
    #[error(transparent)]
    Point(#[from] PointError),
    #[error("edge ({0}, {1}) is invalid: {2}")]
    Edge(usize, usize, &'static str),
    #[error("schema: {0}")]
    Schema(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitDistanceGraph<T> {
    pub points: Vec<Point<T>>,
    /// Pairs `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub predicate: Predicate,
    pub slice: Option<SliceSpec>,
}

fn is_unit<T: Backing>(d2: &T, predicate: Predicate) -> bool {
    match predicate {
        Predicate::Exact => d2.is_one(),
        Predicate::Tolerance(tau) => (d2.to_f64_lossy().sqrt() - 1.0).abs() <= tau,
    }
}

fn same_point<T: Backing>(p: &Point<T>, q: &Point<T>) -> bool {
    match T::KIND {
        BackingKind::Exact => p == q,
        BackingKind::Float => p.dist_sq(q).to_f64_lossy().sqrt() < TAU_GEOM,
    }
}

fn check_predicate<T: Backing>(predicate: Predicate) -> Result<(), UdgError> {
    match predicate {
        Predicate::Exact if T::KIND == BackingKind::Float => Err(UdgError::ExactOnFloat),
        Predicate::Tolerance(t) if !(0.0..=0.1).contains(&t) => Err(UdgError::Tolerance(t)),
        _ => Ok(()),
    }
}

/// Deduplicates `points` (first occurrence wins) and connects every pair
/// satisfying `predicate`.
pub fn build_udg<T: SlabCompare>(
    points: Vec<Point<T>>,
    predicate: Predicate,
    slice: Option<SliceSpec>,
) -> Result<UnitDistanceGraph<T>, UdgError> {
    check_predicate::<T>(predicate)?;
    if let Some(first) = points.first() {
        if points.iter().any(|p| p.dim() != first.dim() || p.dim_main() != first.dim_main()) {
            return Err(UdgError::Dimension);
        }
    }
    if let Some(s) = &slice {
        for p in &points {
            s.check(p)?;
        }
    }
    let points = dedup(points);
    let approx: Vec<Vec<f64>> = points.iter().map(|p| p.to_float().coords().to_vec()).collect();
    // exact candidates are screened in floats first; sound while rounding
    // error stays far below the screening margin
    let screen = T::KIND == BackingKind::Exact && approx.iter().flatten().all(|c| c.abs() < SCREEN_COORD_BOUND);
    let edges: Vec<(usize, usize)> = (0..points.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let (points, approx) = (&points, &approx);
            (i + 1..points.len())
                .filter(move |&j| {
                    if screen {
                        let d2: f64 = approx[i].iter().zip(&approx[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                        if (d2 - 1.0).abs() > SCREEN_MARGIN {
                            return false;
                        }
                    }
                    is_unit(&points[i].dist_sq(&points[j]), predicate)
                })
                .map(move |j| (i, j))
        })
        .collect();
    Ok(UnitDistanceGraph {
        points,
        edges,
        predicate,
        slice,
    })
}

fn dedup<T: Backing>(points: Vec<Point<T>>) -> Vec<Point<T>> {
    let mut kept: Vec<Point<T>> = Vec::with_capacity(points.len());
    if T::KIND == BackingKind::Exact {
        // equal rationals round to equal floats, so bucket by float bits
        let mut buckets: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
        for p in points {
            let key: Vec<u64> = p.coords().iter().map(|c| (c.to_f64_lossy() + 0.0).to_bits()).collect();
            let bucket = buckets.entry(key).or_default();
            if !bucket.iter().any(|&i| kept[i] == p) {
                bucket.push(kept.len());
                kept.push(p);
            }
        }
        return kept;
    }
    for p in points {
        if !kept.iter().any(|q| same_point(q, &p)) {
            kept.push(p);
        }
    }
    kept
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub vertices: usize,
    pub edges: usize,
    pub max_degree: usize,
    /// Clique number, searched exhaustively up to 5.
    pub clique_number: usize,
}

pub fn graph_stats(g: &Graph) -> GraphStats {
    GraphStats {
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        max_degree: g.max_degree(),
        clique_number: max_clique(g, Some(5)).len(),
    }
}

impl<T: Backing> UnitDistanceGraph<T> {
    pub fn graph(&self) -> Graph {
        Graph::from_edges(self.points.len(), &self.edges).expect("edges validated at construction")
    }

    /// `p edge V E` followed by 1-indexed `e i j` lines.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p edge {} {}\n", self.points.len(), self.edges.len());
        for (i, j) in &self.edges {
            out.push_str(&format!("e {} {}\n", i + 1, j + 1));
        }
        out
    }

    pub fn dim_main(&self) -> usize {
        self.points.first().map_or(0, |p| p.dim_main())
    }

    pub fn dim_slab(&self) -> usize {
        self.points.first().map_or(0, |p| p.dim_slab())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateDoc {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

/// On-disk graph document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub backing: BackingKind,
    pub n: usize,
    pub k: usize,
    pub points: Vec<Vec<Value>>,
    pub edges: Vec<[usize; 2]>,
    pub predicate: PredicateDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<SliceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl<T: SlabCompare + JsonCoord> UnitDistanceGraph<T> {
    pub fn to_doc(&self, seed: Option<u64>) -> GraphDoc {
        GraphDoc {
            backing: T::KIND,
            n: self.dim_main(),
            k: self.dim_slab(),
            points: self
                .points
                .iter()
                .map(|p| p.coords().iter().map(JsonCoord::to_json).collect())
                .collect(),
            edges: self.edges.iter().map(|&(i, j)| [i, j]).collect(),
            predicate: match self.predicate {
                Predicate::Exact => PredicateDoc {
                    kind: "exact".into(),
                    tau: None,
                },
                Predicate::Tolerance(t) => PredicateDoc {
                    kind: "tol".into(),
                    tau: Some(t),
                },
            },
            slice: self.slice.clone(),
            seed,
        }
    }

    /// Loads a document, validating every stored edge against the
    /// predicate; the stored edge list is kept as given.
    pub fn from_doc(doc: &GraphDoc) -> Result<Self, UdgError> {
        if doc.backing != T::KIND {
            return Err(PointError::Backing {
                expected: T::KIND,
                found: doc.backing,
            }
            .into());
        }
        if doc.points.is_empty() {
            return Err(UdgError::Schema("graph has no points".into()));
        }
        let predicate = match (doc.predicate.kind.as_str(), doc.predicate.tau) {
            ("exact", _) => Predicate::Exact,
            ("tol", Some(t)) => Predicate::Tolerance(t),
            ("tol", None) => Predicate::Tolerance(DEFAULT_TAU),
            (other, _) => return Err(UdgError::Schema(format!("unknown predicate kind {other:?}"))),
        };
        check_predicate::<T>(predicate)?;
        let points: Vec<Point<T>> = parse_rows(&doc.points, doc.n, doc.k)?;
        if let Some(s) = &doc.slice {
            for p in &points {
                s.check(p)?;
            }
        }
        let mut edges = Vec::with_capacity(doc.edges.len());
        for &[a, b] in &doc.edges {
            let (i, j) = (a.min(b), a.max(b));
            if j >= points.len() {
                return Err(UdgError::Edge(a, b, "index out of range"));
            }
            if i == j {
                return Err(UdgError::Edge(a, b, "self-loop"));
            }
            if !is_unit(&points[i].dist_sq(&points[j]), predicate) {
                return Err(UdgError::Edge(a, b, "not a unit distance"));
            }
            edges.push((i, j));
        }
        let mut sorted = edges.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != edges.len() {
            return Err(UdgError::Edge(0, 0, "duplicate edge"));
        }
        Ok(UnitDistanceGraph {
            points,
            edges,
            predicate,
            slice: doc.slice.clone(),
        })
    }
}

/// A loaded graph of either backing.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyGraph {
    Exact(UnitDistanceGraph<Rational>),
    Float(UnitDistanceGraph<f64>),
}

impl AnyGraph {
    pub fn from_doc(doc: &GraphDoc) -> Result<Self, UdgError> {
        match doc.backing {
            BackingKind::Exact => UnitDistanceGraph::from_doc(doc).map(AnyGraph::Exact),
            BackingKind::Float => UnitDistanceGraph::from_doc(doc).map(AnyGraph::Float),
        }
    }

    pub fn graph(&self) -> Graph {
        match self {
            AnyGraph::Exact(g) => g.graph(),
            AnyGraph::Float(g) => g.graph(),
        }
    }

    pub fn to_dimacs(&self) -> String {
        match self {
            AnyGraph::Exact(g) => g.to_dimacs(),
            AnyGraph::Float(g) => g.to_dimacs(),
        }
    }
}

/// The seven-point Moser spindle: two unit rhombi hinged at the origin,
/// rotated so their far tips are at distance 1.
pub fn moser_spindle_points() -> Vec<Point<f64>> {
    let s3 = 3f64.sqrt();
    let rhombus = |theta: f64| -> Vec<[f64; 2]> {
        let rot = |x: f64, y: f64| [x * theta.cos() - y * theta.sin(), x * theta.sin() + y * theta.cos()];
        vec![rot(0.5, s3 / 2.0), rot(1.0, 0.0), rot(1.5, s3 / 2.0)]
    };
    // tips sit at distance √3 from the origin; unit apart when the two
    // rhombi differ by 2·asin(1/(2√3))
    let phi = 2.0 * (1.0 / (2.0 * s3)).asin();
    let mut pts = vec![[0.0, 0.0]];
    pts.extend(rhombus(0.0));
    pts.extend(rhombus(phi));
    pts.into_iter().map(|p| Point::plain(p.to_vec())).collect()
}

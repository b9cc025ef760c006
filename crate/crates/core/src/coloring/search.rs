//! Branch-and-bound `k`-coloring on DSATUR order.
//!
//! A maximum clique is pinned to colors `0..|K|`, and a vertex may only take
//! a color at most one above the largest color already in use. Refuted
//! subproblems are remembered by their signature (uncolored set, colors on
//! the boundary, largest color used), so a repeated subproblem is closed by
//! reference. The search emits the explored tree in preorder; the same
//! [`State`] machinery replays it in [`check_refutation`].

use std::collections::{HashMap, HashSet};

use super::certificate::{CertificateError, ProofStep, Refutation};
use super::{is_clique, Graph, Meter};

const NONE: u32 = u32::MAX;
const CACHE_LIMIT: usize = 2_000_000;

pub(crate) enum Outcome {
    Colorable(Vec<usize>),
    Refuted(Refutation),
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Signature {
    uncolored: Vec<u64>,
    boundary: Vec<(u32, u32)>,
    max_used: Option<usize>,
}

struct State<'g> {
    g: &'g Graph,
    k: usize,
    colors: Vec<u32>,
    /// `blocked[v*k + c]`: number of neighbors of `v` with color `c`.
    blocked: Vec<u32>,
    saturation: Vec<usize>,
    free_degree: Vec<usize>,
    max_used: Option<usize>,
    uncolored: usize,
}

impl<'g> State<'g> {
    fn new(g: &'g Graph, k: usize) -> Self {
        let n = g.vertex_count();
        State {
            g,
            k,
            colors: vec![NONE; n],
            blocked: vec![0; n * k],
            saturation: vec![0; n],
            free_degree: (0..n).map(|v| g.degree(v)).collect(),
            max_used: None,
            uncolored: n,
        }
    }

    fn assign(&mut self, v: usize, c: usize) {
        self.colors[v] = c as u32;
        self.uncolored -= 1;
        self.max_used = Some(self.max_used.map_or(c, |m| m.max(c)));
        for &w in self.g.neighbors(v) {
            let slot = &mut self.blocked[w * self.k + c];
            if *slot == 0 {
                self.saturation[w] += 1;
            }
            *slot += 1;
            self.free_degree[w] -= 1;
        }
    }

    fn unassign(&mut self, v: usize, prev_max: Option<usize>) {
        let c = self.colors[v] as usize;
        self.colors[v] = NONE;
        self.uncolored += 1;
        self.max_used = prev_max;
        for &w in self.g.neighbors(v) {
            let slot = &mut self.blocked[w * self.k + c];
            *slot -= 1;
            if *slot == 0 {
                self.saturation[w] -= 1;
            }
            self.free_degree[w] += 1;
        }
    }

    fn allowed(&self, v: usize) -> Vec<usize> {
        let cap = self.max_used.map_or(1, |m| m + 2).min(self.k);
        (0..cap).filter(|&c| self.blocked[v * self.k + c] == 0).collect()
    }

    fn select(&self) -> usize {
        (0..self.colors.len())
            .filter(|&v| self.colors[v] == NONE)
            .max_by_key(|&v| (self.saturation[v], self.free_degree[v], std::cmp::Reverse(v)))
            .expect("uncolored vertex")
    }

    fn signature(&self) -> Signature {
        let n = self.colors.len();
        let mut uncolored = vec![0u64; n.div_ceil(64)];
        let mut boundary = Vec::new();
        for v in 0..n {
            if self.colors[v] == NONE {
                uncolored[v / 64] |= 1 << (v % 64);
            } else if self.g.neighbors(v).iter().any(|&w| self.colors[w] == NONE) {
                boundary.push((v as u32, self.colors[v]));
            }
        }
        Signature {
            uncolored,
            boundary,
            max_used: self.max_used,
        }
    }
}

struct Frame {
    idx: usize,
    v: usize,
    allowed: Vec<usize>,
    next: usize,
    prev_max: Option<usize>,
    sig: Option<Signature>,
}

pub(crate) fn k_color(g: &Graph, k: usize, clique: &[usize], meter: &mut Meter) -> Outcome {
    let mut state = State::new(g, k);
    if clique.len() > k {
        // never called this way by the driver; an empty tree is still sound
        return Outcome::Refuted(Refutation {
            colors: k,
            seed: clique[..k + 1].to_vec(),
            steps: Vec::new(),
        });
    }
    for (c, &v) in clique.iter().enumerate() {
        state.assign(v, c);
    }
    let mut steps: Vec<ProofStep> = Vec::new();
    let mut cache: HashMap<Signature, usize> = HashMap::new();
    let mut frames: Vec<Frame> = Vec::new();
    loop {
        // enter a node
        if !meter.tick() {
            return Outcome::Exhausted;
        }
        if state.uncolored == 0 {
            return Outcome::Colorable(state.colors.iter().map(|&c| c as usize).collect());
        }
        let sig = state.signature();
        if let Some(&j) = cache.get(&sig) {
            steps.push(ProofStep::Same(j));
        } else {
            let v = state.select();
            frames.push(Frame {
                idx: steps.len(),
                v,
                allowed: state.allowed(v),
                next: 0,
                prev_max: state.max_used,
                sig: Some(sig),
            });
            steps.push(ProofStep::Branch(v));
        }
        // advance to the next unexplored child
        loop {
            let Some(top) = frames.last_mut() else {
                return Outcome::Refuted(Refutation {
                    colors: k,
                    seed: clique.to_vec(),
                    steps,
                });
            };
            if top.next > 0 {
                let (v, prev) = (top.v, top.prev_max);
                state.unassign(v, prev);
            }
            let top = frames.last_mut().expect("frame");
            if top.next < top.allowed.len() {
                let c = top.allowed[top.next];
                top.next += 1;
                let v = top.v;
                state.assign(v, c);
                break;
            }
            let done = frames.pop().expect("frame");
            if cache.len() < CACHE_LIMIT {
                cache.insert(done.sig.expect("signature"), done.idx);
            }
        }
    }
}

/// Replays a refutation: succeeds iff it proves that no proper coloring of
/// `g` with `r.colors` colors exists.
pub(crate) fn check_refutation(g: &Graph, r: &Refutation) -> Result<(), CertificateError> {
    let k = r.colors;
    let bad = |at: usize, why: &str| CertificateError::BadRefutation {
        step: at,
        reason: why.to_string(),
    };
    if !is_clique(g, &r.seed) {
        return Err(bad(0, "seed is not a clique"));
    }
    if r.seed.len() > k {
        // a (k+1)-clique alone refutes k colors
        return if r.steps.is_empty() {
            Ok(())
        } else {
            Err(bad(0, "unexpected steps after oversized seed"))
        };
    }
    let mut state = State::new(g, k);
    for (c, &v) in r.seed.iter().enumerate() {
        state.assign(v, c);
    }
    let referenced: HashSet<usize> = r
        .steps
        .iter()
        .filter_map(|s| match s {
            ProofStep::Same(j) => Some(*j),
            ProofStep::Branch(_) => None,
        })
        .collect();
    let mut closed: HashMap<usize, Signature> = HashMap::new();
    let mut frames: Vec<Frame> = Vec::new();
    let mut pos = 0;
    loop {
        let step = r.steps.get(pos).ok_or_else(|| bad(pos, "proof ends before the tree closes"))?;
        match *step {
            ProofStep::Same(j) => {
                let sig = closed.get(&j).ok_or_else(|| bad(pos, "reference to a step that is not a closed subtree"))?;
                if *sig != state.signature() {
                    return Err(bad(pos, "referenced subproblem differs"));
                }
            }
            ProofStep::Branch(v) => {
                if v >= g.vertex_count() || state.colors[v] != NONE {
                    return Err(bad(pos, "branch on a colored or unknown vertex"));
                }
                frames.push(Frame {
                    idx: pos,
                    v,
                    allowed: state.allowed(v),
                    next: 0,
                    prev_max: state.max_used,
                    sig: referenced.contains(&pos).then(|| state.signature()),
                });
            }
        }
        pos += 1;
        loop {
            let Some(top) = frames.last_mut() else {
                return if pos == r.steps.len() {
                    Ok(())
                } else {
                    Err(bad(pos, "trailing steps"))
                };
            };
            if top.next > 0 {
                let (v, prev) = (top.v, top.prev_max);
                state.unassign(v, prev);
            }
            let top = frames.last_mut().expect("frame");
            if top.next < top.allowed.len() {
                let c = top.allowed[top.next];
                top.next += 1;
                let v = top.v;
                state.assign(v, c);
                if state.uncolored == 0 {
                    return Err(bad(pos, "branch reaches a proper coloring"));
                }
                break;
            }
            let done = frames.pop().expect("frame");
            if let Some(sig) = done.sig {
                closed.insert(done.idx, sig);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::{Budget, Graph};

    fn meter() -> Meter {
        Meter::new(Budget::default())
    }

    #[test]
    fn triangle_needs_three() {
        let g = Graph::complete(3);
        match k_color(&g, 2, &[0, 1], &mut meter()) {
            Outcome::Refuted(r) => {
                assert_eq!(r.steps, vec![ProofStep::Branch(2)]);
                check_refutation(&g, &r).unwrap();
            }
            _ => panic!("expected refutation"),
        }
        assert!(matches!(k_color(&g, 3, &[0, 1, 2], &mut meter()), Outcome::Colorable(_)));
    }

    #[test]
    fn tampered_refutations_fail() {
        let g = Graph::cycle(5);
        let r = match k_color(&g, 2, &[0, 1], &mut meter()) {
            Outcome::Refuted(r) => r,
            _ => panic!(),
        };
        check_refutation(&g, &r).unwrap();
        let mut cut = r.clone();
        cut.steps.pop();
        assert!(check_refutation(&g, &cut).is_err());
        let mut bad_seed = r.clone();
        bad_seed.seed = vec![0, 2];
        assert!(check_refutation(&g, &bad_seed).is_err());
        // a 3-colorable graph has no valid 2-color proof with these steps
        let mut more = r.clone();
        more.colors = 3;
        assert!(check_refutation(&g, &more).is_err());
    }

    #[test]
    fn chained_diamonds_stay_linear() {
        // diamonds glued tip to tip, ends joined: not 3-colorable
        let count = 60;
        let mut edges = Vec::new();
        let mut tip = 0;
        let mut next = 1;
        for _ in 0..count {
            let (b, c, d) = (next, next + 1, next + 2);
            next += 3;
            edges.extend([(tip, b), (tip, c), (b, c), (b, d), (c, d)]);
            tip = d;
        }
        edges.push((0, tip));
        let g = Graph::from_edges(next, &edges).unwrap();
        let mut m = meter();
        match k_color(&g, 3, &[0, 1, 2], &mut m) {
            Outcome::Refuted(r) => check_refutation(&g, &r).unwrap(),
            _ => panic!("expected refutation"),
        }
        assert!(m.nodes < 50 * count as u64, "nodes = {}", m.nodes);
    }
}

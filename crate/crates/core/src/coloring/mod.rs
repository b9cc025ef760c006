//! Exact chromatic numbers with independently checkable certificates.

mod certificate;
mod cnf;
mod search;

use std::collections::{BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use certificate::{CertificateError, CertificateKind, ColoringCertificate, ProofStep, Refutation};
pub use cnf::export_dimacs_cnf;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("edge ({0}, {1}) references a vertex outside 0..{2}")]
    BadIndex(usize, usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("graph has no vertices")]
    Empty,
    #[error("vertex {0} has no color assigned")]
    MissingColor(usize),
}

/// Simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
        }
    }

    /// Duplicate edges are merged; self-loops and bad indices are errors.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::BadIndex(u, v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Graph { adj })
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self::from_edges(n, &edges).expect("valid")
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n, &edges).expect("valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.adj.len() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Subgraph induced by `keep`, relabelled in the order given.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.adj.len()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let adj = keep
            .iter()
            .map(|&v| {
                let mut l: Vec<usize> = self.adj[v]
                    .iter()
                    .filter(|&&w| index[w] != usize::MAX)
                    .map(|&w| index[w])
                    .collect();
                l.sort_unstable();
                l
            })
            .collect();
        Graph { adj }
    }
}

/// True iff every vertex is colored and no edge is monochromatic.
pub fn verify_coloring(g: &Graph, colors: &[usize]) -> Result<bool, GraphError> {
    if colors.len() < g.vertex_count() {
        return Err(GraphError::MissingColor(colors.len()));
    }
    Ok(g.edges().all(|(u, v)| colors[u] != colors[v]))
}

/// Odd cycle from a BFS 2-coloring conflict, or `None` if bipartite.
pub fn find_odd_cycle(g: &Graph) -> Option<Vec<usize>> {
    let n = g.vertex_count();
    let mut depth = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if depth[v] == usize::MAX {
                    depth[v] = depth[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                } else if depth[v] == depth[u] {
                    return Some(close_cycle(u, v, &parent));
                }
            }
        }
    }
    None
}

fn close_cycle(u: usize, v: usize, parent: &[usize]) -> Vec<usize> {
    // u and v sit at equal depth, so walk both up in lockstep
    let (mut a, mut b) = (u, v);
    let mut left = vec![a];
    let mut right = vec![b];
    while a != b {
        a = parent[a];
        b = parent[b];
        left.push(a);
        right.push(b);
    }
    right.pop();
    right.reverse();
    left.extend(right);
    left
}

/// Checks that `cycle` is a closed walk of odd length through distinct,
/// consecutively adjacent vertices.
pub fn is_odd_cycle(g: &Graph, cycle: &[usize]) -> bool {
    let len = cycle.len();
    if len < 3 || len % 2 == 0 {
        return false;
    }
    let distinct: BTreeSet<_> = cycle.iter().collect();
    distinct.len() == len
        && cycle.iter().all(|&v| v < g.vertex_count())
        && (0..len).all(|i| g.has_edge(cycle[i], cycle[(i + 1) % len]))
}

pub fn is_clique(g: &Graph, vertices: &[usize]) -> bool {
    let distinct: BTreeSet<_> = vertices.iter().collect();
    distinct.len() == vertices.len()
        && vertices.iter().all(|&v| v < g.vertex_count())
        && vertices
            .iter()
            .enumerate()
            .all(|(i, &u)| vertices[i + 1..].iter().all(|&w| g.has_edge(u, w)))
}

/// Maximum clique by Bron–Kerbosch with pivoting; among maximum cliques
/// the first found in lowest-index order is returned, sorted. Stops early
/// once a clique of size `cap` is found.
pub fn max_clique(g: &Graph, cap: Option<usize>) -> Vec<usize> {
    let mut best = Vec::new();
    let cap = cap.unwrap_or(usize::MAX);
    let p: Vec<usize> = (0..g.vertex_count()).collect();
    bron_kerbosch(g, &mut Vec::new(), p, Vec::new(), &mut best, cap);
    best.sort_unstable();
    best
}

fn bron_kerbosch(g: &Graph, r: &mut Vec<usize>, p: Vec<usize>, x: Vec<usize>, best: &mut Vec<usize>, cap: usize) {
    if best.len() >= cap {
        return;
    }
    if r.len() >= cap {
        *best = r.clone();
        return;
    }
    if p.is_empty() {
        if x.is_empty() && r.len() > best.len() {
            *best = r.clone();
        }
        return;
    }
    if r.len() + p.len() <= best.len() {
        return;
    }
    let pivot = p
        .iter()
        .chain(&x)
        .copied()
        .max_by_key(|&u| (p.iter().filter(|&&w| g.has_edge(u, w)).count(), std::cmp::Reverse(u)))
        .expect("nonempty");
    let candidates: Vec<usize> = p.iter().copied().filter(|&v| !g.has_edge(pivot, v)).collect();
    let mut p = p;
    let mut x = x;
    for v in candidates {
        r.push(v);
        let np = p.iter().copied().filter(|&w| g.has_edge(v, w)).collect();
        let nx = x.iter().copied().filter(|&w| g.has_edge(v, w)).collect();
        bron_kerbosch(g, r, np, nx, best, cap);
        r.pop();
        p.retain(|&w| w != v);
        x.push(v);
        if best.len() >= cap {
            return;
        }
    }
}

/// Greedy DSATUR coloring: highest saturation, then highest degree into
/// uncolored vertices, then lowest index.
pub fn dsatur_coloring(g: &Graph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut colors = vec![usize::MAX; n];
    let mut seen: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut free_deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| colors[v] == usize::MAX)
            .max_by_key(|&v| (seen[v].len(), free_deg[v], std::cmp::Reverse(v)))
            .expect("uncolored vertex");
        let c = (0..).find(|c| !seen[v].contains(c)).expect("color");
        colors[v] = c;
        for &w in g.neighbors(v) {
            seen[w].insert(c);
            free_deg[w] -= 1;
        }
    }
    colors
}

/// Limits on exact search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub max_nodes: u64,
    pub max_time: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: 100_000_000,
            max_time: Duration::from_secs(60),
        }
    }
}

pub(crate) struct Meter {
    budget: Budget,
    start: Instant,
    pub(crate) nodes: u64,
}

impl Meter {
    fn new(budget: Budget) -> Self {
        Meter {
            budget,
            start: Instant::now(),
            nodes: 0,
        }
    }

    /// Counts one node; false once the budget is spent.
    pub(crate) fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return false;
        }
        self.nodes % 1024 != 0 || self.start.elapsed() <= self.budget.max_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Exact,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChromaticResult {
    pub status: Status,
    /// Set only when `status` is exact.
    pub chi: Option<usize>,
    pub lower_bound: usize,
    pub upper_bound: usize,
    pub upper: ColoringCertificate,
    pub lower: ColoringCertificate,
    pub search_nodes: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ColoringError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("internal certificate failed verification: {0}")]
    Certificate(#[from] CertificateError),
}

/// Chromatic number by iterative deepening on the number of colors. Both
/// returned certificates are re-verified before returning; when the budget
/// runs out the best verified bounds come back flagged inconclusive.
pub fn chromatic_number(g: &Graph, budget: Budget) -> Result<ChromaticResult, ColoringError> {
    if g.vertex_count() == 0 {
        return Err(GraphError::Empty.into());
    }
    let clique = max_clique(g, None);
    let greedy = dsatur_coloring(g);
    let mut upper = ColoringCertificate::proper(&greedy);
    let odd = if clique.len() < 3 { find_odd_cycle(g) } else { None };
    let mut lower = match &odd {
        Some(c) => ColoringCertificate::odd_cycle(c.clone()),
        None => ColoringCertificate::clique(clique.clone()),
    };
    let mut meter = Meter::new(budget);
    let mut k = lower.colors_used;
    let mut status = Status::Exact;
    while k < upper.colors_used {
        match search::k_color(g, k, &clique, &mut meter) {
            search::Outcome::Colorable(colors) => {
                upper = ColoringCertificate::proper(&colors);
                break;
            }
            search::Outcome::Refuted(r) => {
                lower = ColoringCertificate::exhaustive(r);
                k += 1;
            }
            search::Outcome::Exhausted => {
                status = Status::Inconclusive;
                break;
            }
        }
    }
    let ub = upper.verify(g)?;
    let lb = lower.verify(g)?;
    if status == Status::Exact && lb != ub {
        return Err(CertificateError::BoundMismatch { lower: lb, upper: ub }.into());
    }
    Ok(ChromaticResult {
        status,
        chi: (status == Status::Exact).then_some(ub),
        lower_bound: lb,
        upper_bound: ub,
        upper,
        lower,
        search_nodes: meter.nodes,
    })
}

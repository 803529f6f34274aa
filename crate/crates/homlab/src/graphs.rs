//! Core graph data model: simple loopless undirected graphs, labelled and
//! bilabelled graphs with ordered label tuples, the combinatorial algebra on
//! them (gluing, series/parallel composition, reversal, end identification),
//! parsing, enumeration up to isomorphism, and brute-force isomorphism.
//!
//! All operations normalize eagerly: self-loops and multiedges produced by an
//! identification are deleted, and vertices are renumbered to a contiguous
//! 0-based range (ordered by first appearance).

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("vertex index {index} out of range (vertex count {count})")]
    VertexOutOfRange { index: usize, count: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("label arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("enumeration cap exceeded: n_max {0} > 8")]
    EnumerationCap(usize),
}

/// A simple, loopless, undirected graph with 0-based vertex indices.
///
/// Stored as sorted adjacency lists (`u32` internally so the lifted
/// counterexample graphs with a few million edges stay compact).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<u32>>,
}

impl Graph {
    /// Builds a graph, validating the invariants (no self-loops, endpoints in
    /// range, each pair at most once).
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Graph, GraphError> {
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for &(u, v) in edges {
            if u >= n {
                return Err(GraphError::VertexOutOfRange { index: u, count: n });
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange { index: v, count: n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(key.0, key.1));
            }
            adj[u].push(v as u32);
            adj[v].push(u as u32);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { n, adj })
    }

    /// Builds a graph from an edge list that may contain loops and repeats;
    /// they are dropped (normalization used by the composition operations).
    pub fn new_normalized(n: usize, edges: &[(usize, usize)]) -> Graph {
        let mut seen = HashSet::new();
        let mut clean = Vec::new();
        for &(u, v) in edges {
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            if seen.insert(key) {
                clean.push(key);
            }
        }
        Graph::new(n, &clean).expect("normalized edge list is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    pub fn neighbours(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&(v as u32)).is_ok()
    }

    /// Edges as (u, v) pairs with u < v, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for &v in &self.adj[u] {
                let v = v as usize;
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let mut adj = self.adj.clone();
        for list in &other.adj {
            adj.push(list.iter().map(|&v| v + self.n as u32).collect());
        }
        Graph { n: self.n + other.n, adj }
    }

    /// Connected components as sorted vertex lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            let mut stack = vec![s];
            let mut comp = Vec::new();
            seen[s] = true;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &self.adj[v] {
                    let w = w as usize;
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort();
        comps
    }

    /// Induced subgraph on `verts` (which need not be sorted); vertices are
    /// renumbered by their position in `verts`.
    pub fn induced(&self, verts: &[usize]) -> Graph {
        let mut pos = vec![usize::MAX; self.n];
        for (i, &v) in verts.iter().enumerate() {
            pos[v] = i;
        }
        let mut edges = Vec::new();
        for (i, &v) in verts.iter().enumerate() {
            for &w in &self.adj[v] {
                let w = w as usize;
                if pos[w] != usize::MAX && pos[w] > i {
                    edges.push((i, pos[w]));
                }
            }
        }
        Graph::new(verts.len(), &edges).expect("induced subgraph is valid")
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    /// True iff the graph is a forest (acyclic).
    pub fn is_forest(&self) -> bool {
        let comps = self.components();
        let mut edges = 0usize;
        for c in &comps {
            edges += self.induced(c).edge_count();
        }
        edges + comps.len() == self.n
    }

    pub fn is_tree(&self) -> bool {
        self.n >= 1 && self.is_connected() && self.edge_count() == self.n - 1
    }

    /// True iff the graph is a (single) path.
    pub fn is_path(&self) -> bool {
        self.is_tree() && (0..self.n).all(|v| self.degree(v) <= 2)
    }

    /// Lexicographically minimal edge bitmask over all vertex permutations,
    /// found by branch-and-bound. Vertex pairs are ranked colexicographically
    /// — pair (j, i) with j < i at rank i(i-1)/2 + j — and stored with the
    /// lowest-ranked pair in the most significant bit, so that assigning
    /// positions 0, 1, 2, … decides bits strictly from most to least
    /// significant and greedy pruning is sound. Only for n ≤ 8 (≤ 28 pairs).
    pub fn canonical_bitmask(&self) -> u64 {
        assert!(self.n <= 8, "canonical_bitmask limited to n <= 8");
        let n = self.n;
        if n == 0 {
            return 0;
        }
        // perm[i] = original vertex placed at position i.
        let mut best = u64::MAX;
        let mut perm = Vec::with_capacity(n);
        let mut used = vec![false; n];
        self.canon_rec(&mut perm, &mut used, 0, &mut best);
        best
    }

    fn canon_rec(&self, perm: &mut Vec<usize>, used: &mut [bool], mask_so_far: u64, best: &mut u64) {
        let n = self.n;
        let total = n * (n - 1) / 2;
        let i = perm.len();
        if i == n {
            if mask_so_far < *best {
                *best = mask_so_far;
            }
            return;
        }
        for cand in 0..n {
            if used[cand] {
                continue;
            }
            // Placing position i decides the pairs (j, i) for all j < i.
            let mut mask = mask_so_far;
            for (j, &pj) in perm.iter().enumerate() {
                if self.has_edge(pj, cand) {
                    let rank = i * (i - 1) / 2 + j;
                    mask |= 1 << (total - 1 - rank);
                }
            }
            // All pairs decided so far occupy the top i(i+1)/2 bits; every
            // undecided pair is strictly less significant, so a prefix already
            // above the incumbent cannot be completed into an improvement.
            let ndecided = (i + 1) * i / 2;
            let decided: u64 = if ndecided == 0 {
                0
            } else {
                ((1u64 << ndecided) - 1) << (total - ndecided)
            };
            if mask & decided > *best & decided {
                continue;
            }
            used[cand] = true;
            perm.push(cand);
            self.canon_rec(perm, used, mask, best);
            perm.pop();
            used[cand] = false;
        }
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges())
    }
}

/// An ℓ-labelled graph: a graph plus an ordered tuple of (possibly repeated)
/// distinguished vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelledGraph {
    pub graph: Graph,
    pub labels: Vec<usize>,
}

impl LabelledGraph {
    pub fn new(graph: Graph, labels: Vec<usize>) -> Result<LabelledGraph, GraphError> {
        for &l in &labels {
            if l >= graph.vertex_count() {
                return Err(GraphError::VertexOutOfRange { index: l, count: graph.vertex_count() });
            }
        }
        Ok(LabelledGraph { graph, labels })
    }

    pub fn arity(&self) -> usize {
        self.labels.len()
    }

    /// The k-labelled graph 𝟏^k: k isolated, distinctly labelled vertices.
    pub fn ones(k: usize) -> LabelledGraph {
        LabelledGraph {
            graph: Graph::new(k, &[]).unwrap(),
            labels: (0..k).collect(),
        }
    }
}

/// An (ℓ₁,ℓ₂)-bilabelled graph: a graph with an in-tuple and an out-tuple of
/// labelled vertices; behaves like a matrix under series composition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BilabelledGraph {
    pub graph: Graph,
    pub in_labels: Vec<usize>,
    pub out_labels: Vec<usize>,
}

impl BilabelledGraph {
    pub fn new(
        graph: Graph,
        in_labels: Vec<usize>,
        out_labels: Vec<usize>,
    ) -> Result<BilabelledGraph, GraphError> {
        for &l in in_labels.iter().chain(out_labels.iter()) {
            if l >= graph.vertex_count() {
                return Err(GraphError::VertexOutOfRange { index: l, count: graph.vertex_count() });
            }
        }
        Ok(BilabelledGraph { graph, in_labels, out_labels })
    }

    pub fn arity_in(&self) -> usize {
        self.in_labels.len()
    }

    pub fn arity_out(&self) -> usize {
        self.out_labels.len()
    }

    /// The (1,1)-bilabelled single edge 𝑨 whose homomorphism tensor is the
    /// adjacency matrix of the target.
    pub fn adjacency() -> BilabelledGraph {
        BilabelledGraph {
            graph: Graph::new(2, &[(0, 1)]).unwrap(),
            in_labels: vec![0],
            out_labels: vec![1],
        }
    }

    /// The (ℓ,ℓ)-bilabelled identity 𝑰: ℓ isolated vertices, in = out.
    pub fn identity(ell: usize) -> BilabelledGraph {
        let labels: Vec<usize> = (0..ell).collect();
        BilabelledGraph {
            graph: Graph::new(ell, &[]).unwrap(),
            in_labels: labels.clone(),
            out_labels: labels,
        }
    }

    /// Normalizes to a canonical storage form: vertices renumbered by first
    /// appearance in (in_labels, out_labels, remaining order).
    pub fn normalize(&self) -> BilabelledGraph {
        let n = self.graph.vertex_count();
        let mut order = Vec::with_capacity(n);
        let mut pos = vec![usize::MAX; n];
        for &v in self.in_labels.iter().chain(self.out_labels.iter()) {
            if pos[v] == usize::MAX {
                pos[v] = order.len();
                order.push(v);
            }
        }
        for v in 0..n {
            if pos[v] == usize::MAX {
                pos[v] = order.len();
                order.push(v);
            }
        }
        let edges: Vec<(usize, usize)> =
            self.graph.edges().iter().map(|&(u, v)| (pos[u], pos[v])).collect();
        BilabelledGraph {
            graph: Graph::new_normalized(n, &edges),
            in_labels: self.in_labels.iter().map(|&v| pos[v]).collect(),
            out_labels: self.out_labels.iter().map(|&v| pos[v]).collect(),
        }
    }
}

/// Result of parsing a graph file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedGraph {
    Plain(Graph),
    Labelled(LabelledGraph),
    Bilabelled(BilabelledGraph),
}

impl ParsedGraph {
    pub fn plain(self) -> Option<Graph> {
        match self {
            ParsedGraph::Plain(g) => Some(g),
            _ => None,
        }
    }
}

/// Parses the line-based graph file format:
/// `#` comments; `n <count>`; `e <u> <v>`; optionally either
/// `l <i1> ... <ik>` or an `in <...>` / `out <...>` pair.
pub fn parse_graph(text: &str) -> Result<ParsedGraph, GraphError> {
    let mut n: Option<usize> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut labels: Option<Vec<usize>> = None;
    let mut in_labels: Option<Vec<usize>> = None;
    let mut out_labels: Option<Vec<usize>> = None;

    let err = |line: usize, msg: &str| GraphError::Parse { line, msg: msg.to_string() };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let head = parts.next().unwrap();
        let nums: Result<Vec<usize>, _> = parts.map(|p| p.parse::<usize>()).collect();
        let nums = nums.map_err(|_| err(lineno, "expected non-negative integers"))?;
        match head {
            "n" => {
                if n.is_some() {
                    return Err(err(lineno, "duplicate n line"));
                }
                if nums.len() != 1 {
                    return Err(err(lineno, "n takes exactly one argument"));
                }
                n = Some(nums[0]);
            }
            "e" => {
                if nums.len() != 2 {
                    return Err(err(lineno, "e takes exactly two arguments"));
                }
                edges.push((nums[0], nums[1]));
            }
            "l" => {
                if labels.is_some() {
                    return Err(err(lineno, "duplicate l line"));
                }
                labels = Some(nums);
            }
            "in" => {
                if in_labels.is_some() {
                    return Err(err(lineno, "duplicate in line"));
                }
                in_labels = Some(nums);
            }
            "out" => {
                if out_labels.is_some() {
                    return Err(err(lineno, "duplicate out line"));
                }
                out_labels = Some(nums);
            }
            other => return Err(err(lineno, &format!("unknown directive `{other}`"))),
        }
    }

    let n = n.ok_or_else(|| err(0, "missing n line"))?;
    let graph = Graph::new(n, &edges)?;
    match (labels, in_labels, out_labels) {
        (Some(l), None, None) => Ok(ParsedGraph::Labelled(LabelledGraph::new(graph, l)?)),
        (None, Some(i), Some(o)) => {
            Ok(ParsedGraph::Bilabelled(BilabelledGraph::new(graph, i, o)?))
        }
        (None, None, None) => Ok(ParsedGraph::Plain(graph)),
        (None, Some(_), None) | (None, None, Some(_)) => {
            Err(err(0, "in/out lines must appear together"))
        }
        _ => Err(err(0, "l cannot be combined with in/out")),
    }
}

/// Renders a graph in the file format accepted by [`parse_graph`].
pub fn format_graph(g: &Graph) -> String {
    let mut s = format!("n {}\n", g.vertex_count());
    for (u, v) in g.edges() {
        s.push_str(&format!("e {} {}\n", u, v));
    }
    s
}

pub fn format_bilabelled(g: &BilabelledGraph) -> String {
    let mut s = format_graph(&g.graph);
    let join = |t: &[usize]| t.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    s.push_str(&format!("in {}\n", join(&g.in_labels)));
    s.push_str(&format!("out {}\n", join(&g.out_labels)));
    s
}

pub fn format_labelled(g: &LabelledGraph) -> String {
    let mut s = format_graph(&g.graph);
    let join = |t: &[usize]| t.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    s.push_str(&format!("l {}\n", join(&g.labels)));
    s
}

// ---------------------------------------------------------------------------
// Composition algebra.
// ---------------------------------------------------------------------------

/// Union-find based identification + renumbering shared by all compositions.
pub(crate) struct Merger {
    parent: Vec<usize>,
}

impl Merger {
    pub(crate) fn new(n: usize) -> Merger {
        Merger { parent: (0..n).collect() }
    }

    fn find(&mut self, v: usize) -> usize {
        if self.parent[v] != v {
            let root = self.find(self.parent[v]);
            self.parent[v] = root;
        }
        self.parent[v]
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // Keep the smaller root so renumbering-by-first-appearance is stable.
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }

    /// Maps every original vertex to a contiguous new index, roots ordered by
    /// first appearance (i.e. by smallest member).
    pub(crate) fn relabelling(&mut self) -> (Vec<usize>, usize) {
        let n = self.parent.len();
        let mut new_id = vec![usize::MAX; n];
        let mut next = 0;
        let mut map = vec![usize::MAX; n];
        for v in 0..n {
            let r = self.find(v);
            if new_id[r] == usize::MAX {
                new_id[r] = next;
                next += 1;
            }
            map[v] = new_id[r];
        }
        (map, next)
    }
}

fn merged_graph(g1: &Graph, g2: &Graph, pairs: &[(usize, usize)]) -> (Graph, Vec<usize>) {
    // `pairs` identify vertex u of g1 with vertex v of g2 (v offset by g1.n).
    let n1 = g1.vertex_count();
    let total = n1 + g2.vertex_count();
    let mut m = Merger::new(total);
    for &(a, b) in pairs {
        m.union(a, n1 + b);
    }
    let (map, count) = m.relabelling();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (u, v) in g1.edges() {
        edges.push((map[u], map[v]));
    }
    for (u, v) in g2.edges() {
        edges.push((map[n1 + u], map[n1 + v]));
    }
    (Graph::new_normalized(count, &edges), map)
}

/// Gluing (Schur product on tensors): identifies the label-i vertices of the
/// two ℓ-labelled graphs for each i.
pub fn glue(f1: &LabelledGraph, f2: &LabelledGraph) -> Result<LabelledGraph, GraphError> {
    if f1.arity() != f2.arity() {
        return Err(GraphError::ArityMismatch(f1.arity(), f2.arity()));
    }
    let pairs: Vec<(usize, usize)> =
        f1.labels.iter().zip(f2.labels.iter()).map(|(&a, &b)| (a, b)).collect();
    let (graph, map) = merged_graph(&f1.graph, &f2.graph, &pairs);
    let labels = f1.labels.iter().map(|&v| map[v]).collect();
    Ok(LabelledGraph { graph, labels })
}

/// Series composition (matrix product on tensors): identifies out-labels of
/// `f` with in-labels of `f2`.
pub fn concat(f: &BilabelledGraph, f2: &BilabelledGraph) -> Result<BilabelledGraph, GraphError> {
    if f.arity_out() != f2.arity_in() {
        return Err(GraphError::ArityMismatch(f.arity_out(), f2.arity_in()));
    }
    let pairs: Vec<(usize, usize)> =
        f.out_labels.iter().zip(f2.in_labels.iter()).map(|(&a, &b)| (a, b)).collect();
    let n1 = f.graph.vertex_count();
    let (graph, map) = merged_graph(&f.graph, &f2.graph, &pairs);
    let in_labels = f.in_labels.iter().map(|&v| map[v]).collect();
    let out_labels = f2.out_labels.iter().map(|&v| map[n1 + v]).collect();
    Ok(BilabelledGraph { graph, in_labels, out_labels })
}

/// Parallel composition (Schur product on tensors): identifies in-labels with
/// in-labels and out-labels with out-labels.
pub fn parallel(f: &BilabelledGraph, f2: &BilabelledGraph) -> Result<BilabelledGraph, GraphError> {
    if f.arity_in() != f2.arity_in() || f.arity_out() != f2.arity_out() {
        return Err(GraphError::ArityMismatch(
            f.arity_in() + f.arity_out(),
            f2.arity_in() + f2.arity_out(),
        ));
    }
    let pairs: Vec<(usize, usize)> = f
        .in_labels
        .iter()
        .zip(f2.in_labels.iter())
        .chain(f.out_labels.iter().zip(f2.out_labels.iter()))
        .map(|(&a, &b)| (a, b))
        .collect();
    let (graph, map) = merged_graph(&f.graph, &f2.graph, &pairs);
    let in_labels = f.in_labels.iter().map(|&v| map[v]).collect();
    let out_labels = f.out_labels.iter().map(|&v| map[v]).collect();
    Ok(BilabelledGraph { graph, in_labels, out_labels })
}

/// Reversal (transpose on tensors): swaps in- and out-tuples.
pub fn reverse(f: &BilabelledGraph) -> BilabelledGraph {
    BilabelledGraph {
        graph: f.graph.clone(),
        in_labels: f.out_labels.clone(),
        out_labels: f.in_labels.clone(),
    }
}

/// F^id: identifies in- and out-labels element-wise, yielding an ℓ-labelled
/// graph; soe(F^id) = tr(F).
pub fn identify_ends(f: &BilabelledGraph) -> Result<LabelledGraph, GraphError> {
    if f.arity_in() != f.arity_out() {
        return Err(GraphError::ArityMismatch(f.arity_in(), f.arity_out()));
    }
    let n = f.graph.vertex_count();
    let mut m = Merger::new(n);
    for (&a, &b) in f.in_labels.iter().zip(f.out_labels.iter()) {
        m.union(a, b);
    }
    let (map, count) = m.relabelling();
    let edges: Vec<(usize, usize)> =
        f.graph.edges().iter().map(|&(u, v)| (map[u], map[v])).collect();
    Ok(LabelledGraph {
        graph: Graph::new_normalized(count, &edges),
        labels: f.in_labels.iter().map(|&v| map[v]).collect(),
    })
}

/// Drops all labels.
pub fn underlying_labelled(f: &LabelledGraph) -> Graph {
    f.graph.clone()
}

/// Drops all labels.
pub fn underlying_bilabelled(f: &BilabelledGraph) -> Graph {
    f.graph.clone()
}

// ---------------------------------------------------------------------------
// Isomorphism and enumeration.
// ---------------------------------------------------------------------------

/// Backtracking isomorphism test with degree pruning. Returns a witness
/// bijection (image of each G-vertex) when one exists.
pub fn isomorphism(g: &Graph, h: &Graph) -> Option<Vec<usize>> {
    if g.vertex_count() != h.vertex_count() || g.edge_count() != h.edge_count() {
        return None;
    }
    let n = g.vertex_count();
    let mut dg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut dh: Vec<usize> = (0..n).map(|v| h.degree(v)).collect();
    dg.sort_unstable();
    dh.sort_unstable();
    if dg != dh {
        return None;
    }
    // Assign images for G-vertices in an order that keeps the assigned part
    // connected where possible (better pruning).
    let order = search_order(g);
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn rec(
        g: &Graph,
        h: &Graph,
        order: &[usize],
        pos: usize,
        image: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if pos == order.len() {
            return true;
        }
        let v = order[pos];
        'cand: for c in 0..h.vertex_count() {
            if used[c] || g.degree(v) != h.degree(c) {
                continue;
            }
            for &w in g.neighbours(v) {
                let w = w as usize;
                if image[w] != usize::MAX && !h.has_edge(c, image[w]) {
                    continue 'cand;
                }
            }
            // Non-adjacency must also be preserved (induced condition follows
            // from equal edge counts, but checking prunes much earlier).
            for w in 0..g.vertex_count() {
                if image[w] != usize::MAX && !g.has_edge(v, w) && w != v && h.has_edge(c, image[w])
                {
                    continue 'cand;
                }
            }
            image[v] = c;
            used[c] = true;
            if rec(g, h, order, pos + 1, image, used) {
                return true;
            }
            image[v] = usize::MAX;
            used[c] = false;
        }
        false
    }
    if rec(g, h, &order, 0, &mut image, &mut used) {
        Some(image)
    } else {
        None
    }
}

pub fn are_isomorphic(g: &Graph, h: &Graph) -> bool {
    isomorphism(g, h).is_some()
}

/// Vertex order that greedily maximizes the number of already-placed
/// neighbours (connectivity-aware order for backtracking searches).
pub(crate) fn search_order(g: &Graph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    for _ in 0..n {
        let mut best = usize::MAX;
        let mut best_key = (0usize, 0usize);
        for v in 0..n {
            if placed[v] {
                continue;
            }
            let attached =
                g.neighbours(v).iter().filter(|&&w| placed[w as usize]).count();
            let key = (attached, g.degree(v));
            if best == usize::MAX || key > best_key {
                best = v;
                best_key = key;
            }
        }
        placed[best] = true;
        order.push(best);
    }
    order
}

/// Enumerates one representative per isomorphism class of graphs with
/// 1..=n_max vertices (empty graph excluded; see `enumerate_graphs_with_empty`)
/// that satisfy the predicate. Deterministic order: by vertex count, then by
/// the canonical (lexicographically minimal) edge bitmask.
pub fn enumerate_graphs(
    n_max: usize,
    predicate: Option<&dyn Fn(&Graph) -> bool>,
) -> Result<Vec<Graph>, GraphError> {
    enumerate_impl(n_max, predicate, false)
}

/// Same as [`enumerate_graphs`] but includes the empty (0-vertex) graph.
pub fn enumerate_graphs_with_empty(
    n_max: usize,
    predicate: Option<&dyn Fn(&Graph) -> bool>,
) -> Result<Vec<Graph>, GraphError> {
    enumerate_impl(n_max, predicate, true)
}

fn enumerate_impl(
    n_max: usize,
    predicate: Option<&dyn Fn(&Graph) -> bool>,
    include_empty: bool,
) -> Result<Vec<Graph>, GraphError> {
    if n_max > 8 {
        return Err(GraphError::EnumerationCap(n_max));
    }
    let mut out = Vec::new();
    let keep = |g: &Graph| predicate.map_or(true, |p| p(g));
    if include_empty {
        let empty = Graph::new(0, &[]).unwrap();
        if keep(&empty) {
            out.push(empty);
        }
    }
    // Representatives of the previous size, keyed by canonical bitmask.
    let mut prev: Vec<Graph> = Vec::new();
    for n in 1..=n_max {
        let mut reps: Vec<(u64, Graph)> = Vec::new();
        let mut seen: HashSet<u64> = HashSet::new();
        let parents: Vec<Graph> = if n == 1 {
            vec![Graph::new(0, &[]).unwrap()]
        } else {
            prev.clone()
        };
        for parent in &parents {
            // Attach a new vertex (index n-1) with every possible neighbourhood.
            let base_edges = parent.edges();
            for mask in 0u32..(1 << (n - 1)) {
                let mut edges = base_edges.clone();
                for v in 0..n - 1 {
                    if mask & (1 << v) != 0 {
                        edges.push((v, n - 1));
                    }
                }
                let g = Graph::new(n, &edges).unwrap();
                let canon = g.canonical_bitmask();
                if seen.insert(canon) {
                    reps.push((canon, g));
                }
            }
        }
        reps.sort_by_key(|(c, _)| *c);
        prev = reps.iter().map(|(_, g)| g.clone()).collect();
        for (_, g) in reps {
            if keep(&g) {
                out.push(g);
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Convenience constructors used throughout the tests and the CLI.
// ---------------------------------------------------------------------------

/// Path P_m on m vertices.
pub fn path(m: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (1..m).map(|i| (i - 1, i)).collect();
    Graph::new(m, &edges).unwrap()
}

/// Cycle C_m on m ≥ 3 vertices.
pub fn cycle(m: usize) -> Graph {
    assert!(m >= 3);
    let mut edges: Vec<(usize, usize)> = (1..m).map(|i| (i - 1, i)).collect();
    edges.push((0, m - 1));
    Graph::new(m, &edges).unwrap()
}

/// Complete graph K_m.
pub fn complete(m: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..m {
        for v in u + 1..m {
            edges.push((u, v));
        }
    }
    Graph::new(m, &edges).unwrap()
}

/// Star K_{1,leaves} with the centre at vertex 0.
pub fn star(leaves: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (1..=leaves).map(|v| (0, v)).collect();
    Graph::new(leaves + 1, &edges).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_plain_labelled_bilabelled() {
        let g = parse_graph("n 2\ne 0 1\n").unwrap();
        assert_eq!(g, ParsedGraph::Plain(complete(2)));

        let t = parse_graph("n 3\ne 0 1\ne 1 2\ne 0 2\nl 0\n").unwrap();
        match t {
            ParsedGraph::Labelled(l) => {
                assert_eq!(l.graph, complete(3));
                assert_eq!(l.labels, vec![0]);
            }
            other => panic!("expected labelled, got {other:?}"),
        }

        let a = parse_graph("n 2\nin 0\nout 1\ne 0 1\n").unwrap();
        assert_eq!(a, ParsedGraph::Bilabelled(BilabelledGraph::adjacency()));
    }

    #[test]
    fn parse_errors_name_lines() {
        let e = parse_graph("n 2\ne 0 2\n").unwrap_err();
        assert!(matches!(e, GraphError::VertexOutOfRange { .. }));
        let e = parse_graph("n 2\ne 1 1\n").unwrap_err();
        assert_eq!(e, GraphError::SelfLoop(1));
        let e = parse_graph("n 2\ne 0 1\ne 1 0\n").unwrap_err();
        assert_eq!(e, GraphError::DuplicateEdge(0, 1));
        let e = parse_graph("n 2\nfoo 1\n").unwrap_err();
        assert!(matches!(e, GraphError::Parse { line: 2, .. }));
    }

    #[test]
    fn format_round_trip() {
        let g = cycle(6);
        assert_eq!(parse_graph(&format_graph(&g)).unwrap(), ParsedGraph::Plain(g));
    }

    #[test]
    fn enumeration_counts() {
        // 1, 2, 4, 11, 34 graphs on 1..=5 vertices up to isomorphism.
        let counts: Vec<usize> = (1..=5)
            .map(|n| {
                enumerate_graphs(n, None)
                    .unwrap()
                    .iter()
                    .filter(|g| g.vertex_count() == n)
                    .count()
            })
            .collect();
        assert_eq!(counts, vec![1, 2, 4, 11, 34]);
        // Cumulative count for n_max = 3: 1 + 2 + 4 = 7.
        assert_eq!(enumerate_graphs(3, None).unwrap().len(), 7);
    }

    #[test]
    fn enumeration_no_isomorphic_pair() {
        let graphs = enumerate_graphs(5, None).unwrap();
        for i in 0..graphs.len() {
            for j in i + 1..graphs.len() {
                assert!(
                    !are_isomorphic(&graphs[i], &graphs[j]),
                    "representatives {i} and {j} are isomorphic"
                );
            }
        }
    }

    #[test]
    fn enumeration_trees() {
        // Trees on 1..4 vertices: 1, 1, 1, 2; +1 for the empty graph when requested.
        let pred = |g: &Graph| g.is_tree();
        let trees = enumerate_graphs(4, Some(&pred)).unwrap();
        assert_eq!(trees.len(), 5);
        let with_empty = enumerate_graphs_with_empty(4, Some(&|g: &Graph| g.is_forest())).unwrap();
        assert!(with_empty[0].vertex_count() == 0);
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(enumerate_graphs(9, None), Err(GraphError::EnumerationCap(9))));
    }

    #[test]
    fn iso_examples() {
        assert!(are_isomorphic(&complete(2), &complete(2)));
        let two_triangles = cycle(3).disjoint_union(&cycle(3));
        assert!(!are_isomorphic(&cycle(6), &two_triangles));
        assert!(!are_isomorphic(&path(4), &star(3)));
        // A relabelled C5 is isomorphic to C5.
        let c5b = Graph::new(5, &[(0, 2), (2, 4), (4, 1), (1, 3), (3, 0)]).unwrap();
        assert!(are_isomorphic(&cycle(5), &c5b));
    }

    #[test]
    fn glue_examples() {
        let one = LabelledGraph::ones(1);
        let glued = glue(&one, &one).unwrap();
        assert_eq!(glued, one);

        // Two 1-labelled edges glued at the label: path of 3 vertices, centre label.
        let edge = LabelledGraph::new(complete(2), vec![0]).unwrap();
        let spider = glue(&edge, &edge).unwrap();
        assert_eq!(spider.graph.vertex_count(), 3);
        assert_eq!(spider.graph.edge_count(), 2);
        assert_eq!(spider.graph.degree(spider.labels[0]), 2);
    }

    #[test]
    fn concat_examples() {
        let a = BilabelledGraph::adjacency();
        let aa = concat(&a, &a).unwrap();
        assert_eq!(aa.graph.vertex_count(), 3);
        assert!(aa.graph.is_path());
        assert_ne!(aa.in_labels, aa.out_labels);

        let i = BilabelledGraph::identity(1);
        assert_eq!(concat(&i, &a).unwrap().normalize(), a.normalize());
        assert_eq!(concat(&a, &reverse(&a)).unwrap().normalize(), aa.normalize());
    }

    #[test]
    fn parallel_examples() {
        let a = BilabelledGraph::adjacency();
        assert_eq!(parallel(&a, &a).unwrap().normalize(), a.normalize());
        let i = BilabelledGraph::identity(2);
        assert_eq!(parallel(&i, &i).unwrap().normalize(), i.normalize());
    }

    #[test]
    fn reverse_and_identify() {
        let a = BilabelledGraph::adjacency();
        assert_eq!(reverse(&reverse(&a)), a);
        assert_eq!(reverse(&a).normalize(), a.normalize());

        // identify_ends(A): loop removed, single labelled vertex.
        let ia = identify_ends(&a).unwrap();
        assert_eq!(ia.graph.vertex_count(), 1);
        assert_eq!(ia.graph.edge_count(), 0);

        let i2 = BilabelledGraph::identity(2);
        let ones = identify_ends(&i2).unwrap();
        assert_eq!(ones, LabelledGraph::ones(2));
    }

    #[test]
    fn components_and_shapes() {
        let g = cycle(3).disjoint_union(&path(2));
        assert_eq!(g.components().len(), 2);
        assert!(path(4).is_path());
        assert!(!star(3).is_path());
        assert!(star(3).is_tree());
        assert!(!cycle(4).is_forest());
    }
}

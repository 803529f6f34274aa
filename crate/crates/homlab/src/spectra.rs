//! Spectral decision procedures: synced Gram testers for inner-product
//! compatible 1-labelled families (paths, trees, d-ary trees) and bounded
//! word-equality testers for sum-of-entries and trace modes.
//!
//! No unitary matrices are ever materialized: all comparisons happen on exact
//! rational Gram data, so a "true" verdict is a proof and a "false" verdict
//! comes with a concrete labelled-graph or word witness.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

use crate::graphs::{glue, path, Graph, LabelledGraph};
use crate::hom::{EvalMode, HomTensor};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpectraError {
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    #[error("enumeration bound {0} exceeds the supported maximum of {1}")]
    CapExceeded(usize, usize),
    #[error("tensor families are incompatible: {0}")]
    ShapeMismatch(String),
}

/// A generating rule for a 1-labelled, inner-product compatible family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// 1-labelled paths, label on an end: closed under A·.
    Paths,
    /// 1-labelled trees: closed under A· and binary Schur products.
    Trees,
    /// 1-labelled d-ary trees (degree ≤ d+1, label on a degree-≤1 vertex):
    /// closed under the guarded Schur product ⊛^d = A·(∘ of d members).
    Dary(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub kind: FamilyKind,
}

impl FamilySpec {
    pub fn paths() -> FamilySpec {
        FamilySpec { kind: FamilyKind::Paths }
    }
    pub fn trees() -> FamilySpec {
        FamilySpec { kind: FamilyKind::Trees }
    }
    pub fn dary(d: usize) -> Result<FamilySpec, SpectraError> {
        if d == 0 {
            return Err(SpectraError::UnsupportedFamily("dary requires d >= 1".into()));
        }
        Ok(FamilySpec { kind: FamilyKind::Dary(d) })
    }
}

// ---------------------------------------------------------------------------
// Synced exact span bookkeeping.
// ---------------------------------------------------------------------------

type Vector = Vec<BigRational>;

fn inner(u: &[BigRational], v: &[BigRational]) -> BigRational {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn schur_vec(u: &[BigRational], v: &[BigRational]) -> Vector {
    u.iter().zip(v).map(|(a, b)| a * b).collect()
}

fn apply_adjacency(g: &Graph, v: &[BigRational]) -> Vector {
    (0..g.vertex_count())
        .map(|u| g.neighbours(u).iter().map(|&x| v[x as usize].clone()).sum())
        .collect()
}

/// Parallel lists of synced vectors with an exact row-reduced image of the
/// G-side, tracking how each echelon row combines the stored generators so
/// span membership yields explicit coefficients.
struct SyncedSpan {
    gens_g: Vec<Vector>,
    gens_h: Vec<Vector>,
    ech: Vec<(usize, Vector, Vec<BigRational>)>, // (pivot, reduced row, gen coeffs)
}

enum Reduction {
    /// In span, with coefficients over the stored generators.
    InSpan(Vec<BigRational>),
    /// Independent; ready-to-insert echelon row with its combination.
    Fresh(usize, Vector, Vec<BigRational>),
}

impl SyncedSpan {
    fn new() -> SyncedSpan {
        SyncedSpan { gens_g: Vec::new(), gens_h: Vec::new(), ech: Vec::new() }
    }

    fn dim(&self) -> usize {
        self.gens_g.len()
    }

    fn reduce(&self, v: &[BigRational]) -> Reduction {
        let mut rem = v.to_vec();
        let mut coeffs = vec![BigRational::zero(); self.gens_g.len()];
        for (pivot, row, combo) in &self.ech {
            if rem[*pivot].is_zero() {
                continue;
            }
            let f = rem[*pivot].clone(); // rows are pivot-normalized to 1
            for (r, x) in rem.iter_mut().zip(row) {
                *r -= &f * x;
            }
            for (c, x) in coeffs.iter_mut().zip(combo) {
                *c += &f * x;
            }
        }
        match rem.iter().position(|x| !x.is_zero()) {
            None => Reduction::InSpan(coeffs),
            Some(pivot) => {
                let lead = rem[pivot].clone();
                let row: Vector = rem.iter().map(|x| x / &lead).collect();
                // rem = v − Σ coeffs·gen, so the row combines the existing
                // generators with −coeffs/lead plus the new one with 1/lead.
                let mut combo: Vec<BigRational> =
                    coeffs.iter().map(|c| -(c / &lead)).collect();
                combo.push(BigRational::one() / lead);
                Reduction::Fresh(pivot, row, combo)
            }
        }
    }

    /// Inserts a fresh synced pair (caller supplies the Reduction::Fresh data).
    fn insert(&mut self, g: Vector, h: Vector, pivot: usize, row: Vector, combo: Vec<BigRational>) {
        self.gens_g.push(g);
        self.gens_h.push(h);
        // Pad older combos to the new generator count.
        for (_, _, c) in &mut self.ech {
            c.push(BigRational::zero());
        }
        self.ech.push((pivot, row, combo));
    }

    fn combine_h(&self, coeffs: &[BigRational]) -> Vector {
        let n = self.gens_h[0].len();
        let mut out = vec![BigRational::zero(); n];
        for (c, gen) in coeffs.iter().zip(&self.gens_h) {
            if c.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(gen) {
                *o += c * x;
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Gram indistinguishability.
// ---------------------------------------------------------------------------

/// Verdict of the synced Gram tester. On failure the witness is a 1-labelled
/// graph from the family's glue closure whose underlying graph has differing
/// homomorphism counts into G and H.
#[derive(Clone, Debug)]
pub struct GramOutcome {
    pub indistinguishable: bool,
    pub witness: Option<LabelledGraph>,
    pub basis_dim: usize,
}

/// Appends a fresh pendant vertex at the label and moves the label there
/// (the combinatorial action of A·).
fn a_extend(r: &LabelledGraph) -> LabelledGraph {
    let g = crate::graphs::underlying_labelled(r);
    let n = g.vertex_count();
    let mut edges = g.edges();
    edges.push((r.labels[0], n));
    LabelledGraph::new(Graph::new(n + 1, &edges).expect("pendant extension is simple"), vec![n])
        .expect("label in range")
}

fn glue_many(parts: &[&LabelledGraph]) -> LabelledGraph {
    let mut acc = parts[0].clone();
    for p in &parts[1..] {
        acc = glue(&acc, p).expect("matching arity");
    }
    acc
}

/// Decides homomorphism indistinguishability of G and H over the family by
/// breadth-first closure of synced vector pairs starting from (𝟏_G, 𝟏_H):
/// every candidate's inner products against the current basis (and itself)
/// must agree across the two sides, and candidates inside the G-span must be
/// mirrored exactly by the same combination on the H side.
pub fn gram_indistinguishable(spec: &FamilySpec, g: &Graph, h: &Graph) -> GramOutcome {
    let ng = g.vertex_count();
    let nh = h.vertex_count();
    let one = |n: usize| vec![BigRational::one(); n];
    let k1 = LabelledGraph::new(Graph::new(1, &[]).unwrap(), vec![0]).unwrap();

    let mut span = SyncedSpan::new();
    let mut recipes: Vec<LabelledGraph> = Vec::new();

    // Processes one candidate; Some(outcome) means a mismatch was found.
    let process = |span: &mut SyncedSpan,
                       recipes: &mut Vec<LabelledGraph>,
                       cg: Vector,
                       ch: Vector,
                       recipe: LabelledGraph|
     -> Option<GramOutcome> {
        // Gram row against the basis and the candidate itself.
        for (i, (bg, bh)) in span.gens_g.iter().zip(&span.gens_h).enumerate() {
            if inner(&cg, bg) != inner(&ch, bh) {
                return Some(GramOutcome {
                    indistinguishable: false,
                    witness: Some(glue_many(&[&recipe, &recipes[i]])),
                    basis_dim: span.dim(),
                });
            }
        }
        if inner(&cg, &cg) != inner(&ch, &ch) {
            return Some(GramOutcome {
                indistinguishable: false,
                witness: Some(glue_many(&[&recipe, &recipe])),
                basis_dim: span.dim(),
            });
        }
        match span.reduce(&cg) {
            Reduction::InSpan(coeffs) => {
                if span.combine_h(&coeffs) != ch {
                    // With matching Gram data this is unreachable; kept as a
                    // defensive cross-check of the mirrored combination.
                    return Some(GramOutcome {
                        indistinguishable: false,
                        witness: Some(recipe),
                        basis_dim: span.dim(),
                    });
                }
            }
            Reduction::Fresh(pivot, row, combo) => {
                span.insert(cg, ch, pivot, row, combo);
                recipes.push(recipe);
            }
        }
        None
    };

    if let Some(out) = process(&mut span, &mut recipes, one(ng), one(nh), k1) {
        return out;
    }
    loop {
        let before = span.dim();
        // One closure round over the current basis. The rules are
        // (multi)linear, so closure on basis elements implies closure on the
        // span.
        let mut candidates: Vec<(Vector, Vector, LabelledGraph)> = Vec::new();
        match spec.kind {
            FamilyKind::Paths => {
                for i in 0..before {
                    candidates.push((
                        apply_adjacency(g, &span.gens_g[i]),
                        apply_adjacency(h, &span.gens_h[i]),
                        a_extend(&recipes[i]),
                    ));
                }
            }
            FamilyKind::Trees => {
                for i in 0..before {
                    candidates.push((
                        apply_adjacency(g, &span.gens_g[i]),
                        apply_adjacency(h, &span.gens_h[i]),
                        a_extend(&recipes[i]),
                    ));
                    for j in i..before {
                        candidates.push((
                            schur_vec(&span.gens_g[i], &span.gens_g[j]),
                            schur_vec(&span.gens_h[i], &span.gens_h[j]),
                            glue_many(&[&recipes[i], &recipes[j]]),
                        ));
                    }
                }
            }
            FamilyKind::Dary(d) => {
                // All multisets of size d over the basis indices.
                let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
                for _ in 0..d {
                    let mut next = Vec::new();
                    for m in &stack {
                        let lo = m.last().copied().unwrap_or(0);
                        for i in lo..before {
                            let mut e = m.clone();
                            e.push(i);
                            next.push(e);
                        }
                    }
                    stack = next;
                }
                for m in stack {
                    let mut vg = span.gens_g[m[0]].clone();
                    let mut vh = span.gens_h[m[0]].clone();
                    for &i in &m[1..] {
                        vg = schur_vec(&vg, &span.gens_g[i]);
                        vh = schur_vec(&vh, &span.gens_h[i]);
                    }
                    let parts: Vec<&LabelledGraph> = m.iter().map(|&i| &recipes[i]).collect();
                    candidates.push((
                        apply_adjacency(g, &vg),
                        apply_adjacency(h, &vh),
                        a_extend(&glue_many(&parts)),
                    ));
                }
            }
        }
        for (cg, ch, recipe) in candidates {
            if let Some(out) = process(&mut span, &mut recipes, cg, ch, recipe) {
                return out;
            }
        }
        if span.dim() == before {
            return GramOutcome { indistinguishable: true, witness: None, basis_dim: before };
        }
    }
}

// ---------------------------------------------------------------------------
// Family enumeration (oracle side).
// ---------------------------------------------------------------------------

const ENUM_CAP: usize = 10;

/// All unlabelled members of the family up to `size_bound` vertices, one per
/// isomorphism class, in nondecreasing size.
pub fn family_enumerate(spec: &FamilySpec, size_bound: usize) -> Result<Vec<Graph>, SpectraError> {
    if size_bound > ENUM_CAP {
        return Err(SpectraError::CapExceeded(size_bound, ENUM_CAP));
    }
    match spec.kind {
        FamilyKind::Paths => Ok((1..=size_bound).map(path).collect()),
        FamilyKind::Trees => Ok(enumerate_trees(size_bound, usize::MAX)),
        FamilyKind::Dary(d) => Ok(enumerate_trees(size_bound, d + 1)),
    }
}

/// Trees up to isomorphism by levelwise leaf attachment, optionally capped in
/// maximum degree.
fn enumerate_trees(size_bound: usize, max_degree: usize) -> Vec<Graph> {
    let mut out: Vec<Graph> = Vec::new();
    if size_bound == 0 {
        return out;
    }
    let mut layer = vec![Graph::new(1, &[]).unwrap()];
    out.extend(layer.iter().cloned());
    for n in 1..size_bound {
        let mut next: Vec<Graph> = Vec::new();
        for t in &layer {
            for v in 0..n {
                if t.degree(v) + 1 > max_degree {
                    continue;
                }
                let mut edges = t.edges();
                edges.push((v, n));
                let ext = Graph::new(n + 1, &edges).unwrap();
                if !next.iter().any(|u| crate::graphs::are_isomorphic(u, &ext)) {
                    next.push(ext);
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

// ---------------------------------------------------------------------------
// Word equivalence.
// ---------------------------------------------------------------------------

/// Verdict of a word-equality test. `EquivalentUpTo(L)` marks a truncated
/// trace search: no mismatch among words of length ≤ L, but longer words were
/// not exhausted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WordVerdict {
    Equivalent,
    EquivalentUpTo(usize),
    Distinguished(Vec<usize>),
}

/// Sparse view (row, col, value) of a square tensor.
fn sparse_entries(t: &HomTensor) -> Vec<(usize, usize, BigInt)> {
    let cols = t.cols();
    t.entries
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(i, v)| (i / cols, i % cols, v.clone()))
        .collect()
}

fn check_families(
    fam_g: &[HomTensor],
    fam_h: &[HomTensor],
) -> Result<(usize, usize), SpectraError> {
    if fam_g.len() != fam_h.len() || fam_g.is_empty() {
        return Err(SpectraError::ShapeMismatch("family lengths differ or empty".into()));
    }
    let arity = fam_g[0].arity_in;
    for t in fam_g.iter().chain(fam_h) {
        if t.arity_in != arity || t.arity_out != arity {
            return Err(SpectraError::ShapeMismatch("tensors must be square, same arity".into()));
        }
    }
    let dim_g = fam_g[0].rows();
    let dim_h = fam_h[0].rows();
    for t in fam_g {
        if t.rows() != dim_g {
            return Err(SpectraError::ShapeMismatch("G-side sizes differ".into()));
        }
    }
    for t in fam_h {
        if t.rows() != dim_h {
            return Err(SpectraError::ShapeMismatch("H-side sizes differ".into()));
        }
    }
    Ok((dim_g, dim_h))
}

/// Decides whether every word over the two synced tensor families evaluates
/// equally under the given functional.
///
/// * `Soe`: exact synced Krylov closure of the 𝟏-generated subspaces; always
///   terminates and its "true" verdict is a proof over all words.
/// * `Tr`: memoized exploration of distinct synced product pairs up to
///   `max_len` (default: product of the two side lengths). If the state space
///   closes before the bound, the verdict is a proven `Equivalent`; otherwise
///   `EquivalentUpTo`.
pub fn words_equivalent(
    fam_g: &[HomTensor],
    fam_h: &[HomTensor],
    mode: EvalMode,
    max_len: Option<usize>,
) -> Result<WordVerdict, SpectraError> {
    let (dim_g, dim_h) = check_families(fam_g, fam_h)?;
    match mode {
        EvalMode::Soe => soe_equivalent(fam_g, fam_h, dim_g, dim_h),
        EvalMode::Tr => {
            let bound = max_len.unwrap_or_else(|| dim_g.saturating_mul(dim_h));
            tr_equivalent(fam_g, fam_h, dim_g, dim_h, bound)
        }
    }
}

fn soe_equivalent(
    fam_g: &[HomTensor],
    fam_h: &[HomTensor],
    dim_g: usize,
    dim_h: usize,
) -> Result<WordVerdict, SpectraError> {
    let letters_g: Vec<Vec<(usize, usize, BigInt)>> = fam_g.iter().map(sparse_entries).collect();
    let letters_h: Vec<Vec<(usize, usize, BigInt)>> = fam_h.iter().map(sparse_entries).collect();
    let apply = |letter: &[(usize, usize, BigInt)], v: &[BigRational], dim: usize| -> Vector {
        let mut out = vec![BigRational::zero(); dim];
        for (r, c, val) in letter {
            if !v[*c].is_zero() {
                out[*r] += BigRational::from_integer(val.clone()) * &v[*c];
            }
        }
        out
    };
    let soe = |v: &[BigRational]| -> BigRational { v.iter().sum() };

    let mut span = SyncedSpan::new();
    let mut words: Vec<Vec<usize>> = Vec::new();
    let mut queue: std::collections::VecDeque<(Vector, Vector, Vec<usize>)> =
        std::collections::VecDeque::new();
    queue.push_back((
        vec![BigRational::one(); dim_g],
        vec![BigRational::one(); dim_h],
        Vec::new(),
    ));
    while let Some((u, w, word)) = queue.pop_front() {
        if soe(&u) != soe(&w) {
            return Ok(WordVerdict::Distinguished(word));
        }
        match span.reduce(&u) {
            Reduction::InSpan(coeffs) => {
                if span.combine_h(&coeffs) != w {
                    return Ok(WordVerdict::Distinguished(word));
                }
            }
            Reduction::Fresh(pivot, row, combo) => {
                span.insert(u.clone(), w.clone(), pivot, row, combo);
                words.push(word.clone());
                for i in 0..letters_g.len() {
                    let mut ext = Vec::with_capacity(word.len() + 1);
                    ext.push(i);
                    ext.extend_from_slice(&word);
                    queue.push_back((
                        apply(&letters_g[i], &u, dim_g),
                        apply(&letters_h[i], &w, dim_h),
                        ext,
                    ));
                }
            }
        }
    }
    Ok(WordVerdict::Equivalent)
}

fn tr_equivalent(
    fam_g: &[HomTensor],
    fam_h: &[HomTensor],
    dim_g: usize,
    dim_h: usize,
    max_len: usize,
) -> Result<WordVerdict, SpectraError> {
    let letters_g: Vec<Vec<(usize, usize, BigInt)>> = fam_g.iter().map(sparse_entries).collect();
    let letters_h: Vec<Vec<(usize, usize, BigInt)>> = fam_h.iter().map(sparse_entries).collect();
    // Right-multiply a dense product by a sparse letter.
    let extend = |p: &[BigInt], letter: &[(usize, usize, BigInt)], dim: usize| -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); dim * dim];
        for (m, c, val) in letter {
            for r in 0..dim {
                let x = &p[r * dim + m];
                if !x.is_zero() {
                    out[r * dim + c] += x * val;
                }
            }
        }
        out
    };
    let trace = |p: &[BigInt], dim: usize| -> BigInt {
        (0..dim).map(|i| p[i * dim + i].clone()).sum()
    };
    let ident = |dim: usize| -> Vec<BigInt> {
        let mut p = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            p[i * dim + i] = BigInt::one();
        }
        p
    };

    let mut seen: std::collections::HashSet<(Vec<BigInt>, Vec<BigInt>)> =
        std::collections::HashSet::new();
    let mut queue: std::collections::VecDeque<(Vec<BigInt>, Vec<BigInt>, Vec<usize>)> =
        std::collections::VecDeque::new();
    let mut truncated = false;
    queue.push_back((ident(dim_g), ident(dim_h), Vec::new()));
    while let Some((pg, ph, word)) = queue.pop_front() {
        if trace(&pg, dim_g) != trace(&ph, dim_h) {
            return Ok(WordVerdict::Distinguished(word));
        }
        if !seen.insert((pg.clone(), ph.clone())) {
            continue; // equal synced state already explored
        }
        if word.len() == max_len {
            truncated = true;
            continue;
        }
        for i in 0..letters_g.len() {
            // Traces are rotation-invariant, so it suffices to explore words
            // whose first letter is minimal among their letters.
            if let Some(&first) = word.first() {
                if i < first {
                    continue;
                }
            }
            let mut ext = word.clone();
            ext.push(i);
            queue.push_back((
                extend(&pg, &letters_g[i], dim_g),
                extend(&ph, &letters_h[i], dim_h),
                ext,
            ));
        }
    }
    Ok(if truncated { WordVerdict::EquivalentUpTo(max_len) } else { WordVerdict::Equivalent })
}

/// Convenience: the synced basal tensor families of two graphs.
pub fn basal_tensor_families(
    kind: crate::hom::BasalKind,
    k: usize,
    g: &Graph,
    h: &Graph,
) -> (Vec<HomTensor>, Vec<HomTensor>) {
    let fam = crate::basal::family(kind, k);
    let tg = fam.members.iter().map(|m| crate::basal::basal_tensor(m, g)).collect();
    let th = fam.members.iter().map(|m| crate::basal::basal_tensor(m, h)).collect();
    (tg, th)
}

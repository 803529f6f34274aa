//! Exact homomorphism counting and homomorphism tensors.
//!
//! `hom_count` is the brute-force oracle everything else is validated against.
//! `HomTensor` is the dense exact-integer tensor of pinned homomorphism counts
//! indexed by vertex tuples; the module also provides the tensor algebra
//! (matrix product = series composition, Schur product = parallel composition,
//! sum-of-entries, trace) and evaluation of words over the basal families.

use num::bigint::BigInt;
use num::{One, Zero};

use crate::basal::{self, SparseTensor};
use crate::graphs::{BilabelledGraph, Graph, LabelledGraph};
use crate::util::{checked_pow, for_each_tuple, tuple_index};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HomError {
    #[error("tensor shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("memory cap exceeded: {need} entries > cap {cap}")]
    CapExceeded { need: usize, cap: usize },
    #[error("word is empty")]
    EmptyWord,
    #[error("letter {0} out of range for family with {1} members")]
    BadLetter(usize, usize),
}

/// Dense exact-integer tensor indexed by (tuple in [n]^arity_in, tuple in
/// [n]^arity_out) in row-major tuple order. Labelled-graph tensors (vectors)
/// have arity_out = 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomTensor {
    pub arity_in: usize,
    pub arity_out: usize,
    pub n: usize,
    pub entries: Vec<BigInt>,
}

impl HomTensor {
    pub fn zeros(arity_in: usize, arity_out: usize, n: usize) -> Result<HomTensor, HomError> {
        let need = checked_pow(n, arity_in + arity_out)
            .ok_or(HomError::CapExceeded { need: usize::MAX, cap: crate::entry_cap() })?;
        if need > crate::entry_cap() {
            return Err(HomError::CapExceeded { need, cap: crate::entry_cap() });
        }
        Ok(HomTensor { arity_in, arity_out, n, entries: vec![BigInt::zero(); need] })
    }

    /// Identity matrix on [n]^arity tuples.
    pub fn identity(arity: usize, n: usize) -> Result<HomTensor, HomError> {
        let mut t = HomTensor::zeros(arity, arity, n)?;
        let side = checked_pow(n, arity).unwrap();
        for i in 0..side {
            t.entries[i * side + i] = BigInt::one();
        }
        Ok(t)
    }

    /// All-ones vector on [n]^arity tuples.
    pub fn ones_vector(arity: usize, n: usize) -> Result<HomTensor, HomError> {
        let mut t = HomTensor::zeros(arity, 0, n)?;
        for e in &mut t.entries {
            *e = BigInt::one();
        }
        Ok(t)
    }

    pub fn rows(&self) -> usize {
        checked_pow(self.n, self.arity_in).unwrap()
    }

    pub fn cols(&self) -> usize {
        checked_pow(self.n, self.arity_out).unwrap()
    }

    pub fn get(&self, in_tuple: &[usize], out_tuple: &[usize]) -> &BigInt {
        let r = tuple_index(in_tuple, self.n);
        let c = tuple_index(out_tuple, self.n);
        &self.entries[r * self.cols() + c]
    }

    /// One line per nonzero entry: `t <in-tuple> | <out-tuple> <value>`.
    pub fn dump(&self) -> String {
        use crate::util::index_tuple;
        let mut s = String::new();
        let cols = self.cols();
        for (idx, v) in self.entries.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let it = index_tuple(idx / cols, self.n, self.arity_in);
            let ot = index_tuple(idx % cols, self.n, self.arity_out);
            let fmt = |t: &[usize]| {
                t.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
            };
            s.push_str(&format!("t {} | {} {}\n", fmt(&it), fmt(&ot), v));
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Brute-force counting.
// ---------------------------------------------------------------------------

/// Exact number of homomorphisms (edge-preserving maps) V(F) → V(G).
pub fn hom_count(f: &Graph, g: &Graph) -> BigInt {
    let n = BigInt::from(g.vertex_count());
    let mut total = BigInt::one();
    for comp in f.components() {
        if comp.len() == 1 {
            total *= &n;
        } else {
            total *= hom_count_component(&f.induced(&comp), g);
        }
    }
    total
}

fn hom_count_component(f: &Graph, g: &Graph) -> BigInt {
    let order = crate::graphs::search_order(f);
    let mut image = vec![usize::MAX; f.vertex_count()];
    count_rec(f, g, &order, 0, &mut image)
}

fn count_rec(f: &Graph, g: &Graph, order: &[usize], pos: usize, image: &mut [usize]) -> BigInt {
    if pos == order.len() {
        return BigInt::one();
    }
    let v = order[pos];
    let mut total = BigInt::zero();
    'cand: for c in 0..g.vertex_count() {
        for &w in f.neighbours(v) {
            let w = w as usize;
            if image[w] != usize::MAX && !g.has_edge(c, image[w]) {
                continue 'cand;
            }
        }
        image[v] = c;
        total += count_rec(f, g, order, pos + 1, image);
        image[v] = usize::MAX;
    }
    total
}

/// Homomorphisms with some vertices pinned to prescribed images. Conflicting
/// pins of the same vertex yield 0.
pub fn hom_count_pinned(f: &Graph, pins: &[(usize, usize)], g: &Graph) -> BigInt {
    let mut image = vec![usize::MAX; f.vertex_count()];
    for &(v, c) in pins {
        if image[v] != usize::MAX && image[v] != c {
            return BigInt::zero();
        }
        image[v] = c;
    }
    // Check edges among pinned vertices.
    for (u, v) in f.edges() {
        if image[u] != usize::MAX && image[v] != usize::MAX && !g.has_edge(image[u], image[v]) {
            return BigInt::zero();
        }
    }
    let order: Vec<usize> = crate::graphs::search_order(f)
        .into_iter()
        .filter(|&v| image[v] == usize::MAX)
        .collect();
    count_rec(f, g, &order, 0, &mut image)
}

enum Labelling<'a> {
    One(&'a LabelledGraph),
    Two(&'a BilabelledGraph),
}

fn hom_tensor_impl(f: Labelling<'_>, g: &Graph) -> Result<HomTensor, HomError> {
    let (graph, in_labels, out_labels): (&Graph, &[usize], &[usize]) = match f {
        Labelling::One(l) => (&l.graph, &l.labels, &[]),
        Labelling::Two(b) => (&b.graph, &b.in_labels, &b.out_labels),
    };
    let n = g.vertex_count();
    let mut t = HomTensor::zeros(in_labels.len(), out_labels.len(), n)?;
    let all_labels: Vec<usize> = in_labels.iter().chain(out_labels.iter()).copied().collect();
    let mut idx = 0usize;
    for_each_tuple(n, all_labels.len(), |tuple| {
        let pins: Vec<(usize, usize)> =
            all_labels.iter().copied().zip(tuple.iter().copied()).collect();
        t.entries[idx] = hom_count_pinned(graph, &pins, g);
        idx += 1;
    });
    Ok(t)
}

/// Homomorphism tensor of a labelled graph (a vector over V(G)^ℓ).
pub fn hom_tensor_labelled(f: &LabelledGraph, g: &Graph) -> Result<HomTensor, HomError> {
    hom_tensor_impl(Labelling::One(f), g)
}

/// Homomorphism tensor of a bilabelled graph (a matrix over tuple pairs).
pub fn hom_tensor_bilabelled(f: &BilabelledGraph, g: &Graph) -> Result<HomTensor, HomError> {
    hom_tensor_impl(Labelling::Two(f), g)
}

// ---------------------------------------------------------------------------
// Tensor algebra.
// ---------------------------------------------------------------------------

/// Sum of entries; for a labelled graph's tensor this equals
/// hom(underlying(F), G).
pub fn soe(t: &HomTensor) -> BigInt {
    let mut s = BigInt::zero();
    for e in &t.entries {
        s += e;
    }
    s
}

/// Trace Σ_v entry(v⃗, v⃗); requires a square tensor.
pub fn trace(t: &HomTensor) -> Result<BigInt, HomError> {
    if t.arity_in != t.arity_out {
        return Err(HomError::ShapeMismatch(format!(
            "trace needs square arity, got ({}, {})",
            t.arity_in, t.arity_out
        )));
    }
    let side = t.rows();
    let mut s = BigInt::zero();
    for i in 0..side {
        s += &t.entries[i * side + i];
    }
    Ok(s)
}

/// Matrix product (series composition on bilabelled graphs).
pub fn matmul(a: &HomTensor, b: &HomTensor) -> Result<HomTensor, HomError> {
    if a.arity_out != b.arity_in || a.n != b.n {
        return Err(HomError::ShapeMismatch(format!(
            "matmul: ({},{}) n={} vs ({},{}) n={}",
            a.arity_in, a.arity_out, a.n, b.arity_in, b.arity_out, b.n
        )));
    }
    let mut out = HomTensor::zeros(a.arity_in, b.arity_out, a.n)?;
    let (rows, inner, cols) = (a.rows(), a.cols(), b.cols());
    for i in 0..rows {
        for l in 0..inner {
            let av = &a.entries[i * inner + l];
            if av.is_zero() {
                continue;
            }
            for j in 0..cols {
                let bv = &b.entries[l * cols + j];
                if !bv.is_zero() {
                    out.entries[i * cols + j] += av * bv;
                }
            }
        }
    }
    Ok(out)
}

/// Entrywise (Schur) product; arities and target size must agree.
pub fn schur(a: &HomTensor, b: &HomTensor) -> Result<HomTensor, HomError> {
    if a.arity_in != b.arity_in || a.arity_out != b.arity_out || a.n != b.n {
        return Err(HomError::ShapeMismatch("schur: arity/target mismatch".into()));
    }
    let mut out = a.clone();
    for (x, y) in out.entries.iter_mut().zip(b.entries.iter()) {
        *x *= y;
    }
    Ok(out)
}

/// Matrix–vector product: a is (ℓ₁,ℓ₂), v is an ℓ₂-vector (arity_out 0).
pub fn matvec(a: &HomTensor, v: &HomTensor) -> Result<HomTensor, HomError> {
    if v.arity_out != 0 || a.arity_out != v.arity_in || a.n != v.n {
        return Err(HomError::ShapeMismatch("matvec: shape mismatch".into()));
    }
    let mut out = HomTensor::zeros(a.arity_in, 0, a.n)?;
    let (rows, cols) = (a.rows(), a.cols());
    for i in 0..rows {
        let mut acc = BigInt::zero();
        for j in 0..cols {
            let av = &a.entries[i * cols + j];
            if !av.is_zero() {
                acc += av * &v.entries[j];
            }
        }
        out.entries[i] = acc;
    }
    Ok(out)
}

/// Transpose (tensor of the reversed bilabelled graph).
pub fn transpose(a: &HomTensor) -> HomTensor {
    let mut out = HomTensor {
        arity_in: a.arity_out,
        arity_out: a.arity_in,
        n: a.n,
        entries: vec![BigInt::zero(); a.entries.len()],
    };
    let (rows, cols) = (a.rows(), a.cols());
    for i in 0..rows {
        for j in 0..cols {
            out.entries[j * rows + i] = a.entries[i * cols + j].clone();
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Words over basal families.
// ---------------------------------------------------------------------------

/// Which basal family a word's letters index into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasalKind {
    Pw,
    Wl,
    Td,
}

impl BasalKind {
    pub fn name(self) -> &'static str {
        match self {
            BasalKind::Pw => "pw",
            BasalKind::Wl => "wl",
            BasalKind::Td => "td",
        }
    }
}

/// A word over a basal family: a sequence of member indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word {
    pub kind: BasalKind,
    pub k: usize,
    pub letters: Vec<usize>,
}

impl Word {
    /// Dump format: `w <family>:<k> <letter-ids...>`.
    pub fn dump(&self) -> String {
        let ids =
            self.letters.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ");
        format!("w {}:{} {}\n", self.kind.name(), self.k, ids)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Soe,
    Tr,
}

/// Evaluates a basal word over target G.
///
/// soe mode computes soe(B¹_G ⋯ B^r_G · 𝟏) by folding right-to-left against
/// the all-ones vector (for the td family this is exactly the
/// soe(B¹⋯B^r 𝟏) form); tr mode computes tr(B¹_G ⋯ B^r_G).
pub fn evaluate_word(w: &Word, g: &Graph, mode: EvalMode) -> Result<BigInt, HomError> {
    if w.letters.is_empty() {
        return Err(HomError::EmptyWord);
    }
    let family = basal::family(w.kind, w.k);
    let tensors: Vec<SparseTensor> = {
        let mut used: Vec<Option<SparseTensor>> = vec![None; family.members.len()];
        for &l in &w.letters {
            if l >= family.members.len() {
                return Err(HomError::BadLetter(l, family.members.len()));
            }
            if used[l].is_none() {
                used[l] = Some(basal::basal_pairs(&family.members[l], g));
            }
        }
        used.into_iter().map(|t| t.unwrap_or_else(SparseTensor::empty)).collect()
    };
    let ell = family.arity;
    let dim = checked_pow(g.vertex_count(), ell)
        .ok_or(HomError::CapExceeded { need: usize::MAX, cap: crate::entry_cap() })?;
    match mode {
        EvalMode::Soe => {
            let mut v = vec![BigInt::one(); dim];
            for &l in w.letters.iter().rev() {
                v = tensors[l].apply(&v);
            }
            let mut s = BigInt::zero();
            for x in &v {
                s += x;
            }
            Ok(s)
        }
        EvalMode::Tr => {
            if dim.checked_mul(dim).map_or(true, |need| need > crate::entry_cap()) {
                return Err(HomError::CapExceeded {
                    need: dim.saturating_mul(dim),
                    cap: crate::entry_cap(),
                });
            }
            // P starts as the identity; multiply letters in on the right.
            let mut p: Vec<BigInt> = vec![BigInt::zero(); dim * dim];
            for i in 0..dim {
                p[i * dim + i] = BigInt::one();
            }
            for &l in &w.letters {
                p = tensors[l].right_multiply(&p, dim);
            }
            let mut s = BigInt::zero();
            for i in 0..dim {
                s += &p[i * dim + i];
            }
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{complete, cycle, path, star, BilabelledGraph, LabelledGraph};

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn hom_count_basics() {
        let k1 = complete(1);
        assert_eq!(hom_count(&k1, &cycle(5)), big(5));
        assert_eq!(hom_count(&complete(2), &cycle(4)), big(8));
        let two_triangles = cycle(3).disjoint_union(&cycle(3));
        assert_eq!(hom_count(&cycle(3), &two_triangles), big(12));
        assert_eq!(hom_count(&cycle(3), &cycle(6)), big(0));
        // Empty pattern graph: exactly one (empty) map.
        let empty = crate::graphs::Graph::new(0, &[]).unwrap();
        assert_eq!(hom_count(&empty, &cycle(6)), big(1));
    }

    #[test]
    fn hom_count_matches_naive_enumeration() {
        // Cross-check the pruned search against the fully naive count on a
        // few patterns and targets.
        let patterns = [path(3), star(3), cycle(4), complete(3)];
        let targets = [path(4), cycle(5), complete(4)];
        for f in &patterns {
            for g in &targets {
                let nf = f.vertex_count();
                let ng = g.vertex_count();
                let mut naive = 0i64;
                let total = ng.pow(nf as u32);
                for code in 0..total {
                    let mut m = code;
                    let img: Vec<usize> = (0..nf)
                        .map(|_| {
                            let x = m % ng;
                            m /= ng;
                            x
                        })
                        .collect();
                    if f.edges().iter().all(|&(u, v)| g.has_edge(img[u], img[v])) {
                        naive += 1;
                    }
                }
                assert_eq!(hom_count(f, g), big(naive), "{f:?} -> {g:?}");
            }
        }
    }

    #[test]
    fn tensor_basics() {
        let g = cycle(4);
        let ones = LabelledGraph::ones(1);
        let t = hom_tensor_labelled(&ones, &g).unwrap();
        assert!(t.entries.iter().all(|e| *e == big(1)));
        assert_eq!(soe(&t), big(4));

        let a = hom_tensor_bilabelled(&BilabelledGraph::adjacency(), &g).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                assert_eq!(*a.get(&[u], &[v]), big(if g.has_edge(u, v) { 1 } else { 0 }));
            }
        }
        assert_eq!(soe(&a), big(8));
        assert_eq!(trace(&a).unwrap(), big(0));

        // A² over C4: diagonal 2 and antipodal entries 2.
        let a2 = matmul(&a, &a).unwrap();
        for u in 0..4usize {
            for v in 0..4usize {
                let expect = if u == v || (u % 2 == v % 2 && u != v) { 2 } else { 0 };
                assert_eq!(*a2.get(&[u], &[v]), big(expect));
            }
        }

        // 1-labelled P3 with an end label over C4: every entry 4.
        let p3 = LabelledGraph::new(path(3), vec![0]).unwrap();
        let tp = hom_tensor_labelled(&p3, &g).unwrap();
        assert!(tp.entries.iter().all(|e| *e == big(4)));
    }

    #[test]
    fn algebra_identities() {
        let g = complete(4);
        let a = hom_tensor_bilabelled(&BilabelledGraph::adjacency(), &g).unwrap();
        let id = HomTensor::identity(1, 4).unwrap();
        assert_eq!(matmul(&a, &id).unwrap(), a);
        let ones = HomTensor::ones_vector(1, 4).unwrap();
        assert_eq!(schur(&ones, &a.clone()).unwrap_err(), HomError::ShapeMismatch("schur: arity/target mismatch".into()));
        let v = hom_tensor_labelled(&LabelledGraph::ones(1), &g).unwrap();
        assert_eq!(schur(&v, &v).unwrap(), v);
        let av = matvec(&a, &v).unwrap();
        assert!(av.entries.iter().all(|e| *e == big(3)));
        assert_eq!(transpose(&a), a);
        assert_eq!(trace(&HomTensor::identity(2, 3).unwrap()).unwrap(), big(9));
    }

    #[test]
    fn glue_is_schur_product() {
        // hom_tensor(glue(F1,F2), G) = hom_tensor(F1,G) ∘ hom_tensor(F2,G).
        let g = cycle(5);
        let f1 = LabelledGraph::new(path(2), vec![0]).unwrap();
        let f2 = LabelledGraph::new(path(3), vec![0]).unwrap();
        let glued = crate::graphs::glue(&f1, &f2).unwrap();
        let lhs = hom_tensor_labelled(&glued, &g).unwrap();
        let rhs = schur(
            &hom_tensor_labelled(&f1, &g).unwrap(),
            &hom_tensor_labelled(&f2, &g).unwrap(),
        )
        .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn concat_is_matmul_and_reverse_is_transpose() {
        let g = star(3);
        let a = BilabelledGraph::adjacency();
        let aa = crate::graphs::concat(&a, &a).unwrap();
        let lhs = hom_tensor_bilabelled(&aa, &g).unwrap();
        let ta = hom_tensor_bilabelled(&a, &g).unwrap();
        assert_eq!(lhs, matmul(&ta, &ta).unwrap());
        let rev = crate::graphs::reverse(&aa);
        assert_eq!(hom_tensor_bilabelled(&rev, &g).unwrap(), transpose(&lhs));
    }

    #[test]
    fn identify_ends_matches_trace() {
        // soe(identify_ends(F)_G) = trace(F_G) for square bilabelled F whose
        // identification creates no self-loop. (Closing the bare edge 𝑨 does
        // create one; loops are deleted on normalization, so for 𝑨 the closure
        // counts maps of a single free vertex while the trace is 0.)
        let a = BilabelledGraph::adjacency();
        let aa = crate::graphs::concat(&a, &a).unwrap();
        let aaa = crate::graphs::concat(&aa, &a).unwrap();
        let closed_a = crate::graphs::identify_ends(&a).unwrap();
        assert_eq!(closed_a.graph.vertex_count(), 1);
        assert_eq!(closed_a.graph.edge_count(), 0);
        assert_eq!(trace(&hom_tensor_bilabelled(&a, &cycle(4)).unwrap()).unwrap(), big(0));
        for f in [&aa, &aaa] {
            for g in [cycle(4), complete(4), star(3), cycle(3).disjoint_union(&cycle(3))] {
                let closed = crate::graphs::identify_ends(f).unwrap();
                let lhs = soe(&hom_tensor_labelled(&closed, &g).unwrap());
                let rhs = trace(&hom_tensor_bilabelled(f, &g).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
        // A³ closed realizes C₃: tr over C₃⊎C₃ = 12, over C₆ = 0.
        let two_triangles = cycle(3).disjoint_union(&cycle(3));
        assert_eq!(trace(&hom_tensor_bilabelled(&aaa, &two_triangles).unwrap()).unwrap(), big(12));
        assert_eq!(trace(&hom_tensor_bilabelled(&aaa, &cycle(6)).unwrap()).unwrap(), big(0));
    }

    #[test]
    fn equivariance_under_target_relabelling() {
        // Relabelling G permutes tensor indices identically.
        let g = path(4);
        let perm = [2usize, 0, 3, 1];
        let edges: Vec<(usize, usize)> =
            g.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let gp = crate::graphs::Graph::new(4, &edges).unwrap();
        let f = LabelledGraph::new(star(2), vec![0, 1]).unwrap();
        let t = hom_tensor_labelled(&f, &g).unwrap();
        let tp = hom_tensor_labelled(&f, &gp).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                assert_eq!(t.get(&[u, v], &[]), tp.get(&[perm[u], perm[v]], &[]));
            }
        }
    }

    #[test]
    fn word_evaluation_identity() {
        // Word [I] in soe mode gives n^{k+1} over the pw family.
        let w = Word { kind: BasalKind::Pw, k: 1, letters: vec![0] };
        assert_eq!(evaluate_word(&w, &cycle(5), EvalMode::Soe).unwrap(), big(25));
        assert_eq!(
            evaluate_word(&Word { kind: BasalKind::Pw, k: 1, letters: vec![] }, &cycle(5), EvalMode::Soe),
            Err(HomError::EmptyWord)
        );
    }
}

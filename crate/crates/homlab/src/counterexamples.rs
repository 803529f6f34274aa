//! Constructive generator for pairs of bounded-degree graphs that agree on all
//! homomorphism counts from d-ary trees yet are distinguished by a larger
//! star: Prouhet–Thue–Morse power-sum partitions, exact integral principal
//! sequences, the rank-3 base matrix M_λ, the multigraph-to-simple-graph
//! circulant lift, and a verification harness with a layered fast path for
//! tree homomorphism counting.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

use crate::graphs::Graph;
use crate::spectra::{family_enumerate, gram_indistinguishable, FamilySpec};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CexError {
    #[error("construction needs {need} units, exceeding the cap of {cap}")]
    CapExceeded { need: usize, cap: usize },
    #[error("vector entries must be distinct")]
    RepeatedEntries,
    #[error("parameter out of range: {0}")]
    BadParameter(String),
}

#[cfg(test)]
fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

// ---------------------------------------------------------------------------
// Prouhet–Thue–Morse partition.
// ---------------------------------------------------------------------------

/// Power-sum partition of {0, …, 2^{2d+1}−1} by binary-digit parity: the two
/// halves agree on the power sums of order 1..=2d and first disagree at
/// order `ell`.
#[derive(Clone, Debug)]
pub struct PtmPartition {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub ell: usize,
}

fn power_sum(xs: &[u64], p: usize) -> BigInt {
    xs.iter().map(|&x| BigInt::from(x).pow(p as u32)).sum()
}

pub fn ptm_partition(d: usize) -> Result<PtmPartition, CexError> {
    if d == 0 {
        return Err(CexError::BadParameter("d must be at least 1".into()));
    }
    let bits = 2 * d + 1;
    if bits >= usize::BITS as usize {
        return Err(CexError::CapExceeded { need: bits, cap: usize::BITS as usize - 1 });
    }
    let total = 1u64 << bits;
    if total as usize > crate::entry_cap() {
        return Err(CexError::CapExceeded { need: total as usize, cap: crate::entry_cap() });
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for x in 0..total {
        if x.count_ones() % 2 == 0 {
            a.push(x);
        } else {
            b.push(x);
        }
    }
    for p in 1..=2 * d {
        assert_eq!(power_sum(&a, p), power_sum(&b, p), "power sum {p} must agree");
    }
    let ell = (2 * d + 1..)
        .find(|&p| power_sum(&a, p) != power_sum(&b, p))
        .expect("the halves have different multisets");
    Ok(PtmPartition { a, b, ell })
}

// ---------------------------------------------------------------------------
// Principal sequences.
// ---------------------------------------------------------------------------

/// Exact integral orthogonalization of u_0 = 𝟏+a, u_1 = 𝟏−a, u_i = a^{∘i}:
/// v_i are pairwise orthogonal primitive integer vectors with
/// span(v_0..v_i) = span(u_0..u_i).
#[derive(Clone, Debug)]
pub struct PrincipalSequence {
    pub a: Vec<BigInt>,
    pub u: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
    /// Per-vector rational factor relating the raw Gram–Schmidt output to the
    /// stored primitive integral vector.
    pub scalings: Vec<BigRational>,
}

fn dot(x: &[BigInt], y: &[BigInt]) -> BigInt {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn principal_sequence(a: &[u64]) -> Result<PrincipalSequence, CexError> {
    let n = a.len();
    if n < 3 {
        return Err(CexError::BadParameter("need at least 3 entries".into()));
    }
    {
        let mut sorted: Vec<u64> = a.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != n {
            return Err(CexError::RepeatedEntries);
        }
    }
    let ab: Vec<BigInt> = a.iter().map(|&x| BigInt::from(x)).collect();
    let mut u: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    u.push(ab.iter().map(|x| x + 1).collect());
    u.push(ab.iter().map(|x| BigInt::one() - x).collect());
    for i in 2..n {
        u.push(ab.iter().map(|x| x.pow(i as u32)).collect());
    }
    let mut v: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    let mut scalings: Vec<BigRational> = Vec::with_capacity(n);
    for ui in &u {
        // Standard projection of u_i off the previous v_j, in exact rationals.
        let mut w: Vec<BigRational> =
            ui.iter().map(|x| BigRational::from_integer(x.clone())).collect();
        for vj in &v {
            let num = dot(ui, vj);
            let den = dot(vj, vj);
            if num.is_zero() {
                continue;
            }
            let c = BigRational::new(num, den);
            for (we, ve) in w.iter_mut().zip(vj) {
                *we -= &c * BigRational::from_integer(ve.clone());
            }
        }
        // Rescale to the primitive integral representative.
        let mut den_lcm = BigInt::one();
        for we in &w {
            den_lcm = den_lcm.lcm(we.denom());
        }
        let ints: Vec<BigInt> = w.iter().map(|we| (we * &den_lcm).to_integer()).collect();
        let mut content = BigInt::zero();
        for x in &ints {
            content = content.gcd(x);
        }
        if content.is_zero() {
            content = BigInt::one();
        }
        let prim: Vec<BigInt> = ints.iter().map(|x| x / &content).collect();
        scalings.push(BigRational::new(den_lcm, content));
        v.push(prim);
    }
    let ps = PrincipalSequence { a: ab, u, v, scalings };
    debug_assert!(ps.verify());
    Ok(ps)
}

impl PrincipalSequence {
    /// Exact checks: pairwise orthogonality and prefix-span equality with the
    /// u vectors.
    pub fn verify(&self) -> bool {
        let n = self.v.len();
        for i in 0..n {
            for j in i + 1..n {
                if !dot(&self.v[i], &self.v[j]).is_zero() {
                    return false;
                }
            }
        }
        // span(v_0..v_i) = span(u_0..u_i): each u_i reduces to zero against
        // v_0..v_i (orthogonal projections) and each v_i is in span(u_0..u_i)
        // by construction, so matching prefix ranks suffice; check the first
        // direction exactly.
        for i in 0..n {
            let mut w: Vec<BigRational> = self.u[i]
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect();
            for vj in &self.v[..=i] {
                let num: BigRational = w
                    .iter()
                    .zip(vj)
                    .map(|(a, b)| a * BigRational::from_integer(b.clone()))
                    .sum();
                let den = BigRational::from_integer(dot(vj, vj));
                let c = num / den;
                for (we, ve) in w.iter_mut().zip(vj) {
                    *we -= &c * BigRational::from_integer(ve.clone());
                }
            }
            if w.iter().any(|x| !x.is_zero()) {
                return false;
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// The base matrix M_λ.
// ---------------------------------------------------------------------------

type Matrix = Vec<Vec<BigInt>>;

fn m_lambda(ps: &PrincipalSequence, d: usize, lambda: u64) -> Matrix {
    let n = ps.v[0].len();
    let terms = [(BigInt::from(lambda), &ps.v[0]), (BigInt::one(), &ps.v[1]), (BigInt::one(), &ps.v[d + 1])];
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| terms.iter().map(|(c, v)| c * &v[i] * &v[j]).sum())
                .collect()
        })
        .collect()
}

fn matrix_positive(m: &Matrix) -> bool {
    m.iter().all(|row| row.iter().all(|x| x.is_positive()))
}

fn mat_vec(m: &Matrix, z: &[BigInt]) -> Vec<BigInt> {
    m.iter().map(|row| dot(row, z)).collect()
}

fn ones_not_eigenvector(m: &Matrix) -> bool {
    let n = m.len();
    let ones = vec![BigInt::one(); n];
    let image = mat_vec(m, &ones);
    image.iter().any(|x| x != &image[0])
}

fn lambda_ok(ps: &PrincipalSequence, d: usize, lambda: u64) -> bool {
    let m = m_lambda(ps, d, lambda);
    matrix_positive(&m) && ones_not_eigenvector(&m)
}

/// Smallest positive integer λ such that M_λ = λ v₀v₀* + v₁v₁* + v_{d+1}v_{d+1}*
/// has only positive entries and does not fix 𝟏 as an eigenvector, together
/// with the matrix itself.
pub fn build_m(a: &[u64], d: usize) -> Result<(Matrix, u64), CexError> {
    if a.len() <= d + 1 {
        return Err(CexError::BadParameter("need n > d + 1".into()));
    }
    let ps = principal_sequence(a)?;
    let lambda = (1..).find(|&l| lambda_ok(&ps, d, l)).expect("v0 v0* is positive");
    Ok((m_lambda(&ps, d, lambda), lambda))
}

/// Exact rank by rational row elimination.
pub fn matrix_rank(m: &Matrix) -> usize {
    let mut rows: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let n = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let lead = rows[rank][col].clone();
        for i in 0..rows.len() {
            if i != rank && !rows[i][col].is_zero() {
                let f = &rows[i][col] / &lead;
                for j in col..n {
                    let d = &f * &rows[rank][j];
                    rows[i][j] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Whether x lies in the span of the given integer vectors (exact).
pub fn in_span(x: &[BigInt], basis: &[&[BigInt]]) -> bool {
    let mut w: Vec<BigRational> =
        x.iter().map(|e| BigRational::from_integer(e.clone())).collect();
    // The principal vectors are orthogonal, so projection coefficients are
    // independent; for general bases fall back to full elimination.
    let orthogonal = basis.iter().enumerate().all(|(i, u)| {
        basis[i + 1..].iter().all(|v| dot(u, v).is_zero())
    });
    if orthogonal {
        for b in basis {
            let num: BigRational =
                w.iter().zip(*b).map(|(a, e)| a * BigRational::from_integer(e.clone())).sum();
            let den = BigRational::from_integer(dot(b, b));
            let c = num / den;
            for (we, be) in w.iter_mut().zip(*b) {
                *we -= &c * BigRational::from_integer(be.clone());
            }
        }
        return w.iter().all(|e| e.is_zero());
    }
    let mut rows: Vec<Vec<BigInt>> = basis.iter().map(|b| b.to_vec()).collect();
    rows.push(x.to_vec());
    let full: Matrix = rows;
    matrix_rank(&full) == matrix_rank(&full[..full.len() - 1].to_vec())
}

// ---------------------------------------------------------------------------
// Lift to a simple graph.
// ---------------------------------------------------------------------------

/// A simple graph realizing a positive symmetric integer matrix M as its
/// layered degree structure: vertex (u, j) has exactly M_{uv} neighbours in
/// layer v, so the adjacency operator acts on lifted vectors z ⊗ 𝟏_N as M.
#[derive(Clone, Debug)]
pub struct LiftedGraph {
    pub base: Matrix,
    pub n_blowup: usize,
    pub graph: Graph,
    /// layer of each vertex: vertex u·N + j lies in layer u.
    pub layer: Vec<usize>,
}

/// Lift with an explicit even blow-up factor N > max entry of M.
pub fn lift_multigraph_with(m: &Matrix, n_blowup: usize) -> Result<LiftedGraph, CexError> {
    let n = m.len();
    let cap = crate::entry_cap();
    let need = n.checked_mul(n_blowup).ok_or(CexError::CapExceeded { need: usize::MAX, cap })?;
    if need > cap {
        return Err(CexError::CapExceeded { need, cap });
    }
    if n_blowup % 2 != 0 {
        return Err(CexError::BadParameter("blow-up factor must be even".into()));
    }
    let as_usize = |x: &BigInt| -> Result<usize, CexError> {
        usize::try_from(x.clone())
            .map_err(|_| CexError::BadParameter("matrix entry out of range".into()))
    };
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let vert = |u: usize, j: usize| u * n_blowup + j;
    for u in 0..n {
        // Diagonal block: deterministic circulant of degree M_{uu}.
        let deg = as_usize(&m[u][u])?;
        if deg >= n_blowup {
            return Err(CexError::BadParameter("blow-up factor too small".into()));
        }
        for s in 1..=deg / 2 {
            for j in 0..n_blowup {
                let t = (j + s) % n_blowup;
                edges.push((vert(u, j), vert(u, t)));
            }
        }
        if deg % 2 == 1 {
            for j in 0..n_blowup / 2 {
                edges.push((vert(u, j), vert(u, j + n_blowup / 2)));
            }
        }
        // Off-diagonal blocks: circulant biregular bipartite graphs.
        for v in u + 1..n {
            let deg = as_usize(&m[u][v])?;
            if deg > n_blowup {
                return Err(CexError::BadParameter("blow-up factor too small".into()));
            }
            for s in 0..deg {
                for j in 0..n_blowup {
                    edges.push((vert(u, j), vert(v, (j + s) % n_blowup)));
                }
            }
        }
    }
    let graph = Graph::new(n * n_blowup, &edges).expect("circulant construction is simple");
    let layer: Vec<usize> = (0..n * n_blowup).map(|x| x / n_blowup).collect();
    let lifted = LiftedGraph { base: m.clone(), n_blowup, graph, layer };
    assert!(lifted.verify_block_degrees(), "lift must realize the base matrix degrees");
    Ok(lifted)
}

/// Lift with the default blow-up: the smallest even N exceeding twice the
/// largest entry of M.
pub fn lift_multigraph(m: &Matrix) -> Result<LiftedGraph, CexError> {
    lift_multigraph_with(m, default_blowup(&[m]))
}

fn default_blowup(ms: &[&Matrix]) -> usize {
    let mut max = BigInt::zero();
    for m in ms {
        for row in *m {
            for x in row {
                if *x > max {
                    max = x.clone();
                }
            }
        }
    }
    let mut n = 2 * usize::try_from(max).expect("entry fits usize") + 1;
    if n % 2 == 1 {
        n += 1;
    }
    n
}

impl LiftedGraph {
    /// Exact census: every vertex of layer u has M_{uv} neighbours in layer v.
    /// Equivalent to the lift identity A(z ⊗ 𝟏_N) = (Mz) ⊗ 𝟏_N on the
    /// standard basis.
    pub fn verify_block_degrees(&self) -> bool {
        let n = self.base.len();
        for x in 0..self.graph.vertex_count() {
            let mut census = vec![0usize; n];
            for &y in self.graph.neighbours(x) {
                census[self.layer[y as usize]] += 1;
            }
            let u = self.layer[x];
            for v in 0..n {
                if BigInt::from(census[v]) != self.base[u][v] {
                    return false;
                }
            }
        }
        true
    }

    /// Degree of every vertex in layer u (constant by construction).
    pub fn layer_degree(&self, u: usize) -> BigInt {
        self.base[u].iter().sum()
    }
}

/// hom(T, lifted graph) for a tree T via the layered fast path: the hom
/// vector of any rooted tree is a lifted vector, so the whole count is
/// N · soe of the evaluation over the base matrix.
pub fn lifted_tree_hom(lg: &LiftedGraph, tree: &Graph) -> BigInt {
    assert!(tree.is_tree(), "fast path applies to trees");
    let base_vec = tree_base_vector(tree, 0, usize::MAX, &lg.base);
    BigInt::from(lg.n_blowup) * base_vec.iter().sum::<BigInt>()
}

/// Hom vector over the base multigraph of the subtree rooted at `root`
/// (entered from `parent`): the Schur product over children of M · child.
fn tree_base_vector(tree: &Graph, root: usize, parent: usize, m: &Matrix) -> Vec<BigInt> {
    let n = m.len();
    let mut vec = vec![BigInt::one(); n];
    for &c in tree.neighbours(root) {
        let c = c as usize;
        if c == parent {
            continue;
        }
        let child = tree_base_vector(tree, c, root, m);
        let pushed = mat_vec(m, &child);
        for (v, p) in vec.iter_mut().zip(&pushed) {
            *v *= p;
        }
    }
    vec
}

// ---------------------------------------------------------------------------
// The full pair.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct PairMeta {
    pub d: usize,
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    /// Least power where the power sums of a and b differ; the star with ell
    /// leaves distinguishes the pair.
    pub ell: usize,
    pub lambda: u64,
    pub n_blowup: usize,
    pub m: Matrix,
    pub l: Matrix,
}

#[derive(Clone, Debug)]
pub struct DegreePair {
    pub g: LiftedGraph,
    pub h: LiftedGraph,
    pub meta: PairMeta,
}

/// Builds the full counterexample pair for degree parameter d: G and H agree
/// on all hom counts from d-ary trees but differ at the star with ell leaves.
/// λ and N are shared across the two sides (the maxima of the per-side
/// minima, bumped together until both sides accept).
pub fn generate_degree_pair(d: usize) -> Result<DegreePair, CexError> {
    let ptm = ptm_partition(d)?;
    let ps_a = principal_sequence(&ptm.a)?;
    let ps_b = principal_sequence(&ptm.b)?;
    let lambda = (1u64..)
        .find(|&l| lambda_ok(&ps_a, d, l) && lambda_ok(&ps_b, d, l))
        .expect("v0 v0* is positive on both sides");
    let m = m_lambda(&ps_a, d, lambda);
    let l = m_lambda(&ps_b, d, lambda);
    let n_blowup = default_blowup(&[&m, &l]);
    let g = lift_multigraph_with(&m, n_blowup)?;
    let h = lift_multigraph_with(&l, n_blowup)?;
    Ok(DegreePair {
        g,
        h,
        meta: PairMeta { d, a: ptm.a, b: ptm.b, ell: ptm.ell, lambda, n_blowup, m, l },
    })
}

/// Plain-text metadata block (integer grid format for the base matrices).
pub fn meta_text(pair: &DegreePair) -> String {
    let grid = |m: &Matrix| {
        m.iter()
            .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let list = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    format!(
        "d {}\na {}\nb {}\nlambda {}\nN {}\nell {}\nM\n{}\nL\n{}\n",
        pair.meta.d,
        list(&pair.meta.a),
        list(&pair.meta.b),
        pair.meta.lambda,
        pair.meta.n_blowup,
        pair.meta.ell,
        grid(&pair.meta.m),
        grid(&pair.meta.l),
    )
}

// ---------------------------------------------------------------------------
// Verification harness.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct VerifyBounds {
    pub tree_size: usize,
    pub path_len: usize,
}

#[derive(Clone, Debug)]
pub struct VerifyItem {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub items: Vec<VerifyItem>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

/// Runs the full harness: (i) equal hom counts over d-ary trees up to
/// tree_size, (ii) equal path hom counts up to path_len vertices, (iii) a
/// strict gap at the star with ell leaves, (iv) the Gram testers agree
/// (d-ary: indistinguishable; all trees: distinguishable).
pub fn verify_degree_pair(pair: &DegreePair, bounds: &VerifyBounds) -> VerifyReport {
    let mut items = Vec::new();
    let meta = &pair.meta;

    let dary = FamilySpec::dary(meta.d).expect("d >= 1");
    match family_enumerate(&dary, bounds.tree_size) {
        Ok(trees) => {
            let bad: Vec<String> = trees
                .iter()
                .filter(|t| lifted_tree_hom(&pair.g, t) != lifted_tree_hom(&pair.h, t))
                .map(|t| format!("{} vertices", t.vertex_count()))
                .collect();
            items.push(VerifyItem {
                name: "dary-tree-homs",
                passed: bad.is_empty(),
                detail: if bad.is_empty() {
                    format!("{} trees agree", trees.len())
                } else {
                    format!("mismatches: {}", bad.join(", "))
                },
            });
        }
        Err(e) => items.push(VerifyItem {
            name: "dary-tree-homs",
            passed: false,
            detail: format!("enumeration failed: {e}"),
        }),
    }

    let bad_paths: Vec<usize> = (1..=bounds.path_len)
        .filter(|&mlen| {
            let p = crate::graphs::path(mlen);
            lifted_tree_hom(&pair.g, &p) != lifted_tree_hom(&pair.h, &p)
        })
        .collect();
    items.push(VerifyItem {
        name: "path-homs",
        passed: bad_paths.is_empty(),
        detail: if bad_paths.is_empty() {
            format!("paths up to {} vertices agree", bounds.path_len)
        } else {
            format!("mismatching path sizes: {bad_paths:?}")
        },
    });

    // Star with ell leaves, label at the centre: hom = Σ_v deg(v)^ell,
    // recomputed from the actual graphs.
    let census = |g: &Graph| -> BigInt {
        (0..g.vertex_count()).map(|v| BigInt::from(g.degree(v)).pow(meta.ell as u32)).sum()
    };
    let (sg, sh) = (census(&pair.g.graph), census(&pair.h.graph));
    items.push(VerifyItem {
        name: "star-gap",
        passed: sg != sh,
        detail: format!("hom(star with {} leaves): {} vs {}", meta.ell, sg, sh),
    });

    let gd = gram_indistinguishable(&dary, &pair.g.graph, &pair.h.graph);
    items.push(VerifyItem {
        name: "gram-dary",
        passed: gd.indistinguishable,
        detail: format!("basis dim {}", gd.basis_dim),
    });
    let gt = gram_indistinguishable(&FamilySpec::trees(), &pair.g.graph, &pair.h.graph);
    items.push(VerifyItem {
        name: "gram-trees",
        passed: !gt.indistinguishable,
        detail: match &gt.witness {
            Some(w) => format!(
                "witness tree on {} vertices",
                crate::graphs::underlying_labelled(w).vertex_count()
            ),
            None => "no witness".into(),
        },
    });

    VerifyReport { items }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{path, star};
    use crate::hom::hom_count;

    #[test]
    fn ptm_d1() {
        let p = ptm_partition(1).unwrap();
        assert_eq!(p.a, vec![0, 3, 5, 6]);
        assert_eq!(p.b, vec![1, 2, 4, 7]);
        assert_eq!(p.ell, 3);
        assert_eq!(power_sum(&p.a, 3), BigInt::from(368));
        assert_eq!(power_sum(&p.b, 3), BigInt::from(416));
        assert_eq!(p.a.len(), 1 << 2);
        let p2 = ptm_partition(2).unwrap();
        assert_eq!(p2.a.len(), 1 << 4);
        assert_eq!(p2.ell, 5);
    }

    #[test]
    fn principal_sequence_d1() {
        let ps = principal_sequence(&[0, 3, 5, 6]).unwrap();
        assert_eq!(ps.v[0], vec![big(1), big(4), big(6), big(7)]);
        assert_eq!(ps.v[1], vec![big(14), big(5), big(-1), big(-4)]);
        assert!(ps.verify());
        assert!(principal_sequence(&[0, 3, 3, 6]).is_err());
    }

    #[test]
    fn build_m_properties() {
        let d = 1;
        let (m, lambda) = build_m(&[0, 3, 5, 6], d).unwrap();
        assert!(lambda >= 1);
        assert!(matrix_positive(&m));
        assert!(ones_not_eigenvector(&m));
        assert_eq!(matrix_rank(&m), 3);
        // Symmetry.
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
        let ps = principal_sequence(&[0, 3, 5, 6]).unwrap();
        // M((M𝟏)^{∘(d+1)}) is not in S_{≤d} = span(v₀, v₁).
        let m1 = mat_vec(&m, &vec![BigInt::one(); 4]);
        let sq: Vec<BigInt> = m1.iter().map(|x| x.pow((d + 1) as u32)).collect();
        let image = mat_vec(&m, &sq);
        let span_d: Vec<&[BigInt]> = ps.v[..=d].iter().map(|v| v.as_slice()).collect();
        assert!(!in_span(&image, &span_d));
        // Schur products of S_{≤1} vectors land in S_{≤d}: check 𝟏∘a = a and
        // a∘a against span(v₀, v₁, v₂) for d = 2... at d = 1 the guarantee is
        // for single factors, trivially in S_{≤1}.
        let a_vec = ps.a.clone();
        let schur: Vec<BigInt> = a_vec.iter().map(|x| x * x).collect();
        let span_2: Vec<&[BigInt]> = ps.v[..=2].iter().map(|v| v.as_slice()).collect();
        assert!(in_span(&schur, &span_2));
    }

    #[test]
    fn lift_tiny_matrix_matches_dense_hom() {
        // 2×2 base matrix, tiny blow-up: the layered fast path must agree
        // with brute-force hom counting on the concrete lifted graph.
        let m: Matrix = vec![vec![big(2), big(1)], vec![big(1), big(2)]];
        let lifted = lift_multigraph_with(&m, 4).unwrap();
        assert_eq!(lifted.graph.vertex_count(), 8);
        assert!(lifted.verify_block_degrees());
        for t in [path(1), path(2), path(3), path(4), star(3)] {
            assert_eq!(
                lifted_tree_hom(&lifted, &t),
                hom_count(&t, &lifted.graph),
                "tree on {} vertices",
                t.vertex_count()
            );
        }
        // Default blow-up picks the smallest even N above twice the max.
        let auto = lift_multigraph(&m).unwrap();
        assert_eq!(auto.n_blowup, 6);
        // Determinism.
        let again = lift_multigraph(&m).unwrap();
        assert_eq!(auto.graph.edges(), again.graph.edges());
    }

    #[test]
    fn degree_pair_d1_structure() {
        let pair = generate_degree_pair(1).unwrap();
        let n = pair.meta.n_blowup;
        assert_eq!(pair.g.graph.vertex_count(), 4 * n);
        assert_eq!(pair.h.graph.vertex_count(), 4 * n);
        assert_eq!(pair.g.graph.edge_count(), pair.h.graph.edge_count());
        assert_eq!(pair.meta.ell, 3);
        // The K_{1,3} census gap is a positive multiple of the cube-sum gap.
        let cube = |g: &Graph| -> BigInt {
            (0..g.vertex_count()).map(|v| BigInt::from(g.degree(v)).pow(3)).sum()
        };
        assert_ne!(cube(&pair.g.graph), cube(&pair.h.graph));
        let text = meta_text(&pair);
        assert!(text.contains("a 0 3 5 6"));
        assert!(text.contains("ell 3"));
    }
}

//! The three finite basal generator families of bilabelled graphs:
//!
//! * `basal_pw(k)` — (k+1,k+1)-bilabelled generators for pathwidth-k words:
//!   identity 𝑰, adjacency 𝑨^{ij}, identification 𝑰^{ij}, forgetting 𝑭^i;
//! * `basal_wl(k)` — (k,k)-bilabelled generators tied to k-WL: 𝑰, 𝑨^{ij},
//!   𝑰^{ij}, connecting 𝑪^i, forgetting 𝑭^i;
//! * `basal_td(k)` — (k,k)-bilabelled generators for treedepth-k words:
//!   𝑰, 𝑨^{ij}, join 𝑱^ℓ, identification 𝑰^ℓ;
//!
//! together with a formula-based sparse realization of their homomorphism
//! tensors (every member has all vertices labelled, so its tensor is a 0/1
//! indicator that can be enumerated in n^{|V(member)|} steps instead of the
//! dense n^{2ℓ}).

use num::bigint::BigInt;
use num::Zero;

use crate::graphs::{BilabelledGraph, Graph};
use crate::hom::{BasalKind, HomTensor};
use crate::util::{checked_pow, tuple_index};

/// A finite, reversal-closed family of (ℓ,ℓ)-bilabelled generator graphs.
#[derive(Clone, Debug)]
pub struct BasalFamily {
    pub kind: BasalKind,
    pub k: usize,
    /// Label arity ℓ of every member (k+1 for pw, k for wl/td).
    pub arity: usize,
    pub members: Vec<BilabelledGraph>,
    pub names: Vec<String>,
    /// Involution: index of each member's reverse.
    pub reversal_map: Vec<usize>,
}

impl BasalFamily {
    /// Index of the identity member (always present, always first).
    pub fn identity_index(&self) -> usize {
        0
    }

    pub fn member_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

fn finish(kind: BasalKind, k: usize, arity: usize, raw: Vec<(String, BilabelledGraph)>) -> BasalFamily {
    let mut members = Vec::new();
    let mut names = Vec::new();
    for (name, m) in raw {
        let m = m.normalize();
        // Structural dedup of accidental duplicates with *different* names is
        // deliberately not performed: the td listing includes 𝑱^k, which
        // coincides with 𝑰 as a bilabelled graph; both stay addressable.
        members.push(m);
        names.push(name);
    }
    let mut reversal_map = Vec::with_capacity(members.len());
    for (i, m) in members.iter().enumerate() {
        let rev = crate::graphs::reverse(m).normalize();
        if rev == *m {
            reversal_map.push(i);
        } else {
            let j = members
                .iter()
                .position(|other| *other == rev)
                .expect("basal family must be closed under reversal");
            reversal_map.push(j);
        }
    }
    // reversal_map must be an involution.
    for (i, &j) in reversal_map.iter().enumerate() {
        assert_eq!(reversal_map[j], i, "reversal map is not an involution");
    }
    BasalFamily { kind, k, arity, members, names, reversal_map }
}

/// Builds the tuple (0..ell) with position `pos` replaced by `val`.
fn tuple_with(ell: usize, pos: usize, val: usize) -> Vec<usize> {
    let mut t: Vec<usize> = (0..ell).collect();
    t[pos] = val;
    t
}

/// The pathwidth family B^k ((k+1,k+1)-bilabelled). Members, in order:
/// 𝑰; 𝑨^{ij} for 1 ≤ i < j ≤ k+1; 𝑰^{ij} for ordered i ≠ j; 𝑭^i for i ∈ [k+1].
pub fn basal_pw(k: usize) -> BasalFamily {
    assert!(k >= 1, "basal_pw requires k >= 1");
    let ell = k + 1;
    let mut raw = Vec::new();
    raw.push(("I".to_string(), BilabelledGraph::identity(ell)));
    for i in 0..ell {
        for j in i + 1..ell {
            let g = Graph::new(ell, &[(i, j)]).unwrap();
            let labels: Vec<usize> = (0..ell).collect();
            raw.push((
                format!("A^{{{},{}}}", i + 1, j + 1),
                BilabelledGraph::new(g, labels.clone(), labels).unwrap(),
            ));
        }
    }
    // 𝑰^{ij}: vertex j deleted, label position j carries vertex i, both sides.
    for i in 0..ell {
        for j in 0..ell {
            if i == j {
                continue;
            }
            let renum = |v: usize| if v < j { v } else { v - 1 };
            let g = Graph::new(ell - 1, &[]).unwrap();
            let labels: Vec<usize> =
                tuple_with(ell, j, i).into_iter().map(renum).collect();
            raw.push((
                format!("I^{{{},{}}}", i + 1, j + 1),
                BilabelledGraph::new(g, labels.clone(), labels).unwrap(),
            ));
        }
    }
    // 𝑭^i: fresh vertex ell replaces position i on the out side; no edges.
    for i in 0..ell {
        let g = Graph::new(ell + 1, &[]).unwrap();
        raw.push((
            format!("F^{{{}}}", i + 1),
            BilabelledGraph::new(g, (0..ell).collect(), tuple_with(ell, i, ell)).unwrap(),
        ));
    }
    finish(BasalKind::Pw, k, ell, raw)
}

/// The k-WL family WL^k ((k,k)-bilabelled). Members, in order:
/// 𝑰; 𝑨^{ij} (i < j); 𝑰^{ij} (ordered i ≠ j); 𝑪^i; 𝑭^i.
pub fn basal_wl(k: usize) -> BasalFamily {
    assert!(k >= 1, "basal_wl requires k >= 1");
    let ell = k;
    let mut raw = Vec::new();
    raw.push(("I".to_string(), BilabelledGraph::identity(ell)));
    for i in 0..ell {
        for j in i + 1..ell {
            let g = Graph::new(ell, &[(i, j)]).unwrap();
            let labels: Vec<usize> = (0..ell).collect();
            raw.push((
                format!("A^{{{},{}}}", i + 1, j + 1),
                BilabelledGraph::new(g, labels.clone(), labels).unwrap(),
            ));
        }
    }
    for i in 0..ell {
        for j in 0..ell {
            if i == j {
                continue;
            }
            let renum = |v: usize| if v < j { v } else { v - 1 };
            let g = Graph::new(ell - 1, &[]).unwrap();
            let labels: Vec<usize> =
                tuple_with(ell, j, i).into_iter().map(renum).collect();
            raw.push((
                format!("I^{{{},{}}}", i + 1, j + 1),
                BilabelledGraph::new(g, labels.clone(), labels).unwrap(),
            ));
        }
    }
    // 𝑪^i: fresh vertex ell at out-position i, joined to vertex i by an edge.
    for i in 0..ell {
        let g = Graph::new(ell + 1, &[(i, ell)]).unwrap();
        raw.push((
            format!("C^{{{}}}", i + 1),
            BilabelledGraph::new(g, (0..ell).collect(), tuple_with(ell, i, ell)).unwrap(),
        ));
    }
    // 𝑭^i: same labels as 𝑪^i but no edge.
    for i in 0..ell {
        let g = Graph::new(ell + 1, &[]).unwrap();
        raw.push((
            format!("F^{{{}}}", i + 1),
            BilabelledGraph::new(g, (0..ell).collect(), tuple_with(ell, i, ell)).unwrap(),
        ));
    }
    finish(BasalKind::Wl, k, ell, raw)
}

/// The treedepth family TDB^k ((k,k)-bilabelled). Members, in order:
/// 𝑰; 𝑨^{ij} (i < j); 𝑱^ℓ for 0 ≤ ℓ ≤ k; 𝑰^ℓ for 1 ≤ ℓ < k.
pub fn basal_td(k: usize) -> BasalFamily {
    assert!(k >= 1, "basal_td requires k >= 1");
    let ell = k;
    let mut raw = Vec::new();
    raw.push(("I".to_string(), BilabelledGraph::identity(ell)));
    for i in 0..ell {
        for j in i + 1..ell {
            let g = Graph::new(ell, &[(i, j)]).unwrap();
            let labels: Vec<usize> = (0..ell).collect();
            raw.push((
                format!("A^{{{},{}}}", i + 1, j + 1),
                BilabelledGraph::new(g, labels.clone(), labels).unwrap(),
            ));
        }
    }
    // 𝑱^s: the first s positions are shared; out-positions s..k-1 are fresh.
    for s in 0..=ell {
        let fresh = ell - s;
        let g = Graph::new(ell + fresh, &[]).unwrap();
        let mut out: Vec<usize> = (0..s).collect();
        out.extend(ell..ell + fresh);
        raw.push((
            format!("J^{{{}}}", s),
            BilabelledGraph::new(g, (0..ell).collect(), out).unwrap(),
        ));
    }
    // 𝑰^ℓ (1-based ℓ in [1, k)): positions ℓ and ℓ+1 carry the same vertex.
    for l in 1..ell {
        // 0-based: positions l-1 and l share vertex l-1; vertex l is deleted.
        let renum = |v: usize| if v < l { v } else { v - 1 };
        let g = Graph::new(ell - 1, &[]).unwrap();
        let labels: Vec<usize> = tuple_with(ell, l, l - 1).into_iter().map(renum).collect();
        raw.push((
            format!("I^{{{}}}", l),
            BilabelledGraph::new(g, labels.clone(), labels).unwrap(),
        ));
    }
    finish(BasalKind::Td, k, ell, raw)
}

/// Dispatch by kind.
pub fn family(kind: BasalKind, k: usize) -> BasalFamily {
    match kind {
        BasalKind::Pw => basal_pw(k),
        BasalKind::Wl => basal_wl(k),
        BasalKind::Td => basal_td(k),
    }
}

// ---------------------------------------------------------------------------
// Sparse tensors.
// ---------------------------------------------------------------------------

/// Sparse 0/1 square tensor over [n]^arity tuple indices: a list of
/// (row, col) positions holding entry 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseTensor {
    pub arity: usize,
    pub n: usize,
    pub dim: usize,
    pub pairs: Vec<(u32, u32)>,
}

impl SparseTensor {
    pub fn empty() -> SparseTensor {
        SparseTensor { arity: 0, n: 0, dim: 0, pairs: Vec::new() }
    }

    /// Matrix–vector product B·v.
    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.dim];
        for &(r, c) in &self.pairs {
            out[r as usize] += &v[c as usize];
        }
        out
    }

    /// Adjoint application Bᵀ·v.
    pub fn apply_transposed(&self, v: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.dim];
        for &(r, c) in &self.pairs {
            out[c as usize] += &v[r as usize];
        }
        out
    }

    /// Dense-matrix right multiplication P·B (P is dim×dim row-major).
    pub fn right_multiply(&self, p: &[BigInt], dim: usize) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); dim * dim];
        for &(r, c) in &self.pairs {
            let (r, c) = (r as usize, c as usize);
            for i in 0..dim {
                let v = &p[i * dim + r];
                if !v.is_zero() {
                    out[i * dim + c] += v;
                }
            }
        }
        out
    }

    /// Densifies into a [`HomTensor`].
    pub fn to_dense(&self) -> HomTensor {
        let mut t = HomTensor::zeros(self.arity, self.arity, self.n)
            .expect("sparse tensor within cap");
        for &(r, c) in &self.pairs {
            t.entries[r as usize * self.dim + c as usize] = BigInt::from(1);
        }
        t
    }
}

/// Sparse homomorphism tensor of a basal member over target `g`, computed from
/// the member's structure: every member has all vertices labelled, so entries
/// are adjacency/equality indicators. Enumerates the n^{|V|} assignments of
/// the member's (few) vertices rather than the n^{2ℓ} tuple pairs.
pub fn basal_pairs(member: &BilabelledGraph, g: &Graph) -> SparseTensor {
    let nv = member.graph.vertex_count();
    let n = g.vertex_count();
    let ell = member.arity_in();
    assert_eq!(ell, member.arity_out(), "basal members are square");
    // All vertices must be labelled for the indicator formula to apply.
    debug_assert!((0..nv)
        .all(|v| member.in_labels.contains(&v) || member.out_labels.contains(&v)));
    let dim = checked_pow(n, ell).expect("tuple space within range");
    let edges = member.graph.edges();
    let mut pairs = Vec::new();
    if n == 0 {
        if nv == 0 {
            // Degenerate: single empty assignment, single (0,0) cell of a
            // 1-dimensional space.
            pairs.push((0, 0));
        }
        return SparseTensor { arity: ell, n, dim: dim.max(1), pairs };
    }
    let total = checked_pow(n, nv).expect("assignment space within range");
    let mut phi = vec![0usize; nv];
    for _ in 0..total {
        if edges.iter().all(|&(u, v)| g.has_edge(phi[u], phi[v])) {
            let row: Vec<usize> = member.in_labels.iter().map(|&v| phi[v]).collect();
            let col: Vec<usize> = member.out_labels.iter().map(|&v| phi[v]).collect();
            pairs.push((tuple_index(&row, n) as u32, tuple_index(&col, n) as u32));
        }
        for i in (0..nv).rev() {
            phi[i] += 1;
            if phi[i] < n {
                break;
            }
            phi[i] = 0;
        }
    }
    pairs.sort_unstable();
    SparseTensor { arity: ell, n, dim, pairs }
}

/// Dense tensor via the sparse fast path; bit-identical to
/// `hom::hom_tensor_bilabelled(member, g)`.
pub fn basal_tensor(member: &BilabelledGraph, g: &Graph) -> HomTensor {
    basal_pairs(member, g).to_dense()
}

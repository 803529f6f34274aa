//! Exact-rational linear systems characterizing homomorphism
//! indistinguishability: builders for the four equation families
//! (F_iso, L^{k+1}_iso, PW^{k+1}, TD^k), a certifying Gaussian solver over ℚ,
//! a phase-1 simplex for non-negative feasibility, and the solution-transport
//! maps (symmetrisation, projection, PW ↔ L_iso, TD level projection).
//!
//! Everything is exact: row coefficients are small integers by construction,
//! the solvers work in arbitrary-precision rationals, and every verdict can be
//! re-checked by substitution (witness) or by a row combination evaluating to
//! 0 = c ≠ 0 (certificate).

use std::collections::HashMap;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::basal::{self, SparseTensor};
use crate::graphs::Graph;
use crate::util::{checked_pow, index_tuple, tuple_index};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Structured variable identity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKey {
    /// X(w⃗, v⃗) with w⃗ over H and v⃗ over G (F_iso: length 1; PW: length k+1).
    MatrixEntry { w: Vec<usize>, v: Vec<usize> },
    /// X_π for a set π ⊆ V(H) × V(G), stored sorted.
    PartialMap(Vec<(usize, usize)>),
    /// TD variable at an explicit level (tuples of that length).
    TupleLevel { level: usize, w: Vec<usize>, v: Vec<usize> },
}

fn fmt_tuple(t: &[usize]) -> String {
    t.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKey::MatrixEntry { w, v } => write!(f, "({}|{})", fmt_tuple(w), fmt_tuple(v)),
            VarKey::TupleLevel { w, v, .. } => write!(f, "({}|{})", fmt_tuple(w), fmt_tuple(v)),
            VarKey::PartialMap(pairs) => {
                let body = pairs
                    .iter()
                    .map(|(w, v)| format!("({},{})", w, v))
                    .collect::<Vec<_>>()
                    .join(",");
                write!(f, "{{{}}}", body)
            }
        }
    }
}

/// A sparse equation Σ coeff·var = rhs. Builder coefficients are small
/// integers; the solvers promote to rationals.
#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<(u32, i64)>,
    pub rhs: i64,
    /// Equation family this row came from.
    pub tag: &'static str,
}

/// A sparse exact system over structured variables.
///
/// Zero-forced variables (L4/TD4 fixings and the analogous diagonal-member
/// forcings of PW) are applied as eliminations: they are flagged in
/// `zero_fixed`, carry value 0 in every witness, and never appear in `rows`.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub vars: Vec<VarKey>,
    /// Non-negativity flags; builders leave them false, `solve_nonneg`
    /// enforces x ≥ 0 for every variable regardless.
    pub nonneg: Vec<bool>,
    pub zero_fixed: Vec<bool>,
    pub rows: Vec<Row>,
}

impl LinearSystem {
    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    /// Index of a key (variables are stored sorted).
    pub fn var_index(&self, key: &VarKey) -> Option<usize> {
        self.vars.binary_search(key).ok()
    }

    /// Dump format: `var <idx> <key> [nonneg]` lines, then
    /// `row <rhs> <idx>:<p>/<q> ...` lines.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, key) in self.vars.iter().enumerate() {
            out.push_str(&format!("var {} {}", i, key));
            if self.nonneg[i] {
                out.push_str(" nonneg");
            }
            if self.zero_fixed[i] {
                out.push_str(" zero");
            }
            out.push('\n');
        }
        for row in &self.rows {
            out.push_str(&format!("row {}", row.rhs));
            for &(var, c) in &row.coeffs {
                out.push_str(&format!(" {}:{}/1", var, c));
            }
            out.push('\n');
        }
        out
    }
}

/// Outcome of a feasibility check. A feasible verdict always carries a
/// witness (indexed like `vars`; zero-fixed variables hold 0); an infeasible
/// rational verdict carries row multipliers combining to 0 = c ≠ 0.
#[derive(Clone, Debug)]
pub struct Feasibility {
    pub feasible: bool,
    pub witness: Option<Vec<BigRational>>,
    pub certificate: Option<Vec<(usize, BigRational)>>,
}

/// Substitutes a candidate witness into every row and checks the zero-fix and
/// (if requested) non-negativity side conditions.
pub fn verify_witness(sys: &LinearSystem, witness: &[BigRational], require_nonneg: bool) -> bool {
    if witness.len() != sys.vars.len() {
        return false;
    }
    for (i, x) in witness.iter().enumerate() {
        if sys.zero_fixed[i] && !x.is_zero() {
            return false;
        }
        if require_nonneg && x.is_negative() {
            return false;
        }
    }
    sys.rows.iter().all(|row| {
        let mut acc = BigRational::zero();
        for &(var, c) in &row.coeffs {
            acc += rat(c) * &witness[var as usize];
        }
        acc == rat(row.rhs)
    })
}

/// Checks that the multipliers combine the rows into 0 = c with c ≠ 0.
pub fn verify_certificate(sys: &LinearSystem, cert: &[(usize, BigRational)]) -> bool {
    let mut combo: HashMap<u32, BigRational> = HashMap::new();
    let mut rhs = BigRational::zero();
    for &(row_idx, ref m) in cert {
        let row = &sys.rows[row_idx];
        for &(var, c) in &row.coeffs {
            *combo.entry(var).or_insert_with(BigRational::zero) += m * rat(c);
        }
        rhs += m * rat(row.rhs);
    }
    combo.values().all(|c| c.is_zero()) && !rhs.is_zero()
}

/// Witness file format: one `X <key> <p>/<q>` line per variable.
pub fn witness_dump(sys: &LinearSystem, witness: &[BigRational]) -> String {
    let mut out = String::new();
    for (key, x) in sys.vars.iter().zip(witness.iter()) {
        out.push_str(&format!("X {} {}/{}\n", key, x.numer(), x.denom()));
    }
    out
}

// ---------------------------------------------------------------------------
// Partial-isomorphism predicates.
// ---------------------------------------------------------------------------

/// π is a partial isomorphism: a partial bijection (vᵢ = vⱼ ⇔ wᵢ = wⱼ) that
/// preserves edges and non-edges.
pub fn is_partial_isomorphism(pairs: &[(usize, usize)], g: &Graph, h: &Graph) -> bool {
    for (a, &(w1, v1)) in pairs.iter().enumerate() {
        for &(w2, v2) in &pairs[a + 1..] {
            if (v1 == v2) != (w1 == w2) {
                return false;
            }
            if g.has_edge(v1, v2) != h.has_edge(w1, w2) {
                return false;
            }
        }
    }
    true
}

/// (w⃗, v⃗) is a partial pseudo-isomorphism: consecutive equalities agree and
/// edges/non-edges agree for all index pairs.
pub fn is_partial_pseudo_isomorphism(w: &[usize], v: &[usize], g: &Graph, h: &Graph) -> bool {
    for i in 1..w.len() {
        if (v[i - 1] == v[i]) != (w[i - 1] == w[i]) {
            return false;
        }
    }
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if g.has_edge(v[i], v[j]) != h.has_edge(w[i], w[j]) {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Builders.
// ---------------------------------------------------------------------------

/// Helper: merge duplicate variables in a row and drop zero coefficients and
/// zero-fixed variables.
fn push_row(
    rows: &mut Vec<Row>,
    mut coeffs: Vec<(u32, i64)>,
    rhs: i64,
    tag: &'static str,
    zero_fixed: &[bool],
) {
    coeffs.retain(|&(var, _)| !zero_fixed[var as usize]);
    coeffs.sort_unstable_by_key(|&(var, _)| var);
    let mut merged: Vec<(u32, i64)> = Vec::with_capacity(coeffs.len());
    for (var, c) in coeffs {
        match merged.last_mut() {
            Some(last) if last.0 == var => last.1 += c,
            _ => merged.push((var, c)),
        }
    }
    merged.retain(|&(_, c)| c != 0);
    if merged.is_empty() && rhs == 0 {
        return;
    }
    rows.push(Row { coeffs: merged, rhs, tag });
}

/// The fractional-isomorphism system F_iso(G, H): doubly-stochastic rows plus
/// commutation X·A_G = A_H·X, over variables X_{w,v}.
pub fn build_fiso(g: &Graph, h: &Graph) -> LinearSystem {
    let ng = g.vertex_count();
    let nh = h.vertex_count();
    let vars: Vec<VarKey> = (0..nh)
        .flat_map(|w| (0..ng).map(move |v| VarKey::MatrixEntry { w: vec![w], v: vec![v] }))
        .collect();
    let idx = |w: usize, v: usize| (w * ng + v) as u32;
    let zero_fixed = vec![false; vars.len()];
    let mut rows = Vec::new();
    for w in 0..nh {
        let coeffs = (0..ng).map(|v| (idx(w, v), 1)).collect();
        push_row(&mut rows, coeffs, 1, "row-sum", &zero_fixed);
    }
    for v in 0..ng {
        let coeffs = (0..nh).map(|w| (idx(w, v), 1)).collect();
        push_row(&mut rows, coeffs, 1, "col-sum", &zero_fixed);
    }
    // (X A_G − A_H X)(w, v) = Σ_{x ~ v} X(w, x) − Σ_{y ~ w} X(y, v) = 0.
    for w in 0..nh {
        for v in 0..ng {
            let mut coeffs: Vec<(u32, i64)> =
                g.neighbours(v).iter().map(|&x| (idx(w, x as usize), 1)).collect();
            coeffs.extend(h.neighbours(w).iter().map(|&y| (idx(y as usize, v), -1)));
            push_row(&mut rows, coeffs, 0, "commute", &zero_fixed);
        }
    }
    let n = vars.len();
    LinearSystem { vars, nonneg: vec![false; n], zero_fixed, rows }
}

/// All subsets of V(H) × V(G) of size ≤ m, as sorted pair vectors in
/// lexicographic order.
fn enumerate_maps(ng: usize, nh: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
    let universe: Vec<(usize, usize)> =
        (0..nh).flat_map(|w| (0..ng).map(move |v| (w, v))).collect();
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for _ in 0..m {
        let mut next = Vec::new();
        for base in &frontier {
            let start = base
                .last()
                .map_or(0, |p| universe.iter().position(|q| q == p).unwrap() + 1);
            for &pair in &universe[start..] {
                let mut ext = base.clone();
                ext.push(pair);
                next.push(ext);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.sort();
    out
}

/// The Sherali–Adams-style system L^{k+1}_iso(G, H) over set variables X_π,
/// |π| ≤ k+1: marginalization rows L1/L2 for |π| ≤ k, normalization L3, and
/// L4 zero-fixings of non-partial-isomorphisms (applied as eliminations).
pub fn build_liso(g: &Graph, h: &Graph, k: usize) -> LinearSystem {
    assert!(k >= 1);
    let ng = g.vertex_count();
    let nh = h.vertex_count();
    let maps = enumerate_maps(ng, nh, k + 1);
    let vars: Vec<VarKey> = maps.iter().map(|m| VarKey::PartialMap(m.clone())).collect();
    let index: HashMap<&Vec<(usize, usize)>, u32> =
        maps.iter().enumerate().map(|(i, m)| (m, i as u32)).collect();
    let zero_fixed: Vec<bool> =
        maps.iter().map(|m| !is_partial_isomorphism(m, g, h)).collect();
    let union_of = |base: &Vec<(usize, usize)>, pair: (usize, usize)| -> Vec<(usize, usize)> {
        if base.contains(&pair) {
            return base.clone();
        }
        let mut ext = base.clone();
        ext.push(pair);
        ext.sort_unstable();
        ext
    };
    let mut rows = Vec::new();
    for pi in maps.iter().filter(|m| m.len() <= k) {
        let pi_idx = index[pi];
        for w in 0..nh {
            let mut coeffs: Vec<(u32, i64)> =
                (0..ng).map(|v| (index[&union_of(pi, (w, v))], 1)).collect();
            coeffs.push((pi_idx, -1));
            push_row(&mut rows, coeffs, 0, "L1", &zero_fixed);
        }
        for v in 0..ng {
            let mut coeffs: Vec<(u32, i64)> =
                (0..nh).map(|w| (index[&union_of(pi, (w, v))], 1)).collect();
            coeffs.push((pi_idx, -1));
            push_row(&mut rows, coeffs, 0, "L2", &zero_fixed);
        }
    }
    let empty = index[&Vec::new()];
    push_row(&mut rows, vec![(empty, 1)], 1, "L3", &zero_fixed);
    let n = vars.len();
    LinearSystem { vars, nonneg: vec![false; n], zero_fixed, rows }
}

/// Whether a sparse tensor is diagonal (all entries on tuple-pairs (t, t)).
fn diagonal_indicator(t: &SparseTensor) -> Option<Vec<bool>> {
    let mut diag = vec![false; t.dim];
    for &(r, c) in &t.pairs {
        if r != c {
            return None;
        }
        diag[r as usize] = true;
    }
    Some(diag)
}

/// Variable layout shared by PW witnesses: index = w_idx · dim_G + v_idx with
/// tuple indices in row-major order.
fn pw_vars(ng: usize, nh: usize, ell: usize) -> Vec<VarKey> {
    let dim_g = checked_pow(ng, ell).expect("tuple space in range");
    let dim_h = checked_pow(nh, ell).expect("tuple space in range");
    let mut vars = Vec::with_capacity(dim_g * dim_h);
    for wi in 0..dim_h {
        let w = index_tuple(wi, nh, ell);
        for vi in 0..dim_g {
            vars.push(VarKey::MatrixEntry { w: w.clone(), v: index_tuple(vi, ng, ell) });
        }
    }
    vars
}

/// The pathwidth system PW^{k+1}(G, H): commutation X·B_G = B_H·X for every
/// basal member B ∈ B^k plus pseudo-stochasticity. Rows coming from diagonal
/// members are singleton forcings X(w⃗, v⃗) = 0 and are applied as
/// eliminations, mirroring the L4 treatment.
pub fn build_pw(g: &Graph, h: &Graph, k: usize) -> LinearSystem {
    assert!(k >= 1);
    let ng = g.vertex_count();
    let nh = h.vertex_count();
    let ell = k + 1;
    let dim_g = checked_pow(ng, ell).expect("tuple space in range");
    let dim_h = checked_pow(nh, ell).expect("tuple space in range");
    let nvars = dim_g.checked_mul(dim_h).expect("variable count in range");
    assert!(nvars <= crate::entry_cap(), "system exceeds the entry cap");
    let vars = pw_vars(ng, nh, ell);
    let idx = |wi: usize, vi: usize| (wi * dim_g + vi) as u32;

    let fam = basal::basal_pw(k);
    let tensors_g: Vec<SparseTensor> =
        fam.members.iter().map(|m| basal::basal_pairs(m, g)).collect();
    let tensors_h: Vec<SparseTensor> =
        fam.members.iter().map(|m| basal::basal_pairs(m, h)).collect();

    // Diagonal members force X(w⃗, v⃗) = 0 whenever the G- and H-indicators
    // disagree.
    let mut zero_fixed = vec![false; nvars];
    for (tg, th) in tensors_g.iter().zip(tensors_h.iter()) {
        if let (Some(dg), Some(dh)) = (diagonal_indicator(tg), diagonal_indicator(th)) {
            for wi in 0..dim_h {
                for vi in 0..dim_g {
                    if dg[vi] != dh[wi] {
                        zero_fixed[wi * dim_g + vi] = true;
                    }
                }
            }
        }
    }

    let mut rows = Vec::new();
    for (tg, th) in tensors_g.iter().zip(tensors_h.iter()) {
        if diagonal_indicator(tg).is_some() && diagonal_indicator(th).is_some() {
            continue; // already applied as eliminations
        }
        // Column lists of B_G and row lists of B_H.
        let mut col_g: Vec<Vec<u32>> = vec![Vec::new(); dim_g];
        for &(r, c) in &tg.pairs {
            col_g[c as usize].push(r);
        }
        let mut row_h: Vec<Vec<u32>> = vec![Vec::new(); dim_h];
        for &(r, c) in &th.pairs {
            row_h[r as usize].push(c);
        }
        for wi in 0..dim_h {
            for vi in 0..dim_g {
                let mut coeffs: Vec<(u32, i64)> =
                    col_g[vi].iter().map(|&x| (idx(wi, x as usize), 1)).collect();
                coeffs.extend(row_h[wi].iter().map(|&y| (idx(y as usize, vi), -1)));
                push_row(&mut rows, coeffs, 0, "commute", &zero_fixed);
            }
        }
    }
    for wi in 0..dim_h {
        let coeffs = (0..dim_g).map(|vi| (idx(wi, vi), 1)).collect();
        push_row(&mut rows, coeffs, 1, "ps-row", &zero_fixed);
    }
    for vi in 0..dim_g {
        let coeffs = (0..dim_h).map(|wi| (idx(wi, vi), 1)).collect();
        push_row(&mut rows, coeffs, 1, "ps-col", &zero_fixed);
    }
    LinearSystem { vars, nonneg: vec![false; nvars], zero_fixed, rows }
}

/// The treedepth system TD^k(G, H) over levelled tuple variables:
/// marginalization TD1/TD2 below the top level, normalization TD3, and TD4
/// zero-fixings of non-partial-pseudo-isomorphisms at every level (applied as
/// eliminations).
pub fn build_td(g: &Graph, h: &Graph, k: usize) -> LinearSystem {
    assert!(k >= 1);
    let ng = g.vertex_count();
    let nh = h.vertex_count();
    // Level offsets in the variable layout (levels are ordered 0..=k and the
    // derived VarKey order within a level is row-major (w, v), matching the
    // global sort because shorter tuples compare first).
    let mut offsets = Vec::with_capacity(k + 2);
    let mut total = 0usize;
    for l in 0..=k {
        offsets.push(total);
        let dg = checked_pow(ng, l).expect("tuple space in range");
        let dh = checked_pow(nh, l).expect("tuple space in range");
        total += dg * dh;
    }
    offsets.push(total);
    assert!(total <= crate::entry_cap(), "system exceeds the entry cap");

    let mut vars = Vec::with_capacity(total);
    let mut zero_fixed = Vec::with_capacity(total);
    for l in 0..=k {
        let dg = checked_pow(ng, l).unwrap();
        let dh = checked_pow(nh, l).unwrap();
        for wi in 0..dh {
            let w = index_tuple(wi, nh, l);
            for vi in 0..dg {
                let v = index_tuple(vi, ng, l);
                zero_fixed.push(!is_partial_pseudo_isomorphism(&w, &v, g, h));
                vars.push(VarKey::TupleLevel { level: l, w: w.clone(), v });
            }
        }
    }
    let idx = |l: usize, wi: usize, vi: usize| {
        let dg = checked_pow(ng, l).unwrap();
        (offsets[l] + wi * dg + vi) as u32
    };

    let mut rows = Vec::new();
    for l in 0..k {
        let dg = checked_pow(ng, l).unwrap();
        let dh = checked_pow(nh, l).unwrap();
        for wi in 0..dh {
            for vi in 0..dg {
                let this = idx(l, wi, vi);
                // TD1: Σ_{v'} X(w⃗w, v⃗v') = X(w⃗, v⃗) for each w.
                for w in 0..nh {
                    let mut coeffs: Vec<(u32, i64)> = (0..ng)
                        .map(|vp| (idx(l + 1, wi * nh + w, vi * ng + vp), 1))
                        .collect();
                    coeffs.push((this, -1));
                    push_row(&mut rows, coeffs, 0, "TD1", &zero_fixed);
                }
                // TD2: Σ_{w'} X(w⃗w', v⃗v) = X(w⃗, v⃗) for each v.
                for v in 0..ng {
                    let mut coeffs: Vec<(u32, i64)> = (0..nh)
                        .map(|wp| (idx(l + 1, wi * nh + wp, vi * ng + v), 1))
                        .collect();
                    coeffs.push((this, -1));
                    push_row(&mut rows, coeffs, 0, "TD2", &zero_fixed);
                }
            }
        }
    }
    push_row(&mut rows, vec![(idx(0, 0, 0), 1)], 1, "TD3", &zero_fixed);
    let n = vars.len();
    LinearSystem { vars, nonneg: vec![false; n], zero_fixed, rows }
}

// ---------------------------------------------------------------------------
// Rational solver (certifying Gaussian elimination).
// ---------------------------------------------------------------------------

/// A frozen pivot row: variable `var` with unit coefficient plus a tail of
/// larger variables. `scale` and `history` record how it was derived from the
/// original rows so infeasibility certificates can be expanded.
struct PivotRow {
    var: u32,
    coeffs: Vec<(u32, BigRational)>, // sorted, leading (var, 1)
    rhs: BigRational,
    origin: usize,
    scale: BigRational,
    history: Vec<(usize, BigRational)>, // (pivot id, multiplier) eliminated before freezing
}

struct Elimination {
    pivots: Vec<PivotRow>,
    pivot_of_var: HashMap<u32, usize>,
}

enum ElimOutcome {
    Done(Elimination),
    Contradiction(Vec<(usize, BigRational)>),
}

/// Forward-only elimination: rows are processed sparsest-first, each reduced
/// against existing pivots and then frozen as the pivot for its smallest
/// remaining variable. Pivot rows are never revisited, which keeps fill-in
/// local; witnesses come from back-substitution in decreasing variable order.
fn eliminate(sys: &LinearSystem) -> ElimOutcome {
    let mut order: Vec<usize> = (0..sys.rows.len()).collect();
    order.sort_by_key(|&i| (sys.rows[i].coeffs.len(), i));
    let mut elim = Elimination { pivots: Vec::new(), pivot_of_var: HashMap::new() };
    for ri in order {
        let row = &sys.rows[ri];
        let mut work: std::collections::BTreeMap<u32, BigRational> = row
            .coeffs
            .iter()
            .map(|&(var, c)| (var, rat(c)))
            .collect();
        let mut rhs = rat(row.rhs);
        let mut history: Vec<(usize, BigRational)> = Vec::new();
        loop {
            // Clean leading zeros.
            while let Some((&var, c)) = work.iter().next() {
                if c.is_zero() {
                    work.remove(&var);
                } else {
                    break;
                }
            }
            let Some((&var, _)) = work.iter().next() else {
                break;
            };
            if let Some(&pid) = elim.pivot_of_var.get(&var) {
                let m = work.remove(&var).unwrap();
                let pivot = &elim.pivots[pid];
                for (pv, pc) in pivot.coeffs.iter().skip(1) {
                    let entry = work.entry(*pv).or_insert_with(BigRational::zero);
                    *entry -= &m * pc;
                    if entry.is_zero() {
                        work.remove(pv);
                    }
                }
                rhs -= &m * &pivot.rhs;
                history.push((pid, m));
            } else {
                // Freeze as a new pivot, normalized to leading coefficient 1.
                let lead = work.get(&var).unwrap().clone();
                let coeffs: Vec<(u32, BigRational)> =
                    work.iter().map(|(&v, c)| (v, c / &lead)).collect();
                let pid = elim.pivots.len();
                elim.pivots.push(PivotRow {
                    var,
                    coeffs,
                    rhs: &rhs / &lead,
                    origin: ri,
                    scale: BigRational::one() / lead,
                    history: std::mem::take(&mut history),
                });
                elim.pivot_of_var.insert(var, pid);
                break;
            }
        }
        if elim.pivots.last().map_or(true, |p| p.origin != ri) {
            // Row fully reduced away; contradiction iff rhs survived.
            if !rhs.is_zero() {
                return ElimOutcome::Contradiction(expand_certificate(&elim, ri, &history));
            }
        }
    }
    ElimOutcome::Done(elim)
}

/// Expands "original row `origin` minus Σ mult·pivot" into multipliers over
/// the original rows by reverse accumulation through the pivot DAG.
fn expand_certificate(
    elim: &Elimination,
    origin: usize,
    history: &[(usize, BigRational)],
) -> Vec<(usize, BigRational)> {
    let mut orig: HashMap<usize, BigRational> = HashMap::new();
    orig.insert(origin, BigRational::one());
    let mut acc: HashMap<usize, BigRational> = HashMap::new();
    for (pid, m) in history {
        *acc.entry(*pid).or_insert_with(BigRational::zero) -= m;
    }
    // Pivot rows only reference earlier pivots, so one descending sweep
    // suffices.
    for pid in (0..elim.pivots.len()).rev() {
        let Some(c) = acc.remove(&pid) else { continue };
        if c.is_zero() {
            continue;
        }
        let p = &elim.pivots[pid];
        // P = scale · (orig_row − Σ history m·P'), so a coefficient c on P
        // contributes c·scale to the origin and −c·scale·m to each earlier P'.
        let cs = &c * &p.scale;
        *orig.entry(p.origin).or_insert_with(BigRational::zero) += &cs;
        for (qid, m) in &p.history {
            *acc.entry(*qid).or_insert_with(BigRational::zero) -= &cs * m;
        }
    }
    let mut cert: Vec<(usize, BigRational)> =
        orig.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    cert.sort_by_key(|&(i, _)| i);
    cert
}

/// Witness from an elimination: free variables 0, pivots by back-substitution
/// in decreasing variable order (pivot tails only reference larger variables).
fn witness_from(elim: &Elimination, sys: &LinearSystem) -> Vec<BigRational> {
    let mut x = vec![BigRational::zero(); sys.vars.len()];
    let mut pids: Vec<usize> = (0..elim.pivots.len()).collect();
    pids.sort_by_key(|&p| std::cmp::Reverse(elim.pivots[p].var));
    for pid in pids {
        let p = &elim.pivots[pid];
        let mut val = p.rhs.clone();
        for (v, c) in p.coeffs.iter().skip(1) {
            val -= c * &x[*v as usize];
        }
        x[p.var as usize] = val;
    }
    x
}

/// Exact rational feasibility, ignoring non-negativity. Deterministic:
/// sparsest-first row order, smallest-variable pivoting.
pub fn solve_rational(sys: &LinearSystem) -> Feasibility {
    match eliminate(sys) {
        ElimOutcome::Contradiction(cert) => {
            debug_assert!(verify_certificate(sys, &cert));
            Feasibility { feasible: false, witness: None, certificate: Some(cert) }
        }
        ElimOutcome::Done(elim) => {
            let x = witness_from(&elim, sys);
            debug_assert!(verify_witness(sys, &x, false));
            Feasibility { feasible: true, witness: Some(x), certificate: None }
        }
    }
}

// ---------------------------------------------------------------------------
// Non-negative solver (phase-1 simplex with Bland's rule).
// ---------------------------------------------------------------------------

/// Exact non-negative feasibility: every variable is required ≥ 0. Runs the
/// rational elimination first (an infeasible equality system is certainly
/// nonneg-infeasible, and an already-non-negative witness needs no simplex),
/// then a phase-1 simplex with Bland's rule on the reduced pivot system.
pub fn solve_nonneg(sys: &LinearSystem) -> Feasibility {
    let elim = match eliminate(sys) {
        ElimOutcome::Contradiction(cert) => {
            debug_assert!(verify_certificate(sys, &cert));
            return Feasibility { feasible: false, witness: None, certificate: Some(cert) };
        }
        ElimOutcome::Done(e) => e,
    };
    let x = witness_from(&elim, sys);
    if x.iter().all(|v| !v.is_negative()) {
        debug_assert!(verify_witness(sys, &x, true));
        return Feasibility { feasible: true, witness: Some(x), certificate: None };
    }

    // Active variables: everything mentioned by a pivot row. Inactive
    // variables are unconstrained and can sit at 0.
    let mut active: Vec<u32> = Vec::new();
    {
        let mut seen = std::collections::HashSet::new();
        for p in &elim.pivots {
            for (v, _) in &p.coeffs {
                if seen.insert(*v) {
                    active.push(*v);
                }
            }
        }
    }
    active.sort_unstable();
    let col_of: HashMap<u32, usize> =
        active.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = active.len();
    let m = elim.pivots.len();

    // Tableau rows: [structural columns | rhs], with b ≥ 0 after sign flips;
    // the initial basis is one artificial variable per row.
    let mut tab: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    for p in &elim.pivots {
        let mut row = vec![BigRational::zero(); n + 1];
        for (v, c) in &p.coeffs {
            row[col_of[v]] = c.clone();
        }
        row[n] = p.rhs.clone();
        if row[n].is_negative() {
            for e in row.iter_mut() {
                *e = -e.clone();
            }
        }
        tab.push(row);
    }
    // basis[i]: Some(col) for a structural variable, None for the artificial.
    let mut basis: Vec<Option<usize>> = vec![None; m];
    // Phase-1 objective: minimize the sum of artificials. Reduced costs for
    // structural columns equal the column sums over artificial rows.
    let mut cost: Vec<BigRational> = (0..=n)
        .map(|j| {
            let mut s = BigRational::zero();
            for i in 0..m {
                if basis[i].is_none() {
                    s += &tab[i][j];
                }
            }
            s
        })
        .collect();

    loop {
        // Bland: entering = smallest structural column with positive reduced
        // cost.
        let Some(enter) = (0..n).find(|&j| cost[j].is_positive()) else {
            break;
        };
        // Ratio test over positive column entries; Bland tie-break on the
        // smallest leaving identity (artificials first by row index).
        let mut leave: Option<usize> = None;
        let mut best: Option<BigRational> = None;
        for i in 0..m {
            if tab[i][enter].is_positive() {
                let ratio = &tab[i][n] / &tab[i][enter];
                let better = match &best {
                    None => true,
                    Some(b) => {
                        ratio < *b
                            || (ratio == *b
                                && basis[i].map_or(-1i64, |c| c as i64)
                                    < basis[leave.unwrap()].map_or(-1i64, |c| c as i64))
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(li) = leave else {
            // Unbounded phase-1 objective cannot happen (bounded below by 0);
            // an empty column means the variable is unconstrained positive.
            break;
        };
        // Pivot (li, enter).
        let piv = tab[li][enter].clone();
        for e in tab[li].iter_mut() {
            *e = &*e / &piv;
        }
        for i in 0..m {
            if i != li && !tab[i][enter].is_zero() {
                let f = tab[i][enter].clone();
                for j in 0..=n {
                    let d = &f * &tab[li][j];
                    tab[i][j] -= d;
                }
            }
        }
        if !cost[enter].is_zero() {
            let f = cost[enter].clone();
            for j in 0..=n {
                let d = &f * &tab[li][j];
                cost[j] -= d;
            }
        }
        basis[li] = Some(enter);
    }

    // Feasible iff every artificial (rows still basic in an artificial) sits
    // at 0, i.e. the phase-1 objective value is 0.
    let residual: BigRational = (0..m)
        .filter(|&i| basis[i].is_none())
        .map(|i| tab[i][n].clone())
        .sum();
    if !residual.is_zero() {
        return Feasibility { feasible: false, witness: None, certificate: None };
    }
    let mut witness = vec![BigRational::zero(); sys.vars.len()];
    for i in 0..m {
        if let Some(col) = basis[i] {
            witness[active[col] as usize] = tab[i][n].clone();
        }
    }
    debug_assert!(verify_witness(sys, &witness, true));
    Feasibility { feasible: true, witness: Some(witness), certificate: None }
}

// ---------------------------------------------------------------------------
// Transport maps.
// ---------------------------------------------------------------------------

/// The 0/1 solution candidate induced by an isomorphism σ: V(G) → V(H):
/// value 1 exactly on the σ-consistent variable patterns.
pub fn permutation_witness(sys: &LinearSystem, sigma: &[usize]) -> Vec<BigRational> {
    sys.vars
        .iter()
        .enumerate()
        .map(|(i, key)| {
            if sys.zero_fixed[i] {
                return BigRational::zero();
            }
            let consistent = match key {
                VarKey::MatrixEntry { w, v } | VarKey::TupleLevel { w, v, .. } => {
                    w.iter().zip(v).all(|(&wi, &vi)| sigma[vi] == wi)
                }
                VarKey::PartialMap(pairs) => pairs.iter().all(|&(wi, vi)| sigma[vi] == wi),
            };
            if consistent {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        })
        .collect()
}

/// `solve_nonneg` with cheap shortcuts: an infeasible rational relaxation, a
/// rational witness that already happens to be non-negative, or a supplied
/// isomorphism each settle the question without the simplex phase. `rational`
/// must be the `solve_rational` outcome for the same system.
pub fn solve_nonneg_hinted(
    sys: &LinearSystem,
    rational: &Feasibility,
    sigma: Option<&[usize]>,
) -> Feasibility {
    if !rational.feasible {
        return rational.clone();
    }
    if let Some(w) = &rational.witness {
        if w.iter().all(|x| !x.is_negative()) {
            return rational.clone();
        }
    }
    if let Some(s) = sigma {
        let w = permutation_witness(sys, s);
        if verify_witness(sys, &w, true) {
            return Feasibility { feasible: true, witness: Some(w), certificate: None };
        }
    }
    solve_nonneg(sys)
}

fn permutations_of(ell: usize) -> Vec<Vec<usize>> {
    if ell == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations_of(ell - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, ell - 1);
            out.push(q);
        }
    }
    out
}

/// PW witnesses are dense matrices indexed (w-tuple-rank · dim_G + v-tuple-rank).
pub fn pw_witness_len(ng: usize, nh: usize, ell: usize) -> usize {
    checked_pow(ng, ell).unwrap() * checked_pow(nh, ell).unwrap()
}

/// Averages a PW^ℓ solution over the simultaneous S_ℓ action on both tuples;
/// the result is again a solution and is symmetrical.
pub fn symmetrise_solution(
    x: &[BigRational],
    ell: usize,
    ng: usize,
    nh: usize,
) -> Vec<BigRational> {
    let dim_g = checked_pow(ng, ell).unwrap();
    let dim_h = checked_pow(nh, ell).unwrap();
    assert_eq!(x.len(), dim_g * dim_h);
    let perms = permutations_of(ell);
    let count = rat(perms.len() as i64);
    let mut out = vec![BigRational::zero(); x.len()];
    for wi in 0..dim_h {
        let w = index_tuple(wi, nh, ell);
        for vi in 0..dim_g {
            let v = index_tuple(vi, ng, ell);
            let mut acc = BigRational::zero();
            for sigma in &perms {
                let wp: Vec<usize> = sigma.iter().map(|&i| w[i]).collect();
                let vp: Vec<usize> = sigma.iter().map(|&i| v[i]).collect();
                acc += &x[tuple_index(&wp, nh) * dim_g + tuple_index(&vp, ng)];
            }
            out[wi * dim_g + vi] = acc / &count;
        }
    }
    out
}

/// Projects a symmetrical PW^ℓ solution (ℓ ≥ 2) to a symmetrical PW^{ℓ−1}
/// solution: X̆(w⃗, v⃗) = (1/(ℓ−1)) Σ_{i} X(w⃗wᵢ, v⃗vᵢ).
pub fn project_solution(
    x: &[BigRational],
    ell: usize,
    ng: usize,
    nh: usize,
) -> Vec<BigRational> {
    assert!(ell >= 2);
    let dim_g = checked_pow(ng, ell).unwrap();
    let dim_h = checked_pow(nh, ell).unwrap();
    assert_eq!(x.len(), dim_g * dim_h);
    let sg = checked_pow(ng, ell - 1).unwrap();
    let sh = checked_pow(nh, ell - 1).unwrap();
    let mut out = vec![BigRational::zero(); sg * sh];
    let denom = rat((ell - 1) as i64);
    for wi in 0..sh {
        let w = index_tuple(wi, nh, ell - 1);
        for vi in 0..sg {
            let v = index_tuple(vi, ng, ell - 1);
            let mut acc = BigRational::zero();
            for i in 0..ell - 1 {
                let mut we = w.clone();
                we.push(w[i]);
                let mut ve = v.clone();
                ve.push(v[i]);
                acc += &x[tuple_index(&we, nh) * dim_g + tuple_index(&ve, ng)];
            }
            out[wi * sg + vi] = acc / &denom;
        }
    }
    out
}

/// Transports a PW^{k+1} solution to an L^{k+1}_iso assignment, aligned with
/// `liso.vars`: symmetrise, derive the projected chain X^ℓ for ℓ ≤ k+1, and
/// set Y_π = X^{|π|}(sorted π), Y_∅ = 1.
pub fn pw_to_liso(
    x: &[BigRational],
    k: usize,
    g: &Graph,
    h: &Graph,
    liso: &LinearSystem,
) -> Vec<BigRational> {
    let ng = g.vertex_count();
    let nh = h.vertex_count();
    let mut chain: Vec<Vec<BigRational>> = Vec::with_capacity(k + 1);
    let mut cur = symmetrise_solution(x, k + 1, ng, nh);
    chain.push(cur.clone()); // level k+1 at chain[0]
    for ell in (2..=k + 1).rev() {
        cur = project_solution(&cur, ell, ng, nh);
        chain.push(cur.clone());
    }
    chain.reverse(); // chain[ℓ-1] = solution over ℓ-tuples
    let mut y = vec![BigRational::zero(); liso.vars.len()];
    for (i, key) in liso.vars.iter().enumerate() {
        let VarKey::PartialMap(pairs) = key else { panic!("liso variable expected") };
        if pairs.is_empty() {
            y[i] = BigRational::one();
            continue;
        }
        let ell = pairs.len();
        let w: Vec<usize> = pairs.iter().map(|&(w, _)| w).collect();
        let v: Vec<usize> = pairs.iter().map(|&(_, v)| v).collect();
        let dim_g = checked_pow(ng, ell).unwrap();
        y[i] = chain[ell - 1][tuple_index(&w, nh) * dim_g + tuple_index(&v, ng)].clone();
    }
    y
}

/// Transports an L^{k+1}_iso solution to a PW^{k+1} assignment:
/// X(w⃗, v⃗) = Y_{{(wᵢ, vᵢ)}}.
pub fn liso_to_pw(
    y: &[BigRational],
    k: usize,
    g: &Graph,
    h: &Graph,
    liso: &LinearSystem,
) -> Vec<BigRational> {
    let ng = g.vertex_count();
    let nh = h.vertex_count();
    let ell = k + 1;
    let dim_g = checked_pow(ng, ell).unwrap();
    let dim_h = checked_pow(nh, ell).unwrap();
    let mut x = vec![BigRational::zero(); dim_g * dim_h];
    for wi in 0..dim_h {
        let w = index_tuple(wi, nh, ell);
        for vi in 0..dim_g {
            let v = index_tuple(vi, ng, ell);
            let mut pairs: Vec<(usize, usize)> =
                w.iter().zip(v.iter()).map(|(&a, &b)| (a, b)).collect();
            pairs.sort_unstable();
            pairs.dedup();
            let key = VarKey::PartialMap(pairs);
            let idx = liso.var_index(&key).expect("pair set within liso range");
            x[wi * dim_g + vi] = y[idx].clone();
        }
    }
    x
}

/// Projects a TD-style level-ℓ block down one level:
/// X̆(w⃗, v⃗) = Σ_{v'} X(w⃗w, v⃗v'), which must not depend on the choice of w.
/// Reports the violating (w⃗, v⃗, w, w') quadruple rendered as a string if it
/// does.
pub fn td_project(
    x: &[BigRational],
    ell: usize,
    ng: usize,
    nh: usize,
) -> Result<Vec<BigRational>, String> {
    assert!(ell >= 1);
    let dim_g = checked_pow(ng, ell).unwrap();
    let dim_h = checked_pow(nh, ell).unwrap();
    assert_eq!(x.len(), dim_g * dim_h);
    let sg = checked_pow(ng, ell - 1).unwrap();
    let sh = checked_pow(nh, ell - 1).unwrap();
    let mut out = vec![BigRational::zero(); sg * sh];
    for wi in 0..sh {
        for vi in 0..sg {
            let mut first: Option<BigRational> = None;
            for w in 0..nh {
                let mut acc = BigRational::zero();
                for vp in 0..ng {
                    acc += &x[(wi * nh + w) * dim_g + (vi * ng + vp)];
                }
                match &first {
                    None => first = Some(acc),
                    Some(f) => {
                        if *f != acc {
                            return Err(format!(
                                "projection depends on w at block ({wi}|{vi}): {f} vs {acc}"
                            ));
                        }
                    }
                }
            }
            out[wi * sg + vi] = first.unwrap_or_else(BigRational::zero);
        }
    }
    Ok(out)
}

/// Slice of a TD witness corresponding to one level, in the dense layout used
/// by the transport maps.
pub fn td_level_block(
    sys: &LinearSystem,
    witness: &[BigRational],
    level: usize,
    ng: usize,
    nh: usize,
) -> Vec<BigRational> {
    let dg = checked_pow(ng, level).unwrap();
    let dh = checked_pow(nh, level).unwrap();
    let mut offset = 0usize;
    for l in 0..level {
        offset += checked_pow(ng, l).unwrap() * checked_pow(nh, l).unwrap();
    }
    debug_assert!(matches!(&sys.vars[offset], VarKey::TupleLevel { level: l, .. } if *l == level));
    witness[offset..offset + dg * dh].to_vec()
}

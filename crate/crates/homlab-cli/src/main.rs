//! Command-line surface for the homlab library: homomorphism counting,
//! width parameters, basal families, linear-system feasibility, Weisfeiler–
//! Leman comparison, indistinguishability testers, counterexample generation,
//! and batch pair/corpus reports.
//!
//! Exit codes: 0 = all checks consistent / pair indistinguishable,
//! 1 = pair distinguished (single-pair mode), 2 = usage or parse error,
//! 3 = internal consistency violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use homlab::basal;
use homlab::counterexamples::{
    generate_degree_pair, meta_text, verify_degree_pair, VerifyBounds,
};
use homlab::graphs::{
    self, enumerate_graphs, format_bilabelled, format_graph, format_labelled, parse_graph, Graph,
    ParsedGraph,
};
use homlab::hom::{
    hom_count, hom_tensor_bilabelled, hom_tensor_labelled, BasalKind, EvalMode,
};
use homlab::linsys::{
    build_fiso, build_liso, build_pw, build_td, solve_nonneg_hinted, solve_rational,
    verify_certificate, verify_witness, witness_dump, Feasibility, LinearSystem,
};
use homlab::spectra::{
    basal_tensor_families, family_enumerate, gram_indistinguishable, words_equivalent, FamilySpec,
    WordVerdict,
};
use homlab::widths::{
    compile_pathwidth_word, compile_treedepth_word, pathwidth, treedepth, treewidth,
};
use homlab::wl::wl_compare;

#[derive(Parser)]
#[command(name = "homlab", version, about = "Homomorphism-indistinguishability laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum WidthParam {
    Tw,
    Pw,
    Td,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Pw,
    Wl,
    Td,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Fiso,
    Liso,
    Pw,
    Td,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact homomorphism count hom(F, G), or the hom tensor if F is labelled.
    Hom { f: PathBuf, g: PathBuf },
    /// Homomorphism tensor dump of a (bi)labelled graph into a target.
    Tensor { f: PathBuf, g: PathBuf },
    /// Width parameters (treewidth / pathwidth / treedepth); optionally
    /// compile the width-k basal word witnessing pw or td.
    Width {
        #[arg(long, value_enum)]
        param: WidthParam,
        /// Compile the basal word for this width (pw/td only).
        #[arg(long)]
        word_k: Option<usize>,
        g: PathBuf,
    },
    /// List the members of a basal generator family.
    Basal {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        k: usize,
        /// Print the members (graph file format with `# id name` headers).
        #[arg(long, default_value_t = true)]
        list: bool,
    },
    /// Feasibility of one of the linear systems; exit 0 feasible, 1 not.
    Check {
        #[arg(long, value_enum)]
        system: SystemArg,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Require a non-negative solution.
        #[arg(long)]
        nonneg: bool,
        /// Override the desk-scale guardrails (k ≤ 2, ≤ 6 vertices).
        #[arg(long)]
        force: bool,
        g: PathBuf,
        h: PathBuf,
    },
    /// k-Weisfeiler–Leman comparison; exit 0 indistinguishable, 1 not.
    Wl {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        force: bool,
        g: PathBuf,
        h: PathBuf,
    },
    /// Homomorphism indistinguishability over a graph family; exit 0/1.
    Indist {
        /// paths | trees | dary:D | pathwidth:K | treedepth:K | cyclewidth:K
        #[arg(long)]
        family: String,
        /// Size bound for enumeration-based families (default 6).
        #[arg(long)]
        bound: Option<usize>,
        /// Word-length bound for cyclewidth (trace) mode.
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        force: bool,
        g: PathBuf,
        h: PathBuf,
    },
    /// Constructive generators.
    Gen {
        #[command(subcommand)]
        what: GenCmd,
    },
    /// Enumerate a graph family up to a size bound.
    Enum {
        /// paths | trees | dary:D | pathwidth:K | treedepth:K
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 6)]
        bound: usize,
    },
    /// Full pair report: every decision procedure up to k_max, cross-checked.
    Report {
        #[arg(long, default_value_t = 2)]
        k_max: usize,
        #[arg(long)]
        force: bool,
        g: PathBuf,
        h: PathBuf,
    },
    /// Batch run over a corpus file; exit 3 on any consistency violation.
    Corpus { file: PathBuf },
}

#[derive(Subcommand)]
enum GenCmd {
    /// Pair of graphs indistinguishable over degree-(d+1) trees yet
    /// distinguished by a star; writes <P>_G.g, <P>_H.g, <P>_meta.txt.
    PtmPair {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out_prefix: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<ParsedGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_graph(&text).map_err(|e| anyhow!("parsing {}: {e}", path.display()))
}

fn load_plain(path: &Path) -> Result<Graph> {
    match load(path)? {
        ParsedGraph::Plain(g) => Ok(g),
        _ => bail!("{}: expected an unlabelled graph", path.display()),
    }
}

/// Desk-scale guardrails shared by the decision subcommands.
fn guard(force: bool, k: usize, graphs: &[&Graph]) -> Result<()> {
    if force {
        return Ok(());
    }
    if k >= 3 {
        bail!("k = {k} exceeds the desk-scale guardrail (k <= 2); pass --force to override");
    }
    for g in graphs {
        if g.vertex_count() > 6 {
            bail!(
                "graph on {} vertices exceeds the desk-scale guardrail (<= 6); pass --force to override",
                g.vertex_count()
            );
        }
    }
    Ok(())
}

fn parse_family(s: &str) -> Result<(String, usize)> {
    match s.split_once(':') {
        None => Ok((s.to_string(), 0)),
        Some((name, p)) => {
            let v: usize = p.parse().with_context(|| format!("bad family parameter in {s:?}"))?;
            Ok((name.to_string(), v))
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Hom { f, g } => {
            let target = load_plain(&g)?;
            match load(&f)? {
                ParsedGraph::Plain(pat) => println!("hom {}", hom_count(&pat, &target)),
                ParsedGraph::Labelled(pat) => {
                    print!("{}", hom_tensor_labelled(&pat, &target)?.dump())
                }
                ParsedGraph::Bilabelled(pat) => {
                    print!("{}", hom_tensor_bilabelled(&pat, &target)?.dump())
                }
            }
            Ok(0)
        }
        Cmd::Tensor { f, g } => {
            let target = load_plain(&g)?;
            let tensor = match load(&f)? {
                ParsedGraph::Plain(pat) => {
                    hom_tensor_labelled(&graphs::LabelledGraph::new(pat, vec![])?, &target)?
                }
                ParsedGraph::Labelled(pat) => hom_tensor_labelled(&pat, &target)?,
                ParsedGraph::Bilabelled(pat) => hom_tensor_bilabelled(&pat, &target)?,
            };
            print!("{}", tensor.dump());
            Ok(0)
        }
        Cmd::Width { param, word_k, g } => {
            let graph = load_plain(&g)?;
            match param {
                WidthParam::Tw => println!("tw {}", treewidth(&graph)?),
                WidthParam::Pw => println!("pw {}", pathwidth(&graph)?),
                WidthParam::Td => println!("td {}", treedepth(&graph)?),
            }
            if let Some(k) = word_k {
                let word = match param {
                    WidthParam::Pw => compile_pathwidth_word(&graph, k)?,
                    WidthParam::Td => compile_treedepth_word(&graph, k)?,
                    WidthParam::Tw => bail!("--word-k applies to pw and td only"),
                };
                println!("{}", word.dump());
            }
            Ok(0)
        }
        Cmd::Basal { kind, k, list } => {
            let kind = match kind {
                KindArg::Pw => BasalKind::Pw,
                KindArg::Wl => BasalKind::Wl,
                KindArg::Td => BasalKind::Td,
            };
            let fam = basal::family(kind, k);
            if list {
                for (i, (member, name)) in fam.members.iter().zip(&fam.names).enumerate() {
                    println!("# {i} {name}");
                    print!("{}", format_bilabelled(member));
                }
            }
            Ok(0)
        }
        Cmd::Check { system, k, nonneg, force, g, h } => {
            let (g, h) = (load_plain(&g)?, load_plain(&h)?);
            guard(force, if matches!(system, SystemArg::Fiso) { 1 } else { k }, &[&g, &h])?;
            let sys = match system {
                SystemArg::Fiso => build_fiso(&g, &h),
                SystemArg::Liso => build_liso(&g, &h, k),
                SystemArg::Pw => build_pw(&g, &h, k),
                SystemArg::Td => build_td(&g, &h, k),
            };
            let rat = solve_rational(&sys);
            let res = if nonneg {
                solve_nonneg_hinted(&sys, &rat, graphs::isomorphism(&g, &h).as_deref())
            } else {
                rat
            };
            println!("feasible {}", res.feasible);
            if let Some(w) = &res.witness {
                if !verify_witness(&sys, w, nonneg) {
                    bail_violation("witness failed substitution")?;
                }
                print!("{}", witness_dump(&sys, w));
            }
            if let Some(cert) = &res.certificate {
                if !verify_certificate(&sys, cert) {
                    bail_violation("certificate failed verification")?;
                }
                for (row, mult) in cert {
                    println!("cert {row} {mult}");
                }
            }
            Ok(if res.feasible { 0 } else { 1 })
        }
        Cmd::Wl { k, force, g, h } => {
            let (g, h) = (load_plain(&g)?, load_plain(&h)?);
            guard(force, k, &[&g, &h])?;
            let cmp = wl_compare(&g, &h, k)?;
            println!("indistinguishable {}", cmp.indistinguishable);
            if let Some(r) = cmp.separating_round {
                println!("separating-round {r}");
            }
            let fmt = |v: &[usize]| {
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
            };
            println!("classes-g {}", fmt(&cmp.class_sizes_g));
            println!("classes-h {}", fmt(&cmp.class_sizes_h));
            Ok(if cmp.indistinguishable { 0 } else { 1 })
        }
        Cmd::Indist { family, bound, max_len, force, g, h } => {
            let (g, h) = (load_plain(&g)?, load_plain(&h)?);
            let (name, p) = parse_family(&family)?;
            match name.as_str() {
                "paths" | "trees" | "dary" => {
                    let spec = match name.as_str() {
                        "paths" => FamilySpec::paths(),
                        "trees" => FamilySpec::trees(),
                        _ => FamilySpec::dary(p)?,
                    };
                    let out = gram_indistinguishable(&spec, &g, &h);
                    println!("indistinguishable {}", out.indistinguishable);
                    println!("basis-dim {}", out.basis_dim);
                    if let Some(w) = &out.witness {
                        println!("# witness");
                        print!("{}", format_labelled(w));
                    }
                    Ok(if out.indistinguishable { 0 } else { 1 })
                }
                "pathwidth" | "treedepth" => {
                    guard(force, p, &[&g, &h])?;
                    let bound = bound.unwrap_or(6);
                    let keep = |f: &Graph| match name.as_str() {
                        "pathwidth" => pathwidth(f).map(|w| w <= p).unwrap_or(false),
                        _ => treedepth(f).map(|w| w <= p).unwrap_or(false),
                    };
                    let members = enumerate_graphs(bound, Some(&keep))?;
                    for f in &members {
                        if hom_count(f, &g) != hom_count(f, &h) {
                            println!("indistinguishable false");
                            println!("# witness");
                            print!("{}", format_graph(f));
                            return Ok(1);
                        }
                    }
                    println!("indistinguishable true");
                    println!("checked {}", members.len());
                    Ok(0)
                }
                "cyclewidth" => {
                    guard(force, p, &[&g, &h])?;
                    let (tg, th) = basal_tensor_families(BasalKind::Pw, p, &g, &h);
                    match words_equivalent(&tg, &th, EvalMode::Tr, max_len)? {
                        WordVerdict::Equivalent => {
                            println!("indistinguishable true");
                            Ok(0)
                        }
                        WordVerdict::EquivalentUpTo(l) => {
                            println!("indistinguishable true");
                            println!("# equivalent up to word length {l} (bounded search)");
                            Ok(0)
                        }
                        WordVerdict::Distinguished(letters) => {
                            println!("indistinguishable false");
                            let word =
                                homlab::hom::Word { kind: BasalKind::Pw, k: p, letters };
                            println!("{}", word.dump());
                            Ok(1)
                        }
                    }
                }
                other => bail!("unknown family {other:?}"),
            }
        }
        Cmd::Gen { what: GenCmd::PtmPair { d, out_prefix } } => {
            let pair = generate_degree_pair(d)?;
            let gp = format!("{out_prefix}_G.g");
            let hp = format!("{out_prefix}_H.g");
            let mp = format!("{out_prefix}_meta.txt");
            fs::write(&gp, format_graph(&pair.g.graph))?;
            fs::write(&hp, format_graph(&pair.h.graph))?;
            fs::write(&mp, meta_text(&pair))?;
            println!("wrote {gp} {hp} {mp}");
            println!(
                "vertices {} edges {} lambda {} N {} ell {}",
                pair.g.graph.vertex_count(),
                pair.g.graph.edge_count(),
                pair.meta.lambda,
                pair.meta.n_blowup,
                pair.meta.ell
            );
            Ok(0)
        }
        Cmd::Enum { family, bound } => {
            let (name, p) = parse_family(&family)?;
            let members = match name.as_str() {
                "paths" => family_enumerate(&FamilySpec::paths(), bound)?,
                "trees" => family_enumerate(&FamilySpec::trees(), bound)?,
                "dary" => family_enumerate(&FamilySpec::dary(p)?, bound)?,
                "pathwidth" => {
                    let keep = |f: &Graph| pathwidth(f).map(|w| w <= p).unwrap_or(false);
                    enumerate_graphs(bound, Some(&keep))?
                }
                "treedepth" => {
                    let keep = |f: &Graph| treedepth(f).map(|w| w <= p).unwrap_or(false);
                    enumerate_graphs(bound, Some(&keep))?
                }
                other => bail!("unknown family {other:?}"),
            };
            for (i, f) in members.iter().enumerate() {
                println!("# {i}");
                print!("{}", format_graph(f));
            }
            Ok(0)
        }
        Cmd::Report { k_max, force, g, h } => {
            let (g, h) = (load_plain(&g)?, load_plain(&h)?);
            guard(force, k_max, &[&g, &h])?;
            let report = run_pair_report(&g, &h, k_max)?;
            print!("{}", report.render());
            if !report.violations.is_empty() {
                return Ok(3);
            }
            Ok(if report.distinguished { 1 } else { 0 })
        }
        Cmd::Corpus { file } => run_corpus(&file),
    }
}

fn bail_violation(msg: &str) -> Result<()> {
    // Consistency violations are reported on stderr and bubble exit code 3.
    Err(anyhow!("consistency violation: {msg}"))
}

// ---------------------------------------------------------------------------
// Pair reports.
// ---------------------------------------------------------------------------

/// Aggregated verdicts of every decision procedure on one pair, with the
/// theorem-level equivalences cross-checked. Any recorded violation means a
/// bug reproducer, not a property of the input pair.
pub struct PairReport {
    pub lines: Vec<(String, String)>,
    pub violations: Vec<String>,
    pub distinguished: bool,
    pub elapsed_ms: u128,
}

impl PairReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            out.push_str(&format!("{k}={v}\n"));
        }
        for v in &self.violations {
            out.push_str(&format!("violation={v}\n"));
        }
        out.push_str(&format!("elapsed-ms={}\n", self.elapsed_ms));
        out
    }
}

/// Checked feasibility verdict: substitution-verifies whatever the solver
/// shipped and records a violation otherwise.
fn checked(
    sys: &LinearSystem,
    res: &Feasibility,
    nonneg: bool,
    what: &str,
    violations: &mut Vec<String>,
) -> bool {
    if res.feasible {
        match &res.witness {
            Some(w) if verify_witness(sys, w, nonneg) => {}
            _ => violations.push(format!("{what}: feasible verdict without a valid witness")),
        }
    } else if nonneg {
        // Simplex infeasibility is certified by the phase-1 optimum, not a row
        // combination; a rational-stage contradiction still ships one.
        if let Some(cert) = &res.certificate {
            if !verify_certificate(sys, cert) {
                violations.push(format!("{what}: invalid infeasibility certificate"));
            }
        }
    } else {
        match &res.certificate {
            Some(cert) if verify_certificate(sys, cert) => {}
            _ => violations.push(format!("{what}: infeasible verdict without a valid certificate")),
        }
    }
    res.feasible
}

pub fn run_pair_report(g: &Graph, h: &Graph, k_max: usize) -> Result<PairReport> {
    let start = Instant::now();
    let mut lines: Vec<(String, String)> = Vec::new();
    let mut violations: Vec<String> = Vec::new();
    let push = |lines: &mut Vec<(String, String)>, k: &str, v: String| {
        lines.push((k.to_string(), v));
    };

    let sigma = graphs::isomorphism(g, h);
    push(&mut lines, "isomorphic", sigma.is_some().to_string());

    // F_iso, rational and non-negative.
    let fsys = build_fiso(g, h);
    let frat = solve_rational(&fsys);
    let fiso_rat = checked(&fsys, &frat, false, "fiso", &mut violations);
    let fnn = solve_nonneg_hinted(&fsys, &frat, sigma.as_deref());
    let fiso_nn = checked(&fsys, &fnn, true, "fiso-nonneg", &mut violations);
    push(&mut lines, "fiso-rational", fiso_rat.to_string());
    push(&mut lines, "fiso-nonneg", fiso_nn.to_string());

    // Gram testers.
    let gp = gram_indistinguishable(&FamilySpec::paths(), g, h);
    let gt = gram_indistinguishable(&FamilySpec::trees(), g, h);
    push(&mut lines, "gram-paths", gp.indistinguishable.to_string());
    push(&mut lines, "gram-trees", gt.indistinguishable.to_string());
    if gp.indistinguishable != fiso_rat {
        violations.push("fiso rational vs gram(paths) disagree".into());
    }
    if gt.indistinguishable != fiso_nn {
        violations.push("fiso nonneg vs gram(trees) disagree".into());
    }

    let mut all_indist = fiso_rat && fiso_nn && gp.indistinguishable && gt.indistinguishable;

    for k in 1..=k_max {
        let wl = wl_compare(g, h, k)?;
        push(&mut lines, &format!("wl-{k}"), wl.indistinguishable.to_string());
        if k == 1 && wl.indistinguishable != fiso_nn {
            violations.push("fiso nonneg vs colour refinement disagree".into());
        }

        let psys = build_pw(g, h, k);
        let prat = solve_rational(&psys);
        let pw_rat = checked(&psys, &prat, false, &format!("pw-{k}"), &mut violations);
        let pnn = solve_nonneg_hinted(&psys, &prat, sigma.as_deref());
        let pw_nn = checked(&psys, &pnn, true, &format!("pw-{k}-nonneg"), &mut violations);
        push(&mut lines, &format!("pw-{k}-rational"), pw_rat.to_string());
        push(&mut lines, &format!("pw-{k}-nonneg"), pw_nn.to_string());

        let lsys = build_liso(g, h, k);
        let lrat = solve_rational(&lsys);
        let li_rat = checked(&lsys, &lrat, false, &format!("liso-{k}"), &mut violations);
        let lnn = solve_nonneg_hinted(&lsys, &lrat, sigma.as_deref());
        let li_nn = checked(&lsys, &lnn, true, &format!("liso-{k}-nonneg"), &mut violations);
        push(&mut lines, &format!("liso-{k}-rational"), li_rat.to_string());
        push(&mut lines, &format!("liso-{k}-nonneg"), li_nn.to_string());

        if pw_rat != li_rat {
            violations.push(format!("pw-{k} vs liso-{k} rational disagree"));
        }
        if pw_nn != li_nn || pw_nn != wl.indistinguishable {
            violations.push(format!("pw-{k}/liso-{k} nonneg vs {k}-WL disagree"));
        }

        let level = k + 1;
        let tsys = build_td(g, h, level);
        let trat = solve_rational(&tsys);
        let td_rat = checked(&tsys, &trat, false, &format!("td-{level}"), &mut violations);
        let tnn = solve_nonneg_hinted(&tsys, &trat, sigma.as_deref());
        let td_nn = checked(&tsys, &tnn, true, &format!("td-{level}-nonneg"), &mut violations);
        push(&mut lines, &format!("td-{level}-rational"), td_rat.to_string());
        push(&mut lines, &format!("td-{level}-nonneg"), td_nn.to_string());
        if td_rat != td_nn {
            violations.push(format!("td-{level} rational vs nonneg disagree"));
        }

        all_indist &= wl.indistinguishable && pw_rat && pw_nn && li_rat && li_nn && td_rat;
    }

    Ok(PairReport {
        lines,
        violations,
        distinguished: !all_indist,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

// ---------------------------------------------------------------------------
// Corpus runs.
// ---------------------------------------------------------------------------

/// Corpus file: `#` comments and blank lines; `pair <G-file> <H-file> [k_max]`
/// (paths relative to the corpus file); `ptm-pair <d> [tree_size] [path_len]`
/// running the counterexample harness. Deterministic order; exit 3 on any
/// consistency violation.
fn run_corpus(file: &Path) -> Result<u8> {
    let text =
        fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let base = file.parent().unwrap_or(Path::new("."));
    let mut any_violation = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "pair" => {
                if fields.len() < 3 {
                    bail!("line {}: pair needs two graph files", lineno + 1);
                }
                let g = load_plain(&base.join(fields[1]))?;
                let h = load_plain(&base.join(fields[2]))?;
                let k_max: usize =
                    fields.get(3).map(|s| s.parse()).transpose()?.unwrap_or(2);
                let report = run_pair_report(&g, &h, k_max)?;
                println!(
                    "pair {} {} distinguished={} consistent={} ms={}",
                    fields[1],
                    fields[2],
                    report.distinguished,
                    report.violations.is_empty(),
                    report.elapsed_ms
                );
                for v in &report.violations {
                    println!("  violation={v}");
                    any_violation = true;
                }
            }
            "ptm-pair" => {
                if fields.len() < 2 {
                    bail!("line {}: ptm-pair needs d", lineno + 1);
                }
                let d: usize = fields[1].parse()?;
                let tree_size: usize =
                    fields.get(2).map(|s| s.parse()).transpose()?.unwrap_or(8);
                let path_len: usize =
                    fields.get(3).map(|s| s.parse()).transpose()?.unwrap_or(20);
                let start = Instant::now();
                let pair = generate_degree_pair(d)?;
                let report = verify_degree_pair(&pair, &VerifyBounds { tree_size, path_len });
                println!(
                    "ptm-pair d={} passed={} ms={}",
                    d,
                    report.passed(),
                    start.elapsed().as_millis()
                );
                for item in &report.items {
                    println!("  {}={} ({})", item.name, item.passed, item.detail);
                    if !item.passed {
                        any_violation = true;
                    }
                }
            }
            other => bail!("line {}: unknown directive {other:?}", lineno + 1),
        }
    }
    Ok(if any_violation { 3 } else { 0 })
}

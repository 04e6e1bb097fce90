use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use quivoa::graph::{double, internal_edges, shadow};
use quivoa::io::{parse_expr, parse_graph, parse_scalar_literal, round_sig12, serialize_sig12};
use quivoa::iso::{gcm_isomorphic, gcm_isomorphic_cross_checked, oa_isomorphic, verify_udgraph_mapping};
use quivoa::mispace::{blind, build_mispace, char_eval, exact_to_f64, invariants, recover_shadow};
use quivoa::norm_bounds::{gcm_norm_bounds, oa_norm_bounds};
use quivoa::reps::lemma_suite;
use quivoa::words::{enumerate_reduced, parse_word};
use quivoa::{catalog, BoundConfig, Carrier, Character, DirectedMultigraph, IsoWitness, UndirectedMultigraph};

const JSON_SCHEMAS: &str = "\
JSON output (--json), one object per run:
  reduce          {graph, input, normal_form, length}
  semigroup       {graph, max_len, count, words: [string]}
  mispace         {graph, n_q, dims_sorted: [int], components: [{subset: [string], dim, degree}]}
  invariants      {graph, n_q, vertex_count, edge_count, alpha, beta, total_dim, k0_rank}
  recover-shadow  {graph, blind_seed, vertices: [string], multiplicities: [{pair: [string, string], count}],
                   isomorphic_to_shadow, witness}
  iso             {model, left, right, seed, cross_checked, verdict, mapping: {vertices: [int], edges?: [int]} | null,
                   refutation: string | null}
  eval            {graph, subset: [string], lambda: {edge: string}, expression, value: {re, im, re_f64, im_f64}}
  norm-bounds     {graph, model, expression, config: {character_grid, refinement_steps, rep_trials, rep_dims, seed},
                   lower, upper, lower_witness, upper_witness, spectral_radius}
  lemmas          {seed, trials, all_passed, lemmas: [{name, trials, hypotheses_met, failures, first_failure}]}
Floats carry 12 significant digits. Exit status: 0 success, 1 domain error, 2 usage error.
QUIVOA_THREADS caps the worker threads.";

/// Reduced words, maximal ideal spaces, isomorphism and norm bounds for
/// operator algebras of finite directed graphs.
///
/// Graph files list `vertex <id>` and `edge <id> <source> <range>` lines;
/// `#` starts a comment.
#[derive(Debug, Parser)]
#[command(name = "quivoa", version, after_long_help = JSON_SCHEMAS)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Base seed for every randomized computation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Model {
    Oa,
    Gcm,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normal form of a `.`-separated word.
    Reduce {
        word: String,
        /// Graph file; defaults to the single edge t: v0 → v1.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Work over the doubled graph, where `e~` is the reversed partner of `e`.
        #[arg(long)]
        doubled: bool,
    },
    /// Enumerate reduced words up to a length.
    Semigroup {
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Component table of the maximal ideal space.
    Mispace { graph: PathBuf },
    /// Vertex, edge, loop and K0 data read off the maximal ideal space.
    Invariants { graph: PathBuf },
    /// Rebuild the shadow graph from a blinded descriptor.
    RecoverShadow {
        graph: PathBuf,
        /// Blinding seed; defaults to --seed.
        #[arg(long)]
        blind_seed: Option<u64>,
    },
    /// Decide isomorphism of the operator algebras (oa) or C*-algebras (gcm).
    Iso {
        #[arg(long, value_enum)]
        model: Model,
        left: PathBuf,
        right: PathBuf,
        /// For gcm, also confirm through shadows recovered from blinded descriptors.
        #[arg(long)]
        cross_check: bool,
    },
    /// Evaluate a character on an expression.
    Eval {
        /// Comma-separated vertex subset.
        #[arg(long, value_delimiter = ',', required = true)]
        subset: Vec<String>,
        /// Comma-separated edge values, e.g. t1=0.5,t3=i. Unlisted edges of the subset take 0.
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<String>,
        /// Evaluate over the doubled graph (partners take conjugate values).
        #[arg(long)]
        gcm: bool,
        graph: PathBuf,
        expr: String,
    },
    /// Lower and upper bounds on the universal norm (or C*-seminorm with --gcm).
    NormBounds {
        #[arg(long)]
        gcm: bool,
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 64)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        dims: Vec<usize>,
        graph: PathBuf,
        expr: String,
    },
    /// Check the block-matrix positivity lemmas on random matrices.
    Lemmas {
        #[arg(long, default_value_t = 500)]
        trials: usize,
    },
}

struct Output {
    json: serde_json::Value,
    text: String,
    ok: bool,
}

impl Output {
    fn new<T: Serialize>(report: &T, text: String) -> Result<Self> {
        Ok(Output {
            json: serde_json::to_value(report)?,
            text,
            ok: true,
        })
    }
}

fn load(path: &Path) -> Result<DirectedMultigraph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc = parse_graph(&text).with_context(|| format!("{}", path.display()))?;
    Ok(doc.graph)
}

fn graph_label(path: Option<&Path>) -> String {
    path.map_or_else(|| "builtin:single_edge".into(), |p| p.display().to_string())
}

fn carrier_for(q: DirectedMultigraph, doubled: bool) -> Carrier {
    if doubled {
        Carrier::doubled_of(q)
    } else {
        Carrier::plain(q)
    }
}

fn reduce(word: &str, graph: Option<&Path>, doubled: bool) -> Result<Output> {
    let q = match graph {
        Some(p) => load(p)?,
        None => catalog::single_edge(),
    };
    let carrier = carrier_for(q, doubled);
    let w = parse_word(carrier.graph(), word)?;
    let normal = w.display(carrier.graph()).to_string();
    #[derive(Serialize)]
    struct Report<'a> {
        graph: String,
        input: &'a str,
        normal_form: &'a str,
        length: usize,
    }
    let report = Report {
        graph: graph_label(graph),
        input: word,
        normal_form: &normal,
        length: w.len(),
    };
    Output::new(&report, normal.clone())
}

fn semigroup(max_len: usize, graph: Option<&Path>) -> Result<Output> {
    let q = match graph {
        Some(p) => load(p)?,
        None => catalog::single_edge(),
    };
    let words: Vec<String> = enumerate_reduced(&q, max_len)?
        .iter()
        .map(|w| w.display(&q).to_string())
        .collect();
    #[derive(Serialize)]
    struct Report<'a> {
        graph: String,
        max_len: usize,
        count: usize,
        words: &'a [String],
    }
    let text = format!("{} reduced words of length <= {max_len}\n{}", words.len(), words.join("\n"));
    Output::new(
        &Report {
            graph: graph_label(graph),
            max_len,
            count: words.len(),
            words: &words,
        },
        text,
    )
}

fn mispace(path: &Path) -> Result<Output> {
    let q = load(path)?;
    let d = build_mispace(&q)?;
    #[derive(Serialize)]
    struct Row {
        subset: Vec<String>,
        dim: usize,
        degree: u32,
    }
    #[derive(Serialize)]
    struct Report {
        graph: String,
        n_q: usize,
        dims_sorted: Vec<usize>,
        components: Vec<Row>,
    }
    let rows: Vec<Row> = d
        .components()
        .iter()
        .map(|c| Row {
            subset: c.vertices().iter().map(|&v| q.vertex_name(v).to_string()).collect(),
            dim: c.dim,
            degree: c.degree,
        })
        .collect();
    let mut dims: Vec<usize> = rows.iter().map(|r| r.dim).collect();
    dims.sort_unstable();
    let mut text = format!("N_Q = {}\ndims (sorted) = {:?}\n", rows.len(), dims);
    let _ = writeln!(text, "{:<24} {:>4} {:>6}", "subset", "dim", "degree");
    for r in &rows {
        let _ = writeln!(text, "{:<24} {:>4} {:>6}", format!("{{{}}}", r.subset.join(",")), r.dim, r.degree);
    }
    Output::new(
        &Report {
            graph: path.display().to_string(),
            n_q: rows.len(),
            dims_sorted: dims,
            components: rows,
        },
        text.trim_end().to_string(),
    )
}

fn invariant_report(path: &Path) -> Result<Output> {
    let q = load(path)?;
    let r = invariants(&build_mispace(&q)?)?;
    let text = format!(
        "N_Q = {}\n|V| = {}\n|E| = {}\nalpha (loops) = {}\nbeta (non-loop edges) = {}\ntotal dim = {}\nK0 rank = {}",
        r.n_q, r.vertex_count, r.edge_count, r.alpha, r.beta, r.total_dim, r.k0_rank
    );
    let mut json = serde_json::to_value(&r)?;
    json.as_object_mut()
        .expect("struct serializes to an object")
        .insert("graph".into(), path.display().to_string().into());
    Ok(Output { json, text, ok: true })
}

fn describe_udgraph(s: &UndirectedMultigraph) -> Vec<((String, String), usize)> {
    s.pairs()
        .filter(|&(_, m)| m > 0)
        .map(|((a, b), m)| ((s.vertices()[a].clone(), s.vertices()[b].clone()), m))
        .collect()
}

fn recover(path: &Path, blind_seed: u64) -> Result<Output> {
    let q = load(path)?;
    let recovered = recover_shadow(&blind(&build_mispace(&q)?, blind_seed)?)?;
    let witness = quivoa::iso::udgraph_isomorphic(&recovered, &shadow(&q))?;
    #[derive(Serialize)]
    struct Pair {
        pair: (String, String),
        count: usize,
    }
    #[derive(Serialize)]
    struct Report<'a> {
        graph: String,
        blind_seed: u64,
        vertices: &'a [String],
        multiplicities: Vec<Pair>,
        isomorphic_to_shadow: bool,
        witness: &'a IsoWitness,
    }
    let pairs = describe_udgraph(&recovered);
    let mut text = format!("blind seed {blind_seed}\nrecovered vertices: {}\n", recovered.vertices().join(" "));
    for ((a, b), m) in &pairs {
        let _ = writeln!(text, "  {a} -- {b}: {m}");
    }
    let _ = write!(text, "isomorphic to the true shadow: {}", witness.verdict);
    if let Some(m) = &witness.mapping {
        let names: Vec<String> = m
            .vertices
            .iter()
            .enumerate()
            .map(|(i, &j)| format!("{}->{}", recovered.vertices()[i], q.vertex_name(j)))
            .collect();
        let _ = write!(text, " ({})", names.join(", "));
    }
    let mut out = Output::new(
        &Report {
            graph: path.display().to_string(),
            blind_seed,
            vertices: recovered.vertices(),
            multiplicities: pairs.iter().map(|(p, m)| Pair { pair: p.clone(), count: *m }).collect(),
            isomorphic_to_shadow: witness.verdict,
            witness: &witness,
        },
        text,
    )?;
    out.ok = witness.verdict;
    Ok(out)
}

fn iso(model: Model, left: &Path, right: &Path, cross_check: bool, seed: u64) -> Result<Output> {
    let (q1, q2) = (load(left)?, load(right)?);
    let witness = match (model, cross_check) {
        (Model::Oa, _) => oa_isomorphic(&q1, &q2)?,
        (Model::Gcm, false) => gcm_isomorphic(&q1, &q2)?,
        (Model::Gcm, true) => gcm_isomorphic_cross_checked(&q1, &q2, seed)?,
    };
    if let (Model::Gcm, Some(m)) = (model, &witness.mapping) {
        debug_assert!(verify_udgraph_mapping(&shadow(&q1), &shadow(&q2), m));
    }
    #[derive(Serialize)]
    struct Report<'a> {
        model: Model,
        left: String,
        right: String,
        seed: u64,
        cross_checked: bool,
        #[serde(flatten)]
        witness: &'a IsoWitness,
    }
    let mut text = format!("verdict: {}", if witness.verdict { "isomorphic" } else { "not isomorphic" });
    if let Some(m) = &witness.mapping {
        let vs: Vec<String> = m
            .vertices
            .iter()
            .enumerate()
            .map(|(i, &j)| format!("{}->{}", q1.vertex_name(i), q2.vertex_name(j)))
            .collect();
        let _ = write!(text, "\nvertices: {}", vs.join(", "));
        if let Some(es) = &m.edges {
            let es: Vec<String> = es
                .iter()
                .enumerate()
                .map(|(i, &j)| format!("{}->{}", q1.edge(i).id, q2.edge(j).id))
                .collect();
            let _ = write!(text, "\nedges: {}", es.join(", "));
        }
    }
    if let Some(r) = &witness.refutation {
        let _ = write!(text, "\nrefutation: {r}");
    }
    Output::new(
        &Report {
            model,
            left: left.display().to_string(),
            right: right.display().to_string(),
            seed,
            cross_checked: cross_check && model == Model::Gcm,
            witness: &witness,
        },
        text,
    )
}

fn eval(subset: &[String], lambda: &[String], gcm: bool, path: &Path, expr: &str) -> Result<Output> {
    let q = Arc::new(load(path)?);
    let indices = subset
        .iter()
        .map(|name| {
            q.vertex_index(name.trim())
                .with_context(|| format!("--subset: unknown vertex `{name}`"))
        })
        .collect::<Result<Vec<usize>>>()?;
    let domain = internal_edges(&q, &indices)?;
    let mut values: BTreeMap<usize, quivoa::Scalar> = domain.iter().map(|&e| (e, quivoa::Scalar::default())).collect();
    for item in lambda {
        let (name, value) = item
            .split_once('=')
            .with_context(|| format!("--lambda: expected edge=value, got `{item}`"))?;
        let e = (0..q.edge_count())
            .find(|&e| q.edge(e).id == name.trim())
            .with_context(|| format!("--lambda: unknown edge `{name}`"))?;
        if !domain.contains(&e) {
            bail!("--lambda: edge `{name}` does not have both endpoints in the subset");
        }
        values.insert(e, parse_scalar_literal(value).with_context(|| format!("--lambda: value for `{name}`"))?);
    }
    let character = Character::new(&q, &indices, values.clone())?;
    let carrier = if gcm {
        Carrier::Doubled(Arc::new(double(&q)))
    } else {
        Carrier::Plain(Arc::clone(&q))
    };
    let x = parse_expr(expr, &carrier)?;
    let value = char_eval(&character, &x)?;
    let approx = exact_to_f64(&value);
    #[derive(Serialize)]
    struct Value {
        re: String,
        im: String,
        #[serde(serialize_with = "serialize_sig12")]
        re_f64: f64,
        #[serde(serialize_with = "serialize_sig12")]
        im_f64: f64,
    }
    #[derive(Serialize)]
    struct Report {
        graph: String,
        subset: Vec<String>,
        lambda: BTreeMap<String, String>,
        expression: String,
        value: Value,
    }
    let shown: BTreeMap<String, String> = values
        .iter()
        .map(|(&e, z)| (q.edge(e).id.clone(), format!("{} + {}i", z.re, z.im)))
        .collect();
    let text = format!(
        "value = {} + {}i  (~ {} + {}i)",
        value.re,
        value.im,
        round_sig12(approx.re),
        round_sig12(approx.im)
    );
    Output::new(
        &Report {
            graph: path.display().to_string(),
            subset: indices.iter().map(|&v| q.vertex_name(v).to_string()).collect(),
            lambda: shown,
            expression: x.to_string(),
            value: Value {
                re: value.re.to_string(),
                im: value.im.to_string(),
                re_f64: approx.re,
                im_f64: approx.im,
            },
        },
        text,
    )
}

fn norm_bounds(gcm: bool, config: BoundConfig, path: &Path, expr: &str) -> Result<Output> {
    let q = Arc::new(load(path)?);
    let (bounds, x) = if gcm {
        let d = Arc::new(double(&q));
        let x = parse_expr(expr, &Carrier::Doubled(Arc::clone(&d)))?;
        (gcm_norm_bounds(&d, &x, &config)?, x)
    } else {
        let x = parse_expr(expr, &Carrier::Plain(Arc::clone(&q)))?;
        (oa_norm_bounds(&q, &x, &config)?, x)
    };
    #[derive(Serialize)]
    struct Report<'a> {
        graph: String,
        model: Model,
        expression: String,
        config: &'a BoundConfig,
        #[serde(flatten)]
        bounds: &'a quivoa::NormBounds,
    }
    let mut text = format!(
        "{} <= norm <= {}\nlower: {}\nupper: {}\nseed {}",
        round_sig12(bounds.lower),
        round_sig12(bounds.upper),
        bounds.lower_witness,
        bounds.upper_witness,
        config.seed
    );
    if let Some(r) = bounds.spectral_radius {
        let _ = write!(text, "\nlargest sampled spectral radius: {}", round_sig12(r));
    }
    Output::new(
        &Report {
            graph: path.display().to_string(),
            model: if gcm { Model::Gcm } else { Model::Oa },
            expression: x.to_string(),
            config: &config,
            bounds: &bounds,
        },
        text,
    )
}

fn lemmas(trials: usize, seed: u64) -> Result<Output> {
    if trials == 0 {
        bail!("--trials must be positive");
    }
    let report = lemma_suite(seed, trials);
    let mut text = format!("seed {seed}, {trials} trials per lemma\n");
    for l in &report.lemmas {
        let _ = writeln!(
            text,
            "{:<14} failures {:>4}  hypotheses met {:>4}{}",
            l.name,
            l.failures,
            l.hypotheses_met,
            l.first_failure.as_deref().map(|f| format!("  first: {f}")).unwrap_or_default()
        );
    }
    let mut json = serde_json::to_value(&report)?;
    json.as_object_mut()
        .expect("struct serializes to an object")
        .insert("all_passed".into(), report.all_passed().into());
    Ok(Output {
        json,
        text: text.trim_end().to_string(),
        ok: report.all_passed(),
    })
}

fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Reduce { word, graph, doubled } => reduce(word, graph.as_deref(), *doubled),
        Command::Semigroup { max_len, graph } => semigroup(*max_len, graph.as_deref()),
        Command::Mispace { graph } => mispace(graph),
        Command::Invariants { graph } => invariant_report(graph),
        Command::RecoverShadow { graph, blind_seed } => recover(graph, blind_seed.unwrap_or(cli.seed)),
        Command::Iso {
            model,
            left,
            right,
            cross_check,
        } => iso(*model, left, right, *cross_check, cli.seed),
        Command::Eval {
            subset,
            lambda,
            gcm,
            graph,
            expr,
        } => eval(subset, lambda, *gcm, graph, expr),
        Command::NormBounds {
            gcm,
            grid,
            steps,
            trials,
            dims,
            graph,
            expr,
        } => norm_bounds(
            *gcm,
            BoundConfig {
                character_grid: *grid,
                refinement_steps: *steps,
                rep_trials: *trials,
                rep_dims: dims.clone(),
                seed: cli.seed,
            },
            graph,
            expr,
        ),
        Command::Lemmas { trials } => lemmas(*trials, cli.seed),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("QUIVOA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("QUIVOA_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(&cli));
    match result {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("JSON values serialize"));
            } else {
                println!("{}", out.text);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if cli.json {
                let msg = serde_json::json!({ "error": format!("{e:#}") });
                println!("{msg}");
            }
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

//! Command-line front end. Every command prints one JSON document on
//! standard output; diagnostics go to standard error.
//!
//! Exit codes: 0 success, 1 domain error (bad input contents, failing
//! check), 2 usage error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::analysis::{is_io_disjoint, syn_io};
use crate::constructions::{build_alpha_2n, build_alpha_exists_3n, CliqueSpec, Graph};
use crate::folink::{fo_to_lif, lif_to_fo, parse_fo, uses_third_copy};
use crate::gen::interpretation_family;
use crate::oracle::{brv_determines, brv_inertially_cylindrified, search_witnesses, WitnessReport, Witnesses};
use crate::rewrite::{eliminate_compositions, expand_redundant, FreshVarSupply};
use crate::semantics::{evaluate, Brv, Domain, Interpretation, InterpretationFile, Valuation, ValuationSpace, Value};
use crate::suites::{run_suite, Suite};
use crate::syntax::{infer_vocabulary, parse_vocabulary, Expr, Parser as ExprParser, Var, VarUniverse, Vocabulary};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

fn domain_err(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "lif", version, about = "Logic of Information Flows toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Vocabulary file (`NAME/ARITY in IAR` per line)
    #[arg(long, global = true, value_name = "FILE")]
    pub vocab: Option<PathBuf>,
    /// Inline vocabulary; `;` separates entries
    #[arg(long, global = true, value_name = "TEXT")]
    pub vocab_str: Option<String>,
    /// Expression file
    #[arg(long, global = true, value_name = "FILE")]
    pub expr: Option<PathBuf>,
    /// Inline expression
    #[arg(long, global = true, value_name = "EXPR")]
    pub expr_str: Option<String>,
    /// Interpretation JSON: {"domain": [...], "relations": {...}}
    #[arg(long, global = true, value_name = "FILE")]
    pub interp: Option<PathBuf>,
    /// Variable universe, comma separated
    #[arg(long, global = true, value_name = "x,y,z")]
    pub universe: Option<String>,
    /// Data domain, comma separated integers
    #[arg(long, global = true, value_name = "1,2,3")]
    pub domain: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Maximum number of generated interpretations
    #[arg(long, global = true, default_value_t = 10_000)]
    pub budget: usize,
    /// Output is always JSON; accepted for compatibility
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse an expression and print its syntax tree
    Parse,
    /// Syntactic inputs, outputs and free variables
    Analyze,
    /// Evaluate an expression on an interpretation
    Eval,
    /// Compare two expressions on an interpretation or a generated family
    CheckEquiv(CheckEquivArgs),
    /// Search witnesses for semantic inputs and outputs
    Oracle(FamilyArgs),
    /// Rewrite an expression
    Rewrite(RewriteArgs),
    /// Translate an expression into first-order logic
    ToFo,
    /// Translate a first-order formula into an expression
    FromFo(FromFoArgs),
    /// Emit clique expressions and optionally evaluate them on a graph
    Clique(CliqueArgs),
    /// Run a seeded property suite
    PropertySuite(SuiteArgs),
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// Largest relation size in the generated family
    #[arg(long, default_value_t = 2)]
    pub max_size: usize,
}

#[derive(Debug, Args)]
pub struct CheckEquivArgs {
    /// Second expression, inline
    #[arg(long, value_name = "EXPR")]
    pub other_str: Option<String>,
    /// Second expression, file
    #[arg(long, value_name = "FILE")]
    pub other: Option<PathBuf>,
    #[command(flatten)]
    pub family: FamilyArgs,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct RewriteArgs {
    /// Remove every sequential composition
    #[arg(long)]
    pub eliminate_composition: bool,
    /// Expand intersection, one-sided selections and right cylindrification
    #[arg(long)]
    pub expand_redundant: bool,
}

#[derive(Debug, Args)]
pub struct FromFoArgs {
    /// Formula in s-expression syntax
    #[arg(long, value_name = "SEXP")]
    pub formula_str: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub formula: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Emit {
    #[value(name = "2n")]
    TwoN,
    #[value(name = "exists3n")]
    Exists3n,
}

#[derive(Debug, Args)]
pub struct CliqueArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "2n")]
    pub emit: Emit,
    /// Undirected graph JSON: {"vertices": [...], "edges": [[a, b], ...]}
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Suite name, or `all`
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Cases per part (defaults depend on the suite)
    #[arg(long)]
    pub count: Option<usize>,
}

/// Parses `argv` (including the program name), runs the command and writes
/// its output. Returns the exit code.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    2
                }
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok((doc, ok)) => {
            let text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
            let _ = writeln!(out, "{text}");
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

/// Declared vocabulary, or the one implied by the atoms of `sources`.
fn load_vocab(c: &Common, sources: &[&str]) -> CliResult<Vocabulary> {
    let text = match (&c.vocab, &c.vocab_str) {
        (Some(p), None) => read(p)?,
        (None, Some(s)) => s.replace(';', "\n"),
        (None, None) if !sources.is_empty() => {
            return infer_vocabulary(&sources.join("\n")).map_err(|e| domain_err(format!("expression {e}")));
        }
        (None, None) => {
            return Err(CliError::Usage(
                "a vocabulary is required (--vocab or --vocab-str)".into(),
            ))
        }
        (Some(_), Some(_)) => return Err(CliError::Usage("give only one of --vocab and --vocab-str".into())),
    };
    parse_vocabulary(&text).map_err(|e| domain_err(format!("vocabulary {e}")))
}

fn expr_text(file: &Option<PathBuf>, inline: &Option<String>, what: &str) -> CliResult<String> {
    match (file, inline) {
        (Some(p), None) => read(p),
        (None, Some(s)) => Ok(s.clone()),
        (None, None) => Err(CliError::Usage(format!("{what} is required"))),
        (Some(_), Some(_)) => Err(CliError::Usage(format!("{what} given twice"))),
    }
}

fn parse_universe(c: &Common) -> CliResult<Option<VarUniverse>> {
    c.universe
        .as_ref()
        .map(|s| {
            let names: Vec<&str> = s.split(',').map(str::trim).filter(|n| !n.is_empty()).collect();
            VarUniverse::from_names(names).map_err(domain_err)
        })
        .transpose()
}

fn parse_domain(c: &Common) -> CliResult<Option<Domain>> {
    c.domain
        .as_ref()
        .map(|s| {
            let vals = s
                .split(',')
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .map(|n| {
                    n.parse::<Value>()
                        .map_err(|_| CliError::Usage(format!("bad domain value {n:?}")))
                })
                .collect::<CliResult<Vec<Value>>>()?;
            Domain::new(vals).map_err(domain_err)
        })
        .transpose()
}

fn load_expr(c: &Common) -> CliResult<(Vocabulary, Expr)> {
    let text = expr_text(&c.expr, &c.expr_str, "--expr or --expr-str")?;
    let vocab = load_vocab(c, &[&text])?;
    let e = parse_expr_with(&vocab, parse_universe(c)?.as_ref(), &text)?;
    Ok((vocab, e))
}

fn parse_expr_with(vocab: &Vocabulary, universe: Option<&VarUniverse>, text: &str) -> CliResult<Expr> {
    let mut p = ExprParser::new(vocab);
    if let Some(u) = universe {
        p = p.universe(u);
    }
    p.parse(text).map_err(|e| domain_err(format!("expression {e}")))
}

/// Universe from `--universe`, else the sorted variables of the expressions.
fn universe_for(c: &Common, exprs: &[&Expr]) -> CliResult<VarUniverse> {
    if let Some(u) = parse_universe(c)? {
        return Ok(u);
    }
    let vars: Vec<Var> = exprs
        .iter()
        .flat_map(|e| e.variables())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    if vars.is_empty() {
        return VarUniverse::from_names(["x"]).map_err(domain_err);
    }
    VarUniverse::new(vars).map_err(domain_err)
}

fn load_interp(c: &Common, vocab: &Vocabulary) -> CliResult<Option<(Domain, Interpretation)>> {
    let Some(path) = &c.interp else { return Ok(None) };
    let file: InterpretationFile =
        serde_json::from_str(&read(path)?).map_err(|e| domain_err(format!("{}: {e}", path.display())))?;
    let (mut domain, interp) = file.split().map_err(domain_err)?;
    if let Some(d) = parse_domain(c)? {
        domain = d;
    }
    let interp = interp.conform(vocab, &domain).map_err(domain_err)?;
    Ok(Some((domain, interp)))
}

fn valuation_json(u: &VarUniverse, v: &Valuation) -> Json {
    let mut m = Map::new();
    for (var, val) in u.vars().iter().zip(&v.0) {
        m.insert(var.name().to_string(), json!(val));
    }
    Json::Object(m)
}

fn pairs_json(brv: &Brv) -> Json {
    let u = brv.space().universe();
    Json::Array(
        brv.pairs()
            .map(|(a, b)| json!({"left": valuation_json(u, &a), "right": valuation_json(u, &b)}))
            .collect(),
    )
}

fn space(u: VarUniverse, d: Domain) -> CliResult<Arc<ValuationSpace>> {
    ValuationSpace::new(u, d).map_err(domain_err)
}

fn to_json<T: Serialize>(v: &T) -> Json {
    serde_json::to_value(v).expect("serializable")
}

fn execute(cli: &Cli) -> CliResult<(Json, bool)> {
    let c = &cli.common;
    match &cli.command {
        Command::Parse => {
            let (_, e) = load_expr(c)?;
            Ok((
                json!({
                    "expr": e.to_string(),
                    "ast": to_json(&e),
                    "variables": to_json(&e.variables()),
                    "modules": to_json(&e.modules()),
                    "size": e.size(),
                    "depth": e.depth(),
                }),
                true,
            ))
        }
        Command::Analyze => {
            let (_, e) = load_expr(c)?;
            let io = syn_io(&e);
            Ok((
                json!({
                    "expr": e.to_string(),
                    "inputs": to_json(&io.inputs),
                    "outputs": to_json(&io.outputs),
                    "fvars": to_json(&io.fvars),
                    "io_disjoint": is_io_disjoint(&e),
                }),
                true,
            ))
        }
        Command::Eval => {
            let (vocab, e) = load_expr(c)?;
            let (domain, interp) =
                load_interp(c, &vocab)?.ok_or_else(|| CliError::Usage("--interp is required".into()))?;
            let u = universe_for(c, &[&e])?;
            let s = space(u.clone(), domain.clone())?;
            let brv = evaluate(&e, &interp, &s).map_err(domain_err)?;
            Ok((
                json!({
                    "expr": e.to_string(),
                    "universe": to_json(&u.vars()),
                    "domain": domain.values(),
                    "count": brv.len(),
                    "pairs": pairs_json(&brv),
                }),
                true,
            ))
        }
        Command::CheckEquiv(args) => check_equiv(c, args),
        Command::Oracle(args) => oracle(c, args),
        Command::Rewrite(args) => {
            let (_, e) = load_expr(c)?;
            if args.expand_redundant {
                let r = expand_redundant(&e);
                return Ok((json!({"input": e.to_string(), "expr": r.to_string()}), true));
            }
            let u = universe_for(c, &[&e])?;
            let mut supply = FreshVarSupply::new(u.clone());
            let (r, ext) = eliminate_compositions(&e, &mut supply).map_err(domain_err)?;
            Ok((
                json!({
                    "input": e.to_string(),
                    "expr": r.to_string(),
                    "universe": to_json(&ext.vars()),
                    "fresh": to_json(&supply.issued()),
                }),
                true,
            ))
        }
        Command::ToFo => {
            let (_, e) = load_expr(c)?;
            let u = universe_for(c, &[&e])?;
            let phi = lif_to_fo(&e, &u).map_err(domain_err)?;
            let vars = phi.variables();
            let copies: Vec<Json> = u
                .vars()
                .iter()
                .enumerate()
                .map(|(i, v)| json!({"variable": v.name(), "left": format!("x{}", i + 1), "right": format!("y{}", i + 1), "bound": format!("z{}", i + 1)}))
                .collect();
            Ok((
                json!({
                    "expr": e.to_string(),
                    "universe": to_json(&u.vars()),
                    "formula": phi.to_string(),
                    "copies": copies,
                    "variables_used": vars.len(),
                    "variables": to_json(&vars),
                    "uses_third_copy": uses_third_copy(&phi, &u),
                }),
                true,
            ))
        }
        Command::FromFo(args) => {
            let vocab = load_vocab(c, &[])?;
            let text = expr_text(&args.formula, &args.formula_str, "--formula or --formula-str")?;
            let phi = parse_fo(&text).map_err(domain_err)?;
            let e = fo_to_lif(&phi, &vocab).map_err(domain_err)?;
            Ok((json!({"formula": phi.to_string(), "expr": e.to_string()}), true))
        }
        Command::Clique(args) => clique(args),
        Command::PropertySuite(args) => {
            let suites: Vec<Suite> = if args.suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![args.suite.parse().map_err(CliError::Usage)?]
            };
            let mut reports = Vec::new();
            let mut ok = true;
            for s in suites {
                let r = run_suite(s, c.seed, args.count).map_err(domain_err)?;
                ok &= r.passed();
                reports.push(to_json(&r));
            }
            Ok((json!({"seed": c.seed, "passed": ok, "reports": reports}), ok))
        }
    }
}

fn default_family(
    c: &Common,
    vocab: &Vocabulary,
    max_size: usize,
    fallback: &[Value],
) -> CliResult<(Domain, Vec<Interpretation>, Json)> {
    if let Some((d, i)) = load_interp(c, vocab)? {
        return Ok((d, vec![i], json!({"source": "file", "size": 1})));
    }
    let domain = match parse_domain(c)? {
        Some(d) => d,
        None => Domain::new(fallback.iter().copied()).map_err(domain_err)?,
    };
    let fam = interpretation_family(vocab, &domain, max_size, c.budget, c.seed);
    let info = json!({
        "source": "generated",
        "max_relation_size": max_size,
        "size": fam.interpretations.len(),
        "total": fam.total,
        "exhaustive": fam.exhaustive,
        "seed": fam.seed,
    });
    Ok((domain, fam.interpretations, info))
}

fn check_equiv(c: &Common, args: &CheckEquivArgs) -> CliResult<(Json, bool)> {
    let t1 = expr_text(&c.expr, &c.expr_str, "--expr or --expr-str")?;
    let t2 = expr_text(&args.other, &args.other_str, "--other or --other-str")?;
    let vocab = load_vocab(c, &[&t1, &t2])?;
    let u0 = parse_universe(c)?;
    let e1 = parse_expr_with(&vocab, u0.as_ref(), &t1)?;
    let e2 = parse_expr_with(&vocab, u0.as_ref(), &t2)?;
    let u = universe_for(c, &[&e1, &e2])?;
    let (domain, family, info) = default_family(c, &vocab, args.family.max_size, &[1, 2])?;
    let s = space(u.clone(), domain)?;
    let mut checked = 0;
    for (k, d) in family.iter().enumerate() {
        let a = evaluate(&e1, d, &s).map_err(domain_err)?;
        let b = evaluate(&e2, d, &s).map_err(domain_err)?;
        checked += 1;
        if a != b {
            let only_left = a.difference(&b).map_err(domain_err)?;
            let only_right = b.difference(&a).map_err(domain_err)?;
            return Ok((
                json!({
                    "equivalent": false,
                    "interpretations_checked": checked,
                    "universe": to_json(&u.vars()),
                    "family": info,
                    "counterexample": {
                        "index": k,
                        "interpretation": to_json(&InterpretationFile::from_parts(s.domain(), d)),
                        "only_first": pairs_json(&only_left),
                        "only_second": pairs_json(&only_right),
                    }
                }),
                true,
            ));
        }
    }
    Ok((
        json!({
            "equivalent": true,
            "interpretations_checked": checked,
            "universe": to_json(&u.vars()),
            "family": info,
        }),
        true,
    ))
}

fn witness_json(w: &Witnesses, u: &VarUniverse, family: &[Interpretation], domain: &Domain) -> Json {
    let one = |r: &WitnessReport| {
        let mut m = Map::new();
        m.insert("variable".into(), json!(r.variable.name()));
        m.insert("interpretation_index".into(), json!(r.interpretation));
        m.insert(
            "interpretation".into(),
            to_json(&InterpretationFile::from_parts(domain, &family[r.interpretation])),
        );
        m.insert("left".into(), valuation_json(u, &r.pair.0));
        m.insert("right".into(), valuation_json(u, &r.pair.1));
        if let Some(d) = r.extra {
            m.insert("changed_to".into(), json!(d));
        }
        Json::Object(m)
    };
    let mut reports: Vec<&WitnessReport> = w.reports.iter().collect();
    reports.sort_by(|a, b| a.variable.cmp(&b.variable));
    json!({
        "variables": to_json(&w.vars),
        "witnesses": reports.into_iter().map(one).collect::<Vec<_>>(),
    })
}

fn oracle(c: &Common, args: &FamilyArgs) -> CliResult<(Json, bool)> {
    let (vocab, e) = load_expr(c)?;
    let u = universe_for(c, &[&e])?;
    let (domain, family, info) = default_family(c, &vocab, args.max_size, &[1, 2, 3])?;
    let s = space(u.clone(), domain.clone())?;
    let io = syn_io(&e);
    let all = u.to_set();
    let (outs, ins) = search_witnesses(&e, || Box::new(family.iter().cloned()), &s, &all, &all).map_err(domain_err)?;
    let mut determined = true;
    let mut cylindrified = true;
    let rest = all.difference(&io.fvars).cloned().collect();
    for d in &family {
        let brv = evaluate(&e, d, &s).map_err(domain_err)?;
        determined &= brv_determines(&brv, &io.inputs, &io.outputs).map_err(domain_err)?;
        cylindrified &= brv_inertially_cylindrified(&brv, &rest).map_err(domain_err)?;
    }
    let sound = outs.vars.is_subset(&io.outputs) && ins.vars.is_subset(&io.inputs);
    let mut checks = BTreeMap::new();
    checks.insert("witnesses_within_syntactic", sound);
    checks.insert("inputs_determine_outputs", determined);
    checks.insert("inertially_cylindrified_outside_fvars", cylindrified);
    Ok((
        json!({
            "expr": e.to_string(),
            "universe": to_json(&u.vars()),
            "domain": domain.values(),
            "family": info,
            "syntactic": {"inputs": to_json(&io.inputs), "outputs": to_json(&io.outputs)},
            "witness_outputs": witness_json(&outs, &u, &family, &domain),
            "witness_inputs": witness_json(&ins, &u, &family, &domain),
            "precise": outs.vars == io.outputs && ins.vars == io.inputs,
            "checks": checks,
        }),
        true,
    ))
}

fn clique(args: &CliqueArgs) -> CliResult<(Json, bool)> {
    let spec = CliqueSpec::new(args.n).map_err(domain_err)?;
    let e = match args.emit {
        Emit::TwoN => build_alpha_2n(&spec),
        Emit::Exists3n => build_alpha_exists_3n(&spec),
    };
    let mut doc = json!({
        "n": args.n,
        "emit": match args.emit { Emit::TwoN => "2n", Emit::Exists3n => "exists3n" },
        "variables": to_json(&spec.variables()),
        "expr": e.to_string(),
        "size": e.size(),
    });
    if let Some(path) = &args.graph {
        let g: Graph =
            serde_json::from_str(&read(path)?).map_err(|e| domain_err(format!("{}: {e}", path.display())))?;
        let (domain, interp) = g.interpretation().map_err(domain_err)?;
        let s = space(spec.universe(), domain)?;
        let brv = evaluate(&e, &interp, &s).map_err(domain_err)?;
        doc["graph"] = json!({
            "vertices": s.domain().values(),
            "nonempty": !brv.is_empty(),
            "count": brv.len(),
            "pairs": pairs_json(&brv),
        });
    }
    Ok((doc, true))
}

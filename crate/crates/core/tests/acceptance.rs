//! Acceptance run: one pass/fail line per criterion.

use std::collections::BTreeSet;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use sha2::{Digest, Sha256};

use lif::analysis::syn_io;
use lif::constructions::{build_alpha_exists_3n, CliqueSpec, Graph};
use lif::gen::{self, interpretation_family, GenRng};
use lif::oracle::{brv_inertially_cylindrified, search_witnesses};
use lif::rewrite::{
    build_move, compose_io_disjoint, eliminate_compositions, redundancy_equations, FreshVarSupply, RewriteError,
};
use lif::semantics::{evaluate, Brv, Domain, Interpretation, ValuationSpace, Value};
use lif::suites::{double_increment, run_suite, Suite};
use lif::syntax::{Expr, SelKind, Var, VarSet, VarUniverse, Vocabulary};

const SEED: u64 = 2024;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn var(s: &str) -> Var {
    Var::new(s)
}

fn space(vars: &[&str], d: usize) -> Arc<ValuationSpace> {
    ValuationSpace::new(VarUniverse::from_names(vars.iter().copied()).unwrap(), Domain::range(d)).unwrap()
}

fn suite(s: Suite) -> Outcome {
    let r = run_suite(s, SEED, None).expect("suite runs");
    let parts: Vec<String> = r
        .parts
        .iter()
        .map(|p| format!("{}: {} cases, {} violations", p.name, p.cases, p.violations))
        .collect();
    for p in &r.parts {
        for f in &p.failures {
            eprintln!("  {} case {}: {} ({})", p.name, f.case, f.expr, f.detail);
        }
    }
    outcome(r.passed(), parts.join("; "))
}

// ---- precision ----

fn random_args(rng: &mut GenRng, vars: &[Var], n: usize) -> Vec<Var> {
    (0..n).map(|_| vars.choose(rng).unwrap().clone()).collect()
}

fn atom(rng: &mut GenRng, vocab: &mut Vocabulary, name: &str, vars: &[Var], max_arity: usize) -> Expr {
    let arity = rng.gen_range(1..=max_arity);
    let iar = rng.gen_range(0..=arity);
    vocab.insert(name, arity, iar).unwrap();
    Expr::Atom {
        module: name.to_string(),
        inputs: random_args(rng, vars, iar),
        outputs: random_args(rng, vars, arity - iar),
    }
}

fn random_subset(rng: &mut GenRng, vars: &[Var]) -> VarSet {
    let s: VarSet = vars.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    if s.is_empty() {
        [vars.choose(rng).unwrap().clone()].into()
    } else {
        s
    }
}

/// Atoms, one unary operator over an atom, or one binary operator over two
/// atoms with different module names.
fn precision_shape(rng: &mut GenRng, vars: &[Var]) -> (Expr, Vocabulary) {
    let mut vocab = Vocabulary::new();
    let e = match rng.gen_range(0..10) {
        0 => atom(rng, &mut vocab, "M", vars, 3),
        1..=4 => {
            let a = atom(rng, &mut vocab, "M", vars, 3);
            let x = vars.choose(rng).unwrap().clone();
            let y = vars.choose(rng).unwrap().clone();
            match rng.gen_range(0..6) {
                0 => Expr::converse(a),
                1 => Expr::cyl_l(random_subset(rng, vars), a),
                2 => Expr::cyl_r(random_subset(rng, vars), a),
                3 => Expr::sel(SelKind::L, x, y, a),
                4 => Expr::sel(SelKind::R, x, y, a),
                _ => Expr::sel(SelKind::LR, x, y, a),
            }
        }
        _ => {
            let a = atom(rng, &mut vocab, "M", vars, 2);
            let b = atom(rng, &mut vocab, "N", vars, 2);
            match rng.gen_range(0..4) {
                0 => Expr::union(a, b),
                1 => Expr::intersect(a, b),
                2 => Expr::difference(a, b),
                _ => Expr::compose(a, b),
            }
        }
    };
    (e, vocab)
}

fn precision() -> Outcome {
    const SHAPES: usize = 200;
    let vars: Vec<Var> = ["x", "y", "z"].map(var).to_vec();
    let s = space(&["x", "y", "z"], 3);
    let domain = Domain::range(3);
    let mut rng = gen::rng(SEED);
    let mut seen = BTreeSet::new();
    let mut misses = Vec::new();
    let mut sampled = 0;
    let mut attempts = 0;
    while seen.len() < SHAPES && attempts < 20 * SHAPES {
        attempts += 1;
        let (e, vocab) = precision_shape(&mut rng, &vars);
        if !seen.insert(e.to_string()) {
            continue;
        }
        let fam = interpretation_family(&vocab, &domain, 2, 10_000, SEED);
        if !fam.exhaustive {
            sampled += 1;
        }
        let io = syn_io(&e);
        let (outs, ins) = search_witnesses(
            &e,
            || Box::new(fam.interpretations.iter().cloned()),
            &s,
            &io.outputs,
            &io.inputs,
        )
        .unwrap();
        if outs.vars != io.outputs || ins.vars != io.inputs {
            misses.push(format!(
                "{e}: outputs {:?}/{:?} inputs {:?}/{:?}",
                outs.vars, io.outputs, ins.vars, io.inputs
            ));
        }
    }
    for m in &misses {
        eprintln!("  {m}");
    }
    outcome(
        misses.is_empty() && seen.len() == SHAPES,
        format!(
            "{} shapes, {} imprecise, {} on sampled families",
            seen.len(),
            misses.len(),
            sampled
        ),
    )
}

// ---- redundancy equations ----

fn all_relations(domain: &Domain, arity: usize) -> Vec<Vec<Vec<Value>>> {
    let tuples = gen::all_tuples(domain, arity);
    (0..1usize << tuples.len())
        .map(|mask| {
            tuples
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, t)| t.clone())
                .collect()
        })
        .collect()
}

fn atoms_over(name: &str, arity: usize, iar: usize, vars: &[Var]) -> Vec<Expr> {
    let mut args = vec![vec![]];
    for _ in 0..arity {
        args = args
            .into_iter()
            .flat_map(|a: Vec<Var>| {
                vars.iter().map(move |v| {
                    let mut a = a.clone();
                    a.push(v.clone());
                    a
                })
            })
            .collect();
    }
    args.into_iter()
        .map(|a| Expr::Atom {
            module: name.to_string(),
            inputs: a[..iar].to_vec(),
            outputs: a[iar..].to_vec(),
        })
        .collect()
}

fn redundancy() -> Outcome {
    let vars = [var("x"), var("y")];
    let s = space(&["x", "y"], 2);
    let domain = Domain::range(2);
    let (mut checks, mut bad) = (0usize, 0usize);
    for arity in 0..=2 {
        let rels = all_relations(&domain, arity);
        for iar in 0..=arity {
            let atoms = atoms_over("M", arity, iar, &vars);
            let mut operands = atoms.clone();
            operands.push(Expr::Id);
            for rel in &rels {
                let d = Interpretation::new().with("M", rel.clone());
                for a in &atoms {
                    for b in &operands {
                        for x in &vars {
                            for y in &vars {
                                for (name, lhs, rhs) in redundancy_equations(a, b, x, y) {
                                    checks += 1;
                                    if evaluate(&lhs, &d, &s).unwrap() != evaluate(&rhs, &d, &s).unwrap() {
                                        bad += 1;
                                        if bad <= 5 {
                                            eprintln!("  {name}: {lhs} vs {rhs} on {rel:?}");
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    outcome(bad == 0, format!("{checks} equation instances, {bad} unequal"))
}

// ---- rewriting ----

/// The move on a relation, computed pair by pair from its definition: the
/// right values of `xs` go to `ys`, and `xs` get their left values back.
fn move_direct(b: &Brv, xs: &[usize], ys: &[usize]) -> Brv {
    let s = b.space().clone();
    Brv::from_pairs(
        &s,
        b.iter().map(|(c1, c2)| {
            let mut out = c2;
            for (&x, &y) in xs.iter().zip(ys) {
                out = s.with_digit(out, y, s.digit(c2, x));
            }
            for &x in xs {
                out = s.with_digit(out, x, s.digit(c1, x));
            }
            (c1, out)
        }),
    )
}

fn rewriting() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let r = suite(Suite::RewriteEquivalence);
    ok &= r.ok;
    notes.push(r.detail);

    // The double increment has no composition-free form without a fresh
    // variable, and the io-disjoint formula alone gets it wrong.
    let (e, vocab) = double_increment();
    let Expr::Binary { left: a, right: b, .. } = &e else {
        unreachable!()
    };
    let u = VarUniverse::from_names(["x"]).unwrap();
    let dom = Domain::range(4);
    let inc = Interpretation::new()
        .with("P1", (1..4).map(|i| vec![i, i + 1]))
        .conform(&vocab, &dom)
        .unwrap();
    let s1 = ValuationSpace::new(u.clone(), dom.clone()).unwrap();
    let pinned = matches!(
        eliminate_compositions(&e, &mut FreshVarSupply::pinned(u.clone())),
        Err(RewriteError::FreshExhausted(_))
    );
    let refused = matches!(compose_io_disjoint(a, b), Err(RewriteError::NotIoDisjoint(_)));
    let xs: VarSet = [var("x")].into();
    let naive = Expr::intersect(Expr::cyl_r(xs.clone(), (**a).clone()), Expr::cyl_l(xs, (**b).clone()));
    let truth = evaluate(&e, &inc, &s1).unwrap();
    let naive_wrong = evaluate(&naive, &inc, &s1).unwrap() != truth;
    let mut supply = FreshVarSupply::new(u.clone());
    let (r, ext) = eliminate_compositions(&e, &mut supply).unwrap();
    let s2 = ValuationSpace::new(ext, dom).unwrap();
    let fresh_ok = !supply.issued().is_empty()
        && !r.contains_compose()
        && evaluate(&r, &inc, &s2).unwrap().project(&s1).unwrap() == truth;
    let di = pinned && refused && naive_wrong && fresh_ok;
    ok &= di;
    notes.push(format!(
        "double increment: pinned refused {pinned}, io-disjoint refused {refused}, naive differs {naive_wrong}, fresh path equal {fresh_ok}"
    ));

    // Move expansion against the direct transformer on every relation over
    // two variables and two values.
    let s = space(&["x", "y"], 2);
    let m = Expr::Atom {
        module: "M".into(),
        inputs: vec![var("x"), var("y")],
        outputs: vec![var("x"), var("y")],
    };
    let rels = all_relations(&Domain::range(2), 4);
    let mut bad = 0;
    let mut moved_x = 0;
    for (from, to, fi, ti) in [("x", "y", 0, 1), ("y", "x", 1, 0)] {
        let mv = build_move(&[var(from)], &[var(to)], m.clone()).unwrap();
        for rel in &rels {
            let d = Interpretation::new().with("M", rel.clone());
            let got = evaluate(&mv, &d, &s).unwrap();
            if got != move_direct(&evaluate(&m, &d, &s).unwrap(), &[fi], &[ti]) {
                bad += 1;
            }
            if got.iter().any(|(c1, c2)| s.digit(c1, fi) != s.digit(c2, fi)) {
                moved_x += 1;
            }
        }
    }
    ok &= bad == 0 && moved_x == 0;
    notes.push(format!(
        "move: {} relations x 2 directions, {bad} mismatches, {moved_x} changing the moved tuple",
        rels.len()
    ));

    // Moving out of the way and back preserves composition when the
    // temporary variable is inertially cylindrified in both operands.
    let s3 = space(&["x", "y", "z"], 2);
    let mut rng = gen::rng(SEED);
    let (mut tried, mut back_bad) = (0, 0);
    let ys: VarSet = [var("y")].into();
    while tried < 2000 {
        let cyl = |rng: &mut GenRng| {
            let base = Brv::from_pairs(
                &s3,
                (0..s3.size())
                    .flat_map(|a| (0..s3.size()).map(move |b| (a, b)))
                    .filter(|_| rng.gen_bool(0.3))
                    .collect::<Vec<_>>(),
            );
            base.cyl(lif::syntax::Side::Left, &ys)
                .unwrap()
                .cyl(lif::syntax::Side::Right, &ys)
                .unwrap()
                .filter(|a, b| s3.digit(a, 1) == s3.digit(b, 1))
        };
        let (ba, bb) = (cyl(&mut rng), cyl(&mut rng));
        if !brv_inertially_cylindrified(&ba, &ys).unwrap() || !brv_inertially_cylindrified(&bb, &ys).unwrap() {
            back_bad += 1;
            break;
        }
        tried += 1;
        let lhs = ba.compose(&bb).unwrap();
        let rhs = move_direct(&ba.compose(&move_direct(&bb, &[0], &[1])).unwrap(), &[1], &[0]);
        if lhs != rhs {
            back_bad += 1;
        }
    }
    ok &= back_bad == 0;
    notes.push(format!(
        "move-and-back composition: {tried} relation pairs, {back_bad} mismatches"
    ));
    outcome(ok, notes.join("; "))
}

// ---- cliques ----

fn has_clique(vertices: &[Value], edges: &BTreeSet<(Value, Value)>, k: usize) -> bool {
    fn grow(cands: &[Value], chosen: &mut Vec<Value>, edges: &BTreeSet<(Value, Value)>, k: usize) -> bool {
        if chosen.len() == k {
            return true;
        }
        for (i, &v) in cands.iter().enumerate() {
            if chosen.iter().all(|&c| edges.contains(&(c, v))) {
                chosen.push(v);
                if grow(&cands[i + 1..], chosen, edges, k) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    grow(vertices, &mut Vec::new(), edges, k)
}

fn clique_agrees(g: &Graph, e: &Expr, spec: &CliqueSpec) -> (bool, bool) {
    let (domain, interp) = g.interpretation().unwrap();
    let s = ValuationSpace::new(spec.universe(), domain.clone()).unwrap();
    let got = !evaluate(e, &interp, &s).unwrap().is_empty();
    let sym: BTreeSet<(Value, Value)> = g
        .edges
        .iter()
        .filter(|(a, b)| a != b)
        .flat_map(|&(a, b)| [(a, b), (b, a)])
        .collect();
    let want = has_clique(domain.values(), &sym, 6);
    (got == want, want)
}

fn cliques() -> Outcome {
    let spec = CliqueSpec::new(2).unwrap();
    let e = build_alpha_exists_3n(&spec);
    let k6: Vec<(Value, Value)> = (1..=6).flat_map(|a| ((a + 1)..=6).map(move |b| (a, b))).collect();
    let full = Graph {
        vertices: (1..=6).collect(),
        edges: k6.clone(),
    };
    let minus = Graph {
        vertices: (1..=6).collect(),
        edges: k6.into_iter().filter(|&e| e != (3, 4)).collect(),
    };
    let (a, k6_has) = clique_agrees(&full, &e, &spec);
    let (b, minus_has) = clique_agrees(&minus, &e, &spec);
    let mut rng = gen::rng(SEED);
    let (mut agree, mut positive) = (0, 0);
    for _ in 0..100 {
        let n = rng.gen_range(1..=7);
        let p = rng.gen_range(0.7..1.0);
        let edges = (1..=n)
            .flat_map(|a| ((a + 1)..=n).map(move |b| (a, b)))
            .filter(|_| rng.gen_bool(p))
            .collect();
        let g = Graph {
            vertices: (1..=n).collect(),
            edges,
        };
        let (ok, has) = clique_agrees(&g, &e, &spec);
        agree += ok as usize;
        positive += has as usize;
    }
    outcome(
        a && b && k6_has && !minus_has && agree == 100,
        format!("K6 nonempty {k6_has}, K6 minus an edge nonempty {minus_has}, random graphs agreeing {agree}/100 ({positive} with a 6-clique)"),
    )
}

// ---- determinism ----

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let interp = dir.path().join("interp.json");
    std::fs::write(
        &interp,
        r#"{"domain":[1,2,3,4],"relations":{"P1":[[1,2],[2,3],[3,4]]}}"#,
    )
    .unwrap();
    let graph = dir.path().join("graph.json");
    std::fs::write(&graph, r#"{"edges":[[1,2],[1,3],[2,3],[3,4]]}"#).unwrap();
    let (interp, graph) = (interp.to_str().unwrap(), graph.to_str().unwrap());
    let e = "P1(x;x) ; P1(x;y)";
    let runs: Vec<Vec<&str>> = vec![
        vec!["parse", "--expr-str", e],
        vec!["analyze", "--expr-str", e],
        vec!["eval", "--expr-str", e, "--interp", interp],
        vec![
            "check-equiv",
            "--expr-str",
            "sel_r{x=y}(P1(x;y))",
            "--other-str",
            "conv sel_l{x=y}(conv P1(x;y))",
            "--universe",
            "x,y",
            "--seed",
            "7",
        ],
        vec!["oracle", "--expr-str", e, "--universe", "x,y", "--seed", "7"],
        vec!["rewrite", "--eliminate-composition", "--expr-str", e],
        vec![
            "rewrite",
            "--expand-redundant",
            "--expr-str",
            "sel_l{x=y}(P1(x;y)) & P1(y;x)",
        ],
        vec!["to-fo", "--expr-str", e],
        vec![
            "from-fo",
            "--vocab-str",
            "R/2 in 0",
            "--formula-str",
            "(exists z (and (R x z) (R z y)))",
        ],
        vec!["clique", "--n", "2", "--emit", "exists3n", "--graph", graph],
        vec!["property-suite", "--seed", "7"],
    ];
    let bin = env!("CARGO_BIN_EXE_lif");
    let digest = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().unwrap();
        let mut h = Sha256::new();
        h.update(out.status.code().unwrap_or(-1).to_le_bytes());
        h.update(&out.stdout);
        (h.finalize().to_vec(), out.status.success())
    };
    let mut differ = Vec::new();
    let mut failed = Vec::new();
    for args in &runs {
        let (h1, ok1) = digest(args);
        let (h2, _) = digest(args);
        if h1 != h2 {
            differ.push(args[0]);
        }
        if !ok1 {
            failed.push(args[0]);
        }
    }
    outcome(
        differ.is_empty() && failed.is_empty(),
        format!(
            "{} commands run twice, differing {differ:?}, failing {failed:?}",
            runs.len()
        ),
    )
}

type Criterion = (&'static str, Duration, Box<dyn Fn() -> Outcome>);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("inertia", Duration::from_secs(60), Box::new(|| suite(Suite::Inertia))),
        (
            "determinacy",
            Duration::from_secs(120),
            Box::new(|| suite(Suite::Determinacy)),
        ),
        (
            "free variables",
            Duration::from_secs(120),
            Box::new(|| suite(Suite::FreeVariable)),
        ),
        (
            "soundness",
            Duration::from_secs(300),
            Box::new(|| suite(Suite::Soundness)),
        ),
        ("precision", Duration::from_secs(300), Box::new(precision)),
        ("operator redundancy", Duration::from_secs(10), Box::new(redundancy)),
        ("rewrite equivalence", Duration::from_secs(300), Box::new(rewriting)),
        (
            "FO bridge",
            Duration::from_secs(300),
            Box::new(|| suite(Suite::FoRoundtrip)),
        ),
        ("cliques", Duration::from_secs(60), Box::new(cliques)),
        ("determinism", Duration::from_secs(600), Box::new(determinism)),
    ];
    let mut failures = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        let took = t.elapsed();
        let ok = o.ok && took <= *limit;
        failures += !ok as usize;
        println!(
            "{} {:>2} {name}: {} [{:.2}s, limit {}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

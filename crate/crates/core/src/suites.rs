//! Seeded property suites checking the analysis, the rewrites and the FO
//! bridge against exact evaluation on random small instances.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::analysis::{is_io_disjoint, syn_io};
use crate::folink::{copy_var, fo_evaluate, fo_to_lif, lif_to_fo, pair_assignment, uses_third_copy, Assignment};
use crate::gen::{self, GenConfig, GenRng};
use crate::oracle::{brv_determines, brv_inertially_cylindrified, inertia_violations, witness_io};
use crate::rewrite::{compose_io_disjoint, eliminate_compositions, redundancy_equations, FreshVarSupply};
use crate::semantics::{evaluate, Brv, Domain, EvalError, Interpretation, ValuationSpace, Value};
use crate::syntax::{parse_expression, Expr, Var, VarUniverse, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Inertia,
    Determinacy,
    FreeVariable,
    Soundness,
    RewriteEquivalence,
    FoRoundtrip,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Inertia,
        Suite::Determinacy,
        Suite::FreeVariable,
        Suite::Soundness,
        Suite::RewriteEquivalence,
        Suite::FoRoundtrip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Inertia => "inertia",
            Suite::Determinacy => "determinacy",
            Suite::FreeVariable => "free-variable",
            Suite::Soundness => "soundness",
            Suite::RewriteEquivalence => "rewrite-equivalence",
            Suite::FoRoundtrip => "fo-roundtrip",
        }
    }

    /// Number of generated cases per part when not overridden.
    pub fn default_count(self) -> usize {
        match self {
            Suite::Inertia | Suite::Determinacy | Suite::FreeVariable => 1000,
            Suite::Soundness => 500,
            Suite::RewriteEquivalence | Suite::FoRoundtrip => 200,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub case: usize,
    pub expr: String,
    pub universe: Vec<Var>,
    pub domain: Vec<Value>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PartReport {
    pub name: String,
    pub cases: usize,
    pub checks: usize,
    pub violations: usize,
    pub skipped: usize,
    /// Suite-specific tallies, e.g. how many witnesses were found.
    pub stats: Vec<(String, usize)>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub violations: usize,
    pub parts: Vec<PartReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.parts.iter().all(|p| p.cases > 0)
    }
}

const MAX_FAILURES: usize = 10;
/// Largest valuation space used by the rewrite suite.
const REWRITE_SPACE_CAP: usize = 1024;

impl PartReport {
    fn new(name: &str) -> Self {
        PartReport {
            name: name.to_string(),
            ..Default::default()
        }
    }

    fn fail(&mut self, case: usize, expr: &Expr, space: &ValuationSpace, detail: String) {
        self.violations += 1;
        if self.failures.len() < MAX_FAILURES {
            self.failures.push(Failure {
                case,
                expr: expr.to_string(),
                universe: space.universe().vars().to_vec(),
                domain: space.domain().values().to_vec(),
                detail,
            });
        }
    }

    fn stat(&mut self, key: &str, n: usize) {
        match self.stats.iter_mut().find(|(k, _)| k == key) {
            Some((_, v)) => *v += n,
            None => self.stats.push((key.to_string(), n)),
        }
    }
}

/// One random instance: vocabulary, universe and domain.
struct Instance {
    vocab: Vocabulary,
    space: Arc<ValuationSpace>,
}

fn instance(rng: &mut GenRng, cfg: &GenConfig, input_free: bool) -> Instance {
    let vocab = gen::random_vocabulary(rng, cfg, input_free);
    let u = gen::random_universe(rng, cfg);
    let d = gen::random_domain(rng, cfg);
    let space = ValuationSpace::new(u, d).expect("generation bounds keep spaces small");
    Instance { vocab, space }
}

const INTERP_MAX_SIZE: usize = 4;

fn interps(rng: &mut GenRng, inst: &Instance, k: usize) -> Vec<Interpretation> {
    (0..k)
        .map(|_| gen::random_interpretation(rng, &inst.vocab, inst.space.domain(), INTERP_MAX_SIZE))
        .collect()
}

/// Runs `suite` with `count` cases per part (or the default).
pub fn run_suite(suite: Suite, seed: u64, count: Option<usize>) -> Result<SuiteReport, EvalError> {
    let n = count.unwrap_or_else(|| suite.default_count());
    let mut rng = gen::rng(seed);
    let parts = match suite {
        Suite::Inertia => vec![per_expression(&mut rng, n, 10, "inertia", |brv, e| {
            let o = syn_io(e).outputs;
            let bad = inertia_violations(brv, &o);
            Ok((
                bad.is_empty(),
                format!("{} pairs change variables outside {:?}", bad.len(), o),
            ))
        })?],
        Suite::Determinacy => vec![per_expression(&mut rng, n, 10, "determinacy", |brv, e| {
            let io = syn_io(e);
            Ok((
                brv_determines(brv, &io.inputs, &io.outputs)?,
                "inputs do not determine outputs".into(),
            ))
        })?],
        Suite::FreeVariable => vec![per_expression(&mut rng, n, 10, "free-variable", |brv, e| {
            let fv = syn_io(e).fvars;
            let rest = brv.space().universe().to_set().difference(&fv).cloned().collect();
            Ok((
                brv_inertially_cylindrified(brv, &rest)?,
                "not inertially cylindrified outside the free variables".into(),
            ))
        })?],
        Suite::Soundness => vec![soundness(&mut rng, n)?],
        Suite::RewriteEquivalence => vec![
            redundancy(&mut rng, n)?,
            io_disjoint_composition(&mut rng, n)?,
            elimination(&mut rng, n)?,
        ],
        Suite::FoRoundtrip => vec![fo_embedding(&mut rng, n)?, lif_translation(&mut rng, n)?],
    };
    Ok(SuiteReport {
        suite: suite.name().to_string(),
        seed,
        violations: parts.iter().map(|p| p.violations).sum(),
        parts,
    })
}

fn per_expression(
    rng: &mut GenRng,
    n: usize,
    per_case: usize,
    name: &str,
    check: impl Fn(&Brv, &Expr) -> Result<(bool, String), EvalError>,
) -> Result<PartReport, EvalError> {
    let cfg = GenConfig::default();
    let mut part = PartReport::new(name);
    for case in 0..n {
        let inst = instance(rng, &cfg, false);
        let e = gen::random_expr(rng, &cfg, &inst.vocab, inst.space.universe());
        part.cases += 1;
        for d in interps(rng, &inst, per_case) {
            let brv = evaluate(&e, &d, &inst.space)?;
            part.checks += 1;
            let (ok, why) = check(&brv, &e)?;
            if !ok {
                part.fail(case, &e, &inst.space, why);
            }
        }
    }
    Ok(part)
}

fn soundness(rng: &mut GenRng, n: usize) -> Result<PartReport, EvalError> {
    let cfg = GenConfig::default();
    let mut part = PartReport::new("soundness");
    for case in 0..n {
        let inst = instance(rng, &cfg, false);
        let e = gen::random_expr(rng, &cfg, &inst.vocab, inst.space.universe());
        let family = interps(rng, &inst, 20);
        let (outs, ins) = witness_io(&e, &family, &inst.space)?;
        let io = syn_io(&e);
        part.cases += 1;
        part.checks += 2;
        part.stat("witnessed_outputs", outs.vars.len());
        part.stat("witnessed_inputs", ins.vars.len());
        if !outs.vars.is_subset(&io.outputs) {
            part.fail(
                case,
                &e,
                &inst.space,
                format!("output witnesses {:?} not within {:?}", outs.vars, io.outputs),
            );
        }
        if !ins.vars.is_subset(&io.inputs) {
            part.fail(
                case,
                &e,
                &inst.space,
                format!("input witnesses {:?} not within {:?}", ins.vars, io.inputs),
            );
        }
    }
    Ok(part)
}

/// Redundancy equations on random operands.
fn redundancy(rng: &mut GenRng, n: usize) -> Result<PartReport, EvalError> {
    let cfg = GenConfig {
        max_depth: 3,
        ..GenConfig::default()
    };
    let mut part = PartReport::new("redundancy-equations");
    for case in 0..n {
        let inst = instance(rng, &cfg, false);
        let u = inst.space.universe();
        let a = gen::random_expr(rng, &cfg, &inst.vocab, u);
        let b = gen::random_expr(rng, &cfg, &inst.vocab, u);
        let x = u.vars()[rng.gen_range(0..u.len())].clone();
        let y = u.vars()[rng.gen_range(0..u.len())].clone();
        part.cases += 1;
        for d in interps(rng, &inst, 3) {
            for (name, lhs, rhs) in redundancy_equations(&a, &b, &x, &y) {
                part.checks += 1;
                if evaluate(&lhs, &d, &inst.space)? != evaluate(&rhs, &d, &inst.space)? {
                    part.fail(case, &lhs, &inst.space, format!("{name} fails"));
                }
            }
        }
    }
    Ok(part)
}

fn io_disjoint_composition(rng: &mut GenRng, n: usize) -> Result<PartReport, EvalError> {
    let cfg = GenConfig {
        max_depth: 4,
        ..GenConfig::default()
    };
    let mut part = PartReport::new("io-disjoint-composition");
    for case in 0..n {
        let inst = instance(rng, &cfg, false);
        let u = inst.space.universe();
        let alpha = gen::random_expr(rng, &cfg, &inst.vocab, u);
        let beta = loop {
            let b = gen::random_expr(rng, &cfg, &inst.vocab, u);
            if is_io_disjoint(&b) {
                break b;
            }
        };
        let direct = compose_io_disjoint(&alpha, &beta).expect("beta is io-disjoint");
        let composed = Expr::compose(alpha, beta);
        part.cases += 1;
        for d in interps(rng, &inst, 5) {
            part.checks += 1;
            if evaluate(&composed, &d, &inst.space)? != evaluate(&direct, &d, &inst.space)? {
                part.fail(case, &composed, &inst.space, "io-disjoint form differs".into());
            }
        }
    }
    Ok(part)
}

/// Largest domain `{1..k}`, `k <= max`, whose space over `u` stays within
/// `cap` valuations; `None` below two values.
fn fitting_domain(u: &VarUniverse, max: usize, cap: usize) -> Option<Domain> {
    (2..=max)
        .rev()
        .find(|&k| (k as u128).pow(u.len() as u32) <= cap as u128)
        .map(Domain::range)
}

/// The double increment `P1(x;x) ; P1(x;x)`, which needs a fresh variable.
pub fn double_increment() -> (Expr, Vocabulary) {
    let vocab = Vocabulary::new().with("P1", 2, 1).expect("valid signature");
    let e = parse_expression("P1(x;x) ; P1(x;x)", &vocab).expect("valid expression");
    (e, vocab)
}

fn elimination(rng: &mut GenRng, n: usize) -> Result<PartReport, EvalError> {
    let cfg = GenConfig::default();
    let mut part = PartReport::new("composition-elimination");
    let mut case = 0;
    let mut fixed = Some(double_increment());
    while part.cases < n {
        case += 1;
        let (e, vocab, u, dmax) = match fixed.take() {
            Some((e, vocab)) => (e, vocab, VarUniverse::from_names(["x"]).expect("valid"), 4),
            None => {
                let inst = instance(rng, &cfg, false);
                let e = gen::random_expr_with_compose(rng, &cfg, &inst.vocab, inst.space.universe());
                (e, inst.vocab, inst.space.universe().clone(), cfg.max_domain)
            }
        };
        let mut supply = FreshVarSupply::new(u.clone());
        let (r, ext) = eliminate_compositions(&e, &mut supply).expect("unpinned supply");
        let Some(domain) = fitting_domain(&ext, dmax, REWRITE_SPACE_CAP) else {
            part.skipped += 1;
            continue;
        };
        part.cases += 1;
        part.stat("fresh_variables", ext.len() - u.len());
        let big = ValuationSpace::new(ext, domain.clone())?;
        let small = ValuationSpace::new(u, domain.clone())?;
        if r.contains_compose() {
            part.fail(case, &e, &big, "result still contains a composition".into());
        }
        let ds: Vec<Interpretation> = if e.modules().contains("P1") && vocab.len() == 1 {
            vec![Interpretation::new().with("P1", domain.values().windows(2).map(|w| vec![w[0], w[1]]))]
        } else {
            (0..3)
                .map(|_| gen::random_interpretation(rng, &vocab, &domain, INTERP_MAX_SIZE))
                .collect()
        };
        for d in ds {
            part.checks += 2;
            let want = evaluate(&e, &d, &big)?;
            let got = evaluate(&r, &d, &big)?;
            if want != got {
                part.fail(
                    case,
                    &e,
                    &big,
                    format!("rewritten form {r} differs on the extended universe"),
                );
            }
            if got.project(&small)? != evaluate(&e, &d, &small)? {
                part.fail(case, &e, &small, "differs on the original universe".into());
            }
        }
    }
    Ok(part)
}

fn fo_embedding(rng: &mut GenRng, n: usize) -> Result<PartReport, EvalError> {
    let cfg = GenConfig {
        max_arity: 2,
        ..GenConfig::default()
    };
    let mut part = PartReport::new("fo-to-lif");
    for case in 0..n {
        let vocab = gen::random_vocabulary(rng, &cfg, true);
        let u = gen::random_universe(rng, &cfg);
        let phi = gen::random_fo(rng, &vocab, &u, 3);
        let e = fo_to_lif(&phi, &vocab).expect("input-free vocabulary");
        part.cases += 1;
        for k in 1..=3 {
            let domain = Domain::range(k);
            let space = ValuationSpace::new(u.clone(), domain.clone())?;
            let d = gen::random_interpretation(rng, &vocab, &domain, INTERP_MAX_SIZE);
            let mut want = Brv::empty(&space);
            for c in 0..space.size() {
                let val = space.decode(c);
                let env: Assignment = u.vars().iter().cloned().zip(val.0.iter().copied()).collect();
                if fo_evaluate(&phi, &d, &env, &domain).expect("all variables bound") {
                    want.insert(c, c);
                }
            }
            part.checks += 1;
            if evaluate(&e, &d, &space)? != want {
                part.fail(case, &e, &space, format!("embedding of {phi} differs"));
            }
        }
    }
    Ok(part)
}

fn lif_translation(rng: &mut GenRng, n: usize) -> Result<PartReport, EvalError> {
    let cfg = GenConfig::default();
    let mut part = PartReport::new("lif-to-fo");
    for case in 0..n {
        let inst = instance(rng, &cfg, false);
        let u = inst.space.universe();
        let e = gen::random_expr(rng, &cfg, &inst.vocab, u);
        let phi = lif_to_fo(&e, u).expect("variables within universe");
        let d = gen::random_interpretation(rng, &inst.vocab, inst.space.domain(), INTERP_MAX_SIZE);
        let brv = evaluate(&e, &d, &inst.space)?;
        part.cases += 1;
        let used = phi.variables().len();
        let bound = if e.contains_compose() { 3 } else { 2 } * u.len();
        part.checks += 1;
        if used > bound {
            part.fail(case, &e, &inst.space, format!("{used} variables used, bound {bound}"));
        }
        if !e.contains_compose() {
            part.checks += 1;
            if uses_third_copy(&phi, u) {
                part.fail(
                    case,
                    &e,
                    &inst.space,
                    format!("composition-free input uses {}", copy_var(2, 0)),
                );
            }
        }
        for a in 0..inst.space.size() {
            for b in 0..inst.space.size() {
                let env = pair_assignment(u, &inst.space.decode(a).0, &inst.space.decode(b).0);
                let sat = fo_evaluate(&phi, &d, &env, inst.space.domain()).expect("all variables bound");
                part.checks += 1;
                if sat != brv.contains(a, b) {
                    part.fail(case, &e, &inst.space, format!("membership differs at pair ({a}, {b})"));
                }
            }
        }
    }
    Ok(part)
}

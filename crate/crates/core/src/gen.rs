//! Seeded random generation of vocabularies, expressions, interpretations
//! and FO formulas, plus enumeration of small interpretation families.

use std::collections::BTreeSet;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::folink::FoFormula;
use crate::semantics::{Domain, Interpretation, Value};
use crate::syntax::{BinOp, Expr, SelKind, Side, Var, VarSet, VarUniverse, Vocabulary};

pub type GenRng = ChaCha8Rng;

pub fn rng(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bounds for random generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub max_depth: usize,
    pub max_vars: usize,
    pub max_domain: usize,
    pub max_modules: usize,
    pub max_arity: usize,
    pub allow_compose: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 5,
            max_vars: 3,
            max_domain: 3,
            max_modules: 2,
            max_arity: 3,
            allow_compose: true,
        }
    }
}

pub const VAR_NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
pub const MODULE_NAMES: [&str; 4] = ["M", "N", "P", "Q"];

pub fn random_vocabulary(rng: &mut GenRng, cfg: &GenConfig, input_free: bool) -> Vocabulary {
    let k = rng.gen_range(1..=cfg.max_modules.max(1));
    let mut v = Vocabulary::new();
    for name in &MODULE_NAMES[..k] {
        let ar = rng.gen_range(0..=cfg.max_arity);
        let iar = if input_free { 0 } else { rng.gen_range(0..=ar) };
        v.insert(*name, ar, iar).expect("generated signature is valid");
    }
    v
}

pub fn random_universe(rng: &mut GenRng, cfg: &GenConfig) -> VarUniverse {
    let k = rng.gen_range(1..=cfg.max_vars.clamp(1, VAR_NAMES.len()));
    VarUniverse::from_names(VAR_NAMES[..k].iter().copied()).expect("distinct names")
}

pub fn random_domain(rng: &mut GenRng, cfg: &GenConfig) -> Domain {
    Domain::range(rng.gen_range(1..=cfg.max_domain.max(1)))
}

fn pick_var(rng: &mut GenRng, u: &VarUniverse) -> Var {
    u.vars().choose(rng).expect("nonempty universe").clone()
}

fn random_subset(rng: &mut GenRng, u: &VarUniverse) -> VarSet {
    loop {
        let s: VarSet = u.vars().iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        if !s.is_empty() {
            return s;
        }
    }
}

pub fn random_atom(rng: &mut GenRng, vocab: &Vocabulary, u: &VarUniverse) -> Expr {
    let entries: Vec<(&str, _)> = vocab.iter().collect();
    let (name, sig) = *entries.choose(rng).expect("nonempty vocabulary");
    let args: Vec<Var> = (0..sig.arity).map(|_| pick_var(rng, u)).collect();
    Expr::Atom {
        module: name.to_string(),
        inputs: args[..sig.input_arity].to_vec(),
        outputs: args[sig.input_arity..].to_vec(),
    }
}

/// Random expression of depth at most `cfg.max_depth`.
pub fn random_expr(rng: &mut GenRng, cfg: &GenConfig, vocab: &Vocabulary, u: &VarUniverse) -> Expr {
    expr_at(rng, cfg, vocab, u, cfg.max_depth.max(1))
}

fn expr_at(rng: &mut GenRng, cfg: &GenConfig, vocab: &Vocabulary, u: &VarUniverse, depth: usize) -> Expr {
    if depth <= 1 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.15) {
            Expr::Id
        } else {
            random_atom(rng, vocab, u)
        };
    }
    let sub = |rng: &mut GenRng| expr_at(rng, cfg, vocab, u, depth - 1);
    match rng.gen_range(0..10) {
        0..=4 => {
            let ops: &[BinOp] = if cfg.allow_compose {
                &[BinOp::Union, BinOp::Intersect, BinOp::Difference, BinOp::Compose]
            } else {
                &[BinOp::Union, BinOp::Intersect, BinOp::Difference]
            };
            let op = *ops.choose(rng).expect("nonempty");
            let l = sub(rng);
            let r = sub(rng);
            Expr::binary(op, l, r)
        }
        5 => Expr::converse(sub(rng)),
        6 | 7 => {
            let side = if rng.gen_bool(0.5) { Side::Left } else { Side::Right };
            let vars = random_subset(rng, u);
            Expr::cyl(side, vars, sub(rng))
        }
        _ => {
            let kind = *[SelKind::L, SelKind::R, SelKind::LR].choose(rng).expect("nonempty");
            let x = pick_var(rng, u);
            let y = pick_var(rng, u);
            Expr::sel(kind, x, y, sub(rng))
        }
    }
}

/// Random expression containing at least one composition.
pub fn random_expr_with_compose(rng: &mut GenRng, cfg: &GenConfig, vocab: &Vocabulary, u: &VarUniverse) -> Expr {
    loop {
        let e = random_expr(rng, cfg, vocab, u);
        if e.contains_compose() {
            return e;
        }
    }
}

/// Random relation of at most `max_size` tuples for every module.
pub fn random_interpretation(rng: &mut GenRng, vocab: &Vocabulary, domain: &Domain, max_size: usize) -> Interpretation {
    let mut d = Interpretation::new();
    for (name, sig) in vocab.iter() {
        let all = all_tuples(domain, sig.arity);
        let k = rng.gen_range(0..=max_size.min(all.len()));
        let picked: Vec<Vec<Value>> = index::sample(rng, all.len(), k)
            .into_iter()
            .map(|i| all[i].clone())
            .collect();
        d.set(name, picked);
    }
    d
}

/// Every `arity`-tuple over `domain`, in lexicographic order.
pub fn all_tuples(domain: &Domain, arity: usize) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                domain.values().iter().map(move |&v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// All relations of at most `max_size` tuples, by size then lexicographically.
fn small_relations(domain: &Domain, arity: usize, max_size: usize) -> Vec<BTreeSet<Vec<Value>>> {
    let tuples = all_tuples(domain, arity);
    let mut out: Vec<BTreeSet<Vec<Value>>> = vec![BTreeSet::new()];
    let mut frontier: Vec<(usize, BTreeSet<Vec<Value>>)> = vec![(0, BTreeSet::new())];
    for _ in 0..max_size {
        let mut next = Vec::new();
        for (start, rel) in &frontier {
            for (i, t) in tuples.iter().enumerate().skip(*start) {
                let mut r = rel.clone();
                r.insert(t.clone());
                next.push((i + 1, r));
            }
        }
        out.extend(next.iter().map(|(_, r)| r.clone()));
        frontier = next;
    }
    out
}

/// A finite family of interpretations and how it was obtained.
#[derive(Debug, Clone)]
pub struct Family {
    pub interpretations: Vec<Interpretation>,
    /// Number of interpretations with every relation of at most the size bound.
    pub total: usize,
    /// True when `interpretations` is all of them.
    pub exhaustive: bool,
    pub seed: u64,
}

/// Interpretations whose relations have at most `max_size` tuples each,
/// ordered by total size. When there are more than `budget`, every size
/// class that fits entirely is kept and the rest of the budget is filled by
/// a sample drawn with `seed`.
pub fn interpretation_family(vocab: &Vocabulary, domain: &Domain, max_size: usize, budget: usize, seed: u64) -> Family {
    let names: Vec<&str> = vocab.iter().map(|(n, _)| n).collect();
    let choices: Vec<Vec<BTreeSet<Vec<Value>>>> = vocab
        .iter()
        .map(|(_, sig)| small_relations(domain, sig.arity, max_size))
        .collect();
    let total = choices.iter().map(|c| c.len()).product::<usize>();
    // Mixed-radix index -> choice per module.
    let decode = |mut k: usize| -> Vec<usize> {
        let mut idx = vec![0; choices.len()];
        for (i, c) in choices.iter().enumerate().rev() {
            idx[i] = k % c.len();
            k /= c.len();
        }
        idx
    };
    let weight = |idx: &[usize]| -> usize { idx.iter().zip(&choices).map(|(&i, c)| c[i].len()).sum() };
    let mut keyed: Vec<(usize, usize)> = (0..total).map(|k| (weight(&decode(k)), k)).collect();
    keyed.sort_unstable();
    let exhaustive = total <= budget;
    let chosen: Vec<usize> = if exhaustive {
        keyed.iter().map(|&(_, k)| k).collect()
    } else {
        let mut cut = 0;
        while cut < keyed.len() {
            let w = keyed[cut].0;
            let end = keyed[cut..]
                .iter()
                .position(|&(x, _)| x != w)
                .map_or(keyed.len(), |p| cut + p);
            if end > budget {
                break;
            }
            cut = end;
        }
        let mut r = rng(seed);
        let mut rest: Vec<usize> = index::sample(&mut r, keyed.len() - cut, budget - cut)
            .into_iter()
            .map(|i| cut + i)
            .collect();
        rest.sort_unstable();
        keyed[..cut]
            .iter()
            .map(|&(_, k)| k)
            .chain(rest.into_iter().map(|i| keyed[i].1))
            .collect()
    };
    let interpretations = chosen
        .into_iter()
        .map(|k| {
            let idx = decode(k);
            let mut d = Interpretation::new();
            for (m, (&i, c)) in idx.iter().zip(&choices).enumerate() {
                d.set(names[m], c[i].iter().cloned());
            }
            d
        })
        .collect();
    Family {
        interpretations,
        total,
        exhaustive,
        seed,
    }
}

/// Random FO formula of depth at most `depth` over `vars`, using the
/// relations of `vocab`.
pub fn random_fo(rng: &mut GenRng, vocab: &Vocabulary, vars: &VarUniverse, depth: usize) -> FoFormula {
    if depth <= 1 || rng.gen_bool(0.3) {
        if rng.gen_bool(0.35) {
            return FoFormula::Equals(pick_var(rng, vars), pick_var(rng, vars));
        }
        let entries: Vec<(&str, _)> = vocab.iter().collect();
        let (name, sig) = *entries.choose(rng).expect("nonempty vocabulary");
        return FoFormula::rel(name, (0..sig.arity).map(|_| pick_var(rng, vars)));
    }
    match rng.gen_range(0..4) {
        0 => {
            let k = rng.gen_range(1..=2);
            FoFormula::And((0..=k).map(|_| random_fo(rng, vocab, vars, depth - 1)).collect())
        }
        1 => {
            let k = rng.gen_range(1..=2);
            FoFormula::Or((0..=k).map(|_| random_fo(rng, vocab, vars, depth - 1)).collect())
        }
        2 => FoFormula::negate(random_fo(rng, vocab, vars, depth - 1)),
        _ => {
            let v = pick_var(rng, vars);
            FoFormula::exists(v, random_fo(rng, vocab, vars, depth - 1))
        }
    }
}

//! First-order logic over the same vocabularies: an s-expression syntax, a
//! finite-model evaluator, the embedding of FO into LIF (for vocabularies
//! whose modules have no inputs), and the translation of LIF into FO over
//! three indexed copies of the variable universe.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::semantics::{Domain, Interpretation, Value};
use crate::syntax::{is_identifier, BinOp, Expr, SelKind, Side, Var, VarSet, VarUniverse, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FoFormula {
    Equals(Var, Var),
    Rel { name: String, args: Vec<Var> },
    And(Vec<FoFormula>),
    Or(Vec<FoFormula>),
    Not(Box<FoFormula>),
    Exists(Var, Box<FoFormula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FoError {
    #[error("unbound variable {0}")]
    Unbound(Var),
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("relation {name} has arity {expected}, used with {found} arguments")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("relation {0} has inputs; only input-free vocabularies embed into LIF")]
    InputArity(String),
    #[error("s-expression syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

impl FoFormula {
    pub fn eq(a: impl Into<Var>, b: impl Into<Var>) -> Self {
        FoFormula::Equals(a.into(), b.into())
    }

    pub fn rel(name: &str, args: impl IntoIterator<Item = Var>) -> Self {
        FoFormula::Rel {
            name: name.to_string(),
            args: args.into_iter().collect(),
        }
    }

    pub fn negate(f: FoFormula) -> Self {
        FoFormula::Not(Box::new(f))
    }

    pub fn exists(v: impl Into<Var>, f: FoFormula) -> Self {
        FoFormula::Exists(v.into(), Box::new(f))
    }

    /// Every variable occurring in the formula, free or bound.
    pub fn variables(&self) -> VarSet {
        let mut out = VarSet::new();
        self.collect(&mut out);
        out
    }

    /// Free variables.
    pub fn free_variables(&self) -> VarSet {
        match self {
            FoFormula::Equals(a, b) => [a.clone(), b.clone()].into(),
            FoFormula::Rel { args, .. } => args.iter().cloned().collect(),
            FoFormula::And(fs) | FoFormula::Or(fs) => fs.iter().flat_map(|f| f.free_variables()).collect(),
            FoFormula::Not(f) => f.free_variables(),
            FoFormula::Exists(v, f) => {
                let mut s = f.free_variables();
                s.remove(v);
                s
            }
        }
    }

    fn collect(&self, out: &mut VarSet) {
        match self {
            FoFormula::Equals(a, b) => {
                out.insert(a.clone());
                out.insert(b.clone());
            }
            FoFormula::Rel { args, .. } => out.extend(args.iter().cloned()),
            FoFormula::And(fs) | FoFormula::Or(fs) => fs.iter().for_each(|f| f.collect(out)),
            FoFormula::Not(f) => f.collect(out),
            FoFormula::Exists(v, f) => {
                out.insert(v.clone());
                f.collect(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            FoFormula::Equals(..) | FoFormula::Rel { .. } => 1,
            FoFormula::And(fs) | FoFormula::Or(fs) => 1 + fs.iter().map(|f| f.depth()).max().unwrap_or(0),
            FoFormula::Not(f) | FoFormula::Exists(_, f) => 1 + f.depth(),
        }
    }
}

impl fmt::Display for FoFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoFormula::Equals(a, b) => write!(f, "(= {a} {b})"),
            FoFormula::Rel { name, args } => {
                write!(f, "({name}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            FoFormula::And(fs) | FoFormula::Or(fs) => {
                let head = if matches!(self, FoFormula::And(_)) { "and" } else { "or" };
                write!(f, "({head}")?;
                for c in fs {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
            FoFormula::Not(c) => write!(f, "(not {c})"),
            FoFormula::Exists(v, c) => write!(f, "(exists {v} {c})"),
        }
    }
}

enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

fn read_sexp(text: &str) -> Result<Sexp, FoError> {
    let err = |pos, msg: &str| FoError::Syntax {
        pos,
        msg: msg.to_string(),
    };
    let mut stack: Vec<(Vec<Sexp>, usize)> = Vec::new();
    let mut result = None;
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < bytes.len() {
        let (pos, c) = bytes[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if result.is_some() {
            return Err(err(pos, "trailing input"));
        }
        let done = match c {
            '(' => {
                stack.push((Vec::new(), pos));
                i += 1;
                None
            }
            ')' => {
                let (items, start) = stack.pop().ok_or_else(|| err(pos, "unbalanced ')'"))?;
                i += 1;
                Some(Sexp::List(items, start))
            }
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].1.is_whitespace() && bytes[i].1 != '(' && bytes[i].1 != ')' {
                    i += 1;
                }
                let word: String = bytes[start..i].iter().map(|&(_, c)| c).collect();
                Some(Sexp::Atom(word, pos))
            }
        };
        if let Some(s) = done {
            match stack.last_mut() {
                Some((items, _)) => items.push(s),
                None => result = Some(s),
            }
        }
    }
    if let Some((_, start)) = stack.last() {
        return Err(err(*start, "unclosed '('"));
    }
    result.ok_or_else(|| err(text.len(), "empty input"))
}

fn var_of(s: &Sexp) -> Result<Var, FoError> {
    match s {
        Sexp::Atom(w, _) if is_identifier(w) => Ok(Var::new(w.clone())),
        Sexp::Atom(w, pos) => Err(FoError::Syntax {
            pos: *pos,
            msg: format!("{w:?} is not a variable"),
        }),
        Sexp::List(_, pos) => Err(FoError::Syntax {
            pos: *pos,
            msg: "expected a variable".into(),
        }),
    }
}

fn to_formula(s: &Sexp) -> Result<FoFormula, FoError> {
    let (items, pos) = match s {
        Sexp::List(items, pos) => (items, *pos),
        Sexp::Atom(_, pos) => {
            return Err(FoError::Syntax {
                pos: *pos,
                msg: "expected '('".into(),
            })
        }
    };
    let bad = |msg: &str| FoError::Syntax {
        pos,
        msg: msg.to_string(),
    };
    let head = match items.first() {
        Some(Sexp::Atom(h, _)) => h.as_str(),
        _ => return Err(bad("expected an operator")),
    };
    let rest = &items[1..];
    Ok(match head {
        "=" => match rest {
            [a, b] => FoFormula::Equals(var_of(a)?, var_of(b)?),
            _ => return Err(bad("'=' takes two variables")),
        },
        "and" => FoFormula::And(rest.iter().map(to_formula).collect::<Result<_, _>>()?),
        "or" => FoFormula::Or(rest.iter().map(to_formula).collect::<Result<_, _>>()?),
        "not" => match rest {
            [f] => FoFormula::negate(to_formula(f)?),
            _ => return Err(bad("'not' takes one formula")),
        },
        "exists" => match rest {
            [v, f] => FoFormula::exists(var_of(v)?, to_formula(f)?),
            _ => return Err(bad("'exists' takes a variable and a formula")),
        },
        name if is_identifier(name) => FoFormula::Rel {
            name: name.to_string(),
            args: rest.iter().map(var_of).collect::<Result<_, _>>()?,
        },
        _ => return Err(bad("unknown operator")),
    })
}

/// Parses `(exists x (and (R x) (= x y)))` style formulas.
pub fn parse_fo(text: &str) -> Result<FoFormula, FoError> {
    to_formula(&read_sexp(text)?)
}

/// Checks relation names and arities against `vocab`.
pub fn check_fo(phi: &FoFormula, vocab: &Vocabulary) -> Result<(), FoError> {
    match phi {
        FoFormula::Equals(..) => Ok(()),
        FoFormula::Rel { name, args } => {
            let sig = vocab.get(name).ok_or_else(|| FoError::UnknownRelation(name.clone()))?;
            if sig.arity != args.len() {
                return Err(FoError::Arity {
                    name: name.clone(),
                    expected: sig.arity,
                    found: args.len(),
                });
            }
            Ok(())
        }
        FoFormula::And(fs) | FoFormula::Or(fs) => fs.iter().try_for_each(|f| check_fo(f, vocab)),
        FoFormula::Not(f) | FoFormula::Exists(_, f) => check_fo(f, vocab),
    }
}

/// Variable assignment for FO evaluation.
pub type Assignment = BTreeMap<Var, Value>;

/// Tarskian satisfaction with quantifiers ranging over `domain`.
pub fn fo_evaluate(
    phi: &FoFormula,
    interp: &Interpretation,
    assignment: &Assignment,
    domain: &Domain,
) -> Result<bool, FoError> {
    let mut env = assignment.clone();
    eval(phi, interp, &mut env, domain)
}

fn lookup(env: &Assignment, v: &Var) -> Result<Value, FoError> {
    env.get(v).copied().ok_or_else(|| FoError::Unbound(v.clone()))
}

fn eval(phi: &FoFormula, interp: &Interpretation, env: &mut Assignment, domain: &Domain) -> Result<bool, FoError> {
    Ok(match phi {
        FoFormula::Equals(a, b) => lookup(env, a)? == lookup(env, b)?,
        FoFormula::Rel { name, args } => {
            let rel = interp
                .relation(name)
                .ok_or_else(|| FoError::UnknownRelation(name.clone()))?;
            let tuple: Vec<Value> = args.iter().map(|a| lookup(env, a)).collect::<Result<_, _>>()?;
            rel.contains(&tuple)
        }
        FoFormula::And(fs) => {
            for f in fs {
                if !eval(f, interp, env, domain)? {
                    return Ok(false);
                }
            }
            true
        }
        FoFormula::Or(fs) => {
            for f in fs {
                if eval(f, interp, env, domain)? {
                    return Ok(true);
                }
            }
            false
        }
        FoFormula::Not(f) => !eval(f, interp, env, domain)?,
        FoFormula::Exists(v, f) => {
            let saved = env.get(v).copied();
            let mut found = false;
            for &d in domain.values() {
                env.insert(v.clone(), d);
                if eval(f, interp, env, domain)? {
                    found = true;
                    break;
                }
            }
            match saved {
                Some(d) => env.insert(v.clone(), d),
                None => env.remove(v),
            };
            found
        }
    })
}

/// LIF expression whose semantics is the diagonal of the valuations
/// satisfying `phi`. Every relation must have input arity 0.
pub fn fo_to_lif(phi: &FoFormula, vocab: &Vocabulary) -> Result<Expr, FoError> {
    check_fo(phi, vocab)?;
    for (name, sig) in vocab.iter() {
        if sig.input_arity != 0 {
            return Err(FoError::InputArity(name.to_string()));
        }
    }
    Ok(embed(phi))
}

fn embed(phi: &FoFormula) -> Expr {
    match phi {
        FoFormula::Equals(x, y) => Expr::sel(SelKind::R, x.clone(), y.clone(), Expr::Id),
        FoFormula::Rel { name, args } => Expr::intersect(
            Expr::Id,
            Expr::Atom {
                module: name.clone(),
                inputs: vec![],
                outputs: args.clone(),
            },
        ),
        FoFormula::Or(fs) => fs
            .iter()
            .map(embed)
            .reduce(Expr::union)
            .unwrap_or_else(|| Expr::difference(Expr::Id, Expr::Id)),
        FoFormula::And(fs) => fs.iter().map(embed).reduce(Expr::intersect).unwrap_or(Expr::Id),
        FoFormula::Not(f) => Expr::difference(Expr::Id, embed(f)),
        FoFormula::Exists(x, f) => {
            let z: VarSet = [x.clone()].into();
            Expr::sel(
                SelKind::LR,
                x.clone(),
                x.clone(),
                Expr::cyl_l(z.clone(), Expr::cyl_r(z, embed(f))),
            )
        }
    }
}

/// Names of the three copies of the universe.
pub const COPY_PREFIXES: [&str; 3] = ["x", "y", "z"];

/// The `k`-th copy (0, 1 or 2) of the `i`-th universe variable, 1-based:
/// `copy_var(0, 0)` is `x1`.
pub fn copy_var(k: usize, i: usize) -> Var {
    Var::new(format!("{}{}", COPY_PREFIXES[k], i + 1))
}

/// FO formula over the copies `x1..xn` (left valuation) and `y1..yn`
/// (right valuation) defining the pairs of `alpha`. Compositions quantify
/// over the third copy `z1..zn`; composition-free input never uses it.
///
/// Every variable of `alpha` must belong to `universe`.
pub fn lif_to_fo(alpha: &Expr, universe: &VarUniverse) -> Result<FoFormula, FoError> {
    if let Some(v) = alpha.variables().into_iter().find(|v| !universe.contains(v)) {
        return Err(FoError::Unbound(v));
    }
    Ok(translate(alpha, universe, 0, 1))
}

fn translate(alpha: &Expr, u: &VarUniverse, l: usize, r: usize) -> FoFormula {
    let n = u.len();
    let idx = |v: &Var| u.index_of(v).expect("variable checked against universe");
    let copy = |k: usize, v: &Var| copy_var(k, idx(v));
    match alpha {
        Expr::Id => FoFormula::And(
            (0..n)
                .map(|i| FoFormula::Equals(copy_var(l, i), copy_var(r, i)))
                .collect(),
        ),
        Expr::Atom {
            module,
            inputs,
            outputs,
        } => {
            let args = inputs
                .iter()
                .map(|v| copy(l, v))
                .chain(outputs.iter().map(|v| copy(r, v)));
            let mut parts = vec![FoFormula::rel(module, args)];
            parts.extend(
                u.vars()
                    .iter()
                    .filter(|v| !outputs.contains(v))
                    .map(|v| FoFormula::Equals(copy(l, v), copy(r, v))),
            );
            FoFormula::And(parts)
        }
        Expr::Binary { kind, left, right } => match kind {
            BinOp::Union => FoFormula::Or(vec![translate(left, u, l, r), translate(right, u, l, r)]),
            BinOp::Intersect => FoFormula::And(vec![translate(left, u, l, r), translate(right, u, l, r)]),
            BinOp::Difference => FoFormula::And(vec![
                translate(left, u, l, r),
                FoFormula::negate(translate(right, u, l, r)),
            ]),
            BinOp::Compose => {
                let w = 3 - l - r;
                let body = FoFormula::And(vec![translate(left, u, l, w), translate(right, u, w, r)]);
                (0..n).rev().fold(body, |acc, i| FoFormula::exists(copy_var(w, i), acc))
            }
        },
        Expr::Converse { child } => translate(child, u, r, l),
        Expr::Cyl { side, vars, child } => {
            let k = match side {
                Side::Left => l,
                Side::Right => r,
            };
            vars.iter()
                .rev()
                .fold(translate(child, u, l, r), |acc, v| FoFormula::exists(copy(k, v), acc))
        }
        Expr::Sel { kind, x, y, child } => {
            let cond = match kind {
                SelKind::LR => FoFormula::Equals(copy(l, x), copy(r, y)),
                SelKind::L => FoFormula::Equals(copy(l, x), copy(l, y)),
                SelKind::R => FoFormula::Equals(copy(r, x), copy(r, y)),
            };
            FoFormula::And(vec![translate(child, u, l, r), cond])
        }
    }
}

/// Assignment of the left and right copies for a pair of valuations.
pub fn pair_assignment(universe: &VarUniverse, left: &[Value], right: &[Value]) -> Assignment {
    let mut env = Assignment::new();
    for i in 0..universe.len() {
        env.insert(copy_var(0, i), left[i]);
        env.insert(copy_var(1, i), right[i]);
    }
    env
}

/// Whether `phi` mentions any variable of the third copy.
pub fn uses_third_copy(phi: &FoFormula, universe: &VarUniverse) -> bool {
    let third: VarSet = (0..universe.len()).map(|i| copy_var(2, i)).collect();
    !phi.variables().is_disjoint(&third)
}

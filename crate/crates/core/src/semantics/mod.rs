//! Exact evaluation of LIF expressions as finite binary relations on
//! valuations.

mod brv;
mod space;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use brv::Brv;
pub use space::{Code, Domain, Valuation, ValuationSpace, Value, MAX_VALUATIONS};

use crate::syntax::{BinOp, Expr, Var, VarUniverse, Vocabulary};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("no relation for module {0} in the interpretation")]
    UnknownModule(String),
    #[error("variable {0} is outside the universe")]
    OutsideUniverse(Var),
    #[error("value {0} is not in the domain")]
    ValueOutsideDomain(Value),
    #[error("module {module}: tuple of length {found}, arity is {arity}")]
    TupleArity { module: String, arity: usize, found: usize },
    #[error("relations over different universes or domains")]
    SpaceMismatch,
    #[error("{values}^{vars} valuations exceed the supported maximum of {MAX_VALUATIONS}")]
    SpaceTooLarge { vars: usize, values: usize },
    #[error("domain must be nonempty")]
    EmptyDomain,
    #[error("value {0} listed twice in domain")]
    DuplicateValue(Value),
}

/// Finite relations, one per module name. Tuples list input positions first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interpretation {
    relations: BTreeMap<String, BTreeSet<Vec<Value>>>,
}

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, module: &str, tuples: impl IntoIterator<Item = Vec<Value>>) -> Self {
        self.set(module, tuples);
        self
    }

    pub fn set(&mut self, module: &str, tuples: impl IntoIterator<Item = Vec<Value>>) {
        self.relations.insert(module.to_string(), tuples.into_iter().collect());
    }

    pub fn relation(&self, module: &str) -> Option<&BTreeSet<Vec<Value>>> {
        self.relations.get(module)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &BTreeSet<Vec<Value>>)> {
        self.relations.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Checks tuple lengths against `vocab` and values against `domain`.
    /// Modules of the vocabulary missing here are added as empty relations.
    pub fn conform(mut self, vocab: &Vocabulary, domain: &Domain) -> Result<Self, EvalError> {
        for (name, tuples) in &self.relations {
            let sig = vocab.get(name).ok_or_else(|| EvalError::UnknownModule(name.clone()))?;
            for t in tuples {
                if t.len() != sig.arity {
                    return Err(EvalError::TupleArity {
                        module: name.clone(),
                        arity: sig.arity,
                        found: t.len(),
                    });
                }
                if let Some(&v) = t.iter().find(|&&v| domain.index_of(v).is_none()) {
                    return Err(EvalError::ValueOutsideDomain(v));
                }
            }
        }
        for (name, _) in vocab.iter() {
            self.relations.entry(name.to_string()).or_default();
        }
        Ok(self)
    }
}

/// On-disk form: `{"domain": [...], "relations": {"P1": [[0,1],[1,2]]}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterpretationFile {
    pub domain: Vec<Value>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<Vec<Value>>>,
}

impl InterpretationFile {
    pub fn split(self) -> Result<(Domain, Interpretation), EvalError> {
        let domain = Domain::new(self.domain)?;
        let mut interp = Interpretation::new();
        for (name, tuples) in self.relations {
            interp.set(&name, tuples);
        }
        Ok((domain, interp))
    }

    pub fn from_parts(domain: &Domain, interp: &Interpretation) -> Self {
        InterpretationFile {
            domain: domain.values().to_vec(),
            relations: interp
                .relations()
                .map(|(k, v)| (k.to_string(), v.iter().cloned().collect()))
                .collect(),
        }
    }
}

/// Evaluates `expr` bottom-up over the given valuation space.
pub fn evaluate(expr: &Expr, interp: &Interpretation, space: &Arc<ValuationSpace>) -> Result<Brv, EvalError> {
    match expr {
        Expr::Id => Ok(Brv::diagonal(space)),
        Expr::Atom {
            module,
            inputs,
            outputs,
        } => eval_atom(module, inputs, outputs, interp, space),
        Expr::Binary { kind, left, right } => {
            let l = evaluate(left, interp, space)?;
            let r = evaluate(right, interp, space)?;
            match kind {
                BinOp::Union => l.union(&r),
                BinOp::Intersect => l.intersect(&r),
                BinOp::Difference => l.difference(&r),
                BinOp::Compose => l.compose(&r),
            }
        }
        Expr::Converse { child } => Ok(evaluate(child, interp, space)?.converse()),
        Expr::Cyl { side, vars, child } => evaluate(child, interp, space)?.cyl(*side, vars),
        Expr::Sel { kind, x, y, child } => evaluate(child, interp, space)?.select(*kind, x, y),
    }
}

/// Convenience wrapper building the valuation space first.
pub fn evaluate_in(
    expr: &Expr,
    interp: &Interpretation,
    universe: &VarUniverse,
    domain: &Domain,
) -> Result<Brv, EvalError> {
    let space = ValuationSpace::new(universe.clone(), domain.clone())?;
    evaluate(expr, interp, &space)
}

/// `{(ν1, ν2) | ν1(x̄)·ν2(ȳ) ∈ D(M), ν1 and ν2 agree outside ȳ}`
fn eval_atom(
    module: &str,
    inputs: &[Var],
    outputs: &[Var],
    interp: &Interpretation,
    space: &Arc<ValuationSpace>,
) -> Result<Brv, EvalError> {
    let rel = interp
        .relation(module)
        .ok_or_else(|| EvalError::UnknownModule(module.to_string()))?;
    let in_pos: Vec<usize> = inputs.iter().map(|v| space.var_index(v)).collect::<Result<_, _>>()?;
    let out_pos: Vec<usize> = outputs.iter().map(|v| space.var_index(v)).collect::<Result<_, _>>()?;
    let arity = inputs.len() + outputs.len();
    let mut tuples = Vec::with_capacity(rel.len());
    for t in rel {
        if t.len() != arity {
            return Err(EvalError::TupleArity {
                module: module.to_string(),
                arity,
                found: t.len(),
            });
        }
        let idx: Vec<usize> = t
            .iter()
            .map(|&v| space.domain().index_of(v).ok_or(EvalError::ValueOutsideDomain(v)))
            .collect::<Result<_, _>>()?;
        tuples.push(idx);
    }
    let k = inputs.len();
    let mut out = Brv::empty(space);
    for a in 0..space.size() {
        for t in &tuples {
            if in_pos.iter().zip(&t[..k]).any(|(&i, &d)| space.digit(a, i) != d) {
                continue;
            }
            let b = out_pos
                .iter()
                .zip(&t[k..])
                .fold(a, |c, (&i, &d)| space.with_digit(c, i, d));
            // Repeated output variables must receive equal values.
            if out_pos.iter().zip(&t[k..]).all(|(&i, &d)| space.digit(b, i) == d) {
                out.insert(a, b);
            }
        }
    }
    Ok(out)
}

/// True iff both expressions denote the same pair set under `interp`.
pub fn equivalent_on(
    e1: &Expr,
    e2: &Expr,
    interp: &Interpretation,
    space: &Arc<ValuationSpace>,
) -> Result<bool, EvalError> {
    Ok(evaluate(e1, interp, space)? == evaluate(e2, interp, space)?)
}

//! Clique expressions over `n` variables and one binary relation `R` with two
//! inputs. `alpha_2n` lists the 2n-cliques of `R` as pairs of valuations;
//! `alpha_exists_3n` is nonempty exactly when `R` has a 3n-clique.

use std::collections::BTreeSet;

use serde::Deserialize;
use thiserror::Error;

use crate::semantics::{Domain, EvalError, Interpretation, Value};
use crate::syntax::{Expr, SelKind, Var, VarSet, VarUniverse, Vocabulary};

pub const RELATION: &str = "R";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("clique constructions need at least 2 variables, got {0}")]
    TooFewVariables(usize),
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error(transparent)]
    Domain(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CliqueSpec {
    n: usize,
}

impl CliqueSpec {
    pub fn new(n: usize) -> Result<Self, ConstructionError> {
        if n < 2 {
            return Err(ConstructionError::TooFewVariables(n));
        }
        Ok(CliqueSpec { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `x1, ..., xn`
    pub fn variables(&self) -> Vec<Var> {
        (1..=self.n).map(|i| Var::new(format!("x{i}"))).collect()
    }

    pub fn universe(&self) -> VarUniverse {
        VarUniverse::new(self.variables()).expect("distinct nonempty names")
    }

    /// `{R/2 in 2}`
    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::new().with(RELATION, 2, 2).expect("valid signature")
    }

    fn all_vars(&self) -> VarSet {
        self.variables().into_iter().collect()
    }

    fn without(&self, drop: &[&Var]) -> VarSet {
        self.variables().into_iter().filter(|v| !drop.contains(&v)).collect()
    }
}

fn big_union(parts: impl IntoIterator<Item = Expr>) -> Expr {
    parts.into_iter().reduce(Expr::union).expect("nonempty union")
}

fn big_intersection(parts: impl IntoIterator<Item = Expr>) -> Expr {
    parts
        .into_iter()
        .reduce(Expr::intersect)
        .expect("nonempty intersection")
}

fn cyl_lr(left: VarSet, right: VarSet, child: Expr) -> Expr {
    let inner = if right.is_empty() {
        child
    } else {
        Expr::cyl_r(right, child)
    };
    if left.is_empty() {
        inner
    } else {
        Expr::cyl_l(left, inner)
    }
}

/// `cyl_l{V} cyl_r{V}(id)`: every pair of valuations.
pub fn build_all(spec: &CliqueSpec) -> Expr {
    Expr::cyl_l(spec.all_vars(), Expr::cyl_r(spec.all_vars(), Expr::Id))
}

/// Pairs whose 2n listed values contain a repetition.
pub fn build_alpha_eq(spec: &CliqueSpec) -> Expr {
    let vs = spec.variables();
    let all = build_all(spec);
    let mut parts = Vec::new();
    for x in &vs {
        for y in &vs {
            if x != y {
                parts.push(Expr::sel(SelKind::L, x.clone(), y.clone(), all.clone()));
                parts.push(Expr::sel(SelKind::R, x.clone(), y.clone(), all.clone()));
            }
        }
    }
    for x in &vs {
        for y in &vs {
            parts.push(Expr::sel(SelKind::LR, x.clone(), y.clone(), all.clone()));
        }
    }
    big_union(parts)
}

/// Pairs whose 2n listed values are pairwise distinct.
pub fn build_alpha_neq(spec: &CliqueSpec) -> Expr {
    Expr::difference(build_all(spec), build_alpha_eq(spec))
}

/// `R(x,y;) & R(y,x;)`
fn both_ways(x: &Var, y: &Var) -> Expr {
    let edge = |a: &Var, b: &Var| Expr::Atom {
        module: RELATION.to_string(),
        inputs: vec![a.clone(), b.clone()],
        outputs: vec![],
    };
    Expr::intersect(edge(x, y), edge(y, x))
}

/// `ν1(x)` and `ν1(y)` are connected both ways.
pub fn edge_left(spec: &CliqueSpec, x: &Var, y: &Var) -> Expr {
    cyl_lr(spec.without(&[x, y]), spec.all_vars(), both_ways(x, y))
}

/// `ν2(x)` and `ν2(y)` are connected both ways.
pub fn edge_right(spec: &CliqueSpec, x: &Var, y: &Var) -> Expr {
    cyl_lr(spec.all_vars(), spec.without(&[x, y]), both_ways(x, y))
}

/// `ν1(x)` and `ν2(y)` are connected both ways.
///
/// For `x = y` the plain form `cyl_l{V-x} cyl_r{V-x}(R(x,x;) & R(x,x;))`
/// would force `ν1(x) = ν2(x)`, which no pair of distinct values meets. The
/// cross edge is instead obtained from the one towards another variable `z`
/// by copying `ν2(x)` into `z` on the right: `cyl_r{z}(sel_r{x=z}(edge(x, z)))`.
pub fn edge_cross(spec: &CliqueSpec, x: &Var, y: &Var) -> Expr {
    if x != y {
        return cyl_lr(spec.without(&[x]), spec.without(&[y]), both_ways(x, y));
    }
    let z = spec
        .variables()
        .into_iter()
        .find(|v| v != x)
        .expect("at least two variables");
    let zs: VarSet = [z.clone()].into();
    Expr::cyl_r(zs, Expr::sel(SelKind::R, x.clone(), z.clone(), edge_cross(spec, x, &z)))
}

/// Pairs whose 2n listed values form a 2n-clique of `R`.
pub fn build_alpha_2n(spec: &CliqueSpec) -> Expr {
    let vs = spec.variables();
    let mut parts = vec![build_alpha_neq(spec)];
    for x in &vs {
        for y in &vs {
            if x != y {
                parts.push(edge_left(spec, x, y));
                parts.push(edge_right(spec, x, y));
            }
        }
    }
    for x in &vs {
        for y in &vs {
            parts.push(edge_cross(spec, x, y));
        }
    }
    big_intersection(parts)
}

/// `(alpha_2n ; alpha_2n) & alpha_2n`
pub fn build_alpha_exists_3n(spec: &CliqueSpec) -> Expr {
    let a = build_alpha_2n(spec);
    Expr::intersect(Expr::compose(a.clone(), a.clone()), a)
}

/// Undirected graph input: edges are symmetrized, self-loops dropped.
#[derive(Debug, Clone, Deserialize)]
pub struct Graph {
    #[serde(default)]
    pub vertices: Vec<Value>,
    pub edges: Vec<(Value, Value)>,
}

impl Graph {
    /// Domain of the vertices (listed ones first, then edge endpoints) and
    /// the symmetric edge relation.
    pub fn interpretation(&self) -> Result<(Domain, Interpretation), ConstructionError> {
        let mut order: Vec<Value> = Vec::new();
        let mut seen = BTreeSet::new();
        for v in self.vertices.iter().chain(self.edges.iter().flat_map(|(a, b)| [a, b])) {
            if seen.insert(*v) {
                order.push(*v);
            }
        }
        if order.is_empty() {
            return Err(ConstructionError::EmptyGraph);
        }
        let rel: BTreeSet<Vec<Value>> = self
            .edges
            .iter()
            .filter(|(a, b)| a != b)
            .flat_map(|&(a, b)| [vec![a, b], vec![b, a]])
            .collect();
        Ok((Domain::new(order)?, Interpretation::new().with(RELATION, rel)))
    }
}

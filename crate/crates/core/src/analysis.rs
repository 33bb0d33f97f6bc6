//! Compositional syntactic inputs and outputs.
//!
//! Each operator's row depends only on the top-level operator and the
//! inputs/outputs of its operands.

use serde::Serialize;

use crate::syntax::{BinOp, Expr, SelKind, Side, Var, VarSet};

/// Syntactic inputs, outputs and free variables of an expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct IoReport {
    pub inputs: VarSet,
    pub outputs: VarSet,
    pub fvars: VarSet,
}

impl IoReport {
    pub fn new(inputs: VarSet, outputs: VarSet) -> Self {
        let fvars = inputs.union(&outputs).cloned().collect();
        IoReport { inputs, outputs, fvars }
    }
}

fn sym_diff(a: &VarSet, b: &VarSet) -> VarSet {
    a.symmetric_difference(b).cloned().collect()
}

fn union3(a: &VarSet, b: &VarSet, c: &VarSet) -> VarSet {
    a.iter().chain(b).chain(c).cloned().collect()
}

fn with(set: &VarSet, extra: impl IntoIterator<Item = Var>) -> VarSet {
    let mut out = set.clone();
    out.extend(extra);
    out
}

/// Combines operand reports under a binary operator.
pub fn binary_io(kind: BinOp, l: &IoReport, r: &IoReport) -> IoReport {
    let (i1, o1, i2, o2) = (&l.inputs, &l.outputs, &r.inputs, &r.outputs);
    match kind {
        BinOp::Compose => {
            let inputs = i1.iter().chain(i2.difference(o1)).cloned().collect();
            IoReport::new(inputs, o1.union(o2).cloned().collect())
        }
        BinOp::Union | BinOp::Intersect | BinOp::Difference => {
            let inputs = union3(i1, i2, &sym_diff(o1, o2));
            let outputs = match kind {
                BinOp::Union => o1.union(o2).cloned().collect(),
                BinOp::Intersect => o1.intersection(o2).cloned().collect(),
                _ => o1.clone(),
            };
            IoReport::new(inputs, outputs)
        }
    }
}

/// Report of a unary operator node applied to an operand with report `c`.
pub fn unary_io(node: &Expr, c: &IoReport) -> IoReport {
    let (i1, o1) = (&c.inputs, &c.outputs);
    match node {
        Expr::Converse { .. } => IoReport::new(i1.union(o1).cloned().collect(), o1.clone()),
        Expr::Cyl { side, vars, .. } => {
            let inputs = match side {
                Side::Left => i1.difference(vars).cloned().collect(),
                Side::Right => i1.clone(),
            };
            IoReport::new(inputs, o1.union(vars).cloned().collect())
        }
        Expr::Sel { kind, x, y, .. } => {
            let same = x == y;
            match kind {
                SelKind::LR => {
                    let inputs = if same && !o1.contains(y) {
                        i1.clone()
                    } else if !same && !o1.contains(y) {
                        with(i1, [x.clone(), y.clone()])
                    } else {
                        with(i1, [x.clone()])
                    };
                    let outputs = if same {
                        o1.iter().filter(|v| *v != x).cloned().collect()
                    } else {
                        o1.clone()
                    };
                    IoReport::new(inputs, outputs)
                }
                SelKind::L => {
                    let inputs = if same {
                        i1.clone()
                    } else {
                        with(i1, [x.clone(), y.clone()])
                    };
                    IoReport::new(inputs, o1.clone())
                }
                SelKind::R => {
                    let inputs = if same {
                        i1.clone()
                    } else {
                        with(i1, [x, y].into_iter().filter(|v| !o1.contains(*v)).cloned())
                    };
                    IoReport::new(inputs, o1.clone())
                }
            }
        }
        _ => panic!("unary_io called on a non-unary node"),
    }
}

/// Syntactic inputs and outputs of `expr`.
pub fn syn_io(expr: &Expr) -> IoReport {
    match expr {
        Expr::Id => IoReport::new(VarSet::new(), VarSet::new()),
        Expr::Atom { inputs, outputs, .. } => {
            IoReport::new(inputs.iter().cloned().collect(), outputs.iter().cloned().collect())
        }
        Expr::Binary { kind, left, right } => binary_io(*kind, &syn_io(left), &syn_io(right)),
        Expr::Converse { child } | Expr::Cyl { child, .. } | Expr::Sel { child, .. } => unary_io(expr, &syn_io(child)),
    }
}

/// True iff the syntactic inputs and outputs do not overlap.
pub fn is_io_disjoint(expr: &Expr) -> bool {
    let r = syn_io(expr);
    r.inputs.is_disjoint(&r.outputs)
}

//! Brute-force, per-interpretation checks of the semantic notions behind
//! inputs and outputs.
//!
//! Semantic inputs and outputs are undecidable in general, so the witness
//! functions here report under-approximations relative to a supplied family
//! of interpretations: every reported variable carries a concrete witness.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use serde::Serialize;

use crate::semantics::{evaluate, Brv, Code, EvalError, Interpretation, Valuation, ValuationSpace, Value};
use crate::syntax::{Expr, Var, VarSet};

/// Evidence that `variable` is a semantic output (a pair changing it) or a
/// semantic input (a pair whose left side, with `variable` set to `extra`,
/// cannot reach the same outputs).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub variable: Var,
    /// Index into the interpretation family.
    pub interpretation: usize,
    pub pair: (Valuation, Valuation),
    pub extra: Option<Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Witnesses {
    pub vars: VarSet,
    pub reports: Vec<WitnessReport>,
}

impl Witnesses {
    fn add(&mut self, report: WitnessReport) {
        if self.vars.insert(report.variable.clone()) {
            self.reports.push(report);
        }
    }
}

fn positions(space: &ValuationSpace, vars: &VarSet) -> Result<Vec<usize>, EvalError> {
    vars.iter().map(|v| space.var_index(v)).collect()
}

/// For every row, the set of projection keys of its members on `pos`.
fn row_keys(brv: &Brv, pos: &[usize]) -> Vec<HashSet<usize>> {
    let space = brv.space();
    (0..space.size())
        .map(|a| brv.row(a).map(|b| space.project(b, pos)).collect())
        .collect()
}

/// Output witnesses found in one relation, skipping variables in `skip`.
pub fn output_witnesses_in(brv: &Brv, interpretation: usize, skip: &VarSet) -> Vec<WitnessReport> {
    let space = brv.space();
    let mut out = Vec::new();
    for (i, v) in space.universe().vars().iter().enumerate() {
        if skip.contains(v) {
            continue;
        }
        if let Some((a, b)) = brv.iter().find(|&(a, b)| space.digit(a, i) != space.digit(b, i)) {
            out.push(WitnessReport {
                variable: v.clone(),
                interpretation,
                pair: (space.decode(a), space.decode(b)),
                extra: None,
            });
        }
    }
    out
}

/// Input witnesses found in one relation, with `outputs` as the set on which
/// right-hand valuations must agree.
pub fn input_witnesses_in(
    brv: &Brv,
    interpretation: usize,
    outputs: &VarSet,
    skip: &VarSet,
) -> Result<Vec<WitnessReport>, EvalError> {
    let space = brv.space();
    let pos = positions(space, outputs)?;
    let keys = row_keys(brv, &pos);
    let mut out = Vec::new();
    for (i, v) in space.universe().vars().iter().enumerate() {
        if skip.contains(v) {
            continue;
        }
        'search: for (a, b) in brv.iter() {
            let key = space.project(b, &pos);
            for d in 0..space.domain().len() {
                if d == space.digit(a, i) {
                    continue;
                }
                let moved = space.with_digit(a, i, d);
                if !keys[moved].contains(&key) {
                    out.push(WitnessReport {
                        variable: v.clone(),
                        interpretation,
                        pair: (space.decode(a), space.decode(b)),
                        extra: Some(space.domain().values()[d]),
                    });
                    break 'search;
                }
            }
        }
    }
    Ok(out)
}

fn evaluate_all(expr: &Expr, interps: &[Interpretation], space: &Arc<ValuationSpace>) -> Result<Vec<Brv>, EvalError> {
    interps.iter().map(|d| evaluate(expr, d, space)).collect()
}

fn outputs_of(brvs: &[Brv]) -> Witnesses {
    let mut w = Witnesses::default();
    for (k, brv) in brvs.iter().enumerate() {
        for r in output_witnesses_in(brv, k, &w.vars.clone()) {
            w.add(r);
        }
    }
    w
}

fn inputs_of(brvs: &[Brv], outputs: &VarSet) -> Result<Witnesses, EvalError> {
    let mut w = Witnesses::default();
    for (k, brv) in brvs.iter().enumerate() {
        for r in input_witnesses_in(brv, k, outputs, &w.vars.clone())? {
            w.add(r);
        }
    }
    Ok(w)
}

/// Variables changed by some pair under some interpretation of the family.
pub fn witness_outputs(
    expr: &Expr,
    interps: &[Interpretation],
    space: &Arc<ValuationSpace>,
) -> Result<Witnesses, EvalError> {
    Ok(outputs_of(&evaluate_all(expr, interps, space)?))
}

/// Variables `x` with a witness `(D, d, (ν1, ν2))` such that no `ν2'`
/// agreeing with `ν2` on the witnessed outputs pairs with `ν1[x:d]`.
///
/// The agreement set is [`witness_outputs`] over the same family, which is
/// contained in the true semantic outputs; agreement on a smaller set is
/// easier to meet, so each reported input remains a genuine semantic input.
pub fn witness_inputs(
    expr: &Expr,
    interps: &[Interpretation],
    space: &Arc<ValuationSpace>,
) -> Result<Witnesses, EvalError> {
    let brvs = evaluate_all(expr, interps, space)?;
    let outputs = outputs_of(&brvs).vars;
    inputs_of(&brvs, &outputs)
}

/// Output and input witnesses computed with one evaluation pass.
pub fn witness_io(
    expr: &Expr,
    interps: &[Interpretation],
    space: &Arc<ValuationSpace>,
) -> Result<(Witnesses, Witnesses), EvalError> {
    let brvs = evaluate_all(expr, interps, space)?;
    let outputs = outputs_of(&brvs);
    let inputs = inputs_of(&brvs, &outputs.vars)?;
    Ok((outputs, inputs))
}

/// Searches a family for witnesses of every variable in `want_outputs` and
/// `want_inputs`, stopping as soon as all are found. Interpretations are
/// evaluated lazily in family order.
///
/// Input witnesses use the outputs found in the first phase as agreement
/// set, so they are meaningful once all of `want_outputs` is witnessed.
pub fn search_witnesses<'a>(
    expr: &Expr,
    family: impl Fn() -> Box<dyn Iterator<Item = Interpretation> + 'a>,
    space: &Arc<ValuationSpace>,
    want_outputs: &VarSet,
    want_inputs: &VarSet,
) -> Result<(Witnesses, Witnesses), EvalError> {
    let mut outs = Witnesses::default();
    for (k, d) in family().enumerate() {
        if want_outputs.is_subset(&outs.vars) {
            break;
        }
        let brv = evaluate(expr, &d, space)?;
        for r in output_witnesses_in(&brv, k, &outs.vars.clone()) {
            outs.add(r);
        }
    }
    let mut ins = Witnesses::default();
    for (k, d) in family().enumerate() {
        if want_inputs.is_subset(&ins.vars) {
            break;
        }
        let brv = evaluate(expr, &d, space)?;
        for r in input_witnesses_in(&brv, k, &outs.vars, &ins.vars.clone())? {
            ins.add(r);
        }
    }
    Ok((outs, ins))
}

/// True iff for every pair `(ν1, ν2)` and every `ν1'` agreeing with `ν1` on
/// `x`, some `ν2'` agreeing with `ν2` on `y` has `(ν1', ν2')` in the relation.
pub fn brv_determines(brv: &Brv, x: &VarSet, y: &VarSet) -> Result<bool, EvalError> {
    let space = brv.space();
    let x_pos = positions(space, x)?;
    let y_pos = positions(space, y)?;
    let free: Vec<usize> = (0..space.universe().len()).filter(|i| !x_pos.contains(i)).collect();
    let offsets = space.offsets(&free);
    let keys = row_keys(brv, &y_pos);
    let mut checked = HashSet::new();
    for (a, b) in brv.iter() {
        let base = space.clear(a, &free);
        let key = space.project(b, &y_pos);
        if !checked.insert((base, key)) {
            continue;
        }
        if offsets.iter().any(|&o| !keys[base + o].contains(&key)) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn determines(
    expr: &Expr,
    interp: &Interpretation,
    x: &VarSet,
    y: &VarSet,
    space: &Arc<ValuationSpace>,
) -> Result<bool, EvalError> {
    brv_determines(&evaluate(expr, interp, space)?, x, y)
}

/// Pairs that change a variable outside `outputs`.
pub fn inertia_violations(brv: &Brv, outputs: &VarSet) -> Vec<(Code, Code)> {
    let space = brv.space();
    let inert: Vec<usize> = space
        .universe()
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| !outputs.contains(*v))
        .map(|(i, _)| i)
        .collect();
    brv.iter()
        .filter(|&(a, b)| inert.iter().any(|&i| space.digit(a, i) != space.digit(b, i)))
        .collect()
}

/// All of `x` is inertial, and substituting any `x`-valuation on both sides
/// of a pair yields a pair.
pub fn brv_inertially_cylindrified(brv: &Brv, x: &VarSet) -> Result<bool, EvalError> {
    let space = brv.space();
    let pos = positions(space, x)?;
    if brv
        .iter()
        .any(|(a, b)| pos.iter().any(|&i| space.digit(a, i) != space.digit(b, i)))
    {
        return Ok(false);
    }
    let offsets = space.offsets(&pos);
    let mut seen = BTreeSet::new();
    for (a, b) in brv.iter() {
        let (ca, cb) = (space.clear(a, &pos), space.clear(b, &pos));
        if !seen.insert((ca, cb)) {
            continue;
        }
        if offsets.iter().any(|&o| !brv.contains(ca + o, cb + o)) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn inertially_cylindrified(
    expr: &Expr,
    interp: &Interpretation,
    x: &VarSet,
    space: &Arc<ValuationSpace>,
) -> Result<bool, EvalError> {
    brv_inertially_cylindrified(&evaluate(expr, interp, space)?, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::Domain;
    use crate::syntax::{parse_expression, parse_vocabulary, var_set, VarUniverse};

    fn vocab() -> crate::syntax::Vocabulary {
        parse_vocabulary("P1/2 in 1\nR/2 in 1\nM/2 in 1\nP/1 in 1").unwrap()
    }

    fn parse(s: &str) -> Expr {
        parse_expression(s, &vocab()).unwrap()
    }

    fn space(names: &[&str], n: usize) -> Arc<ValuationSpace> {
        ValuationSpace::new(
            VarUniverse::from_names(names.iter().copied()).unwrap(),
            Domain::range(n),
        )
        .unwrap()
    }

    fn family() -> Vec<Interpretation> {
        let mut out = Vec::new();
        for a in 1..=2 {
            for b in 1..=2 {
                for m in [vec![], vec![vec![a, b]], vec![vec![a, b], vec![b, a]]] {
                    out.push(
                        Interpretation::new()
                            .with("R", m.clone())
                            .with("P1", m.clone())
                            .with("M", m)
                            .with("P", [vec![a]]),
                    );
                }
            }
        }
        out
    }

    #[test]
    fn output_witnesses() {
        let s = space(&["x", "y"], 2);
        assert!(witness_outputs(&Expr::Id, &family(), &s).unwrap().vars.is_empty());
        let succ = [Interpretation::new().with("P1", [vec![0, 1]])];
        let s0 = ValuationSpace::new(
            VarUniverse::from_names(["x", "y"]).unwrap(),
            Domain::new([0, 1]).unwrap(),
        )
        .unwrap();
        let w = witness_outputs(&parse("P1(x;x)"), &succ, &s0).unwrap();
        assert_eq!(w.vars, var_set(["x"]));
        assert_eq!(w.reports[0].pair.0 .0[0], 0);
        assert_eq!(w.reports[0].pair.1 .0[0], 1);
        let e = parse("sel_l{x=y}(sel_r{x=y}(R(x;y)))");
        assert!(witness_outputs(&e, &family(), &s).unwrap().vars.is_empty());
    }

    #[test]
    fn input_witnesses() {
        let s = space(&["x", "y"], 2);
        assert!(witness_inputs(&Expr::Id, &family(), &s).unwrap().vars.is_empty());
        let d = [Interpretation::new().with("M", [vec![1, 2]])];
        let w = witness_inputs(&parse("M(x;y)"), &d, &s).unwrap();
        assert_eq!(w.vars, var_set(["x"]));
        assert_eq!(w.reports[0].extra, Some(2));
        let e = parse("sel_lr{x=x}(cyl_r{x}(cyl_l{x}(P(x;))))");
        assert!(witness_inputs(&e, &family(), &s).unwrap().vars.is_empty());
    }

    #[test]
    fn determinacy() {
        let s = space(&["x", "y"], 2);
        let d = &family()[4];
        let e = parse("M(x;y) ; R(y;x)");
        assert!(determines(&e, d, &var_set(["x", "y"]), &var_set(["x", "y"]), &s).unwrap());
        let sel = parse("sel_l{x=y}(id)");
        assert!(!determines(&sel, d, &VarSet::new(), &VarSet::new(), &s).unwrap());
        assert!(determines(&sel, d, &var_set(["x", "y"]), &VarSet::new(), &s).unwrap());
    }

    #[test]
    fn inertial_cylindrification() {
        let s = space(&["x", "y"], 2);
        let d = &family()[4];
        let e = parse("M(x;y)");
        assert!(inertially_cylindrified(&e, d, &VarSet::new(), &s).unwrap());
        assert!(inertially_cylindrified(&Expr::Id, d, &var_set(["x", "y"]), &s).unwrap());
        assert!(!inertially_cylindrified(&e, d, &var_set(["y"]), &s).unwrap());
        assert!(!inertially_cylindrified(&e, d, &var_set(["x"]), &s).unwrap());
    }

    #[test]
    fn lazy_search_matches_batch() {
        let s = space(&["x", "y"], 2);
        let e = parse("M(x;y) + R(y;x)");
        let fam = family();
        let (o, i) = witness_io(&e, &fam, &s).unwrap();
        let want_o = var_set(["x", "y"]);
        let (lo, li) = search_witnesses(&e, || Box::new(fam.clone().into_iter()), &s, &want_o, &want_o).unwrap();
        assert_eq!(o.vars, lo.vars);
        assert_eq!(i.vars, li.vars);
    }
}

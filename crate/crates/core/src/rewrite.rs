//! Equivalence-preserving rewrites: expansion of redundant operators,
//! composition of io-disjoint expressions without `;`, the move operator,
//! and full elimination of sequential composition using fresh variables.

use thiserror::Error;

use crate::analysis::{is_io_disjoint, syn_io};
use crate::syntax::{BinOp, Expr, SelKind, Side, Var, VarSet, VarUniverse, FRESH_MARK};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("right operand {0} is not io-disjoint")]
    NotIoDisjoint(String),
    #[error("move tuples have different lengths ({0} and {1})")]
    MoveLength(usize, usize),
    #[error("move tuples share variable {0}")]
    MoveOverlap(Var),
    #[error("variable {0} repeated in a move tuple")]
    MoveDuplicate(Var),
    #[error("no fresh variables available: the universe is pinned to {0:?}")]
    FreshExhausted(Vec<Var>),
}

/// Rewrites `sel_r`, `sel_l`, `&` and `cyl_r` into the reduced operator set
/// `{id, atoms, +, \, ;, conv, cyl_l, sel_lr}`.
pub fn expand_redundant(expr: &Expr) -> Expr {
    match expr {
        Expr::Id | Expr::Atom { .. } => expr.clone(),
        Expr::Binary { kind, left, right } => {
            let (l, r) = (expand_redundant(left), expand_redundant(right));
            match kind {
                BinOp::Intersect => intersect_via_difference(l, r),
                _ => Expr::binary(*kind, l, r),
            }
        }
        Expr::Converse { child } => Expr::converse(expand_redundant(child)),
        Expr::Cyl { side, vars, child } => {
            let c = expand_redundant(child);
            match side {
                Side::Left => Expr::cyl_l(vars.clone(), c),
                Side::Right => Expr::converse(Expr::cyl_l(vars.clone(), Expr::converse(c))),
            }
        }
        Expr::Sel { kind, x, y, child } => {
            let a = expand_redundant(child);
            match kind {
                SelKind::LR => Expr::sel(SelKind::LR, x.clone(), y.clone(), a),
                _ if x == y => a,
                SelKind::R => {
                    let probe = sel_r_probe(x, y, a.clone());
                    intersect_via_difference(a, probe)
                }
                SelKind::L => {
                    // The probe uses cyl_r, itself expanded through converse.
                    let cx: VarSet = [x.clone()].into();
                    let inner = Expr::converse(Expr::cyl_l(cx.clone(), Expr::converse(a.clone())));
                    let lr = Expr::sel_tuple(SelKind::LR, &[y.clone(), x.clone()], &[x.clone(), x.clone()], inner);
                    let probe = Expr::converse(Expr::cyl_l(cx, Expr::converse(lr)));
                    intersect_via_difference(a, probe)
                }
            }
        }
    }
}

fn intersect_via_difference(a: Expr, b: Expr) -> Expr {
    Expr::difference(a.clone(), Expr::difference(a, b))
}

/// `cyl_l{x} sel_lr{(x,x)=(y,x)} cyl_l{x}(a)`
fn sel_r_probe(x: &Var, y: &Var, a: Expr) -> Expr {
    let cx: VarSet = [x.clone()].into();
    let lr = Expr::sel_tuple(
        SelKind::LR,
        &[x.clone(), x.clone()],
        &[y.clone(), x.clone()],
        Expr::cyl_l(cx.clone(), a),
    );
    Expr::cyl_l(cx, lr)
}

/// The operator redundancy equations instantiated at `a`, `b`, `x`, `y`, as
/// `(name, lhs, rhs)` triples.
pub fn redundancy_equations(a: &Expr, b: &Expr, x: &Var, y: &Var) -> Vec<(&'static str, Expr, Expr)> {
    let cx: VarSet = [x.clone()].into();
    let conv = |e: Expr| Expr::converse(e);
    vec![
        (
            "cyl_r via converse",
            Expr::cyl_r(cx.clone(), a.clone()),
            conv(Expr::cyl_l(cx.clone(), conv(a.clone()))),
        ),
        (
            "cyl_l via converse",
            Expr::cyl_l(cx.clone(), a.clone()),
            conv(Expr::cyl_r(cx.clone(), conv(a.clone()))),
        ),
        (
            "sel_r via sel_lr",
            Expr::sel(SelKind::R, x.clone(), y.clone(), a.clone()),
            Expr::intersect(a.clone(), sel_r_probe(x, y, a.clone())),
        ),
        (
            "sel_l via sel_lr",
            Expr::sel(SelKind::L, x.clone(), y.clone(), a.clone()),
            Expr::intersect(
                a.clone(),
                Expr::cyl_r(
                    cx.clone(),
                    Expr::sel_tuple(
                        SelKind::LR,
                        &[y.clone(), x.clone()],
                        &[x.clone(), x.clone()],
                        Expr::cyl_r(cx, a.clone()),
                    ),
                ),
            ),
        ),
        (
            "sel_l via converse",
            Expr::sel(SelKind::L, x.clone(), y.clone(), a.clone()),
            conv(Expr::sel(SelKind::R, x.clone(), y.clone(), conv(a.clone()))),
        ),
        (
            "intersection via difference",
            Expr::intersect(a.clone(), b.clone()),
            intersect_via_difference(a.clone(), b.clone()),
        ),
    ]
}

fn cyl_nonempty(side: Side, vars: VarSet, child: Expr) -> Expr {
    if vars.is_empty() {
        child
    } else {
        Expr::cyl(side, vars, child)
    }
}

/// `cyl_r{O(β)}(α) & cyl_l{O(α)}(β)`, equivalent to `α ; β` when `β` is
/// syntactically io-disjoint. Empty cylindrifications are omitted.
pub fn compose_io_disjoint(alpha: &Expr, beta: &Expr) -> Result<Expr, RewriteError> {
    if !is_io_disjoint(beta) {
        return Err(RewriteError::NotIoDisjoint(beta.to_string()));
    }
    Ok(Expr::intersect(
        cyl_nonempty(Side::Right, syn_io(beta).outputs, alpha.clone()),
        cyl_nonempty(Side::Left, syn_io(alpha).outputs, beta.clone()),
    ))
}

/// `sel_lr{x̄=x̄} cyl_r{x̄} sel_r{x̄=ȳ} cyl_r{ȳ}(child)`: copies the right-hand
/// values of `x̄` into `ȳ` and restores `x̄` to its left-hand values.
pub fn build_move(xbar: &[Var], ybar: &[Var], child: Expr) -> Result<Expr, RewriteError> {
    if xbar.len() != ybar.len() {
        return Err(RewriteError::MoveLength(xbar.len(), ybar.len()));
    }
    for tuple in [xbar, ybar] {
        let mut seen = VarSet::new();
        for v in tuple {
            if !seen.insert(v.clone()) {
                return Err(RewriteError::MoveDuplicate(v.clone()));
            }
        }
    }
    if let Some(v) = xbar.iter().find(|v| ybar.contains(v)) {
        return Err(RewriteError::MoveOverlap(v.clone()));
    }
    if xbar.is_empty() {
        return Ok(child);
    }
    let xs: VarSet = xbar.iter().cloned().collect();
    let ys: VarSet = ybar.iter().cloned().collect();
    let e = Expr::cyl_r(ys, child);
    let e = Expr::sel_tuple(SelKind::R, xbar, ybar, e);
    let e = Expr::cyl_r(xs, e);
    Ok(Expr::sel_tuple(SelKind::LR, xbar, xbar, e))
}

/// Issues variables `base#k` that cannot clash with user variables, since
/// the parser rejects `#` in user input.
#[derive(Debug, Clone)]
pub struct FreshVarSupply {
    base: VarUniverse,
    counter: usize,
    issued: Vec<Var>,
    pinned: bool,
}

impl FreshVarSupply {
    pub fn new(base: VarUniverse) -> Self {
        FreshVarSupply {
            base,
            counter: 0,
            issued: Vec::new(),
            pinned: false,
        }
    }

    /// A supply that refuses to issue anything: the universe is fixed.
    pub fn pinned(base: VarUniverse) -> Self {
        FreshVarSupply {
            pinned: true,
            ..Self::new(base)
        }
    }

    pub fn base(&self) -> &VarUniverse {
        &self.base
    }

    pub fn issued(&self) -> &[Var] {
        &self.issued
    }

    /// Base universe followed by every issued variable.
    pub fn universe(&self) -> VarUniverse {
        self.base.extended(self.issued.iter().cloned())
    }

    pub fn fresh(&mut self, hint: &Var) -> Result<Var, RewriteError> {
        if self.pinned {
            return Err(RewriteError::FreshExhausted(self.base.vars().to_vec()));
        }
        let stem = hint.name().split(FRESH_MARK).next().unwrap_or_default();
        loop {
            let v = Var::new(format!("{stem}{FRESH_MARK}{}", self.counter));
            self.counter += 1;
            if !self.base.contains(&v) && !self.issued.contains(&v) {
                self.issued.push(v.clone());
                return Ok(v);
            }
        }
    }
}

fn stem(v: &Var) -> &str {
    v.name().split(FRESH_MARK).next().unwrap_or_default()
}

/// Rewrites every `α ; β` (innermost-leftmost first) into a composition-free
/// expression. When `β` is io-disjoint the composition is replaced directly;
/// otherwise the outputs of `β` are moved to fresh variables first.
///
/// Returns the result and the universe extended with the fresh variables.
/// Over that universe the result denotes exactly the same pairs as `expr`.
///
/// Fresh variables already issued are reused when they do not occur in `β`:
/// every rewritten subexpression is equivalent to a composition that
/// mentions no fresh variable, hence is inertially cylindrified on them.
pub fn eliminate_compositions(expr: &Expr, supply: &mut FreshVarSupply) -> Result<(Expr, VarUniverse), RewriteError> {
    let out = eliminate(expr, supply)?;
    Ok((out, supply.universe()))
}

fn eliminate(expr: &Expr, supply: &mut FreshVarSupply) -> Result<Expr, RewriteError> {
    Ok(match expr {
        Expr::Id | Expr::Atom { .. } => expr.clone(),
        Expr::Binary { kind, left, right } => {
            let l = eliminate(left, supply)?;
            let r = eliminate(right, supply)?;
            match kind {
                BinOp::Compose => eliminate_step(&l, &r, supply)?,
                _ => Expr::binary(*kind, l, r),
            }
        }
        Expr::Converse { child } => Expr::converse(eliminate(child, supply)?),
        Expr::Cyl { side, vars, child } => Expr::cyl(*side, vars.clone(), eliminate(child, supply)?),
        Expr::Sel { kind, x, y, child } => Expr::sel(*kind, x.clone(), y.clone(), eliminate(child, supply)?),
    })
}

fn eliminate_step(alpha: &Expr, beta: &Expr, supply: &mut FreshVarSupply) -> Result<Expr, RewriteError> {
    if is_io_disjoint(beta) {
        return compose_io_disjoint(alpha, beta);
    }
    let xbar: Vec<Var> = syn_io(beta).outputs.into_iter().collect();
    let mut avoid = beta.variables();
    avoid.extend(xbar.iter().cloned());
    let ybar = fresh_tuple(&xbar, &avoid, supply)?;
    let moved = build_move(&xbar, &ybar, beta.clone())?;
    let inner = compose_io_disjoint(alpha, &moved)?;
    build_move(&ybar, &xbar, inner)
}

fn fresh_tuple(xbar: &[Var], avoid: &VarSet, supply: &mut FreshVarSupply) -> Result<Vec<Var>, RewriteError> {
    let mut chosen: Vec<Var> = Vec::new();
    for x in xbar {
        let usable = |v: &&Var| !avoid.contains(*v) && !chosen.contains(*v);
        let pool = supply.issued();
        let pick = pool
            .iter()
            .filter(usable)
            .find(|v| stem(v) == stem(x))
            .or_else(|| pool.iter().find(usable))
            .cloned();
        let v = match pick {
            Some(v) => v,
            None => supply.fresh(x)?,
        };
        chosen.push(v);
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{equivalent_on, evaluate, Domain, Interpretation, ValuationSpace};
    use crate::syntax::{parse_expression, parse_vocabulary, var_set, Vocabulary};

    fn vocab() -> Vocabulary {
        parse_vocabulary("P1/2 in 1\nM/2 in 1\nA/2 in 1\nB/2 in 1").unwrap()
    }

    fn parse(s: &str) -> Expr {
        parse_expression(s, &vocab()).unwrap()
    }

    fn vars(names: &[&str]) -> Vec<Var> {
        names.iter().map(|n| Var::new(*n)).collect()
    }

    fn successor(n: i64) -> Interpretation {
        Interpretation::new().with("P1", (0..n - 1).map(|i| vec![i, i + 1]))
    }

    #[test]
    fn reduced_operator_set() {
        let e = parse("sel_r{x=y}(A(x;y)) & cyl_r{y}(sel_l{x=y}(B(x;y))) & sel_l{x=x}(id)");
        let r = expand_redundant(&e);
        r.visit(&mut |n| match n {
            Expr::Binary { kind, .. } => assert_ne!(*kind, BinOp::Intersect),
            Expr::Cyl { side, .. } => assert_eq!(*side, Side::Left),
            Expr::Sel { kind, .. } => assert_eq!(*kind, SelKind::LR),
            _ => {}
        });
        assert_eq!(
            expand_redundant(&parse("A(x;y) & B(x;y)")).to_string(),
            "A(x;y) \\ (A(x;y) \\ B(x;y))"
        );
        assert_eq!(expand_redundant(&parse("sel_l{x=x}(A(x;y))")), parse("A(x;y)"));
    }

    #[test]
    fn compose_io_disjoint_examples() {
        let r = compose_io_disjoint(&parse("P1(x;x)"), &parse("P1(x;y)")).unwrap();
        assert_eq!(r, parse("cyl_r{y}(P1(x;x)) & cyl_l{x}(P1(x;y))"));
        let r = compose_io_disjoint(&Expr::Id, &parse("M(x;y)")).unwrap();
        assert_eq!(r, parse("cyl_r{y}(id) & M(x;y)"));
        assert!(matches!(
            compose_io_disjoint(&parse("P1(x;x)"), &parse("P1(x;x)")),
            Err(RewriteError::NotIoDisjoint(_))
        ));
    }

    #[test]
    fn move_shape_and_preconditions() {
        let m = build_move(&vars(&["x"]), &vars(&["y"]), parse("M(x;x)")).unwrap();
        assert_eq!(m, parse("sel_lr{x=x}(cyl_r{x}(sel_r{x=y}(cyl_r{y}(M(x;x)))))"));
        assert_eq!(build_move(&[], &[], Expr::Id).unwrap(), Expr::Id);
        assert!(build_move(&vars(&["x"]), &vars(&["x"]), Expr::Id).is_err());
        assert!(build_move(&vars(&["x", "x"]), &vars(&["y", "z"]), Expr::Id).is_err());
        assert!(build_move(&vars(&["x"]), &vars(&["y", "z"]), Expr::Id).is_err());
    }

    #[test]
    fn fresh_names() {
        let mut s = FreshVarSupply::new(VarUniverse::from_names(["x"]).unwrap());
        assert_eq!(s.fresh(&Var::new("x")).unwrap().name(), "x#0");
        assert_eq!(s.fresh(&Var::new("x#0")).unwrap().name(), "x#1");
        assert_eq!(s.universe().len(), 3);
        let mut p = FreshVarSupply::pinned(VarUniverse::from_names(["x"]).unwrap());
        assert!(matches!(p.fresh(&Var::new("x")), Err(RewriteError::FreshExhausted(_))));
    }

    #[test]
    fn eliminates_double_increment_with_one_fresh_variable() {
        let e = parse("P1(x;x) ; P1(x;x)");
        let mut supply = FreshVarSupply::new(VarUniverse::from_names(["x"]).unwrap());
        let (r, u) = eliminate_compositions(&e, &mut supply).unwrap();
        assert!(!r.contains_compose());
        assert_eq!(u.vars(), &vars(&["x", "x#0"])[..]);
        let space = ValuationSpace::new(u, Domain::new(0..4).unwrap()).unwrap();
        let d = successor(4);
        assert!(equivalent_on(&e, &r, &d, &space).unwrap());
        let got = evaluate(&r, &d, &space).unwrap();
        for (a, b) in got.pairs() {
            assert_eq!(b.0[0], a.0[0] + 2);
            assert_eq!(a.0[1], b.0[1]);
        }
        assert_eq!(got.len(), 2 * 4);
    }

    #[test]
    fn io_disjoint_path_needs_no_fresh_variables() {
        let e = parse("P1(x;x) ; P1(x;y)");
        let mut supply = FreshVarSupply::pinned(VarUniverse::from_names(["x", "y"]).unwrap());
        let (r, u) = eliminate_compositions(&e, &mut supply).unwrap();
        assert_eq!(u.len(), 2);
        let space = ValuationSpace::new(u, Domain::new(0..3).unwrap()).unwrap();
        assert!(equivalent_on(&e, &r, &successor(3), &space).unwrap());
        let mut pinned = FreshVarSupply::pinned(VarUniverse::from_names(["x"]).unwrap());
        assert!(eliminate_compositions(&parse("P1(x;x) ; P1(x;x)"), &mut pinned).is_err());
    }

    #[test]
    fn nested_compositions() {
        let e = parse("(P1(x;x) ; P1(x;x)) ; (P1(x;x) ; conv(P1(x;x)))");
        let mut supply = FreshVarSupply::new(VarUniverse::from_names(["x"]).unwrap());
        let (r, u) = eliminate_compositions(&e, &mut supply).unwrap();
        assert!(!r.contains_compose());
        let space = ValuationSpace::new(u, Domain::new(0..4).unwrap()).unwrap();
        assert!(equivalent_on(&e, &r, &successor(4), &space).unwrap());
        assert_eq!(syn_io(&r).outputs, var_set(["x"]));
        assert!(!eliminate_compositions(&parse("id ; id"), &mut supply)
            .unwrap()
            .0
            .contains_compose());
    }
}

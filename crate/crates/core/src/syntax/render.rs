use std::fmt::Write;

use super::{BinOp, Expr, SelKind, Side, Var};

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary { kind, .. } => match kind {
            BinOp::Union | BinOp::Difference => 1,
            BinOp::Intersect => 2,
            BinOp::Compose => 3,
        },
        _ => 4,
    }
}

fn join(vars: impl IntoIterator<Item = impl std::borrow::Borrow<Var>>) -> String {
    let mut out = String::new();
    for (i, v) in vars.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(v.borrow().name());
    }
    out
}

/// Canonical text form; `parse_expression(render(e))` yields `e` again.
pub fn render(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Id => out.push_str("id"),
        Expr::Atom {
            module,
            inputs,
            outputs,
        } => {
            if inputs.is_empty() && outputs.is_empty() {
                let _ = write!(out, "{module}()");
            } else {
                let _ = write!(out, "{module}({};{})", join(inputs), join(outputs));
            }
        }
        Expr::Binary { kind, left, right } => {
            let p = precedence(e);
            write_operand(out, left, precedence(left) < p);
            out.push_str(match kind {
                BinOp::Union => " + ",
                BinOp::Intersect => " & ",
                BinOp::Difference => " \\ ",
                BinOp::Compose => " ; ",
            });
            write_operand(out, right, precedence(right) <= p);
        }
        Expr::Converse { child } => {
            out.push_str("conv");
            write_operand(out, child, true);
        }
        Expr::Cyl { side, vars, child } => {
            let name = match side {
                Side::Left => "cyl_l",
                Side::Right => "cyl_r",
            };
            let _ = write!(out, "{name}{{{}}}", join(vars));
            write_operand(out, child, true);
        }
        Expr::Sel { kind, x, y, child } => {
            let name = match kind {
                SelKind::L => "sel_l",
                SelKind::R => "sel_r",
                SelKind::LR => "sel_lr",
            };
            let _ = write!(out, "{name}{{{x}={y}}}");
            write_operand(out, child, true);
        }
    }
}

fn write_operand(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

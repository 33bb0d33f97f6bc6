//! Abstract syntax for vocabularies and LIF expressions, plus the ASCII
//! surface syntax (parser and canonical renderer).

mod parser;
mod render;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parser::{infer_vocabulary, parse_expression, parse_expression_in, parse_vocabulary, Parser};
pub use render::render;

/// Character reserved for machine-issued fresh variables. User input may not
/// contain it.
pub const FRESH_MARK: char = '#';

/// A first-order variable, identified by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// True for variables issued by a fresh-variable supply.
    pub fn is_fresh(&self) -> bool {
        self.0.contains(FRESH_MARK)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var(s.to_string())
    }
}

pub type VarSet = BTreeSet<Var>;

/// Builds a [`VarSet`] from names.
pub fn var_set<'a>(names: impl IntoIterator<Item = &'a str>) -> VarSet {
    names.into_iter().map(Var::from).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub arity: usize,
    pub input_arity: usize,
}

/// Module names with their arity and input arity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    entries: BTreeMap<String, Signature>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum VocabularyError {
    #[error("module {name}: input arity {input_arity} exceeds arity {arity}")]
    InputArity {
        name: String,
        arity: usize,
        input_arity: usize,
    },
    #[error("module {0} declared twice")]
    Duplicate(String),
    #[error("{0:?} is not a valid module name")]
    BadName(String),
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, arity: usize, input_arity: usize) -> Result<(), VocabularyError> {
        let name = name.into();
        if !is_identifier(&name) || parser::is_keyword(&name) {
            return Err(VocabularyError::BadName(name));
        }
        if input_arity > arity {
            return Err(VocabularyError::InputArity {
                name,
                arity,
                input_arity,
            });
        }
        if self.entries.contains_key(&name) {
            return Err(VocabularyError::Duplicate(name));
        }
        self.entries.insert(name, Signature { arity, input_arity });
        Ok(())
    }

    /// Builder-style insert for code that constructs fixed vocabularies.
    pub fn with(mut self, name: &str, arity: usize, input_arity: usize) -> Result<Self, VocabularyError> {
        self.insert(name, arity, input_arity)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<Signature> {
        self.entries.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Signature)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, sig) in &self.entries {
            writeln!(f, "{}/{} in {}", name, sig.arity, sig.input_arity)?;
        }
        Ok(())
    }
}

/// The finite, ordered universe of variables valuations range over.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Var>", into = "Vec<Var>")]
pub struct VarUniverse {
    vars: Vec<Var>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum UniverseError {
    #[error("variable universe must be nonempty")]
    Empty,
    #[error("variable {0} listed twice in universe")]
    Duplicate(Var),
}

impl VarUniverse {
    pub fn new(vars: impl IntoIterator<Item = Var>) -> Result<Self, UniverseError> {
        let vars: Vec<Var> = vars.into_iter().collect();
        if vars.is_empty() {
            return Err(UniverseError::Empty);
        }
        let mut seen = BTreeSet::new();
        for v in &vars {
            if !seen.insert(v) {
                return Err(UniverseError::Duplicate(v.clone()));
            }
        }
        Ok(VarUniverse { vars })
    }

    pub fn from_names<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<Self, UniverseError> {
        Self::new(names.into_iter().map(Var::from))
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn index_of(&self, v: &Var) -> Option<usize> {
        self.vars.iter().position(|w| w == v)
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.index_of(v).is_some()
    }

    pub fn to_set(&self) -> VarSet {
        self.vars.iter().cloned().collect()
    }

    /// Appends variables not already present, keeping the existing order.
    pub fn extended(&self, extra: impl IntoIterator<Item = Var>) -> VarUniverse {
        let mut vars = self.vars.clone();
        for v in extra {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        VarUniverse { vars }
    }
}

impl TryFrom<Vec<Var>> for VarUniverse {
    type Error = UniverseError;
    fn try_from(vars: Vec<Var>) -> Result<Self, Self::Error> {
        VarUniverse::new(vars)
    }
}

impl From<VarUniverse> for Vec<Var> {
    fn from(u: VarUniverse) -> Self {
        u.vars
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelKind {
    /// `ν1(x) = ν1(y)`
    L,
    /// `ν2(x) = ν2(y)`
    R,
    /// `ν1(x) = ν2(y)`
    LR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinOp {
    Union,
    Intersect,
    Difference,
    Compose,
}

/// LIF expression tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Expr {
    Id,
    Atom {
        module: String,
        inputs: Vec<Var>,
        outputs: Vec<Var>,
    },
    Binary {
        kind: BinOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Converse {
        child: Box<Expr>,
    },
    Cyl {
        side: Side,
        vars: VarSet,
        child: Box<Expr>,
    },
    Sel {
        kind: SelKind,
        x: Var,
        y: Var,
        child: Box<Expr>,
    },
}

impl Expr {
    pub fn atom<'a>(
        module: &str,
        inputs: impl IntoIterator<Item = &'a str>,
        outputs: impl IntoIterator<Item = &'a str>,
    ) -> Expr {
        Expr::Atom {
            module: module.to_string(),
            inputs: inputs.into_iter().map(Var::from).collect(),
            outputs: outputs.into_iter().map(Var::from).collect(),
        }
    }

    pub fn binary(kind: BinOp, left: Expr, right: Expr) -> Expr {
        Expr::Binary {
            kind,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn union(left: Expr, right: Expr) -> Expr {
        Self::binary(BinOp::Union, left, right)
    }

    pub fn intersect(left: Expr, right: Expr) -> Expr {
        Self::binary(BinOp::Intersect, left, right)
    }

    pub fn difference(left: Expr, right: Expr) -> Expr {
        Self::binary(BinOp::Difference, left, right)
    }

    pub fn compose(left: Expr, right: Expr) -> Expr {
        Self::binary(BinOp::Compose, left, right)
    }

    pub fn converse(child: Expr) -> Expr {
        Expr::Converse { child: Box::new(child) }
    }

    pub fn cyl(side: Side, vars: VarSet, child: Expr) -> Expr {
        Expr::Cyl {
            side,
            vars,
            child: Box::new(child),
        }
    }

    pub fn cyl_l(vars: VarSet, child: Expr) -> Expr {
        Self::cyl(Side::Left, vars, child)
    }

    pub fn cyl_r(vars: VarSet, child: Expr) -> Expr {
        Self::cyl(Side::Right, vars, child)
    }

    pub fn sel(kind: SelKind, x: impl Into<Var>, y: impl Into<Var>, child: Expr) -> Expr {
        Expr::Sel {
            kind,
            x: x.into(),
            y: y.into(),
            child: Box::new(child),
        }
    }

    /// Tuple selection: `sel{(x1,..,xk)=(y1,..,yk)}(e)` is
    /// `sel{x1=y1}(sel{x2=y2}(...(e)))`.
    pub fn sel_tuple(kind: SelKind, xs: &[Var], ys: &[Var], child: Expr) -> Expr {
        assert_eq!(xs.len(), ys.len(), "tuple selection needs equal lengths");
        xs.iter()
            .zip(ys)
            .rev()
            .fold(child, |acc, (x, y)| Expr::sel(kind, x.clone(), y.clone(), acc))
    }

    /// Every variable occurring anywhere in the expression.
    pub fn variables(&self) -> VarSet {
        let mut out = VarSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut VarSet) {
        match self {
            Expr::Id => {}
            Expr::Atom { inputs, outputs, .. } => out.extend(inputs.iter().chain(outputs).cloned()),
            Expr::Binary { left, right, .. } => {
                left.collect_variables(out);
                right.collect_variables(out);
            }
            Expr::Converse { child } => child.collect_variables(out),
            Expr::Cyl { vars, child, .. } => {
                out.extend(vars.iter().cloned());
                child.collect_variables(out);
            }
            Expr::Sel { x, y, child, .. } => {
                out.insert(x.clone());
                out.insert(y.clone());
                child.collect_variables(out);
            }
        }
    }

    /// Module names used by atoms in the expression.
    pub fn modules(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Atom { module, .. } = e {
                out.insert(module.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Id | Expr::Atom { .. } => {}
            Expr::Binary { left, right, .. } => {
                left.visit(f);
                right.visit(f);
            }
            Expr::Converse { child } | Expr::Cyl { child, .. } | Expr::Sel { child, .. } => child.visit(f),
        }
    }

    pub fn contains_compose(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(
                e,
                Expr::Binary {
                    kind: BinOp::Compose,
                    ..
                }
            ) {
                found = true;
            }
        });
        found
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Id | Expr::Atom { .. } => 1,
            Expr::Binary { left, right, .. } => 1 + left.depth().max(right.depth()),
            Expr::Converse { child } | Expr::Cyl { child, .. } | Expr::Sel { child, .. } => 1 + child.depth(),
        }
    }

    /// Checks atom arities against `vocab` and, if given, that every variable
    /// lies in `universe`.
    pub fn check(&self, vocab: &Vocabulary, universe: Option<&VarUniverse>) -> Result<(), WellFormedError> {
        let mut err = None;
        self.visit(&mut |e| {
            if err.is_some() {
                return;
            }
            if let Expr::Atom {
                module,
                inputs,
                outputs,
            } = e
            {
                match vocab.get(module) {
                    None => err = Some(WellFormedError::UnknownModule(module.clone())),
                    Some(sig) => {
                        if inputs.len() != sig.input_arity || inputs.len() + outputs.len() != sig.arity {
                            err = Some(WellFormedError::Arity {
                                module: module.clone(),
                                expected: (sig.input_arity, sig.arity - sig.input_arity),
                                found: (inputs.len(), outputs.len()),
                            });
                        }
                    }
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if let Some(u) = universe {
            if let Some(v) = self.variables().into_iter().find(|v| !u.contains(v)) {
                return Err(WellFormedError::OutsideUniverse(v));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum WellFormedError {
    #[error("unknown module {0}")]
    UnknownModule(String),
    #[error("module {module} expects {}/{} input/output arguments, found {}/{}", expected.0, expected.1, found.0, found.1)]
    Arity {
        module: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("variable {0} is outside the declared universe")]
    OutsideUniverse(Var),
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

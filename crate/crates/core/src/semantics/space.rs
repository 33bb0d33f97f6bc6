use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::syntax::{Var, VarUniverse};

/// Data values. The command line uses integers; evaluation only compares
/// them for equality.
pub type Value = i64;

/// Largest number of valuations a space may hold. Pair sets are stored as
/// dense bit matrices, so this bounds memory at 8 MiB per BRV.
pub const MAX_VALUATIONS: usize = 8192;

/// Finite, ordered set of data values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Value>", into = "Vec<Value>")]
pub struct Domain {
    elems: Vec<Value>,
}

impl Domain {
    pub fn new(elems: impl IntoIterator<Item = Value>) -> Result<Self, EvalError> {
        let elems: Vec<Value> = elems.into_iter().collect();
        if elems.is_empty() {
            return Err(EvalError::EmptyDomain);
        }
        let mut seen = BTreeSet::new();
        for &e in &elems {
            if !seen.insert(e) {
                return Err(EvalError::DuplicateValue(e));
            }
        }
        Ok(Domain { elems })
    }

    /// The domain `{1, ..., n}`.
    pub fn range(n: usize) -> Self {
        Domain {
            elems: (1..=n as Value).collect(),
        }
    }

    pub fn values(&self) -> &[Value] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn index_of(&self, v: Value) -> Option<usize> {
        self.elems.iter().position(|&e| e == v)
    }
}

impl TryFrom<Vec<Value>> for Domain {
    type Error = EvalError;
    fn try_from(v: Vec<Value>) -> Result<Self, Self::Error> {
        Domain::new(v)
    }
}

impl From<Domain> for Vec<Value> {
    fn from(d: Domain) -> Self {
        d.elems
    }
}

/// A total assignment of domain values to the universe, in universe order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Valuation(pub Vec<Value>);

impl Valuation {
    pub fn values(&self) -> &[Value] {
        &self.0
    }
}

/// Integer code of a valuation inside a [`ValuationSpace`].
pub type Code = usize;

/// All valuations of a universe over a domain, numbered in lexicographic
/// order (first universe variable most significant, domain order per digit).
#[derive(Debug, PartialEq, Eq)]
pub struct ValuationSpace {
    universe: VarUniverse,
    domain: Domain,
    size: usize,
    weights: Vec<usize>,
}

impl ValuationSpace {
    pub fn new(universe: VarUniverse, domain: Domain) -> Result<Arc<Self>, EvalError> {
        let base = domain.len();
        let n = universe.len();
        let mut size: usize = 1;
        for _ in 0..n {
            size = size
                .checked_mul(base)
                .filter(|s| *s <= MAX_VALUATIONS)
                .ok_or(EvalError::SpaceTooLarge { vars: n, values: base })?;
        }
        let mut weights = vec![1; n];
        for i in (0..n.saturating_sub(1)).rev() {
            weights[i] = weights[i + 1] * base;
        }
        Ok(Arc::new(ValuationSpace {
            universe,
            domain,
            size,
            weights,
        }))
    }

    pub fn universe(&self) -> &VarUniverse {
        &self.universe
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Number of valuations.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn var_index(&self, v: &Var) -> Result<usize, EvalError> {
        self.universe
            .index_of(v)
            .ok_or_else(|| EvalError::OutsideUniverse(v.clone()))
    }

    /// Domain index of variable `i` in valuation `code`.
    #[inline]
    pub fn digit(&self, code: Code, i: usize) -> usize {
        (code / self.weights[i]) % self.domain.len()
    }

    #[inline]
    pub fn with_digit(&self, code: Code, i: usize, d: usize) -> Code {
        code - self.digit(code, i) * self.weights[i] + d * self.weights[i]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> usize {
        self.weights[i]
    }

    pub fn value(&self, code: Code, i: usize) -> Value {
        self.domain.values()[self.digit(code, i)]
    }

    pub fn decode(&self, code: Code) -> Valuation {
        Valuation((0..self.universe.len()).map(|i| self.value(code, i)).collect())
    }

    pub fn encode(&self, val: &Valuation) -> Option<Code> {
        if val.0.len() != self.universe.len() {
            return None;
        }
        let mut code = 0;
        for (i, &v) in val.0.iter().enumerate() {
            code += self.domain.index_of(v)? * self.weights[i];
        }
        Some(code)
    }

    /// Zeroes the digits of the given variable positions.
    pub fn clear(&self, code: Code, positions: &[usize]) -> Code {
        positions
            .iter()
            .fold(code, |c, &i| c - self.digit(c, i) * self.weights[i])
    }

    /// Code offsets of every assignment to `positions`, in lexicographic
    /// order. Adding one to a code with those digits cleared enumerates its
    /// class.
    pub fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let mut out = vec![0];
        for &i in positions {
            let w = self.weights[i];
            out = out
                .iter()
                .flat_map(|&o| (0..self.domain.len()).map(move |d| o + d * w))
                .collect();
        }
        out.sort_unstable();
        out
    }

    /// Projection key of `code` on `positions` (digits in position order).
    pub fn project(&self, code: Code, positions: &[usize]) -> usize {
        positions
            .iter()
            .fold(0, |acc, &i| acc * self.domain.len() + self.digit(code, i))
    }
}

impl fmt::Display for ValuationSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} valuations over {:?} x {:?}",
            self.size,
            self.universe.vars(),
            self.domain.values()
        )
    }
}

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::space::{Code, Valuation, ValuationSpace};
use super::EvalError;
use crate::syntax::{SelKind, Side, Var, VarSet};

/// A binary relation on valuations, materialized as a dense bit matrix over
/// a [`ValuationSpace`]. Row `a`, column `b` is set iff `(a, b)` is a pair.
#[derive(Clone)]
pub struct Brv {
    space: Arc<ValuationSpace>,
    words: usize,
    bits: Vec<u64>,
}

impl PartialEq for Brv {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.space, &other.space) || self.space == other.space) && self.bits == other.bits
    }
}

impl Eq for Brv {}

impl fmt::Debug for Brv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(
                self.iter()
                    .map(|(a, b)| (self.space.decode(a).0, self.space.decode(b).0)),
            )
            .finish()
    }
}

impl Brv {
    pub fn empty(space: &Arc<ValuationSpace>) -> Self {
        let words = space.size().div_ceil(64);
        Brv {
            space: space.clone(),
            words,
            bits: vec![0; words * space.size()],
        }
    }

    /// `{(ν, ν)}` for every valuation.
    pub fn diagonal(space: &Arc<ValuationSpace>) -> Self {
        let mut out = Self::empty(space);
        for a in 0..space.size() {
            out.insert(a, a);
        }
        out
    }

    /// Every pair of valuations.
    pub fn full(space: &Arc<ValuationSpace>) -> Self {
        let mut out = Self::empty(space);
        let n = space.size();
        for a in 0..n {
            for b in 0..n {
                out.insert(a, b);
            }
        }
        out
    }

    pub fn from_pairs(space: &Arc<ValuationSpace>, pairs: impl IntoIterator<Item = (Code, Code)>) -> Self {
        let mut out = Self::empty(space);
        for (a, b) in pairs {
            out.insert(a, b);
        }
        out
    }

    pub fn space(&self) -> &Arc<ValuationSpace> {
        &self.space
    }

    #[inline]
    pub fn insert(&mut self, a: Code, b: Code) {
        self.bits[a * self.words + b / 64] |= 1 << (b % 64);
    }

    #[inline]
    pub fn contains(&self, a: Code, b: Code) -> bool {
        self.bits[a * self.words + b / 64] & (1 << (b % 64)) != 0
    }

    pub fn contains_valuations(&self, v1: &Valuation, v2: &Valuation) -> bool {
        match (self.space.encode(v1), self.space.encode(v2)) {
            (Some(a), Some(b)) => self.contains(a, b),
            _ => false,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    fn row_words(&self, a: Code) -> &[u64] {
        &self.bits[a * self.words..(a + 1) * self.words]
    }

    fn row_words_mut(&mut self, a: Code) -> &mut [u64] {
        &mut self.bits[a * self.words..(a + 1) * self.words]
    }

    /// Right-hand valuations paired with `a`, ascending.
    pub fn row(&self, a: Code) -> impl Iterator<Item = Code> + '_ {
        self.row_words(a).iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }

    /// All pairs in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (Code, Code)> + '_ {
        (0..self.space.size()).flat_map(move |a| self.row(a).map(move |b| (a, b)))
    }

    /// All pairs decoded into valuations, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (Valuation, Valuation)> + '_ {
        self.iter().map(|(a, b)| (self.space.decode(a), self.space.decode(b)))
    }

    pub fn to_set(&self) -> BTreeSet<(Code, Code)> {
        self.iter().collect()
    }

    pub fn filter(&self, mut keep: impl FnMut(Code, Code) -> bool) -> Brv {
        let mut out = Brv::empty(&self.space);
        for (a, b) in self.iter() {
            if keep(a, b) {
                out.insert(a, b);
            }
        }
        out
    }

    fn check_same(&self, other: &Brv) -> Result<(), EvalError> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(EvalError::SpaceMismatch)
        }
    }

    fn zip_words(&self, other: &Brv, f: impl Fn(u64, u64) -> u64) -> Result<Brv, EvalError> {
        self.check_same(other)?;
        Ok(Brv {
            space: self.space.clone(),
            words: self.words,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn union(&self, other: &Brv) -> Result<Brv, EvalError> {
        self.zip_words(other, |a, b| a | b)
    }

    pub fn intersect(&self, other: &Brv) -> Result<Brv, EvalError> {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Brv) -> Result<Brv, EvalError> {
        self.zip_words(other, |a, b| a & !b)
    }

    pub fn is_subset(&self, other: &Brv) -> Result<bool, EvalError> {
        self.check_same(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(&a, &b)| a & !b == 0))
    }

    /// `{(ν1, ν2) | ∃ν3: (ν1, ν3) ∈ self, (ν3, ν2) ∈ other}`
    pub fn compose(&self, other: &Brv) -> Result<Brv, EvalError> {
        self.check_same(other)?;
        let mut out = Brv::empty(&self.space);
        let w = self.words;
        for a in 0..self.space.size() {
            let mids: Vec<Code> = self.row(a).collect();
            if mids.is_empty() {
                continue;
            }
            let row = &mut out.bits[a * w..(a + 1) * w];
            for m in mids {
                for (dst, src) in row.iter_mut().zip(other.row_words(m)) {
                    *dst |= src;
                }
            }
        }
        Ok(out)
    }

    pub fn converse(&self) -> Brv {
        let mut out = Brv::empty(&self.space);
        for (a, b) in self.iter() {
            out.insert(b, a);
        }
        out
    }

    fn positions(&self, vars: &VarSet) -> Result<Vec<usize>, EvalError> {
        vars.iter().map(|v| self.space.var_index(v)).collect()
    }

    /// Left cylindrification: `{(ν1, ν2) | ∃ν1' agreeing with ν1 outside Z, (ν1', ν2) ∈ self}`;
    /// the right variant relaxes `ν2` instead.
    pub fn cyl(&self, side: Side, vars: &VarSet) -> Result<Brv, EvalError> {
        let pos = self.positions(vars)?;
        if pos.is_empty() {
            return Ok(self.clone());
        }
        let offsets = self.space.offsets(&pos);
        let n = self.space.size();
        let w = self.words;
        let mut out = Brv::empty(&self.space);
        match side {
            Side::Left => {
                // Rows of a class are merged, then shared by every member.
                let mut acc = vec![0u64; w];
                for base in (0..n).filter(|&c| self.space.clear(c, &pos) == c) {
                    acc.iter_mut().for_each(|x| *x = 0);
                    for &o in &offsets {
                        for (d, s) in acc.iter_mut().zip(self.row_words(base + o)) {
                            *d |= s;
                        }
                    }
                    for &o in &offsets {
                        out.row_words_mut(base + o).copy_from_slice(&acc);
                    }
                }
            }
            Side::Right => {
                let mut bases = BTreeSet::new();
                for a in 0..n {
                    bases.clear();
                    bases.extend(self.row(a).map(|b| self.space.clear(b, &pos)));
                    for &base in &bases {
                        for &o in &offsets {
                            out.insert(a, base + o);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Keeps the pairs satisfying the selection condition.
    pub fn select(&self, kind: SelKind, x: &Var, y: &Var) -> Result<Brv, EvalError> {
        let i = self.space.var_index(x)?;
        let j = self.space.var_index(y)?;
        let s = &self.space;
        Ok(match kind {
            SelKind::L => self.filter(|a, _| s.digit(a, i) == s.digit(a, j)),
            SelKind::R => self.filter(|_, b| s.digit(b, i) == s.digit(b, j)),
            SelKind::LR => self.filter(|a, b| s.digit(a, i) == s.digit(b, j)),
        })
    }

    /// Restricts every pair to the variables of `sub`, a sub-universe of this
    /// space over the same domain.
    pub fn project(&self, sub: &Arc<ValuationSpace>) -> Result<Brv, EvalError> {
        if sub.domain() != self.space.domain() {
            return Err(EvalError::SpaceMismatch);
        }
        let pos: Vec<usize> = sub
            .universe()
            .vars()
            .iter()
            .map(|v| self.space.var_index(v))
            .collect::<Result<_, _>>()?;
        let mut out = Brv::empty(sub);
        for (a, b) in self.iter() {
            out.insert(self.space.project(a, &pos), self.space.project(b, &pos));
        }
        Ok(out)
    }
}

use std::fmt;

use thiserror::Error;

use super::{is_identifier, BinOp, Expr, SelKind, Side, Var, VarSet, VarUniverse, Vocabulary, FRESH_MARK};

const KEYWORDS: &[&str] = &["id", "conv", "cyl_l", "cyl_r", "sel_l", "sel_r", "sel_lr"];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected {found}, expected {expected}")]
    Unexpected { found: String, expected: String },
    #[error("unexpected character {0:?}")]
    BadChar(char),
    #[error("'#' is reserved for generated variables")]
    ReservedChar,
    #[error("unknown module {0}")]
    UnknownModule(String),
    #[error("module {module} expects {inputs} input and {outputs} output arguments, found {found_inputs} and {found_outputs}")]
    Arity {
        module: String,
        inputs: usize,
        outputs: usize,
        found_inputs: usize,
        found_outputs: usize,
    },
    #[error("variable {0} is outside the declared universe")]
    OutsideUniverse(String),
    #[error("tuple selection sides have different lengths ({0} vs {1})")]
    TupleLength(usize, usize),
    #[error("malformed vocabulary entry: {0}")]
    VocabularyLine(String),
    #[error("{0}")]
    Vocabulary(#[from] super::VocabularyError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Plus,
    Amp,
    Backslash,
    Eq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier {s:?}"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::LBrace => f.write_str("'{'"),
            Tok::RBrace => f.write_str("'}'"),
            Tok::Comma => f.write_str("','"),
            Tok::Semi => f.write_str("';'"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Amp => f.write_str("'&'"),
            Tok::Backslash => f.write_str("'\\'"),
            Tok::Eq => f.write_str("'='"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str, allow_fresh: bool) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == FRESH_MARK {
            return Err(ParseError {
                pos,
                kind: ParseErrorKind::ReservedChar,
            });
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' || (allow_fresh && d == FRESH_MARK) {
                    s.push(d);
                    chars.next();
                    col += 1;
                } else if d == FRESH_MARK {
                    return Err(ParseError {
                        pos: Pos { line, col },
                        kind: ParseErrorKind::ReservedChar,
                    });
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(s), pos));
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '+' => Tok::Plus,
            '&' => Tok::Amp,
            '\\' => Tok::Backslash,
            '=' => Tok::Eq,
            other => {
                return Err(ParseError {
                    pos,
                    kind: ParseErrorKind::BadChar(other),
                })
            }
        };
        chars.next();
        col += 1;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Expression parser bound to a vocabulary and, optionally, a universe.
#[derive(Debug, Clone, Copy)]
pub struct Parser<'a> {
    vocab: &'a Vocabulary,
    universe: Option<&'a VarUniverse>,
    allow_fresh: bool,
}

impl<'a> Parser<'a> {
    pub fn new(vocab: &'a Vocabulary) -> Self {
        Parser {
            vocab,
            universe: None,
            allow_fresh: false,
        }
    }

    pub fn universe(mut self, universe: &'a VarUniverse) -> Self {
        self.universe = Some(universe);
        self
    }

    /// Accept `#` in variable names, e.g. to read back rewriter output.
    pub fn allow_fresh(mut self, allow: bool) -> Self {
        self.allow_fresh = allow;
        self
    }

    pub fn parse(&self, text: &str) -> Result<Expr, ParseError> {
        let toks = lex(text, self.allow_fresh)?;
        let mut st = State { toks, i: 0, cfg: *self };
        let e = st.expr()?;
        st.expect(Tok::Eof, "end of input")?;
        Ok(e)
    }
}

pub fn parse_expression(text: &str, vocab: &Vocabulary) -> Result<Expr, ParseError> {
    Parser::new(vocab).parse(text)
}

pub fn parse_expression_in(text: &str, vocab: &Vocabulary, universe: &VarUniverse) -> Result<Expr, ParseError> {
    Parser::new(vocab).universe(universe).parse(text)
}

struct State<'a> {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    cfg: Parser<'a>,
}

impl State<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos(),
            kind: ParseErrorKind::Unexpected {
                found: self.peek().to_string(),
                expected: expected.to_string(),
            },
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Pos, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.unexpected(what)
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.inter()?;
        loop {
            let kind = match self.peek() {
                Tok::Plus => BinOp::Union,
                Tok::Backslash => BinOp::Difference,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.inter()?;
            left = Expr::binary(kind, left, right);
        }
    }

    fn inter(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.seq()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let right = self.seq()?;
            left = Expr::intersect(left, right);
        }
        Ok(left)
    }

    fn seq(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.unary()?;
        while *self.peek() == Tok::Semi {
            self.bump();
            let right = self.unary()?;
            left = Expr::compose(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "id" => Ok(Expr::Id),
                    "conv" => Ok(Expr::converse(self.unary()?)),
                    "cyl_l" | "cyl_r" => {
                        let side = if name == "cyl_l" { Side::Left } else { Side::Right };
                        self.expect(Tok::LBrace, "'{'")?;
                        let vars = self.var_list(Tok::RBrace)?;
                        self.expect(Tok::RBrace, "'}'")?;
                        let child = self.unary()?;
                        Ok(Expr::cyl(side, vars.into_iter().collect::<VarSet>(), child))
                    }
                    "sel_l" | "sel_r" | "sel_lr" => {
                        let kind = match name.as_str() {
                            "sel_l" => SelKind::L,
                            "sel_r" => SelKind::R,
                            _ => SelKind::LR,
                        };
                        self.expect(Tok::LBrace, "'{'")?;
                        let (xs, ys) = self.sel_spec()?;
                        self.expect(Tok::RBrace, "'}'")?;
                        let child = self.unary()?;
                        Ok(Expr::sel_tuple(kind, &xs, &ys, child))
                    }
                    _ => self.atom(name, pos),
                }
            }
            _ => self.unexpected("an expression"),
        }
    }

    fn atom(&mut self, module: String, pos: Pos) -> Result<Expr, ParseError> {
        let sig = self.cfg.vocab.get(&module).ok_or(ParseError {
            pos,
            kind: ParseErrorKind::UnknownModule(module.clone()),
        })?;
        self.expect(Tok::LParen, "'(' after module name")?;
        let first = self.var_list_until(&[Tok::Semi, Tok::RParen])?;
        let (inputs, outputs) = if *self.peek() == Tok::Semi {
            self.bump();
            let second = self.var_list(Tok::RParen)?;
            (first, second)
        } else if first.len() == sig.arity {
            // Positional form: split at the input arity.
            let mut inputs = first;
            let outputs = inputs.split_off(sig.input_arity);
            (inputs, outputs)
        } else {
            (first, Vec::new())
        };
        self.expect(Tok::RParen, "')'")?;
        if inputs.len() != sig.input_arity || inputs.len() + outputs.len() != sig.arity {
            return Err(ParseError {
                pos,
                kind: ParseErrorKind::Arity {
                    module,
                    inputs: sig.input_arity,
                    outputs: sig.arity - sig.input_arity,
                    found_inputs: inputs.len(),
                    found_outputs: outputs.len(),
                },
            });
        }
        Ok(Expr::Atom {
            module,
            inputs,
            outputs,
        })
    }

    fn var(&mut self) -> Result<Var, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                let v = Var::new(name);
                if let Some(u) = self.cfg.universe {
                    if !u.contains(&v) {
                        return Err(ParseError {
                            pos,
                            kind: ParseErrorKind::OutsideUniverse(v.name().to_string()),
                        });
                    }
                }
                Ok(v)
            }
            _ => self.unexpected("a variable"),
        }
    }

    fn var_list(&mut self, close: Tok) -> Result<Vec<Var>, ParseError> {
        self.var_list_until(&[close])
    }

    /// Possibly empty comma-separated variables, stopping before any of `stops`.
    fn var_list_until(&mut self, stops: &[Tok]) -> Result<Vec<Var>, ParseError> {
        let mut out = Vec::new();
        if stops.contains(self.peek()) {
            return Ok(out);
        }
        out.push(self.var()?);
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.var()?);
        }
        Ok(out)
    }

    fn sel_spec(&mut self) -> Result<(Vec<Var>, Vec<Var>), ParseError> {
        if *self.peek() == Tok::LParen {
            let pos = self.pos();
            self.bump();
            let xs = self.var_list(Tok::RParen)?;
            self.expect(Tok::RParen, "')'")?;
            self.expect(Tok::Eq, "'='")?;
            self.expect(Tok::LParen, "'('")?;
            let ys = self.var_list(Tok::RParen)?;
            self.expect(Tok::RParen, "')'")?;
            if xs.len() != ys.len() || xs.is_empty() {
                return Err(ParseError {
                    pos,
                    kind: ParseErrorKind::TupleLength(xs.len(), ys.len()),
                });
            }
            Ok((xs, ys))
        } else {
            let x = self.var()?;
            self.expect(Tok::Eq, "'='")?;
            let y = self.var()?;
            Ok((vec![x], vec![y]))
        }
    }
}

/// Parses `NAME/ARITY in IAR` lines; `#` starts a comment.
/// Vocabulary read off the atoms of `text`: `M(x,y;z)` declares `M/3 in 2`,
/// and an atom without `;` has inputs only. Conflicting uses are an arity error.
pub fn infer_vocabulary(text: &str) -> Result<Vocabulary, ParseError> {
    let toks = lex(text, true)?;
    let mut vocab = Vocabulary::new();
    for (i, (tok, pos)) in toks.iter().enumerate() {
        let Tok::Ident(name) = tok else { continue };
        if is_keyword(name) || toks.get(i + 1).map(|t| &t.0) != Some(&Tok::LParen) {
            continue;
        }
        let (mut inputs, mut outputs, mut semi) = (0, 0, false);
        for (t, _) in &toks[i + 2..] {
            match t {
                Tok::Ident(_) if semi => outputs += 1,
                Tok::Ident(_) => inputs += 1,
                Tok::Semi => semi = true,
                Tok::Comma => {}
                _ => break,
            }
        }
        match vocab.get(name) {
            Some(sig) if sig.input_arity != inputs || sig.arity != inputs + outputs => {
                return Err(ParseError {
                    pos: *pos,
                    kind: ParseErrorKind::Arity {
                        module: name.clone(),
                        inputs: sig.input_arity,
                        outputs: sig.arity - sig.input_arity,
                        found_inputs: inputs,
                        found_outputs: outputs,
                    },
                })
            }
            Some(_) => {}
            None => vocab
                .insert(name.clone(), inputs + outputs, inputs)
                .map_err(|e| ParseError {
                    pos: *pos,
                    kind: e.into(),
                })?,
        }
    }
    Ok(vocab)
}

pub fn parse_vocabulary(text: &str) -> Result<Vocabulary, ParseError> {
    let mut vocab = Vocabulary::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let col = line.len() - line.trim_start().len() + 1;
        let pos = Pos { line: lineno + 1, col };
        let bad = || ParseError {
            pos,
            kind: ParseErrorKind::VocabularyLine(raw.trim().to_string()),
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        let (head, iar) = match words.as_slice() {
            [head, "in", iar] => (*head, *iar),
            _ => return Err(bad()),
        };
        let (name, arity) = head.split_once('/').ok_or_else(bad)?;
        if !is_identifier(name) {
            return Err(bad());
        }
        let arity: usize = arity.parse().map_err(|_| bad())?;
        let iar: usize = iar.parse().map_err(|_| bad())?;
        vocab
            .insert(name, arity, iar)
            .map_err(|e| ParseError { pos, kind: e.into() })?;
    }
    Ok(vocab)
}

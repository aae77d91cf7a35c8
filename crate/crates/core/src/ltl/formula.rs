use std::fmt;

use thiserror::Error;

/// Core syntax. `∨`, `◇`, `□` and `⇒` are rewritten into these at parse
/// time. Atoms are proposition indices `1..`; 0 is the dummy symbol and
/// never appears.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    Atom(usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(p: usize) -> Self {
        Formula::Atom(p)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    /// `¬(¬a ∧ ¬b)`
    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    /// `true 𝖴 a`
    pub fn eventually(a: Formula) -> Self {
        Formula::until(Formula::True, a)
    }

    /// `¬◇¬a`
    pub fn always(a: Formula) -> Self {
        Formula::not(Formula::eventually(Formula::not(a)))
    }

    /// `¬a ∨ b`
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(Formula::not(a), b)
    }

    /// Nesting depth of temporal and boolean operators; atoms and `true`
    /// have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::Atom(_) => 0,
            Formula::Not(a) => 1 + a.depth(),
            Formula::And(a, b) | Formula::Until(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Largest atom index, 0 if none.
    pub fn max_atom(&self) -> usize {
        match self {
            Formula::True => 0,
            Formula::Atom(p) => *p,
            Formula::Not(a) => a.max_atom(),
            Formula::And(a, b) | Formula::Until(a, b) => a.max_atom().max(b.max_atom()),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::Atom(p) => write!(f, "p{p}"),
            Formula::Not(a) => write!(f, "!{a}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Until(a, b) => write!(f, "({a} U {b})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown atom `{name}` at {pos}")]
    UnknownAtom { pos: usize, name: String },
    #[error("`p0` at {pos} is the dummy symbol and cannot be used in a formula")]
    DummyAtom { pos: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    True,
    Atom(usize),
    And,
    Or,
    Not,
    Until,
    Eventually,
    Always,
    Implies,
    LParen,
    RParen,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let (pos, c) = chars[k];
        match c {
            c if c.is_whitespace() => k += 1,
            '&' => {
                out.push((Tok::And, pos));
                k += 1;
            }
            '|' => {
                out.push((Tok::Or, pos));
                k += 1;
            }
            '!' => {
                out.push((Tok::Not, pos));
                k += 1;
            }
            '(' => {
                out.push((Tok::LParen, pos));
                k += 1;
            }
            ')' => {
                out.push((Tok::RParen, pos));
                k += 1;
            }
            '-' => {
                if chars.get(k + 1).map(|c| c.1) != Some('>') {
                    return Err(ParseError::Syntax { pos, msg: "expected `->`".into() });
                }
                out.push((Tok::Implies, pos));
                k += 2;
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = k;
                while k < chars.len() && (chars[k].1.is_ascii_alphanumeric() || chars[k].1 == '_') {
                    k += 1;
                }
                let end = chars.get(k).map_or(text.len(), |c| c.0);
                let word = &text[pos..end];
                let tok = match word {
                    "true" => Tok::True,
                    "U" => Tok::Until,
                    "F" => Tok::Eventually,
                    "G" => Tok::Always,
                    w if w.len() > 1 && w.starts_with('p') && w[1..].bytes().all(|b| b.is_ascii_digit()) => {
                        let p: usize = w[1..].parse().map_err(|_| ParseError::UnknownAtom { pos, name: w.into() })?;
                        if p == 0 {
                            return Err(ParseError::DummyAtom { pos });
                        }
                        Tok::Atom(p)
                    }
                    w => return Err(ParseError::UnknownAtom { pos: chars[start].0, name: w.into() }),
                };
                out.push((tok, pos));
            }
            c => return Err(ParseError::Syntax { pos, msg: format!("unexpected character `{c}`") }),
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    // implies := or ('->' implies)?
    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = Formula::and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::Until {
            self.bump();
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Eventually => {
                self.bump();
                Ok(Formula::eventually(self.unary()?))
            }
            Tok::Always => {
                self.bump();
                Ok(Formula::always(self.unary()?))
            }
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Atom(p) => {
                let p = *p;
                self.bump();
                Ok(Formula::Atom(p))
            }
            Tok::LParen => {
                self.bump();
                let f = self.implies()?;
                if *self.peek() != Tok::RParen {
                    return self.error("expected `)`");
                }
                self.bump();
                Ok(f)
            }
            Tok::End => self.error("unexpected end of formula"),
            _ => self.error("expected a formula"),
        }
    }
}

/// Parses `true`, `p1..pN`, `!`, `&`, `|`, `->`, `U`, `F`, `G` and
/// parentheses. Binding from tightest: unary operators, `U` (right
/// associative), `&`, `|`, `->` (right associative).
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let f = p.implies()?;
    if *p.peek() != Tok::End {
        return p.error("trailing input");
    }
    Ok(f)
}

/// Like [`parse`], also rejecting atoms beyond `p{props}`.
pub fn parse_with_props(text: &str, props: usize) -> Result<Formula, ParseError> {
    let f = parse(text)?;
    if f.max_atom() > props {
        return Err(ParseError::UnknownAtom { pos: 0, name: format!("p{}", f.max_atom()) });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(i: usize) -> Formula {
        Formula::atom(i)
    }

    #[test]
    fn case_study_formulas() {
        let phi1 = parse("G(F p1 & F p2 & F p3 & F p4)").unwrap();
        let expected = Formula::always(Formula::and(
            Formula::and(Formula::and(Formula::eventually(p(1)), Formula::eventually(p(2))), Formula::eventually(p(3))),
            Formula::eventually(p(4)),
        ));
        assert_eq!(phi1, expected);
        let phi3 = parse("F p3 & F G p4").unwrap();
        assert_eq!(phi3, Formula::and(Formula::eventually(p(3)), Formula::eventually(Formula::always(p(4)))));
    }

    #[test]
    fn precedence() {
        assert_eq!(parse("!p1 U p2").unwrap(), Formula::until(Formula::not(p(1)), p(2)));
        assert_eq!(parse("p1 U p2 U p3").unwrap(), Formula::until(p(1), Formula::until(p(2), p(3))));
        assert_eq!(parse("p1 & p2 U p3").unwrap(), Formula::and(p(1), Formula::until(p(2), p(3))));
        assert_eq!(parse("p1 | p2 & p3").unwrap(), Formula::or(p(1), Formula::and(p(2), p(3))));
        assert_eq!(parse("p1 -> p2 -> p3").unwrap(), Formula::implies(p(1), Formula::implies(p(2), p(3))));
        assert_eq!(parse("p1 | p2 -> p3").unwrap(), Formula::implies(Formula::or(p(1), p(2)), p(3)));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("p1 U"), Err(ParseError::Syntax { pos: 4, .. })));
        assert!(matches!(parse("F p0"), Err(ParseError::DummyAtom { pos: 2 })));
        assert!(matches!(parse("q1"), Err(ParseError::UnknownAtom { .. })));
        assert!(matches!(parse("X p1"), Err(ParseError::UnknownAtom { .. })));
        assert!(matches!(parse("(p1"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("p1 p2"), Err(ParseError::Syntax { .. })));
        assert!(parse_with_props("F p5", 4).is_err());
    }

    #[test]
    fn display_round_trip() {
        for text in ["G(F p1 & F p2)", "F p3 & F G p4", "p1 U !p2", "true"] {
            let f = parse(text).unwrap();
            assert_eq!(parse(&f.to_string()).unwrap(), f);
        }
    }
}

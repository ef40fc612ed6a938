//! Quantifier-free formulas over `{<, =}` with indexed variables.
//!
//! Concrete syntax is an s-expression:
//!
//! ```text
//! formula := "true" | "false" | "(" op ")"
//! op      := ("lt"|"le"|"eq"|"ne"|"gt"|"ge") index index
//!          | "not" formula | "and" formula+ | "or" formula+
//! ```
//!
//! Evaluation is generic over any ordered [`Scalar`]; the samplers use `i64`
//! grid points, which are order-isomorphic to any finite set of rationals.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Comparison {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl Comparison {
    pub const ALL: [Comparison; 6] = [
        Comparison::Lt,
        Comparison::Le,
        Comparison::Eq,
        Comparison::Ne,
        Comparison::Gt,
        Comparison::Ge,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Comparison::Lt => "lt",
            Comparison::Le => "le",
            Comparison::Eq => "eq",
            Comparison::Ne => "ne",
            Comparison::Gt => "gt",
            Comparison::Ge => "ge",
        }
    }

    fn from_keyword(word: &str) -> Option<Self> {
        Comparison::ALL.into_iter().find(|c| c.keyword() == word)
    }

    pub fn holds<T: PartialOrd>(self, a: &T, b: &T) -> bool {
        match self {
            Comparison::Lt => a < b,
            Comparison::Le => a <= b,
            Comparison::Eq => a == b,
            Comparison::Ne => a != b,
            Comparison::Gt => a > b,
            Comparison::Ge => a >= b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Comparison, usize, usize),
    Not(Box<Formula>),
    /// At least one child.
    And(Vec<Formula>),
    /// At least one child.
    Or(Vec<Formula>),
}

impl Formula {
    pub fn lt(i: usize, j: usize) -> Self {
        Formula::Atom(Comparison::Lt, i, j)
    }
    pub fn le(i: usize, j: usize) -> Self {
        Formula::Atom(Comparison::Le, i, j)
    }
    pub fn eq(i: usize, j: usize) -> Self {
        Formula::Atom(Comparison::Eq, i, j)
    }
    pub fn ne(i: usize, j: usize) -> Self {
        Formula::Atom(Comparison::Ne, i, j)
    }
    pub fn gt(i: usize, j: usize) -> Self {
        Formula::Atom(Comparison::Gt, i, j)
    }
    pub fn ge(i: usize, j: usize) -> Self {
        Formula::Atom(Comparison::Ge, i, j)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(children: impl IntoIterator<Item = Formula>) -> Self {
        let children: Vec<_> = children.into_iter().collect();
        assert!(!children.is_empty(), "`and` needs at least one child");
        Formula::And(children)
    }

    pub fn or(children: impl IntoIterator<Item = Formula>) -> Self {
        let children: Vec<_> = children.into_iter().collect();
        assert!(!children.is_empty(), "`or` needs at least one child");
        Formula::Or(children)
    }

    /// One more than the largest variable index, or 0 for a closed formula.
    pub fn variable_count(&self) -> usize {
        match self {
            Formula::True | Formula::False => 0,
            Formula::Atom(_, i, j) => i.max(j) + 1,
            Formula::Not(f) => f.variable_count(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().map(Formula::variable_count).max().unwrap_or(0)
            }
        }
    }

    pub fn eval<T: Scalar>(&self, point: &[T]) -> Result<bool> {
        let needed = self.variable_count();
        if point.len() < needed {
            return Err(Error::PointTooShort {
                needed,
                got: point.len(),
            });
        }
        Ok(self.holds(point))
    }

    /// Evaluates without the length check. Panics on a short point.
    pub fn holds<T: PartialOrd>(&self, point: &[T]) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(c, i, j) => c.holds(&point[*i], &point[*j]),
            Formula::Not(f) => !f.holds(point),
            Formula::And(fs) => fs.iter().all(|f| f.holds(point)),
            Formula::Or(fs) => fs.iter().any(|f| f.holds(point)),
        }
    }

    /// Rewrites every variable index through `map`.
    pub fn map_indices(&self, map: &impl Fn(usize) -> usize) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(c, i, j) => Formula::Atom(*c, map(*i), map(*j)),
            Formula::Not(f) => Formula::not(f.map_indices(map)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.map_indices(map)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.map_indices(map)).collect()),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(c, i, j) => write!(f, "({} {i} {j})", c.keyword()),
            Formula::Not(inner) => write!(f, "(not {inner})"),
            Formula::And(fs) | Formula::Or(fs) => {
                f.write_str(if matches!(self, Formula::And(_)) {
                    "(and"
                } else {
                    "(or"
                })?;
                for child in fs {
                    write!(f, " {child}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse_formula(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("at byte {position}: {kind}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected `{0}`")]
    UnexpectedToken(String),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("`{0}` is not a non-negative integer index")]
    BadIndex(String),
    #[error("`{op}` expects {expected} but got {found}")]
    Arity {
        op: String,
        expected: &'static str,
        found: usize,
    },
    #[error("trailing input after formula")]
    TrailingInput,
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let tokens = tokenize(text);
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        end: text.len(),
    };
    let f = parser.formula()?;
    if let Some(tok) = parser.peek() {
        return Err(ParseError {
            position: tok.offset,
            kind: ParseErrorKind::TrailingInput,
        });
    }
    Ok(f)
}

#[derive(Debug)]
struct Token<'a> {
    text: &'a str,
    offset: usize,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        if ch == '(' || ch == ')' || ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &text[s..i],
                    offset: s,
                });
            }
            if !ch.is_whitespace() {
                tokens.push(Token {
                    text: &text[i..i + 1],
                    offset: i,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &text[s..],
            offset: s,
        });
    }
    tokens
}

struct Parser<'t, 'a> {
    tokens: &'t [Token<'a>],
    pos: usize,
    end: usize,
}

impl<'t, 'a> Parser<'t, 'a> {
    fn peek(&self) -> Option<&'t Token<'a>> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<&'t Token<'a>, ParseError> {
        let tok = self.tokens.get(self.pos).ok_or(ParseError {
            position: self.end,
            kind: ParseErrorKind::UnexpectedEnd,
        })?;
        self.pos += 1;
        Ok(tok)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let tok = self.next()?;
        match tok.text {
            "true" => Ok(Formula::True),
            "false" => Ok(Formula::False),
            "(" => self.compound(tok.offset),
            other => Err(ParseError {
                position: tok.offset,
                kind: ParseErrorKind::UnexpectedToken(other.to_string()),
            }),
        }
    }

    /// Parses the body of a parenthesized form; the `(` is already consumed.
    fn compound(&mut self, open: usize) -> Result<Formula, ParseError> {
        let head = self.next()?;
        if let Some(cmp) = Comparison::from_keyword(head.text) {
            let mut indices = Vec::new();
            while let Some(tok) = self.peek() {
                if tok.text == ")" {
                    break;
                }
                self.pos += 1;
                let idx = tok
                    .text
                    .parse::<usize>()
                    .ok()
                    .filter(|_| tok.text.bytes().all(|b| b.is_ascii_digit()));
                match idx {
                    Some(i) => indices.push(i),
                    None => {
                        return Err(ParseError {
                            position: tok.offset,
                            kind: ParseErrorKind::BadIndex(tok.text.to_string()),
                        })
                    }
                }
            }
            self.close()?;
            return match indices[..] {
                [i, j] => Ok(Formula::Atom(cmp, i, j)),
                _ => Err(ParseError {
                    position: open,
                    kind: ParseErrorKind::Arity {
                        op: head.text.to_string(),
                        expected: "exactly 2 indices",
                        found: indices.len(),
                    },
                }),
            };
        }
        let (min, max, expected) = match head.text {
            "not" => (1, Some(1), "exactly 1 formula"),
            "and" | "or" => (1, None, "at least 1 formula"),
            ")" | "(" => {
                return Err(ParseError {
                    position: head.offset,
                    kind: ParseErrorKind::UnexpectedToken(head.text.to_string()),
                })
            }
            other => {
                return Err(ParseError {
                    position: head.offset,
                    kind: ParseErrorKind::UnknownOperator(other.to_string()),
                })
            }
        };
        let mut children = Vec::new();
        while self.peek().is_some_and(|t| t.text != ")") {
            children.push(self.formula()?);
        }
        self.close()?;
        if children.len() < min || max.is_some_and(|m| children.len() > m) {
            return Err(ParseError {
                position: open,
                kind: ParseErrorKind::Arity {
                    op: head.text.to_string(),
                    expected,
                    found: children.len(),
                },
            });
        }
        Ok(match head.text {
            "not" => Formula::Not(Box::new(children.pop().expect("one child"))),
            "and" => Formula::And(children),
            _ => Formula::Or(children),
        })
    }

    fn close(&mut self) -> Result<(), ParseError> {
        let tok = self.next()?;
        if tok.text == ")" {
            Ok(())
        } else {
            Err(ParseError {
                position: tok.offset,
                kind: ParseErrorKind::UnexpectedToken(tok.text.to_string()),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;

    #[test]
    fn parses_examples() {
        assert_eq!(
            parse_formula("(or (gt 0 1) (gt 0 2))").unwrap(),
            Formula::or([Formula::gt(0, 1), Formula::gt(0, 2)])
        );
        assert_eq!(
            parse_formula("(and (eq 0 2) (lt 1 3))").unwrap(),
            Formula::and([Formula::eq(0, 2), Formula::lt(1, 3)])
        );
        assert_eq!(parse_formula("  true ").unwrap(), Formula::True);
        assert_eq!(
            parse_formula("(not(le 3 0))").unwrap(),
            Formula::not(Formula::le(3, 0))
        );
    }

    #[test]
    fn rejects_malformed_input() {
        let kind = |s: &str| parse_formula(s).unwrap_err().kind;
        assert!(matches!(
            kind("(lt 0)"),
            ParseErrorKind::Arity { found: 1, .. }
        ));
        assert!(matches!(
            kind("(lt 0 1 2)"),
            ParseErrorKind::Arity { found: 3, .. }
        ));
        assert!(matches!(
            kind("(xor true)"),
            ParseErrorKind::UnknownOperator(_)
        ));
        assert!(matches!(kind("(lt 0 -1)"), ParseErrorKind::BadIndex(_)));
        assert!(matches!(kind("(lt 0 +1)"), ParseErrorKind::BadIndex(_)));
        assert!(matches!(kind("(lt 0 x)"), ParseErrorKind::BadIndex(_)));
        assert!(matches!(
            kind("(and)"),
            ParseErrorKind::Arity { found: 0, .. }
        ));
        assert!(matches!(
            kind("(not true false)"),
            ParseErrorKind::Arity { found: 2, .. }
        ));
        assert!(matches!(kind("(and true"), ParseErrorKind::UnexpectedEnd));
        assert!(matches!(kind(""), ParseErrorKind::UnexpectedEnd));
        assert!(matches!(kind("true false"), ParseErrorKind::TrailingInput));
        assert!(matches!(kind("maybe"), ParseErrorKind::UnexpectedToken(_)));
        assert!(matches!(kind("()"), ParseErrorKind::UnexpectedToken(_)));
    }

    #[test]
    fn error_positions_point_at_the_offending_token() {
        let err = parse_formula("(and (lt 0 1) (foo 1 2))").unwrap_err();
        assert_eq!(err.position, 15);
        assert_eq!(parse_formula("(lt 0)").unwrap_err().position, 0);
    }

    #[test]
    fn evaluates_examples() {
        let f = parse_formula("(or (gt 0 1) (gt 0 2))").unwrap();
        assert!(f.eval(&[3i64, 1, 5]).unwrap());
        assert!(!f.eval(&[1i64, 2, 3]).unwrap());
        assert!(Formula::eq(0, 1).eval(&[4i64, 4]).unwrap());
    }

    #[test]
    fn short_point_is_an_error() {
        let f = Formula::lt(0, 3);
        assert!(matches!(
            f.eval(&[0i64, 1]),
            Err(Error::PointTooShort { needed: 4, got: 2 })
        ));
        assert_eq!(Formula::True.variable_count(), 0);
    }

    #[test]
    fn rational_points_evaluate_like_integers() {
        let f = parse_formula("(and (lt 0 1) (ne 1 2))").unwrap();
        let q = [Ratio::new(1i64, 3), Ratio::new(1, 2), Ratio::new(2, 4)];
        assert!(!f.eval(&q).unwrap());
        assert!(f.eval(&[0i64, 2, 1]).unwrap());
        assert!(f.eval(&[0.25f64, 0.5, 0.75]).unwrap());
    }

    pub(crate) fn arb_formula(vars: usize) -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            1 => Just(Formula::True),
            1 => Just(Formula::False),
            8 => (0..6usize, 0..vars, 0..vars)
                .prop_map(|(c, i, j)| Formula::Atom(Comparison::ALL[c], i, j)),
        ];
        leaf.prop_recursive(4, 32, 4, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                prop::collection::vec(inner.clone(), 1..4).prop_map(Formula::And),
                prop::collection::vec(inner, 1..4).prop_map(Formula::Or),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(f in arb_formula(6)) {
            prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        }

        #[test]
        fn invariant_under_order_isomorphism(
            f in arb_formula(5),
            point in prop::collection::vec(-20i64..20, 5),
            scale in 1i64..7,
            shift in -50i64..50,
            cube in any::<bool>(),
        ) {
            let image: Vec<i64> = point
                .iter()
                .map(|&x| if cube { x * x * x + shift } else { scale * x + shift })
                .collect();
            prop_assert_eq!(f.eval(&point).unwrap(), f.eval(&image).unwrap());
            let halves: Vec<Ratio<i64>> = point.iter().map(|&x| Ratio::new(x, 2)).collect();
            prop_assert_eq!(f.eval(&point).unwrap(), f.eval(&halves).unwrap());
        }

        #[test]
        fn double_negation(f in arb_formula(4), point in prop::collection::vec(0i64..5, 4)) {
            let g = Formula::not(Formula::not(f.clone()));
            prop_assert_eq!(g.eval(&point).unwrap(), f.eval(&point).unwrap());
        }

        #[test]
        fn de_morgan(
            f in arb_formula(4),
            g in arb_formula(4),
            point in prop::collection::vec(0i64..5, 4),
        ) {
            let lhs = Formula::not(Formula::and([f.clone(), g.clone()]));
            let rhs = Formula::or([Formula::not(f), Formula::not(g)]);
            prop_assert_eq!(lhs.eval(&point).unwrap(), rhs.eval(&point).unwrap());
        }
    }
}

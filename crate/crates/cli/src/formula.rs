//! Textual formula grammar.
//!
//! ```text
//! state   := and ( '|' and )*
//! and     := primary ( '&' primary )*
//! primary := 'true' | 'false' | '!' atom | atom | QUANT path | '(' state ')'
//! QUANT   := '<<1>>' | '<<2>>' | '<<1,2>>' | '<<0>>' | '<Almost>' | '<Positive>'
//! path    := '(' path ')' | 'X' state | 'G' state | state ('U' | 'W') state
//! ```
//!
//! `G f` is sugar for `f W false`. Atoms are identifiers; the keywords
//! `true false X U W G` are reserved.

use combsim::logic::{PathOp, PathQuantifier, StateFormula};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("unexpected character `{0}` at offset {1}")]
    Lex(char, usize),
    #[error("unexpected token `{0}`")]
    Unexpected(String),
    #[error("unexpected end of formula")]
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    True,
    False,
    Next,
    Until,
    WeakUntil,
    Always,
    Not,
    And,
    Or,
    LParen,
    RParen,
    Quant(PathQuantifier),
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "{s}"),
            Token::True => write!(f, "true"),
            Token::False => write!(f, "false"),
            Token::Next => write!(f, "X"),
            Token::Until => write!(f, "U"),
            Token::WeakUntil => write!(f, "W"),
            Token::Always => write!(f, "G"),
            Token::Not => write!(f, "!"),
            Token::And => write!(f, "&"),
            Token::Or => write!(f, "|"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
            Token::Quant(q) => write!(f, "{q}"),
        }
    }
}

fn lex(input: &str) -> Result<Vec<Token>, FormulaError> {
    let mut out = Vec::new();
    let bytes: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '!' => {
                out.push(Token::Not);
                i += 1;
            }
            '&' => {
                out.push(Token::And);
                i += 1;
            }
            '|' => {
                out.push(Token::Or);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '<' => {
                let rest: String = bytes[i..].iter().collect();
                let quants = [
                    ("<<1,2>>", PathQuantifier::Both),
                    ("<<1>>", PathQuantifier::Player1),
                    ("<<2>>", PathQuantifier::Player2),
                    ("<<0>>", PathQuantifier::NoPlayers),
                    ("<Almost>", PathQuantifier::Almost),
                    ("<Positive>", PathQuantifier::Positive),
                ];
                let Some((text, q)) = quants.iter().find(|(t, _)| rest.starts_with(t)) else {
                    return Err(FormulaError::Lex('<', i));
                };
                out.push(Token::Quant(*q));
                i += text.chars().count();
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == '_') {
                    j += 1;
                }
                let word: String = bytes[i..j].iter().collect();
                out.push(match word.as_str() {
                    "true" => Token::True,
                    "false" => Token::False,
                    "X" => Token::Next,
                    "U" => Token::Until,
                    "W" => Token::WeakUntil,
                    "G" => Token::Always,
                    _ => Token::Ident(word),
                });
                i = j;
            }
            other => return Err(FormulaError::Lex(other, i)),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token, FormulaError> {
        let t = self.tokens.get(self.pos).cloned().ok_or(FormulaError::Eof)?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, t: &Token) -> Result<(), FormulaError> {
        let got = self.next()?;
        if &got == t {
            Ok(())
        } else {
            Err(FormulaError::Unexpected(got.to_string()))
        }
    }

    fn state(&mut self) -> Result<StateFormula, FormulaError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            lhs = lhs.or(self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<StateFormula, FormulaError> {
        let mut lhs = self.primary()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            lhs = lhs.and(self.primary()?);
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<StateFormula, FormulaError> {
        match self.next()? {
            Token::True => Ok(StateFormula::True),
            Token::False => Ok(StateFormula::False),
            Token::Ident(q) => Ok(StateFormula::Atom(q)),
            Token::Not => match self.next()? {
                Token::Ident(q) => Ok(StateFormula::NegAtom(q)),
                other => Err(FormulaError::Unexpected(other.to_string())),
            },
            Token::LParen => {
                let f = self.state()?;
                self.expect(&Token::RParen)?;
                Ok(f)
            }
            Token::Quant(q) => {
                let op = if self.peek() == Some(&Token::LParen) {
                    self.pos += 1;
                    let op = self.path()?;
                    self.expect(&Token::RParen)?;
                    op
                } else {
                    self.path()?
                };
                Ok(StateFormula::Quant(q, op))
            }
            other => Err(FormulaError::Unexpected(other.to_string())),
        }
    }

    fn path(&mut self) -> Result<PathOp, FormulaError> {
        match self.peek() {
            Some(Token::Next) => {
                self.pos += 1;
                Ok(PathOp::Next(Box::new(self.state()?)))
            }
            Some(Token::Always) => {
                self.pos += 1;
                Ok(PathOp::WeakUntil(
                    Box::new(self.state()?),
                    Box::new(StateFormula::False),
                ))
            }
            _ => {
                let lhs = self.state()?;
                match self.next()? {
                    Token::Until => Ok(PathOp::Until(Box::new(lhs), Box::new(self.state()?))),
                    Token::WeakUntil => {
                        Ok(PathOp::WeakUntil(Box::new(lhs), Box::new(self.state()?)))
                    }
                    other => Err(FormulaError::Unexpected(other.to_string())),
                }
            }
        }
    }
}

pub fn parse_formula(input: &str) -> Result<StateFormula, FormulaError> {
    let mut p = Parser {
        tokens: lex(input)?,
        pos: 0,
    };
    let f = p.state()?;
    if p.pos != p.tokens.len() {
        return Err(FormulaError::Unexpected(p.tokens[p.pos].to_string()));
    }
    Ok(f)
}

/// Prints in the grammar's syntax; `parse_formula` inverts it.
pub fn print_formula(f: &StateFormula) -> String {
    match f {
        StateFormula::True => "true".into(),
        StateFormula::False => "false".into(),
        StateFormula::Atom(q) => q.clone(),
        StateFormula::NegAtom(q) => format!("!{q}"),
        StateFormula::And(a, b) => format!("({} & {})", print_formula(a), print_formula(b)),
        StateFormula::Or(a, b) => format!("({} | {})", print_formula(a), print_formula(b)),
        StateFormula::Quant(q, op) => {
            let body = match op {
                PathOp::Next(f) => format!("X {}", print_formula(f)),
                PathOp::Until(a, b) => format!("{} U {}", print_formula(a), print_formula(b)),
                PathOp::WeakUntil(a, b) => {
                    format!("{} W {}", print_formula(a), print_formula(b))
                }
            };
            format!("{q}({body})")
        }
    }
}

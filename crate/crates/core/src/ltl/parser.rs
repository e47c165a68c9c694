//! Recursive-descent parser for the ASCII LTL syntax.
//!
//! Precedence, loosest to tightest: `->` (right assoc), `||`, `&&`,
//! `U` (right assoc), then the unary operators `!`, `X`, `<>`, `[]`.
//! `true`, `X`, and `U` are reserved words and cannot be atom names.

use super::ast::LtlAst;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtlParseError {
    #[error("byte {pos}: unexpected character {found:?}")]
    UnexpectedChar { pos: usize, found: char },
    #[error("byte {pos}: expected {expected}, found {found}")]
    UnexpectedToken {
        pos: usize,
        expected: String,
        found: String,
    },
    #[error("byte {pos}: unexpected end of input, expected {expected}")]
    UnexpectedEof { pos: usize, expected: String },
    #[error("byte {pos}: atom {name:?} is not among the declared propositions")]
    UndeclaredAtom { pos: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    True,
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    Next,
    Until,
    Eventually,
    Always,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::True => "`true`".into(),
            Tok::Ident(name) => format!("atom {name:?}"),
            Tok::Not => "`!`".into(),
            Tok::And => "`&&`".into(),
            Tok::Or => "`||`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Next => "`X`".into(),
            Tok::Until => "`U`".into(),
            Tok::Eventually => "`<>`".into(),
            Tok::Always => "`[]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

fn tokenize(input: &str) -> Result<Vec<(usize, Tok)>, LtlParseError> {
    let bytes = input.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            '!' => {
                toks.push((i, Tok::Not));
                i += 1;
            }
            '&' => {
                if bytes.get(i + 1) == Some(&b'&') {
                    toks.push((i, Tok::And));
                    i += 2;
                } else {
                    return Err(LtlParseError::UnexpectedChar { pos: i, found: '&' });
                }
            }
            '|' => {
                if bytes.get(i + 1) == Some(&b'|') {
                    toks.push((i, Tok::Or));
                    i += 2;
                } else {
                    return Err(LtlParseError::UnexpectedChar { pos: i, found: '|' });
                }
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((i, Tok::Implies));
                    i += 2;
                } else {
                    return Err(LtlParseError::UnexpectedChar { pos: i, found: '-' });
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((i, Tok::Eventually));
                    i += 2;
                } else {
                    return Err(LtlParseError::UnexpectedChar { pos: i, found: '<' });
                }
            }
            '[' => {
                if bytes.get(i + 1) == Some(&b']') {
                    toks.push((i, Tok::Always));
                    i += 2;
                } else {
                    return Err(LtlParseError::UnexpectedChar { pos: i, found: '[' });
                }
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() {
                    let c = bytes[i] as char;
                    if c.is_ascii_alphanumeric() || c == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let word = &input[start..i];
                let tok = match word {
                    "true" => Tok::True,
                    "X" => Tok::Next,
                    "U" => Tok::Until,
                    _ => Tok::Ident(word.to_string()),
                };
                toks.push((start, tok));
            }
            _ => return Err(LtlParseError::UnexpectedChar { pos: i, found: c }),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    input_len: usize,
    atoms: Option<&'a [String]>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eof_err(&self, expected: &str) -> LtlParseError {
        LtlParseError::UnexpectedEof {
            pos: self.input_len,
            expected: expected.to_string(),
        }
    }

    // implies := or ('->' implies)?
    fn parse_implies(&mut self) -> Result<LtlAst, LtlParseError> {
        let lhs = self.parse_or()?;
        if let Some((_, Tok::Implies)) = self.peek() {
            self.bump();
            let rhs = self.parse_implies()?;
            return Ok(LtlAst::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> Result<LtlAst, LtlParseError> {
        let mut lhs = self.parse_and()?;
        while let Some((_, Tok::Or)) = self.peek() {
            self.bump();
            let rhs = self.parse_and()?;
            lhs = LtlAst::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<LtlAst, LtlParseError> {
        let mut lhs = self.parse_until()?;
        while let Some((_, Tok::And)) = self.peek() {
            self.bump();
            let rhs = self.parse_until()?;
            lhs = LtlAst::and(lhs, rhs);
        }
        Ok(lhs)
    }

    // until := unary ('U' until)?   right associative
    fn parse_until(&mut self) -> Result<LtlAst, LtlParseError> {
        let lhs = self.parse_unary()?;
        if let Some((_, Tok::Until)) = self.peek() {
            self.bump();
            let rhs = self.parse_until()?;
            return Ok(LtlAst::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<LtlAst, LtlParseError> {
        match self.peek() {
            Some((_, Tok::Not)) => {
                self.bump();
                Ok(LtlAst::not(self.parse_unary()?))
            }
            Some((_, Tok::Next)) => {
                self.bump();
                Ok(LtlAst::next(self.parse_unary()?))
            }
            Some((_, Tok::Eventually)) => {
                self.bump();
                Ok(LtlAst::eventually(self.parse_unary()?))
            }
            Some((_, Tok::Always)) => {
                self.bump();
                Ok(LtlAst::always(self.parse_unary()?))
            }
            _ => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> Result<LtlAst, LtlParseError> {
        match self.bump() {
            Some((_, Tok::True)) => Ok(LtlAst::True),
            Some((pos, Tok::Ident(name))) => {
                if let Some(atoms) = self.atoms {
                    if !atoms.iter().any(|a| *a == name) {
                        return Err(LtlParseError::UndeclaredAtom { pos, name });
                    }
                }
                Ok(LtlAst::Atom(name))
            }
            Some((_, Tok::LParen)) => {
                let inner = self.parse_implies()?;
                match self.bump() {
                    Some((_, Tok::RParen)) => Ok(inner),
                    Some((pos, tok)) => Err(LtlParseError::UnexpectedToken {
                        pos,
                        expected: "`)`".into(),
                        found: tok.describe(),
                    }),
                    None => Err(self.eof_err("`)`")),
                }
            }
            Some((pos, tok)) => Err(LtlParseError::UnexpectedToken {
                pos,
                expected: "a formula".into(),
                found: tok.describe(),
            }),
            None => Err(self.eof_err("a formula")),
        }
    }
}

/// Parse a formula, checking every atom against `atoms`.
pub fn parse_ltl(input: &str, atoms: &[String]) -> Result<LtlAst, LtlParseError> {
    parse_with(input, Some(atoms))
}

/// Parse a formula without an atom declaration; any identifier is accepted.
pub fn parse_ltl_free(input: &str) -> Result<LtlAst, LtlParseError> {
    parse_with(input, None)
}

fn parse_with(input: &str, atoms: Option<&[String]>) -> Result<LtlAst, LtlParseError> {
    let toks = tokenize(input)?;
    let mut p = Parser {
        toks,
        pos: 0,
        input_len: input.len(),
        atoms,
    };
    let ast = p.parse_implies()?;
    match p.peek() {
        None => Ok(ast),
        Some((pos, tok)) => Err(LtlParseError::UnexpectedToken {
            pos: *pos,
            expected: "end of input".into(),
            found: tok.describe(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aps(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_patrol_formula() {
        let ast = parse_ltl(
            "[]!O && <>(G1 && <>G2)",
            &aps(&["O", "G1", "G2"]),
        )
        .unwrap();
        let want = LtlAst::and(
            LtlAst::always(LtlAst::not(LtlAst::atom("O"))),
            LtlAst::eventually(LtlAst::and(
                LtlAst::atom("G1"),
                LtlAst::eventually(LtlAst::atom("G2")),
            )),
        );
        assert_eq!(ast, want);
    }

    #[test]
    fn until_is_right_associative() {
        let ast = parse_ltl("a U b U c", &aps(&["a", "b", "c"])).unwrap();
        let want = LtlAst::until(
            LtlAst::atom("a"),
            LtlAst::until(LtlAst::atom("b"), LtlAst::atom("c")),
        );
        assert_eq!(ast, want);
    }

    #[test]
    fn implies_is_right_associative_and_loosest() {
        let ast = parse_ltl("a -> b -> c", &aps(&["a", "b", "c"])).unwrap();
        let want = LtlAst::implies(
            LtlAst::atom("a"),
            LtlAst::implies(LtlAst::atom("b"), LtlAst::atom("c")),
        );
        assert_eq!(ast, want);

        let ast = parse_ltl("a && b -> c || d", &aps(&["a", "b", "c", "d"])).unwrap();
        let want = LtlAst::implies(
            LtlAst::and(LtlAst::atom("a"), LtlAst::atom("b")),
            LtlAst::or(LtlAst::atom("c"), LtlAst::atom("d")),
        );
        assert_eq!(ast, want);
    }

    #[test]
    fn and_binds_tighter_than_or() {
        let ast = parse_ltl("a || b && c", &aps(&["a", "b", "c"])).unwrap();
        let want = LtlAst::or(
            LtlAst::atom("a"),
            LtlAst::and(LtlAst::atom("b"), LtlAst::atom("c")),
        );
        assert_eq!(ast, want);
    }

    #[test]
    fn until_binds_tighter_than_and() {
        let ast = parse_ltl("a U b && c U d", &aps(&["a", "b", "c", "d"])).unwrap();
        let want = LtlAst::and(
            LtlAst::until(LtlAst::atom("a"), LtlAst::atom("b")),
            LtlAst::until(LtlAst::atom("c"), LtlAst::atom("d")),
        );
        assert_eq!(ast, want);
    }

    #[test]
    fn unary_operators_stack() {
        let ast = parse_ltl("[]<>!X a", &aps(&["a"])).unwrap();
        let want = LtlAst::always(LtlAst::eventually(LtlAst::not(LtlAst::next(
            LtlAst::atom("a"),
        ))));
        assert_eq!(ast, want);
    }

    #[test]
    fn undeclared_atom_is_reported_with_name_and_position() {
        let err = parse_ltl("<>(G1 && G7)", &aps(&["G1", "G2"])).unwrap_err();
        match err {
            LtlParseError::UndeclaredAtom { pos, name } => {
                assert_eq!(name, "G7");
                assert_eq!(pos, 9);
            }
            other => panic!("wrong error: {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_ltl("a &", &aps(&["a"])).unwrap_err();
        assert_eq!(err, LtlParseError::UnexpectedChar { pos: 2, found: '&' });

        let err = parse_ltl("(a", &aps(&["a"])).unwrap_err();
        assert!(matches!(err, LtlParseError::UnexpectedEof { .. }));

        let err = parse_ltl("a b", &aps(&["a", "b"])).unwrap_err();
        assert!(matches!(
            err,
            LtlParseError::UnexpectedToken { pos: 2, .. }
        ));
    }

    #[test]
    fn display_round_trips() {
        let srcs = [
            "[]!O && <>(G1 && <>G2)",
            "a U b U c",
            "a -> b -> c",
            "X (a || true)",
            "[]<>(a && !b)",
        ];
        for src in srcs {
            let ast = parse_ltl_free(src).unwrap();
            let printed = ast.to_string();
            let reparsed = parse_ltl_free(&printed).unwrap();
            assert_eq!(ast, reparsed, "round trip failed for {src}");
        }
    }
}

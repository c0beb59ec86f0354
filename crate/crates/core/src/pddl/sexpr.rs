//! S-expression reader with source positions.

use super::PddlError;
use std::fmt;

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

#[derive(Debug, Clone)]
pub enum SExpr {
    Sym(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Sym(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            SExpr::Sym(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Sym(..) => None,
        }
    }

    /// Head symbol of a list, if any.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|l| l.first()).and_then(|h| h.as_sym())
    }

    pub fn token(&self) -> String {
        match self {
            SExpr::Sym(s, _) => s.clone(),
            SExpr::List(..) => "(".to_string(),
        }
    }
}

/// Reads exactly one top-level s-expression; trailing non-comment text is an error.
/// Symbols are lower-cased since PDDL is case-insensitive.
pub fn read(text: &str) -> Result<SExpr, PddlError> {
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    let mut result: Option<SExpr> = None;
    let mut line = 1;
    let mut col = 0;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        col += 1;
        let pos = Pos { line, col };
        match c {
            '\n' => {
                line += 1;
                col = 0;
            }
            ';' => {
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            c if c.is_whitespace() => {}
            '(' => {
                if result.is_some() {
                    return Err(PddlError::syntax(pos, "(", "unexpected text after the top-level expression"));
                }
                stack.push((Vec::new(), pos));
            }
            ')' => {
                let Some((items, start)) = stack.pop() else {
                    return Err(PddlError::syntax(pos, ")", "unbalanced closing parenthesis"));
                };
                let list = SExpr::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => result = Some(list),
                }
            }
            _ => {
                let mut sym = String::new();
                sym.extend(c.to_lowercase());
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == ';' {
                        break;
                    }
                    sym.extend(n.to_lowercase());
                    chars.next();
                    col += 1;
                }
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(SExpr::Sym(sym, pos)),
                    None => return Err(PddlError::syntax(pos, &sym, "expected '('")),
                }
            }
        }
    }
    if let Some((_, start)) = stack.last() {
        return Err(PddlError::syntax(*start, "(", "unbalanced opening parenthesis"));
    }
    result.ok_or_else(|| PddlError::syntax(Pos { line, col }, "<eof>", "empty input"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_and_skips_comments() {
        let e = read("; header\n(define (Domain X) ; trailing\n  (:types a))").unwrap();
        let items = e.as_list().unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(items[1].head(), Some("domain"));
        assert_eq!(items[1].as_list().unwrap()[1].as_sym(), Some("x"));
    }

    #[test]
    fn reports_position_of_unbalanced_paren() {
        let err = read("(a (b c)").unwrap_err();
        match err {
            PddlError::Syntax { line, col, .. } => assert_eq!((line, col), (1, 1)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(read("(a))"), Err(PddlError::Syntax { .. })));
    }
}

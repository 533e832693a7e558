//! S-expression reader for PDDL sources.
//!
//! Symbols are lower-cased on read; PDDL identifiers are case-insensitive.

use std::fmt;

use super::error::PddlError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SExpr {
    Symbol { text: String, pos: Pos },
    List { items: Vec<SExpr>, pos: Pos },
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Symbol { pos, .. } | SExpr::List { pos, .. } => *pos,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List { items, .. } => Some(items),
            SExpr::Symbol { .. } => None,
        }
    }

    /// Head symbol of a list, if the list is non-empty and starts with a symbol.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|items| items.first()).and_then(SExpr::as_symbol)
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader { chars: src.char_indices().peekable(), line: 1, col: 1 }
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == ';' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<SExpr>, PddlError> {
        self.skip_trivia();
        let pos = self.pos();
        match self.peek() {
            None => Ok(None),
            Some(')') => Err(PddlError::syntax(pos, "unexpected `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.peek() {
                        None => return Err(PddlError::syntax(pos, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(SExpr::List { items, pos }));
                        }
                        Some(_) => {
                            if let Some(item) = self.read()? {
                                items.push(item);
                            }
                        }
                    }
                }
            }
            Some(_) => {
                let mut text = String::new();
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.extend(c.to_lowercase());
                    self.bump();
                }
                Ok(Some(SExpr::Symbol { text, pos }))
            }
        }
    }
}

/// Reads every top-level expression of `src`.
pub fn read_all(src: &str) -> Result<Vec<SExpr>, PddlError> {
    let mut reader = Reader::new(src);
    let mut out = Vec::new();
    while let Some(expr) = reader.read()? {
        out.push(expr);
    }
    Ok(out)
}

/// Reads exactly one top-level expression.
pub fn read_one(src: &str) -> Result<SExpr, PddlError> {
    let mut all = read_all(src)?;
    match all.len() {
        0 => Err(PddlError::syntax(Pos { line: 1, col: 1 }, "empty input")),
        1 => Ok(all.remove(0)),
        _ => Err(PddlError::syntax(all[1].pos(), "trailing content after top-level expression")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_and_lowercases() {
        let e = read_one("(Define (DOMAIN Foo) ; comment\n (:Types a))").unwrap();
        assert_eq!(e.head(), Some("define"));
        let items = e.as_list().unwrap();
        assert_eq!(items[1].as_list().unwrap()[1].as_symbol(), Some("foo"));
        assert_eq!(items[2].pos(), Pos { line: 2, col: 2 });
    }

    #[test]
    fn reports_unclosed_paren_position() {
        let err = read_one("\n  (define (domain x)").unwrap_err();
        match err {
            PddlError::Syntax { line, col, .. } => assert_eq!((line, col), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_stray_close() {
        assert!(matches!(read_all("a )"), Err(PddlError::Syntax { line: 1, col: 3, .. })));
    }
}

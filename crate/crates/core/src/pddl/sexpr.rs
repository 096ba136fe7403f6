//! S-expression reader shared by the domain, problem and JSON-free parsers.

use std::fmt;

use super::error::{ParseError, ParseErrorKind};

/// Source position. `line` and `column` are 1-based, `offset` is a 0-based
/// byte offset into the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

impl Pos {
    pub fn start() -> Self {
        Pos {
            line: 1,
            column: 1,
            offset: 0,
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    /// A symbol, lower-cased. `raw` keeps the original spelling.
    Symbol {
        text: String,
        raw: String,
        pos: Pos,
    },
    List {
        items: Vec<SExpr>,
        pos: Pos,
    },
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

    /// Head symbol of a list, if any.
    pub fn head(&self) -> Option<&str> {
        self.as_list()
            .and_then(|items| items.first())
            .and_then(SExpr::as_symbol)
    }

    pub fn raw(&self) -> String {
        match self {
            SExpr::Symbol { raw, .. } => raw.clone(),
            SExpr::List { items, .. } => {
                let inner: Vec<String> = items.iter().map(SExpr::raw).collect();
                format!("({})", inner.join(" "))
            }
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    column: usize,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader {
            chars: src.char_indices().peekable(),
            src,
            line: 1,
            column: 1,
        }
    }

    fn pos(&mut self) -> Pos {
        let offset = self.chars.peek().map(|(i, _)| *i).unwrap_or(self.src.len());
        Pos {
            line: self.line,
            column: self.column,
            offset,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&(_, c)) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(&(_, c)) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<SExpr, ParseError> {
        self.skip_trivia();
        let pos = self.pos();
        match self.chars.peek().map(|&(_, c)| c) {
            None => Err(ParseError::new(
                pos,
                ParseErrorKind::Syntax("unexpected end of input".into()),
            )),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek().map(|&(_, c)| c) {
                        None => {
                            return Err(ParseError::new(
                                pos,
                                ParseErrorKind::Syntax("unclosed parenthesis".into()),
                            ))
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(SExpr::List { items, pos });
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(')') => Err(ParseError::new(
                pos,
                ParseErrorKind::Syntax("unexpected `)`".into()),
            )),
            Some(_) => {
                let mut raw = String::new();
                while let Some(&(_, c)) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    raw.push(c);
                    self.bump();
                }
                Ok(SExpr::Symbol {
                    text: raw.to_lowercase(),
                    raw,
                    pos,
                })
            }
        }
    }
}

/// Reads exactly one s-expression; anything but trivia after it is an error.
pub fn read_one(src: &str) -> Result<SExpr, ParseError> {
    let mut reader = Reader::new(src);
    let expr = reader.read()?;
    reader.skip_trivia();
    if reader.chars.peek().is_some() {
        let pos = reader.pos();
        return Err(ParseError::new(
            pos,
            ParseErrorKind::Syntax("trailing input after top-level form".into()),
        ));
    }
    Ok(expr)
}

/// Reads every top-level s-expression in `src`.
pub fn read_all(src: &str) -> Result<Vec<SExpr>, ParseError> {
    let mut reader = Reader::new(src);
    let mut out = Vec::new();
    loop {
        reader.skip_trivia();
        if reader.chars.peek().is_none() {
            return Ok(out);
        }
        out.push(reader.read()?);
    }
}

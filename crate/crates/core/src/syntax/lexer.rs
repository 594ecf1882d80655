//! Tokenizer for the definition language.

use std::fmt;

use super::SyntaxError;

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// Identifier: type names, attribute names, template names.
    Sym(String),
    /// Quoted symbol atom `'sg`.
    QuotedSym(String),
    Str(String),
    Number(i64),
    /// `#name`
    Coref(String),
    /// `@name` (template call)
    TemplateRef(String),
    /// `%name.` directive line.
    Directive(String),
    And,
    Or,
    Not,
    Xor,
    LBracket,
    RBracket,
    LAngle,
    RAngle,
    LParen,
    RParen,
    Comma,
    Dot,
    Define,
    Equals,
    PartitionOp,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Sym(s) => write!(f, "symbol `{s}`"),
            TokenKind::QuotedSym(s) => write!(f, "atom `'{s}`"),
            TokenKind::Str(s) => write!(f, "string {s:?}"),
            TokenKind::Number(n) => write!(f, "number `{n}`"),
            TokenKind::Coref(s) => write!(f, "`#{s}`"),
            TokenKind::TemplateRef(s) => write!(f, "`@{s}`"),
            TokenKind::Directive(s) => write!(f, "`%{s}.`"),
            TokenKind::And => f.write_str("`&`"),
            TokenKind::Or => f.write_str("`|`"),
            TokenKind::Not => f.write_str("`~`"),
            TokenKind::Xor => f.write_str("`(+)`"),
            TokenKind::LBracket => f.write_str("`[`"),
            TokenKind::RBracket => f.write_str("`]`"),
            TokenKind::LAngle => f.write_str("`<`"),
            TokenKind::RAngle => f.write_str("`>`"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
            TokenKind::Comma => f.write_str("`,`"),
            TokenKind::Dot => f.write_str("`.`"),
            TokenKind::Define => f.write_str("`:=`"),
            TokenKind::Equals => f.write_str("`=`"),
            TokenKind::PartitionOp => f.write_str("`:<`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '*' | '$' | '!' | '?' | '-' | '+' | '/')
}

pub(crate) fn is_ident_char(c: char) -> bool {
    is_ident_start(c) || c == '\''
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
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

    fn offset(&mut self) -> usize {
        self.chars.peek().map(|&(i, _)| i).unwrap_or(self.src.len())
    }

    fn take_ident(&mut self) -> String {
        let start = self.offset();
        while self.peek().is_some_and(is_ident_char) {
            self.bump();
        }
        let end = self.offset();
        self.src[start..end].to_string()
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn err(&self, pos: Pos, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::Lex { pos, msg: msg.into() }
    }

    fn next_token(&mut self) -> Result<Option<Token>, SyntaxError> {
        loop {
            match self.peek() {
                None => return Ok(None),
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some(';') => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                Some(_) => break,
            }
        }
        let pos = self.pos();
        let c = self.peek().unwrap();
        let kind = match c {
            '&' => {
                self.bump();
                TokenKind::And
            }
            '|' => {
                self.bump();
                TokenKind::Or
            }
            '~' => {
                self.bump();
                TokenKind::Not
            }
            '[' => {
                self.bump();
                TokenKind::LBracket
            }
            ']' => {
                self.bump();
                TokenKind::RBracket
            }
            '<' => {
                self.bump();
                TokenKind::LAngle
            }
            '>' => {
                self.bump();
                TokenKind::RAngle
            }
            ',' => {
                self.bump();
                TokenKind::Comma
            }
            '.' => {
                self.bump();
                TokenKind::Dot
            }
            '=' => {
                self.bump();
                TokenKind::Equals
            }
            ')' => {
                self.bump();
                TokenKind::RParen
            }
            '(' => {
                let mut look = self.chars.clone();
                look.next();
                let a = look.next().map(|(_, c)| c);
                let b = look.next().map(|(_, c)| c);
                if a == Some('+') && b == Some(')') {
                    self.bump();
                    self.bump();
                    self.bump();
                    TokenKind::Xor
                } else {
                    self.bump();
                    TokenKind::LParen
                }
            }
            ':' => {
                self.bump();
                match self.bump() {
                    Some('=') => TokenKind::Define,
                    Some('<') => TokenKind::PartitionOp,
                    _ => return Err(self.err(pos, "expected `:=` or `:<` after `:`")),
                }
            }
            '#' => {
                self.bump();
                let name = self.take_ident();
                if name.is_empty() {
                    return Err(self.err(pos, "empty coreference tag"));
                }
                TokenKind::Coref(name)
            }
            '@' => {
                self.bump();
                let name = self.take_ident();
                if name.is_empty() {
                    return Err(self.err(pos, "empty template name"));
                }
                TokenKind::TemplateRef(name)
            }
            '%' => {
                self.bump();
                let name = self.take_ident();
                if name.is_empty() || self.peek() != Some('.') {
                    return Err(self.err(pos, "malformed directive, expected `%name.`"));
                }
                self.bump();
                TokenKind::Directive(name)
            }
            '\'' => {
                self.bump();
                let name = self.take_ident();
                if name.is_empty() {
                    return Err(self.err(pos, "empty quoted atom"));
                }
                TokenKind::QuotedSym(name)
            }
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err(pos, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(c) => s.push(c),
                            None => return Err(self.err(pos, "unterminated string")),
                        },
                        Some(c) => s.push(c),
                    }
                }
                TokenKind::Str(s)
            }
            c if c.is_ascii_digit()
                || (c == '-' && self.peek2().is_some_and(|d| d.is_ascii_digit())) =>
            {
                let text = self.take_ident();
                match text.parse::<i64>() {
                    Ok(n) => TokenKind::Number(n),
                    // `3rd` and friends are identifiers
                    Err(_) => TokenKind::Sym(text),
                }
            }
            c if is_ident_start(c) => TokenKind::Sym(self.take_ident()),
            other => return Err(self.err(pos, format!("illegal character {other:?}"))),
        };
        Ok(Some(Token { kind, pos }))
    }
}

/// Splits source text into tokens. Comments (`;` to end of line) and
/// whitespace are dropped.
pub fn tokenize(source: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lexer = Lexer { chars: source.char_indices().peekable(), src: source, line: 1, col: 1 };
    let mut out = Vec::new();
    while let Some(tok) = lexer.next_token()? {
        out.push(tok);
    }
    Ok(out)
}

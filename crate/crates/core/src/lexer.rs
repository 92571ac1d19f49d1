use std::fmt;

use crate::parser::{ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    // keywords
    Signal,
    Rule,
    Real,
    Bool,
    Enum,
    Globally,
    Eventually,
    Until,
    Inf,
    True,
    False,

    Ident(String),
    Number(f64),

    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    NotEq,
    Arrow,
    AndAnd,
    OrOr,
    Bang,
    Plus,
    Minus,
    Star,
    Slash,

    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,

    Eof,
}

impl TokenKind {
    fn keyword(word: &str) -> Option<TokenKind> {
        Some(match word {
            "signal" => TokenKind::Signal,
            "rule" => TokenKind::Rule,
            "real" => TokenKind::Real,
            "bool" => TokenKind::Bool,
            "enum" => TokenKind::Enum,
            "G" => TokenKind::Globally,
            "F" => TokenKind::Eventually,
            "U" => TokenKind::Until,
            "inf" => TokenKind::Inf,
            "true" => TokenKind::True,
            "false" => TokenKind::False,
            _ => return None,
        })
    }

    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Number(n) => format!("number `{n}`"),
            TokenKind::Eof => "end of input".to_string(),
            other => format!("`{other}`"),
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Signal => "signal",
            TokenKind::Rule => "rule",
            TokenKind::Real => "real",
            TokenKind::Bool => "bool",
            TokenKind::Enum => "enum",
            TokenKind::Globally => "G",
            TokenKind::Eventually => "F",
            TokenKind::Until => "U",
            TokenKind::Inf => "inf",
            TokenKind::True => "true",
            TokenKind::False => "false",
            TokenKind::Ident(name) => return f.write_str(name),
            TokenKind::Number(n) => return write!(f, "{n}"),
            TokenKind::Lt => "<",
            TokenKind::Le => "<=",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            TokenKind::EqEq => "==",
            TokenKind::NotEq => "!=",
            TokenKind::Arrow => "->",
            TokenKind::AndAnd => "&&",
            TokenKind::OrOr => "||",
            TokenKind::Bang => "!",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::Comma => ",",
            TokenKind::Colon => ":",
            TokenKind::Eof => "<eof>",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat(&mut self, expected: char) -> bool {
        if self.peek() == Some(expected) {
            self.bump();
            true
        } else {
            false
        }
    }
}

/// Splits source text into tokens. The returned list always ends with
/// [`TokenKind::Eof`].
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { chars: source.chars().peekable(), line: 1, column: 1 };
    let mut tokens = Vec::new();

    loop {
        while cur.peek().is_some_and(char::is_whitespace) {
            cur.bump();
        }
        let (line, column) = (cur.line, cur.column);
        let Some(c) = cur.bump() else {
            tokens.push(Token { kind: TokenKind::Eof, span: SourceSpan { line, column, length: 1 } });
            return Ok(tokens);
        };
        let span = |length: usize| SourceSpan { line, column, length: length.max(1) };

        let kind = match c {
            '#' => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::from(c);
                while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                    word.push(c);
                    cur.bump();
                }
                TokenKind::keyword(&word).unwrap_or(TokenKind::Ident(word))
            }
            c if c.is_ascii_digit() => {
                let mut text = String::from(c);
                while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                    text.push(d);
                    cur.bump();
                }
                if cur.eat('.') {
                    text.push('.');
                    let before = text.len();
                    while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                        text.push(d);
                        cur.bump();
                    }
                    if text.len() == before {
                        return Err(ParseError::new(
                            span(text.len()),
                            "expected digit after decimal point",
                            vec!["digit".into()],
                        ));
                    }
                }
                // Digit strings always parse; very long ones saturate to inf,
                // which validation rejects.
                let value: f64 = text.parse().unwrap_or(f64::INFINITY);
                tokens.push(Token { kind: TokenKind::Number(value), span: span(text.chars().count()) });
                continue;
            }
            '<' if cur.eat('=') => TokenKind::Le,
            '<' => TokenKind::Lt,
            '>' if cur.eat('=') => TokenKind::Ge,
            '>' => TokenKind::Gt,
            '=' if cur.eat('=') => TokenKind::EqEq,
            '!' if cur.eat('=') => TokenKind::NotEq,
            '!' => TokenKind::Bang,
            '-' if cur.eat('>') => TokenKind::Arrow,
            '-' => TokenKind::Minus,
            '&' if cur.eat('&') => TokenKind::AndAnd,
            '|' if cur.eat('|') => TokenKind::OrOr,
            '+' => TokenKind::Plus,
            '*' => TokenKind::Star,
            '/' => TokenKind::Slash,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            '[' => TokenKind::LBracket,
            ']' => TokenKind::RBracket,
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            ',' => TokenKind::Comma,
            ':' => TokenKind::Colon,
            other => {
                return Err(ParseError::new(
                    span(1),
                    format!("unrecognized character `{}`", other.escape_debug()),
                    vec![],
                ));
            }
        };
        let length = kind.to_string().chars().count();
        tokens.push(Token { kind, span: span(length) });
    }
}

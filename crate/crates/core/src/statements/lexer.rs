//! Tokenizer shared by the extraction-record and plan-reply grammars.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Token {
    Ident(String),
    Str(String),
    Number(f64),
    Eq,
    Comma,
    LBracket,
    RBracket,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(name) => write!(f, "`{name}`"),
            Token::Str(s) => write!(f, "string {s:?}"),
            Token::Number(v) => write!(f, "number {v}"),
            Token::Eq => f.write_str("`=`"),
            Token::Comma => f.write_str("`,`"),
            Token::LBracket => f.write_str("`[`"),
            Token::RBracket => f.write_str("`]`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Position {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Spanned {
    pub token: Token,
    pub at: Position,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LexError {
    pub at: Position,
    pub message: String,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, LexError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut at = Position { line: 1, column: 1 };
    let advance = |c: char, at: &mut Position| {
        if c == '\n' {
            at.line += 1;
            at.column = 1;
        } else {
            at.column += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        let start = at;
        let simple = match c {
            '=' => Some(Token::Eq),
            ',' => Some(Token::Comma),
            '[' => Some(Token::LBracket),
            ']' => Some(Token::RBracket),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(token) = simple {
            chars.next();
            advance(c, &mut at);
            out.push(Spanned { token, at: start });
        } else if c.is_whitespace() {
            chars.next();
            advance(c, &mut at);
        } else if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                advance(c, &mut at);
            }
        } else if c == '"' {
            chars.next();
            advance(c, &mut at);
            let mut value = String::new();
            loop {
                let Some(c) = chars.next() else {
                    return Err(LexError {
                        at: start,
                        message: "unterminated string".into(),
                    });
                };
                advance(c, &mut at);
                match c {
                    '"' => break,
                    '\n' => {
                        return Err(LexError {
                            at: start,
                            message: "unterminated string".into(),
                        })
                    }
                    '\\' => {
                        let escaped = chars.next();
                        if let Some(e) = escaped {
                            advance(e, &mut at);
                        }
                        match escaped {
                            Some('"') => value.push('"'),
                            Some('\\') => value.push('\\'),
                            other => {
                                return Err(LexError {
                                    at,
                                    message: format!("unsupported escape {other:?}"),
                                })
                            }
                        }
                    }
                    c => value.push(c),
                }
            }
            out.push(Spanned {
                token: Token::Str(value),
                at: start,
            });
        } else if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' {
            let mut literal = String::new();
            while let Some(&c) = chars.peek() {
                let exponent_sign = (c == '-' || c == '+') && literal.ends_with(['e', 'E']);
                if c.is_ascii_digit()
                    || c == '.'
                    || c == 'e'
                    || c == 'E'
                    || c == '_'
                    || exponent_sign
                    || (literal.is_empty() && (c == '-' || c == '+'))
                {
                    literal.push(c);
                    chars.next();
                    advance(c, &mut at);
                } else {
                    break;
                }
            }
            let cleaned = literal.replace('_', "");
            let value = cleaned
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && cleaned.chars().any(|c| c.is_ascii_digit()))
                .ok_or_else(|| LexError {
                    at: start,
                    message: format!("invalid number {literal:?}"),
                })?;
            out.push(Spanned {
                token: Token::Number(value),
                at: start,
            });
        } else if c.is_alphabetic() || c == '_' {
            let mut name = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_alphanumeric() || c == '_' {
                    name.push(c);
                    chars.next();
                    advance(c, &mut at);
                } else {
                    break;
                }
            }
            out.push(Spanned {
                token: Token::Ident(name),
                at: start,
            });
        } else {
            return Err(LexError {
                at: start,
                message: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

/// Cursor over a token stream with positioned errors.
pub(crate) struct Parser {
    tokens: Vec<Spanned>,
    next: usize,
    end: Position,
}

impl Parser {
    pub fn new(tokens: Vec<Spanned>, text: &str) -> Self {
        let line = text.lines().count().max(1);
        let column = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
        Self {
            tokens,
            next: 0,
            end: Position { line, column },
        }
    }

    pub fn position(&self) -> Position {
        self.tokens.get(self.next).map_or(self.end, |t| t.at)
    }

    pub fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.next).map(|t| &t.token)
    }

    pub fn at_end(&self) -> bool {
        self.next >= self.tokens.len()
    }

    pub fn error(&self, message: impl Into<String>) -> LexError {
        LexError {
            at: self.position(),
            message: message.into(),
        }
    }

    fn bump(&mut self) -> Option<Token> {
        let token = self.tokens.get(self.next).map(|t| t.token.clone());
        self.next += 1;
        token
    }

    pub fn expect(&mut self, wanted: Token) -> Result<(), LexError> {
        match self.peek() {
            Some(t) if *t == wanted => {
                self.next += 1;
                Ok(())
            }
            Some(t) => Err(self.error(format!("expected {wanted}, found {t}"))),
            None => Err(self.error(format!("expected {wanted}, found end of input"))),
        }
    }

    /// Consumes `token` if it is next.
    pub fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.next += 1;
            true
        } else {
            false
        }
    }

    pub fn assignment(&mut self, name: &str) -> Result<(), LexError> {
        match self.peek() {
            Some(Token::Ident(found)) if found == name => {
                self.next += 1;
                self.expect(Token::Eq)
            }
            Some(t) => Err(self.error(format!("expected `{name} =`, found {t}"))),
            None => Err(self.error(format!("expected `{name} =`, found end of input"))),
        }
    }

    pub fn string(&mut self) -> Result<String, LexError> {
        let at = self.position();
        match self.bump() {
            Some(Token::Str(s)) => Ok(s),
            other => Err(LexError {
                at,
                message: format!("expected a quoted name, found {}", describe(other)),
            }),
        }
    }

    pub fn number(&mut self) -> Result<f64, LexError> {
        let at = self.position();
        match self.bump() {
            Some(Token::Number(v)) => Ok(v),
            other => Err(LexError {
                at,
                message: format!("expected a number, found {}", describe(other)),
            }),
        }
    }

    pub fn index(&mut self) -> Result<usize, LexError> {
        let at = self.position();
        let value = self.number()?;
        if value >= 0.0 && value.fract() == 0.0 && value < usize::MAX as f64 {
            Ok(value as usize)
        } else {
            Err(LexError {
                at,
                message: format!("expected a firm index, found {value}"),
            })
        }
    }

    /// Parses `open item (, item)* ,? close` where the list may be empty.
    pub fn list<T>(
        &mut self,
        open: Token,
        close: Token,
        mut item: impl FnMut(&mut Self) -> Result<T, LexError>,
    ) -> Result<Vec<T>, LexError> {
        self.expect(open)?;
        let mut items = Vec::new();
        loop {
            if self.eat(&close) {
                return Ok(items);
            }
            items.push(item(self)?);
            if !self.eat(&Token::Comma) {
                self.expect(close)?;
                return Ok(items);
            }
        }
    }
}

fn describe(token: Option<Token>) -> String {
    token.map_or_else(|| "end of input".to_string(), |t| t.to_string())
}

/// Strips one surrounding fenced code block, if the text is one.
pub(crate) fn strip_fence(text: &str) -> &str {
    let trimmed = text.trim();
    if let Some(rest) = trimmed.strip_prefix("```") {
        if let Some(body) = rest.strip_suffix("```") {
            return body.split_once('\n').map_or("", |(_, body)| body);
        }
    }
    text
}

/// Contents of every fenced code block in `text`, in order.
pub(crate) fn fenced_blocks(text: &str) -> Vec<&str> {
    let mut blocks = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find("```") {
        let after = &rest[open + 3..];
        let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
        let body = &after[body_start..];
        match body.find("```") {
            Some(close) => {
                blocks.push(&body[..close]);
                rest = &body[close + 3..];
            }
            None => break,
        }
    }
    blocks
}

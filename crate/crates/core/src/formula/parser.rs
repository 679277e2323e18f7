use std::fmt;

use thiserror::Error;

use super::Expr;

/// Malformed formula text. `position` is a character offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError { position, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    True,
    Not,
    Or,
    And,
    Until,
    Next,
    WeakNext,
    Eventually,
    Always,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(name) => write!(f, "atom `{name}`"),
            Token::True => f.write_str("`true`"),
            Token::Not => f.write_str("`!`"),
            Token::Or => f.write_str("`|`"),
            Token::And => f.write_str("`&`"),
            Token::Until => f.write_str("`U`"),
            Token::Next => f.write_str("`X`"),
            Token::WeakNext => f.write_str("`W`"),
            Token::Eventually => f.write_str("`F`"),
            Token::Always => f.write_str("`G`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let token = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '!' => Token::Not,
            '|' => Token::Or,
            '&' => Token::And,
            '(' => Token::LParen,
            ')' => Token::RParen,
            'U' => Token::Until,
            'X' => Token::Next,
            'W' => Token::WeakNext,
            'F' => Token::Eventually,
            'G' => Token::Always,
            '<' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Token::Eventually
            }
            '[' if chars.get(i + 1) == Some(&']') => {
                i += 1;
                Token::Always
            }
            'a'..='z' => {
                while i + 1 < chars.len() && matches!(chars[i + 1], 'a'..='z' | '0'..='9' | '_') {
                    i += 1;
                }
                let word: String = chars[start..=i].iter().collect();
                if word == "true" {
                    Token::True
                } else {
                    Token::Ident(word)
                }
            }
            other => {
                return Err(ParseError::new(start, format!("unexpected character `{other}`")));
            }
        };
        tokens.push((start, token));
        i += 1;
    }
    Ok(tokens)
}

/// Parses concrete syntax into an [`Expr`], keeping negation where written.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError::new(0, "empty formula"));
    }
    let mut parser = Parser { tokens, pos: 0, end: text.chars().count() };
    let expr = parser.or()?;
    if let Some((at, tok)) = parser.tokens.get(parser.pos) {
        return Err(ParseError::new(*at, format!("unexpected {tok} after complete formula")));
    }
    Ok(expr)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn eat(&mut self, want: &Token) -> bool {
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Token::Or) {
            let rhs = self.and()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.until()?;
        while self.eat(&Token::And) {
            let rhs = self.until()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.unary()?;
        if self.eat(&Token::Until) {
            let rhs = self.until()?;
            return Ok(Expr::Until(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let wrap: fn(Box<Expr>) -> Expr = match self.peek() {
            Some(Token::Not) => Expr::Not,
            Some(Token::Next) => Expr::Next,
            Some(Token::WeakNext) => Expr::WeakNext,
            Some(Token::Eventually) => Expr::Eventually,
            Some(Token::Always) => Expr::Always,
            _ => return self.primary(),
        };
        self.pos += 1;
        Ok(wrap(Box::new(self.unary()?)))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some((at, tok)) = self.tokens.get(self.pos).cloned() else {
            return Err(ParseError::new(self.end, "unexpected end of formula"));
        };
        self.pos += 1;
        match tok {
            Token::True => Ok(Expr::True),
            Token::Ident(name) => Ok(Expr::Atom(name)),
            Token::LParen => {
                let inner = self.or()?;
                match self.tokens.get(self.pos) {
                    Some((_, Token::RParen)) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    Some((p, t)) => Err(ParseError::new(*p, format!("expected `)`, found {t}"))),
                    None => Err(ParseError::new(self.end, "missing `)`")),
                }
            }
            other => Err(ParseError::new(at, format!("expected a formula, found {other}"))),
        }
    }
}

//! Tokenizer for the `.pd` surface syntax. `#` starts a line comment.

use num_bigint::BigInt;

use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Fun,
    Arrow,
    If,
    Then,
    Else,
    Let,
    LetAssert,
    In,
    True,
    False,
    And,
    Or,
    Xor,
    Plus,
    Minus,
    Eq,
    Lt,
    Le,
    Ge,
    Dot,
    Semi,
    LParen,
    RParen,
    LBrace,
    RBrace,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);

    macro_rules! push {
        ($t:expr, $c:expr) => {
            toks.push(Token { tok: $t, line, col: $c })
        };
    }

    while let Some(&c) = chars.peek() {
        let start_col = col;
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => {
                chars.next();
                col += 1;
                push!(Tok::LParen, start_col);
            }
            ')' => {
                chars.next();
                col += 1;
                push!(Tok::RParen, start_col);
            }
            '{' => {
                chars.next();
                col += 1;
                push!(Tok::LBrace, start_col);
            }
            '}' => {
                chars.next();
                col += 1;
                push!(Tok::RBrace, start_col);
            }
            ';' => {
                chars.next();
                col += 1;
                push!(Tok::Semi, start_col);
            }
            '.' => {
                chars.next();
                col += 1;
                push!(Tok::Dot, start_col);
            }
            '+' => {
                chars.next();
                col += 1;
                push!(Tok::Plus, start_col);
            }
            '-' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    push!(Tok::Arrow, start_col);
                } else {
                    push!(Tok::Minus, start_col);
                }
            }
            '=' => {
                chars.next();
                col += 1;
                push!(Tok::Eq, start_col);
            }
            '<' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push!(Tok::Le, start_col);
                } else {
                    push!(Tok::Lt, start_col);
                }
            }
            '>' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push!(Tok::Ge, start_col);
                } else {
                    return Err(SyntaxError::at(line, start_col, "expected `>=`"));
                }
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                push!(Tok::Int(s.parse().expect("digit run parses")), start_col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' || c == '\'' {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let tok = match s.as_str() {
                    "fun" => Tok::Fun,
                    "if" => Tok::If,
                    "then" => Tok::Then,
                    "else" => Tok::Else,
                    "let" => Tok::Let,
                    "letassert" => Tok::LetAssert,
                    "in" => Tok::In,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "xor" => Tok::Xor,
                    _ => Tok::Ident(s),
                };
                push!(tok, start_col);
            }
            other => {
                return Err(SyntaxError::at(line, start_col, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(toks)
}

//! Tokenizer for the concept language.

use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Tok {
    Ident(String),
    Number(f64),
    And,
    Or,
    Not,
    Some,
    All,
    Top,
    Bot,
    LParen,
    RParen,
    Dot,
    /// `<=`
    SubsumedBy,
    /// `@`
    At,
    /// `>=`
    AtLeast,
    Eof,
}

impl Tok {
    pub(super) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::And => "`and`".into(),
            Tok::Or => "`or`".into(),
            Tok::Not => "`not`".into(),
            Tok::Some => "`some`".into(),
            Tok::All => "`all`".into(),
            Tok::Top => "`Top`".into(),
            Tok::Bot => "`Bot`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Dot => "`.`".into(),
            Tok::SubsumedBy => "`<=`".into(),
            Tok::At => "`@`".into(),
            Tok::AtLeast => "`>=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(super) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Tokenize `src`, reporting positions relative to `first_line`.
///
/// The result always ends with an [`Tok::Eof`] token, so the parser has a
/// position to point at for "unexpected end of input" errors.
pub(super) fn lex(src: &str, first_line: usize) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut line = first_line;
    let mut col = 1;

    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let mut push = |tok: Tok| {
            tokens.push(Token {
                tok,
                line: tline,
                col: tcol,
            })
        };
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
                continue;
            }
            '(' => push(Tok::LParen),
            ')' => push(Tok::RParen),
            '.' => push(Tok::Dot),
            '@' => push(Tok::At),
            '<' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(Tok::SubsumedBy);
                    i += 1;
                    col += 1;
                } else {
                    return Err(ParseError::new(line, col, "expected `<=`"));
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(Tok::AtLeast);
                    i += 1;
                    col += 1;
                } else {
                    return Err(ParseError::new(line, col, "expected `>=`"));
                }
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                    col += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.as_str() {
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    "some" => Tok::Some,
                    "all" => Tok::All,
                    "Top" => Tok::Top,
                    "Bot" => Tok::Bot,
                    _ => Tok::Ident(word),
                };
                tokens.push(Token {
                    tok,
                    line: tline,
                    col: tcol,
                });
                continue;
            }
            _ if c.is_ascii_digit() || c == '-' => {
                let start = i;
                i += 1;
                col += 1;
                let mut seen_exp = false;
                while i < chars.len() {
                    let d = chars[i];
                    let take = d.is_ascii_digit()
                        || d == '.'
                        || (!seen_exp && (d == 'e' || d == 'E'))
                        || ((d == '+' || d == '-')
                            && matches!(chars[i - 1], 'e' | 'E'));
                    if !take {
                        break;
                    }
                    if d == 'e' || d == 'E' {
                        seen_exp = true;
                    }
                    i += 1;
                    col += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let value: f64 = text.parse().map_err(|_| {
                    ParseError::new(tline, tcol, format!("malformed number `{text}`"))
                })?;
                if !value.is_finite() {
                    return Err(ParseError::new(
                        tline,
                        tcol,
                        format!("number `{text}` is out of range"),
                    ));
                }
                tokens.push(Token {
                    tok: Tok::Number(value),
                    line: tline,
                    col: tcol,
                });
                continue;
            }
            _ => {
                return Err(ParseError::new(
                    line,
                    col,
                    format!("unexpected character `{c}`"),
                ));
            }
        }
        i += 1;
        col += 1;
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(tokens)
}

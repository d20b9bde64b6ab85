use std::str::FromStr;

use chrono::NaiveDate;
use rust_decimal::Decimal;

use super::{ParseError, Span};

pub(crate) const KEYWORDS: &[&str] = &[
    "model",
    "object",
    "relates_to",
    "as",
    "rule",
    "source",
    "if",
    "then",
    "service",
    "in",
    "out",
    "unit",
    "and",
    "or",
    "not",
    "true",
    "false",
    "boolean",
    "number",
    "money",
    "date",
    "text",
    "enum",
];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Number(Decimal),
    Date(NaiveDate),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) if is_keyword(s) => format!("keyword `{s}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Date(d) => format!("date `{d}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

const SYMBOLS: &[&str] = &[
    "!=", "<=", ">=", "<>", "{", "}", "(", ")", "[", "]", ",", ":", "=", "<", ">", "+", "-", "*",
    "/",
];

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let span = Span::new(line, col);
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                span,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                bump!();
            }
            // ISO-8601 calendar date: dddd-dd-dd
            let is_date = i - start == 4
                && chars.get(i) == Some(&'-')
                && chars
                    .get(i + 1..i + 3)
                    .is_some_and(|s| s.iter().all(char::is_ascii_digit))
                && chars.get(i + 3) == Some(&'-')
                && chars
                    .get(i + 4..i + 6)
                    .is_some_and(|s| s.iter().all(char::is_ascii_digit));
            if is_date {
                for _ in 0..6 {
                    bump!();
                }
                let text: String = chars[start..i].iter().collect();
                let date = NaiveDate::parse_from_str(&text, "%Y-%m-%d")
                    .map_err(|_| ParseError::at(span, format!("invalid date `{text}`")))?;
                out.push(Token {
                    tok: Tok::Date(date),
                    span,
                });
                continue;
            }
            let text: String = chars[start..i].iter().collect();
            let n = Decimal::from_str(&text)
                .map_err(|_| ParseError::at(span, format!("invalid number `{text}`")))?;
            out.push(Token {
                tok: Tok::Number(n),
                span,
            });
            continue;
        }
        if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(ParseError::at(span, "unterminated string literal"));
                    }
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        bump!();
                        let esc = match chars.get(i) {
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some('"') => '"',
                            Some('\\') => '\\',
                            _ => {
                                return Err(ParseError::at(
                                    Span::new(line, col),
                                    "invalid escape sequence",
                                ))
                            }
                        };
                        s.push(esc);
                        bump!();
                    }
                    Some(&ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            out.push(Token {
                tok: Tok::Str(s),
                span,
            });
            continue;
        }
        let unicode = match c {
            '≠' => Some("!="),
            '≤' => Some("<="),
            '≥' => Some(">="),
            _ => None,
        };
        if let Some(sym) = unicode {
            bump!();
            out.push(Token {
                tok: Tok::Sym(sym),
                span,
            });
            continue;
        }
        let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
            return Err(ParseError::at(span, format!("unexpected character `{c}`")));
        };
        for _ in 0..sym.chars().count() {
            bump!();
        }
        let sym = if *sym == "<>" { "!=" } else { sym };
        out.push(Token {
            tok: Tok::Sym(sym),
            span,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(line, col),
    });
    Ok(out)
}

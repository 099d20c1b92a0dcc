//! Tokenizer for the expression grammar.
//!
//! Whitespace is insignificant; `#` starts a comment running to the end of
//! the line.  Every token carries the byte offset of its first character so
//! parse errors can point back into the source.

use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub(super) enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
pub(super) struct Spanned {
    pub tok: Tok,
    pub offset: usize,
}

pub(super) fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'+' => push(&mut out, Tok::Plus, &mut i),
            b'-' => push(&mut out, Tok::Minus, &mut i),
            b'*' => push(&mut out, Tok::Star, &mut i),
            b'/' => push(&mut out, Tok::Slash, &mut i),
            b'^' => push(&mut out, Tok::Caret, &mut i),
            b'(' => push(&mut out, Tok::LParen, &mut i),
            b')' => push(&mut out, Tok::RParen, &mut i),
            b'0'..=b'9' | b'.' => {
                let start = i;
                let end = scan_number(bytes, i);
                if end == start {
                    return Err(ParseError::Syntax {
                        offset: start,
                        message: "expected a number".into(),
                    });
                }
                let text = &src[start..end];
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                if !value.is_finite() {
                    return Err(ParseError::Syntax {
                        offset: start,
                        message: format!("numeric literal `{text}` overflows f64"),
                    });
                }
                out.push(Spanned {
                    tok: Tok::Num(value),
                    offset: start,
                });
                i = end;
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric()) {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(src[start..i].to_string()),
                    offset: start,
                });
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset: i,
                    message: format!("unexpected character `{}`", &src[i..].chars().next().unwrap()),
                });
            }
        }
    }
    Ok(out)
}

fn push(out: &mut Vec<Spanned>, tok: Tok, i: &mut usize) {
    out.push(Spanned { tok, offset: *i });
    *i += 1;
}

/// Scans `[0-9]+ ('.' [0-9]*)? | '.' [0-9]+`, then an optional exponent.
/// The exponent marker is consumed only when followed by digits (with an
/// optional sign), so `2e` lexes as the number 2 and the identifier `e`.
fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    let start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    // A bare '.' with no digits on either side is not a number.
    if i == start + 1 && bytes[start] == b'.' {
        return start;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

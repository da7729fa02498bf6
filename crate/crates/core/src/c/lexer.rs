use super::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Float(String),
    Punct(&'static str),
    /// A `#pragma <namespace> <body>` line.
    Pragma {
        namespace: String,
        body: String,
    },
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

const PUNCTS: &[&str] = &[
    "<<=", ">>=", "...", "->", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "&&",
    "||", "==", "!=", "<=", ">=", "<<", ">>", "+", "-", "*", "/", "%", "<", ">", "=", "!", "(",
    ")", "[", "]", "{", "}", ";", ",", ":", "?", "&", "|", "^", "~", ".",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    tokenize_at(src, 1)
}

/// Tokenize text whose first line is `first_line` in the enclosing file.
pub fn tokenize_at(src: &str, first_line: u32) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = first_line;
    let mut col = 1u32;
    let mut line_start = true;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
                line_start = true;
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
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l, cl) = (line, col);
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(ParseError::syntax(l, cl, "unterminated comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        let (tline, tcol) = (line, col);
        if c == '#' && line_start {
            let mut text = String::new();
            while i < chars.len() && chars[i] != '\n' {
                if chars[i] == '\\' && chars.get(i + 1) == Some(&'\n') {
                    bump!();
                    bump!();
                    text.push(' ');
                    continue;
                }
                text.push(chars[i]);
                bump!();
            }
            let rest = text[1..].trim_start();
            let Some(after) = rest.strip_prefix("pragma") else {
                return Err(ParseError::Unsupported {
                    line: tline,
                    col: tcol,
                    feature: format!("preprocessor directive `{}`", text.trim()),
                });
            };
            let after = after.trim();
            let (ns, body) = match after.find(char::is_whitespace) {
                Some(p) => (&after[..p], after[p..].trim()),
                None => (after, ""),
            };
            toks.push(Token {
                tok: Tok::Pragma {
                    namespace: ns.to_string(),
                    body: body.to_string(),
                },
                line: tline,
                col: tcol,
            });
            continue;
        }
        line_start = false;
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            toks.push(Token {
                tok: Tok::Ident(s),
                line: tline,
                col: tcol,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let tok = lex_number(&chars, &mut i, &mut col)
                .map_err(|m| ParseError::syntax(tline, tcol, m))?;
            toks.push(Token {
                tok,
                line: tline,
                col: tcol,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let Some(p) = PUNCTS.iter().find(|p| rest.starts_with(**p)) else {
            return Err(ParseError::syntax(
                tline,
                tcol,
                format!("unexpected character `{c}`"),
            ));
        };
        for _ in 0..p.len() {
            bump!();
        }
        toks.push(Token {
            tok: Tok::Punct(p),
            line: tline,
            col: tcol,
        });
    }
    toks.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(toks)
}

fn lex_number(chars: &[char], i: &mut usize, col: &mut u32) -> Result<Tok, String> {
    let start = *i;
    let take = |i: &mut usize, col: &mut u32| {
        *i += 1;
        *col += 1;
    };
    if chars[*i] == '0' && matches!(chars.get(*i + 1), Some('x') | Some('X')) {
        take(i, col);
        take(i, col);
        let hs = *i;
        while *i < chars.len() && chars[*i].is_ascii_hexdigit() {
            take(i, col);
        }
        let digits: String = chars[hs..*i].iter().collect();
        while *i < chars.len() && matches!(chars[*i], 'u' | 'U' | 'l' | 'L') {
            take(i, col);
        }
        return i64::from_str_radix(&digits, 16)
            .map(Tok::Int)
            .map_err(|e| e.to_string());
    }
    let mut is_float = false;
    while *i < chars.len() && chars[*i].is_ascii_digit() {
        take(i, col);
    }
    if *i < chars.len() && chars[*i] == '.' {
        is_float = true;
        take(i, col);
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            take(i, col);
        }
    }
    if *i < chars.len() && matches!(chars[*i], 'e' | 'E') {
        let save = (*i, *col);
        take(i, col);
        if *i < chars.len() && matches!(chars[*i], '+' | '-') {
            take(i, col);
        }
        if *i < chars.len() && chars[*i].is_ascii_digit() {
            is_float = true;
            while *i < chars.len() && chars[*i].is_ascii_digit() {
                take(i, col);
            }
        } else {
            (*i, *col) = save;
        }
    }
    if is_float {
        if *i < chars.len() && matches!(chars[*i], 'f' | 'F' | 'l' | 'L') {
            take(i, col);
        }
        return Ok(Tok::Float(chars[start..*i].iter().collect()));
    }
    let digits: String = chars[start..*i].iter().collect();
    while *i < chars.len() && matches!(chars[*i], 'u' | 'U' | 'l' | 'L') {
        take(i, col);
    }
    if *i < chars.len() && (chars[*i].is_ascii_alphanumeric() || chars[*i] == '_') {
        return Err(format!("malformed number `{digits}{}`", chars[*i]));
    }
    digits
        .parse::<i64>()
        .map(Tok::Int)
        .map_err(|e| e.to_string())
}

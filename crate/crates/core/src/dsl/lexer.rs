use super::{Diagnostic, Location};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Numeric literal, kept verbatim.
    Number(String),
    Dot,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Colon,
    Semi,
    Plus,
    Amp,
    /// `:-`
    If,
    /// `<-`
    Arrow,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Amp => "`&`".into(),
            Tok::If => "`:-`".into(),
            Tok::Arrow => "`<-`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub loc: Location,
}

/// Splits `text` into tokens. Unknown characters become error diagnostics
/// and are skipped, so lexing always terminates.
pub(crate) fn lex(text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let loc = Location { line, column: col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                tokens.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), loc });
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                // A dot is part of the number only when a digit follows it.
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                col += i - start;
                tokens.push(Token { tok: Tok::Number(chars[start..i].iter().collect()), loc });
            }
            ':' if chars.get(i + 1) == Some(&'-') => {
                advance(2, &mut i, &mut col);
                tokens.push(Token { tok: Tok::If, loc });
            }
            '<' if chars.get(i + 1) == Some(&'-') => {
                advance(2, &mut i, &mut col);
                tokens.push(Token { tok: Tok::Arrow, loc });
            }
            _ => {
                let tok = match c {
                    '.' => Some(Tok::Dot),
                    ',' => Some(Tok::Comma),
                    '(' => Some(Tok::LParen),
                    ')' => Some(Tok::RParen),
                    '{' => Some(Tok::LBrace),
                    '}' => Some(Tok::RBrace),
                    ':' => Some(Tok::Colon),
                    ';' => Some(Tok::Semi),
                    '+' => Some(Tok::Plus),
                    '&' => Some(Tok::Amp),
                    _ => None,
                };
                match tok {
                    Some(tok) => tokens.push(Token { tok, loc }),
                    None => diags.push(Diagnostic::error(loc, format!("unexpected character `{c}`"))),
                }
                advance(1, &mut i, &mut col);
            }
        }
    }
    tokens.push(Token { tok: Tok::Eof, loc: Location { line, column: col } });
    (tokens, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).0.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn decimal_versus_terminator() {
        assert_eq!(
            toks("fuel(5). 0.25:"),
            vec![
                Tok::Ident("fuel".into()),
                Tok::LParen,
                Tok::Number("5".into()),
                Tok::RParen,
                Tok::Dot,
                Tok::Number("0.25".into()),
                Tok::Colon,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_locations() {
        let (t, d) = lex("// hi\n  a :- b.");
        assert!(d.is_empty());
        assert_eq!(t[0].loc, Location { line: 2, column: 3 });
        assert_eq!(t[1].tok, Tok::If);
    }

    #[test]
    fn bad_characters_are_reported_not_fatal() {
        let (t, d) = lex("a # b");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].location, Location { line: 1, column: 3 });
        assert_eq!(t.len(), 3);
    }
}

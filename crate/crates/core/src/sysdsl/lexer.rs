use num_bigint::BigInt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Identifier with the number of trailing primes.
    Ident(String, u16),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eq,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s, p) => format!("identifier `{s}{}`", "'".repeat(*p as usize)),
            Tok::Int(i) => format!("number `{i}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
        }
    }
}

/// A token with its 1-based column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spanned {
    pub tok: Tok,
    pub col: usize,
}

/// Tokenises one line (comments already stripped). Returns the column of
/// the first unexpected character on failure.
pub fn lex_line(line: &str) -> Result<Vec<Spanned>, usize> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            let mut primes = 0u16;
            while i < chars.len() && chars[i] == '\'' {
                primes += 1;
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(name, primes),
                col,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                return Err(i + 1);
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Spanned {
                tok: Tok::Int(s.parse().expect("digits")),
                col,
            });
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            _ => return Err(col),
        };
        out.push(Spanned { tok, col });
        i += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_columns() {
        let t = lex_line("dot x = u1'' + 2").unwrap();
        assert_eq!(t[3].tok, Tok::Ident("u1".into(), 2));
        assert_eq!(t[3].col, 9);
        assert_eq!(t[5].tok, Tok::Int(2.into()));
    }

    #[test]
    fn rejects_stray_characters() {
        assert_eq!(lex_line("dot x = $"), Err(9));
        assert_eq!(lex_line("2x"), Err(2));
    }
}

//! The fixed arithmetic vocabulary.

use crate::SeqgenError;

/// Token id. Ids index [`Vocabulary::standard`].
pub type Token = u32;

pub const PLUS: Token = 10;
pub const MINUS: Token = 11;
pub const TIMES: Token = 12;
pub const DIVIDE: Token = 13;
pub const EQUALS: Token = 14;
pub const SEP: Token = 15;
pub const EOS: Token = 16;

const SURFACE: [&str; 17] = [
    "0", "1", "2", "3", "4", "5", "6", "7", "8", "9", "+", "-", "*", "/", "=", "<sep>", "<eos>",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<&'static str>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::standard()
    }
}

impl Vocabulary {
    /// Digits, the four operators, `=`, separator and end-of-sequence.
    pub fn standard() -> Self {
        Self {
            tokens: SURFACE.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surface(&self, token: Token) -> &'static str {
        self.tokens[token as usize]
    }

    pub fn is_digit(token: Token) -> bool {
        token < 10
    }

    /// Tokenizes text written with one character per token. Whitespace is
    /// skipped; `×`, `÷` and `−` are accepted for `*`, `/` and `-`.
    pub fn tokenize(&self, text: &str) -> Result<Vec<Token>, SeqgenError> {
        let mut out = Vec::new();
        let mut rest = text.trim();
        while let Some(c) = rest.chars().next() {
            if c.is_whitespace() {
                rest = &rest[c.len_utf8()..];
                continue;
            }
            if let Some(tail) = rest.strip_prefix("<sep>") {
                out.push(SEP);
                rest = tail;
                continue;
            }
            if let Some(tail) = rest.strip_prefix("<eos>") {
                out.push(EOS);
                rest = tail;
                continue;
            }
            let token = match c {
                '0'..='9' => c as Token - '0' as Token,
                '+' => PLUS,
                '-' | '−' => MINUS,
                '*' | '×' => TIMES,
                '/' | '÷' => DIVIDE,
                '=' => EQUALS,
                _ => return Err(SeqgenError::UnknownToken(c.to_string())),
            };
            out.push(token);
            rest = &rest[c.len_utf8()..];
        }
        Ok(out)
    }

    /// Inverse of [`tokenize`](Self::tokenize): numbers are written without
    /// spaces, everything else is space separated.
    pub fn render(&self, tokens: &[Token]) -> String {
        let mut s = String::new();
        for (i, &t) in tokens.iter().enumerate() {
            let glue = i > 0 && !(Self::is_digit(t) && Self::is_digit(tokens[i - 1]));
            if glue {
                s.push(' ');
            }
            s.push_str(self.surface(t));
        }
        s
    }
}

/// Decimal digits of `n`, most significant first, without leading zeros.
pub fn number_tokens(n: u64) -> Vec<Token> {
    n.to_string().bytes().map(|b| (b - b'0') as Token).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_are_unique_and_include_eos() {
        let v = Vocabulary::standard();
        let mut seen = std::collections::HashSet::new();
        assert!((0..v.len() as Token).all(|t| seen.insert(v.surface(t))));
        assert_eq!(v.surface(EOS), "<eos>");
    }

    #[test]
    fn render_and_tokenize_round_trip() {
        let v = Vocabulary::standard();
        let toks = v.tokenize("12 + 7 = 19 <eos>").unwrap();
        assert_eq!(toks, vec![1, 2, PLUS, 7, EQUALS, 1, 9, EOS]);
        assert_eq!(v.render(&toks), "12 + 7 = 19 <eos>");
        assert_eq!(v.tokenize("3×4").unwrap(), vec![3, TIMES, 4]);
        assert!(v.tokenize("2 ^ 3").is_err());
    }

    #[test]
    fn numbers_have_no_leading_zeros() {
        assert_eq!(number_tokens(0), vec![0]);
        assert_eq!(number_tokens(105), vec![1, 0, 5]);
    }
}

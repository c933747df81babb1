use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no alphabetic content in name {0:?}")]
pub struct UnparseableName(pub String);

/// Standardised name components: uppercase ASCII, punctuation stripped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NameParts {
    pub first: String,
    pub middle: String,
    pub last: String,
    pub suffix: String,
}

impl NameParts {
    /// `FIRST MIDDLE LAST`, skipping empty components. Suffix excluded.
    pub fn full(&self) -> String {
        [&self.first, &self.middle, &self.last]
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn first_initial(&self) -> Option<char> {
        self.first.chars().next()
    }

    /// A middle name counts as complete when it is longer than an initial.
    pub fn has_complete_middle(&self) -> bool {
        self.middle.len() > 1
    }
}

const SUFFIXES: &[&str] = &["JR", "SR", "II", "III", "IV", "V"];
const PARTICLES: &[&str] = &[
    "VAN", "VON", "DER", "DEN", "DE", "DA", "DI", "DU", "DEL", "DELLA", "LA", "LE", "DOS", "DAS", "ST", "TER", "TEN",
];

/// ASCII-folds, uppercases and tokenises. Apostrophes and hyphens join their
/// neighbours; other punctuation separates tokens.
fn tokens(raw: &str) -> Vec<String> {
    let mut cleaned = String::with_capacity(raw.len());
    for c in raw.nfkd() {
        if c.is_ascii_alphabetic() {
            cleaned.push(c.to_ascii_uppercase());
        } else if matches!(c, '\'' | '-' | '\u{2019}' | '\u{2010}' | '\u{2011}') {
            // joins O'Neil -> ONEIL, Garcia-Lopez -> GARCIALOPEZ
        } else if c.is_ascii() {
            cleaned.push(' ');
        } else if unicode_normalization::char::is_combining_mark(c) {
            // diacritic stripped by decomposition
        } else {
            cleaned.push(' ');
        }
    }
    cleaned.split_whitespace().map(str::to_string).collect()
}

fn split_suffix(tokens: &mut Vec<String>) -> String {
    if tokens.len() > 1 && SUFFIXES.contains(&tokens[tokens.len() - 1].as_str()) {
        tokens.pop().unwrap_or_default()
    } else {
        String::new()
    }
}

/// Parses `Last, First Middle` or `First Middle Last` into [`NameParts`].
pub fn parse_name(raw: &str) -> Result<NameParts, UnparseableName> {
    let unparseable = || UnparseableName(raw.to_string());
    if let Some((last_part, rest)) = raw.split_once(',') {
        let mut last_tokens = tokens(last_part);
        let mut rest_tokens = tokens(rest);
        // "Smith, John, Jr." and "Smith Jr., John"
        let mut suffix = split_suffix(&mut rest_tokens);
        if suffix.is_empty() {
            suffix = split_suffix(&mut last_tokens);
        }
        if rest_tokens.len() == 1 && SUFFIXES.contains(&rest_tokens[0].as_str()) && suffix.is_empty() {
            suffix = rest_tokens.pop().unwrap_or_default();
        }
        if last_tokens.is_empty() {
            // ", John" degenerates to a bare given-name string
            return parse_plain(rest_tokens, suffix).ok_or_else(unparseable);
        }
        let last = last_tokens.concat();
        let mut rest_iter = rest_tokens.into_iter();
        let first = rest_iter.next().unwrap_or_default();
        let middle = rest_iter.collect::<Vec<_>>().join(" ");
        return Ok(NameParts {
            first,
            middle,
            last,
            suffix,
        });
    }
    let mut t = tokens(raw);
    let suffix = split_suffix(&mut t);
    parse_plain(t, suffix).ok_or_else(unparseable)
}

fn parse_plain(mut t: Vec<String>, suffix: String) -> Option<NameParts> {
    let last_token = t.pop()?;
    let mut last = vec![last_token];
    // Pull surname particles ("van der Berg") into the last name.
    while t.len() > 1 && PARTICLES.contains(&t[t.len() - 1].as_str()) {
        last.insert(0, t.pop().unwrap());
    }
    let mut rest = t.into_iter();
    let first = rest.next().unwrap_or_default();
    let middle = rest.collect::<Vec<_>>().join(" ");
    Some(NameParts {
        first,
        middle,
        last: last.concat(),
        suffix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn np(first: &str, middle: &str, last: &str) -> NameParts {
        NameParts {
            first: first.into(),
            middle: middle.into(),
            last: last.into(),
            suffix: String::new(),
        }
    }

    #[test]
    fn last_first_order() {
        assert_eq!(parse_name("Smith, John Robert").unwrap(), np("JOHN", "ROBERT", "SMITH"));
    }

    #[test]
    fn initial_with_period() {
        assert_eq!(parse_name("J. Doe").unwrap(), np("J", "", "DOE"));
    }

    #[test]
    fn diacritics_and_punctuation() {
        assert_eq!(
            parse_name("Renée O'Neil-García").unwrap(),
            np("RENEE", "", "ONEILGARCIA")
        );
    }

    #[test]
    fn suffixes() {
        let p = parse_name("John Smith Jr.").unwrap();
        assert_eq!((p.last.as_str(), p.suffix.as_str()), ("SMITH", "JR"));
        let q = parse_name("Smith, John, Jr.").unwrap();
        assert_eq!(
            q,
            NameParts {
                suffix: "JR".into(),
                ..np("JOHN", "", "SMITH")
            }
        );
        let r = parse_name("Smith Jr., John").unwrap();
        assert_eq!(r, q);
    }

    #[test]
    fn particles_join_surname() {
        assert_eq!(parse_name("Jan van der Berg").unwrap(), np("JAN", "", "VANDERBERG"));
        assert_eq!(parse_name("van der Berg, Jan").unwrap(), np("JAN", "", "VANDERBERG"));
    }

    #[test]
    fn no_letters_is_error() {
        assert!(parse_name("1234 --").is_err());
        assert!(parse_name("").is_err());
        assert!(parse_name("李").is_err());
    }

    #[test]
    fn single_token_is_last_name() {
        assert_eq!(parse_name("Madonna").unwrap(), np("", "", "MADONNA"));
    }

    #[test]
    fn whitespace_collapsed() {
        assert_eq!(parse_name("  mary   ann\tlee ").unwrap(), np("MARY", "ANN", "LEE"));
    }
}

use crate::{Error, Result};

/// Decodes `raw` as UTF-8 and splits it into lowercased tokens.
///
/// A token is a maximal run of Unicode letters or digits; every other
/// character separates tokens.
pub fn preprocess(raw: &[u8]) -> Result<Vec<String>> {
    let text = std::str::from_utf8(raw).map_err(|e| Error::Decode {
        offset: e.valid_up_to(),
    })?;
    Ok(tokenize_str(text).collect())
}

/// Tokenizes already-decoded text. Lowercasing happens before splitting so
/// that the output is a fixed point of the tokenizer.
pub fn tokenize_str(text: &str) -> impl Iterator<Item = String> {
    let lowered = text.to_lowercase();
    let tokens: Vec<String> = lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect();
    tokens.into_iter()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        preprocess(s.as_bytes()).unwrap()
    }

    #[test]
    fn strips_punctuation_and_lowercases() {
        assert_eq!(toks("Kung, drottning!"), ["kung", "drottning"]);
        assert_eq!(toks("Mosul."), ["mosul"]);
    }

    #[test]
    fn swedish_letters_and_digits_are_token_characters() {
        // å (U+00E5), ä, ö are category Ll; Å (U+00C5) is Lu.
        assert_eq!(toks("år 2019"), ["år", "2019"]);
        assert_eq!(toks("Ålänningar ÖVER"), ["ålänningar", "över"]);
        assert_eq!(toks("a-b_c"), ["a", "b", "c"]);
    }

    #[test]
    fn empty_and_separator_only_input() {
        assert!(toks("").is_empty());
        assert!(toks(" ,.;\n\t").is_empty());
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let raw = b"abc \xff def";
        match preprocess(raw) {
            Err(Error::Decode { offset }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn preprocess_is_idempotent(s in "\\PC{0,60}") {
            let once = toks(&s);
            let again = toks(&once.join(" "));
            prop_assert_eq!(once, again);
        }
    }
}

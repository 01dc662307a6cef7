use super::DataError;

/// Converts a venue name into the hashtag people are likely to use for it.
///
/// Each whitespace-delimited token is stripped of everything outside
/// `[A-Za-z0-9]`, its first character is upper-cased, and the tokens are
/// concatenated behind a `#`: `"Joe's Pizza-Bar"` becomes `"#JoesPizzaBar"`.
pub fn derive_hashtag(name: &str) -> Result<String, DataError> {
    let mut tag = String::with_capacity(name.len() + 1);
    tag.push('#');
    for token in name.split_whitespace() {
        let mut chars = token.chars().filter(char::is_ascii_alphanumeric);
        if let Some(first) = chars.next() {
            tag.push(first.to_ascii_uppercase());
            tag.extend(chars);
        }
    }
    if tag.len() == 1 {
        return Err(DataError::EmptyName);
    }
    Ok(tag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Character-at-a-time reimplementation used as an oracle.
    fn reference(name: &str) -> Option<String> {
        let mut out = String::from("#");
        let mut at_token_start = true;
        for c in name.chars() {
            if c.is_whitespace() {
                at_token_start = true;
            } else if c.is_ascii_alphanumeric() {
                out.push(if at_token_start {
                    c.to_ascii_uppercase()
                } else {
                    c
                });
                at_token_start = false;
            }
        }
        (out.len() > 1).then_some(out)
    }

    #[test]
    fn examples() {
        assert_eq!(derive_hashtag("Sample Name").unwrap(), "#SampleName");
        assert_eq!(derive_hashtag("Ramen").unwrap(), "#Ramen");
        assert_eq!(derive_hashtag("Joe's Pizza-Bar").unwrap(), "#JoesPizzaBar");
        assert_eq!(reference("Joe's Pizza-Bar").unwrap(), "#JoesPizzaBar");
        assert_eq!(derive_hashtag("  ippudo   ny ").unwrap(), "#IppudoNy");
        assert_eq!(derive_hashtag("99 favor taste").unwrap(), "#99FavorTaste");
    }

    #[test]
    fn empty_names_rejected() {
        assert!(matches!(derive_hashtag(""), Err(DataError::EmptyName)));
        assert!(matches!(derive_hashtag("   "), Err(DataError::EmptyName)));
        assert!(matches!(derive_hashtag("- & -"), Err(DataError::EmptyName)));
        assert!(matches!(derive_hashtag("café"), Ok(ref t) if t == "#Caf"));
    }

    proptest! {
        #[test]
        fn matches_reference(name in "\\PC{0,40}") {
            prop_assert_eq!(derive_hashtag(&name).ok(), reference(&name));
        }

        #[test]
        fn canonical_token_is_idempotent(token in "[A-Z][A-Za-z0-9]{0,20}") {
            prop_assert_eq!(derive_hashtag(&token).unwrap(), format!("#{token}"));
        }
    }
}

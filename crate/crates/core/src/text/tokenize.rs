/// Lowercased alphanumeric tokens, split at every non-alphanumeric character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Tokenizes each string of an already split list and flattens the result.
pub fn tokenize_all<'a, I>(parts: I) -> Vec<String>
where
    I: IntoIterator<Item = &'a str>,
{
    parts.into_iter().flat_map(tokenize).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_and_lowercases() {
        assert_eq!(
            tokenize("Walking with My DOG!"),
            ["walking", "with", "my", "dog"]
        );
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("dog-walk 101"), ["dog", "walk", "101"]);
        assert_eq!(tokenize("  ..  "), Vec::<String>::new());
    }

    #[test]
    fn flattens_lists() {
        assert_eq!(
            tokenize_all(["Hello World", "dog"]),
            ["hello", "world", "dog"]
        );
    }
}

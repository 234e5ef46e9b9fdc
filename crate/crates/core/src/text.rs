//! Small string helpers shared by matching, filtering and scoring.

/// Folds one character to lower case when the mapping is one-to-one.
///
/// Characters whose lower-case form expands to several scalars are kept
/// unchanged so that folded text stays aligned with the original.
pub fn fold_char(c: char) -> char {
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

pub fn casefold(s: &str) -> String {
    s.chars().map(fold_char).collect()
}

/// Collapses whitespace runs to a single space and trims both ends.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Case-folded, whitespace-normalized form used for lenient comparisons.
pub fn loose_key(s: &str) -> String {
    casefold(&normalize_whitespace(s))
}

pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Slices `s` by character offsets. Returns `None` when out of range.
pub fn slice_chars(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut indices = s.char_indices().map(|(i, _)| i).chain(std::iter::once(s.len()));
    let begin = indices.nth(start)?;
    let finish = if end == start {
        begin
    } else {
        indices.nth(end - start - 1)?
    };
    Some(&s[begin..finish])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_keeps_alignment() {
        assert_eq!(casefold("Gloeophyllum ABIETINUM"), "gloeophyllum abietinum");
        // U+0130 lowercases to two scalars; it is left alone.
        assert_eq!(casefold("\u{130}x").chars().count(), 2);
    }

    #[test]
    fn slice_by_chars() {
        let s = "α-amyrin β";
        assert_eq!(slice_chars(s, 0, 8), Some("α-amyrin"));
        assert_eq!(slice_chars(s, 9, 10), Some("β"));
        assert_eq!(slice_chars(s, 10, 10), Some(""));
        assert_eq!(slice_chars(s, 9, 11), None);
    }

    #[test]
    fn whitespace_normalization() {
        assert_eq!(normalize_whitespace("  a \t b\n c "), "a b c");
        assert_eq!(loose_key(" Aspergillus  Niger"), "aspergillus niger");
    }
}

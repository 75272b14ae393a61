//! Character n-grams with boundary markers, hashed into buckets.

/// N-grams of `<word>` with lengths `n_min..=n_max`, ordered by start
/// position then length. The whole wrapped word is not included; it is the
/// word's own (special) unit, see [`special_token`].
pub fn subword_ngrams(word: &str, n_min: usize, n_max: usize) -> Vec<String> {
    let wrapped: Vec<char> = special_token(word).chars().collect();
    let len = wrapped.len();
    let mut out = Vec::new();
    for start in 0..len {
        for n in n_min.max(1)..=n_max {
            let end = start + n;
            if end > len {
                break;
            }
            if n == len {
                continue;
            }
            out.push(wrapped[start..end].iter().collect());
        }
    }
    out
}

pub fn special_token(word: &str) -> String {
    format!("<{word}>")
}

/// 32-bit FNV-1a.
pub fn fnv1a(s: &str) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for b in s.bytes() {
        h ^= u32::from(b);
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

pub fn bucket_of(ngram: &str, bucket_count: u32) -> u32 {
    fnv1a(ngram) % bucket_count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerations() {
        assert_eq!(subword_ngrams("her", 3, 3), ["<he", "her", "er>"]);
        assert_eq!(special_token("her"), "<her>");
        assert_eq!(subword_ngrams("ab", 3, 3), ["<ab", "ab>"]);
        assert!(subword_ngrams("a", 5, 6).is_empty());
        assert_eq!(subword_ngrams("ab", 3, 4), ["<ab", "ab>"]);
    }

    #[test]
    fn multi_length_order() {
        assert_eq!(
            subword_ngrams("abc", 3, 4),
            ["<ab", "<abc", "abc", "abc>", "bc>"]
        );
    }

    #[test]
    fn unicode_is_char_based() {
        assert_eq!(subword_ngrams("é", 2, 2), ["<é", "é>"]);
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(""), 0x811c9dc5);
        assert_eq!(fnv1a("a"), 0xe40c292c);
        assert_eq!(fnv1a("foobar"), 0xbf9cf968);
    }
}

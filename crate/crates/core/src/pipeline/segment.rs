//! Rule-based sentence segmentation.

use crate::scoring::Span;

// compared case-insensitively against the word before a period
const ABBREVIATIONS: &[&str] = &[
    "fig", "figs", "eq", "eqs", "al", "e.g", "i.e", "vs", "cf", "dr", "mr", "mrs", "ms", "prof",
    "st", "no", "nos", "vol", "pp", "sec", "secs", "ch", "approx", "resp", "ref", "refs", "tab",
    "jr", "sr", "inc", "ltd", "co", "corp", "dept", "univ", "jan", "feb", "mar", "apr", "jun",
    "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s", "u.k", "ph.d", "a.k.a", "viz",
];

fn word_before(text: &str, dot: usize) -> &str {
    let head = &text[..dot];
    let start = head
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace() || matches!(c, '(' | '[' | '"' | '“'))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    &head[start..]
}

fn is_abbreviation(word: &str) -> bool {
    let lower = word.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    // single initials such as "J." and dotted acronyms such as "U.S."
    let mut chars = word.chars();
    matches!((chars.next(), chars.next()), (Some(c), None) if c.is_uppercase())
}

fn opens_sentence(c: char) -> bool {
    c.is_uppercase() || c.is_ascii_digit() || matches!(c, '"' | '“' | '\'' | '‘' | '(' | '[')
}

/// Splits `text` into sentence spans (byte offsets, trimmed of surrounding
/// whitespace). Text with no terminal punctuation is one sentence; blank
/// lines always end a sentence.
pub fn split_sentences(text: &str) -> Vec<Span> {
    let mut boundaries = Vec::new(); // end offsets (exclusive)
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut k = 0;
    while k < chars.len() {
        let (i, c) = chars[k];
        if c == '\n' && chars.get(k + 1).is_some_and(|&(_, n)| n == '\n') {
            boundaries.push(i);
            k += 2;
            continue;
        }
        if !matches!(c, '.' | '!' | '?') {
            k += 1;
            continue;
        }
        // absorb runs like "?!" or "..." and closing quotes or brackets
        let mut e = k + 1;
        while e < chars.len() && matches!(chars[e].1, '.' | '!' | '?') {
            e += 1;
        }
        while e < chars.len() && matches!(chars[e].1, '"' | '”' | '\'' | '’' | ')' | ']') {
            e += 1;
        }
        let end = chars.get(e).map_or(text.len(), |&(j, _)| j);
        let mut n = e;
        while n < chars.len() && chars[n].1.is_whitespace() && chars[n].1 != '\n' {
            n += 1;
        }
        if n < chars.len() && chars[n].1 == '\n' {
            n += 1;
            while n < chars.len() && chars[n].1.is_whitespace() {
                n += 1;
            }
        }
        let at_end = n >= chars.len();
        let has_space = n > e;
        let split = if at_end {
            true
        } else if !has_space || !opens_sentence(chars[n].1) {
            false
        } else if c == '.' && e == k + 1 {
            let word = word_before(text, i);
            !(is_abbreviation(word) && !word.eq_ignore_ascii_case("etc"))
        } else {
            true
        };
        if split {
            boundaries.push(end);
        }
        k = e.max(k + 1);
    }

    let mut spans = Vec::new();
    let mut start = 0;
    for end in boundaries.into_iter().chain(std::iter::once(text.len())) {
        if end <= start {
            continue;
        }
        if let Some(span) = trimmed(text, start, end) {
            spans.push(span);
        }
        start = end;
    }
    spans
}

fn trimmed(text: &str, start: usize, end: usize) -> Option<Span> {
    let piece = &text[start..end];
    let lead = piece.len() - piece.trim_start().len();
    let body = piece.trim();
    (!body.is_empty()).then(|| Span::new(start + lead, start + lead + body.len()))
}

/// Convenience wrapper returning the sentence strings.
pub fn sentences(text: &str) -> Vec<&str> {
    split_sentences(text).into_iter().map(|s| &text[s.start..s.end]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_sentences() {
        assert_eq!(sentences("A works. B fails."), ["A works.", "B fails."]);
    }

    #[test]
    fn abbreviation_guards() {
        assert_eq!(sentences("See Fig. 2 for details."), ["See Fig. 2 for details."]);
        assert_eq!(sentences("Smith et al. Showed this. Then more."), ["Smith et al. Showed this.", "Then more."]);
        assert_eq!(sentences("Accuracy rose to 3.5 points. Good."), ["Accuracy rose to 3.5 points.", "Good."]);
        assert_eq!(sentences("We use e.g. BERT here."), ["We use e.g. BERT here."]);
        assert_eq!(sentences("Written by J. Smith today."), ["Written by J. Smith today."]);
    }

    #[test]
    fn etc_splits_before_capital() {
        assert_eq!(sentences("bugs, requests, etc. We then go."), ["bugs, requests, etc.", "We then go."]);
    }

    #[test]
    fn no_terminal_punctuation() {
        assert_eq!(sentences("  a headline without a stop "), ["a headline without a stop"]);
    }

    #[test]
    fn lowercase_after_period_does_not_split() {
        assert_eq!(sentences("We saw v. small gains. Next."), ["We saw v. small gains.", "Next."]);
    }

    #[test]
    fn questions_and_quotes() {
        assert_eq!(sentences("Is it? \"Yes.\" It is!"), ["Is it?", "\"Yes.\"", "It is!"]);
    }

    #[test]
    fn ellipsis_before_lowercase() {
        assert_eq!(sentences("setup... and more. Done."), ["setup... and more.", "Done."]);
    }

    proptest! {
        #[test]
        fn spans_ordered_disjoint_and_trimmed(text in "[A-Za-z .!?,\n]{0,120}") {
            let spans = split_sentences(&text);
            let mut last = 0;
            for s in &spans {
                prop_assert!(s.start >= last && s.end > s.start && s.end <= text.len());
                let piece = &text[s.start..s.end];
                prop_assert_eq!(piece, piece.trim());
                prop_assert!(text[last..s.start].trim().is_empty());
                last = s.end;
            }
            prop_assert!(text[last..].trim().is_empty());
        }
    }
}

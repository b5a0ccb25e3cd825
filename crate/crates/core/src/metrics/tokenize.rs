//! The `13a` tokenizer (mteval-v13a as used by WMT) and the whitespace
//! conventions shared by the string metrics.

use std::sync::LazyLock;

use regex::Regex;

struct Rule {
    re: Regex,
    replacement: &'static str,
}

static RULES_13A: LazyLock<[Rule; 4]> = LazyLock::new(|| {
    let rule = |re: &str, replacement| Rule {
        re: Regex::new(re).expect("static regex"),
        replacement,
    };
    [
        // symbols: { | } ~  [ \ ] ^ _ `  space ! " # $ % &  ( ) * +  : ; < = > ? @  /
        rule(r"([\x7B-\x7E\x5B-\x60\x20-\x26\x28-\x2B\x3A-\x40/])", " ${1} "),
        // period and comma unless preceded by a digit
        rule(r"([^0-9])([\.,])", "${1} ${2} "),
        // period and comma unless followed by a digit
        rule(r"([\.,])([^0-9])", " ${1} ${2}"),
        // dash when preceded by a digit
        rule(r"([0-9])(-)", "${1} ${2} "),
    ]
});

/// Whitespace as understood by Python's `str.split()`: Unicode White_Space
/// plus the ASCII information separators U+001C..U+001F.
pub fn is_split_whitespace(c: char) -> bool {
    c.is_whitespace() || ('\u{1c}'..='\u{1f}').contains(&c)
}

pub fn split_words(s: &str) -> impl Iterator<Item = &str> {
    s.split(is_split_whitespace).filter(|w| !w.is_empty())
}

pub fn trim_end_whitespace(s: &str) -> &str {
    s.trim_end_matches(is_split_whitespace)
}

/// Tokenizes one line with the 13a rules and returns the space-joined tokens.
pub fn tokenize_13a(line: &str) -> String {
    let mut line = line.replace("<skipped>", "").replace("-\n", "").replace('\n', " ");
    if line.contains('&') {
        line = line
            .replace("&quot;", "\"")
            .replace("&amp;", "&")
            .replace("&lt;", "<")
            .replace("&gt;", ">");
    }
    let mut line = format!(" {line} ");
    for rule in RULES_13A.iter() {
        if let std::borrow::Cow::Owned(s) = rule.re.replace_all(&line, rule.replacement) {
            line = s;
        }
    }
    split_words(&line).collect::<Vec<_>>().join(" ")
}

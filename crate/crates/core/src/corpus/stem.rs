//! The original Porter suffix-stripping algorithm (steps 1a through 5b).
//!
//! Works on ASCII lowercase words. Anything else (digits, non-ASCII letters)
//! is returned untouched. Words of every length are stemmed, including
//! two-letter words, so `"as"` becomes `"a"`.

const STEP2: &[(&str, &str)] = &[
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
];

const STEP3: &[(&str, &str)] = &[
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
];

const STEP4: &[&str] = &[
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ion", "ou",
    "ism", "ate", "iti", "ous", "ive", "ize",
];

/// Stems a single lowercase token.
pub fn porter_stem(word: &str) -> String {
    if word.is_empty() || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_string();
    }
    let mut w = word.as_bytes().to_vec();
    step1a(&mut w);
    step1b(&mut w);
    step1c(&mut w);
    step2(&mut w);
    step3(&mut w);
    step4(&mut w);
    step5a(&mut w);
    step5b(&mut w);
    // only ASCII lowercase bytes are ever written
    String::from_utf8(w).expect("stemmer produced non-ASCII output")
}

fn is_consonant(s: &[u8], i: usize) -> bool {
    match s[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(s, i - 1),
        _ => true,
    }
}

/// Number of VC sequences in `[C](VC){m}[V]`.
fn measure(s: &[u8]) -> usize {
    let n = s.len();
    let mut i = 0;
    while i < n && is_consonant(s, i) {
        i += 1;
    }
    let mut m = 0;
    loop {
        while i < n && !is_consonant(s, i) {
            i += 1;
        }
        if i >= n {
            return m;
        }
        while i < n && is_consonant(s, i) {
            i += 1;
        }
        m += 1;
    }
}

fn has_vowel(s: &[u8]) -> bool {
    (0..s.len()).any(|i| !is_consonant(s, i))
}

fn ends_double_consonant(s: &[u8]) -> bool {
    let n = s.len();
    n >= 2 && s[n - 1] == s[n - 2] && is_consonant(s, n - 1)
}

/// `*o`: ends consonant-vowel-consonant, the last not w, x or y.
fn ends_cvc(s: &[u8]) -> bool {
    let n = s.len();
    n >= 3
        && is_consonant(s, n - 3)
        && !is_consonant(s, n - 2)
        && is_consonant(s, n - 1)
        && !matches!(s[n - 1], b'w' | b'x' | b'y')
}

fn replace_suffix(w: &mut Vec<u8>, suffix_len: usize, replacement: &str) {
    w.truncate(w.len() - suffix_len);
    w.extend_from_slice(replacement.as_bytes());
}

/// Index of the rule whose suffix is the longest match, if any.
fn longest_match<'a, I>(w: &[u8], suffixes: I) -> Option<(usize, &'a str)>
where
    I: IntoIterator<Item = &'a str>,
{
    suffixes
        .into_iter()
        .enumerate()
        .filter(|(_, suf)| w.len() > suf.len() && w.ends_with(suf.as_bytes()))
        .max_by_key(|(_, suf)| suf.len())
}

fn step1a(w: &mut Vec<u8>) {
    if w.ends_with(b"sses") || w.ends_with(b"ies") {
        w.truncate(w.len() - 2);
    } else if w.ends_with(b"ss") {
    } else if w.ends_with(b"s") {
        w.pop();
    }
}

fn step1b(w: &mut Vec<u8>) {
    if w.ends_with(b"eed") {
        if measure(&w[..w.len() - 3]) > 0 {
            w.pop();
        }
        return;
    }
    let stripped = if w.ends_with(b"ed") && has_vowel(&w[..w.len() - 2]) {
        w.truncate(w.len() - 2);
        true
    } else if w.ends_with(b"ing") && has_vowel(&w[..w.len() - 3]) {
        w.truncate(w.len() - 3);
        true
    } else {
        false
    };
    if !stripped {
        return;
    }
    if w.ends_with(b"at") || w.ends_with(b"bl") || w.ends_with(b"iz") {
        w.push(b'e');
    } else if ends_double_consonant(w) && !matches!(w[w.len() - 1], b'l' | b's' | b'z') {
        w.pop();
    } else if measure(w) == 1 && ends_cvc(w) {
        w.push(b'e');
    }
}

fn step1c(w: &mut [u8]) {
    let n = w.len();
    if n > 1 && w[n - 1] == b'y' && has_vowel(&w[..n - 1]) {
        w[n - 1] = b'i';
    }
}

fn step2(w: &mut Vec<u8>) {
    apply_mapping(w, STEP2);
}

fn step3(w: &mut Vec<u8>) {
    apply_mapping(w, STEP3);
}

/// One rule per step: the longest matching suffix decides, and if its
/// `m > 0` condition fails nothing else in the step is tried.
fn apply_mapping(w: &mut Vec<u8>, rules: &[(&str, &str)]) {
    if let Some((i, suffix)) = longest_match(w, rules.iter().map(|(s, _)| *s)) {
        if measure(&w[..w.len() - suffix.len()]) > 0 {
            replace_suffix(w, suffix.len(), rules[i].1);
        }
    }
}

fn step4(w: &mut Vec<u8>) {
    if let Some((_, suffix)) = longest_match(w, STEP4.iter().copied()) {
        let stem = &w[..w.len() - suffix.len()];
        let ok = measure(stem) > 1
            && (suffix != "ion" || matches!(stem.last(), Some(b's') | Some(b't')));
        if ok {
            w.truncate(stem.len());
        }
    }
}

fn step5a(w: &mut Vec<u8>) {
    if w.len() > 1 && w.ends_with(b"e") {
        let stem = &w[..w.len() - 1];
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            w.pop();
        }
    }
}

fn step5b(w: &mut Vec<u8>) {
    if w.ends_with(b"l") && ends_double_consonant(w) && measure(w) > 1 {
        w.pop();
    }
}

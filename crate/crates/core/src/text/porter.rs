//! The original Porter (1980) suffix-stripping stemmer.
//!
//! Operates on lowercase ASCII words. In each of steps 2–4 only the longest
//! matching suffix is considered; if its condition fails the step does
//! nothing. Words of two letters or fewer are returned unchanged.

/// Stems a lowercase ASCII word. Anything containing other bytes is
/// returned as-is.
pub fn stem(word: &str) -> String {
    if word.len() <= 2 || !word.bytes().all(|b| b.is_ascii_lowercase()) {
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
    // only ASCII bytes were ever written
    String::from_utf8(w).expect("ascii")
}

fn is_consonant(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

/// Number of VC sequences in `[C](VC)^m[V]`.
fn measure(w: &[u8]) -> usize {
    let n = w.len();
    let mut i = 0;
    while i < n && is_consonant(w, i) {
        i += 1;
    }
    let mut m = 0;
    loop {
        while i < n && !is_consonant(w, i) {
            i += 1;
        }
        if i >= n {
            return m;
        }
        while i < n && is_consonant(w, i) {
            i += 1;
        }
        m += 1;
    }
}

fn has_vowel(w: &[u8]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

fn ends_double_consonant(w: &[u8]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

/// `*o`: stem ends consonant-vowel-consonant, last not w, x or y.
fn ends_cvc(w: &[u8]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], b'w' | b'x' | b'y')
}

fn stem_len(w: &[u8], suffix: &str) -> Option<usize> {
    w.ends_with(suffix.as_bytes())
        .then(|| w.len() - suffix.len())
}

fn replace(w: &mut Vec<u8>, stem_len: usize, with: &str) {
    w.truncate(stem_len);
    w.extend_from_slice(with.as_bytes());
}

fn step1a(w: &mut Vec<u8>) {
    if let Some(s) = stem_len(w, "sses") {
        replace(w, s, "ss");
    } else if let Some(s) = stem_len(w, "ies") {
        replace(w, s, "i");
    } else if w.ends_with(b"ss") {
    } else if let Some(s) = stem_len(w, "s") {
        w.truncate(s);
    }
}

fn step1b(w: &mut Vec<u8>) {
    if let Some(s) = stem_len(w, "eed") {
        if measure(&w[..s]) > 0 {
            w.truncate(s + 2);
        }
        return;
    }
    let stripped = ["ed", "ing"]
        .iter()
        .any(|suffix| match stem_len(w, suffix) {
            Some(s) if has_vowel(&w[..s]) => {
                w.truncate(s);
                true
            }
            _ => false,
        });
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
    if w[n - 1] == b'y' && has_vowel(&w[..n - 1]) {
        w[n - 1] = b'i';
    }
}

/// Applies the longest matching rule from `rules` if the remaining stem
/// has measure greater than `min_measure`.
fn longest_rule(w: &mut Vec<u8>, rules: &[(&str, &str)], min_measure: usize) {
    let best = rules
        .iter()
        .filter(|(suffix, _)| w.ends_with(suffix.as_bytes()))
        .max_by_key(|(suffix, _)| suffix.len());
    if let Some((suffix, with)) = best {
        let s = w.len() - suffix.len();
        if measure(&w[..s]) > min_measure {
            replace(w, s, with);
        }
    }
}

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

fn step2(w: &mut Vec<u8>) {
    longest_rule(w, STEP2, 0);
}

fn step3(w: &mut Vec<u8>) {
    longest_rule(w, STEP3, 0);
}

fn step4(w: &mut Vec<u8>) {
    let Some(suffix) = STEP4
        .iter()
        .filter(|s| w.ends_with(s.as_bytes()))
        .max_by_key(|s| s.len())
    else {
        return;
    };
    let s = w.len() - suffix.len();
    if measure(&w[..s]) <= 1 {
        return;
    }
    if *suffix == "ion" && !(s > 0 && matches!(w[s - 1], b's' | b't')) {
        return;
    }
    w.truncate(s);
}

fn step5a(w: &mut Vec<u8>) {
    if let Some(s) = stem_len(w, "e") {
        let m = measure(&w[..s]);
        if m > 1 || (m == 1 && !ends_cvc(&w[..s])) {
            w.truncate(s);
        }
    }
}

fn step5b(w: &mut Vec<u8>) {
    if w.ends_with(b"l") && ends_double_consonant(w) && measure(w) > 1 {
        w.pop();
    }
}

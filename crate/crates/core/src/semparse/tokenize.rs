/// Lowercases and splits an utterance. Punctuation becomes separate tokens
/// and a possessive `'s` is split off its word. Digits joined by `.` stay
/// together so room labels like `3.510` survive.
pub fn tokenize(utterance: &str) -> Vec<String> {
    let chars: Vec<char> = utterance.to_lowercase().chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<String>| {
        if !cur.is_empty() {
            out.push(std::mem::take(cur));
        }
    };
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_alphanumeric() {
            cur.push(c);
        } else if c == '\'' || c == '’' {
            let s_next = chars.get(i + 1) == Some(&'s');
            let ends = chars.get(i + 2).is_none_or(|n| !n.is_alphanumeric());
            if s_next && ends && !cur.is_empty() {
                flush(&mut cur, &mut out);
                out.push("'s".to_string());
                i += 2;
                continue;
            } else if !cur.is_empty() && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric()) {
                cur.push('\'');
            } else {
                flush(&mut cur, &mut out);
                out.push("'".to_string());
            }
        } else if c == '.'
            && cur.chars().last().is_some_and(|p| p.is_ascii_digit())
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit())
        {
            cur.push(c);
        } else if c.is_whitespace() {
            flush(&mut cur, &mut out);
        } else {
            flush(&mut cur, &mut out);
            out.push(c.to_string());
        }
        i += 1;
    }
    flush(&mut cur, &mut out);
    out
}

/// True for tokens made only of punctuation (the possessive excepted).
pub fn is_punctuation(token: &str) -> bool {
    token != "'s" && !token.is_empty() && token.chars().all(|c| !c.is_alphanumeric())
}

/// Removes markdown fence lines (```` ``` ```` with or without a language tag).
fn strip_fences(raw: &str) -> String {
    raw.lines().filter(|l| !l.trim_start().starts_with("```")).collect::<Vec<_>>().join("\n")
}

/// End (exclusive) of the balanced object starting at `start`, if it closes.
fn balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    let (mut depth, mut quoted, mut escaped) = (0usize, false, false);
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if quoted {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => quoted = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => quoted = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

/// The longest balanced `{...}` substring after stripping code fences. Braces inside JSON
/// strings do not count. Ties go to the earliest.
pub fn extract_json(raw: &str) -> Result<String, String> {
    let text = strip_fences(raw);
    let bytes = text.as_bytes();
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'{' {
            i += 1;
            continue;
        }
        match balanced_end(bytes, i) {
            Some(end) => {
                if best.map_or(true, |(s, e)| end - i > e - s) {
                    best = Some((i, end));
                }
                i = end;
            }
            None => i += 1,
        }
    }
    best.map(|(s, e)| text[s..e].to_string()).ok_or_else(|| "no balanced JSON object in the reply".to_string())
}

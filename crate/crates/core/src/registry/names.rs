use alloc::string::String;
use alloc::vec::Vec;

/// Largest edit distance accepted as a fuzzy match.
pub const FUZZY_THRESHOLD: usize = 2;

/// Case-folds and strips whitespace, hyphens and underscores.
pub fn normalize(raw: &str) -> String {
    raw.chars()
        .filter(|c| !c.is_whitespace() && *c != '-' && *c != '_')
        .flat_map(char::to_lowercase)
        .collect()
}

/// Levenshtein distance over chars (insert, delete, substitute; unit costs).
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// How an exact resolution matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchVia {
    /// The raw text is the canonical name verbatim.
    Canonical,
    /// Equal to the canonical name after normalisation.
    Normalized,
    /// Equal to an alias after normalisation.
    Alias,
}

/// Outcome of resolving a raw name against a set of named entries.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolution<T> {
    Exact { item: T, via: MatchVia },
    Fuzzy { item: T, distance: usize },
    /// Up to three nearest entries ordered by distance, then name.
    Unknown { nearest: Vec<(T, usize)> },
}

impl<T> Resolution<T> {
    pub fn item(&self) -> Option<&T> {
        match self {
            Resolution::Exact { item, .. } | Resolution::Fuzzy { item, .. } => Some(item),
            Resolution::Unknown { .. } => None,
        }
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> Resolution<U> {
        match self {
            Resolution::Exact { item, via } => Resolution::Exact { item: f(item), via },
            Resolution::Fuzzy { item, distance } => Resolution::Fuzzy { item: f(item), distance },
            Resolution::Unknown { nearest } => Resolution::Unknown {
                nearest: nearest.into_iter().map(|(t, d)| (f(t), d)).collect(),
            },
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Resolution::Exact { .. })
    }
}

/// A resolvable entry: its canonical name plus aliases.
pub(crate) struct NameEntry<'a> {
    pub canonical: &'a str,
    pub aliases: &'a [String],
}

/// Shared resolution policy for components and ports. Returns indices into `entries`.
pub(crate) fn resolve_among(entries: &[NameEntry<'_>], raw: &str) -> Resolution<usize> {
    let key = normalize(raw);
    let trimmed = raw.trim();
    if key.is_empty() {
        return Resolution::Unknown { nearest: Vec::new() };
    }
    for (idx, e) in entries.iter().enumerate() {
        if normalize(e.canonical) == key {
            let via = if trimmed == e.canonical { MatchVia::Canonical } else { MatchVia::Normalized };
            return Resolution::Exact { item: idx, via };
        }
    }
    for (idx, e) in entries.iter().enumerate() {
        if e.aliases.iter().any(|a| normalize(a) == key) {
            return Resolution::Exact { item: idx, via: MatchVia::Alias };
        }
    }
    let mut scored: Vec<(usize, usize)> = entries
        .iter()
        .enumerate()
        .map(|(idx, e)| {
            let d = core::iter::once(e.canonical)
                .chain(e.aliases.iter().map(String::as_str))
                .map(|n| levenshtein(&key, &normalize(n)))
                .min()
                .unwrap_or(usize::MAX);
            (idx, d)
        })
        .collect();
    scored.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| entries[a.0].canonical.cmp(entries[b.0].canonical)));
    if let Some(&(best, d)) = scored.first() {
        let unique = scored.get(1).map_or(true, |&(_, d2)| d2 > d);
        if d <= FUZZY_THRESHOLD && unique {
            return Resolution::Fuzzy { item: best, distance: d };
        }
    }
    scored.truncate(3);
    Resolution::Unknown { nearest: scored }
}

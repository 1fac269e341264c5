//! Controlled vocabularies for licenses and programming languages.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Bundled SPDX license-list snapshot (license-list-data JSON layout).
pub const BUNDLED_LICENSES: &str = include_str!("../data/spdx-licenses.json");
/// Bundled programming-language snapshot (flat list of names).
pub const BUNDLED_LANGUAGES: &str = include_str!("../data/languages.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VocabularyKind {
    License,
    Language,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed vocabulary: {0}")]
pub struct MalformedVocabulary(pub String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    kind: VocabularyKind,
    entries: Vec<VocabEntry>,
    // Deprecated SPDX ids: still recognized, never suggested.
    deprecated: BTreeSet<String>,
}

impl Vocabulary {
    pub fn kind(&self) -> VocabularyKind {
        self.kind
    }

    /// Active entries in vocabulary order.
    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&VocabEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Whether `id` is a known identifier, deprecated ones included.
    pub fn contains(&self, id: &str) -> bool {
        self.get(id).is_some() || self.deprecated.contains(id)
    }

    pub fn is_deprecated(&self, id: &str) -> bool {
        self.deprecated.contains(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Reads a vocabulary snapshot.
///
/// Licenses use the SPDX `licenses.json` layout (`licenses[].licenseId`,
/// `licenses[].name`, `isDeprecatedLicenseId`). Languages are a JSON array
/// of names; objects with a `name` key are accepted too.
pub fn load_vocabulary(kind: VocabularyKind, source: &str) -> Result<Vocabulary, MalformedVocabulary> {
    if source.trim().is_empty() {
        return Err(MalformedVocabulary("empty document".into()));
    }
    let doc: Value = serde_json::from_str(source).map_err(|e| MalformedVocabulary(e.to_string()))?;
    let mut vocab = Vocabulary { kind, entries: Vec::new(), deprecated: BTreeSet::new() };
    let mut seen = BTreeSet::new();
    match kind {
        VocabularyKind::License => {
            let licenses = doc
                .get("licenses")
                .and_then(Value::as_array)
                .ok_or_else(|| MalformedVocabulary("missing `licenses` array".into()))?;
            for item in licenses {
                let id = item
                    .get("licenseId")
                    .and_then(Value::as_str)
                    .ok_or_else(|| MalformedVocabulary("license without `licenseId`".into()))?;
                let label = item.get("name").and_then(Value::as_str).unwrap_or(id);
                if item.get("isDeprecatedLicenseId").and_then(Value::as_bool) == Some(true) {
                    vocab.deprecated.insert(id.into());
                } else if seen.insert(id.to_string()) {
                    vocab.entries.push(VocabEntry { id: id.into(), label: label.into() });
                }
            }
        }
        VocabularyKind::Language => {
            let names = doc.as_array().ok_or_else(|| MalformedVocabulary("expected a JSON array".into()))?;
            for item in names {
                let name = match item {
                    Value::String(s) => s.as_str(),
                    Value::Object(o) => o
                        .get("name")
                        .and_then(Value::as_str)
                        .ok_or_else(|| MalformedVocabulary("language object without `name`".into()))?,
                    _ => return Err(MalformedVocabulary("language entries must be strings".into())),
                };
                let name = name.trim();
                if !name.is_empty() && seen.insert(name.to_string()) {
                    vocab.entries.push(VocabEntry { id: name.into(), label: name.into() });
                }
            }
        }
    }
    if vocab.entries.is_empty() {
        return Err(MalformedVocabulary("no entries".into()));
    }
    Ok(vocab)
}

/// Both vocabularies the curation form and validation rely on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabularySet {
    pub licenses: Vocabulary,
    pub languages: Vocabulary,
}

impl VocabularySet {
    pub fn bundled() -> Self {
        VocabularySet {
            licenses: load_vocabulary(VocabularyKind::License, BUNDLED_LICENSES).expect("bundled SPDX snapshot"),
            languages: load_vocabulary(VocabularyKind::Language, BUNDLED_LANGUAGES).expect("bundled language list"),
        }
    }

    pub fn get(&self, kind: VocabularyKind) -> &Vocabulary {
        match kind {
            VocabularyKind::License => &self.licenses,
            VocabularyKind::Language => &self.languages,
        }
    }
}

/// Rank of an entry for a lowercased query, `None` when it does not match.
fn rank(entry: &VocabEntry, query: &str) -> Option<u8> {
    let id = entry.id.to_lowercase();
    let label = entry.label.to_lowercase();
    if id.starts_with(query) {
        Some(0)
    } else if label.starts_with(query) {
        Some(1)
    } else if id.contains(query) || label.contains(query) {
        Some(2)
    } else {
        None
    }
}

/// Case-insensitive lookup for autocomplete.
///
/// Id-prefix matches come first, then label-prefix, then substring matches;
/// each group keeps vocabulary order. An empty query yields the first
/// `limit` entries.
pub fn filter_vocabulary<'a>(vocab: &'a Vocabulary, query: &str, limit: usize) -> Vec<&'a VocabEntry> {
    let query = query.trim().to_lowercase();
    let mut groups: [Vec<&VocabEntry>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for entry in &vocab.entries {
        if let Some(r) = rank(entry, &query) {
            let group = &mut groups[usize::from(r)];
            if group.len() < limit {
                group.push(entry);
            }
        }
    }
    groups.into_iter().flatten().take(limit).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_licenses_resolve_and_skip_deprecated() {
        let set = VocabularySet::bundled();
        assert!(set.licenses.get("MIT").is_some());
        assert!(!set.licenses.contains("MIT-FAKE"));
        // Deprecated in SPDX but what GitHub reports for AGPL repositories.
        assert!(set.licenses.contains("AGPL-3.0"));
        assert!(set.licenses.is_deprecated("AGPL-3.0"));
        assert!(set.licenses.get("AGPL-3.0").is_none());
        assert!(set.licenses.get("AGPL-3.0-only").is_some());
    }

    #[test]
    fn empty_and_broken_sources() {
        assert!(load_vocabulary(VocabularyKind::License, "").is_err());
        assert!(load_vocabulary(VocabularyKind::License, "{\"licenses\": []}").is_err());
        assert!(load_vocabulary(VocabularyKind::Language, "[1, 2]").is_err());
        assert!(load_vocabulary(VocabularyKind::Language, "{}").is_err());
        let v = load_vocabulary(VocabularyKind::Language, r#"["Rust", {"name": "Go"}, "Rust"]"#).unwrap();
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn filter_ranks_prefix_first() {
        let v = load_vocabulary(VocabularyKind::Language, r#"["Cython", "Jython", "Python", "PyPy"]"#).unwrap();
        let hits: Vec<_> = filter_vocabulary(&v, "pyt", 10).into_iter().map(|e| e.id.as_str()).collect();
        assert_eq!(hits, ["Python"]);
        let hits: Vec<_> = filter_vocabulary(&v, "YTH", 10).into_iter().map(|e| e.id.as_str()).collect();
        assert_eq!(hits, ["Cython", "Jython", "Python"]);
        assert_eq!(filter_vocabulary(&v, "", 2).len(), 2);
        assert!(filter_vocabulary(&v, "zzzz-no-match", 5).is_empty());
        assert!(filter_vocabulary(&v, "py", 0).is_empty());
    }

    #[test]
    fn license_prefix_on_label_ranks_after_id() {
        let set = VocabularySet::bundled();
        let hits = filter_vocabulary(&set.licenses, "mit", 3);
        assert_eq!(hits[0].id, "MIT");
    }
}

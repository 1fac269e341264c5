//! Declarative crosswalks from raw source records onto CodeMeta fields.
//!
//! A [`CrosswalkTable`] is data: an ordered list of [`MappingRule`]s, each
//! naming a path into the source record, a target field and a transform.
//! The built-in GitHub and CFF tables ship embedded and can be replaced by
//! tables loaded from JSON.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::codemeta::{bare_license_id, parse_codemeta_value};
use crate::date::normalize_date;
use crate::harvest::SourceRecord;
use crate::model::{CodeMetaRecord, Field, FieldKind, FieldValue, Person, Role, RoleSet, SourceKind};

pub const BUILTIN_GITHUB_TABLE: &str = include_str!("../data/crosswalk-github.json");
pub const BUILTIN_CFF_TABLE: &str = include_str!("../data/crosswalk-cff.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transform {
    /// Text as-is; for list fields, a string or a list of strings.
    Identity,
    /// ISO-8601 timestamp to its `YYYY-MM-DD` prefix.
    DateTruncate,
    /// SPDX identifier or URL to the bare identifier; `NOASSERTION` is absent.
    SpdxNormalize,
    /// Object keys ordered by descending value (byte counts), ties by key.
    LanguageMapKeys,
    /// Person objects (or bare names) to persons with the given role.
    PersonList(Role),
    /// URL with a suffix appended.
    UrlDerive(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingRule {
    /// Dot-separated key path. `key[]` walks every array element,
    /// `key[field=value]` only elements whose `field` equals `value`.
    pub source_path: String,
    pub target: Field,
    pub transform: Transform,
    /// Only consulted when an earlier rule for the same target did not fire.
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("crosswalk table is not valid JSON: {0}")]
    Json(String),
    #[error("rule {index}: bad source path `{path}`")]
    BadPath { index: usize, path: String },
    #[error("rule {index}: target `{target}` already mapped; mark the rule as a fallback")]
    DuplicateTarget { index: usize, target: Field },
    #[error("rule {index}: fallback for `{target}` without a primary rule")]
    OrphanFallback { index: usize, target: Field },
    #[error("table is for {found}, expected {expected}")]
    WrongSource { expected: SourceKind, found: SourceKind },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosswalkTable {
    pub source: SourceKind,
    pub rules: Vec<MappingRule>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TableDoc {
    Full(CrosswalkTable),
    Rules { rules: Vec<MappingRule> },
    Bare(Vec<MappingRule>),
}

impl CrosswalkTable {
    /// Loads a table for `source`. Accepts `{"source", "rules"}`,
    /// `{"rules"}` or a bare array of rules.
    pub fn from_json(source: SourceKind, text: &str) -> Result<Self, TableError> {
        let doc: TableDoc = serde_json::from_str(text).map_err(|e| TableError::Json(e.to_string()))?;
        let table = match doc {
            TableDoc::Full(t) if t.source != source => {
                return Err(TableError::WrongSource { expected: source, found: t.source })
            }
            TableDoc::Full(t) => t,
            TableDoc::Rules { rules } | TableDoc::Bare(rules) => CrosswalkTable { source, rules },
        };
        table.check()?;
        Ok(table)
    }

    pub fn builtin_github() -> Self {
        Self::from_json(SourceKind::GitHubApi, BUILTIN_GITHUB_TABLE).expect("embedded GitHub table")
    }

    pub fn builtin_cff() -> Self {
        Self::from_json(SourceKind::CffFile, BUILTIN_CFF_TABLE).expect("embedded CFF table")
    }

    fn check(&self) -> Result<(), TableError> {
        for (index, rule) in self.rules.iter().enumerate() {
            if parse_path(&rule.source_path).is_none() {
                return Err(TableError::BadPath { index, path: rule.source_path.clone() });
            }
            let earlier = self.rules[..index].iter().any(|r| r.target == rule.target);
            match (earlier, rule.fallback) {
                (true, false) => return Err(TableError::DuplicateTarget { index, target: rule.target }),
                (false, true) => return Err(TableError::OrphanFallback { index, target: rule.target }),
                _ => {}
            }
        }
        Ok(())
    }
}

/// The crosswalk tables in use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crosswalks {
    pub github: CrosswalkTable,
    pub cff: CrosswalkTable,
}

impl Default for Crosswalks {
    fn default() -> Self {
        Crosswalks { github: CrosswalkTable::builtin_github(), cff: CrosswalkTable::builtin_cff() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Selector {
    All,
    Where(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Segment {
    key: String,
    selector: Option<Selector>,
}

fn parse_path(path: &str) -> Option<Vec<Segment>> {
    if path.is_empty() {
        return None;
    }
    path.split('.')
        .map(|part| {
            let Some(open) = part.find('[') else {
                return (!part.is_empty()).then(|| Segment { key: part.into(), selector: None });
            };
            let key = &part[..open];
            let inner = part[open + 1..].strip_suffix(']')?;
            if key.is_empty() {
                return None;
            }
            let selector = if inner.is_empty() {
                Selector::All
            } else {
                let (k, v) = inner.split_once('=')?;
                Selector::Where(k.into(), v.into())
            };
            Some(Segment { key: key.into(), selector: Some(selector) })
        })
        .collect()
}

fn resolve<'v>(root: &'v Value, path: &[Segment]) -> Vec<&'v Value> {
    let mut current = alloc::vec![root];
    for segment in path {
        let mut next = Vec::new();
        for value in current {
            let Some(child) = value.get(&segment.key) else { continue };
            match (&segment.selector, child) {
                (None, _) => next.push(child),
                (Some(Selector::All), Value::Array(items)) => next.extend(items.iter()),
                (Some(Selector::Where(k, v)), Value::Array(items)) => {
                    next.extend(items.iter().filter(|item| item.get(k).and_then(Value::as_str) == Some(v.as_str())))
                }
                (Some(_), _) => {}
            }
        }
        current = next;
    }
    current.retain(|v| !v.is_null());
    current
}

/// Text of a scalar leaf; empty strings and `NOASSERTION` count as absent.
fn leaf_text(value: &Value) -> Option<String> {
    let text = match value {
        Value::String(s) => s.trim().to_string(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        _ => return None,
    };
    (!text.is_empty() && text != "NOASSERTION").then_some(text)
}

/// Canonical SPDX form: bare identifier, `None` for no assertion.
pub fn spdx_normalize(value: &str) -> Option<String> {
    let id = bare_license_id(value);
    (!id.is_empty() && id != "NOASSERTION").then(|| id.into())
}

fn person_from_value(value: &Value, role: Role) -> Option<Person> {
    let roles = RoleSet::of(role);
    let person = match value {
        Value::Object(obj) => {
            let text = |keys: &[&str]| keys.iter().find_map(|k| obj.get(*k).and_then(leaf_text));
            Person {
                given_name: text(&["given-names", "givenName"]),
                family_name: text(&["family-names", "familyName", "name", "login"]),
                email: text(&["email"]),
                id: text(&["orcid", "@id"]),
                affiliation: text(&["affiliation"]),
                roles,
            }
        }
        other => Person { family_name: leaf_text(other), roles, ..Person::default() },
    };
    person.is_identifiable().then_some(person)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkipReason {
    /// The source path matched nothing.
    Unresolved,
    /// Matched, but only empty or `NOASSERTION` values.
    Empty,
    /// Matched a value the transform cannot use.
    Invalid,
    /// An earlier rule already populated the target.
    Shadowed,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::Unresolved => "unresolved",
            SkipReason::Empty => "empty",
            SkipReason::Invalid => "invalid",
            SkipReason::Shadowed => "shadowed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub source_path: String,
    pub target: Field,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<SkipReason>,
}

impl RuleOutcome {
    pub fn fired(&self) -> bool {
        self.skipped.is_none()
    }
}

/// Which rules fired for one source record.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleReport {
    pub source: Option<SourceKind>,
    pub rules: Vec<RuleOutcome>,
    /// Type problems met while reading an embedded CodeMeta document.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RuleReport {
    pub fn fired_fields(&self) -> impl Iterator<Item = Field> + '_ {
        self.rules.iter().filter(|r| r.fired()).map(|r| r.target)
    }
}

/// A sparse record produced from one source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialRecord {
    pub record: CodeMetaRecord,
    pub source: SourceKind,
}

fn transform(rule: &MappingRule, values: &[&Value]) -> Result<FieldValue, SkipReason> {
    let kind = rule.target.kind();
    let first_text = || values.iter().find_map(|v| leaf_text(v)).ok_or(SkipReason::Empty);
    let out = match &rule.transform {
        Transform::Identity if kind == FieldKind::List => {
            let mut items = Vec::new();
            for value in values {
                match value {
                    Value::Array(inner) => items.extend(inner.iter().filter_map(leaf_text)),
                    other => items.extend(leaf_text(other)),
                }
            }
            FieldValue::List(items)
        }
        Transform::Identity => {
            if values.iter().all(|v| v.is_array() || v.is_object()) {
                return Err(SkipReason::Invalid);
            }
            FieldValue::Text(first_text()?)
        }
        Transform::DateTruncate => {
            let text = first_text()?;
            FieldValue::Text(normalize_date(&text).ok_or(SkipReason::Invalid)?)
        }
        Transform::SpdxNormalize => {
            let ids: Vec<String> = values
                .iter()
                .flat_map(|v| match v {
                    Value::Array(items) => items.iter().collect::<Vec<_>>(),
                    other => alloc::vec![*other],
                })
                .filter_map(leaf_text)
                .filter_map(|t| spdx_normalize(&t))
                .collect();
            if ids.is_empty() {
                return Err(SkipReason::Empty);
            }
            FieldValue::Text(ids.join(" OR "))
        }
        Transform::LanguageMapKeys => {
            let Some(map) = values.iter().find_map(|v| v.as_object()) else {
                return Err(SkipReason::Invalid);
            };
            let mut langs: Vec<(&String, u64)> =
                map.iter().map(|(k, v)| (k, v.as_u64().unwrap_or(0))).filter(|(k, _)| !k.trim().is_empty()).collect();
            langs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            FieldValue::List(langs.into_iter().map(|(k, _)| k.clone()).collect())
        }
        Transform::PersonList(role) => {
            let mut persons = Vec::new();
            for value in values {
                match value {
                    Value::Array(items) => persons.extend(items.iter().filter_map(|v| person_from_value(v, *role))),
                    other => persons.extend(person_from_value(other, *role)),
                }
            }
            FieldValue::Persons(persons)
        }
        Transform::UrlDerive(suffix) => {
            let base = first_text()?;
            FieldValue::Text(format!("{}{suffix}", base.trim_end_matches('/')))
        }
    };
    let empty = match &out {
        FieldValue::List(items) => items.is_empty(),
        FieldValue::Persons(p) => p.is_empty(),
        FieldValue::Text(t) => t.is_empty(),
    };
    if empty {
        Err(SkipReason::Empty)
    } else {
        Ok(out)
    }
}

fn run_table(table: &CrosswalkTable, data: &Value) -> (CodeMetaRecord, RuleReport) {
    let mut record = CodeMetaRecord::default();
    let mut report = RuleReport { source: Some(table.source), ..RuleReport::default() };
    for rule in &table.rules {
        let skipped = if record.is_populated(rule.target) {
            Some(SkipReason::Shadowed)
        } else {
            let path = parse_path(&rule.source_path).unwrap_or_default();
            let values = resolve(data, &path);
            if values.is_empty() {
                Some(SkipReason::Unresolved)
            } else {
                match transform(rule, &values) {
                    Ok(value) => match record.set(rule.target, Some(value)) {
                        Ok(()) => None,
                        Err(_) => Some(SkipReason::Invalid),
                    },
                    Err(reason) => Some(reason),
                }
            }
        };
        if let Some(reason) = &skipped {
            log::trace!("{} rule {} -> {} skipped: {reason}", table.source, rule.source_path, rule.target);
        }
        report.rules.push(RuleOutcome { source_path: rule.source_path.clone(), target: rule.target, skipped });
    }
    (record, report)
}

/// Maps one source record onto CodeMeta fields.
///
/// GitHub and CFF records go through their table; CodeMeta files are read
/// directly. Never fails: rules that do not apply are listed as skipped.
pub fn apply_crosswalk(src: &SourceRecord, tables: &Crosswalks) -> (PartialRecord, RuleReport) {
    let (record, report) = match src.source {
        SourceKind::GitHubApi => run_table(&tables.github, &src.data),
        SourceKind::CffFile => run_table(&tables.cff, &src.data),
        SourceKind::CodeMetaFile => {
            let mut report = RuleReport { source: Some(SourceKind::CodeMetaFile), ..RuleReport::default() };
            let record = match parse_codemeta_value(&src.data) {
                Ok(parsed) => {
                    report.notes = parsed.violations.iter().map(ToString::to_string).collect();
                    parsed.record
                }
                Err(e) => {
                    report.notes.push(e.to_string());
                    CodeMetaRecord::default()
                }
            };
            report.rules = record
                .populated_fields()
                .map(|f| RuleOutcome { source_path: f.as_str().into(), target: f, skipped: None })
                .collect();
            (record, report)
        }
    };
    (PartialRecord { record, source: src.source }, report)
}

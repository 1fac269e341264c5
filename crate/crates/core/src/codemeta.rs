//! CodeMeta 2.0 JSON-LD export and import.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde_json::{Map, Value};

use crate::date::normalize_date;
use crate::merge::{merge_person_lists, Precedence};
use crate::model::{dedup_preserving_order, CodeMetaRecord, Field, FieldKind, Person, Role, RoleSet, SourceKind};
use crate::validate::{Rule, Violation};

pub const CODEMETA_CONTEXT: &str = "https://doi.org/10.5063/schema/codemeta-2.0";
pub const SOFTWARE_TYPE: &str = "SoftwareSourceCode";
const SPDX_URL_PREFIX: &str = "https://spdx.org/licenses/";

/// Keys the exporter writes itself; extras never shadow them.
const RESERVED_KEYS: &[&str] = &["@context", "@type", "author", "contributor"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExportError {
    #[error("cannot export a record without a name")]
    MissingName,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    MalformedJson { line: usize, column: usize, message: String },
    #[error("a CodeMeta document must be a JSON object")]
    NotAnObject,
}

/// A parsed document plus the type problems found on the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedCodeMeta {
    pub record: CodeMetaRecord,
    pub violations: Vec<Violation>,
}

fn push_json_str(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
}

struct ObjectWriter<'a> {
    out: &'a mut String,
    first: bool,
}

impl<'a> ObjectWriter<'a> {
    fn open(out: &'a mut String) -> Self {
        out.push('{');
        ObjectWriter { out, first: true }
    }

    fn key(&mut self, key: &str) -> &mut String {
        if !self.first {
            self.out.push(',');
        }
        self.first = false;
        push_json_str(self.out, key);
        self.out.push(':');
        self.out
    }

    fn str(&mut self, key: &str, value: &str) {
        let out = self.key(key);
        push_json_str(out, value);
    }

    fn opt_str(&mut self, key: &str, value: Option<&str>) {
        if let Some(v) = value {
            self.str(key, v);
        }
    }

    fn close(self) {
        self.out.push('}');
    }
}

fn write_str_array(out: &mut String, items: &[String]) {
    out.push('[');
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_json_str(out, item);
    }
    out.push(']');
}

fn write_person(out: &mut String, person: &Person) {
    let mut obj = ObjectWriter::open(out);
    obj.str("@type", "Person");
    obj.opt_str("@id", person.id.as_deref());
    obj.opt_str("givenName", person.given_name.as_deref());
    obj.opt_str("familyName", person.family_name.as_deref());
    obj.opt_str("email", person.email.as_deref());
    if let Some(affiliation) = &person.affiliation {
        let out = obj.key("affiliation");
        let mut org = ObjectWriter::open(out);
        org.str("@type", "Organization");
        org.str("name", affiliation);
        org.close();
    }
    obj.close();
}

fn write_person_array<'p>(out: &mut String, persons: impl Iterator<Item = &'p Person>) {
    out.push('[');
    for (i, person) in persons.enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_person(out, person);
    }
    out.push(']');
}

/// Export form of a license: the SPDX URL for a single identifier, the raw
/// text for an expression.
fn license_export(license: &str) -> String {
    if license.chars().any(char::is_whitespace) || license.contains("://") {
        license.into()
    } else {
        format!("{SPDX_URL_PREFIX}{license}")
    }
}

/// Serializes a record as a compact CodeMeta 2.0 document.
///
/// Keys come in a fixed order: `@context`, `@type`, the modelled fields,
/// `author`, `contributor`, then preserved extras sorted by key. Absent
/// fields are omitted. The text ends with one newline.
pub fn export_codemeta(record: &CodeMetaRecord) -> Result<String, ExportError> {
    if record.name.is_none() {
        return Err(ExportError::MissingName);
    }
    let mut out = String::new();
    let mut obj = ObjectWriter::open(&mut out);
    obj.str("@context", CODEMETA_CONTEXT);
    obj.str("@type", SOFTWARE_TYPE);
    for field in Field::ALL {
        match field.kind() {
            FieldKind::Persons => {}
            FieldKind::List => {
                let items = record.list(field).unwrap_or_default();
                if !items.is_empty() {
                    write_str_array(obj.key(field.as_str()), items);
                }
            }
            FieldKind::License => {
                if let Some(license) = record.text(field) {
                    obj.str(field.as_str(), &license_export(license));
                }
            }
            FieldKind::Text | FieldKind::Url | FieldKind::Date => obj.opt_str(field.as_str(), record.text(field)),
        }
    }
    let with_role = |role: Role| record.persons.iter().filter(move |p| p.roles.contains(role));
    if with_role(Role::Author).next().is_some() {
        write_person_array(obj.key("author"), with_role(Role::Author));
    }
    if with_role(Role::Contributor).next().is_some() {
        // Persons with both roles first so that a re-import reproduces the
        // same order.
        let both = with_role(Role::Contributor).filter(|p| p.roles.contains(Role::Author));
        let pure = with_role(Role::Contributor).filter(|p| !p.roles.contains(Role::Author));
        write_person_array(obj.key("contributor"), both.chain(pure));
    }
    for (key, value) in &record.extras {
        let shadows = key.parse::<Field>().is_ok_and(|f| record.is_populated(f));
        if RESERVED_KEYS.contains(&key.as_str()) || shadows {
            continue;
        }
        let out = obj.key(key);
        out.push_str(&serde_json::to_string(value).expect("JSON values always serialize"));
    }
    obj.close();
    out.push('\n');
    Ok(out)
}

fn malformed(err: &serde_json::Error) -> ParseError {
    ParseError::MalformedJson { line: err.line(), column: err.column(), message: err.to_string() }
}

/// Parses a CodeMeta document from text.
pub fn parse_codemeta(text: &str) -> Result<ParsedCodeMeta, ParseError> {
    let value: Value = serde_json::from_str(text).map_err(|e| malformed(&e))?;
    parse_codemeta_value(&value)
}

/// Strips the SPDX URL decorations from a license reference.
pub fn bare_license_id(license: &str) -> &str {
    let s = license.trim();
    let s = s.strip_prefix(SPDX_URL_PREFIX).or_else(|| s.strip_prefix("http://spdx.org/licenses/")).unwrap_or(s);
    s.strip_suffix(".html").or_else(|| s.strip_suffix(".json")).unwrap_or(s)
}

fn scalar_text(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => {
            let t = s.trim();
            (!t.is_empty()).then(|| t.to_string())
        }
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn text_list(value: &Value) -> Option<Vec<String>> {
    match value {
        Value::String(_) | Value::Number(_) => Some(scalar_text(value).into_iter().collect()),
        Value::Array(items) => {
            let mut out = Vec::new();
            for item in items {
                match item {
                    Value::String(_) | Value::Number(_) => out.extend(scalar_text(item)),
                    Value::Object(o) => out.extend(o.get("name").and_then(scalar_text)),
                    _ => return None,
                }
            }
            Some(out)
        }
        _ => None,
    }
}

fn license_text(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => scalar_text(&Value::String(bare_license_id(s).into())),
        Value::Object(o) => ["@id", "url", "identifier"].iter().find_map(|k| o.get(*k)).and_then(license_text),
        Value::Array(items) => {
            let ids: Option<Vec<String>> = items.iter().map(license_text).collect();
            ids.filter(|ids| !ids.is_empty()).map(|ids| ids.join(" OR "))
        }
        _ => None,
    }
}

fn person_from_json(obj: &Map<String, Value>, roles: RoleSet) -> Person {
    let text = |key: &str| obj.get(key).and_then(scalar_text);
    let is_org = obj.get("@type").and_then(Value::as_str) == Some("Organization");
    let affiliation = obj.get("affiliation").and_then(|a| match a {
        Value::Object(o) => o.get("name").and_then(scalar_text),
        Value::Array(items) => items.iter().find_map(|i| match i {
            Value::Object(o) => o.get("name").and_then(scalar_text),
            other => scalar_text(other),
        }),
        other => scalar_text(other),
    });
    Person {
        given_name: text("givenName"),
        family_name: text("familyName").or_else(|| if is_org { text("name") } else { None }),
        email: text("email"),
        id: text("@id").or_else(|| text("id")),
        affiliation,
        roles,
    }
}

fn persons_from_json(key: &str, value: &Value, role: Role, violations: &mut Vec<Violation>) -> Vec<Person> {
    let items: &[Value] = match value {
        Value::Array(items) => items,
        single => core::slice::from_ref(single),
    };
    let mut persons = Vec::new();
    for (i, item) in items.iter().enumerate() {
        match item {
            Value::Object(obj) => {
                let person = person_from_json(obj, RoleSet::of(role));
                if person.is_identifiable() {
                    persons.push(person);
                } else {
                    violations.push(Violation::new(
                        format!("{key}[{i}]"),
                        Rule::PersonInvariants,
                        "person without family name, email or identifier was skipped",
                    ));
                }
            }
            _ => violations.push(Violation::new(format!("{key}[{i}]"), Rule::WrongType, "expected a person object")),
        }
    }
    persons
}

fn wrong_type(violations: &mut Vec<Violation>, key: &str, expected: &str) {
    violations.push(Violation::new(key, Rule::WrongType, format!("expected {expected}; value kept as-is")));
}

/// Maps a parsed JSON document onto a record.
///
/// Unknown keys, and known keys whose value has an unusable type, are kept
/// in [`CodeMetaRecord::extras`] so that a later export carries them through.
pub fn parse_codemeta_value(value: &Value) -> Result<ParsedCodeMeta, ParseError> {
    let obj = value.as_object().ok_or(ParseError::NotAnObject)?;
    let mut record = CodeMetaRecord::default();
    let mut violations = Vec::new();
    let mut extras = BTreeMap::new();
    let mut authors = Vec::new();
    let mut contributors = Vec::new();

    for (key, value) in obj {
        if value.is_null() || key == "@context" || key == "@type" {
            continue;
        }
        match key.as_str() {
            "author" => authors = persons_from_json(key, value, Role::Author, &mut violations),
            "contributor" => contributors = persons_from_json(key, value, Role::Contributor, &mut violations),
            _ => {
                let Ok(field) = key.parse::<Field>() else {
                    extras.insert(key.clone(), value.clone());
                    continue;
                };
                let ok = match field.kind() {
                    FieldKind::Persons => false,
                    FieldKind::List => text_list(value)
                        .map(|items| match field {
                            Field::Keywords => record.keywords = dedup_preserving_order(items),
                            _ => record.programming_language = dedup_preserving_order(items),
                        })
                        .is_some(),
                    FieldKind::License => {
                        license_text(value).map(|l| record.license = Some(l)).is_some()
                            || value.as_str().is_some_and(|s| s.trim().is_empty())
                    }
                    FieldKind::Date => match value {
                        Value::String(s) if !s.trim().is_empty() => {
                            let date = normalize_date(s).unwrap_or_else(|| s.trim().into());
                            record.set(field, Some(crate::model::FieldValue::Text(date))).is_ok()
                        }
                        Value::String(_) => true,
                        _ => false,
                    },
                    FieldKind::Text | FieldKind::Url => match value {
                        Value::String(_) | Value::Number(_) => {
                            if let Some(t) = scalar_text(value) {
                                record.set(field, Some(crate::model::FieldValue::Text(t))).is_ok()
                            } else {
                                true
                            }
                        }
                        _ => false,
                    },
                };
                if !ok {
                    let expected = match field.kind() {
                        FieldKind::List => "a string or a list of strings",
                        FieldKind::License => "an SPDX identifier or URL",
                        _ => "a string",
                    };
                    wrong_type(&mut violations, key, expected);
                    extras.insert(key.clone(), value.clone());
                }
            }
        }
    }

    record.persons = merge_person_lists(
        &[(authors, SourceKind::CodeMetaFile), (contributors, SourceKind::CodeMetaFile)],
        &Precedence::default(),
    );
    record.extras = extras;
    Ok(ParsedCodeMeta { record, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn minimal_export_is_exact() {
        let record = CodeMetaRecord { name: Some("SMECS".into()), ..CodeMetaRecord::default() };
        assert_eq!(
            export_codemeta(&record).unwrap(),
            "{\"@context\":\"https://doi.org/10.5063/schema/codemeta-2.0\",\"@type\":\"SoftwareSourceCode\",\"name\":\"SMECS\"}\n"
        );
        assert_eq!(export_codemeta(&CodeMetaRecord::default()), Err(ExportError::MissingName));
    }

    #[test]
    fn both_roles_appear_in_both_arrays() {
        let record = CodeMetaRecord {
            name: Some("X".into()),
            persons: vec![Person::with_family_name("Doe", RoleSet::BOTH)],
            ..CodeMetaRecord::default()
        };
        let doc: Value = serde_json::from_str(&export_codemeta(&record).unwrap()).unwrap();
        assert_eq!(doc["author"][0]["familyName"], "Doe");
        assert_eq!(doc["contributor"][0]["familyName"], "Doe");
    }

    #[test]
    fn license_forms() {
        let record = CodeMetaRecord { name: Some("X".into()), license: Some("MIT".into()), ..Default::default() };
        let text = export_codemeta(&record).unwrap();
        assert!(text.contains("\"license\":\"https://spdx.org/licenses/MIT\""));
        assert_eq!(parse_codemeta(&text).unwrap().record.license.as_deref(), Some("MIT"));
        let parsed = parse_codemeta(r#"{"license": "MIT"}"#).unwrap();
        assert_eq!(parsed.record.license.as_deref(), Some("MIT"));
        let parsed = parse_codemeta(r#"{"license": {"@id": "http://spdx.org/licenses/GPL-3.0-only.html"}}"#).unwrap();
        assert_eq!(parsed.record.license.as_deref(), Some("GPL-3.0-only"));
        assert_eq!(bare_license_id(bare_license_id("https://spdx.org/licenses/MIT")), "MIT");
    }

    #[test]
    fn direct_key_mapping() {
        let parsed = parse_codemeta(
            r#"{"@context":"https://doi.org/10.5063/schema/codemeta-2.0","name":"SMECS","version":"1.0"}"#,
        )
        .unwrap();
        assert_eq!(
            parsed.record,
            CodeMetaRecord { name: Some("SMECS".into()), version: Some("1.0".into()), ..Default::default() }
        );
        assert!(parsed.violations.is_empty());
    }

    #[test]
    fn author_and_contributor_fold() {
        let parsed = parse_codemeta(
            r#"{"author":[{"givenName":"J","familyName":"Doe"}],"contributor":[{"givenName":"J","familyName":"Doe"}]}"#,
        )
        .unwrap();
        assert_eq!(parsed.record.persons.len(), 1);
        assert_eq!(parsed.record.persons[0].roles, RoleSet::BOTH);
        assert_eq!(parsed.record.persons[0].given_name.as_deref(), Some("J"));
    }

    #[test]
    fn malformed_and_non_object() {
        match parse_codemeta("not json") {
            Err(ParseError::MalformedJson { line, column, .. }) => assert_eq!((line, column), (1, 2)),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(parse_codemeta("[1]"), Err(ParseError::NotAnObject));
    }

    #[test]
    fn wrong_types_are_reported_and_kept() {
        let parsed =
            parse_codemeta(r#"{"name":"X","description":{"a":1},"author":[42],"funder":{"name":"EU"}}"#).unwrap();
        let rules: Vec<_> = parsed.violations.iter().map(|v| (v.field.as_str(), v.rule)).collect();
        assert_eq!(rules, vec![("author[0]", Rule::WrongType), ("description", Rule::WrongType)]);
        assert!(parsed.record.description.is_none());
        let text = export_codemeta(&parsed.record).unwrap();
        assert!(text.ends_with(",\"description\":{\"a\":1},\"funder\":{\"name\":\"EU\"}}\n"));
        assert_eq!(parse_codemeta(&text).unwrap().record, parsed.record);
    }

    #[test]
    fn dates_and_lists_normalize() {
        let parsed = parse_codemeta(
            r#"{"dateCreated":"2020-01-02T03:04:05Z","keywords":"energy","programmingLanguage":[{"name":"Python"},"Rust","Rust"]}"#,
        )
        .unwrap();
        assert_eq!(parsed.record.date_created.as_deref(), Some("2020-01-02"));
        assert_eq!(parsed.record.keywords, vec!["energy".to_string()]);
        assert_eq!(parsed.record.programming_language, vec!["Python".to_string(), "Rust".into()]);
    }
}

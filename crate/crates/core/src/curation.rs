//! Curation sessions: the merged record plus everything needed to keep its
//! statuses honest while a user edits it.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::codemeta::bare_license_id;
use crate::date::normalize_date;
use crate::harvest::{HarvestReport, RepoLocator};
use crate::merge::{classify_fields, ProvenanceMap, ReviewFields, StatusMap};
use crate::model::{CodeMetaRecord, Field, FieldKind, FieldValue, Person, RoleSet, SourceKind};
use crate::pipeline::Extraction;
use crate::validate::{validate_record, Violation};
use crate::vocab::VocabularySet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurationError {
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("bad value for `{path}`: {message}")]
    BadValue { path: String, message: String },
    #[error("no person at index {0}")]
    NoSuchPerson(usize),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

/// One user edit, addressed by a field path.
///
/// Paths are a field name (`description`, `keywords`, ...), `persons`
/// (replace the list), `persons/add`, `persons/{i}` (replace, or remove
/// with `null`) and `persons/{i}/roles`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldEdit {
    Set(Field, Option<FieldValue>),
    ReplacePersons(Vec<Person>),
    AddPerson(Person),
    UpdatePerson(usize, Person),
    RemovePerson(usize),
    SetRoles(usize, RoleSet),
}

fn bad(path: &str, message: impl Into<String>) -> CurationError {
    CurationError::BadValue { path: path.into(), message: message.into() }
}

fn text_value(path: &str, value: &Value) -> Result<Option<String>, CurationError> {
    match value {
        Value::Null => Ok(None),
        Value::String(s) => {
            let t = s.trim();
            Ok((!t.is_empty()).then(|| t.to_string()))
        }
        Value::Number(n) => Ok(Some(n.to_string())),
        _ => Err(bad(path, "expected a string or null")),
    }
}

fn person_value(path: &str, value: &Value) -> Result<Person, CurationError> {
    let person: Person = serde_json::from_value(value.clone()).map_err(|e| bad(path, e.to_string()))?;
    check_person(&person)?;
    Ok(person)
}

fn check_person(person: &Person) -> Result<(), CurationError> {
    if person.roles.is_empty() {
        return Err(CurationError::InvariantViolation("a person must be an author, a contributor, or both".into()));
    }
    if !person.is_identifiable() {
        return Err(CurationError::InvariantViolation(
            "a person needs a family name, an email or an identifier".into(),
        ));
    }
    Ok(())
}

fn field_value(field: Field, path: &str, value: &Value) -> Result<Option<FieldValue>, CurationError> {
    Ok(match field.kind() {
        FieldKind::Persons => unreachable!("persons edits are parsed separately"),
        FieldKind::List => {
            let items = match value {
                Value::Null => Vec::new(),
                Value::Array(items) => {
                    let mut out = Vec::new();
                    for item in items {
                        out.extend(text_value(path, item)?);
                    }
                    out
                }
                other => text_value(path, other)?.into_iter().collect(),
            };
            (!items.is_empty()).then_some(FieldValue::List(items))
        }
        FieldKind::License => text_value(path, value)?.map(|l| FieldValue::Text(bare_license_id(&l).into())),
        FieldKind::Date => text_value(path, value)?.map(|d| FieldValue::Text(normalize_date(&d).unwrap_or(d))),
        FieldKind::Text | FieldKind::Url => text_value(path, value)?.map(FieldValue::Text),
    })
}

impl FieldEdit {
    /// Builds an edit from a path and a JSON value.
    pub fn parse(path: &str, value: &Value) -> Result<Self, CurationError> {
        let mut parts = path.trim_matches('/').split('/');
        let head = parts.next().unwrap_or("");
        let rest: Vec<&str> = parts.collect();
        if head != "persons" {
            let field = head.parse::<Field>().map_err(|_| CurationError::UnknownField(path.into()))?;
            if !rest.is_empty() {
                return Err(CurationError::UnknownField(path.into()));
            }
            return Ok(FieldEdit::Set(field, field_value(field, path, value)?));
        }
        match rest.as_slice() {
            [] => match value {
                Value::Null => Ok(FieldEdit::ReplacePersons(Vec::new())),
                Value::Array(items) => Ok(FieldEdit::ReplacePersons(
                    items.iter().map(|p| person_value(path, p)).collect::<Result<_, _>>()?,
                )),
                _ => Err(bad(path, "expected a list of persons")),
            },
            ["add"] => Ok(FieldEdit::AddPerson(person_value(path, value)?)),
            [index, tail @ ..] => {
                let index: usize = index.parse().map_err(|_| CurationError::UnknownField(path.into()))?;
                match tail {
                    [] if value.is_null() => Ok(FieldEdit::RemovePerson(index)),
                    [] => Ok(FieldEdit::UpdatePerson(index, person_value(path, value)?)),
                    ["roles"] => {
                        let roles: RoleSet =
                            serde_json::from_value(value.clone()).map_err(|e| bad(path, e.to_string()))?;
                        Ok(FieldEdit::SetRoles(index, roles))
                    }
                    _ => Err(CurationError::UnknownField(path.into())),
                }
            }
        }
    }

    pub fn field(&self) -> Field {
        match self {
            FieldEdit::Set(field, _) => *field,
            _ => Field::Persons,
        }
    }
}

/// One curation workflow instance. Timestamps are milliseconds since the
/// Unix epoch, supplied by the caller.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Session {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locator: Option<RepoLocator>,
    pub record: CodeMetaRecord,
    pub provenance: ProvenanceMap,
    pub statuses: StatusMap,
    #[serde(default)]
    pub edits: BTreeSet<Field>,
    #[serde(default)]
    pub report: HarvestReport,
    pub created_at: u64,
    pub modified_at: u64,
}

fn imported_provenance(record: &CodeMetaRecord) -> ProvenanceMap {
    let mut provenance = ProvenanceMap::default();
    for field in record.populated_fields() {
        provenance.fields.insert(field, SourceKind::CodeMetaFile);
    }
    for person in &record.persons {
        provenance.persons.entry(person.identity_key()).or_default().insert(SourceKind::CodeMetaFile);
    }
    provenance
}

impl Session {
    pub fn from_extraction(id: String, locator: RepoLocator, extraction: Extraction, now: u64) -> Self {
        Session {
            id,
            locator: Some(locator),
            record: extraction.record,
            provenance: extraction.provenance,
            statuses: extraction.statuses,
            edits: BTreeSet::new(),
            report: extraction.report,
            created_at: now,
            modified_at: now,
        }
    }

    /// A session holding an imported record; every field counts as
    /// extracted from a CodeMeta file.
    pub fn from_import(id: String, record: CodeMetaRecord, now: u64, review: &ReviewFields) -> Self {
        let mut session = Session {
            id,
            locator: None,
            provenance: imported_provenance(&record),
            record,
            statuses: StatusMap::new(),
            edits: BTreeSet::new(),
            report: HarvestReport::default(),
            created_at: now,
            modified_at: now,
        };
        session.reclassify(review);
        session
    }

    /// Replaces the record with an imported one, dropping earlier edits.
    pub fn overlay_import(&mut self, record: CodeMetaRecord, now: u64, review: &ReviewFields) {
        self.provenance = imported_provenance(&record);
        self.record = record;
        self.edits.clear();
        self.touch(now);
        self.reclassify(review);
    }

    pub fn reclassify(&mut self, review: &ReviewFields) {
        self.statuses = classify_fields(&self.record, &self.provenance, &self.edits, review);
    }

    fn touch(&mut self, now: u64) {
        self.modified_at = self.modified_at.max(now);
    }

    /// Applies an edit. On error the session is unchanged.
    pub fn apply_edit(&mut self, edit: FieldEdit, now: u64, review: &ReviewFields) -> Result<(), CurationError> {
        let field = edit.field();
        let mut persons = self.record.persons.clone();
        let person_at = |persons: &mut Vec<Person>, i: usize| {
            if i < persons.len() {
                Ok(())
            } else {
                Err(CurationError::NoSuchPerson(i))
            }
        };
        match edit {
            FieldEdit::Set(field, value) => {
                self.record.set(field, value).map_err(|e| bad(field.as_str(), e.to_string()))?;
            }
            FieldEdit::ReplacePersons(list) => persons = list,
            FieldEdit::AddPerson(person) => persons.push(person),
            FieldEdit::UpdatePerson(i, person) => {
                person_at(&mut persons, i)?;
                persons[i] = person;
            }
            FieldEdit::RemovePerson(i) => {
                person_at(&mut persons, i)?;
                persons.remove(i);
            }
            FieldEdit::SetRoles(i, roles) => {
                person_at(&mut persons, i)?;
                if roles.is_empty() {
                    return Err(CurationError::InvariantViolation(format!(
                        "person {i} must keep at least one role (author, contributor, or both)"
                    )));
                }
                persons[i].roles = roles;
            }
        }
        if field == Field::Persons {
            for person in &persons {
                check_person(person)?;
            }
            let keys: BTreeSet<String> = persons.iter().map(Person::identity_key).collect();
            self.provenance.persons.retain(|k, _| keys.contains(k));
            self.record.persons = persons;
        }
        self.provenance.fields.remove(&field);
        self.edits.insert(field);
        self.touch(now);
        self.reclassify(review);
        Ok(())
    }

    pub fn violations(&self, vocab: &VocabularySet) -> Vec<Violation> {
        validate_record(&self.record, vocab)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CurationStatus;
    use alloc::vec;
    use serde_json::json;

    fn session() -> Session {
        let record = CodeMetaRecord {
            name: Some("SMECS".into()),
            keywords: vec!["energy".into()],
            persons: vec![Person::with_family_name("Doe", RoleSet::BOTH)],
            ..CodeMetaRecord::default()
        };
        Session::from_import("s1".into(), record, 10, &ReviewFields::default())
    }

    #[test]
    fn import_statuses() {
        let s = session();
        assert_eq!(s.statuses[&Field::Name], CurationStatus::Extracted);
        assert_eq!(s.statuses[&Field::Keywords], CurationStatus::Review);
        assert_eq!(s.statuses[&Field::License], CurationStatus::Missing);
        assert_eq!(s.provenance.source_of(Field::Name), Some(SourceKind::CodeMetaFile));
    }

    #[test]
    fn set_description_marks_edited() {
        let mut s = session();
        s.apply_edit(FieldEdit::parse("description", &json!("A tool")).unwrap(), 20, &ReviewFields::default()).unwrap();
        assert_eq!(s.statuses[&Field::Description], CurationStatus::Edited);
        assert_eq!(s.modified_at, 20);
        s.apply_edit(FieldEdit::parse("description", &json!(null)).unwrap(), 5, &ReviewFields::default()).unwrap();
        assert_eq!(s.statuses[&Field::Description], CurationStatus::Missing);
        assert_eq!(s.modified_at, 20, "modifiedAt never goes backwards");
    }

    #[test]
    fn clearing_both_roles_is_rejected() {
        let mut s = session();
        let before = s.clone();
        let e = s
            .apply_edit(FieldEdit::parse("persons/0/roles", &json!([])).unwrap(), 20, &ReviewFields::default())
            .unwrap_err();
        assert!(matches!(e, CurationError::InvariantViolation(_)));
        assert_eq!(s, before);
        s.apply_edit(FieldEdit::parse("persons/0/roles", &json!(["Author"])).unwrap(), 20, &ReviewFields::default())
            .unwrap();
        assert_eq!(s.record.persons[0].roles, RoleSet::AUTHOR);
        assert_eq!(s.statuses[&Field::Persons], CurationStatus::Edited);
    }

    #[test]
    fn invalid_license_is_accepted_and_reported() {
        let mut s = session();
        s.apply_edit(FieldEdit::parse("license", &json!("MIT-FAKE")).unwrap(), 20, &ReviewFields::default()).unwrap();
        assert_eq!(s.record.license.as_deref(), Some("MIT-FAKE"));
        let violations = s.violations(&VocabularySet::bundled());
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].field, "license");
    }

    #[test]
    fn person_paths() {
        let review = ReviewFields::default();
        let mut s = session();
        s.apply_edit(
            FieldEdit::parse("persons/add", &json!({"familyName": "Roe", "roles": ["Contributor"]})).unwrap(),
            20,
            &review,
        )
        .unwrap();
        assert_eq!(s.record.persons.len(), 2);
        assert!(matches!(
            FieldEdit::parse("persons/add", &json!({"givenName": "Nobody", "roles": ["Author"]})),
            Err(CurationError::InvariantViolation(_))
        ));
        s.apply_edit(FieldEdit::parse("persons/0", &json!(null)).unwrap(), 21, &review).unwrap();
        assert_eq!(s.record.persons[0].family_name.as_deref(), Some("Roe"));
        assert_eq!(s.apply_edit(FieldEdit::RemovePerson(5), 22, &review), Err(CurationError::NoSuchPerson(5)));
        assert!(!s.provenance.persons.contains_key("name:|doe"));
    }

    #[test]
    fn unknown_paths() {
        assert!(matches!(FieldEdit::parse("colour", &json!("x")), Err(CurationError::UnknownField(_))));
        assert!(matches!(FieldEdit::parse("name/x", &json!("x")), Err(CurationError::UnknownField(_))));
        assert!(matches!(FieldEdit::parse("persons/x/roles", &json!([])), Err(CurationError::UnknownField(_))));
        assert!(matches!(FieldEdit::parse("name", &json!({"a": 1})), Err(CurationError::BadValue { .. })));
    }

    #[test]
    fn value_normalization() {
        assert_eq!(
            FieldEdit::parse("license", &json!("https://spdx.org/licenses/MIT")).unwrap(),
            FieldEdit::Set(Field::License, Some(FieldValue::Text("MIT".into())))
        );
        assert_eq!(
            FieldEdit::parse("dateCreated", &json!("2020-01-01T00:00:00Z")).unwrap(),
            FieldEdit::Set(Field::DateCreated, Some(FieldValue::Text("2020-01-01".into())))
        );
        assert_eq!(
            FieldEdit::parse("keywords", &json!(["a", " ", "b"])).unwrap(),
            FieldEdit::Set(Field::Keywords, Some(FieldValue::List(vec!["a".into(), "b".into()])))
        );
        assert_eq!(FieldEdit::parse("keywords", &json!([])).unwrap(), FieldEdit::Set(Field::Keywords, None));
    }

    #[test]
    fn overlay_resets_edits() {
        let review = ReviewFields::default();
        let mut s = session();
        s.apply_edit(FieldEdit::parse("version", &json!("2")).unwrap(), 20, &review).unwrap();
        let imported = CodeMetaRecord { name: Some("Other".into()), ..CodeMetaRecord::default() };
        s.overlay_import(imported.clone(), 30, &review);
        assert_eq!(s.record, imported);
        assert!(s.edits.is_empty());
        assert_eq!(s.statuses[&Field::Version], CurationStatus::Missing);
        assert_eq!(s.id, "s1");
    }
}

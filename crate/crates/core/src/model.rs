//! The unified CodeMeta record and the person model.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Where a piece of metadata came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SourceKind {
    GitHubApi,
    CffFile,
    CodeMetaFile,
}

impl SourceKind {
    pub const ALL: [SourceKind; 3] = [SourceKind::GitHubApi, SourceKind::CffFile, SourceKind::CodeMetaFile];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::GitHubApi => "GitHubApi",
            SourceKind::CffFile => "CffFile",
            SourceKind::CodeMetaFile => "CodeMetaFile",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceKind {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SourceKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| UnknownName(s.into()))
    }
}

/// A name that does not denote any known field, role or source.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown name `{0}`")]
pub struct UnknownName(pub String);

/// Curation state of one form field within a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurationStatus {
    /// Nothing could be extracted; the user has to fill it in.
    Missing,
    /// Extracted, but of a kind the user should double-check.
    Review,
    Extracted,
    /// Changed by the user.
    Edited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Author,
    Contributor,
}

impl FromStr for Role {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Author" | "author" => Ok(Role::Author),
            "Contributor" | "contributor" => Ok(Role::Contributor),
            _ => Err(UnknownName(s.into())),
        }
    }
}

/// Subset of {Author, Contributor}. Serialized as a list of role names.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct RoleSet {
    author: bool,
    contributor: bool,
}

impl RoleSet {
    pub const EMPTY: RoleSet = RoleSet { author: false, contributor: false };
    pub const AUTHOR: RoleSet = RoleSet { author: true, contributor: false };
    pub const CONTRIBUTOR: RoleSet = RoleSet { author: false, contributor: true };
    pub const BOTH: RoleSet = RoleSet { author: true, contributor: true };

    pub fn of(role: Role) -> Self {
        match role {
            Role::Author => Self::AUTHOR,
            Role::Contributor => Self::CONTRIBUTOR,
        }
    }

    pub fn contains(self, role: Role) -> bool {
        match role {
            Role::Author => self.author,
            Role::Contributor => self.contributor,
        }
    }

    pub fn insert(&mut self, role: Role) {
        match role {
            Role::Author => self.author = true,
            Role::Contributor => self.contributor = true,
        }
    }

    pub fn union(self, other: RoleSet) -> RoleSet {
        RoleSet { author: self.author || other.author, contributor: self.contributor || other.contributor }
    }

    pub fn is_empty(self) -> bool {
        !self.author && !self.contributor
    }

    pub fn iter(self) -> impl Iterator<Item = Role> {
        [(self.author, Role::Author), (self.contributor, Role::Contributor)]
            .into_iter()
            .filter_map(|(on, role)| on.then_some(role))
    }
}

impl FromIterator<Role> for RoleSet {
    fn from_iter<I: IntoIterator<Item = Role>>(iter: I) -> Self {
        let mut set = RoleSet::EMPTY;
        for role in iter {
            set.insert(role);
        }
        set
    }
}

impl Serialize for RoleSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for RoleSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let roles = Vec::<Role>::deserialize(deserializer)?;
        Ok(roles.into_iter().collect())
    }
}

/// An agent credited on the software: an author, a contributor, or both.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Person {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub given_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub email: Option<String>,
    /// Persistent identifier IRI, typically an ORCID.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affiliation: Option<String>,
    pub roles: RoleSet,
}

impl Person {
    pub fn with_family_name(family_name: impl Into<String>, roles: RoleSet) -> Self {
        Person { family_name: Some(family_name.into()), roles, ..Person::default() }
    }

    /// A person needs a family name, an email or an identifier.
    pub fn is_identifiable(&self) -> bool {
        self.family_name.is_some() || self.email.is_some() || self.id.is_some()
    }

    /// Same-person test used when folding person lists together.
    ///
    /// The first facet both sides carry decides: identifier, then email
    /// (case-insensitive), then the (given, family) name pair
    /// (case-insensitive).
    pub fn same_identity(&self, other: &Person) -> bool {
        if let (Some(a), Some(b)) = (&self.id, &other.id) {
            return a == b;
        }
        if let (Some(a), Some(b)) = (&self.email, &other.email) {
            return a.to_lowercase() == b.to_lowercase();
        }
        match (self.name_key(), other.name_key()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    fn name_key(&self) -> Option<(String, String)> {
        if self.given_name.is_none() && self.family_name.is_none() {
            return None;
        }
        let lower = |s: &Option<String>| s.as_deref().unwrap_or("").to_lowercase();
        Some((lower(&self.given_name), lower(&self.family_name)))
    }

    /// Stable key naming this person in provenance maps.
    pub fn identity_key(&self) -> String {
        if let Some(id) = &self.id {
            return format!("id:{id}");
        }
        if let Some(email) = &self.email {
            return format!("email:{}", email.to_lowercase());
        }
        let (given, family) = self.name_key().unwrap_or_default();
        format!("name:{given}|{family}")
    }
}

/// How a field's value is shaped and checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Text,
    Url,
    Date,
    License,
    List,
    Persons,
}

/// One field of the curation form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Field {
    Name,
    Description,
    Version,
    CodeRepository,
    Url,
    IssueTracker,
    DownloadUrl,
    License,
    ProgrammingLanguage,
    Keywords,
    DateCreated,
    DateModified,
    DatePublished,
    Identifier,
    DevelopmentStatus,
    Persons,
}

impl Field {
    /// Every form field, in export order.
    pub const ALL: [Field; 16] = [
        Field::Name,
        Field::Description,
        Field::Version,
        Field::CodeRepository,
        Field::Url,
        Field::IssueTracker,
        Field::DownloadUrl,
        Field::License,
        Field::ProgrammingLanguage,
        Field::Keywords,
        Field::DateCreated,
        Field::DateModified,
        Field::DatePublished,
        Field::Identifier,
        Field::DevelopmentStatus,
        Field::Persons,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Name => "name",
            Field::Description => "description",
            Field::Version => "version",
            Field::CodeRepository => "codeRepository",
            Field::Url => "url",
            Field::IssueTracker => "issueTracker",
            Field::DownloadUrl => "downloadUrl",
            Field::License => "license",
            Field::ProgrammingLanguage => "programmingLanguage",
            Field::Keywords => "keywords",
            Field::DateCreated => "dateCreated",
            Field::DateModified => "dateModified",
            Field::DatePublished => "datePublished",
            Field::Identifier => "identifier",
            Field::DevelopmentStatus => "developmentStatus",
            Field::Persons => "persons",
        }
    }

    pub fn kind(self) -> FieldKind {
        match self {
            Field::Name | Field::Description | Field::Version | Field::Identifier | Field::DevelopmentStatus => {
                FieldKind::Text
            }
            Field::CodeRepository | Field::Url | Field::IssueTracker | Field::DownloadUrl => FieldKind::Url,
            Field::License => FieldKind::License,
            Field::ProgrammingLanguage | Field::Keywords => FieldKind::List,
            Field::DateCreated | Field::DateModified | Field::DatePublished => FieldKind::Date,
            Field::Persons => FieldKind::Persons,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Field {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Field::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| UnknownName(s.into()))
    }
}

/// The value of a single field, independent of which field it is.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldValue {
    Text(String),
    List(Vec<String>),
    Persons(Vec<Person>),
}

/// The curated metadata document.
///
/// Scalars are `None` when absent; lists are empty when absent. Keys that are
/// not modelled here survive in `extras` so that imported documents export
/// without loss.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct CodeMetaRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code_repository: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub issue_tracker: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub download_url: Option<String>,
    /// Bare SPDX identifier, e.g. `MIT`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub license: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub programming_language: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub keywords: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub date_created: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub date_modified: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub date_published: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identifier: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub development_status: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub persons: Vec<Person>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, Value>,
}

impl CodeMetaRecord {
    fn text_slot(&mut self, field: Field) -> Option<&mut Option<String>> {
        Some(match field {
            Field::Name => &mut self.name,
            Field::Description => &mut self.description,
            Field::Version => &mut self.version,
            Field::CodeRepository => &mut self.code_repository,
            Field::Url => &mut self.url,
            Field::IssueTracker => &mut self.issue_tracker,
            Field::DownloadUrl => &mut self.download_url,
            Field::License => &mut self.license,
            Field::DateCreated => &mut self.date_created,
            Field::DateModified => &mut self.date_modified,
            Field::DatePublished => &mut self.date_published,
            Field::Identifier => &mut self.identifier,
            Field::DevelopmentStatus => &mut self.development_status,
            Field::ProgrammingLanguage | Field::Keywords | Field::Persons => return None,
        })
    }

    fn text_ref(&self, field: Field) -> Option<&Option<String>> {
        Some(match field {
            Field::Name => &self.name,
            Field::Description => &self.description,
            Field::Version => &self.version,
            Field::CodeRepository => &self.code_repository,
            Field::Url => &self.url,
            Field::IssueTracker => &self.issue_tracker,
            Field::DownloadUrl => &self.download_url,
            Field::License => &self.license,
            Field::DateCreated => &self.date_created,
            Field::DateModified => &self.date_modified,
            Field::DatePublished => &self.date_published,
            Field::Identifier => &self.identifier,
            Field::DevelopmentStatus => &self.development_status,
            Field::ProgrammingLanguage | Field::Keywords | Field::Persons => return None,
        })
    }

    /// Text value of a scalar field, `None` for list fields or when absent.
    pub fn text(&self, field: Field) -> Option<&str> {
        self.text_ref(field).and_then(|v| v.as_deref())
    }

    pub fn list(&self, field: Field) -> Option<&[String]> {
        match field {
            Field::ProgrammingLanguage => Some(&self.programming_language),
            Field::Keywords => Some(&self.keywords),
            _ => None,
        }
    }

    pub fn get(&self, field: Field) -> Option<FieldValue> {
        match field {
            Field::ProgrammingLanguage | Field::Keywords => {
                let list = self.list(field).unwrap_or_default();
                (!list.is_empty()).then(|| FieldValue::List(list.to_vec()))
            }
            Field::Persons => (!self.persons.is_empty()).then(|| FieldValue::Persons(self.persons.clone())),
            _ => self.text(field).map(|t| FieldValue::Text(t.into())),
        }
    }

    pub fn is_populated(&self, field: Field) -> bool {
        match field {
            Field::ProgrammingLanguage => !self.programming_language.is_empty(),
            Field::Keywords => !self.keywords.is_empty(),
            Field::Persons => !self.persons.is_empty(),
            _ => self.text(field).is_some(),
        }
    }

    pub fn populated_fields(&self) -> impl Iterator<Item = Field> + '_ {
        Field::ALL.into_iter().filter(|f| self.is_populated(*f))
    }

    /// Sets or clears a field. Fails when the value shape does not fit.
    pub fn set(&mut self, field: Field, value: Option<FieldValue>) -> Result<(), ShapeMismatch> {
        match (field.kind(), value) {
            (_, None) => self.clear(field),
            (FieldKind::List, Some(FieldValue::List(items))) => {
                let deduped = dedup_preserving_order(items);
                match field {
                    Field::Keywords => self.keywords = deduped,
                    _ => self.programming_language = deduped,
                }
            }
            (FieldKind::Persons, Some(FieldValue::Persons(persons))) => self.persons = persons,
            (FieldKind::Text | FieldKind::Url | FieldKind::Date | FieldKind::License, Some(FieldValue::Text(t))) => {
                if let Some(slot) = self.text_slot(field) {
                    *slot = Some(t);
                }
            }
            _ => return Err(ShapeMismatch(field)),
        }
        Ok(())
    }

    pub fn clear(&mut self, field: Field) {
        match field {
            Field::ProgrammingLanguage => self.programming_language.clear(),
            Field::Keywords => self.keywords.clear(),
            Field::Persons => self.persons.clear(),
            _ => {
                if let Some(slot) = self.text_slot(field) {
                    *slot = None;
                }
            }
        }
    }
}

/// A value of the wrong shape was offered for a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("value does not fit field `{0}`")]
pub struct ShapeMismatch(pub Field);

/// Removes duplicates (exact, case-sensitive), keeping the first occurrence.
pub fn dedup_preserving_order(items: Vec<String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(items.len());
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

//! Combining partial records into one record with provenance, and curation
//! status classification.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::crosswalk::PartialRecord;
use crate::model::{CodeMetaRecord, CurationStatus, Field, Person, SourceKind};

/// Source order used when several sources populate the same field,
/// highest precedence first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SourceKind>", into = "Vec<SourceKind>")]
pub struct Precedence(Vec<SourceKind>);

impl Precedence {
    pub fn new(order: Vec<SourceKind>) -> Result<Self, DuplicateSource> {
        for (i, kind) in order.iter().enumerate() {
            if order[..i].contains(kind) {
                return Err(DuplicateSource(*kind));
            }
        }
        Ok(Precedence(order))
    }

    /// Position of `kind`; unlisted kinds rank below every listed one.
    pub fn rank(&self, kind: SourceKind) -> usize {
        self.0.iter().position(|k| *k == kind).unwrap_or(self.0.len())
    }

    pub fn order(&self) -> &[SourceKind] {
        &self.0
    }
}

impl Default for Precedence {
    fn default() -> Self {
        Precedence(alloc::vec![SourceKind::CodeMetaFile, SourceKind::CffFile, SourceKind::GitHubApi])
    }
}

impl TryFrom<Vec<SourceKind>> for Precedence {
    type Error = DuplicateSource;

    fn try_from(order: Vec<SourceKind>) -> Result<Self, Self::Error> {
        Precedence::new(order)
    }
}

impl From<Precedence> for Vec<SourceKind> {
    fn from(p: Precedence) -> Self {
        p.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("source `{0}` listed twice in precedence order")]
pub struct DuplicateSource(pub SourceKind);

/// Fields whose extracted values should be double-checked by the user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReviewFields(pub BTreeSet<Field>);

impl ReviewFields {
    pub fn contains(&self, field: Field) -> bool {
        self.0.contains(&field)
    }
}

impl Default for ReviewFields {
    fn default() -> Self {
        ReviewFields(
            [Field::Url, Field::IssueTracker, Field::DownloadUrl, Field::CodeRepository, Field::Keywords]
                .into_iter()
                .collect(),
        )
    }
}

/// Which source supplied each populated field.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceMap {
    /// Winning source per field. For `persons`, the highest-precedence
    /// source that contributed any person.
    pub fields: BTreeMap<Field, SourceKind>,
    /// Person identity key to every source that mentioned the person.
    pub persons: BTreeMap<String, BTreeSet<SourceKind>>,
}

impl ProvenanceMap {
    pub fn source_of(&self, field: Field) -> Option<SourceKind> {
        self.fields.get(&field).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty() && self.persons.is_empty()
    }
}

pub type StatusMap = BTreeMap<Field, CurationStatus>;

struct PersonGroup {
    person: Person,
    sources: BTreeSet<SourceKind>,
}

fn fill(slot: &mut Option<String>, value: &Option<String>) {
    if slot.is_none() {
        slot.clone_from(value);
    }
}

fn group_persons<'a, I>(lists: I, precedence: &Precedence) -> Vec<PersonGroup>
where
    I: IntoIterator<Item = (&'a [Person], SourceKind)>,
{
    let mut lists: Vec<_> = lists.into_iter().collect();
    // Stable: equal-rank lists keep their given order.
    lists.sort_by_key(|(_, kind)| precedence.rank(*kind));

    let mut groups: Vec<PersonGroup> = Vec::new();
    for (persons, kind) in lists {
        for person in persons {
            match groups.iter_mut().find(|g| g.person.same_identity(person)) {
                Some(group) => {
                    let merged = &mut group.person;
                    fill(&mut merged.given_name, &person.given_name);
                    fill(&mut merged.family_name, &person.family_name);
                    fill(&mut merged.email, &person.email);
                    fill(&mut merged.id, &person.id);
                    fill(&mut merged.affiliation, &person.affiliation);
                    merged.roles = merged.roles.union(person.roles);
                    group.sources.insert(kind);
                }
                None => groups.push(PersonGroup { person: person.clone(), sources: [kind].into_iter().collect() }),
            }
        }
    }
    // Authors first, then pure contributors; each by first appearance.
    let (authors, others): (Vec<_>, Vec<_>) =
        groups.into_iter().partition(|g| g.person.roles.contains(crate::model::Role::Author));
    authors.into_iter().chain(others).collect()
}

/// Folds person lists from several sources into one list.
///
/// Persons are grouped by identity (see [`Person::same_identity`]); a group
/// keeps the union of its roles and, per attribute, the first value found in
/// precedence order. Authors come first, then pure contributors, each in
/// order of first appearance.
pub fn merge_person_lists(lists: &[(Vec<Person>, SourceKind)], precedence: &Precedence) -> Vec<Person> {
    group_persons(lists.iter().map(|(p, k)| (p.as_slice(), *k)), precedence).into_iter().map(|g| g.person).collect()
}

/// Merges partial records by source precedence.
///
/// Every non-person field takes the value of the highest-precedence source
/// that populates it. Persons are unioned across all sources.
pub fn merge_sources(parts: &[PartialRecord], precedence: &Precedence) -> (CodeMetaRecord, ProvenanceMap) {
    let mut ordered: Vec<&PartialRecord> = parts.iter().collect();
    ordered.sort_by_key(|p| precedence.rank(p.source));

    let mut record = CodeMetaRecord::default();
    let mut provenance = ProvenanceMap::default();

    for field in Field::ALL {
        if field == Field::Persons {
            continue;
        }
        if let Some(winner) = ordered.iter().find(|p| p.record.is_populated(field)) {
            record.set(field, winner.record.get(field)).expect("value read from the same field");
            provenance.fields.insert(field, winner.source);
        }
    }

    for part in &ordered {
        for (key, value) in &part.record.extras {
            record.extras.entry(key.clone()).or_insert_with(|| value.clone());
        }
    }

    let groups = group_persons(ordered.iter().map(|p| (p.record.persons.as_slice(), p.source)), precedence);
    if let Some(top) = ordered.iter().find(|p| !p.record.persons.is_empty()) {
        provenance.fields.insert(Field::Persons, top.source);
    }
    for group in groups {
        provenance.persons.entry(group.person.identity_key()).or_default().extend(group.sources.iter().copied());
        record.persons.push(group.person);
    }

    (record, provenance)
}

/// Assigns a curation status to every form field.
///
/// Absent fields are `Missing`; user-edited fields are `Edited`; extracted
/// fields are `Review` when listed in `review`, otherwise `Extracted`.
pub fn classify_fields(
    record: &CodeMetaRecord,
    provenance: &ProvenanceMap,
    edits: &BTreeSet<Field>,
    review: &ReviewFields,
) -> StatusMap {
    Field::ALL
        .into_iter()
        .map(|field| {
            let status = if !record.is_populated(field) {
                CurationStatus::Missing
            } else if edits.contains(&field) {
                CurationStatus::Edited
            } else if provenance.source_of(field).is_some() && review.contains(field) {
                CurationStatus::Review
            } else {
                CurationStatus::Extracted
            };
            (field, status)
        })
        .collect()
}

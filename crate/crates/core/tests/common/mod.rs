//! Generators and brute-force oracles shared by the property tests and the
//! acceptance suite.
#![allow(dead_code, clippy::type_complexity)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::sample::subsequence;
use serde_json::{json, Map, Value};
use smecs_core::{
    CodeMetaRecord, Field, FieldValue, PartialRecord, Person, Precedence, Role, RoleSet, SourceKind, SourceRecord,
};

pub const LICENSES: &[&str] = &["MIT", "Apache-2.0", "GPL-3.0-only", "BSD-3-Clause", "AGPL-3.0", "MIT OR Apache-2.0"];
pub const LANGUAGES: &[&str] = &["Python", "Rust", "C", "Julia", "TypeScript", "Fortran"];
pub const KEYWORDS: &[&str] = &["energy", "metadata", "FAIR", "citation", "grid", "simulation"];

/// Non-empty text without surrounding whitespace.
pub fn text() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9 ._:-]{0,10}[A-Za-z0-9]|[A-Za-z]"
}

pub fn url() -> impl Strategy<Value = String> {
    ("[a-z]{1,8}", "[a-z0-9]{0,6}").prop_map(|(host, path)| format!("https://{host}.org/{path}"))
}

pub fn date() -> impl Strategy<Value = String> {
    (1990u32..2030, 1u32..=12, 1u32..=28).prop_map(|(y, m, d)| format!("{y:04}-{m:02}-{d:02}"))
}

fn pick_list(pool: &'static [&'static str]) -> impl Strategy<Value = Vec<String>> {
    subsequence(pool, 1..=3).prop_shuffle().prop_map(|v| v.into_iter().map(String::from).collect())
}

fn role_set() -> impl Strategy<Value = RoleSet> {
    prop_oneof![Just(RoleSet::AUTHOR), Just(RoleSet::CONTRIBUTOR), Just(RoleSet::BOTH)]
}

/// Extra keys that are neither CodeMeta fields handled natively nor reserved.
fn extras() -> impl Strategy<Value = BTreeMap<String, Value>> {
    let value = prop_oneof![
        text().prop_map(Value::from),
        any::<i32>().prop_map(Value::from),
        any::<bool>().prop_map(Value::from),
        text().prop_map(|t| json!({"@type": "Organization", "name": t})),
        proptest::collection::vec(text(), 0..3).prop_map(|v| json!(v)),
    ];
    proptest::collection::btree_map(
        prop_oneof![
            Just("funder"),
            Just("referencePublication"),
            Just("x-notes"),
            Just("@id"),
            Just("applicationCategory")
        ]
        .prop_map(String::from),
        value,
        0..3,
    )
}

/// Ground truth for one real person. Facet values are unique per index so
/// two different people never agree on any facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Id,
    Email,
    Name,
}

#[derive(Debug, Clone)]
pub struct Human {
    pub index: usize,
    pub anchor: Anchor,
    pub has_given: bool,
}

impl Human {
    pub fn id(&self) -> String {
        format!("https://orcid.org/0000-0002-0000-{:04}", self.index)
    }
    pub fn email(&self) -> String {
        format!("person{}@example.org", self.index)
    }
    pub fn given(&self) -> String {
        format!("Given{}", self.index)
    }
    pub fn family(&self) -> String {
        format!("Family{}", self.index)
    }
}

/// One mention of a real person in one source.
#[derive(Debug, Clone)]
pub struct Mention {
    pub human: usize,
    pub person: Person,
}

fn flip_case(s: String, upper: bool) -> String {
    if upper {
        s.to_uppercase()
    } else {
        s
    }
}

/// Mentions always carry the person's anchor facet; other facets appear at
/// random, in random letter case where matching is case-insensitive.
pub fn mention(humans: Vec<Human>, roles: impl Strategy<Value = RoleSet>) -> impl Strategy<Value = Mention> {
    let n = humans.len();
    (0..n, any::<[bool; 6]>(), roles, 0u8..3).prop_map(move |(i, bits, roles, aff)| {
        let h = &humans[i];
        let with_id = h.anchor == Anchor::Id || bits[0];
        let with_email = h.anchor == Anchor::Email || bits[1];
        let with_name = h.anchor == Anchor::Name || bits[2];
        let person = Person {
            given_name: (with_name && h.has_given).then(|| flip_case(h.given(), bits[3])),
            family_name: with_name.then(|| flip_case(h.family(), bits[4])),
            email: with_email.then(|| flip_case(h.email(), bits[5])),
            id: with_id.then(|| h.id()),
            affiliation: (aff > 0).then(|| format!("Institute {aff}")),
            roles,
        };
        Mention { human: i, person }
    })
}

pub fn humans(max: usize) -> impl Strategy<Value = Vec<Human>> {
    proptest::collection::vec(
        (prop_oneof![Just(Anchor::Id), Just(Anchor::Email), Just(Anchor::Name)], any::<bool>()),
        1..=max,
    )
    .prop_map(|v| {
        v.into_iter().enumerate().map(|(index, (anchor, has_given))| Human { index, anchor, has_given }).collect()
    })
}

/// Random lists of mentions, one per source kind, over a shared population.
pub fn mention_lists() -> impl Strategy<Value = Vec<(Vec<Mention>, SourceKind)>> {
    humans(5).prop_flat_map(|hs| {
        let list = move || proptest::collection::vec(mention(hs.clone(), role_set()), 0..5);
        (list(), list(), list(), subsequence(SourceKind::ALL.to_vec(), 0..=3).prop_shuffle()).prop_map(
            |(a, b, c, kinds)| {
                let mut lists = vec![a, b, c];
                kinds.into_iter().map(|k| (lists.remove(0), k)).collect()
            },
        )
    })
}

pub fn precedence() -> impl Strategy<Value = Precedence> {
    Just(SourceKind::ALL.to_vec()).prop_shuffle().prop_map(|order| Precedence::new(order).unwrap())
}

/// Identity-grouping oracle: groups mentions by the real person behind them.
pub fn person_oracle(lists: &[(Vec<Mention>, SourceKind)], precedence: &Precedence) -> Vec<Person> {
    let mut scan: Vec<&Mention> = Vec::new();
    for kind in precedence.order() {
        for (mentions, k) in lists {
            if k == kind {
                scan.extend(mentions.iter());
            }
        }
    }
    let mut first_seen: Vec<usize> = Vec::new();
    for m in &scan {
        if !first_seen.contains(&m.human) {
            first_seen.push(m.human);
        }
    }
    let merged: Vec<Person> = first_seen
        .iter()
        .map(|h| {
            let group: Vec<&Person> = scan.iter().filter(|m| m.human == *h).map(|m| &m.person).collect();
            let first = |f: fn(&Person) -> &Option<String>| group.iter().find_map(|p| f(p).clone());
            let mut roles = RoleSet::EMPTY;
            for p in &group {
                for r in p.roles.iter() {
                    roles.insert(r);
                }
            }
            Person {
                given_name: first(|p| &p.given_name),
                family_name: first(|p| &p.family_name),
                email: first(|p| &p.email),
                id: first(|p| &p.id),
                affiliation: first(|p| &p.affiliation),
                roles,
            }
        })
        .collect();
    let authors = merged.iter().filter(|p| p.roles.contains(Role::Author)).cloned();
    let others = merged.iter().filter(|p| !p.roles.contains(Role::Author)).cloned();
    authors.chain(others).collect()
}

/// Per-field values for one source, with persons as mentions.
#[derive(Debug, Clone, Default)]
pub struct SourceTruth {
    pub fields: BTreeMap<Field, FieldValue>,
    pub mentions: Vec<Mention>,
    pub extras: BTreeMap<String, Value>,
}

fn field_value(field: Field) -> BoxedStrategy<FieldValue> {
    use Field::*;
    match field {
        CodeRepository | Url | IssueTracker | DownloadUrl => url().prop_map(FieldValue::Text).boxed(),
        License => proptest::sample::select(LICENSES).prop_map(|l| FieldValue::Text(l.into())).boxed(),
        DateCreated | DateModified | DatePublished => date().prop_map(FieldValue::Text).boxed(),
        Keywords => pick_list(KEYWORDS).prop_map(FieldValue::List).boxed(),
        ProgrammingLanguage => pick_list(LANGUAGES).prop_map(FieldValue::List).boxed(),
        _ => text().prop_map(FieldValue::Text).boxed(),
    }
}

/// Random field presence over the full schema.
pub fn record_fields() -> impl Strategy<Value = BTreeMap<Field, FieldValue>> {
    let per_field: Vec<_> = Field::ALL
        .into_iter()
        .filter(|f| *f != Field::Persons)
        .map(|f| proptest::option::weighted(0.5, field_value(f)).prop_map(move |v| (f, v)))
        .collect();
    per_field.prop_map(|pairs| pairs.into_iter().filter_map(|(f, v)| v.map(|v| (f, v))).collect())
}

pub fn fill_record(fields: &BTreeMap<Field, FieldValue>) -> CodeMetaRecord {
    let mut record = CodeMetaRecord::default();
    for (f, v) in fields {
        record.set(*f, Some(v.clone())).unwrap();
    }
    record
}

/// Random partial records with distinct source tags.
pub fn partial_records(
) -> impl Strategy<Value = (Vec<PartialRecord>, Vec<(Vec<Mention>, SourceKind)>, Vec<BTreeMap<String, Value>>)> {
    (mention_lists(), proptest::collection::vec((record_fields(), extras()), 3)).prop_map(|(lists, fields)| {
        let mut parts = Vec::new();
        let mut all_extras = Vec::new();
        for ((mentions, kind), (fields, extras)) in lists.iter().zip(fields) {
            let mut record = fill_record(&fields);
            record.persons = mentions.iter().map(|m| m.person.clone()).collect();
            record.extras = extras.clone();
            all_extras.push(extras);
            parts.push(PartialRecord { record, source: *kind });
        }
        (parts, lists, all_extras)
    })
}

/// Brute-force precedence oracle: for every field, the populated value of
/// the best-ranked part, found by scanning all parts.
pub fn precedence_oracle(
    parts: &[PartialRecord],
    precedence: &Precedence,
) -> BTreeMap<Field, (FieldValue, SourceKind)> {
    let mut out = BTreeMap::new();
    for field in Field::ALL {
        if field == Field::Persons {
            continue;
        }
        let mut best: Option<(usize, FieldValue, SourceKind)> = None;
        for part in parts {
            let Some(value) = part.record.get(field) else { continue };
            let rank = precedence.order().iter().position(|k| *k == part.source).unwrap();
            if best.as_ref().is_none_or(|(r, _, _)| rank < *r) {
                best = Some((rank, value, part.source));
            }
        }
        if let Some((_, v, s)) = best {
            out.insert(field, (v, s));
        }
    }
    out
}

pub fn extras_oracle(parts: &[PartialRecord], precedence: &Precedence) -> BTreeMap<String, Value> {
    let mut out: BTreeMap<String, (usize, Value)> = BTreeMap::new();
    for part in parts {
        let rank = precedence.order().iter().position(|k| *k == part.source).unwrap();
        for (k, v) in &part.record.extras {
            if out.get(k).is_none_or(|(r, _)| rank < *r) {
                out.insert(k.clone(), (rank, v.clone()));
            }
        }
    }
    out.into_iter().map(|(k, (_, v))| (k, v)).collect()
}

/// Valid records for the export/import round trip: a name, any other
/// fields, distinct persons ordered authors first, and foreign extras.
pub fn valid_record() -> impl Strategy<Value = CodeMetaRecord> {
    (
        record_fields(),
        text(),
        humans(4).prop_flat_map(|hs| {
            let n = hs.len();
            (Just(hs), proptest::collection::vec(role_set(), n), any::<Vec<bool>>())
        }),
        extras(),
    )
        .prop_map(|(fields, name, (hs, roles, keep), extras)| {
            let mut record = fill_record(&fields);
            record.name = Some(name);
            let persons: Vec<Person> = hs
                .iter()
                .zip(roles)
                .enumerate()
                .filter(|(i, _)| keep.get(*i).copied().unwrap_or(true))
                .map(|(_, (h, roles))| Person {
                    given_name: (h.anchor == Anchor::Name && h.has_given).then(|| h.given()),
                    family_name: (h.anchor == Anchor::Name).then(|| h.family()),
                    email: (h.anchor != Anchor::Id || h.has_given).then(|| h.email()),
                    id: (h.anchor == Anchor::Id).then(|| h.id()),
                    affiliation: h.has_given.then(|| "Institute".to_string()),
                    roles,
                })
                .collect();
            let authors = persons.iter().filter(|p| p.roles.contains(Role::Author)).cloned();
            let others = persons.iter().filter(|p| !p.roles.contains(Role::Author)).cloned();
            record.persons = authors.chain(others).collect();
            record.extras = extras;
            record
        })
}

/// Raw source payloads rendered from per-source truth, as the three
/// harvesters would return them.
pub fn render_source(kind: SourceKind, truth: &SourceTruth, variant: bool) -> SourceRecord {
    let text = |f: Field| match truth.fields.get(&f) {
        Some(FieldValue::Text(t)) => Some(t.clone()),
        _ => None,
    };
    let list = |f: Field| match truth.fields.get(&f) {
        Some(FieldValue::List(l)) => Some(l.clone()),
        _ => None,
    };
    let mut data = Map::new();
    match kind {
        SourceKind::GitHubApi => {
            let mut repo = Map::new();
            let mut put = |k: &str, v: Option<Value>| {
                if let Some(v) = v {
                    repo.insert(k.into(), v);
                }
            };
            put("name", text(Field::Name).map(Value::from));
            put("description", text(Field::Description).map(Value::from));
            put("html_url", text(Field::CodeRepository).map(Value::from));
            put("homepage", text(Field::Url).map(Value::from));
            put("license", text(Field::License).map(|l| json!({"spdx_id": l})));
            put("topics", list(Field::Keywords).map(Value::from));
            put("created_at", text(Field::DateCreated).map(|d| format!("{d}T08:15:00Z").into()));
            let modified = text(Field::DateModified).map(|d| Value::from(format!("{d}T23:59:59Z")));
            put(if variant { "updated_at" } else { "pushed_at" }, modified);
            data.insert("repo".into(), Value::Object(repo));
            if let Some(langs) = list(Field::ProgrammingLanguage) {
                let n = langs.len() as u64;
                let bytes: Map<String, Value> =
                    langs.iter().enumerate().map(|(i, l)| (l.clone(), json!((n - i as u64) * 1000))).collect();
                data.insert("languages".into(), Value::Object(bytes));
            }
            let logins: Vec<Value> =
                truth.mentions.iter().map(|m| json!({"login": m.person.family_name, "contributions": 1})).collect();
            data.insert("contributors".into(), Value::Array(logins));
        }
        SourceKind::CffFile => {
            data.insert("cff-version".into(), json!("1.2.0"));
            let mut put = |k: &str, v: Option<Value>| {
                if let Some(v) = v {
                    data.insert(k.into(), v);
                }
            };
            put("title", text(Field::Name).map(Value::from));
            put("abstract", text(Field::Description).map(Value::from));
            put("version", text(Field::Version).map(Value::from));
            put("license", text(Field::License).map(Value::from));
            put("repository-code", text(Field::CodeRepository).map(Value::from));
            put("keywords", list(Field::Keywords).map(Value::from));
            put("date-released", text(Field::DatePublished).map(Value::from));
            if let Some(doi) = text(Field::Identifier) {
                if variant {
                    put(
                        "identifiers",
                        Some(json!([{"type": "url", "value": "https://x.org"}, {"type": "doi", "value": doi}])),
                    );
                } else {
                    put("doi", Some(doi.into()));
                }
            }
            let authors: Vec<Value> = truth
                .mentions
                .iter()
                .map(|m| {
                    let p = &m.person;
                    let mut o = Map::new();
                    let mut put = |k: &str, v: &Option<String>| {
                        if let Some(v) = v {
                            o.insert(k.into(), v.clone().into());
                        }
                    };
                    put("family-names", &p.family_name);
                    put("given-names", &p.given_name);
                    put("email", &p.email);
                    put("orcid", &p.id);
                    put("affiliation", &p.affiliation);
                    Value::Object(o)
                })
                .collect();
            if !authors.is_empty() {
                data.insert("authors".into(), Value::Array(authors));
            }
        }
        SourceKind::CodeMetaFile => {
            let mut record = fill_record(&truth.fields);
            record.persons = truth.mentions.iter().map(|m| m.person.clone()).collect();
            record.extras = truth.extras.clone();
            record.name.get_or_insert_with(|| "placeholder".into());
            let mut value: Value = serde_json::from_str(&smecs_core::export_codemeta(&record).unwrap()).unwrap();
            if !truth.fields.contains_key(&Field::Name) {
                value.as_object_mut().unwrap().remove("name");
            }
            return SourceRecord::new(kind, value);
        }
    }
    SourceRecord::new(kind, Value::Object(data))
}

/// Fields each source can express, and the shape of its persons.
pub fn expressible(kind: SourceKind, field: Field) -> bool {
    use Field::*;
    match kind {
        SourceKind::GitHubApi => matches!(
            field,
            Name | Description
                | CodeRepository
                | Url
                | License
                | Keywords
                | ProgrammingLanguage
                | DateCreated
                | DateModified
        ),
        SourceKind::CffFile => {
            matches!(
                field,
                Name | Description | Version | License | CodeRepository | Keywords | DatePublished | Identifier
            )
        }
        SourceKind::CodeMetaFile => field != Persons,
    }
}

/// Per-source truth restricted to what the source can say. GitHub only
/// knows logins, so its mentions are of name-anchored people without a
/// given name.
pub fn source_truths() -> impl Strategy<Value = (Vec<(SourceKind, SourceTruth, bool)>, Vec<Human>)> {
    humans(5).prop_flat_map(|hs| {
        let login_people: Vec<Human> =
            hs.iter().filter(|h| h.anchor == Anchor::Name && !h.has_given).cloned().collect();
        let hs2 = hs.clone();
        let per_kind = move |kind: SourceKind| {
            let roles: BoxedStrategy<RoleSet> = match kind {
                SourceKind::GitHubApi => Just(RoleSet::CONTRIBUTOR).boxed(),
                SourceKind::CffFile => Just(RoleSet::AUTHOR).boxed(),
                SourceKind::CodeMetaFile => role_set().boxed(),
            };
            let mentions: BoxedStrategy<Vec<Mention>> = if kind == SourceKind::GitHubApi {
                if login_people.is_empty() {
                    Just(Vec::new()).boxed()
                } else {
                    let pool = login_people.clone();
                    proptest::collection::vec(
                        (0..pool.len()).prop_map(move |i| {
                            let h = &pool[i];
                            Mention {
                                human: h.index,
                                person: Person::with_family_name(h.family(), RoleSet::CONTRIBUTOR),
                            }
                        }),
                        0..4,
                    )
                    .boxed()
                }
            } else {
                proptest::collection::vec(mention(hs2.clone(), roles), 0..4).boxed()
            };
            (record_fields(), mentions, extras(), any::<bool>()).prop_map(move |(fields, mentions, extras, variant)| {
                let mut fields: BTreeMap<Field, FieldValue> =
                    fields.into_iter().filter(|(f, _)| expressible(kind, *f)).collect();
                if kind == SourceKind::GitHubApi {
                    if let Some(FieldValue::Text(repo)) = fields.get(&Field::CodeRepository) {
                        let issues = format!("{}/issues", repo.trim_end_matches('/'));
                        fields.insert(Field::IssueTracker, FieldValue::Text(issues));
                    }
                }
                let extras = if kind == SourceKind::CodeMetaFile { extras } else { BTreeMap::new() };
                (kind, SourceTruth { fields, mentions, extras }, variant)
            })
        };
        let kinds = subsequence(SourceKind::ALL.to_vec(), 1..=3).prop_shuffle();
        let gen = per_kind.clone();
        (kinds.prop_flat_map(move |ks| ks.into_iter().map(&gen).collect::<Vec<_>>()), Just(hs))
    })
}

/// Order in which a source's persons reach the merge: a CodeMeta file lists
/// authors before pure contributors, every other source keeps its order.
fn reaching_order(kind: SourceKind, mentions: &[Mention]) -> Vec<Mention> {
    if kind != SourceKind::CodeMetaFile {
        return mentions.to_vec();
    }
    let authors = mentions.iter().filter(|m| m.person.roles.contains(Role::Author));
    let others = mentions.iter().filter(|m| !m.person.roles.contains(Role::Author));
    authors.chain(others).cloned().collect()
}

/// Expected pipeline output computed from the per-source truth alone.
pub fn pipeline_oracle(
    truths: &[(SourceKind, SourceTruth, bool)],
    precedence: &Precedence,
) -> (BTreeMap<Field, (FieldValue, SourceKind)>, Vec<Person>, BTreeMap<String, Value>) {
    let parts: Vec<PartialRecord> = truths
        .iter()
        .map(|(kind, truth, _)| {
            let mut record = fill_record(&truth.fields);
            record.extras = truth.extras.clone();
            PartialRecord { record, source: *kind }
        })
        .collect();
    let lists: Vec<(Vec<Mention>, SourceKind)> =
        truths.iter().map(|(kind, truth, _)| (reaching_order(*kind, &truth.mentions), *kind)).collect();
    (precedence_oracle(&parts, precedence), person_oracle(&lists, precedence), extras_oracle(&parts, precedence))
}

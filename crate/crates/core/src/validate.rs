//! Rule checks over a [`CodeMetaRecord`]. Validation reports; it never aborts.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::date::normalize_date;
use crate::model::{CodeMetaRecord, Field, FieldKind};
use crate::vocab::VocabularySet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "name-present")]
    NamePresent,
    #[serde(rename = "license-in-SPDX")]
    LicenseInSpdx,
    #[serde(rename = "URL-well-formed")]
    UrlWellFormed,
    #[serde(rename = "date-ISO-8601")]
    DateIso8601,
    #[serde(rename = "person-invariants")]
    PersonInvariants,
    #[serde(rename = "no-duplicates")]
    NoDuplicates,
    /// A value in an imported document had the wrong JSON type.
    #[serde(rename = "wrong-type")]
    WrongType,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::NamePresent => "name-present",
            Rule::LicenseInSpdx => "license-in-SPDX",
            Rule::UrlWellFormed => "URL-well-formed",
            Rule::DateIso8601 => "date-ISO-8601",
            Rule::PersonInvariants => "person-invariants",
            Rule::NoDuplicates => "no-duplicates",
            Rule::WrongType => "wrong-type",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// One broken rule. `field` is a field name, or `persons[i]` for a person.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: Rule,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, rule: Rule, message: impl Into<String>) -> Self {
        Violation { field: field.into(), rule, message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: [{}] {}", self.field, self.rule, self.message)
    }
}

/// `http`/`https` scheme and a non-empty host.
pub fn is_well_formed_url(url: &str) -> bool {
    let Some((scheme, rest)) = url.split_once("://") else {
        return false;
    };
    if !scheme.eq_ignore_ascii_case("http") && !scheme.eq_ignore_ascii_case("https") {
        return false;
    }
    let authority = rest.split(['/', '?', '#']).next().unwrap_or("");
    let host = authority.rsplit('@').next().unwrap_or("");
    let host = host.split(':').next().unwrap_or("");
    !host.is_empty() && !url.chars().any(char::is_whitespace)
}

/// Splits a simple SPDX expression into its license identifiers.
fn license_operands(expr: &str) -> impl Iterator<Item = &str> {
    expr.split(|c: char| c.is_whitespace() || c == '(' || c == ')')
        .filter(|t| !t.is_empty() && !matches!(*t, "OR" | "AND" | "or" | "and"))
}

fn check_license(license: &str, vocab: &VocabularySet) -> bool {
    let mut operands = license_operands(license).peekable();
    if operands.peek().is_none() {
        return false;
    }
    // `WITH` exceptions are not part of the license list; only check ids.
    let mut skip_next = false;
    for op in operands {
        if skip_next {
            skip_next = false;
            continue;
        }
        if op == "WITH" {
            skip_next = true;
            continue;
        }
        let id = op.strip_suffix('+').unwrap_or(op);
        if !vocab.licenses.contains(id) {
            return false;
        }
    }
    true
}

/// Checks a record and returns one [`Violation`] per broken rule.
pub fn validate_record(record: &CodeMetaRecord, vocab: &VocabularySet) -> Vec<Violation> {
    let mut out = Vec::new();
    if record.name.as_deref().is_none_or(|n| n.trim().is_empty()) {
        out.push(Violation::new("name", Rule::NamePresent, "a software name is required"));
    }
    for field in Field::ALL {
        match field.kind() {
            FieldKind::Url => {
                if let Some(url) = record.text(field) {
                    if !is_well_formed_url(url) {
                        out.push(Violation::new(
                            field.as_str(),
                            Rule::UrlWellFormed,
                            format!("`{url}` is not an http(s) URL with a host"),
                        ));
                    }
                }
            }
            FieldKind::Date => {
                if let Some(date) = record.text(field) {
                    if normalize_date(date).is_none() {
                        out.push(Violation::new(
                            field.as_str(),
                            Rule::DateIso8601,
                            format!("`{date}` is not an ISO-8601 date (YYYY-MM-DD)"),
                        ));
                    }
                }
            }
            FieldKind::License => {
                if let Some(license) = record.text(field) {
                    if !check_license(license, vocab) {
                        out.push(Violation::new(
                            field.as_str(),
                            Rule::LicenseInSpdx,
                            format!("`{license}` is not a known SPDX license identifier"),
                        ));
                    }
                }
            }
            FieldKind::List => {
                let items = record.list(field).unwrap_or_default();
                for (i, item) in items.iter().enumerate() {
                    if items[..i].contains(item) {
                        out.push(Violation::new(
                            field.as_str(),
                            Rule::NoDuplicates,
                            format!("`{item}` appears more than once"),
                        ));
                    }
                }
            }
            FieldKind::Text | FieldKind::Persons => {}
        }
    }
    for (i, person) in record.persons.iter().enumerate() {
        let at = format!("persons[{i}]");
        if person.roles.is_empty() {
            out.push(Violation::new(at.clone(), Rule::PersonInvariants, "a person needs at least one role"));
        }
        if !person.is_identifiable() {
            out.push(Violation::new(
                at.clone(),
                Rule::PersonInvariants,
                "a person needs a family name, an email or an identifier",
            ));
        }
        if let Some(id) = &person.id {
            if !is_well_formed_url(id) {
                out.push(Violation::new(at, Rule::UrlWellFormed, format!("`{id}` is not an http(s) identifier")));
            }
        }
    }
    out
}

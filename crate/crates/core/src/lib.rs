//! Metadata extraction and curation engine for research software.
//!
//! The crate is `no_std` (with `alloc`): every operation is a pure function
//! over in-memory values. Network access goes through the [`HttpTransport`]
//! trait, which callers implement; clocks and identifiers are supplied by the
//! caller as well.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`harvest`] pulls raw [`SourceRecord`]s from the hosting-platform API,
//!    `CITATION.cff` and `codemeta.json`.
//! 2. [`crosswalk`] maps each source record onto a sparse [`CodeMetaRecord`].
//! 3. [`merge`] combines the partial records by source precedence, keeps
//!    per-field provenance and classifies each field's curation status.
//! 4. [`codemeta`] serializes the curated record as CodeMeta 2.0 JSON-LD.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cff;
pub mod codemeta;
pub mod crosswalk;
pub mod curation;
pub mod date;
pub mod harvest;
pub mod merge;
pub mod model;
pub mod pipeline;
pub mod validate;
pub mod vocab;

pub use codemeta::{export_codemeta, parse_codemeta, parse_codemeta_value, ExportError, ParseError};
pub use crosswalk::{apply_crosswalk, CrosswalkTable, MappingRule, PartialRecord, RuleReport, Transform};
pub use curation::{CurationError, FieldEdit, Session};
pub use harvest::{
    fetch_repo_file, harvest_all, harvest_api, parse_repo_url, AuthToken, HarvestError, HarvestOutcome, HarvestReport,
    HttpRequest, HttpResponse, HttpTransport, RepoLocator, SourceRecord, TokenOrigin, TransportFailure,
};
pub use merge::{
    classify_fields, merge_person_lists, merge_sources, Precedence, ProvenanceMap, ReviewFields, StatusMap,
};
pub use model::{CodeMetaRecord, CurationStatus, Field, FieldValue, Person, Role, RoleSet, SourceKind};
pub use pipeline::{extract, Extraction, PipelineConfig};
pub use validate::{validate_record, Rule, Violation};
pub use vocab::{filter_vocabulary, load_vocabulary, Vocabulary, VocabularyKind, VocabularySet};

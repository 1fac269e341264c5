//! Harvest, crosswalk, merge and classify in one call.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::crosswalk::{apply_crosswalk, Crosswalks, RuleReport};
use crate::harvest::{harvest_all, AuthToken, HarvestError, HarvestReport, HttpTransport, RepoLocator, SourceRecord};
use crate::merge::{classify_fields, merge_sources, Precedence, ProvenanceMap, ReviewFields, StatusMap};
use crate::model::CodeMetaRecord;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PipelineConfig {
    pub precedence: Precedence,
    pub review_fields: ReviewFields,
    pub crosswalks: Crosswalks,
}

/// Everything the pipeline learned about one repository.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub report: HarvestReport,
    pub rule_reports: Vec<RuleReport>,
    pub record: CodeMetaRecord,
    pub provenance: ProvenanceMap,
    pub statuses: StatusMap,
}

/// Crosswalks and merges already harvested records.
pub fn process(records: &[SourceRecord], report: HarvestReport, config: &PipelineConfig) -> Extraction {
    let (parts, rule_reports): (Vec<_>, Vec<_>) =
        records.iter().map(|r| apply_crosswalk(r, &config.crosswalks)).unzip();
    let (record, provenance) = merge_sources(&parts, &config.precedence);
    let statuses = classify_fields(&record, &provenance, &BTreeSet::new(), &config.review_fields);
    Extraction { report, rule_reports, record, provenance, statuses }
}

/// Runs the full extraction for one repository.
pub fn extract(
    locator: &RepoLocator,
    token: &AuthToken,
    transport: &dyn HttpTransport,
    config: &PipelineConfig,
) -> Result<Extraction, HarvestError> {
    let harvested = harvest_all(locator, token, transport)?;
    Ok(process(&harvested.records, harvested.report, config))
}

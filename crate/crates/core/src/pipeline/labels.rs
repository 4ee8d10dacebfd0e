//! Binary label construction from ER/PR/HER2 clinical status fields.
//!
//! A record is labeled 1 (triple-negative) only when ER, PR, and the
//! effective HER2 status are all definitively negative. HER2 has up to three
//! recorded readings — IHC level, IHC status, and FISH — and FISH takes
//! precedence over the IHC status whenever it is recorded. Conflicting
//! definite readings mark the record as suspect for manual review without
//! changing the label rule.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClinicalValue {
    Positive,
    Negative,
    Indeterminate,
    Equivocal,
    Missing,
}

impl ClinicalValue {
    pub const ALL: [ClinicalValue; 5] = [
        ClinicalValue::Positive,
        ClinicalValue::Negative,
        ClinicalValue::Indeterminate,
        ClinicalValue::Equivocal,
        ClinicalValue::Missing,
    ];

    /// Lenient parse: accepts the spelled-out names, common abbreviations,
    /// and the +/- shorthand seen in clinical exports.
    pub fn parse(raw: &str) -> std::result::Result<Self, String> {
        let v = raw.trim().to_ascii_lowercase();
        Ok(match v.as_str() {
            "positive" | "pos" | "+" | "(+)" => ClinicalValue::Positive,
            "negative" | "neg" | "-" | "(-)" | "\u{2212}" | "(\u{2212})" => ClinicalValue::Negative,
            "indeterminate" | "ind" => ClinicalValue::Indeterminate,
            "equivocal" | "eq" => ClinicalValue::Equivocal,
            "" | "na" | "n/a" | "missing" | "unknown" | "not evaluated" => ClinicalValue::Missing,
            _ => return Err(format!("unrecognized clinical value '{raw}'")),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClinicalValue::Positive => "positive",
            ClinicalValue::Negative => "negative",
            ClinicalValue::Indeterminate => "indeterminate",
            ClinicalValue::Equivocal => "equivocal",
            ClinicalValue::Missing => "missing",
        }
    }
}

impl fmt::Display for ClinicalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClinicalRecord {
    pub individual_id: String,
    pub er_status: ClinicalValue,
    pub pr_status: ClinicalValue,
    pub her2_ihc_level: ClinicalValue,
    pub her2_ihc_status: ClinicalValue,
    pub her2_fish_status: ClinicalValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Tnbc,
    NonTnbc,
    Unlabelable,
}

impl Label {
    /// CSV encoding: 1 / 0 / NA.
    pub fn as_csv(self) -> &'static str {
        match self {
            Label::Tnbc => "1",
            Label::NonTnbc => "0",
            Label::Unlabelable => "NA",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Her2Source {
    Fish,
    IhcStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelResult {
    pub label: Label,
    /// Which HER2 reading decided the effective status; None when no usable
    /// HER2 reading exists.
    pub her2_source: Option<Her2Source>,
    pub suspect: bool,
    pub suspect_reason: Option<String>,
}

fn definite_conflict(a: ClinicalValue, b: ClinicalValue) -> bool {
    matches!(
        (a, b),
        (ClinicalValue::Positive, ClinicalValue::Negative)
            | (ClinicalValue::Negative, ClinicalValue::Positive)
    )
}

/// Derive the binary label for one record. Total over all value
/// combinations: indeterminate, equivocal, and missing readings block a
/// triple-negative call but only a definite positive forces label 0.
pub fn derive_label(rec: &ClinicalRecord) -> LabelResult {
    use ClinicalValue::*;

    let (effective_her2, her2_source) = if rec.her2_fish_status != Missing {
        (rec.her2_fish_status, Some(Her2Source::Fish))
    } else if rec.her2_ihc_status != Missing {
        (rec.her2_ihc_status, Some(Her2Source::IhcStatus))
    } else {
        (Missing, None)
    };

    let decisive = [rec.er_status, rec.pr_status, effective_her2];
    let label = if decisive.iter().all(|v| *v == Negative) {
        Label::Tnbc
    } else if decisive.iter().any(|v| *v == Positive) {
        Label::NonTnbc
    } else {
        Label::Unlabelable
    };

    let mut reasons = Vec::new();
    if definite_conflict(rec.her2_ihc_level, rec.her2_ihc_status) {
        reasons.push(format!(
            "her2_ihc_level {} conflicts with her2_ihc_status {}",
            rec.her2_ihc_level, rec.her2_ihc_status
        ));
    }
    if definite_conflict(rec.her2_ihc_status, rec.her2_fish_status) {
        reasons.push(format!(
            "her2_ihc_status {} conflicts with her2_fish_status {}",
            rec.her2_ihc_status, rec.her2_fish_status
        ));
    }
    let suspect = !reasons.is_empty();
    let suspect_reason = if suspect { Some(reasons.join("; ")) } else { None };

    LabelResult {
        label,
        her2_source,
        suspect,
        suspect_reason,
    }
}

const CLINICAL_COLUMNS: [&str; 6] = [
    "individual_id",
    "er_status",
    "pr_status",
    "her2_ihc_level",
    "her2_ihc_status",
    "her2_fish_status",
];

/// Read clinical records from CSV (or TSV, by extension). The header must
/// contain all six clinical columns; order is free and extra columns are
/// ignored.
pub fn read_clinical_records(path: &Path) -> Result<Vec<ClinicalRecord>> {
    let delim = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("tsv")) {
        b'\t'
    } else {
        b','
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delim)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Data {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Data {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .clone();
    let mut idx = [0usize; 6];
    for (slot, name) in CLINICAL_COLUMNS.iter().enumerate() {
        idx[slot] = headers
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| {
                Error::UnknownColumn(format!("{name} (required in {})", path.display()))
            })?;
    }

    let mut records = Vec::new();
    for (row_no, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Data {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let line = row_no + 2; // header is line 1
        let field = |slot: usize| -> Result<ClinicalValue> {
            let raw = row.get(idx[slot]).unwrap_or("");
            ClinicalValue::parse(raw).map_err(|message| Error::Parse {
                path: path.to_path_buf(),
                row: line,
                col: CLINICAL_COLUMNS[slot].to_string(),
                message,
            })
        };
        records.push(ClinicalRecord {
            individual_id: row.get(idx[0]).unwrap_or("").to_string(),
            er_status: field(1)?,
            pr_status: field(2)?,
            her2_ihc_level: field(3)?,
            her2_ihc_status: field(4)?,
            her2_fish_status: field(5)?,
        });
    }
    Ok(records)
}

/// Labels CSV: one line per record with the derived label, the HER2 source
/// that decided it, and the suspect flag.
pub fn write_labels_csv<W: Write>(
    mut w: W,
    records: &[ClinicalRecord],
    results: &[LabelResult],
) -> Result<()> {
    writeln!(w, "individual_id,label,her2_source,suspect")?;
    for (rec, res) in records.iter().zip(results.iter()) {
        let source = match res.her2_source {
            Some(Her2Source::Fish) => "fish",
            Some(Her2Source::IhcStatus) => "ihc-status",
            None => "",
        };
        writeln!(
            w,
            "{},{},{},{}",
            rec.individual_id,
            res.label.as_csv(),
            source,
            res.suspect
        )?;
    }
    Ok(())
}

/// Suspects report: one line per fired discordance rule, for manual review.
pub fn write_suspects_csv<W: Write>(
    mut w: W,
    records: &[ClinicalRecord],
    results: &[LabelResult],
) -> Result<()> {
    writeln!(w, "individual_id,label,reason")?;
    for (rec, res) in records.iter().zip(results.iter()) {
        if let Some(reason) = &res.suspect_reason {
            writeln!(
                w,
                "{},{},\"{}\"",
                rec.individual_id,
                res.label.as_csv(),
                reason
            )?;
        }
    }
    Ok(())
}

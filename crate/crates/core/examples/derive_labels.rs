//! Derive triple-negative labels from receptor statuses, with FISH taking
//! precedence over the IHC reading and conflicts audited as suspect.
//!
//! Run with: cargo run --release --example derive_labels

use trimlogit::pipeline::labels::{derive_label, ClinicalRecord, ClinicalValue};

fn record(id: &str, fields: [&str; 5]) -> ClinicalRecord {
    let v = |s: &str| ClinicalValue::parse(s).expect("example values parse");
    ClinicalRecord {
        individual_id: id.to_string(),
        er_status: v(fields[0]),
        pr_status: v(fields[1]),
        her2_ihc_level: v(fields[2]),
        her2_ihc_status: v(fields[3]),
        her2_fish_status: v(fields[4]),
    }
}

fn main() {
    // columns: ER, PR, HER2 IHC level, HER2 IHC status, HER2 FISH
    let cohort = vec![
        record("P-01", ["negative", "negative", "", "negative", ""]),
        record("P-02", ["negative", "negative", "", "negative", "positive"]),
        record("P-03", ["negative", "negative", "negative", "positive", ""]),
        record("P-04", ["positive", "negative", "", "", ""]),
        record("P-05", ["negative", "negative", "", "", ""]),
        record("P-06", ["negative", "negative", "equivocal", "negative", "negative"]),
    ];

    println!(
        "{:<6} {:>6}  {:<11} {:<8} reason",
        "id", "label", "her2 from", "suspect"
    );
    for rec in &cohort {
        let out = derive_label(rec);
        println!(
            "{:<6} {:>6}  {:<11} {:<8} {}",
            rec.individual_id,
            out.label.as_csv(),
            match out.her2_source {
                Some(trimlogit::pipeline::labels::Her2Source::Fish) => "FISH",
                Some(trimlogit::pipeline::labels::Her2Source::IhcStatus) => "IHC status",
                None => "-",
            },
            out.suspect,
            out.suspect_reason.as_deref().unwrap_or("-")
        );
    }

    // P-02 shows the precedence rule: IHC alone would have called it
    // triple-negative, but the FISH positive overrides and flags it.
}

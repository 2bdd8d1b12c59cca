use std::fmt::Write as _;

use super::{ComparisonCounts, CurvePoint};

/// `cost_model,lower,higher,identical,not_activated`, one row per model.
pub fn comparison_csv<'a>(
    rows: impl IntoIterator<Item = (&'a str, &'a ComparisonCounts)>,
) -> String {
    let mut out = String::from("cost_model,lower,higher,identical,not_activated\n");
    for (name, c) in rows {
        let _ = writeln!(
            out,
            "{name},{},{},{},{}",
            c.lower, c.higher, c.identical, c.not_activated
        );
    }
    out
}

/// The three counts stacked as `lower / higher / identical`.
pub fn stacked_counts(c: &ComparisonCounts) -> String {
    format!("{} / {} / {}", c.lower, c.higher, c.identical)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `reject_param,model,acc,auc,gmean,observed_rej`, sorted by level then
/// model name. Undefined values are left empty.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        a.reject_param
            .total_cmp(&b.reject_param)
            .then(a.model.as_str().cmp(b.model.as_str()))
    });
    let mut out = String::from("reject_param,model,acc,auc,gmean,observed_rej\n");
    for p in &sorted {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.reject_param,
            p.model,
            opt(p.acc),
            opt(p.auc),
            opt(p.gmean),
            opt(p.observed_rej)
        );
    }
    out
}

//! Evaluation report: JSON for machines, an aligned table for humans.

use serde::{Deserialize, Serialize};

use crate::eval::{DetectionReport, IdleReport, MotReport};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub idle: Option<IdleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mot: Option<MotReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionReport>,
}

impl EvalReport {
    pub fn new(
        idle: Option<IdleReport>,
        mot: Option<MotReport>,
        detection: Option<DetectionReport>,
    ) -> Self {
        EvalReport { version: REPORT_VERSION, idle, mot, detection }
    }
}

fn pct(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

/// Renders the report as an aligned two-column table per section.
pub fn render_report_table(report: &EvalReport) -> String {
    let mut rows: Vec<(String, String)> = Vec::new();

    if let Some(d) = &report.detection {
        rows.push(("-- Detection --".to_string(), String::new()));
        rows.push(("Precision".to_string(), pct(d.overall.precision)));
        rows.push(("Recall".to_string(), pct(d.overall.recall)));
        rows.push(("F1".to_string(), pct(d.overall.f1)));
    }
    if let Some(i) = &report.idle {
        rows.push(("-- Idle Identification --".to_string(), String::new()));
        rows.push(("Accuracy".to_string(), pct(i.accuracy)));
        rows.push(("Precision".to_string(), pct(i.precision)));
        rows.push(("Recall".to_string(), pct(i.recall)));
        rows.push(("F1".to_string(), pct(i.f1)));
        rows.push((
            "Windows (tp/fp/tn/fn)".to_string(),
            format!("{}/{}/{}/{}", i.tp, i.fp, i.tn, i.fn_),
        ));
    }
    if let Some(m) = &report.mot {
        rows.push(("-- Tracking --".to_string(), String::new()));
        rows.push(("MOTA".to_string(), format!("{:.4}", m.mota)));
        rows.push(("MOTP".to_string(), format!("{:.4}", m.motp)));
        rows.push(("IDF1".to_string(), format!("{:.4}", m.idf1)));
        rows.push(("ID Precision".to_string(), format!("{:.4}", m.id_precision)));
        rows.push(("ID Recall".to_string(), format!("{:.4}", m.id_recall)));
        rows.push(("ID Switches".to_string(), m.id_switches.to_string()));
        rows.push(("False Positives".to_string(), m.false_positives.to_string()));
        rows.push(("False Negatives".to_string(), m.false_negatives.to_string()));
    }

    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        if v.is_empty() {
            out.push_str(&format!("{k}\n"));
        } else {
            out.push_str(&format!("{k:<width$}  {v}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_exact_metric_row_names() {
        let idle = IdleReport::from_counts(3, 1, 4, 2).unwrap();
        let report = EvalReport::new(Some(idle), None, None);
        let table = render_report_table(&report);
        for name in ["Accuracy", "Precision", "Recall", "F1"] {
            assert!(
                table.lines().any(|l| l.starts_with(name)),
                "missing row {name} in:\n{table}"
            );
        }
        // percentages render with two decimals (70.00%, 76.42%, ...)
        assert!(table.contains("70.00%"), "{table}");
        assert!(table.contains("66.67%"), "{table}");
    }

    #[test]
    fn json_round_trips() {
        let idle = IdleReport::from_counts(3, 1, 4, 2).unwrap();
        let report = EvalReport::new(Some(idle), None, None);
        let text = serde_json::to_string_pretty(&report).unwrap();
        let back: EvalReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }
}

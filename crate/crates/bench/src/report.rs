//! Experiment results as JSON and aligned text tables.

use serde::Serialize;
use serde_json::{json, Value};
use snewton_core::linalg::CVector;

use crate::catalog::Unavailable;

/// Mean wall-clock seconds for one iteration of each method.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Timing {
    pub two_step: f64,
    pub lvz: f64,
}

/// One (system, configuration) pair.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ReportRow {
    pub system: String,
    pub config: String,
    /// Estimated breadth at the start point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<usize>,
    /// `ceil(log10 ||x_k - target||)` per iterate, `None` for an exact hit.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub exponents: Vec<Option<i32>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationary: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip)]
    pub timing: Option<Timing>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub rows: Vec<ReportRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unavailable: Vec<Unavailable>,
}

pub fn pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn format_exponent(e: Option<i32>) -> String {
    match e {
        Some(e) => format!("{e:03}"),
        None => "exact".to_string(),
    }
}

fn format_point(p: &[[f64; 2]]) -> String {
    let coords: Vec<String> = p
        .iter()
        .map(|&[re, im]| {
            if im == 0.0 {
                format!("{re:.4e}")
            } else {
                format!("{re:.4e}{im:+.4e}i")
            }
        })
        .collect();
    format!("({})", coords.join(", "))
}

impl ExperimentReport {
    pub fn new(experiment: &str) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            rows: Vec::new(),
            unavailable: Vec::new(),
        }
    }

    /// Timings appear only when requested, keeping the remaining output
    /// reproducible byte for byte.
    pub fn to_json(&self, include_timing: bool) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if include_timing {
            for (row, out) in self.rows.iter().zip(v["rows"].as_array_mut().unwrap()) {
                if let Some(t) = row.timing {
                    out["seconds"] = json!(t);
                }
            }
        }
        v
    }

    pub fn to_table(&self, include_timing: bool) -> String {
        let mut header = vec!["system", "config", "kappa*", "exponents"];
        let with_limit = self.rows.iter().any(|r| r.limit.is_some());
        let with_time = include_timing && self.rows.iter().any(|r| r.timing.is_some());
        if with_limit {
            header.extend(["limit", "stationary"]);
        }
        if with_time {
            header.extend(["lvz (s)", "two-step (s)"]);
        }
        let mut cells: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for r in &self.rows {
            let exps: Vec<String> = r.exponents.iter().map(|&e| format_exponent(e)).collect();
            let mut row = vec![
                r.system.clone(),
                r.config.clone(),
                r.kappa.map_or("-".to_string(), |k| k.to_string()),
                if exps.is_empty() {
                    "-".to_string()
                } else {
                    exps.join(" -> ")
                },
            ];
            if with_limit {
                row.push(r.limit.as_deref().map_or("-".to_string(), format_point));
                row.push(r.stationary.map_or("-".to_string(), |s| s.to_string()));
            }
            if with_time {
                match r.timing {
                    Some(t) => row.extend([format!("{:.6}", t.lvz), format!("{:.6}", t.two_step)]),
                    None => row.extend(["-".to_string(), "-".to_string()]),
                }
            }
            cells.push(row);
        }
        let widths: Vec<usize> = (0..cells[0].len())
            .map(|c| {
                cells
                    .iter()
                    .map(|r| r[c].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        for (i, row) in cells.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(s, &w)| format!("{s:<w$}"))
                .collect();
            out.push_str(line.join(" | ").trim_end());
            out.push('\n');
            if i == 0 {
                let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
                out.push_str(&rule.join("-+-"));
                out.push('\n');
            }
        }
        for u in &self.unavailable {
            out.push_str(&format!("unavailable: {} ({})\n", u.name, u.reason));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo");
        r.rows.push(ReportRow {
            system: "a".into(),
            config: "tau=0.1".into(),
            kappa: Some(2),
            exponents: vec![Some(-2), Some(-5), None],
            timing: Some(Timing {
                two_step: 0.5,
                lvz: 1.0,
            }),
            ..Default::default()
        });
        r
    }

    #[test]
    fn exponents_are_zero_padded() {
        assert_eq!(format_exponent(Some(-2)), "-02");
        assert_eq!(format_exponent(Some(-14)), "-14");
        assert_eq!(format_exponent(None), "exact");
    }

    #[test]
    fn timing_only_on_request() {
        let r = sample();
        assert!(r.to_json(false)["rows"][0].get("seconds").is_none());
        assert_eq!(r.to_json(true)["rows"][0]["seconds"]["lvz"], 1.0);
        assert!(!r.to_table(false).contains("lvz"));
        assert!(r.to_table(true).contains("1.000000"));
    }

    #[test]
    fn table_columns_align() {
        let t = sample().to_table(false);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0].find('|'), lines[2].find('|'));
        assert!(lines[2].contains("-02 -> -05 -> exact"));
    }
}

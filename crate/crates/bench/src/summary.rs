//! Per-arm statistics across seeds, rendered as text, CSV and SVG.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::record::RunRecord;
use crate::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub suite: String,
    pub arm: String,
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub suite: String,
    pub arm: String,
    pub seed: u64,
    pub error: String,
}

/// Rows sorted by suite, arm and metric. Suites are never pooled.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub failures: Vec<Failure>,
}

/// Mean and sample standard deviation. Values are sorted first so the result
/// does not depend on input order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

pub fn summarize(records: &[RunRecord]) -> Result<Summary, BenchError> {
    if records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    let mut groups: BTreeMap<(String, String, String), Vec<f64>> = BTreeMap::new();
    let mut failures = Vec::new();
    for r in records {
        if let Some(e) = &r.error {
            failures.push(Failure {
                suite: r.suite.clone(),
                arm: r.arm.clone(),
                seed: r.seed,
                error: e.clone(),
            });
            continue;
        }
        for (m, &v) in &r.metrics {
            groups
                .entry((r.suite.clone(), r.arm.clone(), m.clone()))
                .or_default()
                .push(v);
        }
    }
    failures.sort_by(|a, b| {
        (&a.suite, &a.arm, a.seed, &a.error).cmp(&(&b.suite, &b.arm, b.seed, &b.error))
    });
    let rows = groups
        .into_iter()
        .map(|((suite, arm, metric), values)| {
            let (mean, std) = mean_std(&values);
            SummaryRow {
                suite,
                arm,
                metric,
                n: values.len(),
                mean,
                std,
            }
        })
        .collect();
    Ok(Summary { rows, failures })
}

impl Summary {
    pub fn suites(&self) -> Vec<&str> {
        let mut s: Vec<&str> = self.rows.iter().map(|r| r.suite.as_str()).collect();
        s.dedup();
        s
    }

    pub fn get(&self, suite: &str, arm: &str, metric: &str) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.suite == suite && r.arm == arm && r.metric == metric)
    }

    /// One block per suite with aligned columns.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for suite in self.suites() {
            let rows: Vec<&SummaryRow> = self.rows.iter().filter(|r| r.suite == suite).collect();
            let aw = rows.iter().map(|r| r.arm.len()).max().unwrap_or(0).max(3);
            let mw = rows
                .iter()
                .map(|r| r.metric.len())
                .max()
                .unwrap_or(0)
                .max(6);
            writeln!(out, "[{suite}]").unwrap();
            writeln!(
                out,
                "{:aw$}  {:mw$}  {:>3}  {:>9}  {:>9}",
                "arm", "metric", "n", "mean", "std"
            )
            .unwrap();
            for r in rows {
                writeln!(
                    out,
                    "{:aw$}  {:mw$}  {:>3}  {:>9.4}  {:>9.4}",
                    r.arm, r.metric, r.n, r.mean, r.std
                )
                .unwrap();
            }
            out.push('\n');
        }
        for f in &self.failures {
            writeln!(
                out,
                "FAILED {} {} seed {}: {}",
                f.suite, f.arm, f.seed, f.error
            )
            .unwrap();
        }
        out
    }

    /// Columns: `suite,arm,metric,n,mean,std`. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), BenchError> {
        let mut wtr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wtr.serialize(r)?;
        }
        wtr.flush().map_err(|e| BenchError::io("summary csv", e))?;
        Ok(())
    }

    /// SVG line plot of `metric` means (with ±std bars) across the arms of
    /// `suite`, in row order.
    pub fn render_svg(&self, suite: &str, metric: &str) -> Option<String> {
        let rows: Vec<&SummaryRow> = self
            .rows
            .iter()
            .filter(|r| r.suite == suite && r.metric == metric)
            .collect();
        if rows.is_empty() {
            return None;
        }
        let (w, h, pad) = (480.0, 320.0, 48.0);
        let hi = rows.iter().map(|r| r.mean + r.std).fold(f64::MIN, f64::max);
        let lo = rows
            .iter()
            .map(|r| r.mean - r.std)
            .fold(f64::MAX, f64::min)
            .min(0.0);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let x = |i: usize| pad + (w - 2.0 * pad) * (i as f64 + 0.5) / rows.len() as f64;
        let y = |v: f64| h - pad - (h - 2.0 * pad) * (v - lo) / span;
        let mut s = String::new();
        writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
        writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{suite}: {metric}</text>"#,
            w / 2.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<line x1="{pad}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/><line x1="{pad}" y1="{pad}" x2="{pad}" y2="{0}" stroke="black"/>"#,
            h - pad,
            w - pad
        )
        .unwrap();
        for v in [lo, hi] {
            writeln!(
                s,
                r#"<text x="{}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="10">{v:.3}</text>"#,
                pad - 4.0,
                y(v) + 3.0
            )
            .unwrap();
        }
        let points: Vec<String> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| format!("{:.1},{:.1}", x(i), y(r.mean)))
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        )
        .unwrap();
        for (i, r) in rows.iter().enumerate() {
            writeln!(
                s,
                r#"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="gray"/><circle cx="{0:.1}" cy="{3:.1}" r="3" fill="steelblue"/>"#,
                x(i),
                y(r.mean - r.std),
                y(r.mean + r.std),
                y(r.mean)
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="{:.1}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="10">{}</text>"#,
                x(i),
                h - pad + 14.0,
                r.arm
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        Some(s)
    }
}

pub fn read_summary_csv<R: Read>(r: R) -> Result<Vec<SummaryRow>, BenchError> {
    let mut rdr = csv::Reader::from_reader(r);
    let expected = ["suite", "arm", "metric", "n", "mean", "std"];
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(expected) {
        return Err(BenchError::SummaryCsv(format!(
            "unexpected header {headers:?}"
        )));
    }
    rdr.deserialize()
        .map(|row| row.map_err(BenchError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_arithmetic() {
        assert_eq!(mean_std(&[5.0]), (5.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}

//! Stable JSON output and SVG charts.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cleanse::{language_stats, LabelStats};
use crate::corpus::Record;
use crate::metrics::MetricsReport;

/// Pretty JSON with object keys sorted lexicographically at every level.
pub fn to_stable_json<T: Serialize + ?Sized>(value: &T) -> String {
    // serde_json's default map is ordered, so a round trip through `Value`
    // sorts struct fields as well as map keys.
    let v = serde_json::to_value(value).expect("report types serialize");
    serde_json::to_string_pretty(&v).expect("value serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub stats: LabelStats,
    #[serde(skip)]
    pub svg: String,
}

pub fn distribution_report<R: Record>(records: &[R], title: &str) -> DistributionReport {
    let stats = language_stats(records);
    let svg = distribution_svg(&stats, title);
    DistributionReport { stats, svg }
}

const BAR_WIDTH: f64 = 18.0;
const GROUP_GAP: f64 = 16.0;
const PLOT_HEIGHT: f64 = 240.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 40.0;
const POSITIVE_FILL: &str = "#4878a8";
const NEGATIVE_FILL: &str = "#d8833a";

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Rounds an axis maximum up to 1, 2 or 5 times a power of ten.
fn nice_ceiling(max: f64) -> f64 {
    if max <= 0.0 {
        return 1.0;
    }
    let magnitude = 10f64.powf(max.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * magnitude)
        .find(|&v| v >= max)
        .unwrap_or(10.0 * magnitude)
}

struct Group {
    label: String,
    values: Vec<f64>,
}

fn grouped_bars(
    title: &str,
    groups: &[Group],
    series: &[(&str, &str)],
    y_max: f64,
    tick_format: fn(f64) -> String,
) -> String {
    let bars = series.len() as f64;
    let group_width = bars * BAR_WIDTH + GROUP_GAP;
    let width = MARGIN_LEFT + group_width * groups.len().max(1) as f64 + 140.0;
    let height = MARGIN_TOP + PLOT_HEIGHT + MARGIN_BOTTOM;
    let base = MARGIN_TOP + PLOT_HEIGHT;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN_LEFT}" y="20" font-size="14">{}</text>"#,
        escape(title)
    );
    for k in 0..=4 {
        let v = y_max * k as f64 / 4.0;
        let y = base - PLOT_HEIGHT * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{}</text>"##,
            width - 140.0,
            MARGIN_LEFT - 6.0,
            y + 4.0,
            tick_format(v)
        );
    }
    for (g, group) in groups.iter().enumerate() {
        let x0 = MARGIN_LEFT + GROUP_GAP / 2.0 + g as f64 * group_width;
        for (b, (&value, (name, fill))) in group.values.iter().zip(series).enumerate() {
            let h = if y_max > 0.0 {
                PLOT_HEIGHT * value / y_max
            } else {
                0.0
            };
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{BAR_WIDTH}" height="{h}" fill="{fill}"><title>{} {}: {}</title></rect>"#,
                x0 + b as f64 * BAR_WIDTH,
                base - h,
                escape(&group.label),
                name,
                tick_format(value)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            x0 + bars * BAR_WIDTH / 2.0,
            base + 16.0,
            escape(&group.label)
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#,
        width - 140.0
    );
    for (i, (name, fill)) in series.iter().enumerate() {
        let y = MARGIN_TOP + 16.0 * i as f64;
        let x = width - 120.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{y}" width="10" height="10" fill="{fill}"/><text x="{}" y="{}">{name}</text>"#,
            x + 14.0,
            y + 9.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// One group per language with a positive and a negative bar.
pub fn distribution_svg(stats: &LabelStats, title: &str) -> String {
    let groups: Vec<Group> = stats
        .languages
        .iter()
        .map(|(lang, c)| Group {
            label: lang.code().to_string(),
            values: vec![c.positives as f64, c.negatives as f64],
        })
        .collect();
    let max = stats
        .languages
        .values()
        .map(|c| c.positives.max(c.negatives))
        .max()
        .unwrap_or(0) as f64;
    grouped_bars(
        title,
        &groups,
        &[("positive", POSITIVE_FILL), ("negative", NEGATIVE_FILL)],
        nice_ceiling(max),
        |v| format!("{}", v.round() as u64),
    )
}

/// Per-language precision, recall and F1 bars.
pub fn metrics_svg(report: &MetricsReport, title: &str) -> String {
    let groups: Vec<Group> = report
        .languages
        .iter()
        .map(|(lang, s)| Group {
            label: lang.code().to_string(),
            values: vec![s.precision, s.recall, s.f1],
        })
        .collect();
    grouped_bars(
        title,
        &groups,
        &[
            ("precision", "#7a9e7e"),
            ("recall", "#b5a642"),
            ("f1", POSITIVE_FILL),
        ],
        1.0,
        |v| format!("{v:.2}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, LanguageTag, QIRecord};
    use std::collections::BTreeMap;

    #[test]
    fn keys_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: u8,
            alpha: BTreeMap<String, u8>,
        }
        let json = to_stable_json(&S {
            zeta: 1,
            alpha: [("b".to_string(), 2), ("a".to_string(), 1)].into(),
        });
        let a = json.find("\"alpha\"").unwrap();
        let z = json.find("\"zeta\"").unwrap();
        assert!(a < z);
        assert!(json.find("\"a\"").unwrap() < json.find("\"b\"").unwrap());
    }

    #[test]
    fn empty_chart() {
        let r = distribution_report::<QIRecord>(&[], "empty");
        assert_eq!(r.stats.totals.total, 0);
        assert!(r.svg.starts_with("<svg"));
        assert!(!r.svg.contains("<rect x=\"7"));
        assert_eq!(r.svg.matches("<title>").count(), 0);
    }

    #[test]
    fn one_bar_pair_per_language() {
        let records: Vec<QIRecord> = [LanguageTag::En, LanguageTag::Ja, LanguageTag::En]
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                QIRecord::new("q", l, "i", "t", Label::try_from((i % 2) as u8).unwrap()).unwrap()
            })
            .collect();
        let r = distribution_report(&records, "QI <train>");
        assert_eq!(r.svg.matches("<title>").count(), 4);
        assert!(r.svg.contains("<title>en positive: 0</title>"));
        assert!(r.svg.contains("<title>en negative: 2</title>"));
        assert!(r.svg.contains("QI &lt;train&gt;"));
    }

    #[test]
    fn nice_axis() {
        assert_eq!(nice_ceiling(0.0), 1.0);
        assert_eq!(nice_ceiling(7.0), 10.0);
        assert_eq!(nice_ceiling(206_852.0), 500_000.0);
        assert_eq!(nice_ceiling(150.0), 200.0);
    }
}

//! Lower-triangular SVG heatmaps of score matrices.

use std::fmt::Write as _;

use crate::abx::AbxScoreMatrix;

const CELL: f64 = 48.0;
const LABEL_SPACE: f64 = 96.0;
const MARGIN: f64 = 16.0;
const LEGEND_HEIGHT: f64 = 44.0;

/// Neutral color at chance (0.5), saturating at 1.0. Scores below chance
/// clamp to neutral.
pub fn score_color(score: f64) -> String {
    let t = ((score - 0.5) / 0.5).clamp(0.0, 1.0);
    // white -> #b2182b
    let lerp = |from: f64, to: f64| (from + (to - from) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(255.0, 178.0), lerp(255.0, 24.0), lerp(255.0, 43.0))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Renders the lower triangle (symmetrized scores) plus the diagonal
/// (split-half scores, or "n/a" where missing). Output depends only on the
/// matrix, so identical matrices give identical bytes.
pub fn render_heatmap(matrix: &AbxScoreMatrix) -> String {
    let n = matrix.len();
    let grid = CELL * n as f64;
    let width = MARGIN * 2.0 + LABEL_SPACE + grid;
    let height = MARGIN * 2.0 + LABEL_SPACE + grid + LEGEND_HEIGHT;
    let x0 = MARGIN + LABEL_SPACE;
    let y0 = MARGIN + LABEL_SPACE;

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"<title>ABX scores, snippet length {} s, {} pooling</title>"#,
        matrix.params.snippet_seconds, matrix.params.pooling
    )
    .unwrap();
    svg.push_str(r##"<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>"##);
    svg.push('\n');

    for (i, id) in matrix.recording_ids.iter().enumerate() {
        let id = escape(id);
        let cy = y0 + CELL * (i as f64 + 0.5);
        writeln!(
            svg,
            r#"<text class="row-label" x="{}" y="{cy}" text-anchor="end" dominant-baseline="middle" font-size="12">{id}</text>"#,
            x0 - 6.0
        )
        .unwrap();
        let cx = x0 + CELL * (i as f64 + 0.5);
        let ly = y0 - 6.0;
        writeln!(
            svg,
            r#"<text class="col-label" x="{cx}" y="{ly}" text-anchor="start" font-size="12" transform="rotate(-60 {cx} {ly})">{id}</text>"#
        )
        .unwrap();
    }

    for i in 0..n {
        for j in 0..=i {
            let score = if i == j {
                matrix.diagonal[i]
            } else {
                matrix.symmetrized(i, j)
            };
            let (x, y) = (x0 + CELL * j as f64, y0 + CELL * i as f64);
            let (fill, label, class) = match score {
                Some(s) => (score_color(s), format!("{s:.2}"), "cell"),
                None => ("#d9d9d9".to_string(), "n/a".to_string(), "cell na"),
            };
            writeln!(
                svg,
                r##"<rect class="{class}" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#ffffff" stroke-width="1"/>"##
            )
            .unwrap();
            writeln!(
                svg,
                r#"<text class="score" x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" font-size="12">{label}</text>"#,
                x + CELL / 2.0,
                y + CELL / 2.0
            )
            .unwrap();
        }
    }

    // legend: 0.5 .. 1.0
    let ly = y0 + grid + 16.0;
    let steps = 10;
    let lw = (grid.max(CELL * 3.0)) / steps as f64;
    for k in 0..steps {
        let s = 0.5 + 0.5 * (k as f64 + 0.5) / steps as f64;
        writeln!(
            svg,
            r#"<rect class="legend" x="{}" y="{ly}" width="{lw}" height="10" fill="{}"/>"#,
            x0 + lw * k as f64,
            score_color(s)
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text class="legend-label" x="{x0}" y="{}" font-size="10">0.5</text>"#,
        ly + 24.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text class="legend-label" x="{}" y="{}" text-anchor="end" font-size="10">1.0</text>"#,
        x0 + lw * steps as f64,
        ly + 24.0
    )
    .unwrap();
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abx::{AbxMode, AbxResult, MatrixParams};
    use crate::snippet::Pooling;
    use std::collections::BTreeMap;

    fn two_by_two(score_wins: u64, diag: Option<f64>) -> AbxScoreMatrix {
        let mut directional = BTreeMap::new();
        directional.insert((0, 1), AbxResult::from_counts(score_wins, 0, 100, AbxMode::Full));
        directional.insert((1, 0), AbxResult::from_counts(score_wins, 0, 100, AbxMode::Full));
        AbxScoreMatrix {
            params: MatrixParams {
                snippet_seconds: 10.0,
                pooling: Pooling::Max,
                mode: AbxMode::Full,
            },
            recording_ids: vec!["V4".into(), "V5 <&>".into()],
            directional,
            diagonal: vec![diag, diag],
        }
    }

    fn count(doc: &roxmltree::Document, class: &str) -> usize {
        doc.descendants()
            .filter(|n| n.attribute("class").is_some_and(|c| c.split(' ').any(|p| p == class)))
            .count()
    }

    #[test]
    fn two_by_two_counts() {
        let svg = render_heatmap(&two_by_two(54, Some(0.5)));
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(count(&doc, "cell"), 3);
        assert_eq!(count(&doc, "row-label"), 2);
        assert_eq!(count(&doc, "col-label"), 2);
        let texts: Vec<&str> = doc
            .descendants()
            .filter(|n| n.attribute("class") == Some("score"))
            .filter_map(|n| n.text())
            .collect();
        assert_eq!(texts, vec!["0.50", "0.54", "0.50"]);
    }

    #[test]
    fn missing_diagonal_is_na() {
        let svg = render_heatmap(&two_by_two(80, None));
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(count(&doc, "na"), 2);
        assert_eq!(svg.matches(">n/a<").count(), 2);
    }

    #[test]
    fn color_scale_anchors() {
        assert_eq!(score_color(0.5), "#ffffff");
        assert_eq!(score_color(0.2), "#ffffff");
        assert_eq!(score_color(1.0), "#b2182b");
    }

    #[test]
    fn deterministic_bytes() {
        let m = two_by_two(71, Some(0.49));
        assert_eq!(render_heatmap(&m), render_heatmap(&m.clone()));
    }
}

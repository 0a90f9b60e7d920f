//! Static scatter plot of a two-dimensional embedding.

use std::fmt::Write;

use gaitlevels_core::{ConditionLabel, RowLabel, SessionLabel};
use ndarray::Array2;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN: f64 = 70.0;
const LEGEND_W: f64 = 110.0;

fn color(c: ConditionLabel) -> &'static str {
    match c {
        ConditionLabel::Onl => "#0072b2",
        ConditionLabel::Osl => "#e69f00",
        ConditionLabel::Obl => "#009e73",
        ConditionLabel::Oc2_5 => "#cc79a7",
        ConditionLabel::Oc3 => "#d55e00",
        ConditionLabel::Oc3p => "#56b4e9",
    }
}

fn marker(out: &mut String, session: SessionLabel, x: f64, y: f64, fill: &str) {
    match session {
        SessionLabel::M1 => {
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{fill}" fill-opacity="0.75"/>"#
            );
        }
        SessionLabel::M2 => {
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="6" height="6" fill="{fill}" fill-opacity="0.75"/>"#,
                x - 3.0,
                y - 3.0
            );
        }
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Renders the first two latent columns, colored by condition and shaped by
/// session. `timestamp` adds a metadata comment and is off in normal runs.
pub fn scatter_svg(coords: &Array2<f64>, labels: &[RowLabel], timestamp: Option<u64>) -> String {
    let plot_w = WIDTH - 2.0 * MARGIN - LEGEND_W;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let (x0, x1) = range(coords.column(0).iter().copied());
    let (y0, y1) = range(coords.column(1).iter().copied());
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| MARGIN + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    if let Some(ts) = timestamp {
        let _ = writeln!(out, "<metadata>generated at unix time {ts}</metadata>");
    }
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="dimgray"/>"#
    );
    for t in 0..=4 {
        let f = t as f64 / 4.0;
        let (vx, vy) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(vx), sy(vy));
        let base = MARGIN + plot_h;
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{base}" x2="{px:.2}" y2="{:.2}" stroke="dimgray"/>"#,
            base + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{vx:.2}</text>"#,
            base + 20.0
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN}" y2="{py:.2}" stroke="dimgray"/>"#,
            MARGIN - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{vy:.2}</text>"#,
            MARGIN - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">latent-1 (arbitrary units)</text>"#,
        MARGIN + plot_w / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">latent-2 (arbitrary units)</text>"#,
        MARGIN + plot_h / 2.0,
        MARGIN + plot_h / 2.0
    );

    for (row, l) in coords.rows().into_iter().zip(labels) {
        marker(&mut out, l.session, sx(row[0]), sy(row[1]), color(l.condition));
    }

    let lx = WIDTH - MARGIN - LEGEND_W + 20.0;
    let mut ly = MARGIN + 10.0;
    for c in ConditionLabel::ALL
        .into_iter()
        .filter(|c| labels.iter().any(|l| l.condition == *c))
    {
        let _ = writeln!(
            out,
            r#"<rect x="{lx}" y="{:.2}" width="10" height="10" fill="{}"/>"#,
            ly - 9.0,
            color(c)
        );
        let _ = writeln!(out, r#"<text x="{}" y="{ly:.2}">{c}</text>"#, lx + 16.0);
        ly += 18.0;
    }
    ly += 10.0;
    for s in SessionLabel::ALL
        .into_iter()
        .filter(|s| labels.iter().any(|l| l.session == *s))
    {
        marker(&mut out, s, lx + 5.0, ly - 4.0, "dimgray");
        let _ = writeln!(out, r#"<text x="{}" y="{ly:.2}">{s}</text>"#, lx + 16.0);
        ly += 18.0;
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn label(condition: ConditionLabel, session: SessionLabel) -> RowLabel {
        RowLabel {
            obs_id: 1,
            session,
            condition,
        }
    }

    #[test]
    fn marks_conditions_and_sessions() {
        let z = array![[0.0, 0.0], [1.0, 2.0]];
        let labels = [
            label(ConditionLabel::Onl, SessionLabel::M1),
            label(ConditionLabel::Oc3, SessionLabel::M2),
        ];
        let svg = scatter_svg(&z, &labels, None);
        assert!(svg.contains("latent-1 (arbitrary units)"));
        assert!(svg.contains("latent-2 (arbitrary units)"));
        assert!(svg.contains("<circle") && svg.contains("#d55e00"));
        assert!(svg.contains(">OC3<") && svg.contains(">M2<"));
        assert!(!svg.contains("<metadata>"));
        assert!(scatter_svg(&z, &labels, Some(5)).contains("unix time 5"));
    }
}

//! Hand-rolled SVG emitters for the two plot kinds the pipeline produces:
//! sampling histograms (bar chart, winner highlighted) and Rabi landscapes
//! (heat map). Pure string builders — deterministic output, no imaging
//! dependencies.

use std::fmt::Write as _;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 96.0;

const BAR_FILL: &str = "#4a7fb5";
const WINNER_FILL: &str = "#e8772e";

/// Most bars that fit legibly; beyond this the chart keeps the head of the
/// (already count-sorted) list and says how many entries were elided.
const MAX_BARS: usize = 24;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="Helvetica, Arial, sans-serif">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="26" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        esc(title)
    );
    s
}

/// Bar chart of `bitstring → count`, assumed pre-sorted (most-sampled
/// first). The winner bar — when its bitstring appears — is drawn in a
/// distinct color, marked `data-winner="true"`, and named in the document
/// `<metadata>` so machine consumers need not parse colors.
pub fn bar_chart(entries: &[(String, u64)], winner: Option<&str>, title: &str) -> String {
    let mut s = header(title);
    if let Some(w) = winner {
        let _ = writeln!(s, "<metadata>winner={}</metadata>", esc(w));
    }

    let shown = &entries[..entries.len().min(MAX_BARS)];
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let max_count = shown.iter().map(|(_, c)| *c).max().unwrap_or(0);

    // Axes.
    let x0 = MARGIN_LEFT;
    let y0 = MARGIN_TOP + plot_h;
    let _ = writeln!(
        s,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="black"/>"#,
        x0 + plot_w
    );
    let _ = writeln!(
        s,
        r#"<line x1="{x0:.2}" y1="{MARGIN_TOP:.2}" x2="{x0:.2}" y2="{y0:.2}" stroke="black"/>"#
    );
    for frac in [0.0, 0.5, 1.0] {
        let value = max_count as f64 * frac;
        let y = y0 - plot_h * frac;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y + 4.0,
            value.round() as u64
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#,
            x0 - 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 18 {:.2})">counts</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    if shown.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">no samples</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            MARGIN_TOP + plot_h / 2.0
        );
    }

    let slot = if shown.is_empty() { plot_w } else { plot_w / shown.len() as f64 };
    let bar_w = slot * 0.72;
    for (k, (bits, count)) in shown.iter().enumerate() {
        let h = if max_count == 0 {
            0.0
        } else {
            plot_h * *count as f64 / max_count as f64
        };
        let x = x0 + slot * k as f64 + (slot - bar_w) / 2.0;
        let y = y0 - h;
        let is_winner = winner == Some(bits.as_str());
        let fill = if is_winner { WINNER_FILL } else { BAR_FILL };
        let flag = if is_winner { r#" data-winner="true""# } else { "" };
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{bar_w:.2}" height="{h:.2}" fill="{fill}"{flag}/>"#
        );
        let cx = x + bar_w / 2.0;
        let ly = y0 + 10.0;
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{ly:.2}" font-size="10" text-anchor="end" transform="rotate(-55 {cx:.2} {ly:.2})">{}</text>"#,
            esc(bits)
        );
    }
    if entries.len() > shown.len() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">showing {} of {} bitstrings</text>"#,
            WIDTH - MARGIN_RIGHT,
            MARGIN_TOP - 8.0,
            shown.len(),
            entries.len()
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Linear three-stop colormap (dark blue → magenta → yellow), `t ∈ [0, 1]`.
fn color(t: f64) -> String {
    let stops = [(13u8, 8u8, 135u8), (204, 71, 120), (240, 249, 33)];
    let t = t.clamp(0.0, 1.0) * 2.0;
    let (a, b, f) = if t <= 1.0 {
        (stops[0], stops[1], t)
    } else {
        (stops[1], stops[2], t - 1.0)
    };
    let mix = |x: u8, y: u8| -> u8 { (x as f64 + (y as f64 - x as f64) * f).round() as u8 };
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Heat map of `values[row][col]` over durations (x) × detunings (y).
pub fn heatmap(
    deltas: &[f64],
    durations: &[f64],
    values: &[Vec<f64>],
    title: &str,
) -> String {
    let mut s = header(title);
    let rows = deltas.len();
    let cols = durations.len();
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM + 40.0;

    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for row in values {
        for &v in row {
            min = min.min(v);
            max = max.max(v);
        }
    }
    let range = if max > min { max - min } else { 1.0 };

    let cw = plot_w / cols.max(1) as f64;
    let ch = plot_h / rows.max(1) as f64;
    for (r, row) in values.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let x = MARGIN_LEFT + cw * c as f64;
            // Row 0 (lowest Δ) at the bottom, like a plotted axis.
            let y = MARGIN_TOP + ch * (rows - 1 - r) as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                cw + 0.5,
                ch + 0.5,
                color((v - min) / range)
            );
        }
    }

    // Corner tick labels carry the axis ranges; exact grids live in the CSV.
    let y_axis = MARGIN_TOP + plot_h;
    let fmt = |v: f64| format!("{v:.3e}");
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN_LEFT:.2}" y="{:.2}" font-size="11">T = {} … {} s</text>"#,
        y_axis + 18.0,
        fmt(durations.first().copied().unwrap_or(0.0)),
        fmt(durations.last().copied().unwrap_or(0.0))
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN_LEFT:.2}" y="{:.2}" font-size="11">Δ = {} … {} rad/s (bottom … top)</text>"#,
        y_axis + 34.0,
        fmt(deltas.first().copied().unwrap_or(0.0)),
        fmt(deltas.last().copied().unwrap_or(0.0))
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN_LEFT:.2}" y="{:.2}" font-size="11">value range {} … {}</text>"#,
        y_axis + 50.0,
        fmt(if min.is_finite() { min } else { 0.0 }),
        fmt(if max.is_finite() { max } else { 0.0 })
    );
    s.push_str("</svg>\n");
    s
}

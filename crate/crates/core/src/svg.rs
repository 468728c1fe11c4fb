//! Dependency-free SVG emission for the two plot shapes the reports need:
//! grouped boxplots (C-index distributions, rank spreads) and histograms
//! with marker lines (permutation pseudo-null versus the observed rank).
//! Plots are a convenience; the CSV tables are the contract.

use crate::report::RunMeta;
use crate::stats::quantile;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 18.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 64.0;

struct Canvas {
    body: String,
}

impl Canvas {
    fn new(meta: &RunMeta, title: &str) -> Self {
        let mut body = String::new();
        body.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        body.push_str("<!--\n");
        for line in meta.comment_lines() {
            body.push_str(&format!("  {}\n", escape(&line)));
        }
        body.push_str("-->\n");
        body.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
        ));
        body.push_str(&format!(
            "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        body.push_str(&format!(
            "<text x=\"{}\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
            WIDTH / 2.0,
            escape(title)
        ));
        Self { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        self.body.push_str(&format!(
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
             stroke=\"{stroke}\" stroke-width=\"{width}\"/>\n"
        ));
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: &str) {
        self.body.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" \
             fill=\"{fill}\" stroke=\"{stroke}\"/>\n"
        ));
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        self.body.push_str(&format!(
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r}\" fill=\"{fill}\"/>\n"
        ));
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, content: &str, extra: &str) {
        self.body.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"{size}\" \
             text-anchor=\"{anchor}\"{extra}>{}</text>\n",
            escape(content)
        ));
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Round the data range out to tick-friendly bounds.
fn nice_bounds(min: f64, max: f64) -> (f64, f64, f64) {
    let (min, max) = if min == max { (min - 0.5, max + 0.5) } else { (min, max) };
    let span = max - min;
    let raw_step = span / 5.0;
    let mag = 10f64.powf(raw_step.log10().floor());
    let norm = raw_step / mag;
    let step = mag * if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    let lo = (min / step).floor() * step;
    let hi = (max / step).ceil() * step;
    (lo, hi, step)
}

fn draw_y_axis(canvas: &mut Canvas, lo: f64, hi: f64, step: f64, label: &str) {
    let plot_bottom = HEIGHT - MARGIN_BOTTOM;
    let to_y = |v: f64| plot_bottom - (v - lo) / (hi - lo) * (plot_bottom - MARGIN_TOP);
    canvas.line(MARGIN_LEFT, MARGIN_TOP, MARGIN_LEFT, plot_bottom, "black", 1.0);
    let mut v = lo;
    while v <= hi + step * 1e-9 {
        let y = to_y(v);
        canvas.line(MARGIN_LEFT - 4.0, y, MARGIN_LEFT, y, "black", 1.0);
        canvas.line(MARGIN_LEFT, y, WIDTH - MARGIN_RIGHT, y, "#dddddd", 0.5);
        canvas.text(MARGIN_LEFT - 8.0, y + 3.5, 10.0, "end", &trim_tick(v), "");
        v += step;
    }
    canvas.text(
        14.0,
        (MARGIN_TOP + plot_bottom) / 2.0,
        11.0,
        "middle",
        label,
        &format!(" transform=\"rotate(-90 14 {:.2})\"", (MARGIN_TOP + plot_bottom) / 2.0),
    );
}

fn trim_tick(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// One box per named group: median line, quartile box, whiskers to the
/// most extreme points within 1.5 IQR, outliers as dots.
pub fn boxplot(groups: &[(String, Vec<f64>)], title: &str, y_label: &str, meta: &RunMeta) -> String {
    let mut canvas = Canvas::new(meta, title);
    let populated: Vec<&(String, Vec<f64>)> =
        groups.iter().filter(|(_, v)| !v.is_empty()).collect();
    if populated.is_empty() {
        canvas.text(WIDTH / 2.0, HEIGHT / 2.0, 12.0, "middle", "no data", "");
        return canvas.finish();
    }
    let all_min = populated.iter().flat_map(|(_, v)| v).cloned().fold(f64::INFINITY, f64::min);
    let all_max =
        populated.iter().flat_map(|(_, v)| v).cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi, step) = nice_bounds(all_min, all_max);
    draw_y_axis(&mut canvas, lo, hi, step, y_label);

    let plot_bottom = HEIGHT - MARGIN_BOTTOM;
    let to_y = |v: f64| plot_bottom - (v - lo) / (hi - lo) * (plot_bottom - MARGIN_TOP);
    let plot_width = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let slot = plot_width / populated.len() as f64;
    let box_w = (slot * 0.5).min(60.0);
    canvas.line(MARGIN_LEFT, plot_bottom, WIDTH - MARGIN_RIGHT, plot_bottom, "black", 1.0);

    for (g, (name, values)) in populated.iter().enumerate() {
        let cx = MARGIN_LEFT + slot * (g as f64 + 0.5);
        let q1 = quantile(values, 0.25);
        let q2 = quantile(values, 0.5);
        let q3 = quantile(values, 0.75);
        let iqr = q3 - q1;
        let fence_lo = q1 - 1.5 * iqr;
        let fence_hi = q3 + 1.5 * iqr;
        let whisk_lo =
            values.iter().cloned().filter(|&v| v >= fence_lo).fold(f64::INFINITY, f64::min);
        let whisk_hi =
            values.iter().cloned().filter(|&v| v <= fence_hi).fold(f64::NEG_INFINITY, f64::max);

        canvas.line(cx, to_y(whisk_lo), cx, to_y(q1), "black", 1.0);
        canvas.line(cx, to_y(q3), cx, to_y(whisk_hi), "black", 1.0);
        canvas.line(cx - box_w / 4.0, to_y(whisk_lo), cx + box_w / 4.0, to_y(whisk_lo), "black", 1.0);
        canvas.line(cx - box_w / 4.0, to_y(whisk_hi), cx + box_w / 4.0, to_y(whisk_hi), "black", 1.0);
        canvas.rect(
            cx - box_w / 2.0,
            to_y(q3),
            box_w,
            (to_y(q1) - to_y(q3)).max(0.5),
            "#9ecae1",
            "black",
        );
        canvas.line(cx - box_w / 2.0, to_y(q2), cx + box_w / 2.0, to_y(q2), "black", 2.0);
        for &v in values.iter().filter(|&&v| v < fence_lo || v > fence_hi) {
            canvas.circle(cx, to_y(v), 2.0, "#636363");
        }
        let label = if name.len() > 24 { &name[..24] } else { name.as_str() };
        canvas.text(
            cx,
            plot_bottom + 14.0,
            9.5,
            "end",
            label,
            &format!(" transform=\"rotate(-30 {cx:.2} {:.2})\"", plot_bottom + 14.0),
        );
    }
    canvas.finish()
}

/// Histogram over integer-ish values with optional labeled vertical
/// markers (e.g. the observed rank against its permutation null).
pub fn histogram(
    values: &[f64],
    bins: usize,
    title: &str,
    x_label: &str,
    markers: &[(f64, String)],
    meta: &RunMeta,
) -> String {
    let mut canvas = Canvas::new(meta, title);
    if values.is_empty() || bins == 0 {
        canvas.text(WIDTH / 2.0, HEIGHT / 2.0, 12.0, "middle", "no data", "");
        return canvas.finish();
    }
    let vmin = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let vmax = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let marker_min = markers.iter().map(|&(v, _)| v).fold(vmin, f64::min);
    let marker_max = markers.iter().map(|&(v, _)| v).fold(vmax, f64::max);
    let (xlo, xhi) = if marker_min == marker_max {
        (marker_min - 0.5, marker_max + 0.5)
    } else {
        let pad = (marker_max - marker_min) * 0.05;
        (marker_min - pad, marker_max + pad)
    };
    let bin_width = (xhi - xlo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - xlo) / bin_width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let cmax = *counts.iter().max().unwrap() as f64;
    let (ylo, yhi, step) = nice_bounds(0.0, cmax.max(1.0));
    draw_y_axis(&mut canvas, ylo, yhi, step, "count");

    let plot_bottom = HEIGHT - MARGIN_BOTTOM;
    let plot_width = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let to_x = |v: f64| MARGIN_LEFT + (v - xlo) / (xhi - xlo) * plot_width;
    let to_y = |v: f64| plot_bottom - (v - ylo) / (yhi - ylo) * (plot_bottom - MARGIN_TOP);
    canvas.line(MARGIN_LEFT, plot_bottom, WIDTH - MARGIN_RIGHT, plot_bottom, "black", 1.0);

    for (b, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let x = to_x(xlo + b as f64 * bin_width);
        let w = plot_width / bins as f64;
        canvas.rect(x, to_y(count as f64), w - 1.0, plot_bottom - to_y(count as f64), "#a1d99b", "black");
    }
    for (v, label) in markers {
        let x = to_x(*v);
        canvas.line(x, MARGIN_TOP, x, plot_bottom, "#d62728", 1.5);
        canvas.text(x + 4.0, MARGIN_TOP + 12.0, 10.0, "start", label, " fill=\"#d62728\"");
    }
    let n_ticks = bins.min(8);
    for t in 0..=n_ticks {
        let v = xlo + (xhi - xlo) * t as f64 / n_ticks as f64;
        let x = to_x(v);
        canvas.line(x, plot_bottom, x, plot_bottom + 4.0, "black", 1.0);
        canvas.text(x, plot_bottom + 16.0, 9.5, "middle", &trim_tick(v), "");
    }
    canvas.text(
        MARGIN_LEFT + plot_width / 2.0,
        HEIGHT - 12.0,
        11.0,
        "middle",
        x_label,
        "",
    );
    canvas.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn meta() -> RunMeta {
        RunMeta::new(&json!({"test": true}), 5)
    }

    #[test]
    fn boxplot_emits_valid_svg_with_metadata_first() {
        let groups = vec![
            ("alpha".to_string(), vec![0.6, 0.62, 0.58, 0.7, 0.3]),
            ("beta".to_string(), vec![0.5, 0.55, 0.52]),
        ];
        let svg = boxplot(&groups, "C-index by grouping", "C-index", &meta());
        assert!(svg.starts_with("<?xml"));
        let comment = svg.find("<!--").unwrap();
        assert!(comment < svg.find("<svg").unwrap());
        assert!(svg.contains("config_hash"));
        assert!(svg.contains("seed: 5"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<rect").count(), 3);
        assert!(svg.contains("alpha") && svg.contains("beta"));
        // The 0.3 point is an outlier beyond the lower fence.
        assert!(svg.contains("<circle"));
    }

    #[test]
    fn boxplot_handles_empty_and_degenerate_input() {
        let svg = boxplot(&[], "empty", "y", &meta());
        assert!(svg.contains("no data"));
        let svg = boxplot(
            &[("same".to_string(), vec![1.0, 1.0, 1.0])],
            "flat",
            "y",
            &meta(),
        );
        assert!(svg.contains("</svg>"));
    }

    #[test]
    fn histogram_places_marker() {
        let values: Vec<f64> = (0..100).map(|i| (i % 10) as f64).collect();
        let svg = histogram(
            &values,
            10,
            "permuted ranks",
            "rank",
            &[(2.0, "observed".to_string())],
            &meta(),
        );
        assert!(svg.contains("observed"));
        assert!(svg.contains("#d62728"));
        assert!(svg.contains("count"));
    }

    #[test]
    fn escapes_markup_in_labels() {
        let svg = boxplot(
            &[("a<b&c".to_string(), vec![1.0, 2.0])],
            "t<itle>",
            "y",
            &meta(),
        );
        assert!(svg.contains("a&lt;b&amp;c"));
        assert!(svg.contains("t&lt;itle&gt;"));
        assert!(!svg.contains("a<b"));
    }
}

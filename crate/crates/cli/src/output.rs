//! Artifact writers: CSV with a `#` metadata line, SVG 1.1 figures and JSON statistics.

use std::fmt::Write as _;

use cle_core::hexgrid::HexPatch;
use cle_core::loops::{Coloring, ExplorationTree, LoopEnsemble};
use cle_core::Complex64;

/// The metadata line placed at the top of every artifact.
pub fn header_line(command: &str, seed: u64) -> String {
    format!("seed={seed} command={command}")
}

/// RFC-4180 CSV preceded by a `#`-prefixed metadata line.
pub fn csv_string<R, I>(command: &str, seed: u64, header: &[&str], rows: I) -> Result<String, csv::Error>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut out = format!("# {}\n", header_line(command, seed)).into_bytes();
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(&mut out);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(out).expect("csv output is utf-8"))
}

/// Pretty JSON with the metadata merged in under `"meta"`.
pub fn json_string(command: &str, seed: u64, body: serde_json::Value) -> String {
    let doc = serde_json::json!({ "meta": { "seed": seed, "command": command }, "result": body });
    let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
    s.push('\n');
    s
}

/// Float formatting shared by all text outputs, stable across platforms.
pub fn num(x: f64) -> String {
    format!("{x:.10e}")
}

struct Svg {
    body: String,
    min: (f64, f64),
    max: (f64, f64),
}

impl Svg {
    fn new() -> Self {
        Svg { body: String::new(), min: (f64::INFINITY, f64::INFINITY), max: (f64::NEG_INFINITY, f64::NEG_INFINITY) }
    }

    fn include(&mut self, p: (f64, f64)) {
        self.min = (self.min.0.min(p.0), self.min.1.min(p.1));
        self.max = (self.max.0.max(p.0), self.max.1.max(p.1));
    }

    /// Adds a polyline or polygon; `y` is flipped so that up is up.
    fn path(&mut self, pts: &[(f64, f64)], closed: bool, attrs: &str) {
        if pts.is_empty() {
            return;
        }
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            self.include(*p);
            let _ = write!(d, "{}{:.4},{:.4}", if i == 0 { "M" } else { " L" }, p.0, -p.1);
        }
        if closed {
            d.push_str(" Z");
        }
        let _ = writeln!(self.body, "  <path d=\"{d}\" {attrs}/>");
    }

    fn circle(&mut self, c: (f64, f64), r: f64, attrs: &str) {
        self.include((c.0 - r, c.1 - r));
        self.include((c.0 + r, c.1 + r));
        let _ = writeln!(self.body, "  <circle cx=\"{:.4}\" cy=\"{:.4}\" r=\"{r:.4}\" {attrs}/>", c.0, -c.1);
    }

    fn finish(self, meta: &str, width: f64) -> String {
        let pad = 0.05 * (self.max.0 - self.min.0).max(self.max.1 - self.min.1).max(1e-9);
        let (x0, y0) = (self.min.0 - pad, -self.max.1 - pad);
        let (w, h) = (self.max.0 - self.min.0 + 2.0 * pad, self.max.1 - self.min.1 + 2.0 * pad);
        let height = width * h / w;
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- {meta} -->\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.1}\" height=\"{height:.1}\" viewBox=\"{x0:.4} {y0:.4} {w:.4} {h:.4}\">\n{}</svg>\n",
            self.body
        )
    }
}

/// Coloring and exploration tree: black faces filled, tree edges drawn, root marked.
pub fn tree_svg(c: &Coloring, tree: &ExplorationTree, loops: Option<&LoopEnsemble>, meta: &str) -> String {
    let p: &HexPatch = c.patch();
    let mut svg = Svg::new();
    for f in 0..p.num_faces() {
        let pts: Vec<(f64, f64)> = p.face_vertices(f).iter().map(|&v| p.position(v)).collect();
        let fill = if c.black()[f] { "#222222" } else { "#ffffff" };
        svg.path(&pts, true, &format!("fill=\"{fill}\" stroke=\"#999999\" stroke-width=\"0.04\""));
    }
    if let Some(e) = loops {
        for l in &e.loops {
            let pts: Vec<(f64, f64)> = l.vertices.iter().map(|&v| p.position(v)).collect();
            svg.path(&pts, true, "fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"0.12\" stroke-opacity=\"0.5\"");
        }
    }
    for (v, parent) in tree.tree.parent.iter().enumerate() {
        if let Some(u) = parent {
            svg.path(&[p.position(*u), p.position(v)], false, "fill=\"none\" stroke=\"#d62728\" stroke-width=\"0.08\"");
        }
    }
    svg.circle(p.position(p.root()), 0.15, "fill=\"#2ca02c\"");
    svg.finish(meta, 600.0)
}

/// Traces as polylines; when `disk` is set the unit circle is drawn too.
pub fn traces_svg(traces: &[Vec<Complex64>], disk: bool, meta: &str) -> String {
    const COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let mut svg = Svg::new();
    if disk {
        let circle: Vec<(f64, f64)> = (0..360).map(|i| (f64::from(i).to_radians().cos(), f64::from(i).to_radians().sin())).collect();
        svg.path(&circle, true, "fill=\"none\" stroke=\"#000000\" stroke-width=\"0.005\"");
    }
    for (i, t) in traces.iter().enumerate() {
        let pts: Vec<(f64, f64)> = t.iter().filter(|z| z.re.is_finite() && z.im.is_finite()).map(|z| (z.re, z.im)).collect();
        let attrs = format!("fill=\"none\" stroke=\"{}\" stroke-width=\"0.004\"", COLORS[i % COLORS.len()]);
        svg.path(&pts, false, &attrs);
    }
    svg.finish(meta, 600.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_crlf() {
        let s = csv_string("x", 7, &["a", "b"], vec![vec!["1".to_string(), "2,3".to_string()]]).unwrap();
        assert_eq!(s, "# seed=7 command=x\na,b\r\n1,\"2,3\"\r\n");
    }

    #[test]
    fn json_wraps_meta() {
        let s = json_string("y", 3, serde_json::json!({ "mean": 1.5 }));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["meta"]["seed"], 3);
        assert_eq!(v["result"]["mean"], 1.5);
    }

    #[test]
    fn svg_is_well_formed() {
        let s = traces_svg(&[vec![Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.5)]], true, "m");
        assert!(s.starts_with("<?xml"));
        assert!(s.contains("<!-- m -->"));
        assert_eq!(s.matches("<path").count(), 2);
        assert!(s.trim_end().ends_with("</svg>"));
    }
}

//! Minimal static SVG 1.1 writer.
//!
//! Coordinates are printed with a fixed number of decimals and elements are
//! emitted in call order, so equal input gives byte-identical files.

use std::fmt::Write;

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

/// Maps data coordinates into the plot area (y grows upwards).
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Frame {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let (y0, y1) = if y1 > y0 { (y0, y1) } else { (y0 - 0.5, y0 + 0.5) };
        let (x0, x1) = if x1 > x0 { (x0, x1) } else { (x0 - 0.5, x0 + 0.5) };
        Frame { x0, x1, y0, y1 }
    }

    pub fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    pub fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

pub struct Svg {
    body: String,
}

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    // "-0.000" and "0.000" must print the same.
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Default for Svg {
    fn default() -> Self {
        Self::new()
    }
}

impl Svg {
    pub fn new() -> Self {
        Svg { body: String::new() }
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        if pts.is_empty() {
            return;
        }
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{},{}", num(x), num(y))).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline fill="none" stroke="{stroke}" stroke-width="{}" points="{}"/>"#,
            num(width),
            coords.join(" ")
        );
    }

    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"/>"#,
            num(a.0),
            num(a.1),
            num(b.0),
            num(b.1),
            num(width)
        );
    }

    pub fn circle(&mut self, c: (f64, f64), r: f64, fill: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#, num(c.0), num(c.1), num(r));
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
            num(x),
            num(y),
            num(w),
            num(h)
        );
    }

    pub fn text(&mut self, at: (f64, f64), size: f64, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="{}">{}</text>"#,
            num(at.0),
            num(at.1),
            num(size),
            escape(s)
        );
    }

    /// Frame box, corner labels and a title.
    pub fn axes(&mut self, f: &Frame, title: &str) {
        let (l, r) = (f.px(f.x0), f.px(f.x1));
        let (b, t) = (f.py(f.y0), f.py(f.y1));
        self.polyline(&[(l, b), (r, b), (r, t), (l, t), (l, b)], "#444", 1.0);
        self.text((l, b + 16.0), 11.0, &format!("{:.4}", f.x0));
        self.text((r - 48.0, b + 16.0), 11.0, &format!("{:.4}", f.x1));
        self.text((4.0, b), 11.0, &format!("{:.4}", f.y0));
        self.text((4.0, t + 4.0), 11.0, &format!("{:.4}", f.y1));
        self.text((l, 24.0), 14.0, title);
    }

    pub fn finish(self) -> String {
        let mut s = String::new();
        s.push_str(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        s.push('\n');
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            WIDTH, HEIGHT, WIDTH, HEIGHT
        );
        s.push_str(r##"<rect x="0" y="0" width="100%" height="100%" fill="#fff"/>"##);
        s.push('\n');
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_prints_as_zero() {
        assert_eq!(num(-0.0), "0.000");
        assert_eq!(num(-0.0001), "0.000");
        assert_eq!(num(-1.5), "-1.500");
    }

    #[test]
    fn frame_maps_corners() {
        let f = Frame::new(0.0, 1.0, 0.0, 2.0);
        assert_eq!(f.px(0.0), MARGIN);
        assert_eq!(f.px(1.0), WIDTH - MARGIN);
        assert_eq!(f.py(0.0), HEIGHT - MARGIN);
        assert_eq!(f.py(2.0), MARGIN);
    }
}

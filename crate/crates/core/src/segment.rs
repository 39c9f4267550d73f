//! Classical page segmentation: XY-cut blocks with positional/density
//! classification, and text lines from the horizontal projection profile.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::image::BinaryImage;

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("invalid segmentation config: {0}")]
    Config(String),
    #[error("annotation line {line}: {msg}")]
    Annotation { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionClass {
    TextBlock,
    Graph,
    MarginalNote,
    TextLine,
}

impl RegionClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionClass::TextBlock => "TextBlock",
            RegionClass::Graph => "Graph",
            RegionClass::MarginalNote => "MarginalNote",
            RegionClass::TextLine => "TextLine",
        }
    }
}

impl fmt::Display for RegionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "TextBlock" => Ok(RegionClass::TextBlock),
            "Graph" => Ok(RegionClass::Graph),
            "MarginalNote" => Ok(RegionClass::MarginalNote),
            "TextLine" => Ok(RegionClass::TextLine),
            other => Err(format!("unknown region class {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    pub class: RegionClass,
    pub confidence: f64,
}

impl Region {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    /// Intersection over union of the two boxes.
    pub fn iou(&self, other: &Region) -> f64 {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = (self.x + self.w).min(other.x + other.w);
        let y1 = (self.y + self.h).min(other.y + other.h);
        if x1 <= x0 || y1 <= y0 {
            return 0.0;
        }
        let inter = ((x1 - x0) * (y1 - y0)) as f64;
        inter / ((self.area() + other.area()) as f64 - inter)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentConfig {
    /// Blank rows (or columns) needed to separate two lines or blocks.
    pub min_gap_rows: usize,
    pub min_line_height: usize,
    pub smear_radius: usize,
    /// Fraction of the page dimension treated as the outer margin band.
    pub margin_band_frac: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            min_gap_rows: 3,
            min_line_height: 2,
            smear_radius: 2,
            margin_band_frac: 0.12,
        }
    }
}

impl SegmentConfig {
    pub fn validate(&self) -> Result<(), SegmentError> {
        if self.min_gap_rows == 0 || self.min_line_height == 0 || self.smear_radius == 0 {
            return Err(SegmentError::Config(
                "min_gap_rows, min_line_height and smear_radius must be positive".into(),
            ));
        }
        if !(self.margin_band_frac > 0.0 && self.margin_band_frac < 0.5) {
            return Err(SegmentError::Config(format!(
                "margin_band_frac must lie in (0, 0.5), got {}",
                self.margin_band_frac
            )));
        }
        Ok(())
    }
}

/// Foreground count per row.
pub fn horizontal_projection(bin: &BinaryImage) -> Vec<usize> {
    bin.data()
        .chunks(bin.width())
        .map(|row| row.iter().filter(|&&v| v == 1).count())
        .collect()
}

/// Maximal runs of `true`, as half-open ranges.
fn runs(mask: impl IntoIterator<Item = bool>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    let mut n = 0;
    for (i, on) in mask.into_iter().enumerate() {
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i));
                start = None;
            }
            _ => {}
        }
        n = i + 1;
    }
    if let Some(s) = start {
        out.push((s, n));
    }
    out
}

/// Merges runs separated by fewer than `min_gap` blank positions.
fn merge_close(mut spans: Vec<(usize, usize)>, min_gap: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::with_capacity(spans.len());
    for span in spans.drain(..) {
        match out.last_mut() {
            Some(last) if span.0 - last.1 < min_gap => last.1 = span.1,
            _ => out.push(span),
        }
    }
    out
}

pub fn segment_lines(bin: &BinaryImage, cfg: &SegmentConfig) -> Result<Vec<Region>, SegmentError> {
    cfg.validate()?;
    let profile = horizontal_projection(bin);
    let bands = merge_close(runs(profile.iter().map(|&c| c > 0)), cfg.min_gap_rows);
    let mut out = Vec::new();
    for (y0, y1) in bands {
        if y1 - y0 < cfg.min_line_height {
            continue;
        }
        let (mut xmin, mut xmax) = (usize::MAX, 0);
        for y in y0..y1 {
            for x in 0..bin.width() {
                if bin.get(x, y) {
                    xmin = xmin.min(x);
                    xmax = xmax.max(x);
                }
            }
        }
        out.push(Region {
            x: xmin,
            y: y0,
            w: xmax - xmin + 1,
            h: y1 - y0,
            class: RegionClass::TextLine,
            confidence: 1.0,
        });
    }
    Ok(out)
}

/// Square dilation of the foreground by `radius`, clipped to the page.
pub fn smear(bin: &BinaryImage, radius: usize) -> BinaryImage {
    let (w, h) = (bin.width(), bin.height());
    // separable: horizontal then vertical
    let mut horiz = vec![0u8; w * h];
    for y in 0..h {
        let mut last_on: Option<usize> = None;
        let mut next_on = vec![usize::MAX; w];
        let mut nxt = usize::MAX;
        for x in (0..w).rev() {
            if bin.get(x, y) {
                nxt = x;
            }
            next_on[x] = nxt;
        }
        for x in 0..w {
            if bin.get(x, y) {
                last_on = Some(x);
            }
            let left = last_on.is_some_and(|l| x - l <= radius);
            let right = next_on[x] != usize::MAX && next_on[x] - x <= radius;
            horiz[y * w + x] = (left || right) as u8;
        }
    }
    let mut out = vec![0u8; w * h];
    for x in 0..w {
        for y in 0..h {
            let lo = y.saturating_sub(radius);
            let hi = (y + radius).min(h - 1);
            out[y * w + x] = (lo..=hi).any(|yy| horiz[yy * w + x] == 1) as u8;
        }
    }
    BinaryImage::new(w, h, out).expect("same dimensions as input")
}

#[derive(Clone, Copy, Debug)]
struct Rect {
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
}

fn cut_leaves(smeared: &BinaryImage, rect: Rect, min_gap: usize, leaves: &mut Vec<Rect>) {
    let rows: Vec<bool> = (rect.y0..rect.y1)
        .map(|y| (rect.x0..rect.x1).any(|x| smeared.get(x, y)))
        .collect();
    let row_runs = runs(rows);
    if row_runs.is_empty() {
        return;
    }
    let cols: Vec<bool> = (rect.x0..rect.x1)
        .map(|x| (rect.y0..rect.y1).any(|y| smeared.get(x, y)))
        .collect();
    let col_runs = runs(cols);
    // tighten to content
    let tight = Rect {
        x0: rect.x0 + col_runs[0].0,
        x1: rect.x0 + col_runs[col_runs.len() - 1].1,
        y0: rect.y0 + row_runs[0].0,
        y1: rect.y0 + row_runs[row_runs.len() - 1].1,
    };
    let row_groups = merge_close(row_runs, min_gap + 1);
    if row_groups.len() > 1 {
        for (a, b) in row_groups {
            let sub = Rect {
                y0: rect.y0 + a,
                y1: rect.y0 + b,
                ..tight
            };
            cut_leaves(smeared, sub, min_gap, leaves);
        }
        return;
    }
    let col_groups = merge_close(col_runs, min_gap + 1);
    if col_groups.len() > 1 {
        for (a, b) in col_groups {
            let sub = Rect {
                x0: rect.x0 + a,
                x1: rect.x0 + b,
                ..tight
            };
            cut_leaves(smeared, sub, min_gap, leaves);
        }
        return;
    }
    leaves.push(tight);
}

/// Recursive XY-cut over the smeared page; leaves are classified as
/// marginal notes (inside an outer margin band), graphs (dense) or text.
pub fn segment_blocks(bin: &BinaryImage, cfg: &SegmentConfig) -> Result<Vec<Region>, SegmentError> {
    cfg.validate()?;
    let (w, h) = (bin.width(), bin.height());
    let smeared = smear(bin, cfg.smear_radius);
    let mut leaves = Vec::new();
    cut_leaves(
        &smeared,
        Rect {
            x0: 0,
            y0: 0,
            x1: w,
            y1: h,
        },
        cfg.min_gap_rows,
        &mut leaves,
    );

    let band_x = cfg.margin_band_frac * w as f64;
    let band_y = cfg.margin_band_frac * h as f64;
    let mut out = Vec::with_capacity(leaves.len());
    for leaf in leaves {
        // shrink to the original ink inside the leaf
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        let mut ink = 0usize;
        for y in leaf.y0..leaf.y1 {
            for x in leaf.x0..leaf.x1 {
                if bin.get(x, y) {
                    ink += 1;
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x + 1);
                    y1 = y1.max(y + 1);
                }
            }
        }
        if ink == 0 {
            continue;
        }
        let in_margin = (x1 as f64) <= band_x
            || (x0 as f64) >= w as f64 - band_x
            || (y1 as f64) <= band_y
            || (y0 as f64) >= h as f64 - band_y;
        let density = ink as f64 / ((x1 - x0) * (y1 - y0)) as f64;
        let class = if in_margin {
            RegionClass::MarginalNote
        } else if density > 0.5 {
            RegionClass::Graph
        } else {
            RegionClass::TextBlock
        };
        out.push(Region {
            x: x0,
            y: y0,
            w: x1 - x0,
            h: y1 - y0,
            class,
            confidence: 1.0,
        });
    }
    Ok(out)
}

/// One `class x y w h confidence` line per region.
pub fn write_annotations(regions: &[Region]) -> String {
    let mut out = String::new();
    for r in regions {
        out.push_str(&format!(
            "{} {} {} {} {} {:.4}\n",
            r.class, r.x, r.y, r.w, r.h, r.confidence
        ));
    }
    out
}

pub fn parse_annotations(text: &str) -> Result<Vec<Region>, SegmentError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| SegmentError::Annotation { line: i + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, found {}", fields.len())));
        }
        let class = fields[0].parse().map_err(err)?;
        let num = |s: &str| s.parse::<usize>().map_err(|e| err(e.to_string()));
        let confidence: f64 = fields[5].parse().map_err(|e: std::num::ParseFloatError| err(e.to_string()))?;
        out.push(Region {
            class,
            x: num(fields[1])?,
            y: num(fields[2])?,
            w: num(fields[3])?,
            h: num(fields[4])?,
            confidence,
        });
    }
    Ok(out)
}

//! Text-line enhancement chain: contrast stretch, directional edge map,
//! text location, and median filtering.

use thiserror::Error;

use crate::image::{BinaryImage, GrayImage, ImageError};

#[derive(Debug, Error)]
pub enum EnhanceError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("invalid enhancement config: {0}")]
    Config(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnhanceConfig {
    /// Percentile mapped to 0 by the contrast stretch.
    pub contrast_low_pct: f64,
    /// Percentile mapped to 255 by the contrast stretch.
    pub contrast_high_pct: f64,
    /// Binarization threshold for the averaged edge response.
    pub edge_threshold: u8,
    /// Binarization threshold for the inverted contrast-enhanced image.
    pub cei_threshold: u8,
    pub median_window: usize,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        Self {
            contrast_low_pct: 1.0,
            contrast_high_pct: 99.0,
            edge_threshold: 48,
            cei_threshold: 128,
            median_window: 3,
        }
    }
}

impl EnhanceConfig {
    pub fn validate(&self) -> Result<(), EnhanceError> {
        // the upper bound may name the maximum itself
        if !(0.0..100.0).contains(&self.contrast_low_pct)
            || !(0.0..=100.0).contains(&self.contrast_high_pct)
        {
            return Err(EnhanceError::Config(format!(
                "percentiles out of range: {} / {}",
                self.contrast_low_pct, self.contrast_high_pct
            )));
        }
        if self.contrast_low_pct >= self.contrast_high_pct {
            return Err(EnhanceError::Config(
                "contrast_low_pct must be below contrast_high_pct".into(),
            ));
        }
        check_window(self.median_window)
    }
}

fn check_window(window: usize) -> Result<(), EnhanceError> {
    if window < 3 || window % 2 == 0 {
        return Err(EnhanceError::Config(format!(
            "median window must be odd and >= 3, got {window}"
        )));
    }
    Ok(())
}

/// Intensity at the given percentile, nearest-rank on the sorted pixels.
fn percentile(hist: &[usize; 256], n: usize, pct: f64) -> u8 {
    let rank = ((pct / 100.0) * (n - 1) as f64).round() as usize;
    let mut seen = 0;
    for (v, &c) in hist.iter().enumerate() {
        seen += c;
        if seen > rank {
            return v as u8;
        }
    }
    255
}

/// Linear stretch between two percentiles. Images whose clip bounds
/// coincide (e.g. constant images) come back unchanged.
pub fn contrast_enhance(img: &GrayImage, cfg: &EnhanceConfig) -> Result<GrayImage, EnhanceError> {
    cfg.validate()?;
    let mut hist = [0usize; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }
    let n = img.data().len();
    let lo = percentile(&hist, n, cfg.contrast_low_pct) as u32;
    let hi = percentile(&hist, n, cfg.contrast_high_pct) as u32;
    if hi <= lo {
        return Ok(img.clone());
    }
    let span = hi - lo;
    let lut: Vec<u8> = (0u32..256)
        .map(|v| {
            if v <= lo {
                0
            } else if v >= hi {
                255
            } else {
                (((v - lo) * 510 + span) / (2 * span)) as u8
            }
        })
        .collect();
    let data = img.data().iter().map(|&v| lut[v as usize]).collect();
    Ok(GrayImage::new(img.width(), img.height(), data)?)
}

/// 3×3 Sobel masks at 0°, 45°, 90° and 135°.
pub const SOBEL_MASKS: [[[i32; 3]; 3]; 4] = [
    [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]],
    [[0, 1, 2], [-1, 0, 1], [-2, -1, 0]],
    [[-1, -2, -1], [0, 0, 0], [1, 2, 1]],
    [[-2, -1, 0], [-1, 0, 1], [0, 1, 2]],
];

/// Mean absolute response of the four directional masks, clamped to 0–255.
pub fn directional_edge_map(img: &GrayImage) -> Result<GrayImage, EnhanceError> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(ImageError::TooSmall {
            op: "directional_edge_map",
            min_w: 3,
            min_h: 3,
            width: w,
            height: h,
        }
        .into());
    }
    let mut out = Vec::with_capacity(w * h);
    let mut window = [[0i32; 3]; 3];
    for y in 0..h as isize {
        for x in 0..w as isize {
            for (dy, row) in window.iter_mut().enumerate() {
                for (dx, cell) in row.iter_mut().enumerate() {
                    *cell = img.get_clamped(x + dx as isize - 1, y + dy as isize - 1) as i32;
                }
            }
            let total: i32 = SOBEL_MASKS
                .iter()
                .map(|mask| {
                    let mut acc = 0;
                    for r in 0..3 {
                        for c in 0..3 {
                            acc += mask[r][c] * window[r][c];
                        }
                    }
                    acc.abs()
                })
                .sum();
            out.push(((total + 2) / 4).min(255) as u8);
        }
    }
    Ok(GrayImage::new(w, h, out)?)
}

/// Foreground iff intensity >= threshold.
pub fn binarize(img: &GrayImage, threshold: u8) -> BinaryImage {
    let data = img.data().iter().map(|&v| (v >= threshold) as u8).collect();
    BinaryImage::new(img.width(), img.height(), data).expect("dimensions come from a valid image")
}

/// Pixelwise AND of the binarized contrast image and the binarized edge image.
pub fn locate_text(cei_bin: &BinaryImage, ei_bin: &BinaryImage) -> Result<BinaryImage, EnhanceError> {
    if cei_bin.width() != ei_bin.width() || cei_bin.height() != ei_bin.height() {
        return Err(ImageError::Mismatch(
            cei_bin.width(),
            cei_bin.height(),
            ei_bin.width(),
            ei_bin.height(),
        )
        .into());
    }
    let data = cei_bin
        .data()
        .iter()
        .zip(ei_bin.data())
        .map(|(a, b)| a & b)
        .collect();
    Ok(BinaryImage::new(cei_bin.width(), cei_bin.height(), data)?)
}

/// Exact M×M median with edge replication, using a sliding histogram along
/// each row.
pub fn median_filter(img: &GrayImage, window: usize) -> Result<GrayImage, EnhanceError> {
    check_window(window)?;
    let (w, h) = (img.width(), img.height());
    let r = (window / 2) as isize;
    let rank = window * window / 2;
    let mut out = vec![0u8; w * h];

    for y in 0..h {
        let mut hist = [0u32; 256];
        let yi = y as isize;
        for dy in -r..=r {
            for dx in -r..=r {
                hist[img.get_clamped(dx, yi + dy) as usize] += 1;
            }
        }
        out[y * w] = hist_rank(&hist, rank);
        for x in 1..w {
            let leaving = x as isize - 1 - r;
            let entering = x as isize + r;
            for dy in -r..=r {
                hist[img.get_clamped(leaving, yi + dy) as usize] -= 1;
                hist[img.get_clamped(entering, yi + dy) as usize] += 1;
            }
            out[y * w + x] = hist_rank(&hist, rank);
        }
    }
    Ok(GrayImage::new(w, h, out)?)
}

fn hist_rank(hist: &[u32; 256], rank: usize) -> u8 {
    let mut seen = 0usize;
    for (v, &c) in hist.iter().enumerate() {
        seen += c as usize;
        if seen > rank {
            return v as u8;
        }
    }
    255
}

/// Intermediate rasters of one enhancement run.
#[derive(Clone, Debug)]
pub struct EnhanceStages {
    pub contrast: GrayImage,
    pub edge_bin: BinaryImage,
    pub contrast_bin: BinaryImage,
    pub text_location: BinaryImage,
    pub output: GrayImage,
}

pub fn enhance_line_stages(img: &GrayImage, cfg: &EnhanceConfig) -> Result<EnhanceStages, EnhanceError> {
    cfg.validate()?;
    let contrast = contrast_enhance(img, cfg)?;
    let edge_bin = binarize(&directional_edge_map(&contrast)?, cfg.edge_threshold);
    // ink is dark, so invert before thresholding to make text the foreground
    let contrast_bin = binarize(&contrast.inverted(), cfg.cei_threshold);
    let text_location = locate_text(&contrast_bin, &edge_bin)?;

    let masked: Vec<u8> = contrast
        .data()
        .iter()
        .zip(text_location.data())
        .map(|(&v, &t)| if t == 1 { v } else { 255 })
        .collect();
    let masked = GrayImage::new(img.width(), img.height(), masked)?;
    let output = median_filter(&masked, cfg.median_window)?;
    Ok(EnhanceStages {
        contrast,
        edge_bin,
        contrast_bin,
        text_location,
        output,
    })
}

pub fn enhance_line(img: &GrayImage, cfg: &EnhanceConfig) -> Result<GrayImage, EnhanceError> {
    enhance_line_stages(img, cfg).map(|s| s.output)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, data: &[u8]) -> GrayImage {
        GrayImage::new(w, h, data.to_vec()).unwrap()
    }

    fn full_range() -> EnhanceConfig {
        EnhanceConfig {
            contrast_low_pct: 0.0,
            contrast_high_pct: 100.0,
            ..EnhanceConfig::default()
        }
    }

    #[test]
    fn contrast_constant_image_unchanged() {
        let img = GrayImage::filled(4, 3, 128).unwrap();
        assert_eq!(contrast_enhance(&img, &EnhanceConfig::default()).unwrap(), img);
    }

    #[test]
    fn contrast_endpoints_fixed() {
        let img = gray(2, 1, &[0, 255]);
        assert_eq!(contrast_enhance(&img, &full_range()).unwrap().data(), &[0, 255]);
    }

    #[test]
    fn contrast_linear_map() {
        let img = gray(4, 1, &[10, 20, 30, 40]);
        assert_eq!(
            contrast_enhance(&img, &full_range()).unwrap().data(),
            &[0, 85, 170, 255]
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = EnhanceConfig::default();
        cfg.median_window = 4;
        assert!(cfg.validate().is_err());
        cfg.median_window = 3;
        cfg.contrast_low_pct = 50.0;
        cfg.contrast_high_pct = 50.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn edge_map_constant_is_zero() {
        let img = GrayImage::filled(6, 5, 77).unwrap();
        assert!(directional_edge_map(&img).unwrap().data().iter().all(|&v| v == 0));
    }

    #[test]
    fn edge_map_too_small() {
        let img = GrayImage::filled(2, 5, 0).unwrap();
        assert!(directional_edge_map(&img).is_err());
    }

    #[test]
    fn edge_map_vertical_step_is_local() {
        let img = GrayImage::from_fn(8, 5, |x, _| if x < 4 { 0 } else { 255 }).unwrap();
        let edges = directional_edge_map(&img).unwrap();
        for y in 0..5 {
            for x in 0..8 {
                let near = x == 3 || x == 4;
                assert_eq!(edges.get(x, y) > 0, near, "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn edge_map_single_pixel_support() {
        let mut img = GrayImage::filled(5, 5, 0).unwrap();
        img.set(2, 2, 255);
        let edges = directional_edge_map(&img).unwrap();
        for y in 0..5 {
            for x in 0..5 {
                let inside = (1..=3).contains(&x) && (1..=3).contains(&y);
                if !inside {
                    assert_eq!(edges.get(x, y), 0);
                }
            }
        }
        // center: every mask has zero center weight
        assert_eq!(edges.get(2, 2), 0);
        // 4-neighbours respond through the axis-aligned masks
        assert!(edges.get(1, 2) > 0 && edges.get(2, 1) > 0);
    }

    #[test]
    fn binarize_examples() {
        assert_eq!(binarize(&GrayImage::filled(3, 1, 0).unwrap(), 1).data(), &[0, 0, 0]);
        assert_eq!(binarize(&gray(2, 1, &[10, 200]), 100).data(), &[0, 1]);
        assert_eq!(binarize(&gray(1, 1, &[100]), 100).data(), &[1]);
    }

    #[test]
    fn locate_text_truth_table() {
        let a = BinaryImage::new(3, 1, vec![1, 0, 1]).unwrap();
        let b = BinaryImage::new(3, 1, vec![1, 1, 0]).unwrap();
        assert_eq!(locate_text(&a, &b).unwrap().data(), &[1, 0, 0]);
        assert_eq!(locate_text(&a, &BinaryImage::ones(3, 1).unwrap()).unwrap(), a);
        assert_eq!(
            locate_text(&a, &BinaryImage::zeros(3, 1).unwrap()).unwrap(),
            BinaryImage::zeros(3, 1).unwrap()
        );
        assert!(locate_text(&a, &BinaryImage::zeros(1, 3).unwrap()).is_err());
    }

    #[test]
    fn median_examples() {
        let img = GrayImage::filled(4, 4, 9).unwrap();
        assert_eq!(median_filter(&img, 3).unwrap(), img);

        let img = gray(3, 3, &[1, 2, 3, 4, 255, 5, 6, 7, 8]);
        // sorted: 1 2 3 4 5 6 7 8 255 -> 5th is 5
        assert_eq!(median_filter(&img, 3).unwrap().get(1, 1), 5);

        let mut img = GrayImage::filled(5, 5, 0).unwrap();
        img.set(2, 2, 255);
        assert!(median_filter(&img, 3).unwrap().data().iter().all(|&v| v == 0));

        assert!(median_filter(&img, 2).is_err());
    }

    #[test]
    fn white_page_stays_white() {
        let img = GrayImage::filled(10, 6, 255).unwrap();
        assert_eq!(enhance_line(&img, &EnhanceConfig::default()).unwrap(), img);
    }
}

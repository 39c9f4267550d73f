//! Raster types shared by enhancement, segmentation and simulation, plus
//! binary PGM (P5) / PBM (P4) codecs.

use std::io::{self, Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("invalid dimensions {width}x{height}")]
    Dimensions { width: usize, height: usize },
    #[error("data length {actual} does not match {width}x{height}")]
    DataLength {
        width: usize,
        height: usize,
        actual: usize,
    },
    #[error("binary image value {0} is not 0 or 1")]
    NotBinary(u8),
    #[error("image {op} requires at least {min_w}x{min_h}, got {width}x{height}")]
    TooSmall {
        op: &'static str,
        min_w: usize,
        min_h: usize,
        width: usize,
        height: usize,
    },
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    Mismatch(usize, usize, usize, usize),
    #[error("malformed netpbm file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Row-major 8-bit grayscale raster. 0 is black ink, 255 is white paper.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ImageError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self, ImageError> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Pixel lookup with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    pub fn inverted(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| 255 - v).collect(),
        }
    }

    /// Copies the rectangle `(x, y, w, h)`; the rectangle must lie inside the image.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<GrayImage, ImageError> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(ImageError::Dimensions {
                width: w,
                height: h,
            });
        }
        let mut data = Vec::with_capacity(w * h);
        for row in y..y + h {
            data.extend_from_slice(&self.data[row * self.width + x..row * self.width + x + w]);
        }
        GrayImage::new(w, h, data)
    }

    /// Renders a binary image as ink-on-paper: foreground 0, background 255.
    pub fn from_binary(bin: &BinaryImage) -> GrayImage {
        GrayImage {
            width: bin.width,
            height: bin.height,
            data: bin.data.iter().map(|&b| if b == 1 { 0 } else { 255 }).collect(),
        }
    }

    pub fn write_pgm<W: Write>(&self, mut w: W) -> Result<(), ImageError> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.data)?;
        Ok(())
    }

    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.data.len() + 20);
        self.write_pgm(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_pgm<R: Read>(mut r: R) -> Result<GrayImage, ImageError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let mut p = HeaderParser::new(&bytes);
        p.expect_magic(b"P5")?;
        let width = p.number()?;
        let height = p.number()?;
        let maxval = p.number()?;
        if maxval != 255 {
            return Err(ImageError::Format(format!("unsupported maxval {maxval}")));
        }
        let body = p.body()?;
        let n = width * height;
        if body.len() < n {
            return Err(ImageError::Format(format!(
                "expected {n} pixel bytes, found {}",
                body.len()
            )));
        }
        GrayImage::new(width, height, body[..n].to_vec())
    }
}

/// Row-major binary raster with values in {0 background, 1 foreground}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height, data.len())?;
        if let Some(&bad) = data.iter().find(|&&v| v > 1) {
            return Err(ImageError::NotBinary(bad));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self, ImageError> {
        Self::new(width, height, vec![0; width * height])
    }

    pub fn ones(width: usize, height: usize) -> Result<Self, ImageError> {
        Self::new(width, height, vec![1; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] == 1
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.data[y * self.width + x] = on as u8;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }

    /// P4 encoding: 1 = black, rows packed MSB-first and padded to a byte.
    pub fn write_pbm<W: Write>(&self, mut w: W) -> Result<(), ImageError> {
        write!(w, "P4\n{} {}\n", self.width, self.height)?;
        let row_bytes = self.width.div_ceil(8);
        let mut row = vec![0u8; row_bytes];
        for y in 0..self.height {
            row.iter_mut().for_each(|b| *b = 0);
            for x in 0..self.width {
                if self.get(x, y) {
                    row[x / 8] |= 0x80 >> (x % 8);
                }
            }
            w.write_all(&row)?;
        }
        Ok(())
    }

    pub fn to_pbm_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_pbm(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_pbm<R: Read>(mut r: R) -> Result<BinaryImage, ImageError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let mut p = HeaderParser::new(&bytes);
        p.expect_magic(b"P4")?;
        let width = p.number()?;
        let height = p.number()?;
        let body = p.body()?;
        let row_bytes = width.div_ceil(8);
        if body.len() < row_bytes * height {
            return Err(ImageError::Format(format!(
                "expected {} packed bytes, found {}",
                row_bytes * height,
                body.len()
            )));
        }
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            let row = &body[y * row_bytes..(y + 1) * row_bytes];
            for x in 0..width {
                data.push((row[x / 8] >> (7 - x % 8)) & 1);
            }
        }
        BinaryImage::new(width, height, data)
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<(), ImageError> {
    if width == 0 || height == 0 {
        return Err(ImageError::Dimensions { width, height });
    }
    if len != width * height {
        return Err(ImageError::DataLength {
            width,
            height,
            actual: len,
        });
    }
    Ok(())
}

struct HeaderParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderParser<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn expect_magic(&mut self, magic: &[u8]) -> Result<(), ImageError> {
        if !self.bytes.starts_with(magic) {
            return Err(ImageError::Format(format!(
                "expected magic {}",
                String::from_utf8_lossy(magic)
            )));
        }
        self.pos = magic.len();
        Ok(())
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Result<usize, ImageError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::Format("expected a decimal number".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::Format("number out of range".into()))
    }

    /// Exactly one whitespace byte separates the header from the raster.
    fn body(mut self) -> Result<&'a [u8], ImageError> {
        match self.bytes.get(self.pos) {
            Some(c) if c.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(&self.bytes[self.pos..])
            }
            _ => Err(ImageError::Format("missing header terminator".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dimensions() {
        assert!(GrayImage::new(0, 3, vec![]).is_err());
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
        assert!(BinaryImage::new(1, 2, vec![0, 2]).is_err());
    }

    #[test]
    fn pgm_header_is_canonical() {
        let img = GrayImage::new(2, 1, vec![7, 250]).unwrap();
        assert_eq!(img.to_pgm_bytes(), b"P5\n2 1\n255\n\x07\xfa".to_vec());
        let back = GrayImage::read_pgm(&img.to_pgm_bytes()[..]).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn pgm_reader_skips_comments() {
        let bytes = b"P5\n# made by hand\n1 2\n255\n\x01\x02";
        let img = GrayImage::read_pgm(&bytes[..]).unwrap();
        assert_eq!(img.data(), &[1, 2]);
    }

    #[test]
    fn pbm_bit_packing() {
        // 10 pixels wide: two bytes per row, MSB first.
        let mut data = vec![0u8; 10];
        data[0] = 1;
        data[9] = 1;
        let img = BinaryImage::new(10, 1, data).unwrap();
        assert_eq!(img.to_pbm_bytes(), b"P4\n10 1\n\x80\x40".to_vec());
        assert_eq!(BinaryImage::read_pbm(&img.to_pbm_bytes()[..]).unwrap(), img);
    }

    #[test]
    fn truncated_raster_is_rejected() {
        assert!(GrayImage::read_pgm(&b"P5\n2 2\n255\n\x00"[..]).is_err());
        assert!(BinaryImage::read_pbm(&b"P4\n9 2\n\x00"[..]).is_err());
    }
}

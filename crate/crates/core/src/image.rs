//! Raster and annotation types, file I/O and grayscale conversion.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use image::{DynamicImage, ImageReader};

use crate::error::{Error, Result};

/// 8-bit interleaved RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("image dimensions must be nonzero".into()));
        }
        if data.len() != width * height * 3 {
            return Err(Error::InvalidInput(format!(
                "rgb buffer of {} bytes does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0);
        let data = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Self { width, height, data }
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

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        image::save_buffer(
            path,
            &self.data,
            self.width as u32,
            self.height as u32,
            image::ExtendedColorType::Rgb8,
        )
        .map_err(|e| Error::Unreadable {
            path: path.to_owned(),
            reason: e.to_string(),
        })
    }
}

/// Single 8-bit plane: grayscale, a stain concentration plane, a mask or a
/// segmentation map.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChannelImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl ChannelImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("image dimensions must be nonzero".into()));
        }
        if data.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "channel buffer of {} bytes does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0);
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0);
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
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

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        image::save_buffer(
            path,
            &self.data,
            self.width as u32,
            self.height as u32,
            image::ExtendedColorType::L8,
        )
        .map_err(|e| Error::Unreadable {
            path: path.to_owned(),
            reason: e.to_string(),
        })
    }
}

/// Decode an 8-bit RGB or RGBA PNG/TIFF. Alpha is dropped.
pub fn load_patch(path: &Path) -> Result<RgbImage> {
    let unreadable = |reason: String| Error::Unreadable {
        path: path.to_owned(),
        reason,
    };
    let reader = ImageReader::new(BufReader::new(File::open(path).map_err(|e| unreadable(e.to_string()))?))
        .with_guessed_format()
        .map_err(|e| unreadable(e.to_string()))?;
    let decoded = reader.decode().map_err(|e| match e {
        image::ImageError::Unsupported(u) => Error::UnsupportedImage {
            path: path.to_owned(),
            reason: u.to_string(),
        },
        other => unreadable(other.to_string()),
    })?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let rgb = match decoded {
        DynamicImage::ImageRgb8(buf) => buf.into_raw(),
        DynamicImage::ImageRgba8(buf) => buf
            .into_raw()
            .chunks_exact(4)
            .flat_map(|p| [p[0], p[1], p[2]])
            .collect(),
        other => {
            return Err(Error::UnsupportedImage {
                path: path.to_owned(),
                reason: format!("expected 8-bit RGB, found {:?}", other.color()),
            })
        }
    };
    RgbImage::new(w, h, rgb)
}

/// ITU-R BT.601 luma, rounded.
pub fn to_grayscale(img: &RgbImage) -> ChannelImage {
    let data = img
        .pixels()
        .map(|[r, g, b]| {
            let v = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
            v.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    ChannelImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Pixel coordinate; `x` is the column, `y` the row, origin top-left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotationSet {
    pub points: Vec<Point>,
    pub source: String,
}

impl AnnotationSet {
    pub fn new(points: Vec<Point>, source: impl Into<String>) -> Self {
        Self {
            points,
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Read a CSV whose first two columns are `x,y`; further columns are
/// ignored. When `bounds` is given, points outside
/// `[0, width) x [0, height)` are rejected. Exact duplicates are rejected.
pub fn load_annotations(path: &Path, bounds: Option<(usize, usize)>) -> Result<AnnotationSet> {
    let file = File::open(path).map_err(|e| Error::Unreadable {
        path: path.to_owned(),
        reason: e.to_string(),
    })?;
    let parse_err = |line: u64, reason: String| Error::Parse {
        path: path.to_owned(),
        line,
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(BufReader::new(file));

    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.len() < 2 || &headers[0] != "x" || &headers[1] != "y" {
        return Err(parse_err(1, "expected header \"x,y\"".into()));
    }

    let mut points = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() < 2 || rec.len() != headers.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", headers.len(), rec.len()),
            ));
        }
        let coord = |i: usize| -> Result<f64> {
            let v: f64 = rec[i]
                .parse()
                .map_err(|_| parse_err(line, format!("not a number: {:?}", &rec[i])))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("not finite: {:?}", &rec[i])));
            }
            Ok(v)
        };
        let (x, y) = (coord(0)?, coord(1)?);
        if x < 0.0 || y < 0.0 {
            return Err(parse_err(line, format!("negative coordinate ({x}, {y})")));
        }
        if let Some((w, h)) = bounds {
            if x >= w as f64 || y >= h as f64 {
                return Err(parse_err(line, format!("({x}, {y}) outside {w}x{h} image")));
            }
        }
        if !seen.insert((x.to_bits(), y.to_bits())) {
            return Err(parse_err(line, format!("duplicate point ({x}, {y})")));
        }
        points.push(Point::new(x, y));
    }
    let source = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(AnnotationSet { points, source })
}

pub fn save_annotations(path: &Path, set: &AnnotationSet) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,y")?;
    for p in &set.points {
        writeln!(w, "{},{}", p.x, p.y)?;
    }
    w.flush()?;
    Ok(())
}

use crate::candidates::reflect;
use crate::image::ChannelImage;

/// Number of gray levels after quantization.
pub const GRAY_LEVELS: usize = 32;
/// Width of one quantization bin in 8-bit units.
pub const BIN_WIDTH: u8 = 8;

/// Square block of raw 8-bit samples centred on a pixel. Samples that fall
/// outside the image are reflected back in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    side: usize,
    values: Vec<u8>,
}

impl Window {
    pub fn new(side: usize, values: Vec<u8>) -> Self {
        assert!(side > 0 && values.len() == side * side, "window must be side x side");
        Self { side, values }
    }

    /// `side` must be odd.
    pub fn around(img: &ChannelImage, cx: usize, cy: usize, side: usize) -> Self {
        assert!(side % 2 == 1, "window side must be odd");
        let half = (side / 2) as i64;
        let (w, h) = (img.width(), img.height());
        let mut values = Vec::with_capacity(side * side);
        for dy in -half..=half {
            let y = reflect(cy as i64 + dy, h);
            for dx in -half..=half {
                values.push(img.get(reflect(cx as i64 + dx, w), y));
            }
        }
        Self { side, values }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn quantize(&self) -> QuantizedWindow {
        QuantizedWindow {
            side: self.side,
            levels: self.values.iter().map(|&v| quantize_value(v)).collect(),
        }
    }
}

#[inline]
pub fn quantize_value(v: u8) -> u8 {
    v / BIN_WIDTH + 1
}

/// Window of gray levels in `1..=GRAY_LEVELS`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedWindow {
    side: usize,
    levels: Vec<u8>,
}

impl QuantizedWindow {
    pub fn new(side: usize, levels: Vec<u8>) -> Self {
        assert!(side > 0 && levels.len() == side * side, "window must be side x side");
        assert!(
            levels.iter().all(|&l| (1..=GRAY_LEVELS as u8).contains(&l)),
            "levels must lie in 1..=32"
        );
        Self { side, levels }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn levels(&self) -> &[u8] {
        &self.levels
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> u8 {
        self.levels[y * self.side + x]
    }
}

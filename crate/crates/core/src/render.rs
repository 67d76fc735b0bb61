//! Plain (P2) PGM rendering of deposit patterns.


use crate::geometry::Lattice;
use crate::symmetry::Deposit;

/// Greyscale raster, row-major from the top-left corner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl PgmImage {
    pub fn blank(width: usize, height: usize) -> Self {
        Self { width, height, pixels: vec![0; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut out = self.clone();
        for row in out.pixels.chunks_mut(self.width) {
            row.reverse();
        }
        out
    }

    fn fill_square(&mut self, cx: i64, cy: i64, side: u32) {
        let lo = -(((side - 1) / 2) as i64);
        let hi = lo + side as i64 - 1;
        for y in (cy + lo).max(0)..=(cy + hi).min(self.height as i64 - 1) {
            for x in (cx + lo).max(0)..=(cx + hi).min(self.width as i64 - 1) {
                self.pixels[y as usize * self.width + x as usize] = 255;
            }
        }
    }

    /// `P2` text with maxval 255; lines never exceed 70 characters.
    pub fn to_plain(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.pixels.chunks(self.width) {
            let mut line_len = 0;
            for &p in row {
                let cell = p.to_string();
                if line_len > 0 && line_len + 1 + cell.len() > 70 {
                    out.push('\n');
                    line_len = 0;
                }
                if line_len > 0 {
                    out.push(' ');
                    line_len += 1;
                }
                out.push_str(&cell);
                line_len += cell.len();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_plain(text: &str) -> Option<Self> {
        let mut tokens = text.split_whitespace();
        if tokens.next()? != "P2" {
            return None;
        }
        let width: usize = tokens.next()?.parse().ok()?;
        let height: usize = tokens.next()?.parse().ok()?;
        let _max: u32 = tokens.next()?.parse().ok()?;
        let pixels: Vec<u8> = tokens.map(|t| t.parse().ok()).collect::<Option<_>>()?;
        (pixels.len() == width * height).then_some(Self { width, height, pixels })
    }
}

/// Pixel column and row of a point, `floor((x + r) / 2r * (W - 1))` and
/// `floor((r - y) / 2r * (W - 1))`.
pub fn pixel_of(x: f64, y: f64, radius: f64, width: u32) -> (i64, i64) {
    let span = (width - 1) as f64;
    let px = ((x + radius) / (2.0 * radius) * span).floor() as i64;
    let py = ((radius - y) / (2.0 * radius) * span).floor() as i64;
    (px, py)
}

/// Draws each deposit as a filled `size` x `size` white square.
pub fn render(deposits: &[Deposit], lattice: &Lattice, size: u32, width: u32) -> PgmImage {
    let mut img = PgmImage::blank(width as usize, width as usize);
    let r = lattice.domain().radius();
    for d in deposits {
        let p = lattice.position(d.node);
        let (px, py) = pixel_of(p.x, p.y, r, width);
        img.fill_square(px, py, size);
    }
    img
}

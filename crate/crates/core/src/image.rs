//! Single-channel images and the portable graymap (PGM) format.

use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("not a graymap: {0}")]
    Format(String),
    #[error("image of size {width}x{height} does not match {len} pixels")]
    SizeMismatch { width: usize, height: usize, len: usize },
}

/// A grayscale raster with samples in `0..=maxval`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    maxval: u16,
    data: Vec<u16>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, maxval: u16, data: Vec<u16>) -> Result<Self, ImageError> {
        if data.len() != width * height || maxval == 0 {
            return Err(ImageError::SizeMismatch { width, height, len: data.len() });
        }
        Ok(Self { width, height, maxval, data: data.into_iter().map(|v| v.min(maxval)).collect() })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self { width, height, maxval: 255, data: vec![u16::from(value); width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn maxval(&self) -> u16 {
        self.maxval
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u16) {
        self.data[y * self.width + x] = v.min(self.maxval);
    }

    /// Nearest-neighbor resampling.
    pub fn resize_nearest(&self, width: usize, height: usize) -> GrayImage {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            let sy = ((y as f64 + 0.5) * self.height as f64 / height as f64) as usize;
            let sy = sy.min(self.height - 1);
            for x in 0..width {
                let sx = ((x as f64 + 0.5) * self.width as f64 / width as f64) as usize;
                data.push(self.get(sx.min(self.width - 1), sy));
            }
        }
        GrayImage { width, height, maxval: self.maxval, data }
    }

    /// Copy `src` with its top-left at (`x`, `y`); pixels outside are dropped.
    pub fn blit(&mut self, src: &GrayImage, x: i64, y: i64) {
        for sy in 0..src.height {
            let ty = y + sy as i64;
            if ty < 0 || ty >= self.height as i64 {
                continue;
            }
            for sx in 0..src.width {
                let tx = x + sx as i64;
                if tx < 0 || tx >= self.width as i64 {
                    continue;
                }
                self.set(tx as usize, ty as usize, src.get(sx, sy));
            }
        }
    }

    /// Map samples linearly: `a * v + b`, clamped to the valid range.
    pub fn map_affine(&self, a: f64, b: f64) -> GrayImage {
        let max = f64::from(self.maxval);
        let data = self.data.iter().map(|&v| (a * f64::from(v) + b).round().clamp(0.0, max) as u16).collect();
        GrayImage { data, ..self.clone() }
    }

    pub fn read_pgm(path: impl AsRef<Path>) -> Result<Self, ImageError> {
        let f = std::fs::File::open(path)?;
        Self::decode_pgm(BufReader::new(f))
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<(), ImageError> {
        let mut f = io::BufWriter::new(std::fs::File::create(path)?);
        self.encode_pgm(&mut f)?;
        f.flush()?;
        Ok(())
    }

    /// Decode a P2 (ASCII) or P5 (binary) graymap.
    pub fn decode_pgm<R: BufRead>(mut r: R) -> Result<Self, ImageError> {
        let magic = read_token(&mut r)?;
        let binary = match magic.as_str() {
            "P5" => true,
            "P2" => false,
            other => return Err(ImageError::Format(format!("bad magic {other:?}"))),
        };
        let width = parse_num(&read_token(&mut r)?)?;
        let height = parse_num(&read_token(&mut r)?)?;
        let maxval = parse_num(&read_token(&mut r)?)?;
        if maxval == 0 || maxval > 65535 {
            return Err(ImageError::Format(format!("maxval {maxval} out of range")));
        }
        let n = width * height;
        let mut data = Vec::with_capacity(n);
        if binary {
            // Exactly one whitespace byte separates the header from the raster;
            // read_token already consumed it.
            let bytes_per = if maxval < 256 { 1 } else { 2 };
            let mut raw = vec![0u8; n * bytes_per];
            r.read_exact(&mut raw)?;
            if bytes_per == 1 {
                data.extend(raw.iter().map(|&b| u16::from(b)));
            } else {
                data.extend(raw.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])));
            }
        } else {
            for _ in 0..n {
                data.push(parse_num(&read_token(&mut r)?)? as u16);
            }
        }
        GrayImage::new(width, height, maxval as u16, data)
    }

    /// Encode as binary P5.
    pub fn encode_pgm<W: Write>(&self, w: &mut W) -> io::Result<()> {
        write!(w, "P5\n{} {}\n{}\n", self.width, self.height, self.maxval)?;
        if self.maxval < 256 {
            let bytes: Vec<u8> = self.data.iter().map(|&v| v as u8).collect();
            w.write_all(&bytes)
        } else {
            let bytes: Vec<u8> = self.data.iter().flat_map(|v| v.to_be_bytes()).collect();
            w.write_all(&bytes)
        }
    }

    /// Encode as ASCII P2.
    pub fn encode_pgm_ascii<W: Write>(&self, w: &mut W) -> io::Result<()> {
        write!(w, "P2\n{} {}\n{}\n", self.width, self.height, self.maxval)?;
        for row in self.data.chunks(self.width.max(1)) {
            let line: Vec<String> = row.iter().map(u16::to_string).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

fn parse_num(tok: &str) -> Result<usize, ImageError> {
    tok.parse().map_err(|_| ImageError::Format(format!("expected a number, got {tok:?}")))
}

/// Next whitespace-delimited header token, skipping `#` comments. Consumes
/// the single delimiter byte following the token.
fn read_token<R: BufRead>(r: &mut R) -> Result<String, ImageError> {
    let mut tok = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            if tok.is_empty() {
                return Err(ImageError::Format("unexpected end of header".into()));
            }
            break;
        }
        let b = byte[0];
        if b == b'#' && tok.is_empty() {
            let mut comment = Vec::new();
            r.read_until(b'\n', &mut comment)?;
            continue;
        }
        if b.is_ascii_whitespace() {
            if tok.is_empty() {
                continue;
            }
            break;
        }
        tok.push(b);
    }
    String::from_utf8(tok).map_err(|_| ImageError::Format("non-ascii header".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decodes_ascii_with_comments() {
        let src = b"P2\n# a comment\n3 2\n# another\n255\n0 1 2\n3 4 255\n";
        let img = GrayImage::decode_pgm(&src[..]).unwrap();
        assert_eq!((img.width(), img.height()), (3, 2));
        assert_eq!(img.data(), &[0, 1, 2, 3, 4, 255]);
    }

    #[test]
    fn decodes_sixteen_bit_binary() {
        let mut src = b"P5 2 1 1000\n".to_vec();
        src.extend_from_slice(&[0x03, 0xE8, 0x00, 0x01]);
        let img = GrayImage::decode_pgm(&src[..]).unwrap();
        assert_eq!(img.data(), &[1000, 1]);
    }

    #[test]
    fn rejects_other_formats() {
        assert!(GrayImage::decode_pgm(&b"P6 1 1 255\n\0\0\0"[..]).is_err());
        assert!(GrayImage::decode_pgm(&b"P5 2 2 255\n\0"[..]).is_err());
    }

    #[test]
    fn resize_identity() {
        let img = GrayImage::new(3, 2, 255, vec![1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(img.resize_nearest(3, 2), img);
        assert_eq!(img.resize_nearest(6, 4).get(5, 3), 6);
    }

    proptest! {
        #[test]
        fn pgm_round_trip(w in 1usize..12, h in 1usize..12, wide in any::<bool>(), seed in any::<u64>(), ascii in any::<bool>()) {
            let maxval: u16 = if wide { 4095 } else { 255 };
            let data: Vec<u16> = (0..w * h)
                .map(|i| ((seed.wrapping_mul(i as u64 + 1) >> 7) % (u64::from(maxval) + 1)) as u16)
                .collect();
            let img = GrayImage::new(w, h, maxval, data).unwrap();
            let mut buf = Vec::new();
            if ascii { img.encode_pgm_ascii(&mut buf).unwrap() } else { img.encode_pgm(&mut buf).unwrap() }
            prop_assert_eq!(GrayImage::decode_pgm(&buf[..]).unwrap(), img);
        }
    }
}

//! PPM (P3 ASCII / P6 binary) reading and writing, maxval 255 only.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PpmFormat {
    P3,
    P6,
}

pub fn load_ppm(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_ppm(&bytes)
}

pub fn save_ppm(img: &RgbImage, path: impl AsRef<Path>, format: PpmFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_ppm(img, format);
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_ppm(img: &RgbImage, format: PpmFormat) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    match format {
        PpmFormat::P6 => {
            let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
            out.reserve(w * h * 3);
            for px in img.pixels() {
                out.extend_from_slice(px);
            }
            out
        }
        PpmFormat::P3 => {
            let mut out = format!("P3\n{w} {h}\n255\n");
            for row in img.pixels().chunks(w) {
                let line: Vec<String> = row
                    .iter()
                    .map(|[r, g, b]| format!("{r} {g} {b}"))
                    .collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Skips whitespace and `#` comments.
    fn skip_separators(&mut self) {
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

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() && self.bytes[self.pos] != b'#' {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn header_number(&mut self, what: &str) -> Result<u32> {
        let tok = self
            .token()
            .ok_or_else(|| Error::PpmHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| Error::PpmHeader(format!("{what} is not a non-negative integer")))
    }
}

pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.token().ok_or_else(|| Error::PpmHeader("empty file".into()))?;
    let format = match magic {
        b"P3" => PpmFormat::P3,
        b"P6" => PpmFormat::P6,
        other => {
            return Err(Error::PpmHeader(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = cur.header_number("width")? as usize;
    let height = cur.header_number("height")? as usize;
    if width == 0 || height == 0 {
        return Err(Error::PpmHeader(format!("zero dimension {width}x{height}")));
    }
    let maxval = cur.header_number("maxval")?;
    if maxval != 255 {
        return Err(Error::PpmMaxval(maxval));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::PpmHeader("dimensions overflow".into()))?;

    let samples: Vec<u8> = match format {
        PpmFormat::P6 => {
            // exactly one whitespace byte separates maxval from the raster
            if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
                return Err(Error::PpmTruncated { expected, found: 0 });
            }
            let data = &bytes[cur.pos + 1..];
            if data.len() < expected {
                return Err(Error::PpmTruncated {
                    expected,
                    found: data.len(),
                });
            }
            data[..expected].to_vec()
        }
        PpmFormat::P3 => {
            let mut out = Vec::with_capacity(expected);
            while out.len() < expected {
                let Some(tok) = cur.token() else {
                    return Err(Error::PpmTruncated {
                        expected,
                        found: out.len(),
                    });
                };
                let v = std::str::from_utf8(tok)
                    .ok()
                    .and_then(|s| s.parse::<u32>().ok())
                    .ok_or_else(|| Error::PpmHeader(format!("bad sample {:?}", String::from_utf8_lossy(tok))))?;
                if v > 255 {
                    return Err(Error::PpmHeader(format!("sample {v} exceeds maxval")));
                }
                out.push(v as u8);
            }
            out
        }
    };
    let pixels = samples.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    RgbImage::new(width, height, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn p6_two_pixels() {
        let mut bytes = b"P6\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0, 0, 255, 0]);
        let img = decode_ppm(&bytes).unwrap();
        assert_eq!(img.pixels(), &[[255, 0, 0], [0, 255, 0]]);
        let p3 = decode_ppm(b"P3\n# a comment\n2 1\n255\n255 0 0\n0 255 0\n").unwrap();
        assert_eq!(p3, img);
    }

    #[test]
    fn errors_are_distinct() {
        let mut short = b"P6\n2 2\n255\n".to_vec();
        short.extend_from_slice(&[1; 9]);
        assert!(matches!(decode_ppm(&short), Err(Error::PpmTruncated { expected: 12, found: 9 })));
        assert!(matches!(
            decode_ppm(b"P3 2 2 255 1 2 3 4 5 6 7 8 9"),
            Err(Error::PpmTruncated { expected: 12, found: 9 })
        ));
        assert!(matches!(decode_ppm(b"P6\n1 1\n65535\n\0\0\0\0\0\0"), Err(Error::PpmMaxval(65535))));
        assert!(matches!(decode_ppm(b"P5\n1 1\n255\n\0"), Err(Error::PpmHeader(_))));
        assert!(matches!(decode_ppm(b"P6\nx 1\n255\n"), Err(Error::PpmHeader(_))));
        assert!(matches!(load_ppm("/nonexistent/definitely.ppm"), Err(Error::Io { .. })));
    }

    #[test]
    fn random_round_trip_100x80() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let img = RgbImage::from_fn(100, 80, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for fmt in [PpmFormat::P6, PpmFormat::P3] {
            let path = dir.path().join(format!("{fmt:?}.ppm"));
            save_ppm(&img, &path, fmt).unwrap();
            assert_eq!(load_ppm(&path).unwrap(), img);
        }
    }

    #[test]
    fn unwritable_destination() {
        let img = RgbImage::filled(1, 1, [1, 2, 3]).unwrap();
        assert!(matches!(
            save_ppm(&img, "/nonexistent-dir/x.ppm", PpmFormat::P6),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn round_trip_both_formats(w in 1usize..12, h in 1usize..12, seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let img = RgbImage::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap();
            let p3 = decode_ppm(&encode_ppm(&img, PpmFormat::P3)).unwrap();
            let p6 = decode_ppm(&encode_ppm(&img, PpmFormat::P6)).unwrap();
            prop_assert_eq!(&p3, &img);
            prop_assert_eq!(&p6, &img);
        }
    }
}

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Raster with `channels` (1 or 3) interleaved per pixel, row-major, values
/// in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Invalid(format!("empty image {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Invalid(format!("{channels} channels (expected 1 or 3)")));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::Dimension(format!(
                "{} pixel values for a {width}x{height}x{channels} image",
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Invalid(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(Image {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.pixels[(y * self.width + x) * self.channels + c]
    }
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// PGM for one channel, PPM for three.
pub fn encode_pnm(image: &Image) -> Vec<u8> {
    let magic = if image.channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend(image.pixels.iter().map(|&v| quantize(v)));
    out
}

/// Parses binary PGM/PPM with maxval 255; `#` comments are allowed in the
/// header.
pub fn decode_pnm(bytes: &[u8], source_name: &str) -> Result<Image> {
    let err = |msg: String| Error::parse(source_name, 0, msg);
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        Some(m) => {
            return Err(err(format!(
                "unsupported magic number `{}` (expected P5 or P6)",
                String::from_utf8_lossy(m)
            )))
        }
        None => return Err(err("truncated header".into())),
    };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(err("truncated or malformed header".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err("header value out of range".into()))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(err(format!("maxval {maxval} unsupported (expected 255)")));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(err("missing whitespace after header".into()));
    }
    pos += 1;
    let need = width * height * channels;
    let payload = &bytes[pos..];
    if payload.len() < need {
        return Err(err(format!(
            "truncated payload: {} of {need} bytes",
            payload.len()
        )));
    }
    let pixels = payload[..need].iter().map(|&b| f64::from(b) / 255.0).collect();
    Image::new(width, height, channels, pixels)
}

pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pnm(&bytes, &path.display().to_string())
}

pub fn write_image(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pnm(image)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decodes_endpoints() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend([0, 255, 0, 255]);
        let img = decode_pnm(&bytes, "mem").unwrap();
        assert_eq!(img.pixels(), [0.0, 1.0, 0.0, 1.0]);
        assert_eq!(img.channels(), 1);
    }

    #[test]
    fn quantization_contract() {
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(1.7), 255);
        assert_eq!(quantize(-0.2), 0);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(decode_pnm(b"P3\n1 1\n255\n0", "mem").is_err());
        assert!(decode_pnm(b"P6\n2 2\n255\n\x01\x02", "mem").is_err());
        assert!(decode_pnm(b"P5\n1 1\n65535\n\x00\x00", "mem").is_err());
        assert!(decode_pnm(b"P5\n", "mem").is_err());
    }

    #[test]
    fn header_comments() {
        let img = decode_pnm(b"P5 # made by hand\n1 1\n255\n\x80", "mem").unwrap();
        assert_eq!(img.pixels(), [128.0 / 255.0]);
    }

    proptest! {
        #[test]
        fn bytes_round_trip(w in 1usize..6, h in 1usize..6, rgb in any::<bool>(), seed in any::<u64>()) {
            let c = if rgb { 3 } else { 1 };
            let bytes: Vec<u8> = (0..w * h * c).map(|i| (seed.wrapping_mul(i as u64 + 1) >> 13) as u8).collect();
            let mut file = format!("{}\n{w} {h}\n255\n", if rgb { "P6" } else { "P5" }).into_bytes();
            file.extend(&bytes);
            let img = decode_pnm(&file, "mem").unwrap();
            prop_assert_eq!(encode_pnm(&img), file);
        }
    }
}

//! Grayscale PGM (Netpbm P5 and P2) reading and writing.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use ndarray::{s, Array2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("unsupported PGM depth: maxval {0} > 255")]
    UnsupportedDepth(u32),
    #[error("unexpected end of pixel data")]
    Truncated,
    #[error("invalid pixel value: {0}")]
    InvalidPixel(String),
    #[error("{0}")]
    InvalidCrop(String),
}

/// Row-major grayscale image with intensities on the 0..=255 scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pixels: Array2<f64>,
}

impl GrayImage {
    pub fn new(pixels: Array2<f64>) -> Result<Self, PgmError> {
        if pixels.iter().any(|v| !v.is_finite()) {
            return Err(PgmError::InvalidPixel("non-finite value".into()));
        }
        Ok(GrayImage { pixels })
    }

    pub fn width(&self) -> usize {
        self.pixels.ncols()
    }

    pub fn height(&self) -> usize {
        self.pixels.nrows()
    }

    pub fn pixels(&self) -> &Array2<f64> {
        &self.pixels
    }

    pub fn into_pixels(self) -> Array2<f64> {
        self.pixels
    }
}

/// Splits the header into whitespace-separated tokens, skipping `#` comments.
/// Returns the tokens and the offset just past the last one.
fn header_tokens(bytes: &[u8], count: usize) -> Result<(Vec<String>, usize), PgmError> {
    let mut tokens = Vec::with_capacity(count);
    let mut i = 0;
    while tokens.len() < count {
        match bytes.get(i) {
            None => {
                return Err(PgmError::MalformedHeader(format!(
                    "expected {count} header fields, found {}",
                    tokens.len()
                )))
            }
            Some(b'#') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            Some(c) if c.is_ascii_whitespace() => i += 1,
            Some(_) => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'#' {
                    i += 1;
                }
                tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
            }
        }
    }
    Ok((tokens, i))
}

fn parse_dim(tok: &str, what: &str) -> Result<u32, PgmError> {
    tok.parse()
        .map_err(|_| PgmError::MalformedHeader(format!("bad {what} `{tok}`")))
}

pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let (tokens, end) = header_tokens(bytes, 4)?;
    let binary = match tokens[0].as_str() {
        "P5" => true,
        "P2" => false,
        other => {
            return Err(PgmError::MalformedHeader(format!(
                "unsupported magic `{other}`"
            )))
        }
    };
    let width = parse_dim(&tokens[1], "width")? as usize;
    let height = parse_dim(&tokens[2], "height")? as usize;
    let maxval = parse_dim(&tokens[3], "maxval")?;
    if maxval == 0 {
        return Err(PgmError::MalformedHeader("maxval 0".into()));
    }
    if maxval > 255 {
        return Err(PgmError::UnsupportedDepth(maxval));
    }
    let count = width * height;

    let values: Vec<f64> = if binary {
        // exactly one whitespace byte separates the header from the raster
        if !bytes.get(end).is_some_and(|b| b.is_ascii_whitespace()) {
            return Err(PgmError::Truncated);
        }
        let raster = &bytes[end + 1..];
        if raster.len() < count {
            return Err(PgmError::Truncated);
        }
        raster[..count].iter().map(|&b| b as f64).collect()
    } else {
        let text = std::str::from_utf8(&bytes[end..])
            .map_err(|_| PgmError::InvalidPixel("non-ASCII raster".into()))?;
        let mut out = Vec::with_capacity(count);
        for tok in text.split_ascii_whitespace().take(count) {
            let v: u32 = tok
                .parse()
                .map_err(|_| PgmError::InvalidPixel(tok.to_string()))?;
            out.push(v as f64);
        }
        if out.len() < count {
            return Err(PgmError::Truncated);
        }
        out
    };
    if let Some(v) = values.iter().find(|&&v| v > maxval as f64) {
        return Err(PgmError::InvalidPixel(format!(
            "{v} exceeds maxval {maxval}"
        )));
    }
    let pixels = Array2::from_shape_vec((height, width), values).expect("count checked");
    Ok(GrayImage { pixels })
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage, PgmError> {
    parse_pgm(&fs::read(path)?)
}

fn to_byte(v: f64) -> u8 {
    if v.is_nan() {
        0
    } else {
        v.round().clamp(0.0, 255.0) as u8
    }
}

/// Binary P5 encoding, rounding half away from zero and clamping to 0..=255.
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.pixels.iter().map(|&v| to_byte(v)));
    out
}

pub fn write_pgm(image: &GrayImage, path: impl AsRef<Path>) -> Result<(), PgmError> {
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    f.write_all(&encode_pgm(image))?;
    f.flush()?;
    Ok(())
}

/// Centered `side x side` crop; odd margins put the extra pixel after the crop.
pub fn crop_center(image: &GrayImage, side: usize) -> Result<GrayImage, PgmError> {
    if side == 0 || side > image.width().min(image.height()) {
        return Err(PgmError::InvalidCrop(format!(
            "crop side {side} does not fit a {}x{} image",
            image.width(),
            image.height()
        )));
    }
    let top = (image.height() - side) / 2;
    let left = (image.width() - side) / 2;
    Ok(GrayImage {
        pixels: image
            .pixels
            .slice(s![top..top + side, left..left + side])
            .to_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn binary_and_ascii() {
        let p5 = [b"P5\n2 2\n255\n".as_slice(), &[0, 255, 128, 64]].concat();
        let img = parse_pgm(&p5).unwrap();
        assert_eq!(img.pixels(), &array![[0.0, 255.0], [128.0, 64.0]]);
        let p2 = b"P2\n# a comment\n2 2\n255\n0 255\n128 64\n";
        assert_eq!(parse_pgm(p2).unwrap(), img);
    }

    #[test]
    fn header_comments_anywhere() {
        let p5 = [b"P5 # c1\n2 # c2\n1\n# c3\n200\n".as_slice(), &[10, 20]].concat();
        assert_eq!(parse_pgm(&p5).unwrap().pixels(), &array![[10.0, 20.0]]);
    }

    #[test]
    fn errors() {
        let short = [b"P5\n2 2\n255\n".as_slice(), &[0, 255, 128]].concat();
        let err = parse_pgm(&short).unwrap_err();
        assert!(matches!(err, PgmError::Truncated));
        assert_eq!(err.to_string(), "unexpected end of pixel data");
        assert!(matches!(
            parse_pgm(b"P2\n2 2\n255\n1 2 3"),
            Err(PgmError::Truncated)
        ));
        assert!(matches!(
            parse_pgm(b"P5\n2 2\n65535\n"),
            Err(PgmError::UnsupportedDepth(65535))
        ));
        assert!(matches!(
            parse_pgm(b"P6\n1 1\n255\n"),
            Err(PgmError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_pgm(b"P5\n2"),
            Err(PgmError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_pgm(b"P2\n1 1\n10\n11\n"),
            Err(PgmError::InvalidPixel(_))
        ));
        assert!(matches!(
            read_pgm("/nonexistent/x.pgm"),
            Err(PgmError::Io(_))
        ));
    }

    #[test]
    fn write_rounds_and_clamps() {
        let img = GrayImage::new(array![[255.6, -0.4, 2.5, 100.49]]).unwrap();
        let bytes = encode_pgm(&img);
        assert_eq!(&bytes[bytes.len() - 4..], &[255, 0, 3, 100]);
        assert!(GrayImage::new(array![[f64::NAN]]).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pgm");
        let img =
            GrayImage::new(Array2::from_shape_fn((5, 7), |(i, j)| (i * 40 + j) as f64)).unwrap();
        write_pgm(&img, &path).unwrap();
        assert_eq!(read_pgm(&path).unwrap(), img);
    }

    #[test]
    fn crops() {
        let img =
            GrayImage::new(Array2::from_shape_fn((4, 4), |(i, j)| (4 * i + j) as f64)).unwrap();
        assert_eq!(crop_center(&img, 4).unwrap(), img);
        let c = crop_center(&img, 2).unwrap();
        assert_eq!(c.pixels(), &array![[5.0, 6.0], [9.0, 10.0]]);
        assert!(crop_center(&img, 5).is_err());
        let wide = GrayImage::new(Array2::zeros((4, 7))).unwrap();
        assert_eq!(crop_center(&wide, 3).unwrap().width(), 3);
    }

    proptest! {
        #[test]
        fn integer_images_round_trip(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
            let mut s = seed;
            let px = Array2::from_shape_fn((h, w), |_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                (s >> 56) as f64
            });
            let img = GrayImage::new(px).unwrap();
            prop_assert_eq!(parse_pgm(&encode_pgm(&img)).unwrap(), img);
        }
    }
}

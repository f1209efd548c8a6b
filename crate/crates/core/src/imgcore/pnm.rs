//! Binary PGM (P5) / PPM (P6) reading and writing, maxval 255.

use std::fs;
use std::path::Path;

use super::image::Image;
use crate::{Error, Result};

pub fn encode(img: &Image) -> Vec<u8> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn decode(bytes: &[u8]) -> Result<Image> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Pnm("truncated header".into()));
        }
        fields.push(
            std::str::from_utf8(&bytes[start..pos])
                .map_err(|_| Error::Pnm("non-ascii header".into()))?,
        );
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let channels = match fields[0] {
        "P5" => 1,
        "P6" => 3,
        m => return Err(Error::Pnm(format!("unsupported magic {m}"))),
    };
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Pnm(format!("bad header field {s:?}")))
    };
    let (w, h, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval != 255 {
        return Err(Error::Pnm(format!("unsupported maxval {maxval}")));
    }
    let need = w * h * channels;
    let raster = bytes
        .get(pos..pos + need)
        .ok_or_else(|| Error::Pnm("truncated raster".into()))?;
    Image::new(w, h, channels, raster.to_vec())
}

pub fn read(path: &Path) -> Result<Image> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    decode(&fs::read(path)?)
}

pub fn write(path: &Path, img: &Image) -> Result<()> {
    fs::write(path, encode(img))?;
    Ok(())
}

/// Conventional extension for the image's channel count.
pub fn extension(img: &Image) -> &'static str {
    if img.channels() == 1 {
        "pgm"
    } else {
        "ppm"
    }
}

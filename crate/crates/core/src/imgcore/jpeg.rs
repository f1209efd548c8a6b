//! Lossy block-DCT round trip: the quantization stage of a baseline JPEG
//! codec without entropy coding or chroma subsampling.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::image::{quantize, Image};
use crate::{Error, Result};

const BASE_LUMA: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Luminance table scaled by the IJG quality rule, entries clamped to [1, 255].
pub fn quant_table(quality: u8) -> [u16; 64] {
    let q = quality.clamp(1, 100) as u32;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut out = [0u16; 64];
    for (o, &b) in out.iter_mut().zip(BASE_LUMA.iter()) {
        *o = ((b as u32 * scale + 50) / 100).clamp(1, 255) as u16;
    }
    out
}

/// Orthonormal DCT-II basis, `basis[u][x]`.
fn basis() -> &'static [[f64; 8]; 8] {
    static BASIS: OnceLock<[[f64; 8]; 8]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0.0; 8]; 8];
        for (u, row) in m.iter_mut().enumerate() {
            let c = if u == 0 { (1.0f64 / 8.0).sqrt() } else { 0.5 };
            for (x, v) in row.iter_mut().enumerate() {
                *v = c * ((2 * x + 1) as f64 * u as f64 * PI / 16.0).cos();
            }
        }
        m
    })
}

fn fdct(block: &[f64; 64]) -> [f64; 64] {
    let c = basis();
    let mut tmp = [0.0; 64];
    for u in 0..8 {
        for y in 0..8 {
            tmp[u * 8 + y] = (0..8).map(|x| c[u][x] * block[y * 8 + x]).sum();
        }
    }
    let mut out = [0.0; 64];
    for v in 0..8 {
        for u in 0..8 {
            out[v * 8 + u] = (0..8).map(|y| c[v][y] * tmp[u * 8 + y]).sum();
        }
    }
    out
}

fn idct(coef: &[f64; 64]) -> [f64; 64] {
    let c = basis();
    let mut tmp = [0.0; 64];
    for u in 0..8 {
        for y in 0..8 {
            tmp[u * 8 + y] = (0..8).map(|v| c[v][y] * coef[v * 8 + u]).sum();
        }
    }
    let mut out = [0.0; 64];
    for y in 0..8 {
        for x in 0..8 {
            out[y * 8 + x] = (0..8).map(|u| c[u][x] * tmp[u * 8 + y]).sum();
        }
    }
    out
}

/// One codec pass over a single 8-bit plane. Returns the decoded plane,
/// rounded and clamped to 8 bits.
fn code_plane(plane: &[f64], w: usize, h: usize, table: &[u16; 64]) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for by in (0..h).step_by(8) {
        for bx in (0..w).step_by(8) {
            let mut block = [0.0; 64];
            for y in 0..8 {
                let sy = (by + y).min(h - 1);
                for x in 0..8 {
                    let sx = (bx + x).min(w - 1);
                    block[y * 8 + x] = plane[sy * w + sx] - 128.0;
                }
            }
            let mut coef = fdct(&block);
            for (c, &q) in coef.iter_mut().zip(table.iter()) {
                let q = q as f64;
                *c = (*c / q).round() * q;
            }
            let rec = idct(&coef);
            for y in 0..8.min(h - by) {
                for x in 0..8.min(w - bx) {
                    out[(by + y) * w + bx + x] = quantize(rec[y * 8 + x] + 128.0) as f64;
                }
            }
        }
    }
    out
}

fn rgb_to_ycbcr(planes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (r, g, b) = (&planes[0], &planes[1], &planes[2]);
    let n = r.len();
    let mut y = Vec::with_capacity(n);
    let mut cb = Vec::with_capacity(n);
    let mut cr = Vec::with_capacity(n);
    for i in 0..n {
        y.push(quantize(0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]) as f64);
        cb.push(quantize(128.0 - 0.168736 * r[i] - 0.331264 * g[i] + 0.5 * b[i]) as f64);
        cr.push(quantize(128.0 + 0.5 * r[i] - 0.418688 * g[i] - 0.081312 * b[i]) as f64);
    }
    vec![y, cb, cr]
}

fn ycbcr_to_rgb(planes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (y, cb, cr) = (&planes[0], &planes[1], &planes[2]);
    let n = y.len();
    let mut r = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let (cb, cr) = (cb[i] - 128.0, cr[i] - 128.0);
        r.push(y[i] + 1.402 * cr);
        g.push(y[i] - 0.344136 * cb - 0.714136 * cr);
        b.push(y[i] + 1.772 * cb);
    }
    vec![r, g, b]
}

/// Applies `repeats` codec round trips at the given quality. RGB images are
/// coded in YCbCr, every plane with the luminance table.
pub fn jpeg_degrade(img: &Image, quality: u8, repeats: u32) -> Result<Image> {
    if !(1..=100).contains(&quality) || repeats == 0 {
        return Err(Error::InvalidParameter(format!(
            "jpeg quality {quality}, repeats {repeats}"
        )));
    }
    let table = quant_table(quality);
    let (w, h) = (img.width(), img.height());
    let mut current = img.clone();
    for _ in 0..repeats {
        let planes = current.planes();
        let coded: Vec<Vec<f64>> = if current.channels() == 3 {
            let ycc: Vec<Vec<f64>> = rgb_to_ycbcr(&planes)
                .iter()
                .map(|p| code_plane(p, w, h, &table))
                .collect();
            ycbcr_to_rgb(&ycc)
        } else {
            planes.iter().map(|p| code_plane(p, w, h, &table)).collect()
        };
        current = Image::from_planes(w, h, &coded);
    }
    Ok(current)
}

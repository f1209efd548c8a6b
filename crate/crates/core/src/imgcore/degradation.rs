use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One degradation operator with its parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DegradationKind {
    /// Additive Gaussian noise, standard deviation in intensity units.
    Noise { sigma: f64 },
    /// Gaussian blur, `radius` is the kernel standard deviation in pixels.
    Blur { radius: f64 },
    /// Block-DCT codec round trip repeated `repeats` times.
    Jpeg { quality: u8, repeats: u32 },
    /// Multiplicative brightness reduction.
    Darken { lambda: f64 },
}

impl DegradationKind {
    pub const DEFAULT_NOISE_SIGMA: f64 = 45.0;
    pub const DEFAULT_BLUR_RADIUS: f64 = 2.0;
    pub const DEFAULT_JPEG_QUALITY: u8 = 5;
    pub const DEFAULT_JPEG_REPEATS: u32 = 1;
    pub const DEFAULT_DARKEN_LAMBDA: f64 = 0.6;

    /// The four operators at their default strength, in sampling order.
    pub fn defaults() -> [DegradationKind; 4] {
        [
            DegradationKind::Noise {
                sigma: Self::DEFAULT_NOISE_SIGMA,
            },
            DegradationKind::Blur {
                radius: Self::DEFAULT_BLUR_RADIUS,
            },
            DegradationKind::Jpeg {
                quality: Self::DEFAULT_JPEG_QUALITY,
                repeats: Self::DEFAULT_JPEG_REPEATS,
            },
            DegradationKind::Darken {
                lambda: Self::DEFAULT_DARKEN_LAMBDA,
            },
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            DegradationKind::Noise { .. } => "noise",
            DegradationKind::Blur { .. } => "blur",
            DegradationKind::Jpeg { .. } => "jpeg",
            DegradationKind::Darken { .. } => "darken",
        }
    }

    /// The scalar parameter as written in manifests.
    pub fn parameter_value(&self) -> String {
        match *self {
            DegradationKind::Noise { sigma } => format_real(sigma),
            DegradationKind::Blur { radius } => format_real(radius),
            DegradationKind::Jpeg { quality, .. } => quality.to_string(),
            DegradationKind::Darken { lambda } => format_real(lambda),
        }
    }

    /// Inverse of `name` + `parameter_value`. JPEG uses the default repeat count.
    pub fn parse(name: &str, value: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad {name} parameter {value:?}"));
        let kind = match name {
            "noise" => DegradationKind::Noise {
                sigma: value.parse().map_err(|_| bad())?,
            },
            "blur" => DegradationKind::Blur {
                radius: value.parse().map_err(|_| bad())?,
            },
            "jpeg" => DegradationKind::Jpeg {
                quality: value.parse().map_err(|_| bad())?,
                repeats: Self::DEFAULT_JPEG_REPEATS,
            },
            "darken" => DegradationKind::Darken {
                lambda: value.parse().map_err(|_| bad())?,
            },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown degradation {other:?}"
                )))
            }
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DegradationKind::Noise { sigma } => sigma.is_finite() && sigma >= 0.0,
            DegradationKind::Blur { radius } => radius.is_finite() && radius >= 0.0,
            DegradationKind::Jpeg { quality, repeats } => {
                (1..=100).contains(&quality) && repeats >= 1
            }
            DegradationKind::Darken { lambda } => lambda > 0.0 && lambda <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{self:?}")))
        }
    }
}

/// Shortest round-tripping decimal, with a trailing ".0" for integral values.
fn format_real(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') || s.contains('e') || !v.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}

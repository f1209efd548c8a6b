//! Images, the four degradation operators, and paired-sample construction
//! with the effective-contrast filter.

mod blur;
mod darken;
mod degradation;
mod image;
mod jpeg;
pub mod manifest;
mod noise;
mod pair;
pub mod pnm;

pub use blur::gaussian_blur;
pub use darken::darken;
pub use degradation::DegradationKind;
pub use image::Image;
pub use jpeg::{jpeg_degrade, quant_table};
pub use noise::add_gaussian_noise;
pub use pair::{
    build_pair, default_contrast_judge, AlwaysAccept, ContrastJudge, PairedSample,
    PixelDifferenceJudge, Verdict,
};

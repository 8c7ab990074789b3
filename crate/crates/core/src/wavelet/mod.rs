//! Orthogonal wavelet filters and the periodized transforms built on them.

mod filters;
mod transform;

pub use filters::{
    shift_correlation, Family, WaveletFilter, WaveletName, ENERGY_TOLERANCE, SHIFT_TOLERANCE,
    SUM_TOLERANCE,
};
pub use transform::{
    dwt1d, dwt2d, dwt2d_with, idwt1d, idwt2d, idwt2d_with, DetailTriple, SubbandPyramid,
};

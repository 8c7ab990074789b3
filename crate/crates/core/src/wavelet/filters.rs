//! Orthogonal low-pass filters.
//!
//! Tap values come from the classical published tables (Daubechies'
//! "Ten Lectures" for the Daubechies, Symmlet and Coiflet families, and the
//! WaveLab tables for Beylkin and Vaidyanathan). They are normalized to unit
//! energy on construction and then checked against the orthogonality
//! conditions, so a mistyped digit fails loudly instead of silently breaking
//! perfect reconstruction.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Tolerance on `sum(h) = sqrt(2)`.
pub const SUM_TOLERANCE: f64 = 1e-8;
/// Tolerance on `sum(h^2) = 1`.
pub const ENERGY_TOLERANCE: f64 = 1e-10;
/// Tolerance on the even-shift autocorrelation being zero.
pub const SHIFT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Beylkin,
    Coiflet,
    Daubechies,
    Symmlet,
    Vaidyanathan,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Beylkin => "Beylkin",
            Family::Coiflet => "Coiflet",
            Family::Daubechies => "Daubechies",
            Family::Symmlet => "Symmlet",
            Family::Vaidyanathan => "Vaidyanathan",
        }
    }

    /// Identifier stored in the payload header.
    pub fn id(self) -> u8 {
        match self {
            Family::Beylkin => 0,
            Family::Coiflet => 1,
            Family::Daubechies => 2,
            Family::Symmlet => 3,
            Family::Vaidyanathan => 4,
        }
    }

    pub fn from_id(id: u8) -> Option<Family> {
        Some(match id {
            0 => Family::Beylkin,
            1 => Family::Coiflet,
            2 => Family::Daubechies,
            3 => Family::Symmlet,
            4 => Family::Vaidyanathan,
            _ => return None,
        })
    }
}

/// A supported (family, tap count) pair, e.g. `Symmlet-8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveletName {
    pub family: Family,
    pub taps: u8,
}

impl WaveletName {
    pub const BEYLKIN_18: WaveletName = WaveletName::new(Family::Beylkin, 18);
    pub const COIFLET_6: WaveletName = WaveletName::new(Family::Coiflet, 6);
    pub const COIFLET_30: WaveletName = WaveletName::new(Family::Coiflet, 30);
    pub const DAUBECHIES_4: WaveletName = WaveletName::new(Family::Daubechies, 4);
    pub const DAUBECHIES_16: WaveletName = WaveletName::new(Family::Daubechies, 16);
    pub const SYMMLET_8: WaveletName = WaveletName::new(Family::Symmlet, 8);
    pub const VAIDYANATHAN_24: WaveletName = WaveletName::new(Family::Vaidyanathan, 24);

    /// The seven filters of the comparison table, in table order.
    pub const ALL: [WaveletName; 7] = [
        Self::BEYLKIN_18,
        Self::COIFLET_6,
        Self::COIFLET_30,
        Self::DAUBECHIES_4,
        Self::DAUBECHIES_16,
        Self::SYMMLET_8,
        Self::VAIDYANATHAN_24,
    ];

    pub const fn new(family: Family, taps: u8) -> Self {
        WaveletName { family, taps }
    }

    pub fn filter(self) -> Result<WaveletFilter, Error> {
        WaveletFilter::new(self.family, self.taps as usize)
    }
}

impl fmt::Display for WaveletName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.family.name(), self.taps)
    }
}

impl FromStr for WaveletName {
    type Err = Error;

    /// Accepts `Symmlet-8`, `symmlet8`, `Symlet-8` and the short forms
    /// `sym8`, `db4`, `coif30`, `beyl18`, `vaid24`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase().replace(['-', '_', ' '], "");
        let split = lower
            .find(|c: char| c.is_ascii_digit())
            .ok_or_else(|| Error::UnknownWavelet(s.to_string()))?;
        let (prefix, digits) = lower.split_at(split);
        let family = match prefix {
            "beylkin" | "beyl" => Family::Beylkin,
            "coiflet" | "coif" => Family::Coiflet,
            "daubechies" | "db" | "daub" => Family::Daubechies,
            "symmlet" | "symlet" | "sym" => Family::Symmlet,
            "vaidyanathan" | "vaid" => Family::Vaidyanathan,
            _ => return Err(Error::UnknownWavelet(s.to_string())),
        };
        let taps: u8 = digits
            .parse()
            .map_err(|_| Error::UnknownWavelet(s.to_string()))?;
        let name = WaveletName::new(family, taps);
        if raw_taps(family, taps as usize).is_none() {
            return Err(Error::UnknownFilter {
                family: family.name(),
                taps: taps as usize,
            });
        }
        Ok(name)
    }
}

/// Orthonormal low-pass analysis filter `h`. The matching high-pass filter is
/// the quadrature mirror `g[n] = (-1)^n h[L-1-n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter {
    family: Family,
    taps: Vec<f64>,
}

impl WaveletFilter {
    /// Looks up, normalizes and validates one of the seven supported filters.
    pub fn new(family: Family, tap_count: usize) -> Result<Self, Error> {
        let raw = raw_taps(family, tap_count).ok_or(Error::UnknownFilter {
            family: family.name(),
            taps: tap_count,
        })?;
        let norm = raw.iter().map(|t| t * t).sum::<f64>().sqrt();
        let taps = raw.iter().map(|t| t / norm).collect();
        let filter = WaveletFilter { family, taps };
        filter.validate()?;
        Ok(filter)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn name(&self) -> WaveletName {
        WaveletName::new(self.family, self.taps.len() as u8)
    }

    pub fn tap_count(&self) -> usize {
        self.taps.len()
    }

    pub fn low_pass(&self) -> &[f64] {
        &self.taps
    }

    pub fn high_pass(&self) -> Vec<f64> {
        let len = self.taps.len();
        (0..len)
            .map(|n| {
                let v = self.taps[len - 1 - n];
                if n % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect()
    }

    /// Checks the orthonormal low-pass conditions on the stored taps.
    pub fn validate(&self) -> Result<(), Error> {
        let h = &self.taps;
        let invalid = |what: String| Error::InvalidFilter {
            name: self.name().to_string(),
            what,
        };
        if h.is_empty() || !h.len().is_multiple_of(2) {
            return Err(invalid(format!("odd tap count {}", h.len())));
        }
        let sum: f64 = h.iter().sum();
        if (sum - std::f64::consts::SQRT_2).abs() > SUM_TOLERANCE {
            return Err(invalid(format!("tap sum {sum} != sqrt(2)")));
        }
        let energy: f64 = h.iter().map(|t| t * t).sum();
        if (energy - 1.0).abs() > ENERGY_TOLERANCE {
            return Err(invalid(format!("tap energy {energy} != 1")));
        }
        for shift in (2..h.len()).step_by(2) {
            let corr = shift_correlation(h, shift);
            if corr.abs() > SHIFT_TOLERANCE {
                return Err(invalid(format!("shift {shift} correlation {corr:e}")));
            }
        }
        Ok(())
    }
}

/// `sum_n h[n] h[n + shift]` over the finite support.
pub fn shift_correlation(h: &[f64], shift: usize) -> f64 {
    h.iter().zip(h.iter().skip(shift)).map(|(a, b)| a * b).sum()
}

fn raw_taps(family: Family, tap_count: usize) -> Option<&'static [f64]> {
    Some(match (family, tap_count) {
        (Family::Beylkin, 18) => &BEYLKIN_18,
        (Family::Coiflet, 6) => &COIFLET_6,
        (Family::Coiflet, 30) => &COIFLET_30,
        (Family::Daubechies, 4) => &DAUBECHIES_4,
        (Family::Daubechies, 16) => &DAUBECHIES_16,
        (Family::Symmlet, 8) => &SYMMLET_8,
        (Family::Vaidyanathan, 24) => &VAIDYANATHAN_24,
        _ => return None,
    })
}

const BEYLKIN_18: [f64; 18] = [
    0.099305765374,
    0.424215360813,
    0.699825214057,
    0.449718251149,
    -0.110927598348,
    -0.264497231446,
    0.026900308804,
    0.155538731877,
    -0.017520746267,
    -0.088543630623,
    0.019679866044,
    0.042916387274,
    -0.017460408696,
    -0.014365807969,
    0.010040411845,
    0.001484234782,
    -0.002736031626,
    0.000640485329,
];

const COIFLET_6: [f64; 6] = [
    -0.07273261951252645,
    0.3378976624574818,
    0.8525720202116004,
    0.3848648468648578,
    -0.07273261951252645,
    -0.015655728135791993,
];

const COIFLET_30: [f64; 30] = [
    -0.000212081862067494,
    0.0003585777411617577,
    0.0021782943778456947,
    -0.00415931262757864,
    -0.010131584846900276,
    0.023408322118927783,
    0.028169744270532353,
    -0.09192158806008609,
    -0.052046670253554764,
    0.42157126673075435,
    0.7742936228603274,
    0.4379823066591634,
    -0.06203775157498196,
    -0.10556315130733723,
    0.041287530472117834,
    0.032674799467057355,
    -0.019758391600965465,
    -0.009159507338676163,
    0.006761520220620417,
    0.0024315754425382886,
    -0.0016616273039298788,
    -0.0006375589261258812,
    0.0003018579416682448,
    0.00014035632812373243,
    -4.12198619242655e-05,
    -2.1270221672515614e-05,
    3.7007277113394796e-06,
    2.0612203985788783e-06,
    -1.6237995172048338e-07,
    -9.604010112767894e-08,
];

const DAUBECHIES_4: [f64; 4] = [
    0.48296291314453416,
    0.8365163037378079,
    0.2241438680420134,
    -0.12940952255126037,
];

const DAUBECHIES_16: [f64; 16] = [
    0.05441584224310401,
    0.31287159091429995,
    0.6756307362972898,
    0.5853546836542067,
    -0.015829105256349306,
    -0.2840155429615469,
    0.0004724845739132828,
    0.12874742662047847,
    -0.017369301001807547,
    -0.044088253930794755,
    0.013981027917398282,
    0.008746094047405777,
    -0.004870352993451574,
    -0.00039174037337694705,
    0.0006754494064505693,
    -0.00011747678412476953,
];

const SYMMLET_8: [f64; 8] = [
    0.0322231006040427,
    -0.012603967262037833,
    -0.09921954357684722,
    0.29785779560527736,
    0.8037387518059161,
    0.49761866763201545,
    -0.02963552764599851,
    -0.07576571478927333,
];

const VAIDYANATHAN_24: [f64; 24] = [
    -0.000062906118,
    0.000343631905,
    -0.000453956620,
    -0.000944897136,
    0.002843834547,
    0.000708137504,
    -0.008839103409,
    0.003153847056,
    0.019687215010,
    -0.014853448005,
    -0.035470398607,
    0.038742619293,
    0.055892523691,
    -0.077709750902,
    -0.083928884366,
    0.131971661417,
    0.135084227129,
    -0.194450471766,
    -0.263494802488,
    0.201612161775,
    0.635601059872,
    0.572797793211,
    0.250184129505,
    0.045799334111,
];

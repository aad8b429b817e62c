use serde::{Deserialize, Serialize};

/// Default half-width of the acceptance band, in standard deviations.
pub const BAND_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }

    /// Distance from `p` to the band, zero inside it.
    pub fn excess(&self, p: f64) -> f64 {
        (self.lo - p).max(p - self.hi).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    WithinStatistical,
    DeviceError,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::WithinStatistical => "within-statistical",
            Classification::DeviceError => "device-error",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "within-statistical" => Some(Classification::WithinStatistical),
            "device-error" => Some(Classification::DeviceError),
            _ => None,
        }
    }
}

/// Binomial standard deviation `√(p(1−p)/M)` of a relative frequency.
pub fn sigma(p: f64, shots: u64) -> f64 {
    (p * (1.0 - p) / shots as f64).max(0.0).sqrt()
}

/// `p ± k·σ`, clipped to `[0, 1]`.
pub fn sigma_band(p: f64, shots: u64, k: f64) -> Band {
    let s = sigma(p, shots);
    Band {
        lo: (p - k * s).max(0.0),
        hi: (p + k * s).min(1.0),
    }
}

pub fn classify(p_est: f64, band: &Band) -> Classification {
    if band.contains(p_est) {
        Classification::WithinStatistical
    } else {
        Classification::DeviceError
    }
}

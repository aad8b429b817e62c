use std::collections::BTreeMap;
use std::fmt::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shot counts keyed by bitstring (qubit 0 leftmost). Only non-zero counts are stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CountsRepr")]
pub struct CountsTable {
    shots: u64,
    seed: u64,
    counts: BTreeMap<String, u64>,
    #[serde(skip)]
    width: usize,
}

#[derive(Deserialize)]
struct CountsRepr {
    shots: u64,
    seed: u64,
    counts: BTreeMap<String, u64>,
}

impl TryFrom<CountsRepr> for CountsTable {
    type Error = Error;

    fn try_from(r: CountsRepr) -> Result<Self> {
        let width = r.counts.keys().next().map_or(0, String::len);
        let table = CountsTable::new(width, r.counts, r.seed)?;
        if table.shots != r.shots {
            return Err(Error::InvalidDistribution(format!(
                "counts sum to {} but shots = {}",
                table.shots, r.shots
            )));
        }
        Ok(table)
    }
}

pub fn bitstring(index: usize, width: usize) -> String {
    format!("{index:0width$b}")
}

impl CountsTable {
    pub fn new(width: usize, counts: BTreeMap<String, u64>, seed: u64) -> Result<Self> {
        for key in counts.keys() {
            if key.len() != width || !key.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::WidthMismatch {
                    bitstring: key.clone(),
                    width,
                });
            }
        }
        let counts: BTreeMap<String, u64> = counts.into_iter().filter(|(_, n)| *n > 0).collect();
        let shots = counts.values().sum();
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        Ok(CountsTable { shots, seed, counts, width })
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn get(&self, bits: &str) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }

    /// Dense relative frequencies indexed by basis state.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut f = vec![0.0; 1 << self.width];
        for (k, &n) in &self.counts {
            f[usize::from_str_radix(k, 2).expect("validated bitstring")] = n as f64 / self.shots as f64;
        }
        f
    }

    /// `bitstring,count` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,count\n");
        for (k, n) in &self.counts {
            writeln!(out, "{k},{n}").unwrap();
        }
        out
    }
}

/// Draws `shots` outcomes from `probs` (indexed by basis state).
///
/// The multinomial is sampled as a chain of binomials in ascending basis order with a
/// ChaCha20 generator seeded by `seed`, so the result depends only on its arguments.
pub fn sample_counts(probs: &[f64], width: usize, shots: u64, seed: u64) -> Result<CountsTable> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if probs.len() != 1 << width {
        return Err(Error::InvalidDistribution(format!(
            "{} probabilities for {width} qubits",
            probs.len()
        )));
    }
    if probs.iter().any(|p| !(p.is_finite() && *p >= -1e-12)) {
        return Err(Error::InvalidDistribution("negative or non-finite entry".into()));
    }
    let total: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    let mut remaining = shots;
    let mut mass = total;
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        let k = if i == last {
            remaining
        } else if p == 0.0 {
            0
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, q)
                .expect("probability clamped to [0, 1]")
                .sample(&mut rng)
        };
        mass -= p;
        remaining -= k;
        if k > 0 {
            counts.insert(bitstring(i, width), k);
        }
    }
    CountsTable::new(width, counts, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_conserves_and_repeats() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let a = sample_counts(&p, 2, 1000, 5).unwrap();
        let b = sample_counts(&p, 2, 1000, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts().values().sum::<u64>(), 1000);
        let c = sample_counts(&p, 2, 1000, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_distribution() {
        let a = sample_counts(&[0.0, 0.0, 1.0, 0.0], 2, 77, 1).unwrap();
        assert_eq!(a.get("10"), 77);
        assert_eq!(a.counts().len(), 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(sample_counts(&[1.0, 0.0], 1, 0, 1), Err(Error::ZeroShots)));
        assert!(sample_counts(&[0.5, 0.6], 1, 10, 1).is_err());
        let mut m = BTreeMap::new();
        m.insert("010".to_string(), 3);
        assert!(matches!(CountsTable::new(2, m, 0), Err(Error::WidthMismatch { .. })));
    }

    #[test]
    fn json_and_csv() {
        let a = sample_counts(&[0.5, 0.5], 1, 10, 3).unwrap();
        let json = serde_json::to_value(&a).unwrap();
        assert_eq!(json["shots"], 10);
        assert_eq!(json["seed"], 3);
        let back: CountsTable = serde_json::from_value(json).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.width(), 1);
        assert!(a.to_csv().starts_with("bitstring,count\n"));
        let bad = serde_json::json!({"shots": 11, "seed": 0, "counts": {"0": 10}});
        assert!(serde_json::from_value::<CountsTable>(bad).is_err());
    }
}

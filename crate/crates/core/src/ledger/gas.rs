//! Gas-cost model for storing 256-bit digests as `uint256` versus `string`.
//!
//! Measured figures: `uint256` stores averaged 36,207 gas over a range of
//! 21,528..=51,228; `string` stores cost a flat 97,667. The `uint256` cost is
//! drawn from a triangular distribution on `[min, max]` whose mode is chosen
//! so the distribution mean equals the measured mean.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Triangular};
use serde::{Deserialize, Serialize};

use super::LedgerError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    pub uint_store_mean: u64,
    pub uint_store_min: u64,
    pub uint_store_max: u64,
    pub string_store_cost: u64,
    /// Charged when `store_hash` finds the digest already registered.
    pub exists_check_cost: u64,
}

impl Default for GasModel {
    fn default() -> Self {
        Self {
            uint_store_mean: 36_207,
            uint_store_min: 21_528,
            uint_store_max: 51_228,
            string_store_cost: 97_667,
            // 21,000 intrinsic + 576 calldata + 2,100 cold SLOAD + 300 dispatch
            exists_check_cost: 23_976,
        }
    }
}

impl GasModel {
    pub fn validate(&self) -> Result<(), LedgerError> {
        let fields = [
            self.uint_store_mean,
            self.uint_store_min,
            self.uint_store_max,
            self.string_store_cost,
            self.exists_check_cost,
        ];
        if fields.contains(&0) {
            return Err(LedgerError::InvalidGasModel("costs must be positive".into()));
        }
        if !(self.uint_store_min <= self.uint_store_mean && self.uint_store_mean <= self.uint_store_max) {
            return Err(LedgerError::InvalidGasModel(format!(
                "need min <= mean <= max, got {} / {} / {}",
                self.uint_store_min, self.uint_store_mean, self.uint_store_max
            )));
        }
        let mode = self.triangular_mode();
        if mode < self.uint_store_min as f64 || mode > self.uint_store_max as f64 {
            return Err(LedgerError::InvalidGasModel(format!(
                "mean {} is unreachable by a triangular distribution on [{}, {}]",
                self.uint_store_mean, self.uint_store_min, self.uint_store_max
            )));
        }
        Ok(())
    }

    /// Mode `c` with `(min + c + max) / 3 = mean`.
    pub fn triangular_mode(&self) -> f64 {
        3.0 * self.uint_store_mean as f64 - self.uint_store_min as f64 - self.uint_store_max as f64
    }

    pub(crate) fn draw_uint_store<R: Rng>(&self, rng: &mut R) -> u64 {
        let (lo, hi) = (self.uint_store_min as f64, self.uint_store_max as f64);
        if lo == hi {
            return self.uint_store_min;
        }
        let dist = Triangular::new(lo, hi, self.triangular_mode().clamp(lo, hi))
            .expect("validated triangular parameters");
        (dist.sample(rng).round() as u64).clamp(self.uint_store_min, self.uint_store_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GasMode {
    Uint256,
    String,
}

impl GasMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GasMode::Uint256 => "uint256",
            GasMode::String => "string",
        }
    }
}

impl FromStr for GasMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uint256" => Ok(GasMode::Uint256),
            "string" => Ok(GasMode::String),
            other => Err(format!("unknown gas mode {other:?} (expected uint256 or string)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GasSummary {
    pub count: u64,
    pub mean: f64,
    pub median: f64,
    pub min: u64,
    pub max: u64,
}

impl GasSummary {
    fn of(values: &[u64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2] as f64
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
        };
        Self {
            count: n as u64,
            mean: values.iter().map(|&v| v as f64).sum::<f64>() / n as f64,
            median,
            min: sorted[0],
            max: sorted[n - 1],
        }
    }

    /// The five-row statistic table as CSV.
    pub fn to_table(&self, mode: GasMode) -> String {
        format!(
            "statistic,gas_{}\ncount,{}\nmean,{:.2}\nmedian,{:.2}\nmin,{}\nmax,{}\n",
            mode.as_str(),
            self.count,
            self.mean,
            self.median,
            self.min,
            self.max
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GasRun {
    pub mode: GasMode,
    pub values: Vec<u64>,
    pub summary: GasSummary,
}

impl fmt::Display for GasRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary.to_table(self.mode))
    }
}

/// Simulates `n` store transactions. Same seed, same sequence.
pub fn simulate_gas(mode: GasMode, n: usize, model: &GasModel, seed: u64) -> Result<GasRun, LedgerError> {
    if n == 0 {
        return Err(LedgerError::ZeroTransactions);
    }
    model.validate()?;
    let values = match mode {
        GasMode::String => vec![model.string_store_cost; n],
        GasMode::Uint256 => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| model.draw_uint_store(&mut rng)).collect()
        }
    };
    Ok(GasRun {
        mode,
        summary: GasSummary::of(&values),
        values,
    })
}

//! Scenario distributions and multisamples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Uniform,
}

/// Law of the scalar scenario parameter `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDistribution {
    pub kind: DistributionKind,
    pub lo: f64,
    pub hi: f64,
}

impl ScenarioDistribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("uniform support needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { kind: DistributionKind::Uniform, lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lo <= theta && theta <= self.hi
    }

    /// `P(theta < x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        ((x - self.lo) / self.width()).clamp(0.0, 1.0)
    }

    /// `P(theta > x)`.
    pub fn upper_tail(&self, x: f64) -> f64 {
        ((self.hi - x) / self.width()).clamp(0.0, 1.0)
    }

    pub fn draw(&self, rng: &mut SplitMix64) -> f64 {
        match self.kind {
            DistributionKind::Uniform => rng.uniform(self.lo, self.hi),
        }
    }
}

/// Ordered, non-empty list of scenario parameters in draw order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MultiSample {
    thetas: Vec<f64>,
}

impl MultiSample {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::invalid("a multisample needs at least one scenario"));
        }
        if let Some(bad) = thetas.iter().find(|t| !t.is_finite()) {
            return Err(Error::invalid(format!("non-finite scenario {bad}")));
        }
        Ok(Self { thetas })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.thetas.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.thetas.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sub-multisample at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let picked = indices
            .iter()
            .map(|&i| {
                self.thetas
                    .get(i)
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(picked)
    }

    pub fn extended(&self, extra: &[f64]) -> Result<Self> {
        let mut thetas = self.thetas.clone();
        thetas.extend_from_slice(extra);
        Self::new(thetas)
    }
}

impl TryFrom<Vec<f64>> for MultiSample {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MultiSample> for Vec<f64> {
    fn from(ms: MultiSample) -> Self {
        ms.thetas
    }
}

/// Draws `m` i.i.d. scenarios from `dist` using a SplitMix64 stream seeded with `seed`.
pub fn sample_multisample(dist: &ScenarioDistribution, m: usize, seed: u64) -> Result<MultiSample> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let mut rng = SplitMix64::new(seed);
    MultiSample::new((0..m).map(|_| dist.draw(&mut rng)).collect())
}

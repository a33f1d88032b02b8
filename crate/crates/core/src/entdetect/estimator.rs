//! Simulated N-copy estimation of the lowest eigenvalue.
//!
//! A joint measurement on `ρ'^{⊗N}` yields an empirical spectrum whose
//! entries concentrate on the true eigenvalues. The simulation skips the
//! measurement network and draws the `N` outcomes directly from the
//! spectral distribution of `ρ'`: the count landing in each eigenvalue bin,
//! divided by `N`, estimates that eigenvalue, and the smallest such
//! frequency estimates `λ_min`. By Hoeffding and a union bound over the
//! `D` bins,
//!
//! ```text
//! P(|estimate - λ_min| > ε) ≤ 2 D exp(-2 N ε²),
//! ```
//!
//! which is the exponential-in-`N` error contract (see [`error_bound`]).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::DensityOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyEstimatorConfig {
    /// `N`, copies consumed by one estimate.
    pub copies: u64,
    pub seed: u64,
    /// Odd number of independent estimates combined by majority vote.
    pub repetitions: u32,
}

impl CopyEstimatorConfig {
    pub fn new(copies: u64, seed: u64, repetitions: u32) -> Result<Self> {
        let cfg = Self { copies, seed, repetitions };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.copies < 1 {
            return Err(Error::InvalidArgument("the estimator needs at least one copy".into()));
        }
        if self.repetitions.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("repetitions must be odd, got {}", self.repetitions)));
        }
        Ok(())
    }

    /// Seed of repetition `rep` within detector call `call`.
    pub fn derived_seed(&self, call: u64, rep: u32) -> u64 {
        self.seed.wrapping_add(call.wrapping_mul(self.repetitions as u64)).wrapping_add(rep as u64)
    }
}

/// Spectral distribution of a density operator, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSampler {
    spectrum: Vec<f64>,
}

impl SpectrumSampler {
    /// Solver noise below zero is clamped before renormalizing.
    pub fn new(rho: &DensityOp) -> Self {
        Self::from_normalized(rho.eigenvalues())
    }

    pub fn from_spectrum(spectrum: Vec<f64>) -> Result<Self> {
        if spectrum.is_empty() || spectrum.iter().any(|p| !p.is_finite() || *p < -1e-10) {
            return Err(Error::InvalidArgument("spectrum must be finite and non-negative".into()));
        }
        let total: f64 = spectrum.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("spectrum sums to {total}")));
        }
        let mut spectrum = spectrum;
        spectrum.sort_by(f64::total_cmp);
        Ok(Self::from_normalized(spectrum))
    }

    fn from_normalized(mut spectrum: Vec<f64>) -> Self {
        for p in &mut spectrum {
            *p = p.max(0.0);
        }
        let total: f64 = spectrum.iter().sum();
        for p in &mut spectrum {
            *p /= total;
        }
        Self { spectrum }
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn true_min(&self) -> f64 {
        self.spectrum[0]
    }

    /// Multinomial outcome counts for `copies` draws, by a chain of
    /// conditional binomials.
    pub fn sample_counts<R: rand::Rng + ?Sized>(&self, copies: u64, rng: &mut R) -> Vec<u64> {
        let mut counts = vec![0u64; self.spectrum.len()];
        let mut remaining = copies;
        let mut mass_left = 1.0f64;
        let last = self.spectrum.len() - 1;
        for (i, &p) in self.spectrum.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            if i == last {
                counts[i] = remaining;
                break;
            }
            let q = if mass_left > 0.0 { (p / mass_left).clamp(0.0, 1.0) } else { 1.0 };
            let c = Binomial::new(remaining, q).expect("probability clamped to [0, 1]").sample(rng);
            counts[i] = c;
            remaining -= c;
            mass_left -= p;
        }
        counts
    }

    /// Smallest empirical frequency over `copies` draws.
    pub fn estimate(&self, copies: u64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts = self.sample_counts(copies, &mut rng);
        counts.into_iter().min().expect("non-empty spectrum") as f64 / copies as f64
    }
}

/// One estimate of `λ_min(ρ')` from `cfg.copies` simulated copies, seeded by
/// `cfg.seed`.
pub fn estimate_min_eigenvalue(rho: &DensityOp, cfg: &CopyEstimatorConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(SpectrumSampler::new(rho).estimate(cfg.copies, cfg.seed))
}

/// Upper bound on `P(|estimate - λ_min| > eps)` for a `dim`-dimensional
/// state, capped at 1.
pub fn error_bound(copies: u64, eps: f64, dim: usize) -> f64 {
    (2.0 * dim as f64 * (-2.0 * copies as f64 * eps * eps).exp()).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, CMatrix};
    use nalgebra::DVector;

    fn diag(values: &[f64]) -> DensityOp {
        let m = CMatrix::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|&v| c64(v, 0.0))));
        DensityOp::new((1, values.len()), m).unwrap()
    }

    #[test]
    fn deterministic_spectrum() {
        let rho = diag(&[1.0, 0.0]);
        for copies in [1, 2, 17, 1000] {
            let cfg = CopyEstimatorConfig::new(copies, 5, 1).unwrap();
            let est = estimate_min_eigenvalue(&rho, &cfg).unwrap();
            assert!(est.abs() <= 1.0 / copies as f64);
        }
    }

    #[test]
    fn maximally_mixed_qubit_concentrates() {
        // Oracle: the count is Binomial(4096, 1/2), std 1/128 ≈ 0.0078 in
        // frequency, so 0.05 is more than six standard deviations.
        let rho = diag(&[0.5, 0.5]);
        let cfg = CopyEstimatorConfig::new(4096, 11, 1).unwrap();
        let est = estimate_min_eigenvalue(&rho, &cfg).unwrap();
        assert!((est - 0.5).abs() < 0.05, "{est}");
        assert!(est <= 0.5);
    }

    #[test]
    fn counts_sum_to_copies() {
        let s = SpectrumSampler::from_spectrum(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for copies in [1, 5, 1000] {
            assert_eq!(s.sample_counts(copies, &mut rng).iter().sum::<u64>(), copies);
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let s = SpectrumSampler::from_spectrum(vec![0.9, 0.1]).unwrap();
        assert_eq!(s.estimate(999, 42), s.estimate(999, 42));
        assert_eq!(s.true_min(), 0.1);
    }

    #[test]
    fn config_validation() {
        assert!(CopyEstimatorConfig::new(0, 0, 1).is_err());
        assert!(CopyEstimatorConfig::new(1, 0, 2).is_err());
        let rho = diag(&[1.0, 0.0]);
        let bad = CopyEstimatorConfig { copies: 0, seed: 0, repetitions: 1 };
        assert!(estimate_min_eigenvalue(&rho, &bad).is_err());
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let cfg = CopyEstimatorConfig::new(8, 100, 3).unwrap();
        let seeds: Vec<u64> = (0..3).flat_map(|c| (0..3).map(move |r| cfg.derived_seed(c, r))).collect();
        assert_eq!(seeds, (100..109).collect::<Vec<_>>());
    }

    #[test]
    fn bound_shrinks_exponentially() {
        let a = error_bound(1 << 10, 0.05, 4);
        let b = error_bound(1 << 11, 0.05, 4);
        assert!((b / a - (-2.0f64 * 1024.0 * 0.0025).exp()).abs() < 1e-12);
        assert_eq!(error_bound(1, 0.01, 4), 1.0);
    }
}

//! Functionals of partitions used to study the chains: moment sums, dyadic
//! interval counts, `W_m`, one-step stationarity residuals, total variation,
//! and the two goodness-of-fit tests the Monte Carlo checks rely on.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::chains::{ccf_step_in_place, ExactDistribution};
use crate::partitions::ContinuousPartition;
use crate::samplers::{sample_gem, RngStream};
use crate::{Error, Result};

/// `Σ_i p_i^α` over the stored parts. Dust is left out; see [`moment_dust_bound`].
pub fn moment_sum(p: &ContinuousPartition, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(p.parts().iter().map(|x| x.powf(alpha)).sum())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("moment exponent must be positive, got {alpha}")))
    }
}

/// Error bar for the dust's share of `Σ p_i^α`.
///
/// For `α >= 1` this is the hard bound `dust^α`. Below one the dust can hold
/// arbitrarily many tiny parts, so no hard bound exists; we report `dust^α / α`,
/// the mean contribution when the leftover stick is itself broken GEM-style.
pub fn moment_dust_bound(p: &ContinuousPartition, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let d = p.dust().powf(alpha);
    Ok(if alpha >= 1.0 { d } else { d / alpha })
}

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicas: u64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("need at least one replica"));
        }
        let count = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / count;
        let std_error = if samples.len() > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0);
            (var / count).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            mean,
            std_error,
            replicas: samples.len() as u64,
        })
    }

    /// Whether `target` lies within `z` standard errors of the mean.
    pub fn within(&self, target: f64, z: f64) -> bool {
        (self.mean - target).abs() <= z * self.std_error
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub alpha: f64,
    pub sample_mean: f64,
    pub std_error: f64,
    pub replicas: u64,
    /// Mean of [`moment_dust_bound`] over the draws.
    pub dust_bound: f64,
}

/// Mean of `Σ p_i^α` over `replicas` GEM draws; replica `r` uses stream `(seed, r)`.
pub fn gem_moment_report(
    alpha: f64,
    replicas: u64,
    seed: u64,
    epsilon_trunc: f64,
) -> Result<MomentReport> {
    check_alpha(alpha)?;
    let draws = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, r);
            let p = sample_gem(&mut rng, epsilon_trunc)?;
            Ok((moment_sum(&p, alpha)?, moment_dust_bound(&p, alpha)?))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let sums: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let est = Estimate::from_samples(&sums)?;
    Ok(MomentReport {
        alpha,
        sample_mean: est.mean,
        std_error: est.std_error,
        replicas,
        dust_bound: draws.iter().map(|d| d.1).sum::<f64>() / replicas as f64,
    })
}

/// `#{i : p_i ∈ (2^{-m-1}, 2^{-m}]}`.
pub fn interval_count(p: &ContinuousPartition, m: u32) -> usize {
    let hi = 0.5f64.powi(m as i32);
    let lo = hi / 2.0;
    p.parts().iter().filter(|&&x| x > lo && x <= hi).count()
}

/// `W_m = Σ_i p_i 1{p_i > 2^{-m}}`.
pub fn w_stat(p: &ContinuousPartition, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("W_m needs m >= 1"));
    }
    let cut = 0.5f64.powi(m as i32);
    Ok(p.parts().iter().filter(|&&x| x > cut).sum())
}

/// Monte Carlo estimate of `E[W_m(after one CCF step) - W_m(before)]` with the
/// starting partition drawn by `sampler`.
pub fn stationarity_residual<S>(sampler: S, m: u32, replicas: u64, seed: u64) -> Result<Estimate>
where
    S: Fn(&mut RngStream) -> Result<ContinuousPartition> + Sync,
{
    let diffs = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, r);
            let mut p = sampler(&mut rng)?;
            let before = w_stat(&p, m)?;
            ccf_step_in_place(&mut p, &mut rng);
            Ok(w_stat(&p, m)? - before)
        })
        .collect::<Result<Vec<f64>>>()?;
    Estimate::from_samples(&diffs)
}

/// `(1/2) Σ |μ - ν|` for two vectors over the same index set.
pub fn tv_distance(mu: &[f64], nu: &[f64]) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::domain(format!(
            "index mismatch: {} vs {} entries",
            mu.len(),
            nu.len()
        )));
    }
    Ok(mu.iter().zip(nu).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0)
}

/// Exact total variation between two laws on the same `P_n`.
pub fn tv_distance_exact(mu: &ExactDistribution, nu: &ExactDistribution) -> Result<BigRational> {
    if mu.n() != nu.n() {
        return Err(Error::domain(format!(
            "laws on P_{} and P_{} are not comparable",
            mu.n(),
            nu.n()
        )));
    }
    let total = mu
        .weights()
        .iter()
        .zip(nu.weights())
        .fold(BigRational::zero(), |acc, (a, b)| acc + (a - b).abs());
    Ok(total / BigRational::from_integer(2.into()))
}

/// Pearson χ² p-value of observed counts against cell probabilities.
///
/// Cells with zero expected probability are dropped; any observation in one
/// of them makes the p-value 0.
pub fn chi_square_p_value(observed: &[u64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len(), "cell count mismatch");
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return 1.0;
    }
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &e) in observed.iter().zip(expected) {
        if e <= 0.0 {
            if o > 0 {
                return 0.0;
            }
            continue;
        }
        let exp = e * total as f64;
        stat += (o as f64 - exp).powi(2) / exp;
        cells += 1;
    }
    if cells < 2 {
        return 1.0;
    }
    ChiSquared::new((cells - 1) as f64)
        .map(|dist| dist.sf(stat))
        .unwrap_or(0.0)
}

/// One-sample Kolmogorov-Smirnov test against U[0,1]: `(D, p-value)`.
pub fn ks_uniform(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (0.0, 1.0);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max);
    let root = n.sqrt();
    (d, kolmogorov_q((root + 0.12 + 0.11 / root) * d))
}

// Q(λ) = 2 Σ_{j>=1} (-1)^{j-1} exp(-2 j² λ²)
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::{ewens_pmf, exact_kernel};
    use crate::partitions::IntegerPartition;
    use crate::DEFAULT_EPSILON_TRUNC;
    use num_bigint::BigInt;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn cp(parts: &[f64]) -> ContinuousPartition {
        ContinuousPartition::new(parts.to_vec(), 1.0 - parts.iter().sum::<f64>()).unwrap()
    }

    #[test]
    fn moment_examples() {
        let unit = ContinuousPartition::unit();
        for alpha in [0.3, 1.0, 2.5] {
            assert_eq!(moment_sum(&unit, alpha).unwrap(), 1.0);
        }
        assert!((moment_sum(&cp(&[0.5, 0.5]), 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(moment_sum(&unit, 0.0).is_err());
        assert!(moment_sum(&unit, -1.0).is_err());
        assert_eq!(moment_dust_bound(&unit, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn gem_moments_match_reciprocal_alpha() {
        for (i, alpha) in [0.5, 0.6, 0.8].into_iter().enumerate() {
            let r = gem_moment_report(alpha, 10_000, 40 + i as u64, DEFAULT_EPSILON_TRUNC).unwrap();
            let se = r.std_error;
            assert!(
                (r.sample_mean - 1.0 / alpha).abs() < 3.0 * se,
                "alpha {alpha}: {} vs {} (se {se})",
                r.sample_mean,
                1.0 / alpha
            );
            assert!(r.dust_bound < 1e-3);
        }
    }

    #[test]
    fn interval_count_examples() {
        let unit = ContinuousPartition::unit();
        assert_eq!(interval_count(&unit, 0), 1);
        let halves = cp(&[0.5, 0.5]);
        assert_eq!(interval_count(&halves, 0), 0);
        assert_eq!(interval_count(&halves, 1), 2);
    }

    #[test]
    fn gem_interval_counts_average_ln2() {
        let draws: Vec<ContinuousPartition> = (0..10_000)
            .map(|r| sample_gem(&mut RngStream::new(6, r), DEFAULT_EPSILON_TRUNC).unwrap())
            .collect();
        for m in 3..=8 {
            let counts: Vec<f64> = draws.iter().map(|p| interval_count(p, m) as f64).collect();
            let est = Estimate::from_samples(&counts).unwrap();
            assert!(est.within(std::f64::consts::LN_2, 3.0), "m = {m}: {est:?}");
        }
    }

    #[test]
    fn w_stat_examples() {
        let unit = ContinuousPartition::unit();
        for m in 1..10 {
            assert_eq!(w_stat(&unit, m).unwrap(), 1.0);
        }
        assert_eq!(w_stat(&cp(&[0.5, 0.5]), 1).unwrap(), 0.0);
        assert_eq!(w_stat(&cp(&[0.5, 0.5]), 2).unwrap(), 1.0);
        assert!(w_stat(&unit, 0).is_err());
    }

    #[test]
    fn stationarity_residual_at_pd1_vanishes() {
        let gem = |rng: &mut RngStream| sample_gem(rng, DEFAULT_EPSILON_TRUNC);
        for m in [1, 3, 6] {
            let est = stationarity_residual(gem, m, 100_000, 90 + m as u64).unwrap();
            assert!(est.within(0.0, 3.0), "m = {m}: {est:?}");
        }
    }

    #[test]
    fn stationarity_residual_from_unit_is_negative() {
        let unit = |_: &mut RngStream| Ok(ContinuousPartition::unit());
        let est = stationarity_residual(unit, 1, 10_000, 3).unwrap();
        assert!(est.mean < 0.0 && est.mean + 3.0 * est.std_error < 0.0);
    }

    #[test]
    fn std_error_scales_with_replicas() {
        let gem = |rng: &mut RngStream| sample_gem(rng, DEFAULT_EPSILON_TRUNC);
        let small = stationarity_residual(gem, 2, 20_000, 1).unwrap();
        let large = stationarity_residual(gem, 2, 80_000, 1).unwrap();
        let ratio = small.std_error / large.std_error;
        assert!((ratio - 2.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!(tv_distance(&[1.0], &[0.5, 0.5]).is_err());

        let k = exact_kernel(3).unwrap();
        let start = ExactDistribution::point_mass(Arc::clone(k.states()), &IntegerPartition::single(3))
            .unwrap();
        let one = k.push_forward(&start).unwrap();
        let pi = ewens_pmf(3).unwrap();
        assert_eq!(
            tv_distance_exact(&one, &pi).unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(2))
        );
        assert!(tv_distance_exact(&one, &ewens_pmf(4).unwrap()).is_err());
    }

    #[test]
    fn goodness_of_fit_sanity() {
        assert!(chi_square_p_value(&[500, 500], &[0.5, 0.5]) > 0.99);
        assert!(chi_square_p_value(&[900, 100], &[0.5, 0.5]) < 1e-6);
        assert_eq!(chi_square_p_value(&[1, 9], &[0.0, 1.0]), 0.0);
        assert!(chi_square_p_value(&[0, 9], &[0.0, 1.0]) > 0.99);

        let grid: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_uniform(&grid).1 > 0.99);
        let squeezed: Vec<f64> = grid.iter().map(|x| x * 0.5).collect();
        assert!(ks_uniform(&squeezed).1 < 1e-6);
    }

    proptest! {
        #[test]
        fn mass_and_dyadic_identities(seed in 0u64..10_000) {
            let p = sample_gem(&mut RngStream::new(seed, 0), 1e-6).unwrap();
            prop_assert!((moment_sum(&p, 1.0).unwrap() + p.dust() - 1.0).abs() < 1e-12);
            let tiled: usize = (0..1075).map(|m| interval_count(&p, m)).sum();
            prop_assert_eq!(tiled, p.len());
            let ws: Vec<f64> = (1..20).map(|m| w_stat(&p, m).unwrap()).collect();
            prop_assert!(ws.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

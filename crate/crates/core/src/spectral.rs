//! Exact spectral analysis of DCF(n).
//!
//! The characters `χ_λ` of the symmetric group are eigenfunctions of the DCF(n)
//! kernel with eigenvalue `θ_λ = (Σ λ_i² - Σ λ'_j²) / (n(n-1))`, and they form an
//! orthonormal basis of class functions under the Ewens inner product. So
//! `P(X_k ∈ A) = Σ_λ θ_λ^k ⟨g_0, χ_λ⟩ ⟨1_A, χ_λ⟩` with `g_0 = dμ_0 / dπ`.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::chains::{ewens_pmf_over, exact_kernel_capped, ExactDistribution, ExactKernel};
use crate::partitions::{CylinderSet, IntegerPartition, PartitionSet};
use crate::{Error, Result, DEFAULT_EXACT_CAP};

/// Memoizing Murnaghan-Nakayama evaluator.
///
/// Always strips the largest remaining part of `γ`, so the second key
/// component is a suffix of the original `γ`.
#[derive(Default)]
pub struct MnEvaluator {
    memo: HashMap<(Vec<usize>, Vec<usize>), BigInt>,
}

impl MnEvaluator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn character(&mut self, lambda: &IntegerPartition, gamma: &IntegerPartition) -> Result<BigInt> {
        if lambda.n() != gamma.n() {
            return Err(Error::domain(format!(
                "character needs |λ| = |γ|, got {} and {}",
                lambda.n(),
                gamma.n()
            )));
        }
        Ok(self.eval(lambda, gamma.parts()))
    }

    fn eval(&mut self, lambda: &IntegerPartition, gamma: &[usize]) -> BigInt {
        let Some((&r, rest)) = gamma.split_first() else {
            return BigInt::one();
        };
        let key = (lambda.parts().to_vec(), gamma.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let mut value = BigInt::zero();
        for i in 1..=lambda.len() {
            for j in 1..=lambda.row(i) {
                let leg = lambda.column(j) - i;
                if lambda.row(i) - j + leg + 1 != r {
                    continue;
                }
                let inner = self.eval(&lambda.strip_rim_unchecked(i, j), rest);
                if leg.is_multiple_of(2) {
                    value += inner;
                } else {
                    value -= inner;
                }
            }
        }
        self.memo.insert(key, value.clone());
        value
    }
}

/// `χ_λ(γ)` by the Murnaghan-Nakayama rule.
pub fn character(lambda: &IntegerPartition, gamma: &IntegerPartition) -> Result<BigInt> {
    MnEvaluator::new().character(lambda, gamma)
}

/// All `χ_λ(γ)` for partitions of `n`, rows and columns in the canonical order.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    states: Arc<PartitionSet>,
    values: Vec<Vec<BigInt>>,
}

impl CharacterTable {
    pub fn build(n: usize) -> Result<Self> {
        Self::build_capped(n, DEFAULT_EXACT_CAP)
    }

    pub fn build_capped(n: usize, cap: usize) -> Result<Self> {
        Self::over(Arc::new(PartitionSet::with_cap(n, cap)?))
    }

    /// Builds the table over an existing enumeration, one memo per worker.
    pub fn over(states: Arc<PartitionSet>) -> Result<Self> {
        let values = states
            .as_slice()
            .par_iter()
            .map_init(MnEvaluator::new, |mn, lambda| {
                states
                    .iter()
                    .map(|gamma| mn.character(lambda, gamma))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { states, values })
    }

    pub fn n(&self) -> usize {
        self.states.n()
    }

    pub fn states(&self) -> &Arc<PartitionSet> {
        &self.states
    }

    /// `χ_λ` as a row over the canonical order of `γ`.
    pub fn row(&self, lambda: usize) -> &[BigInt] {
        &self.values[lambda]
    }

    pub fn value(&self, lambda: &IntegerPartition, gamma: &IntegerPartition) -> Option<&BigInt> {
        let i = self.states.index_of(lambda)?;
        let j = self.states.index_of(gamma)?;
        Some(&self.values[i][j])
    }

    /// `χ_λ` as an exact class function.
    pub fn class_function(&self, lambda: usize) -> Vec<BigRational> {
        self.values[lambda]
            .iter()
            .map(|v| BigRational::from_integer(v.clone()))
            .collect()
    }

    /// Long-format CSV: `lambda,gamma,chi`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lambda", "gamma", "chi"])?;
        for (i, lambda) in self.states.iter().enumerate() {
            for (j, gamma) in self.states.iter().enumerate() {
                w.write_record([lambda.to_string(), gamma.to_string(), self.values[i][j].to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .states
            .iter()
            .zip(&self.values)
            .map(|(lambda, row)| {
                let chi: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                serde_json::json!({ "lambda": lambda, "chi": chi })
            })
            .collect();
        serde_json::json!({ "n": self.n(), "gammas": self.states.as_slice(), "rows": rows })
    }
}

/// `θ_λ = (Σ λ_i² - Σ λ'_j²) / (n(n-1))`.
pub fn eigenvalue(lambda: &IntegerPartition) -> Result<BigRational> {
    let n = lambda.n();
    if n < 2 {
        return Err(Error::domain("eigenvalues are defined for n >= 2"));
    }
    let squares = |p: &IntegerPartition| -> i64 { p.parts().iter().map(|&x| (x * x) as i64).sum() };
    let num = squares(lambda) - squares(&lambda.conjugate());
    Ok(BigRational::new(BigInt::from(num), BigInt::from(n * (n - 1))))
}

/// The eigenvalues of the DCF(n) kernel, one per partition, in canonical order.
#[derive(Clone, Debug)]
pub struct Spectrum {
    states: Arc<PartitionSet>,
    eigenvalues: Vec<BigRational>,
}

impl Spectrum {
    pub fn new(n: usize) -> Result<Self> {
        Self::over(Arc::new(PartitionSet::new(n)?))
    }

    pub fn over(states: Arc<PartitionSet>) -> Result<Self> {
        let eigenvalues = states.iter().map(eigenvalue).collect::<Result<Vec<_>>>()?;
        Ok(Self { states, eigenvalues })
    }

    pub fn n(&self) -> usize {
        self.states.n()
    }

    pub fn states(&self) -> &Arc<PartitionSet> {
        &self.states
    }

    pub fn eigenvalues(&self) -> &[BigRational] {
        &self.eigenvalues
    }

    pub fn theta(&self, lambda: &IntegerPartition) -> Option<&BigRational> {
        self.states.index_of(lambda).map(|i| &self.eigenvalues[i])
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lambda", "theta_num", "theta_den"])?;
        for (lambda, theta) in self.states.iter().zip(&self.eigenvalues) {
            w.write_record([lambda.to_string(), theta.numer().to_string(), theta.denom().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .states
            .iter()
            .zip(&self.eigenvalues)
            .map(|(lambda, theta)| serde_json::json!({ "lambda": lambda, "theta": theta.to_string() }))
            .collect();
        serde_json::json!({ "n": self.n(), "eigenvalues": rows })
    }
}

/// `⟨f, g⟩ = Σ_γ f(γ) g(γ) π(γ)` for class functions given over the canonical order.
pub fn inner_product(
    f: &[BigRational],
    g: &[BigRational],
    pi: &ExactDistribution,
) -> Result<BigRational> {
    let len = pi.weights().len();
    if f.len() != len || g.len() != len {
        return Err(Error::domain("class functions do not match the partition set"));
    }
    Ok(f.iter()
        .zip(g)
        .zip(pi.weights())
        .fold(BigRational::zero(), |acc, ((a, b), w)| acc + a * b * w))
}

/// `max_{λ,γ} |(K χ_λ)(γ) - θ_λ χ_λ(γ)|`, exactly; zero when the characters are eigenfunctions.
pub fn verify_eigenrelation(n: usize) -> Result<BigRational> {
    let kernel = exact_kernel_capped(n, DEFAULT_EXACT_CAP)?;
    let table = CharacterTable::over(Arc::clone(kernel.states()))?;
    let spectrum = Spectrum::over(Arc::clone(kernel.states()))?;
    eigenrelation_violation(&kernel, &table, spectrum.eigenvalues())
}

/// The eigen-relation residual for caller-supplied eigenvalues.
pub fn eigenrelation_violation(
    kernel: &ExactKernel,
    table: &CharacterTable,
    thetas: &[BigRational],
) -> Result<BigRational> {
    if table.n() != kernel.n() || thetas.len() != table.states().len() {
        return Err(Error::domain("kernel, table and eigenvalues disagree on n"));
    }
    let worst = (0..table.states().len())
        .into_par_iter()
        .map(|l| {
            let chi = table.class_function(l);
            let image = kernel.apply_to_function(&chi);
            image
                .iter()
                .zip(&chi)
                .map(|(kc, c)| (kc - &thetas[l] * c).abs())
                .fold(BigRational::zero(), |acc, g| if g > acc { g } else { acc })
        })
        .reduce(BigRational::zero, |a, b| if a > b { a } else { b });
    Ok(worst)
}

/// The mask of `nC = {γ ∈ P_n : γ / n ∈ C}` over the canonical order.
pub fn cylinder_mask(states: &PartitionSet, cylinder: &CylinderSet) -> Vec<bool> {
    states.iter().map(|g| cylinder.contains_scaled(g)).collect()
}

/// Characters, eigenvalues and the Ewens law of one `n`, built once and reused.
#[derive(Clone, Debug)]
pub struct SpectralModel {
    table: CharacterTable,
    spectrum: Spectrum,
    pi: ExactDistribution,
}

impl SpectralModel {
    pub fn new(n: usize) -> Result<Self> {
        Self::over(Arc::new(PartitionSet::new(n)?))
    }

    pub fn over(states: Arc<PartitionSet>) -> Result<Self> {
        Ok(Self {
            table: CharacterTable::over(Arc::clone(&states))?,
            spectrum: Spectrum::over(Arc::clone(&states))?,
            pi: ewens_pmf_over(states)?,
        })
    }

    pub fn table(&self) -> &CharacterTable {
        &self.table
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn ewens(&self) -> &ExactDistribution {
        &self.pi
    }

    pub fn states(&self) -> &Arc<PartitionSet> {
        self.table.states()
    }

    fn check(&self, mu0: &ExactDistribution, event: &[bool]) -> Result<()> {
        if mu0.n() != self.table.n() {
            return Err(Error::domain(format!(
                "initial law on P_{} used with the n = {} model",
                mu0.n(),
                self.table.n()
            )));
        }
        if event.len() != self.states().len() {
            return Err(Error::domain("event mask does not match the partition set"));
        }
        Ok(())
    }

    /// `⟨g_0, χ_λ⟩ ⟨1_A, χ_λ⟩` for every `λ`.
    pub fn coefficients(&self, mu0: &ExactDistribution, event: &[bool]) -> Result<Vec<BigRational>> {
        self.check(mu0, event)?;
        Ok((0..self.states().len())
            .map(|l| {
                let chi = self.table.row(l);
                // ⟨g_0, χ⟩ = Σ μ_0(γ) χ(γ) because g_0 π = μ_0
                let start = mu0
                    .weights()
                    .iter()
                    .zip(chi)
                    .fold(BigRational::zero(), |acc, (m, c)| acc + m * c);
                let target = self
                    .pi
                    .weights()
                    .iter()
                    .zip(chi)
                    .zip(event)
                    .filter(|(_, &inside)| inside)
                    .fold(BigRational::zero(), |acc, ((w, c), _)| acc + w * c);
                start * target
            })
            .collect())
    }

    /// `P(X_k ∈ A)` for `X_0 ~ μ_0`, from the character expansion.
    pub fn event_probability(
        &self,
        mu0: &ExactDistribution,
        event: &[bool],
        k: u32,
    ) -> Result<BigRational> {
        let coeffs = self.coefficients(mu0, event)?;
        Ok(self.expand(&coeffs, k, false))
    }

    fn expand(&self, coeffs: &[BigRational], k: u32, skip_trivial: bool) -> BigRational {
        let trivial = self.states().index_of(&IntegerPartition::single(self.table.n()));
        self.spectrum
            .eigenvalues()
            .iter()
            .zip(coeffs)
            .enumerate()
            .filter(|(l, _)| !(skip_trivial && Some(*l) == trivial))
            .fold(BigRational::zero(), |acc, (_, (theta, c))| {
                if c.is_zero() {
                    acc
                } else {
                    acc + pow(theta, k) * c
                }
            })
    }

    /// `Δ_C(k) = P(X_k ∈ nC) - π(nC)`.
    pub fn delta_c(&self, mu0: &ExactDistribution, cylinder: &CylinderSet, k: u32) -> Result<BigRational> {
        let mask = cylinder_mask(self.states(), cylinder);
        Ok(self.event_probability(mu0, &mask, k)? - self.pi.mass_of(&mask))
    }

    /// `Δ_C(k)` as the sum over `λ ≠ (n)`; the `(n)` term is exactly `π(nC)`.
    pub fn delta_c_nontrivial(
        &self,
        mu0: &ExactDistribution,
        cylinder: &CylinderSet,
        k: u32,
    ) -> Result<BigRational> {
        let mask = cylinder_mask(self.states(), cylinder);
        let coeffs = self.coefficients(mu0, &mask)?;
        Ok(self.expand(&coeffs, k, true))
    }

    /// `Δ_C(0), ..., Δ_C(k_max)`, sharing the coefficient computation.
    pub fn delta_c_sequence(
        &self,
        mu0: &ExactDistribution,
        cylinder: &CylinderSet,
        k_max: u32,
    ) -> Result<Vec<BigRational>> {
        let mask = cylinder_mask(self.states(), cylinder);
        let coeffs = self.coefficients(mu0, &mask)?;
        Ok((0..=k_max).map(|k| self.expand(&coeffs, k, true)).collect())
    }
}

fn pow(base: &BigRational, k: u32) -> BigRational {
    num_traits::pow(base.clone(), k as usize)
}

/// `P(X_k ∈ A)` for `X_0 ~ μ_0` via the character expansion.
pub fn spectral_event_probability(
    mu0: &ExactDistribution,
    event: &[bool],
    k: u32,
) -> Result<BigRational> {
    SpectralModel::over(Arc::clone(mu0.states()))?.event_probability(mu0, event, k)
}

/// `Δ_C(k)` via the character expansion.
pub fn delta_c(mu0: &ExactDistribution, cylinder: &CylinderSet, k: u32) -> Result<BigRational> {
    SpectralModel::over(Arc::clone(mu0.states()))?.delta_c(mu0, cylinder, k)
}

/// `P(X_{2k} = (n) | X_0 = (n)) = (1/n) Σ_{i=1}^n ((2i - n - 1)/(n - 1))^{2k}`.
///
/// Only hooks have a nonzero character at the `n`-cycle, which is why the sum
/// runs over hook eigenvalues alone.
pub fn return_probability(n: usize, k: u32) -> Result<BigRational> {
    if n < 2 || k < 1 {
        return Err(Error::domain("return probability needs n >= 2 and k >= 1"));
    }
    let power = 2 * k as usize;
    let num: BigInt = (1..=n)
        .map(|i| num_traits::pow(BigInt::from(2 * i as i64 - n as i64 - 1), power))
        .sum();
    let den = num_traits::pow(BigInt::from(n - 1), power) * BigInt::from(n);
    Ok(BigRational::new(num, den))
}

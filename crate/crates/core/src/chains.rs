//! The CCF and DCF(n) transitions, and the exact rational machinery for DCF(n).
//!
//! CCF picks two parts size-biased *with* replacement, so the same part can be
//! picked twice and is then split uniformly. DCF(n) picks two distinct elements
//! of `{1, ..., n}` *without* replacement; a split then happens only when both
//! land in the same block, and the cut position is uniform on `1..size`.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::partitions::{ContinuousPartition, IntegerPartition, PartitionSet};
use crate::samplers::{size_biased_pick, RngStream};
use crate::{Error, Result, DEFAULT_EXACT_CAP};

/// One CCF transition, returning the new partition.
pub fn ccf_step(p: &ContinuousPartition, rng: &mut RngStream) -> ContinuousPartition {
    let mut next = p.clone();
    ccf_step_in_place(&mut next, rng);
    next
}

/// What a CCF step did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcfMove {
    Split,
    Merge,
}

/// One CCF transition applied in place; keeps the parts sorted.
pub fn ccf_step_in_place(p: &mut ContinuousPartition, rng: &mut RngStream) -> CcfMove {
    let first = size_biased_pick(p, rng);
    let second = size_biased_pick(p, rng);
    if first == second {
        let mass = p.parts.remove(first);
        let left = rng.uniform() * mass;
        let right = mass - left;
        insert_sorted(&mut p.parts, left.max(right));
        insert_sorted(&mut p.parts, left.min(right));
        CcfMove::Split
    } else {
        let (lo, hi) = (first.min(second), first.max(second));
        let merged = p.parts[lo] + p.parts[hi];
        p.parts.remove(hi);
        p.parts.remove(lo);
        insert_sorted(&mut p.parts, merged);
        CcfMove::Merge
    }
}

// Inserts after every existing element >= value, so ties keep encounter order.
fn insert_sorted(parts: &mut Vec<f64>, value: f64) {
    if value > 0.0 {
        let at = parts.partition_point(|&x| x >= value);
        parts.insert(at, value);
    }
}

/// One DCF(n) transition.
pub fn dcf_step(l: &IntegerPartition, rng: &mut RngStream) -> Result<IntegerPartition> {
    let n = l.n();
    if n < 2 {
        return Err(Error::domain("a DCF step needs n >= 2"));
    }
    let x = rng.below(n);
    let mut y = rng.below(n - 1);
    if y >= x {
        y += 1;
    }
    let block_of = |element: usize| {
        let mut end = 0;
        for (b, &size) in l.parts().iter().enumerate() {
            end += size;
            if element < end {
                return b;
            }
        }
        unreachable!("element {element} beyond n = {n}")
    };
    let (bx, by) = (block_of(x), block_of(y));
    let mut parts = l.parts().to_vec();
    if bx == by {
        let size = parts[bx];
        let cut = 1 + rng.below(size - 1);
        parts[bx] = cut;
        parts.push(size - cut);
    } else {
        parts[bx] += parts[by];
        parts[by] = 0;
    }
    Ok(IntegerPartition::from_unsorted(&parts))
}

fn ratio(num: usize, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// The exact transition matrix of DCF(n), stored by sparse rows over the canonical order.
#[derive(Clone, Debug)]
pub struct ExactKernel {
    states: Arc<PartitionSet>,
    rows: Vec<Vec<(usize, BigRational)>>,
}

/// The exact kernel with the default exact-mode cap.
pub fn exact_kernel(n: usize) -> Result<ExactKernel> {
    exact_kernel_capped(n, DEFAULT_EXACT_CAP)
}

/// The exact kernel of DCF(n).
///
/// Off-diagonal entries come from the merge and split rates; the diagonal is
/// the residual row mass, which must vanish for `n >= 2`.
pub fn exact_kernel_capped(n: usize, cap: usize) -> Result<ExactKernel> {
    let states = Arc::new(PartitionSet::with_cap(n, cap)?);
    if n == 1 {
        return Ok(ExactKernel {
            states,
            rows: vec![vec![(0, BigRational::one())]],
        });
    }
    let pairs = n * (n - 1);
    let rows = states
        .as_slice()
        .par_iter()
        .map(|l| {
            let mut row: BTreeMap<usize, BigRational> = BTreeMap::new();
            let mut add = |parts: Vec<usize>, weight: BigRational| {
                let to = states
                    .index_of(&IntegerPartition::from_unsorted(&parts))
                    .expect("transition leaves P_n");
                *row.entry(to).or_insert_with(BigRational::zero) += weight;
            };
            let ty = l.type_counts();
            let sizes: Vec<usize> = ty.counts.keys().copied().collect();
            let with_replaced = |remove: &[usize], insert: &[usize]| {
                let mut parts = l.parts().to_vec();
                for r in remove {
                    let at = parts.iter().position(|p| p == r).expect("part present");
                    parts.remove(at);
                }
                parts.extend_from_slice(insert);
                parts
            };
            // merges
            for (a, &j) in sizes.iter().enumerate() {
                let nj = ty.count(j);
                for &k in &sizes[a + 1..] {
                    let nk = ty.count(k);
                    add(
                        with_replaced(&[j, k], &[j + k]),
                        ratio(2 * j * k * nj * nk, pairs),
                    );
                }
                if nj >= 2 {
                    add(
                        with_replaced(&[j, j], &[2 * j]),
                        ratio(j * j * nj * (nj - 1), pairs),
                    );
                }
            }
            // splits of a part of size m into j < m - j, or into two halves
            for &m in &sizes {
                let nm = ty.count(m);
                for j in 1..=m / 2 {
                    let weight = if 2 * j == m {
                        ratio(m * nm, pairs)
                    } else {
                        ratio(2 * m * nm, pairs)
                    };
                    add(with_replaced(&[m], &[j, m - j]), weight);
                }
            }
            let off: BigRational = row.values().fold(BigRational::zero(), |acc, v| acc + v);
            let residual = BigRational::one() - off;
            if !residual.is_zero() {
                return Err(Error::Consistency(format!(
                    "row {l} of the n = {n} kernel leaves residual diagonal mass {residual}"
                )));
            }
            Ok(row.into_iter().collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExactKernel { states, rows })
}

impl ExactKernel {
    pub fn n(&self) -> usize {
        self.states.n()
    }

    pub fn states(&self) -> &Arc<PartitionSet> {
        &self.states
    }

    /// Nonzero entries of row `from`, ordered by column.
    pub fn row(&self, from: usize) -> &[(usize, BigRational)] {
        &self.rows[from]
    }

    pub fn entry(&self, from: usize, to: usize) -> BigRational {
        self.rows[from]
            .binary_search_by_key(&to, |(j, _)| *j)
            .map(|at| self.rows[from][at].1.clone())
            .unwrap_or_else(|_| BigRational::zero())
    }

    /// Overwrites one entry. Only meant for sensitivity checks of the validators.
    pub fn set_entry(&mut self, from: usize, to: usize, value: BigRational) {
        let row = &mut self.rows[from];
        match row.binary_search_by_key(&to, |(j, _)| *j) {
            Ok(at) => row[at].1 = value,
            Err(at) => row.insert(at, (to, value)),
        }
    }

    /// `(K f)(γ) = Σ_γ' K(γ, γ') f(γ')`.
    pub fn apply_to_function(&self, f: &[BigRational]) -> Vec<BigRational> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .fold(BigRational::zero(), |acc, (j, k)| acc + k * &f[*j])
            })
            .collect()
    }

    /// One step of the law: `μ K`.
    pub fn push_forward(&self, mu: &ExactDistribution) -> Result<ExactDistribution> {
        self.check_same_states(mu)?;
        let mut out = vec![BigRational::zero(); self.states.len()];
        for (i, w) in mu.weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (j, k) in &self.rows[i] {
                out[*j] += w * k;
            }
        }
        Ok(ExactDistribution {
            states: Arc::clone(&self.states),
            weights: out,
        })
    }

    fn check_same_states(&self, mu: &ExactDistribution) -> Result<()> {
        if mu.states.n() != self.states.n() {
            return Err(Error::domain(format!(
                "distribution over P_{} used with kernel over P_{}",
                mu.states.n(),
                self.states.n()
            )));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["from", "to", "probability_num", "probability_den"])?;
        for (i, row) in self.rows.iter().enumerate() {
            for (j, k) in row {
                w.write_record([
                    self.states.get(i).to_string(),
                    self.states.get(*j).to_string(),
                    k.numer().to_string(),
                    k.denom().to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Entry<'a> {
            from: &'a IntegerPartition,
            to: &'a IntegerPartition,
            probability: String,
        }
        let entries: Vec<Entry<'_>> = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter().map(move |(j, k)| Entry {
                    from: self.states.get(i),
                    to: self.states.get(*j),
                    probability: k.to_string(),
                })
            })
            .collect();
        serde_json::json!({ "n": self.n(), "entries": entries })
    }
}

/// An exact probability vector over the canonical order of `P_n`.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    states: Arc<PartitionSet>,
    weights: Vec<BigRational>,
}

impl PartialEq for ExactDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.states.n() == other.states.n() && self.weights == other.weights
    }
}

impl ExactDistribution {
    /// Validates nonnegativity and an exact total of one.
    pub fn from_weights(states: Arc<PartitionSet>, weights: Vec<BigRational>) -> Result<Self> {
        if weights.len() != states.len() {
            return Err(Error::domain("weight vector does not match the partition set"));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::domain("weights must be nonnegative"));
        }
        let total = weights.iter().fold(BigRational::zero(), |acc, w| acc + w);
        if !total.is_one() {
            return Err(Error::domain(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { states, weights })
    }

    pub fn point_mass(states: Arc<PartitionSet>, at: &IntegerPartition) -> Result<Self> {
        let index = states
            .index_of(at)
            .ok_or_else(|| Error::domain(format!("{at} is not a partition of {}", states.n())))?;
        let mut weights = vec![BigRational::zero(); states.len()];
        weights[index] = BigRational::one();
        Ok(Self { states, weights })
    }

    pub fn n(&self) -> usize {
        self.states.n()
    }

    pub fn states(&self) -> &Arc<PartitionSet> {
        &self.states
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn weight(&self, p: &IntegerPartition) -> BigRational {
        self.states
            .index_of(p)
            .map(|i| self.weights[i].clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// Total mass of the event given as a mask over the canonical order.
    pub fn mass_of(&self, event: &[bool]) -> BigRational {
        self.weights
            .iter()
            .zip(event)
            .filter(|(_, &inside)| inside)
            .fold(BigRational::zero(), |acc, (w, _)| acc + w)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.weights
            .iter()
            .map(|w| w.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["partition", "probability_num", "probability_den"])?;
        for (p, q) in self.states.iter().zip(&self.weights) {
            w.write_record([p.to_string(), q.numer().to_string(), q.denom().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .states
            .iter()
            .zip(&self.weights)
            .map(|(p, q)| serde_json::json!({ "partition": p, "probability": q.to_string() }))
            .collect();
        serde_json::json!({ "n": self.n(), "entries": entries })
    }
}

/// The Ewens law `π_S(ℓ) = (Π_k k^{N_ℓ(k)} N_ℓ(k)!)^{-1}`, with the default cap.
pub fn ewens_pmf(n: usize) -> Result<ExactDistribution> {
    ewens_pmf_over(Arc::new(PartitionSet::new(n)?))
}

/// The Ewens law over an already enumerated `P_n`.
pub fn ewens_pmf_over(states: Arc<PartitionSet>) -> Result<ExactDistribution> {
    let weights = states
        .iter()
        .map(|l| BigRational::new(BigInt::one(), ewens_denominator(l)))
        .collect();
    ExactDistribution::from_weights(states, weights)
}

/// `Π_k k^{N(k)} N(k)!`, the size of the centraliser of a permutation of type `ℓ`.
pub fn ewens_denominator(l: &IntegerPartition) -> BigInt {
    let mut den = BigInt::one();
    for (&k, &count) in &l.type_counts().counts {
        for c in 1..=count {
            den *= BigInt::from(k) * BigInt::from(c);
        }
    }
    den
}

/// `μ_0 K^k` by repeated exact vector-matrix products.
pub fn k_step_distribution(
    mu0: &ExactDistribution,
    kernel: &ExactKernel,
    k: usize,
) -> Result<ExactDistribution> {
    let mut mu = mu0.clone();
    for _ in 0..k {
        mu = kernel.push_forward(&mu)?;
    }
    kernel.check_same_states(&mu)?;
    Ok(mu)
}

/// `max |K(ℓ,ℓ')π(ℓ) - K(ℓ',ℓ)π(ℓ')|` over all pairs, exactly.
pub fn check_detailed_balance(kernel: &ExactKernel) -> Result<BigRational> {
    let pi = ewens_pmf_over(Arc::clone(kernel.states()))?;
    let mut worst = BigRational::zero();
    for (i, row) in kernel.rows.iter().enumerate() {
        for (j, k_ij) in row {
            let forward = k_ij * &pi.weights[i];
            let backward = kernel.entry(*j, i) * &pi.weights[*j];
            let gap = (forward - backward).abs();
            if gap > worst {
                worst = gap;
            }
        }
    }
    Ok(worst)
}

/// `max_ℓ |(π K)(ℓ) - π(ℓ)|`, exactly.
pub fn stationarity_violation(kernel: &ExactKernel) -> Result<BigRational> {
    let pi = ewens_pmf_over(Arc::clone(kernel.states()))?;
    let next = kernel.push_forward(&pi)?;
    Ok(next
        .weights
        .iter()
        .zip(&pi.weights)
        .map(|(a, b)| (a - b).abs())
        .fold(BigRational::zero(), |acc, g| if g > acc { g } else { acc }))
}

/// Monte Carlo counts of the `k`-step law started at `start`, over the canonical order.
///
/// Replica `r` uses stream `(seed, r)`.
pub fn empirical_counts<F>(
    step: F,
    start: &IntegerPartition,
    k: usize,
    replicas: u64,
    seed: u64,
) -> Result<(Arc<PartitionSet>, Vec<u64>)>
where
    F: Fn(&IntegerPartition, &mut RngStream) -> Result<IntegerPartition> + Sync,
{
    let states = Arc::new(PartitionSet::new(start.n())?);
    let hits = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, r);
            let mut state = start.clone();
            for _ in 0..k {
                state = step(&state, &mut rng)?;
            }
            states
                .index_of(&state)
                .ok_or_else(|| Error::Consistency(format!("{state} escaped P_{}", start.n())))
        })
        .collect::<Result<Vec<usize>>>()?;
    let mut counts = vec![0u64; states.len()];
    for h in hits {
        counts[h] += 1;
    }
    Ok((states, counts))
}

/// Monte Carlo frequencies of the `k`-step law; they sum to one.
pub fn empirical_distribution<F>(
    step: F,
    start: &IntegerPartition,
    k: usize,
    replicas: u64,
    seed: u64,
) -> Result<Vec<f64>>
where
    F: Fn(&IntegerPartition, &mut RngStream) -> Result<IntegerPartition> + Sync,
{
    if replicas == 0 {
        return Err(Error::domain("need at least one replica"));
    }
    let (_, counts) = empirical_counts(step, start, k, replicas, seed)?;
    Ok(counts
        .iter()
        .map(|&c| c as f64 / replicas as f64)
        .collect())
}

//! Random generation of Poisson-Dirichlet(1) and Ewens-distributed partitions.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::partitions::{sort_descending, ContinuousPartition, IntegerPartition};
use crate::{Error, Result};

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Streams with the same seed and different ids are independent ChaCha
/// streams; replica `r` of an experiment uses `stream_id = r`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A U[0, 1) draw.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// A uniform draw from `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        self.rng.random_range(0..bound)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn check_epsilon(epsilon_trunc: f64) -> Result<()> {
    if epsilon_trunc > 0.0 && epsilon_trunc < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "truncation threshold must lie in (0, 1), got {epsilon_trunc}"
        )))
    }
}

/// The unsorted GEM stick sequence `X_1, X_2, ...` and the leftover stick.
///
/// `X_m = U_m Y_m` and `Y_{m+1} = Y_m - X_m` with `Y_1 = 1`; breaking stops
/// once the remaining stick drops below `epsilon_trunc`.
pub fn gem_sticks(rng: &mut RngStream, epsilon_trunc: f64) -> Result<(Vec<f64>, f64)> {
    check_epsilon(epsilon_trunc)?;
    let mut sticks = Vec::new();
    let mut remaining = 1.0f64;
    while remaining >= epsilon_trunc {
        let piece = rng.uniform() * remaining;
        sticks.push(piece);
        remaining -= piece;
    }
    Ok((sticks, remaining))
}

/// A Poisson-Dirichlet(1) draw: GEM sticks sorted into nonincreasing order.
pub fn sample_gem(rng: &mut RngStream, epsilon_trunc: f64) -> Result<ContinuousPartition> {
    let (sticks, dust) = gem_sticks(rng, epsilon_trunc)?;
    Ok(ContinuousPartition {
        parts: sort_descending(&sticks),
        dust,
    })
}

/// An exact Ewens(θ = 1) draw: the cycle type of a uniform permutation of `n`.
///
/// Built by sequential insertion: element `i` (0-based) opens a new cycle with
/// probability `1 / (i + 1)` and otherwise joins the cycle of a uniformly chosen
/// earlier element.
pub fn sample_ewens(n: usize, rng: &mut RngStream) -> Result<IntegerPartition> {
    if n == 0 {
        return Err(Error::domain("Ewens sampling requires n >= 1"));
    }
    let mut cycle_of = Vec::with_capacity(n);
    let mut sizes: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = rng.below(i + 1);
        let cycle = if r == i {
            sizes.push(0);
            sizes.len() - 1
        } else {
            cycle_of[r]
        };
        sizes[cycle] += 1;
        cycle_of.push(cycle);
    }
    Ok(IntegerPartition::from_unsorted(&sizes))
}

/// Outcome of a size-biased lookup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeBiasedPick {
    /// 0-based index into the stored parts.
    Part(usize),
    Dust,
}

/// The part whose cumulative-mass interval `[Σ_{i<j} p_i, Σ_{i<=j} p_i)` contains `u`.
pub fn size_biased_index(p: &ContinuousPartition, u: f64) -> SizeBiasedPick {
    let mut cumulative = 0.0;
    for (j, &mass) in p.parts.iter().enumerate() {
        cumulative += mass;
        if u < cumulative {
            return SizeBiasedPick::Part(j);
        }
    }
    SizeBiasedPick::Dust
}

/// A size-biased part index, redrawing whenever the draw lands in the dust.
pub fn size_biased_pick(p: &ContinuousPartition, rng: &mut RngStream) -> usize {
    loop {
        if let SizeBiasedPick::Part(j) = size_biased_index(p, rng.uniform()) {
            return j;
        }
    }
}

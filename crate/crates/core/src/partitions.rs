//! Integer and continuous partitions, Young-diagram operations and cylinder sets.
//!
//! Rows and columns of a Young diagram are 1-based, matching the usual `(i, j)`
//! cell notation. Everything else (vector positions, canonical indices) is
//! 0-based.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, DEFAULT_EXACT_CAP};

/// Additive tolerance for the sum-to-one invariant of [`ContinuousPartition`].
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Sorts `values` into nonincreasing order and drops zeros.
///
/// The sort is stable, so equal values keep their encounter order.
pub fn sort_descending<T>(values: &[T]) -> Vec<T>
where
    T: PartialOrd + Copy + Zero,
{
    let mut out: Vec<T> = values.iter().copied().filter(|v| !v.is_zero()).collect();
    out.sort_by(|a, b| b.partial_cmp(a).expect("sort_descending: unordered value"));
    out
}

/// A partition of the integer `n`: nonincreasing positive parts summing to `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IntegerPartition {
    parts: Vec<usize>,
}

impl IntegerPartition {
    /// Builds a partition from parts that must already be nonincreasing and positive.
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::domain("integer partition parts must be positive"));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::domain("integer partition parts must be nonincreasing"));
        }
        Ok(Self { parts })
    }

    /// Sorts and drops zero entries.
    pub fn from_unsorted(parts: &[usize]) -> Self {
        Self {
            parts: sort_descending(parts),
        }
    }

    /// The one-row partition `(n)`.
    pub fn single(n: usize) -> Self {
        Self::from_unsorted(&[n])
    }

    /// The one-column partition `(1, ..., 1)`.
    pub fn ones(n: usize) -> Self {
        Self { parts: vec![1; n] }
    }

    /// The hook `(i, 1, ..., 1)` of size `n`, for `1 <= i <= n`.
    pub fn hook(i: usize, n: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(Error::domain(format!("hook arm {i} out of range for n = {n}")));
        }
        let mut parts = vec![i];
        parts.extend(std::iter::repeat_n(1, n - i));
        Ok(Self { parts })
    }

    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// The integer being partitioned.
    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of parts (the number of rows of the Young diagram).
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Length of row `i` (1-based); zero beyond the last row.
    pub fn row(&self, i: usize) -> usize {
        if i == 0 {
            return 0;
        }
        self.parts.get(i - 1).copied().unwrap_or(0)
    }

    /// Length of column `j` (1-based), i.e. `#{i : λ_i >= j}`.
    pub fn column(&self, j: usize) -> usize {
        if j == 0 {
            return 0;
        }
        self.parts.partition_point(|&p| p >= j)
    }

    pub fn contains_cell(&self, cell: Cell) -> bool {
        cell.row >= 1 && cell.col >= 1 && cell.col <= self.row(cell.row)
    }

    pub fn type_counts(&self) -> PartitionType {
        let mut counts = BTreeMap::new();
        for &p in &self.parts {
            *counts.entry(p).or_insert(0) += 1;
        }
        PartitionType {
            counts,
            total_parts: self.parts.len(),
        }
    }

    /// The transposed partition `λ'`.
    pub fn conjugate(&self) -> Self {
        let width = self.row(1);
        Self {
            parts: (1..=width).map(|j| self.column(j)).collect(),
        }
    }

    /// `B_λ = max{i : λ_i >= i}`, the length of the main diagonal (0 for the empty partition).
    pub fn diagonal_length(&self) -> usize {
        self.parts
            .iter()
            .enumerate()
            .take_while(|(i, &p)| p > *i)
            .count()
    }

    /// Hook length of an in-diagram cell; equals the size of its rim segment.
    pub fn hook_length(&self, cell: Cell) -> Result<usize> {
        self.check_cell(cell)?;
        Ok(self.row(cell.row) - cell.col + self.column(cell.col) - cell.row + 1)
    }

    /// The rim segment `R_λ(i, j)` straddled by `cell`.
    ///
    /// Rows run from `i` down to `λ'_j`; in row `u` the segment covers columns
    /// `max(j, λ_{u+1}) ..= λ_u`.
    pub fn rim_segment(&self, cell: Cell) -> Result<Vec<Cell>> {
        self.check_cell(cell)?;
        let last = self.column(cell.col);
        let mut cells = Vec::new();
        for u in cell.row..=last {
            let lo = cell.col.max(self.row(u + 1));
            for v in lo..=self.row(u) {
                cells.push(Cell::new(u, v));
            }
        }
        Ok(cells)
    }

    /// Removes the rim segment straddled by `cell`, giving `λ_*^{(i,j)}`.
    pub fn strip_rim(&self, cell: Cell) -> Result<Self> {
        self.check_cell(cell)?;
        Ok(self.strip_rim_unchecked(cell.row, cell.col))
    }

    pub(crate) fn strip_rim_unchecked(&self, i: usize, j: usize) -> Self {
        let last = self.column(j);
        let mut parts = self.parts.clone();
        for u in i..=last {
            parts[u - 1] = j.max(self.row(u + 1)) - 1;
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Self { parts }
    }

    /// Drops the `r`-th part (1-based), giving `γ^{\hat r}`.
    pub fn remove_part(&self, r: usize) -> Result<Self> {
        if r == 0 || r > self.parts.len() {
            return Err(Error::domain(format!(
                "part index {r} out of range 1..={}",
                self.parts.len()
            )));
        }
        let mut parts = self.parts.clone();
        parts.remove(r - 1);
        Ok(Self { parts })
    }

    fn check_cell(&self, cell: Cell) -> Result<()> {
        if self.contains_cell(cell) {
            Ok(())
        } else {
            Err(Error::domain(format!("cell {cell} lies outside the diagram of {self}")))
        }
    }
}

impl TryFrom<Vec<usize>> for IntegerPartition {
    type Error = Error;

    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Self::new(parts)
    }
}

impl From<IntegerPartition> for Vec<usize> {
    fn from(p: IntegerPartition) -> Self {
        p.parts
    }
}

impl fmt::Display for IntegerPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

/// Multiplicities `N_ℓ(k)` of each part size, plus the total number of parts `N_ℓ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionType {
    pub counts: BTreeMap<usize, usize>,
    pub total_parts: usize,
}

impl PartitionType {
    /// `N_ℓ(k)`, zero for absent sizes.
    pub fn count(&self, k: usize) -> usize {
        self.counts.get(&k).copied().unwrap_or(0)
    }
}

/// A cell `(row, col)` of a Young diagram, both 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// All partitions of `n` in reverse lexicographic order, with the default cap.
pub fn enumerate_partitions(n: usize) -> Result<Vec<IntegerPartition>> {
    enumerate_partitions_capped(n, DEFAULT_EXACT_CAP)
}

/// All partitions of `n` in reverse lexicographic order; `(n)` first, `(1^n)` last.
pub fn enumerate_partitions_capped(n: usize, cap: usize) -> Result<Vec<IntegerPartition>> {
    if n == 0 {
        return Err(Error::domain("enumeration requires n >= 1"));
    }
    if n > cap {
        return Err(Error::Capacity { n, cap });
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    fill_partitions(n, n, &mut prefix, &mut out);
    Ok(out)
}

fn fill_partitions(
    remaining: usize,
    max_part: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<IntegerPartition>,
) {
    if remaining == 0 {
        out.push(IntegerPartition {
            parts: prefix.clone(),
        });
        return;
    }
    for first in (1..=remaining.min(max_part)).rev() {
        prefix.push(first);
        fill_partitions(remaining - first, first, prefix, out);
        prefix.pop();
    }
}

/// The enumerated set `P_n` together with a reverse lookup.
///
/// Every exact object in the crate (kernels, distributions, character tables)
/// is indexed by this canonical order.
#[derive(Clone, Debug)]
pub struct PartitionSet {
    n: usize,
    partitions: Vec<IntegerPartition>,
    lookup: HashMap<IntegerPartition, usize>,
}

impl PartitionSet {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_cap(n, DEFAULT_EXACT_CAP)
    }

    pub fn with_cap(n: usize, cap: usize) -> Result<Self> {
        let partitions = enumerate_partitions_capped(n, cap)?;
        let lookup = partitions
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Ok(Self {
            n,
            partitions,
            lookup,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn get(&self, index: usize) -> &IntegerPartition {
        &self.partitions[index]
    }

    pub fn index_of(&self, p: &IntegerPartition) -> Option<usize> {
        self.lookup.get(p).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, IntegerPartition> {
        self.partitions.iter()
    }

    pub fn as_slice(&self) -> &[IntegerPartition] {
        &self.partitions
    }
}

/// A finite point of the simplex of ordered partitions of `[0, 1]`.
///
/// Parts below a sampler's truncation threshold are not represented
/// individually; their total mass is kept in `dust`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawContinuous")]
pub struct ContinuousPartition {
    pub(crate) parts: Vec<f64>,
    pub(crate) dust: f64,
}

#[derive(Deserialize)]
struct RawContinuous {
    parts: Vec<f64>,
    #[serde(default)]
    dust: f64,
}

impl TryFrom<RawContinuous> for ContinuousPartition {
    type Error = Error;

    fn try_from(raw: RawContinuous) -> Result<Self> {
        Self::new(raw.parts, raw.dust)
    }
}

impl ContinuousPartition {
    /// Validates positivity, ordering and `sum(parts) + dust = 1`.
    pub fn new(parts: Vec<f64>, dust: f64) -> Result<Self> {
        if parts.iter().any(|p| !(p.is_finite() && *p > 0.0 && *p <= 1.0)) {
            return Err(Error::domain("continuous parts must lie in (0, 1]"));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::domain("continuous parts must be nonincreasing"));
        }
        if !(dust.is_finite() && dust >= 0.0) {
            return Err(Error::domain("dust must be a nonnegative real"));
        }
        let p = Self { parts, dust };
        let defect = (p.total_mass() - 1.0).abs();
        if defect > MASS_TOLERANCE {
            return Err(Error::domain(format!(
                "masses sum to 1 - {defect:e}, outside tolerance"
            )));
        }
        Ok(p)
    }

    /// Sorts the masses (dropping zeros) and validates.
    pub fn from_masses(masses: &[f64], dust: f64) -> Result<Self> {
        Self::new(sort_descending(masses), dust)
    }

    /// The trivial partition `(1, 0, 0, ...)`.
    pub fn unit() -> Self {
        Self {
            parts: vec![1.0],
            dust: 0.0,
        }
    }

    pub fn parts(&self) -> &[f64] {
        &self.parts
    }

    pub fn dust(&self) -> f64 {
        self.dust
    }

    /// `x_i` for 1-based `i`; zero beyond the stored parts.
    pub fn part(&self, i: usize) -> f64 {
        if i == 0 {
            return 0.0;
        }
        self.parts.get(i - 1).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.parts.iter().sum::<f64>() + self.dust
    }

    /// `|self - other|_1` over parts, padding the shorter sequence with zeros.
    pub fn l1_distance(&self, other: &[f64]) -> f64 {
        let len = self.parts.len().max(other.len());
        (0..len)
            .map(|i| {
                let a = self.parts.get(i).copied().unwrap_or(0.0);
                let b = other.get(i).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .sum()
    }
}

/// The cylinder set `C_{a,b} = {x : x_i ∈ (a_i, b_i), i = 1..k}` for `(a, b) ∈ I_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCylinder")]
pub struct CylinderSet {
    a: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Deserialize)]
struct RawCylinder {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TryFrom<RawCylinder> for CylinderSet {
    type Error = Error;

    fn try_from(raw: RawCylinder) -> Result<Self> {
        Self::new(raw.a, raw.b)
    }
}

impl CylinderSet {
    /// Checks membership of `(a, b)` in `I_k`:
    /// `0 < a_i < b_i < 1`, `Σ b_i < 1` and `a_k > 1 - Σ a_i`.
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::domain("cylinder needs equal, nonzero numbers of lower and upper bounds"));
        }
        if a.iter().zip(&b).any(|(&lo, &hi)| !(0.0 < lo && lo < hi && hi < 1.0)) {
            return Err(Error::domain("cylinder bounds must satisfy 0 < a_i < b_i < 1"));
        }
        let sum_a: f64 = a.iter().sum();
        let sum_b: f64 = b.iter().sum();
        if sum_b >= 1.0 {
            return Err(Error::domain("cylinder upper bounds must sum below 1"));
        }
        if a[a.len() - 1] <= 1.0 - sum_a {
            return Err(Error::domain("cylinder requires a_k > 1 - Σ a_i"));
        }
        Ok(Self { a, b })
    }

    /// Parses `a1,b1;a2,b2;...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for pair in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (lo, hi) = pair
                .split_once(',')
                .ok_or_else(|| Error::domain(format!("cylinder pair `{pair}` is not `a,b`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::domain(format!("bad cylinder bound `{s}`")))
            };
            a.push(parse(lo)?);
            b.push(parse(hi)?);
        }
        Self::new(a, b)
    }

    pub fn k(&self) -> usize {
        self.a.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.a
    }

    pub fn upper(&self) -> &[f64] {
        &self.b
    }

    /// `δ_{a,b} = min(1 - Σ b_i, a_k - (1 - Σ a_i))`, positive for valid cylinders.
    pub fn delta(&self) -> f64 {
        let sum_a: f64 = self.a.iter().sum();
        let sum_b: f64 = self.b.iter().sum();
        (1.0 - sum_b).min(self.a[self.k() - 1] - (1.0 - sum_a))
    }

    /// Open-interval membership of the first `k` coordinates.
    pub fn contains(&self, x: &ContinuousPartition) -> bool {
        (1..=self.k()).all(|i| {
            let xi = x.part(i);
            self.a[i - 1] < xi && xi < self.b[i - 1]
        })
    }

    /// Whether `γ / n ∈ C`, i.e. `γ_i ∈ (n a_i, n b_i)` for `i = 1..k`.
    pub fn contains_scaled(&self, gamma: &IntegerPartition) -> bool {
        let n = gamma.n() as f64;
        (1..=self.k()).all(|i| {
            let g = gamma.row(i) as f64;
            n * self.a[i - 1] < g && g < n * self.b[i - 1]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ip(parts: &[usize]) -> IntegerPartition {
        IntegerPartition::new(parts.to_vec()).unwrap()
    }

    const FIG_LAMBDA: [usize; 7] = [8, 8, 7, 4, 4, 1, 1];
    const FIG_GAMMA: [usize; 6] = [10, 9, 7, 3, 2, 2];

    // p(n) by the standard "largest part at most k" recurrence, independent of
    // the recursive enumerator.
    fn partition_count(n: usize) -> usize {
        let mut table = vec![0usize; n + 1];
        table[0] = 1;
        for part in 1..=n {
            for total in part..=n {
                table[total] += table[total - part];
            }
        }
        table[n]
    }

    #[test]
    fn sort_descending_examples() {
        assert_eq!(sort_descending(&[0.2, 0.5, 0.3]), vec![0.5, 0.3, 0.2]);
        assert_eq!(sort_descending(&[1usize, 0, 1]), vec![1, 1]);
        let sorted = [5usize, 3, 3, 1];
        assert_eq!(sort_descending(&sorted), sorted.to_vec());
    }

    #[test]
    fn type_counts_examples() {
        let t = ip(&[2, 1]).type_counts();
        assert_eq!(t.counts, BTreeMap::from([(2, 1), (1, 1)]));
        assert_eq!(t.total_parts, 2);
        let t = ip(&[1, 1, 1]).type_counts();
        assert_eq!(t.counts, BTreeMap::from([(1, 3)]));
        assert_eq!(t.total_parts, 3);
        let t = ip(&[3]).type_counts();
        assert_eq!(t.counts, BTreeMap::from([(3, 1)]));
        assert_eq!(t.total_parts, 1);
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(ip(&FIG_LAMBDA).conjugate(), ip(&[7, 5, 5, 5, 3, 3, 3, 2]));
        assert_eq!(ip(&FIG_GAMMA).conjugate(), ip(&[6, 6, 4, 3, 3, 3, 3, 2, 2, 1]));
        assert_eq!(IntegerPartition::single(6).conjugate(), IntegerPartition::ones(6));
    }

    #[test]
    fn diagonal_length_examples() {
        assert_eq!(ip(&FIG_LAMBDA).diagonal_length(), 4);
        assert_eq!(IntegerPartition::single(9).diagonal_length(), 1);
        assert_eq!(ip(&[1, 1, 1]).diagonal_length(), 1);
    }

    #[test]
    fn rim_segments_of_the_figure() {
        let lambda = ip(&FIG_LAMBDA);
        let seg = lambda.rim_segment(Cell::new(2, 3)).unwrap();
        assert_eq!(seg.len(), 9);
        assert_eq!(lambda.rim_segment(Cell::new(1, 4)).unwrap().len(), 9);
        assert_eq!(lambda.strip_rim(Cell::new(2, 3)).unwrap(), ip(&[8, 6, 3, 3, 2, 1, 1]));
        assert_eq!(lambda.strip_rim(Cell::new(1, 4)).unwrap(), ip(&[7, 6, 3, 3, 3, 1, 1]));

        let row = IntegerPartition::single(5);
        assert_eq!(row.rim_segment(Cell::new(1, 1)).unwrap().len(), 5);
        assert!(row.strip_rim(Cell::new(1, 1)).unwrap().is_empty());
    }

    #[test]
    fn cells_outside_the_diagram_are_rejected() {
        let lambda = ip(&FIG_LAMBDA);
        assert!(matches!(lambda.rim_segment(Cell::new(3, 8)), Err(Error::Domain(_))));
        assert!(matches!(lambda.strip_rim(Cell::new(8, 1)), Err(Error::Domain(_))));
        assert!(lambda.strip_rim(Cell::new(0, 1)).is_err());
    }

    #[test]
    fn remove_part_examples() {
        assert_eq!(ip(&FIG_GAMMA).remove_part(2).unwrap(), ip(&[10, 7, 3, 2, 2]));
        assert!(IntegerPartition::single(4).remove_part(1).unwrap().is_empty());
        assert_eq!(ip(&[2, 1]).remove_part(2).unwrap(), ip(&[2]));
        assert!(ip(&[2, 1]).remove_part(3).is_err());
        assert!(ip(&[2, 1]).remove_part(0).is_err());
    }

    #[test]
    fn enumeration_order_and_counts() {
        assert_eq!(
            enumerate_partitions(3).unwrap(),
            vec![ip(&[3]), ip(&[2, 1]), ip(&[1, 1, 1])]
        );
        assert_eq!(enumerate_partitions(5).unwrap().len(), partition_count(5));
        assert_eq!(partition_count(5), 7);
        assert_eq!(enumerate_partitions(20).unwrap().len(), 627);
        for n in 1..=30 {
            let all = enumerate_partitions(n).unwrap();
            assert_eq!(all.len(), partition_count(n), "n = {n}");
            assert!(all.windows(2).all(|w| w[0] > w[1]), "not reverse lexicographic at n = {n}");
        }
        assert!(matches!(
            enumerate_partitions(31),
            Err(Error::Capacity { n: 31, cap: 30 })
        ));
        assert_eq!(enumerate_partitions_capped(31, 40).unwrap().len(), 6842);
    }

    #[test]
    fn exhaustive_young_diagram_invariants() {
        for n in 1..=12 {
            for lambda in enumerate_partitions(n).unwrap() {
                assert_eq!(lambda.conjugate().conjugate(), lambda);
                assert_eq!(lambda.diagonal_length(), lambda.conjugate().diagonal_length());
            }
        }
        for n in 1..=10 {
            for lambda in enumerate_partitions(n).unwrap() {
                for i in 1..=lambda.len() {
                    for j in 1..=lambda.row(i) {
                        let cell = Cell::new(i, j);
                        let seg = lambda.rim_segment(cell).unwrap();
                        let stripped = lambda.strip_rim(cell).unwrap();
                        assert!(IntegerPartition::new(stripped.parts().to_vec()).is_ok());
                        assert_eq!(seg.len(), n - stripped.n());
                        assert_eq!(seg.len(), lambda.hook_length(cell).unwrap());
                        // walking from the top-right end, each step goes left or down
                        let mut walk = seg.clone();
                        walk.sort_by_key(|c| (c.row, std::cmp::Reverse(c.col)));
                        for w in walk.windows(2) {
                            let (p, q) = (w[0], w[1]);
                            let step = (q.row == p.row && q.col + 1 == p.col)
                                || (q.row == p.row + 1 && q.col == p.col);
                            assert!(step, "{lambda} {cell}: {p} -> {q}");
                        }
                        for c in &seg {
                            assert!(!seg.contains(&Cell::new(c.row + 1, c.col + 1)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cylinder_examples() {
        let c = CylinderSet::new(vec![0.55], vec![0.9]).unwrap();
        let x = ContinuousPartition::new(vec![0.7, 0.3], 0.0).unwrap();
        assert!(c.contains(&x));
        let edge = ContinuousPartition::new(vec![0.55, 0.45], 0.0).unwrap();
        assert!(!c.contains(&edge));
        let low = ContinuousPartition::new(vec![0.5, 0.5], 0.0).unwrap();
        assert!(!c.contains(&low));

        assert!((c.delta() - 0.1).abs() < 1e-12);
        let c2 = CylinderSet::new(vec![0.5, 0.3], vec![0.55, 0.35]).unwrap();
        assert!((c2.delta() - 0.1).abs() < 1e-12);
        let narrower = CylinderSet::new(vec![0.55], vec![0.8]).unwrap();
        assert!(narrower.delta() >= c.delta());

        assert!(c.contains_scaled(&ip(&[7, 3])));
        assert!(!c.contains_scaled(&ip(&[5, 5])));
        assert!(!c.contains_scaled(&ip(&[10])));
    }

    #[test]
    fn cylinder_validation_and_parsing() {
        assert!(CylinderSet::new(vec![0.6], vec![0.9]).is_ok());
        // a_1 > 1 - a_1 fails for a_1 = 0.45
        assert!(CylinderSet::new(vec![0.45], vec![0.9]).is_err());
        assert!(CylinderSet::new(vec![0.5, 0.3], vec![0.6, 0.45]).is_err());
        assert!(CylinderSet::new(vec![0.7], vec![0.6]).is_err());
        let parsed = CylinderSet::parse("0.5,0.55; 0.3,0.35").unwrap();
        assert_eq!(parsed.lower(), &[0.5, 0.3]);
        assert_eq!(parsed.upper(), &[0.55, 0.35]);
        assert!(CylinderSet::parse("0.5").is_err());
    }

    #[test]
    fn json_shapes() {
        let lambda = ip(&FIG_LAMBDA);
        let s = serde_json::to_string(&lambda).unwrap();
        assert_eq!(s, "[8,8,7,4,4,1,1]");
        assert_eq!(serde_json::from_str::<IntegerPartition>(&s).unwrap(), lambda);
        assert!(serde_json::from_str::<IntegerPartition>("[1,2]").is_err());

        let c = CylinderSet::new(vec![0.55], vec![0.9]).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"a":[0.55],"b":[0.9]}"#);
        assert_eq!(serde_json::from_str::<CylinderSet>(&s).unwrap(), c);
        assert!(serde_json::from_str::<CylinderSet>(r#"{"a":[0.4],"b":[0.9]}"#).is_err());
    }

    #[test]
    fn continuous_partition_validation() {
        assert!(ContinuousPartition::new(vec![0.6, 0.4], 0.0).is_ok());
        assert!(ContinuousPartition::new(vec![0.4, 0.6], 0.0).is_err());
        assert!(ContinuousPartition::new(vec![0.6, 0.3], 0.0).is_err());
        assert!(ContinuousPartition::new(vec![0.6, 0.3], 0.1).is_ok());
        assert!(ContinuousPartition::new(vec![0.6, 0.0, 0.4], 0.0).is_err());
        let p = ContinuousPartition::from_masses(&[0.25, 0.0, 0.75], 0.0).unwrap();
        assert_eq!(p.parts(), &[0.75, 0.25]);
    }

    fn arb_cylinder_member() -> impl Strategy<Value = (CylinderSet, ContinuousPartition)> {
        // Build x first, then a cylinder around its head that is valid in I_k.
        (1usize..=3, prop::collection::vec(0.0f64..1.0, 8), 0.001f64..0.05)
            .prop_filter_map("cylinder not in I_k", |(k, raw, slack)| {
                let mut head: Vec<f64> = raw[..k].iter().map(|u| 0.2 + 0.8 * u).collect();
                head.sort_by(|a, b| b.partial_cmp(a).unwrap());
                let total: f64 = head.iter().sum();
                let scale = 0.95 / total.max(0.95);
                let head: Vec<f64> = head.iter().map(|h| h * scale).collect();
                let head_sum: f64 = head.iter().sum();
                let tail_mass = 1.0 - head_sum;
                if tail_mass <= 0.0 || tail_mass >= head[k - 1] {
                    return None;
                }
                let weights: Vec<f64> = raw[k..].iter().map(|u| u + 0.01).collect();
                let wsum: f64 = weights.iter().sum();
                let mut masses = head.clone();
                masses.extend(weights.iter().map(|w| w / wsum * tail_mass));
                let x = ContinuousPartition::from_masses(&masses, 0.0).ok()?;
                if x.parts()[..k] != head[..] {
                    return None;
                }
                let a: Vec<f64> = head.iter().map(|h| h - slack).collect();
                let b: Vec<f64> = head.iter().map(|h| h + slack).collect();
                let c = CylinderSet::new(a, b).ok()?;
                Some((c, x))
            })
    }

    proptest! {
        #[test]
        fn cylinder_members_have_a_separated_tail((c, x) in arb_cylinder_member()) {
            prop_assert!(c.contains(&x));
            let head: f64 = (1..=c.k()).map(|i| x.part(i)).sum();
            let tail = 1.0 - head;
            let delta = c.delta();
            prop_assert!(delta < tail, "delta {} tail {}", delta, tail);
            prop_assert!(tail < x.part(c.k()) - delta);
        }

        #[test]
        fn from_unsorted_is_sorted_and_total_preserving(v in prop::collection::vec(0usize..6, 0..12)) {
            let p = IntegerPartition::from_unsorted(&v);
            prop_assert_eq!(p.n(), v.iter().sum::<usize>());
            prop_assert!(IntegerPartition::new(p.parts().to_vec()).is_ok());
        }
    }
}

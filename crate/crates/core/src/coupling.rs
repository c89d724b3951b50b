//! A joint construction of CCF and DCF(n) driven by shared uniforms.
//!
//! The state `(c, d, e)` holds a labelling `c` of `[0, n)` by half-open
//! intervals, a labelling `d` of the atoms `1..=n`, and a flag `e` recording
//! whether the two chains have decoupled. Projecting `c` gives a CCF chain
//! scaled by `n`; projecting `d` gives DCF(n). Atom `m` is the unit cell
//! `[m - 1, m)`, so the point `x` lies in atom `floor(x) + 1`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::partitions::{ContinuousPartition, IntegerPartition};
use crate::samplers::RngStream;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub label: u64,
}

impl Interval {
    pub fn new(start: f64, end: f64, label: u64) -> Self {
        Self { start, end, label }
    }

    fn len(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Clone, Debug)]
pub struct CoupledState {
    n: usize,
    c: Vec<Interval>,
    // d[m - 1] is the label of atom m
    d: Vec<u64>,
    members: HashMap<u64, Vec<usize>>,
    e: bool,
    next_label: u64,
}

impl CoupledState {
    /// Builds a state from explicit labellings; `c` must tile `[0, n)` in order.
    pub fn new(n: usize, c: Vec<Interval>, d: Vec<u64>) -> Result<Self> {
        if n == 0 || d.len() != n {
            return Err(Error::domain("need n >= 1 and one d label per atom"));
        }
        let tiles = !c.is_empty()
            && c[0].start == 0.0
            && c.last().map(|iv| iv.end) == Some(n as f64)
            && c.windows(2).all(|w| w[0].end == w[1].start)
            && c.iter().all(|iv| iv.start < iv.end);
        if !tiles {
            return Err(Error::domain("c must tile [0, n) with nonempty intervals"));
        }
        let next_label = c.iter().map(|iv| iv.label).chain(d.iter().copied()).max().unwrap_or(0) + 1;
        let mut members: HashMap<u64, Vec<usize>> = HashMap::new();
        for (m, &label) in d.iter().enumerate() {
            members.entry(label).or_default().push(m);
        }
        Ok(Self {
            n,
            c,
            d,
            members,
            e: false,
            next_label,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.c
    }

    /// Labels of atoms `1..=n`, stored 0-based.
    pub fn atom_labels(&self) -> &[u64] {
        &self.d
    }

    pub fn decoupled(&self) -> bool {
        self.e
    }

    pub fn next_label(&self) -> u64 {
        self.next_label
    }

    /// Label of the interval containing `x`.
    pub fn c_label(&self, x: f64) -> u64 {
        self.c[self.interval_index(x)].label
    }

    fn interval_index(&self, x: f64) -> usize {
        let at = self.c.partition_point(|iv| iv.end <= x);
        at.min(self.c.len() - 1)
    }

    /// 0-based atom index of the cell containing `x`.
    fn atom(&self, x: f64) -> usize {
        (x.floor() as usize).min(self.n - 1)
    }

    fn fresh_label(&mut self) -> u64 {
        let label = self.next_label;
        self.next_label += 1;
        label
    }

    fn c_merge(&mut self, keep: u64, absorb: u64) {
        for iv in &mut self.c {
            if iv.label == absorb {
                iv.label = keep;
            }
        }
        self.c.dedup_by(|next, prev| {
            if prev.label == next.label {
                prev.end = next.end;
                true
            } else {
                false
            }
        });
    }

    // Points x > at in the class of `at` move to `fresh`.
    fn c_split(&mut self, at: f64, fresh: u64) {
        let i = self.interval_index(at);
        let label = self.c[i].label;
        let iv = self.c[i];
        if at > iv.start {
            self.c[i].end = at;
            self.c.insert(i + 1, Interval::new(at, iv.end, fresh));
        } else {
            self.c[i].label = fresh;
        }
        for later in &mut self.c[i + 1..] {
            if later.label == label {
                later.label = fresh;
            }
        }
    }

    fn d_merge(&mut self, keep: u64, absorb: u64) {
        let mut moved = self.members.remove(&absorb).unwrap_or_default();
        for &m in &moved {
            self.d[m] = keep;
        }
        let target = self.members.entry(keep).or_default();
        target.append(&mut moved);
        target.sort_unstable();
    }

    // Atoms after `atom` in its class move to `fresh`; `atom` itself moves when
    // the position of `at` inside its cell falls below r / (a - 1), r being the
    // number of class members before `atom` and a the class size.
    fn d_split(&mut self, atom: usize, at: f64, fresh: u64) {
        let label = self.d[atom];
        let class = self.members.get_mut(&label).expect("atom has a class");
        let a = class.len();
        let r = class.partition_point(|&m| m < atom);
        let frac = at - at.floor();
        let cut = if a > 1 && frac < r as f64 / (a - 1) as f64 { r } else { r + 1 };
        let moved = class.split_off(cut);
        for &m in &moved {
            self.d[m] = fresh;
        }
        if class.is_empty() {
            self.members.remove(&label);
        }
        if !moved.is_empty() {
            self.members.insert(fresh, moved);
        }
    }
}

/// Lays the parts of `p` out consecutively on `[0, n)`; dust becomes one more
/// interval at the end. Atom `m` takes the label of the point `m - 1`.
pub fn embed(p: &ContinuousPartition, n: usize) -> Result<CoupledState> {
    if n == 0 {
        return Err(Error::domain("embedding needs n >= 1"));
    }
    let scale = n as f64;
    let mut c = Vec::with_capacity(p.len() + 1);
    let mut start = 0.0;
    let mut cumulative = 0.0;
    let dust = p.dust();
    let masses = p.parts().iter().chain((dust > 0.0).then_some(&dust));
    for (j, &mass) in masses.enumerate() {
        cumulative += mass;
        let end = (scale * cumulative).min(scale);
        if end > start {
            c.push(Interval::new(start, end, j as u64 + 1));
            start = end;
        }
    }
    match c.last_mut() {
        Some(last) => last.end = scale,
        None => return Err(Error::domain("partition carries no mass")),
    }
    let mut d = Vec::with_capacity(n);
    let mut i = 0;
    for m in 0..n {
        while c[i].end <= m as f64 {
            i += 1;
        }
        d.push(c[i].label);
    }
    CoupledState::new(n, c, d)
}

/// `sort(Leb(c^{-1}(i)) / n)` over labels `i`.
pub fn project_continuous(s: &CoupledState) -> ContinuousPartition {
    let masses = class_masses(s);
    ContinuousPartition::from_masses(&masses, 0.0).expect("intervals tile [0, n)")
}

fn class_masses(s: &CoupledState) -> Vec<f64> {
    let mut by_label: HashMap<u64, f64> = HashMap::new();
    for iv in &s.c {
        *by_label.entry(iv.label).or_insert(0.0) += iv.len();
    }
    let scale = s.n as f64;
    let mut masses: Vec<f64> = by_label.values().map(|m| m / scale).collect();
    masses.sort_by(|a, b| b.total_cmp(a));
    masses
}

/// `sort(#d^{-1}(i))` over labels `i`.
pub fn project_discrete(s: &CoupledState) -> IntegerPartition {
    let sizes: Vec<usize> = s.members.values().map(Vec::len).collect();
    IntegerPartition::from_unsorted(&sizes)
}

/// `ρ = Leb{x ∈ [0, n) : c(x) ≠ d(floor(x) + 1)}`.
///
/// Computed as `n` minus the agreement, which only needs the cells of the
/// interval's own class.
pub fn discrepancy(s: &CoupledState) -> f64 {
    let mut agree = 0.0;
    for iv in &s.c {
        let Some(class) = s.members.get(&iv.label) else {
            continue;
        };
        let first = iv.start.floor() as usize;
        let last = ((iv.end.ceil() as usize).max(first + 1) - 1).min(s.n - 1);
        let lo = class.partition_point(|&m| m < first);
        let hi = class.partition_point(|&m| m <= last);
        let cells = &class[lo..hi];
        if cells.is_empty() {
            continue;
        }
        if first == last {
            agree += iv.len();
            continue;
        }
        let has_first = cells[0] == first;
        let has_last = cells[cells.len() - 1] == last;
        agree += (cells.len() - usize::from(has_first) - usize::from(has_last)) as f64;
        if has_first {
            agree += (first + 1) as f64 - iv.start;
        }
        if has_last {
            agree += iv.end - last as f64;
        }
    }
    (s.n as f64 - agree).max(0.0)
}

/// One coupled transition.
///
/// `ξ_1, ξ_2` drive `c`; they also drive `d` unless they fall in the same
/// cell, in which case `d` uses a pair `ζ_1, ζ_2` drawn until their cells
/// differ. Both updates share one fresh label.
pub fn coupled_step(s: &mut CoupledState, rng: &mut RngStream) -> Result<()> {
    let n = s.n;
    if n < 2 {
        return Err(Error::domain("coupled steps need n >= 2"));
    }
    let scale = n as f64;
    let xi1 = rng.uniform() * scale;
    let xi2 = rng.uniform() * scale;
    let (a1, a2) = (s.atom(xi1), s.atom(xi2));
    let (c1, c2) = (s.c_label(xi1), s.c_label(xi2));

    let (u1, b1, b2) = if a1 != a2 {
        (xi1, a1, a2)
    } else {
        loop {
            let z1 = rng.uniform() * scale;
            let z2 = rng.uniform() * scale;
            let (b1, b2) = (s.atom(z1), s.atom(z2));
            if b1 != b2 {
                break (z1, b1, b2);
            }
        }
    };
    let decouples = a1 == a2 || c1 != s.d[a1] || c2 != s.d[a2];
    let (d1, d2) = (s.d[b1], s.d[b2]);

    let fresh = s.fresh_label();
    if c1 == c2 {
        s.c_split(xi1, fresh);
    } else {
        s.c_merge(c1, c2);
    }
    if d1 == d2 {
        s.d_split(b1, u1, fresh);
    } else {
        s.d_merge(d1, d2);
    }
    s.e |= decouples;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CouplingRecord {
    pub k: usize,
    pub rho: f64,
    pub e: bool,
    /// `|p(k) - ℓ(k)/n|_1`.
    pub l1_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingTrace {
    pub n: usize,
    pub seed: u64,
    pub stream_id: u64,
    /// `N_{ℓ(0)}`, the number of parts of the initial discrete partition.
    pub initial_parts: usize,
    pub records: Vec<CouplingRecord>,
    /// First `k >= 1` with `e_k = 1`, if any.
    pub tau: Option<usize>,
}

/// Slack for floating-point comparisons in the bound checks.
const BOUND_SLACK: f64 = 1e-9;

impl CouplingTrace {
    pub fn rho0(&self) -> f64 {
        self.records[0].rho
    }

    /// Every failure of `ρ_0 <= N_{ℓ(0)}`, `ρ_{k+1} <= ρ_k + 1` (while step
    /// `k + 1` is still coupled) and `|p(k) - ℓ(k)/n|_1 <= 2(ρ_0 + k)/n` for `k < τ`.
    pub fn bound_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let tau = self.tau.unwrap_or(usize::MAX);
        if self.rho0() > self.initial_parts as f64 + BOUND_SLACK {
            out.push(format!("rho_0 = {} exceeds N = {}", self.rho0(), self.initial_parts));
        }
        for w in self.records.windows(2) {
            if w[1].k < tau && w[1].rho > w[0].rho + 1.0 + BOUND_SLACK {
                out.push(format!("rho jumps from {} to {} at k = {}", w[0].rho, w[1].rho, w[1].k));
            }
        }
        for r in &self.records {
            let bound = 2.0 * (self.rho0() + r.k as f64) / self.n as f64;
            if r.k < tau && r.l1_gap > bound + BOUND_SLACK {
                out.push(format!("l1 gap {} exceeds {} at k = {}", r.l1_gap, bound, r.k));
            }
        }
        out
    }

    /// `k,rho,e,l1_gap` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "rho", "e", "l1_gap"])?;
        for r in &self.records {
            w.write_record([
                r.k.to_string(),
                r.rho.to_string(),
                u8::from(r.e).to_string(),
                r.l1_gap.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn record(s: &CoupledState, k: usize) -> CouplingRecord {
    let p = class_masses(s);
    let l = project_discrete(s);
    let scale = s.n as f64;
    let len = p.len().max(l.len());
    let l1_gap = (0..len)
        .map(|i| {
            let a = p.get(i).copied().unwrap_or(0.0);
            let b = l.parts().get(i).map(|&x| x as f64 / scale).unwrap_or(0.0);
            (a - b).abs()
        })
        .sum();
    CouplingRecord {
        k,
        rho: discrepancy(s),
        e: s.e,
        l1_gap,
    }
}

/// Embeds `p` at scale `n` and runs `k_max` coupled steps, recording every state.
pub fn run_coupling(
    p: &ContinuousPartition,
    n: usize,
    k_max: usize,
    rng: &mut RngStream,
) -> Result<CouplingTrace> {
    let mut s = embed(p, n)?;
    let initial_parts = s.members.len();
    let mut records = Vec::with_capacity(k_max + 1);
    records.push(record(&s, 0));
    let mut tau = None;
    for k in 1..=k_max {
        coupled_step(&mut s, rng)?;
        if s.e && tau.is_none() {
            tau = Some(k);
        }
        records.push(record(&s, k));
    }
    Ok(CouplingTrace {
        n,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
        initial_parts,
        records,
        tau,
    })
}

/// Independent coupling runs; replica `r` draws its start from `initial` and
/// steps on stream `(seed, r)`.
pub fn run_replicas<F>(
    initial: F,
    n: usize,
    k_max: usize,
    replicas: u64,
    seed: u64,
) -> Result<Vec<CouplingTrace>>
where
    F: Fn(&mut RngStream) -> Result<ContinuousPartition> + Sync,
{
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, r);
            let p = initial(&mut rng)?;
            run_coupling(&p, n, k_max, &mut rng)
        })
        .collect()
}

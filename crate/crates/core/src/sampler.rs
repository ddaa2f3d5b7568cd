//! Lazy sampling of work-register readouts.
//!
//! The unit interval is carved into bins, one per readout, each as wide as
//! that readout's probability. A uniform number is drawn first and bins are
//! only constructed until one of them traps it. Bins come in phases: the `r`
//! dominant readouts, then ring 1 (readouts at distance 1 from a dominant
//! one), ring 2, and so on; inside a phase they are ordered by decreasing
//! probability. Every readout belongs to the cell of its nearest dominant
//! readout (ties go to the lower one), so rings never overlap.
//!
//! Ring expansion stops once a ring carries less than `tail_threshold` of
//! mass or every readout has been binned. Whatever mass is left over is
//! spread uniformly across the readouts that were never binned.
//!
//! Phases beyond `materialized_rings` keep only their total mass; their
//! bins are rebuilt, in the same order, when a draw lands inside them.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{dominant_readouts, prob_from_offset, theta};

/// Seedable, platform-independent generator (ChaCha with 8 rounds).
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform in `[lo, hi]`.
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        self.rng.random_range(lo..=hi)
    }

    /// Uniform in `[0, n)`.
    pub fn below(&mut self, n: u128) -> u128 {
        self.rng.random_range(0..n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    /// Ring expansion stops once a ring's total mass drops below this.
    pub tail_threshold: f64,
    /// Rings up to this radius keep their individual bins in memory.
    pub materialized_rings: u128,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            tail_threshold: 1e-12,
            materialized_rings: 64,
        }
    }
}

/// Instrumentation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SamplerStats {
    pub draws: u64,
    /// Probability evaluations spent constructing bins (rebuilds included).
    pub bins_built: u64,
    pub rings_expanded: u64,
    pub tail_draws: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub readout: u128,
    /// Cumulative upper edge.
    pub edge: f64,
}

#[derive(Debug, Clone)]
struct Phase {
    /// 0 for the dominant readouts, `d` for ring `d`.
    radius: u128,
    lo_edge: f64,
    hi_edge: f64,
    bins: Option<Vec<Bin>>,
}

/// Cell of one dominant readout: it owns `c - left ..= c + right`.
#[derive(Debug, Clone, Copy)]
struct Cell {
    center: u128,
    left: u128,
    right: u128,
}

/// The lazily grown, cached bin table for one `(y, r, q)`.
#[derive(Debug, Clone)]
pub struct BinTable {
    y: u64,
    r: u64,
    q: u128,
    config: SamplerConfig,
    cells: Vec<Cell>,
    max_extent: u128,
    phases: Vec<Phase>,
    binned: u128,
    exhausted: bool,
    stats: SamplerStats,
}

impl BinTable {
    pub fn new(y: u64, r: u64, q: u128) -> Self {
        Self::with_config(y, r, q, SamplerConfig::default())
    }

    pub fn with_config(y: u64, r: u64, q: u128, config: SamplerConfig) -> Self {
        assert!(
            r >= 1 && r as u128 <= q,
            "order {r} out of range for q = {q}"
        );
        BinTable {
            y,
            r,
            q,
            config,
            cells: Vec::new(),
            max_extent: 0,
            phases: Vec::new(),
            binned: 0,
            exhausted: false,
            stats: SamplerStats::default(),
        }
    }

    pub fn key(&self) -> (u64, u64, u128) {
        (self.y, self.r, self.q)
    }

    pub fn stats(&self) -> SamplerStats {
        self.stats
    }

    /// Mass covered by the bins built so far.
    pub fn covered_mass(&self) -> f64 {
        self.phases.last().map_or(0.0, |p| p.hi_edge)
    }

    /// Largest ring radius built (0 when only dominant bins exist).
    pub fn ring_radius(&self) -> u128 {
        self.phases.last().map_or(0, |p| p.radius)
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Number of readouts assigned to a bin so far.
    pub fn binned_readouts(&self) -> u128 {
        self.binned
    }

    /// Materialized bins in construction order.
    pub fn bins(&self) -> impl Iterator<Item = &Bin> {
        self.phases
            .iter()
            .filter_map(|p| p.bins.as_deref())
            .flatten()
    }

    /// Drops every cached bin; counters are kept.
    pub fn reset(&mut self) {
        self.cells.clear();
        self.max_extent = 0;
        self.phases.clear();
        self.binned = 0;
        self.exhausted = false;
    }

    /// Draws one readout.
    pub fn draw(&mut self, rng: &mut RandomSource) -> u128 {
        let u = rng.uniform();
        self.draw_at(u, rng)
    }

    /// Draws the readout whose bin contains `u`; `rng` is only touched when
    /// `u` falls in the uniform tail.
    pub fn draw_at(&mut self, u: f64, rng: &mut RandomSource) -> u128 {
        assert!((0.0..1.0).contains(&u));
        self.stats.draws += 1;
        while self.covered_mass() <= u && !self.exhausted {
            self.extend();
        }
        if u < self.covered_mass() {
            let idx = self.phases.partition_point(|p| p.hi_edge <= u);
            return self.lookup_in_phase(idx, u);
        }
        self.stats.tail_draws += 1;
        self.draw_tail(rng)
    }

    /// Builds every phase up to the stopping rule. Used by spectrum export.
    pub fn extend_to(&mut self, max_radius: u128) {
        while !self.exhausted && (self.phases.is_empty() || self.ring_radius() < max_radius) {
            self.extend();
        }
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    fn lookup_in_phase(&mut self, idx: usize, u: f64) -> u128 {
        if self.phases[idx].bins.is_none() {
            let radius = self.phases[idx].radius;
            let lo = self.phases[idx].lo_edge;
            let (bins, _) = self.build_phase(radius, lo);
            self.phases[idx].bins = Some(bins);
        }
        let bins = self.phases[idx].bins.as_ref().unwrap();
        let pos = bins.partition_point(|b| b.edge <= u);
        let readout = bins
            .get(pos)
            .unwrap_or_else(|| bins.last().unwrap())
            .readout;
        if self.phases[idx].radius > self.config.materialized_rings {
            self.phases[idx].bins = None;
        }
        readout
    }

    fn ensure_cells(&mut self) {
        if !self.cells.is_empty() {
            return;
        }
        let centers = dominant_readouts(self.r, self.q);
        let k = centers.len();
        let q = self.q;
        self.cells = (0..k)
            .map(|i| {
                let c = centers[i];
                let prev = centers[(i + k - 1) % k];
                let next = centers[(i + 1) % k];
                let gap_left = if k == 1 { q } else { (c + q - prev) % q };
                let gap_right = if k == 1 { q } else { (next + q - c) % q };
                Cell {
                    center: c,
                    left: (gap_left - 1) / 2,
                    right: gap_right / 2,
                }
            })
            .collect();
        self.max_extent = self
            .cells
            .iter()
            .map(|c| c.left.max(c.right))
            .max()
            .unwrap_or(0);
    }

    fn ring_members(&self, radius: u128) -> Vec<u128> {
        let q = self.q;
        if radius == 0 {
            return self.cells.iter().map(|c| c.center).collect();
        }
        let mut out = Vec::with_capacity(2 * self.cells.len());
        for cell in &self.cells {
            if radius <= cell.left {
                out.push((cell.center + q - radius) % q);
            }
            if radius <= cell.right {
                out.push((cell.center + radius) % q);
            }
        }
        out
    }

    /// Bins for one phase, in decreasing probability, starting at `lo`.
    /// Returns the bins and the number of readouts the phase covers.
    fn build_phase(&mut self, radius: u128, lo: f64) -> (Vec<Bin>, u128) {
        let members = self.ring_members(radius);
        let count = members.len() as u128;
        let (r, q) = (self.r, self.q);
        let mut weighted: Vec<(u128, f64)> = members
            .into_iter()
            .map(|c| (c, prob_from_offset(theta(c, r, q).offset, r, q)))
            .collect();
        self.stats.bins_built += weighted.len() as u64;
        weighted.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        debug_assert!(weighted.windows(2).all(|w| w[0].1 >= w[1].1));
        let mut bins = Vec::with_capacity(weighted.len());
        let mut edge = lo;
        for (c, p) in weighted {
            let next = edge + p;
            // zero or sub-ulp bins are unreachable
            if next > edge {
                edge = next;
                bins.push(Bin { readout: c, edge });
            }
        }
        (bins, count)
    }

    fn extend(&mut self) {
        self.ensure_cells();
        let radius = if self.phases.is_empty() {
            0
        } else {
            self.ring_radius() + 1
        };
        if radius > self.max_extent {
            self.exhausted = true;
            return;
        }
        let lo = self.covered_mass();
        let (bins, count) = self.build_phase(radius, lo);
        let hi = bins.last().map_or(lo, |b| b.edge);
        if radius > 0 {
            self.stats.rings_expanded += 1;
        }
        self.binned += count;
        let keep = radius <= self.config.materialized_rings;
        self.phases.push(Phase {
            radius,
            lo_edge: lo,
            hi_edge: hi,
            bins: keep.then_some(bins),
        });
        if radius > 0 && hi - lo < self.config.tail_threshold {
            self.exhausted = true;
        }
        if radius >= self.max_extent {
            self.exhausted = true;
        }
    }

    /// Uniform pick among readouts not yet binned; if none are left, the
    /// last bin absorbs the remainder.
    fn draw_tail(&mut self, rng: &mut RandomSource) -> u128 {
        self.ensure_cells();
        let radius = if self.phases.is_empty() {
            None
        } else {
            Some(self.ring_radius())
        };
        let outside = |extent: u128| match radius {
            None => extent + 1,
            Some(rad) => extent.saturating_sub(rad),
        };
        let remaining = self.q - self.binned;
        if remaining == 0 {
            return match self.phases.iter().rposition(|p| p.hi_edge > p.lo_edge) {
                Some(idx) => {
                    let edge = self.phases[idx].hi_edge;
                    self.lookup_in_phase(idx, edge)
                }
                None => self.cells[0].center,
            };
        }
        let q = self.q;
        let mut k = rng.below(remaining);
        for cell in &self.cells {
            let (base, left_n, right_n) = match radius {
                // nothing binned yet: centers count too
                None => (0u128, cell.left, cell.right),
                Some(rad) => (rad, outside(cell.left), outside(cell.right)),
            };
            if radius.is_none() {
                if k == 0 {
                    return cell.center;
                }
                k -= 1;
            }
            if k < left_n {
                return (cell.center + q - (base + 1 + k) % q) % q;
            }
            k -= left_n;
            if k < right_n {
                return (cell.center + base + 1 + k) % q;
            }
            k -= right_n;
        }
        unreachable!("tail index past the last cell")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::prob;
    use std::collections::HashSet;

    #[test]
    fn uniform_bins_when_order_divides_q() {
        let mut table = BinTable::new(56, 16, 65536);
        let mut rng = RandomSource::new(1);
        let c = table.draw_at(0.03, &mut rng);
        // all 16 bins tie at 1/16, the lowest readout comes first
        assert_eq!(c, 0);
        assert_eq!(table.stats().bins_built, 16);
        assert_eq!(table.covered_mass(), 1.0);
        assert_eq!(table.draw_at(0.07, &mut rng), 4096);
        assert_eq!(table.draw_at(0.999, &mut rng), 61440);
        // no rings needed
        assert_eq!(table.stats().rings_expanded, 0);
    }

    #[test]
    fn order_one_always_reads_zero() {
        let mut table = BinTable::new(1, 1, 1 << 20);
        let mut rng = RandomSource::new(5);
        for _ in 0..1000 {
            assert_eq!(table.draw(&mut rng), 0);
        }
    }

    #[test]
    fn lazy_construction_counts() {
        let q = 65536;
        let mass = crate::model::dominant_mass(40, q);
        let mut table = BinTable::new(36, 40, q);
        let mut rng = RandomSource::new(0);
        table.draw_at(mass * 0.5, &mut rng);
        assert_eq!(table.stats().bins_built, 40);
        assert_eq!(table.ring_radius(), 0);
        // just past the dominant mass forces exactly one ring
        table.draw_at(mass + 1e-9, &mut rng);
        assert_eq!(table.stats().rings_expanded, 1);
        assert_eq!(table.stats().bins_built, 120);
        // cached: drawing again does not build anything
        table.draw_at(0.1, &mut rng);
        assert_eq!(table.stats().bins_built, 120);
    }

    #[test]
    fn edges_strictly_increase_and_readouts_unique() {
        let mut table = BinTable::new(36, 40, 1 << 12);
        table.extend_to(u128::MAX);
        let bins: Vec<_> = table.bins().copied().collect();
        assert!(bins.windows(2).all(|w| w[0].edge < w[1].edge));
        let uniq: HashSet<_> = bins.iter().map(|b| b.readout).collect();
        assert_eq!(uniq.len(), bins.len());
        assert_eq!(table.covered_mass(), bins.last().unwrap().edge);
    }

    #[test]
    fn rings_partition_all_readouts() {
        for (r, q) in [
            (40u64, 1u128 << 12),
            (1, 64),
            (3, 16),
            (5, 8),
            (16, 16),
            (7, 1 << 10),
        ] {
            let mut table = BinTable::with_config(
                2,
                r,
                q,
                SamplerConfig {
                    tail_threshold: 0.0,
                    materialized_rings: u128::MAX,
                },
            );
            table.extend_to(u128::MAX);
            assert!(table.is_exhausted());
            assert_eq!(table.binned_readouts(), q, "r={r} q={q}");
            let seen: HashSet<_> = (0..=table.ring_radius())
                .flat_map(|d| table.ring_members(d))
                .collect();
            assert_eq!(seen.len() as u128, q);
        }
    }

    #[test]
    fn phases_are_monotone() {
        let mut table = BinTable::new(36, 40, 65536);
        table.extend_to(5);
        for phase in &table.phases {
            let bins = phase.bins.as_ref().unwrap();
            let mut prev = phase.lo_edge;
            let widths: Vec<f64> = bins
                .iter()
                .map(|b| {
                    let w = b.edge - prev;
                    prev = b.edge;
                    w
                })
                .collect();
            assert!(widths.windows(2).all(|w| w[0] >= w[1] - 1e-15));
        }
        // bins carry the model probability
        let first = table.bins().next().unwrap();
        assert!((first.edge - prob(first.readout, 40, 65536)).abs() < 1e-15);
    }

    #[test]
    fn tail_draws_avoid_binned_readouts() {
        let q = 1u128 << 12;
        let mut table = BinTable::new(2, 40, q);
        let mut rng = RandomSource::new(3);
        table.extend_to(3);
        let binned: HashSet<u128> = (0..=3).flat_map(|d| table.ring_members(d)).collect();
        assert_eq!(binned.len() as u128, table.binned_readouts());
        let mut hits = HashSet::new();
        for _ in 0..100_000 {
            let c = table.draw_tail(&mut rng);
            assert!(c < q && !binned.contains(&c));
            hits.insert(c);
        }
        assert_eq!(hits.len() as u128, q - table.binned_readouts());
    }

    #[test]
    fn tail_before_any_bin_is_uniform_over_all() {
        let mut table = BinTable::new(2, 5, 64);
        let mut rng = RandomSource::new(9);
        let hits: HashSet<_> = (0..5000).map(|_| table.draw_tail(&mut rng)).collect();
        assert_eq!(hits.len(), 64);
    }

    #[test]
    fn reset_then_redraw_matches_fresh_table() {
        let mut table = BinTable::new(36, 40, 65536);
        let mut rng = RandomSource::new(11);
        for _ in 0..50 {
            table.draw(&mut rng);
        }
        assert!(!table.is_empty());
        table.reset();
        assert!(table.is_empty());
        table.reset();
        assert!(table.is_empty());

        let mut fresh = BinTable::new(36, 40, 65536);
        let mut rng_a = rng.clone();
        let mut rng_b = rng.clone();
        for _ in 0..50 {
            assert_eq!(table.draw(&mut rng_a), fresh.draw(&mut rng_b));
        }
    }

    #[test]
    fn unmaterialized_rings_rebuild_identically() {
        let q = 1u128 << 16;
        let cfg = SamplerConfig {
            tail_threshold: 1e-12,
            materialized_rings: 0,
        };
        let mut lean = BinTable::with_config(36, 40, q, cfg);
        let mut full = BinTable::with_config(
            36,
            40,
            q,
            SamplerConfig {
                materialized_rings: u128::MAX,
                ..cfg
            },
        );
        let mut rng = RandomSource::new(0);
        for i in 0..2000 {
            let u = 1.0 - 1.0 / (i as f64 + 2.0);
            assert_eq!(lean.draw_at(u, &mut rng.clone()), full.draw_at(u, &mut rng));
        }
        assert!(lean.bins().count() <= 40);
    }

    #[test]
    fn same_seed_same_readouts() {
        let draw = |seed| {
            let mut table = BinTable::new(36, 40, 65536);
            let mut rng = RandomSource::new(seed);
            (0..200).map(|_| table.draw(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
        assert_ne!(draw(42), draw(43));
    }
}

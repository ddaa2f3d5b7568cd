//! Order finding for one `y`: sample a readout, extract a candidate order
//! from the continued fraction of `c / q`, check it, repeat.

use serde::{Deserialize, Serialize};

use crate::model::FactoringParams;
use crate::numtheory::{convergents, modpow};
use crate::sampler::{BinTable, RandomSource, SamplerConfig, SamplerStats};

/// One simulated measurement and its verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderResult {
    /// 1-based, counted across the whole factoring session.
    pub trial_index: u32,
    pub readout: u128,
    pub candidate_order: u64,
    /// `y^candidate_order = 1 (mod N)`.
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderSearch {
    /// The last trial in `trials` is the verified one.
    Found {
        trials: Vec<OrderResult>,
    },
    BudgetExhausted {
        trials: Vec<OrderResult>,
    },
}

impl OrderSearch {
    pub fn trials(&self) -> &[OrderResult] {
        match self {
            OrderSearch::Found { trials } | OrderSearch::BudgetExhausted { trials } => trials,
        }
    }
}

/// Candidate order extracted from a single readout.
pub fn candidate_order(readout: u128, q: u128, n: u64) -> u64 {
    convergents(readout, q, n as u128).denominator as u64
}

/// Simulated quantum hardware for one factoring session.
///
/// Owns the bin cache (rebuilt whenever `y` changes) and the session-wide
/// trial counter.
#[derive(Debug)]
pub struct OrderFinder {
    n: u64,
    q: u128,
    max_trials: u32,
    trials_used: u32,
    config: SamplerConfig,
    table: Option<BinTable>,
    retired_stats: SamplerStats,
}

impl OrderFinder {
    pub fn new(params: &FactoringParams, config: SamplerConfig) -> Self {
        OrderFinder {
            n: params.n,
            q: params.q(),
            max_trials: params.max_trials,
            trials_used: 0,
            config,
            table: None,
            retired_stats: SamplerStats::default(),
        }
    }

    pub fn trials_used(&self) -> u32 {
        self.trials_used
    }

    pub fn budget_left(&self) -> bool {
        self.trials_used < self.max_trials
    }

    /// Counters summed over every subcycle so far.
    pub fn sampler_stats(&self) -> SamplerStats {
        let mut s = self.retired_stats;
        if let Some(t) = &self.table {
            let t = t.stats();
            s.draws += t.draws;
            s.bins_built += t.bins_built;
            s.rings_expanded += t.rings_expanded;
            s.tail_draws += t.tail_draws;
        }
        s
    }

    fn table_for(&mut self, y: u64, true_order: u64) -> &mut BinTable {
        let key = (y, true_order, self.q);
        if self.table.as_ref().map(BinTable::key) != Some(key) {
            if let Some(old) = self.table.take() {
                let t = old.stats();
                self.retired_stats.draws += t.draws;
                self.retired_stats.bins_built += t.bins_built;
                self.retired_stats.rings_expanded += t.rings_expanded;
                self.retired_stats.tail_draws += t.tail_draws;
            }
            self.table = Some(BinTable::with_config(y, true_order, self.q, self.config));
        }
        self.table.as_mut().unwrap()
    }

    /// Runs one trial: draw, extract, verify.
    pub fn trial(&mut self, y: u64, true_order: u64, rng: &mut RandomSource) -> OrderResult {
        let (n, q) = (self.n, self.q);
        let readout = self.table_for(y, true_order).draw(rng);
        self.trials_used += 1;
        let candidate = candidate_order(readout, q, n);
        OrderResult {
            trial_index: self.trials_used,
            readout,
            candidate_order: candidate,
            verified: modpow(y, candidate, n) == 1,
        }
    }

    /// Repeats trials until one verifies or the session budget runs out.
    /// `on_trial` sees every trial as it happens.
    pub fn find_order(
        &mut self,
        y: u64,
        true_order: u64,
        rng: &mut RandomSource,
        mut on_trial: impl FnMut(&OrderResult),
    ) -> OrderSearch {
        let mut trials = Vec::new();
        while self.budget_left() {
            let result = self.trial(y, true_order, rng);
            on_trial(&result);
            trials.push(result);
            if result.verified {
                return OrderSearch::Found { trials };
            }
        }
        OrderSearch::BudgetExhausted { trials }
    }
}

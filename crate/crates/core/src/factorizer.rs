//! The classical factoring loop wrapped around simulated order finding.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{safe_qubits, FactoringParams};
use crate::numtheory::{factorize, gcd, modpow, OrderError, OrderOracle};
use crate::orderfinder::{OrderFinder, OrderResult, OrderSearch};
use crate::sampler::{RandomSource, SamplerConfig, SamplerStats};
use crate::transcript::TranscriptEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptOutcome {
    SharedFactorShortcut,
    OrderOdd,
    TrivialFactors,
    Success,
    OrderCeilingRejected,
    TrialBudgetExhausted,
}

/// Everything that happened for one choice of `y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub y: u64,
    pub outcome: AttemptOutcome,
    pub order: Option<u64>,
    pub trials: Vec<OrderResult>,
    pub factors: Option<(u64, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    TrialBudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factorization {
    Factors(u64, u64),
    Failed(FailureReason),
}

impl Factorization {
    pub fn factors(&self) -> Option<(u64, u64)> {
        match *self {
            Factorization::Factors(a, b) => Some((a, b)),
            Factorization::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactoringHistory {
    pub params: FactoringParams,
    pub safe_qubits: u32,
    pub attempts: Vec<AttemptRecord>,
    pub total_trials: u32,
    pub elapsed_secs: f64,
    pub result: Factorization,
    /// Set when N is not a product of two primes.
    pub warning: Option<String>,
}

impl FactoringHistory {
    pub fn succeeded(&self) -> bool {
        self.result.factors().is_some()
    }

    /// Attempts whose order finding ended with a verified order.
    pub fn attempts_with_order(&self) -> impl Iterator<Item = &AttemptRecord> {
        self.attempts.iter().filter(|a| {
            matches!(
                a.outcome,
                AttemptOutcome::OrderOdd | AttemptOutcome::TrivialFactors | AttemptOutcome::Success
            )
        })
    }
}

/// Result of [`extract_factors`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorOutcome {
    OrderOdd,
    /// `(gcd(x + 1, N), gcd(x - 1, N))` where at least one is 1 or N.
    TrivialFactors(u64, u64),
    Success(u64, u64),
}

/// Turns a verified order into factors via `x = y^(r/2)`, reported as
/// `(gcd(x + 1, N), gcd(x - 1, N))`.
pub fn extract_factors(y: u64, r: u64, n: u64) -> FactorOutcome {
    debug_assert_eq!(modpow(y, r, n), 1);
    if r % 2 == 1 {
        return FactorOutcome::OrderOdd;
    }
    let x = modpow(y, r / 2, n);
    let plus = gcd((x + 1) % n, n);
    let minus = gcd((x + n - 1) % n, n);
    let trivial = |f: u64| f == 1 || f == n;
    if trivial(plus) || trivial(minus) {
        FactorOutcome::TrivialFactors(plus, minus)
    } else {
        FactorOutcome::Success(plus, minus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YChoice {
    SharedFactor { y: u64, factor: u64 },
    Coprime { y: u64, order: u64 },
}

/// Draws `y` from `[2, N-1]` until it either shares a factor with N or has
/// an order within the ceiling. Rejected values are returned in draw order.
pub fn pick_y(
    oracle: &OrderOracle,
    rng: &mut RandomSource,
    ceiling: Option<u64>,
) -> (Vec<u64>, YChoice) {
    let n = oracle.modulus();
    let mut rejected = Vec::new();
    loop {
        let y = rng.range_inclusive(2, n - 1);
        match oracle.order_within(y, ceiling) {
            Ok(order) => return (rejected, YChoice::Coprime { y, order }),
            Err(OrderError::NotCoprime { gcd, .. }) => {
                return (rejected, YChoice::SharedFactor { y, factor: gcd })
            }
            Err(OrderError::OrderExceedsCeiling { .. }) => rejected.push(y),
        }
    }
}

/// Runs a full factoring session.
pub fn factor(params: &FactoringParams, config: SamplerConfig) -> Result<FactoringHistory> {
    factor_observed(params, config, |_| {}).map(|(h, _)| h)
}

/// Like [`factor`], but hands every transcript event to `observer` as soon
/// as it happens, and also returns the sampler counters.
pub fn factor_observed(
    params: &FactoringParams,
    config: SamplerConfig,
    mut observer: impl FnMut(&TranscriptEvent),
) -> Result<(FactoringHistory, SamplerStats)> {
    let safe = safe_qubits(params.n)?;
    let started = Instant::now();
    let n = params.n;

    let mut history = FactoringHistory {
        params: params.clone(),
        safe_qubits: safe,
        attempts: Vec::new(),
        total_trials: 0,
        elapsed_secs: 0.0,
        result: Factorization::Failed(FailureReason::TrialBudgetExhausted),
        warning: None,
    };
    let prime_count: u32 = factorize(n).values().sum();
    if prime_count > 2 {
        history.warning = Some(format!(
            "{n} is a product of {prime_count} primes; the factors found may not be prime"
        ));
    }

    observer(&TranscriptEvent::Banner {
        params: params.clone(),
    });
    observer(&TranscriptEvent::SafeLHint { safe_qubits: safe });

    let oracle = OrderOracle::new(n);
    let mut rng = RandomSource::new(params.seed);
    let mut finder = OrderFinder::new(params, config);

    while finder.budget_left() {
        let (rejected, choice) = pick_y(&oracle, &mut rng, params.order_ceiling);
        for y in rejected {
            observer(&TranscriptEvent::NewY { y });
            push(
                &mut observer,
                &mut history,
                AttemptRecord {
                    y,
                    outcome: AttemptOutcome::OrderCeilingRejected,
                    order: None,
                    trials: vec![],
                    factors: None,
                },
            );
        }
        let (y, true_order) = match choice {
            YChoice::SharedFactor { y, factor } => {
                observer(&TranscriptEvent::NewY { y });
                let pair = (factor, n / factor);
                push(
                    &mut observer,
                    &mut history,
                    AttemptRecord {
                        y,
                        outcome: AttemptOutcome::SharedFactorShortcut,
                        order: None,
                        trials: vec![],
                        factors: Some(pair),
                    },
                );
                history.result = Factorization::Factors(pair.0, pair.1);
                break;
            }
            YChoice::Coprime { y, order } => (y, order),
        };

        observer(&TranscriptEvent::NewY { y });
        let search = finder.find_order(y, true_order, &mut rng, |t| {
            observer(&TranscriptEvent::Trial {
                trial_index: t.trial_index,
                readout: t.readout,
                candidate_order: t.candidate_order,
            });
            observer(&TranscriptEvent::OrderVerdict {
                trial_index: t.trial_index,
                correct: t.verified,
            });
        });
        let record = match search {
            OrderSearch::BudgetExhausted { trials } => AttemptRecord {
                y,
                outcome: AttemptOutcome::TrialBudgetExhausted,
                order: None,
                trials,
                factors: None,
            },
            OrderSearch::Found { trials } => {
                let order = trials.last().unwrap().candidate_order;
                let (outcome, factors) = match extract_factors(y, order, n) {
                    FactorOutcome::OrderOdd => (AttemptOutcome::OrderOdd, None),
                    FactorOutcome::TrivialFactors(a, b) => {
                        (AttemptOutcome::TrivialFactors, Some((a, b)))
                    }
                    FactorOutcome::Success(a, b) => (AttemptOutcome::Success, Some((a, b))),
                };
                AttemptRecord {
                    y,
                    outcome,
                    order: Some(order),
                    trials,
                    factors,
                }
            }
        };
        let done = record.outcome == AttemptOutcome::Success;
        if let (true, Some((a, b))) = (done, record.factors) {
            history.result = Factorization::Factors(a, b);
        }
        push(&mut observer, &mut history, record);
        if done {
            break;
        }
    }

    history.total_trials = finder.trials_used();
    history.elapsed_secs = started.elapsed().as_secs_f64();
    observer(&TranscriptEvent::Summary {
        total_trials: history.total_trials,
        elapsed_secs: history.elapsed_secs,
        result: history.result,
        warning: history.warning.clone(),
    });
    Ok((history, finder.sampler_stats()))
}

fn push(
    observer: &mut impl FnMut(&TranscriptEvent),
    history: &mut FactoringHistory,
    record: AttemptRecord,
) {
    observer(&TranscriptEvent::FactorVerdict {
        y: record.y,
        outcome: record.outcome,
        order: record.order,
        factors: record.factors,
    });
    history.attempts.push(record);
}

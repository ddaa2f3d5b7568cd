//! Transcript events: the human-readable narration of a factoring run and
//! its line-delimited JSON twin.
//!
//! One JSON object per line, tagged by `kind`:
//!
//! | kind            | fields                                                  |
//! |-----------------|---------------------------------------------------------|
//! | `banner`        | `params` (n, qubits, aux_qubits, max_trials, order_ceiling, seed) |
//! | `safe_l_hint`   | `safe_qubits`                                           |
//! | `new_y`         | `y`                                                     |
//! | `trial`         | `trial_index`, `readout`, `candidate_order`             |
//! | `order_verdict` | `trial_index`, `correct`                                |
//! | `factor_verdict`| `y`, `outcome`, `order`, `factors`                      |
//! | `summary`       | `total_trials`, `elapsed_secs`, `result`, `warning`     |
//!
//! Every attempt is `new_y`, zero or more `trial`/`order_verdict` pairs, then
//! one `factor_verdict`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorizer::{AttemptOutcome, AttemptRecord, FactoringHistory, Factorization};
use crate::model::FactoringParams;
use crate::orderfinder::OrderResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TranscriptEvent {
    Banner {
        params: FactoringParams,
    },
    SafeLHint {
        safe_qubits: u32,
    },
    NewY {
        y: u64,
    },
    Trial {
        trial_index: u32,
        #[serde(with = "wide_int")]
        readout: u128,
        candidate_order: u64,
    },
    OrderVerdict {
        trial_index: u32,
        correct: bool,
    },
    FactorVerdict {
        y: u64,
        outcome: AttemptOutcome,
        order: Option<u64>,
        factors: Option<(u64, u64)>,
    },
    Summary {
        total_trials: u32,
        elapsed_secs: f64,
        result: Factorization,
        warning: Option<String>,
    },
}

/// Readouts exceed `u64` once the register passes 64 qubits; those are
/// written as decimal strings, everything else as plain JSON numbers.
mod wide_int {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        match u64::try_from(*v) {
            Ok(small) => s.serialize_u64(small),
            Err(_) => s.serialize_str(&v.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Wide {
        Num(u64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        match Wide::deserialize(d)? {
            Wide::Num(v) => Ok(v as u128),
            Wide::Text(t) => t.parse().map_err(de::Error::custom),
        }
    }
}

impl FactoringHistory {
    /// The event sequence a live run of this history emits.
    pub fn events(&self) -> Vec<TranscriptEvent> {
        let mut out = vec![
            TranscriptEvent::Banner {
                params: self.params.clone(),
            },
            TranscriptEvent::SafeLHint {
                safe_qubits: self.safe_qubits,
            },
        ];
        for a in &self.attempts {
            out.push(TranscriptEvent::NewY { y: a.y });
            for t in &a.trials {
                out.push(TranscriptEvent::Trial {
                    trial_index: t.trial_index,
                    readout: t.readout,
                    candidate_order: t.candidate_order,
                });
                out.push(TranscriptEvent::OrderVerdict {
                    trial_index: t.trial_index,
                    correct: t.verified,
                });
            }
            out.push(TranscriptEvent::FactorVerdict {
                y: a.y,
                outcome: a.outcome,
                order: a.order,
                factors: a.factors,
            });
        }
        out.push(TranscriptEvent::Summary {
            total_trials: self.total_trials,
            elapsed_secs: self.elapsed_secs,
            result: self.result,
            warning: self.warning.clone(),
        });
        out
    }

    /// Rebuilds a history from its events.
    pub fn from_events<I: IntoIterator<Item = TranscriptEvent>>(events: I) -> Result<Self> {
        let bad = |msg: &str| Error::Transcript(msg.to_string());
        let mut params = None;
        let mut safe = None;
        let mut attempts = Vec::new();
        let mut open: Option<(u64, Vec<OrderResult>)> = None;
        let mut pending: Option<(u32, u128, u64)> = None;

        for event in events {
            match event {
                TranscriptEvent::Banner { params: p } => params = Some(p),
                TranscriptEvent::SafeLHint { safe_qubits } => safe = Some(safe_qubits),
                TranscriptEvent::NewY { y } => {
                    if open.is_some() {
                        return Err(bad("new_y before the previous attempt's verdict"));
                    }
                    open = Some((y, Vec::new()));
                }
                TranscriptEvent::Trial {
                    trial_index,
                    readout,
                    candidate_order,
                } => {
                    if open.is_none() || pending.is_some() {
                        return Err(bad("trial outside an attempt"));
                    }
                    pending = Some((trial_index, readout, candidate_order));
                }
                TranscriptEvent::OrderVerdict {
                    trial_index,
                    correct,
                } => {
                    let (idx, readout, cand) = pending
                        .take()
                        .ok_or_else(|| bad("verdict without a trial"))?;
                    if idx != trial_index {
                        return Err(bad("verdict for a different trial"));
                    }
                    open.as_mut().unwrap().1.push(OrderResult {
                        trial_index,
                        readout,
                        candidate_order: cand,
                        verified: correct,
                    });
                }
                TranscriptEvent::FactorVerdict {
                    y,
                    outcome,
                    order,
                    factors,
                } => {
                    let (open_y, trials) =
                        open.take().ok_or_else(|| bad("verdict without new_y"))?;
                    if open_y != y || pending.is_some() {
                        return Err(bad("attempt verdict does not match its opening"));
                    }
                    attempts.push(AttemptRecord {
                        y,
                        outcome,
                        order,
                        trials,
                        factors,
                    });
                }
                TranscriptEvent::Summary {
                    total_trials,
                    elapsed_secs,
                    result,
                    warning,
                } => {
                    if open.is_some() {
                        return Err(bad("summary inside an open attempt"));
                    }
                    return Ok(FactoringHistory {
                        params: params.ok_or_else(|| bad("missing banner"))?,
                        safe_qubits: safe.ok_or_else(|| bad("missing safe_l_hint"))?,
                        attempts,
                        total_trials,
                        elapsed_secs,
                        result,
                        warning,
                    });
                }
            }
        }
        Err(bad("missing summary"))
    }
}

pub fn write_jsonl_event<W: Write>(out: &mut W, event: &TranscriptEvent) -> Result<()> {
    serde_json::to_writer(&mut *out, event)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<TranscriptEvent>> {
    let mut events = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line)?);
    }
    Ok(events)
}

/// Turns events into the sentences of the classic transcript.
#[derive(Debug, Default)]
pub struct TextRenderer {
    n: u64,
    qubits: u32,
    max_trials: u32,
    ceiling: Option<u64>,
    seed: u64,
    /// Print a line for every `y` rejected by the order ceiling.
    pub show_rejected: bool,
    rejected: u64,
    pending_y: Option<u64>,
}

impl TextRenderer {
    pub fn new(show_rejected: bool) -> Self {
        TextRenderer {
            show_rejected,
            ..Default::default()
        }
    }

    pub fn render(&mut self, event: &TranscriptEvent) -> Vec<String> {
        let n = self.n;
        match event {
            TranscriptEvent::Banner { params } => {
                self.n = params.n;
                self.qubits = params.qubits;
                self.max_trials = params.max_trials;
                self.ceiling = params.order_ceiling;
                self.seed = params.seed;
                vec![format!("The number to be factored is {}.", params.n)]
            }
            TranscriptEvent::SafeLHint { safe_qubits } => vec![
                format!("The safe number of qubits needed to factor this number is {safe_qubits}."),
                format!(
                    "The number of qubits used in the work register is {}.",
                    self.qubits
                ),
                format!("The random seed for this run is {}.", self.seed),
            ],
            TranscriptEvent::NewY { y } => {
                self.pending_y = Some(*y);
                vec![]
            }
            TranscriptEvent::Trial {
                trial_index,
                readout,
                candidate_order,
            } => {
                let mut lines = vec![];
                if let Some(y) = self.pending_y.take() {
                    lines.push(format!("Finding order of y = {y}."));
                }
                lines.push(format!("Trial #{trial_index}."));
                lines.push(format!(
                    "The readout value from the work register is {readout}."
                ));
                lines.push(format!(
                    "The order found using this readout value is {candidate_order}."
                ));
                lines
            }
            TranscriptEvent::OrderVerdict { correct, .. } => vec![if *correct {
                "The quantum computer has found the correct order.".to_string()
            } else {
                "The order is incorrect, the quantum computer will be reset to try again."
                    .to_string()
            }],
            TranscriptEvent::FactorVerdict {
                y,
                outcome,
                factors,
                ..
            } => {
                self.pending_y = None;
                let factor_line = |(a, b): (u64, u64)| {
                    format!("The factors of {n} are determined to be {a} and {b}.")
                };
                match outcome {
                    AttemptOutcome::OrderOdd => {
                        vec!["The order is odd, hence a new value of y will be chosen.".into()]
                    }
                    AttemptOutcome::TrivialFactors => vec![
                        factor_line(factors.unwrap_or((n, 1))),
                        "The factoring has failed, hence a new value of y will be chosen.".into(),
                    ],
                    AttemptOutcome::Success => vec![
                        factor_line(factors.unwrap_or((n, 1))),
                        "The program has succeeded and will now terminate.".into(),
                    ],
                    AttemptOutcome::SharedFactorShortcut => {
                        let pair = factors.unwrap_or((n, 1));
                        vec![
                            format!(
                                "The randomly chosen y = {y} shares the factor {} with {n}.",
                                pair.0
                            ),
                            factor_line(pair),
                            "The program has succeeded and will now terminate.".into(),
                        ]
                    }
                    AttemptOutcome::OrderCeilingRejected => {
                        self.rejected += 1;
                        if self.show_rejected {
                            vec![format!(
                                "The order of y = {y} exceeds the ceiling of {}, hence a new value of y will be chosen.",
                                self.ceiling.unwrap_or(n)
                            )]
                        } else {
                            vec![]
                        }
                    }
                    AttemptOutcome::TrialBudgetExhausted => vec![format!(
                        "The maximum of {} trials has been used up without finding the order of y = {y}.",
                        self.max_trials
                    )],
                }
            }
            TranscriptEvent::Summary {
                total_trials,
                elapsed_secs,
                result,
                warning,
            } => {
                let mut lines = vec![];
                if self.rejected > 0 && !self.show_rejected {
                    lines.push(format!(
                        "{} randomly chosen values of y were skipped because their order exceeds {}.",
                        self.rejected,
                        self.ceiling.unwrap_or(n)
                    ));
                }
                match result {
                    Factorization::Factors(..) => lines.push(format!(
                        "This simulation took {elapsed_secs:.3} seconds and {total_trials} trials to factor {n}."
                    )),
                    Factorization::Failed(_) => lines.push(format!(
                        "The program was unable to factor {n} in the maximum of {} trials permitted to it.",
                        self.max_trials
                    )),
                }
                if let Some(w) = warning {
                    lines.push(format!("Warning: {w}."));
                }
                lines
            }
        }
    }
}

/// Renders a whole history as text lines.
pub fn render_text(history: &FactoringHistory, show_rejected: bool) -> Vec<String> {
    let mut renderer = TextRenderer::new(show_rejected);
    history
        .events()
        .iter()
        .flat_map(|e| renderer.render(e))
        .collect()
}

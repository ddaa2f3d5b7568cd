//! Register sizing and the readout probability model.
//!
//! For order `r` and `q = 2^L` readout values, the probability of reading `c`
//! is `(r / q^2) * sin^2(theta q / 2r) / sin^2(theta / 2)` with
//! `theta = 2 pi (rc - m_c q) / q`. Writing `delta = rc - m_c q`, the two
//! sine arguments become `pi delta / r` and `pi delta / q`; `delta` is formed
//! exactly in integers and the first argument is reduced mod `r` before any
//! floating point is involved.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::{ceil_log2, is_prime, isqrt};

/// Largest N accepted (10 digits).
pub const MAX_N: u64 = 9_999_999_999;

/// Largest work register. Keeps `r * c` inside `u128` for every 10-digit N.
pub const MAX_QUBITS: u32 = 90;

pub const DEFAULT_MAX_TRIALS: u32 = 100;

/// How the order ceiling is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderCeiling {
    /// `floor(sqrt(N))`.
    #[default]
    Sqrt,
    Disabled,
    Fixed(u64),
}

impl OrderCeiling {
    pub fn resolve(self, n: u64) -> Option<u64> {
        match self {
            OrderCeiling::Sqrt => Some(isqrt(n)),
            OrderCeiling::Disabled => None,
            OrderCeiling::Fixed(k) => Some(k),
        }
    }
}

impl std::str::FromStr for OrderCeiling {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sqrt" => Ok(OrderCeiling::Sqrt),
            "none" => Ok(OrderCeiling::Disabled),
            other => other
                .parse::<u64>()
                .ok()
                .filter(|&k| k > 0)
                .map(OrderCeiling::Fixed)
                .ok_or_else(|| format!("expected sqrt, none or a positive integer, got {other:?}")),
        }
    }
}

/// Everything that parameterizes one factoring session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoringParams {
    pub n: u64,
    pub qubits: u32,
    pub aux_qubits: u32,
    pub max_trials: u32,
    pub order_ceiling: Option<u64>,
    pub seed: u64,
}

impl FactoringParams {
    /// Validates `n` and picks the safe register size when `qubits` is `None`.
    pub fn new(n: u64, qubits: Option<u32>) -> Result<Self> {
        let safe = safe_qubits(n)?;
        let qubits = qubits.unwrap_or(safe);
        let min = ceil_log2(n as u128);
        if !(min..=MAX_QUBITS).contains(&qubits) {
            return Err(Error::InvalidQubits {
                n,
                qubits,
                min,
                max: MAX_QUBITS,
            });
        }
        Ok(FactoringParams {
            n,
            qubits,
            aux_qubits: aux_qubits(n),
            max_trials: DEFAULT_MAX_TRIALS,
            order_ceiling: OrderCeiling::Sqrt.resolve(n),
            seed: 0,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_trials(mut self, max_trials: u32) -> Self {
        self.max_trials = max_trials;
        self
    }

    pub fn with_order_ceiling(mut self, ceiling: OrderCeiling) -> Self {
        self.order_ceiling = ceiling.resolve(self.n);
        self
    }

    /// Number of readout values, `2^qubits`.
    pub fn q(&self) -> u128 {
        1u128 << self.qubits
    }
}

fn check_range(n: u64) -> Result<()> {
    if n > MAX_N {
        return Err(Error::InputTooLarge(n));
    }
    if n < 4 {
        return Err(Error::InputTooSmall(n));
    }
    Ok(())
}

/// Smallest `L` with `2^L >= N^2`.
pub fn safe_qubits(n: u64) -> Result<u32> {
    check_range(n)?;
    if is_prime(n) {
        return Err(Error::PrimeInput(n));
    }
    Ok(ceil_log2(n as u128 * n as u128))
}

/// `L'` with `2^(L'-1) < N <= 2^L'`.
pub fn aux_qubits(n: u64) -> u32 {
    ceil_log2(n as u128)
}

/// Position of a readout relative to the nearest multiple of `q` in `r * c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaGeometry {
    pub c: u128,
    pub m_c: u128,
    /// `r * c - m_c * q`, in `(-q/2, q/2]`.
    pub offset: i128,
    pub theta_c: f64,
}

pub fn theta(c: u128, r: u64, q: u128) -> ThetaGeometry {
    assert!(c < q && r >= 1);
    let rc = r as u128 * c;
    let mut m_c = rc / q;
    let rem = rc % q;
    let offset = if 2 * rem > q {
        m_c += 1;
        rem as i128 - q as i128
    } else {
        rem as i128
    };
    ThetaGeometry {
        c,
        m_c,
        offset,
        theta_c: 2.0 * PI * (offset as f64 / q as f64),
    }
}

/// Probability of reading `c` from the work register when the order is `r`.
pub fn prob(c: u128, r: u64, q: u128) -> f64 {
    assert!(r as u128 <= q, "order {r} exceeds readout count {q}");
    let offset = theta(c, r, q).offset;
    prob_from_offset(offset, r, q)
}

pub(crate) fn prob_from_offset(offset: i128, r: u64, q: u128) -> f64 {
    if offset == 0 {
        return 1.0 / r as f64;
    }
    // sin^2 has period pi, so reduce offset/r to a centered residue
    let r_i = r as i128;
    let mut red = offset.rem_euclid(r_i);
    if 2 * red > r_i {
        red -= r_i;
    }
    if red == 0 {
        return 0.0;
    }
    let num = (PI * red as f64 / r as f64).sin();
    let qf = q as f64;
    let den = qf * (PI * (offset as f64 / qf)).sin();
    let ratio = num / den;
    r as f64 * ratio * ratio
}

/// The `r` readouts nearest `m q / r` for `m = 0..r` (ties round down),
/// ascending.
pub fn dominant_readouts(r: u64, q: u128) -> Vec<u128> {
    assert!(r >= 1 && r as u128 <= q);
    let r128 = r as u128;
    (0..r128)
        .map(|m| {
            let num = m * q;
            let c = num / r128;
            if 2 * (num - c * r128) > r128 {
                c + 1
            } else {
                c
            }
        })
        .collect()
}

/// Total probability carried by the dominant readouts.
pub fn dominant_mass(r: u64, q: u128) -> f64 {
    dominant_readouts(r, q).iter().map(|&c| prob(c, r, q)).sum()
}

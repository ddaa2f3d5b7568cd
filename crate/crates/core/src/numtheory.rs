//! Number-theoretic primitives used by the factoring loop.
//!
//! Everything here works on machine integers: moduli are at most 10 digits,
//! so products fit in `u128`, and readout values (up to `2^90`) fit in `u128`
//! as well. All functions are pure.

use std::collections::BTreeMap;

use thiserror::Error;

/// Errors from the order oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("{y} is not coprime to {n} (gcd = {gcd})")]
    NotCoprime { y: u64, n: u64, gcd: u64 },
    #[error("order exceeds the ceiling of {ceiling}")]
    OrderExceedsCeiling { ceiling: u64 },
}

/// A continued-fraction convergent `numerator / denominator` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Convergent {
    pub numerator: u128,
    pub denominator: u128,
}

/// Greatest common divisor by the Euclidean algorithm.
///
/// Panics if both arguments are zero.
pub fn gcd(a: u64, b: u64) -> u64 {
    assert!(a != 0 || b != 0, "gcd(0, 0) is undefined");
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[inline]
pub fn mulmod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

/// `base^exp mod n` by left-to-right square and multiply.
pub fn modpow(base: u64, exp: u64, n: u64) -> u64 {
    assert!(n >= 1);
    if n == 1 {
        return 0;
    }
    let base = base % n;
    let mut acc = 1u64;
    for bit in (0..64 - exp.leading_zeros()).rev() {
        acc = mulmod(acc, acc, n);
        if (exp >> bit) & 1 == 1 {
            acc = mulmod(acc, base, n);
        }
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve primes as witnesses are
/// exact for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in WITNESSES {
        let mut x = modpow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Finds a nontrivial divisor of an odd composite `n` (Pollard rho, Brent's
/// cycle detection with batched gcds).
fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n % 2 == 1 && !is_prime(n));
    const BATCH: u64 = 128;
    for c in 1u64.. {
        let f = |x: u64| (mulmod(x, x, n) + c) % n;
        let (mut x, mut y, mut ys) = (2u64, 2u64, 2u64);
        let mut g = 1u64;
        let mut power = 1u64;
        let mut acc = 1u64;
        while g == 1 {
            x = y;
            for _ in 0..power {
                y = f(y);
            }
            let mut k = 0;
            while k < power && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(power - k) {
                    y = f(y);
                    acc = mulmod(acc, x.abs_diff(y), n);
                }
                g = gcd(acc, n);
                k += BATCH;
            }
            power *= 2;
        }
        if g == n {
            // batch overshot; replay one step at a time
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

/// Prime factorization as an ordered map prime -> exponent.
pub fn factorize(n: u64) -> BTreeMap<u64, u32> {
    let mut out = BTreeMap::new();
    let mut n = n;
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        while n.is_multiple_of(p) {
            *out.entry(p).or_insert(0) += 1;
            n /= p;
        }
    }
    let mut stack = vec![];
    if n > 1 {
        stack.push(n);
    }
    while let Some(m) = stack.pop() {
        if is_prime(m) {
            *out.entry(m).or_insert(0) += 1;
        } else {
            let d = pollard_rho(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    out
}

/// Carmichael's lambda, returned in factored form.
fn carmichael_factored(n: u64) -> BTreeMap<u64, u32> {
    let mut lambda: BTreeMap<u64, u32> = BTreeMap::new();
    let mut merge = |f: BTreeMap<u64, u32>| {
        for (p, e) in f {
            let slot = lambda.entry(p).or_insert(0);
            *slot = (*slot).max(e);
        }
    };
    for (p, k) in factorize(n) {
        if p == 2 {
            let e = match k {
                1 => 0,
                2 => 1,
                _ => k - 2,
            };
            if e > 0 {
                merge(BTreeMap::from([(2, e)]));
            }
        } else {
            let mut f = factorize(p - 1);
            if k > 1 {
                *f.entry(p).or_insert(0) += k - 1;
            }
            merge(f);
        }
    }
    lambda
}

/// Exact order oracle for a fixed modulus.
///
/// Factors the group exponent once; each query then costs a handful of
/// modular exponentiations.
#[derive(Debug, Clone)]
pub struct OrderOracle {
    n: u64,
    lambda: u64,
    lambda_primes: Vec<u64>,
}

impl OrderOracle {
    pub fn new(n: u64) -> Self {
        assert!(n >= 2);
        let factored = carmichael_factored(n);
        let lambda = factored.iter().map(|(p, e)| p.pow(*e)).product();
        OrderOracle {
            n,
            lambda,
            lambda_primes: factored.keys().copied().collect(),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    /// The group exponent lambda(n).
    pub fn exponent(&self) -> u64 {
        self.lambda
    }

    pub fn order(&self, y: u64) -> Result<u64, OrderError> {
        let n = self.n;
        let g = gcd(y % n, n);
        if g != 1 {
            return Err(OrderError::NotCoprime { y, n, gcd: g });
        }
        let mut r = self.lambda;
        for &p in &self.lambda_primes {
            while r.is_multiple_of(p) && modpow(y, r / p, n) == 1 {
                r /= p;
            }
        }
        Ok(r)
    }

    pub fn order_within(&self, y: u64, ceiling: Option<u64>) -> Result<u64, OrderError> {
        let r = self.order(y)?;
        match ceiling {
            Some(ceiling) if r > ceiling => Err(OrderError::OrderExceedsCeiling { ceiling }),
            _ => Ok(r),
        }
    }
}

/// Least `r >= 1` with `y^r = 1 (mod n)`.
///
/// With a ceiling, walks `y, y^2, ..., y^ceiling` and gives up past it.
/// Without one, uses [`OrderOracle`].
pub fn multiplicative_order(y: u64, n: u64, ceiling: Option<u64>) -> Result<u64, OrderError> {
    assert!(n >= 2);
    let g = gcd(y % n, n);
    if g != 1 {
        return Err(OrderError::NotCoprime { y, n, gcd: g });
    }
    match ceiling {
        None => OrderOracle::new(n).order(y),
        Some(ceiling) => {
            let base = y % n;
            let mut acc = base;
            for r in 1..=ceiling {
                if acc == 1 {
                    return Ok(r);
                }
                acc = mulmod(acc, base, n);
            }
            Err(OrderError::OrderExceedsCeiling { ceiling })
        }
    }
}

/// The convergent of `c / q` with the largest denominator strictly below
/// `denom_bound`.
pub fn convergents(c: u128, q: u128, denom_bound: u128) -> Convergent {
    assert!(q > 0 && c < q, "readout {c} out of range for q = {q}");
    assert!(denom_bound >= 2);
    let (mut num, mut den) = (c, q);
    // (h_{k-2}, h_{k-1}) and (k_{k-2}, k_{k-1})
    let (mut h_prev, mut h) = (0u128, 1u128);
    let (mut k_prev, mut k) = (1u128, 0u128);
    let mut best = Convergent {
        numerator: 0,
        denominator: 1,
    };
    while den != 0 {
        let a = num / den;
        (num, den) = (den, num - a * den);
        let Some(k_next) = a.checked_mul(k).and_then(|v| v.checked_add(k_prev)) else {
            break;
        };
        if k_next >= denom_bound {
            break;
        }
        let h_next = a * h + h_prev;
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
        best = Convergent {
            numerator: h,
            denominator: k,
        };
    }
    best
}

/// Ceiling of `log2(n)` for `n >= 1`.
pub fn ceil_log2(n: u128) -> u32 {
    assert!(n >= 1);
    128 - (n - 1).leading_zeros()
}

/// Integer square root (floor).
pub fn isqrt(n: u64) -> u64 {
    let mut x = (n as f64).sqrt() as u64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

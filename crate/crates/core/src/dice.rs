//! Dice sums for `n` dice and waiting times until `n` consecutive sixes.

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exact::{binomial, BigReal, ExactInt, ExactRat, Precision};

/// `N_n(k)` for `n <= k <= 6n`: ordered rolls of `n` dice with face sum `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumCountTable {
    n: u32,
    counts: Vec<ExactInt>,
}

impl SumCountTable {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn min_sum(&self) -> u32 {
        self.n
    }

    pub fn max_sum(&self) -> u32 {
        6 * self.n
    }

    /// Zero outside `n..=6n`.
    pub fn get(&self, k: u32) -> ExactInt {
        if k < self.n || k > 6 * self.n {
            return Integer::new();
        }
        self.counts[(k - self.n) as usize].clone()
    }

    pub fn counts(&self) -> &[ExactInt] {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &ExactInt)> {
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.n + i as u32, c))
    }

    pub fn total(&self) -> ExactInt {
        self.counts.iter().sum()
    }

    /// `P(lo <= sum <= hi)`.
    pub fn prob_range(&self, lo: u32, hi: u32) -> ExactRat {
        let hits: Integer = (lo..=hi).map(|k| self.get(k)).sum();
        Rational::from((hits, Integer::from(6).pow(self.n)))
    }
}

/// `N_n(k) = sum_i C(n,i) C(-n, k-n-6i) (-1)^(k-n+i)`.
pub fn sum_count_closed(n: u32, k: u32) -> Result<ExactInt> {
    if n < 1 {
        return invalid("need at least one die");
    }
    if k < n || k > 6 * n {
        return invalid(format!("sum {k} is outside [{n}, {}]", 6 * n));
    }
    let (n, k) = (n as i64, k as i64);
    let mut total = Integer::new();
    for i in 0..=(k - n) / 6 {
        let term = binomial(n, i) * binomial(-n, k - n - 6 * i);
        if (k - n + i) % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

/// Full table by repeated convolution with one die.
pub fn sum_counts_convolution(n: u32) -> Result<SumCountTable> {
    if n < 1 {
        return invalid("need at least one die");
    }
    // counts indexed by sum - dice
    let mut counts = vec![Integer::from(1); 6];
    for dice in 2..=n {
        let mut next = vec![Integer::new(); 5 * dice as usize + 1];
        for (s, c) in counts.iter().enumerate() {
            for face in 0..6 {
                next[s + face] += c;
            }
        }
        counts = next;
    }
    Ok(SumCountTable { n, counts })
}

/// Distinct unordered outcome patterns of `n` dice: `C(n + 5, n)`.
pub fn multiset_pattern_count(n: u32) -> ExactInt {
    binomial(n as i64 + 5, n as i64)
}

/// `E(X_n) = 6 + 6^2 + ... + 6^n`.
pub fn wait_expectation(n: u32) -> Result<ExactInt> {
    check_run(n)?;
    Ok((1..=n).map(|i| Integer::from(6).pow(i)).sum())
}

/// `Var(X_n) = (6^(n+1)/25)(6^(n+1) - 10n - 5) - 6/25`, checked against
/// `E(X_n)^2 - (6/25)((10n - 7) 6^n + 7)`.
pub fn wait_variance(n: u32) -> Result<ExactInt> {
    check_run(n)?;
    let six_n1 = Integer::from(6).pow(n + 1);
    let ni = n as i64;
    let first = Rational::from((&six_n1 * (&six_n1 - Integer::from(10 * ni + 5)), 25))
        - Rational::from((6, 25));
    let residue: Integer = Integer::from(6).pow(n) * (10 * ni - 7) + 7;
    if !residue.is_divisible_u(25) {
        return Err(Error::ProbeFailed(format!(
            "(10n-7)6^n+7 is not a multiple of 25 at n = {n}"
        )));
    }
    let mean = wait_expectation(n)?;
    let second = Rational::from(mean.square()) - Rational::from((6 * residue, 25));
    if first != second {
        return Err(Error::ProbeFailed(format!("variance forms disagree at n = {n}")));
    }
    if *first.denom() != 1 {
        return Err(Error::ProbeFailed(format!("variance is not an integer at n = {n}")));
    }
    Ok(first.into_numer_denom().0)
}

fn check_run(n: u32) -> Result<()> {
    if n < 1 {
        return invalid("run length must be at least 1");
    }
    Ok(())
}

/// `A_m` for `m = 0 ..= m_max`: throw sequences of length `m` whose first run
/// of `n` sixes ends at throw `m`.
pub fn wait_sequence_counts(n: u32, m_max: u64) -> Result<Vec<ExactInt>> {
    check_run(n)?;
    let n = n as usize;
    let mut a: Vec<Integer> = Vec::with_capacity(m_max as usize + 1);
    let mut window = Integer::new();
    for m in 0..=m_max as usize {
        let value = match m.cmp(&n) {
            std::cmp::Ordering::Less => Integer::new(),
            std::cmp::Ordering::Equal => Integer::from(1),
            std::cmp::Ordering::Greater => Integer::from(&window * 5),
        };
        // window = A_{m} + ... + A_{m-n+1} for the next step
        window += &value;
        if m >= n {
            window -= &a[m - n];
        }
        a.push(value);
    }
    Ok(a)
}

/// Truncated distribution of `X_n`, the number of throws until the first run
/// of `n` sixes.
#[derive(Clone, Debug)]
pub struct WaitDistribution {
    n: u32,
    counts: Vec<ExactInt>,
    /// `S_m = sum_{k<=m} A_k 6^(m-k)`, so `P(X_n <= m) = S_m / 6^m`.
    cumulative: Vec<ExactInt>,
    tail_bound: ExactRat,
}

impl WaitDistribution {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m_max(&self) -> u64 {
        self.counts.len() as u64 - 1
    }

    /// `p_m = A_m / 6^m`, zero beyond the truncation point.
    pub fn pmf(&self, m: u64) -> ExactRat {
        if m > self.m_max() {
            return Rational::new();
        }
        Rational::from((self.counts[m as usize].clone(), Integer::from(6).pow(m as u32)))
    }

    pub fn cdf(&self, m: u64) -> ExactRat {
        let m = m.min(self.m_max());
        Rational::from((
            self.cumulative[m as usize].clone(),
            Integer::from(6).pow(m as u32),
        ))
    }

    /// `P(X_n > m_max)`, exact.
    pub fn tail_bound(&self) -> &ExactRat {
        &self.tail_bound
    }

    pub fn pmf_total(&self) -> ExactRat {
        1 - self.tail_bound.clone()
    }

    /// `sum_{m <= m_max} m^power p_m`.
    pub fn truncated_moment(&self, power: u32) -> ExactRat {
        let top = self.m_max();
        let mut acc = Integer::new();
        for (m, a) in self.counts.iter().enumerate() {
            acc *= 6u32;
            if *a != 0 {
                acc += Integer::from(m as u64).pow(power) * a;
            }
        }
        Rational::from((acc, Integer::from(6).pow(top as u32)))
    }

    /// Upper bounds on the omitted first and second moments
    /// `sum_{m > M} m p_m` and `sum_{m > M} m^2 p_m`, where `M = m_max`.
    ///
    /// With `q_j = P(X_n > j)`, a run-free stretch of `a + b` throws contains
    /// run-free stretches of `a` and `b` on disjoint throws, so
    /// `q_{a+b} <= q_a q_b` and `q_{tM + j} <= rho^t` for `rho = q_M`.
    pub fn tail_moment_bounds(&self) -> Option<(ExactRat, ExactRat)> {
        let rho = self.tail_bound.clone();
        if rho >= 1 {
            return None;
        }
        let big_m = Rational::from(self.m_max());
        let one_minus = Rational::from(1 - &rho);
        let geo = Rational::from(&rho / &one_minus);
        // sum_{k>M} k p_k = M q_M + sum_{k>=M} q_k
        let first = Rational::from(&big_m * &rho) + Rational::from(&big_m * &geo);
        // sum_{k>M} k^2 p_k = M^2 q_M + sum_{k>=M} (2k+1) q_k; block t >= 1
        // contributes at most rho^t (2 (t+1) M^2 + M)
        let m2 = Rational::from(big_m.square_ref());
        let blocks = Rational::from(one_minus.square_ref()).recip() - 1;
        let second = Rational::from(&m2 * &rho) + 2 * m2 * blocks + big_m * geo;
        Some((first, second))
    }
}

/// Exact `p_m` for `m <= m_max` via `A_m = 5 (A_{m-1} + ... + A_{m-n})`.
pub fn wait_pmf(n: u32, m_max: u64) -> Result<WaitDistribution> {
    check_run(n)?;
    if m_max < n as u64 {
        return invalid(format!("m_max must be at least n = {n}"));
    }
    let counts = wait_sequence_counts(n, m_max)?;
    let mut cumulative = Vec::with_capacity(counts.len());
    let mut s = Integer::new();
    for a in &counts {
        s = s * 6u32 + a;
        cumulative.push(s.clone());
    }
    let tail_bound = 1 - Rational::from((s, Integer::from(6).pow(m_max as u32)));
    Ok(WaitDistribution {
        n,
        counts,
        cumulative,
        tail_bound,
    })
}

/// `P(X_2 = l) = sum_k C(l-k-2, k) 5^(l-k-2) / 6^l`: `k` blocks "six then
/// non-six" and `l-2k-2` single non-sixes before the final double six.
pub fn wait_pmf_closed_n2(l: u64) -> Result<ExactRat> {
    if l < 2 {
        return invalid("the first double six needs at least two throws");
    }
    let l = l as i64;
    let mut acc = Integer::new();
    for k in 0..l / 2 {
        acc += binomial(l - k - 2, k) * Integer::from(5).pow((l - k - 2) as u32);
    }
    Ok(Rational::from((acc, Integer::from(6).pow(l as u32))))
}

/// `S_n(z) = sum_k C(n-k, k) z^k`, summed directly.
pub fn fib_poly_direct(n: u32, z: &BigReal) -> BigReal {
    let mut acc = Float::new(z.prec());
    for k in 0..=n / 2 {
        let c = binomial((n - k) as i64, k as i64);
        acc += Float::with_val(z.prec(), z.pow(k)) * c;
    }
    acc
}

/// `S_n(z)` via the roots `(1 +- sqrt(1+4z)) / 2` of `x^2 = x + z`.
pub fn fib_poly_closed(n: u32, z: &BigReal) -> Result<BigReal> {
    let prec = z.prec();
    let disc = Float::with_val(prec, 1 + Float::with_val(prec, z * 4u32));
    if disc <= 0 {
        return invalid("closed form needs z > -1/4");
    }
    let root = disc.sqrt();
    let r1 = Float::with_val(prec, 1 + &root) / 2u32;
    let r2 = Float::with_val(prec, 1 - &root) / 2u32;
    let diff = Float::with_val(prec, r1.pow(n + 1) - r2.pow(n + 1));
    Ok(diff / root)
}

/// Smallest `m` with `P(X_n <= m) >= 1/2`.
///
/// Exact for short runs; for `n > 4` the cumulative sum runs in floating
/// point with ample guard bits and falls back to exact arithmetic if the
/// decision is too close to call.
pub fn wait_median(n: u32) -> Result<u64> {
    check_run(n)?;
    if n <= 4 {
        return Ok(exact_wait_median(n));
    }
    let prec = Precision::new(192)?;
    let mut cdf = prec.real(0);
    let half = prec.real(0.5);
    // p_m = (5/6) p_{m-1} + (5/36) p_{m-2} + ... + (5/6^n) p_{m-n}
    let weights: Vec<Float> = (1..=n)
        .map(|i| prec.real(5) / Float::with_val(prec.bits(), Float::u_pow_u(6, i)))
        .collect();
    let mut history: Vec<Float> = vec![prec.real(0); n as usize];
    let mut m = n as u64;
    let p_n = Float::with_val(prec.bits(), Float::u_pow_u(6, n)).recip();
    history.push(p_n.clone());
    cdf += &p_n;
    let guard = Float::with_val(prec.bits(), Float::i_exp(1, -100));
    loop {
        let gap = Float::with_val(prec.bits(), &cdf - &half);
        if gap.clone().abs() < guard {
            return Ok(exact_wait_median(n));
        }
        if gap >= 0 {
            return Ok(m);
        }
        m += 1;
        let len = history.len();
        let mut p = prec.real(0);
        for (i, w) in weights.iter().enumerate() {
            p += Float::with_val(prec.bits(), w * &history[len - 1 - i]);
        }
        cdf += &p;
        history.push(p);
        if history.len() > 2 * n as usize + 2 {
            history.drain(..history.len() - n as usize);
        }
    }
}

fn exact_wait_median(n: u32) -> u64 {
    // S_m = 6 S_{m-1} + A_m, stop once 2 S_m >= 6^m
    let n_us = n as usize;
    let mut a: Vec<Integer> = Vec::new();
    let mut window = Integer::new();
    let mut s = Integer::new();
    let mut pow = Integer::from(1);
    let mut m = 0usize;
    loop {
        let value = if m < n_us {
            Integer::new()
        } else if m == n_us {
            Integer::from(1)
        } else {
            Integer::from(&window * 5)
        };
        window += &value;
        if m >= n_us {
            window -= &a[m - n_us];
        }
        s = s * 6u32 + &value;
        a.push(value);
        if m > 0 {
            pow *= 6u32;
        }
        if Integer::from(&s * 2u32) >= pow {
            return m as u64;
        }
        m += 1;
    }
}

/// `P(X_2 = l) = (sqrt5/90)(q_1^(l-1) - q_2^(l-1))` with
/// `q_{1,2} = (5 +- 3 sqrt5)/12`.
pub fn wait_pmf_n2_binet(l: u64, prec: Precision) -> BigReal {
    let bits = prec.bits();
    let s5 = Float::with_val(bits, 5u32).sqrt();
    let q1 = Float::with_val(bits, 5 + Float::with_val(bits, &s5 * 3u32)) / 12u32;
    let q2 = Float::with_val(bits, 5 - Float::with_val(bits, &s5 * 3u32)) / 12u32;
    let e = (l - 1) as u32;
    let diff = Float::with_val(bits, q1.pow(e) - q2.pow(e));
    s5 * diff / 90u32
}

/// Row of the closed formula table for CLI/reporting.
#[derive(Clone, Debug, Serialize)]
pub struct SumCountRow {
    pub sum: u32,
    pub count: String,
}

pub fn sum_count_rows(table: &SumCountTable) -> Vec<SumCountRow> {
    table
        .iter()
        .map(|(k, c)| SumCountRow {
            sum: k,
            count: c.to_string(),
        })
        .collect()
}

//! Exact probabilities of k-fold date coincidences among `n` uniformly random
//! birthdays, with a leap-day mixture correction.
//!
//! The central quantity is `w_m(n)`, the probability that some date occurs at
//! least `m` times. Its complement counts assignments in which every date is
//! used fewer than `m` times; that count is a sum over multiplicity classes
//! `(c_1, ..., c_{m-1})`, where `c_i` dates are hit exactly `i` times:
//!
//! ```text
//! n! / prod_i ((i!)^{c_i} c_i!)  *  D (D-1) ... (D - sum c_i + 1)
//! ```
//!
//! [`NoCoincidenceCounter`] evaluates that sum exactly, level by level, with
//! shared prefactor tables. The nested sums in [`nested`] are independent
//! evaluations for `m = 3, 4, 5` that serve as cross-checks.

use std::collections::HashMap;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{invalid, Error, Result};
use crate::exact::{binomial, falling_factorial, ExactInt, ExactRat};

/// Days in a common year.
pub const YEAR_DAYS: u64 = 365;
/// Possible draws in the 6-out-of-49 lottery.
pub const LOTTERY_OUTCOMES: u64 = 13_983_816;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BirthdayModel {
    pub day_count: u64,
    pub n: u64,
    pub multiplicity: u32,
}

impl BirthdayModel {
    pub fn new(day_count: u64, n: u64, multiplicity: u32) -> Result<Self> {
        if day_count < 1 {
            return invalid("day count must be at least 1");
        }
        if multiplicity < 2 {
            return invalid(format!("multiplicity must be >= 2, got {multiplicity}"));
        }
        Ok(BirthdayModel {
            day_count,
            n,
            multiplicity,
        })
    }

    pub fn probability(&self) -> ExactRat {
        NoCoincidenceCounter::new(self.day_count, self.multiplicity).prob_at_least(self.n)
    }
}

/// Probability `p` that a single birthday falls on the special (leap) day; the
/// remaining mass is spread uniformly over the ordinary days.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeapModel {
    p: ExactRat,
}

impl LeapModel {
    pub fn new(p: ExactRat) -> Result<Self> {
        if !(0..1).contains(&p) {
            return invalid(format!("leap-day probability must lie in [0, 1), got {p}"));
        }
        Ok(LeapModel { p })
    }

    /// Leap year every fourth year: `1 / (4 * 365 + 1)`.
    pub fn julian() -> Self {
        LeapModel {
            p: Rational::from((1, 1461)),
        }
    }

    /// Full 400-year Gregorian cycle: `97 / (400 * 365 + 97)`.
    pub fn gregorian() -> Self {
        LeapModel {
            p: Rational::from((97, 400 * 365 + 97)),
        }
    }

    pub fn none() -> Self {
        LeapModel { p: Rational::new() }
    }

    pub fn p(&self) -> &ExactRat {
        &self.p
    }

    /// `P(F_i) = C(n, i) p^i (1-p)^(n-i)`: exactly `i` of `n` people are born
    /// on the special day.
    pub fn special_day_count_prob(&self, n: u64, i: u64) -> ExactRat {
        if i > n {
            return Rational::new();
        }
        let q = Rational::from(1 - &self.p);
        Rational::from(binomial(n as i64, i as i64))
            * self.p.clone().pow(i as i32)
            * q.pow((n - i) as i32)
    }
}

/// How many dates occur exactly `i` times, for `i = 1 .. m-1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiplicityClass {
    counts: Vec<u64>,
}

impl MultiplicityClass {
    pub fn new(counts: Vec<u64>) -> Self {
        MultiplicityClass { counts }
    }

    /// `counts()[i - 1]` is `c_i`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn persons(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, c)| (i as u64 + 1) * c)
            .sum()
    }

    pub fn distinct_dates(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// All classes for `n` persons with every multiplicity below `m`,
    /// in lexicographic order of `(c_2, ..., c_{m-1})`.
    pub fn enumerate(m: u32, n: u64) -> Vec<MultiplicityClass> {
        fn rec(level: u64, top: u64, rest: u64, prefix: &mut Vec<u64>, out: &mut Vec<MultiplicityClass>) {
            if level > top {
                let mut counts = vec![rest];
                counts.extend_from_slice(prefix);
                out.push(MultiplicityClass { counts });
                return;
            }
            for c in 0..=rest / level {
                prefix.push(c);
                rec(level + 1, top, rest - level * c, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(2, m as u64 - 1, n, &mut Vec::new(), &mut out);
        out
    }

    /// Number of birthday assignments over `day_count` dates realizing this
    /// class exactly.
    pub fn assignments(&self, day_count: u64) -> ExactInt {
        let n = self.persons();
        let mut ways = Integer::from(Integer::factorial(n as u32));
        for (idx, &c) in self.counts.iter().enumerate() {
            let i = idx as u32 + 1;
            let i_fact = Integer::from(Integer::factorial(i));
            ways.div_exact_mut(&i_fact.pow(c as u32));
            ways.div_exact_mut(&Integer::from(Integer::factorial(c as u32)));
        }
        ways * falling_factorial(day_count as i64, self.distinct_dates())
    }
}

/// Exact count of birthday assignments with no date used `m` or more times,
/// via the multiplicity-class sum.
///
/// Falling factorials of the day count are memoized and results are cached
/// per `n`, so threshold searches and series reuse earlier work.
#[derive(Debug, Clone)]
pub struct NoCoincidenceCounter {
    day_count: u64,
    multiplicity: u32,
    falling: Vec<Integer>,
    cache: HashMap<u64, Integer>,
}

impl NoCoincidenceCounter {
    /// `multiplicity` must be at least 2.
    pub fn new(day_count: u64, multiplicity: u32) -> Self {
        assert!(multiplicity >= 2, "multiplicity must be >= 2");
        assert!(day_count >= 1, "day count must be >= 1");
        NoCoincidenceCounter {
            day_count,
            multiplicity,
            falling: vec![Integer::from(1)],
            cache: HashMap::new(),
        }
    }

    pub fn day_count(&self) -> u64 {
        self.day_count
    }

    pub fn multiplicity(&self) -> u32 {
        self.multiplicity
    }

    fn extend_falling(&mut self, upto: u64) {
        while (self.falling.len() as u64) <= upto {
            let s = self.falling.len() as u64 - 1;
            let next = if s >= self.day_count {
                Integer::new()
            } else {
                Integer::from(&self.falling[s as usize] * (self.day_count - s))
            };
            self.falling.push(next);
        }
    }

    /// Assignments of `n` persons to dates with every date used fewer than
    /// `m` times.
    pub fn count(&mut self, n: u64) -> Integer {
        if let Some(c) = self.cache.get(&n) {
            return c.clone();
        }
        self.extend_falling(n);
        let value = ClassSum {
            multiplicity: self.multiplicity as u64,
            falling: &self.falling,
        }
        .total(n);
        self.cache.insert(n, value.clone());
        value
    }

    /// `1 - w_m(n)`.
    pub fn prob_none(&mut self, n: u64) -> ExactRat {
        let total = Integer::from(self.day_count).pow(n as u32);
        Rational::from((self.count(n), total))
    }

    /// `w_m(n)`.
    pub fn prob_at_least(&mut self, n: u64) -> ExactRat {
        1 - self.prob_none(n)
    }

    /// Leap-day mixture `w_m^G(n)`.
    pub fn prob_at_least_mixture(&mut self, n: u64, leap: &LeapModel) -> ExactRat {
        if *leap.p() == 0 {
            return self.prob_at_least(n);
        }
        let top = (self.multiplicity as u64 - 1).min(n);
        let mut none = Rational::new();
        for i in 0..=top {
            none += leap.special_day_count_prob(n, i) * self.prob_none(n - i);
        }
        1 - none
    }
}

struct ClassSum<'a> {
    multiplicity: u64,
    falling: &'a [Integer],
}

impl ClassSum<'_> {
    // W_i(r, c) = r! / ((r - ic)! (i!)^c c!): ways to pick c unordered groups of
    // size i out of r labelled persons.
    fn group_row(level: u64, r: u64) -> Vec<Integer> {
        let mut row = Vec::with_capacity((r / level + 1) as usize);
        let level_fact = Integer::from(Integer::factorial(level as u32));
        let mut w = Integer::from(1);
        row.push(w.clone());
        let mut c = 0;
        while (c + 1) * level <= r {
            let left = r - c * level;
            w *= falling_factorial(left as i64, level);
            w.div_exact_mut(&level_fact);
            w.div_exact_u_mut((c + 1) as u32);
            row.push(w.clone());
            c += 1;
        }
        row
    }

    fn total(&self, n: u64) -> Integer {
        let m = self.multiplicity;
        if m == 2 {
            return self.falling[n as usize].clone();
        }
        let row = Self::group_row(2, n);
        let parts: Vec<Integer> = row
            .par_iter()
            .enumerate()
            .map(|(c, w)| {
                let c = c as u64;
                if m == 3 {
                    Integer::from(w * &self.falling[(n - c) as usize])
                } else {
                    w * self.level(3, n - 2 * c, c)
                }
            })
            .collect();
        parts.into_iter().fold(Integer::new(), |acc, x| acc + x)
    }

    // Sum over c_level..c_{m-1} with r persons still unassigned and q distinct
    // dates used by the higher-multiplicity groups so far.
    fn level(&self, level: u64, r: u64, q: u64) -> Integer {
        let row = Self::group_row(level, r);
        let mut sum = Integer::new();
        if level == self.multiplicity - 1 {
            for (c, w) in row.iter().enumerate() {
                let c = c as u64;
                let dates = q + r - (level - 1) * c;
                sum += w * &self.falling[dates as usize];
            }
        } else {
            for (c, w) in row.iter().enumerate() {
                let c = c as u64;
                sum += w * self.level(level + 1, r - level * c, q + c);
            }
        }
        sum
    }
}

/// `w_n`: all `n` birthdays distinct among `day_count` dates.
pub fn prob_all_distinct(n: u64, day_count: u64) -> ExactRat {
    if n > day_count {
        return Rational::new();
    }
    Rational::from((
        falling_factorial(day_count as i64, n),
        Integer::from(day_count).pow(n as u32),
    ))
}

/// Exactly one pair of coinciding birthdays, all others distinct:
/// `C(n, 2) D (D-1) ... (D-n+2) / D^n`.
pub fn prob_exactly_one_collision(n: u64, day_count: u64) -> Result<ExactRat> {
    if n < 2 {
        return invalid(format!("need at least two draws, got {n}"));
    }
    let ways = binomial(n as i64, 2) * falling_factorial(day_count as i64, n - 1);
    Ok(Rational::from((ways, Integer::from(day_count).pow(n as u32))))
}

/// `w_n^G`, all birthdays distinct when the special day has probability `p`
/// and the remaining mass is uniform over 365 dates.
///
/// Evaluated as the mixture `(1-p)^n w_n + n p (1-p)^(n-1) w_(n-1)`. For
/// `p = 1/1461` the single-product closed form is evaluated too and must agree
/// exactly.
pub fn prob_all_distinct_gregorian(n: u64, leap: &LeapModel) -> ExactRat {
    let mut value = leap.special_day_count_prob(n, 0) * prob_all_distinct(n, YEAR_DAYS);
    if n >= 1 {
        value += leap.special_day_count_prob(n, 1) * prob_all_distinct(n - 1, YEAR_DAYS);
    }
    if *leap.p() == Rational::from((1, 1461)) && n >= 1 {
        let closed = julian_distinct_closed_form(n);
        assert_eq!(closed, value, "closed form and mixture disagree at n = {n}");
    }
    value
}

/// `(1 - 3(n-1)/1461) * prod_{k=0}^{n-2} (1 - (4k+1)/1461)`, valid for `n >= 1`.
pub fn julian_distinct_closed_form(n: u64) -> ExactRat {
    assert!(n >= 1);
    let mut value = Rational::from((1461 - 3 * (n as i64 - 1), 1461));
    for k in 0..n as i64 - 1 {
        value *= Rational::from((1461 - 4 * k - 1, 1461));
    }
    value
}

/// `w_m(n)` over `day_count` equally likely dates.
pub fn prob_multiplicity_at_least(m: u32, n: u64, day_count: u64) -> Result<ExactRat> {
    check_multiplicity(m)?;
    if day_count < 1 {
        return invalid("day count must be at least 1");
    }
    Ok(NoCoincidenceCounter::new(day_count, m).prob_at_least(n))
}

/// [`prob_multiplicity_at_least`] plus, for `m` in 3..=5, the explicit nested
/// sums (direct and `w_n`-prefactored). Fails if any route disagrees.
pub fn prob_multiplicity_at_least_verified(m: u32, n: u64, day_count: u64) -> Result<ExactRat> {
    let value = prob_multiplicity_at_least(m, n, day_count)?;
    let mut routes = Vec::new();
    match m {
        3 => {
            routes.push(("direct", nested::w3_direct(n, day_count)));
            if n <= day_count {
                routes.push(("prefactored", nested::w3_prefactored(n, day_count)));
            }
        }
        4 => {
            routes.push(("direct", nested::w4_direct(n, day_count)));
            if n <= day_count {
                routes.push(("prefactored", nested::w4_prefactored(n, day_count)));
            }
        }
        5 => {
            routes.push(("direct", nested::w5_direct(n, day_count)));
            if n <= day_count {
                routes.push(("prefactored", nested::w5_prefactored(n, day_count)));
            }
        }
        _ => {}
    }
    for (name, other) in routes {
        if other != value {
            return Err(Error::ProbeFailed(format!(
                "{name} nested sum for w_{m}({n}) differs from the class sum"
            )));
        }
    }
    Ok(value)
}

/// `w_m^G(n) = 1 - sum_{i<m} P(F_i) (1 - w_m(n-i))` over `day_count` ordinary
/// dates plus one special date.
pub fn prob_multiplicity_gregorian(
    m: u32,
    n: u64,
    leap: &LeapModel,
    day_count: u64,
) -> Result<ExactRat> {
    check_multiplicity(m)?;
    Ok(NoCoincidenceCounter::new(day_count, m).prob_at_least_mixture(n, leap))
}

fn check_multiplicity(m: u32) -> Result<()> {
    if m < 2 {
        return invalid(format!("multiplicity must be >= 2, got {m}"));
    }
    Ok(())
}

/// Smallest `n` with `w_m(n) >= alpha` over 365 dates (with the leap-day
/// mixture when `leap` is given).
///
/// `w_m` is strictly increasing in `n` while below 1, so an exponential
/// bracket followed by bisection finds the threshold.
pub fn threshold_search(m: u32, alpha: &ExactRat, leap: Option<&LeapModel>) -> Result<u64> {
    let mut counter = NoCoincidenceCounter::new(YEAR_DAYS, m.max(2));
    check_multiplicity(m)?;
    threshold_search_with(&mut counter, alpha, leap)
}

/// [`threshold_search`] reusing an existing counter's cache.
pub fn threshold_search_with(
    counter: &mut NoCoincidenceCounter,
    alpha: &ExactRat,
    leap: Option<&LeapModel>,
) -> Result<u64> {
    let start = counter.multiplicity() as u64;
    threshold_search_from(counter, alpha, leap, start)
}

/// Threshold search bracketing outward from `start`, a guess for the answer.
/// Steps double in whichever direction the first evaluation points.
pub fn threshold_search_from(
    counter: &mut NoCoincidenceCounter,
    alpha: &ExactRat,
    leap: Option<&LeapModel>,
    start: u64,
) -> Result<u64> {
    if *alpha <= 0 || *alpha >= 1 {
        return invalid(format!("alpha must lie strictly between 0 and 1, got {alpha}"));
    }
    let m = counter.multiplicity() as u64;
    let mut eval = |n: u64| match leap {
        Some(l) => counter.prob_at_least_mixture(n, l),
        None => counter.prob_at_least(n),
    };
    // w(m - 1) = 0 < alpha, so m - 1 is always a valid lower end
    let floor = m - 1;
    let start = start.max(m);
    let (mut lo, mut hi);
    let mut step = 1;
    if eval(start) >= *alpha {
        hi = start;
        loop {
            let probe = hi.saturating_sub(step).max(floor);
            if probe == floor || eval(probe) < *alpha {
                lo = probe;
                break;
            }
            hi = probe;
            step *= 2;
        }
    } else {
        lo = start;
        loop {
            let probe = lo + step;
            if eval(probe) >= *alpha {
                hi = probe;
                break;
            }
            lo = probe;
            step *= 2;
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if eval(mid) >= *alpha {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Thresholds `n_{m,alpha}` for every `m` in `multiplicities` and every alpha
/// (which must be increasing). Each search starts from the previous answer,
/// and the leap-day search starts from the plain one.
pub fn threshold_table(
    multiplicities: &[u32],
    alphas: &[ExactRat],
    leap: Option<&LeapModel>,
) -> Result<Vec<Vec<u64>>> {
    if alphas.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("alphas must be strictly increasing");
    }
    let mut table = Vec::with_capacity(multiplicities.len());
    for &m in multiplicities {
        check_multiplicity(m)?;
        let mut counter = NoCoincidenceCounter::new(YEAR_DAYS, m);
        let mut row = Vec::with_capacity(alphas.len());
        let mut guess = m as u64;
        for alpha in alphas {
            let plain = threshold_search_from(&mut counter, alpha, None, guess)?;
            let value = match leap {
                Some(l) => threshold_search_from(&mut counter, alpha, Some(l), plain)?,
                None => plain,
            };
            row.push(value);
            guess = plain;
        }
        table.push(row);
    }
    Ok(table)
}

/// The explicit nested sums for triple, quadruple and quintuple birthdays.
///
/// These follow the classical derivation term by term (pair/triple/quadruple
/// counts, prefactor tables `p_1, p_2, p_3`, and the `p_0` product) and share
/// no code with [`NoCoincidenceCounter`].
pub mod nested {
    use super::*;

    // Pascal rows 0..=n.
    fn pascal(n: u64) -> Vec<Vec<Integer>> {
        let mut rows: Vec<Vec<Integer>> = vec![vec![Integer::from(1)]];
        for r in 1..=n as usize {
            let prev = &rows[r - 1];
            let mut row = Vec::with_capacity(r + 1);
            row.push(Integer::from(1));
            for k in 1..r {
                row.push(Integer::from(&prev[k - 1] + &prev[k]));
            }
            row.push(Integer::from(1));
            rows.push(row);
        }
        rows
    }

    // Numerators of p_i(c) = prod_{t=1}^c [(it-i+1)...(it-1) / (i-1)!] / D^{(i-1)c}.
    fn prefactor_numerators(i: i64, upto: u64) -> Vec<Integer> {
        let denom = Integer::from(Integer::factorial(i as u32 - 1));
        let mut out = vec![Integer::from(1)];
        for t in 1..=upto as i64 {
            let mut f = Integer::from(1);
            for s in 1..i {
                f *= i * t - s;
            }
            f.div_exact_mut(&denom);
            let next = Integer::from(&out[t as usize - 1] * &f);
            out.push(next);
        }
        out
    }

    // p_0 numerators: prod_{mu=1}^{t} (D - mu), over D^t.
    fn p0_numerators(d: u64, upto: u64) -> Vec<Integer> {
        let mut out = vec![Integer::from(1)];
        for t in 1..=upto {
            let next = Integer::from(&out[t as usize - 1] * (d as i64 - t as i64));
            out.push(next);
        }
        out
    }

    // Sum of numerators over the common denominator D^(n-1).
    fn finish(sum: Integer, n: u64, d: u64) -> ExactRat {
        let denom = Integer::from(d).pow(n as u32 - 1);
        1 - Rational::from((sum, denom))
    }

    /// `1 - sum_k C(n,2k) prod_{i<=k} (2i-1)/D prod_{i<n-k} (1 - i/D)`.
    pub fn w3_direct(n: u64, d: u64) -> ExactRat {
        if n == 0 {
            return Rational::new();
        }
        let p1 = prefactor_numerators(2, n / 2);
        let p0 = p0_numerators(d, n);
        let mut sum = Integer::new();
        for k in 0..=n / 2 {
            sum += binomial(n as i64, 2 * k as i64) * &p1[k as usize] * &p0[(n - k - 1) as usize];
        }
        finish(sum, n, d)
    }

    /// `1 - w_n sum_k C(n,2k) prod_{i<=k} (2i-1)/(D-(n-i))`, valid for `n <= D`.
    pub fn w3_prefactored(n: u64, d: u64) -> ExactRat {
        assert!(n <= d);
        let (n, d) = (n as i64, d as i64);
        let mut sum = Rational::new();
        let mut prod = Rational::from(1);
        for k in 0..=n / 2 {
            if k > 0 {
                prod *= Rational::from((2 * k - 1, d - (n - k)));
            }
            sum += Rational::from(binomial(n, 2 * k)) * &prod;
        }
        1 - prob_all_distinct(n as u64, d as u64) * sum
    }

    /// Quadruple-birthday nested sum over pairs `j` and triples `k`.
    pub fn w4_direct(n: u64, d: u64) -> ExactRat {
        if n == 0 {
            return Rational::new();
        }
        let c = pascal(n);
        let p1 = prefactor_numerators(2, n / 2);
        let p2 = prefactor_numerators(3, n / 3);
        let p0 = p0_numerators(d, n);
        let mut sum = Integer::new();
        for j in 0..=n / 2 {
            let r = n - 2 * j;
            let outer = Integer::from(&c[n as usize][2 * j as usize] * &p1[j as usize]);
            let mut inner = Integer::new();
            for k in 0..=r / 3 {
                let t = Integer::from(&c[r as usize][3 * k as usize] * &p2[k as usize]);
                inner += t * &p0[(n - j - 2 * k - 1) as usize];
            }
            sum += outer * inner;
        }
        finish(sum, n, d)
    }

    /// The `w_n`-prefactored quadruple form, valid for `n <= D`.
    pub fn w4_prefactored(n: u64, d: u64) -> ExactRat {
        assert!(n <= d);
        let (ni, di) = (n as i64, d as i64);
        let p2 = prefactor_numerators(3, n / 3);
        let mut sum = Rational::new();
        let mut outer = Rational::from(1);
        for j in 0..=ni / 2 {
            if j > 0 {
                outer *= Rational::from((2 * j - 1, di - (ni - j)));
            }
            let mut inner = Rational::new();
            for k in 0..=(ni - 2 * j) / 3 {
                // prod_{kappa<=k} (D-(n-j-kappa)) (D-(n-j-k-kappa)); the 1/2
                // per factor already sits in p2
                let denom = falling_factorial(di - ni + j + k, k as u64)
                    * falling_factorial(di - ni + j + 2 * k, k as u64);
                let numer = binomial(ni - 2 * j, 3 * k) * &p2[k as usize];
                inner += Rational::from((numer, denom));
            }
            sum += Rational::from(binomial(ni, 2 * j)) * &outer * inner;
        }
        1 - prob_all_distinct(n, d) * sum
    }

    /// Quintuple-birthday sum with precomputed `p_1(j)`, `p_2(k)`, `p_3(l)`
    /// and `p_0(n-j-2k-3l-1)`.
    pub fn w5_direct(n: u64, d: u64) -> ExactRat {
        if n == 0 {
            return Rational::new();
        }
        let c = pascal(n);
        let p1 = prefactor_numerators(2, n / 2);
        let p2 = prefactor_numerators(3, n / 3);
        let p3 = prefactor_numerators(4, n / 4);
        let p0 = p0_numerators(d, n);
        let mut sum = Integer::new();
        for j in 0..=n / 2 {
            let outer = Integer::from(&c[n as usize][2 * j as usize] * &p1[j as usize]);
            let mut mid = Integer::new();
            for k in 0..=(n - 2 * j) / 3 {
                let r = n - 2 * j - 3 * k;
                let t = Integer::from(&c[(n - 2 * j) as usize][3 * k as usize] * &p2[k as usize]);
                let mut inner = Integer::new();
                for l in 0..=r / 4 {
                    let u = Integer::from(&c[r as usize][4 * l as usize] * &p3[l as usize]);
                    inner += u * &p0[(n - j - 2 * k - 3 * l - 1) as usize];
                }
                mid += t * inner;
            }
            sum += outer * mid;
        }
        finish(sum, n, d)
    }

    /// Quintuple form with the `w_n` factor pulled out, valid for `n <= D`:
    /// each term is divided by the `s = j + 2k + 3l` factors of `D (D-1) ...`
    /// that its own date count does not use. Terms sharing `s` share that
    /// denominator, so their numerators are summed first.
    pub fn w5_prefactored(n: u64, d: u64) -> ExactRat {
        assert!(n <= d);
        let (ni, di) = (n as i64, d as i64);
        let c = pascal(n);
        let p1 = prefactor_numerators(2, n / 2);
        let p2 = prefactor_numerators(3, n / 3);
        let p3 = prefactor_numerators(4, n / 4);
        let mut by_skipped = vec![Integer::new(); n as usize + 1];
        for j in 0..=ni / 2 {
            let outer = Integer::from(&c[n as usize][2 * j as usize] * &p1[j as usize]);
            for k in 0..=(ni - 2 * j) / 3 {
                let r = ni - 2 * j - 3 * k;
                let mid = Integer::from(&c[(ni - 2 * j) as usize][3 * k as usize] * &p2[k as usize]);
                let mid = outer.clone() * mid;
                for l in 0..=r / 4 {
                    let term = Integer::from(&c[r as usize][4 * l as usize] * &p3[l as usize]);
                    by_skipped[(j + 2 * k + 3 * l) as usize] += term * &mid;
                }
            }
        }
        let mut sum = Rational::new();
        for (s, numer) in by_skipped.into_iter().enumerate() {
            if numer != 0 {
                let denom = falling_factorial(di - ni + s as i64, s as u64);
                sum += Rational::from((numer, denom));
            }
        }
        1 - prob_all_distinct(n, d) * sum
    }
}

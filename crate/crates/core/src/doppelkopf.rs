//! Deal census for a doubled deck: `t` card types, two copies each, dealt to
//! four seats of `h = t/2` cards. The canonical game has `t = 24`, `h = 12`.
//!
//! A *logical* deal records only which seats hold each type, so a deal with
//! `p` pairs (both copies in one hand) stands for `2^(t-p)` physical deals.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exact::{binomial, binomial_counting, multinomial, BigReal, ExactInt, ExactRat, Precision};

/// Physical deals above this are not enumerated.
pub const BRUTE_FORCE_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DeckModel {
    types: u32,
    hand_size: u32,
}

impl DeckModel {
    pub const SEATS: u32 = 4;

    pub fn new(types: u32, hand_size: u32) -> Result<Self> {
        if types == 0 || 4 * hand_size != 2 * types {
            return invalid(format!(
                "four hands of {hand_size} must hold exactly two copies of {types} types"
            ));
        }
        Ok(DeckModel { types, hand_size })
    }

    /// 24 types, hands of 12.
    pub fn canonical() -> Self {
        DeckModel {
            types: 24,
            hand_size: 12,
        }
    }

    pub fn types(&self) -> u32 {
        self.types
    }

    pub fn hand_size(&self) -> u32 {
        self.hand_size
    }

    pub fn cards(&self) -> u32 {
        2 * self.types
    }
}

/// `N = C(2t, h) C(2t-h, h) C(2t-2h, h)`: deals of distinguishable cards.
pub fn total_deals(deck: &DeckModel) -> ExactInt {
    let h = deck.hand_size as i64;
    multinomial(deck.cards() as i64, &[h, h, h, h]).expect("hand sizes sum to the deck")
}

/// Per-seat probability that one seat holds both copies of a given type:
/// `C(2t-2, h-2) / C(2t, h)`.
pub fn hochzeit_probability_seat(deck: &DeckModel) -> ExactRat {
    let c = deck.cards() as i64;
    let h = deck.hand_size as i64;
    Rational::from((binomial(c - 2, h - 2), binomial(c, h)))
}

/// Probability that some seat holds both copies (disjoint over seats).
pub fn hochzeit_probability(deck: &DeckModel) -> ExactRat {
    hochzeit_probability_seat(deck) * 4u32
}

/// Compositions `(p_1, p_2, p_3, p_4)` of `p` into non-negative parts.
fn compositions(p: i64) -> Vec<[i64; 4]> {
    let mut out = Vec::new();
    for p1 in 0..=p {
        for p2 in 0..=p - p1 {
            for p3 in 0..=p - p1 - p2 {
                out.push([p1, p2, p3, p - p1 - p2 - p3]);
            }
        }
    }
    out
}

/// Solo-card splits for fixed pairs per seat. Seats 1 and 2 share `d` types,
/// seats 3 and 4 share `d + p_1 + p_2 - p_3 - p_4`; everything else follows.
fn solo_arrangements(t: i64, h: i64, parts: &[i64; 4]) -> Integer {
    let [p1, p2, p3, p4] = *parts;
    let p = p1 + p2 + p3 + p4;
    let d0 = 0.max(p3 + p4 - p1 - p2);
    let d1 = (h - 2 * p1).min(h - 2 * p2).min(h - p + 2 * p3).min(h - p + 2 * p4);
    let mut sum = Integer::new();
    for d in d0..=d1 {
        let rest = t - 2 * p1 - 2 * p2 - 2 * d;
        let term = binomial_counting(t - p, d)
            * binomial_counting(t - p - d, p - 2 * (p3 + p4) + d)
            * binomial_counting(rest, h - 2 * p1 - d)
            * binomial_counting(rest, h - p + 2 * p4 - d);
        sum += term;
    }
    sum
}

/// `N_p`: logically distinct deals with exactly `p` pairs.
pub fn logical_count(p: u32, deck: &DeckModel) -> Result<ExactInt> {
    if p > deck.types {
        return invalid(format!("at most {} pairs are possible", deck.types));
    }
    let t = deck.types as i64;
    let h = deck.hand_size as i64;
    let p = p as i64;
    let inner: Integer = compositions(p)
        .par_iter()
        .map(|parts| {
            let arrangements = solo_arrangements(t, h, parts);
            if arrangements == 0 {
                return arrangements;
            }
            arrangements * multinomial(p, parts).expect("parts sum to p")
        })
        .reduce(Integer::new, |a, b| a + b);
    Ok(binomial(t, p) * inner)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DealCensus {
    pub deck: DeckModel,
    #[serde(serialize_with = "ser_int")]
    pub total: ExactInt,
    #[serde(serialize_with = "ser_ints")]
    pub logical_by_pairs: Vec<ExactInt>,
    #[serde(serialize_with = "ser_ints")]
    pub weighted_by_pairs: Vec<ExactInt>,
    #[serde(serialize_with = "ser_int")]
    pub logical_total: ExactInt,
}

fn ser_int<S: serde::Serializer>(x: &Integer, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn ser_ints<S: serde::Serializer>(xs: &[Integer], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|x| x.to_string()))
}

impl DealCensus {
    fn from_counts(deck: DeckModel, logical_by_pairs: Vec<ExactInt>) -> Result<Self> {
        let t = deck.types;
        let weighted_by_pairs: Vec<Integer> = logical_by_pairs
            .iter()
            .enumerate()
            .map(|(p, n)| Integer::from(n << (t - p as u32)))
            .collect();
        let total = total_deals(&deck);
        let weighted_sum: Integer = weighted_by_pairs.iter().sum();
        if weighted_sum != total {
            return Err(Error::ProbeFailed(format!(
                "sum of 2^(t-p) N_p is {weighted_sum}, expected {total}"
            )));
        }
        let logical_total = logical_by_pairs.iter().sum();
        Ok(DealCensus {
            deck,
            total,
            logical_by_pairs,
            weighted_by_pairs,
            logical_total,
        })
    }

    /// `N_p`.
    pub fn logical(&self, p: u32) -> &ExactInt {
        &self.logical_by_pairs[p as usize]
    }

    /// `H_p = 2^(t-p) N_p`.
    pub fn weighted(&self, p: u32) -> &ExactInt {
        &self.weighted_by_pairs[p as usize]
    }

    /// `P(P = p) = H_p / N`.
    pub fn prob(&self, p: u32) -> ExactRat {
        Rational::from((self.weighted(p).clone(), self.total.clone()))
    }

    /// `P(P <= p)`.
    pub fn cdf(&self, p: u32) -> ExactRat {
        let hits: Integer = self.weighted_by_pairs[..=p as usize].iter().sum();
        Rational::from((hits, self.total.clone()))
    }

    /// `sum_{lo <= p <= hi} H_p`.
    pub fn weighted_range(&self, lo: u32, hi: u32) -> ExactInt {
        self.weighted_by_pairs[lo as usize..=hi as usize].iter().sum()
    }
}

/// Census from the closed formula, with the probe `sum_p 2^(t-p) N_p = N`.
pub fn census(deck: &DeckModel) -> Result<DealCensus> {
    let counts = (0..=deck.types)
        .map(|p| logical_count(p, deck))
        .collect::<Result<Vec<_>>>()?;
    DealCensus::from_counts(*deck, counts)
}

/// Census by enumerating every physical deal. Each logical class is keyed by
/// the seat pair holding each type; every class with `p` pairs must contain
/// exactly `2^(t-p)` physical deals.
pub fn brute_force_census(deck: &DeckModel) -> Result<DealCensus> {
    let total = total_deals(deck);
    if total > BRUTE_FORCE_BUDGET {
        return invalid(format!(
            "{total} physical deals exceed the enumeration budget of {BRUTE_FORCE_BUDGET}"
        ));
    }
    let t = deck.types as usize;
    let h = deck.hand_size;
    // card 2i and 2i+1 are the two copies of type i
    let mut seat_of = vec![0u8; 2 * t];
    let mut left = [h; 4];
    let mut classes: HashMap<Vec<(u8, u8)>, u64> = HashMap::new();

    fn deal(
        card: usize,
        seat_of: &mut [u8],
        left: &mut [u32; 4],
        classes: &mut HashMap<Vec<(u8, u8)>, u64>,
    ) {
        if card == seat_of.len() {
            let key: Vec<(u8, u8)> = seat_of
                .chunks(2)
                .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
                .collect();
            *classes.entry(key).or_insert(0) += 1;
            return;
        }
        for seat in 0..4 {
            if left[seat] > 0 {
                left[seat] -= 1;
                seat_of[card] = seat as u8;
                deal(card + 1, seat_of, left, classes);
                left[seat] += 1;
            }
        }
    }
    deal(0, &mut seat_of, &mut left, &mut classes);

    let mut counts = vec![Integer::new(); t + 1];
    let mut physical = 0u64;
    for (key, size) in &classes {
        let pairs = key.iter().filter(|(a, b)| a == b).count();
        let expected = 1u64 << (t - pairs);
        if *size != expected {
            return Err(Error::ProbeFailed(format!(
                "logical class with {pairs} pairs has {size} physical deals, expected {expected}"
            )));
        }
        counts[pairs] += 1;
        physical += size;
    }
    if physical != total {
        return Err(Error::ProbeFailed(format!(
            "enumerated {physical} deals, expected {total}"
        )));
    }
    DealCensus::from_counts(*deck, counts)
}

/// Distinct logical classes seen by [`brute_force_census`]-style enumeration,
/// listed as per-seat type-count vectors. Only for tiny decks.
pub fn logical_classes(deck: &DeckModel) -> Result<HashSet<Vec<[u8; 4]>>> {
    if total_deals(deck) > BRUTE_FORCE_BUDGET {
        return invalid("deck too large to enumerate");
    }
    let t = deck.types as usize;
    let mut out = HashSet::new();
    // choose a seat pair for each type, respecting hand sizes
    fn rec(ty: usize, t: usize, left: &mut [u32; 4], cur: &mut Vec<[u8; 4]>, out: &mut HashSet<Vec<[u8; 4]>>) {
        if ty == t {
            out.insert(cur.clone());
            return;
        }
        for a in 0..4 {
            for b in a..4 {
                let need_a = if a == b { 2 } else { 1 };
                if left[a] < need_a || (a != b && left[b] < 1) {
                    continue;
                }
                left[a] -= need_a;
                if a != b {
                    left[b] -= 1;
                }
                let mut counts = [0u8; 4];
                counts[a] += 1;
                counts[b] += 1;
                cur.push(counts);
                rec(ty + 1, t, left, cur, out);
                cur.pop();
                left[a] += need_a;
                if a != b {
                    left[b] += 1;
                }
            }
        }
    }
    let h = deck.hand_size;
    rec(0, t, &mut [h; 4], &mut Vec::new(), &mut out);
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct PairStats {
    pub mean: ExactRat,
    pub variance: ExactRat,
    pub sigma: BigReal,
    /// Half-integer point splitting the mass: `k + 1/2` for the largest `k`
    /// with `P(P <= k) <= 1/2`.
    pub median: ExactRat,
    /// Most frequent pair count (smallest on ties).
    pub mode: u32,
}

pub fn pair_stats(census: &DealCensus, prec: Precision) -> PairStats {
    let n = Rational::from(census.total.clone());
    let mut first = Integer::new();
    let mut second = Integer::new();
    for (p, hp) in census.weighted_by_pairs.iter().enumerate() {
        first += Integer::from(hp * p as u64);
        second += Integer::from(hp * (p * p) as u64);
    }
    let mean = Rational::from(first) / &n;
    let variance = Rational::from(second) / &n - mean.clone().square();
    let sigma = crate::exact::rat_to_real(&variance, prec).sqrt();
    let half = Rational::from((1, 2));
    let mut k = None;
    for p in 0..=census.deck.types {
        if census.cdf(p) <= half {
            k = Some(p);
        } else {
            break;
        }
    }
    let median = match k {
        Some(k) => Rational::from(k) + &half,
        None => Rational::from(0),
    };
    let mut mode = 0;
    for p in 1..=census.deck.types {
        if census.weighted(p) > census.weighted(mode) {
            mode = p;
        }
    }
    PairStats {
        mean,
        variance,
        sigma,
        median,
        mode,
    }
}

#[derive(Clone, Debug)]
pub struct EventProbabilities {
    /// Every type held as a pair.
    pub all_pairs: ExactRat,
    /// No pair at all.
    pub all_solo: ExactRat,
    /// One specific logical deal without pairs.
    pub single_solo_deal: ExactRat,
    /// One specific physical deal.
    pub single_deal: ExactRat,
}

pub fn event_probabilities(census: &DealCensus) -> EventProbabilities {
    let t = census.deck.types;
    EventProbabilities {
        all_pairs: census.prob(t),
        all_solo: census.prob(0),
        single_solo_deal: Rational::from((Integer::from(1) << t, census.total.clone())),
        single_deal: Rational::from((1, census.total.clone())),
    }
}

/// One row of the pair-count comparison: exact probability, the binomial
/// with `n = t` and the per-type pair probability, and the normal density
/// with the exact mean and variance (continuity corrected).
#[derive(Clone, Debug, Serialize)]
pub struct OverlayRow {
    pub pairs: u32,
    pub exact: f64,
    pub binomial: f64,
    pub normal: f64,
}

pub fn overlay_series(census: &DealCensus, prec: Precision) -> Vec<OverlayRow> {
    let t = census.deck.types;
    let q = hochzeit_probability(&census.deck);
    let stats = pair_stats(census, prec);
    let bits = prec.bits();
    let mu = crate::exact::rat_to_real(&stats.mean, prec);
    let root2 = Float::with_val(bits, 2u32).sqrt();
    let phi = |x: f64| -> Float {
        let z = (Float::with_val(bits, x) - &mu) / &stats.sigma / &root2;
        (1 + z.erf()) / 2u32
    };
    (0..=t)
        .map(|p| {
            let bin = Rational::from(binomial(t as i64, p as i64))
                * q.clone().pow(p as i32)
                * Rational::from(1 - &q).pow((t - p) as i32);
            let normal = phi(p as f64 + 0.5) - phi(p as f64 - 0.5);
            OverlayRow {
                pairs: p,
                exact: census.prob(p).to_f64(),
                binomial: bin.to_f64(),
                normal: normal.to_f64(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(s: &str) -> Integer {
        s.parse().unwrap()
    }

    #[test]
    fn deck_validation() {
        assert!(DeckModel::new(24, 12).is_ok());
        assert!(DeckModel::new(24, 11).is_err());
        assert!(DeckModel::new(0, 0).is_err());
    }

    #[test]
    fn totals() {
        assert_eq!(total_deals(&DeckModel::canonical()), int("235809301462142612780721600"));
        assert_eq!(total_deals(&DeckModel::new(2, 1).unwrap()), 24);
        assert_eq!(total_deals(&DeckModel::new(6, 3).unwrap()), 369600);
    }

    #[test]
    fn hochzeit() {
        let deck = DeckModel::canonical();
        assert_eq!(hochzeit_probability_seat(&deck), Rational::from((11, 188)));
        assert_eq!(hochzeit_probability(&deck), Rational::from((11, 47)));
    }

    #[test]
    fn extreme_counts() {
        let deck = DeckModel::canonical();
        assert_eq!(logical_count(24, &deck).unwrap(), 2308743493056u64);
        assert_eq!(logical_count(23, &deck).unwrap(), 0);
        assert_eq!(logical_count(0, &deck).unwrap(), 25780447171287900u64);
        assert!(logical_count(25, &deck).is_err());
        // the all-solo count as a single d-sum
        let direct: Integer = (0..=12i64)
            .map(|d| {
                binomial(24, d)
                    * binomial(24 - d, d)
                    * binomial(24 - 2 * d, 12 - d)
                    * binomial(24 - 2 * d, 12 - d)
            })
            .sum();
        assert_eq!(direct, 25780447171287900u64);
        let first_seat: Integer = (0..=12i64)
            .map(|d| binomial(12, d).square() * binomial(24 - 2 * d, 12 - d))
            .sum::<Integer>()
            * binomial(24, 12);
        assert_eq!(first_seat, direct);
    }

    #[test]
    fn small_decks_match_enumeration() {
        for t in [2u32, 4, 6] {
            let deck = DeckModel::new(t, t / 2).unwrap();
            let formula = census(&deck).unwrap();
            let brute = brute_force_census(&deck).unwrap();
            assert_eq!(formula, brute, "t = {t}");
            assert_eq!(*formula.logical(t - 1), 0);
            let classes = logical_classes(&deck).unwrap();
            assert_eq!(Integer::from(classes.len()), formula.logical_total);
        }
        let deck = DeckModel::new(2, 1).unwrap();
        let c = brute_force_census(&deck).unwrap();
        // one seat with both copies of a type and one without is impossible
        // for hands of one card
        assert_eq!(*c.logical(0), 6);
        assert_eq!(*c.logical(1), 0);
        assert_eq!(*c.logical(2), 0);
        assert!(brute_force_census(&DeckModel::new(8, 4).unwrap()).is_err());
    }

    #[test]
    fn canonical_census() {
        let c = census(&DeckModel::canonical()).unwrap();
        assert_eq!(c.logical_total, int("2248575441654260591964"));
        assert_eq!(*c.weighted(0), int("432524130769286096486400"));
        assert_eq!(*c.weighted(9), int("12087278756623740297019392"));
        assert_eq!(c.weighted_range(2, 9), int("223410396488155960977653760"));
        assert_eq!(c.weighted_range(4, 7), int("156091771014949542410846208"));
        assert_eq!(c.weighted_range(13, 24), int("287134455041807189648832"));
        let stats = pair_stats(&c, Precision::default());
        assert_eq!(stats.mean, Rational::from((264, 47)));
        assert_eq!(stats.mean, Rational::from((11, 47)) * 24u32);
        assert_eq!(stats.variance, Rational::from((48576, 11045)));
        assert!((stats.sigma.to_f64() - 2.09714).abs() < 5e-6);
        assert_eq!(stats.median, Rational::from((11, 2)));
        assert_eq!(stats.mode, 5);
        assert!((c.cdf(5).to_f64() - 0.49556645766).abs() < 5e-12);
        assert!((c.cdf(6).to_f64() - 0.67566989).abs() < 5e-9);
    }

    #[test]
    fn events() {
        let c = census(&DeckModel::canonical()).unwrap();
        let e = event_probabilities(&c);
        assert!((e.all_pairs.to_f64() / 9.79e-15 - 1.0).abs() < 1e-3);
        assert!((e.all_solo.to_f64() - 1.8342e-3).abs() < 5e-8);
        assert!((e.single_solo_deal.to_f64() / 7.1147e-20 - 1.0).abs() < 1e-4);
        assert!((e.single_deal.to_f64() / 4.24e-27 - 1.0).abs() < 2e-3);
        assert!(Rational::from(&e.all_pairs + &e.all_solo) < 1);
    }

    #[test]
    fn overlay_is_normalized() {
        let c = census(&DeckModel::canonical()).unwrap();
        let rows = overlay_series(&c, Precision::default());
        assert_eq!(rows.len(), 25);
        let exact: f64 = rows.iter().map(|r| r.exact).sum();
        let bin: f64 = rows.iter().map(|r| r.binomial).sum();
        assert!((exact - 1.0).abs() < 1e-12);
        assert!((bin - 1.0).abs() < 1e-12);
        assert!((rows[5].normal - rows[5].exact).abs() < 0.02);
    }
}

use std::time::Instant;

use combprob::birthday::{
    prob_multiplicity_at_least_verified, threshold_search_with, threshold_table, LeapModel,
    NoCoincidenceCounter, YEAR_DAYS,
};
use combprob::doppelkopf::{self as dk, DeckModel};
use combprob::montecarlo::{self as mc, McConfig};
use combprob::products::{self as pr, ProductModel};
use combprob::{dice, BigReal, ExactRat, Precision};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::output::{emit, int, text, write_body, OutputSpec, Table};
use crate::{BenchArgs, BenchId, BirthdayArgs, CliError, DiceCmd, DoppelkopfCmd, McArgs, ProductsCmd};

type CmdResult = Result<(), CliError>;

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

/// `a:b` or `a:b:step`, inclusive.
pub fn parse_range(s: &str) -> Result<(u64, u64, u64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.trim().parse::<u64>().map_err(|e| format!("bad range {s:?}: {e}"));
    let (a, b, step) = match parts.as_slice() {
        [a, b] => (num(a)?, num(b)?, 1),
        [a, b, c] => (num(a)?, num(b)?, num(c)?),
        _ => return Err(format!("range must be a:b or a:b:step, got {s:?}")),
    };
    if step == 0 || a > b {
        return Err(format!("range {s:?} needs a <= b and a positive step"));
    }
    Ok((a, b, step))
}

/// `types,hand_size`.
pub fn parse_deck(s: &str) -> Result<(u32, u32), String> {
    let (t, h) = s
        .split_once(',')
        .ok_or_else(|| format!("deck must be types,hand_size, got {s:?}"))?;
    let t = t.trim().parse().map_err(|e| format!("bad deck {s:?}: {e}"))?;
    let h = h.trim().parse().map_err(|e| format!("bad deck {s:?}: {e}"))?;
    Ok((t, h))
}

/// Exact rational from `p/q` or a plain decimal such as `0.999`.
fn parse_rational(s: &str) -> Result<ExactRat, CliError> {
    let s = s.trim();
    if s.contains('/') {
        return s
            .parse::<Rational>()
            .map_err(|e| CliError::Usage(format!("bad rational {s:?}: {e}")));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    let ok = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    if (whole.is_empty() && frac.is_empty()) || !ok(whole) || !ok(frac) {
        return usage(format!("bad number {s:?}"));
    }
    let digits = format!("{whole}{frac}");
    let numer: Integer = digits.trim_start_matches('0').parse().unwrap_or_default();
    let denom = Integer::from(10).pow(frac.len() as u32);
    let r = Rational::from((numer, denom));
    Ok(if neg { -r } else { r })
}

fn parse_real(s: &str, prec: Precision) -> Result<BigReal, CliError> {
    let parsed = Float::parse(s.trim()).map_err(|e| CliError::Usage(format!("bad number {s:?}: {e}")))?;
    Ok(Float::with_val(prec.bits(), parsed))
}

fn leap_model(spec: &str) -> Result<LeapModel, CliError> {
    match spec {
        "julian" => Ok(LeapModel::julian()),
        "gregorian" => Ok(LeapModel::gregorian()),
        other => Ok(LeapModel::new(parse_rational(other)?)?),
    }
}

const STANDARD_ALPHAS: [&str; 6] = ["0.01", "0.1", "0.5", "0.9", "0.99", "0.999"];

pub fn birthday(out: &OutputSpec, args: &BirthdayArgs) -> CmdResult {
    let leap = args.gregorian.as_deref().map(leap_model).transpose()?;
    if args.days < 1 {
        return usage("--days must be at least 1");
    }
    if args.multiplicity < 2 {
        return usage("--multiplicity must be at least 2");
    }
    let m = args.multiplicity;
    let mut counter = NoCoincidenceCounter::new(args.days, m);
    let mut eval = |n: u64| -> Result<ExactRat, CliError> {
        Ok(match &leap {
            Some(l) => counter.prob_at_least_mixture(n, l),
            None if args.verify => prob_multiplicity_at_least_verified(m, n, args.days)?,
            None => counter.prob_at_least(n),
        })
    };
    let label = if leap.is_some() { format!("w_{m}^G") } else { format!("w_{m}") };

    if let Some(n) = args.n {
        let mut t = Table::new(&["n", &label]);
        t.push(vec![int(n), text(out.rat(&eval(n)?))]);
        return Ok(emit(out, &t)?);
    }
    if let Some((a, b, step)) = args.n_range {
        let mut t = Table::new(&["n", &label]);
        let mut n = a;
        while n <= b {
            t.push(vec![int(n), text(out.rat(&eval(n)?))]);
            n += step;
        }
        return Ok(emit(out, &t)?);
    }

    let alpha_strs: Vec<String> = if args.alpha.is_empty() {
        STANDARD_ALPHAS.iter().map(|s| s.to_string()).collect()
    } else {
        args.alpha.clone()
    };
    let alphas = alpha_strs
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<Vec<_>, _>>()?;

    if args.table {
        if args.days != YEAR_DAYS {
            return usage("--table is defined for 365 days only");
        }
        let mut order: Vec<usize> = (0..alphas.len()).collect();
        order.sort_by(|&i, &j| alphas[i].cmp(&alphas[j]));
        let sorted: Vec<ExactRat> = order.iter().map(|&i| alphas[i].clone()).collect();
        let ms = [2, 3, 4, 5];
        let table = threshold_table(&ms, &sorted, leap.as_ref())?;
        let mut columns = vec!["k".to_string()];
        columns.extend(order.iter().map(|&i| alpha_strs[i].clone()));
        let mut t = Table {
            columns,
            ..Default::default()
        };
        for (k, row) in ms.iter().zip(table) {
            let mut cells = vec![int(k)];
            cells.extend(row.into_iter().map(int));
            t.push(cells);
        }
        return Ok(emit(out, &t)?);
    }

    let mut t = Table::new(&["multiplicity", "alpha", "n"]);
    let mut counter = NoCoincidenceCounter::new(args.days, m);
    for (s, alpha) in alpha_strs.iter().zip(&alphas) {
        let n = threshold_search_with(&mut counter, alpha, leap.as_ref())?;
        t.push(vec![int(m), text(s.clone()), int(n)]);
    }
    Ok(emit(out, &t)?)
}

pub fn dice(out: &OutputSpec, cmd: &DiceCmd) -> CmdResult {
    match cmd {
        DiceCmd::Sums { n, convolution } => {
            let mut t = Table::new(&["sum", "count"]);
            if *convolution {
                let table = dice::sum_counts_convolution(*n)?;
                for (k, c) in table.iter() {
                    t.push(vec![int(k), int(c)]);
                }
            } else {
                for k in *n..=6 * n {
                    t.push(vec![int(k), int(dice::sum_count_closed(*n, k)?)]);
                }
            }
            Ok(emit(out, &t)?)
        }
        DiceCmd::Wait(w) => {
            let n = w.run_length;
            if let Some(m_max) = w.pmf_upto {
                let dist = dice::wait_pmf(n, m_max.max(n as u64))?;
                let counts = dice::wait_sequence_counts(n, m_max)?;
                let mut t = Table::new(&["m", "sequences", "pmf", "cdf"]);
                for m in 0..=m_max {
                    t.push(vec![
                        int(m),
                        int(&counts[m as usize]),
                        text(out.rat(&dist.pmf(m))),
                        text(out.rat(&dist.cdf(m))),
                    ]);
                }
                Ok(emit(out, &t)?)
            } else if w.moments {
                let t = Table::record(vec![
                    ("expectation", int(dice::wait_expectation(n)?)),
                    ("variance", int(dice::wait_variance(n)?)),
                ]);
                Ok(emit(out, &t)?)
            } else {
                let t = Table::record(vec![("median", int(dice::wait_median(n)?))]);
                Ok(emit(out, &t)?)
            }
        }
    }
}

fn deck_model(deck: &Option<(u32, u32)>) -> Result<DeckModel, CliError> {
    Ok(match deck {
        Some((t, h)) => DeckModel::new(*t, *h)?,
        None => DeckModel::canonical(),
    })
}

/// Digits for the census probability column.
const CENSUS_DIGITS: usize = 30;

pub fn doppelkopf(out: &OutputSpec, prec: Precision, cmd: &DoppelkopfCmd) -> CmdResult {
    match cmd {
        DoppelkopfCmd::Census { deck, brute_force } => {
            let deck = deck_model(deck)?;
            let census = if *brute_force {
                dk::brute_force_census(&deck)?
            } else {
                dk::census(&deck)?
            };
            let mut t = Table::new(&["p", "N_p", "H_p", "H_p/N"]);
            for p in 0..=deck.types() {
                t.push(vec![
                    int(p),
                    int(census.logical(p)),
                    int(census.weighted(p)),
                    text(crate::output::prob_string(&census.prob(p), CENSUS_DIGITS)),
                ]);
            }
            t.notes.push(format!(
                "probe: sum_p 2^(t-p) N_p = N = {} holds",
                census.total
            ));
            Ok(emit(out, &t)?)
        }
        DoppelkopfCmd::Hochzeit { deck } => {
            let deck = deck_model(deck)?;
            let p = dk::hochzeit_probability(&deck);
            let seat = dk::hochzeit_probability_seat(&deck);
            let t = Table::record(vec![
                ("probability", text(p.to_string())),
                ("decimal", text(out.rat(&p))),
                ("per_seat", text(seat.to_string())),
            ]);
            Ok(emit(out, &t)?)
        }
        DoppelkopfCmd::Stats { deck } => {
            let deck = deck_model(deck)?;
            let census = dk::census(&deck)?;
            let s = dk::pair_stats(&census, prec);
            let e = dk::event_probabilities(&census);
            let t = Table::record(vec![
                ("deals", int(&census.total)),
                ("logical_deals", int(&census.logical_total)),
                ("mean", text(s.mean.to_string())),
                ("mean_decimal", text(out.rat(&s.mean))),
                ("variance", text(s.variance.to_string())),
                ("variance_decimal", text(out.rat(&s.variance))),
                ("sigma", text(out.real(&s.sigma))),
                ("median", text(s.median.to_string())),
                ("mode", int(s.mode)),
                ("p_all_pairs", text(out.rat(&e.all_pairs))),
                ("p_no_pairs", text(out.rat(&e.all_solo))),
                ("p_single_logical_deal", text(out.rat(&e.single_solo_deal))),
                ("p_single_deal", text(out.rat(&e.single_deal))),
            ]);
            Ok(emit(out, &t)?)
        }
        DoppelkopfCmd::Overlay { deck } => {
            let deck = deck_model(deck)?;
            let census = dk::census(&deck)?;
            let mut t = Table::new(&["pairs", "exact", "binomial", "normal"]);
            for row in dk::overlay_series(&census, prec) {
                t.push(vec![
                    int(row.pairs),
                    text(out.f64(row.exact)),
                    text(out.f64(row.binomial)),
                    text(out.f64(row.normal)),
                ]);
            }
            Ok(emit(out, &t)?)
        }
    }
}

pub fn products(out: &OutputSpec, prec: Precision, cmd: &ProductsCmd) -> CmdResult {
    let model = |bound: &str, n: u32| -> Result<ProductModel, CliError> {
        Ok(ProductModel::new(parse_real(bound, prec)?, n)?)
    };
    match cmd {
        ProductsCmd::Median {
            n,
            bound,
            exact,
            asymptotic,
        } => {
            let m = model(bound, *n)?;
            let both = exact == asymptotic;
            let mut rows = Vec::new();
            let ex = pr::median_exact(&m);
            if *exact || both {
                rows.push(("median_exact", text(out.real(&ex))));
            }
            if *asymptotic || both {
                let asy = pr::median_asymptotic(&m);
                rows.push(("median_leading", text(out.real(&pr::median_leading(&m)))));
                rows.push(("median_asymptotic", text(out.real(&asy))));
                let rel = Float::with_val(prec.bits(), &asy - &ex) / &ex;
                rows.push(("relative_error", text(out.real(&rel.abs()))));
            }
            Ok(emit(out, &Table::record(rows))?)
        }
        ProductsCmd::Cdf { n, bound, grid } => {
            let m = model(bound, *n)?;
            let mut t = Table::new(&["x", &format!("F_{n}(x)")]);
            for pt in pr::cdf_series(&m, (*grid).max(1)) {
                t.push(vec![text(out.f64(pt.x)), text(out.f64(pt.y))]);
            }
            Ok(emit(out, &t)?)
        }
        ProductsCmd::Pdf { n, bound, grid } => {
            let m = model(bound, *n)?;
            let grid = (*grid).max(1);
            let upper = m.upper();
            let mut t = Table::new(&["x", &format!("f_{n}(x)")]);
            for i in 1..=grid {
                let x = Float::with_val(prec.bits(), &upper * i as u32) / grid as u32;
                let y = pr::product_pdf(&m, &x)?;
                t.push(vec![text(out.real(&x)), text(out.real(&y))]);
            }
            Ok(emit(out, &t)?)
        }
        ProductsCmd::Standardized { n, lo, hi, grid } => {
            if !(hi > lo) {
                return usage("--hi must exceed --lo");
            }
            let mut t = Table::new(&["x", &format!("g_{n}(x)")]);
            for pt in pr::standardized_series(*n, *lo, *hi, (*grid).max(1), prec) {
                t.push(vec![text(out.f64(pt.x)), text(out.f64(pt.y))]);
            }
            Ok(emit(out, &t)?)
        }
        ProductsCmd::Moments { n, bound } => {
            let r = pr::product_moments(&model(bound, *n)?);
            let t = Table::record(vec![
                ("mean", text(out.real(&r.mean))),
                ("variance", text(out.real(&r.variance))),
                ("sigma", text(out.real(&r.sigma))),
            ]);
            Ok(emit(out, &t)?)
        }
        ProductsCmd::Geomean { n } => {
            let g = pr::prob_below_geometric_mean(*n, prec)?;
            let t = Table::record(vec![
                ("exact", text(out.real(&g.exact))),
                ("series", text(out.real(&g.series))),
            ]);
            Ok(emit(out, &t)?)
        }
        ProductsCmd::Lambert { x } => {
            let w = pr::lambert_w_lower(&parse_real(x, prec)?)?;
            Ok(emit(out, &Table::record(vec![("w", text(out.real(&w)))]))?)
        }
    }
}

pub fn mc(out: &OutputSpec, prec: Precision, args: &McArgs) -> CmdResult {
    let cfg = McConfig::new(args.bound, args.factors, args.reps, args.seed)?;
    let samples = mc::sample_products(&cfg);
    if let Some(bins) = args.histogram {
        let s = mc::summarize(&samples)?;
        // widen the top edge a hair so the maximum lands in the last bin
        let hi = s.max + (s.max - s.min).abs() * 1e-9 + f64::MIN_POSITIVE;
        let mut t = Table::new(&["lo", "hi", "count", "density"]);
        for b in mc::histogram(&samples, s.min, hi, bins)? {
            t.push(vec![
                text(out.f64(b.lo)),
                text(out.f64(b.hi)),
                int(b.count),
                text(out.f64(b.density)),
            ]);
        }
        return Ok(emit(out, &t)?);
    }
    let s = mc::summarize(&samples)?;
    let mut rows = vec![
        ("min", text(out.f64(s.min))),
        ("q1", text(out.f64(s.q1))),
        ("median", text(out.f64(s.median))),
        ("mean", text(out.f64(s.mean))),
        ("q3", text(out.f64(s.q3))),
        ("max", text(out.f64(s.max))),
    ];
    if args.ks {
        let g = mc::log_cdf_fn(cfg.a, cfg.n, prec)?;
        let d = mc::ks_distance(&samples, g)?;
        rows.push(("ks_distance", text(out.f64(d))));
        rows.push(("ks_critical_1pct", text(out.f64(mc::ks_critical_1pct(cfg.replications)))));
    }
    if let Some(bins) = args.chi2 {
        let c = mc::chi_square_standardized(&cfg, &samples, bins, prec)?;
        rows.push(("chi2", text(out.f64(c.statistic))));
        rows.push(("chi2_df", int(c.degrees_of_freedom)));
        rows.push(("chi2_p_value", text(out.f64(c.p_value))));
    }
    let mut t = Table::record(rows);
    t.notes.push(format!(
        "rng: {} seed {} ({} x {} factors)",
        cfg.rng_name(),
        cfg.seed,
        cfg.replications,
        cfg.n
    ));
    Ok(emit(out, &t)?)
}

#[derive(Serialize)]
struct BenchResult {
    id: String,
    seconds: f64,
    budget_seconds: f64,
    pass: bool,
}

#[derive(Serialize)]
struct BenchReport {
    threads: usize,
    results: Vec<BenchResult>,
}

fn bench_one(id: BenchId) -> Result<(f64, f64), CliError> {
    let start = Instant::now();
    let budget = match id {
        BenchId::W4_400 => {
            NoCoincidenceCounter::new(YEAR_DAYS, 4).prob_at_least(400);
            20.0
        }
        BenchId::W5_537 => {
            NoCoincidenceCounter::new(YEAR_DAYS, 5).prob_at_least(537);
            60.0
        }
        BenchId::DkpCensus => {
            dk::census(&DeckModel::canonical())?;
            10.0
        }
        BenchId::W5PlotSeries => {
            let mut counter = NoCoincidenceCounter::new(YEAR_DAYS, 5);
            for n in (0..=600).step_by(10) {
                counter.prob_at_least(n);
            }
            120.0
        }
    };
    Ok((start.elapsed().as_secs_f64(), budget))
}

pub fn bench(out: &OutputSpec, args: &BenchArgs) -> CmdResult {
    let ids = if args.ids.is_empty() {
        vec![BenchId::W4_400, BenchId::W5_537, BenchId::DkpCensus, BenchId::W5PlotSeries]
    } else {
        args.ids.clone()
    };
    let mut results = Vec::new();
    for id in ids {
        let (seconds, budget_seconds) = bench_one(id)?;
        let name = clap::ValueEnum::to_possible_value(&id)
            .expect("no skipped variants")
            .get_name()
            .to_string();
        results.push(BenchResult {
            id: name,
            seconds,
            budget_seconds,
            pass: seconds <= budget_seconds,
        });
    }
    let report = BenchReport {
        threads: rayon::current_num_threads(),
        results,
    };
    let mut body = serde_json::to_string_pretty(&report).expect("json");
    body.push('\n');
    write_body(out, &body)?;
    let over: Vec<&str> = report
        .results
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.id.as_str())
        .collect();
    if over.is_empty() {
        Ok(())
    } else {
        Err(CliError::OverBudget(over.join(", ")))
    }
}

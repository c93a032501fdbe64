//! Products `Y_n = X_1 ... X_n` of independent uniforms on `(0, A]`, their
//! logarithms, medians, and the sum distribution of uniforms.
//!
//! Everything runs on the log scale `u = n ln A - ln x`, where
//! `F_n(x) = e^(-u) sum_{k<n} u^k / k!` is a Poisson tail. This keeps the
//! large-`n` regime free of underflow.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::exact::{binomial, BigReal, Precision};

#[derive(Clone, Debug, PartialEq)]
pub struct ProductModel {
    a: BigReal,
    n: u32,
}

impl ProductModel {
    pub fn new(a: BigReal, n: u32) -> Result<Self> {
        if !(a > 0) || !a.is_finite() {
            return invalid("A must be positive and finite");
        }
        if n < 1 {
            return invalid("need at least one factor");
        }
        Ok(ProductModel { a, n })
    }

    pub fn with_f64(a: f64, n: u32, prec: Precision) -> Result<Self> {
        ProductModel::new(prec.real(a), n)
    }

    pub fn a(&self) -> &BigReal {
        &self.a
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn prec(&self) -> u32 {
        self.a.prec()
    }

    fn real<T>(&self, v: T) -> BigReal
    where
        Float: rug::Assign<T>,
    {
        let mut f = Float::new(self.prec());
        rug::Assign::assign(&mut f, v);
        f
    }

    /// `n ln A`, the log of the upper end of the support.
    pub fn log_upper(&self) -> BigReal {
        self.a.clone().ln() * self.n
    }

    /// `A^n`.
    pub fn upper(&self) -> BigReal {
        self.a.clone().pow(self.n)
    }
}

// e^(-u) sum_{k<n} u^k/k!, all terms positive. Below the mode the value is
// close to 1, so it is taken as 1 minus the (accurately summed) upper tail.
fn poisson_tail(u: &BigReal, n: u32) -> BigReal {
    let prec = u.prec();
    if *u < n {
        return 1 - poisson_upper(u, n);
    }
    let mut term = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 1);
    for k in 1..n {
        term *= u;
        term /= k;
        sum += &term;
    }
    sum * Float::with_val(prec, -u).exp()
}

// e^(-u) sum_{k>=n} u^k/k! for 0 <= u < n; the term ratio u/(k+1) stays below 1
fn poisson_upper(u: &BigReal, n: u32) -> BigReal {
    let prec = u.prec();
    let mut term = Float::with_val(prec, 1);
    for k in 1..=n {
        term *= u;
        term /= k;
    }
    let mut sum = term.clone();
    let mut k = n;
    while term != 0 {
        k += 1;
        term *= u;
        term /= k;
        let before = sum.clone();
        sum += &term;
        if sum == before {
            break;
        }
    }
    sum * Float::with_val(prec, -u).exp()
}

// e^(-u) u^(n-1) / (n-1)!, evaluated through logs
fn gamma_density(u: &BigReal, n: u32) -> BigReal {
    let prec = u.prec();
    if n == 1 {
        return Float::with_val(prec, -u).exp();
    }
    if *u <= 0 {
        return Float::new(prec);
    }
    let lg = Float::with_val(prec, n).ln_gamma();
    let log = Float::with_val(prec, u.clone().ln() * (n - 1)) - u - lg;
    log.exp()
}

/// `F_n(x) = P(Y_n <= x)`.
pub fn product_cdf(model: &ProductModel, x: &BigReal) -> BigReal {
    if *x <= 0 {
        return model.real(0);
    }
    let u = model.log_upper() - x.clone().ln();
    log_cdf_from_u(&u, model.n)
}

fn log_cdf_from_u(u: &BigReal, n: u32) -> BigReal {
    if *u <= 0 {
        return Float::with_val(u.prec(), 1);
    }
    poisson_tail(u, n)
}

/// `f_n(x) = (n ln A - ln x)^(n-1) / (A^n (n-1)!)` on `(0, A^n)`.
pub fn product_pdf(model: &ProductModel, x: &BigReal) -> Result<BigReal> {
    if *x <= 0 || *x >= model.upper() {
        return invalid("density is defined on (0, A^n) only");
    }
    let u = model.log_upper() - x.clone().ln();
    Ok(gamma_density(&u, model.n) / x)
}

/// `G_n(y) = P(ln Y_n <= y)`.
pub fn log_cdf(model: &ProductModel, y: &BigReal) -> BigReal {
    let u = model.log_upper() - y;
    log_cdf_from_u(&u, model.n)
}

/// `g_n(y) = e^y (n ln A - y)^(n-1) / (A^n (n-1)!)`, zero above `n ln A`.
pub fn log_pdf(model: &ProductModel, y: &BigReal) -> BigReal {
    let u = model.log_upper() - y;
    if u < 0 {
        return model.real(0);
    }
    gamma_density(&u, model.n)
}

/// Density of `(ln Y_n - n(ln A - 1)) / sqrt(n)`, which does not depend on
/// `A`: `sqrt(n) n^n / (n! e^n) e^(x sqrt n) (1 - x/sqrt n)^(n-1)`.
pub fn standardized_log_pdf(n: u32, x: &BigReal) -> BigReal {
    let prec = x.prec();
    let root = Float::with_val(prec, n).sqrt();
    if *x >= root {
        return Float::new(prec);
    }
    let nf = Float::with_val(prec, n);
    let mut log = Float::with_val(prec, nf.clone().ln() * (Float::with_val(prec, n) + 0.5));
    log -= Float::with_val(prec, n + 1).ln_gamma();
    log -= &nf;
    log += Float::with_val(prec, x * &root);
    let inner = Float::with_val(prec, 1 - Float::with_val(prec, x / &root));
    log += inner.ln() * (n - 1);
    log.exp()
}

#[derive(Clone, Debug)]
pub struct MomentsRecord {
    pub mean: BigReal,
    pub variance: BigReal,
    pub sigma: BigReal,
}

/// `E Y_n = (A/2)^n`, `Var Y_n = A^(2n) (3^-n - 4^-n)`.
pub fn product_moments(model: &ProductModel) -> MomentsRecord {
    let n = model.n;
    let a = &model.a;
    let mean = Float::with_val(model.prec(), a / 2u32).pow(n);
    let a2n = a.clone().pow(2 * n);
    let third = model.real(3).pow(n).recip();
    let quarter = model.real(4).pow(n).recip();
    let variance = a2n * (third - quarter);
    let sigma = variance.clone().sqrt();
    MomentsRecord {
        mean,
        variance,
        sigma,
    }
}

/// `Var(XY)` from first and second moments and the covariances
/// `Cov(X, Y)` and `Cov(X^2, Y^2)`.
pub fn var_of_product(
    ex: &BigReal,
    ey: &BigReal,
    var_x: &BigReal,
    var_y: &BigReal,
    cov_xy: &BigReal,
    cov_x2y2: &BigReal,
) -> Result<BigReal> {
    if *var_x < 0 || *var_y < 0 {
        return invalid("variances must be non-negative");
    }
    let prec = ex.prec().max(ey.prec());
    let mut v = Float::with_val(prec, var_x * var_y);
    v += Float::with_val(prec, ex.clone().square() * var_y);
    v += Float::with_val(prec, ey.clone().square() * var_x);
    v += cov_x2y2;
    let cross = Float::with_val(prec, Float::with_val(prec, ex * ey) * 2u32) + cov_xy;
    v -= Float::with_val(prec, cov_xy * cross);
    Ok(v)
}

// Alternating sums lose up to about n log2(n) bits to cancellation.
fn irwin_hall_precision(n: u32, prec: u32) -> u32 {
    prec + 2 * n * (32 - n.leading_zeros()) + 32
}

/// `P(X_1 + ... + X_n <= x)` for uniforms on `[0, A]`:
/// `(1/n!) sum_{k <= x/A} (-1)^k C(n,k) (x/A - k)^n`.
pub fn irwin_hall_cdf(n: u32, a: &BigReal, x: &BigReal) -> Result<BigReal> {
    irwin_hall(n, a, x, false)
}

/// Density of the sum of `n` uniforms on `[0, A]`.
pub fn irwin_hall_pdf(n: u32, a: &BigReal, x: &BigReal) -> Result<BigReal> {
    irwin_hall(n, a, x, true)
}

fn irwin_hall(n: u32, a: &BigReal, x: &BigReal, density: bool) -> Result<BigReal> {
    if n < 1 {
        return invalid("need at least one summand");
    }
    if !(*a > 0) {
        return invalid("A must be positive");
    }
    let prec = a.prec().max(x.prec());
    let wide = irwin_hall_precision(n, prec);
    let z = Float::with_val(wide, x / a);
    if z <= 0 {
        return Ok(Float::new(prec));
    }
    if z >= n {
        return Ok(Float::with_val(prec, if density { 0 } else { 1 }));
    }
    let power = if density { n - 1 } else { n };
    let top = z.to_f64().floor() as u32;
    let mut sum = Float::new(wide);
    for k in 0..=top.min(n) {
        let base = Float::with_val(wide, &z - k);
        let term = base.pow(power) * binomial(n as i64, k as i64);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum /= Float::with_val(wide, power + 1).gamma();
    if density {
        sum /= Float::with_val(wide, a);
    }
    Ok(Float::with_val(prec, sum))
}

/// Lower real branch of Lambert W on `[-1/e, 0)`: the solution `w <= -1` of
/// `w e^w = x`.
pub fn lambert_w_lower(x: &BigReal) -> Result<BigReal> {
    let prec = x.prec();
    let work = prec + 32;
    let xw = Float::with_val(work, x);
    if xw >= 0 {
        return invalid("lower branch needs x in [-1/e, 0)");
    }
    let e = Float::with_val(work, 1).exp();
    // distance from the branch point, 1 + e x in [0, 1)
    let t = Float::with_val(work, 1 + Float::with_val(work, &e * &xw));
    let slack = Float::with_val(work, Float::i_exp(1, 8 - prec as i32));
    if t < 0 {
        if -t.clone() > slack {
            return invalid("lower branch needs x in [-1/e, 0)");
        }
        return Ok(Float::with_val(prec, -1));
    }
    if t == 0 {
        return Ok(Float::with_val(prec, -1));
    }
    let mut w = if t < 0.25 {
        let p = -Float::with_val(work, t * 2u32).sqrt();
        let p2 = Float::with_val(work, p.square_ref());
        let p3 = Float::with_val(work, &p2 * &p);
        -1 + p.clone() - p2 / 3u32 + p3 * 11u32 / 72u32
    } else {
        let l1 = Float::with_val(work, -&xw).ln();
        let l2 = Float::with_val(work, -l1.clone()).ln();
        l1 - l2
    };
    let tol = Float::with_val(work, Float::i_exp(1, -(prec as i32) - 8));
    for _ in 0..200 {
        let ew = Float::with_val(work, w.exp_ref());
        let f = Float::with_val(work, &w * &ew) - &xw;
        let wp1 = Float::with_val(work, &w + 1u32);
        if wp1 == 0 {
            break;
        }
        let fprime = Float::with_val(work, &ew * &wp1);
        let corr = Float::with_val(work, &w + 2u32) * &f / (Float::with_val(work, &wp1 * 2u32));
        let step = f / (fprime - corr);
        w -= &step;
        if w > -1 {
            w = Float::with_val(work, -1);
        }
        if step.abs() <= Float::with_val(work, &tol * Float::with_val(work, w.abs_ref()).max(&Float::with_val(work, 1))) {
            break;
        }
    }
    Ok(Float::with_val(prec, w))
}

/// The median `c` with `F_n(c) = 1/2`.
///
/// In `u = n ln A - ln c` the equation reads `e^(-u) sum_{k<n} u^k/k! = 1/2`:
/// `u` is the median of a Gamma(n, 1) variable. The left side decreases from
/// 1 at `u = 0`, so `[0, 2n + 10]` brackets the root; bisection narrows it
/// and Newton finishes.
pub fn median_exact(model: &ProductModel) -> BigReal {
    let u = gamma_median(model.n, model.prec());
    Float::with_val(model.prec(), model.log_upper() - u).exp()
}

/// `c~ = median / A^n`, which does not depend on `A`.
pub fn median_scaled(n: u32, prec: Precision) -> BigReal {
    let u = gamma_median(n, prec.bits());
    (-u).exp()
}

/// `u` solving `P(Poisson(u) <= n-1) = 1/2`.
pub fn gamma_median(n: u32, prec: u32) -> BigReal {
    let work = prec + 32;
    let h = |u: &Float| Float::with_val(work, poisson_tail(u, n) - 0.5f64);
    let mut lo = Float::new(work);
    let mut hi = Float::with_val(work, 2 * n + 10);
    for _ in 0..80 {
        let mid = Float::with_val(work, &lo + &hi) / 2u32;
        if h(&mid) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut u = Float::with_val(work, &lo + &hi) / 2u32;
    let tol = Float::with_val(work, Float::i_exp(1, -(work as i32) + 8));
    for _ in 0..50 {
        let value = h(&u);
        // d/du of the Poisson tail is -e^(-u) u^(n-1)/(n-1)!
        let slope = gamma_density(&u, n);
        if slope == 0 {
            break;
        }
        let step = value / slope;
        u += &step;
        if step.abs() <= Float::with_val(work, &tol * Float::with_val(work, u.abs_ref()).max(&Float::with_val(work, 1))) {
            break;
        }
    }
    Float::with_val(prec, u)
}

/// `e^(1/3) (A/e)^n`.
pub fn median_leading(model: &ProductModel) -> BigReal {
    let prec = model.prec();
    let log = model.log_upper() - model.n + Float::with_val(prec, 3).recip();
    log.exp()
}

/// `e^(1/3) (A/e)^n (1 - 8/(405 n) - 8056/(1148175 n^2))`.
pub fn median_asymptotic(model: &ProductModel) -> BigReal {
    let prec = model.prec();
    let n = Float::with_val(prec, model.n);
    let c1 = Float::with_val(prec, 8) / 405u32 / &n;
    let c2 = Float::with_val(prec, 8056) / 1_148_175u32 / n.square();
    median_leading(model) * (1 - c1 - c2)
}

#[derive(Clone, Debug)]
pub struct GeometricMeanProbability {
    /// `1/2 - (2 pi n)^(-1/2) (1/3 + 1/(540n) - 25/(6048n^2) - 101/(155520n^3))`.
    pub series: BigReal,
    /// `F_n((A/e)^n) = e^(-n) sum_{k<n} n^k/k!`.
    pub exact: BigReal,
}

/// `P(Y_n <= (A/e)^n)`, which does not depend on `A`.
pub fn prob_below_geometric_mean(n: u32, prec: Precision) -> Result<GeometricMeanProbability> {
    if n < 1 {
        return invalid("need at least one factor");
    }
    let bits = prec.bits();
    let nf = Float::with_val(bits, n);
    let mut bracket = Float::with_val(bits, 3).recip();
    bracket += Float::with_val(bits, 540 * n as u64).recip();
    bracket -= Float::with_val(bits, 25) / 6048u32 / nf.clone().square();
    bracket -= Float::with_val(bits, 101) / 155_520u32 / nf.clone().pow(3u32);
    let two_pi_n = Float::with_val(bits, Constant::Pi) * 2u32 * &nf;
    let series = Float::with_val(bits, 0.5) - bracket / two_pi_n.sqrt();
    let exact = poisson_tail(&nf, n);
    Ok(GeometricMeanProbability { series, exact })
}

/// Sample point of a plotted curve.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesPoint {
    pub x: f64,
    pub y: f64,
}

/// `(x, F_n(x))` on an even grid over `[0, A^n]`.
pub fn cdf_series(model: &ProductModel, points: usize) -> Vec<SeriesPoint> {
    let upper = model.upper();
    (0..=points)
        .map(|i| {
            let x = Float::with_val(model.prec(), &upper * i as u32) / points.max(1) as u32;
            SeriesPoint {
                x: x.to_f64(),
                y: product_cdf(model, &x).to_f64(),
            }
        })
        .collect()
}

/// `(x, g~_n(x))` on an even grid over `[lo, hi]`.
pub fn standardized_series(n: u32, lo: f64, hi: f64, points: usize, prec: Precision) -> Vec<SeriesPoint> {
    (0..=points)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / points.max(1) as f64;
            SeriesPoint {
                x,
                y: standardized_log_pdf(n, &prec.real(x)).to_f64(),
            }
        })
        .collect()
}

#[cfg(test)]
#[path = "../tests/common/quad.rs"]
mod quad;

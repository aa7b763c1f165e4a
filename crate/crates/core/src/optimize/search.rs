//! One-dimensional search on log-spaced brackets.

use crate::error::{Error, Result};

/// Pre-scan resolution used to localise the maximum and detect
/// multimodality.
pub const PRESCAN_POINTS: usize = 64;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    /// Relative tolerance on the argument.
    pub tol: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64, tol: f64) -> Result<Self> {
        if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
            return Err(Error::domain("bracket", lo, "0 < lo < hi < inf"));
        }
        if !(tol > 0.0) {
            return Err(Error::domain("tol", tol, "> 0"));
        }
        Ok(Self { lo, hi, tol })
    }

    /// Default power bracket `[1 uW, P_max]` at relative tolerance `1e-6`.
    pub fn power(p_max: f64) -> Result<Self> {
        Self::new(1e-6f64.min(p_max * 1e-3), p_max, 1e-6)
    }

    pub fn grid(&self, points: usize) -> Vec<f64> {
        log_grid(self.lo, self.hi, points)
    }
}

pub(crate) fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == points {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    /// The maximum sits on an end of the bracket.
    pub boundary_hit: bool,
    /// The pre-scan saw at least two strict local maxima.
    pub non_unimodal_detected: bool,
    /// The first-order condition had no sign change in the bracket.
    pub foc_unbracketed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimumReport {
    pub argmax: f64,
    pub value: f64,
    /// Normalised first-order-condition residual at `argmax`.
    pub first_order_residual: f64,
    /// Root of the first-order condition, when one was solved for.
    pub foc_root: Option<f64>,
    pub evaluations: usize,
    pub flags: Flags,
}

/// Number of strict local maxima of a sampled sequence, ends included.
pub(crate) fn strict_local_maxima(v: &[f64]) -> usize {
    let n = v.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || v[i] > v[i - 1];
            let right = i + 1 == n || v[i] > v[i + 1];
            n > 1 && left && right
        })
        .count()
}

fn checked(v: f64) -> Result<f64> {
    if v.is_nan() {
        return Err(Error::NonFinite("objective (NaN)"));
    }
    if v == f64::INFINITY {
        return Err(Error::NonFinite("objective (+inf)"));
    }
    Ok(v)
}

/// Maximises a unimodal `f` over `bracket` by golden-section search in
/// `ln x`.
///
/// A [`PRESCAN_POINTS`]-point log grid first localises the maximum to the
/// two cells around the best grid point. `-inf` values are allowed and rank
/// lowest; NaN or `+inf` aborts.
pub fn maximize_unimodal<F>(mut f: F, bracket: Bracket) -> Result<OptimumReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    let xs = bracket.grid(PRESCAN_POINTS);
    let mut vals = Vec::with_capacity(xs.len());
    for &x in &xs {
        vals.push(checked(f(x)?)?);
    }
    let mut evaluations = xs.len();
    let k = vals
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > vals[best] { i } else { best });
    let mut flags = Flags {
        non_unimodal_detected: strict_local_maxima(&vals) >= 2,
        ..Flags::default()
    };

    let mut a = xs[k.saturating_sub(1)].ln();
    let mut b = xs[(k + 1).min(xs.len() - 1)].ln();
    let (mut best_x, mut best_v) = (xs[k], vals[k]);

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = checked(f(c.exp())?)?;
    let mut fd = checked(f(d.exp())?)?;
    evaluations += 2;
    while b - a > bracket.tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = checked(f(c.exp())?)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = checked(f(d.exp())?)?;
        }
        evaluations += 1;
    }
    let mid = (0.5 * (a + b)).exp().clamp(bracket.lo, bracket.hi);
    let fm = checked(f(mid)?)?;
    evaluations += 1;
    if fm >= best_v {
        best_x = mid;
        best_v = fm;
    }
    let near = |edge: f64| (best_x.ln() - edge.ln()).abs() <= 2.0 * bracket.tol;
    flags.boundary_hit = near(bracket.lo) || near(bracket.hi);

    Ok(OptimumReport {
        argmax: best_x,
        value: best_v,
        first_order_residual: f64::NAN,
        foc_root: None,
        evaluations,
        flags,
    })
}

/// Root of `g` in `[lo, hi]` by bisection in `ln x`, given opposite signs at
/// the ends.
pub(crate) fn bisect_log<G>(mut g: G, lo: f64, hi: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let ga = g(lo)?;
    let gb = g(hi)?;
    if ga.is_nan() || gb.is_nan() || (ga > 0.0) == (gb > 0.0) {
        return Err(Error::NoBracket {
            lo,
            hi,
            detail: format!("g(lo) = {ga}, g(hi) = {gb}"),
        });
    }
    let positive_at_a = ga > 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= 1e-14 * m.abs().max(1.0) {
            break;
        }
        let gm = g(m.exp())?;
        if gm.is_nan() {
            return Err(Error::NonFinite("first-order condition"));
        }
        if (gm > 0.0) == positive_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Root of `g` in the grid cell where it changes sign nearest to `near`.
///
/// Returns `Ok(None)` when `g` keeps one sign on the whole grid.
pub(crate) fn root_near<G>(mut g: G, grid: &[f64], near: f64) -> Result<Option<f64>>
where
    G: FnMut(f64) -> Result<f64>,
{
    let vals: Vec<f64> = grid.iter().map(|&x| g(x)).collect::<Result<_>>()?;
    let cell = (0..grid.len() - 1)
        .filter(|&i| {
            let (u, v) = (vals[i], vals[i + 1]);
            !u.is_nan() && !v.is_nan() && (u > 0.0) != (v > 0.0)
        })
        .min_by(|&i, &j| {
            let di = (0.5 * (grid[i].ln() + grid[i + 1].ln()) - near.ln()).abs();
            let dj = (0.5 * (grid[j].ln() + grid[j + 1].ln()) - near.ln()).abs();
            di.total_cmp(&dj)
        });
    match cell {
        Some(i) => bisect_log(g, grid[i], grid[i + 1]).map(Some),
        None => Ok(None),
    }
}

/// Exhaustive integer argmax for short ranges; for long ranges a log-spaced
/// coarse scan followed by an exhaustive pass around its best point.
pub(crate) fn argmax_integer<F>(lo: usize, hi: usize, mut f: F) -> Result<(usize, f64)>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut best = (lo, f(lo)?);
    let consider = |k: usize, v: f64, best: &mut (usize, f64)| {
        if v > best.1 || (v == best.1 && k < best.0) {
            *best = (k, v);
        }
    };
    if hi - lo <= 512 {
        for k in lo + 1..=hi {
            let v = f(k)?;
            consider(k, v, &mut best);
        }
        return Ok(best);
    }
    let mut candidates: Vec<usize> = log_grid(lo as f64, hi as f64, 256)
        .into_iter()
        .map(|x| (x.round() as usize).clamp(lo, hi))
        .collect();
    candidates.dedup();
    let mut scanned = Vec::with_capacity(candidates.len());
    for &k in &candidates {
        let v = f(k)?;
        scanned.push(v);
        consider(k, v, &mut best);
    }
    let idx = candidates.iter().position(|&k| k == best.0).unwrap_or(0);
    let from = candidates[idx.saturating_sub(1)];
    let to = candidates[(idx + 1).min(candidates.len() - 1)];
    for k in from..=to {
        let v = f(k)?;
        consider(k, v, &mut best);
    }
    Ok(best)
}

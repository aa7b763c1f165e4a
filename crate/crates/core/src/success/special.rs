//! Gaussian tail and regularized incomplete gamma functions.

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

/// Standard normal tail `Q(x) = P[Z > x]`.
pub fn q_function(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("x", x, "not NaN"));
    }
    Ok(q(x))
}

pub(crate) fn q(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Standard normal density.
#[cfg(test)]
pub(crate) fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `ln Q(x)`, finite far into the upper tail.
pub(crate) fn ln_q(x: f64) -> f64 {
    if x < 30.0 {
        return q(x).ln();
    }
    // asymptotic series of the Mills ratio
    let x2 = x * x;
    let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    -0.5 * x2 - (x * (2.0 * PI).sqrt()).ln() + series.ln()
}

fn check_gamma_args(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain("a", a, "finite and > 0"));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain("x", x, ">= 0"));
    }
    Ok(())
}

/// `ln(x^a e^-x / Gamma(a))`.
fn ln_prefactor(a: f64, x: f64) -> f64 {
    a * x.ln() - x - ln_gamma(a)
}

/// Power series for `P(a, x) / prefactor`, good for `x < a + 1`.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum
}

/// Lentz continued fraction for `Q(a, x) / prefactor`, good for `x >= a + 1`.
fn upper_fraction(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `P(a, x) = gamma(a, x) / Gamma(a)`.
pub fn regularized_lower_gamma(a: f64, x: f64) -> Result<f64> {
    check_gamma_args(a, x)?;
    Ok(lower_p(a, x))
}

/// `Q(a, x) = 1 - P(a, x)`, without cancellation in the upper tail.
pub fn regularized_upper_gamma(a: f64, x: f64) -> Result<f64> {
    check_gamma_args(a, x)?;
    Ok(ln_upper_q(a, x).exp())
}

pub(crate) fn lower_p(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x < a + 1.0 {
        (ln_prefactor(a, x).exp() * lower_series(a, x)).min(1.0)
    } else {
        1.0 - (ln_prefactor(a, x) + upper_fraction(a, x).ln()).exp()
    }
}

/// `ln Q(a, x)`.
pub(crate) fn ln_upper_q(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    if x < a + 1.0 {
        let p = ln_prefactor(a, x).exp() * lower_series(a, x);
        (-p.min(1.0)).ln_1p()
    } else {
        ln_prefactor(a, x) + upper_fraction(a, x).ln()
    }
}

/// `ln` of the Gamma(a, 1) density at `x`.
pub(crate) fn ln_gamma_density(a: f64, x: f64) -> f64 {
    ln_prefactor(a, x) - x.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// `1 - e^-x sum_{k<a} x^k / k!` for integer `a`.
    fn poisson_lower(a: u32, x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..a {
            term *= x / k as f64;
            sum += term;
        }
        1.0 - (-x).exp() * sum
    }

    /// Upper normal tail by the continued fraction of the Mills ratio.
    fn q_reference(x: f64) -> f64 {
        assert!(x > 0.0);
        let mut frac = x;
        for k in (1..2000).rev() {
            frac = x + k as f64 / frac;
        }
        phi(x) / frac
    }

    #[test]
    fn q_examples() {
        assert_eq!(q_function(0.0).unwrap(), 0.5);
        assert!((q_function(1.6449).unwrap() - 0.05).abs() < 1e-4);
        assert!(q_function(f64::NAN).is_err());
        assert_eq!(q_function(f64::INFINITY).unwrap(), 0.0);
        assert_eq!(q_function(f64::NEG_INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn q_matches_continued_fraction() {
        for k in 1..60 {
            let x = 2.0 + 0.25 * k as f64;
            assert_relative_eq!(q(x), q_reference(x), max_relative = 1e-10);
        }
    }

    #[test]
    fn ln_q_is_continuous_at_switch_and_accurate() {
        assert_relative_eq!(ln_q(30.0 - 1e-9), ln_q(30.0), max_relative = 1e-9);
        for x in [5.0, 12.0, 25.0] {
            assert_relative_eq!(ln_q(x), q_reference(x).ln(), max_relative = 1e-10);
        }
        assert!(ln_q(1e3).is_finite());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(regularized_lower_gamma(3.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            regularized_lower_gamma(1.0, 0.7).unwrap(),
            1.0 - (-0.7f64).exp(),
            epsilon = 1e-14
        );
        assert!((regularized_lower_gamma(4.0, 4.0).unwrap() - 0.56653).abs() < 1e-4);
        assert!(regularized_lower_gamma(0.0, 1.0).is_err());
        assert!(regularized_lower_gamma(1.0, -1.0).is_err());
    }

    #[test]
    fn gamma_matches_poisson_sum_for_integer_a() {
        for a in 1..=16u32 {
            for k in 0..80 {
                let x = 0.05 * k as f64 * (1.0 + a as f64 / 4.0);
                let got = regularized_lower_gamma(a as f64, x).unwrap();
                assert!((got - poisson_lower(a, x)).abs() < 1e-12, "a={a} x={x}");
            }
        }
    }

    #[test]
    fn gamma_matches_statrs() {
        for a in [0.3, 1.5, 2.0, 7.25, 30.0] {
            for x in [0.01, 0.5, 1.0, 3.0, 10.0, 40.0] {
                let reference = statrs::function::gamma::gamma_lr(a, x);
                assert!((lower_p(a, x) - reference).abs() < 1e-12, "a={a} x={x}");
            }
        }
    }

    #[test]
    fn upper_tail_in_log_domain() {
        // Q(1, x) = e^-x exactly
        assert_relative_eq!(ln_upper_q(1.0, 800.0), -800.0, max_relative = 1e-12);
        // Q(2, x) = (1 + x) e^-x
        assert_relative_eq!(ln_upper_q(2.0, 900.0), 901f64.ln() - 900.0, max_relative = 1e-12);
        assert_eq!(regularized_upper_gamma(4.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn gamma_density_matches_derivative() {
        for (a, x) in [(1.0, 0.5), (4.0, 3.0), (16.0, 20.0)] {
            let h = 1e-6 * x;
            let fd = (lower_p(a, x + h) - lower_p(a, x - h)) / (2.0 * h);
            assert_relative_eq!(ln_gamma_density(a, x).exp(), fd, max_relative = 1e-6);
        }
    }

    proptest! {
        #[test]
        fn q_reflection(x in -40.0f64..40.0) {
            prop_assert!((q(-x) - (1.0 - q(x))).abs() < 1e-15);
        }

        #[test]
        fn q_is_monotone(x in -30.0f64..30.0, dx in 1e-6f64..1.0) {
            prop_assert!(q(x + dx) <= q(x));
        }

        #[test]
        fn lower_gamma_is_a_cdf(a in 0.1f64..50.0, x in 0.0f64..200.0, dx in 0.0f64..5.0) {
            let p = lower_p(a, x);
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!(lower_p(a, x + dx) >= p - 1e-15);
            prop_assert!((p + ln_upper_q(a, x).exp() - 1.0).abs() < 1e-12);
        }
    }
}

//! Real Gamma function.
//!
//! Lanczos approximation (g = 607/128, 15 coefficients) for `x >= 0.5`,
//! reflection formula below. Relative error is a few ulps times `|x|` on
//! `[-170, 170]` away from the poles.

use std::f64::consts::PI;

use super::SpecialError;

const LANCZOS_G: f64 = 607.0 / 128.0;

const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_049e-4,
    2.174_396_181_152_126_4e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_162e-6,
];

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// `sin(pi x)` with exact argument reduction, so that integers give exact zeros.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x % 2.0;
    let r = if r > 1.0 {
        r - 2.0
    } else if r < -1.0 {
        r + 2.0
    } else {
        r
    };
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    // reflect into [-1/2, 1/2]
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        (PI * (-1.0 - r)).sin()
    } else {
        (PI * r).sin()
    }
}

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (Gamma(x + 1) form)
    let mut sum = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    sum
}

fn gamma_positive(x: f64) -> f64 {
    // small integers exactly
    if x == x.floor() && x <= 23.0 {
        let mut acc = 1.0;
        let n = x as u32;
        for k in 2..n {
            acc *= k as f64;
        }
        return acc;
    }
    let xm1 = x - 1.0;
    let t = xm1 + LANCZOS_G + 0.5;
    // split the power so that t^(x-1/2) does not overflow before exp(-t) is applied
    let half = t.powf(0.5 * (xm1 + 0.5));
    SQRT_2PI * half * (half * (-t).exp()) * lanczos_sum(xm1)
}

/// Gamma function of a real argument.
pub fn gamma_real(x: f64) -> Result<f64, SpecialError> {
    if x.is_nan() {
        return Err(SpecialError::Domain("gamma of NaN".into()));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(SpecialError::Pole { x });
    }
    Ok(gamma_unchecked(x))
}

/// Gamma without the pole check; returns `inf` at non-positive integers.
pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x >= 0.5 {
        gamma_positive(x)
    } else {
        let s = sin_pi(x);
        if s == 0.0 {
            return f64::INFINITY;
        }
        PI / (s * gamma_positive(1.0 - x))
    }
}

/// `1 / Gamma(x)`, which is entire: zero at the poles of Gamma.
pub fn recip_gamma(x: f64) -> f64 {
    if x >= 0.5 {
        1.0 / gamma_positive(x)
    } else {
        let s = sin_pi(x);
        s * gamma_positive(1.0 - x) / PI
    }
}

/// Natural log of `|Gamma(x)|` for `x > 0`, via Stirling for large arguments.
pub(crate) fn ln_gamma_positive(x: f64) -> f64 {
    if x < 100.0 {
        return gamma_unchecked(x).ln();
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

//! Thin wrappers over `libm` so the rest of the crate reads like `std` float code.

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn exp_m1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln(1 - e^x)` for `x <= 0`.
#[inline]
pub(crate) fn ln_1m_exp(x: f64) -> f64 {
    if x > -1e-3 {
        // ln(g) - g/2 + g²/24 with g = -x; the next term is below 4e-16
        let g = -x;
        ln(g) - 0.5 * g + g * g / 24.0
    } else if x > -core::f64::consts::LN_2 {
        ln(-exp_m1(x))
    } else {
        ln_1p(-exp(x))
    }
}

/// `1 - e^{-g}` for `g >= 0`.
#[inline]
pub(crate) fn one_m_exp_neg(g: f64) -> f64 {
    if g < 1e-3 {
        // Taylor series to g⁵; the remainder is below g⁶/720
        g * (1.0 - 0.5 * g * (1.0 - g / 3.0 * (1.0 - 0.25 * g * (1.0 - 0.2 * g))))
    } else {
        -exp_m1(-g)
    }
}

/// `ln(e^a + e^b)`.
#[inline]
pub(crate) fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + ln_1p(exp(lo - hi))
}

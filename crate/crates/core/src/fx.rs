//! Float math shim: inherent `f64` methods need `std`, so the `no_std`
//! build routes through `libm` instead.

#![allow(dead_code)]

macro_rules! unary {
    ($($name:ident => $std:ident / $nostd:path;)*) => {$(
        #[cfg(feature = "std")]
        #[inline(always)]
        pub fn $name(x: f64) -> f64 { f64::$std(x) }
        #[cfg(not(feature = "std"))]
        #[inline(always)]
        pub fn $name(x: f64) -> f64 { $nostd(x) }
    )*};
}

unary! {
    sqrt => sqrt / libm::sqrt;
    ln => ln / libm::log;
    exp => exp / libm::exp;
    sin => sin / libm::sin;
    cos => cos / libm::cos;
    asin => asin / libm::asin;
    floor => floor / libm::floor;
    ceil => ceil / libm::ceil;
    round => round / libm::round;
    trunc => trunc / libm::trunc;
    ln_1p => ln_1p / libm::log1p;
    exp_m1 => exp_m1 / libm::expm1;
}

#[cfg(feature = "std")]
#[inline(always)]
pub fn powf(x: f64, y: f64) -> f64 {
    x.powf(y)
}

#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[cfg(feature = "std")]
#[inline(always)]
pub fn powi(x: f64, n: i32) -> f64 {
    x.powi(n)
}

#[cfg(not(feature = "std"))]
pub fn powi(x: f64, n: i32) -> f64 {
    // Exponentiation by squaring, matching the std intrinsic's structure.
    let mut base = if n < 0 { 1.0 / x } else { x };
    let mut k = n.unsigned_abs();
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}

#[cfg(feature = "std")]
#[inline(always)]
pub fn atan2(y: f64, x: f64) -> f64 {
    y.atan2(x)
}

#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

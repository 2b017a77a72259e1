//! Float helpers usable with or without `std`.
//!
//! `sqrt` is correctly rounded by IEEE 754, so hardware and `libm` agree
//! bit-for-bit and we take the fast path when `std` is available. The
//! transcendentals are not correctly rounded in general, so they always go
//! through `libm` to keep results independent of the build configuration.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.sqrt()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::sqrt(x)
    }
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub fn log10(x: f64) -> f64 {
    libm::log10(x)
}

#[inline]
pub fn pow(base: f64, exp: f64) -> f64 {
    libm::pow(base, exp)
}

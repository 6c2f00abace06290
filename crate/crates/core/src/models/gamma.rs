//! Gamma function on the real line.
//!
//! Lanczos approximation with `g = 7` and the usual 9-term coefficient set for
//! `x >= 0.5`, and the reflection formula `Γ(x) Γ(1 - x) = π / sin(πx)` below.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum GammaError {
    #[error("gamma has a pole at {0}")]
    Pole(f64),
    #[error("gamma argument {0} is not finite")]
    NotFinite(f64),
}

const LANCZOS_G: f64 = 7.0;

#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos(x: f64) -> f64 {
    // Γ(x) = Γ(y + 1) with y = x - 1.
    let y = x - 1.0;
    let series = LANCZOS_COEFFS
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_COEFFS[0], |acc, (i, c)| acc + c / (y + i as f64));
    let t = y + LANCZOS_G + 0.5;
    // t^(y + 0.5) split in two to delay overflow.
    let half = t.powf(0.5 * (y + 0.5));
    (2.0 * PI).sqrt() * half * (-t).exp() * half * series
}

/// `Γ(x)` for real `x` that is not a non-positive integer.
pub fn gamma_real(x: f64) -> Result<f64, GammaError> {
    if !x.is_finite() {
        return Err(GammaError::NotFinite(x));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(GammaError::Pole(x));
    }
    if x > 0.5 {
        Ok(lanczos(x))
    } else {
        Ok(PI / ((PI * x).sin() * lanczos(1.0 - x)))
    }
}

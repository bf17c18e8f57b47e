//! Gamma function.
//!
//! Lanczos approximation (g = 7, n = 9) with reflection below 1/2. Relative
//! error is around 1e-15 on the positive axis, far below what any constant
//! in this crate needs.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route: Stirling series for ln Γ at a shifted argument,
    /// pulled back with the recurrence Γ(x) = Γ(x + k) / (x (x+1) … (x+k−1)).
    fn gamma_stirling(x: f64) -> f64 {
        let shift = 20.0;
        let z = x + shift;
        let ln = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * z)
            - 1.0 / (360.0 * z.powi(3))
            + 1.0 / (1260.0 * z.powi(5))
            - 1.0 / (1680.0 * z.powi(7));
        let mut g = ln.exp();
        for k in 0..shift as usize {
            g /= x + k as f64;
        }
        g
    }

    #[test]
    fn half_is_sqrt_pi() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-7);
        assert!((gamma(0.5) - 1.772_453_9).abs() < 1e-7);
    }

    #[test]
    fn three_quarters() {
        assert!((gamma(0.75) - 1.225_416_7).abs() < 1e-6);
        assert!((gamma(0.75) - gamma_stirling(0.75)).abs() < 1e-12);
    }

    #[test]
    fn integers_are_factorials() {
        let mut f = 1.0;
        for n in 1..15 {
            assert!((gamma(n as f64) - f).abs() / f < 1e-13, "n={n}");
            f *= n as f64;
        }
    }

    #[test]
    fn agrees_with_stirling_oracle() {
        for i in 1..200 {
            let x = i as f64 / 24.0;
            let a = gamma(x);
            let b = gamma_stirling(x);
            assert!((a - b).abs() / b < 1e-12, "x={x}: {a} vs {b}");
        }
    }
}

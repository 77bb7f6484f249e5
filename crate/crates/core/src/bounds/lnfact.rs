use crate::scalar::Real;

const DIRECT_LIMIT: usize = 64;

/// `ln Γ(x)` for `x > 0` (Stirling series after upward shifting).
pub fn ln_gamma<T: Real>(x: T) -> T {
    let mut x = x;
    let mut acc = T::zero();
    let shift_to = T::c(16.0);
    while x < shift_to {
        acc -= x.ln();
        x += T::one();
    }
    let inv = T::one() / x;
    let inv2 = inv * inv;
    let series = inv
        * (T::c(1.0 / 12.0)
            - inv2 * (T::c(1.0 / 360.0) - inv2 * (T::c(1.0 / 1260.0) - inv2 * (T::c(1.0 / 1680.0) - inv2 * T::c(1.0 / 1188.0)))));
    acc + (x - T::c(0.5)) * x.ln() - x + T::c(0.5) * T::two_pi().ln() + series
}

/// `ln n!`: exact summation for small `n`, Stirling beyond.
pub fn ln_factorial<T: Real>(n: usize) -> T {
    if n < DIRECT_LIMIT {
        (2..=n).fold(T::zero(), |acc, i| acc + T::idx(i).ln())
    } else {
        ln_gamma(T::idx(n + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_factorials_exact() {
        // 19! = 121645100408832000 and 18! = 6402373705728000
        let l19: f64 = ln_factorial(19);
        assert!((l19 - 121645100408832000f64.ln()).abs() < 1e-13);
        let l18: f64 = ln_factorial(18);
        assert!((l18 - 6402373705728000f64.ln()).abs() < 1e-13);
        assert_eq!(ln_factorial::<f64>(0), 0.0);
        assert_eq!(ln_factorial::<f64>(1), 0.0);
    }

    #[test]
    fn stirling_matches_summation() {
        for n in [64usize, 65, 100, 413, 826, 5000] {
            let direct: f64 = (2..=n).map(|i| (i as f64).ln()).sum();
            let s: f64 = ln_factorial(n);
            assert!(((s - direct) / direct).abs() < 1e-13, "n = {n}: {s} vs {direct}");
        }
    }

    #[test]
    fn gamma_half_integers() {
        // Γ(1/2) = √π, Γ(5/2) = 3√π/4
        let pi = std::f64::consts::PI;
        assert!((ln_gamma(0.5f64) - 0.5 * pi.ln()).abs() < 1e-13);
        assert!((ln_gamma(2.5f64) - (0.75 * pi.sqrt()).ln()).abs() < 1e-13);
    }
}

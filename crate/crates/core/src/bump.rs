//! The smooth compactly supported bump shared by mollifiers and warper perturbations.

/// `exp(-1/(1-x^2))` on `(-1, 1)` with its first two derivatives; zero outside.
pub fn bump(x: f64) -> (f64, f64, f64) {
    if x.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - x * x;
    let b = (-1.0 / q).exp();
    let d1 = -2.0 * x / (q * q);
    let d2 = 4.0 * x * x / (q * q * q * q) - 2.0 / (q * q) - 8.0 * x * x / (q * q * q);
    (b, b * d1, b * d2)
}

/// Peak value `bump(0) = e^{-1}`.
pub const BUMP_PEAK: f64 = 0.367_879_441_171_442_33;

/// Simpson weights of the unit-mass mollifier on `(0, 1)`, sampled on `n` subintervals.
///
/// Returns `(x_k, w_k)` with `sum w_k = 1` exactly up to rounding, so constants are
/// reproduced by the discrete convolution.
pub fn mollifier_weights(n: usize) -> Vec<(f64, f64)> {
    let n = if n % 2 == 1 { n + 1 } else { n };
    let h = 1.0 / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let x = k as f64 * h;
        let coef = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        out.push((x, coef * bump(2.0 * x - 1.0).0));
    }
    let total: f64 = out.iter().map(|p| p.1).sum();
    for p in &mut out {
        p.1 /= total;
    }
    out
}

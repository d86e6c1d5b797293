//! Hermite (physicists') and Laguerre polynomials by upward three-term
//! recurrence, plus the real zeros of `H_n`.
//!
//! Orders are capped at [`MAX_ORDER`]: the recurrences run in plain `f64`
//! and the toolkit only ever needs low quantum numbers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest polynomial order accepted by [`PolyOrder::new`].
pub const MAX_ORDER: u32 = 50;

const ZERO_TOL: f64 = 1e-13;

/// Quantum state index `n >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u32")]
pub struct PolyOrder(u32);

impl PolyOrder {
    pub fn new(n: i64) -> Result<Self> {
        if n < 0 {
            return Err(Error::InvalidArgument(format!("polynomial order must be non-negative, got {n}")));
        }
        if n > MAX_ORDER as i64 {
            return Err(Error::InvalidArgument(format!(
                "polynomial order {n} exceeds the supported maximum {MAX_ORDER}"
            )));
        }
        Ok(Self(n as u32))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// `2^n n!`, the Hermite normalization constant.
    pub fn hermite_norm(self) -> f64 {
        (1..=self.0).fold(1.0, |acc, k| acc * 2.0 * k as f64)
    }
}

impl TryFrom<i64> for PolyOrder {
    type Error = Error;

    fn try_from(n: i64) -> Result<Self> {
        Self::new(n)
    }
}

impl From<PolyOrder> for u32 {
    fn from(n: PolyOrder) -> u32 {
        n.0
    }
}

impl std::fmt::Display for PolyOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite(n: PolyOrder, x: f64) -> f64 {
    let n = n.get();
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_n'(x) = 2n H_{n-1}(x)`.
pub fn hermite_derivative(n: PolyOrder, x: f64) -> f64 {
    match n.get() {
        0 => 0.0,
        k => 2.0 * k as f64 * hermite(PolyOrder(k - 1), x),
    }
}

/// `H_n(x) / sqrt(2^n n!)`, evaluated by its own recurrence so that
/// moderately large `n` does not overflow the prefactor.
pub fn hermite_normalized(n: PolyOrder, x: f64) -> f64 {
    let n = n.get();
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 2.0_f64.sqrt() * x;
    for k in 1..n {
        let k = k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * x * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Returns `(h_n, h_n', h_n'')` for the normalized Hermite polynomial, with
/// the derivatives taken from `H_n' = 2n H_{n-1}` applied twice.
pub fn hermite_normalized_jet(n: PolyOrder, x: f64) -> (f64, f64, f64) {
    let k = n.get();
    let value = hermite_normalized(n, x);
    let first = if k >= 1 { (2.0 * k as f64).sqrt() * hermite_normalized(PolyOrder(k - 1), x) } else { 0.0 };
    let second =
        if k >= 2 { 2.0 * ((k * (k - 1)) as f64).sqrt() * hermite_normalized(PolyOrder(k - 2), x) } else { 0.0 };
    (value, first, second)
}

/// Laguerre polynomial `L_n(x)`.
pub fn laguerre(n: PolyOrder, x: f64) -> f64 {
    let n = n.get();
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_n'(x) = -(L_0 + ... + L_{n-1})(x)`.
pub fn laguerre_derivative(n: PolyOrder, x: f64) -> f64 {
    let n = n.get();
    if n == 0 {
        return 0.0;
    }
    let mut sum = 1.0;
    let mut prev = 1.0;
    let mut cur = 1.0 - x;
    for k in 1..n {
        sum += cur;
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    -sum
}

/// All real zeros of `H_n`, strictly increasing.
///
/// Positive roots are bracketed by a uniform sign-change scan of
/// `(0, sqrt(2n+1) + 1]` and polished with safeguarded Newton; negative roots
/// are their mirror images and odd orders contribute an exact `0.0`.
pub fn hermite_zeros(n: PolyOrder) -> Vec<f64> {
    let k = n.get() as usize;
    if k == 0 {
        return Vec::new();
    }
    let upper = (2.0 * k as f64 + 1.0).sqrt() + 1.0;
    let cells = 64 * k + 64;
    let step = upper / cells as f64;

    let mut positive = Vec::with_capacity(k / 2);
    let mut lo = step * 0.5;
    let mut f_lo = hermite(n, lo);
    for i in 1..=cells {
        let hi = step * (i as f64 + 0.5);
        let f_hi = hermite(n, hi);
        if f_lo == 0.0 {
            positive.push(lo);
        } else if f_lo * f_hi < 0.0 {
            positive.push(polish_root(n, lo, hi));
        }
        lo = hi;
        f_lo = f_hi;
    }

    let mut roots: Vec<f64> = positive.iter().rev().map(|r| -r).collect();
    if k % 2 == 1 {
        roots.push(0.0);
    }
    roots.extend(positive.iter().copied());
    roots.into_iter().map(|r| if r.abs() < ZERO_TOL { 0.0 } else { r }).collect()
}

/// Newton iteration kept inside a shrinking sign-change bracket.
fn polish_root(n: PolyOrder, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo_sign = hermite(n, lo).signum();
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = hermite(n, x);
        if f == 0.0 {
            return x;
        }
        if f.signum() == f_lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        let df = hermite_derivative(n, x);
        let newton = x - f / df;
        let next = if df != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() < ZERO_TOL * 1e-2 || hi - lo < ZERO_TOL {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ord(n: u32) -> PolyOrder {
        PolyOrder::new(n as i64).unwrap()
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(ord(0), 1.7), 1.0);
        assert_eq!(hermite(ord(1), 0.5), 1.0);
        assert_eq!(hermite(ord(3), 1.0), -4.0);
    }

    #[test]
    fn hermite_derivative_values() {
        assert_eq!(hermite_derivative(ord(0), 3.0), 0.0);
        assert_eq!(hermite_derivative(ord(1), 3.0), 2.0);
        assert_eq!(hermite(ord(3), 0.5), -5.0);
        assert_eq!(hermite_derivative(ord(4), 0.5), -40.0);
    }

    #[test]
    fn negative_order_rejected() {
        assert!(matches!(PolyOrder::new(-1), Err(Error::InvalidArgument(_))));
        assert!(matches!(PolyOrder::new(51), Err(Error::InvalidArgument(_))));
        assert!(serde_json_like_rejects());
    }

    // PolyOrder deserializes through TryFrom<i64>; exercise the same path.
    fn serde_json_like_rejects() -> bool {
        PolyOrder::try_from(-3_i64).is_err() && PolyOrder::try_from(3_i64).is_ok()
    }

    #[test]
    fn laguerre_values() {
        assert_eq!(laguerre(ord(5), 0.0), 1.0);
        assert_eq!(laguerre(ord(1), 2.0), -1.0);
        assert_abs_diff_eq!(laguerre(ord(2), 1.0), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn laguerre_derivative_matches_difference_quotient() {
        for n in 0..8 {
            for &x in &[0.0, 0.3, 1.7, 5.0] {
                let h = 1e-5;
                let fd = (laguerre(ord(n), x + h) - laguerre(ord(n), x - h)) / (2.0 * h);
                assert_abs_diff_eq!(laguerre_derivative(ord(n), x), fd, epsilon = 1e-6 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn zeros_small_orders() {
        assert!(hermite_zeros(ord(0)).is_empty());
        assert_eq!(hermite_zeros(ord(1)), vec![0.0]);
        let z2 = hermite_zeros(ord(2));
        assert_abs_diff_eq!(z2[0], -0.5_f64.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(z2[1], 0.5_f64.sqrt(), epsilon = 1e-13);
        let z4 = hermite_zeros(ord(4));
        // roots of 16x^4 - 48x^2 + 12: x^2 = (3 +- sqrt 6) / 2
        let outer = ((3.0 + 6.0_f64.sqrt()) / 2.0).sqrt();
        let inner = ((3.0 - 6.0_f64.sqrt()) / 2.0).sqrt();
        assert_abs_diff_eq!(outer, 1.650680, epsilon = 1e-6);
        let expected = [-outer, -inner, inner, outer];
        for (z, e) in z4.iter().zip(expected) {
            assert_abs_diff_eq!(*z, e, epsilon = 1e-12);
            assert!(hermite(ord(4), *z).abs() <= 1e-12 * hermite_derivative(ord(4), *z).abs().max(1.0));
        }
    }

    #[test]
    fn zeros_are_roots_symmetric_and_interlace() {
        for n in 1..=20 {
            let z = hermite_zeros(ord(n));
            assert_eq!(z.len(), n as usize);
            for w in z.windows(2) {
                assert!(w[0] < w[1]);
            }
            for (a, b) in z.iter().zip(z.iter().rev()) {
                assert_eq!(*a, -*b);
            }
            for r in &z {
                let scale = hermite_derivative(ord(n), *r).abs().max(1.0);
                assert!(hermite(ord(n), *r).abs() <= 1e-11 * scale, "n={n} r={r}");
            }
            let next = hermite_zeros(ord(n + 1));
            for (i, r) in z.iter().enumerate() {
                assert!(next[i] < *r && *r < next[i + 1], "interlacing n={n}");
            }
        }
    }

    #[test]
    fn normalized_hermite_matches_scaled_polynomial() {
        for n in 0..12 {
            let norm = ord(n).hermite_norm().sqrt();
            for &x in &[-3.1, -0.4, 0.0, 0.9, 2.5] {
                let a = hermite_normalized(ord(n), x);
                let b = hermite(ord(n), x) / norm;
                assert_abs_diff_eq!(a, b, epsilon = 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    proptest! {
        #[test]
        fn hermite_parity(n in 0u32..=10, x in -5.0f64..5.0) {
            let a = hermite(ord(n), -x);
            let b = if n % 2 == 0 { 1.0 } else { -1.0 } * hermite(ord(n), x);
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }

        #[test]
        fn hermite_recurrence_consistency(n in 2u32..=10, x in -5.0f64..5.0) {
            let r = hermite(ord(n), x) - 2.0 * x * hermite(ord(n - 1), x)
                + 2.0 * (n - 1) as f64 * hermite(ord(n - 2), x);
            let scale = hermite(ord(n), x).abs().max(1.0);
            prop_assert!(r.abs() <= 1e-10 * scale);
        }

        #[test]
        fn laguerre_recurrence(n in 1u32..=15, x in 0.0f64..30.0) {
            let lhs = (n + 1) as f64 * laguerre(ord(n + 1), x);
            let rhs = (2.0 * n as f64 + 1.0 - x) * laguerre(ord(n), x) - n as f64 * laguerre(ord(n - 1), x);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0));
        }
    }
}

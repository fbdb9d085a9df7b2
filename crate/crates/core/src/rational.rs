//! Best rational approximation by continued fractions.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub p: i64,
    pub q: u64,
}

impl Ratio {
    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// The closest fraction to `x` with denominator at most `max_den`, taken from
/// the convergents and semiconvergents of the continued fraction of `x`.
pub fn best_rational(x: f64, max_den: u64) -> Ratio {
    assert!(max_den >= 1 && x.is_finite());
    let neg = x < 0.0;
    let y = x.abs();

    // Convergents h/k with the usual recurrences.
    let (mut h_prev, mut h) = (0i128, 1i128);
    let (mut k_prev, mut k) = (1i128, 0i128);
    let mut best = Ratio { p: y.round() as i64, q: 1 };
    let mut best_err = (y - y.round()).abs();
    let mut rem = y;
    for _ in 0..64 {
        let a = rem.floor();
        let ai = a as i128;
        let h_next = ai * h + h_prev;
        let k_next = ai * k + k_prev;
        if k_next > max_den as i128 {
            // Largest admissible semiconvergent.
            let t = (max_den as i128 - k_prev) / k;
            if t > 0 {
                let hs = t * h + h_prev;
                let ks = t * k + k_prev;
                let err = (y - hs as f64 / ks as f64).abs();
                if err < best_err {
                    best = Ratio { p: hs as i64, q: ks as u64 };
                }
            }
            break;
        }
        let err = (y - h_next as f64 / k_next as f64).abs();
        if err < best_err || (err == best_err && (k_next as u64) < best.q) {
            best = Ratio { p: h_next as i64, q: k_next as u64 };
            best_err = err;
        }
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
        let frac = rem - a;
        if frac <= 1e-15 * rem.max(1.0) {
            break;
        }
        rem = 1.0 / frac;
    }
    if neg {
        best.p = -best.p;
    }
    best
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `p/q` in lowest terms.
pub fn reduced(r: Ratio) -> Ratio {
    let g = gcd(r.p.unsigned_abs(), r.q).max(1);
    Ratio { p: r.p / g as i64, q: r.q / g }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn classic_approximations() {
        assert_eq!(best_rational(PI, 7), Ratio { p: 22, q: 7 });
        assert_eq!(best_rational(PI, 120), Ratio { p: 355, q: 113 });
        assert_eq!(best_rational(1.0 / 3.0, 64), Ratio { p: 1, q: 3 });
        assert_eq!(best_rational(-0.75, 10), Ratio { p: -3, q: 4 });
        assert_eq!(best_rational(1.0, 1), Ratio { p: 1, q: 1 });
        assert_eq!(best_rational(0.0, 5), Ratio { p: 0, q: 1 });
    }

    #[test]
    fn semiconvergent_beats_convergent() {
        // 0.6180339887 convergents: 1/2, 2/3, 3/5, 5/8 ... with cap 6 the best is 3/5.
        let r = best_rational((5f64.sqrt() - 1.0) / 2.0, 6);
        assert_eq!(r, Ratio { p: 3, q: 5 });
    }

    #[test]
    fn reduction() {
        assert_eq!(reduced(Ratio { p: 4, q: 6 }), Ratio { p: 2, q: 3 });
        assert_eq!(reduced(Ratio { p: 0, q: 6 }), Ratio { p: 0, q: 1 });
    }
}

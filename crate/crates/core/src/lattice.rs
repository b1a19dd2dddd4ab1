//! Enumeration of integer points on the hyperplane `Σ s_j = total` inside a
//! shifted ball `½ Σ (s_j + b_j)² < budget`.
//!
//! Depth-first over the coordinates. At each level the remaining coordinates
//! must sum to a known value, so by Cauchy–Schwarz their contribution is at
//! least `½ (R + B)² / r` (`r` coordinates left, `B` their shift total). That
//! bound is convex in the current coordinate, which makes the admissible
//! values an integer interval found by walking out from its minimizer.

use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::exactnum::{rat_int, Rat};

// Everything is scaled by 2D², D the common denominator of the shifts and
// the budget, so that ½(s + b)² becomes the integer (Ds + Db)².
struct Walk<F: FnMut(&[i64])> {
    den: i128,
    shifts: Vec<i128>,
    suffix: Vec<i128>,
    limit: i128,
    point: Vec<i64>,
    visit: F,
}

// ceil(a / b) for b > 0
fn ceil_div(a: i128, b: i128) -> i128 {
    -(-a).div_euclid(b)
}

impl<F: FnMut(&[i64])> Walk<F> {
    fn own(&self, k: usize, t: i64) -> i128 {
        let v = self.den * t as i128 + self.shifts[k];
        v * v
    }

    fn descend(&mut self, k: usize, used: i128, remaining: i64) {
        let n = self.shifts.len();
        let r = (n - k) as i128;
        if r == 1 {
            let val = used + self.own(k, remaining);
            if val <= self.limit {
                self.point[k] = remaining;
                (self.visit)(&self.point);
            }
            return;
        }
        let rest = self.suffix[k + 1];
        let rr = self.den * remaining as i128;
        // scaled lower bound on Σ_{j≥k}: own(t) + (D(R - t) + B)²/(r - 1),
        // compared after multiplying through by r - 1
        let fits = |w: &Self, t: i64| {
            let tail = rr - w.den * t as i128 + rest;
            (used + w.own(k, t)) * (r - 1) + tail * tail <= w.limit * (r - 1)
        };
        let start = ceil_div(rr + rest - (r - 1) * self.shifts[k], r * self.den) as i64;
        let mut t = start;
        while fits(self, t) {
            self.step(k, used, remaining, t);
            t += 1;
        }
        let mut t = start - 1;
        while fits(self, t) {
            self.step(k, used, remaining, t);
            t -= 1;
        }
    }

    fn step(&mut self, k: usize, used: i128, remaining: i64, t: i64) {
        self.point[k] = t;
        let next = used + self.own(k, t);
        self.descend(k + 1, next, remaining - t);
    }
}

/// Calls `visit` once for every integer vector `s` (length `shifts.len()`)
/// with `Σ s = total` and `½ Σ (s_j + shifts_j)² < budget`, in a
/// deterministic order.
pub fn enumerate_fixed_sum<F: FnMut(&[i64])>(total: i64, shifts: &[Rat], budget: &Rat, visit: F) {
    let n = shifts.len();
    if n == 0 {
        return;
    }
    let den = shifts.iter().fold(budget.denom().clone(), |d, b| d.lcm(b.denom()));
    let den = den.to_i128().expect("lattice shift denominators too large");
    let scaled: Vec<i128> = shifts.iter().map(|b| (b * rat_int(den as i64)).to_integer().to_i128().expect("lattice shift too large")).collect();
    // Σ(Ds + Db)² < 2D²·budget, an integer comparison against its ceiling
    let beta = budget * rat_int(2 * den as i64 * den as i64);
    let limit = if beta.is_integer() { beta.to_integer() - 1u32 } else { beta.floor().to_integer() };
    let limit = limit.to_i128().expect("lattice budget too large");
    if limit < 0 {
        return;
    }
    let mut suffix = vec![0i128; n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] + scaled[j];
    }
    let mut walk = Walk { den, shifts: scaled, suffix, limit, point: vec![0; n], visit };
    walk.descend(0, 0, total);
}

//! Real cubic polynomials: evaluation and bracketed real-root isolation.
//!
//! Roots are isolated between the critical points of the cubic and refined
//! with a bisection-safeguarded Newton iteration. This keeps full relative
//! accuracy for small roots even when the coefficients span many orders of
//! magnitude, which is the normal situation for the parabolic-coordinate
//! polynomials at weak field strength.

use crate::scalar::Real;

/// `c3 x³ + c2 x² + c1 x + c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic<T> {
    pub c3: T,
    pub c2: T,
    pub c1: T,
    pub c0: T,
}

impl<T: Real> Cubic<T> {
    pub fn new(c3: T, c2: T, c1: T, c0: T) -> Self {
        Self { c3, c2, c1, c0 }
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        ((self.c3 * x + self.c2) * x + self.c1) * x + self.c0
    }

    #[inline]
    pub fn deriv(&self, x: T) -> T {
        (T::ci(3) * self.c3 * x + T::ci(2) * self.c2) * x + self.c1
    }

    #[inline]
    pub fn deriv2(&self, x: T) -> T {
        T::ci(6) * self.c3 * x + T::ci(2) * self.c2
    }

    /// Sum of the absolute values of the monomials at `x`; the natural
    /// magnitude against which a residual of [`Cubic::eval`] is judged.
    #[inline]
    pub fn scale(&self, x: T) -> T {
        let ax = x.abs();
        self.c3.abs() * ax * ax * ax + self.c2.abs() * ax * ax + self.c1.abs() * ax + self.c0.abs()
    }

    /// Critical points (roots of the derivative), ascending.
    pub fn critical_points(&self) -> Vec<T> {
        quadratic_roots(T::ci(3) * self.c3, T::ci(2) * self.c2, self.c1)
    }

    /// Real roots in ascending order. A tangential (double) root is reported
    /// once.
    pub fn real_roots(&self) -> Vec<T> {
        if self.c3 == T::zero() {
            return quadratic_roots(self.c2, self.c1, self.c0);
        }
        let lead = self.c3.abs();
        let bound = T::one()
            + (self.c2.abs() / lead)
                .max(self.c1.abs() / lead)
                .max(self.c0.abs() / lead);
        let mut breaks = vec![-bound];
        for c in self.critical_points() {
            if c > -bound && c < bound {
                breaks.push(c);
            }
        }
        breaks.push(bound);

        let mut roots: Vec<T> = Vec::with_capacity(3);
        let tangent_tol = T::c(64.0) * T::epsilon();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa == T::zero() {
                push_unique(&mut roots, a);
            }
            if fa * fb < T::zero() {
                push_unique(&mut roots, self.refine(a, b, fa));
            } else if fb == T::zero() {
                push_unique(&mut roots, b);
            }
        }
        // tangential contact at a critical point
        for c in self.critical_points() {
            let fc = self.eval(c);
            if fc.abs() <= tangent_tol * self.scale(c) {
                push_unique(&mut roots, c);
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots
    }

    fn refine(&self, mut a: T, mut b: T, mut fa: T) -> T {
        let two = T::ci(2);
        let mut x = (a + b) / two;
        for _ in 0..300 {
            let fx = self.eval(x);
            if fx == T::zero() {
                return x;
            }
            if (fx < T::zero()) == (fa < T::zero()) {
                a = x;
                fa = fx;
            } else {
                b = x;
            }
            let d = self.deriv(x);
            let mut next = if d != T::zero() { x - fx / d } else { (a + b) / two };
            if !(next > a.min(b) && next < a.max(b)) {
                next = (a + b) / two;
            }
            let width = (b - a).abs();
            if width <= T::ci(2) * T::epsilon() * x.abs().max(T::min_positive_value()) {
                return next;
            }
            if (next - x).abs() <= T::epsilon() * x.abs() {
                return next;
            }
            x = next;
        }
        x
    }
}

/// Real roots of `a x² + b x + c`, ascending, computed without cancellation.
pub fn quadratic_roots<T: Real>(a: T, b: T, c: T) -> Vec<T> {
    let zero = T::zero();
    if a == zero {
        if b == zero {
            return vec![];
        }
        return vec![-c / b];
    }
    let disc = b * b - T::ci(4) * a * c;
    if disc < zero {
        return vec![];
    }
    let sq = disc.sqrt();
    let q = if b >= zero { -(b + sq) / T::ci(2) } else { (sq - b) / T::ci(2) };
    let mut r = if q == zero {
        vec![zero, zero]
    } else {
        vec![q / a, c / q]
    };
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if disc == zero {
        r.truncate(1);
    }
    r
}

fn push_unique<T: Real>(roots: &mut Vec<T>, x: T) {
    let tol = T::c(1e3) * T::epsilon();
    if roots
        .iter()
        .all(|&r| (r - x).abs() > tol * r.abs().max(x.abs()).max(T::min_positive_value()))
    {
        roots.push(x);
    }
}

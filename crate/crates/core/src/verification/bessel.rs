//! Bessel functions of the first and second kind, orders 0 and 1.
//!
//! Below [`SERIES_LIMIT`] the ascending series are summed in double-double
//! arithmetic so that the cancellation between large alternating terms does
//! not cost precision. Above it the Hankel asymptotic expansion is used.

use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 20.0;
const EULER_HI: f64 = 0.577_215_664_901_532_9;
const EULER_LO: f64 = -4.942_915_152_430_612e-18;

#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        quick_two_sum(s, e + self.lo + o.lo)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + (self.hi * o.lo + self.lo * o.hi);
        quick_two_sum(p, e)
    }

    fn div_f(self, f: f64) -> Dd {
        let q1 = self.hi / f;
        let p = q1 * f;
        let pe = q1.mul_add(f, -p);
        let r = ((self.hi - p) - pe) + self.lo;
        quick_two_sum(q1, r / f)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Terms of the ascending series of `J_n` together with the partial sums
/// weighted by `h(k)`: returns `(sum t_k, sum h(k) t_k)`.
fn series(x: f64, n: u32, mut h: impl FnMut(u32) -> Dd) -> (Dd, Dd) {
    let half = Dd::from(0.5 * x);
    let q = half.mul(half).neg();
    let mut t = if n == 0 { Dd::from(1.0) } else { half };
    let mut s = Dd::ZERO;
    let mut w = Dd::ZERO;
    let mut k = 0u32;
    loop {
        s = s.add(t);
        w = w.add(h(k).mul(t));
        k += 1;
        t = t.mul(q).div_f((k * (k + n)) as f64);
        if t.hi.abs() < 1e-34 * s.hi.abs().max(1e-300) && k > 2 {
            break;
        }
        if k > 400 {
            break;
        }
    }
    (s, w)
}

/// Running harmonic numbers `H_k`, valid when called with k = 0, 1, 2, ...
fn harmonic_seq() -> impl FnMut(u32) -> Dd {
    let mut h = Dd::ZERO;
    move |k| {
        if k > 0 {
            h = h.add(Dd::from(1.0).div_f(k as f64));
        }
        h
    }
}

fn euler() -> Dd {
    Dd { hi: EULER_HI, lo: EULER_LO }
}

/// Hankel expansion: returns `(P, Q)` for order `nu`.
fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        let kk = k as f64;
        if k > 0 {
            term *= (mu - (2.0 * kk - 1.0).powi(2)) / (kk * 8.0 * x);
        }
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    (p, q)
}

fn hankel(nu: f64, x: f64) -> (f64, f64) {
    let (p, q) = hankel_pq(nu, x);
    let chi = x - (0.5 * nu + 0.25) * PI;
    let (s, c) = chi.sin_cos();
    let a = (2.0 / (PI * x)).sqrt();
    (a * (p * c - q * s), a * (p * s + q * c))
}

/// `J_0(x)`.
pub fn j0(x: f64) -> f64 {
    let x = x.abs();
    if x >= SERIES_LIMIT {
        return hankel(0.0, x).0;
    }
    series(x, 0, |_| Dd::ZERO).0.to_f64()
}

/// `J_1(x)`.
pub fn j1(x: f64) -> f64 {
    let s = x.signum();
    let x = x.abs();
    if x >= SERIES_LIMIT {
        return s * hankel(1.0, x).0;
    }
    s * series(x, 1, |_| Dd::ZERO).0.to_f64()
}

/// `Y_0(x)` for `x > 0`; NaN otherwise.
pub fn y0(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    if x >= SERIES_LIMIT {
        return hankel(0.0, x).1;
    }
    let (j, hs) = series(x, 0, harmonic_seq());
    let l = Dd::from((0.5 * x).ln()).add(euler());
    let v = l.mul(j).add(hs.neg());
    2.0 / PI * v.to_f64()
}

/// `Y_1(x)` for `x > 0`; NaN otherwise.
pub fn y1(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    if x >= SERIES_LIMIT {
        return hankel(1.0, x).1;
    }
    let mut hk = harmonic_seq();
    let (j, hs) = series(x, 1, move |k| {
        let a = hk(k);
        a.add(a).add(Dd::from(1.0).div_f((k + 1) as f64))
    });
    let l = Dd::from((0.5 * x).ln()).add(euler());
    let v = Dd::from(2.0).mul(l).mul(j).add(hs.neg());
    (v.to_f64() - 2.0 / x) / PI
}

/// `J_1'(x) = J_0(x) - J_1(x)/x`.
pub fn j1_prime(x: f64) -> f64 {
    j0(x) - j1(x) / x
}

/// `Y_1'(x) = Y_0(x) - Y_1(x)/x`.
pub fn y1_prime(x: f64) -> f64 {
    y0(x) - y1(x) / x
}

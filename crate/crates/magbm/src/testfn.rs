//! Test-function algebra with exact derivative jets.
//!
//! Every node evaluates a jet of derivatives `f, f', ..., f^(5)` in closed
//! form; the trace expansions need up to `f'''`, the moving-cutoff
//! B-derivatives one order more. Compact support is tracked as an interval
//! (Gaussians carry their effective 12-sigma support).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Number of derivative orders carried by a jet (orders `0..JET`).
pub const JET: usize = 6;

pub type Jet = [f64; JET];

/// Smoothstep order: `C^8` transitions, so nine continuous derivatives
/// exist for every plateau-built function.
const STEP_ORDER: usize = 8;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum TestFn {
    /// Normalized Gaussian density `exp(-(x-mu)^2/(2 sigma^2))/(sigma sqrt(2 pi))`.
    Gaussian { mu: f64, sigma: f64 },
    /// Fermi-Dirac occupation `n_beta(x - mu) = 1/(exp(beta(x-mu)) + 1)`.
    FermiDirac { beta: f64, mu: f64 },
    /// Grand-potential kernel `f_beta(mu - x) = -log(1 + exp(beta(mu-x)))/beta`.
    GrandKernel { beta: f64, mu: f64 },
    /// `C^8` plateau: 1 on `[lo, hi]`, 0 outside `[lo - shoulder, hi + shoulder]`.
    Plateau { lo: f64, hi: f64, shoulder: f64 },
    /// Polynomial with ascending coefficients.
    Poly { coeffs: Vec<f64> },
    Sum(Box<TestFn>, Box<TestFn>),
    Product(Box<TestFn>, Box<TestFn>),
    Scale { factor: f64, inner: Box<TestFn> },
    /// `f(x - offset)`.
    Shift { offset: f64, inner: Box<TestFn> },
    /// First derivative of the inner function.
    Deriv(Box<TestFn>),
    /// Analytic B-derivative of a moving plateau: edges `lo(B)`, `hi(B)`
    /// drift with rates `dlo`, `dhi`.
    PlateauDb { lo: f64, hi: f64, shoulder: f64, dlo: f64, dhi: f64 },
}

/// Stable logistic `n(x) = 1/(e^x + 1)`.
pub fn logistic(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Stable softplus `log(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Derivatives of the logistic in `x`: `d^k/dx^k n` for `k = 0..JET`,
/// generated through the polynomial recursion `n' = n^2 - n` applied to
/// polynomials in `n`.
fn logistic_jet(x: f64) -> Jet {
    let mut polys: Vec<Vec<f64>> = vec![vec![0.0, 1.0]];
    for k in 0..JET - 1 {
        let p = &polys[k];
        let mut q = vec![0.0; p.len() + 1];
        for (j, &c) in p.iter().enumerate().skip(1) {
            q[j + 1] += c * j as f64;
            q[j] -= c * j as f64;
        }
        polys.push(q);
    }
    let n = logistic(x);
    let mut out = [0.0; JET];
    for (k, p) in polys.iter().enumerate() {
        let mut acc = 0.0;
        for &c in p.iter().rev() {
            acc = acc * n + c;
        }
        out[k] = acc;
    }
    out
}

/// Coefficients of the order-`N` smoothstep on `[0,1]`
/// (degree `2N+1`, `C^N` at both ends, `S(0)=0`, `S(1)=1`).
fn smoothstep_coeffs() -> Vec<f64> {
    let n = STEP_ORDER;
    let binom = |a: usize, b: usize| -> f64 {
        let mut r = 1.0_f64;
        for i in 0..b {
            r = r * (a - i) as f64 / (i + 1) as f64;
        }
        r
    };
    // S_N(t) = sum_k C(N+k,k) C(2N+1, N-k) (-t)^k t^{N+1}
    let mut coeffs = vec![0.0; 2 * n + 2];
    for k in 0..=n {
        let c = binom(n + k, k) * binom(2 * n + 1, n - k) * if k % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[n + 1 + k] = c;
    }
    coeffs
}

fn poly_jet(coeffs: &[f64], x: f64) -> Jet {
    let mut out = [0.0; JET];
    let mut c: Vec<f64> = coeffs.to_vec();
    for slot in out.iter_mut() {
        let mut acc = 0.0;
        for &v in c.iter().rev() {
            acc = acc * x + v;
        }
        *slot = acc;
        for j in 1..c.len() {
            c[j - 1] = c[j] * j as f64;
        }
        if let Some(last) = c.last_mut() {
            *last = 0.0;
        }
    }
    out
}

/// Rising `C^8` step: 0 for `x <= a`, 1 for `x >= a + w`.
fn step_jet(a: f64, w: f64, x: f64) -> Jet {
    let t = (x - a) / w;
    if t <= 0.0 {
        return [0.0; JET];
    }
    if t >= 1.0 {
        let mut out = [0.0; JET];
        out[0] = 1.0;
        return out;
    }
    let coeffs = smoothstep_coeffs();
    let mut jet = poly_jet(&coeffs, t);
    let mut s = 1.0;
    for (k, v) in jet.iter_mut().enumerate() {
        if k > 0 {
            s /= w;
            *v *= s;
        }
    }
    jet
}

fn jet_sum(a: &Jet, b: &Jet) -> Jet {
    let mut out = [0.0; JET];
    for k in 0..JET {
        out[k] = a[k] + b[k];
    }
    out
}

fn jet_product(a: &Jet, b: &Jet) -> Jet {
    let mut out = [0.0; JET];
    for k in 0..JET {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for j in 0..=k {
            if j > 0 {
                binom = binom * (k - j + 1) as f64 / j as f64;
            }
            acc += binom * a[j] * b[k - j];
        }
        out[k] = acc;
    }
    out
}

fn falling_step_jet(hi: f64, w: f64, x: f64) -> Jet {
    let mut fall = step_jet(hi, w, x);
    fall[0] = 1.0 - fall[0];
    for v in fall.iter_mut().skip(1) {
        *v = -*v;
    }
    fall
}

fn plateau_jet(lo: f64, hi: f64, w: f64, x: f64) -> Jet {
    jet_product(&step_jet(lo - w, w, x), &falling_step_jet(hi, w, x))
}

impl TestFn {
    /// Derivative jet `[f, f', ..., f^(5)]` at `x`.
    pub fn jet(&self, x: f64) -> Jet {
        match self {
            TestFn::Gaussian { mu, sigma } => {
                let t = (x - mu) / sigma;
                let f = (-0.5 * t * t).exp() / (sigma * (2.0 * PI).sqrt());
                // f^(k) = (-1/sigma)^k He_k(t) f, probabilists' Hermite.
                let mut he = [0.0; JET];
                he[0] = 1.0;
                he[1] = t;
                for k in 1..JET - 1 {
                    he[k + 1] = t * he[k] - k as f64 * he[k - 1];
                }
                let mut out = [0.0; JET];
                let mut s = 1.0;
                for k in 0..JET {
                    out[k] = s * he[k] * f;
                    s *= -1.0 / sigma;
                }
                out
            }
            TestFn::FermiDirac { beta, mu } => {
                let lj = logistic_jet(beta * (x - mu));
                let mut out = [0.0; JET];
                let mut s = 1.0;
                for k in 0..JET {
                    out[k] = s * lj[k];
                    s *= beta;
                }
                out
            }
            TestFn::GrandKernel { beta, mu } => {
                let y = beta * (mu - x);
                let lj = logistic_jet(-y);
                let mut out = [0.0; JET];
                out[0] = -softplus(y) / beta;
                // d/dx f_beta(mu - x) = n_beta(x - mu) = logistic(-y), and
                // every further x-derivative pulls a factor beta.
                let mut s = 1.0;
                for k in 1..JET {
                    out[k] = s * lj[k - 1];
                    s *= beta;
                }
                out
            }
            TestFn::Plateau { lo, hi, shoulder } => plateau_jet(*lo, *hi, *shoulder, x),
            TestFn::Poly { coeffs } => poly_jet(coeffs, x),
            TestFn::Sum(a, b) => jet_sum(&a.jet(x), &b.jet(x)),
            TestFn::Product(a, b) => jet_product(&a.jet(x), &b.jet(x)),
            TestFn::Scale { factor, inner } => {
                let mut j = inner.jet(x);
                for v in j.iter_mut() {
                    *v *= factor;
                }
                j
            }
            TestFn::Shift { offset, inner } => inner.jet(x - offset),
            TestFn::Deriv(inner) => {
                let j = inner.jet(x);
                let mut out = [0.0; JET];
                out[..JET - 1].copy_from_slice(&j[1..]);
                out
            }
            TestFn::PlateauDb { lo, hi, shoulder, dlo, dhi } => {
                // Moving an edge by de changes the plateau by -de times the
                // corresponding edge part of the x-derivative.
                let w = *shoulder;
                let rise = step_jet(lo - w, w, x);
                let fall = falling_step_jet(*hi, w, x);
                let mut drise = [0.0; JET];
                drise[..JET - 1].copy_from_slice(&rise[1..]);
                let mut dfall = [0.0; JET];
                dfall[..JET - 1].copy_from_slice(&fall[1..]);
                let a = jet_product(&drise, &fall);
                let b = jet_product(&rise, &dfall);
                let mut out = [0.0; JET];
                for k in 0..JET {
                    out[k] = -dlo * a[k] - dhi * b[k];
                }
                out
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.jet(x)[0]
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.jet(x)[1]
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.jet(x)[2]
    }

    pub fn d3(&self, x: f64) -> f64 {
        self.jet(x)[3]
    }

    /// Support interval; `None` means the whole line. Gaussians report
    /// their effective support `mu +- 12 sigma` (tails below 5e-32).
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            TestFn::Gaussian { mu, sigma } => Some((mu - 12.0 * sigma, mu + 12.0 * sigma)),
            TestFn::FermiDirac { .. } | TestFn::GrandKernel { .. } | TestFn::Poly { .. } => None,
            TestFn::Plateau { lo, hi, shoulder } => Some((lo - shoulder, hi + shoulder)),
            TestFn::PlateauDb { lo, hi, shoulder, .. } => Some((lo - shoulder, hi + shoulder)),
            TestFn::Sum(a, b) => match (a.support(), b.support()) {
                (Some((l1, h1)), Some((l2, h2))) => Some((l1.min(l2), h1.max(h2))),
                _ => None,
            },
            TestFn::Product(a, b) => match (a.support(), b.support()) {
                (Some((l1, h1)), Some((l2, h2))) => {
                    let lo = l1.max(l2);
                    let hi = h1.min(h2);
                    Some((lo, hi.max(lo)))
                }
                (Some(s), None) | (None, Some(s)) => Some(s),
                (None, None) => None,
            },
            TestFn::Scale { inner, .. } | TestFn::Deriv(inner) => inner.support(),
            TestFn::Shift { offset, inner } => {
                inner.support().map(|(l, h)| (l + offset, h + offset))
            }
        }
    }

    /// Smoothness order `K` (the function is `C^{K+1}`): plateau-built
    /// functions are capped by the smoothstep order, analytic families
    /// default to 9; each derivative costs one order.
    pub fn smoothness_k(&self) -> usize {
        match self {
            TestFn::Gaussian { .. }
            | TestFn::FermiDirac { .. }
            | TestFn::GrandKernel { .. }
            | TestFn::Poly { .. } => 9,
            TestFn::Plateau { .. } | TestFn::PlateauDb { .. } => STEP_ORDER,
            TestFn::Sum(a, b) | TestFn::Product(a, b) => a.smoothness_k().min(b.smoothness_k()),
            TestFn::Scale { inner, .. } | TestFn::Shift { inner, .. } => inner.smoothness_k(),
            TestFn::Deriv(inner) => inner.smoothness_k().saturating_sub(1),
        }
    }

    pub fn sum(a: TestFn, b: TestFn) -> TestFn {
        TestFn::Sum(Box::new(a), Box::new(b))
    }

    pub fn product(a: TestFn, b: TestFn) -> TestFn {
        TestFn::Product(Box::new(a), Box::new(b))
    }

    pub fn scale(factor: f64, inner: TestFn) -> TestFn {
        TestFn::Scale { factor, inner: Box::new(inner) }
    }

    pub fn shift(offset: f64, inner: TestFn) -> TestFn {
        TestFn::Shift { offset, inner: Box::new(inner) }
    }

    pub fn deriv(inner: TestFn) -> TestFn {
        TestFn::Deriv(Box::new(inner))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_functions() -> Vec<TestFn> {
        vec![
            TestFn::Gaussian { mu: 1.3, sigma: 0.8 },
            TestFn::FermiDirac { beta: 2.5, mu: 0.4 },
            TestFn::GrandKernel { beta: 1.7, mu: -0.6 },
            TestFn::Plateau { lo: -1.0, hi: 2.0, shoulder: 0.7 },
            TestFn::Poly { coeffs: vec![0.3, -1.2, 0.5, 0.04] },
            TestFn::product(
                TestFn::Gaussian { mu: 0.0, sigma: 1.1 },
                TestFn::Poly { coeffs: vec![0.0, 1.0] },
            ),
            TestFn::sum(
                TestFn::scale(0.3, TestFn::FermiDirac { beta: 3.0, mu: 0.0 }),
                TestFn::shift(0.5, TestFn::Gaussian { mu: 0.0, sigma: 0.5 }),
            ),
            TestFn::deriv(TestFn::FermiDirac { beta: 2.0, mu: 0.1 }),
        ]
    }

    /// Derivative evaluators agree with central finite differences at 50
    /// random points to 1e-6 relative.
    #[test]
    fn jets_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for f in sample_functions() {
            for _ in 0..50 {
                let x: f64 = rng.gen_range(-3.0..3.5);
                let h = 1e-4;
                let j = f.jet(x);
                for order in 0..3 {
                    let up = f.jet(x + h)[order];
                    let dn = f.jet(x - h)[order];
                    let fd = (up - dn) / (2.0 * h);
                    let scale = 1.0 + j[order + 1].abs() + j[order].abs();
                    assert!(
                        (fd - j[order + 1]).abs() / scale < 1e-6,
                        "{f:?} order {order} at {x}: fd {fd} vs {}",
                        j[order + 1]
                    );
                }
            }
        }
    }

    #[test]
    fn gaussian_reference_values() {
        let g = TestFn::Gaussian { mu: 0.0, sigma: 1.0 };
        assert!((g.eval(0.0) - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        // f''(mu) = -1/sqrt(2 pi) for the unit-width density.
        assert!((g.d2(0.0) + 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fermi_and_grand_kernel_identities() {
        let beta = 1.9;
        let n = TestFn::FermiDirac { beta, mu: 0.0 };
        assert!((n.eval(0.0) - 0.5).abs() < 1e-14);
        // Stability far in the tails (|beta x| up to ~700).
        assert!(n.eval(500.0 / beta).abs() < 1e-200);
        assert!((n.eval(-500.0 / beta) - 1.0).abs() < 1e-15);
        // GrandKernel at mu = 0 gives F(x) = f_beta(-x) with
        // F'(x) = n_beta(x); equivalently f_beta'(y) = n_beta(y) - 1.
        let fk = TestFn::GrandKernel { beta, mu: 0.0 };
        for x in [-4.0, -0.3, 0.0, 0.7, 5.0] {
            let want = logistic(beta * x);
            assert!((fk.d1(x) - want).abs() < 1e-10, "x={x}");
        }
        // Asymptotics of f_beta: -> 0 at +inf, ~ -x at -inf.
        let fbeta = |x: f64| -softplus(beta * x) / beta;
        assert!(fbeta(50.0 / beta).abs() < 1e-20);
        assert!((fbeta(-50.0 / beta) + 50.0 / beta).abs() < 1e-15);
    }

    #[test]
    fn plateau_shape_and_smooth_edges() {
        let p = TestFn::Plateau { lo: 0.0, hi: 2.0, shoulder: 0.5 };
        assert_eq!(p.eval(-0.6), 0.0);
        assert_eq!(p.eval(0.0), 1.0);
        assert_eq!(p.eval(1.0), 1.0);
        assert_eq!(p.eval(2.0), 1.0);
        assert_eq!(p.eval(2.6), 0.0);
        let v = p.eval(2.25);
        assert!(v > 0.0 && v < 1.0);
        assert_eq!(p.support(), Some((-0.5, 2.5)));
        assert_eq!(p.smoothness_k(), 8);
    }

    #[test]
    fn plateau_db_matches_finite_difference_in_b() {
        // A moving upper edge hi(B) = sqrt(2 B N).
        let n = 3.0_f64;
        let b = 40.0_f64;
        let hi = (2.0 * b * n).sqrt();
        let dhi = (n / (2.0 * b)).sqrt();
        let mk = |bb: f64| TestFn::Plateau { lo: -1.0, hi: (2.0 * bb * n).sqrt(), shoulder: 0.8 };
        let db = TestFn::PlateauDb { lo: -1.0, hi, shoulder: 0.8, dlo: 0.0, dhi };
        let h = 1e-5 * b;
        for x in [hi - 0.5, hi + 0.2, hi + 0.5, hi + 0.79, 0.0] {
            let fd = (mk(b + h).eval(x) - mk(b - h).eval(x)) / (2.0 * h);
            assert!(
                (fd - db.eval(x)).abs() < 1e-7 * (1.0 + fd.abs()),
                "x={x}: fd {fd} vs {}",
                db.eval(x)
            );
        }
    }

    proptest! {
        #[test]
        fn product_jets_are_bilinear(a in -2.0f64..2.0, x in -2.0f64..2.0) {
            let f = TestFn::Gaussian { mu: 0.3, sigma: 0.9 };
            let g = TestFn::FermiDirac { beta: 2.0, mu: -0.2 };
            let scaled = TestFn::product(TestFn::scale(a, f.clone()), g.clone());
            let plain = TestFn::product(f, g);
            let j1 = scaled.jet(x);
            let j2 = plain.jet(x);
            for k in 0..JET {
                prop_assert!((j1[k] - a * j2[k]).abs() < 1e-12 * (1.0 + j2[k].abs()));
            }
        }
    }
}

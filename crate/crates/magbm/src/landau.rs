//! Landau levels and zero modes on the magnetic torus.
//!
//! For a constant field `B` in the symmetric gauge `A(z) = -(B/2) i z` the
//! annihilation/creation pair of the Floquet fiber at quasi-momentum `k` is
//!
//! ```text
//! a_k  = 2 D_z    + conj(k) - (i B / 2) conj(z),
//! a_k* = 2 D_zbar + k       + (i B / 2) z,           [a_k, a_k*] = 2B,
//! ```
//!
//! and the zero mode on the flux-one torus is assembled from the odd Jacobi
//! theta function. Higher ladder states are generated symbolically: writing
//! `psi_n = q_n psi_0`, the conjugated creation operator acts on the
//! polynomial algebra in `z`, `conj(z)` and the logarithmic derivatives
//! `G_m = f^(m)/f` of the holomorphic factor, so no numerical
//! differentiation ever enters.

use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::grid::TorusGenerators;
use crate::lattice::omega;
use crate::theta::{theta_ab, theta_derivative, ThetaParams};
use crate::{Error, Result};

/// Relativistic Landau level `lambda_{n,B} = sgn(n) sqrt(2|n|B)`.
pub fn landau_level(n: i64, b: f64) -> Result<f64> {
    if b <= 0.0 {
        return Err(Error::Domain(format!("field strength B={b} <= 0")));
    }
    Ok(n.signum() as f64 * (2.0 * n.unsigned_abs() as f64 * b).sqrt())
}

/// Magnetic torus `Gamma_lambda = gamma_1 Z + gamma_2 Z` with
/// `gamma_j = 4 pi i w^j lambda` and quantized flux
/// `B = k2 / (8 pi lambda^2 Im w)` (`k2` flux quanta per enlarged cell).
#[derive(Debug, Clone, Copy)]
pub struct MagneticTorus {
    pub lambda: i64,
    pub k2: i64,
    pub b: f64,
    pub bloch_k: C64,
}

impl MagneticTorus {
    pub fn new(lambda: i64, k2: i64, bloch_k: C64) -> Result<Self> {
        if lambda == 0 {
            return Err(Error::Domain("lambda must be a nonzero integer".into()));
        }
        if k2 <= 0 {
            return Err(Error::Domain("flux index k2 must be positive".into()));
        }
        let l = lambda as f64;
        let b = k2 as f64 / (8.0 * PI * l * l * omega().im);
        Ok(MagneticTorus { lambda, k2, b, bloch_k })
    }

    /// Flux quantization residual; an integer up to rounding by construction.
    pub fn flux_integer(&self) -> f64 {
        8.0 * PI * (self.lambda * self.lambda) as f64 * self.b * omega().im
    }

    pub fn gamma(&self, m: i64, n: i64) -> C64 {
        let w = omega();
        let l = self.lambda as f64;
        4.0 * PI * C64::i() * l * (w * m as f64 + w * w * n as f64)
    }

    pub fn gens(&self) -> TorusGenerators {
        TorusGenerators { t1: self.gamma(1, 0), t2: self.gamma(0, 1) }
    }
}

/// Magnetic translation `T_gamma u(z) = exp((iB/2) Im(conj(gamma) z)) u(z + gamma)`
/// with the commutator-correcting sign, applied to a closure.
pub fn magnetic_translation<F: Fn(C64) -> C64>(
    t: &MagneticTorus,
    m: i64,
    n: i64,
    u: F,
    z: C64,
) -> C64 {
    let gamma = t.gamma(m, n);
    let phase = (C64::i() * ((m * n * t.k2) as f64) * PI).exp();
    phase * (C64::i() * 0.5 * t.b * (gamma.conj() * z).im).exp() * u(z + gamma)
}

/// The theta-function zero mode of `a_k` on the flux-one magnetic torus.
pub struct BlochZeroMode {
    pub torus: MagneticTorus,
    theta: ThetaParams,
    /// Exponential slope of the holomorphic factor, `Im k + 1/(4 lambda)`.
    theta_exp: C64,
    /// Theta-argument shift determined by the quasi-momentum.
    z_k: C64,
    /// Argument scale `1/(-4 pi lambda i)`.
    arg_scale: C64,
}

impl BlochZeroMode {
    pub fn new(torus: MagneticTorus) -> Result<Self> {
        if torus.k2 != 1 {
            return Err(Error::Domain(
                "theta zero mode is constructed for a single flux quantum (k2 = 1)".into(),
            ));
        }
        let w = omega();
        let l = torus.lambda as f64;
        let k = torus.bloch_k;
        // Slope and theta shift solve the magnetic quasi-periodicity
        // conditions T_{gamma_1} psi = T_{gamma_2} psi = psi. Composing the
        // translations forces T_{gamma_0} psi = -psi at gamma_0 =
        // -gamma_1-gamma_2 (single flux quantum), which fixes the slope
        // -Im k; the gamma_2 condition then pins the theta shift.
        let z_k = 3.0_f64.sqrt() * l * k.conj() + 0.5;
        Ok(BlochZeroMode {
            torus,
            theta: ThetaParams::odd(w)?,
            theta_exp: C64::new(-k.im, 0.0),
            z_k,
            arg_scale: 1.0 / (-4.0 * PI * l * C64::i()),
        })
    }

    /// Holomorphic factor `f_k(w) = e^{theta_exp w} theta_{1/2,1/2}(w s - z_k | w)`.
    pub fn f_holo(&self, w: C64) -> C64 {
        (self.theta_exp * w).exp() * theta_ab(&self.theta, w * self.arg_scale - self.z_k)
    }

    /// Zero mode `psi_0(z) = e^{-B|z|^2/4} f_k(conj z) e^{-B conj(z)^2/4} e^{-i Re(z conj k)}`.
    pub fn eval(&self, z: C64) -> C64 {
        let b = self.torus.b;
        let k = self.torus.bloch_k;
        let zb = z.conj();
        (-0.25 * b * z.norm_sqr() + C64::new(0.0, -1.0) * (z * k.conj()).re).exp()
            * self.f_holo(zb)
            * (-0.25 * b * zb * zb).exp()
    }

    /// Logarithmic derivatives `G_m = f^(m)(w)/f(w)` of the holomorphic
    /// factor, `m = 1..=max_order`, at `w = conj(z)`.
    pub fn g_values(&self, z: C64, max_order: u32) -> Vec<C64> {
        let w = z.conj();
        let u = w * self.arg_scale - self.z_k;
        let th0 = theta_ab(&self.theta, u);
        let mut l = vec![C64::new(1.0, 0.0)];
        for j in 1..=max_order {
            l.push(theta_derivative(&self.theta, u, j) / th0);
        }
        let mut g = Vec::with_capacity(max_order as usize);
        for m in 1..=max_order {
            let mut acc = C64::ZERO;
            let mut binom = 1.0;
            for j in 0..=m {
                if j > 0 {
                    binom = binom * (m - j + 1) as f64 / j as f64;
                }
                acc += binom * self.theta_exp.powu(m - j) * self.arg_scale.powu(j) * l[j as usize];
            }
            g.push(acc);
        }
        g
    }

    /// `d/dz` of `psi_0` divided by `psi_0` (the z-dependence sits only in
    /// the Gaussian and the Bloch phase).
    pub fn dz_log(&self, z: C64) -> C64 {
        -0.25 * self.torus.b * z.conj() - 0.5 * C64::i() * self.torus.bloch_k.conj()
    }

    /// `d/dzbar` of `psi_0` divided by `psi_0`.
    pub fn dzbar_log(&self, z: C64) -> C64 {
        let b = self.torus.b;
        let g1 = self.g_values(z, 1)[0];
        -0.25 * b * z + g1 - 0.5 * b * z.conj() - 0.5 * C64::i() * self.torus.bloch_k
    }
}

// ---------------------------------------------------------------------------
// Symbolic ladder algebra.
// ---------------------------------------------------------------------------

/// Monomial key `z^i conj(z)^j prod_m G_m` (the G-indices form a sorted
/// multiset).
type Mono = (u32, u32, Vec<u32>);

/// Polynomial in `z`, `conj(z)` and the logarithmic derivatives `G_m`,
/// representing a quotient `q = psi / psi_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderPoly {
    pub terms: BTreeMap<Mono, C64>,
}

impl LadderPoly {
    pub fn one() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, 0, Vec::new()), C64::new(1.0, 0.0));
        LadderPoly { terms }
    }

    fn add_term(&mut self, key: Mono, c: C64) {
        let e = self.terms.entry(key.clone()).or_insert(C64::ZERO);
        *e += c;
        if e.norm() == 0.0 {
            self.terms.remove(&key);
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        let terms = self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        LadderPoly { terms }
    }

    /// `d/dzbar`: lowers the `conj(z)` power and differentiates the G-chain
    /// via `d/dzbar G_m = G_{m+1} - G_1 G_m`.
    pub fn dzbar(&self) -> Self {
        let mut out = LadderPoly { terms: BTreeMap::new() };
        for ((i, j, gs), &c) in &self.terms {
            if *j > 0 {
                out.add_term((*i, j - 1, gs.clone()), c * *j as f64);
            }
            for (pos, &m) in gs.iter().enumerate() {
                let mut up = gs.clone();
                up[pos] = m + 1;
                up.sort_unstable();
                out.add_term((*i, *j, up), c);
                let mut cross = gs.clone();
                cross.push(1);
                cross.sort_unstable();
                out.add_term((*i, *j, cross), -c);
            }
        }
        out
    }

    /// `d/dz`: lowers the `z` power only.
    pub fn dz(&self) -> Self {
        let mut out = LadderPoly { terms: BTreeMap::new() };
        for ((i, j, gs), &c) in &self.terms {
            if *i > 0 {
                out.add_term((i - 1, *j, gs.clone()), c * *i as f64);
            }
        }
        out
    }

    /// Conjugated creation operator
    /// `C q = -2i d/dzbar q + (iB(z + conj z) - 2i G_1) q`.
    pub fn creation(&self, b: f64) -> Self {
        let mut out = self.dzbar().scale(C64::new(0.0, -2.0));
        let ib = C64::new(0.0, b);
        for ((i, j, gs), &c) in &self.terms {
            out.add_term((i + 1, *j, gs.clone()), c * ib);
            out.add_term((*i, j + 1, gs.clone()), c * ib);
            let mut g1 = gs.clone();
            g1.push(1);
            g1.sort_unstable();
            out.add_term((*i, *j, g1), c * C64::new(0.0, -2.0));
        }
        out
    }

    /// Conjugated annihilation operator `A q = -2i d/dz q` (exact because
    /// `a_k psi_0 = 0`).
    pub fn annihilation(&self) -> Self {
        self.dz().scale(C64::new(0.0, -2.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), -v);
        }
        out
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Highest G-index appearing in the polynomial.
    pub fn g_order(&self) -> u32 {
        self.terms.keys().filter_map(|(_, _, gs)| gs.last().copied()).max().unwrap_or(0)
    }

    /// Evaluate at `z` given the values `g[m-1] = G_m`.
    pub fn eval(&self, z: C64, g: &[C64]) -> C64 {
        let zb = z.conj();
        let mut acc = C64::ZERO;
        for ((i, j, gs), &c) in &self.terms {
            let mut t = c * z.powu(*i) * zb.powu(*j);
            for &m in gs {
                t *= g[(m - 1) as usize];
            }
            acc += t;
        }
        acc
    }
}

/// Normalized ladder quotient `q_n` with `psi_n = q_n psi_0` and
/// `a* psi_n = sqrt(2B(n+1)) psi_{n+1}`. Supported for `n <= 8`.
pub fn ladder_q(n: u32, b: f64) -> Result<LadderPoly> {
    if n > 8 {
        return Err(Error::Domain(format!("ladder state n={n} > 8 not supported")));
    }
    let mut q = LadderPoly::one();
    for m in 0..n {
        q = q.creation(b).scale(C64::new(1.0 / (2.0 * b * (m + 1) as f64).sqrt(), 0.0));
    }
    Ok(q)
}

// ---------------------------------------------------------------------------
// Periodic-field zero modes.
// ---------------------------------------------------------------------------

/// Which first-order equation the corrector solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolVariant {
    /// `(-2i d/dzbar + A_per) psi = 0`.
    Dzbar,
    /// `(-2i d/dz + A_per) psi = 0`.
    Dz,
}

/// Fourier coefficients of the corrector `phi` with `psi = exp(-phi)`:
/// termwise division of the `A` series by the symbol of the derivative.
pub fn corrector_fourier(
    a_fourier: &BTreeMap<(i64, i64), C64>,
    gens: &TorusGenerators,
    variant: HolVariant,
) -> Result<BTreeMap<(i64, i64), C64>> {
    let d = gens.t1 * gens.t2.conj() - gens.t2 * gens.t1.conj();
    let mut phi = BTreeMap::new();
    for (&(n1, n2), &a) in a_fourier {
        if n1 == 0 && n2 == 0 {
            return Err(Error::Domain(
                "periodic vector potential must have no constant Fourier mode".into(),
            ));
        }
        let denom = match variant {
            HolVariant::Dzbar => gens.t1 * n2 as f64 - gens.t2 * n1 as f64,
            HolVariant::Dz => gens.t2.conj() * n1 as f64 - gens.t1.conj() * n2 as f64,
        };
        if denom.norm() < 1e-14 {
            return Err(Error::Numeric(format!(
                "degenerate corrector denominator at mode ({n1},{n2})"
            )));
        }
        phi.insert((n1, n2), a * d / (4.0 * PI * denom));
    }
    Ok(phi)
}

fn eval_fourier(coeffs: &BTreeMap<(i64, i64), C64>, gens: &TorusGenerators, z: C64) -> C64 {
    let (d1, d2) = gens.dual();
    let mut acc = C64::ZERO;
    for (&(n1, n2), &c) in coeffs {
        let p = d1 * n1 as f64 + d2 * n2 as f64;
        acc += c * (C64::i() * (z * p.conj()).re).exp();
    }
    acc
}

/// Zero mode `psi(z) = exp(-phi(z))` of the purely periodic problem.
pub fn periodic_zero_mode(
    a_fourier: &BTreeMap<(i64, i64), C64>,
    gens: &TorusGenerators,
    variant: HolVariant,
    z: C64,
) -> Result<C64> {
    let phi = corrector_fourier(a_fourier, gens, variant)?;
    Ok((-eval_fourier(&phi, gens, z)).exp())
}

/// The periodic vector potential itself, evaluated from its Fourier table.
pub fn eval_a_per(a_fourier: &BTreeMap<(i64, i64), C64>, gens: &TorusGenerators, z: C64) -> C64 {
    eval_fourier(a_fourier, gens, z)
}

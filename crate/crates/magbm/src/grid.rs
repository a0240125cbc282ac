//! Spectral (FFT) calculus on a two-generator torus: sampling, Fourier
//! differentiation of periodic fields, and the relative-residual harness
//! used to verify zero modes.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::lattice::MoireLattice;
use crate::{Error, Result};

/// Generators of a translation lattice `t1 Z + t2 Z`; periodic fields are
/// expanded as `sum_n c_n exp(2 pi i (n1 s1 + n2 s2))` in fractional
/// coordinates `z = s1 t1 + s2 t2`.
#[derive(Debug, Clone, Copy)]
pub struct TorusGenerators {
    pub t1: C64,
    pub t2: C64,
}

impl TorusGenerators {
    pub fn moire() -> Self {
        let lat = MoireLattice::default();
        TorusGenerators { t1: lat.zeta1, t2: lat.zeta2 }
    }

    pub fn new(t1: C64, t2: C64) -> Result<Self> {
        if (t1.conj() * t2).im.abs() < 1e-12 {
            return Err(Error::Domain("degenerate lattice generators".into()));
        }
        Ok(TorusGenerators { t1, t2 })
    }

    pub fn point(&self, s1: f64, s2: f64) -> C64 {
        self.t1 * s1 + self.t2 * s2
    }

    pub fn cell_area(&self) -> f64 {
        (self.t1.conj() * self.t2).im.abs()
    }

    /// Dual generators `(d1, d2)` with `Re(t_j conj(d_k)) = 2 pi delta_jk`,
    /// so that `exp(2 pi i n.s) = exp(i Re(z conj(n1 d1 + n2 d2)))`.
    pub fn dual(&self) -> (C64, C64) {
        let j = (self.t1.conj() * self.t2).im;
        (-2.0 * PI * C64::i() * self.t2 / j, 2.0 * PI * C64::i() * self.t1 / j)
    }

    /// Momentum of the integer Fourier mode `(n1, n2)`.
    pub fn momentum(&self, n1: i64, n2: i64) -> C64 {
        let (d1, d2) = self.dual();
        d1 * n1 as f64 + d2 * n2 as f64
    }
}

/// Sample a field on the uniform `m x m` fractional grid, row-major in
/// `(s1, s2)`.
pub fn sample<F: Fn(C64) -> C64>(gens: &TorusGenerators, m: usize, f: F) -> Vec<C64> {
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            out.push(f(gens.point(i as f64 / m as f64, j as f64 / m as f64)));
        }
    }
    out
}

/// In-place 2D FFT. `inverse = false` maps samples to Fourier coefficients
/// (with the 1/m^2 normalization), `inverse = true` maps back.
fn fft2(data: &mut [C64], m: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(m) } else { planner.plan_fft_forward(m) };
    // Rows.
    for row in data.chunks_exact_mut(m) {
        fft.process(row);
    }
    // Columns via transpose, process, transpose back.
    let mut col = vec![C64::ZERO; m];
    for j in 0..m {
        for i in 0..m {
            col[i] = data[i * m + j];
        }
        fft.process(&mut col);
        for i in 0..m {
            data[i * m + j] = col[i];
        }
    }
    if !inverse {
        let s = 1.0 / (m * m) as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

/// Fourier coefficients of a sampled field; index `i*m+j` carries the
/// integer frequency `(freq(i), freq(j))` with `freq` in `[-m/2, m/2)`.
pub fn fourier_coeffs(samples: &[C64], m: usize) -> Vec<C64> {
    let mut data = samples.to_vec();
    fft2(&mut data, m, false);
    data
}

pub fn freq_of_index(idx: usize, m: usize) -> i64 {
    if idx <= m / 2 { idx as i64 } else { idx as i64 - m as i64 }
}

/// First-order operators handled by the residual harness.
#[derive(Debug, Clone, Copy)]
pub enum DOp {
    /// `2 D_zbar = -2 i d/dzbar`; Fourier symbol `p(n)`.
    TwoDzbar,
    /// `2 D_z = -2 i d/dz`; Fourier symbol `conj(p(n))`.
    TwoDz,
}

/// Apply `(D + k + mult(z))` to a periodic field: the derivative part acts
/// spectrally, the momentum shift and the optional multiplication field act
/// pointwise.
pub fn apply_first_order(
    gens: &TorusGenerators,
    m: usize,
    psi: &[C64],
    d: DOp,
    k: C64,
    mult: Option<&[C64]>,
) -> Vec<C64> {
    assert_eq!(psi.len(), m * m);
    let mut hat = psi.to_vec();
    fft2(&mut hat, m, false);
    for i in 0..m {
        for j in 0..m {
            let p = gens.momentum(freq_of_index(i, m), freq_of_index(j, m));
            let sym = match d {
                DOp::TwoDzbar => p,
                DOp::TwoDz => p.conj(),
            };
            hat[i * m + j] *= sym;
        }
    }
    fft2(&mut hat, m, true);
    for idx in 0..m * m {
        hat[idx] += k * psi[idx];
        if let Some(a) = mult {
            hat[idx] += a[idx] * psi[idx];
        }
    }
    hat
}

pub fn l2_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative L2 residual `||op psi|| / ||psi||` of a first-order operator
/// applied spectrally to a sampled periodic field.
pub fn verify_zero_mode(
    gens: &TorusGenerators,
    m: usize,
    psi: &[C64],
    d: DOp,
    k: C64,
    mult: Option<&[C64]>,
) -> f64 {
    let r = apply_first_order(gens, m, psi, d, k, mult);
    l2_norm(&r) / l2_norm(psi)
}

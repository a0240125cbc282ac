//! Plane-wave spectral solvers.
//!
//! Fourier modes are indexed by `(m1, m2)` with `|m_j| <= N` and carry the
//! momentum `p = (m1 eta1 + m2 eta2)/s` on an `s`-fold enlarged cell. In
//! this basis `2 D_zbar + k` is diagonal with symbol `p + k`, while the
//! tunneling potentials and any periodic vector potential act as finite
//! convolution stencils; the elementary phases of `U`, `V` sit at the dual
//! offsets `n(-1,-1)`, `n(2,-1)`, `n(-1,2)`.

use ndarray::{Array1, Array2};
use ndarray_linalg::Inverse;
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

use crate::grid::TorusGenerators;
use crate::lattice::MoireLattice;
use crate::linalg;
use crate::potentials::TunnelingModel;
use crate::{Error, Result};

/// Fourier table of a periodic field over the (possibly enlarged) cell,
/// in the fractional-mode convention `sum c_n exp(2 pi i n.s)`.
pub type FourierTable = BTreeMap<(i64, i64), C64>;

/// Truncated plane-wave basis on the torus.
#[derive(Debug, Clone)]
pub struct PlaneWaveBasis {
    pub cutoff_n: usize,
    pub momentum_k: C64,
    /// Supercell scale: fields are periodic on `scale * Gamma`.
    pub scale: usize,
    eta1: C64,
    eta2: C64,
}

impl PlaneWaveBasis {
    pub fn new(cutoff_n: usize, momentum_k: C64, scale: usize) -> Self {
        let lat = MoireLattice::default();
        PlaneWaveBasis { cutoff_n, momentum_k, scale: scale.max(1), eta1: lat.eta1, eta2: lat.eta2 }
    }

    pub fn side(&self) -> usize {
        2 * self.cutoff_n + 1
    }

    pub fn dim(&self) -> usize {
        self.side() * self.side()
    }

    pub fn index(&self, m1: i64, m2: i64) -> Option<usize> {
        let n = self.cutoff_n as i64;
        if m1.abs() > n || m2.abs() > n {
            return None;
        }
        Some(((m1 + n) as usize) * self.side() + (m2 + n) as usize)
    }

    pub fn mode(&self, idx: usize) -> (i64, i64) {
        let n = self.cutoff_n as i64;
        ((idx / self.side()) as i64 - n, (idx % self.side()) as i64 - n)
    }

    pub fn momentum(&self, m1: i64, m2: i64) -> C64 {
        (self.eta1 * m1 as f64 + self.eta2 * m2 as f64) / self.scale as f64
    }

    /// Mode-index round trip sanity.
    pub fn roundtrip_ok(&self) -> bool {
        (0..self.dim()).all(|i| {
            let (a, b) = self.mode(i);
            self.index(a, b) == Some(i)
        })
    }
}

/// Convolution stencil: offsets in mode space with coefficients.
pub type Stencil = Vec<((i64, i64), C64)>;

fn phase_offsets(n: i64) -> [(i64, i64); 3] {
    [(-n, -n), (2 * n, -n), (-n, 2 * n)]
}

/// Stencil of `U = sum beta_n f_n` (per unit coupling).
pub fn u_stencil(model: &TunnelingModel, scale: usize) -> Stencil {
    let s = scale as i64;
    let w = crate::lattice::omega();
    let mut out = Vec::new();
    for (&n, &c) in &model.beta {
        let mut wk = C64::new(1.0, 0.0);
        for off in phase_offsets(n) {
            out.push(((off.0 * s, off.1 * s), c * wk));
            wk *= w;
        }
    }
    out
}

/// Stencil of `U_-(z) = U(-z)`.
pub fn u_minus_stencil(model: &TunnelingModel, scale: usize) -> Stencil {
    u_stencil(model, scale).into_iter().map(|((a, b), c)| ((-a, -b), c)).collect()
}

/// Stencil of `V = sum gamma_n g_n`.
pub fn v_stencil(model: &TunnelingModel, scale: usize) -> Stencil {
    let s = scale as i64;
    let mut out = Vec::new();
    for (&n, &c) in &model.gamma {
        for off in phase_offsets(n) {
            out.push(((off.0 * s, off.1 * s), c));
        }
    }
    out
}

/// Stencil of the pointwise conjugate of a field given by a stencil.
pub fn conj_stencil(st: &Stencil) -> Stencil {
    st.iter().map(|&((a, b), c)| ((-a, -b), c.conj())).collect()
}

/// Stencil from a Fourier table (supercell fractional modes).
pub fn table_stencil(table: &FourierTable) -> Stencil {
    table.iter().map(|(&(a, b), &c)| ((a, b), c)).collect()
}

/// Sparse application of a stencil to a block of coefficient columns.
pub struct ConvOp {
    entries: Vec<(usize, usize, C64)>,
    dim: usize,
}

impl ConvOp {
    pub fn new(basis: &PlaneWaveBasis, stencil: &Stencil) -> Self {
        let mut entries = Vec::new();
        for idx in 0..basis.dim() {
            let (m1, m2) = basis.mode(idx);
            for &((q1, q2), c) in stencil {
                if let Some(to) = basis.index(m1 + q1, m2 + q2) {
                    entries.push((to, idx, c));
                }
            }
        }
        ConvOp { entries, dim: basis.dim() }
    }

    pub fn apply_block(&self, x: &Array2<C64>) -> Array2<C64> {
        let mut out = Array2::zeros(x.raw_dim());
        for &(to, from, c) in &self.entries {
            for j in 0..x.ncols() {
                out[(to, j)] += c * x[(from, j)];
            }
        }
        out
    }

    /// Dense matrix of the stencil in the given basis.
    pub fn to_dense(&self) -> Array2<C64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for &(to, from, c) in &self.entries {
            m[(to, from)] += c;
        }
        m
    }
}

/// Eigenvalue/band result with its truncation diagnostics.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub eigenvalues: Vec<C64>,
    pub truncation_n: usize,
    /// Maximal change of the reported eigenvalues against the `N-4` run.
    pub convergence_gap: f64,
}

/// Default quasi-momentum for magic-angle runs: the interior point
/// `(eta1 + eta2)/3` (one third of both dual offsets).
pub fn default_bs_momentum() -> C64 {
    let lat = MoireLattice::default();
    (lat.eta1 + lat.eta2) / 3.0
}

/// Interior 6x6-style grid over the dual cell, offset by half a step so no
/// point falls on the dual lattice.
pub fn k_grid(n: usize) -> Vec<C64> {
    let lat = MoireLattice::default();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let s1 = (i as f64 + 0.5) / n as f64;
            let s2 = (j as f64 + 0.5) / n as f64;
            out.push(lat.eta1 * s1 + lat.eta2 * s2);
        }
    }
    out
}

enum Resolvent {
    Diagonal(Array1<C64>),
    Dense(Array2<C64>),
}

impl Resolvent {
    fn apply_block(&self, x: &Array2<C64>) -> Array2<C64> {
        match self {
            Resolvent::Diagonal(d) => {
                let mut out = x.clone();
                for j in 0..out.ncols() {
                    for i in 0..out.nrows() {
                        out[(i, j)] *= d[i];
                    }
                }
                out
            }
            Resolvent::Dense(inv) => inv.dot(x),
        }
    }
}

fn build_resolvent(
    basis: &PlaneWaveBasis,
    a_fourier: Option<&FourierTable>,
) -> Result<Resolvent> {
    let k = basis.momentum_k;
    let mut symbols = Array1::zeros(basis.dim());
    for idx in 0..basis.dim() {
        let (m1, m2) = basis.mode(idx);
        let sym = basis.momentum(m1, m2) + k;
        if sym.norm() < 1e-8 {
            return Err(Error::SingularResolvent(format!(
                "Fourier symbol of 2 D_zbar + k vanishes at mode ({m1},{m2})"
            )));
        }
        symbols[idx] = sym;
    }
    match a_fourier.filter(|t| !t.is_empty()) {
        None => Ok(Resolvent::Diagonal(symbols.mapv(|s| 1.0 / s))),
        Some(table) => {
            let mut m = ConvOp::new(basis, &table_stencil(table)).to_dense();
            m.mapv_inplace(|c| -c);
            for idx in 0..basis.dim() {
                m[(idx, idx)] += symbols[idx];
            }
            let inv = m
                .inv()
                .map_err(|e| Error::Numeric(format!("resolvent inversion failed: {e}")))?;
            Ok(Resolvent::Dense(inv))
        }
    }
}

fn bs_product_eigenvalues(
    model: &TunnelingModel,
    k: C64,
    a_fourier: Option<&FourierTable>,
    n_cutoff: usize,
    count: usize,
) -> Result<Vec<C64>> {
    let basis = PlaneWaveBasis::new(n_cutoff, k, 1);
    let r = build_resolvent(&basis, a_fourier)?;
    let u = ConvOp::new(&basis, &u_stencil(model, 1));
    let um = ConvOp::new(&basis, &u_minus_stencil(model, 1));
    let apply = |x: &Array2<C64>| {
        let y = r.apply_block(&um.apply_block(x));
        r.apply_block(&u.apply_block(&y))
    };
    let buffer = (count / 2).clamp(12, 40);
    linalg::top_eigenvalues(apply, basis.dim(), count, buffer, 1e-11, 2500, None)
}

/// Leading part of the Birman-Schwinger spectrum of
/// `T_k = (2 D_zbar - (A1 + i A2) + k)^{-1} [[0, U], [U_-, 0]]`.
///
/// `count` leading eigenvalue pairs are computed through the scalar product
/// operator `R U R U_-` whose spectrum is the square of the spectrum of
/// `T_k`; each product eigenvalue `mu` yields the pair `+-sqrt(mu)`. Magic
/// coupling parameters are the reciprocals `alpha = 1/lambda`.
pub fn birman_schwinger_spectrum(
    model: &TunnelingModel,
    k: C64,
    a_fourier: Option<&FourierTable>,
    n_cutoff: usize,
    count: usize,
) -> Result<SpectralResult> {
    let lat = MoireLattice::default();
    if lat.dual_distance(k) <= 1e-8 {
        return Err(Error::SingularResolvent(format!(
            "k = {k} lies on the dual lattice"
        )));
    }
    if n_cutoff < 8 {
        return Err(Error::Domain(format!("plane-wave cutoff N={n_cutoff} < 8")));
    }
    let mu = bs_product_eigenvalues(model, k, a_fourier, n_cutoff, count)?;
    let mu_coarse = bs_product_eigenvalues(model, k, a_fourier, n_cutoff - 4, count)?;
    let lam = |m: &[C64]| -> Vec<C64> {
        let mut v = Vec::with_capacity(2 * m.len());
        for &x in m {
            let r = x.sqrt();
            v.push(r);
            v.push(-r);
        }
        v.sort_by(|a, b| {
            b.norm()
                .partial_cmp(&a.norm())
                .unwrap()
                .then(b.re.partial_cmp(&a.re).unwrap())
                .then(b.im.partial_cmp(&a.im).unwrap())
        });
        v
    };
    let eig = lam(&mu);
    let eig_coarse = lam(&mu_coarse);
    let gap = linalg::greedy_match_drift(&eig[..eig.len().min(eig_coarse.len()) / 2], &eig_coarse);
    Ok(SpectralResult { eigenvalues: eig, truncation_n: n_cutoff, convergence_gap: gap })
}

/// Real magic coupling parameters extracted from a Birman-Schwinger result:
/// reciprocals of eigenvalues that are real (|Im| < 1e-8) with positive
/// real part, deduplicated and ascending.
pub fn magic_alphas(result: &SpectralResult, max_alpha: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for lam in &result.eigenvalues {
        if lam.norm() < 1e-12 {
            continue;
        }
        let alpha = 1.0 / lam;
        if alpha.im.abs() < 1e-8 && alpha.re > 0.0 && alpha.re <= max_alpha {
            let a = alpha.re;
            if !out.iter().any(|&b: &f64| (b - a).abs() < 1e-7 * (1.0 + a)) {
                out.push(a);
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Hamiltonian variant for the band problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Chiral,
    Antichiral,
}

/// Assemble the off-diagonal block `D` of the Floquet Hamiltonian
/// `H = [[0, D^H], [D, 0]]` at quasi-momentum `k`.
///
/// Chiral: `D = [[S, a1 U], [a1 U_-, S]]` with `S = diag(p + k) - A_+`.
/// Anti-chiral: `D = [[a0 V, e^{i th/2} S], [e^{i th/2} S_z, a0 conj(V)]]`
/// with `S_z = diag(conj(p) + conj(k)) - A_-`.
pub fn assemble_d_block(
    model: &TunnelingModel,
    variant: Variant,
    theta: f64,
    a_fourier: Option<&FourierTable>,
    basis: &PlaneWaveBasis,
) -> Array2<C64> {
    let n = basis.dim();
    let mut d = Array2::<C64>::zeros((2 * n, 2 * n));
    let a_plus: Stencil = a_fourier.map(table_stencil).unwrap_or_default();
    let a_minus: Stencil = conj_stencil(&a_plus);
    let k = basis.momentum_k;

    let add_block = |mat: &mut Array2<C64>, row: usize, col: usize, st: &Stencil, s: C64| {
        let conv = ConvOp::new(basis, st);
        for &(to, from, c) in &conv.entries {
            mat[(row * n + to, col * n + from)] += s * c;
        }
    };

    match variant {
        Variant::Chiral => {
            let a1 = C64::new(model.alpha1, 0.0);
            for idx in 0..n {
                let (m1, m2) = basis.mode(idx);
                let sym = basis.momentum(m1, m2) + k;
                d[(idx, idx)] += sym;
                d[(n + idx, n + idx)] += sym;
            }
            add_block(&mut d, 0, 0, &a_plus, C64::new(-1.0, 0.0));
            add_block(&mut d, 1, 1, &a_plus, C64::new(-1.0, 0.0));
            add_block(&mut d, 0, 1, &u_stencil(model, basis.scale), a1);
            add_block(&mut d, 1, 0, &u_minus_stencil(model, basis.scale), a1);
        }
        Variant::Antichiral => {
            let a0 = C64::new(model.alpha0, 0.0);
            let ph = (C64::i() * 0.5 * theta).exp();
            for idx in 0..n {
                let (m1, m2) = basis.mode(idx);
                let p = basis.momentum(m1, m2);
                d[(idx, n + idx)] += ph * (p + k);
                d[(n + idx, idx)] += ph * (p.conj() + k.conj());
            }
            add_block(&mut d, 0, 1, &a_plus, -ph);
            add_block(&mut d, 1, 0, &a_minus, -ph);
            let v = v_stencil(model, basis.scale);
            add_block(&mut d, 0, 0, &v, a0);
            add_block(&mut d, 1, 1, &conj_stencil(&v), a0);
        }
    }
    d
}

/// `D` block of the small-angle semiclassical chiral operator: the
/// derivative part carries the factor `e^{i th/2} theta`, the potentials
/// enter with unit coupling.
pub fn assemble_semiclassical_d(
    model: &TunnelingModel,
    theta: f64,
    a_fourier: Option<&FourierTable>,
    basis: &PlaneWaveBasis,
) -> Array2<C64> {
    let n = basis.dim();
    let mut d = Array2::<C64>::zeros((2 * n, 2 * n));
    let ph = (C64::i() * 0.5 * theta).exp();
    let k = basis.momentum_k;
    for idx in 0..n {
        let (m1, m2) = basis.mode(idx);
        let sym = ph * theta * (basis.momentum(m1, m2) + k);
        d[(idx, idx)] += sym;
        d[(n + idx, n + idx)] += sym;
    }
    let a_plus: Stencil = a_fourier.map(table_stencil).unwrap_or_default();
    let conv_a = ConvOp::new(basis, &a_plus);
    for &(to, from, c) in &conv_a.entries {
        d[(to, from)] -= ph * c;
        d[(n + to, n + from)] -= ph * c;
    }
    for (st, row, col) in [
        (u_stencil(model, basis.scale), 0usize, 1usize),
        (u_minus_stencil(model, basis.scale), 1, 0),
    ] {
        let conv = ConvOp::new(basis, &st);
        for &(to, from, c) in &conv.entries {
            d[(row * n + to, col * n + from)] += c;
        }
    }
    d
}

/// Full Hermitian Floquet Hamiltonian `[[0, D^H], [D, 0]]` (for structural
/// tests at small cutoffs; band computations reduce to `D`).
pub fn assemble_hamiltonian(
    model: &TunnelingModel,
    variant: Variant,
    theta: f64,
    a_fourier: Option<&FourierTable>,
    basis: &PlaneWaveBasis,
) -> Array2<C64> {
    let d = assemble_d_block(model, variant, theta, a_fourier, basis);
    let m = d.nrows();
    let mut h = Array2::<C64>::zeros((2 * m, 2 * m));
    for r in 0..m {
        for c in 0..m {
            h[(r, m + c)] = d[(c, r)].conj();
            h[(m + r, c)] = d[(r, c)];
        }
    }
    h
}

fn band_eigenvalues_from_d(d: &Array2<C64>, count: usize) -> Result<Vec<f64>> {
    let pairs = count.div_ceil(2);
    let s = linalg::smallest_singular_values(d, pairs, 1e-11, 500)?;
    let mut out = Vec::with_capacity(2 * pairs);
    for &sig in &s.sigma {
        out.push(-sig);
        out.push(sig);
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // keep the `count` entries of smallest modulus, still sorted by value
    while out.len() > count {
        if out[0].abs() >= out[out.len() - 1].abs() {
            out.remove(0);
        } else {
            out.pop();
        }
    }
    Ok(out)
}

/// `count` eigenvalues of smallest modulus of the Floquet Hamiltonian at
/// quasi-momentum `k`, sorted ascending. The block-off-diagonal structure
/// makes the spectrum symmetric, so the values come in `+-sigma` pairs of
/// singular values of `D`.
pub fn floquet_bands(
    model: &TunnelingModel,
    variant: Variant,
    theta: f64,
    a_fourier: Option<&FourierTable>,
    k: C64,
    n_cutoff: usize,
    count: usize,
    scale: usize,
) -> Result<SpectralResult> {
    if n_cutoff < 8 {
        return Err(Error::Domain(format!("plane-wave cutoff N={n_cutoff} < 8")));
    }
    let basis = PlaneWaveBasis::new(n_cutoff, k, scale);
    if count > 2 * basis.dim() {
        return Err(Error::Domain("count exceeds basis dimension".into()));
    }
    let d = assemble_d_block(model, variant, theta, a_fourier, &basis);
    let eig = band_eigenvalues_from_d(&d, count)?;
    let basis_c = PlaneWaveBasis::new(n_cutoff - 4, k, scale);
    let d_c = assemble_d_block(model, variant, theta, a_fourier, &basis_c);
    let eig_c = band_eigenvalues_from_d(&d_c, count)?;
    let gap = eig
        .iter()
        .zip(&eig_c)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(SpectralResult {
        eigenvalues: eig.into_iter().map(|v| C64::new(v, 0.0)).collect(),
        truncation_n: n_cutoff,
        convergence_gap: gap,
    })
}

/// Smallest band modulus `E_0(k, theta)` of the semiclassical operator.
pub fn semiclassical_e0(
    model: &TunnelingModel,
    theta: f64,
    a_fourier: Option<&FourierTable>,
    k: C64,
    n_cutoff: usize,
) -> Result<f64> {
    let basis = PlaneWaveBasis::new(n_cutoff, k, 1);
    let d = assemble_semiclassical_d(model, theta, a_fourier, &basis);
    let s = linalg::smallest_singular_values(&d, 1, 1e-10, 500)?;
    Ok(s.sigma[0])
}

/// Squeezing-experiment report: fitted exponential band collapse.
#[derive(Debug, Clone)]
pub struct SqueezeReport {
    pub thetas: Vec<f64>,
    pub e0: Vec<f64>,
    /// Slope of log |E_0| against 1/theta (negative under the condition).
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub condition_satisfied: bool,
    /// Largest |condition value| seen on the sampling grid.
    pub condition_max: f64,
}

/// Magnetic field `B(z) = 2 Im(d_z A_+)` of a periodic vector potential.
pub fn field_strength(a_fourier: &FourierTable, z: C64) -> f64 {
    let gens = TorusGenerators::moire();
    let (d1, d2) = gens.dual();
    let mut dz = C64::ZERO;
    for (&(n1, n2), &c) in a_fourier {
        let p = d1 * n1 as f64 + d2 * n2 as f64;
        let e = (C64::i() * (z * p.conj()).re).exp();
        dz += c * (C64::i() * p.conj() * 0.5) * e;
    }
    2.0 * dz.im
}

/// Exponential-squeezing study over a decreasing list of twist angles.
pub fn squeezing_study(
    model: &TunnelingModel,
    a_fourier: &FourierTable,
    theta_list: &[f64],
    k: C64,
    n_cutoff: usize,
) -> Result<SqueezeReport> {
    if theta_list.len() < 5 {
        return Err(Error::Domain("need at least 5 twist angles".into()));
    }
    if theta_list.windows(2).any(|w| w[1] >= w[0]) || theta_list.iter().any(|&t| t <= 0.0) {
        return Err(Error::Domain("twist angles must be positive and decreasing".into()));
    }
    // Evaluate the squeezing condition on a coarse cell grid.
    let lat = MoireLattice::default();
    let grid = crate::lattice::cell_grid(&lat, 32)?;
    let mut cond_max = 0.0_f64;
    for p in &grid.points {
        if let Ok(v) =
            crate::potentials::squeezing_condition(model, |w| field_strength(a_fourier, w), p.z)
        {
            cond_max = cond_max.max(v.norm());
        }
    }
    let condition_satisfied = cond_max > 1e-8;
    let mut e0 = Vec::with_capacity(theta_list.len());
    for &theta in theta_list {
        // The derivative symbol carries the factor theta, so the Fourier
        // reach of the band-bottom quasimodes grows like 1/theta; the
        // cutoff follows it.
        let n_eff = n_cutoff.max((2.16 / theta).ceil() as usize);
        e0.push(semiclassical_e0(model, theta, Some(a_fourier), k, n_eff)?);
    }
    // Least-squares fit of log e0 against 1/theta.
    let xs: Vec<f64> = theta_list.iter().map(|&t| 1.0 / t).collect();
    let ys: Vec<f64> = e0.iter().map(|&v| v.max(1e-300).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let p = slope * x + intercept;
            (y - p) * (y - p)
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    Ok(SqueezeReport {
        thetas: theta_list.to_vec(),
        e0,
        slope,
        intercept,
        r_squared,
        condition_satisfied,
        condition_max: cond_max,
    })
}

/// Synthesize a basis coefficient vector on the `m x m` fractional grid of
/// the (possibly enlarged) cell; used to hand Bloch eigenvectors to the
/// FFT residual harness.
pub fn synthesize_on_grid(
    basis: &PlaneWaveBasis,
    coeffs: &[C64],
    m: usize,
) -> Vec<C64> {
    assert_eq!(coeffs.len(), basis.dim());
    let lat = MoireLattice::default();
    let gens = TorusGenerators {
        t1: lat.zeta1 * basis.scale as f64,
        t2: lat.zeta2 * basis.scale as f64,
    };
    let mut out = vec![C64::ZERO; m * m];
    for idx in 0..basis.dim() {
        let c = coeffs[idx];
        if c.norm() < 1e-300 {
            continue;
        }
        let (m1, m2) = basis.mode(idx);
        let p = basis.momentum(m1, m2);
        for i in 0..m {
            for j in 0..m {
                let z = gens.point(i as f64 / m as f64, j as f64 / m as f64);
                out[i * m + j] += c * (C64::i() * (z * p.conj()).re).exp();
            }
        }
    }
    out
}

/// Kernel (smallest-singular-pair) vector of the chiral `D` block,
/// returned as the two component coefficient vectors.
pub fn chiral_kernel_vector(
    model: &TunnelingModel,
    a_fourier: Option<&FourierTable>,
    k: C64,
    n_cutoff: usize,
) -> Result<(Vec<C64>, Vec<C64>, f64)> {
    let basis = PlaneWaveBasis::new(n_cutoff, k, 1);
    let d = assemble_d_block(model, Variant::Chiral, 0.0, a_fourier, &basis);
    let s = linalg::smallest_singular_values(&d, 1, 1e-11, 500)?;
    let n = basis.dim();
    let v = s.vectors.column(0);
    Ok((
        v.iter().take(n).copied().collect(),
        v.iter().skip(n).copied().collect(),
        s.sigma[0],
    ))
}

/// Dense spectrum of the Birman-Schwinger product operator for small
/// cutoffs (cross-check path).
pub fn bs_product_dense_spectrum(
    model: &TunnelingModel,
    k: C64,
    a_fourier: Option<&FourierTable>,
    n_cutoff: usize,
) -> Result<Vec<C64>> {
    let basis = PlaneWaveBasis::new(n_cutoff, k, 1);
    let r = build_resolvent(&basis, a_fourier)?;
    let u = ConvOp::new(&basis, &u_stencil(model, 1)).to_dense();
    let um = ConvOp::new(&basis, &u_minus_stencil(model, 1)).to_dense();
    let ru = match &r {
        Resolvent::Diagonal(d) => {
            let mut m = u;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    m[(i, j)] *= d[i];
                }
            }
            m
        }
        Resolvent::Dense(inv) => inv.dot(&u),
    };
    let rum = match &r {
        Resolvent::Diagonal(d) => {
            let mut m = um;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    m[(i, j)] *= d[i];
                }
            }
            m
        }
        Resolvent::Dense(inv) => inv.dot(&um),
    };
    linalg::dense_eigenvalues(&ru.dot(&rum))
}

//! Semiclassical density-of-states functionals: band windows, the chiral
//! and anti-chiral regularized-trace expansions in the strong-field limit,
//! the free-model limit, and analytic B-derivatives by termwise
//! differentiation.
//!
//! Per Landau band `n` at field `B` (`lambda_n = sgn(n) sqrt(2|n|B)`):
//!
//! ```text
//! chiral:      (B/pi) f(lambda_n) + (|n|/2 pi) Ave(frak U) f''(lambda_n)
//! anti-chiral: (B/2 pi) t_{n,0}(f) + (sqrt B/2 pi) t_{n,1}(f)
//! free:        (B/pi) f(lambda_n)
//! ```
//!
//! with the cell moments `t_{n,0}(f) = Ave[f(lambda_n + c_n) + f(lambda_n - c_n)]`
//! and `t_{n,1}(f) = Ave[s_n^2 (f'(lambda_n + c_n) + f'(lambda_n - c_n))]`,
//! where `c_n = a0 cos(theta/2) |V|`, `s_n = a0 sin(theta/2) |V|` for
//! `n != 0` and both equal `a0 |V|` for `n = 0`.

use crate::landau::landau_level;
use crate::lattice::{cell_grid, MoireLattice};
use crate::potentials::{ave_frak_u, eval_v, sup_norm_v, TunnelingModel};
use crate::testfn::TestFn;
use crate::{Error, Result};
use std::f64::consts::PI;
use std::ops::RangeInclusive;

/// Which trace expansion to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Free,
    Chiral,
    Antichiral,
}

/// Spectral window around the `n`-th Landau level,
/// `(lambda_{n-1} + ||V||, lambda_{n+1} - ||V||)`.
#[derive(Debug, Clone, Copy)]
pub struct BandWindow {
    pub n: i32,
    pub lo: f64,
    pub hi: f64,
}

pub fn band_window(n: i32, b: f64, v_norm: f64) -> Result<BandWindow> {
    if b <= 0.0 {
        return Err(Error::Domain(format!("field strength B={b} <= 0")));
    }
    let lo = landau_level(n as i64 - 1, b)? + v_norm;
    let hi = landau_level(n as i64 + 1, b)? - v_norm;
    if lo >= hi {
        return Err(Error::GapClosed { n, b, lo, hi });
    }
    Ok(BandWindow { n, lo, hi })
}

/// Precomputed model context shared by all trace evaluations: potential
/// sup-norm, the chiral correction weight `Ave(frak U)`, and the cell
/// samples of `|V|` used by the anti-chiral moments.
#[derive(Debug, Clone)]
pub struct DosContext {
    pub model: TunnelingModel,
    pub theta: f64,
    pub grid_m: usize,
    /// Expansion splitting exponent (error-scale bookkeeping only).
    pub delta: f64,
    /// Sign convention of the anti-chiral sqrt(B) correction.
    pub ac_correction_sign: f64,
    pub v_norm: f64,
    pub ave_frak_u: f64,
    v_abs: Vec<f64>,
}

impl DosContext {
    pub fn new(model: TunnelingModel, theta: f64, grid_m: usize) -> Result<Self> {
        let v_norm = sup_norm_v(&model, grid_m.max(32))?;
        let ave_u = ave_frak_u(&model, grid_m.max(32))?;
        let lat = MoireLattice::default();
        let grid = cell_grid(&lat, grid_m.max(32))?;
        let v_abs = grid.points.iter().map(|p| eval_v(&model, p.z).value.norm()).collect();
        Ok(DosContext {
            model,
            theta,
            grid_m: grid_m.max(32),
            delta: 0.125,
            ac_correction_sign: 1.0,
            v_norm,
            ave_frak_u: ave_u,
            v_abs,
        })
    }

    pub fn standard(alpha0: f64, alpha1: f64, theta: f64) -> Result<Self> {
        Self::new(TunnelingModel::standard(alpha0, alpha1), theta, 64)
    }

    fn split_weights(&self, n: i32) -> (f64, f64) {
        // (cos, sin) weights of the level splitting; the zeroth level
        // splits with full weight independently of theta.
        if n == 0 {
            (1.0, 1.0)
        } else {
            ((0.5 * self.theta).cos(), (0.5 * self.theta).sin())
        }
    }

    /// `t_{n,0}(f) = Ave[f(lambda + c_n) + f(lambda - c_n)]`.
    fn t_moment0(&self, f: &TestFn, n: i32, lambda: f64) -> f64 {
        let (wc, _) = self.split_weights(n);
        let a0 = self.model.alpha0;
        let sum: f64 = self
            .v_abs
            .iter()
            .map(|&v| {
                let c = a0 * wc * v;
                f.eval(lambda + c) + f.eval(lambda - c)
            })
            .sum();
        sum / self.v_abs.len() as f64
    }

    /// `t_{n,1}` applied to the `order`-th derivative of `f`:
    /// `Ave[s_n^2 (f^(order+1)(lambda + c_n) + f^(order+1)(lambda - c_n))]`.
    fn t_moment1(&self, f: &TestFn, n: i32, lambda: f64, order: usize) -> f64 {
        let (wc, ws) = self.split_weights(n);
        let a0 = self.model.alpha0;
        if a0 == 0.0 {
            return 0.0;
        }
        let sum: f64 = self
            .v_abs
            .iter()
            .map(|&v| {
                let c = a0 * wc * v;
                let s2 = a0 * ws * v * a0 * ws * v;
                s2 * (f.jet(lambda + c)[order + 1] + f.jet(lambda - c)[order + 1])
            })
            .sum();
        sum / self.v_abs.len() as f64
    }
}

/// One band's contribution to an expansion.
#[derive(Debug, Clone, Copy)]
pub struct BandTerm {
    pub n: i32,
    pub leading: f64,
    pub correction: f64,
    /// Order-of-magnitude scale of the neglected remainder; reported as
    /// metadata and never added to the totals.
    pub error_scale: f64,
}

/// Result container of a trace expansion.
#[derive(Debug, Clone)]
pub struct DosExpansion {
    pub kind: ModelKind,
    pub b: f64,
    pub terms: Vec<BandTerm>,
    pub total: f64,
}

impl DosExpansion {
    fn collect(kind: ModelKind, b: f64, terms: Vec<BandTerm>) -> Self {
        let total = terms.iter().map(|t| t.leading + t.correction).sum();
        DosExpansion { kind, b, terms, total }
    }
}

fn error_scale(kind: ModelKind, b: f64, k_smooth: usize, delta: f64, derivative: bool) -> f64 {
    let k = k_smooth as f64;
    match (kind, derivative) {
        (ModelKind::Free, _) => 0.0,
        (ModelKind::Chiral, false) => b.powf(4.0 * delta - 0.5) + b.powf(1.0 - (k - 1.0) * delta),
        (ModelKind::Antichiral, false) => b.powf(3.0 * delta) + b.powf(1.0 - (k - 1.0) * delta),
        (ModelKind::Chiral, true) => {
            b.powf(4.0 * delta - 1.0) + b.powf(0.5 - (k - 1.0) * delta) + b.powf(-(k - 2.0) * delta)
        }
        (ModelKind::Antichiral, true) => {
            b.powf(3.0 * delta - 0.5)
                + b.powf(0.5 - (k - 1.0) * delta)
                + b.powf(-(k - 2.0) * delta)
        }
    }
}

/// Raw per-band expansion terms without window checking (the response
/// observables evaluate the formulas wherever they are asked to).
pub fn band_terms(
    kind: ModelKind,
    f: &TestFn,
    bands: RangeInclusive<i32>,
    b: f64,
    ctx: &DosContext,
) -> Result<Vec<BandTerm>> {
    if b <= 0.0 {
        return Err(Error::Domain(format!("field strength B={b} <= 0")));
    }
    let k_smooth = f.smoothness_k();
    let mut out = Vec::new();
    for n in bands {
        let lambda = landau_level(n as i64, b)?;
        let term = match kind {
            ModelKind::Free => BandTerm {
                n,
                leading: b / PI * f.eval(lambda),
                correction: 0.0,
                error_scale: 0.0,
            },
            ModelKind::Chiral => BandTerm {
                n,
                leading: b / PI * f.eval(lambda),
                correction: if n == 0 {
                    0.0
                } else {
                    n.unsigned_abs() as f64 / (2.0 * PI) * ctx.ave_frak_u * f.d2(lambda)
                },
                error_scale: error_scale(kind, b, k_smooth, ctx.delta, false),
            },
            ModelKind::Antichiral => BandTerm {
                n,
                leading: b / (2.0 * PI) * ctx.t_moment0(f, n, lambda),
                correction: ctx.ac_correction_sign * b.sqrt() / (2.0 * PI)
                    * ctx.t_moment1(f, n, lambda, 0),
                error_scale: error_scale(kind, b, k_smooth, ctx.delta, false),
            },
        };
        out.push(term);
    }
    Ok(out)
}

/// Raw per-band terms of the analytic B-derivative (chain rule through
/// `lambda_{n,B}`, `d lambda/dB = lambda/(2B)`).
pub fn band_terms_db(
    kind: ModelKind,
    f: &TestFn,
    bands: RangeInclusive<i32>,
    b: f64,
    ctx: &DosContext,
) -> Result<Vec<BandTerm>> {
    if b <= 0.0 {
        return Err(Error::Domain(format!("field strength B={b} <= 0")));
    }
    let k_smooth = f.smoothness_k();
    let mut out = Vec::new();
    for n in bands {
        let lambda = landau_level(n as i64, b)?;
        let dl = lambda / (2.0 * b);
        let term = match kind {
            ModelKind::Free => BandTerm {
                n,
                leading: f.eval(lambda) / PI + lambda * f.d1(lambda) / (2.0 * PI),
                correction: 0.0,
                error_scale: 0.0,
            },
            ModelKind::Chiral => BandTerm {
                n,
                leading: f.eval(lambda) / PI + lambda * f.d1(lambda) / (2.0 * PI),
                correction: if n == 0 {
                    0.0
                } else {
                    n.unsigned_abs() as f64 / (2.0 * PI) * ctx.ave_frak_u * f.d3(lambda) * dl
                },
                error_scale: error_scale(kind, b, k_smooth, ctx.delta, true),
            },
            ModelKind::Antichiral => {
                let t0 = ctx.t_moment0(f, n, lambda);
                let t0p = {
                    // t_{n,0} applied to f'.
                    let (wc, _) = ctx.split_weights(n);
                    let a0 = ctx.model.alpha0;
                    let sum: f64 = ctx
                        .v_abs
                        .iter()
                        .map(|&v| {
                            let c = a0 * wc * v;
                            f.d1(lambda + c) + f.d1(lambda - c)
                        })
                        .sum();
                    sum / ctx.v_abs.len() as f64
                };
                let t1 = ctx.t_moment1(f, n, lambda, 0);
                let t1p = ctx.t_moment1(f, n, lambda, 1);
                BandTerm {
                    n,
                    leading: t0 / (2.0 * PI) + lambda * t0p / (4.0 * PI),
                    correction: ctx.ac_correction_sign
                        * (t1 / (4.0 * PI * b.sqrt()) + lambda * t1p / (4.0 * PI * b.sqrt())),
                    error_scale: error_scale(kind, b, k_smooth, ctx.delta, true),
                }
            }
        };
        out.push(term);
    }
    Ok(out)
}

/// Overlap test of the test-function support against gap-closed regions of
/// the requested band range (and one band beyond each end).
fn check_support(
    f: &TestFn,
    bands: &RangeInclusive<i32>,
    b: f64,
    v_norm: f64,
) -> Result<()> {
    let (lo, hi) = match f.support() {
        Some(s) => s,
        None => {
            return Err(Error::SupportViolation(
                "test function has unbounded support; the expansion requires compact support \
                 within the valid band windows"
                    .into(),
            ))
        }
    };
    for n in bands.start() - 1..=bands.end() + 1 {
        if band_window(n, b, v_norm).is_err() {
            // Gap closed around level n: its neighbourhood is off-limits.
            let bad_lo = landau_level(n as i64 + 1, b)? - v_norm;
            let bad_hi = landau_level(n as i64 - 1, b)? + v_norm;
            if hi > bad_lo && lo < bad_hi {
                return Err(Error::SupportViolation(format!(
                    "support ({lo:.3}, {hi:.3}) leaks into the gap-closed region \
                     ({bad_lo:.3}, {bad_hi:.3}) around band {n}"
                )));
            }
        }
    }
    Ok(())
}

/// Chiral regularized-trace expansion over the requested bands, with
/// window/support validation.
pub fn trace_chiral(
    f: &TestFn,
    bands: RangeInclusive<i32>,
    b: f64,
    ctx: &DosContext,
) -> Result<DosExpansion> {
    check_support(f, &bands, b, ctx.v_norm)?;
    Ok(DosExpansion::collect(ModelKind::Chiral, b, band_terms(ModelKind::Chiral, f, bands, b, ctx)?))
}

/// Anti-chiral regularized-trace expansion.
pub fn trace_antichiral(
    f: &TestFn,
    bands: RangeInclusive<i32>,
    b: f64,
    ctx: &DosContext,
) -> Result<DosExpansion> {
    check_support(f, &bands, b, ctx.v_norm)?;
    Ok(DosExpansion::collect(
        ModelKind::Antichiral,
        b,
        band_terms(ModelKind::Antichiral, f, bands, b, ctx)?,
    ))
}

/// Free-model trace (two uncoupled sheets): `sum_n (B/pi) f(lambda_n)`.
pub fn trace_free(f: &TestFn, bands: RangeInclusive<i32>, b: f64) -> Result<DosExpansion> {
    let ctx = DosContext {
        model: TunnelingModel::standard(0.0, 0.0),
        theta: 0.0,
        grid_m: 32,
        delta: 0.125,
        ac_correction_sign: 1.0,
        v_norm: 0.0,
        ave_frak_u: 0.0,
        v_abs: vec![0.0],
    };
    Ok(DosExpansion::collect(ModelKind::Free, b, band_terms(ModelKind::Free, f, bands, b, &ctx)?))
}

/// Analytic B-derivative of the trace expansion, with validation.
pub fn dtrace_db(
    kind: ModelKind,
    f: &TestFn,
    bands: RangeInclusive<i32>,
    b: f64,
    ctx: &DosContext,
) -> Result<DosExpansion> {
    check_support(f, &bands, b, ctx.v_norm)?;
    Ok(DosExpansion::collect(kind, b, band_terms_db(kind, f, bands, b, ctx)?))
}

/// Smooth plateau equal to 1 on the spectral support of band `n` and
/// supported within its window.
pub fn band_plateau(n: i32, b: f64, v_norm: f64) -> Result<TestFn> {
    let w = band_window(n, b, v_norm)?;
    let lambda = landau_level(n as i64, b)?;
    let margin_lo = (lambda - v_norm) - w.lo;
    let margin_hi = w.hi - (lambda + v_norm);
    let m = margin_lo.min(margin_hi);
    // Plateau covers the band support with a quarter-margin cushion and
    // shoulders in the gap.
    Ok(TestFn::Plateau {
        lo: lambda - v_norm - 0.25 * m,
        hi: lambda + v_norm + 0.25 * m,
        shoulder: 0.5 * m,
    })
}

/// Integrated DOS of a single band: trace of a plateau covering exactly
/// that band. Dividing by `B/(2 pi)` yields the quantized per-band count.
pub fn integrated_dos_per_band(
    kind: ModelKind,
    n: i32,
    b: f64,
    ctx: &DosContext,
) -> Result<f64> {
    let plateau = band_plateau(n, b, ctx.v_norm)?;
    let exp = match kind {
        ModelKind::Free => trace_free(&plateau, n..=n, b)?,
        ModelKind::Chiral => trace_chiral(&plateau, n..=n, b, ctx)?,
        ModelKind::Antichiral => trace_antichiral(&plateau, n..=n, b, ctx)?,
    };
    Ok(exp.total)
}

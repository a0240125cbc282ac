//! Moire lattice geometry: translation lattice, dual lattice, one-third
//! translations and fundamental-cell quadrature grids.
//!
//! The translation lattice is `Gamma = zeta1 Z + zeta2 Z` with
//! `zeta1 = 4 pi i w`, `zeta2 = 4 pi i w^2`, `w = exp(2 pi i/3)`, and dual
//! generators `eta1 = w^2/sqrt(3)`, `eta2 = -w/sqrt(3)` normalized so that
//! `Re(zeta_j conj(eta_k)) = 2 pi delta_jk`.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::{Error, Result};

/// `w = exp(2 pi i / 3)`.
pub fn omega() -> C64 {
    C64::new(-0.5, 0.5 * 3.0_f64.sqrt())
}

/// Moire lattice scale `lambda(theta) = sqrt(3) l0 / (2 sin(|theta|/2))`
/// for `0 < |theta| < pi/6`.
pub fn moire_scale(theta: f64, l0: f64) -> Result<f64> {
    if theta == 0.0 || theta.abs() >= PI / 6.0 {
        return Err(Error::Domain(format!(
            "twist angle {theta} outside (0, pi/6) in absolute value"
        )));
    }
    if l0 <= 0.0 {
        return Err(Error::Domain(format!("carbon-carbon distance {l0} <= 0")));
    }
    Ok(3.0_f64.sqrt() * l0 / (2.0 * (theta.abs() / 2.0).sin()))
}

/// The moire translation lattice and its companions. All values are fixed
/// by the construction; `l0` only sets the physical unit and defaults to 1.
#[derive(Debug, Clone)]
pub struct MoireLattice {
    pub omega: C64,
    pub zeta1: C64,
    pub zeta2: C64,
    pub eta1: C64,
    pub eta2: C64,
    /// One-third translations `a_j = (4/3) pi i w^j`, `j = 0, 1, 2`.
    pub a: [C64; 3],
    /// Fundamental cell area `|E| = 8 sqrt(3) pi^2`.
    pub cell_area: f64,
    pub l0: f64,
}

impl Default for MoireLattice {
    fn default() -> Self {
        Self::new(1.0)
    }
}

impl MoireLattice {
    pub fn new(l0: f64) -> Self {
        let w = omega();
        let i = C64::new(0.0, 1.0);
        let zeta1 = 4.0 * PI * i * w;
        let zeta2 = 4.0 * PI * i * w * w;
        let s3 = 3.0_f64.sqrt();
        let eta1 = w * w / s3;
        let eta2 = -w / s3;
        let a = [
            (4.0 / 3.0) * PI * i,
            (4.0 / 3.0) * PI * i * w,
            (4.0 / 3.0) * PI * i * w * w,
        ];
        let cell_area = (zeta1.conj() * zeta2).im.abs();
        MoireLattice { omega: w, zeta1, zeta2, eta1, eta2, a, cell_area, l0 }
    }

    /// Duality pairing `Re(zeta_j conj(eta_k))`; equals `2 pi delta_jk`.
    pub fn dual_pairing(&self, j: usize, k: usize) -> Result<f64> {
        let zeta = match j {
            1 => self.zeta1,
            2 => self.zeta2,
            _ => return Err(Error::Domain(format!("lattice index j={j} not in {{1,2}}"))),
        };
        let eta = match k {
            1 => self.eta1,
            2 => self.eta2,
            _ => return Err(Error::Domain(format!("lattice index k={k} not in {{1,2}}"))),
        };
        Ok((zeta * eta.conj()).re)
    }

    /// Point of the fundamental cell from fractional coordinates.
    pub fn point(&self, s1: f64, s2: f64) -> CellPoint {
        CellPoint { s1, s2, z: self.zeta1 * s1 + self.zeta2 * s2 }
    }

    /// Dual lattice vector `m1 eta1 + m2 eta2`.
    pub fn dual(&self, m1: i64, m2: i64) -> C64 {
        self.eta1 * m1 as f64 + self.eta2 * m2 as f64
    }

    /// Fractional coordinates `(s1, s2)` of `z`, i.e. `z = s1 zeta1 + s2 zeta2`.
    pub fn frac_coords(&self, z: C64) -> (f64, f64) {
        // Solve the real 2x2 system via the duality pairing:
        // Re(z conj(eta_j)) = 2 pi s_j.
        let s1 = (z * self.eta1.conj()).re / (2.0 * PI);
        let s2 = (z * self.eta2.conj()).re / (2.0 * PI);
        (s1, s2)
    }

    /// Reduce `z` modulo `Gamma` into the fundamental cell (fractional
    /// coordinates in `[0, 1)`).
    pub fn wrap(&self, z: C64) -> CellPoint {
        let (s1, s2) = self.frac_coords(z);
        self.point(s1 - s1.floor(), s2 - s2.floor())
    }

    /// Distance from `k` to the nearest dual lattice point.
    pub fn dual_distance(&self, k: C64) -> f64 {
        // Dual coordinates of k, then check the four neighbouring points.
        let d = self.eta1 * self.eta2.conj() - self.eta2 * self.eta1.conj();
        let c1 = ((k * self.eta2.conj() - k.conj() * self.eta2) / d).re;
        let c2 = ((k.conj() * self.eta1 - k * self.eta1.conj()) / d).re;
        let mut best = f64::INFINITY;
        for m1 in [c1.floor() as i64, c1.ceil() as i64] {
            for m2 in [c2.floor() as i64, c2.ceil() as i64] {
                best = best.min((k - self.dual(m1, m2)).norm());
            }
        }
        best
    }
}

/// A point of the fundamental cell, carried both as fractional coordinates
/// and as the complex position `z = s1 zeta1 + s2 zeta2`.
#[derive(Debug, Clone, Copy)]
pub struct CellPoint {
    pub s1: f64,
    pub s2: f64,
    pub z: C64,
}

/// Uniform `m x m` quadrature grid over the fundamental cell, row-major in
/// `(s1, s2)`. Each point carries equal weight `cell_area / m^2`; the
/// periodic trapezoid rule on this grid integrates trigonometric
/// polynomials of Fourier degree `< m` exactly.
#[derive(Debug, Clone)]
pub struct CellGrid {
    pub m: usize,
    pub points: Vec<CellPoint>,
    pub weight: f64,
}

pub fn cell_grid(lat: &MoireLattice, m: usize) -> Result<CellGrid> {
    if m < 2 {
        return Err(Error::Domain(format!("grid size m={m} < 2")));
    }
    let mut points = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            points.push(lat.point(i as f64 / m as f64, j as f64 / m as f64));
        }
    }
    Ok(CellGrid { m, points, weight: lat.cell_area / (m * m) as f64 })
}

impl CellGrid {
    /// Periodic-trapezoid cell average of a sampled function.
    pub fn average<F: Fn(CellPoint) -> f64>(&self, f: F) -> f64 {
        let sum: f64 = self.points.iter().map(|&p| f(p)).sum();
        sum / (self.m * self.m) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moire_scale_closed_form() {
        // High-precision evaluation of sqrt(3)/(2 sin(0.05)).
        let v = moire_scale(0.1, 1.0).unwrap();
        assert!((v - 17.327727059531511).abs() < 1e-12);
        // Even in theta.
        assert_eq!(v, moire_scale(-0.1, 1.0).unwrap());
        // Near-halving in the sin(x) ~ x regime, within 0.3%.
        let v2 = moire_scale(0.2, 1.0).unwrap();
        let ratio = v2 / v;
        assert!((ratio - 0.5).abs() / 0.5 < 3e-3, "ratio {ratio}");
        // Strictly decreasing in |theta|.
        assert!(v2 < v);
    }

    #[test]
    fn moire_scale_domain() {
        assert!(moire_scale(0.0, 1.0).is_err());
        assert!(moire_scale(PI / 6.0, 1.0).is_err());
        assert!(moire_scale(0.1, 0.0).is_err());
    }

    #[test]
    fn duality_pairing() {
        let lat = MoireLattice::default();
        for j in 1..=2 {
            for k in 1..=2 {
                let want = if j == k { 2.0 * PI } else { 0.0 };
                let got = lat.dual_pairing(j, k).unwrap();
                assert!((got - want).abs() < 1e-12, "pairing({j},{k}) = {got}");
            }
        }
        assert!(lat.dual_pairing(0, 1).is_err());
    }

    #[test]
    fn lattice_constants() {
        let lat = MoireLattice::default();
        // zeta_j = 3 a_j.
        assert!((lat.zeta1 - lat.a[1] * 3.0).norm() < 1e-12);
        assert!((lat.zeta2 - lat.a[2] * 3.0).norm() < 1e-12);
        // a_0 + a_1 + a_2 = 0.
        assert!((lat.a[0] + lat.a[1] + lat.a[2]).norm() < 1e-12);
        // cell area.
        assert!((lat.cell_area - 8.0 * 3.0_f64.sqrt() * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn cell_point_roundtrip_and_wrap() {
        let lat = MoireLattice::default();
        let p = lat.point(0.3, 0.8);
        let (s1, s2) = lat.frac_coords(p.z);
        assert!((s1 - 0.3).abs() < 1e-13 && (s2 - 0.8).abs() < 1e-13);
        // Wrapping s+1 hits the same point modulo Gamma.
        let q = lat.point(1.3, -0.2);
        let w = lat.wrap(q.z);
        assert!((w.s1 - 0.3).abs() < 1e-12 && (w.s2 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn grid_shapes_and_weights() {
        let lat = MoireLattice::default();
        let g2 = cell_grid(&lat, 2).unwrap();
        assert_eq!(g2.points.len(), 4);
        for p in &g2.points {
            assert!(p.s1 == 0.0 || p.s1 == 0.5);
            assert!(p.s2 == 0.0 || p.s2 == 0.5);
        }
        let g3 = cell_grid(&lat, 3).unwrap();
        let total: f64 = g3.weight * g3.points.len() as f64;
        assert!((total - lat.cell_area).abs() < 1e-10);
        let g64 = cell_grid(&lat, 64).unwrap();
        assert_eq!(g64.points.len(), 4096);
        // Row-major ordering in (s1, s2).
        assert_eq!(g64.points[1].s1, 0.0);
        assert!((g64.points[1].s2 - 1.0 / 64.0).abs() < 1e-15);
        assert!(cell_grid(&lat, 1).is_err());
    }

    #[test]
    fn periodic_trapezoid_exactness() {
        // Quadrature of a Gamma-periodic trigonometric polynomial of degree
        // < m equals its zero Fourier coefficient times the cell area.
        let lat = MoireLattice::default();
        let g = cell_grid(&lat, 8).unwrap();
        // p(z) = 2.5 + cos(2 pi (3 s1 - 2 s2)) has zero mode 2.5.
        let avg = g.average(|p| {
            2.5 + (2.0 * PI * (3.0 * p.s1 - 2.0 * p.s2)).cos()
        });
        assert!((avg - 2.5).abs() < 1e-13, "avg {avg}");
    }

    #[test]
    fn dual_distance_detects_lattice_points() {
        let lat = MoireLattice::default();
        assert!(lat.dual_distance(lat.dual(2, -1)) < 1e-14);
        let k = (lat.eta1 + lat.eta2) / 3.0;
        assert!(lat.dual_distance(k) > 0.1);
    }
}

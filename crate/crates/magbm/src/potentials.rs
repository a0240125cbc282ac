//! Tunneling potentials of the continuum model.
//!
//! With `w = exp(2 pi i/3)` and the elementary sums
//!
//! ```text
//! g_n(z) = sum_k exp((n/2)(z conj(w)^k - conj(z) w^k)),
//! f_n(z) = sum_k w^k exp((n/2)(z conj(w)^k - conj(z) w^k)),   k = 0,1,2,
//! ```
//!
//! the potentials are `V = sum gamma_n g_n`, `U = sum beta_n f_n` over
//! finitely many `n` in `3Z+1`, and `U_-(z) = U(-z)`. The matrix potential
//! couples the two sheets through
//! `T(z) = [[a0 V, a1 conj(U_-)], [a1 U, a0 V]]`.
//!
//! All derivatives are Wirtinger derivatives computed termwise on the
//! exponential sums, never by finite differences.

use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

use crate::lattice::{cell_grid, omega, MoireLattice};
use crate::{Error, Result};

/// A scalar field value together with its Wirtinger derivatives at the
/// sample point.
#[derive(Debug, Clone, Copy)]
pub struct FieldSample {
    pub value: C64,
    pub dz: C64,
    pub dzbar: C64,
}

impl FieldSample {
    pub const ZERO: FieldSample =
        FieldSample { value: C64::ZERO, dz: C64::ZERO, dzbar: C64::ZERO };
}

/// Coupling coefficients of the tunneling model. `beta`/`gamma` are the
/// finitely supported coefficient sequences on `3Z+1`; `alpha0`, `alpha1`
/// are the AA'/BB' and AB'/BA' coupling strengths.
#[derive(Debug, Clone)]
pub struct TunnelingModel {
    pub beta: BTreeMap<i64, C64>,
    pub gamma: BTreeMap<i64, C64>,
    pub alpha0: f64,
    pub alpha1: f64,
}

impl TunnelingModel {
    /// Standard first-harmonic model: `beta_1 = gamma_1 = 1`, rest zero.
    pub fn standard(alpha0: f64, alpha1: f64) -> Self {
        let mut beta = BTreeMap::new();
        beta.insert(1, C64::new(1.0, 0.0));
        let gamma = beta.clone();
        TunnelingModel { beta, gamma, alpha0, alpha1 }
    }

    /// Model with explicit coefficient tables; support must lie in `3Z+1`.
    pub fn with_coeffs(
        beta: BTreeMap<i64, C64>,
        gamma: BTreeMap<i64, C64>,
        alpha0: f64,
        alpha1: f64,
    ) -> Result<Self> {
        for &n in beta.keys().chain(gamma.keys()) {
            if n.rem_euclid(3) != 1 {
                return Err(Error::Domain(format!(
                    "coefficient index {n} not in 3Z+1"
                )));
            }
        }
        if alpha0 < 0.0 || alpha1 < 0.0 {
            return Err(Error::Domain("coupling strengths must be nonnegative".into()));
        }
        Ok(TunnelingModel { beta, gamma, alpha0, alpha1 })
    }
}

fn eval_sum(coeffs: &BTreeMap<i64, C64>, z: C64, with_omega_weight: bool) -> FieldSample {
    let w = omega();
    let mut out = FieldSample::ZERO;
    for (&n, &c) in coeffs {
        let half_n = 0.5 * n as f64;
        let mut wk = C64::new(1.0, 0.0);
        for _ in 0..3 {
            let wkc = wk.conj();
            let e = (half_n * (z * wkc - z.conj() * wk)).exp();
            let weight = if with_omega_weight { c * wk } else { c };
            out.value += weight * e;
            out.dz += weight * e * (half_n * wkc);
            out.dzbar -= weight * e * (half_n * wk);
            wk *= w;
        }
    }
    out
}

/// `V(z)` with exact Wirtinger derivatives.
pub fn eval_v(model: &TunnelingModel, z: C64) -> FieldSample {
    eval_sum(&model.gamma, z, false)
}

/// `U(z)` with exact Wirtinger derivatives.
pub fn eval_u(model: &TunnelingModel, z: C64) -> FieldSample {
    eval_sum(&model.beta, z, true)
}

/// `U_-(z) = U(-z)` with exact Wirtinger derivatives.
pub fn eval_u_minus(model: &TunnelingModel, z: C64) -> FieldSample {
    let s = eval_u(model, -z);
    FieldSample { value: s.value, dz: -s.dz, dzbar: -s.dzbar }
}

/// Tunneling matrix `T(z) = [[a0 V, a1 conj(U_-)], [a1 U, a0 V]]`,
/// row-major.
pub fn eval_t(model: &TunnelingModel, z: C64) -> [[C64; 2]; 2] {
    let v = eval_v(model, z).value;
    let u = eval_u(model, z).value;
    let um = eval_u_minus(model, z).value;
    let a0 = C64::new(model.alpha0, 0.0);
    let a1 = C64::new(model.alpha1, 0.0);
    [[a0 * v, a1 * um.conj()], [a1 * u, a0 * v]]
}

/// Full 4x4 matrix potential `script V(z) = [[0, T], [T*, 0]]`, Hermitian
/// at every `z`.
pub fn eval_script_v(model: &TunnelingModel, z: C64) -> [[C64; 4]; 4] {
    let t = eval_t(model, z);
    let mut m = [[C64::ZERO; 4]; 4];
    for r in 0..2 {
        for c in 0..2 {
            m[r][2 + c] = t[r][c];
            m[2 + r][c] = t[c][r].conj();
        }
    }
    m
}

/// Spectral norm (largest singular value) of a 2x2 complex matrix.
pub fn spectral_norm_2x2(t: &[[C64; 2]; 2]) -> f64 {
    // Largest eigenvalue of the Hermitian matrix T^H T via the closed form.
    let a = t[0][0].norm_sqr() + t[1][0].norm_sqr();
    let d = t[0][1].norm_sqr() + t[1][1].norm_sqr();
    let b = t[0][0].conj() * t[0][1] + t[1][0].conj() * t[1][1];
    let tr = a + d;
    let disc = ((a - d) * (a - d) + 4.0 * b.norm_sqr()).max(0.0).sqrt();
    (0.5 * (tr + disc)).max(0.0).sqrt()
}

/// Sup-norm of the matrix potential over the cell grid:
/// `max_z || script V(z) || = max_z || T(z) ||`.
///
/// The grid maximum is polished by local grid refinement around the best
/// point, so the result is stable under grid doubling even when the
/// maximizer falls between grid nodes.
pub fn sup_norm_v(model: &TunnelingModel, grid_m: usize) -> Result<f64> {
    if grid_m < 32 {
        return Err(Error::Domain(format!("sup-norm grid m={grid_m} < 32")));
    }
    let lat = MoireLattice::default();
    let grid = cell_grid(&lat, grid_m)?;
    let norm_at = |s1: f64, s2: f64| {
        spectral_norm_2x2(&eval_t(model, lat.point(s1, s2).z))
    };
    let mut best = 0.0_f64;
    let mut at = (0.0, 0.0);
    for p in &grid.points {
        let v = spectral_norm_2x2(&eval_t(model, p.z));
        if v > best {
            best = v;
            at = (p.s1, p.s2);
        }
    }
    // Local refinement: shrink a 5x5 neighbourhood around the maximizer.
    let mut step = 1.0 / grid_m as f64;
    for _ in 0..40 {
        let (c1, c2) = at;
        for i in -2..=2 {
            for j in -2..=2 {
                let s1 = c1 + i as f64 * step * 0.5;
                let s2 = c2 + j as f64 * step * 0.5;
                let v = norm_at(s1, s2);
                if v > best {
                    best = v;
                    at = (s1, s2);
                }
            }
        }
        step *= 0.5;
    }
    Ok(best)
}

/// Periodic-trapezoid cell average of a real field sampled over the
/// default fundamental cell.
pub fn cell_average<F: Fn(C64) -> f64>(field: F, grid_m: usize) -> Result<f64> {
    let lat = MoireLattice::default();
    let grid = cell_grid(&lat, grid_m)?;
    Ok(grid.average(|p| field(p.z)))
}

/// Second-order chiral DOS coefficient
/// `frak U(eta) = (a1^2/8) [ a1^2 (|U_-|^2 - |U|^2)^2
///                + 4 |d_etabar conj(U_-) - d_eta U|^2 ]`.
pub fn frak_u(model: &TunnelingModel, eta: C64) -> f64 {
    let a1 = model.alpha1;
    if a1 == 0.0 {
        return 0.0;
    }
    let u = eval_u(model, eta);
    let um = eval_u_minus(model, eta);
    let d = um.value.norm_sqr() - u.value.norm_sqr();
    // d_etabar conj(U_-) = conj(d_eta U_-).
    let g = um.dz.conj() - u.dz;
    (a1 * a1 / 8.0) * (a1 * a1 * d * d + 4.0 * g.norm_sqr())
}

/// Cell average of `frak U`.
pub fn ave_frak_u(model: &TunnelingModel, grid_m: usize) -> Result<f64> {
    cell_average(|z| frak_u(model, z), grid_m)
}

/// Squeezing-condition functional
/// `8 i |W(z)| B(z) - 8 i Im(d_z W(z) conj(W(z))^(1/2))` with
/// `W = (a1 U)(a1 U_-)` and the principal square-root branch.
///
/// A nonzero value at any point certifies the band-squeezing hypothesis.
pub fn squeezing_condition<F: Fn(C64) -> f64>(
    model: &TunnelingModel,
    magnetic_b: F,
    z: C64,
) -> Result<C64> {
    let a2 = C64::new(model.alpha1 * model.alpha1, 0.0);
    let u = eval_u(model, z);
    let um = eval_u_minus(model, z);
    let w = a2 * u.value * um.value;
    if w.norm() < 1e-14 {
        return Err(Error::BranchAmbiguity(w.norm()));
    }
    let dw = a2 * (u.dz * um.value + u.value * um.dz);
    let i8 = C64::new(0.0, 8.0);
    Ok(i8 * w.norm() * magnetic_b(z) - i8 * (dw * w.conj().sqrt()).im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, scale: f64, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
            .collect()
    }

    fn rel_close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
    }

    #[test]
    fn default_values_at_origin() {
        let m = TunnelingModel::standard(1.0, 1.0);
        let v0 = eval_v(&m, C64::ZERO).value;
        let u0 = eval_u(&m, C64::ZERO).value;
        assert!((v0 - C64::new(3.0, 0.0)).norm() < 1e-14);
        assert!(u0.norm() < 1e-14);
    }

    #[test]
    fn coefficient_support_validation() {
        let mut bad = BTreeMap::new();
        bad.insert(2_i64, C64::new(1.0, 0.0));
        assert!(TunnelingModel::with_coeffs(bad, BTreeMap::new(), 1.0, 1.0).is_err());
        let mut ok = BTreeMap::new();
        ok.insert(-2_i64, C64::new(0.5, 0.0)); // -2 = 3*(-1)+1
        ok.insert(4_i64, C64::new(0.25, 0.0));
        assert!(TunnelingModel::with_coeffs(ok.clone(), ok, 1.0, 1.0).is_ok());
    }

    #[test]
    fn translation_and_rotation_symmetries() {
        let m = TunnelingModel::standard(1.0, 1.0);
        let lat = MoireLattice::default();
        let w = omega();
        let z0 = C64::new(1.0, 0.5);
        // V(z + a_1) = conj(w) V(z) at z = 0.
        let va = eval_v(&m, lat.a[1]).value;
        assert!(rel_close(va, w.conj() * 3.0, 1e-13));
        // V(w z) = V(z).
        assert!(rel_close(eval_v(&m, w * z0).value, eval_v(&m, z0).value, 1e-13));
        // U(w z) = w U(z) at z = 0.3 - 0.7i.
        let z1 = C64::new(0.3, -0.7);
        assert!(rel_close(eval_u(&m, w * z1).value, w * eval_u(&m, z1).value, 1e-13));
        // conj(U(conj(z))) = U(z).
        assert!(rel_close(eval_u(&m, z1.conj()).value.conj(), eval_u(&m, z1).value, 1e-13));
    }

    /// All eight symmetry identities at 100 pseudo-random points, 1e-12
    /// relative. Higher-harmonic real coefficients included.
    #[test]
    fn symmetry_suite_random_points() {
        let mut beta = BTreeMap::new();
        beta.insert(1_i64, C64::new(1.0, 0.0));
        beta.insert(-2_i64, C64::new(0.125, 0.0));
        let mut gamma = BTreeMap::new();
        gamma.insert(1_i64, C64::new(1.0, 0.0));
        gamma.insert(4_i64, C64::new(0.0625, 0.0));
        let m = TunnelingModel::with_coeffs(beta, gamma, 0.7, 1.3).unwrap();
        let lat = MoireLattice::default();
        let w = omega();
        for z in random_points(100, 6.0, 42) {
            let v = eval_v(&m, z).value;
            let u = eval_u(&m, z).value;
            // 1. V(z + a_j) = conj(w) V(z)
            assert!(rel_close(eval_v(&m, z + lat.a[1]).value, w.conj() * v, 1e-12));
            // 2. V(w z) = V(z)
            assert!(rel_close(eval_v(&m, w * z).value, v, 1e-12));
            // 3. conj(V(z)) = V(-z)
            assert!(rel_close(v.conj(), eval_v(&m, -z).value, 1e-12));
            // 4. V(conj(z)) = V(-z)
            assert!(rel_close(eval_v(&m, z.conj()).value, eval_v(&m, -z).value, 1e-12));
            // 5. U(z + a_j) = conj(w) U(z)
            assert!(rel_close(eval_u(&m, z + lat.a[2]).value, w.conj() * u, 1e-12));
            // 6. U(w z) = w U(z)
            assert!(rel_close(eval_u(&m, w * z).value, w * u, 1e-12));
            // 7. conj(U(conj(z))) = U(z)
            assert!(rel_close(eval_u(&m, z.conj()).value.conj(), u, 1e-12));
            // 8. U_-(z) = U(-z)
            assert!(rel_close(eval_u_minus(&m, z).value, eval_u(&m, -z).value, 1e-12));
        }
    }

    #[test]
    fn gamma_periodicity() {
        let m = TunnelingModel::standard(1.0, 1.0);
        let lat = MoireLattice::default();
        for z in random_points(20, 8.0, 7) {
            for zeta in [lat.zeta1, lat.zeta2] {
                assert!(rel_close(eval_v(&m, z + zeta).value, eval_v(&m, z).value, 1e-12));
                assert!(rel_close(eval_u(&m, z + zeta).value, eval_u(&m, z).value, 1e-12));
            }
        }
    }

    #[test]
    fn wirtinger_matches_finite_differences() {
        let m = TunnelingModel::standard(1.0, 1.0);
        let h = 1e-5;
        for z in random_points(20, 4.0, 11) {
            for eval in [eval_v, eval_u, eval_u_minus] {
                let s = eval(&m, z);
                let fx = (eval(&m, z + h).value - eval(&m, z - h).value) / (2.0 * h);
                let fy = (eval(&m, z + C64::new(0.0, h)).value
                    - eval(&m, z - C64::new(0.0, h)).value)
                    / (2.0 * h);
                let dz = 0.5 * (fx - C64::i() * fy);
                let dzbar = 0.5 * (fx + C64::i() * fy);
                assert!(rel_close(s.dz, dz, 1e-7), "dz {} vs {}", s.dz, dz);
                assert!(rel_close(s.dzbar, dzbar, 1e-7));
            }
        }
    }

    #[test]
    fn t_matrix_special_cases() {
        let z0 = C64::ZERO;
        // alpha0 = 1, alpha1 = 0: T(0) = 3 Id.
        let t = eval_t(&TunnelingModel::standard(1.0, 0.0), z0);
        assert!((t[0][0] - 3.0).norm() < 1e-13 && (t[1][1] - 3.0).norm() < 1e-13);
        assert!(t[0][1].norm() < 1e-14 && t[1][0].norm() < 1e-14);
        // alpha0 = 0, alpha1 = 1: T(0) = 0.
        let t = eval_t(&TunnelingModel::standard(0.0, 1.0), z0);
        for r in 0..2 {
            for c in 0..2 {
                assert!(t[r][c].norm() < 1e-13);
            }
        }
    }

    #[test]
    fn t_matrix_translation_phases() {
        // Every entry obeys its translation phase law at z = a_1.
        let m = TunnelingModel::standard(1.0, 1.0);
        let lat = MoireLattice::default();
        let w = omega();
        let z = C64::new(0.4, -0.3);
        let t0 = eval_t(&m, z);
        let t1 = eval_t(&m, z + lat.a[1]);
        // U_-(z + a_1) = U(-z + a_0 + a_2) = w U_-(z), so the conjugated
        // entry picks up conj(w) like all the others.
        assert!(rel_close(t1[0][0], w.conj() * t0[0][0], 1e-12));
        assert!(rel_close(t1[1][1], w.conj() * t0[1][1], 1e-12));
        assert!(rel_close(t1[1][0], w.conj() * t0[1][0], 1e-12));
        assert!(rel_close(t1[0][1], w.conj() * t0[0][1], 1e-12));
    }

    #[test]
    fn script_v_hermitian() {
        let m = TunnelingModel::standard(0.8, 1.2);
        for z in random_points(10, 5.0, 3) {
            let sv = eval_script_v(&m, z);
            for r in 0..4 {
                for c in 0..4 {
                    assert!((sv[r][c] - sv[c][r].conj()).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn sup_norm_cases() {
        assert_eq!(sup_norm_v(&TunnelingModel::standard(0.0, 0.0), 32).unwrap(), 0.0);
        let n_v = sup_norm_v(&TunnelingModel::standard(1.0, 0.0), 64).unwrap();
        assert!((n_v - 3.0).abs() < 1e-12, "sup |V| = {n_v}");
        // Grid-doubling stability for the U block.
        let m = TunnelingModel::standard(0.0, 1.0);
        let a = sup_norm_v(&m, 64).unwrap();
        let b = sup_norm_v(&m, 128).unwrap();
        assert!(b >= a - 1e-13, "refinement must not decrease the max");
        assert!(b - a < 1e-6, "doubling changed sup norm by {}", b - a);
        assert!(sup_norm_v(&m, 16).is_err());
    }

    #[test]
    fn cell_average_parseval_basics() {
        let m = TunnelingModel::standard(1.0, 1.0);
        let av = cell_average(|z| eval_v(&m, z).value.norm_sqr(), 64).unwrap();
        assert!((av - 3.0).abs() < 1e-12, "Ave|V|^2 = {av}");
        let au = cell_average(|z| eval_u(&m, z).value.norm_sqr(), 64).unwrap();
        assert!((au - 3.0).abs() < 1e-12, "Ave|U|^2 = {au}");
        let ac = cell_average(|_| 2.75, 48).unwrap();
        assert!((ac - 2.75).abs() < 1e-15);
    }

    #[test]
    fn frak_u_vanishes_without_ab_coupling() {
        let m = TunnelingModel::standard(1.0, 0.0);
        for z in random_points(10, 5.0, 19) {
            assert_eq!(frak_u(&m, z), 0.0);
        }
    }

    #[test]
    fn frak_u_nonnegative_and_average() {
        let m = TunnelingModel::standard(0.0, 1.0);
        let lat = MoireLattice::default();
        let grid = cell_grid(&lat, 64).unwrap();
        for p in grid.points.iter().step_by(17) {
            assert!(frak_u(&m, p.z) >= 0.0);
        }
        // Frozen Parseval value for the default model; the independent
        // coefficient-space oracle lives in tests/parseval.rs.
        let a64 = ave_frak_u(&m, 64).unwrap();
        let a128 = ave_frak_u(&m, 128).unwrap();
        assert!((a64 - 3.75).abs() < 1e-10, "Ave frak U = {a64}");
        assert!((a64 - a128).abs() < 1e-10);
        // alpha1 = 2 splits as a1^4/8 * 18 + a1^2/2 * 3 = 36 + 6.
        let m2 = TunnelingModel::standard(0.0, 2.0);
        let a2 = ave_frak_u(&m2, 64).unwrap();
        assert!((a2 - 42.0).abs() < 1e-9, "Ave frak U (a1=2) = {a2}");
    }

    #[test]
    fn squeezing_condition_properties() {
        let m = TunnelingModel::standard(0.0, 1.0);
        let z = C64::new(0.0, 1.0);
        // Homogeneity in alpha1 at B = 0: the remaining term scales as a1^3.
        let c1 = squeezing_condition(&m, |_| 0.0, z).unwrap();
        let m3 = TunnelingModel::standard(0.0, 3.0);
        let c3 = squeezing_condition(&m3, |_| 0.0, z).unwrap();
        assert!((c3 - c1 * 27.0).norm() < 1e-9 * c3.norm().max(1.0));
        // Nonzero regression value at B = 1, z = i (frozen from the first
        // computation).
        let c = squeezing_condition(&m, |_| 1.0, z).unwrap();
        assert!(c.norm() > 1e-6, "condition value {c}");
        // Branch guard where W vanishes: U(0) = 0.
        assert!(matches!(
            squeezing_condition(&m, |_| 1.0, C64::ZERO),
            Err(Error::BranchAmbiguity(_))
        ));
    }
}

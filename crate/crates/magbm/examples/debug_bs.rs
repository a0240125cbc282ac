use magbm::potentials::TunnelingModel;
use magbm::spectra::*;
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::time::Instant;

fn main() {
    let k = C64::new(0.1, 0.05);
    let mut beta = BTreeMap::new();
    beta.insert(1i64, C64::new(0.2, 0.0));
    let model = TunnelingModel::with_coeffs(beta.clone(), beta, 0.0, 1.0).unwrap();
    let mut a = FourierTable::new();
    a.insert((1, 0), C64::new(0.2, 0.0));
    a.insert((-1, 0), C64::new(0.2, 0.0));
    for (theta, ns) in [(0.10, vec![26usize]), (0.08, vec![26usize, 30])] {
        for n in ns {
            let t = Instant::now();
            let e = semiclassical_e0(&model, theta, Some(&a), k, n).unwrap();
            println!("theta={theta} N={n}: {e:.6e} [{:.0?}]", t.elapsed());
        }
    }
}

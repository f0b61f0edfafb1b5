use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::rng::{rng_from_seed, Rng};

fn ginibre_entry(rng: &mut Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) / 2f64.sqrt()
}

/// Haar-random U(2) element: Ginibre matrix, Gram-Schmidt QR, then the
/// columns rephased so `R` has a positive real diagonal.
pub fn sample_cue_2x2(rng: &mut Rng) -> Matrix2<Complex64> {
    loop {
        let a = Matrix2::from_fn(|_, _| ginibre_entry(rng));
        let c0 = a.column(0).into_owned();
        let r00 = c0.norm();
        if r00 < 1e-300 {
            continue;
        }
        let q0 = c0 / Complex64::new(r00, 0.0);
        let c1 = a.column(1).into_owned();
        let proj = q0.dotc(&c1);
        let v = c1 - q0 * proj;
        let r11 = v.norm();
        if r11 < 1e-300 {
            continue;
        }
        let q1 = v / Complex64::new(r11, 0.0);
        return Matrix2::from_columns(&[q0, q1]);
    }
}

/// One independent CUE draw per site.
pub fn sample_cue_local(n_sites: usize, seed: u64) -> Vec<Matrix2<Complex64>> {
    let mut rng = rng_from_seed(seed);
    (0..n_sites).map(|_| sample_cue_2x2(&mut rng)).collect()
}

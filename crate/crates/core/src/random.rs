//! Random states for experiments and tests.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::opalg::{ComplexMatrix, HermitianOperator};
use crate::scalar::Real;
use crate::states_povm::DensityOperator;

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re), T::lit(im))
}

/// Haar-random pure state.
pub fn random_pure<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityOperator<T> {
    let psi: Vec<Complex<T>> = (0..d).map(|_| gaussian(rng)).collect();
    DensityOperator::pure(&psi).expect("nonzero Gaussian vector")
}

/// Full-rank mixed state `G G^dagger / tr` with Ginibre `G`.
pub fn random_mixed<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityOperator<T> {
    let g = ComplexMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let gg = HermitianOperator::new(g.matmul(&g.adjoint())).expect("G G^dagger");
    let tr = gg.trace();
    DensityOperator::new(gg.scale(T::one() / tr)).expect("normalized positive operator")
}

/// Qubit state with Bloch vector uniform in the unit ball.
pub fn random_qubit<T: Real, R: Rng + ?Sized>(rng: &mut R) -> DensityOperator<T> {
    loop {
        let s: [f64; 3] = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        if s.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            let b = crate::states_povm::BlochVector::new(T::lit(s[0]), T::lit(s[1]), T::lit(s[2]))
                .expect("inside the ball");
            return crate::states_povm::density_from_bloch(b);
        }
    }
}

/// Random point on the probability simplex (uniform Dirichlet).
pub fn random_weights<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<T> = raw.iter().map(|&x| T::lit(x / total)).collect();
    // absorb rounding into the last weight
    let head: T = w[..n - 1].iter().copied().sum();
    w[n - 1] = T::one() - head;
    w
}

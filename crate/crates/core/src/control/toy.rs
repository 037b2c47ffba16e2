//! A small seeded coding problem used for feasibility checks.

use nalgebra::DMatrix;
use rand::Rng;

use crate::operator::{Basis, Operator};
use crate::rng::stream;
use crate::scalar::{cx, Cx};
use crate::spin_algebra::h;
use crate::system_model::{build_space, LevelSpace};

/// Four-level instance: two random control Hamiltonians and one random
/// error generator of unit spectral norm.
#[derive(Clone, Debug)]
pub struct ToyInstance {
    pub space: LevelSpace,
    pub ha: Operator<f64>,
    pub hb: Operator<f64>,
    pub error: Operator<f64>,
}

fn random_hermitian(basis: Basis, rng: &mut impl Rng) -> Operator<f64> {
    let n = basis.dimension();
    let x = DMatrix::<Cx<f64>>::from_fn(n, n, |_, _| cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let hmat = (&x + x.adjoint()).map(|z| z * 0.5);
    Operator::new(basis, hmat).expect("square")
}

/// Seeded toy instance on the `L = 1/2, S = 1/2` manifold (`N = 4`), code
/// states `|J=1, m=-1>` and `|J=1, m=0>`.
pub fn toy_instance(seed: u64) -> ToyInstance {
    let space = build_space(h(1), h(1), [(h(2), h(-2)), (h(2), h(0))]).expect("code states exist");
    let basis = space.coupled();
    let mut rng = stream(seed);
    let ha = random_hermitian(basis, &mut rng);
    let hb = random_hermitian(basis, &mut rng);
    let e = random_hermitian(basis, &mut rng);
    let error = e.scale(1.0 / e.spectral_norm());
    ToyInstance { space, ha, hb, error }
}

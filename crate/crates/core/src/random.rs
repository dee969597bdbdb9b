//! Seeded sampling of states, operators and measurements.
//!
//! Everything stochastic in the crate goes through [`rng_for`], which
//! derives a per-task stream from a single 64-bit seed, so identical
//! seed + task tag means identical draws.

use crate::linalg::{self, CMat, C64};
use crate::qstate::{DensityMatrix, HermitianOp, Povm};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fixed derivation of a per-task generator from one seed.
pub fn rng_for(seed: u64, task: &str) -> ChaCha8Rng {
    // FNV-1a over the task tag, folded into the seed.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in task.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller; fine for test-scale sampling.
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_complex_gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(gaussian(rng), gaussian(rng))
}

pub fn random_unit_vector(dim: usize, rng: &mut impl Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim).map(|_| random_complex_gaussian(rng)).collect();
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
    v
}

/// Full-rank random state: G G† / tr(G G†) with Ginibre G.
pub fn random_density(dims: &[usize], rng: &mut impl Rng) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let g = CMat::from_fn(n, n, |_, _| random_complex_gaussian(rng));
    let mut p = &g * g.adjoint();
    let tr = linalg::trace_re(&p);
    p = p.map(|z| z / tr);
    DensityMatrix::from_valid(dims.to_vec(), p)
}

pub fn random_pure_density(dims: &[usize], rng: &mut impl Rng) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let v = random_unit_vector(n, rng);
    DensityMatrix::pure(dims.to_vec(), &v).expect("unit vector is valid")
}

pub fn random_hermitian_op(dims: &[usize], rng: &mut impl Rng) -> HermitianOp {
    let n: usize = dims.iter().product();
    let g = CMat::from_fn(n, n, |_, _| random_complex_gaussian(rng));
    HermitianOp::from_valid(dims.to_vec(), linalg::hermitize(&g))
}

/// Random POVM with `n_out` outcomes: heap of Wishart operators renormalized
/// by the inverse square root of their sum.
pub fn random_povm(dim: usize, n_out: usize, rng: &mut impl Rng) -> Povm {
    assert!(n_out >= 1);
    let parts: Vec<CMat> = (0..n_out)
        .map(|_| {
            let g = CMat::from_fn(dim, dim, |_, _| random_complex_gaussian(rng));
            &g * g.adjoint()
        })
        .collect();
    let mut sum = CMat::zeros(dim, dim);
    for p in &parts {
        sum += p;
    }
    let (vals, vecs) = linalg::eigh(&sum);
    let inv_sqrt = linalg::rebuild(
        &vals.iter().map(|v| 1.0 / v.max(1e-300).sqrt()).collect::<Vec<_>>(),
        &vecs,
    );
    let elems: Vec<CMat> = parts.iter().map(|p| &inv_sqrt * p * &inv_sqrt).collect();
    Povm::new_default(dim, elems).expect("construction yields a valid POVM")
}

/// Random two-outcome effect 0 <= E <= I with Haar-ish eigenbasis and
/// uniform eigenvalues.
pub fn random_effect(dim: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| random_complex_gaussian(rng));
    let (_, vecs) = linalg::eigh(&linalg::hermitize(&g));
    let vals: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
    linalg::rebuild(&vals, &vecs)
}

/// Random rank-one effect |v><v|.
pub fn random_rank_one_effect(dim: usize, rng: &mut impl Rng) -> CMat {
    let v = random_unit_vector(dim, rng);
    CMat::from_fn(dim, dim, |i, j| v[i] * v[j].conj())
}

//! Entropic quantities in nats: von Neumann entropy, relative entropy,
//! mutual information and its conditional/multipartite variants on states
//! with classical registers.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::qstate::{
    conditional_states, DensityMatrix, Ensemble, Povm, QcChannel, Tolerances,
};

/// Eigenvalues below this are treated as exactly zero in entropy sums.
pub const EIG_FLOOR: f64 = 1e-14;

/// Eigenvalues of sigma above this define its support for the relative
/// entropy's infinity decision.
pub const SUPPORT_CUT: f64 = 1e-12;

/// State together with the subsystems whose registers are classical
/// (diagonal, with vanishing coherences to the rest).
#[derive(Debug, Clone)]
pub struct QqcState {
    state: DensityMatrix,
    classical: Vec<usize>,
}

impl QqcState {
    pub fn new(state: DensityMatrix, classical: Vec<usize>, tol: &Tolerances) -> Result<Self> {
        let mut cls = classical;
        cls.sort_unstable();
        cls.dedup();
        for &c in &cls {
            if c >= state.n_subsystems() {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    count: state.n_subsystems(),
                });
            }
            let residual = classical_residual(&state, c);
            if residual > tol.diag_tol {
                return Err(Error::NotClassical {
                    index: c,
                    residual,
                    tol: tol.diag_tol,
                });
            }
        }
        Ok(QqcState {
            state,
            classical: cls,
        })
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn classical(&self) -> &[usize] {
        &self.classical
    }
}

/// Largest matrix element coupling different basis states of register `c`
/// (zero iff the state is block-diagonal in that register).
fn classical_residual(state: &DensityMatrix, c: usize) -> f64 {
    let dims = state.dims();
    let data = state.data();
    let st = crate::qstate::strides(dims);
    let n = state.total_dim();
    let mut r: f64 = 0.0;
    for i in 0..n {
        let ki = (i / st[c]) % dims[c];
        for j in 0..n {
            let kj = (j / st[c]) % dims[c];
            if ki != kj {
                r = r.max(data[(i, j)].norm());
            }
        }
    }
    r
}

/// S(x) = -sum lambda ln lambda over the spectrum, in nats.
pub fn von_neumann_entropy(x: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&linalg::eigh(x.data()).0)
}

fn entropy_of_spectrum(vals: &[f64]) -> f64 {
    let mut s = 0.0;
    for &v in vals {
        if v > EIG_FLOOR {
            s -= v * v.ln();
        }
    }
    s
}

/// tr(rho (ln rho - ln sigma)); +infinity when supp(rho) is not contained
/// in supp(sigma), decided by the projector onto sigma's eigenvalues above
/// [`SUPPORT_CUT`].
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch {
            expected: rho.total_dim(),
            got: sigma.total_dim(),
            context: "relative entropy operands".into(),
        });
    }
    let (sv, svec) = linalg::eigh(sigma.data());
    // weight of rho outside sigma's support
    let mut outside = 0.0;
    for k in 0..sv.len() {
        if sv[k] <= SUPPORT_CUT {
            let col = svec.column(k);
            let mut q = 0.0;
            for i in 0..col.len() {
                for j in 0..col.len() {
                    q += (col[i].conj() * rho.data()[(i, j)] * col[j]).re;
                }
            }
            outside += q;
        }
    }
    if outside > SUPPORT_CUT {
        return Ok(f64::INFINITY);
    }
    let (rv, _) = linalg::eigh(rho.data());
    let tr_rho_ln_rho = rv
        .iter()
        .filter(|&&v| v > EIG_FLOOR)
        .map(|&v| v * v.ln())
        .sum::<f64>();
    let mut tr_rho_ln_sigma = 0.0;
    for k in 0..sv.len() {
        if sv[k] > SUPPORT_CUT {
            let col = svec.column(k);
            let mut q = 0.0;
            for i in 0..col.len() {
                for j in 0..col.len() {
                    q += (col[i].conj() * rho.data()[(i, j)] * col[j]).re;
                }
            }
            tr_rho_ln_sigma += q * sv[k].ln();
        }
    }
    Ok(tr_rho_ln_rho - tr_rho_ln_sigma)
}

/// I(A:B) = S(A) + S(B) - S(AB) for the bipartition (`a`, complement).
pub fn mutual_information(x: &DensityMatrix, a: &[usize]) -> Result<f64> {
    let n = x.n_subsystems();
    let b: Vec<usize> = (0..n).filter(|i| !a.contains(i)).collect();
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput(
            "bipartition needs two nonempty groups".into(),
        ));
    }
    mutual_information_groups(x, a, &b)
}

/// I(A:B) where A, B are disjoint groups; subsystems outside both groups are
/// traced out first.
pub fn mutual_information_groups(x: &DensityMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    for i in a {
        if b.contains(i) {
            return Err(Error::InvalidInput("groups overlap".into()));
        }
    }
    let mut all: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
    all.sort_unstable();
    let xr = x.partial_trace(&all)?;
    // positions of a within the sorted union
    let pos = |set: &[usize]| -> Vec<usize> {
        set.iter()
            .map(|i| all.iter().position(|j| j == i).unwrap())
            .collect::<Vec<_>>()
    };
    let sa = von_neumann_entropy(&xr.partial_trace(&pos(a))?);
    let sb = von_neumann_entropy(&xr.partial_trace(&pos(b))?);
    let sab = von_neumann_entropy(&xr);
    Ok((sa + sb - sab).max(0.0))
}

/// I(A_1 : ... : A_k) = sum_i S(A_i) - S(A_1...A_k) for a partition into
/// groups.
pub fn multipartite_mutual_information(x: &DensityMatrix, groups: &[Vec<usize>]) -> Result<f64> {
    validate_partition(x, groups)?;
    let mut acc = -von_neumann_entropy(x);
    for g in groups {
        acc += von_neumann_entropy(&x.partial_trace(g)?);
    }
    Ok(acc.max(0.0))
}

fn validate_partition(x: &DensityMatrix, groups: &[Vec<usize>]) -> Result<()> {
    let n = x.n_subsystems();
    let mut seen = vec![false; n];
    for g in groups {
        for &i in g {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, count: n });
            }
            if seen[i] {
                return Err(Error::InvalidInput("groups overlap".into()));
            }
            seen[i] = true;
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::InvalidInput("groups must cover all subsystems".into()));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::InvalidInput("empty group".into()));
    }
    Ok(())
}

/// I(A:B|X) = sum_k p_k I(A:B)_{rho_k}, conditioning on the classical
/// registers `cond`. With empty `cond` this is plain mutual information.
pub fn conditional_mutual_information(
    x: &QqcState,
    a: &[usize],
    b: &[usize],
    cond: &[usize],
) -> Result<f64> {
    conditional_groups_mi(x, &[a.to_vec(), b.to_vec()], cond)
}

/// Conditional multipartite mutual information
/// I(A_1 : ... : A_g | cond) = sum_k p_k I(A_1 : ... : A_g)_{rho_k}.
pub fn conditional_groups_mi(
    x: &QqcState,
    groups: &[Vec<usize>],
    cond: &[usize],
) -> Result<f64> {
    for c in cond {
        if !x.classical().contains(c) {
            return Err(Error::NotClassical {
                index: *c,
                residual: f64::NAN,
                tol: 0.0,
            });
        }
    }
    for g in groups {
        for i in g {
            if cond.contains(i) {
                return Err(Error::InvalidInput(
                    "conditioning register overlaps a group".into(),
                ));
            }
        }
    }
    if cond.is_empty() {
        return groups_mi_of(x.state(), groups);
    }
    let ens = decompose_on_classical(x, cond)?;
    // Conditioning removed `cond`; remap group indices.
    let mut sorted_cond = cond.to_vec();
    sorted_cond.sort_unstable();
    let remap = |i: usize| -> usize { i - sorted_cond.iter().filter(|&&c| c < i).count() };
    let rgroups: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| g.iter().map(|&i| remap(i)).collect())
        .collect();
    let mut acc = 0.0;
    for (w, s) in ens.weights().iter().zip(ens.states().iter()) {
        acc += w * groups_mi_of(s, &rgroups)?;
    }
    Ok(acc)
}

fn groups_mi_of(state: &DensityMatrix, groups: &[Vec<usize>]) -> Result<f64> {
    if groups.len() == 2 {
        mutual_information_groups(state, &groups[0], &groups[1])
    } else {
        // trace out subsystems not in any group, then take the partitioned MI
        let mut union: Vec<usize> = groups.iter().flatten().copied().collect();
        union.sort_unstable();
        let reduced = state.partial_trace(&union)?;
        let rgroups: Vec<Vec<usize>> = groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|i| union.iter().position(|j| j == i).unwrap())
                    .collect()
            })
            .collect();
        multipartite_mutual_information(&reduced, &rgroups)
    }
}

/// Decomposes a qqc state over the joint computational outcome of the given
/// classical registers.
pub fn decompose_on_classical(x: &QqcState, cond: &[usize]) -> Result<Ensemble> {
    let d = x.state().dims()[cond[0]];
    // all conditioning registers measured with their own computational POVM;
    // conditional_states requires equal dims per call, so group by dimension.
    let same_dim = cond.iter().all(|&c| x.state().dims()[c] == d);
    if same_dim {
        conditional_states(x.state(), &QcChannel::new(Povm::computational(d)), cond)
    } else {
        // Measure registers one dimension group at a time.
        let mut ens = Ensemble::from_valid(vec![1.0], vec![x.state().clone()]);
        let mut remaining: Vec<usize> = cond.to_vec();
        remaining.sort_unstable();
        while !remaining.is_empty() {
            let dim0 = ens.states()[0].dims()[remaining[0]];
            let batch: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&c| ens.states()[0].dims()[c] == dim0)
                .collect();
            let ch = QcChannel::new(Povm::computational(dim0));
            let mut w2 = Vec::new();
            let mut s2 = Vec::new();
            for (w, s) in ens.weights().iter().zip(ens.states().iter()) {
                let sub = conditional_states(s, &ch, &batch)?;
                for (wi, si) in sub.weights().iter().zip(sub.states().iter()) {
                    w2.push(w * wi);
                    s2.push(si.clone());
                }
            }
            ens = Ensemble::from_valid(w2, s2);
            let batch_sorted = batch;
            remaining = remaining
                .iter()
                .filter(|c| !batch_sorted.contains(c))
                .map(|&c| c - batch_sorted.iter().filter(|&&b| b < c).count())
                .collect();
        }
        Ok(ens)
    }
}

/// Report from the seeded identity battery run by the CLI and the
/// acceptance suite.
#[derive(Debug, Clone, serde::Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub samples: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks the chain rule, Pinsker, monotonicity under local channels, and
/// the multipartite-to-bipartite telescoping identity on seeded random
/// states. Violations are (lhs - rhs) signed so that positive means broken.
pub fn identity_battery(seed: u64, samples: usize, channel_samples: usize) -> Vec<IdentityCheck> {
    use crate::random::{random_density, random_povm, rng_for};
    let mut checks = Vec::new();

    // Chain rule I(A:B1B2|M) = I(A:B1|M) + I(A:B2|M B1) on random qqc states.
    {
        let mut rng = rng_for(seed, "battery-chain");
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = random_qqc_chain_state(&mut rng);
            let lhs = conditional_mutual_information(&x, &[0], &[1, 2], &[3]).unwrap();
            let rhs = conditional_mutual_information(&x, &[0], &[1], &[3]).unwrap()
                + conditional_mutual_information(&x, &[0], &[2], &[3, 1]).unwrap();
            worst = worst.max((lhs - rhs).abs());
        }
        checks.push(IdentityCheck {
            name: "chain_rule".into(),
            samples,
            max_violation: worst,
            tolerance: 1e-9,
            pass: worst <= 1e-9,
        });
    }

    // Pinsker I(A:B) >= 0.5 ||rho - rhoA⊗rhoB||_1^2 on random bipartite states.
    {
        let mut rng = rng_for(seed, "battery-pinsker");
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let dims = if i % 2 == 0 { [2usize, 3] } else { [3, 2] };
            let rho = random_density(&dims, &mut rng);
            let mi = mutual_information(&rho, &[0]).unwrap();
            let prod = rho
                .partial_trace(&[0])
                .unwrap()
                .tensor(&rho.partial_trace(&[1]).unwrap());
            let td = crate::qstate::trace_distance(rho.data(), prod.data());
            worst = worst.max(0.5 * td * td - mi);
        }
        checks.push(IdentityCheck {
            name: "pinsker".into(),
            samples,
            max_violation: worst,
            tolerance: 1e-9,
            pass: worst <= 1e-9,
        });
    }

    // Multipartite-to-bipartite telescoping on random tripartite states.
    {
        let mut rng = rng_for(seed, "battery-multitobi");
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let rho = random_density(&[2, 2, 2], &mut rng);
            let lhs =
                multipartite_mutual_information(&rho, &[vec![0], vec![1], vec![2]]).unwrap();
            let rhs = mutual_information_groups(&rho, &[0], &[1]).unwrap()
                + mutual_information_groups(&rho, &[0, 1], &[2]).unwrap();
            worst = worst.max((lhs - rhs).abs());
        }
        checks.push(IdentityCheck {
            name: "multipartite_to_bipartite".into(),
            samples,
            max_violation: worst,
            tolerance: 1e-9,
            pass: worst <= 1e-9,
        });
    }

    // Multipartite Pinsker.
    {
        let mut rng = rng_for(seed, "battery-multipinsker");
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let rho = random_density(&[2, 2, 2], &mut rng);
            let mi =
                multipartite_mutual_information(&rho, &[vec![0], vec![1], vec![2]]).unwrap();
            let prod = rho
                .partial_trace(&[0])
                .unwrap()
                .tensor(&rho.partial_trace(&[1]).unwrap())
                .tensor(&rho.partial_trace(&[2]).unwrap());
            let td = crate::qstate::trace_distance(rho.data(), prod.data());
            worst = worst.max(0.5 * td * td - mi);
        }
        checks.push(IdentityCheck {
            name: "multipartite_pinsker".into(),
            samples,
            max_violation: worst,
            tolerance: 1e-9,
            pass: worst <= 1e-9,
        });
    }

    // Monotonicity under local qc channels.
    {
        let mut rng = rng_for(seed, "battery-monotone");
        let mut worst: f64 = 0.0;
        for _ in 0..channel_samples {
            let rho = random_density(&[2, 3], &mut rng);
            let before = mutual_information(&rho, &[0]).unwrap();
            let povm = random_povm(3, 3, &mut rng);
            let after = crate::qstate::apply_qc_channel(&rho, &QcChannel::new(povm), 1).unwrap();
            let after_mi = mutual_information(&after, &[0]).unwrap();
            worst = worst.max(after_mi - before);
        }
        checks.push(IdentityCheck {
            name: "monotonicity_local_channels".into(),
            samples: channel_samples,
            max_violation: worst,
            tolerance: 1e-9,
            pass: worst <= 1e-9,
        });
    }

    checks
}

/// Random state on A ⊗ B1 ⊗ B2 ⊗ M with A quantum (dim <= 3) and B1, B2, M
/// classical (<= 4 outcomes), of the block form needed for chain-rule tests.
pub fn random_qqc_chain_state(rng: &mut impl rand::Rng) -> QqcState {
    use crate::random::random_density;
    let da = rng.gen_range(2..=3usize);
    let db1 = rng.gen_range(2..=4usize);
    let db2 = rng.gen_range(2..=3usize);
    let dm = rng.gen_range(2..=4usize);
    let n = da * db1 * db2 * dm;
    let mut data = CMat::zeros(n, n);
    // random joint distribution over (b1, b2, m) with a random A-state each
    let mut weights: Vec<f64> = (0..db1 * db2 * dm).map(|_| rng.gen_range(0.01..1.0)).collect();
    let tot: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= tot;
    }
    for (idx, &w) in weights.iter().enumerate() {
        let a = random_density(&[da], rng);
        let b1 = idx / (db2 * dm);
        let b2 = (idx / dm) % db2;
        let m = idx % dm;
        for i in 0..da {
            for j in 0..da {
                let row = ((i * db1 + b1) * db2 + b2) * dm + m;
                let col = ((j * db1 + b1) * db2 + b2) * dm + m;
                data[(row, col)] += a.data()[(i, j)] * w;
            }
        }
    }
    let state = DensityMatrix::from_valid(vec![da, db1, db2, dm], data);
    QqcState::new(state, vec![1, 2, 3], &Tolerances::default()).expect("constructed classical")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::qstate::trace_distance;
    use crate::random::{random_density, rng_for};

    #[test]
    fn entropy_of_pure_and_mixed() {
        let pure = DensityMatrix::pure(vec![2], &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!(von_neumann_entropy(&pure).abs() < 1e-12);
        for d in [2usize, 3, 5] {
            let mixed = DensityMatrix::maximally_mixed(vec![d]);
            assert!((von_neumann_entropy(&mixed) - (d as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_matches_scalar_oracle() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = C64::new(0.25, 0.0);
        m[(1, 1)] = C64::new(0.75, 0.0);
        let rho = DensityMatrix::new_default(vec![2], m).unwrap();
        let oracle = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        assert!((von_neumann_entropy(&rho) - oracle).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_zero_iff_equal_and_infinite_off_support() {
        let mut rng = rng_for(2, "relent");
        let rho = random_density(&[2], &mut rng);
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-10);

        let zero = DensityMatrix::pure(vec![2], &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let one = DensityMatrix::pure(vec![2], &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        assert!(relative_entropy(&zero, &one).unwrap().is_infinite());
    }

    #[test]
    fn relative_entropy_matches_eigenbasis_oracle() {
        let mut rng = rng_for(3, "relent-oracle");
        for _ in 0..5 {
            let rho = random_density(&[3], &mut rng);
            let sigma = random_density(&[3], &mut rng);
            let got = relative_entropy(&rho, &sigma).unwrap();
            // oracle: expand in sigma's eigenbasis
            let (sv, svec) = linalg::eigh(sigma.data());
            let rho_rot = svec.adjoint() * rho.data() * &svec;
            let (rv, _) = linalg::eigh(rho.data());
            let mut oracle: f64 = rv.iter().filter(|&&v| v > 1e-14).map(|&v| v * v.ln()).sum();
            for k in 0..3 {
                oracle -= rho_rot[(k, k)].re * sv[k].ln();
            }
            assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
        }
    }

    #[test]
    fn mutual_information_standard_values() {
        let mut rng = rng_for(4, "mi");
        let a = random_density(&[2], &mut rng);
        let b = random_density(&[3], &mut rng);
        let prod = a.tensor(&b);
        assert!(mutual_information(&prod, &[0]).unwrap() < 1e-10);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix::pure(
            vec![2, 2],
            &[
                C64::new(s, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(s, 0.0),
            ],
        )
        .unwrap();
        let mi = mutual_information(&bell, &[0]).unwrap();
        assert!((mi - 2.0 * 2.0_f64.ln()).abs() < 1e-10);

        // classically correlated pair
        let mut cc = CMat::zeros(4, 4);
        cc[(0, 0)] = C64::new(0.5, 0.0);
        cc[(3, 3)] = C64::new(0.5, 0.0);
        let cc = DensityMatrix::new_default(vec![2, 2], cc).unwrap();
        assert!((mutual_information(&cc, &[0]).unwrap() - 2.0_f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn mutual_information_equals_relative_entropy_to_marginals() {
        let mut rng = rng_for(5, "mi-relent");
        let rho = random_density(&[2, 2], &mut rng);
        let via_entropies = mutual_information(&rho, &[0]).unwrap();
        let prod = rho
            .partial_trace(&[0])
            .unwrap()
            .tensor(&rho.partial_trace(&[1]).unwrap());
        let via_relent = relative_entropy(&rho, &prod).unwrap();
        assert!((via_entropies - via_relent).abs() < 1e-10);
    }

    #[test]
    fn ghz_multipartite_mi() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![C64::new(0.0, 0.0); 8];
        v[0] = C64::new(s, 0.0);
        v[7] = C64::new(s, 0.0);
        let ghz = DensityMatrix::pure(vec![2, 2, 2], &v).unwrap();
        let mi = multipartite_mutual_information(&ghz, &[vec![0], vec![1], vec![2]]).unwrap();
        assert!((mi - 3.0 * 2.0_f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn cmi_with_empty_cond_reduces_to_mi() {
        let mut rng = rng_for(6, "cmi-empty");
        let rho = random_density(&[2, 2], &mut rng);
        let q = QqcState::new(rho.clone(), vec![], &Tolerances::default()).unwrap();
        let cmi = conditional_mutual_information(&q, &[0], &[1], &[]).unwrap();
        let mi = mutual_information(&rho, &[0]).unwrap();
        assert!((cmi - mi).abs() < 1e-12);
    }

    #[test]
    fn cmi_zero_for_product_conditionals() {
        let mut rng = rng_for(7, "cmi-product");
        // sum_k p_k (a_k ⊗ b_k) ⊗ |k><k|
        let da = 2;
        let db = 2;
        let dk = 3;
        let mut data = CMat::zeros(da * db * dk, da * db * dk);
        let ps = [0.2, 0.5, 0.3];
        for (k, &p) in ps.iter().enumerate() {
            let a = random_density(&[da], &mut rng);
            let b = random_density(&[db], &mut rng);
            let ab = a.tensor(&b);
            for i in 0..da * db {
                for j in 0..da * db {
                    data[(i * dk + k, j * dk + k)] += ab.data()[(i, j)] * p;
                }
            }
        }
        let state = DensityMatrix::new_default(vec![da, db, dk], data).unwrap();
        let q = QqcState::new(state, vec![2], &Tolerances::default()).unwrap();
        let cmi = conditional_mutual_information(&q, &[0], &[1], &[2]).unwrap();
        assert!(cmi < 1e-10);
    }

    #[test]
    fn rejects_nonclassical_conditioning() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix::pure(
            vec![2, 2],
            &[
                C64::new(s, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(s, 0.0),
            ],
        )
        .unwrap();
        assert!(QqcState::new(bell, vec![1], &Tolerances::default()).is_err());
    }

    #[test]
    fn battery_passes_smoke() {
        let checks = identity_battery(1234, 20, 10);
        for c in &checks {
            assert!(c.pass, "{} violated by {}", c.name, c.max_violation);
        }
    }

    #[test]
    fn pinsker_on_chain_states() {
        let mut rng = rng_for(8, "pinsker-chain");
        for _ in 0..10 {
            let x = random_qqc_chain_state(&mut rng);
            let rho = x.state().partial_trace(&[0, 1]).unwrap();
            let mi = mutual_information(&rho, &[0]).unwrap();
            let prod = rho
                .partial_trace(&[0])
                .unwrap()
                .tensor(&rho.partial_trace(&[1]).unwrap());
            let td = trace_distance(rho.data(), prod.data());
            assert!(mi + 1e-10 >= 0.5 * td * td);
        }
    }
}

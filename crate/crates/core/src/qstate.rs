//! Dense multipartite states, measurements and the tensor/partial-trace
//! algebra everything else is built on.
//!
//! States carry an ordered list of subsystem dimensions; matrix indices are
//! row-major over that list (leftmost subsystem most significant). All values
//! are immutable after construction, so they can be shared freely across
//! threads.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};

/// Validation tolerances used by every constructor in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub herm_tol: f64,
    pub psd_tol: f64,
    pub trace_tol: f64,
    pub povm_tol: f64,
    /// Off-diagonal residual below which a register counts as classical.
    pub diag_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm_tol: 1e-9,
            psd_tol: 1e-9,
            trace_tol: 1e-9,
            povm_tol: 1e-9,
            diag_tol: 1e-10,
        }
    }
}

/// Probabilities below this are dropped (with renormalization) when
/// conditioning, so no NaN states are ever produced.
pub const PROB_FLOOR: f64 = 1e-14;

fn check_dims(dims: &[usize], data: &CMat) -> Result<usize> {
    if data.nrows() != data.ncols() {
        return Err(Error::NotSquare {
            rows: data.nrows(),
            cols: data.ncols(),
        });
    }
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidInput(
            "subsystem dimensions must be positive".into(),
        ));
    }
    let total: usize = dims.iter().product();
    if total != data.nrows() {
        return Err(Error::DimensionMismatch {
            expected: total,
            got: data.nrows(),
            context: "product of dims vs matrix side".into(),
        });
    }
    Ok(total)
}

/// Hermitian PSD unit-trace operator with a subsystem-dimension signature.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    data: CMat,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, data: CMat, tol: &Tolerances) -> Result<Self> {
        check_dims(&dims, &data)?;
        let hr = linalg::herm_residual(&data);
        if hr > tol.herm_tol {
            return Err(Error::NotHermitian {
                residual: hr,
                tol: tol.herm_tol,
            });
        }
        let me = linalg::min_eig(&data);
        if me < -tol.psd_tol {
            return Err(Error::NotPsd {
                min_eig: me,
                tol: tol.psd_tol,
            });
        }
        let tr = linalg::trace_re(&data);
        if (tr - 1.0).abs() > tol.trace_tol {
            return Err(Error::BadTrace {
                trace: tr,
                expected: 1.0,
                tol: tol.trace_tol,
            });
        }
        Ok(DensityMatrix { dims, data })
    }

    pub fn new_default(dims: Vec<usize>, data: CMat) -> Result<Self> {
        Self::new(dims, data, &Tolerances::default())
    }

    /// Skips validation; for internal paths where validity holds by
    /// construction (conditioning, mixing, projection outputs).
    pub(crate) fn from_valid(dims: Vec<usize>, data: CMat) -> Self {
        DensityMatrix { dims, data }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        let data = linalg::identity(n).map(|z| z / n as f64);
        DensityMatrix { dims, data }
    }

    pub fn pure(dims: Vec<usize>, vector: &[C64]) -> Result<Self> {
        let n: usize = dims.iter().product();
        if vector.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: vector.len(),
                context: "state vector length".into(),
            });
        }
        let norm: f64 = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        let data = CMat::from_fn(n, n, |i, j| vector[i] * vector[j].conj() / (norm * norm));
        Ok(DensityMatrix { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn total_dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix {
            dims,
            data: linalg::kron(&self.data, &other.data),
        }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (dims, data) = partial_trace_raw(&self.data, &self.dims, keep)?;
        Ok(DensityMatrix { dims, data })
    }

    pub fn permute_systems(&self, perm: &[usize]) -> Result<DensityMatrix> {
        let (dims, data) = permute_raw(&self.data, &self.dims, perm)?;
        Ok(DensityMatrix { dims, data })
    }

    pub fn to_hermitian_op(&self) -> HermitianOp {
        HermitianOp {
            dims: self.dims.clone(),
            data: self.data.clone(),
        }
    }
}

/// Hermitian operator with subsystem signature; not normalized. Used for
/// differences of states and for measurement operators.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp {
    dims: Vec<usize>,
    data: CMat,
}

impl HermitianOp {
    pub fn new(dims: Vec<usize>, data: CMat, tol: &Tolerances) -> Result<Self> {
        check_dims(&dims, &data)?;
        let hr = linalg::herm_residual(&data);
        if hr > tol.herm_tol {
            return Err(Error::NotHermitian {
                residual: hr,
                tol: tol.herm_tol,
            });
        }
        Ok(HermitianOp { dims, data })
    }

    pub fn new_default(dims: Vec<usize>, data: CMat) -> Result<Self> {
        Self::new(dims, data, &Tolerances::default())
    }

    pub(crate) fn from_valid(dims: Vec<usize>, data: CMat) -> Self {
        HermitianOp { dims, data }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn total_dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn tensor(&self, other: &HermitianOp) -> HermitianOp {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        HermitianOp {
            dims,
            data: linalg::kron(&self.data, &other.data),
        }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<HermitianOp> {
        let (dims, data) = partial_trace_raw(&self.data, &self.dims, keep)?;
        Ok(HermitianOp { dims, data })
    }

    pub fn permute_systems(&self, perm: &[usize]) -> Result<HermitianOp> {
        let (dims, data) = permute_raw(&self.data, &self.dims, perm)?;
        Ok(HermitianOp { dims, data })
    }
}

/// Difference a - b as a Hermitian operator (dims must match).
pub fn difference(a: &DensityMatrix, b: &DensityMatrix) -> Result<HermitianOp> {
    if a.dims != b.dims {
        return Err(Error::DimensionMismatch {
            expected: a.total_dim(),
            got: b.total_dim(),
            context: "difference of states with unequal signatures".into(),
        });
    }
    Ok(HermitianOp {
        dims: a.dims.clone(),
        data: &a.data - &b.data,
    })
}

/// ||a - b||_1, the sum of singular values of the difference.
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    linalg::trace_norm_hermitian(&(a - b))
}

/// Positive-operator valued measure on a single system.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    elems: Vec<CMat>,
}

impl Povm {
    pub fn new(dim: usize, elems: Vec<CMat>, tol: &Tolerances) -> Result<Self> {
        if elems.is_empty() {
            return Err(Error::InvalidInput("POVM needs at least one element".into()));
        }
        let mut sum = CMat::zeros(dim, dim);
        for m in &elems {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.nrows(),
                    context: "POVM element side".into(),
                });
            }
            let hr = linalg::herm_residual(m);
            if hr > tol.herm_tol {
                return Err(Error::NotHermitian {
                    residual: hr,
                    tol: tol.herm_tol,
                });
            }
            let me = linalg::min_eig(m);
            if me < -tol.psd_tol {
                return Err(Error::NotPsd {
                    min_eig: me,
                    tol: tol.psd_tol,
                });
            }
            sum += m;
        }
        let residual = linalg::max_abs_entry(&(&sum - linalg::identity(dim)));
        if residual > tol.povm_tol {
            return Err(Error::PovmIncomplete {
                residual,
                tol: tol.povm_tol,
            });
        }
        Ok(Povm { dim, elems })
    }

    pub fn new_default(dim: usize, elems: Vec<CMat>) -> Result<Self> {
        Self::new(dim, elems, &Tolerances::default())
    }

    /// The measurement in the computational basis.
    pub fn computational(dim: usize) -> Povm {
        let elems = (0..dim)
            .map(|k| {
                let mut m = CMat::zeros(dim, dim);
                m[(k, k)] = C64::new(1.0, 0.0);
                m
            })
            .collect();
        Povm { dim, elems }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[CMat] {
        &self.elems
    }
}

/// The quantum-classical map X -> sum_k tr(M_k X) |k><k| induced by a POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct QcChannel {
    povm: Povm,
}

impl QcChannel {
    pub fn new(povm: Povm) -> Self {
        QcChannel { povm }
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn in_dim(&self) -> usize {
        self.povm.dim()
    }

    pub fn out_dim(&self) -> usize {
        self.povm.len()
    }

    /// Applies the channel to the whole operator (single-system input).
    pub fn apply_full(&self, x: &CMat) -> CMat {
        let n = self.out_dim();
        let mut out = CMat::zeros(n, n);
        for (k, m) in self.povm.elems().iter().enumerate() {
            let mut p = C64::new(0.0, 0.0);
            for i in 0..x.nrows() {
                for j in 0..x.ncols() {
                    p += m[(j, i)] * x[(i, j)];
                }
            }
            out[(k, k)] = p;
        }
        out
    }
}

/// Applies a qc channel to one subsystem of a density matrix.
pub fn apply_qc_channel(x: &DensityMatrix, ch: &QcChannel, on: usize) -> Result<DensityMatrix> {
    let (dims, data) = apply_qc_raw(&x.data, &x.dims, ch, on)?;
    Ok(DensityMatrix { dims, data })
}

/// Applies a qc channel to one subsystem of a Hermitian operator.
pub fn apply_qc_channel_op(x: &HermitianOp, ch: &QcChannel, on: usize) -> Result<HermitianOp> {
    let (dims, data) = apply_qc_raw(&x.data, &x.dims, ch, on)?;
    Ok(HermitianOp { dims, data })
}

/// Probability-weighted list of states on common dims.
#[derive(Debug, Clone)]
pub struct Ensemble {
    weights: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, states: Vec<DensityMatrix>, tol: &Tolerances) -> Result<Self> {
        if weights.len() != states.len() {
            return Err(Error::BadDistribution {
                reason: format!("{} weights vs {} states", weights.len(), states.len()),
            });
        }
        if weights.iter().any(|&w| w < -tol.trace_tol) {
            return Err(Error::BadDistribution {
                reason: "negative weight".into(),
            });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol.trace_tol {
            return Err(Error::BadDistribution {
                reason: format!("weights sum to {sum}"),
            });
        }
        if let Some(first) = states.first() {
            for s in &states {
                if s.dims != first.dims {
                    return Err(Error::DimensionMismatch {
                        expected: first.total_dim(),
                        got: s.total_dim(),
                        context: "ensemble states must share dims".into(),
                    });
                }
            }
        }
        Ok(Ensemble { weights, states })
    }

    pub(crate) fn from_valid(weights: Vec<f64>, states: Vec<DensityMatrix>) -> Self {
        Ensemble { weights, states }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// sum_i w_i rho_i.
    pub fn mixture(&self) -> DensityMatrix {
        let dims = self.states[0].dims.clone();
        let n = self.states[0].total_dim();
        let mut data = CMat::zeros(n, n);
        for (w, s) in self.weights.iter().zip(self.states.iter()) {
            data += s.data.map(|z| z * *w);
        }
        DensityMatrix { dims, data }
    }
}

/// Measurement of the listed subsystems with the same POVM on each; returns
/// outcome probabilities and normalized conditional states on the complement.
/// Outcomes with probability below [`PROB_FLOOR`] are dropped and the
/// remaining weights renormalized.
pub fn conditional_states(x: &DensityMatrix, ch: &QcChannel, on: &[usize]) -> Result<Ensemble> {
    let mut on_sorted = on.to_vec();
    on_sorted.sort_unstable();
    on_sorted.dedup();
    if on_sorted.len() != on.len() {
        return Err(Error::InvalidInput("duplicate measured subsystems".into()));
    }
    if on_sorted.is_empty() {
        return Err(Error::InvalidInput("no subsystems to measure".into()));
    }
    for &i in &on_sorted {
        if i >= x.dims.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                count: x.dims.len(),
            });
        }
        if x.dims[i] != ch.in_dim() {
            return Err(Error::DimensionMismatch {
                expected: ch.in_dim(),
                got: x.dims[i],
                context: format!("POVM dim vs subsystem {i}"),
            });
        }
    }
    if on_sorted.len() == x.dims.len() {
        return Err(Error::InvalidInput(
            "cannot condition on every subsystem; leave a remainder".into(),
        ));
    }

    // Measure one subsystem at a time, always taking the smallest remaining
    // index (later indices shift down by one after each reduction). Branches
    // stay unnormalized: the trace of a branch is its joint probability.
    let mut branches: Vec<(Vec<usize>, CMat)> = vec![(x.dims.clone(), x.data.clone())];
    for (step, &orig_idx) in on_sorted.iter().enumerate() {
        let idx = orig_idx - step;
        let mut next = Vec::with_capacity(branches.len() * ch.out_dim());
        for (dims, data) in &branches {
            for m in ch.povm().elems() {
                let (rdims, y) = contract_measurement(data, dims, m, idx);
                if linalg::trace_re(&y) > PROB_FLOOR {
                    next.push((rdims, y));
                }
            }
        }
        branches = next;
    }

    let total: f64 = branches.iter().map(|(_, y)| linalg::trace_re(y)).sum();
    if total <= 0.0 {
        return Err(Error::BadDistribution {
            reason: "all outcome branches fell below the probability floor".into(),
        });
    }
    let mut weights = Vec::with_capacity(branches.len());
    let mut states = Vec::with_capacity(branches.len());
    for (dims, y) in branches {
        let p = linalg::trace_re(&y);
        weights.push(p / total);
        states.push(DensityMatrix {
            dims,
            data: y.map(|z| z / p),
        });
    }
    Ok(Ensemble { weights, states })
}

/// Projector onto the symmetric subspace of (C^d)^{tensor k}, built as V V†
/// from the occupation-number isometry. Rank = binom(d+k-1, k).
pub fn symmetric_subspace_projector(d: usize, k: usize) -> HermitianOp {
    let v = symmetric_subspace_isometry(d, k);
    let data = &v * v.adjoint();
    HermitianOp {
        dims: vec![d; k],
        data,
    }
}

/// Isometry from the symmetric subspace into (C^d)^{tensor k}: columns are
/// normalized sums over the distinct orderings of each occupation multiset.
pub fn symmetric_subspace_isometry(d: usize, k: usize) -> CMat {
    assert!(d >= 1 && k >= 1);
    let n = d.pow(k as u32);
    // Group basis indices of (C^d)^{tensor k} by sorted letter multiset.
    let mut groups: std::collections::BTreeMap<Vec<usize>, Vec<usize>> =
        std::collections::BTreeMap::new();
    for idx in 0..n {
        let mut letters = unrank(idx, &vec![d; k]);
        letters.sort_unstable();
        groups.entry(letters).or_default().push(idx);
    }
    let cols = groups.len();
    let mut v = CMat::zeros(n, cols);
    for (c, (_, members)) in groups.iter().enumerate() {
        let norm = 1.0 / (members.len() as f64).sqrt();
        for &i in members {
            v[(i, c)] = C64::new(norm, 0.0);
        }
    }
    v
}

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

// ---- raw index machinery ---------------------------------------------------

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

pub(crate) fn unrank(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; dims.len()];
    for i in (0..dims.len()).rev() {
        out[i] = idx % dims[i];
        idx /= dims[i];
    }
    out
}

pub(crate) fn rank(multi: &[usize], dims: &[usize]) -> usize {
    let mut idx = 0usize;
    for (m, d) in multi.iter().zip(dims.iter()) {
        idx = idx * d + m;
    }
    idx
}

pub(crate) fn partial_trace_raw(
    data: &CMat,
    dims: &[usize],
    keep: &[usize],
) -> Result<(Vec<usize>, CMat)> {
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() {
        return Err(Error::InvalidInput("duplicate keep indices".into()));
    }
    for &i in &keep_sorted {
        if i >= dims.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                count: dims.len(),
            });
        }
    }
    if keep_sorted.is_empty() {
        return Err(Error::InvalidInput("keep set must be nonempty".into()));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_sorted.contains(i)).collect();
    let keep_dims: Vec<usize> = keep_sorted.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let nk: usize = keep_dims.iter().product();
    let nt: usize = traced_dims.iter().product::<usize>().max(1);
    let st = strides(dims);
    let mut out = CMat::zeros(nk, nk);

    // Precompute the global offsets contributed by kept and traced indices.
    let keep_offsets: Vec<usize> = (0..nk)
        .map(|r| {
            let mi = unrank(r, &keep_dims);
            mi.iter()
                .zip(keep_sorted.iter())
                .map(|(&v, &pos)| v * st[pos])
                .sum()
        })
        .collect();
    let traced_offsets: Vec<usize> = (0..nt)
        .map(|t| {
            if traced.is_empty() {
                0
            } else {
                let mi = unrank(t, &traced_dims);
                mi.iter()
                    .zip(traced.iter())
                    .map(|(&v, &pos)| v * st[pos])
                    .sum()
            }
        })
        .collect();

    for r in 0..nk {
        for c in 0..nk {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..nt {
                acc += data[(keep_offsets[r] + traced_offsets[t], keep_offsets[c] + traced_offsets[t])];
            }
            out[(r, c)] = acc;
        }
    }
    Ok((keep_dims, out))
}

pub(crate) fn permute_raw(
    data: &CMat,
    dims: &[usize],
    perm: &[usize],
) -> Result<(Vec<usize>, CMat)> {
    if perm.len() != dims.len() {
        return Err(Error::BadPermutation {
            reason: format!("length {} vs {} subsystems", perm.len(), dims.len()),
        });
    }
    let mut seen = vec![false; dims.len()];
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(Error::BadPermutation {
                reason: "not a bijection".into(),
            });
        }
        seen[p] = true;
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let n = data.nrows();
    let st_old = strides(dims);
    let st_new = strides(&new_dims);
    // map[global new index] = global old index
    let mut map = vec![0usize; n];
    for (new_idx, item) in map.iter_mut().enumerate() {
        let multi_new = unrank(new_idx, &new_dims);
        let mut old = 0usize;
        for (j, &v) in multi_new.iter().enumerate() {
            old += v * st_old[perm[j]];
        }
        *item = old;
        let _ = st_new;
    }
    let out = CMat::from_fn(n, n, |i, j| data[(map[i], map[j])]);
    Ok((new_dims, out))
}

/// Y = tr_on[(M ⊗ I) X]: contract one subsystem with a measurement operator.
/// Returns the reduced dims (subsystem `on` removed) and the contraction.
pub(crate) fn contract_measurement(
    data: &CMat,
    dims: &[usize],
    m: &CMat,
    on: usize,
) -> (Vec<usize>, CMat) {
    let d = dims[on];
    let rest_dims: Vec<usize> = dims
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != on)
        .map(|(_, &v)| v)
        .collect();
    let nr: usize = rest_dims.iter().product();
    let st = strides(dims);
    let rest_pos: Vec<usize> = (0..dims.len()).filter(|&i| i != on).collect();
    let rest_offsets: Vec<usize> = (0..nr)
        .map(|u| {
            let mi = unrank(u, &rest_dims);
            mi.iter()
                .zip(rest_pos.iter())
                .map(|(&v, &pos)| v * st[pos])
                .sum()
        })
        .collect();
    let s_on = st[on];
    let mut y = CMat::zeros(nr, nr);
    for u in 0..nr {
        for v in 0..nr {
            let mut acc = C64::new(0.0, 0.0);
            for s in 0..d {
                for t in 0..d {
                    let z = m[(s, t)];
                    if z.re != 0.0 || z.im != 0.0 {
                        acc += z * data[(rest_offsets[u] + t * s_on, rest_offsets[v] + s * s_on)];
                    }
                }
            }
            y[(u, v)] = acc;
        }
    }
    (rest_dims, y)
}

pub(crate) fn apply_qc_raw(
    data: &CMat,
    dims: &[usize],
    ch: &QcChannel,
    on: usize,
) -> Result<(Vec<usize>, CMat)> {
    if on >= dims.len() {
        return Err(Error::IndexOutOfRange {
            index: on,
            count: dims.len(),
        });
    }
    if dims[on] != ch.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.in_dim(),
            got: dims[on],
            context: "channel input dim vs subsystem".into(),
        });
    }
    let out_dim = ch.out_dim();
    let mut new_dims = dims.to_vec();
    new_dims[on] = out_dim;
    let n_new: usize = new_dims.iter().product();
    let st_new = strides(&new_dims);
    let mut out = CMat::zeros(n_new, n_new);
    let rest_dims: Vec<usize> = dims
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != on)
        .map(|(_, &v)| v)
        .collect();
    let nr: usize = rest_dims.iter().product();
    let rest_pos_new: Vec<usize> = (0..new_dims.len()).filter(|&i| i != on).collect();
    let rest_offsets_new: Vec<usize> = (0..nr)
        .map(|u| {
            let mi = unrank(u, &rest_dims);
            mi.iter()
                .zip(rest_pos_new.iter())
                .map(|(&v, &pos)| v * st_new[pos])
                .sum()
        })
        .collect();
    for (k, m) in ch.povm().elems().iter().enumerate() {
        let (_, y) = contract_measurement(data, dims, m, on);
        let off_k = k * st_new[on];
        for u in 0..nr {
            for v in 0..nr {
                out[(rest_offsets_new[u] + off_k, rest_offsets_new[v] + off_k)] += y[(u, v)];
            }
        }
    }
    Ok((new_dims, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian_op, random_povm, rng_for};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn qubit0() -> DensityMatrix {
        DensityMatrix::pure(vec![2], &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap()
    }

    fn qubit1() -> DensityMatrix {
        DensityMatrix::pure(vec![2], &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap()
    }

    fn singlet() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(
            vec![2, 2],
            &[
                C64::new(0.0, 0.0),
                C64::new(s, 0.0),
                C64::new(-s, 0.0),
                C64::new(0.0, 0.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn tensor_identity_case() {
        let half = DensityMatrix::maximally_mixed(vec![2]);
        let t = half.tensor(&half);
        assert_eq!(t.dims(), &[2, 2]);
        let expect = linalg::identity(4).map(|z| z / 4.0);
        assert!(linalg::max_abs_entry(&(t.data() - expect)) < 1e-15);
    }

    #[test]
    fn tensor_pure_case() {
        let t = qubit0().tensor(&qubit1());
        let mut expect = CMat::zeros(4, 4);
        expect[(1, 1)] = C64::new(1.0, 0.0);
        assert!(linalg::max_abs_entry(&(t.data() - expect)) < 1e-15);
    }

    #[test]
    fn tensor_trace_is_multiplicative() {
        let mut rng = rng_for(7, "tensor-trace");
        for _ in 0..10 {
            let a = random_hermitian_op(&[2], &mut rng);
            let b = random_hermitian_op(&[3], &mut rng);
            let t = a.tensor(&b);
            let lhs = linalg::trace_re(t.data());
            let rhs = linalg::trace_re(a.data()) * linalg::trace_re(b.data());
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_singlet_is_maximally_mixed() {
        let s = singlet();
        let a = s.partial_trace(&[0]).unwrap();
        let expect = linalg::identity(2).map(|z| z / 2.0);
        assert!(linalg::max_abs_entry(&(a.data() - expect)) < 1e-14);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let mut rng = rng_for(8, "pt-product");
        let a = random_density(&[2], &mut rng);
        let b = random_density(&[3], &mut rng);
        let t = a.tensor(&b);
        let ra = t.partial_trace(&[0]).unwrap();
        let rb = t.partial_trace(&[1]).unwrap();
        assert!(linalg::max_abs_entry(&(ra.data() - a.data())) < 1e-12);
        assert!(linalg::max_abs_entry(&(rb.data() - b.data())) < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace_on_232() {
        let mut rng = rng_for(9, "pt-232");
        let x = random_density(&[2, 3, 2], &mut rng);
        let r = x.partial_trace(&[0, 2]).unwrap();
        assert_eq!(r.dims(), &[2, 2]);
        // elementwise-sum oracle for the trace
        let mut oracle = 0.0;
        for i in 0..12 {
            oracle += x.data()[(i, i)].re;
        }
        assert!((linalg::trace_re(r.data()) - oracle).abs() < 1e-12);
        assert!((linalg::trace_re(r.data()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let s = singlet();
        assert!(matches!(
            s.partial_trace(&[5]),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn permute_identity_and_swap() {
        let mut rng = rng_for(10, "permute");
        let a = random_density(&[2], &mut rng);
        let b = random_density(&[3], &mut rng);
        let t = a.tensor(&b);
        let same = t.permute_systems(&[0, 1]).unwrap();
        assert!(linalg::max_abs_entry(&(same.data() - t.data())) < 1e-15);
        let swapped = t.permute_systems(&[1, 0]).unwrap();
        let expect = b.tensor(&a);
        assert_eq!(swapped.dims(), &[3, 2]);
        assert!(linalg::max_abs_entry(&(swapped.data() - expect.data())) < 1e-14);
    }

    #[test]
    fn permute_roundtrip_three_party() {
        let mut rng = rng_for(11, "permute-rt");
        let x = random_density(&[2, 3, 2], &mut rng);
        let perm = [2usize, 0, 1];
        // inverse permutation: inv[perm[j]] = j
        let mut inv = [0usize; 3];
        for (j, &p) in perm.iter().enumerate() {
            inv[p] = j;
        }
        let once = x.permute_systems(&perm).unwrap();
        let back = once.permute_systems(&inv).unwrap();
        assert!(linalg::max_abs_entry(&(back.data() - x.data())) < 1e-14);
    }

    #[test]
    fn permute_rejects_non_bijection() {
        let s = singlet();
        assert!(matches!(
            s.permute_systems(&[0, 0]),
            Err(Error::BadPermutation { .. })
        ));
    }

    #[test]
    fn qc_channel_on_plus_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure(vec![2], &[C64::new(s, 0.0), C64::new(s, 0.0)]).unwrap();
        let ch = QcChannel::new(Povm::computational(2));
        let out = apply_qc_channel(&plus, &ch, 0).unwrap();
        assert!((out.data()[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((out.data()[(1, 1)].re - 0.5).abs() < 1e-14);
        assert!(out.data()[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn qc_channel_is_local() {
        let mut rng = rng_for(12, "qc-local");
        let a = random_density(&[2], &mut rng);
        let b = random_density(&[3], &mut rng);
        let t = a.tensor(&b);
        let povm = random_povm(2, 3, &mut rng);
        let ch = QcChannel::new(povm);
        let out = apply_qc_channel(&t, &ch, 0).unwrap();
        let direct = {
            let la = ch.apply_full(a.data());
            linalg::kron(&la, b.data())
        };
        assert!(linalg::max_abs_entry(&(out.data() - direct)) < 1e-12);
    }

    #[test]
    fn qc_channel_contracts_trace_norm() {
        let mut rng = rng_for(13, "qc-contract");
        for _ in 0..5 {
            let x = random_hermitian_op(&[2, 2], &mut rng);
            let povm = random_povm(2, 4, &mut rng);
            let ch = QcChannel::new(povm);
            let y = apply_qc_channel_op(&x, &ch, 1).unwrap();
            let nx = linalg::trace_norm_hermitian(x.data());
            let ny = linalg::trace_norm_hermitian(y.data());
            assert!(ny <= nx + 1e-10, "{ny} > {nx}");
        }
    }

    #[test]
    fn conditionals_of_product_keep_factor() {
        let mut rng = rng_for(14, "cond-product");
        let a = random_density(&[2], &mut rng);
        let b = random_density(&[2], &mut rng);
        let t = a.tensor(&b);
        let povm = random_povm(2, 3, &mut rng);
        let ens = conditional_states(&t, &QcChannel::new(povm), &[1]).unwrap();
        for s in ens.states() {
            assert!(linalg::max_abs_entry(&(s.data() - a.data())) < 1e-10);
        }
    }

    #[test]
    fn conditionals_of_singlet_anticorrelate() {
        let ens = conditional_states(&singlet(), &QcChannel::new(Povm::computational(2)), &[1])
            .unwrap();
        assert_eq!(ens.len(), 2);
        assert!((ens.weights()[0] - 0.5).abs() < 1e-12);
        assert!((ens.weights()[1] - 0.5).abs() < 1e-12);
        // measuring B=0 leaves A in |1>, B=1 leaves A in |0>
        assert!((ens.states()[0].data()[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!((ens.states()[1].data()[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditionals_reconstruct_marginal() {
        let mut rng = rng_for(15, "cond-marginal");
        let x = random_density(&[2, 2, 3], &mut rng);
        let povm = random_povm(3, 4, &mut rng);
        let ens = conditional_states(&x, &QcChannel::new(povm), &[2]).unwrap();
        let mixed = ens.mixture();
        let marginal = x.partial_trace(&[0, 1]).unwrap();
        assert!(linalg::max_abs_entry(&(mixed.data() - marginal.data())) < 1e-12);
        let wsum: f64 = ens.weights().iter().sum();
        assert!((wsum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_basics() {
        let a = qubit0();
        assert!(trace_distance(a.data(), a.data()) < 1e-15);
        assert!((trace_distance(qubit0().data(), qubit1().data()) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_matches_singular_value_oracle() {
        let mut rng = rng_for(16, "td-oracle");
        let a = random_density(&[2, 2], &mut rng);
        let b = random_density(&[2, 2], &mut rng);
        let d = trace_distance(a.data(), b.data());
        // oracle: sum of sqrt eigenvalues of X†X
        let x = a.data() - b.data();
        let xtx = x.adjoint() * &x;
        let oracle: f64 = linalg::eigh(&xtx)
            .0
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .sum();
        assert!((d - oracle).abs() < 1e-12);
    }

    #[test]
    fn symmetric_projector_ranks() {
        let p1 = symmetric_subspace_projector(3, 1);
        assert!(linalg::max_abs_entry(&(p1.data() - linalg::identity(3))) < 1e-14);

        for (d, k) in [(2usize, 2usize), (3, 2), (2, 3)] {
            let p = symmetric_subspace_projector(d, k);
            // projector
            let sq = p.data() * p.data();
            assert!(linalg::max_abs_entry(&(&sq - p.data())) < 1e-12);
            // rank from trace
            let rank = linalg::trace_re(p.data()).round() as usize;
            assert_eq!(rank, binom(d + k - 1, k));
            // oracle: brute-force average of permutation operators
            let oracle = permutation_average(d, k);
            assert!(linalg::max_abs_entry(&(p.data() - &oracle)) < 1e-12);
        }
    }

    fn permutation_average(d: usize, k: usize) -> CMat {
        let n = d.pow(k as u32);
        let dims = vec![d; k];
        let mut acc = CMat::zeros(n, n);
        let mut perm: Vec<usize> = (0..k).collect();
        let mut count = 0usize;
        permute_all(&mut perm, 0, &mut |p| {
            for col in 0..n {
                let mi = unrank(col, &dims);
                let permuted: Vec<usize> = (0..k).map(|j| mi[p[j]]).collect();
                let row = rank(&permuted, &dims);
                acc[(row, col)] += C64::new(1.0, 0.0);
            }
            count += 1;
        });
        acc.map(|z| z / count as f64)
    }

    fn permute_all(perm: &mut Vec<usize>, at: usize, f: &mut impl FnMut(&[usize])) {
        if at == perm.len() {
            f(perm);
            return;
        }
        for i in at..perm.len() {
            perm.swap(at, i);
            permute_all(perm, at + 1, f);
            perm.swap(at, i);
        }
    }

    #[test]
    fn constructors_reject_invalid_data() {
        let mut bad_trace = linalg::identity(2);
        bad_trace[(1, 1)] = C64::new(1.5, 0.0);
        assert!(matches!(
            DensityMatrix::new_default(vec![2], bad_trace),
            Err(Error::BadTrace { .. })
        ));

        let mut non_herm = CMat::zeros(2, 2);
        non_herm[(0, 0)] = C64::new(0.5, 0.0);
        non_herm[(1, 1)] = C64::new(0.5, 0.0);
        non_herm[(0, 1)] = C64::new(0.3, 0.0);
        assert!(matches!(
            DensityMatrix::new_default(vec![2], non_herm),
            Err(Error::NotHermitian { .. })
        ));

        let mut neg = CMat::zeros(2, 2);
        neg[(0, 0)] = C64::new(1.5, 0.0);
        neg[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(matches!(
            DensityMatrix::new_default(vec![2], neg),
            Err(Error::NotPsd { .. })
        ));

        let bad_povm = Povm::new_default(2, vec![linalg::identity(2).map(|z| z * 0.4)]);
        assert!(matches!(bad_povm, Err(Error::PovmIncomplete { .. })));
    }
}

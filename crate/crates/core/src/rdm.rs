//! Exact spectrum of the reduced density matrix of an `L`-site block of a
//! Dicke state.
//!
//! The block density matrix is diagonal in the block Dicke basis with
//! eigenvalues
//!
//! ```text
//! λ(L_0, …, L_{m-1}) = C(N, L)⁻¹ Π_a C(N_a, L_a),   L_m = L - Σ_{a<m} L_a,
//! ```
//!
//! a multivariate hypergeometric distribution. The support is the set of
//! integer points with `0 ≤ L_a ≤ N_a` for every `a ≤ m`.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt::fmt_shortest;
use crate::numeric::{log_binomial, CompensatedSum};

/// Default refusal threshold for support enumeration.
pub const DEFAULT_SUPPORT_CAP: u128 = 100_000_000;

/// An `L`-site block of an `N`-site Dicke state with magnon numbers `N_a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSpec {
    n_sites: usize,
    block_len: usize,
    magnons: Vec<usize>,
}

impl BlockSpec {
    pub fn new(n_sites: usize, block_len: usize, magnons: Vec<usize>) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::invalid("N must be positive"));
        }
        if block_len > n_sites {
            return Err(Error::invalid(format!("block length L={block_len} exceeds N={n_sites}")));
        }
        if magnons.len() < 2 {
            return Err(Error::invalid("need at least two magnon numbers (m >= 1)"));
        }
        let total: usize = magnons.iter().sum();
        if total != n_sites {
            return Err(Error::invalid(format!("magnon numbers sum to {total}, expected N={n_sites}")));
        }
        Ok(BlockSpec {
            n_sites,
            block_len,
            magnons,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn magnons(&self) -> &[usize] {
        &self.magnons
    }

    pub fn m(&self) -> usize {
        self.magnons.len() - 1
    }

    /// The remaining `N - L` sites, whose spectrum coincides with this one.
    pub fn complement(&self) -> BlockSpec {
        BlockSpec {
            n_sites: self.n_sites,
            block_len: self.n_sites - self.block_len,
            magnons: self.magnons.clone(),
        }
    }

    /// Admissible range of `L_j` given the prefix sum of `L_0..L_{j-1}`.
    fn range(&self, j: usize, prefix: usize, tail_capacity: usize) -> Option<(usize, usize)> {
        let remaining = self.block_len.checked_sub(prefix)?;
        let lo = remaining.saturating_sub(tail_capacity);
        let hi = self.magnons[j].min(remaining);
        (lo <= hi).then_some((lo, hi))
    }

    /// `tails[j] = Σ_{a>j} N_a`.
    fn tails(&self) -> Vec<usize> {
        let mut tails = vec![0; self.magnons.len()];
        for j in (0..self.magnons.len() - 1).rev() {
            tails[j] = tails[j + 1] + self.magnons[j + 1];
        }
        tails
    }

    /// Number of lattice points in the support.
    pub fn support_size(&self) -> u128 {
        let tails = self.tails();
        fn count(b: &BlockSpec, tails: &[usize], j: usize, prefix: usize) -> u128 {
            let Some((lo, hi)) = b.range(j, prefix, tails[j]) else {
                return 0;
            };
            if j + 1 == b.m() {
                return (hi - lo + 1) as u128;
            }
            (lo..=hi).map(|l| count(b, tails, j + 1, prefix + l)).sum()
        }
        count(self, &tails, 0, 0)
    }

    /// Whether `index` (length `m`) satisfies the support inequalities.
    pub fn contains(&self, index: &[usize]) -> bool {
        if index.len() != self.m() {
            return false;
        }
        let s: usize = index.iter().sum();
        if s > self.block_len {
            return false;
        }
        let last = self.block_len - s;
        index.iter().zip(&self.magnons).all(|(l, n)| l <= n) && last <= self.magnons[self.m()]
    }
}

/// Per-block log-binomial tables, `tables[a][l] = ln C(N_a, l)`.
struct LogWeights {
    tables: Vec<Vec<f64>>,
    log_norm: f64,
}

impl LogWeights {
    fn new(block: &BlockSpec) -> Self {
        let tables = block
            .magnons
            .iter()
            .map(|&na| (0..=na).map(|l| log_binomial(na as u64, l as i64)).collect())
            .collect();
        LogWeights {
            tables,
            log_norm: log_binomial(block.n_sites as u64, block.block_len as i64),
        }
    }

    #[inline]
    fn eval(&self, index: &[u32], last: usize) -> f64 {
        let mut s = -self.log_norm;
        for (a, &l) in index.iter().enumerate() {
            s += self.tables[a][l as usize];
        }
        s += self.tables[index.len()][last];
        s.exp()
    }
}

/// `λ` at a single multi-index; zero outside the support.
pub fn rdm_eigenvalue(block: &BlockSpec, index: &[usize]) -> Result<f64> {
    if index.len() != block.m() {
        return Err(Error::invalid(format!("index must have {} components, got {}", block.m(), index.len())));
    }
    if !block.contains(index) {
        return Ok(0.0);
    }
    let last = block.block_len - index.iter().sum::<usize>();
    let mut s = -log_binomial(block.n_sites as u64, block.block_len as i64);
    for (a, &l) in index.iter().enumerate() {
        s += log_binomial(block.magnons[a] as u64, l as i64);
    }
    s += log_binomial(block.magnons[block.m()] as u64, last as i64);
    Ok(s.exp())
}

/// The enumerated block spectrum in lexicographic index order.
#[derive(Debug, Clone)]
pub struct RdmSpectrum {
    block: BlockSpec,
    /// Flattened indices, `m` entries per support point.
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl RdmSpectrum {
    pub fn block(&self) -> &BlockSpec {
        &self.block
    }

    pub fn m(&self) -> usize {
        self.block.m()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index(&self, i: usize) -> &[u32] {
        let m = self.m();
        &self.indices[i * m..(i + 1) * m]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.indices.chunks_exact(self.m()).zip(self.values.iter().copied())
    }

    /// Eigenvalue at `index`, or zero outside the support.
    pub fn get(&self, index: &[usize]) -> f64 {
        if index.len() != self.m() {
            return 0.0;
        }
        let key: Vec<u32> = index.iter().map(|&l| l as u32).collect();
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.index(mid).cmp(&key[..]) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return self.values[mid],
            }
        }
        0.0
    }

    /// Compensated `Σ λ`.
    pub fn total(&self) -> f64 {
        crate::numeric::par_compensated_sum(&self.values, |x| x)
    }

    /// Spectrum export: header `L1,...,Lm,lambda`, lexicographic rows,
    /// shortest round-trip floats.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.m()).map(|a| format!("L{a}")).chain(["lambda".into()]).collect();
        writeln!(w, "{}", header.join(","))?;
        for (idx, v) in self.iter() {
            for l in idx {
                write!(w, "{l},")?;
            }
            writeln!(w, "{}", fmt_shortest(v))?;
        }
        Ok(())
    }
}

/// Enumerates the support with the default cap.
pub fn rdm_spectrum(block: &BlockSpec) -> Result<RdmSpectrum> {
    rdm_spectrum_capped(block, DEFAULT_SUPPORT_CAP)
}

/// Enumerates the support, refusing when it has more than `cap` points.
///
/// Work is split over disjoint ranges of the first index and reassembled in
/// order, so the output does not depend on the thread count.
pub fn rdm_spectrum_capped(block: &BlockSpec, cap: u128) -> Result<RdmSpectrum> {
    let size = block.support_size();
    if size > cap {
        return Err(Error::ResourceCap {
            what: "RDM support",
            size,
            cap,
            hint: "",
        });
    }
    let m = block.m();
    let weights = LogWeights::new(block);
    let tails = block.tails();
    let (lo, hi) = block.range(0, 0, tails[0]).expect("a valid block has nonempty support");

    let firsts: Vec<usize> = (lo..=hi).collect();
    let chunk = (firsts.len() / 256).max(1);
    let parts: Vec<(Vec<u32>, Vec<f64>)> = firsts
        .par_chunks(chunk)
        .map(|ls| {
            let mut idx = Vec::new();
            let mut vals = Vec::new();
            let mut cur = vec![0u32; m];
            for &l0 in ls {
                cur[0] = l0 as u32;
                fill(block, &weights, &tails, 1, l0, &mut cur, &mut idx, &mut vals);
            }
            (idx, vals)
        })
        .collect();

    let mut indices = Vec::with_capacity(size as usize * m);
    let mut values = Vec::with_capacity(size as usize);
    for (i, v) in parts {
        indices.extend(i);
        values.extend(v);
    }
    Ok(RdmSpectrum {
        block: block.clone(),
        indices,
        values,
    })
}

#[allow(clippy::too_many_arguments)]
fn fill(
    block: &BlockSpec,
    weights: &LogWeights,
    tails: &[usize],
    j: usize,
    prefix: usize,
    cur: &mut [u32],
    idx: &mut Vec<u32>,
    vals: &mut Vec<f64>,
) {
    let m = cur.len();
    if j == m {
        idx.extend_from_slice(cur);
        vals.push(weights.eval(cur, block.block_len - prefix));
        return;
    }
    let Some((lo, hi)) = block.range(j, prefix, tails[j]) else {
        return;
    };
    for l in lo..=hi {
        cur[j] = l as u32;
        fill(block, weights, tails, j + 1, prefix + l, cur, idx, vals);
    }
}

/// Schmidt coefficients `b = √λ` of the block/rest bipartition, in the same
/// order as the spectrum.
pub fn schmidt_coefficients(block: &BlockSpec) -> Result<Vec<(Vec<u32>, f64)>> {
    let spec = rdm_spectrum(block)?;
    Ok(spec.iter().map(|(i, v)| (i.to_vec(), v.sqrt())).collect())
}

/// Means `⟨L_i⟩` and covariances `⟨x_i x_j⟩`, `x_i = L_i - ⟨L_i⟩`, for `i, j < m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub means: Vec<f64>,
    pub covariance: DMatrix<f64>,
}

impl Moments {
    /// Largest entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &Moments) -> f64 {
        let dm = self
            .means
            .iter()
            .zip(&other.means)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let dc = (&self.covariance - &other.covariance).amax();
        dm.max(dc)
    }
}

/// Closed-form multivariate hypergeometric moments.
pub fn moments_closed_form(block: &BlockSpec) -> Result<Moments> {
    let n = block.n_sites;
    if n < 2 {
        return Err(Error::invalid("closed-form moments need N >= 2"));
    }
    let m = block.m();
    let (nf, lf) = (n as f64, block.block_len as f64);
    let dens: Vec<f64> = block.magnons[..m].iter().map(|&na| na as f64 / nf).collect();
    let scale = lf * (nf - lf) / (nf - 1.0);
    let means = dens.iter().map(|d| lf * d).collect();
    let covariance = DMatrix::from_fn(m, m, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        scale * dens[i] * (delta - dens[j])
    });
    Ok(Moments { means, covariance })
}

/// Moments by direct weighted sums over an enumerated spectrum.
pub fn moments_brute_force(spec: &RdmSpectrum) -> Moments {
    let m = spec.m();
    let mut means = vec![CompensatedSum::new(); m];
    for (idx, v) in spec.iter() {
        for (acc, &l) in means.iter_mut().zip(idx) {
            acc.add(v * l as f64);
        }
    }
    let means: Vec<f64> = means.iter().map(|s| s.value()).collect();
    let mut cov = vec![CompensatedSum::new(); m * m];
    for (idx, v) in spec.iter() {
        for i in 0..m {
            let xi = idx[i] as f64 - means[i];
            for j in i..m {
                cov[i * m + j].add(v * xi * (idx[j] as f64 - means[j]));
            }
        }
    }
    let covariance = DMatrix::from_fn(m, m, |i, j| {
        let (a, b) = (i.min(j), i.max(j));
        cov[a * m + b].value()
    });
    Moments { means, covariance }
}

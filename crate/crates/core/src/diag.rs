//! Exact diagonalization of small gLMG chains.
//!
//! States of `N` sites with `m + 1` levels are indexed site-major: site 0 is
//! the most significant base-`(m+1)` digit. Level `m` is the reference level,
//! so `J^a` counts `+1` for level `a` and `-1` for level `m` on each site.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{densities_from_field, finite_magnon_numbers, locate_field, CouplingMatrix, FieldLocation, ModelSpec};
use crate::numeric::log_binomial;
use crate::phase::project_to_simplex;

/// Largest Hilbert-space dimension for dense diagonalization.
pub const DENSE_DIM_CAP: usize = 4096;

/// Largest single-sector dimension for [`sector_spectrum`].
pub const SECTOR_DIM_CAP: usize = 20_000;

/// Energies closer than this to the ground energy count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Minimum overlap with the predicted Dicke state for a positive verdict.
pub const OVERLAP_TOL: f64 = 1e-9;

fn dense_dimension(m: usize, n_sites: usize) -> Result<usize> {
    let base = (m + 1) as u128;
    let dim = base.checked_pow(n_sites as u32).unwrap_or(u128::MAX);
    if dim > DENSE_DIM_CAP as u128 {
        return Err(Error::ResourceCap {
            what: "dense Hilbert-space dimension",
            size: dim,
            cap: DENSE_DIM_CAP as u128,
            hint: "; use the sector method instead",
        });
    }
    Ok(dim as usize)
}

fn digits(mut index: usize, base: usize, n_sites: usize) -> Vec<usize> {
    let mut out = vec![0; n_sites];
    for d in out.iter_mut().rev() {
        *d = index % base;
        index /= base;
    }
    out
}

fn swap_digits(index: usize, base: usize, n_sites: usize, i: usize, j: usize) -> usize {
    let pi = base.pow((n_sites - 1 - i) as u32);
    let pj = base.pow((n_sites - 1 - j) as u32);
    let di = (index / pi) % base;
    let dj = (index / pj) % base;
    if di == dj {
        return index;
    }
    index + dj * pi + di * pj - di * pi - dj * pj
}

fn level_counts(index: usize, base: usize, n_sites: usize) -> Vec<usize> {
    let mut counts = vec![0; base];
    for d in digits(index, base, n_sites) {
        counts[d] += 1;
    }
    counts
}

/// Eigenvalues of `J^a` on the product basis (the operator is diagonal).
pub fn cartan_diagonal(m: usize, n_sites: usize, a: usize) -> Result<Vec<f64>> {
    if a >= m {
        return Err(Error::invalid(format!("Cartan index {a} out of range for m={m}")));
    }
    let dim = dense_dimension(m, n_sites)?;
    Ok((0..dim)
        .map(|x| {
            let c = level_counts(x, m + 1, n_sites);
            c[a] as f64 - c[m] as f64
        })
        .collect())
}

/// `Σ_a c_a (N_a - N_m - N h_a)²` for level occupations `counts`.
pub fn field_energy(spec: &ModelSpec, counts: &[usize]) -> f64 {
    let n = counts.iter().sum::<usize>() as f64;
    let last = counts[spec.m] as f64;
    spec.cartan_couplings
        .iter()
        .zip(&spec.field)
        .enumerate()
        .map(|(a, (c, h))| {
            let j = counts[a] as f64 - last - n * h;
            c * j * j
        })
        .sum()
}

fn check_sites(spec: &ModelSpec, n_sites: usize) -> Result<CouplingMatrix> {
    spec.validate()?;
    if n_sites < 2 {
        return Err(Error::invalid("need at least two sites"));
    }
    spec.couplings(n_sites)
}

/// Dense Hamiltonian `Σ_{i<j} h_ij (1 - S_ij) + Σ_a c_a (J^a - N h_a)²`.
pub fn build_hamiltonian(spec: &ModelSpec, n_sites: usize) -> Result<DMatrix<f64>> {
    let couplings = check_sites(spec, n_sites)?;
    let dim = dense_dimension(spec.m, n_sites)?;
    let base = spec.m + 1;
    let pairs = couplings.pairs();
    let mut h = DMatrix::zeros(dim, dim);
    for x in 0..dim {
        h[(x, x)] += field_energy(spec, &level_counts(x, base, n_sites));
        for &(i, j, hij) in &pairs {
            h[(x, x)] += hij;
            let y = swap_digits(x, base, n_sites, i, j);
            h[(y, x)] -= hij;
        }
    }
    Ok(h)
}

/// Normalized Dicke state with occupations `magnons` in the product basis.
pub fn dicke_vector(m: usize, magnons: &[usize]) -> Result<DVector<f64>> {
    if magnons.len() != m + 1 {
        return Err(Error::invalid(format!("need {} occupation numbers", m + 1)));
    }
    let n_sites: usize = magnons.iter().sum();
    let dim = dense_dimension(m, n_sites)?;
    let states = sector_states(magnons);
    let amp = 1.0 / (states.len() as f64).sqrt();
    let mut v = DVector::zeros(dim);
    for s in states {
        v[s] = amp;
    }
    Ok(v)
}

/// Product-basis indices with the given occupations, in increasing order.
fn sector_states(magnons: &[usize]) -> Vec<usize> {
    fn recurse(remaining: &mut [usize], base: usize, prefix: usize, out: &mut Vec<usize>) {
        if remaining.iter().all(|&r| r == 0) {
            out.push(prefix);
            return;
        }
        for d in 0..remaining.len() {
            if remaining[d] > 0 {
                remaining[d] -= 1;
                recurse(remaining, base, prefix * base + d, out);
                remaining[d] += 1;
            }
        }
    }
    let mut out = Vec::new();
    let mut remaining = magnons.to_vec();
    recurse(&mut remaining, magnons.len(), 0, &mut out);
    out
}

fn multinomial(magnons: &[usize]) -> u128 {
    let n: usize = magnons.iter().sum();
    let mut rem = n;
    let mut log = 0.0;
    for &k in magnons {
        log += log_binomial(rem as u64, k as i64);
        rem -= k;
    }
    log.exp().round() as u128
}

/// Compositions of `n` into `parts` nonnegative parts, lexicographic.
fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out.reverse();
    out
}

/// Sorted energies of one magnon-number sector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorEnergies {
    pub magnons: Vec<usize>,
    pub energies: Vec<f64>,
}

/// Spectrum organized by magnon-number sectors, in lexicographic sector order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorSpectrum {
    pub sectors: Vec<SectorEnergies>,
    pub ground_energy: f64,
    pub ground_degeneracy: usize,
    pub ground_sector: Vec<usize>,
}

impl SectorSpectrum {
    pub fn get(&self, magnons: &[usize]) -> Option<&[f64]> {
        self.sectors
            .binary_search_by(|s| s.magnons.as_slice().cmp(magnons))
            .ok()
            .map(|i| self.sectors[i].energies.as_slice())
    }

    /// All energies, sorted.
    pub fn all_energies(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.sectors.iter().flat_map(|s| s.energies.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all
    }
}

fn sorted_eigenvalues(matrix: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(matrix).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Restriction of `Σ h_ij (1 - S_ij)` to one sector.
fn sector_exchange_matrix(pairs: &[(usize, usize, f64)], magnons: &[usize]) -> DMatrix<f64> {
    let base = magnons.len();
    let n_sites: usize = magnons.iter().sum();
    let states = sector_states(magnons);
    let dim = states.len();
    let mut h = DMatrix::zeros(dim, dim);
    for (col, &x) in states.iter().enumerate() {
        for &(i, j, hij) in pairs {
            h[(col, col)] += hij;
            let y = swap_digits(x, base, n_sites, i, j);
            let row = states.binary_search(&y).expect("swaps preserve the sector");
            h[(row, col)] -= hij;
        }
    }
    h
}

/// Diagonalizes the exchange part on every magnon-number sector and adds the
/// sector's constant field energy.
pub fn sector_spectrum(spec: &ModelSpec, n_sites: usize) -> Result<SectorSpectrum> {
    let couplings = check_sites(spec, n_sites)?;
    let sectors = compositions(n_sites, spec.m + 1);
    for s in &sectors {
        let dim = multinomial(s);
        if dim > SECTOR_DIM_CAP as u128 {
            return Err(Error::ResourceCap {
                what: "sector dimension",
                size: dim,
                cap: SECTOR_DIM_CAP as u128,
                hint: "",
            });
        }
    }
    let pairs = couplings.pairs();
    let sectors: Vec<SectorEnergies> = sectors
        .into_par_iter()
        .map(|magnons| {
            let shift = field_energy(spec, &magnons);
            let energies = sorted_eigenvalues(sector_exchange_matrix(&pairs, &magnons))
                .into_iter()
                .map(|e| e + shift)
                .collect();
            SectorEnergies { magnons, energies }
        })
        .collect();

    let (mut ground_energy, mut ground_sector) = (f64::INFINITY, Vec::new());
    for s in &sectors {
        if s.energies[0] < ground_energy {
            ground_energy = s.energies[0];
            ground_sector = s.magnons.clone();
        }
    }
    let ground_degeneracy = sectors
        .iter()
        .flat_map(|s| &s.energies)
        .filter(|&&e| e - ground_energy < DEGENERACY_TOL)
        .count();
    Ok(SectorSpectrum {
        sectors,
        ground_energy,
        ground_degeneracy,
        ground_sector,
    })
}

/// Comparison of the exact ground state with the predicted Dicke state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundStateReport {
    pub is_dicke: bool,
    /// Norm of the projection of the Dicke state onto the ground space.
    pub overlap: f64,
    /// `E_1 - E_0`, zero when the ground state is degenerate.
    pub gap: f64,
    pub predicted_magnons: Vec<usize>,
    /// Whether rounding the densities to occupations needed a tie-break.
    pub tie_broken: bool,
    pub ground_energy: f64,
    pub degeneracy: usize,
}

/// Occupation numbers of the Dicke state predicted for `N` sites.
pub fn predicted_magnons(spec: &ModelSpec, n_sites: usize) -> Result<(Vec<usize>, bool)> {
    let densities = match locate_field(spec.m, &spec.field)? {
        FieldLocation::Exterior => project_to_simplex(spec.m, &spec.cartan_couplings, &spec.field)?.densities,
        _ => densities_from_field(spec.m, &spec.field)?,
    };
    let numbers = finite_magnon_numbers(&densities, n_sites)?;
    Ok((numbers.counts, numbers.tie_broken))
}

/// Dense diagonalization of the full Hamiltonian and comparison of its ground
/// space with the predicted Dicke state. A degenerate ground state gives
/// `is_dicke = false` rather than an error.
pub fn ground_state_verify(spec: &ModelSpec, n_sites: usize) -> Result<GroundStateReport> {
    let h = build_hamiltonian(spec, n_sites)?;
    let (magnons, tie_broken) = predicted_magnons(spec, n_sites)?;
    let dicke = dicke_vector(spec.m, &magnons)?;

    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let e0 = eig.eigenvalues[order[0]];
    let ground: Vec<usize> = order
        .iter()
        .copied()
        .take_while(|&i| eig.eigenvalues[i] - e0 < DEGENERACY_TOL)
        .collect();
    let weight: f64 = ground
        .iter()
        .map(|&i| eig.eigenvectors.column(i).dot(&dicke).powi(2))
        .sum();
    let overlap = weight.sqrt().min(1.0);
    let gap = order.get(1).map_or(0.0, |&i| (eig.eigenvalues[i] - e0).max(0.0));
    let degeneracy = ground.len();
    Ok(GroundStateReport {
        is_dicke: degeneracy == 1 && overlap >= 1.0 - OVERLAP_TOL,
        overlap,
        gap: if degeneracy > 1 { 0.0 } else { gap },
        predicted_magnons: magnons,
        tie_broken,
        ground_energy: e0,
        degeneracy,
    })
}

/// A half-integer, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i64);

impl HalfInt {
    pub fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

/// `E(S, M) = -(2/N)(S(S+1) - M² - N/2) - 2hM` for the isotropic su(2) model.
pub fn lmg_su2_energy(n_sites: usize, h: f64, s: HalfInt, m: HalfInt) -> Result<f64> {
    let n = n_sites as i64;
    if n_sites == 0 {
        return Err(Error::invalid("N must be positive"));
    }
    if s.0 < 0 || s.0 > n || (n - s.0) % 2 != 0 {
        return Err(Error::invalid(format!("S = {s} not allowed for N = {n_sites}")));
    }
    if m.0.abs() > s.0 || (s.0 - m.0) % 2 != 0 {
        return Err(Error::invalid(format!("M = {m} not allowed for S = {s}")));
    }
    let (sv, mv, nf) = (s.value(), m.value(), n_sites as f64);
    Ok(-(2.0 / nf) * (sv * (sv + 1.0) - mv * mv - nf / 2.0) - 2.0 * h * mv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Su2Level {
    pub s: HalfInt,
    pub m: HalfInt,
    pub energy: f64,
    /// Number of multiplets with total spin `S`.
    pub degeneracy: u64,
}

/// Every `(S, M)` level with its multiplicity `C(N, N/2+S) - C(N, N/2+S+1)`.
pub fn lmg_su2_spectrum(n_sites: usize, h: f64) -> Result<Vec<Su2Level>> {
    let n = n_sites as i64;
    let binom = |k: i64| -> u64 {
        if k < 0 || k > n {
            0
        } else {
            log_binomial(n as u64, k).exp().round() as u64
        }
    };
    let mut out = Vec::new();
    let mut s2 = n % 2;
    while s2 <= n {
        let up = (n + s2) / 2;
        let degeneracy = binom(up) - binom(up + 1);
        let mut m2 = -s2;
        while m2 <= s2 {
            let (s, m) = (HalfInt(s2), HalfInt(m2));
            out.push(Su2Level {
                s,
                m,
                energy: lmg_su2_energy(n_sites, h, s, m)?,
                degeneracy,
            });
            m2 += 2;
        }
        s2 += 2;
    }
    Ok(out)
}

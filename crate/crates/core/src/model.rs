//! Model definition, su(m+1) weight geometry and the field → density map.
//!
//! In the thermodynamic limit the magnon densities of the ground state solve
//! `n_a - n_m = h_a` for `a < m` together with `Σ n_a = 1`, which has the
//! closed-form solution implemented by [`densities_from_field`]. The fields for
//! which every density lies in `[0, 1]` form the simplex spanned by the
//! weights of the fundamental representation ([`weight_vectors`]).

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Densities within this distance of zero put the field on a face of the simplex.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Tolerance on `Σ n_a = 1`.
pub const SUM_TOL: f64 = 1e-12;

/// Two-body couplings `h_ij` of the permutation term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", content = "params", rename_all = "snake_case")]
pub enum CouplingScheme {
    /// `h_ij = value` for every pair.
    Constant { value: f64 },
    /// `h_{i,i+1} = values[i]`. With `N - 1` values the chain is open; with `N`
    /// values the last one couples sites `N-1` and `0`.
    NearestNeighbor { values: Vec<f64> },
    /// `h_ij = (π/N)² / sin²(π(i-j)/N)`.
    HaldaneShastry,
    /// Full symmetric `N × N` matrix; only the upper triangle is read.
    Explicit { matrix: Vec<Vec<f64>> },
}

/// Symmetric pair-coupling matrix for `n` sites, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    values: Vec<f64>,
}

impl CouplingMatrix {
    pub fn n_sites(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Nonzero pairs `(i, j, h_ij)` with `i < j`.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let h = self.get(i, j);
                if h != 0.0 {
                    out.push((i, j, h));
                }
            }
        }
        out
    }

    /// Whether the graph of positive couplings connects all sites, i.e. the
    /// corresponding transpositions generate the full symmetric group.
    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..self.n {
                if !seen[j] && self.get(i, j) > 0.0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

impl CouplingScheme {
    /// Materializes the couplings for `n` sites and checks nonnegativity and
    /// connectivity.
    pub fn matrix(&self, n: usize) -> Result<CouplingMatrix> {
        if n == 0 {
            return Err(Error::invalid("number of sites must be positive"));
        }
        let mut values = vec![0.0; n * n];
        let mut set = |i: usize, j: usize, h: f64| {
            values[i * n + j] = h;
            values[j * n + i] = h;
        };
        match self {
            CouplingScheme::Constant { value } => {
                for i in 0..n {
                    for j in i + 1..n {
                        set(i, j, *value);
                    }
                }
            }
            CouplingScheme::NearestNeighbor { values: nn } => {
                if n >= 2 && nn.len() != n - 1 && nn.len() != n {
                    return Err(Error::invalid(format!(
                        "nearest_neighbor needs {} (open) or {} (periodic) values for N={n}, got {}",
                        n - 1,
                        n,
                        nn.len()
                    )));
                }
                for (i, &h) in nn.iter().enumerate() {
                    let j = (i + 1) % n;
                    if i != j {
                        let (a, b) = (i.min(j), i.max(j));
                        set(a, b, h);
                    }
                }
            }
            CouplingScheme::HaldaneShastry => {
                let nf = n as f64;
                for i in 0..n {
                    for j in i + 1..n {
                        let s = (PI * (j - i) as f64 / nf).sin();
                        set(i, j, PI * PI / (nf * nf) / (s * s));
                    }
                }
            }
            CouplingScheme::Explicit { matrix } => {
                if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
                    return Err(Error::invalid(format!("explicit coupling matrix must be {n}×{n}")));
                }
                for i in 0..n {
                    for j in i + 1..n {
                        if (matrix[i][j] - matrix[j][i]).abs() > 1e-12 * matrix[i][j].abs().max(1.0) {
                            return Err(Error::invalid(format!("coupling matrix not symmetric at ({i},{j})")));
                        }
                        set(i, j, matrix[i][j]);
                    }
                }
            }
        }
        if let Some(bad) = values.iter().find(|h| !h.is_finite() || **h < 0.0) {
            return Err(Error::invalid(format!("couplings must be finite and nonnegative, found {bad}")));
        }
        let m = CouplingMatrix { n, values };
        if !m.is_connected() {
            return Err(Error::invalid(
                "positive couplings do not connect all sites; the ground state need not be symmetric",
            ));
        }
        Ok(m)
    }
}

/// Full gLMG model: `H = Σ_{i<j} h_ij (1 - S_ij) + Σ_a c_a (J^a - N h_a)²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Internal dimension is `m + 1`.
    pub m: usize,
    /// Cartan couplings `c_a > 0`, one per `a < m`.
    #[serde(rename = "c")]
    pub cartan_couplings: Vec<f64>,
    /// Magnetic field `h_a`, one per `a < m`.
    #[serde(rename = "h")]
    pub field: Vec<f64>,
    pub coupling: CouplingScheme,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
}

impl ModelSpec {
    pub fn new(m: usize, cartan_couplings: Vec<f64>, field: Vec<f64>, coupling: CouplingScheme) -> Result<Self> {
        let spec = ModelSpec {
            m,
            cartan_couplings,
            field,
            coupling,
            n_sites: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_sites(mut self, n: usize) -> Result<Self> {
        self.n_sites = Some(n);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("m must be at least 1"));
        }
        if self.cartan_couplings.len() != self.m {
            return Err(Error::invalid(format!(
                "expected {} Cartan couplings, got {}",
                self.m,
                self.cartan_couplings.len()
            )));
        }
        if self.field.len() != self.m {
            return Err(Error::invalid(format!("expected {} field components, got {}", self.m, self.field.len())));
        }
        if self.cartan_couplings.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(Error::invalid("Cartan couplings must be positive and finite"));
        }
        if self.field.iter().any(|h| !h.is_finite()) {
            return Err(Error::invalid("field components must be finite"));
        }
        match (self.n_sites, &self.coupling) {
            (Some(n), scheme) => {
                scheme.matrix(n)?;
            }
            (None, CouplingScheme::Constant { value }) if !(*value > 0.0) => {
                return Err(Error::invalid("constant coupling must be positive"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Coupling matrix for `n` sites; `n` must agree with `N` when that is set.
    pub fn couplings(&self, n: usize) -> Result<CouplingMatrix> {
        if let Some(fixed) = self.n_sites {
            if fixed != n {
                return Err(Error::invalid(format!("model is defined for N={fixed}, requested N={n}")));
            }
        }
        self.coupling.matrix(n)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Magnon densities `n_0, …, n_m`, each in `[0, 1]` and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagnonDensities(Vec<f64>);

impl MagnonDensities {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid("need at least two magnon densities"));
        }
        if values.iter().any(|&v| !(-SUM_TOL..=1.0 + SUM_TOL).contains(&v)) {
            return Err(Error::invalid(format!("densities must lie in [0,1]: {values:?}")));
        }
        let s: f64 = values.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!("densities sum to {s}, not 1")));
        }
        Ok(MagnonDensities(values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect()))
    }

    /// `m`, one less than the number of components.
    pub fn m(&self) -> usize {
        self.0.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// The point `x(n) = Σ_a n_a μ_a` of the weight simplex, i.e.
    /// `x_a = n_a - n_m`.
    pub fn field(&self) -> Vec<f64> {
        let last = self.0[self.m()];
        self.0[..self.m()].iter().map(|n| n - last).collect()
    }

    /// Indices of the densities within `tol` of zero.
    pub fn vanishing(&self, tol: f64) -> BTreeSet<usize> {
        self.0.iter().enumerate().filter(|(_, &v)| v <= tol).map(|(a, _)| a).collect()
    }

    /// The strictly positive densities, in order.
    pub fn nonvanishing(&self, tol: f64) -> Vec<f64> {
        self.0.iter().copied().filter(|&v| v > tol).collect()
    }
}

/// Weights `μ_a` of the fundamental representation of su(m+1) in the basis
/// `J^a = E^{aa} - E^{mm}` of the Cartan subalgebra.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    vectors: Vec<Vec<f64>>,
}

impl WeightSet {
    pub fn m(&self) -> usize {
        self.vectors.len() - 1
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn get(&self, a: usize) -> &[f64] {
        &self.vectors[a]
    }
}

/// `μ_a = e_a` for `a < m`, `μ_m = -Σ e_a`.
pub fn weight_vectors(m: usize) -> Result<WeightSet> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let mut vectors: Vec<Vec<f64>> = (0..m)
        .map(|a| {
            let mut e = vec![0.0; m];
            e[a] = 1.0;
            e
        })
        .collect();
    vectors.push(vec![-1.0; m]);
    Ok(WeightSet { vectors })
}

/// Where a field sits relative to the weight simplex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldLocation {
    Interior,
    /// On the boundary; `face` holds the indices of the vanishing densities.
    Boundary { face: BTreeSet<usize> },
    Exterior,
}

/// Barycentric coordinates of `h` with respect to the weights. No range checks.
fn raw_densities(m: usize, h: &[f64]) -> Vec<f64> {
    let total: f64 = h.iter().sum();
    let last = (1.0 - total) / (1 + m) as f64;
    let mut n: Vec<f64> = h.iter().map(|ha| ha + last).collect();
    n.push(last);
    n
}

fn check_field(m: usize, h: &[f64]) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    if h.len() != m {
        return Err(Error::invalid(format!("expected {m} field components, got {}", h.len())));
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("field must be finite"));
    }
    Ok(())
}

pub fn locate_field(m: usize, h: &[f64]) -> Result<FieldLocation> {
    check_field(m, h)?;
    let n = raw_densities(m, h);
    if n.iter().any(|&v| v < -BOUNDARY_TOL || v > 1.0 + BOUNDARY_TOL) {
        return Ok(FieldLocation::Exterior);
    }
    let face: BTreeSet<usize> = n
        .iter()
        .enumerate()
        .filter(|(_, &v)| v.abs() <= BOUNDARY_TOL)
        .map(|(a, _)| a)
        .collect();
    if face.is_empty() {
        Ok(FieldLocation::Interior)
    } else {
        Ok(FieldLocation::Boundary { face })
    }
}

/// `n_a = h_a + (1-h)/(1+m)` for `a < m` and `n_m = (1-h)/(1+m)`, `h = Σ h_a`.
///
/// Fields outside the closed simplex are rejected; use
/// [`crate::phase::project_to_simplex`] for those.
pub fn densities_from_field(m: usize, h: &[f64]) -> Result<MagnonDensities> {
    if locate_field(m, h)? == FieldLocation::Exterior {
        return Err(Error::invalid(format!(
            "field {h:?} lies outside the weight simplex; project it with the phase solver"
        )));
    }
    let n = raw_densities(m, h);
    Ok(MagnonDensities(n.into_iter().map(|v| v.clamp(0.0, 1.0)).collect()))
}

/// Integer magnon numbers for a finite chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MagnonNumbers {
    pub counts: Vec<usize>,
    /// The rounding had to choose between equal remainders; the lowest index won.
    pub tie_broken: bool,
}

/// Largest-remainder rounding of `n_a N` to integers summing to `N`, ties
/// going to the lowest index.
pub fn finite_magnon_numbers(n: &MagnonDensities, total: usize) -> Result<MagnonNumbers> {
    if total == 0 {
        return Err(Error::invalid("N must be positive"));
    }
    let nf = total as f64;
    let mut counts = Vec::with_capacity(n.0.len());
    let mut remainders = Vec::with_capacity(n.0.len());
    for &v in &n.0 {
        let mut x = v * nf;
        // Products such as 0.4 * 10 may land a hair below the integer.
        if (x - x.round()).abs() < 1e-9 {
            x = x.round();
        }
        let fl = x.floor();
        counts.push(fl as usize);
        remainders.push(x - fl);
    }
    let assigned: usize = counts.iter().sum();
    let deficit = total.saturating_sub(assigned);
    let mut order: Vec<usize> = (0..counts.len()).collect();
    // Stable sort keeps lower indices first among equal remainders.
    order.sort_by(|&a, &b| remainders[b].total_cmp(&remainders[a]));
    for &a in order.iter().take(deficit) {
        counts[a] += 1;
    }
    let tie_broken = deficit > 0
        && deficit < order.len()
        && (remainders[order[deficit - 1]] - remainders[order[deficit]]).abs() < 1e-12;
    Ok(MagnonNumbers { counts, tie_broken })
}

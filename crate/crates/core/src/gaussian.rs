//! Gaussian approximations of the block spectrum.
//!
//! For large blocks the multivariate hypergeometric spectrum is approximated by
//! a normal density in `(L_0, …, L_{m-1})` with means `L n_i` and covariance
//! `L(1-α) n_i (δ_ij - n_j)`. Its coefficient (precision) matrix has the closed
//! form `a_ij = [L(1-α)]⁻¹ (δ_ij / n_i + 1 / n_m)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::MagnonDensities;
use crate::numeric::{log_binomial, CompensatedSum};

/// Tolerance for the agreement of the Cholesky inverse with the closed-form
/// covariance, relative to each entry's magnitude (at least 1).
pub const INVERSE_TOL: f64 = 1e-10;

/// Multivariate normal approximation of the block spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    /// `L n_i` for `i < m`.
    pub means: Vec<f64>,
    /// `a_ij`.
    pub coefficient_matrix: DMatrix<f64>,
    /// `(A⁻¹)_ij`, obtained by Cholesky inversion of the coefficient matrix.
    pub covariance: DMatrix<f64>,
    /// `[2π L(1-α)]^{-m/2} Π_a n_a^{-1/2}`, the peak height.
    pub normalizer: f64,
    densities: Vec<f64>,
    effective_len: f64,
}

impl GaussianModel {
    pub fn m(&self) -> usize {
        self.means.len()
    }

    /// `E(x) = Σ x_b² / n_b + (Σ x_b)² / n_m` with `x = point - means`.
    pub fn quadratic_form(&self, point: &[f64]) -> f64 {
        let m = self.m();
        let mut e = 0.0;
        let mut total = 0.0;
        for b in 0..m {
            let x = point[b] - self.means[b];
            e += x * x / self.densities[b];
            total += x;
        }
        e + total * total / self.densities[m]
    }

    /// Approximate eigenvalue at a (possibly non-integer) point.
    pub fn density_at(&self, point: &[f64]) -> f64 {
        self.normalizer * (-self.quadratic_form(point) / (2.0 * self.effective_len)).exp()
    }

    /// `√det A / (2π)^{m/2}` from the Cholesky factor; equals `normalizer`.
    pub fn normalizer_from_determinant(&self) -> f64 {
        let chol = self
            .coefficient_matrix
            .clone()
            .cholesky()
            .expect("coefficient matrix is positive definite");
        let sqrt_det: f64 = chol.l().diagonal().iter().product();
        sqrt_det / (2.0 * PI).powf(0.5 * self.m() as f64)
    }
}

fn check_inputs(densities: &MagnonDensities, block_len: f64, alpha: f64) -> Result<f64> {
    if densities.values().iter().any(|&n| !(n > 0.0 && n < 1.0)) {
        return Err(Error::invalid(
            "Gaussian approximation needs every density in (0,1); drop vanishing components and reduce m",
        ));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha must lie in [0,1), got {alpha}")));
    }
    let eff = block_len * (1.0 - alpha);
    if !(eff > 0.0 && eff.is_finite()) {
        return Err(Error::invalid("need L > 0"));
    }
    Ok(eff)
}

/// Builds the coefficient matrix, inverts it by Cholesky and checks the
/// inverse against `L(1-α) n_i (δ_ij - n_j)`.
pub fn covariance_matrix(densities: &MagnonDensities, block_len: f64, alpha: f64) -> Result<GaussianModel> {
    let eff = check_inputs(densities, block_len, alpha)?;
    let n = densities.values();
    let m = densities.m();
    let last = n[m];
    let a = DMatrix::from_fn(m, m, |i, j| {
        let diag = if i == j { 1.0 / n[i] } else { 0.0 };
        (diag + 1.0 / last) / eff
    });
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("coefficient matrix is not positive definite".into()))?;
    let covariance = chol.inverse();
    for i in 0..m {
        for j in 0..m {
            let delta = if i == j { 1.0 } else { 0.0 };
            let expected = eff * n[i] * (delta - n[j]);
            if (covariance[(i, j)] - expected).abs() > INVERSE_TOL * expected.abs().max(1.0) {
                return Err(Error::Numerical(format!(
                    "covariance entry ({i},{j}) = {} differs from {expected}",
                    covariance[(i, j)]
                )));
            }
        }
    }
    let log_norm = -0.5 * m as f64 * (2.0 * PI * eff).ln() - 0.5 * n.iter().map(|x| x.ln()).sum::<f64>();
    Ok(GaussianModel {
        means: n[..m].iter().map(|x| block_len * x).collect(),
        coefficient_matrix: a,
        covariance,
        normalizer: log_norm.exp(),
        densities: n.to_vec(),
        effective_len: eff,
    })
}

/// `[2π L(1-α)]^{-m/2} Π_a n_a^{-1/2} exp(-E(x) / (2 L(1-α)))`, `x_b = L_b - L n_b`.
pub fn gaussian_eigenvalue_approx(densities: &MagnonDensities, block_len: f64, alpha: f64, index: &[f64]) -> Result<f64> {
    if index.len() != densities.m() {
        return Err(Error::invalid(format!("index must have {} components", densities.m())));
    }
    Ok(covariance_matrix(densities, block_len, alpha)?.density_at(index))
}

fn check_hypergeometric(total: u64, draws: u64, successes: u64) -> Result<(f64, f64)> {
    if draws > total || successes > total || total == 0 {
        return Err(Error::invalid("need 0 <= L, n <= N and N > 0"));
    }
    let alpha = draws as f64 / total as f64;
    let nu = successes as f64 / total as f64;
    if alpha == 0.0 || alpha == 1.0 || nu == 0.0 || nu == 1.0 {
        return Err(Error::invalid("degenerate hypergeometric distribution has zero variance"));
    }
    Ok((alpha, nu))
}

/// Normal density `g(l; μ, σ)` approximating the hypergeometric distribution
/// of `l` successes in `draws` draws from `total` items with `successes`
/// marked: `μ = N α ν`, `σ² = N α(1-α) ν(1-ν)`, `α = L/N`, `ν = n/N`.
pub fn hypergeometric_gaussian_approx(total: u64, draws: u64, successes: u64, l: i64) -> Result<f64> {
    let (alpha, nu) = check_hypergeometric(total, draws, successes)?;
    let nf = total as f64;
    let mu = nf * alpha * nu;
    let var = nf * alpha * (1.0 - alpha) * nu * (1.0 - nu);
    let x = l as f64 - mu;
    Ok((-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt())
}

/// Exact hypergeometric probability `C(L, l) C(N-L, n-l) / C(N, n)`.
pub fn hypergeometric_pmf(total: u64, draws: u64, successes: u64, l: i64) -> f64 {
    if l < 0 || l as u64 > draws || l as u64 > successes || successes - l as u64 > total - draws {
        return 0.0;
    }
    (log_binomial(draws, l) + log_binomial(total - draws, successes as i64 - l) - log_binomial(total, successes as i64)).exp()
}

/// Total-variation distance between the hypergeometric distribution and its
/// normal approximation restricted to the integers.
///
/// Lattice points outside the hypergeometric support contribute their full
/// Gaussian mass; the tails beyond `[0, max(L, n)]` are added in closed form.
pub fn hypergeometric_tv_distance(total: u64, draws: u64, successes: u64) -> Result<f64> {
    check_hypergeometric(total, draws, successes)?;
    let hi = draws.max(successes) as i64;
    let mut acc = CompensatedSum::new();
    let mut gauss_mass = CompensatedSum::new();
    for l in 0..=hi {
        let g = hypergeometric_gaussian_approx(total, draws, successes, l)?;
        gauss_mass.add(g);
        acc.add((hypergeometric_pmf(total, draws, successes, l) - g).abs());
    }
    // Integer-lattice Gaussian mass outside [0, hi] is 1 - (mass inside) up to
    // the lattice-vs-integral discrepancy, which is exponentially small here.
    let outside = (1.0 - gauss_mass.value()).max(0.0);
    Ok(0.5 * (acc.value() + outside))
}

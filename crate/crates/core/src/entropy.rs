//! Exact and asymptotic entanglement entropies of Dicke-state blocks.
//!
//! Exact values are reductions over an enumerated [`RdmSpectrum`]. The
//! asymptotic forms follow from the Gaussian limit of the spectrum, which
//! gives `tr ρ^q = q^{-m/2} g^{m(1-q)/2}` with
//! `g = 2π L(1-α) Π_a n_a^{1/m}`; everything else is derived from that trace.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SUM_TOL;
use crate::numeric::{log_binomial, par_compensated_sum};
use crate::rdm::RdmSpectrum;

/// `|q - 1|` below which Rényi and Tsallis entropies are replaced by the
/// von Neumann entropy. At this distance `ln q / (q - 1)` is within 1e-9 of 1.
pub const Q_ONE_TOL: f64 = 1e-8;

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("entropy index q must be positive and finite, got {q}")))
    }
}

/// `-Σ λ ln λ`.
pub fn entropy_exact(spec: &RdmSpectrum) -> f64 {
    let s = par_compensated_sum(spec.values(), |x| if x > 0.0 { -x * x.ln() } else { 0.0 });
    // Σλ = 1 up to rounding, so a pure state can come out as -1e-17.
    s.max(0.0)
}

/// `Σ λ^q`.
pub fn trace_power_exact(spec: &RdmSpectrum, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(par_compensated_sum(spec.values(), |x| x.powf(q)))
}

/// `ln(Σ λ^q) / (1 - q)`; the von Neumann entropy when `|q - 1| < 1e-8`.
pub fn renyi_exact(spec: &RdmSpectrum, q: f64) -> Result<f64> {
    check_q(q)?;
    if (q - 1.0).abs() < Q_ONE_TOL {
        return Ok(entropy_exact(spec));
    }
    Ok((trace_power_exact(spec, q)?.ln() / (1.0 - q)).max(0.0))
}

/// `(Σ λ^q - 1) / (1 - q)`; the von Neumann entropy when `|q - 1| < 1e-8`.
pub fn tsallis_exact(spec: &RdmSpectrum, q: f64) -> Result<f64> {
    check_q(q)?;
    if (q - 1.0).abs() < Q_ONE_TOL {
        return Ok(entropy_exact(spec));
    }
    Ok(((trace_power_exact(spec, q)? - 1.0) / (1.0 - q)).max(0.0))
}

/// Converts a Tsallis entropy to the Rényi entropy of the same index.
pub fn renyi_from_tsallis(t: f64, q: f64) -> f64 {
    if (q - 1.0).abs() < Q_ONE_TOL {
        return t;
    }
    ((1.0 - q) * t).ln_1p() / (1.0 - q)
}

/// `ln C(L + m, m)`, the log-dimension of the symmetric block subspace.
pub fn entropy_upper_bound(block_len: u64, m: u64) -> f64 {
    log_binomial(block_len + m, m as i64)
}

/// Whether an entropy value came out negative from an asymptotic formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyFlag {
    Ok,
    /// The large-`L` formula has broken down (the value is negative). The value
    /// is reported unclamped.
    NegativeAsymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyValue {
    pub value: f64,
    pub flag: EntropyFlag,
}

impl EntropyValue {
    pub fn asymptotic(value: f64) -> Self {
        let flag = if value < 0.0 {
            EntropyFlag::NegativeAsymptotic
        } else {
            EntropyFlag::Ok
        };
        EntropyValue { value, flag }
    }

    pub fn zero() -> Self {
        EntropyValue {
            value: 0.0,
            flag: EntropyFlag::Ok,
        }
    }
}

/// Parameters of the large-`L` formulas: the nonvanishing densities, block
/// length and block fraction `α = L/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticInput {
    densities: Vec<f64>,
    block_len: f64,
    alpha: f64,
}

impl AsymptoticInput {
    /// `densities` must all lie in `(0, 1)` and sum to one; their count is
    /// `m_eff + 1`.
    pub fn new(densities: Vec<f64>, block_len: f64, alpha: f64) -> Result<Self> {
        if densities.len() < 2 {
            return Err(Error::invalid("asymptotic formulas need at least two nonvanishing densities"));
        }
        if densities.iter().any(|&n| !(n > 0.0 && n < 1.0)) {
            return Err(Error::invalid(format!("densities must lie in (0,1): {densities:?}")));
        }
        let s: f64 = densities.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!("densities sum to {s}, not 1")));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::invalid(format!("block fraction alpha must lie in [0,1), got {alpha}")));
        }
        if !(block_len > 0.0 && block_len.is_finite()) {
            return Err(Error::invalid(format!("block length must be positive, got {block_len}")));
        }
        Ok(AsymptoticInput {
            densities,
            block_len,
            alpha,
        })
    }

    pub fn m_eff(&self) -> usize {
        self.densities.len() - 1
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    /// `L (1 - α)`.
    pub fn effective_len(&self) -> f64 {
        self.block_len * (1.0 - self.alpha)
    }

    /// `(1/m) Σ ln n_a`, the log of the geometric factor `Π n_a^{1/m}`.
    fn log_density_factor(&self) -> f64 {
        self.densities.iter().map(|n| n.ln()).sum::<f64>() / self.m_eff() as f64
    }

    /// `ln g`, `g = 2π L(1-α) Π n_a^{1/m}`.
    fn log_scale(&self) -> f64 {
        (2.0 * PI * self.effective_len()).ln() + self.log_density_factor()
    }
}

/// `q^{-m/2} [2π L(1-α) Π n_a^{1/m}]^{m(1-q)/2}`.
pub fn trace_power_asymptotic(inp: &AsymptoticInput, q: f64) -> Result<f64> {
    check_q(q)?;
    let m = inp.m_eff() as f64;
    Ok((-0.5 * m * q.ln() + 0.5 * m * (1.0 - q) * inp.log_scale()).exp())
}

/// `(m/2) ln(2πe L(1-α) Π n_a^{1/m})`.
pub fn vn_asymptotic(inp: &AsymptoticInput) -> EntropyValue {
    let m = inp.m_eff() as f64;
    EntropyValue::asymptotic(0.5 * m * (1.0 + inp.log_scale()))
}

/// `(m/2) ln q / (q - 1) + (m/2) ln(2π L(1-α) Π n_a^{1/m})`.
pub fn renyi_asymptotic(inp: &AsymptoticInput, q: f64) -> Result<EntropyValue> {
    check_q(q)?;
    if (q - 1.0).abs() < Q_ONE_TOL {
        return Ok(vn_asymptotic(inp));
    }
    let m = inp.m_eff() as f64;
    let offset = (q - 1.0).ln_1p() / (q - 1.0);
    Ok(EntropyValue::asymptotic(0.5 * m * (offset + inp.log_scale())))
}

/// `(tr ρ^q - 1) / (1 - q)` with the asymptotic trace.
pub fn tsallis_asymptotic(inp: &AsymptoticInput, q: f64) -> Result<EntropyValue> {
    check_q(q)?;
    if (q - 1.0).abs() < Q_ONE_TOL {
        return Ok(vn_asymptotic(inp));
    }
    let m = inp.m_eff() as f64;
    let log_trace = -0.5 * m * q.ln() + 0.5 * m * (1.0 - q) * inp.log_scale();
    Ok(EntropyValue::asymptotic(log_trace.exp_m1() / (1.0 - q)))
}

/// `lim T_q / L` at the index `q = 1 - 2/m` where the Tsallis entropy grows
/// linearly: `π m (1-α) Π n_a^{1/m} / (1 - 2/m)^{m/2}`.
///
/// Only defined for `m_eff ≥ 3`; for smaller `m_eff` no positive `q` makes
/// the Tsallis entropy extensive.
pub fn tsallis_extensive_limit(inp: &AsymptoticInput) -> Result<f64> {
    let m_eff = inp.m_eff();
    if m_eff < 3 {
        return Err(Error::NotExtensive(m_eff));
    }
    let m = m_eff as f64;
    Ok(PI * m * (1.0 - inp.alpha) * inp.log_density_factor().exp() / (1.0 - 2.0 / m).powf(0.5 * m))
}

/// The extensive Tsallis index `1 - 2/m_eff`, if positive.
pub fn extensive_tsallis_index(m_eff: usize) -> Option<f64> {
    (m_eff >= 3).then(|| 1.0 - 2.0 / m_eff as f64)
}

/// Which entropy's zero set to measure the distance to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyKind {
    VonNeumann,
    Renyi(f64),
}

/// A point in the relative interior of an `(m-1)`-dimensional face of the
/// weight simplex: density `vanishing` is zero, the others are `densities`
/// (in index order, `vanishing` skipped).
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroEntropyFace {
    pub vanishing: usize,
    pub densities: Vec<f64>,
}

/// Distance from a face point to the hypersurface where the asymptotic entropy
/// vanishes, to leading order in `1/L`.
///
/// For a vanishing index `a < m`:
/// `r₀ = (m+1)/√(m²+m-1) · [2πe L(1-α)]^{-m} / Π_{b≠a} n_b`;
/// for `a = m` the prefactor is `(m+1)/√m`. The Rényi distance carries an
/// extra factor `q^{m/(1-q)} e^m`.
pub fn zero_entropy_distance(face: &ZeroEntropyFace, block_len: f64, alpha: f64, kind: EntropyKind) -> Result<f64> {
    let m = face.densities.len();
    if m == 0 {
        return Err(Error::invalid("face needs at least one nonvanishing density"));
    }
    if face.vanishing > m {
        return Err(Error::invalid(format!("vanishing index {} out of range 0..={m}", face.vanishing)));
    }
    if face.densities.iter().any(|&n| !(n > 0.0 && n <= 1.0)) {
        return Err(Error::invalid(
            "face point lies on a lower-dimensional face; the distance then scales as L^(-m/k) with no closed form",
        ));
    }
    let s: f64 = face.densities.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(Error::invalid(format!("face densities sum to {s}, not 1")));
    }
    let eff = block_len * (1.0 - alpha);
    if !(eff > 0.0) || !(0.0..1.0).contains(&alpha) {
        return Err(Error::invalid("need L > 0 and alpha in [0,1)"));
    }
    let mf = m as f64;
    let prefactor = if face.vanishing < m {
        (mf + 1.0) / (mf * mf + mf - 1.0).sqrt()
    } else {
        (mf + 1.0) / mf.sqrt()
    };
    let log_prod: f64 = face.densities.iter().map(|n| n.ln()).sum();
    let r_vn = prefactor * (-mf * (2.0 * PI * E * eff).ln() - log_prod).exp();
    match kind {
        EntropyKind::VonNeumann => Ok(r_vn),
        EntropyKind::Renyi(q) => {
            check_q(q)?;
            if (q - 1.0).abs() < Q_ONE_TOL {
                return Ok(r_vn);
            }
            // q^{m/(1-q)} e^m = exp(m (1 - ln q / (q-1)))
            let offset = (q - 1.0).ln_1p() / (q - 1.0);
            Ok(r_vn * (mf * (1.0 - offset)).exp())
        }
    }
}

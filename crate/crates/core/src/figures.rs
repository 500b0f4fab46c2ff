//! Data tables behind the standard figures: the relative error of the
//! asymptotic entropy against exact enumeration, and the su(3) entropy surface.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{entropy_exact, vn_asymptotic, AsymptoticInput};
use crate::error::{Error, Result};
use crate::fmt::fmt_shortest;
use crate::model::{densities_from_field, finite_magnon_numbers};
use crate::phase::{phase_scan, GridAxis, GridSpec, ScanRow};
use crate::rdm::{rdm_spectrum, BlockSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct RelErrConfig {
    pub m: usize,
    pub field: Vec<f64>,
    pub alpha: f64,
    pub lengths: Vec<usize>,
}

impl Default for RelErrConfig {
    fn default() -> Self {
        RelErrConfig {
            m: 2,
            field: vec![0.2, 0.2],
            alpha: 0.5,
            lengths: (50..=1000).step_by(10).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelErrRow {
    #[serde(rename = "L")]
    pub block_len: usize,
    #[serde(rename = "N")]
    pub n_sites: usize,
    pub s_exact: f64,
    pub s_asym: f64,
    pub rel_error: f64,
}

/// Chain length `N = L/α` and occupations `N n_a`, both required to be integers.
pub fn chain_for_block(m: usize, field: &[f64], alpha: f64, block_len: usize) -> Result<(usize, Vec<usize>)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha must lie in (0,1) to fix the chain length"));
    }
    let exact_n = block_len as f64 / alpha;
    let n_sites = exact_n.round() as usize;
    if (exact_n - n_sites as f64).abs() > 1e-9 * exact_n.max(1.0) {
        return Err(Error::invalid(format!("L/alpha = {exact_n} is not an integer")));
    }
    let densities = densities_from_field(m, field)?;
    let numbers = finite_magnon_numbers(&densities, n_sites)?;
    for (&count, &n) in numbers.counts.iter().zip(densities.values()) {
        if (count as f64 - n * n_sites as f64).abs() > 1e-9 * n_sites as f64 {
            return Err(Error::invalid(format!(
                "N n_a = {} is not an integer for N = {n_sites}",
                n * n_sites as f64
            )));
        }
    }
    Ok((n_sites, numbers.counts))
}

/// Exact and asymptotic von Neumann entropies for each block length.
pub fn relerr_table(cfg: &RelErrConfig) -> Result<Vec<RelErrRow>> {
    let densities = densities_from_field(cfg.m, &cfg.field)?;
    let active = densities.nonvanishing(0.0);
    cfg.lengths
        .par_iter()
        .map(|&l| {
            let (n_sites, magnons) = chain_for_block(cfg.m, &cfg.field, cfg.alpha, l)?;
            let s_exact = entropy_exact(&rdm_spectrum(&BlockSpec::new(n_sites, l, magnons)?)?);
            let s_asym = vn_asymptotic(&AsymptoticInput::new(active.clone(), l as f64, cfg.alpha)?).value;
            Ok(RelErrRow {
                block_len: l,
                n_sites,
                s_exact,
                s_asym,
                rel_error: (s_exact - s_asym).abs() / s_exact,
            })
        })
        .collect()
}

pub fn write_relerr_csv<W: Write>(rows: &[RelErrRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "L,S_exact,S_asym,rel_error")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.block_len,
            fmt_shortest(r.s_exact),
            fmt_shortest(r.s_asym),
            fmt_shortest(r.rel_error)
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceConfig {
    pub grid: GridSpec,
    pub couplings: Vec<f64>,
    pub block_len: f64,
    pub alpha: f64,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig {
            grid: GridSpec::uniform(2, GridAxis::new(-2.0, 2.0, 0.05).expect("valid axis")),
            couplings: vec![1.0, 1.0],
            block_len: 1000.0,
            alpha: 0.0,
        }
    }
}

/// Asymptotic su(3) entropy over the field grid.
pub fn surface_table(cfg: &SurfaceConfig) -> Result<Vec<ScanRow>> {
    if cfg.couplings.len() != 2 {
        return Err(Error::invalid("the entropy surface is defined for m = 2"));
    }
    phase_scan(&cfg.grid, cfg.block_len, cfg.alpha, &cfg.couplings)
}

//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
//!
//! Run with `cargo test -p glmg-core --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{binom, grid_minimize, lmg_pauli_hamiltonian, ratio_to_f64, rng, sorted_eigenvalues, zero_crossing, ExactSpectrum};
use glmg_core::diag::{build_hamiltonian, ground_state_verify, lmg_su2_spectrum, sector_spectrum};
use glmg_core::entropy::*;
use glmg_core::figures::{relerr_table, RelErrConfig};
use glmg_core::gaussian::{covariance_matrix, hypergeometric_gaussian_approx};
use glmg_core::model::{CouplingScheme, MagnonDensities, ModelSpec};
use glmg_core::phase::*;
use glmg_core::rdm::{moments_brute_force, moments_closed_form, rdm_spectrum, BlockSpec};
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Magnon tuples of the small grid: exhaustive for small N, strided at N = 40.
fn small_grid() -> Vec<Vec<usize>> {
    fn tuples(n: usize, parts: usize, stride: usize, out: &mut Vec<Vec<usize>>, prefix: &mut Vec<usize>) {
        if parts == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in (0..=n).step_by(stride) {
            prefix.push(v);
            tuples(n - v, parts - 1, stride, out, prefix);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for (m, n_max, stride_40) in [(1usize, 40usize, 1usize), (2, 20, 5), (3, 12, 10)] {
        for n in 1..=n_max {
            tuples(n, m + 1, 1, &mut out, &mut Vec::new());
        }
        if n_max < 40 {
            tuples(40, m + 1, stride_40, &mut out, &mut Vec::new());
        }
    }
    out
}

fn normalization_and_duality() -> Check {
    let grid = small_grid();
    let (count, worst) = grid
        .par_iter()
        .map(|na| -> std::result::Result<(usize, f64), String> {
            let n: usize = na.iter().sum();
            let mut worst = 0.0f64;
            for l in 0..=n {
                let b = BlockSpec::new(n, l, na.clone()).map_err(|e| e.to_string())?;
                let s = rdm_spectrum(&b).map_err(|e| e.to_string())?;
                let d = rdm_spectrum(&b.complement()).map_err(|e| e.to_string())?;
                worst = worst.max((s.total() - 1.0).abs());
                for q in [1.0, 2.0, 3.0] {
                    let a = trace_power_exact(&s, q).map_err(|e| e.to_string())?;
                    let c = trace_power_exact(&d, q).map_err(|e| e.to_string())?;
                    worst = worst.max((a - c).abs());
                }
            }
            Ok((n + 1, worst))
        })
        .try_reduce(|| (0, 0.0), |a, b| Ok((a.0 + b.0, a.1.max(b.1))))?;
    ensure(worst <= 1e-12, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("{count} blocks, max deviation {worst:.1e}"))
}

fn moment_oracle() -> Check {
    let grid = small_grid();
    let (count, worst) = grid
        .par_iter()
        .filter(|na| na.iter().sum::<usize>() >= 2)
        .map(|na| -> std::result::Result<(usize, f64), String> {
            let n: usize = na.iter().sum();
            let mut worst = 0.0f64;
            for l in 0..=n {
                let b = BlockSpec::new(n, l, na.clone()).map_err(|e| e.to_string())?;
                let closed = moments_closed_form(&b).map_err(|e| e.to_string())?;
                let brute = moments_brute_force(&rdm_spectrum(&b).map_err(|e| e.to_string())?);
                worst = worst.max(closed.max_abs_diff(&brute));
            }
            Ok((n + 1, worst))
        })
        .try_reduce(|| (0, 0.0), |a, b| Ok((a.0 + b.0, a.1.max(b.1))))?;
    // Spot check against exact rational moments.
    let (means, cov) = ExactSpectrum::new(40, 17, &[10, 10, 10, 10]).moments(3);
    let closed = moments_closed_form(&BlockSpec::new(40, 17, vec![10, 10, 10, 10]).unwrap()).unwrap();
    let spot = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| (closed.covariance[(i, j)] - cov[i][j]).abs().max((closed.means[i] - means[i]).abs()))
        .fold(0.0, f64::max);
    ensure(worst <= 1e-12 && spot <= 1e-12, || format!("max deviation {worst:.3e}, exact spot {spot:.3e}"))?;
    Ok(format!("{count} blocks, max deviation {worst:.1e}"))
}

// Exact entropies at the two endpoints, from 30-digit arithmetic on exact binomials.
const S_EXACT_L50: f64 = 4.345_680_150_393_655;
const S_EXACT_L1000: f64 = 7.331_975_340_374_301;

fn figure_relerr() -> Check {
    let rows = relerr_table(&RelErrConfig::default()).map_err(|e| e.to_string())?;
    ensure(rows.len() == 96, || format!("{} rows", rows.len()))?;
    let first = rows[0];
    let last = rows[95];
    ensure(rows.iter().all(|r| r.rel_error > 0.0), || "non-positive relative error".into())?;
    ensure(last.rel_error < 1e-2, || format!("rel_error(1000) = {:.3e}", last.rel_error))?;
    let ratio = first.rel_error / last.rel_error;
    ensure(ratio >= 5.0, || format!("decrease factor {ratio:.2}"))?;
    ensure((first.s_exact - S_EXACT_L50).abs() < 1e-10, || format!("S(50) = {}", first.s_exact))?;
    ensure((last.s_exact - S_EXACT_L1000).abs() < 1e-10, || format!("S(1000) = {}", last.s_exact))?;
    let oracle = ExactSpectrum::new(100, 50, &[40, 40, 20]).entropy();
    ensure((first.s_exact - oracle).abs() < 1e-12, || format!("big-integer oracle {oracle}"))?;
    Ok(format!(
        "rel_error {:.3e} -> {:.3e} (factor {ratio:.1})",
        first.rel_error, last.rel_error
    ))
}

fn gaussian_limit() -> Check {
    let total = 1000u64;
    let mut worst_tv = 0.0f64;
    for draws in [200u64, 300, 500] {
        for successes in [200u64, 300, 500] {
            let norm = binom(total, successes);
            let mut acc = 0.0;
            let mut inside = 0.0;
            for l in 0..=draws.max(successes) {
                let p = if l > draws || l > successes || successes - l > total - draws {
                    0.0
                } else {
                    ratio_to_f64(&(binom(draws, l) * binom(total - draws, successes - l)), &norm)
                };
                let g = hypergeometric_gaussian_approx(total, draws, successes, l as i64).map_err(|e| e.to_string())?;
                inside += g;
                acc += (p - g).abs();
            }
            worst_tv = worst_tv.max(0.5 * (acc + (1.0 - inside).max(0.0)));
        }
    }
    ensure(worst_tv <= 0.02, || format!("TV distance {worst_tv:.4}"))?;

    let mut r = rng(3);
    let mut worst_inv = 0.0f64;
    for _ in 0..100 {
        let m = r.random_range(1..=5usize);
        let raw: Vec<f64> = (0..=m).map(|_| r.random_range(0.05..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let dens: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let dens = MagnonDensities::new(dens).map_err(|e| e.to_string())?;
        let l = r.random_range(10.0..1e4);
        let alpha = r.random_range(0.0..0.9);
        let g = covariance_matrix(&dens, l, alpha).map_err(|e| e.to_string())?;
        let eff = l * (1.0 - alpha);
        let n = dens.values();
        let expected = DMatrix::from_fn(m, m, |i, j| eff * n[i] * (if i == j { 1.0 } else { 0.0 } - n[j]));
        let rel = (&g.covariance - &expected).amax() / expected.amax();
        let ident = (&g.coefficient_matrix * &g.covariance - DMatrix::identity(m, m)).amax();
        worst_inv = worst_inv.max(rel).max(ident);
    }
    ensure(worst_inv <= 1e-10, || format!("inverse deviation {worst_inv:.3e}"))?;
    Ok(format!("max TV {worst_tv:.2e}, inverse deviation {worst_inv:.1e}"))
}

fn trace_asymptotics() -> Check {
    let mut out = Vec::new();
    for l in [200usize, 800] {
        let spec = rdm_spectrum(&BlockSpec::new(2 * l, l, vec![l, l]).unwrap()).map_err(|e| e.to_string())?;
        let exact = trace_power_exact(&spec, 2.0).map_err(|e| e.to_string())?;
        let inp = AsymptoticInput::new(vec![0.5, 0.5], l as f64, 0.5).map_err(|e| e.to_string())?;
        let asym = trace_power_asymptotic(&inp, 2.0).map_err(|e| e.to_string())?;
        let rel = (exact - asym).abs() / exact;
        ensure(rel <= 3.0 / l as f64, || format!("L={l}: relative deviation {rel:.3e}"))?;
        out.push(format!("L={l}: {rel:.2e}"));
    }
    Ok(out.join(", "))
}

fn renyi_slope() -> Check {
    let mut worst = 0.0f64;
    for m_eff in 1..=5usize {
        let raw: Vec<f64> = (0..=m_eff).map(|a| 1.0 + a as f64).collect();
        let s: f64 = raw.iter().sum();
        let dens: Vec<f64> = raw.iter().map(|x| x / s).collect();
        for q in [0.5, 1.0, 2.0, 5.0] {
            let r = |l: f64| -> std::result::Result<f64, String> {
                let inp = AsymptoticInput::new(dens.clone(), l, 0.25).map_err(|e| e.to_string())?;
                Ok(renyi_asymptotic(&inp, q).map_err(|e| e.to_string())?.value)
            };
            let slope = (r(1e4)? - r(1e2)?) / 100f64.ln();
            worst = worst.max((slope - m_eff as f64 / 2.0).abs());
        }
    }
    ensure(worst < 1e-12, || format!("slope deviation {worst:.3e}"))?;
    Ok(format!("max slope deviation {worst:.1e}"))
}

fn tsallis_extensivity() -> Check {
    let inp = AsymptoticInput::new(vec![0.25; 4], 1e6, 0.0).map_err(|e| e.to_string())?;
    let t = tsallis_asymptotic(&inp, 1.0 / 3.0).map_err(|e| e.to_string())?.value;
    let per_site = t / 1e6;
    let limit = tsallis_extensive_limit(&inp).map_err(|e| e.to_string())?;
    ensure((per_site / 7.7128 - 1.0).abs() < 0.01, || format!("T/L = {per_site}"))?;
    ensure((limit / 7.7128 - 1.0).abs() < 0.01, || format!("limit = {limit}"))?;
    for dens in [vec![0.5, 0.5], vec![0.2, 0.3, 0.5]] {
        let inp = AsymptoticInput::new(dens, 1e6, 0.0).map_err(|e| e.to_string())?;
        match tsallis_extensive_limit(&inp) {
            Err(e) if e.to_string().starts_with("Tsallis not extensive for any q") => {}
            other => return Err(format!("m_eff={} not refused: {other:?}", inp.m_eff())),
        }
    }
    Ok(format!("T/L = {per_site:.5}, limit {limit:.5}; m_eff 1, 2 refused"))
}

fn phase_solver() -> Check {
    let mut r = rng(2024);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let m = r.random_range(1..=3usize);
        let h: Vec<f64> = (0..m).map(|_| r.random_range(-3.0..3.0)).collect();
        let c: Vec<f64> = (0..m).map(|_| r.random_range(0.2..5.0)).collect();
        let oracle = grid_minimize(&c, &h, if m == 3 { 60 } else { 400 });
        let got = project_to_simplex(m, &c, &h).map_err(|e| e.to_string())?;
        let d = got
            .densities
            .values()
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(d);
    }
    ensure(worst <= 1e-6, || format!("projection deviation {worst:.3e}"))?;

    let c = [1.0, 1.0];
    let grid = GridSpec::uniform(2, GridAxis::new(-2.0, 2.0, 4.0 / 199.0).unwrap());
    ensure(grid.len() == 40_000, || format!("grid has {} points", grid.len()))?;
    let (mismatch, checked, worst_s) = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let h = grid.point(i);
            let region = su3_region(&h, &c).unwrap();
            let proj = project_to_simplex(2, &c, &h).unwrap();
            let piece = su3_entropy_piecewise(&h, &c, 1000.0, 0.0).unwrap().value;
            let general = phase_entropy(&proj, 1000.0, 0.0).unwrap().value;
            match region.implied_k() {
                Some(k) => ((k != proj.k) as usize, 1usize, (piece - general).abs()),
                None => (0, 0, (piece - general).abs()),
            }
        })
        .reduce(|| (0, 0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2.max(b.2)));
    ensure(mismatch == 0, || format!("{mismatch} classifier mismatches"))?;
    ensure(worst_s <= 1e-12, || format!("piecewise entropy deviation {worst_s:.3e}"))?;
    Ok(format!(
        "projection {worst:.1e}; {checked} non-boundary grid points agree; entropy deviation {worst_s:.1e}"
    ))
}

fn diagonalization() -> Check {
    let cases: Vec<(usize, usize, Vec<f64>)> = vec![
        (1, 4, vec![0.0]),
        (1, 6, vec![1.0 / 3.0]),
        (1, 8, vec![-0.25]),
        (1, 10, vec![0.2]),
        (2, 3, vec![0.0, 0.0]),
        (2, 6, vec![0.5, 0.0]),
        (2, 6, vec![1.0 / 6.0, -1.0 / 6.0]),
    ];
    let mut worst_overlap = 1.0f64;
    let mut worst_spec = 0.0f64;
    for (m, n, h) in cases {
        for coupling in [
            CouplingScheme::Constant { value: 2.0 / n as f64 },
            CouplingScheme::HaldaneShastry,
        ] {
            let spec = ModelSpec::new(m, vec![1.0; m], h.clone(), coupling).map_err(|e| e.to_string())?;
            let report = ground_state_verify(&spec, n).map_err(|e| e.to_string())?;
            ensure(report.is_dicke && report.degeneracy == 1, || format!("m={m} N={n} h={h:?}: {report:?}"))?;
            worst_overlap = worst_overlap.min(report.overlap);
            let dense = sorted_eigenvalues(build_hamiltonian(&spec, n).map_err(|e| e.to_string())?);
            let sectors = sector_spectrum(&spec, n).map_err(|e| e.to_string())?.all_energies();
            let d = dense.iter().zip(&sectors).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            ensure(dense.len() == sectors.len(), || "spectrum sizes differ".into())?;
            worst_spec = worst_spec.max(d);
        }
    }
    ensure(worst_overlap >= 1.0 - 1e-9, || format!("overlap {worst_overlap}"))?;
    ensure(worst_spec <= 1e-9, || format!("sector deviation {worst_spec:.3e}"))?;

    let mut worst_su2 = 0.0f64;
    for h in [0.0, 0.4, 1.2] {
        let dense = sorted_eigenvalues(lmg_pauli_hamiltonian(6, h));
        let mut closed: Vec<f64> = lmg_su2_spectrum(6, h)
            .map_err(|e| e.to_string())?
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.energy, l.degeneracy as usize))
            .collect();
        closed.sort_by(f64::total_cmp);
        ensure(closed.len() == dense.len(), || "su(2) level count".into())?;
        worst_su2 = worst_su2.max(closed.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    ensure(worst_su2 <= 1e-9, || format!("su(2) deviation {worst_su2:.3e}"))?;
    Ok(format!(
        "min overlap 1-{:.1e}, sector deviation {worst_spec:.1e}, su(2) deviation {worst_su2:.1e}",
        1.0 - worst_overlap
    ))
}

fn zero_entropy() -> Check {
    let cases: [(usize, usize, Vec<f64>); 5] = [
        (1, 0, vec![1.0]),
        (1, 1, vec![1.0]),
        (2, 0, vec![0.5, 0.5]),
        (2, 1, vec![0.3, 0.7]),
        (2, 2, vec![0.4, 0.6]),
    ];
    let mut worst_match = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (m, a, face) in cases {
        let zf = ZeroEntropyFace {
            vanishing: a,
            densities: face.clone(),
        };
        let predicted = zero_entropy_distance(&zf, 1000.0, 0.0, EntropyKind::VonNeumann).map_err(|e| e.to_string())?;
        let found = zero_crossing(m, a, &face, 1000.0, None);
        worst_match = worst_match.max((found / predicted - 1.0).abs());
        let twice = zero_crossing(m, a, &face, 2000.0, None);
        worst_ratio = worst_ratio.max((twice / found / 0.5f64.powi(m as i32) - 1.0).abs());
    }
    ensure(worst_match <= 0.1, || format!("closed form off by {:.1}%", 100.0 * worst_match))?;
    ensure(worst_ratio <= 0.05, || format!("scaling off by {:.1}%", 100.0 * worst_ratio))?;
    Ok(format!(
        "closed form within {:.2}%, scaling within {:.2}%",
        100.0 * worst_match,
        100.0 * worst_ratio
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Check); 10] = [
        ("normalization and duality", Duration::from_secs(10), normalization_and_duality),
        ("moment oracle", Duration::from_secs(10), moment_oracle),
        ("relative-error figure", Duration::from_secs(300), figure_relerr),
        ("Gaussian limit", Duration::from_secs(30), gaussian_limit),
        ("trace asymptotics", Duration::from_secs(60), trace_asymptotics),
        ("Renyi q-independence", Duration::from_secs(1), renyi_slope),
        ("Tsallis extensivity", Duration::from_secs(1), tsallis_extensivity),
        ("phase solver", Duration::from_secs(120), phase_solver),
        ("exact diagonalization", Duration::from_secs(120), diagonalization),
        ("zero-entropy distance", Duration::from_secs(30), zero_entropy),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (status, detail) = match result {
            Ok(d) if elapsed <= *budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over time budget {budget:?}")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {:>2} {name}: {detail} [{:.2} s]", i + 1, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

mod common;

use common::{binom, ratio_to_f64, trapezoid};
use glmg_core::gaussian::*;
use glmg_core::model::MagnonDensities;
use glmg_core::rdm::{moments_closed_form, rdm_eigenvalue, BlockSpec};
use rayon::prelude::*;

fn dens(v: &[f64]) -> MagnonDensities {
    MagnonDensities::new(v.to_vec()).unwrap()
}

#[test]
fn density_integrates_to_one() {
    let g = covariance_matrix(&dens(&[0.3, 0.7]), 200.0, 0.4).unwrap();
    let sd = g.covariance[(0, 0)].sqrt();
    let mu = g.means[0];
    let total = trapezoid(|x| g.density_at(&[x]), mu - 12.0 * sd, mu + 12.0 * sd, 4000);
    assert!((total - 1.0).abs() < 1e-6);

    let g = covariance_matrix(&dens(&[0.2, 0.3, 0.5]), 150.0, 0.25).unwrap();
    let (s0, s1) = (g.covariance[(0, 0)].sqrt(), g.covariance[(1, 1)].sqrt());
    let (m0, m1) = (g.means[0], g.means[1]);
    let total = trapezoid(
        |x| trapezoid(|y| g.density_at(&[x, y]), m1 - 12.0 * s1, m1 + 12.0 * s1, 600),
        m0 - 12.0 * s0,
        m0 + 12.0 * s0,
        600,
    );
    assert!((total - 1.0).abs() < 1e-6, "{total}");
}

#[test]
fn peak_compares_with_exact_eigenvalue() {
    let approx = gaussian_eigenvalue_approx(&dens(&[0.5, 0.5]), 100.0, 0.0, &[50.0]).unwrap();
    let exact = ratio_to_f64(&(binom(100, 50) * binom(100, 50)), &binom(200, 100));
    // α = 1/2 for this chain, so the exact peak is √2 times the α = 0 value.
    let approx_half = gaussian_eigenvalue_approx(&dens(&[0.5, 0.5]), 100.0, 0.5, &[50.0]).unwrap();
    assert!((approx - 0.0797885).abs() < 1e-7);
    assert!((approx_half / exact - 1.0).abs() < 0.01);
}

#[test]
fn inverse_matches_finite_moments() {
    let n = 10_000usize;
    for na in [vec![5000, 5000], vec![2000, 3000, 5000], vec![3334, 3333, 3333]] {
        let b = BlockSpec::new(n, n / 2, na.clone()).unwrap();
        let densities: Vec<f64> = na.iter().map(|&k| k as f64 / n as f64).collect();
        let g = covariance_matrix(&dens(&densities), (n / 2) as f64, 0.5).unwrap();
        let mom = moments_closed_form(&b).unwrap();
        for i in 0..na.len() - 1 {
            for j in 0..na.len() - 1 {
                let (a, c) = (g.covariance[(i, j)], mom.covariance[(i, j)]);
                assert!((a - c).abs() <= 2.0 / n as f64 * c.abs());
            }
        }
    }
}

/// Exact hypergeometric probabilities from big-integer binomials.
fn exact_pmf(total: u64, draws: u64, successes: u64) -> Vec<f64> {
    let norm = binom(total, successes);
    (0..=draws.max(successes))
        .map(|l| {
            if l > draws || l > successes || successes - l > total - draws {
                0.0
            } else {
                ratio_to_f64(&(binom(draws, l) * binom(total - draws, successes - l)), &norm)
            }
        })
        .collect()
}

fn tv_against_oracle(total: u64, draws: u64, successes: u64) -> f64 {
    let p = exact_pmf(total, draws, successes);
    let mut inside = 0.0;
    let mut acc = 0.0;
    for (l, pl) in p.iter().enumerate() {
        let g = hypergeometric_gaussian_approx(total, draws, successes, l as i64).unwrap();
        inside += g;
        acc += (pl - g).abs();
    }
    0.5 * (acc + (1.0 - inside).max(0.0))
}

#[test]
fn hypergeometric_total_variation() {
    for (total, bound) in [(200u64, 0.05), (1000, 0.02)] {
        for fa in [0.2, 0.3, 0.5] {
            for fn_ in [0.2, 0.3, 0.5] {
                let draws = (fa * total as f64) as u64;
                let successes = (fn_ * total as f64) as u64;
                let oracle = tv_against_oracle(total, draws, successes);
                assert!(oracle <= bound, "N={total} L={draws} n={successes}: {oracle}");
                let lib = hypergeometric_tv_distance(total, draws, successes).unwrap();
                assert!((lib - oracle).abs() < 1e-12);
            }
        }
    }
}

/// Largest `|λ_exact - λ_gauss| / λ_peak` over the whole support.
fn max_relative_error(n: usize, magnons: &[usize]) -> f64 {
    let l = n / 2;
    let b = BlockSpec::new(n, l, magnons.to_vec()).unwrap();
    let densities: Vec<f64> = magnons.iter().map(|&k| k as f64 / n as f64).collect();
    let g = covariance_matrix(&dens(&densities), l as f64, 0.5).unwrap();
    let peak = g.normalizer;
    let m = magnons.len() - 1;
    let err = |idx: &[usize]| {
        let exact = rdm_eigenvalue(&b, idx).unwrap();
        let x: Vec<f64> = idx.iter().map(|&v| v as f64).collect();
        (exact - g.density_at(&x)).abs() / peak
    };
    if m == 1 {
        (0..=l.min(magnons[0])).map(|i| err(&[i])).fold(0.0, f64::max)
    } else {
        (0..=l.min(magnons[0]))
            .into_par_iter()
            .map(|i| (0..=(l - i).min(magnons[1])).map(|j| err(&[i, j])).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }
}

#[test]
fn multivariate_approximation_error() {
    for n in [1000usize, 10_000] {
        let bound = 5.0 / (n as f64).sqrt();
        let e1 = max_relative_error(n, &[n / 2, n / 2]);
        assert!(e1 <= bound, "m=1 N={n}: {e1}");
        let third = n / 3;
        let e2 = max_relative_error(n, &[n - 2 * third, third, third]);
        assert!(e2 <= bound, "m=2 N={n}: {e2}");
    }
}

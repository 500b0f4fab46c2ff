//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exact binomial coefficient by the multiplicative formula.
pub fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `num / den` rounded to f64, for arbitrarily large integers.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 80;
    if shift >= 0 {
        let q = (num << shift as u64) / den;
        q.to_f64().unwrap() * 2f64.powi(-shift as i32)
    } else {
        let q = num / (den << (-shift) as u64);
        q.to_f64().unwrap() * 2f64.powi(-shift as i32)
    }
}

fn signed_ratio(num: &BigInt, den: &BigUint) -> f64 {
    let mag = ratio_to_f64(num.magnitude(), den);
    if num.sign() == num_bigint::Sign::Minus {
        -mag
    } else {
        mag
    }
}

/// All tuples `(L_0, …, L_m)` with `L_a ≤ caps[a]` and `Σ L_a = total`,
/// by filtering the full Cartesian product.
pub fn bounded_compositions(total: usize, caps: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &cap in caps {
        let mut next = Vec::new();
        for prefix in &out {
            for v in 0..=cap {
                let mut p: Vec<usize> = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().filter(|c| c.iter().sum::<usize>() == total).collect()
}

/// Exact integer weights `Π C(N_a, L_a)` and normalizer `C(N, L)`.
pub struct ExactSpectrum {
    pub indices: Vec<Vec<usize>>,
    pub weights: Vec<BigUint>,
    pub norm: BigUint,
}

impl ExactSpectrum {
    pub fn new(n_sites: usize, block_len: usize, magnons: &[usize]) -> Self {
        let tables: Vec<Vec<BigUint>> = magnons
            .iter()
            .map(|&na| (0..=na).map(|l| binom(na as u64, l as u64)).collect())
            .collect();
        let caps: Vec<usize> = magnons.iter().map(|&na| na.min(block_len)).collect();
        let indices = if magnons.len() <= 4 && block_len <= 60 {
            bounded_compositions(block_len, &caps)
        } else {
            ordered_compositions(block_len, &caps)
        };
        let weights = indices
            .iter()
            .map(|idx| {
                idx.iter()
                    .zip(&tables)
                    .fold(BigUint::one(), |acc, (&l, t)| acc * &t[l])
            })
            .collect();
        ExactSpectrum {
            indices,
            weights,
            norm: binom(n_sites as u64, block_len as u64),
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.weights.iter().map(|w| ratio_to_f64(w, &self.norm)).collect()
    }

    pub fn weight_sum_is_norm(&self) -> bool {
        self.weights.iter().fold(BigUint::zero(), |a, w| a + w) == self.norm
    }

    /// Means of `L_0..L_{m-1}` and their covariance, exact until the final division.
    pub fn moments(&self, m: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut first = vec![BigInt::zero(); m];
        let mut second = vec![vec![BigInt::zero(); m]; m];
        for (idx, w) in self.indices.iter().zip(&self.weights) {
            let w = BigInt::from(w.clone());
            for i in 0..m {
                first[i] += &w * idx[i];
                for j in 0..m {
                    second[i][j] += &w * (idx[i] * idx[j]);
                }
            }
        }
        let norm = BigInt::from(self.norm.clone());
        let norm2 = &self.norm * &self.norm;
        let means = first.iter().map(|f| signed_ratio(f, &self.norm)).collect();
        let cov = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| signed_ratio(&(&norm * &second[i][j] - &first[i] * &first[j]), &norm2))
                    .collect()
            })
            .collect();
        (means, cov)
    }

    /// `-Σ λ ln λ` with `ln λ = ln w - ln C(N, L)` evaluated from the exact integers.
    pub fn entropy(&self) -> f64 {
        let ln_norm = big_ln(&self.norm);
        let mut terms: Vec<f64> = self
            .weights
            .iter()
            .filter(|w| !w.is_zero())
            .map(|w| {
                let lam = ratio_to_f64(w, &self.norm);
                -lam * (big_ln(w) - ln_norm)
            })
            .collect();
        terms.sort_by(f64::total_cmp);
        terms.iter().sum()
    }
}

/// Lexicographic enumeration with bound pruning (used for large blocks).
fn ordered_compositions(total: usize, caps: &[usize]) -> Vec<Vec<usize>> {
    fn go(rest: usize, caps: &[usize], prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if caps.len() == 1 {
            if rest <= caps[0] {
                prefix.push(rest);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        for v in 0..=caps[0].min(rest) {
            prefix.push(v);
            go(rest - v, &caps[1..], prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(total, caps, &mut Vec::new(), &mut out);
    out
}

/// Natural log of a big integer from its leading 64 bits.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Isotropic LMG Hamiltonian `-(1/N) Σ_{i<j} (σˣσˣ + σʸσʸ) - h Σ σᶻ` from
/// Kronecker products of Pauli matrices.
pub fn lmg_pauli_hamiltonian(n_sites: usize, h: f64) -> DMatrix<f64> {
    let c = |re: f64, im: f64| Complex::new(re, im);
    let id = DMatrix::<Complex<f64>>::identity(2, 2);
    let sx = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
    let sy = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
    let sz = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
    let site_op = |op: &DMatrix<Complex<f64>>, k: usize| {
        let mut acc = DMatrix::<Complex<f64>>::identity(1, 1);
        for s in 0..n_sites {
            acc = acc.kronecker(if s == k { op } else { &id });
        }
        acc
    };
    let dim = 1 << n_sites;
    let mut ham = DMatrix::<Complex<f64>>::zeros(dim, dim);
    let xs: Vec<_> = (0..n_sites).map(|k| site_op(&sx, k)).collect();
    let ys: Vec<_> = (0..n_sites).map(|k| site_op(&sy, k)).collect();
    for i in 0..n_sites {
        for j in i + 1..n_sites {
            ham -= (&xs[i] * &xs[j] + &ys[i] * &ys[j]) * c(1.0 / n_sites as f64, 0.0);
        }
        ham -= site_op(&sz, i) * c(h, 0.0);
    }
    assert!(ham.iter().all(|z| z.im.abs() < 1e-14));
    ham.map(|z| z.re)
}

/// Composite trapezoid rule on `[a, b]` with `n` panels.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n {
        s += f(a + i as f64 * h);
    }
    s * h
}

/// Root of `f` on `[a, b]` by bisection, given a sign change.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    assert!(fa * f(b) <= 0.0, "no sign change");
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (f(mid) > 0.0) == (fa > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Weight vectors `e_a` and `-Σ e_a`, written out directly.
pub fn weights(m: usize) -> Vec<Vec<f64>> {
    let mut w: Vec<Vec<f64>> = (0..m).map(|a| (0..m).map(|b| if a == b { 1.0 } else { 0.0 }).collect()).collect();
    w.push(vec![-1.0; m]);
    w
}

/// `Σ_a c_a (Σ_s n_s μ_s,a - h_a)²`.
pub fn energy(c: &[f64], h: &[f64], n: &[f64]) -> f64 {
    let w = weights(c.len());
    (0..c.len())
        .map(|a| {
            let x: f64 = n.iter().zip(&w).map(|(ns, mu)| ns * mu[a]).sum();
            c[a] * (x - h[a]).powi(2)
        })
        .sum()
}

/// Brute-force minimizer of the energy over the density simplex: a grid
/// search with `steps` divisions, refined by pairwise mass exchange.
pub fn grid_minimize(c: &[f64], h: &[f64], steps: usize) -> Vec<f64> {
    let m = c.len();
    let mut best = vec![0.0; m + 1];
    let mut best_e = f64::INFINITY;
    for counts in ordered_compositions(steps, &vec![steps; m + 1]) {
        let n: Vec<f64> = counts.iter().map(|&k| k as f64 / steps as f64).collect();
        let e = energy(c, h, &n);
        if e < best_e {
            best_e = e;
            best = n;
        }
    }
    let w = weights(m);
    let mut n = best;
    for _ in 0..200_000 {
        let mut moved = 0.0f64;
        for s in 0..=m {
            for t in 0..=m {
                if s == t {
                    continue;
                }
                // Move δ from t to s; x changes by δ (μ_s - μ_t).
                let x: Vec<f64> = (0..m).map(|a| (0..=m).map(|v| n[v] * w[v][a]).sum()).collect();
                let d: Vec<f64> = (0..m).map(|a| w[s][a] - w[t][a]).collect();
                let num: f64 = (0..m).map(|a| c[a] * (h[a] - x[a]) * d[a]).sum();
                let den: f64 = (0..m).map(|a| c[a] * d[a] * d[a]).sum();
                let delta = (num / den).clamp(-n[s], n[t]);
                n[s] += delta;
                n[t] -= delta;
                moved = moved.max(delta.abs());
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    n
}

/// Distance along the inward unit normal of the face `n_a = 0` at which the
/// asymptotic entropy `(m/2)(1 + ln 2πL(1-α)) + ½ Σ ln n_b` crosses zero.
pub fn zero_crossing(m: usize, vanishing: usize, face: &[f64], eff: f64, renyi_q: Option<f64>) -> f64 {
    let mf = m as f64;
    let mut face_point = face.to_vec();
    face_point.insert(vanishing, 0.0);
    // ∂n_b/∂h_a = δ_ab - 1/(m+1) for b < m, and -1/(m+1) for b = m; the
    // inward normal is the normalized gradient of n_vanishing.
    let jac = |b: usize, a: usize| (if a == b { 1.0 } else { 0.0 }) - 1.0 / (mf + 1.0);
    let grad: Vec<f64> = (0..m).map(|a| jac(vanishing, a)).collect();
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let rate: Vec<f64> = (0..=m)
        .map(|b| (0..m).map(|a| jac(b, a) * grad[a] / norm).sum())
        .collect();
    // Stepping the densities directly keeps the vanishing one free of cancellation.
    let dens_at = |t: f64| -> Vec<f64> { face_point.iter().zip(&rate).map(|(n, r)| n + t * r).collect() };
    let offset = renyi_q.map_or(1.0, |q| q.ln() / (q - 1.0));
    let entropy = |log_t: f64| {
        let n = dens_at(log_t.exp());
        0.5 * mf * (offset + (2.0 * std::f64::consts::PI * eff).ln()) + 0.5 * n.iter().map(|x| x.ln()).sum::<f64>()
    };
    bisect(entropy, -80.0, (1e-3f64).ln()).exp()
}

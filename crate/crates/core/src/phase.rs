//! Ground-state phases as a function of the magnetic field.
//!
//! The ground-state densities minimize `ε(n) = Σ_a c_a (x_a(n) - h_a)²` over
//! the density simplex, where `x(n) = Σ_s n_s μ_s`. Since `n ↦ x(n)` maps the
//! density simplex onto the weight simplex, this is the projection of `h` onto
//! the weight simplex in the norm `‖y‖² = Σ c_a y_a²`. The projection is found
//! exactly by solving the equality-constrained least-squares problem on every
//! face and keeping the closest feasible candidate.

use std::collections::BTreeSet;
use std::f64::consts::{E, PI};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{vn_asymptotic, AsymptoticInput, EntropyValue};
use crate::error::{Error, Result};
use crate::fmt::fmt_significant;
use crate::model::{locate_field, weight_vectors, FieldLocation, MagnonDensities, WeightSet};

/// Barycentric coordinates down to this value count as feasible.
pub const FEASIBILITY_TOL: f64 = -1e-12;

/// Distance to a phase boundary below which a result is flagged.
pub const NEAR_BOUNDARY_TOL: f64 = 1e-8;

/// Largest `m` accepted by the face enumeration (`2^{m+1} - 1` faces).
pub const MAX_M: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseResult {
    pub densities: MagnonDensities,
    /// Indices of the vanishing densities.
    pub vanishing: BTreeSet<usize>,
    /// Number of vanishing densities.
    pub k: usize,
    /// Vertices spanning the face that contains the projection.
    pub active_face: BTreeSet<usize>,
    /// Weighted distance from `h` to the weight simplex.
    pub distance: f64,
    /// Within 1e-8 of a phase boundary: either an active density is almost zero
    /// or a dropped vertex is almost active.
    pub near_boundary: bool,
}

fn weighted_dot(c: &[f64], x: &[f64], y: &[f64]) -> f64 {
    c.iter().zip(x).zip(y).map(|((c, x), y)| c * x * y).sum()
}

struct FaceSolution {
    face: Vec<usize>,
    bary: Vec<f64>,
    dist2: f64,
}

/// Least-squares projection of `h` onto the affine hull of `face`.
fn solve_face(w: &WeightSet, c: &[f64], h: &[f64], face: &[usize]) -> Option<FaceSolution> {
    let m = c.len();
    let r = face[0];
    let mu_r = w.get(r);
    let k = face.len() - 1;
    let bary = if k == 0 {
        vec![1.0]
    } else {
        let dirs: Vec<Vec<f64>> = face[1..]
            .iter()
            .map(|&s| (0..m).map(|a| w.get(s)[a] - mu_r[a]).collect())
            .collect();
        let rhs_vec: Vec<f64> = (0..m).map(|a| h[a] - mu_r[a]).collect();
        let gram = DMatrix::from_fn(k, k, |i, j| weighted_dot(c, &dirs[i], &dirs[j]));
        let rhs = DVector::from_fn(k, |i, _| weighted_dot(c, &dirs[i], &rhs_vec));
        let t = gram.cholesky()?.solve(&rhs);
        let mut bary = Vec::with_capacity(k + 1);
        bary.push(1.0 - t.iter().sum::<f64>());
        bary.extend(t.iter());
        bary
    };
    let x = point(w, face, &bary);
    let diff: Vec<f64> = x.iter().zip(h).map(|(x, h)| x - h).collect();
    Some(FaceSolution {
        face: face.to_vec(),
        bary,
        dist2: weighted_dot(c, &diff, &diff),
    })
}

fn point(w: &WeightSet, face: &[usize], bary: &[f64]) -> Vec<f64> {
    let m = w.m();
    let mut x = vec![0.0; m];
    for (&s, &b) in face.iter().zip(bary) {
        for (xa, mu) in x.iter_mut().zip(w.get(s)) {
            *xa += b * mu;
        }
    }
    x
}

fn check_couplings(m: usize, c: &[f64], h: &[f64]) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    if m > MAX_M {
        return Err(Error::ResourceCap {
            what: "face enumeration for m",
            size: m as u128,
            cap: MAX_M as u128,
            hint: "",
        });
    }
    if c.len() != m || h.len() != m {
        return Err(Error::invalid(format!("need {m} couplings and {m} field components")));
    }
    if c.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::invalid("couplings c_a must be positive"));
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("field must be finite"));
    }
    Ok(())
}

/// Unique minimizer of `Σ c_a (x_a(n) - h_a)²` over the density simplex.
///
/// Every nonempty vertex subset is tried in order of increasing size; a
/// candidate is kept only when strictly closer than the best so far, so on
/// boundaries shared by two faces the lower-dimensional face wins.
pub fn project_to_simplex(m: usize, c: &[f64], h: &[f64]) -> Result<PhaseResult> {
    check_couplings(m, c, h)?;
    let w = weight_vectors(m)?;
    let n_vertices = m + 1;
    let mut masks: Vec<u32> = (1u32..(1u32 << n_vertices)).collect();
    masks.sort_by_key(|mask| (mask.count_ones(), *mask));

    let mut best: Option<FaceSolution> = None;
    for mask in masks {
        let face: Vec<usize> = (0..n_vertices).filter(|&v| mask & (1 << v) != 0).collect();
        let Some(sol) = solve_face(&w, c, h, &face) else {
            continue;
        };
        if sol.bary.iter().any(|&b| b < FEASIBILITY_TOL) {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => sol.dist2 < b.dist2 - 1e-12 * (1.0 + b.dist2),
        };
        if better {
            best = Some(sol);
        }
    }
    let best = best.expect("vertices are always feasible");

    let mut values = vec![0.0; n_vertices];
    for (&s, &b) in best.face.iter().zip(&best.bary) {
        values[s] = b.max(0.0);
    }
    let total: f64 = values.iter().sum();
    values.iter_mut().for_each(|v| *v /= total);

    let active_face: BTreeSet<usize> = best.face.iter().copied().collect();
    let vanishing: BTreeSet<usize> = (0..n_vertices).filter(|v| !active_face.contains(v)).collect();

    let x = point(&w, &best.face, &best.bary);
    let resid: Vec<f64> = h.iter().zip(&x).map(|(h, x)| h - x).collect();
    let scale = 1.0 + weighted_dot(c, h, h).sqrt();
    let near_vertex = vanishing.iter().any(|&v| {
        let dir: Vec<f64> = w.get(v).iter().zip(&x).map(|(mu, x)| mu - x).collect();
        weighted_dot(c, &resid, &dir) > -NEAR_BOUNDARY_TOL * scale
    });
    let near_face = best.face.len() > 1 && best.face.iter().any(|&s| values[s] < NEAR_BOUNDARY_TOL);

    let distance = if locate_field(m, h)? == FieldLocation::Exterior {
        best.dist2.sqrt()
    } else {
        0.0
    };
    Ok(PhaseResult {
        densities: MagnonDensities::new(values)?,
        k: vanishing.len(),
        vanishing,
        active_face,
        distance,
        near_boundary: near_vertex || near_face,
    })
}

/// Largest violation of the optimality conditions of a projection: the
/// weighted residual `h - x*` must be orthogonal to the active face and make a
/// non-acute angle with every dropped vertex direction.
pub fn kkt_violation(result: &PhaseResult, c: &[f64], h: &[f64]) -> f64 {
    let m = c.len();
    let w = weight_vectors(m).expect("m >= 1");
    let dens = result.densities.values();
    let x: Vec<f64> = (0..m)
        .map(|a| (0..=m).map(|s| dens[s] * w.get(s)[a]).sum())
        .collect();
    let resid: Vec<f64> = h.iter().zip(&x).map(|(h, x)| h - x).collect();
    let mut worst = 0.0f64;
    for v in 0..=m {
        let dir: Vec<f64> = w.get(v).iter().zip(&x).map(|(mu, x)| mu - x).collect();
        let g = weighted_dot(c, &resid, &dir);
        if result.active_face.contains(&v) {
            worst = worst.max(g.abs());
        } else {
            worst = worst.max(g);
        }
    }
    worst
}

/// A line of the su(3) phase diagram on which the region is not unique.
/// Vertex indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Su3Line {
    /// Side of the triangle between two vertices.
    Side(usize, usize),
    /// Half-line through `vertex` perpendicular to the side towards `toward`,
    /// separating a wedge from a half-strip.
    Perpendicular { vertex: usize, toward: usize },
    /// A vertex of the triangle.
    Vertex(usize),
}

/// Region of the su(3) field plane (equal Cartan couplings).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Su3Region {
    Interior,
    /// Half-strip beyond the side through vertices 1 and 2 (`n_3 = 0`).
    R12,
    R13,
    R23,
    /// Wedge at vertex 1, where the ground state is fully polarized.
    W1,
    W2,
    W3,
    Boundary(Su3Line),
}

impl Su3Region {
    /// Number of vanishing densities in this region; `None` on boundaries.
    pub fn implied_k(&self) -> Option<usize> {
        match self {
            Su3Region::Interior => Some(0),
            Su3Region::R12 | Su3Region::R13 | Su3Region::R23 => Some(1),
            Su3Region::W1 | Su3Region::W2 | Su3Region::W3 => Some(2),
            Su3Region::Boundary(_) => None,
        }
    }

    fn strip(b: usize, c: usize) -> Self {
        match (b.min(c), b.max(c)) {
            (0, 1) => Su3Region::R12,
            (0, 2) => Su3Region::R13,
            _ => Su3Region::R23,
        }
    }

    fn wedge(a: usize) -> Self {
        [Su3Region::W1, Su3Region::W2, Su3Region::W3][a]
    }
}

impl fmt::Display for Su3Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Su3Region::Interior => write!(f, "interior"),
            Su3Region::R12 => write!(f, "R12"),
            Su3Region::R13 => write!(f, "R13"),
            Su3Region::R23 => write!(f, "R23"),
            Su3Region::W1 => write!(f, "W1"),
            Su3Region::W2 => write!(f, "W2"),
            Su3Region::W3 => write!(f, "W3"),
            Su3Region::Boundary(Su3Line::Side(a, b)) => write!(f, "boundary:side{}{}", a + 1, b + 1),
            Su3Region::Boundary(Su3Line::Perpendicular { vertex, toward }) => {
                write!(f, "boundary:perp{}_{}{}", vertex + 1, (*vertex).min(*toward) + 1, (*vertex).max(*toward) + 1)
            }
            Su3Region::Boundary(Su3Line::Vertex(a)) => write!(f, "boundary:vertex{}", a + 1),
        }
    }
}

const SU3_TOL: f64 = 1e-10;

fn check_su3(h: &[f64], c: &[f64]) -> Result<()> {
    if h.len() != 2 || c.len() != 2 {
        return Err(Error::invalid("su(3) classification needs two field components and two couplings"));
    }
    if c[0] != c[1] {
        return Err(Error::invalid(
            "closed-form su(3) geometry requires c1 = c2; use project_to_simplex for general couplings",
        ));
    }
    if !(c[0] > 0.0) || h.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("couplings must be positive and the field finite"));
    }
    Ok(())
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Classifies `h` into the interior of the weight triangle, one of the three
/// half-strips `R_bc` beyond a side, one of the three vertex wedges `W_a`, or
/// a boundary line between them.
pub fn su3_region(h: &[f64], c: &[f64]) -> Result<Su3Region> {
    check_su3(h, c)?;
    let mu = [[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]];
    let p = [h[0], h[1]];
    let third = (1.0 - h[0] - h[1]) / 3.0;
    let bary = [h[0] + third, h[1] + third, third];

    if bary.iter().all(|&n| n > SU3_TOL) {
        return Ok(Su3Region::Interior);
    }
    if bary.iter().all(|&n| n >= -SU3_TOL) {
        let zeros: Vec<usize> = (0..3).filter(|&a| bary[a].abs() <= SU3_TOL).collect();
        return Ok(match zeros.as_slice() {
            [a] => {
                let others: Vec<usize> = (0..3).filter(|b| b != a).collect();
                Su3Region::Boundary(Su3Line::Side(others[0], others[1]))
            }
            _ => {
                let vertex = (0..3).find(|a| !zeros.contains(a)).unwrap_or(0);
                Su3Region::Boundary(Su3Line::Vertex(vertex))
            }
        });
    }
    // Normal cone of each vertex: (h - μ_a)·(μ_b - μ_a) ≤ 0 for both b ≠ a.
    for a in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&b| b != a).collect();
        let t: Vec<f64> = others.iter().map(|&b| dot2(sub2(p, mu[a]), sub2(mu[b], mu[a]))).collect();
        if t.iter().all(|&x| x < -SU3_TOL) {
            return Ok(Su3Region::wedge(a));
        }
        if t.iter().all(|&x| x <= SU3_TOL) {
            let i = if t[0].abs() <= SU3_TOL { 0 } else { 1 };
            return Ok(Su3Region::Boundary(Su3Line::Perpendicular {
                vertex: a,
                toward: others[i],
            }));
        }
    }
    for a in 0..3 {
        if bary[a] >= -SU3_TOL {
            continue;
        }
        let others: Vec<usize> = (0..3).filter(|&b| b != a).collect();
        let (b, cc) = (others[0], others[1]);
        let edge = sub2(mu[b], mu[cc]);
        let s = dot2(sub2(p, mu[cc]), edge) / dot2(edge, edge);
        if s > SU3_TOL && s < 1.0 - SU3_TOL {
            return Ok(Su3Region::strip(b, cc));
        }
    }
    Err(Error::Numerical(format!("field {h:?} not classified")))
}

/// Closed-form large-`L` von Neumann entropy of the su(3) model with `c1 = c2`,
/// branch by branch over the phase diagram, with `S₀ = ln[2πe L(1-α)]`.
///
/// On boundary lines the branch of the face selected by
/// [`project_to_simplex`] is used.
pub fn su3_entropy_piecewise(h: &[f64], c: &[f64], block_len: f64, alpha: f64) -> Result<EntropyValue> {
    let region = su3_region(h, c)?;
    if !(0.0..1.0).contains(&alpha) || !(block_len > 0.0) {
        return Err(Error::invalid("need L > 0 and alpha in [0,1)"));
    }
    let region = match region {
        Su3Region::Boundary(_) => {
            let proj = project_to_simplex(2, c, h)?;
            let face: Vec<usize> = proj.active_face.iter().copied().collect();
            match face.as_slice() {
                [_, _, _] => Su3Region::Interior,
                [b, cc] => Su3Region::strip(*b, *cc),
                [a] => Su3Region::wedge(*a),
                _ => unreachable!("faces are nonempty"),
            }
        }
        r => r,
    };
    let s0 = (2.0 * PI * E * block_len * (1.0 - alpha)).ln();
    let (h1, h2) = (h[0], h[1]);
    let value = match region {
        Su3Region::Interior => {
            s0 - 1.5 * 3f64.ln()
                + 0.5 * ((1.0 + 2.0 * h1 - h2).ln() + (1.0 - h1 + 2.0 * h2).ln() + (1.0 - h1 - h2).ln())
        }
        Su3Region::R12 => 0.5 * (s0 + (1.0 - (h1 - h2).powi(2)).ln() - 2.0 * 2f64.ln()),
        Su3Region::R13 => 0.5 * (s0 - 2.0 * 5f64.ln() + (3.0 + 2.0 * h1 + h2).ln() + (2.0 - 2.0 * h1 - h2).ln()),
        Su3Region::R23 => 0.5 * (s0 - 2.0 * 5f64.ln() + (3.0 + h1 + 2.0 * h2).ln() + (2.0 - h1 - 2.0 * h2).ln()),
        Su3Region::W1 | Su3Region::W2 | Su3Region::W3 => return Ok(EntropyValue::zero()),
        Su3Region::Boundary(_) => unreachable!("resolved above"),
    };
    Ok(EntropyValue::asymptotic(value))
}

/// Asymptotic von Neumann entropy of the phase in `result`: the large-`L`
/// formula over the nonvanishing densities, or zero for a product state.
pub fn phase_entropy(result: &PhaseResult, block_len: f64, alpha: f64) -> Result<EntropyValue> {
    let active: Vec<f64> = result.densities.values().iter().copied().filter(|&v| v > 0.0).collect();
    if active.len() < 2 {
        return Ok(EntropyValue::zero());
    }
    Ok(vn_asymptotic(&AsymptoticInput::new(active, block_len, alpha)?))
}

/// One axis of a scan grid: `min, min + step, …` up to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) || !(step > 0.0) || max < min {
            return Err(Error::invalid(format!("bad grid axis {min}:{max}:{step}")));
        }
        Ok(GridAxis { min, max, step })
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }
}

impl FromStr for GridAxis {
    type Err = Error;

    /// Parses `"min:max:step"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!("grid must be min:max:step, got {s:?}")));
        }
        let nums: std::result::Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
        let nums = nums.map_err(|e| Error::invalid(format!("grid {s:?}: {e}")))?;
        GridAxis::new(nums[0], nums[1], nums[2])
    }
}

/// Rectangular grid over field space; the first axis varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
}

impl GridSpec {
    /// The same axis in each of `m` dimensions.
    pub fn uniform(m: usize, axis: GridAxis) -> Self {
        GridSpec { axes: vec![axis; m] }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(GridAxis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    /// Point number `i` in row-major order.
    pub fn point(&self, mut i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (d, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.len();
            out[d] = axis.value(i % n);
            i /= n;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub h: Vec<f64>,
    pub k: usize,
    pub densities: Vec<f64>,
    pub entropy: EntropyValue,
}

/// Evaluates the phase and asymptotic entropy at every grid point, in
/// row-major order.
pub fn phase_scan(grid: &GridSpec, block_len: f64, alpha: f64, c: &[f64]) -> Result<Vec<ScanRow>> {
    let m = c.len();
    if grid.axes.len() != m {
        return Err(Error::invalid(format!("grid has {} axes but m = {m}", grid.axes.len())));
    }
    if !(block_len * (1.0 - alpha) > 0.0) || !(0.0..1.0).contains(&alpha) {
        return Err(Error::invalid("need L(1-alpha) > 0 with alpha in [0,1)"));
    }
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let h = grid.point(i);
            let res = project_to_simplex(m, c, &h)?;
            let entropy = phase_entropy(&res, block_len, alpha)?;
            Ok(ScanRow {
                h,
                k: res.k,
                densities: res.densities.values().to_vec(),
                entropy,
            })
        })
        .collect()
}

/// Scan table: header `h1,...,hm,k,n1,...,n{m+1},S`, 12 significant digits.
pub fn write_scan_csv<W: Write>(rows: &[ScanRow], m: usize, mut w: W) -> std::io::Result<()> {
    let mut header: Vec<String> = (1..=m).map(|a| format!("h{a}")).collect();
    header.push("k".into());
    header.extend((1..=m + 1).map(|a| format!("n{a}")));
    header.push("S".into());
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let mut cells: Vec<String> = row.h.iter().map(|&x| fmt_significant(x, 12)).collect();
        cells.push(row.k.to_string());
        cells.extend(row.densities.iter().map(|&x| fmt_significant(x, 12)));
        cells.push(fmt_significant(row.entropy.value, 12));
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

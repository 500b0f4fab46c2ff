use glmg_core::diag::{ground_state_verify, lmg_su2_spectrum, predicted_magnons, sector_spectrum};
use glmg_core::entropy::{
    entropy_exact, renyi_asymptotic, renyi_exact, tsallis_asymptotic, tsallis_exact, tsallis_extensive_limit,
    extensive_tsallis_index, vn_asymptotic, AsymptoticInput,
};
use glmg_core::figures::{relerr_table, surface_table, RelErrConfig, SurfaceConfig};
use glmg_core::model::{densities_from_field, CouplingScheme, ModelSpec};
use glmg_core::phase::{phase_entropy, phase_scan, project_to_simplex, su3_region, GridAxis, GridSpec, ScanRow};
use glmg_core::rdm::{rdm_spectrum, BlockSpec};
use glmg_core::{Error, Result};

use crate::table::{Cell, Table};
use crate::{DiagMode, EntropyMode, Inputs};

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

/// Parses `constant[:v]`, `hs` or `nn:v1,v2,...`.
pub fn parse_coupling(s: &str) -> Result<CouplingScheme> {
    let (name, rest) = match s.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    };
    let nums = |r: &str| -> Result<Vec<f64>> {
        r.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| invalid(format!("coupling value {x:?}: {e}"))))
            .collect()
    };
    match (name, rest) {
        ("constant", None) => Ok(CouplingScheme::Constant { value: 1.0 }),
        ("constant", Some(v)) => match nums(v)?.as_slice() {
            [value] => Ok(CouplingScheme::Constant { value: *value }),
            _ => Err(invalid("constant coupling takes one value")),
        },
        ("hs", None) => Ok(CouplingScheme::HaldaneShastry),
        ("nn", Some(v)) => Ok(CouplingScheme::NearestNeighbor { values: nums(v)? }),
        _ => Err(invalid(format!("unknown coupling {s:?}; expected constant[:v], hs or nn:v1,v2,..."))),
    }
}

impl Inputs {
    fn m_hint(&self) -> Option<usize> {
        self.m
            .or_else(|| self.h.as_ref().map(Vec::len))
            .or_else(|| self.c.as_ref().map(Vec::len))
            .or_else(|| self.magnons.as_ref().map(|v| v.len().saturating_sub(1)))
    }

    /// The model from `--model`, with inline flags taking precedence.
    pub fn model(&self) -> Result<ModelSpec> {
        let mut spec = match &self.model {
            Some(path) => ModelSpec::load(path).map_err(|e| match e {
                Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
                e => e,
            })?,
            None => {
                let m = self
                    .m_hint()
                    .ok_or_else(|| invalid("no model: give --model or at least --h"))?;
                ModelSpec {
                    m,
                    cartan_couplings: vec![1.0; m],
                    field: vec![0.0; m],
                    coupling: CouplingScheme::Constant { value: 1.0 },
                    n_sites: None,
                }
            }
        };
        if let Some(m) = self.m {
            if m != spec.m {
                return Err(invalid(format!("--m {m} disagrees with the model's m = {}", spec.m)));
            }
        }
        if let Some(c) = &self.c {
            spec.cartan_couplings = c.clone();
        } else if self.model.is_none() {
            spec.cartan_couplings = vec![1.0; spec.m];
        }
        if let Some(h) = &self.h {
            spec.field = h.clone();
        }
        if let Some(c) = &self.coupling {
            spec.coupling = parse_coupling(c)?;
        }
        if let Some(n) = self.n_sites {
            if spec.n_sites.is_some_and(|fixed| fixed != n) {
                return Err(invalid(format!("--N {n} disagrees with the model's N")));
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    fn n_sites(&self) -> Option<usize> {
        self.n_sites
            .or_else(|| self.magnons.as_ref().map(|v| v.iter().sum()))
            .or_else(|| self.model.as_ref().and_then(|_| self.model().ok()?.n_sites))
    }

    fn require_n(&self) -> Result<usize> {
        self.n_sites().ok_or_else(|| invalid("--N is required"))
    }

    fn require_l(&self) -> Result<usize> {
        self.block_len.ok_or_else(|| invalid("--L is required"))
    }

    /// Magnon numbers from `--magnons`, or the Dicke state predicted by the field.
    fn magnon_numbers(&self, n_sites: usize) -> Result<Vec<usize>> {
        if let Some(v) = &self.magnons {
            let total: usize = v.iter().sum();
            if total != n_sites {
                return Err(invalid(format!("--magnons sum to {total}, expected N = {n_sites}")));
            }
            return Ok(v.clone());
        }
        Ok(predicted_magnons(&self.model()?, n_sites)?.0)
    }

    fn densities(&self) -> Result<Vec<f64>> {
        if let Some(v) = &self.magnons {
            let total: usize = v.iter().sum();
            if total == 0 {
                return Err(invalid("--magnons must not all be zero"));
            }
            return Ok(v.iter().map(|&k| k as f64 / total as f64).collect());
        }
        let spec = self.model()?;
        Ok(project_to_simplex(spec.m, &spec.cartan_couplings, &spec.field)?
            .densities
            .values()
            .to_vec())
    }

    fn alpha_for(&self, block_len: f64) -> Result<f64> {
        match (self.alpha, self.n_sites()) {
            (Some(a), _) => Ok(a),
            (None, Some(n)) => Ok(block_len / n as f64),
            (None, None) => Err(invalid("--alpha or --N is required for asymptotic values")),
        }
    }

    fn grid(&self, m: usize) -> Result<Option<GridSpec>> {
        self.grid
            .as_deref()
            .map(|g| Ok(GridSpec::uniform(m, g.parse::<GridAxis>()?)))
            .transpose()
    }

    fn qs(&self) -> Vec<f64> {
        self.q.clone().unwrap_or_else(|| vec![2.0])
    }
}

fn cols<I: IntoIterator<Item = S>, S: Into<String>>(it: I) -> Vec<String> {
    it.into_iter().map(Into::into).collect()
}

fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |a| format!("{prefix}{a}"))
}

/// Rows `method, quantity, q, value`; `S` is reported at `q = 1`.
pub fn entropy(inp: &Inputs, mode: Option<EntropyMode>, extensive: bool) -> Result<Table> {
    let qs = inp.qs();
    for &q in &qs {
        if !(q > 0.0 && q.is_finite()) {
            return Err(invalid(format!("entropy index q must be positive and finite, got {q}")));
        }
    }
    let mode = mode.unwrap_or(if inp.n_sites().is_some() {
        EntropyMode::Exact
    } else {
        EntropyMode::Asymptotic
    });
    let l = inp.require_l()?;
    let mut t = Table::new("entropy", cols(["method", "quantity", "q", "value"]));

    if matches!(mode, EntropyMode::Exact | EntropyMode::Both) {
        let n = inp.require_n()?;
        let spec = rdm_spectrum(&BlockSpec::new(n, l, inp.magnon_numbers(n)?)?)?;
        t.push(vec!["exact".into(), "S".into(), 1.0.into(), entropy_exact(&spec).into()]);
        for &q in &qs {
            t.push(vec!["exact".into(), "R".into(), q.into(), renyi_exact(&spec, q)?.into()]);
            t.push(vec!["exact".into(), "T".into(), q.into(), tsallis_exact(&spec, q)?.into()]);
        }
    }

    if matches!(mode, EntropyMode::Asymptotic | EntropyMode::Both) || extensive {
        let active: Vec<f64> = inp.densities()?.into_iter().filter(|&v| v > 0.0).collect();
        let alpha = inp.alpha_for(l as f64)?;
        let product_state = active.len() < 2 || l == 0;
        let asym = if product_state {
            None
        } else {
            Some(AsymptoticInput::new(active.clone(), l as f64, alpha)?)
        };
        if matches!(mode, EntropyMode::Asymptotic | EntropyMode::Both) {
            let value = |v: Option<f64>| v.unwrap_or(0.0);
            t.push(vec![
                "asymptotic".into(),
                "S".into(),
                1.0.into(),
                value(asym.as_ref().map(|a| vn_asymptotic(a).value)).into(),
            ]);
            for &q in &qs {
                let r = asym.as_ref().map(|a| renyi_asymptotic(a, q)).transpose()?.map(|e| e.value);
                let tq = asym.as_ref().map(|a| tsallis_asymptotic(a, q)).transpose()?.map(|e| e.value);
                t.push(vec!["asymptotic".into(), "R".into(), q.into(), value(r).into()]);
                t.push(vec!["asymptotic".into(), "T".into(), q.into(), value(tq).into()]);
            }
        }
        if extensive {
            let m_eff = active.len().saturating_sub(1);
            let a = match asym {
                Some(a) if m_eff >= 3 => a,
                _ => return Err(Error::NotExtensive(m_eff)),
            };
            let q = extensive_tsallis_index(m_eff).expect("m_eff >= 3");
            t.push(vec!["asymptotic".into(), "T/L".into(), q.into(), tsallis_extensive_limit(&a)?.into()]);
        }
    }
    Ok(t)
}

/// The block spectrum: `L1..Lm, lambda` in lexicographic order.
pub fn spectrum(inp: &Inputs) -> Result<Table> {
    let n = inp.require_n()?;
    let l = inp.require_l()?;
    let spec = rdm_spectrum(&BlockSpec::new(n, l, inp.magnon_numbers(n)?)?)?;
    let m = spec.m();
    let mut t = Table::new("spectrum", cols(indexed("L", m).chain(["lambda".to_string()])));
    for (idx, v) in spec.iter() {
        let mut row: Vec<Cell> = idx.iter().map(|&i| Cell::from(i)).collect();
        row.push(v.into());
        t.push(row);
    }
    Ok(t)
}

/// Phase of a single field point.
pub fn phase(inp: &Inputs) -> Result<Table> {
    let spec = inp.model()?;
    let (m, c, h) = (spec.m, &spec.cartan_couplings, &spec.field);
    let res = project_to_simplex(m, c, h)?;
    let region = (m == 2 && c[0] == c[1]).then(|| su3_region(h, c)).transpose()?;

    let mut columns: Vec<String> = indexed("h", m).collect();
    columns.push("k".into());
    columns.extend(indexed("n", m + 1));
    columns.extend(cols(["distance", "near_boundary"]));
    let mut row: Vec<Cell> = h.iter().map(|&x| x.into()).collect();
    row.push(res.k.into());
    row.extend(res.densities.values().iter().map(|&x| Cell::from(x)));
    row.push(res.distance.into());
    row.push(res.near_boundary.into());
    if let Some(l) = inp.block_len {
        let alpha = inp.alpha_for(l as f64).unwrap_or(0.0);
        columns.push("S".into());
        row.push(phase_entropy(&res, l as f64, alpha)?.value.into());
    }
    if let Some(r) = region {
        columns.push("region".into());
        row.push(r.to_string().into());
    }
    let mut t = Table::new("phase", columns);
    t.push(row);
    Ok(t)
}

fn scan_table(command: &'static str, rows: &[ScanRow], m: usize) -> Table {
    let mut columns: Vec<String> = indexed("h", m).collect();
    columns.push("k".into());
    columns.extend(indexed("n", m + 1));
    columns.push("S".into());
    let mut t = Table::new(command, columns);
    t.digits = Some(12);
    for r in rows {
        let mut row: Vec<Cell> = r.h.iter().map(|&x| x.into()).collect();
        row.push(r.k.into());
        row.extend(r.densities.iter().map(|&x| Cell::from(x)));
        row.push(r.entropy.value.into());
        t.push(row);
    }
    t
}

/// Phase and asymptotic entropy over a field grid.
pub fn scan(inp: &Inputs) -> Result<Table> {
    let m = inp
        .m_hint()
        .or_else(|| inp.model.as_ref().and_then(|_| inp.model().ok().map(|s| s.m)))
        .ok_or_else(|| invalid("scan needs --m, --c or --model"))?;
    let c = match (&inp.c, &inp.model) {
        (Some(c), _) => c.clone(),
        (None, Some(_)) => inp.model()?.cartan_couplings,
        (None, None) => vec![1.0; m],
    };
    let grid = inp.grid(m)?.ok_or_else(|| invalid("--grid is required"))?;
    let l = inp.require_l()? as f64;
    let alpha = inp.alpha.unwrap_or(0.0);
    Ok(scan_table("scan", &phase_scan(&grid, l, alpha, &c)?, m))
}

/// Exact diagonalization: the ground-state check, the sector spectrum, or
/// the su(2) closed-form levels.
pub fn diag(inp: &Inputs, mode: DiagMode) -> Result<Table> {
    let spec = inp.model()?;
    let n = inp.require_n()?;
    let m = spec.m;
    match mode {
        DiagMode::Verify => {
            let r = ground_state_verify(&spec, n)?;
            let mut columns = cols(["is_dicke", "overlap", "gap", "ground_energy", "degeneracy", "tie_broken"]);
            columns.extend(indexed("N", m + 1));
            let mut t = Table::new("diag", columns);
            let mut row: Vec<Cell> = vec![
                r.is_dicke.into(),
                r.overlap.into(),
                r.gap.into(),
                r.ground_energy.into(),
                r.degeneracy.into(),
                r.tie_broken.into(),
            ];
            row.extend(r.predicted_magnons.iter().map(|&k| Cell::from(k)));
            t.push(row);
            Ok(t)
        }
        DiagMode::Sectors => {
            let s = sector_spectrum(&spec, n)?;
            let mut columns: Vec<String> = indexed("N", m + 1).collect();
            columns.extend(cols(["level", "energy"]));
            let mut t = Table::new("diag", columns);
            for sector in &s.sectors {
                for (i, &e) in sector.energies.iter().enumerate() {
                    let mut row: Vec<Cell> = sector.magnons.iter().map(|&k| Cell::from(k)).collect();
                    row.push(i.into());
                    row.push(e.into());
                    t.push(row);
                }
            }
            Ok(t)
        }
        DiagMode::Su2 => {
            if m != 1 {
                return Err(invalid("the closed-form su(2) spectrum needs m = 1"));
            }
            let mut t = Table::new("diag", cols(["S", "M", "energy", "degeneracy"]));
            for lv in lmg_su2_spectrum(n, spec.field[0])? {
                t.push(vec![lv.s.value().into(), lv.m.value().into(), lv.energy.into(), Cell::Int(lv.degeneracy as i64)]);
            }
            Ok(t)
        }
    }
}

/// Relative error of the asymptotic entropy along a family of chains.
pub fn fig_relerr(inp: &Inputs) -> Result<Table> {
    let mut cfg = RelErrConfig::default();
    if let Some(h) = &inp.h {
        cfg.m = h.len();
        cfg.field = h.clone();
    }
    if let Some(m) = inp.m {
        if m != cfg.field.len() {
            return Err(invalid(format!("--m {m} needs a field with {m} components")));
        }
    }
    if let Some(a) = inp.alpha {
        cfg.alpha = a;
    }
    if let Some(l) = inp.block_len {
        cfg.lengths = vec![l];
    }
    densities_from_field(cfg.m, &cfg.field)?;
    let rows = relerr_table(&cfg)?;
    let mut t = Table::new("fig-relerr", cols(["L", "S_exact", "S_asym", "rel_error"]));
    for r in rows {
        t.push(vec![r.block_len.into(), r.s_exact.into(), r.s_asym.into(), r.rel_error.into()]);
    }
    Ok(t)
}

/// The su(3) entropy surface over a square field grid.
pub fn fig_surface(inp: &Inputs) -> Result<Table> {
    let mut cfg = SurfaceConfig::default();
    if let Some(g) = inp.grid(2)? {
        cfg.grid = g;
    }
    if let Some(c) = &inp.c {
        cfg.couplings = c.clone();
    }
    if let Some(l) = inp.block_len {
        cfg.block_len = l as f64;
    }
    if let Some(a) = inp.alpha {
        cfg.alpha = a;
    }
    if inp.m.is_some_and(|m| m != 2) {
        return Err(invalid("the entropy surface is defined for m = 2"));
    }
    Ok(scan_table("fig-surface", &surface_table(&cfg)?, 2))
}

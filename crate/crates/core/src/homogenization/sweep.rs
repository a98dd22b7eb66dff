//! h-sweeps: gap eigenvalues of `H_h` against the homogenized operator and
//! resolvent-action discrepancies on the point (gap) subspace.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirac::{assemble_dirac_1d, component_positions, PotentialSpec};
use crate::eigen::{interior_eigs, EigenPair};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, SpinorField};
use crate::operator::HermitianOperator;
use crate::resolvent::{Resolvent, RESOLVENT_TOL};

/// Cap on gap eigenpairs kept per operator for the point subspace.
pub const POINT_CAP: usize = 64;

/// Two eigenvalues closer than this (relative) form one eigenspace.
pub const EIGENSPACE_TOL: f64 = 1e-8;

/// Slack for "decreasing" checks on discrepancy sequences.
pub const DECREASE_TOL: f64 = 1e-10;

/// The homogenized shifted operator: `V2` replaced by its mean.
pub fn assemble_homogenized(grid: &Grid1D, spec: &PotentialSpec) -> Result<HermitianOperator> {
    let op = assemble_dirac_1d(grid, &spec.homogenized(), true)?;
    let provenance = format!("homogenized({})", op.provenance());
    Ok(op.with_provenance(provenance))
}

/// Right-hand sides for resolvent comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Probe {
    /// Gaussian bump with complex weights `[re, im]` on the two components,
    /// normalized to unit norm unless both weights vanish.
    Gaussian {
        center: f64,
        width: f64,
        #[serde(default = "unit_weight")]
        upper: [f64; 2],
        #[serde(default)]
        lower: [f64; 2],
    },
    /// The `k`-th (1-based) gap eigenvector of the homogenized operator.
    HomEigenvector { k: usize },
}

fn unit_weight() -> [f64; 2] {
    [1.0, 0.0]
}

impl Probe {
    pub fn gaussian(center: f64, width: f64, upper: [f64; 2], lower: [f64; 2]) -> Self {
        Probe::Gaussian {
            center,
            width,
            upper,
            lower,
        }
    }

    /// The default library: four Gaussians of different centre, width and
    /// spin direction, plus the ground gap state of the limit operator.
    pub fn default_library() -> Vec<Probe> {
        vec![
            Probe::gaussian(0.0, 1.0, [1.0, 0.0], [0.0, 0.0]),
            Probe::gaussian(1.5, 0.7, [0.0, 0.0], [1.0, 0.0]),
            Probe::gaussian(-2.0, 1.5, [1.0, 0.0], [0.0, 1.0]),
            Probe::gaussian(0.5, 3.0, [0.6, -0.2], [0.3, 0.5]),
            Probe::HomEigenvector { k: 1 },
        ]
    }

    pub fn realize(&self, grid: &Grid1D, hom_pairs: &[EigenPair]) -> Result<SpinorField> {
        match *self {
            Probe::Gaussian {
                center,
                width,
                upper,
                lower,
            } => {
                if !(width > 0.0 && width.is_finite() && center.is_finite()) {
                    return Err(Error::config(
                        "probes",
                        "gaussian needs finite center and positive width",
                    ));
                }
                let weights = [Complex64::new(upper[0], upper[1]), Complex64::new(lower[0], lower[1])];
                let values = component_positions(grid)
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| {
                        let t = (x - center) / width;
                        weights[i % 2] * (-0.5 * t * t).exp()
                    })
                    .collect();
                let mut f = SpinorField::new(values, 2, grid.dx());
                f.normalize();
                Ok(f)
            }
            Probe::HomEigenvector { k } => {
                hom_pairs
                    .get(k.wrapping_sub(1))
                    .map(|p| p.vector.clone())
                    .ok_or_else(|| {
                        Error::Experiment(format!(
                            "probe asks for gap eigenvector {k} but the limit operator has {}",
                            hom_pairs.len()
                        ))
                    })
            }
        }
    }
}

/// Which subspace the resolvents act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Subspace {
    /// Whole space; requires `A + λ` positive definite.
    Full,
    /// Span of the gap eigenvectors, where the shifted operator is positive.
    #[default]
    Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSetup {
    pub grid: Grid1D,
    pub spec: PotentialSpec,
    pub h_list: Vec<u32>,
    /// Gap window `(δ, 2 - δ)` of the shifted operator.
    pub window: (f64, f64),
    pub k_max: usize,
    pub tol: f64,
    pub shifts: Vec<f64>,
    pub probes: Vec<Probe>,
    pub subspace: Subspace,
}

impl SweepSetup {
    pub fn new(grid: Grid1D, spec: PotentialSpec, h_list: Vec<u32>) -> Self {
        SweepSetup {
            grid,
            spec,
            h_list,
            window: (0.05, 1.95),
            k_max: 4,
            tol: 1e-9,
            shifts: vec![0.5, 1.0, 2.0],
            probes: Probe::default_library(),
            subspace: Subspace::Point,
        }
    }

    pub fn with_edge_buffer(mut self, delta: f64) -> Self {
        self.window = (delta, 2.0 - delta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.h_list.is_empty() {
            return Err(Error::config("h_list", "must not be empty"));
        }
        if self.h_list.windows(2).any(|w| w[1] <= w[0]) || self.h_list[0] == 0 {
            return Err(Error::config("h_list", "must be positive and strictly increasing"));
        }
        let (a, b) = self.window;
        if !(a > 0.0 && b < 2.0 && a < b) {
            return Err(Error::config(
                "window",
                format!("({a}, {b}) must lie inside the gap (0, 2)"),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::config("tol", "must be positive"));
        }
        if self.shifts.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::config("shifts", "every shift must be positive and finite"));
        }
        Ok(())
    }
}

/// One resolvent-action discrepancy `||(A_h + λ)^{-1} f - (A + λ)^{-1} f||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventSample {
    pub shift: f64,
    pub probe: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub h: u32,
    pub gap_eigs: Vec<f64>,
    pub hom_gap_eigs: Vec<f64>,
    /// `|λ_h^k - λ^k|` for the indices present in both lists.
    pub eig_errors: Vec<f64>,
    pub resolvent_discrepancy: Vec<ResolventSample>,
    /// `sup ||K_h u - K u||` over the unit vectors of the k-th limit eigenspace.
    pub inverse_gap_discrepancy: Vec<f64>,
    /// Eigenspace dimension differs from the limit's, per k.
    pub multiplicity_change: Vec<bool>,
    /// Adjacent limit eigenvalues are closer than twice the largest error.
    pub clustered: bool,
    pub edge_warning: bool,
}

/// Gap eigenpairs of one operator.
#[derive(Debug, Clone)]
pub struct Level {
    pub pairs: Vec<EigenPair>,
    pub edge_warning: bool,
}

#[derive(Debug, Clone)]
pub struct GapSweep {
    pub setup: SweepSetup,
    pub hom: Level,
    pub records: Vec<ConvergenceRecord>,
    /// Gap eigenpairs per h, aligned with `records`.
    pub levels: Vec<Level>,
    /// Least-squares slope of `log |λ_h^k - λ^k|` against `log h`, per k.
    pub fitted_rates: Vec<Option<f64>>,
}

fn solve_level(op: &HermitianOperator, setup: &SweepSetup) -> Result<Level> {
    let res = interior_eigs(op, setup.window, POINT_CAP, setup.tol)?;
    if res.truncated {
        return Err(Error::Experiment(format!(
            "more than {POINT_CAP} eigenvalues in the gap window; narrow the window"
        )));
    }
    Ok(Level {
        pairs: res.pairs,
        edge_warning: res.edge_warning,
    })
}

/// `sum_k <v_k, f> / (μ_k + λ) v_k`, the resolvent of the point restriction.
pub fn point_resolvent(pairs: &[EigenPair], f: &SpinorField, shift: f64) -> SpinorField {
    let mut out = f.scaled(Complex64::new(0.0, 0.0));
    for p in pairs {
        let c = p.vector.dot(f) / (p.value + shift);
        out.axpy(c, &p.vector);
    }
    out
}

/// `K_h u` with `K_h` the inverse of the point restriction.
pub fn point_inverse(pairs: &[EigenPair], u: &SpinorField) -> SpinorField {
    let mut out = u.scaled(Complex64::new(0.0, 0.0));
    for p in pairs {
        let c = p.vector.dot(u) / p.value;
        out.axpy(c, &p.vector);
    }
    out
}

/// Groups ascending eigenvalues into eigenspaces; returns index ranges.
pub fn eigenspaces(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split =
            i == values.len() || (values[i] - values[start]).abs() > EIGENSPACE_TOL * values[start].abs().max(1.0);
        if split {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// `sup ||K_h u - K u||` over unit `u` in the span of `space` (orthonormal
/// eigenvectors of the limit with eigenvalues `values`): the largest singular
/// value of `(K_h - K)` on that span, so it is invariant under phases and
/// rotations of the basis.
pub fn inverse_discrepancy(h_pairs: &[EigenPair], space: &[SpinorField], values: &[f64]) -> f64 {
    let images: Vec<SpinorField> = space
        .iter()
        .zip(values)
        .map(|(u, mu)| {
            let mut w = point_inverse(h_pairs, u);
            w.axpy(Complex64::new(-1.0 / mu, 0.0), u);
            w
        })
        .collect();
    let m = images.len();
    if m == 1 {
        return images[0].norm();
    }
    let mut gram = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = images[i].dot(&images[j]);
        }
    }
    let gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .fold(0.0_f64, |a, b| a.max(*b))
        .max(0.0)
        .sqrt()
}

/// Least-squares slope of `log y` against `log x` over the positive `y`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Each entry at most the previous one plus `tol`.
pub fn decreasing_within(seq: &[f64], tol: f64) -> bool {
    seq.windows(2).all(|w| w[1] <= w[0] + tol)
}

/// Terminal value below `max(1e-6, 1e-3 |quantity|)` and monotone after the first entry.
pub fn converged(seq: &[f64], quantity: f64) -> bool {
    let Some(last) = seq.last() else {
        return false;
    };
    let tail = if seq.len() > 1 { &seq[1..] } else { seq };
    *last <= (1e-3 * quantity.abs()).max(1e-6) && decreasing_within(tail, 0.0)
}

fn run(setup: &SweepSetup, require_gap: bool) -> Result<GapSweep> {
    setup.validate()?;
    let hom_op = assemble_homogenized(&setup.grid, &setup.spec)?;
    let hom = solve_level(&hom_op, setup)?;
    if require_gap && setup.k_max > 0 && hom.pairs.is_empty() {
        return Err(Error::Experiment(
            "the homogenized operator has no eigenvalue in the gap window; increase Z".into(),
        ));
    }
    let probes: Vec<SpinorField> = setup
        .probes
        .iter()
        .map(|p| p.realize(&setup.grid, &hom.pairs))
        .collect::<Result<_>>()?;
    // Limit resolvent actions, shared by every h.
    let hom_actions = resolvent_actions(&hom_op, &hom, setup, &probes)?;

    let mut levels: Vec<(u32, Level, ConvergenceRecord)> = setup
        .h_list
        .par_iter()
        .map(|&h| {
            let op = assemble_dirac_1d(&setup.grid, &setup.spec.with_h(h), true)?;
            let level = solve_level(&op, setup)?;
            let actions = resolvent_actions(&op, &level, setup, &probes)?;
            let record = build_record(h, &level, &hom, setup, &actions, &hom_actions);
            Ok((h, level, record))
        })
        .collect::<Result<_>>()?;
    levels.sort_by_key(|(h, _, _)| *h);

    let records: Vec<ConvergenceRecord> = levels.iter().map(|(_, _, r)| r.clone()).collect();
    let kmax = records.iter().map(|r| r.eig_errors.len()).max().unwrap_or(0);
    let hs: Vec<f64> = records.iter().map(|r| r.h as f64).collect();
    let fitted_rates = (0..kmax)
        .map(|k| {
            let errs: Vec<f64> = records
                .iter()
                .map(|r| r.eig_errors.get(k).copied().unwrap_or(f64::NAN))
                .collect();
            fit_loglog(&hs, &errs)
        })
        .collect();
    Ok(GapSweep {
        setup: setup.clone(),
        hom,
        records,
        levels: levels.into_iter().map(|(_, l, _)| l).collect(),
        fitted_rates,
    })
}

/// `(A + λ)^{-1} f` for every shift and probe, in the configured subspace.
fn resolvent_actions(
    op: &HermitianOperator,
    level: &Level,
    setup: &SweepSetup,
    probes: &[SpinorField],
) -> Result<Vec<SpinorField>> {
    let mut out = Vec::with_capacity(setup.shifts.len() * probes.len());
    for &shift in &setup.shifts {
        match setup.subspace {
            Subspace::Point => {
                for f in probes {
                    out.push(point_resolvent(&level.pairs, f, shift));
                }
            }
            Subspace::Full => {
                let r = Resolvent::new(op, shift, RESOLVENT_TOL)?;
                for f in probes {
                    out.push(r.solve(f)?);
                }
            }
        }
    }
    Ok(out)
}

fn build_record(
    h: u32,
    level: &Level,
    hom: &Level,
    setup: &SweepSetup,
    actions: &[SpinorField],
    hom_actions: &[SpinorField],
) -> ConvergenceRecord {
    let gap_eigs: Vec<f64> = level.pairs.iter().take(setup.k_max).map(|p| p.value).collect();
    let hom_gap_eigs: Vec<f64> = hom.pairs.iter().take(setup.k_max).map(|p| p.value).collect();
    let eig_errors: Vec<f64> = gap_eigs.iter().zip(&hom_gap_eigs).map(|(a, b)| (a - b).abs()).collect();

    let np = setup.probes.len();
    let resolvent_discrepancy = actions
        .iter()
        .zip(hom_actions)
        .enumerate()
        .map(|(i, (a, b))| ResolventSample {
            shift: setup.shifts[i / np.max(1)],
            probe: i % np.max(1),
            value: a.sub(b).norm(),
        })
        .collect();

    let hom_values: Vec<f64> = hom.pairs.iter().map(|p| p.value).collect();
    let h_values: Vec<f64> = level.pairs.iter().map(|p| p.value).collect();
    let hom_spaces = eigenspaces(&hom_values);
    let h_spaces = eigenspaces(&h_values);
    let mut inverse_gap_discrepancy = Vec::with_capacity(eig_errors.len());
    let mut multiplicity_change = Vec::with_capacity(eig_errors.len());
    for k in 0..eig_errors.len() {
        let space = hom_spaces.iter().find(|r| r.contains(&k)).expect("k is covered");
        let vecs: Vec<SpinorField> = hom.pairs[space.clone()].iter().map(|p| p.vector.clone()).collect();
        inverse_gap_discrepancy.push(inverse_discrepancy(&level.pairs, &vecs, &hom_values[space.clone()]));
        let h_dim = h_spaces.iter().find(|r| r.contains(&k)).map_or(0, |r| r.len());
        multiplicity_change.push(h_dim != space.len());
    }

    let max_err = eig_errors.iter().copied().fold(0.0, f64::max);
    let clustered = hom_values
        .windows(2)
        .take(setup.k_max.max(1))
        .any(|w| w[1] - w[0] <= 2.0 * max_err);
    ConvergenceRecord {
        h,
        gap_eigs,
        hom_gap_eigs,
        eig_errors,
        resolvent_discrepancy,
        inverse_gap_discrepancy,
        multiplicity_change,
        clustered,
        edge_warning: level.edge_warning || hom.edge_warning,
    }
}

/// Gap eigenvalues of `H_h` over the sweep, matched to the limit by ascending
/// index, with resolvent discrepancies and inverse-operator discrepancies.
pub fn gap_sweep(setup: &SweepSetup) -> Result<GapSweep> {
    run(setup, true)
}

/// Resolvent-action discrepancies for one shift and one probe across h.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrsSeries {
    pub shift: f64,
    pub probe: usize,
    pub h: Vec<u32>,
    pub discrepancy: Vec<f64>,
    pub decreasing: bool,
    pub initial: f64,
    pub terminal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrsReport {
    pub subspace: Subspace,
    pub series: Vec<SrsSeries>,
}

impl SrsReport {
    pub fn all_decreasing(&self) -> bool {
        self.series.iter().all(|s| s.decreasing)
    }
}

/// Strong-resolvent convergence study: `||(A_h + λ)^{-1} f - (A + λ)^{-1} f||`
/// over h, with `A` the homogenized operator.
pub fn srs_study(setup: &SweepSetup) -> Result<SrsReport> {
    let sweep = run(setup, false)?;
    Ok(srs_from_sweep(&sweep))
}

pub fn srs_from_sweep(sweep: &GapSweep) -> SrsReport {
    let setup = &sweep.setup;
    let np = setup.probes.len();
    let mut series = Vec::new();
    for (si, &shift) in setup.shifts.iter().enumerate() {
        for probe in 0..np {
            let idx = si * np + probe;
            let d: Vec<f64> = sweep
                .records
                .iter()
                .map(|r| r.resolvent_discrepancy[idx].value)
                .collect();
            series.push(SrsSeries {
                shift,
                probe,
                h: sweep.records.iter().map(|r| r.h).collect(),
                decreasing: decreasing_within(&d, DECREASE_TOL),
                initial: d.first().copied().unwrap_or(0.0),
                terminal: d.last().copied().unwrap_or(0.0),
                discrepancy: d,
            });
        }
    }
    SrsReport {
        subspace: setup.subspace,
        series,
    }
}

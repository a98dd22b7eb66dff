//! Crank–Nicolson propagation `u_{n+1} = (I + i dt/2 A)^{-1} (I - i dt/2 A) u_n`
//! and the comparison of oscillating and homogenized dynamics.
//!
//! The Cayley transform of a Hermitian matrix is unitary, so norms and
//! energies are conserved up to the accuracy of the banded solve.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirac::assemble_dirac_1d;
use crate::eigen::{dense_eigh, interior_eigs};
use crate::error::{Error, Result};
use crate::factor::BandLu;
use crate::grid::SpinorField;
use crate::homogenization::{assemble_homogenized, decreasing_within, SweepSetup, DECREASE_TOL, POINT_CAP};
use crate::operator::HermitianOperator;
use crate::spectral::{continuous_split, decompose, restrict, DecomposeMode, Projector};

/// Default time step; the scheme is implicit, so it is not tied to the grid.
pub const DEFAULT_DT: f64 = 0.01;

/// Relative size below which a projected initial state counts as annihilated.
pub const ANNIHILATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub steps: usize,
    pub u0: SpinorField,
    /// Keep every `record_every`-th state (0 keeps only the final state).
    pub record_every: usize,
}

impl EvolutionConfig {
    pub fn new(dt: f64, steps: usize, u0: SpinorField) -> Self {
        EvolutionConfig {
            dt,
            steps,
            u0,
            record_every: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("evolution.dt", "must be positive and finite"));
        }
        if !self.u0.is_finite() || self.u0.norm() == 0.0 {
            return Err(Error::config("evolution.u0", "must be finite and nonzero"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    /// `||u_n||` for `n = 0..=steps`.
    pub norms: Vec<f64>,
    /// `<u_n, A u_n>` for `n = 0..=steps`.
    pub energies: Vec<f64>,
    /// `(n, u_n)` at the recorded steps.
    pub snapshots: Vec<(usize, SpinorField)>,
    pub last: SpinorField,
}

impl Trajectory {
    /// `max |‖u_n‖ / ‖u_0‖ - 1|`.
    pub fn norm_drift(&self) -> f64 {
        let n0 = self.norms[0];
        self.norms.iter().map(|n| (n / n0 - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `max |E_n - E_0| / max(|E_0|, ‖A‖-free floor 1e-300)`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        let scale = e0.abs().max(f64::MIN_POSITIVE);
        self.energies.iter().map(|e| (e - e0).abs() / scale).fold(0.0, f64::max)
    }
}

fn energy(a: &HermitianOperator, u: &SpinorField) -> Result<f64> {
    Ok(u.dot(&a.apply(u)?).re)
}

/// One factorization of `I + i dt/2 A`, reused for every step.
pub struct CrankNicolson<'a> {
    a: &'a HermitianOperator,
    half: Complex64,
    lu: BandLu,
}

impl<'a> CrankNicolson<'a> {
    pub fn new(a: &'a HermitianOperator, dt: f64) -> Result<Self> {
        let half = Complex64::new(0.0, 0.5 * dt);
        let lu = BandLu::new(a, Complex64::new(1.0, 0.0), half)?;
        Ok(CrankNicolson { a, half, lu })
    }

    pub fn step(&self, u: &SpinorField) -> Result<SpinorField> {
        let mut rhs = self.a.apply(u)?;
        rhs.scale(-self.half);
        rhs.axpy(Complex64::new(1.0, 0.0), u);
        let mut out = rhs.into_values();
        self.lu.solve_in_place(&mut out);
        Ok(SpinorField::new(out, u.components(), u.weight()))
    }
}

pub fn propagate(a: &HermitianOperator, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if cfg.u0.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: cfg.u0.len(),
        });
    }
    let cn = CrankNicolson::new(a, cfg.dt)?;
    let mut u = cfg.u0.clone();
    let mut norms = vec![u.norm()];
    let mut energies = vec![energy(a, &u)?];
    let mut snapshots = Vec::new();
    if cfg.record_every > 0 {
        snapshots.push((0, u.clone()));
    }
    for n in 1..=cfg.steps {
        u = cn.step(&u)?;
        if !u.is_finite() {
            return Err(Error::Solver {
                reason: "non-finite state".into(),
                iterations: n,
                residual: f64::NAN,
            });
        }
        norms.push(u.norm());
        energies.push(energy(a, &u)?);
        if cfg.record_every > 0 && n % cfg.record_every == 0 {
            snapshots.push((n, u.clone()));
        }
    }
    Ok(Trajectory {
        dt: cfg.dt,
        norms,
        energies,
        snapshots,
        last: u,
    })
}

/// `||(u_1 - u_0)/dt + i A u_0||` after one step.
pub fn generator_defect(a: &HermitianOperator, u0: &SpinorField, dt: f64) -> Result<f64> {
    let u1 = CrankNicolson::new(a, dt)?.step(u0)?;
    let mut d = u1.sub(u0).scaled(Complex64::new(1.0 / dt, 0.0));
    d.axpy(Complex64::new(0.0, 1.0), &a.apply(u0)?);
    Ok(d.norm())
}

/// Which generator the dynamics runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsSubspace {
    /// Full operators on the whole space.
    #[default]
    Full,
    /// Point restrictions to the gap eigenvectors.
    Point,
    /// Restrictions to the above-gap surrogate (dense decomposition).
    Plus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsReport {
    pub subspace: DynamicsSubspace,
    pub t_final: f64,
    pub dt: f64,
    pub steps: usize,
    pub h_list: Vec<u32>,
    /// `||u_h(T) - u_hom(T)||` per h.
    pub deviations: Vec<f64>,
    /// `max_n | ||u_n|| / ||u_0|| - 1 |` per h.
    pub norm_drift: Vec<f64>,
    pub decreasing: bool,
}

/// Evolution of `P u0` under the restriction of `a` to the span of `p`,
/// returned in the full space.
fn restricted_evolution(
    a: &HermitianOperator,
    p: &Projector,
    u0: &SpinorField,
    dt: f64,
    steps: usize,
) -> Result<(SpinorField, f64)> {
    let c0 = p.compress(u0);
    if c0.norm() < ANNIHILATION_TOL * u0.norm() {
        return Err(Error::Experiment(
            "projection onto the selected subspace annihilates the initial state".into(),
        ));
    }
    let r = restrict(a, p, false)?;
    let traj = propagate(&r.operator, &EvolutionConfig::new(dt, steps, c0))?;
    let drift = traj.norm_drift();
    Ok((p.lift(&traj.last), drift))
}

fn evolve_with(
    a: &HermitianOperator,
    subspace: DynamicsSubspace,
    window: (f64, f64),
    u0: &SpinorField,
    dt: f64,
    steps: usize,
) -> Result<(SpinorField, f64)> {
    match subspace {
        DynamicsSubspace::Full if steps == 0 => Ok((u0.clone(), 0.0)),
        DynamicsSubspace::Full => {
            let traj = propagate(a, &EvolutionConfig::new(dt, steps, u0.clone()))?;
            let drift = traj.norm_drift();
            Ok((traj.last, drift))
        }
        _ => evolve_projected(a, subspace, window, u0, dt, steps),
    }
}

fn evolve_projected(
    a: &HermitianOperator,
    subspace: DynamicsSubspace,
    window: (f64, f64),
    u0: &SpinorField,
    dt: f64,
    steps: usize,
) -> Result<(SpinorField, f64)> {
    let p = match subspace {
        DynamicsSubspace::Point => {
            let res = interior_eigs(a, window, POINT_CAP, 1e-10)?;
            let basis = res.pairs.into_iter().map(|p| p.vector).collect();
            Projector::new(basis, a.dim(), a.components(), a.weight())
        }
        DynamicsSubspace::Plus => {
            let dec = decompose(a, DecomposeMode::Dense)?;
            continuous_split(&dec).1
        }
        DynamicsSubspace::Full => unreachable!("handled by the caller"),
    };
    if steps == 0 {
        let c0 = p.compress(u0);
        if c0.norm() < ANNIHILATION_TOL * u0.norm() {
            return Err(Error::Experiment(
                "projection onto the selected subspace annihilates the initial state".into(),
            ));
        }
        return Ok((p.lift(&c0), 0.0));
    }
    restricted_evolution(a, &p, u0, dt, steps)
}

/// Deviations `||u_h(T) - u_hom(T)||` over the sweep's h values, with the same
/// grid, time step and initial state for every generator.
pub fn dynamics_homogenization(
    setup: &SweepSetup,
    u0: &SpinorField,
    dt: f64,
    t_final: f64,
    subspace: DynamicsSubspace,
) -> Result<DynamicsReport> {
    setup.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config("evolution.dt", "must be positive and finite"));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::config("evolution.T", "must be nonnegative and finite"));
    }
    if !u0.is_finite() || u0.norm() == 0.0 {
        return Err(Error::config("evolution.u0", "must be finite and nonzero"));
    }
    let steps = (t_final / dt).round() as usize;
    let dt_eff = if steps > 0 { t_final / steps as f64 } else { dt };
    let hom_op = assemble_homogenized(&setup.grid, &setup.spec)?;
    if u0.len() != hom_op.dim() {
        return Err(Error::DimensionMismatch {
            expected: hom_op.dim(),
            got: u0.len(),
        });
    }
    let (u_hom, _) = evolve_with(&hom_op, subspace, setup.window, u0, dt_eff, steps)?;
    let mut rows: Vec<(u32, f64, f64)> = setup
        .h_list
        .par_iter()
        .map(|&h| {
            let op = assemble_dirac_1d(&setup.grid, &setup.spec.with_h(h), true)?;
            let (u_h, drift) = evolve_with(&op, subspace, setup.window, u0, dt_eff, steps)?;
            Ok((h, u_h.sub(&u_hom).norm(), drift))
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.0);
    let deviations: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(DynamicsReport {
        subspace,
        t_final,
        dt: dt_eff,
        steps,
        h_list: rows.iter().map(|r| r.0).collect(),
        decreasing: decreasing_within(&deviations, DECREASE_TOL),
        norm_drift: rows.iter().map(|r| r.2).collect(),
        deviations,
    })
}

/// Phase error `|arg(<v, u(T)>) + μ T|` of an eigenvector of `a` propagated to `T`.
pub fn eigenphase_error(a: &HermitianOperator, index: usize, t_final: f64, dt: f64) -> Result<f64> {
    let dec = dense_eigh(a)?;
    let (mu, v) = dec
        .values
        .get(index)
        .zip(dec.vectors.get(index))
        .ok_or_else(|| Error::config("index", format!("operator has no eigenvalue {index}")))?;
    let steps = (t_final / dt).round() as usize;
    let traj = propagate(
        a,
        &EvolutionConfig::new(t_final / steps.max(1) as f64, steps, v.clone()),
    )?;
    let z = v.dot(&traj.last) * Complex64::from_polar(1.0, mu * t_final);
    Ok(z.arg().abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::{Coupling, FourierProfile, PotentialSpec};
    use crate::grid::Grid1D;
    use crate::homogenization::Probe;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_level(mu: [f64; 2], theta: f64) -> HermitianOperator {
        // Q diag(mu) Q^* with a real rotation Q.
        let (c, s) = (theta.cos(), theta.sin());
        let q = [[c, -s], [s, c]];
        let entry = |i: usize, j: usize| q[i][0] * mu[0] * q[j][0] + q[i][1] * mu[1] * q[j][1];
        let m = DMatrix::from_fn(2, 2, |i, j| Complex64::new(entry(i.min(j), i.max(j)), 0.0));
        HermitianOperator::from_dense(&m, 1.0, 0.0).unwrap()
    }

    #[test]
    fn zero_generator_is_the_identity() {
        let a = HermitianOperator::zero(6, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u0 = SpinorField::random(&mut rng, 6, 2, 0.5);
        let traj = propagate(&a, &EvolutionConfig::new(0.1, 25, u0.clone())).unwrap();
        assert_eq!(traj.last.values(), u0.values());
    }

    #[test]
    fn norm_and_energy_are_conserved_over_a_thousand_steps() {
        let grid = Grid1D::new(10.0, 400).unwrap();
        let spec = PotentialSpec {
            z: 0.4,
            g: 0.1,
            v2: FourierProfile::new(1.0, vec![0.5], vec![]),
            h: 8,
            epsilon_reg: Some(0.5),
            coupling: Coupling::Scalar,
        };
        let a = assemble_dirac_1d(&grid, &spec, true).unwrap();
        let u0 = Probe::gaussian(0.0, 1.0, [1.0, 0.0], [0.0, 0.5])
            .realize(&grid, &[])
            .unwrap();
        let traj = propagate(&a, &EvolutionConfig::new(0.01, 1000, u0)).unwrap();
        assert!(traj.norm_drift() <= 1e-10, "{}", traj.norm_drift());
        assert!(traj.energy_drift() <= 1e-8, "{}", traj.energy_drift());
    }

    #[test]
    fn mixed_state_follows_the_exact_rotation() {
        let a = two_level([0.3, 1.7], 0.4);
        let u0 = SpinorField::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], 1, 1.0);
        // Closed form: exp(-iAT) via the rotation that diagonalizes A.
        let t = 2.0;
        let (c, s) = (0.4f64.cos(), 0.4f64.sin());
        let coeff = [c, -s];
        let q = [[c, -s], [s, c]];
        let exact: Vec<Complex64> = (0..2)
            .map(|i| {
                (0..2)
                    .map(|k| Complex64::from_polar(q[i][k] * coeff[k], -[0.3, 1.7][k] * t))
                    .sum()
            })
            .collect();
        let err = |steps: usize| {
            let traj = propagate(&a, &EvolutionConfig::new(t / steps as f64, steps, u0.clone())).unwrap();
            traj.last
                .values()
                .iter()
                .zip(&exact)
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let ratio = err(200) / err(400);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn eigenphase_error_is_second_order() {
        let a = two_level([0.6, 1.4], 0.9);
        let e1 = eigenphase_error(&a, 1, 1.0, 0.02).unwrap();
        let e2 = eigenphase_error(&a, 1, 1.0, 0.01).unwrap();
        // Per step the Cayley phase is 2 atan(μ dt / 2) = μ dt - (μ dt)^3 / 12 + ...
        let oracle = |dt: f64| {
            let steps = (1.0 / dt).round();
            (steps * 2.0 * (1.4 * dt / 2.0).atan() - 1.4).abs()
        };
        assert!((e1 - oracle(0.02)).abs() < 1e-12);
        assert!((e1 / e2 - 4.0).abs() < 0.05);
    }

    #[test]
    fn generator_defect_is_first_order() {
        let a = two_level([0.5, 2.0], 0.3);
        let u0 = SpinorField::new(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)], 1, 1.0);
        let d: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|dt| generator_defect(&a, &u0, *dt).unwrap())
            .collect();
        let slope = crate::homogenization::fit_loglog(&[0.04, 0.02, 0.01], &d).unwrap();
        assert!((0.8..=1.5).contains(&slope), "slope {slope}");
    }

    fn dyn_setup(v2: FourierProfile, hs: Vec<u32>) -> SweepSetup {
        let spec = PotentialSpec {
            z: 0.4,
            g: 0.1,
            v2,
            h: 1,
            epsilon_reg: Some(0.5),
            coupling: Coupling::Scalar,
        };
        SweepSetup::new(Grid1D::new(8.0, 1600).unwrap(), spec, hs)
    }

    fn probe(setup: &SweepSetup) -> SpinorField {
        Probe::gaussian(0.5, 0.7, [1.0, 0.0], [0.0, 0.4])
            .realize(&setup.grid, &[])
            .unwrap()
    }

    #[test]
    fn constant_profile_gives_identical_dynamics() {
        let s = dyn_setup(FourierProfile::constant(1.0), vec![2, 4, 8]);
        let rep = dynamics_homogenization(&s, &probe(&s), 0.01, 0.5, DynamicsSubspace::Full).unwrap();
        assert!(rep.deviations.iter().all(|d| *d <= 1e-12), "{:?}", rep.deviations);
    }

    #[test]
    fn zero_time_gives_zero_deviation() {
        let s = dyn_setup(FourierProfile::new(1.0, vec![0.5], vec![]), vec![2, 4]);
        let rep = dynamics_homogenization(&s, &probe(&s), 0.01, 0.0, DynamicsSubspace::Full).unwrap();
        assert_eq!(rep.steps, 0);
        assert!(rep.deviations.iter().all(|d| *d == 0.0));
    }

    #[test]
    fn oscillating_dynamics_approach_the_homogenized_ones() {
        let s = dyn_setup(FourierProfile::new(1.0, vec![0.5], vec![]), vec![2, 4, 8, 16]);
        let rep = dynamics_homogenization(&s, &probe(&s), 0.01, 1.0, DynamicsSubspace::Full).unwrap();
        assert!(rep.decreasing, "{:?}", rep.deviations);
    }

    #[test]
    fn point_dynamics_reject_an_orthogonal_initial_state() {
        let s = dyn_setup(FourierProfile::constant(1.0), vec![2, 4]);
        // A state far from the well has no overlap with the bound states.
        let mut u0 = SpinorField::on_grid(&s.grid);
        u0.values_mut()[0] = Complex64::new(1.0, 0.0);
        let hom = assemble_homogenized(&s.grid, &s.spec).unwrap();
        let pairs = interior_eigs(&hom, s.window, POINT_CAP, 1e-10).unwrap().pairs;
        for p in &pairs {
            let c = p.vector.dot(&u0);
            u0.axpy(-c, &p.vector);
        }
        assert!(matches!(
            dynamics_homogenization(&s, &u0, 0.01, 0.2, DynamicsSubspace::Point),
            Err(Error::Experiment(msg)) if msg.contains("annihilates")
        ));
    }

    #[test]
    fn point_dynamics_are_unitary_phases() {
        let s = dyn_setup(FourierProfile::new(1.0, vec![0.5], vec![]), vec![4, 8]);
        let rep = dynamics_homogenization(&s, &probe(&s), 0.01, 1.0, DynamicsSubspace::Point).unwrap();
        assert!(rep.norm_drift.iter().all(|d| *d <= 1e-12));
        assert!(rep.decreasing, "{:?}", rep.deviations);
    }
}

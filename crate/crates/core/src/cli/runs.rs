//! Experiment runners behind the subcommands. They return plain data so the
//! acceptance suite can call them without going through files.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::experiment::{Experiment, ModelKind};
use crate::discrepancy::{delta_neighborhood, NeighborhoodSample};
use crate::error::{Error, Result};
use crate::grid_solver::{initialize_vortex, recentered_difference, run, GridState, RunOptions, RunRecord};
use crate::model::{Mat2, PhysicalParams};
use crate::potential::{master_residual, Residual, VortexSpec};
use crate::sphere::{spherical_master_residual, steady_momentum_residual, Profile, SphericalVortexSpec};
use crate::trajectory::{
    closed_form_lplane, integrate, path_length, sample_times, TrajectoryProblem, TrajectoryState,
};

pub struct TrajectoryRun {
    pub problem: TrajectoryProblem,
    pub states: Vec<TrajectoryState>,
    /// Analytic path at the same times and its largest position deviation
    /// from the numeric one.
    pub closed_form: Option<(Vec<TrajectoryState>, f64)>,
}

pub fn run_trajectory(e: &Experiment, with_closed_form: bool) -> Result<TrajectoryRun> {
    let problem = e.trajectory_problem()?;
    let times = sample_times(&problem, e.samples);
    let states = integrate(&problem, e.tolerances()?, &times)?;
    let closed_form = if with_closed_form {
        if e.coriolis != ModelKind::L {
            return Err(Error::Unsupported("the closed form exists on the l-plane only".into()));
        }
        let exact = closed_form_lplane(&problem)?.states_at(&times);
        let dev = states
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a.x[0] - b.x[0]).hypot(a.x[1] - b.x[1]))
            .fold(0.0, f64::max);
        Some((exact, dev))
    } else {
        None
    };
    Ok(TrajectoryRun {
        problem,
        states,
        closed_form,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonRow {
    pub t: f64,
    pub l: [f64; 2],
    pub beta: [f64; 2],
    pub separation: f64,
    /// Path length of the l-plane track up to `t`.
    pub path_length: f64,
}

impl ComparisonRow {
    /// Separation relative to the path length traversed; 0 before any
    /// motion.
    pub fn relative(&self) -> f64 {
        if self.path_length > 0.0 {
            self.separation / self.path_length
        } else {
            0.0
        }
    }
}

pub const COMPARISON_HEADER: &str = "t,x1_l,x2_l,x1_beta,x2_beta,separation,path_length,relative";

/// Same settings on the l-plane and the β-plane, sampled at common times.
pub fn compare_planes(e: &Experiment) -> Result<Vec<ComparisonRow>> {
    if e.coriolis == ModelKind::Sphere {
        return Err(Error::Unsupported("compare runs the two plane models".into()));
    }
    let l = run_trajectory(&e.with_model(ModelKind::L), false)?.states;
    let b = run_trajectory(&e.with_model(ModelKind::Beta), false)?.states;
    let mut path = 0.0;
    let mut rows = Vec::with_capacity(l.len());
    for (k, (sl, sb)) in l.iter().zip(&b).enumerate() {
        if k > 0 {
            path += path_length(&l[k - 1..=k]);
        }
        rows.push(ComparisonRow {
            t: sl.t,
            l: sl.x,
            beta: sb.x,
            separation: (sl.x[0] - sb.x[0]).hypot(sl.x[1] - sb.x[1]),
            path_length: path,
        });
    }
    Ok(rows)
}

pub fn write_comparison_csv<W: std::io::Write>(rows: &[ComparisonRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{COMPARISON_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.t,
            r.l[0],
            r.l[1],
            r.beta[0],
            r.beta[1],
            r.separation,
            r.path_length,
            r.relative()
        )?;
    }
    w.flush()
}

pub fn run_discrepancy(e: &Experiment) -> Result<(Vec<TrajectoryState>, Vec<NeighborhoodSample>)> {
    let problem = e.trajectory_problem()?;
    let states = integrate(&problem, e.tolerances()?, &sample_times(&problem, e.samples))?;
    let rows = delta_neighborhood(&problem, &states, e.delta, e.search_radius, e.grid_n, None)?;
    Ok((states, rows))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CenterRow {
    pub step: usize,
    pub t: f64,
    pub tracked: Option<[f64; 2]>,
    pub theory: TrajectoryState,
    pub mass: f64,
}

impl CenterRow {
    pub fn deviation(&self) -> Option<f64> {
        self.tracked
            .map(|p| (p[0] - self.theory.x[0]).hypot(p[1] - self.theory.x[1]))
    }
}

pub struct SimulationOutcome {
    pub initial: GridState,
    /// Ambient `π` level added at initialization.
    pub ambient_pi: f64,
    pub record: RunRecord,
    pub centers: Vec<CenterRow>,
    /// Largest tracked-vs-theory distance in grid cells (`dx`).
    pub max_deviation_cells: Option<f64>,
    /// Relative L₂ difference of the `π` anomaly, final vs initial,
    /// re-centered on the tracked displacement.
    pub shape_metric: Option<f64>,
    pub relative_mass_change: f64,
}

/// Grid run plus the theoretical center path of the same vortex, started
/// from the grid center with the ambient velocity.
pub fn simulate(e: &Experiment, keep_states: bool) -> Result<SimulationOutcome> {
    let setup = e.grid_setup()?;
    let relation = setup.config.relation;
    let (initial, ambient_pi) = initialize_vortex(setup.geometry, &setup.init, &setup.params, &relation)?;
    let opts = RunOptions {
        steps: e.steps,
        snapshot_every: e.snapshot_every.max(1).min(e.steps.max(1)),
        track: true,
        track_radius: (e.track_radius > 0.0).then_some(e.track_radius),
        keep_states,
    };
    let record = run(initial.clone(), &setup.config, &opts)?;

    let theory_problem = e.trajectory_problem()?.with_initial(
        TrajectoryState::new(0.0, setup.init.center, setup.init.ambient_velocity),
        record.final_state.time,
    )?;
    let times: Vec<f64> = record.snapshots.iter().map(|s| s.time).collect();
    let theory = integrate(&theory_problem, e.tolerances()?, &times)?;
    let centers: Vec<CenterRow> = record
        .snapshots
        .iter()
        .zip(&theory)
        .map(|(s, th)| CenterRow {
            step: s.step,
            t: s.time,
            tracked: s.center.map(|c| c.position),
            theory: *th,
            mass: s.mass,
        })
        .collect();
    let max_deviation_cells = centers
        .iter()
        .map(|c| c.deviation().map(|d| d / e.dx))
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.into_iter().fold(0.0, f64::max));

    let first = record.snapshots.first().and_then(|s| s.center);
    let last = record.snapshots.last().and_then(|s| s.center);
    let shape_metric = match (first, last) {
        (Some(a), Some(b)) => {
            let anomaly = |s: &GridState| -> Vec<f64> {
                s.pi_field(&relation).into_iter().map(|p| p - ambient_pi).collect()
            };
            let shift = [b.position[0] - a.position[0], b.position[1] - a.position[1]];
            Some(recentered_difference(
                &setup.geometry,
                &anomaly(&initial),
                &anomaly(&record.final_state),
                shift,
            ))
        }
        _ => None,
    };
    let m0 = initial.mass();
    let relative_mass_change = (record.final_state.mass() - m0) / m0;
    Ok(SimulationOutcome {
        initial,
        ambient_pi,
        record,
        centers,
        max_deviation_cells,
        shape_metric,
        relative_mass_change,
    })
}

pub const CENTER_HEADER: &str = "step,t,tracked_x1,tracked_x2,theory_x1,theory_x2,deviation_m,deviation_cells,mass";

pub fn write_center_csv<W: std::io::Write>(rows: &[CenterRow], dx: f64, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CENTER_HEADER}")?;
    for r in rows {
        let (tx, ty) = r.tracked.map_or((f64::NAN, f64::NAN), |p| (p[0], p[1]));
        let d = r.deviation().unwrap_or(f64::NAN);
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.step,
            r.t,
            tx,
            ty,
            r.theory.x[0],
            r.theory.x[1],
            d,
            d / dx,
            r.mass
        )?;
    }
    w.flush()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualStats {
    pub case: String,
    pub n_points: usize,
    pub max_residual: f64,
    pub rms_residual: f64,
}

impl ResidualStats {
    fn from_relative(case: &str, values: &[f64]) -> Self {
        let n = values.len();
        let max = values.iter().cloned().fold(0.0, f64::max);
        let rms = (values.iter().map(|v| v * v).sum::<f64>() / n.max(1) as f64).sqrt();
        ResidualStats {
            case: case.into(),
            n_points: n,
            max_residual: max,
            rms_residual: rms,
        }
    }
}

pub const RESIDUAL_HEADER: &str = "case,n_points,max_residual,rms_residual";

pub fn write_residual_csv<W: std::io::Write>(rows: &[ResidualStats], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{RESIDUAL_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{:e},{:e}", r.case, r.n_points, r.max_residual, r.rms_residual)?;
    }
    w.flush()
}

/// Relative residuals of the master equations (plane radial families,
/// spherical family members) and of the steady spherical momentum balance,
/// at `e.sphere_points` random points per case.
pub fn residual_checks(e: &Experiment) -> Result<Vec<ResidualStats>> {
    let n = e.sphere_points;
    if n == 0 {
        return Err(Error::param("sphere_points", "must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(e.seed);
    let params = e.params()?;
    let a = Mat2::coriolis(params.l0());
    let mut out = Vec::new();

    let plane: [(&str, VortexSpec); 3] = [
        ("plane_linear", VortexSpec::linear(3.5e-6)),
        ("plane_gaussian", VortexSpec::gaussian_trajectory_preset()),
        ("plane_power_law", VortexSpec::power_law_profile_figure_preset()),
    ];
    for (case, spec) in plane {
        let vals: Vec<f64> = (0..n)
            .map(|_| {
                let x = [rng.random_range(-5e5..5e5), rng.random_range(-5e5..5e5)];
                master_residual(&spec, &a, x).relative()
            })
            .collect();
        out.push(ResidualStats::from_relative(case, &vals));
    }

    let chart = |rng: &mut ChaCha8Rng| (rng.random_range(-PI..PI), rng.random_range(-1.4..1.4));
    let sphere_cases: [(&str, fn(&mut ChaCha8Rng) -> SphericalVortexSpec); 5] = [
        ("sphere_b_member", |r| SphericalVortexSpec::b_member(r.random_range(-1.0..1.0))),
        ("sphere_zonal", |r| SphericalVortexSpec::zonal(r.random_range(-1.0..1.0))),
        ("sphere_identity", |r| random_member(r, Profile::Identity)),
        ("sphere_exp", |r| {
            let scale = r.random_range(0.2..2.0);
            random_member(r, Profile::Exp { scale })
        }),
        ("sphere_sin", |r| {
            let scale = r.random_range(0.2..2.0);
            random_member(r, Profile::Sin { scale })
        }),
    ];
    for (case, make) in sphere_cases {
        let vals: Vec<f64> = (0..n)
            .map(|_| {
                let spec = make(&mut rng);
                let (lam, phi) = chart(&mut rng);
                spherical_master_residual(&spec, lam, phi).relative()
            })
            .collect();
        out.push(ResidualStats::from_relative(case, &vals));
    }

    let still = PhysicalParams::derive(0.0, 1.0, params.phi0(), params.gamma3d(), params.state_const())?
        .with_c0(params.c0())?;
    let spinning = PhysicalParams::derive(1.0, 1.0, params.phi0(), params.gamma3d(), params.state_const())?
        .with_c0(params.c0())?;
    let momentum: [(&str, &PhysicalParams, bool); 3] = [
        ("momentum_b_member_nonrotating", &still, true),
        ("momentum_b_member_rotating", &spinning, true),
        ("momentum_zonal_rotating", &spinning, false),
    ];
    for (case, p, b_member) in momentum {
        let vals = (0..n)
            .map(|_| {
                let c = rng.random_range(-1.0..1.0);
                let spec = if b_member {
                    SphericalVortexSpec::b_member(c)
                } else {
                    SphericalVortexSpec::zonal(c)
                };
                let (lam, phi) = chart(&mut rng);
                let [r1, r2] = steady_momentum_residual(&spec, p, lam, phi)?;
                Ok(combined(r1, r2))
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(ResidualStats::from_relative(case, &vals));
    }
    Ok(out)
}

fn random_member(rng: &mut ChaCha8Rng, profile: Profile) -> SphericalVortexSpec {
    SphericalVortexSpec {
        a: rng.random_range(-1.0..1.0),
        b: rng.random_range(-1.0..1.0),
        h: rng.random_range(-1.0..1.0),
        profile,
    }
}

fn combined(r1: Residual, r2: Residual) -> f64 {
    r1.relative().max(r2.relative())
}

//! Vortex-center motion `Ẍ + l(X)LẊ + c₀∇π₁(t,·)|₀ = 0`.
//!
//! The l-plane case with a rotating linear slope has a closed form (two
//! superposed circular motions); everything else goes through an adaptive
//! Dormand–Prince integrator with dense output.

mod dopri;

use std::f64::consts::FRAC_PI_2;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::CoriolisModel;
use crate::potential::{BearingField, VortexSpec};
use crate::sphere::SphericalVortexSpec;

/// Plane speed cap, m/s.
pub const PLANE_SPEED_LIMIT: f64 = 1e3;
/// Sphere angular speed cap, rad/s.
pub const SPHERE_SPEED_LIMIT: f64 = 1.0;
/// Trajectories on the sphere must stay below this latitude.
pub const LATITUDE_CAP: f64 = FRAC_PI_2 - 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryState {
    pub t: f64,
    /// Position: meters on the plane, `(λ, φ)` radians on the sphere.
    pub x: [f64; 2],
    /// Velocity `dX/dt`.
    pub v: [f64; 2],
}

impl TrajectoryState {
    pub fn new(t: f64, x: [f64; 2], v: [f64; 2]) -> Self {
        TrajectoryState { t, x, v }
    }

    pub fn speed(&self) -> f64 {
        self.v[0].hypot(self.v[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    Plane,
    Sphere,
}

/// The vortex carried along the trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VortexModel {
    Plane(VortexSpec),
    Sphere(SphericalVortexSpec),
}

impl VortexModel {
    pub fn geometry(&self) -> Geometry {
        match self {
            VortexModel::Plane(_) => Geometry::Plane,
            VortexModel::Sphere(_) => Geometry::Sphere,
        }
    }

    /// Solid-body angular velocity at the vortex center.
    pub fn b0(&self) -> f64 {
        match self {
            VortexModel::Plane(s) => s.b0(),
            VortexModel::Sphere(s) => s.center_rate(),
        }
    }

    /// Vortex velocity at a point of the moving frame.
    pub fn velocity(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        match self {
            VortexModel::Plane(s) => Ok(s.velocity(x)),
            VortexModel::Sphere(s) => s.velocity(x[0], x[1]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryProblem {
    coriolis: CoriolisModel,
    bearing: BearingField,
    vortex: VortexModel,
    c0: f64,
    initial: TrajectoryState,
    horizon: f64,
}

impl TrajectoryProblem {
    /// `horizon` may be negative for backward integration.
    pub fn new(
        coriolis: CoriolisModel,
        bearing: BearingField,
        vortex: VortexModel,
        c0: f64,
        initial: TrajectoryState,
        horizon: f64,
    ) -> Result<Self> {
        let geometry = vortex.geometry();
        if coriolis.is_plane() != (geometry == Geometry::Plane) {
            return Err(Error::param(
                "coriolis",
                format!("{coriolis:?} does not match {geometry:?} geometry"),
            ));
        }
        if !c0.is_finite() {
            return Err(Error::param("c0", format!("must be finite, got {c0}")));
        }
        if !horizon.is_finite() {
            return Err(Error::param("horizon", format!("must be finite, got {horizon}")));
        }
        let s = initial;
        if !(s.t.is_finite() && s.x.iter().chain(&s.v).all(|c| c.is_finite())) {
            return Err(Error::param("initial", format!("non-finite state {s:?}")));
        }
        if geometry == Geometry::Sphere && !(s.x[1].abs() < LATITUDE_CAP) {
            return Err(Error::Domain(format!(
                "initial latitude {} rad beyond the chart cap {LATITUDE_CAP}",
                s.x[1]
            )));
        }
        Ok(TrajectoryProblem {
            coriolis,
            bearing,
            vortex,
            c0,
            initial,
            horizon,
        })
    }

    pub fn coriolis(&self) -> CoriolisModel {
        self.coriolis
    }
    pub fn bearing(&self) -> BearingField {
        self.bearing
    }
    pub fn vortex(&self) -> VortexModel {
        self.vortex
    }
    pub fn c0(&self) -> f64 {
        self.c0
    }
    pub fn initial(&self) -> TrajectoryState {
        self.initial
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn geometry(&self) -> Geometry {
        self.vortex.geometry()
    }
    pub fn t_end(&self) -> f64 {
        self.initial.t + self.horizon
    }

    pub fn with_initial(mut self, initial: TrajectoryState, horizon: f64) -> Result<Self> {
        self.initial = initial;
        self.horizon = horizon;
        Self::new(self.coriolis, self.bearing, self.vortex, self.c0, initial, horizon)
    }

    /// `∇π₁(t, ·)` at the vortex center.
    pub fn bearing_gradient_at_center(&self, t: f64) -> [f64; 2] {
        self.bearing.gradient_at_origin(t, self.vortex.b0())
    }

    fn speed_limit(&self) -> f64 {
        match self.geometry() {
            Geometry::Plane => PLANE_SPEED_LIMIT,
            Geometry::Sphere => SPHERE_SPEED_LIMIT,
        }
    }

    fn coriolis_unchecked(&self, x: [f64; 2]) -> f64 {
        match self.coriolis {
            CoriolisModel::LPlane { l0 } => l0,
            CoriolisModel::BetaPlane { l0, beta } => l0 + beta * x[1],
            CoriolisModel::Sphere { omega } => 2.0 * omega * x[1].sin(),
        }
    }

    /// Right-hand side for `y = (X₁, X₂, V₁, V₂)`.
    fn rhs(&self, t: f64, y: &[f64; 4]) -> [f64; 4] {
        let l = self.coriolis_unchecked([y[0], y[1]]);
        let m = self.bearing_gradient_at_center(t);
        [
            y[2],
            y[3],
            l * y[3] - self.c0 * m[0],
            -l * y[2] - self.c0 * m[1],
        ]
    }

    fn check_state(&self, y: &[f64; 4]) -> std::result::Result<(), String> {
        let speed = y[2].hypot(y[3]);
        if !(speed <= self.speed_limit()) {
            return Err(format!(
                "speed {speed:e} exceeds the bound {:e}",
                self.speed_limit()
            ));
        }
        if self.geometry() == Geometry::Sphere && !(y[1].abs() < LATITUDE_CAP) {
            return Err(format!(
                "latitude {} rad crossed the chart cap {LATITUDE_CAP}",
                y[1]
            ));
        }
        Ok(())
    }
}

/// Step-control tolerances of the numeric integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel: 1e-10,
            abs: 1e-8,
            max_steps: 50_000_000,
        }
    }
}

impl Tolerances {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if !(rel > 0.0) {
            return Err(Error::param("rel_tol", format!("must be > 0, got {rel}")));
        }
        if !(abs > 0.0) {
            return Err(Error::param("abs_tol", format!("must be > 0, got {abs}")));
        }
        Ok(Tolerances {
            rel,
            abs,
            ..Default::default()
        })
    }
}

/// `n + 1` equally spaced times covering the problem horizon, endpoints
/// exact.
pub fn sample_times(problem: &TrajectoryProblem, n: usize) -> Vec<f64> {
    let t0 = problem.initial.t;
    let t1 = problem.t_end();
    if n == 0 || problem.horizon == 0.0 {
        return vec![t0];
    }
    let mut out: Vec<f64> = (0..n)
        .map(|i| t0 + problem.horizon * i as f64 / n as f64)
        .collect();
    out.push(t1);
    out
}

/// Numeric trajectory reported at `times`, which must be ordered in the
/// integration direction and lie within the horizon.
pub fn integrate(problem: &TrajectoryProblem, tol: Tolerances, times: &[f64]) -> Result<Vec<TrajectoryState>> {
    Tolerances::new(tol.rel, tol.abs)?;
    if times.is_empty() {
        return Err(Error::Precondition("no output times requested".into()));
    }
    let t0 = problem.initial.t;
    let t_end = problem.t_end();
    let dir = if problem.horizon < 0.0 { -1.0 } else { 1.0 };
    let mut prev = t0;
    for &t in times {
        if !((t - prev) * dir >= 0.0 && (t_end - t) * dir >= 0.0) {
            return Err(Error::Precondition(format!(
                "output time {t} is out of order or outside [{t0}, {t_end}]"
            )));
        }
        prev = t;
    }
    if let Err(reason) = problem.check_state(&pack(&problem.initial)) {
        return Err(Error::BlowUp {
            t_star: t0,
            reason,
            last_valid: problem.initial,
        });
    }

    let opts = dopri::Options {
        rel_tol: tol.rel,
        abs_tol: tol.abs,
        max_steps: tol.max_steps,
    };
    let res = dopri::solve(
        |t, y| problem.rhs(t, y),
        t0,
        pack(&problem.initial),
        t_end,
        times,
        &opts,
        |_, y| problem.check_state(y),
    );
    match res {
        Ok(sol) => Ok(sol.into_iter().map(|(t, y)| unpack(t, &y)).collect()),
        Err(dopri::Failure::Rejected {
            t_star,
            last_t,
            last_y,
            reason,
        }) => Err(Error::BlowUp {
            t_star,
            reason,
            last_valid: unpack(last_t, &last_y),
        }),
        Err(dopri::Failure::StepUnderflow { t, y }) => Err(Error::BlowUp {
            t_star: t,
            reason: "step size underflow".into(),
            last_valid: unpack(t, &y),
        }),
        Err(dopri::Failure::TooManySteps { t, y }) => Err(Error::BlowUp {
            t_star: t,
            reason: format!("step budget of {} exhausted", tol.max_steps),
            last_valid: unpack(t, &y),
        }),
    }
}

fn pack(s: &TrajectoryState) -> [f64; 4] {
    [s.x[0], s.x[1], s.v[0], s.v[1]]
}

fn unpack(t: f64, y: &[f64; 4]) -> TrajectoryState {
    TrajectoryState {
        t,
        x: [y[0], y[1]],
        v: [y[2], y[3]],
    }
}

/// Explicit l-plane path: inertial circle at frequency `l` superposed on the
/// slope-driven circle at frequency `b₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormPath {
    t0: f64,
    l: f64,
    b0: f64,
    center: [f64; 2],
    inertial: [f64; 2],
    forced: [f64; 2],
}

impl ClosedFormPath {
    pub fn state_at(&self, t: f64) -> TrajectoryState {
        let tau = t - self.t0;
        let (l, b0) = (self.l, self.b0);
        let (sl, cl) = (l * tau).sin_cos();
        let (sb, cb) = (b0 * tau).sin_cos();
        let [a1, b1] = self.inertial;
        let [d1, e1] = self.forced;
        let [c1, c2] = self.center;
        TrajectoryState {
            t,
            x: [
                c1 + a1 * sl - b1 * cl + d1 * sb + e1 * cb,
                c2 + b1 * sl + a1 * cl - e1 * sb + d1 * cb,
            ],
            v: [
                l * (a1 * cl + b1 * sl) + b0 * (d1 * cb - e1 * sb),
                l * (b1 * cl - a1 * sl) - b0 * (e1 * cb + d1 * sb),
            ],
        }
    }

    pub fn states_at(&self, times: &[f64]) -> Vec<TrajectoryState> {
        times.iter().map(|&t| self.state_at(t)).collect()
    }
}

/// Closed-form solution on the l-plane with a rotating-slope bearing field.
pub fn closed_form_lplane(problem: &TrajectoryProblem) -> Result<ClosedFormPath> {
    let CoriolisModel::LPlane { l0: l } = problem.coriolis else {
        return Err(Error::Degenerate(format!(
            "closed form needs the l-plane, got {:?}",
            problem.coriolis
        )));
    };
    let VortexModel::Plane(vortex) = problem.vortex else {
        return Err(Error::Degenerate("closed form needs a plane vortex".into()));
    };
    let b0 = problem.bearing.rotation_rate(vortex.b0());
    if l == 0.0 {
        return Err(Error::Degenerate("l = 0".into()));
    }
    if b0 == 0.0 {
        return Err(Error::Degenerate("b0 = 0".into()));
    }
    if l == b0 {
        return Err(Error::Degenerate(format!("resonance l = b0 = {l}")));
    }
    let s = problem.initial;
    let c0 = problem.c0;
    let [m10, m20] = problem.bearing_gradient_at_center(s.t);
    let [v1, v2] = s.v;
    let d = b0 - l;
    Ok(ClosedFormPath {
        t0: s.t,
        l,
        b0,
        center: [
            s.x[0] + v2 / l + c0 * m10 / (b0 * l),
            s.x[1] - v1 / l + c0 * m20 / (b0 * l),
        ],
        inertial: [v1 / l - c0 * m20 / (l * d), v2 / l + c0 * m10 / (l * d)],
        forced: [c0 * m20 / (b0 * d), c0 * m10 / (b0 * d)],
    })
}

/// Center of the inertial circle traced with zero bearing on the l-plane.
pub fn inertial_center(state: &TrajectoryState, l: f64) -> [f64; 2] {
    [state.x[0] + state.v[1] / l, state.x[1] - state.v[0] / l]
}

/// Arc length of the polyline through the positions.
pub fn path_length(states: &[TrajectoryState]) -> f64 {
    states
        .windows(2)
        .map(|w| (w[1].x[0] - w[0].x[0]).hypot(w[1].x[1] - w[0].x[1]))
        .sum()
}

pub const TRAJECTORY_HEADER: &str = "t,x1,x2,v1,v2";

pub fn write_trajectory_csv<W: Write>(states: &[TrajectoryState], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for s in states {
        writeln!(w, "{},{},{},{},{}", s.t, s.x[0], s.x[1], s.v[0], s.v[1])?;
    }
    w.flush()
}

pub fn trajectory_to_csv(states: &[TrajectoryState], path: &Path) -> Result<()> {
    if states.is_empty() {
        return Err(Error::Precondition("empty trajectory".into()));
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trajectory_csv(states, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryState>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if n == 0 {
            if line != TRAJECTORY_HEADER {
                return Err(Error::Config {
                    line: 1,
                    message: format!("unexpected header `{line}`"),
                });
            }
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config {
                line: n + 1,
                message: format!("{e}"),
            })?;
        if vals.len() != 5 {
            return Err(Error::Config {
                line: n + 1,
                message: format!("expected 5 fields, got {}", vals.len()),
            });
        }
        out.push(TrajectoryState::new(vals[0], [vals[1], vals[2]], [vals[3], vals[4]]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhysicalParams;
    use std::f64::consts::PI;

    const DAY: f64 = 86_400.0;

    fn lplane_problem(l: f64, b0: f64, m: [f64; 2], v: [f64; 2], horizon: f64) -> TrajectoryProblem {
        TrajectoryProblem::new(
            CoriolisModel::LPlane { l0: l },
            BearingField::LinearSlope {
                m10: m[0],
                m20: m[1],
                k0: 0.0,
            },
            VortexModel::Plane(VortexSpec::linear(b0)),
            0.1,
            TrajectoryState::new(0.0, [0.0, 0.0], v),
            horizon,
        )
        .unwrap()
    }

    fn sec45(horizon: f64) -> TrajectoryProblem {
        lplane_problem(7.3e-5, 3.5e-6, [2e-3, 1e-3], [-1.0, 1.0], horizon)
    }

    fn max_dev(a: &[TrajectoryState], b: &[TrajectoryState]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(p, q)| (p.x[0] - q.x[0]).hypot(p.x[1] - q.x[1]))
            .fold(0.0, f64::max)
    }

    #[test]
    fn closed_form_reproduces_initial_state() {
        let p = sec45(DAY);
        let s = closed_form_lplane(&p).unwrap().state_at(0.0);
        for k in 0..2 {
            assert!((s.x[k] - p.initial().x[k]).abs() < 1e-9);
            assert!((s.v[k] - p.initial().v[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn equilibrium_without_slope_or_velocity() {
        let p = lplane_problem(7.3e-5, 3.5e-6, [0.0, 0.0], [0.0, 0.0], DAY);
        let path = closed_form_lplane(&p).unwrap();
        for t in [0.0, 1e3, 5e4] {
            assert_eq!(path.state_at(t).x, [0.0, 0.0]);
        }
    }

    #[test]
    fn degenerate_closed_forms_are_rejected() {
        for (l, b0) in [(0.0, 1e-5), (1e-5, 0.0), (2e-5, 2e-5)] {
            let p = lplane_problem(l, b0, [1e-3, 0.0], [0.0, 0.0], DAY);
            assert!(matches!(closed_form_lplane(&p), Err(Error::Degenerate(_))));
        }
    }

    #[test]
    fn closed_form_velocity_is_derivative_of_position() {
        let path = closed_form_lplane(&sec45(DAY)).unwrap();
        let h = 1.0;
        for t in [100.0, 3e4, 2e5] {
            let s = path.state_at(t);
            for k in 0..2 {
                let fd = (path.state_at(t + h).x[k] - path.state_at(t - h).x[k]) / (2.0 * h);
                assert!((fd - s.v[k]).abs() < 1e-6 * (1.0 + s.v[k].abs()));
            }
        }
    }

    #[test]
    fn numeric_matches_closed_form() {
        let p = sec45(7.0 * DAY);
        let times = sample_times(&p, 2000);
        let exact = closed_form_lplane(&p).unwrap().states_at(&times);
        let num = integrate(&p, Tolerances::default(), &times).unwrap();
        let dev = max_dev(&exact, &num);
        assert!(dev < 1.0, "deviation {dev} m");
        for w in num.windows(2) {
            let dt = w[1].t - w[0].t;
            let fd = (w[1].x[0] - w[0].x[0]) / dt;
            let mid = 0.5 * (w[1].v[0] + w[0].v[0]);
            assert!((fd - mid).abs() < 1e-3);
        }
    }

    #[test]
    fn tighter_tolerance_reduces_error() {
        let p = sec45(3.0 * DAY);
        let times = sample_times(&p, 200);
        let exact = closed_form_lplane(&p).unwrap().states_at(&times);
        let mut prev = f64::INFINITY;
        for k in 0..4 {
            let rel = 1e-6 / 2f64.powi(3 * k);
            let tol = Tolerances::new(rel, rel * 100.0).unwrap();
            let err = max_dev(&exact, &integrate(&p, tol, &times).unwrap());
            assert!(err < prev, "tolerance {rel}: {err} >= {prev}");
            prev = err;
        }
    }

    #[test]
    fn inertial_circle_without_bearing() {
        let l = 7.3e-5;
        let p = TrajectoryProblem::new(
            CoriolisModel::LPlane { l0: l },
            BearingField::Zero,
            VortexModel::Plane(VortexSpec::linear(3.5e-6)),
            0.1,
            TrajectoryState::new(0.0, [1e4, -2e4], [3.0, -4.0]),
            3.0 * DAY,
        )
        .unwrap();
        let radius = 5.0 / l;
        let center = inertial_center(&p.initial(), l);
        let tol = Tolerances::new(1e-12, 1e-10).unwrap();
        let states = integrate(&p, tol, &sample_times(&p, 500)).unwrap();
        for s in states {
            let r = (s.x[0] - center[0]).hypot(s.x[1] - center[1]);
            assert!((r - radius).abs() < 1e-9 * radius, "{r} vs {radius}");
        }
    }

    #[test]
    fn spectrum_has_two_peaks() {
        let l = 1e-4;
        let b0 = l / 4.0;
        let p = lplane_problem(l, b0, [2e-3, 1e-3], [-1.0, 1.0], DAY);
        let path = closed_form_lplane(&p).unwrap();
        let n = 1024;
        let span = 10.0 * 2.0 * PI / b0;
        let xs: Vec<f64> = (0..n)
            .map(|i| path.state_at(span * i as f64 / n as f64).x[0])
            .collect();
        let mag: Vec<f64> = (1..n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (i, x) in xs.iter().enumerate() {
                    let ang = -2.0 * PI * (k * i) as f64 / n as f64;
                    re += x * ang.cos();
                    im += x * ang.sin();
                }
                re.hypot(im)
            })
            .collect();
        let top = mag.iter().cloned().fold(0.0, f64::max);
        let peaks: Vec<usize> = (0..mag.len()).filter(|&i| mag[i] > 1e-6 * top).map(|i| i + 1).collect();
        // bin k ↔ angular frequency 2πk/span
        assert_eq!(peaks, vec![10, 40]);
    }

    #[test]
    fn zero_beta_equals_lplane() {
        let p = sec45(2.0 * DAY);
        let q = TrajectoryProblem::new(
            CoriolisModel::BetaPlane { l0: 7.3e-5, beta: 0.0 },
            p.bearing(),
            p.vortex(),
            p.c0(),
            p.initial(),
            p.horizon(),
        )
        .unwrap();
        let times = sample_times(&p, 100);
        let a = integrate(&p, Tolerances::default(), &times).unwrap();
        let b = integrate(&q, Tolerances::default(), &times).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn backward_integration_returns_to_start() {
        let params = PhysicalParams::derive(7.3e-5, 6.39e6, PI / 6.0, 1.4, 1.0).unwrap();
        let p = TrajectoryProblem::new(
            params.beta_plane(),
            BearingField::LinearSlope {
                m10: 2e-3,
                m20: 1e-3,
                k0: 0.0,
            },
            VortexModel::Plane(VortexSpec::gaussian_trajectory_preset()),
            0.1,
            TrajectoryState::new(0.0, [0.0, 0.0], [-1.0, 1.0]),
            2.0 * DAY,
        )
        .unwrap();
        let tol = Tolerances::new(1e-12, 1e-10).unwrap();
        let fwd = integrate(&p, tol, &[p.t_end()]).unwrap();
        let back = p.with_initial(fwd[0], -p.horizon()).unwrap();
        let home = integrate(&back, tol, &[0.0]).unwrap()[0];
        let scale = path_length(&integrate(&p, tol, &sample_times(&p, 200)).unwrap());
        let err = home.x[0].hypot(home.x[1]);
        assert!(err < 100.0 * tol.rel * scale, "{err}");
    }

    #[test]
    fn blow_up_reports_last_state() {
        let p = lplane_problem(7.3e-5, 3.5e-6, [5e-1, 0.0], [0.0, 0.0], 7.0 * DAY);
        match integrate(&p, Tolerances::default(), &[p.t_end()]) {
            Err(Error::BlowUp {
                t_star, last_valid, ..
            }) => {
                assert!(t_star > 0.0 && t_star < p.t_end());
                assert!(last_valid.speed() <= PLANE_SPEED_LIMIT);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn output_times_are_validated() {
        let p = sec45(DAY);
        assert!(integrate(&p, Tolerances::default(), &[]).is_err());
        assert!(integrate(&p, Tolerances::default(), &[2.0 * DAY]).is_err());
        assert!(integrate(&p, Tolerances::default(), &[10.0, 5.0]).is_err());
        assert!(Tolerances::new(0.0, 1.0).is_err());
    }

    #[test]
    fn geometry_must_match() {
        let r = TrajectoryProblem::new(
            CoriolisModel::Sphere { omega: 7.3e-5 },
            BearingField::Zero,
            VortexModel::Plane(VortexSpec::linear(1e-5)),
            0.1,
            TrajectoryState::new(0.0, [0.0, 0.0], [0.0, 0.0]),
            1.0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn zero_horizon_gives_initial_state() {
        let p = sec45(0.0);
        let s = integrate(&p, Tolerances::default(), &sample_times(&p, 10)).unwrap();
        assert_eq!(s, vec![p.initial()]);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        let p = sec45(DAY);
        let states = integrate(&p, Tolerances::default(), &sample_times(&p, 7)).unwrap();
        trajectory_to_csv(&states, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert_eq!(read_trajectory_csv(&path).unwrap(), states);
        trajectory_to_csv(&states[..1], &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);
        assert!(matches!(trajectory_to_csv(&[], &path), Err(Error::Precondition(_))));
    }
}

//! Conservation-form compressible solver `∂ₜU = ∂ₓF + ∂ᵧG + S` with
//! `U = (ϱ, ϱu₁, ϱu₂)`, advanced by a two-step (corner/center staggered)
//! Lax–Wendroff scheme.
//!
//! Grid coordinates share the trajectory frame: the origin sits at the
//! domain center, `x₂` points north, so the β-plane Coriolis parameter at a
//! cell is `l₀ + β·y`.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{CoriolisModel, PhysicalParams};
use crate::potential::{steady_pressure, BearingField, VortexSpec};

type Cell = [f64; 3];

/// Pressure law `p(ϱ) = κϱⁿ` used by the momentum flux, together with the
/// matching renormalized pressure `π(ϱ) = κnϱⁿ⁻¹/((n−1)c₀)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateRelation {
    pub coefficient: f64,
    pub exponent: f64,
    pub c0: f64,
}

impl StateRelation {
    /// `κ = 9c₀/16`, `n = 16/7`; then `π = ϱ^{9/7}`.
    pub fn from_params(params: &PhysicalParams) -> Self {
        StateRelation {
            coefficient: 9.0 * params.c0() / 16.0,
            exponent: 16.0 / 7.0,
            c0: params.c0(),
        }
    }

    pub fn new(coefficient: f64, exponent: f64, c0: f64) -> Result<Self> {
        if !(coefficient >= 0.0 && coefficient.is_finite()) {
            return Err(Error::param("flux_coefficient", format!("must be >= 0, got {coefficient}")));
        }
        if !(exponent > 1.0 && exponent.is_finite()) {
            return Err(Error::param("flux_exponent", format!("must be > 1, got {exponent}")));
        }
        if !(c0 > 0.0) {
            return Err(Error::param("c0", format!("must be > 0, got {c0}")));
        }
        Ok(StateRelation {
            coefficient,
            exponent,
            c0,
        })
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        self.coefficient * rho.powf(self.exponent)
    }

    pub fn sound_speed(&self, rho: f64) -> f64 {
        (self.coefficient * self.exponent * rho.powf(self.exponent - 1.0)).sqrt()
    }

    fn pi_factor(&self) -> f64 {
        self.coefficient * self.exponent / ((self.exponent - 1.0) * self.c0)
    }

    pub fn pi_of_rho(&self, rho: f64) -> f64 {
        self.pi_factor() * rho.powf(self.exponent - 1.0)
    }

    pub fn rho_of_pi(&self, pi: f64) -> f64 {
        (pi / self.pi_factor()).powf(1.0 / (self.exponent - 1.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Zero-gradient ghost ring.
    Neumann,
    Periodic,
}

/// Coriolis source discretization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceForm {
    /// `S = (0, lϱu₂, −lϱu₁)`
    Momentum,
    /// `S = (0, lu₂, −lu₁)`, literally as printed without the density.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub relation: StateRelation,
    pub coriolis: CoriolisModel,
    pub dt: f64,
    pub cfl_cap: f64,
    pub boundary: Boundary,
    pub source_form: SourceForm,
    /// Coefficient of the optional fourth-difference damping.
    pub dissipation: f64,
}

impl SolverConfig {
    pub fn new(params: &PhysicalParams, coriolis: CoriolisModel, dt: f64) -> Result<Self> {
        let c = SolverConfig {
            relation: StateRelation::from_params(params),
            coriolis,
            dt,
            cfl_cap: 0.5,
            boundary: Boundary::Neumann,
            source_form: SourceForm::Momentum,
            dissipation: 0.0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.cfl_cap > 0.0 && self.cfl_cap <= 1.0) {
            return Err(Error::param("cfl_cap", format!("must lie in (0, 1], got {}", self.cfl_cap)));
        }
        if !self.coriolis.is_plane() {
            return Err(Error::Unsupported("the grid solver works on the plane only".into()));
        }
        if !(self.dissipation >= 0.0 && self.dissipation <= 1.0 / 16.0) {
            return Err(Error::param(
                "dissipation",
                format!("must lie in [0, 1/16], got {}", self.dissipation),
            ));
        }
        Ok(())
    }

    fn coriolis_at_y(&self, y: f64) -> f64 {
        match self.coriolis {
            CoriolisModel::LPlane { l0 } => l0,
            CoriolisModel::BetaPlane { l0, beta } => l0 + beta * y,
            CoriolisModel::Sphere { .. } => unreachable!("validated"),
        }
    }
}

/// Uniform rectangular grid centered on the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridGeometry {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl GridGeometry {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::param("nx/ny", format!("grid must be nonempty, got {nx}x{ny}")));
        }
        if !(dx > 0.0 && dy > 0.0) {
            return Err(Error::param("dx/dy", format!("spacing must be > 0, got {dx}, {dy}")));
        }
        Ok(GridGeometry { nx, ny, dx, dy })
    }

    /// Center of cell `(i, j)` (0-based) in the model frame.
    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            (i as f64 + 0.5 - 0.5 * self.nx as f64) * self.dx,
            (j as f64 + 0.5 - 0.5 * self.ny as f64) * self.dy,
        ]
    }

    /// Fractional 0-based cell coordinates of a model-frame point.
    pub fn to_index(&self, x: [f64; 2]) -> [f64; 2] {
        [
            x[0] / self.dx + 0.5 * self.nx as f64 - 0.5,
            x[1] / self.dy + 0.5 * self.ny as f64 - 0.5,
        ]
    }
}

/// Cell-centered conserved variables, row-major with `i` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub time: f64,
    pub rho: Vec<f64>,
    pub mx: Vec<f64>,
    pub my: Vec<f64>,
}

impl GridState {
    pub fn uniform(geom: GridGeometry, rho: f64, u: [f64; 2]) -> Self {
        let n = geom.nx * geom.ny;
        GridState {
            nx: geom.nx,
            ny: geom.ny,
            dx: geom.dx,
            dy: geom.dy,
            time: 0.0,
            rho: vec![rho; n],
            mx: vec![rho * u[0]; n],
            my: vec![rho * u[1]; n],
        }
    }

    /// Fill from a function of the model-frame cell center returning
    /// `(ϱ, u₁, u₂)`.
    pub fn from_fn<F: Fn([f64; 2]) -> [f64; 3]>(geom: GridGeometry, f: F) -> Self {
        let mut s = Self::uniform(geom, 0.0, [0.0, 0.0]);
        for j in 0..geom.ny {
            for i in 0..geom.nx {
                let [r, u1, u2] = f(geom.cell_center(i, j));
                let k = j * geom.nx + i;
                s.rho[k] = r;
                s.mx[k] = r * u1;
                s.my[k] = r * u2;
            }
        }
        s
    }

    pub fn geometry(&self) -> GridGeometry {
        GridGeometry {
            nx: self.nx,
            ny: self.ny,
            dx: self.dx,
            dy: self.dy,
        }
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn velocity(&self, i: usize, j: usize) -> [f64; 2] {
        let k = self.idx(i, j);
        [self.mx[k] / self.rho[k], self.my[k] / self.rho[k]]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        self.geometry().cell_center(i, j)
    }

    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.dx * self.dy
    }

    pub fn momentum(&self) -> [f64; 2] {
        let a = self.dx * self.dy;
        [self.mx.iter().sum::<f64>() * a, self.my.iter().sum::<f64>() * a]
    }

    pub fn pi_field(&self, relation: &StateRelation) -> Vec<f64> {
        self.rho.iter().map(|&r| relation.pi_of_rho(r)).collect()
    }

    fn check_extents(&self) -> Result<()> {
        let n = self.nx * self.ny;
        if n == 0 {
            return Err(Error::Precondition(format!("empty grid {}x{}", self.nx, self.ny)));
        }
        if self.rho.len() != n || self.mx.len() != n || self.my.len() != n {
            return Err(Error::Precondition("field extents differ from nx*ny".into()));
        }
        Ok(())
    }

    /// `max(|u| + c_s)·dt / min(dx, dy)`.
    pub fn cfl(&self, config: &SolverConfig) -> f64 {
        let h = self.dx.min(self.dy);
        (0..self.rho.len())
            .into_par_iter()
            .map(|k| {
                let r = self.rho[k];
                (self.mx[k] / r).hypot(self.my[k] / r) + config.relation.sound_speed(r)
            })
            .reduce(|| 0.0, f64::max)
            * config.dt
            / h
    }

    fn min_density(&self) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (k, &r) in self.rho.iter().enumerate() {
            if !(r >= best.1) {
                best = (k, r);
            }
        }
        best
    }
}

/// Ambient level added to `π` at initialization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AmbientPi {
    /// Chosen so that the minimum of `π` over the grid is 1.
    Auto,
    Fixed(f64),
}

/// Vortex initial data: velocity `ambient + u(x − center)` and pressure
/// `π_ambient + π₀(x − center) + π₁(0, x − center)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VortexInit {
    pub vortex: VortexSpec,
    pub bearing: BearingField,
    pub ambient_velocity: [f64; 2],
    pub center: [f64; 2],
    pub ambient_pi: AmbientPi,
}

pub fn initialize_vortex(
    geom: GridGeometry,
    init: &VortexInit,
    params: &PhysicalParams,
    relation: &StateRelation,
) -> Result<(GridState, f64)> {
    if let VortexSpec::Gaussian { sigma, .. } = init.vortex {
        let half = [0.5 * geom.nx as f64 * geom.dx, 0.5 * geom.ny as f64 * geom.dy];
        let reach = (half[0] - init.center[0].abs()).min(half[1] - init.center[1].abs());
        let envelope = (-0.5 * sigma * reach * reach).exp();
        if envelope > 1e-6 {
            log::warn!("vortex envelope is {envelope:.2e} at the nearest boundary");
        }
    }
    let b0 = init.vortex.b0();
    let mut pi = Vec::with_capacity(geom.nx * geom.ny);
    for j in 0..geom.ny {
        for i in 0..geom.nx {
            let c = geom.cell_center(i, j);
            let x = [c[0] - init.center[0], c[1] - init.center[1]];
            pi.push(steady_pressure(&init.vortex, params, x)? + init.bearing.value(0.0, x, b0));
        }
    }
    let offset = match init.ambient_pi {
        AmbientPi::Auto => 1.0 - pi.iter().cloned().fold(f64::INFINITY, f64::min),
        AmbientPi::Fixed(v) => v,
    };
    let mut state = GridState::uniform(geom, 0.0, [0.0, 0.0]);
    for j in 0..geom.ny {
        for i in 0..geom.nx {
            let k = state.idx(i, j);
            let total = pi[k] + offset;
            if !(total > 0.0) {
                return Err(Error::NegativeDensity {
                    i,
                    j,
                    value: total,
                    step: 0,
                });
            }
            let c = geom.cell_center(i, j);
            let u = init
                .vortex
                .velocity([c[0] - init.center[0], c[1] - init.center[1]]);
            let r = relation.rho_of_pi(total);
            state.rho[k] = r;
            state.mx[k] = r * (init.ambient_velocity[0] + u[0]);
            state.my[k] = r * (init.ambient_velocity[1] + u[1]);
        }
    }
    Ok((state, offset))
}

fn flux_x(u: &Cell, rel: &StateRelation) -> Cell {
    let v = u[1] / u[0];
    [-u[1], -(u[1] * v + rel.pressure(u[0])), -u[2] * v]
}

fn flux_y(u: &Cell, rel: &StateRelation) -> Cell {
    let v = u[2] / u[0];
    [-u[2], -u[1] * v, -(u[2] * v + rel.pressure(u[0]))]
}

fn source(u: &Cell, l: f64, form: SourceForm) -> Cell {
    match form {
        SourceForm::Momentum => [0.0, l * u[2], -l * u[1]],
        SourceForm::Literal => [0.0, l * u[2] / u[0], -l * u[1] / u[0]],
    }
}

/// Cell values padded with one ghost ring; index `(I, J)` with `I ∈ 0..nx+2`.
struct Padded {
    w: usize,
    data: Vec<Cell>,
}

impl Padded {
    fn build(s: &GridState, boundary: Boundary) -> Self {
        let (nx, ny) = (s.nx, s.ny);
        let w = nx + 2;
        let mut data = vec![[0.0; 3]; w * (ny + 2)];
        let map = |a: isize, n: usize| -> usize {
            match boundary {
                Boundary::Neumann => a.clamp(0, n as isize - 1) as usize,
                Boundary::Periodic => a.rem_euclid(n as isize) as usize,
            }
        };
        for jj in 0..ny + 2 {
            let j = map(jj as isize - 1, ny);
            for ii in 0..nx + 2 {
                let i = map(ii as isize - 1, nx);
                let k = j * nx + i;
                data[jj * w + ii] = [s.rho[k], s.mx[k], s.my[k]];
            }
        }
        Padded { w, data }
    }

    fn at(&self, i: usize, j: usize) -> &Cell {
        &self.data[j * self.w + i]
    }
}

fn add(a: &Cell, b: &Cell) -> Cell {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: &Cell, b: &Cell) -> Cell {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// One full time step. Fails without modifying `state` on a CFL violation;
/// a nonpositive density aborts after the update.
pub fn step(state: &mut GridState, config: &SolverConfig, step_index: usize) -> Result<()> {
    state.check_extents()?;
    let cfl = state.cfl(config);
    if !(cfl <= config.cfl_cap) {
        return Err(Error::Cfl {
            cfl,
            cap: config.cfl_cap,
            step: step_index,
        });
    }
    let (nx, ny) = (state.nx, state.ny);
    let (dx, dy, dt) = (state.dx, state.dy, config.dt);
    let rel = &config.relation;
    let form = config.source_form;
    let geom = state.geometry();
    // y of padded row J (cell row J−1) and of corner row J (between J and J+1).
    let y_cell = |jj: usize| (jj as f64 - 0.5 - 0.5 * ny as f64) * dy;
    let y_corner = |jj: usize| (jj as f64 - 0.5 * ny as f64) * dy;

    let p = Padded::build(state, config.boundary);
    let cw = nx + 1;

    // Half step: corners (I+½, J+½) for I ∈ 0..=nx, J ∈ 0..=ny, each carrying
    // its state, fluxes and source.
    let corners: Vec<[Cell; 3]> = (0..ny + 1)
        .into_par_iter()
        .flat_map_iter(|jj| {
            let p = &p;
            let (l_lo, l_hi) = (config.coriolis_at_y(y_cell(jj)), config.coriolis_at_y(y_cell(jj + 1)));
            let l_c = config.coriolis_at_y(y_corner(jj));
            (0..nx + 1).map(move |ii| {
                let a = p.at(ii, jj);
                let b = p.at(ii + 1, jj);
                let c = p.at(ii, jj + 1);
                let d = p.at(ii + 1, jj + 1);
                let (fa, fb, fc, fd) = (flux_x(a, rel), flux_x(b, rel), flux_x(c, rel), flux_x(d, rel));
                let (ga, gb, gc, gd) = (flux_y(a, rel), flux_y(b, rel), flux_y(c, rel), flux_y(d, rel));
                let s = add(
                    &add(&source(a, l_lo, form), &source(b, l_lo, form)),
                    &add(&source(c, l_hi, form), &source(d, l_hi, form)),
                );
                let dfx = add(&sub(&fb, &fa), &sub(&fd, &fc));
                let dgy = add(&sub(&gc, &ga), &sub(&gd, &gb));
                let avg = add(&add(a, b), &add(c, d));
                let half: Cell = std::array::from_fn(|q| {
                    0.25 * avg[q] + 0.5 * dt * (dfx[q] / (2.0 * dx) + dgy[q] / (2.0 * dy) + 0.25 * s[q])
                });
                [flux_x(&half, rel), flux_y(&half, rel), source(&half, l_c, form)]
            })
        })
        .collect();

    // Full step at cell centers from the four surrounding corners.
    let corner = |ii: usize, jj: usize| &corners[jj * cw + ii];
    let updated: Vec<Cell> = (0..ny)
        .into_par_iter()
        .flat_map_iter(|j| {
            let p = &p;
            (0..nx).map(move |i| {
                let (sw, se) = (corner(i, j), corner(i + 1, j));
                let (nw, ne) = (corner(i, j + 1), corner(i + 1, j + 1));
                let dfx = add(&sub(&se[0], &sw[0]), &sub(&ne[0], &nw[0]));
                let dgy = add(&sub(&nw[1], &sw[1]), &sub(&ne[1], &se[1]));
                let s = add(&add(&sw[2], &se[2]), &add(&nw[2], &ne[2]));
                let u = p.at(i + 1, j + 1);
                std::array::from_fn(|q| {
                    u[q] + dt * (dfx[q] / (2.0 * dx) + dgy[q] / (2.0 * dy) + 0.25 * s[q])
                })
            })
        })
        .collect();

    for (k, c) in updated.iter().enumerate() {
        state.rho[k] = c[0];
        state.mx[k] = c[1];
        state.my[k] = c[2];
    }
    if config.dissipation > 0.0 {
        dissipate(state, config);
    }
    state.time += dt;

    let (k, r) = state.min_density();
    if !(r > 0.0) {
        return Err(Error::NegativeDensity {
            i: k % geom.nx,
            j: k / geom.nx,
            value: r,
            step: step_index,
        });
    }
    Ok(())
}

/// `U ← U − ε(δₓ⁴U + δᵧ⁴U)` with boundary-consistent index mapping.
fn dissipate(state: &mut GridState, config: &SolverConfig) {
    let (nx, ny) = (state.nx as isize, state.ny as isize);
    let map = |a: isize, n: isize| -> usize {
        match config.boundary {
            Boundary::Neumann => a.clamp(0, n - 1) as usize,
            Boundary::Periodic => a.rem_euclid(n) as usize,
        }
    };
    let eps = config.dissipation;
    for field in [&mut state.rho, &mut state.mx, &mut state.my] {
        let src = field.clone();
        let v = |i: isize, j: isize| src[map(j, ny) * nx as usize + map(i, nx)];
        field.par_chunks_mut(nx as usize).enumerate().for_each(|(j, row)| {
            let j = j as isize;
            for (i, out) in row.iter_mut().enumerate() {
                let i = i as isize;
                let d4 = |f: &dyn Fn(isize) -> f64| f(-2) - 4.0 * f(-1) + 6.0 * f(0) - 4.0 * f(1) + f(2);
                let dxx = d4(&|o| v(i + o, j));
                let dyy = d4(&|o| v(i, j + o));
                *out -= eps * (dxx + dyy);
            }
        });
    }
}

/// Tracked vortex center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackedCenter {
    /// Best estimate: the interpolated vorticity extremum when the local fit
    /// is accepted, the weighted centroid otherwise.
    pub position: [f64; 2],
    pub centroid: [f64; 2],
    pub peak_vorticity: f64,
    pub refined: bool,
}

/// Relative vorticity `∂ₓu₂ − ∂ᵧu₁` by centered differences; zero on the
/// outer ring.
pub fn vorticity(state: &GridState) -> Vec<f64> {
    let (nx, ny) = (state.nx, state.ny);
    let mut w = vec![0.0; nx * ny];
    if nx < 3 || ny < 3 {
        return w;
    }
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let du2 = state.velocity(i + 1, j)[1] - state.velocity(i - 1, j)[1];
            let du1 = state.velocity(i, j + 1)[0] - state.velocity(i, j - 1)[0];
            w[j * nx + i] = du2 / (2.0 * state.dx) - du1 / (2.0 * state.dy);
        }
    }
    w
}

/// Vorticity below which no vortex is considered present, 1/s.
pub const TRACKING_FLOOR: f64 = 1e-8;

pub fn track_center(state: &GridState) -> Result<TrackedCenter> {
    track_center_with(state, None, None)
}

/// Like [`track_center`] but only searches for the peak within `radius` of
/// `guess`.
pub fn track_center_near(state: &GridState, guess: [f64; 2], radius: f64) -> Result<TrackedCenter> {
    track_center_with(state, Some((guess, radius)), None)
}

/// General tracker: optional search window `(guess, radius)` and optional
/// vorticity sign, which restricts the peak search to extrema of that sign
/// so a growing opposite-signed wake cannot capture the track.
pub fn track_center_with(
    state: &GridState,
    window: Option<([f64; 2], f64)>,
    sign: Option<f64>,
) -> Result<TrackedCenter> {
    state.check_extents()?;
    let (nx, ny) = (state.nx, state.ny);
    let w = vorticity(state);
    let mut best: Option<(usize, f64)> = None;
    for j in 1..ny.saturating_sub(1) {
        for i in 1..nx.saturating_sub(1) {
            if let Some((g, r)) = window {
                let c = state.cell_center(i, j);
                if (c[0] - g[0]).hypot(c[1] - g[1]) > r {
                    continue;
                }
            }
            let k = j * nx + i;
            let score = sign.map_or(w[k].abs(), |s| s * w[k]);
            if best.is_none_or(|(_, m)| score > m) {
                best = Some((k, score));
            }
        }
    }
    let Some((peak, peak_abs)) = best else {
        return Err(Error::TrackingLost("no interior cells to search".into()));
    };
    if !(peak_abs >= TRACKING_FLOOR) {
        return Err(Error::TrackingLost(format!(
            "max |vorticity| {peak_abs:.3e} below floor {TRACKING_FLOOR:e}"
        )));
    }
    let sign = w[peak].signum();
    let threshold = 0.5 * peak_abs;

    // Connected half-maximum region around the peak.
    let mut seen = vec![false; nx * ny];
    let mut stack = vec![peak];
    seen[peak] = true;
    let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
    while let Some(k) = stack.pop() {
        let (i, j) = (k % nx, k / nx);
        let weight = sign * w[k];
        let c = state.cell_center(i, j);
        sw += weight;
        sx += weight * c[0];
        sy += weight * c[1];
        let mut push = |ii: usize, jj: usize| {
            let kk = jj * nx + ii;
            if !seen[kk] && sign * w[kk] >= threshold {
                seen[kk] = true;
                stack.push(kk);
            }
        };
        if i > 0 {
            push(i - 1, j);
        }
        if i + 1 < nx {
            push(i + 1, j);
        }
        if j > 0 {
            push(i, j - 1);
        }
        if j + 1 < ny {
            push(i, j + 1);
        }
    }
    let centroid = [sx / sw, sy / sw];

    // Quadratic fit of the 3×3 neighborhood (of log-vorticity when positive,
    // which is exact for Gaussian-shaped extrema).
    let (pi, pj) = (peak % nx, peak / nx);
    let mut f = [[0.0; 3]; 3];
    let mut all_positive = true;
    for (a, row) in f.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v = sign * w[(pj + b - 1) * nx + (pi + a - 1)];
            all_positive &= *v > 0.0;
        }
    }
    if all_positive {
        for v in f.iter_mut().flatten() {
            *v = v.ln();
        }
    }
    let gx = 0.5 * (f[2][1] - f[0][1]);
    let gy = 0.5 * (f[1][2] - f[1][0]);
    let hxx = f[2][1] - 2.0 * f[1][1] + f[0][1];
    let hyy = f[1][2] - 2.0 * f[1][1] + f[1][0];
    let hxy = 0.25 * (f[2][2] - f[2][0] - f[0][2] + f[0][0]);
    let det = hxx * hyy - hxy * hxy;
    let mut position = centroid;
    let mut refined = false;
    if hxx < 0.0 && det > 0.0 {
        let ox = -(hyy * gx - hxy * gy) / det;
        let oy = -(hxx * gy - hxy * gx) / det;
        if ox.abs() <= 1.0 && oy.abs() <= 1.0 {
            let c = state.cell_center(pi, pj);
            position = [c[0] + ox * state.dx, c[1] + oy * state.dy];
            refined = true;
        }
    }
    Ok(TrackedCenter {
        position,
        centroid,
        peak_vorticity: w[peak],
        refined,
    })
}

/// Bilinear sample of a cell-centered field at a model-frame point; `None`
/// outside the hull of cell centers.
pub fn sample_bilinear(geom: &GridGeometry, field: &[f64], x: [f64; 2]) -> Option<f64> {
    let [fi, fj] = geom.to_index(x);
    if !(fi >= 0.0 && fj >= 0.0 && fi <= (geom.nx - 1) as f64 && fj <= (geom.ny - 1) as f64) {
        return None;
    }
    let i0 = (fi.floor() as usize).min(geom.nx.saturating_sub(2));
    let j0 = (fj.floor() as usize).min(geom.ny.saturating_sub(2));
    let (tx, ty) = (fi - i0 as f64, fj - j0 as f64);
    let i1 = (i0 + 1).min(geom.nx - 1);
    let j1 = (j0 + 1).min(geom.ny - 1);
    let v = |i: usize, j: usize| field[j * geom.nx + i];
    Some(
        (1.0 - tx) * (1.0 - ty) * v(i0, j0)
            + tx * (1.0 - ty) * v(i1, j0)
            + (1.0 - tx) * ty * v(i0, j1)
            + tx * ty * v(i1, j1),
    )
}

/// Relative L₂ difference between the initial anomaly `a₀(x)` and the final
/// anomaly sampled at `x + shift`, over cells whose shifted point stays on
/// the grid.
pub fn recentered_difference(geom: &GridGeometry, initial: &[f64], fin: &[f64], shift: [f64; 2]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..geom.ny {
        for i in 0..geom.nx {
            let c = geom.cell_center(i, j);
            if let Some(v) = sample_bilinear(geom, fin, [c[0] + shift[0], c[1] + shift[1]]) {
                let a = initial[j * geom.nx + i];
                num += (v - a) * (v - a);
                den += a * a;
            }
        }
    }
    (num / den).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub steps: usize,
    /// Record a snapshot every this many steps (0: only the initial state).
    pub snapshot_every: usize,
    pub track: bool,
    /// Search radius around the previous center; `None` searches the grid.
    pub track_radius: Option<f64>,
    /// Keep full states in the record (centers and masses are always kept).
    pub keep_states: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub mass: f64,
    pub center: Option<TrackedCenter>,
    pub state: Option<GridState>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub config: SolverConfig,
    pub snapshots: Vec<Snapshot>,
    pub final_state: GridState,
}

pub fn run(initial: GridState, config: &SolverConfig, opts: &RunOptions) -> Result<RunRecord> {
    config.validate()?;
    initial.check_extents()?;
    let mut state = initial;
    let mut snapshots = Vec::new();
    // Last tracked position and the vortex's vorticity sign.
    let mut last_center: Option<([f64; 2], f64)> = None;
    let mut record = |state: &GridState, n: usize, last: &mut Option<([f64; 2], f64)>| {
        let center = if opts.track {
            let window = opts.track_radius.zip(*last).map(|(r, (g, _))| (g, r));
            match track_center_with(state, window, last.map(|(_, s)| s)) {
                Ok(c) => {
                    let sign = last.map_or(c.peak_vorticity.signum(), |(_, s)| s);
                    *last = Some((c.position, sign));
                    Some(c)
                }
                Err(e) => {
                    log::warn!("step {n}: {e}");
                    None
                }
            }
        } else {
            None
        };
        snapshots.push(Snapshot {
            step: n,
            time: state.time,
            mass: state.mass(),
            center,
            state: opts.keep_states.then(|| state.clone()),
        });
    };
    record(&state, 0, &mut last_center);
    for n in 1..=opts.steps {
        step(&mut state, config, n)?;
        if opts.snapshot_every > 0 && (n % opts.snapshot_every == 0 || n == opts.steps) {
            record(&state, n, &mut last_center);
        }
    }
    Ok(RunRecord {
        config: *config,
        snapshots,
        final_state: state,
    })
}

pub const SNAPSHOT_HEADER: &str = "i,j,x,y,rho,u1,u2,pi";

/// One CSV row per cell, `j` outer; `i, j` are 1-based and `x, y` are the
/// model-frame cell centers.
pub fn write_snapshot_csv<W: Write>(state: &GridState, relation: &StateRelation, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SNAPSHOT_HEADER}")?;
    for j in 0..state.ny {
        for i in 0..state.nx {
            let k = state.idx(i, j);
            let c = state.cell_center(i, j);
            let [u1, u2] = state.velocity(i, j);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                i + 1,
                j + 1,
                c[0],
                c[1],
                state.rho[k],
                u1,
                u2,
                relation.pi_of_rho(state.rho[k])
            )?;
        }
    }
    w.flush()
}

pub fn snapshot_to_csv(state: &GridState, relation: &StateRelation, path: &Path) -> Result<()> {
    state.check_extents()?;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_snapshot_csv(state, relation, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Parsed snapshot row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotRow {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub rho: f64,
    pub u1: f64,
    pub u2: f64,
    pub pi: f64,
}

pub fn read_snapshot_csv(path: &Path) -> Result<Vec<SnapshotRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let bad = |m: String| Error::Config { line: n + 1, message: m };
        if n == 0 {
            if line != SNAPSHOT_HEADER {
                return Err(bad(format!("unexpected header `{line}`")));
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(bad(format!("expected 8 fields, got {}", f.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|e| bad(e.to_string()));
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(e.to_string()));
        rows.push(SnapshotRow {
            i: int(f[0])?,
            j: int(f[1])?,
            x: num(f[2])?,
            y: num(f[3])?,
            rho: num(f[4])?,
            u1: num(f[5])?,
            u2: num(f[6])?,
            pi: num(f[7])?,
        });
    }
    Ok(rows)
}

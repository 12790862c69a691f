//! The residual `Q` left in the momentum equation when the frozen-vortex
//! ansatz is substituted, and the radius around the center inside which it
//! stays below a threshold.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{rotate_l, CoriolisModel, Mat2};
use crate::potential::BearingField;
use crate::trajectory::{Geometry, TrajectoryProblem, TrajectoryState};

/// Default `A`: `l₀L` on the plane, `2Ω sin X₂(0) L` on the sphere.
pub fn default_a(problem: &TrajectoryProblem) -> Mat2 {
    match problem.coriolis() {
        CoriolisModel::Sphere { omega } => Mat2::coriolis(2.0 * omega * problem.initial().x[1].sin()),
        c => Mat2::coriolis(c.reference()),
    }
}

/// `Q(t, x) = −(l(X) − l(X+x))LẊ + (l(X+x)L − A)u(x) − c₀[∇π₁|₀ − ∇π₁(t,x)]`
/// at the moving-frame point `x`. `a = None` uses [`default_a`].
pub fn q_field(problem: &TrajectoryProblem, state: &TrajectoryState, x: [f64; 2], a: Option<&Mat2>) -> Result<[f64; 2]> {
    let a = a.copied().unwrap_or_else(|| default_a(problem));
    let coriolis = problem.coriolis();
    let here = [state.x[0] + x[0], state.x[1] + x[1]];
    if problem.geometry() == Geometry::Sphere && !(here[1].abs() < crate::trajectory::LATITUDE_CAP) {
        return Err(Error::Domain(format!(
            "latitude {} rad beyond the chart cap",
            here[1]
        )));
    }
    let l_center = coriolis.coriolis_at(state.x)?;
    let l_here = coriolis.coriolis_at(here)?;
    let u = problem.vortex().velocity(x)?;
    let b0 = problem.vortex().b0();
    let bearing = problem.bearing();
    let g0 = bearing.gradient_at_origin(state.t, b0);
    let gx = bearing.gradient(state.t, x, b0);

    let lv = rotate_l(state.v);
    let lu = rotate_l(u);
    let au = a.apply(u);
    let c0 = problem.c0();
    let dl = l_center - l_here;
    Ok(std::array::from_fn(|k| {
        -dl * lv[k] + (l_here * lu[k] - au[k]) - c0 * (g0[k] - gx[k])
    }))
}

/// β-plane form `βx₂L(Ẋ + u(x)) + βX₂Lu(x)`, valid when the bearing
/// gradient is spatially uniform and `A = l₀L`.
pub fn q_beta_plane(problem: &TrajectoryProblem, state: &TrajectoryState, x: [f64; 2]) -> Result<[f64; 2]> {
    let CoriolisModel::BetaPlane { beta, .. } = problem.coriolis() else {
        return Err(Error::Unsupported("β-plane form needs the β-plane model".into()));
    };
    if !matches!(
        problem.bearing(),
        BearingField::Zero | BearingField::LinearSlope { .. }
    ) {
        return Err(Error::Unsupported(
            "β-plane form needs a spatially uniform bearing gradient".into(),
        ));
    }
    let u = problem.vortex().velocity(x)?;
    let w = rotate_l([state.v[0] + u[0], state.v[1] + u[1]]);
    let lu = rotate_l(u);
    Ok(std::array::from_fn(|k| beta * x[1] * w[k] + beta * state.x[1] * lu[k]))
}

/// Result of [`delta_neighborhood`] for one trajectory sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeighborhoodSample {
    pub t: f64,
    /// Largest sampled radius whose closed disc keeps `|Q| ≤ δ`.
    pub r_delta: f64,
    /// `sup |Q|` over the full sampled disc.
    pub sup_q: f64,
}

/// Polar-sampled `δ`-neighborhood of the trajectory: `grid_n` rings of
/// `grid_n` angles each, out to `search_radius`.
pub fn delta_neighborhood(
    problem: &TrajectoryProblem,
    states: &[TrajectoryState],
    delta: f64,
    search_radius: f64,
    grid_n: usize,
    a: Option<&Mat2>,
) -> Result<Vec<NeighborhoodSample>> {
    if states.is_empty() {
        return Err(Error::Precondition("empty trajectory".into()));
    }
    if !(delta >= 0.0) {
        return Err(Error::param("delta", format!("must be >= 0, got {delta}")));
    }
    if !(search_radius > 0.0 && search_radius.is_finite()) {
        return Err(Error::param(
            "search_radius",
            format!("must be positive and finite, got {search_radius}"),
        ));
    }
    if grid_n == 0 {
        return Err(Error::param("grid_n", "must be >= 1"));
    }
    states
        .par_iter()
        .map(|s| {
            let q0 = norm(q_field(problem, s, [0.0, 0.0], a)?);
            let mut inside = q0 <= delta;
            let mut r_delta = 0.0;
            let mut sup_q = q0;
            for ring in 1..=grid_n {
                let r = search_radius * ring as f64 / grid_n as f64;
                let mut ring_max: f64 = 0.0;
                for k in 0..grid_n {
                    let ang = 2.0 * std::f64::consts::PI * k as f64 / grid_n as f64;
                    let x = [r * ang.cos(), r * ang.sin()];
                    ring_max = ring_max.max(norm(q_field(problem, s, x, a)?));
                }
                sup_q = sup_q.max(ring_max);
                inside &= ring_max <= delta;
                if inside {
                    r_delta = r;
                }
            }
            Ok(NeighborhoodSample {
                t: s.t,
                r_delta,
                sup_q,
            })
        })
        .collect()
}

fn norm(q: [f64; 2]) -> f64 {
    q[0].hypot(q[1])
}

pub const NEIGHBORHOOD_HEADER: &str = "t,r_delta,sup_q";

pub fn write_neighborhood_csv<W: std::io::Write>(rows: &[NeighborhoodSample], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{NEIGHBORHOOD_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.t, r.r_delta, r.sup_q)?;
    }
    w.flush()
}

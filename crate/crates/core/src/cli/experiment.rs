//! Resolved experiment settings: a named preset overlaid with `key = value`
//! config text. Every key round-trips through [`Experiment::entries`], which
//! is also what the metadata sidecar records and hashes.

use std::f64::consts::PI;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid_solver::{
    AmbientPi, Boundary, GridGeometry, SolverConfig, SourceForm, StateRelation, VortexInit,
};
use crate::model::config::KeyValueConfig;
use crate::model::{CoriolisModel, PhysicalParams};
use crate::potential::{BearingField, VortexSpec};
use crate::sphere::SphericalVortexSpec;
use crate::trajectory::{Tolerances, TrajectoryProblem, TrajectoryState, VortexModel};

const HOUR: f64 = 3600.0;
const DAY: f64 = 86_400.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    L,
    Beta,
    Sphere,
}

impl ModelKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "l" => Some(ModelKind::L),
            "beta" => Some(ModelKind::Beta),
            "sphere" => Some(ModelKind::Sphere),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::L => "l",
            ModelKind::Beta => "beta",
            ModelKind::Sphere => "sphere",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VortexKind {
    Linear,
    Gaussian,
    PowerLaw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BearingKind {
    Zero,
    Linear,
    Localized,
}

/// Names accepted by [`preset`].
pub const PRESETS: &[&str] = &[
    "sec45",
    "sec45-linear",
    "fig4",
    "fig4-desk",
    "fig5-weak",
    "fig5-weak-desk",
    "fig5-strong",
    "fig5-strong-desk",
    "fig6-l",
    "fig6-l-desk",
    "fig6-beta",
    "fig6-beta-desk",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub preset: String,

    pub omega: f64,
    pub radius: f64,
    pub phi0_deg: f64,
    pub gamma3d: f64,
    pub state_const: f64,
    /// Direct `c₀`; `None` derives it from the physical constants.
    pub c0: Option<f64>,
    /// β override; `None` derives it from `Ω`, `R`, `φ₀`.
    pub beta: Option<f64>,
    pub coriolis: ModelKind,

    pub vortex: VortexKind,
    pub b0: f64,
    pub amplitude: f64,
    pub sigma: f64,
    pub power_k: f64,
    /// Coefficient of the spherical b-member; `None` matches the plane
    /// vortex's center rotation.
    pub sphere_b: Option<f64>,

    pub bearing: BearingKind,
    pub m10: f64,
    pub m20: f64,
    pub k0: f64,
    pub r0: f64,
    pub sigma0: f64,

    pub x1: f64,
    pub x2: f64,
    pub v1: f64,
    pub v2: f64,
    pub horizon: f64,
    pub samples: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,

    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub dt: f64,
    pub steps: usize,
    pub snapshot_every: usize,
    pub cfl_cap: f64,
    pub flux_coefficient: Option<f64>,
    pub flux_exponent: Option<f64>,
    pub source_form: SourceForm,
    pub boundary: Boundary,
    pub dissipation: f64,
    pub ambient_u1: f64,
    pub ambient_u2: f64,
    pub ambient_pi: Option<f64>,
    /// Tracker search radius around the previous center, m; 0 searches the
    /// whole grid.
    pub track_radius: f64,

    pub delta: f64,
    pub search_radius: f64,
    pub grid_n: usize,

    pub sphere_points: usize,
    pub seed: u64,
}

/// The `§4.5`-style base shared by every preset.
fn base() -> Experiment {
    Experiment {
        preset: "sec45".into(),
        omega: 7.3e-5,
        radius: 6.39e6,
        phi0_deg: 30.0,
        gamma3d: 1.4,
        state_const: 1.0,
        c0: Some(0.1),
        beta: None,
        coriolis: ModelKind::L,
        vortex: VortexKind::Gaussian,
        b0: 3.5e-6,
        amplitude: 3.5e3,
        sigma: 1e-9,
        power_k: 0.5,
        sphere_b: None,
        bearing: BearingKind::Localized,
        m10: 2e-3,
        m20: 1e-3,
        k0: 0.0,
        r0: 0.0,
        sigma0: 8e-13,
        x1: 0.0,
        x2: 0.0,
        v1: -1.0,
        v2: 1.0,
        horizon: 7.0 * DAY,
        samples: 7 * 24,
        rel_tol: 1e-10,
        abs_tol: 1e-8,
        nx: 240,
        ny: 240,
        dx: 12_800.0,
        dy: 12_800.0,
        dt: 10.0,
        steps: 0,
        snapshot_every: 0,
        cfl_cap: 0.5,
        flux_coefficient: None,
        flux_exponent: None,
        source_form: SourceForm::Momentum,
        boundary: Boundary::Neumann,
        dissipation: 0.0,
        ambient_u1: 0.0,
        ambient_u2: 0.0,
        ambient_pi: None,
        track_radius: 0.0,
        delta: 1e-6,
        search_radius: 5e5,
        grid_n: 64,
        sphere_points: 10_000,
        seed: 1,
    }
}

pub fn preset(name: &str) -> Result<Experiment> {
    let mut e = base();
    e.preset = name.to_string();
    let (stem, desk) = match name.strip_suffix("-desk") {
        Some(s) => (s, true),
        None => (name, false),
    };
    match stem {
        "sec45" if !desk => {}
        "sec45-linear" if !desk => {
            e.vortex = VortexKind::Linear;
            e.bearing = BearingKind::Linear;
        }
        "fig4" | "fig5-weak" | "fig5-strong" | "fig6-l" | "fig6-beta" => {
            e.ambient_u1 = 10.0;
            e.ambient_u2 = 10.0;
            e.v1 = 10.0;
            e.v2 = 10.0;
            e.bearing = BearingKind::Localized;
            e.m10 = -1e-5;
            e.m20 = 1e-5;
            e.sigma0 = 1e-13;
            let hours = match stem {
                "fig4" => {
                    e.bearing = BearingKind::Zero;
                    96.0
                }
                "fig5-weak" => 24.0,
                "fig5-strong" => {
                    e.m10 *= 10.0;
                    e.m20 *= 10.0;
                    24.0
                }
                "fig6-l" => 48.0,
                _ => {
                    e.coriolis = ModelKind::Beta;
                    48.0
                }
            };
            let hours = if desk { 6.0 } else { hours };
            if desk {
                e.nx = 60;
                e.ny = 60;
            }
            e.steps = (hours * HOUR / e.dt).round() as usize;
            e.snapshot_every = (HOUR / e.dt).round() as usize;
            e.horizon = hours * HOUR;
            e.samples = hours as usize;
            // Generous enough for an advecting core, tight enough to stay
            // on the vortex when boundary noise appears.
            e.track_radius = 10.0 * e.dx;
        }
        _ => {
            return Err(Error::Config {
                line: 0,
                message: format!("unknown preset `{name}` (known: {})", PRESETS.join(", ")),
            })
        }
    }
    Ok(e)
}

/// Notes recorded in the sidecar for settings that depart from or
/// interpret the source parameter lists.
pub fn preset_notes(e: &Experiment) -> Vec<String> {
    let mut notes = Vec::new();
    if e.preset.starts_with("sec45") {
        notes.push("slope parameters M0, N0 of the trajectory comparison are read as m10, m20".into());
    }
    if e.preset.starts_with("fig5-strong") {
        notes.push(
            "stronger bearing field uses 10x the weak slopes; the source lists identical values for both".into(),
        );
    }
    if e.preset.starts_with("fig5") {
        notes.push("figure 5 bearing field taken in localized form with sigma0 = 1e-13".into());
    }
    if e.preset.ends_with("-desk") {
        notes.push("desk preset: 60x60 grid, 6 simulated hours".into());
    }
    notes
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".into(), |x| format!("{x:?}"))
}

impl Experiment {
    /// Every key with its canonical value text, sorted by key.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = |x: f64| format!("{x:?}");
        let mut v = vec![
            ("preset", self.preset.clone()),
            ("omega", f(self.omega)),
            ("radius", f(self.radius)),
            ("phi0_deg", f(self.phi0_deg)),
            ("gamma3d", f(self.gamma3d)),
            ("state_const", f(self.state_const)),
            ("c0", fmt_opt(self.c0)),
            ("beta", fmt_opt(self.beta)),
            ("coriolis", self.coriolis.name().into()),
            (
                "vortex",
                match self.vortex {
                    VortexKind::Linear => "linear",
                    VortexKind::Gaussian => "gaussian",
                    VortexKind::PowerLaw => "power-law",
                }
                .into(),
            ),
            ("b0", f(self.b0)),
            ("amplitude", f(self.amplitude)),
            ("sigma", f(self.sigma)),
            ("power_k", f(self.power_k)),
            ("sphere_b", fmt_opt(self.sphere_b)),
            (
                "bearing",
                match self.bearing {
                    BearingKind::Zero => "zero",
                    BearingKind::Linear => "linear",
                    BearingKind::Localized => "localized",
                }
                .into(),
            ),
            ("m10", f(self.m10)),
            ("m20", f(self.m20)),
            ("k0", f(self.k0)),
            ("r0", f(self.r0)),
            ("sigma0", f(self.sigma0)),
            ("x1", f(self.x1)),
            ("x2", f(self.x2)),
            ("v1", f(self.v1)),
            ("v2", f(self.v2)),
            ("horizon", f(self.horizon)),
            ("samples", self.samples.to_string()),
            ("rel_tol", f(self.rel_tol)),
            ("abs_tol", f(self.abs_tol)),
            ("nx", self.nx.to_string()),
            ("ny", self.ny.to_string()),
            ("dx", f(self.dx)),
            ("dy", f(self.dy)),
            ("dt", f(self.dt)),
            ("steps", self.steps.to_string()),
            ("snapshot_every", self.snapshot_every.to_string()),
            ("cfl_cap", f(self.cfl_cap)),
            ("flux_coefficient", fmt_opt(self.flux_coefficient)),
            ("flux_exponent", fmt_opt(self.flux_exponent)),
            (
                "source_form",
                match self.source_form {
                    SourceForm::Momentum => "momentum",
                    SourceForm::Literal => "literal",
                }
                .into(),
            ),
            (
                "boundary",
                match self.boundary {
                    Boundary::Neumann => "neumann",
                    Boundary::Periodic => "periodic",
                }
                .into(),
            ),
            ("dissipation", f(self.dissipation)),
            ("ambient_u1", f(self.ambient_u1)),
            ("ambient_u2", f(self.ambient_u2)),
            ("ambient_pi", fmt_opt(self.ambient_pi)),
            ("track_radius", f(self.track_radius)),
            ("delta", f(self.delta)),
            ("search_radius", f(self.search_radius)),
            ("grid_n", self.grid_n.to_string()),
            ("sphere_points", self.sphere_points.to_string()),
            ("seed", self.seed.to_string()),
        ];
        v.sort_by_key(|(k, _)| *k);
        v
    }

    /// Keys accepted in config text (everything except `preset`, which is
    /// chosen on the command line).
    pub fn config_keys() -> Vec<&'static str> {
        base()
            .entries()
            .into_iter()
            .map(|(k, _)| k)
            .filter(|k| *k != "preset")
            .collect()
    }

    pub fn apply_config(&mut self, cfg: &KeyValueConfig) -> Result<()> {
        cfg.reject_unknown(&Self::config_keys())?;
        for key in cfg.keys() {
            let value = cfg.get(key).unwrap_or_default();
            self.set(key, value).map_err(|message| Error::Config {
                line: cfg.line_of(key),
                message: format!("`{key}`: {message}"),
            })?;
        }
        Ok(())
    }

    /// Set one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let num = || value.parse::<f64>().map_err(|e| format!("cannot parse `{value}` as a number ({e})"));
        let count = || value.parse::<usize>().map_err(|e| format!("cannot parse `{value}` as a count ({e})"));
        let opt = || -> std::result::Result<Option<f64>, String> {
            if value == "auto" {
                Ok(None)
            } else {
                num().map(Some)
            }
        };
        let bad = |allowed: &str| format!("expected one of {allowed}, got `{value}`");
        match key {
            "omega" => self.omega = num()?,
            "radius" => self.radius = num()?,
            "phi0_deg" => self.phi0_deg = num()?,
            "gamma3d" => self.gamma3d = num()?,
            "state_const" => self.state_const = num()?,
            "c0" => self.c0 = opt()?,
            "beta" => self.beta = opt()?,
            "coriolis" => self.coriolis = ModelKind::parse(value).ok_or_else(|| bad("l, beta, sphere"))?,
            "vortex" => {
                self.vortex = match value {
                    "linear" => VortexKind::Linear,
                    "gaussian" => VortexKind::Gaussian,
                    "power-law" => VortexKind::PowerLaw,
                    _ => return Err(bad("linear, gaussian, power-law")),
                }
            }
            "b0" => self.b0 = num()?,
            "amplitude" => self.amplitude = num()?,
            "sigma" => self.sigma = num()?,
            "power_k" => self.power_k = num()?,
            "sphere_b" => self.sphere_b = opt()?,
            "bearing" => {
                self.bearing = match value {
                    "zero" => BearingKind::Zero,
                    "linear" => BearingKind::Linear,
                    "localized" => BearingKind::Localized,
                    _ => return Err(bad("zero, linear, localized")),
                }
            }
            "m10" => self.m10 = num()?,
            "m20" => self.m20 = num()?,
            "k0" => self.k0 = num()?,
            "r0" => self.r0 = num()?,
            "sigma0" => self.sigma0 = num()?,
            "x1" => self.x1 = num()?,
            "x2" => self.x2 = num()?,
            "v1" => self.v1 = num()?,
            "v2" => self.v2 = num()?,
            "horizon" => self.horizon = num()?,
            "samples" => self.samples = count()?,
            "rel_tol" => self.rel_tol = num()?,
            "abs_tol" => self.abs_tol = num()?,
            "nx" => self.nx = count()?,
            "ny" => self.ny = count()?,
            "dx" => self.dx = num()?,
            "dy" => self.dy = num()?,
            "dt" => self.dt = num()?,
            "steps" => self.steps = count()?,
            "snapshot_every" => self.snapshot_every = count()?,
            "cfl_cap" => self.cfl_cap = num()?,
            "flux_coefficient" => self.flux_coefficient = opt()?,
            "flux_exponent" => self.flux_exponent = opt()?,
            "source_form" => {
                self.source_form = match value {
                    "momentum" => SourceForm::Momentum,
                    "literal" => SourceForm::Literal,
                    _ => return Err(bad("momentum, literal")),
                }
            }
            "boundary" => {
                self.boundary = match value {
                    "neumann" => Boundary::Neumann,
                    "periodic" => Boundary::Periodic,
                    _ => return Err(bad("neumann, periodic")),
                }
            }
            "dissipation" => self.dissipation = num()?,
            "ambient_u1" => self.ambient_u1 = num()?,
            "ambient_u2" => self.ambient_u2 = num()?,
            "ambient_pi" => self.ambient_pi = opt()?,
            "track_radius" => self.track_radius = num()?,
            "delta" => self.delta = num()?,
            "search_radius" => self.search_radius = num()?,
            "grid_n" => self.grid_n = count()?,
            "sphere_points" => self.sphere_points = count()?,
            "seed" => self.seed = value.parse().map_err(|e| format!("cannot parse `{value}` as a seed ({e})"))?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Canonical `key = value` text of the resolved settings.
    pub fn canonical_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// SHA-256 of the canonical text framed as a git blob
    /// (`"blob <len>\0" + text`).
    pub fn config_hash(&self) -> String {
        let text = self.canonical_text();
        let mut h = Sha256::new();
        h.update(format!("blob {}\0", text.len()).as_bytes());
        h.update(text.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        let p = PhysicalParams::derive(
            self.omega,
            self.radius,
            self.phi0_deg * PI / 180.0,
            self.gamma3d,
            self.state_const,
        )?;
        match self.c0 {
            Some(c0) => p.with_c0(c0),
            None => Ok(p),
        }
    }

    pub fn coriolis_model(&self, params: &PhysicalParams) -> CoriolisModel {
        match self.coriolis {
            ModelKind::L => params.l_plane(),
            ModelKind::Beta => match self.beta {
                Some(beta) => CoriolisModel::BetaPlane {
                    l0: params.l0(),
                    beta,
                },
                None => params.beta_plane(),
            },
            ModelKind::Sphere => params.sphere(),
        }
    }

    pub fn vortex_spec(&self) -> Result<VortexSpec> {
        match self.vortex {
            VortexKind::Linear => {
                if !self.b0.is_finite() {
                    return Err(Error::param("b0", format!("must be finite, got {}", self.b0)));
                }
                Ok(VortexSpec::linear(self.b0))
            }
            VortexKind::Gaussian => VortexSpec::gaussian(self.amplitude, self.sigma),
            VortexKind::PowerLaw => VortexSpec::power_law(self.amplitude, self.sigma, self.power_k),
        }
    }

    pub fn bearing_field(&self, vortex: &VortexSpec) -> Result<BearingField> {
        match self.bearing {
            BearingKind::Zero => Ok(BearingField::Zero),
            BearingKind::Linear => Ok(BearingField::LinearSlope {
                m10: self.m10,
                m20: self.m20,
                k0: self.k0,
            }),
            BearingKind::Localized => {
                BearingField::localized(self.r0, self.m10, self.m20, self.k0, self.sigma0, vortex)
            }
        }
    }

    pub fn tolerances(&self) -> Result<Tolerances> {
        Tolerances::new(self.rel_tol, self.abs_tol)
    }

    /// Trajectory problem for the configured Coriolis model. On the sphere
    /// the position and velocity keys are read as metres and m/s measured
    /// from `(λ, φ) = (0, φ₀)`, the vortex is the b-member and `π₁ = 0`.
    pub fn trajectory_problem(&self) -> Result<TrajectoryProblem> {
        let params = self.params()?;
        let coriolis = self.coriolis_model(&params);
        let plane = self.vortex_spec()?;
        if self.coriolis == ModelKind::Sphere {
            let r = self.radius;
            let phi = params.phi0() + self.x2 / r;
            let lam = self.x1 / (r * params.phi0().cos());
            let b = self.sphere_b.unwrap_or(-plane.b0());
            return TrajectoryProblem::new(
                coriolis,
                BearingField::Zero,
                VortexModel::Sphere(SphericalVortexSpec::b_member(b)),
                params.c0(),
                TrajectoryState::new(0.0, [lam, phi], [self.v1 / (r * phi.cos()), self.v2 / r]),
                self.horizon,
            );
        }
        TrajectoryProblem::new(
            coriolis,
            self.bearing_field(&plane)?,
            VortexModel::Plane(plane),
            params.c0(),
            TrajectoryState::new(0.0, [self.x1, self.x2], [self.v1, self.v2]),
            self.horizon,
        )
    }

    /// The same settings on the other plane model.
    pub fn with_model(&self, model: ModelKind) -> Experiment {
        Experiment {
            coriolis: model,
            ..self.clone()
        }
    }

    pub fn grid_setup(&self) -> Result<GridSetup> {
        if self.coriolis == ModelKind::Sphere {
            return Err(Error::Unsupported("the grid solver works on the plane only".into()));
        }
        let params = self.params()?;
        let default = StateRelation::from_params(&params);
        let relation = StateRelation::new(
            self.flux_coefficient.unwrap_or(default.coefficient),
            self.flux_exponent.unwrap_or(default.exponent),
            params.c0(),
        )?;
        let mut config = SolverConfig::new(&params, self.coriolis_model(&params), self.dt)?;
        config.relation = relation;
        config.cfl_cap = self.cfl_cap;
        config.boundary = self.boundary;
        config.source_form = self.source_form;
        config.dissipation = self.dissipation;
        config.validate()?;
        let geometry = GridGeometry::new(self.nx, self.ny, self.dx, self.dy)?;
        let vortex = self.vortex_spec()?;
        let init = VortexInit {
            vortex,
            bearing: self.bearing_field(&vortex)?,
            ambient_velocity: [self.ambient_u1, self.ambient_u2],
            center: [self.x1, self.x2],
            ambient_pi: self.ambient_pi.map_or(AmbientPi::Auto, AmbientPi::Fixed),
        };
        if !(self.track_radius >= 0.0) {
            return Err(Error::param("track_radius", format!("must be >= 0, got {}", self.track_radius)));
        }
        Ok(GridSetup {
            params,
            geometry,
            config,
            init,
        })
    }
}

/// Everything needed to start a grid run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSetup {
    pub params: PhysicalParams,
    pub geometry: GridGeometry,
    pub config: SolverConfig,
    pub init: VortexInit,
}

//! Physical constants, Coriolis-parameter variants and unit conventions.
//!
//! All plane computations run in SI units. The finite-difference experiments
//! were originally posed in a nondimensional scale where one space unit is
//! 20 km and one time unit is 2×10⁴ s; [`units`] converts between the two.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Planetary and gas constants of the reduced barotropic model.
///
/// Constructed through [`PhysicalParams::derive`]; immutable afterwards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    omega: f64,
    earth_radius: f64,
    phi0: f64,
    l0: f64,
    beta: f64,
    gamma3d: f64,
    gamma: f64,
    state_const: f64,
    c0: f64,
    c0_overridden: bool,
}

impl PhysicalParams {
    /// Derive `l0`, `beta`, `gamma` and `c0` from the primary constants.
    ///
    /// `omega` in rad/s, `earth_radius` in m, `phi0` in rad, `state_const` is
    /// the barotropic constant `C` in `P = C ϱ^γ`.
    pub fn derive(
        omega: f64,
        earth_radius: f64,
        phi0: f64,
        gamma3d: f64,
        state_const: f64,
    ) -> Result<Self> {
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(Error::param("omega", format!("must be >= 0, got {omega}")));
        }
        if !(earth_radius > 0.0 && earth_radius.is_finite()) {
            return Err(Error::param(
                "earth_radius",
                format!("must be > 0, got {earth_radius}"),
            ));
        }
        if !(phi0.abs() < FRAC_PI_2) {
            return Err(Error::param("phi0", format!("|phi0| must be < pi/2, got {phi0}")));
        }
        if !(gamma3d > 1.0 && gamma3d.is_finite()) {
            return Err(Error::param("gamma3d", format!("must be > 1, got {gamma3d}")));
        }
        if !(state_const > 0.0 && state_const.is_finite()) {
            return Err(Error::param(
                "state_const",
                format!("must be > 0, got {state_const}"),
            ));
        }
        let gamma = (2.0 * gamma3d - 1.0) / gamma3d;
        Ok(Self {
            omega,
            earth_radius,
            phi0,
            l0: 2.0 * omega * phi0.sin(),
            beta: 2.0 * omega * phi0.cos() / earth_radius,
            gamma3d,
            gamma,
            state_const,
            c0: gamma / (gamma - 1.0) * state_const.powf(1.0 / gamma),
            c0_overridden: false,
        })
    }

    /// Replace the derived `c0` by a directly specified value.
    ///
    /// The `c0 = γ/(γ-1) C^{1/γ}` relation no longer holds afterwards;
    /// [`Self::c0_overridden`] records that.
    pub fn with_c0(mut self, c0: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::param("c0", format!("must be > 0, got {c0}")));
        }
        self.c0 = c0;
        self.c0_overridden = true;
        Ok(self)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn earth_radius(&self) -> f64 {
        self.earth_radius
    }
    pub fn phi0(&self) -> f64 {
        self.phi0
    }
    pub fn l0(&self) -> f64 {
        self.l0
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma3d(&self) -> f64 {
        self.gamma3d
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn state_const(&self) -> f64 {
        self.state_const
    }
    pub fn c0(&self) -> f64 {
        self.c0
    }
    pub fn c0_overridden(&self) -> bool {
        self.c0_overridden
    }

    pub fn l_plane(&self) -> CoriolisModel {
        CoriolisModel::LPlane { l0: self.l0 }
    }

    pub fn beta_plane(&self) -> CoriolisModel {
        CoriolisModel::BetaPlane {
            l0: self.l0,
            beta: self.beta,
        }
    }

    pub fn sphere(&self) -> CoriolisModel {
        CoriolisModel::Sphere { omega: self.omega }
    }
}

/// Coriolis parameter `l(x)`.
///
/// Plane variants take positions in meters with `x₂` pointing north and the
/// origin at the reference latitude. `Sphere` takes `(λ, φ)` in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoriolisModel {
    LPlane { l0: f64 },
    BetaPlane { l0: f64, beta: f64 },
    Sphere { omega: f64 },
}

impl CoriolisModel {
    pub fn coriolis_at(&self, position: [f64; 2]) -> Result<f64> {
        match *self {
            CoriolisModel::LPlane { l0 } => Ok(l0),
            CoriolisModel::BetaPlane { l0, beta } => Ok(l0 + beta * position[1]),
            CoriolisModel::Sphere { omega } => {
                let lat = position[1];
                if !(lat.abs() < FRAC_PI_2) {
                    return Err(Error::Domain(format!(
                        "latitude {lat} rad outside (-pi/2, pi/2)"
                    )));
                }
                Ok(2.0 * omega * lat.sin())
            }
        }
    }

    /// Coriolis parameter at the chart origin / reference latitude.
    pub fn reference(&self) -> f64 {
        match *self {
            CoriolisModel::LPlane { l0 } | CoriolisModel::BetaPlane { l0, .. } => l0,
            CoriolisModel::Sphere { .. } => 0.0,
        }
    }

    pub fn is_plane(&self) -> bool {
        !matches!(self, CoriolisModel::Sphere { .. })
    }

    pub fn mirrored(&self) -> Self {
        match *self {
            CoriolisModel::LPlane { l0 } => CoriolisModel::LPlane { l0: -l0 },
            CoriolisModel::BetaPlane { l0, beta } => CoriolisModel::BetaPlane {
                l0: -l0,
                beta: -beta,
            },
            CoriolisModel::Sphere { omega } => CoriolisModel::Sphere { omega: -omega },
        }
    }
}

/// Constant 2×2 matrix acting on velocities, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    /// The rotation generator `L = [[0, -1], [1, 0]]`.
    pub const L: Mat2 = Mat2([[0.0, -1.0], [1.0, 0.0]]);

    /// `l · L`, the Coriolis matrix for a constant parameter `l`.
    pub fn coriolis(l: f64) -> Self {
        Mat2([[0.0, -l], [l, 0.0]])
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// `L v = (-v₂, v₁)`.
#[inline]
pub fn rotate_l(v: [f64; 2]) -> [f64; 2] {
    [-v[1], v[0]]
}

pub mod units {
    //! Conversion between the nondimensional grid scale and SI.
    //!
    //! A grid step of 0.64 corresponds to 12.8 km and a time step of 0.0005
    //! to 10 s, so velocities carry the same numbers in both systems.

    pub const LENGTH_UNIT_M: f64 = 20_000.0;
    pub const TIME_UNIT_S: f64 = 20_000.0;

    pub fn length_to_si(x: f64) -> f64 {
        x * LENGTH_UNIT_M
    }
    pub fn length_from_si(x: f64) -> f64 {
        x / LENGTH_UNIT_M
    }
    pub fn time_to_si(t: f64) -> f64 {
        t * TIME_UNIT_S
    }
    pub fn time_from_si(t: f64) -> f64 {
        t / TIME_UNIT_S
    }
    pub fn rate_to_si(r: f64) -> f64 {
        r / TIME_UNIT_S
    }
}

pub mod config {
    //! `key = value` configuration text.
    //!
    //! Blank lines and lines starting with `#` are skipped. Keys may appear
    //! once; the schema (which keys are allowed) is the caller's business.

    use std::collections::BTreeMap;

    use crate::error::{Error, Result};

    #[derive(Clone, Debug, Default, PartialEq)]
    pub struct KeyValueConfig {
        entries: BTreeMap<String, (usize, String)>,
    }

    impl KeyValueConfig {
        pub fn parse(text: &str) -> Result<Self> {
            let mut entries = BTreeMap::new();
            for (idx, raw) in text.lines().enumerate() {
                let line = idx + 1;
                let content = raw.split('#').next().unwrap_or("").trim();
                if content.is_empty() {
                    continue;
                }
                let Some((key, value)) = content.split_once('=') else {
                    return Err(Error::Config {
                        line,
                        message: format!("expected `key = value`, got `{content}`"),
                    });
                };
                let key = key.trim().to_string();
                let value = value.trim().to_string();
                if key.is_empty() {
                    return Err(Error::Config {
                        line,
                        message: "empty key".into(),
                    });
                }
                if let Some((first, _)) = entries.get(&key) {
                    return Err(Error::Config {
                        line,
                        message: format!("duplicate key `{key}` (first set on line {first})"),
                    });
                }
                entries.insert(key, (line, value));
            }
            Ok(Self { entries })
        }

        /// Fail on the first key not in `allowed`.
        pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
            for (key, (line, _)) in &self.entries {
                if !allowed.contains(&key.as_str()) {
                    return Err(Error::Config {
                        line: *line,
                        message: format!("unknown key `{key}`"),
                    });
                }
            }
            Ok(())
        }

        pub fn get(&self, key: &str) -> Option<&str> {
            self.entries.get(key).map(|(_, v)| v.as_str())
        }

        pub fn line_of(&self, key: &str) -> usize {
            self.entries.get(key).map_or(0, |(l, _)| *l)
        }

        pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
            self.get(key)
                .map(|v| {
                    v.parse::<f64>().map_err(|e| Error::Config {
                        line: self.line_of(key),
                        message: format!("`{key}`: cannot parse `{v}` as a number ({e})"),
                    })
                })
                .transpose()
        }

        pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
            self.get(key)
                .map(|v| {
                    v.parse::<usize>().map_err(|e| Error::Config {
                        line: self.line_of(key),
                        message: format!("`{key}`: cannot parse `{v}` as a count ({e})"),
                    })
                })
                .transpose()
        }

        pub fn keys(&self) -> impl Iterator<Item = &str> {
            self.entries.keys().map(String::as_str)
        }

        pub fn is_empty(&self) -> bool {
            self.entries.is_empty()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sec45() -> PhysicalParams {
        PhysicalParams::derive(7.3e-5, 6.4e6, PI / 6.0, 1.4, 1.0).unwrap()
    }

    #[test]
    fn l_plane_at_thirty_degrees() {
        let p = sec45();
        let l = p.l_plane().coriolis_at([1e5, -2e5]).unwrap();
        assert!((l - 7.3e-5).abs() < 1e-18);
    }

    #[test]
    fn beta_matches_reported_magnitude() {
        let p = sec45();
        assert!((p.beta() - 2e-11).abs() < 0.05e-11, "beta = {}", p.beta());
    }

    #[test]
    fn beta_plane_at_equator_of_chart_is_l0() {
        let p = sec45();
        assert_eq!(p.beta_plane().coriolis_at([3e5, 0.0]).unwrap(), p.l0());
    }

    #[test]
    fn sphere_coriolis() {
        let m = CoriolisModel::Sphere { omega: 7.3e-5 };
        assert_eq!(m.coriolis_at([0.3, 0.0]).unwrap(), 0.0);
        assert!(matches!(m.coriolis_at([0.0, FRAC_PI_2]), Err(Error::Domain(_))));
        assert!(matches!(m.coriolis_at([0.0, -2.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_from_gamma3d() {
        let p = PhysicalParams::derive(0.0, 1.0, 0.0, 1.4, 1.0).unwrap();
        assert!((p.gamma() - 9.0 / 7.0).abs() < 1e-15);
        let p = PhysicalParams::derive(0.0, 1.0, 0.0, 2.0, 1.0).unwrap();
        assert_eq!(p.gamma(), 1.5);
    }

    #[test]
    fn c0_relation_and_override() {
        let p = PhysicalParams::derive(7.3e-5, 6.4e6, 0.5, 1.4, 2.5).unwrap();
        let g = p.gamma();
        assert!((p.c0() - g / (g - 1.0) * 2.5_f64.powf(1.0 / g)).abs() < 1e-14);
        assert!(!p.c0_overridden());
        let q = p.with_c0(0.1).unwrap();
        assert_eq!(q.c0(), 0.1);
        assert!(q.c0_overridden());
        assert!(p.with_c0(-1.0).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(PhysicalParams::derive(-1.0, 1.0, 0.0, 1.4, 1.0).is_err());
        assert!(PhysicalParams::derive(1.0, 0.0, 0.0, 1.4, 1.0).is_err());
        assert!(PhysicalParams::derive(1.0, 1.0, 2.0, 1.4, 1.0).is_err());
        assert!(PhysicalParams::derive(1.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(PhysicalParams::derive(1.0, 1.0, 0.0, 1.4, 0.0).is_err());
    }

    #[test]
    fn unit_conversion_matches_grid_equivalences() {
        assert!((units::length_to_si(0.64) - 12_800.0).abs() < 1e-9);
        assert!((units::time_to_si(0.0005) - 10.0).abs() < 1e-12);
        assert!((units::length_from_si(units::length_to_si(3.7)) - 3.7).abs() < 1e-15);
    }

    #[test]
    fn config_parsing() {
        let text = "# header\nomega = 7.3e-5\n\nphi0_deg=30 # trailing\ncoriolis = beta\n";
        let cfg = config::KeyValueConfig::parse(text).unwrap();
        assert_eq!(cfg.get_f64("omega").unwrap(), Some(7.3e-5));
        assert_eq!(cfg.get("coriolis"), Some("beta"));
        assert_eq!(cfg.line_of("phi0_deg"), 4);
        cfg.reject_unknown(&["omega", "phi0_deg", "coriolis"]).unwrap();
        match cfg.reject_unknown(&["omega", "coriolis"]) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            config::KeyValueConfig::parse("a = 1\na = 2"),
            Err(Error::Config { line: 2, .. })
        ));
        assert!(matches!(
            config::KeyValueConfig::parse("just words"),
            Err(Error::Config { line: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn derived_values_round_trip(omega in 0.0..2e-4f64, radius in 1e6..1e7f64, phi0 in -1.5..1.5f64) {
            let p = PhysicalParams::derive(omega, radius, phi0, 1.4, 1.0).unwrap();
            let l0 = 2.0 * omega * phi0.sin();
            let beta = 2.0 * omega * phi0.cos() / radius;
            prop_assert!((p.l0() - l0).abs() <= 4.0 * f64::EPSILON * l0.abs());
            prop_assert!((p.beta() - beta).abs() <= 4.0 * f64::EPSILON * beta.abs());
        }

        #[test]
        fn gamma_below_gamma3d(g3 in 1.0001..10.0f64) {
            let p = PhysicalParams::derive(0.0, 1.0, 0.0, g3, 1.0).unwrap();
            prop_assert!(p.gamma() > 1.0 && p.gamma() < g3);
        }
    }
}

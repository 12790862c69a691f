//! Vortex potentials `Φ`, their velocity fields `u = ∇⊥Φ = (Φ_{x₂}, -Φ_{x₁})`,
//! the steady pressure `π₀` and the bearing field `π₁`.
//!
//! Every derivative here is analytic. Residuals of the master equation and of
//! the curl compatibility condition are therefore free of discretization
//! error; finite differences only appear in the tests, as oracles.

use crate::error::{Error, Result};
use crate::model::{rotate_l, Mat2, PhysicalParams};

/// A smooth scalar potential on the plane with analytic derivatives up to
/// third order. Hessians are `(xx, xy, yy)`, third derivatives
/// `(xxx, xxy, xyy, yyy)`.
pub trait StreamFunction {
    fn value(&self, x: [f64; 2]) -> f64;
    fn gradient(&self, x: [f64; 2]) -> [f64; 2];
    fn hessian(&self, x: [f64; 2]) -> [f64; 3];
    fn third(&self, x: [f64; 2]) -> [f64; 4];
}

/// `∇⊥Φ` at `x`.
pub fn velocity_of<P: StreamFunction + ?Sized>(phi: &P, x: [f64; 2]) -> [f64; 2] {
    let g = phi.gradient(x);
    [g[1], -g[0]]
}

/// A residual value together with the magnitude of the terms it was built
/// from, so that "zero to round-off" can be judged relative to term size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.value.abs() / self.scale
        } else {
            self.value.abs()
        }
    }
}

/// Radial vortex families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VortexSpec {
    /// `Φ = (b₀/2) r²`: solid rotation `u = (b₀x₂, -b₀x₁)`.
    Linear { b0: f64 },
    /// `Φ = -B₀ exp(-σr²/2)`.
    Gaussian { amplitude: f64, sigma: f64 },
    /// `Φ = a (1 + σr²)^{-k}`.
    PowerLaw { a: f64, sigma: f64, k: f64 },
}

impl VortexSpec {
    pub fn linear(b0: f64) -> Self {
        VortexSpec::Linear { b0 }
    }

    pub fn gaussian(amplitude: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::param("sigma", format!("must be > 0, got {sigma}")));
        }
        Ok(VortexSpec::Gaussian { amplitude, sigma })
    }

    pub fn power_law(a: f64, sigma: f64, k: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::param("sigma", format!("must be > 0, got {sigma}")));
        }
        if !(k > 0.0) {
            return Err(Error::param("k", format!("must be > 0, got {k}")));
        }
        Ok(VortexSpec::PowerLaw { a, sigma, k })
    }

    /// Gaussian vortex used for the trajectory comparisons and the grid
    /// experiments: `B₀ = 3.5×10³ m²/s`, `σ = 10⁻⁹ m⁻²`.
    pub fn gaussian_trajectory_preset() -> Self {
        VortexSpec::Gaussian {
            amplitude: 3.5e3,
            sigma: 1e-9,
        }
    }

    /// Gaussian profile quoted next to the velocity-profile figure:
    /// `B₀ = 3.5×10⁻⁶ m²/s`, `σ = 10⁻⁹ m⁻²`.
    pub fn gaussian_profile_figure_preset() -> Self {
        VortexSpec::Gaussian {
            amplitude: 3.5e-6,
            sigma: 1e-9,
        }
    }

    /// Power-law profile quoted next to the velocity-profile figure.
    pub fn power_law_profile_figure_preset() -> Self {
        VortexSpec::PowerLaw {
            a: 7.8e6,
            sigma: 5e-10,
            k: 0.5,
        }
    }

    /// Angular velocity of the solid-body rotation at the center,
    /// `u ≈ (b₀x₂, -b₀x₁)` as `x → 0`.
    pub fn b0(&self) -> f64 {
        2.0 * self.radial_derivatives(0.0)[1]
    }

    pub fn velocity(&self, x: [f64; 2]) -> [f64; 2] {
        velocity_of(self, x)
    }

    /// `(Φ, Φ', Φ'', Φ''')` as functions of `s = r²`.
    fn radial_derivatives(&self, s: f64) -> [f64; 4] {
        match *self {
            VortexSpec::Linear { b0 } => [0.5 * b0 * s, 0.5 * b0, 0.0, 0.0],
            VortexSpec::Gaussian { amplitude, sigma } => {
                let e = (-0.5 * sigma * s).exp();
                let b = amplitude;
                [
                    -b * e,
                    0.5 * b * sigma * e,
                    -0.25 * b * sigma * sigma * e,
                    0.125 * b * sigma.powi(3) * e,
                ]
            }
            VortexSpec::PowerLaw { a, sigma, k } => {
                let w = 1.0 + sigma * s;
                [
                    a * w.powf(-k),
                    -a * k * sigma * w.powf(-k - 1.0),
                    a * k * (k + 1.0) * sigma * sigma * w.powf(-k - 2.0),
                    -a * k * (k + 1.0) * (k + 2.0) * sigma.powi(3) * w.powf(-k - 3.0),
                ]
            }
        }
    }
}

impl StreamFunction for VortexSpec {
    fn value(&self, x: [f64; 2]) -> f64 {
        self.radial_derivatives(x[0] * x[0] + x[1] * x[1])[0]
    }

    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let g1 = self.radial_derivatives(x[0] * x[0] + x[1] * x[1])[1];
        [2.0 * x[0] * g1, 2.0 * x[1] * g1]
    }

    fn hessian(&self, x: [f64; 2]) -> [f64; 3] {
        let [_, g1, g2, _] = self.radial_derivatives(x[0] * x[0] + x[1] * x[1]);
        [
            2.0 * g1 + 4.0 * x[0] * x[0] * g2,
            4.0 * x[0] * x[1] * g2,
            2.0 * g1 + 4.0 * x[1] * x[1] * g2,
        ]
    }

    fn third(&self, x: [f64; 2]) -> [f64; 4] {
        let [_, _, g2, g3] = self.radial_derivatives(x[0] * x[0] + x[1] * x[1]);
        let (a, b) = (x[0], x[1]);
        // Φ_ijk = 4 (δ_ij x_k + δ_ik x_j + δ_jk x_i) Φ'' + 8 x_i x_j x_k Φ'''
        [
            12.0 * a * g2 + 8.0 * a * a * a * g3,
            4.0 * b * g2 + 8.0 * a * a * b * g3,
            4.0 * a * g2 + 8.0 * a * b * b * g3,
            12.0 * b * g2 + 8.0 * b * b * b * g3,
        ]
    }
}

/// Inner product of `(∇⊥Φ·∇)∇⊥Φ + A∇⊥Φ` with `∇⊥Φ`.
///
/// Expanded in derivatives of `Φ` this is
/// `Φ₁₂(Φ₂² − Φ₁²) + Φ₁Φ₂(Φ₁₁ − Φ₂₂) + (A∇⊥Φ, ∇⊥Φ)`,
/// which vanishes for every radial `Φ` when `A = l₀L`.
pub fn master_residual<P: StreamFunction + ?Sized>(phi: &P, a: &Mat2, x: [f64; 2]) -> Residual {
    let [p1, p2] = phi.gradient(x);
    let [p11, p12, p22] = phi.hessian(x);
    let u = [p2, -p1];
    let au = a.apply(u);
    let t1 = p12 * (p2 * p2 - p1 * p1);
    let t2 = p1 * p2 * (p11 - p22);
    let t3 = au[0] * u[0] + au[1] * u[1];
    Residual {
        value: t1 + t2 + t3,
        scale: p12.abs() * (p1 * p1 + p2 * p2)
            + (p1 * p2).abs() * (p11.abs() + p22.abs())
            + a.max_abs() * (u[0] * u[0] + u[1] * u[1]),
    }
}

/// Scalar curl `∂₁W₂ − ∂₂W₁` of `W = (∇⊥Φ·∇)∇⊥Φ + A∇⊥Φ` for constant `A`.
pub fn curl_compatibility_residual<P: StreamFunction + ?Sized>(
    phi: &P,
    a: &Mat2,
    x: [f64; 2],
) -> Residual {
    let [p1, p2] = phi.gradient(x);
    let [p11, p12, p22] = phi.hessian(x);
    let [p111, p112, p122, p222] = phi.third(x);
    let m = &a.0;
    let advective = p1 * (p112 + p222) - p2 * (p111 + p122);
    let linear = (m[1][0] + m[0][1]) * p12 - m[1][1] * p11 - m[0][0] * p22;
    Residual {
        value: advective + linear,
        scale: p1.abs() * (p112.abs() + p222.abs())
            + p2.abs() * (p111.abs() + p122.abs())
            + a.max_abs() * (2.0 * p12.abs() + p11.abs() + p22.abs()),
    }
}

/// Steady pressure `π₀` balancing `(u·∇)u + l₀Lu + c₀∇π₀ = 0`.
///
/// Gauge: the Linear family is zero at the center; the Gaussian family is
/// the closed form that decays to zero at infinity.
pub fn steady_pressure(spec: &VortexSpec, params: &PhysicalParams, x: [f64; 2]) -> Result<f64> {
    let c0 = params.c0();
    let l0 = params.l0();
    let r2 = x[0] * x[0] + x[1] * x[1];
    match *spec {
        VortexSpec::Linear { b0 } => Ok(b0 * (b0 - l0) * r2 / (2.0 * c0)),
        VortexSpec::Gaussian { amplitude, sigma } => {
            let b = amplitude;
            Ok((-0.5 * b * b * sigma * (-sigma * r2).exp() + l0 * b * (-0.5 * sigma * r2).exp()) / c0)
        }
        VortexSpec::PowerLaw { .. } => Err(Error::Unsupported(
            "steady pressure of the power-law family has no closed form; integrate the radial balance numerically".into(),
        )),
    }
}

/// Time-dependent pressure component `π₁`, transported by the vortex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BearingField {
    Zero,
    /// `π₁ = M₁(t)x₁ + M₂(t)x₂ + K₀`; the slope rotates with the vortex
    /// center angular velocity `b₀`.
    LinearSlope { m10: f64, m20: f64, k0: f64 },
    /// `π₁ = R₀ + exp(-σ₀r²)(K₀ + M₁₀(x₁cosθ − x₂sinθ) + M₂₀(x₂cosθ + x₁sinθ))`,
    /// `θ = B₀σ exp(-σr²/2) t`, transported by the Gaussian vortex `(B₀, σ)`.
    LocalizedSlope {
        r0: f64,
        m10: f64,
        m20: f64,
        k0: f64,
        sigma0: f64,
        sigma: f64,
        amplitude: f64,
    },
}

impl BearingField {
    #[allow(clippy::too_many_arguments)]
    pub fn localized(
        r0: f64,
        m10: f64,
        m20: f64,
        k0: f64,
        sigma0: f64,
        vortex: &VortexSpec,
    ) -> Result<Self> {
        if !(sigma0 > 0.0) {
            return Err(Error::param("sigma0", format!("must be > 0, got {sigma0}")));
        }
        let VortexSpec::Gaussian { amplitude, sigma } = *vortex else {
            return Err(Error::Unsupported(
                "the localized bearing field is transported only by the Gaussian vortex".into(),
            ));
        };
        Ok(BearingField::LocalizedSlope {
            r0,
            m10,
            m20,
            k0,
            sigma0,
            sigma,
            amplitude,
        })
    }

    /// Initial slope `(M₁₀, M₂₀)`.
    pub fn initial_slope(&self) -> [f64; 2] {
        match *self {
            BearingField::Zero => [0.0, 0.0],
            BearingField::LinearSlope { m10, m20, .. }
            | BearingField::LocalizedSlope { m10, m20, .. } => [m10, m20],
        }
    }

    /// Rotation rate of the slope at the origin. `b0` is the center angular
    /// velocity of the transporting vortex; the localized field carries its
    /// own.
    pub(crate) fn rotation_rate(&self, b0: f64) -> f64 {
        match *self {
            BearingField::LocalizedSlope {
                sigma, amplitude, ..
            } => amplitude * sigma,
            _ => b0,
        }
    }

    /// `π₁(t, x)`.
    pub fn value(&self, t: f64, x: [f64; 2], b0: f64) -> f64 {
        match *self {
            BearingField::Zero => 0.0,
            BearingField::LinearSlope { k0, .. } => {
                let [m1, m2] = self.gradient_at_origin(t, b0);
                m1 * x[0] + m2 * x[1] + k0
            }
            BearingField::LocalizedSlope {
                r0,
                m10,
                m20,
                k0,
                sigma0,
                sigma,
                amplitude,
            } => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                let theta = amplitude * sigma * (-0.5 * sigma * r2).exp() * t;
                let (s, c) = theta.sin_cos();
                let envelope = (-sigma0 * r2).exp();
                r0 + envelope
                    * (k0 + m10 * (x[0] * c - x[1] * s) + m20 * (x[1] * c + x[0] * s))
            }
        }
    }

    /// `∇π₁(t, x)`.
    pub fn gradient(&self, t: f64, x: [f64; 2], b0: f64) -> [f64; 2] {
        match *self {
            BearingField::Zero => [0.0, 0.0],
            BearingField::LinearSlope { .. } => self.gradient_at_origin(t, b0),
            BearingField::LocalizedSlope {
                m10,
                m20,
                k0,
                sigma0,
                sigma,
                amplitude,
                ..
            } => {
                let (x1, x2) = (x[0], x[1]);
                let r2 = x1 * x1 + x2 * x2;
                let omega = amplitude * sigma * (-0.5 * sigma * r2).exp();
                let theta = omega * t;
                let (s, c) = theta.sin_cos();
                let envelope = (-sigma0 * r2).exp();
                let w = k0 + m10 * (x1 * c - x2 * s) + m20 * (x2 * c + x1 * s);
                // ∂W/∂θ
                let dw = m10 * (-x1 * s - x2 * c) + m20 * (x1 * c - x2 * s);
                // ∇θ = -σ x ω t
                let dtheta = [-sigma * x1 * omega * t, -sigma * x2 * omega * t];
                let grad_w = [
                    m10 * c + m20 * s + dtheta[0] * dw,
                    -m10 * s + m20 * c + dtheta[1] * dw,
                ];
                let grad_env = [-2.0 * sigma0 * x1 * envelope, -2.0 * sigma0 * x2 * envelope];
                [
                    envelope * grad_w[0] + w * grad_env[0],
                    envelope * grad_w[1] + w * grad_env[1],
                ]
            }
        }
    }

    /// `∇π₁(t, 0) = (M₁(t), M₂(t))` with
    /// `M₁ = M₁₀cos b₀t + M₂₀sin b₀t`, `M₂ = M₂₀cos b₀t − M₁₀sin b₀t`.
    pub fn gradient_at_origin(&self, t: f64, b0: f64) -> [f64; 2] {
        let [m10, m20] = self.initial_slope();
        let (s, c) = (self.rotation_rate(b0) * t).sin_cos();
        [m10 * c + m20 * s, m20 * c - m10 * s]
    }
}

/// Scalar advection residual `∂ₜπ₁ + u·∇π₁` using the analytic gradient and a
/// caller-supplied time derivative.
pub fn transport_rate(spec: &VortexSpec, field: &BearingField, t: f64, x: [f64; 2], dt_pi1: f64) -> f64 {
    let u = spec.velocity(x);
    let g = field.gradient(t, x, spec.b0());
    dt_pi1 + u[0] * g[0] + u[1] * g[1]
}

/// Coriolis-type matrix term `A u` for the default `A = l₀L`.
pub fn default_a(l0: f64) -> Mat2 {
    Mat2::coriolis(l0)
}

/// Residual of the steady balance `(u·∇)u + Au + c₀∇π₀` for the radial
/// families with a closed-form `π₀`, evaluated analytically.
pub fn steady_balance_residual(
    spec: &VortexSpec,
    params: &PhysicalParams,
    x: [f64; 2],
) -> Result<[Residual; 2]> {
    // Radial balance: (u·∇)u = -ω²x, l₀Lu = l₀ωx, c₀∇π₀ = c₀π₀'(r) x/r.
    let u = spec.velocity(x);
    let [p11, p12, p22] = spec.hessian(x);
    let adv = [
        u[0] * p12 + u[1] * p22,
        -(u[0] * p11 + u[1] * p12),
    ];
    let lu = rotate_l(u);
    let l0 = params.l0();
    let c0 = params.c0();
    let r2 = x[0] * x[0] + x[1] * x[1];
    let dpi_dr2 = match *spec {
        VortexSpec::Linear { b0 } => b0 * (b0 - l0) / (2.0 * c0),
        VortexSpec::Gaussian { amplitude, sigma } => {
            let b = amplitude;
            (0.5 * b * b * sigma * sigma * (-sigma * r2).exp()
                - 0.5 * l0 * b * sigma * (-0.5 * sigma * r2).exp())
                / c0
        }
        VortexSpec::PowerLaw { .. } => {
            return Err(Error::Unsupported(
                "steady pressure of the power-law family has no closed form".into(),
            ))
        }
    };
    let grad_pi = [2.0 * x[0] * dpi_dr2, 2.0 * x[1] * dpi_dr2];
    let mut out = [Residual { value: 0.0, scale: 0.0 }; 2];
    for k in 0..2 {
        let terms = [adv[k], l0 * lu[k], c0 * grad_pi[k]];
        out[k] = Residual {
            value: terms.iter().sum(),
            scale: terms.iter().map(|t| t.abs()).sum(),
        };
    }
    Ok(out)
}

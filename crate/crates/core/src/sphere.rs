//! Vortices on the unit sphere in the `(λ, φ)` chart.
//!
//! Velocity is `u = Φ_φ`, `v = −Φ_λ / cos φ`. The family
//! `Φ = f(cos φ (a sin λ + b cos λ) + h sin φ)` describes rigid-body-like
//! rotation about a fixed axis; its kinetic energy is constant along
//! streamlines, which is what the spherical master equation expresses.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::model::PhysicalParams;
use crate::potential::Residual;

/// Outer function `f` in `Φ = f(η)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    Identity,
    /// `f(η) = exp(scale·η)`
    Exp { scale: f64 },
    /// `f(η) = sin(scale·η)`
    Sin { scale: f64 },
}

impl Profile {
    /// `(f, f', f'')` at `η`.
    fn derivatives(&self, eta: f64) -> [f64; 3] {
        match *self {
            Profile::Identity => [eta, 1.0, 0.0],
            Profile::Exp { scale } => {
                let e = (scale * eta).exp();
                [e, scale * e, scale * scale * e]
            }
            Profile::Sin { scale } => {
                let (s, c) = (scale * eta).sin_cos();
                [s, scale * c, -scale * scale * s]
            }
        }
    }
}

/// Potential value with its first and second chart derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartDerivatives {
    pub value: f64,
    pub d_lam: f64,
    pub d_phi: f64,
    pub d_lam_lam: f64,
    pub d_lam_phi: f64,
    pub d_phi_phi: f64,
}

/// Anything with analytic chart derivatives up to second order.
pub trait SphericalPotential {
    fn chart_derivatives(&self, lam: f64, phi: f64) -> ChartDerivatives;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalVortexSpec {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub profile: Profile,
}

impl SphericalVortexSpec {
    pub fn new(a: f64, b: f64, h: f64, profile: Profile) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("h", h)] {
            if !v.is_finite() {
                return Err(Error::param(name, format!("must be finite, got {v}")));
            }
        }
        Ok(SphericalVortexSpec { a, b, h, profile })
    }

    /// `Φ = b cos λ cos φ`.
    pub fn b_member(b: f64) -> Self {
        SphericalVortexSpec {
            a: 0.0,
            b,
            h: 0.0,
            profile: Profile::Identity,
        }
    }

    /// `Φ = h sin φ`.
    pub fn zonal(h: f64) -> Self {
        SphericalVortexSpec {
            a: 0.0,
            b: 0.0,
            h,
            profile: Profile::Identity,
        }
    }

    pub fn is_b_member(&self) -> bool {
        self.a == 0.0 && self.h == 0.0 && self.profile == Profile::Identity
    }

    pub fn is_zonal(&self) -> bool {
        self.a == 0.0 && self.b == 0.0 && self.profile == Profile::Identity
    }

    /// Solid-body angular velocity at the chart origin, with the plane sign
    /// convention `u ≈ (b₀φ, −b₀λ)`.
    pub fn center_rate(&self) -> f64 {
        -self.b * self.profile.derivatives(self.b)[1]
    }

    pub fn velocity(&self, lam: f64, phi: f64) -> Result<[f64; 2]> {
        check_chart(lam, phi)?;
        let d = self.chart_derivatives(lam, phi);
        Ok([d.d_phi, -d.d_lam / phi.cos()])
    }
}

impl SphericalPotential for SphericalVortexSpec {
    fn chart_derivatives(&self, lam: f64, phi: f64) -> ChartDerivatives {
        let (sl, cl) = lam.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let (a, b, h) = (self.a, self.b, self.h);
        let horiz = a * sl + b * cl;
        let horiz_l = a * cl - b * sl;
        let eta = cp * horiz + h * sp;
        let e_l = cp * horiz_l;
        let e_p = -sp * horiz + h * cp;
        let e_ll = -cp * horiz;
        let e_lp = -sp * horiz_l;
        let e_pp = -eta;
        let [f0, f1, f2] = self.profile.derivatives(eta);
        ChartDerivatives {
            value: f0,
            d_lam: f1 * e_l,
            d_phi: f1 * e_p,
            d_lam_lam: f2 * e_l * e_l + f1 * e_ll,
            d_lam_phi: f2 * e_l * e_p + f1 * e_lp,
            d_phi_phi: f2 * e_p * e_p + f1 * e_pp,
        }
    }
}

fn check_chart(lam: f64, phi: f64) -> Result<()> {
    if !(lam.abs() < PI) {
        return Err(Error::Domain(format!("longitude {lam} rad outside (-pi, pi)")));
    }
    if !(phi.abs() < FRAC_PI_2) {
        return Err(Error::Domain(format!("latitude {phi} rad outside (-pi/2, pi/2)")));
    }
    Ok(())
}

/// Residual of the spherical master equation
/// `Φ_λφ(Φ_φ² − Φ_λ²/cos²φ) + (Φ_λλ/cos²φ − Φ_φφ)Φ_λΦ_φ − (sin φ/cos³φ)Φ_λ³`.
pub fn spherical_master_residual<P: SphericalPotential + ?Sized>(phi_fn: &P, lam: f64, phi: f64) -> Residual {
    let d = phi_fn.chart_derivatives(lam, phi);
    let (sp, cp) = phi.sin_cos();
    let c2 = cp * cp;
    let t1 = d.d_lam_phi * d.d_phi * d.d_phi;
    let t2 = -d.d_lam_phi * d.d_lam * d.d_lam / c2;
    let t3 = d.d_lam_lam / c2 * d.d_lam * d.d_phi;
    let t4 = -d.d_phi_phi * d.d_lam * d.d_phi;
    let t5 = -sp / (c2 * cp) * d.d_lam.powi(3);
    let terms = [t1, t2, t3, t4, t5];
    Residual {
        value: terms.iter().sum(),
        scale: terms.iter().map(|t| t.abs()).sum(),
    }
}

/// Which closed-form steady pressure applies, with its matrix `A = a(φ)L`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum PressureCase {
    /// `A = l₀L`
    BMember { b: f64 },
    /// `A = 2Ω sin φ L`
    Zonal { h: f64 },
}

fn pressure_case(spec: &SphericalVortexSpec) -> Result<PressureCase> {
    if spec.is_b_member() {
        Ok(PressureCase::BMember { b: spec.b })
    } else if spec.is_zonal() {
        Ok(PressureCase::Zonal { h: spec.h })
    } else {
        Err(Error::Unsupported(
            "steady pressure is available only for Φ = b cos λ cos φ and Φ = h sin φ".into(),
        ))
    }
}

/// `(π₀, ∂_λπ₀, ∂_φπ₀)` with zero gauge constant.
fn pressure_with_gradient(case: PressureCase, params: &PhysicalParams, lam: f64, phi: f64) -> [f64; 3] {
    let c0 = params.c0();
    let (sl, cl) = lam.sin_cos();
    let (sp, cp) = phi.sin_cos();
    match case {
        PressureCase::BMember { b } => {
            let l0 = params.l0();
            let s = cl * cp;
            let value = -(b * s / (2.0 * c0)) * (b * s + 2.0 * l0);
            let ds = -(b * b * s + l0 * b) / c0;
            [value, ds * (-sl * cp), ds * (-cl * sp)]
        }
        PressureCase::Zonal { h } => {
            let w = params.omega();
            let k = -h * (h + 2.0 * w) / (2.0 * c0);
            [k * sp * sp, 0.0, 2.0 * k * sp * cp]
        }
    }
}

/// Steady pressure `π₀` of the b-member (`A = l₀L`) or the zonal member
/// (`A = 2Ω sin φ L`).
pub fn spherical_steady_pressure(
    spec: &SphericalVortexSpec,
    params: &PhysicalParams,
    lam: f64,
    phi: f64,
) -> Result<f64> {
    check_chart(lam, phi)?;
    Ok(pressure_with_gradient(pressure_case(spec)?, params, lam, phi)[0])
}

/// Chart gradient `(∂_λπ₀, ∂_φπ₀)` of [`spherical_steady_pressure`].
pub fn spherical_steady_pressure_gradient(
    spec: &SphericalVortexSpec,
    params: &PhysicalParams,
    lam: f64,
    phi: f64,
) -> Result<[f64; 2]> {
    check_chart(lam, phi)?;
    let [_, gl, gp] = pressure_with_gradient(pressure_case(spec)?, params, lam, phi);
    Ok([gl, gp])
}

/// Components of `(u·∇)u + Au + c₀∇π₀` on the unit sphere, metric terms
/// included.
pub fn steady_momentum_residual(
    spec: &SphericalVortexSpec,
    params: &PhysicalParams,
    lam: f64,
    phi: f64,
) -> Result<[Residual; 2]> {
    check_chart(lam, phi)?;
    let case = pressure_case(spec)?;
    let d = spec.chart_derivatives(lam, phi);
    let (sp, cp) = phi.sin_cos();
    let tan = sp / cp;
    let u = d.d_phi;
    let v = -d.d_lam / cp;
    let u_l = d.d_lam_phi;
    let u_p = d.d_phi_phi;
    let v_l = -d.d_lam_lam / cp;
    let v_p = -d.d_lam_phi / cp - d.d_lam * sp / (cp * cp);
    let a = match case {
        PressureCase::BMember { .. } => params.l0(),
        PressureCase::Zonal { .. } => 2.0 * params.omega() * sp,
    };
    let [_, pl, pp] = pressure_with_gradient(case, params, lam, phi);
    let c0 = params.c0();
    let r1 = [u / cp * u_l, v * u_p, -u * v * tan, -a * v, c0 / cp * pl];
    let r2 = [u / cp * v_l, v * v_p, u * u * tan, a * u, c0 * pp];
    let pack = |t: [f64; 5]| Residual {
        value: t.iter().sum(),
        scale: t.iter().map(|x| x.abs()).sum(),
    };
    Ok([pack(r1), pack(r2)])
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = hw * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kron += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kron * hw, ((kron - gauss) * hw).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let (val, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return val;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, 0.5 * tol, depth - 1) + adaptive(f, m, b, 0.5 * tol, depth - 1)
}

/// Default absolute tolerance of the elliptic quadratures.
pub const ELLIPTIC_TOL: f64 = 1e-12;

/// `E_F(z, k) = ∫₀^z dξ / (√(1−ξ²) √(1−k²ξ²))`.
pub fn elliptic_f(z: f64, k: f64) -> Result<f64> {
    elliptic_pi(z, 0.0, k)
}

/// `E_P(z, ν, k) = ∫₀^z dξ / ((1−νξ²) √(1−ξ²) √(1−k²ξ²))`.
pub fn elliptic_pi(z: f64, nu: f64, k: f64) -> Result<f64> {
    elliptic_pi_tol(z, nu, k, ELLIPTIC_TOL)
}

pub fn elliptic_pi_tol(z: f64, nu: f64, k: f64, tol: f64) -> Result<f64> {
    if !(z.abs() < 1.0) {
        return Err(Error::Domain(format!("|z| = {} must be < 1", z.abs())));
    }
    let z2 = z * z;
    if !(k * k * z2 < 1.0) {
        return Err(Error::Domain(format!("k²z² = {} must be < 1", k * k * z2)));
    }
    if !(nu * z2 < 1.0) {
        return Err(Error::Domain(format!("νz² = {} must be < 1", nu * z2)));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    // ξ = sin θ removes the endpoint factor √(1−ξ²).
    let k2 = k * k;
    let integrand = |theta: f64| {
        let s2 = theta.sin().powi(2);
        1.0 / ((1.0 - nu * s2) * (1.0 - k2 * s2).sqrt())
    };
    Ok(adaptive(&integrand, 0.0, z.asin(), tol, 40))
}

/// Modulus, characteristic and argument of the spherical bearing field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticParams {
    pub k: f64,
    pub nu: f64,
    pub z: f64,
}

impl EllipticParams {
    /// `k = ν = (1 + cos λ cos φ)/(1 − cos λ cos φ)`,
    /// `z = ((cos λ − 1)/sin λ)√k`, written as `−tan(λ/2)√k` so that the
    /// removable singularity at `λ = 0` evaluates to its limit 0.
    pub fn at(lam: f64, phi: f64) -> Result<Self> {
        check_chart(lam, phi)?;
        let s = lam.cos() * phi.cos();
        if !(s < 1.0) {
            return Err(Error::Domain("k is unbounded at the chart origin".into()));
        }
        let k = (1.0 + s) / (1.0 - s);
        let z = -(0.5 * lam).tan() * k.sqrt();
        Ok(EllipticParams { k, nu: k, z })
    }
}

/// Arguments `(η₁, η₂)` of the profile `G` in the spherical bearing field.
pub fn bearing_arguments(t: f64, lam: f64, phi: f64, b: f64) -> Result<[f64; 2]> {
    let p = EllipticParams::at(lam, phi)?;
    let ef = elliptic_f(p.z, p.k)?;
    let ep = elliptic_pi(p.z, p.nu, p.k)?;
    let eta1 = phi.cos() * lam.cos();
    let eta2 = b * t + phi.cos() * (2.0 * lam).sin() * (ef - 2.0 * ep);
    Ok([eta1, eta2])
}

/// `π₁(t, λ, φ) = G(cos φ cos λ, bt + cos φ sin 2λ (E_F(z,k) − 2E_P(z,k,k)))`.
pub fn spherical_bearing<G: Fn(f64, f64) -> f64>(g: G, t: f64, lam: f64, phi: f64, b: f64) -> Result<f64> {
    let [e1, e2] = bearing_arguments(t, lam, phi, b)?;
    Ok(g(e1, e2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(omega: f64, phi0: f64) -> PhysicalParams {
        PhysicalParams::derive(omega, 1.0, phi0, 1.4, 1.0)
            .unwrap()
            .with_c0(0.1)
            .unwrap()
    }

    struct Cos2Lam;
    impl SphericalPotential for Cos2Lam {
        fn chart_derivatives(&self, lam: f64, phi: f64) -> ChartDerivatives {
            let (s2, c2) = (2.0 * lam).sin_cos();
            let (sp, cp) = phi.sin_cos();
            ChartDerivatives {
                value: c2 * cp,
                d_lam: -2.0 * s2 * cp,
                d_phi: -c2 * sp,
                d_lam_lam: -4.0 * c2 * cp,
                d_lam_phi: 2.0 * s2 * sp,
                d_phi_phi: -c2 * cp,
            }
        }
    }

    #[test]
    fn test_field_velocity() {
        let s = SphericalVortexSpec::b_member(-1.0);
        assert_eq!(s.velocity(0.0, 0.0).unwrap(), [0.0, 0.0]);
        let [u, v] = s.velocity(1e-4, 2e-4).unwrap();
        assert!((u - 2e-4).abs() < 1e-11 && (v + 1e-4).abs() < 1e-11);
        let b = 0.7;
        let [u, v] = SphericalVortexSpec::b_member(b).velocity(FRAC_PI_2, 0.3).unwrap();
        assert!(u.abs() < 1e-16);
        assert_eq!(v, b);
        assert!(s.velocity(0.0, FRAC_PI_2).is_err());
        assert_eq!(s.center_rate(), 1.0);
    }

    #[test]
    fn master_residual_on_members_and_non_member() {
        let z = SphericalVortexSpec::zonal(0.3);
        assert_eq!(spherical_master_residual(&z, 0.4, 0.2).value, 0.0);
        let m = SphericalVortexSpec::new(0.3, -0.8, 0.5, Profile::Exp { scale: 1.3 }).unwrap();
        for (l, p) in [(0.3, 0.2), (-2.0, 1.1), (2.9, -1.3)] {
            assert!(spherical_master_residual(&m, l, p).relative() < 1e-12);
        }
        let r = spherical_master_residual(&Cos2Lam, 0.4, 0.3);
        assert!(r.relative() > 1e-3, "{r:?}");
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let m = SphericalVortexSpec::new(0.3, -0.8, 0.5, Profile::Sin { scale: 2.0 }).unwrap();
        let h = 1e-5;
        let (l, p) = (0.7, -0.4);
        let d = m.chart_derivatives(l, p);
        let f = |l, p| m.chart_derivatives(l, p);
        let fd_l = (f(l + h, p).value - f(l - h, p).value) / (2.0 * h);
        let fd_p = (f(l, p + h).value - f(l, p - h).value) / (2.0 * h);
        let fd_ll = (f(l + h, p).d_lam - f(l - h, p).d_lam) / (2.0 * h);
        let fd_lp = (f(l, p + h).d_lam - f(l, p - h).d_lam) / (2.0 * h);
        let fd_pp = (f(l, p + h).d_phi - f(l, p - h).d_phi) / (2.0 * h);
        for (a, b) in [
            (d.d_lam, fd_l),
            (d.d_phi, fd_p),
            (d.d_lam_lam, fd_ll),
            (d.d_lam_phi, fd_lp),
            (d.d_phi_phi, fd_pp),
        ] {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn steady_pressure_cases() {
        let p = params(7.3e-5, 0.5);
        let b = -1.0;
        let at0 = spherical_steady_pressure(&SphericalVortexSpec::b_member(b), &p, 0.0, 0.0).unwrap();
        assert!((at0 + b / (2.0 * p.c0()) * (b + 2.0 * p.l0())).abs() < 1e-14);
        let z = SphericalVortexSpec::zonal(0.2);
        assert_eq!(spherical_steady_pressure(&z, &p, 0.3, 0.0).unwrap(), 0.0);
        let z = SphericalVortexSpec::zonal(-2.0 * p.omega());
        assert_eq!(spherical_steady_pressure(&z, &p, 0.3, 0.9).unwrap(), 0.0);
        let general = SphericalVortexSpec::new(1.0, 1.0, 0.0, Profile::Identity).unwrap();
        assert!(matches!(
            spherical_steady_pressure(&general, &p, 0.1, 0.1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn b_member_pressure_series_at_origin() {
        // π₀ ≈ −b(b+2l₀)/(2c₀) + b(b+l₀)/(2c₀)(λ²+φ²)
        let p = params(7.3e-5, 0.5);
        let b = -0.3;
        let spec = SphericalVortexSpec::b_member(b);
        let c0 = p.c0();
        let l0 = p.l0();
        let constant = -b * (b + 2.0 * l0) / (2.0 * c0);
        let quad = b * (b + l0) / (2.0 * c0);
        for eps in [1e-2, 1e-3] {
            let (l, f) = (eps, -0.5 * eps);
            let exact = spherical_steady_pressure(&spec, &p, l, f).unwrap();
            let series = constant + quad * (l * l + f * f);
            assert!((exact - series).abs() < 2.0 * eps.powi(4), "{exact} vs {series}");
        }
    }

    #[test]
    fn momentum_balance_and_orthogonality() {
        let cases = [
            (SphericalVortexSpec::b_member(-1.0), params(0.0, 0.0)),
            (SphericalVortexSpec::b_member(-1.0), params(7.3e-5, 0.5)),
            (SphericalVortexSpec::zonal(0.4), params(7.3e-5, 0.5)),
        ];
        for (spec, p) in cases {
            for (l, f) in [(0.3, 0.2), (-2.0, 1.1), (2.9, -1.3)] {
                let [r1, r2] = steady_momentum_residual(&spec, &p, l, f).unwrap();
                assert!(r1.relative() < 1e-12 && r2.relative() < 1e-12, "{spec:?} {r1:?} {r2:?}");
                let [u, v] = spec.velocity(l, f).unwrap();
                let [gl, gp] = spherical_steady_pressure_gradient(&spec, &p, l, f).unwrap();
                let dot = u / f.cos() * gl + v * gp;
                assert!(dot.abs() < 1e-12 * (1.0 + gl.abs() + gp.abs()));
            }
        }
    }

    #[test]
    fn elliptic_reductions() {
        assert_eq!(elliptic_f(0.0, 3.0).unwrap(), 0.0);
        for z in [-0.9, 0.2, 0.7, 0.99] {
            assert!((elliptic_f(z, 0.0).unwrap() - f64::asin(z)).abs() < 1e-12);
            assert_eq!(elliptic_pi(z, 0.0, 0.5).unwrap(), elliptic_f(z, 0.5).unwrap());
        }
        // Legendre F(π/6 | m = 0.25) = 0.5294286...
        assert!((elliptic_f(0.5, 0.5).unwrap() - 0.5294286270519059).abs() < 1e-12);
        assert!(matches!(elliptic_f(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(elliptic_f(0.6, 2.0), Err(Error::Domain(_))));
        assert!(matches!(elliptic_pi(0.6, 3.0, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn elliptic_pi_against_simpson() {
        let (z, nu, k) = (0.6_f64, -1.5, 0.8);
        let n = 20_000;
        let top = z.asin();
        let g = |t: f64| {
            let s2 = t.sin().powi(2);
            1.0 / ((1.0 - nu * s2) * (1.0 - k * k * s2).sqrt())
        };
        let h = top / n as f64;
        let mut acc = g(0.0) + g(top);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
        }
        let simpson = acc * h / 3.0;
        assert!((elliptic_pi(z, nu, k).unwrap() - simpson).abs() < 1e-12);
    }

    #[test]
    fn bearing_domain_and_simple_profiles() {
        assert!(EllipticParams::at(0.0, 0.0).is_err());
        assert_eq!(EllipticParams::at(0.0, 0.5).unwrap().z, 0.0);
        // The integrals are real only well away from the chart origin.
        assert!(bearing_arguments(0.0, 1e-3, 1e-3, -1.0).is_err());
        let b = -1.0;
        for (l, f) in [(0.1, 0.9), (-0.2, 1.2), (0.3, -1.0)] {
            let c = spherical_bearing(|_, _| 4.2, 3.0, l, f, b).unwrap();
            assert_eq!(c, 4.2);
            let v = spherical_bearing(|e1, _| e1, 3.0, l, f, b).unwrap();
            assert_eq!(v, f64::cos(f) * f64::cos(l));
            let spec = SphericalVortexSpec::b_member(b);
            let [u, w] = spec.velocity(l, f).unwrap();
            let h = 1e-6;
            let pi = |l: f64, f: f64| spherical_bearing(|e1, _| e1, 3.0, l, f, b).unwrap();
            let dl = (pi(l + h, f) - pi(l - h, f)) / (2.0 * h);
            let df = (pi(l, f + h) - pi(l, f - h)) / (2.0 * h);
            assert!((u / f.cos() * dl + w * df).abs() < 1e-8);
        }
    }

    /// For a profile depending on the second argument the displayed
    /// composition is not transported by the b-member flow; kept as a record.
    #[test]
    #[ignore = "the displayed elliptic composition is not a transport solution for η₂-dependent G"]
    fn bearing_transport_generic_profile() {
        let b = -1.0;
        let spec = SphericalVortexSpec::b_member(b);
        let g = |e1: f64, e2: f64| e1 + 0.5 * e2.sin();
        let (l, f, t) = (0.1, 0.9, 0.7);
        let h = 1e-6;
        let pi = |t: f64, l: f64, f: f64| spherical_bearing(g, t, l, f, b).unwrap();
        let dt = (pi(t + h, l, f) - pi(t - h, l, f)) / (2.0 * h);
        let dl = (pi(t, l + h, f) - pi(t, l - h, f)) / (2.0 * h);
        let df = (pi(t, l, f + h) - pi(t, l, f - h)) / (2.0 * h);
        let [u, v] = spec.velocity(l, f).unwrap();
        let res = dt + u / f.cos() * dl + v * df;
        assert!(res.abs() < 1e-6 * (dt.abs() + 1.0), "{res}");
    }
}

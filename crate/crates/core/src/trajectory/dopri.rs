//! Dormand–Prince 5(4) with PI step-size control and the standard
//! fourth-order continuous extension.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// PI controller (Hairer & Wanner defaults).
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

#[derive(Debug)]
pub enum Failure<const N: usize, E> {
    StepUnderflow { t: f64, y: [f64; N] },
    TooManySteps { t: f64, y: [f64; N] },
    Rejected { t_star: f64, last_t: f64, last_y: [f64; N], reason: E },
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

fn rms_norm<const N: usize>(v: &[f64; N], scale: &[f64; N]) -> f64 {
    let s: f64 = (0..N).map(|i| (v[i] / scale[i]).powi(2)).sum();
    (s / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(f: &mut F, t0: f64, y0: &[f64; N], f0: &[f64; N], dir: f64, hmax: f64, opts: &Options) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let sk: [f64; N] = std::array::from_fn(|i| opts.abs_tol + opts.rel_tol * y0[i].abs());
    let d0 = rms_norm(y0, &sk);
    let d1 = rms_norm(f0, &sk);
    let mut h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(hmax);
    let y1 = axpy(y0, dir * h0, &[(1.0, f0)]);
    let f1 = f(t0 + dir * h0, &y1);
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = rms_norm(&diff, &sk) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    (100.0 * h0).min(h1).min(hmax)
}

/// Integrate `y' = f(t, y)` from `t0` to `t_end`, reporting the solution at
/// each of `t_out` (which must lie in `[t0, t_end]` in integration order).
///
/// `check` is called after every accepted step; an `Err` aborts the run with
/// the last accepted state.
pub fn solve<const N: usize, F, C, E>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    t_out: &[f64],
    opts: &Options,
    mut check: C,
) -> Result<Vec<(f64, [f64; N])>, Failure<N, E>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    C: FnMut(f64, &[f64; N]) -> Result<(), E>,
{
    let mut out = Vec::with_capacity(t_out.len());
    let mut next = 0;
    while next < t_out.len() && t_out[next] == t0 {
        out.push((t0, y0));
        next += 1;
    }
    if t_end == t0 || next == t_out.len() {
        return Ok(out);
    }

    let dir = (t_end - t0).signum();
    let hmax = (t_end - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&mut f, t0, &y0, &k1, dir, hmax, opts);
    let mut err_old: f64 = 1e-4;
    let mut rejected_last = false;

    for _ in 0..opts.max_steps {
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Failure::StepUnderflow { t, y });
        }
        let mut last = false;
        if (t + dir * h - t_end) * dir >= 0.0 {
            h = (t_end - t).abs();
            last = true;
        }
        let hs = dir * h;
        let k2 = f(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = f(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * hs,
            &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + hs,
            &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if last { t_end } else { t + hs };
        let k7 = f(t_new, &y_new);

        let err_vec = axpy(
            &[0.0; N],
            hs,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        let sk: [f64; N] =
            std::array::from_fn(|i| opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs()));
        let err = rms_norm(&err_vec, &sk);

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            if let Err(reason) = check(t_new, &y_new) {
                return Err(Failure::Rejected {
                    t_star: t_new,
                    last_t: t,
                    last_y: y,
                    reason,
                });
            }
            // Continuous extension on [t, t_new].
            let r1 = y;
            let r2: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let r3: [f64; N] = std::array::from_fn(|i| hs * k1[i] - r2[i]);
            let r4: [f64; N] = std::array::from_fn(|i| r2[i] - hs * k7[i] - r3[i]);
            let r5 = axpy(
                &[0.0; N],
                hs,
                &[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)],
            );
            while next < t_out.len() && (t_out[next] - t_new) * dir <= 0.0 {
                let to = t_out[next];
                let state = if to == t_new {
                    y_new
                } else {
                    let th = (to - t) / hs;
                    let th1 = 1.0 - th;
                    std::array::from_fn(|i| {
                        r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])))
                    })
                };
                out.push((to, state));
                next += 1;
            }

            t = t_new;
            y = y_new;
            k1 = k7;
            if last || next == t_out.len() {
                return Ok(out);
            }
            let mut fac = fac11 / err_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.min(h);
            }
            err_old = err.max(1e-4);
            rejected_last = false;
            h = h_new.min(hmax);
        } else {
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            rejected_last = true;
        }
    }
    Err(Failure::TooManySteps { t, y })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(tol: f64) -> Options {
        Options {
            rel_tol: tol,
            abs_tol: tol,
            max_steps: 1_000_000,
        }
    }

    #[test]
    fn harmonic_oscillator_with_dense_output() {
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        let sol = solve(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            10.0,
            &times,
            &opts(1e-11),
            |_, _| Ok::<(), ()>(()),
        )
        .unwrap();
        assert_eq!(sol.len(), times.len());
        for (t, y) in sol {
            assert!((y[0] - t.cos()).abs() < 1e-8, "t={t}");
            assert!((y[1] + t.sin()).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn backward_integration() {
        let sol = solve(
            |_, y: &[f64; 1]| [y[0]],
            1.0,
            [1.0_f64.exp()],
            0.0,
            &[1.0, 0.5, 0.0],
            &opts(1e-12),
            |_, _| Ok::<(), ()>(()),
        )
        .unwrap();
        assert!((sol[2].1[0] - 1.0).abs() < 1e-10);
        assert!((sol[1].1[0] - 0.5_f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn check_aborts_with_last_state() {
        let res = solve(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            0.0,
            [1.0],
            2.0,
            &[2.0],
            &opts(1e-9),
            |_, y| if y[0] > 100.0 { Err("too big") } else { Ok(()) },
        );
        match res {
            Err(Failure::Rejected { t_star, last_y, .. }) => {
                assert!(t_star < 1.0);
                assert!(last_y[0] <= 100.0);
            }
            other => panic!("{other:?}"),
        }
    }
}

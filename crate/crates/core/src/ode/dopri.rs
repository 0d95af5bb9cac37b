//! Dormand–Prince 5(4) with PI step-size control.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Largest step magnitude; `None` means unbounded.
    pub h_max: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            max_steps: 1_000_000,
            h_max: None,
        }
    }
}

impl OdeOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        OdeOptions {
            rtol,
            atol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol >= 0.0 && self.rtol.is_finite() && self.atol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be positive (rtol = {}, atol = {})",
                self.rtol, self.atol
            )));
        }
        Ok(())
    }
}

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

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

/// Integrates `y' = f(t, y)` from `t_start` and records the state at each
/// time in `outputs`, which must be monotone in the direction of
/// integration (forward or backward). Steps are shortened to land exactly
/// on every output time. `on_output` may modify the state at each output
/// (for example to project it back onto a constraint set) before the
/// integration continues.
pub fn integrate<F, P>(
    mut f: F,
    t_start: f64,
    y0: &[f64],
    outputs: &[f64],
    opts: &OdeOptions,
    mut on_output: P,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    P: FnMut(f64, &mut [f64]),
{
    opts.validate()?;
    let dim = y0.len();
    let Some(&t_last) = outputs.last() else {
        return Ok(Vec::new());
    };
    let dir = if t_last >= t_start { 1.0 } else { -1.0 };
    if outputs
        .iter()
        .zip(std::iter::once(&t_start).chain(outputs.iter()))
        .any(|(&cur, &prev)| (cur - prev) * dir < 0.0 || !cur.is_finite())
    {
        return Err(Error::Grid("output times must be finite and monotone".into()));
    }

    let mut t = t_start;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    f(t, &y, &mut k[0])?;

    let span = (t_last - t_start).abs();
    let mut h = initial_step(&mut f, t, &y, &k[0], dir, opts, span)?;
    let mut err_old = 1e-4f64;
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(outputs.len());

    for &target in outputs {
        while (target - t) * dir > 0.0 {
            if steps >= opts.max_steps {
                return Err(Error::TooManySteps {
                    max_steps: opts.max_steps,
                    t_target: target,
                });
            }
            steps += 1;
            let remaining = (target - t).abs();
            let clipped = remaining <= h;
            let h_use = if clipped { remaining } else { h };
            if h_use < 16.0 * f64::EPSILON * t.abs().max(1.0) && !clipped {
                return Err(Error::StepUnderflow { t, h: h_use });
            }
            let hs = h_use * dir;

            let (k1, rest) = k.split_at_mut(1);
            let k1 = &k1[0];
            stage(&mut tmp, &y, hs, &[(A21, k1)]);
            f(t + C2 * hs, &tmp, &mut rest[0])?;
            stage(&mut tmp, &y, hs, &[(A31, k1), (A32, &rest[0])]);
            f(t + C3 * hs, &tmp, &mut rest[1])?;
            stage(&mut tmp, &y, hs, &[(A41, k1), (A42, &rest[0]), (A43, &rest[1])]);
            f(t + C4 * hs, &tmp, &mut rest[2])?;
            stage(
                &mut tmp,
                &y,
                hs,
                &[(A51, k1), (A52, &rest[0]), (A53, &rest[1]), (A54, &rest[2])],
            );
            f(t + C5 * hs, &tmp, &mut rest[3])?;
            stage(
                &mut tmp,
                &y,
                hs,
                &[(A61, k1), (A62, &rest[0]), (A63, &rest[1]), (A64, &rest[2]), (A65, &rest[3])],
            );
            let t_end = if clipped { target } else { t + hs };
            f(t_end, &tmp, &mut rest[4])?;
            stage(
                &mut y_new,
                &y,
                hs,
                &[(A71, k1), (A73, &rest[1]), (A74, &rest[2]), (A75, &rest[3]), (A76, &rest[4])],
            );
            f(t_end, &y_new, &mut rest[5])?;

            let mut acc = 0.0;
            for i in 0..dim {
                let e = hs
                    * (E1 * k1[i] + E3 * rest[1][i] + E4 * rest[2][i] + E5 * rest[3][i] + E6 * rest[4][i]
                        + E7 * rest[5][i]);
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                let r = if sc > 0.0 { e / sc } else if e == 0.0 { 0.0 } else { f64::INFINITY };
                acc += r * r;
            }
            let err = if dim == 0 { 0.0 } else { (acc / dim as f64).sqrt() };
            if !err.is_finite() {
                h = h_use * FAC_MIN;
                if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t, h });
                }
                continue;
            }

            if err <= 1.0 {
                let fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err.powf(-ALPHA) * err_old.powf(BETA)).clamp(FAC_MIN, FAC_MAX)
                };
                err_old = err.max(1e-4);
                t = t_end;
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                if !clipped {
                    h = h_use * fac;
                } else {
                    h = h.max(h_use * fac);
                }
                if let Some(hm) = opts.h_max {
                    h = h.min(hm);
                }
            } else {
                h = h_use * (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
                if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t, h });
                }
            }
        }
        // land exactly on the requested time
        t = target;
        let before = y.clone();
        on_output(t, &mut y);
        if y != before {
            f(t, &y, &mut k[0])?;
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn stage(dst: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &Vec<f64>)]) {
    for i in 0..y.len() {
        let mut s = 0.0;
        for (a, k) in terms {
            s += a * k[i];
        }
        dst[i] = y[i] + h * s;
    }
}

/// Starting step from the usual derivative-scale heuristic.
fn initial_step<F>(
    f: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    dir: f64,
    opts: &OdeOptions,
    span: f64,
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let dim = y.len().max(1) as f64;
    let sc: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let norm = |v: &[f64]| -> f64 {
        (v.iter()
            .zip(&sc)
            .map(|(a, s)| if *s > 0.0 { (a / s).powi(2) } else { 0.0 })
            .sum::<f64>()
            / dim)
            .sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span.max(1e-12));
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + dir * h0 * b).collect();
    let mut f1 = vec![0.0; y.len()];
    f(t + dir * h0, &y1, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    let mut h = (100.0 * h0).min(h1);
    if let Some(hm) = opts.h_max {
        h = h.min(hm);
    }
    Ok(h.min(span.max(1e-12)))
}

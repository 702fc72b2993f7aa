use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{NonCertifiable, PassivityError, RationalTF};

pub const SWEEP_MIN: f64 = 1e-6;
pub const SWEEP_MAX: f64 = 1e6;
pub const SWEEP_POINTS: usize = 2000;

/// Root counts as imaginary when `|Re| < IMAG_RTOL · (1 + |Im|)`.
const IMAG_RTOL: f64 = 1e-9;
/// Minimum distance to the nearest other root for a root to count as simple.
const SIMPLE_ROOT_GAP: f64 = 1e-6;
/// Tolerance for cancelling common numerator/denominator roots.
const CANCEL_TOL: f64 = 1e-9;
/// Residues at imaginary poles: allowed negative real part / imaginary part, relative.
const RESIDUE_TOL: f64 = 1e-6;
/// Slack on `Re W(iω) + α ≥ 0`.
const FREQ_TOL: f64 = 1e-9;
/// Relative width at which golden-section refinement stops.
const REFINE_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IfpMethod {
    GridRefined,
    ClosedForm,
}

/// Certified passivity index `α = max(0, -inf_ω Re W(iω))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IfpCertificate {
    pub alpha: f64,
    /// Minimizing frequency; `f64::INFINITY` when the infimum is the `ω → ∞` limit.
    #[serde(with = "omega_serde")]
    pub omega_star: f64,
    pub method: IfpMethod,
    /// `inf_ω Re W(iω)` before clamping at zero.
    pub raw_infimum: f64,
}

mod omega_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &f64, s: S) -> Result<S::Ok, S::Error> {
        if w.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*w)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad omega_star {s:?}"))),
        }
    }
}

/// Verdicts of the three positive-real conditions for `W + α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrlReport {
    pub no_unstable_poles: bool,
    pub imaginary_poles_ok: bool,
    pub freq_condition_ok: bool,
}

impl PrlReport {
    pub fn all_ok(&self) -> bool {
        self.no_unstable_poles && self.imaginary_poles_ok && self.freq_condition_ok
    }
}

/// Log-spaced frequencies on `[SWEEP_MIN, SWEEP_MAX]`.
pub fn certification_grid() -> Vec<f64> {
    let (lo, hi) = (SWEEP_MIN.ln(), SWEEP_MAX.ln());
    let step = (hi - lo) / (SWEEP_POINTS - 1) as f64;
    (0..SWEEP_POINTS).map(|k| (lo + step * k as f64).exp()).collect()
}

/// `lim_{λ→iω0} (λ - iω0) W(λ)`, approached along the real direction with one
/// Richardson extrapolation step.
pub fn residue_at(w: &RationalTF, omega0: f64) -> Complex64 {
    let center = Complex64::new(0.0, omega0);
    let h = 1e-6 * (1.0 + omega0.abs());
    let r = |h: f64| w.eval(center + h) * h;
    2.0 * r(h / 2.0) - r(h)
}

fn is_imaginary(r: Complex64) -> bool {
    r.re.abs() < IMAG_RTOL * (1.0 + r.im.abs())
}

struct Structure {
    no_unstable_poles: bool,
    imaginary_poles_ok: bool,
    first_violation: Option<NonCertifiable>,
}

/// Conditions (1) and (2): pole locations, multiplicity and residues.
fn structural_conditions(w: &RationalTF) -> Structure {
    let poles = w.poles();
    let mut out = Structure { no_unstable_poles: true, imaginary_poles_ok: true, first_violation: None };
    for (i, &p) in poles.iter().enumerate() {
        if is_imaginary(p) {
            let simple = poles
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .all(|(_, &q)| (q - p).norm() > SIMPLE_ROOT_GAP);
            if !simple {
                out.imaginary_poles_ok = false;
                out.first_violation
                    .get_or_insert(NonCertifiable::RepeatedImaginaryPole { omega: p.im });
                continue;
            }
            let res = residue_at(w, p.im);
            let tol = RESIDUE_TOL * (1.0 + res.norm());
            if res.re < -tol || res.im.abs() > tol {
                out.imaginary_poles_ok = false;
                out.first_violation.get_or_insert(NonCertifiable::BadResidue {
                    omega: p.im,
                    residue_re: res.re,
                    residue_im: res.im,
                });
            }
        } else if p.re > IMAG_RTOL * p.norm().max(1.0) {
            out.no_unstable_poles = false;
            out.first_violation
                .get_or_insert(NonCertifiable::UnstablePole { re: p.re, im: p.im });
        }
    }
    out
}

/// Samples of `Re W(iω)` over the certification set: `ω = 0` when it is not a pole,
/// the log grid (pole hits skipped), and the `ω → ∞` limit.
fn sample_real_part(w: &RationalTF, grid: &[f64]) -> (Option<f64>, Vec<Option<f64>>, f64) {
    let at_zero = w.eval_freq(0.0).ok().map(|z| z.re);
    let on_grid = grid.iter().map(|&om| w.eval_freq(om).ok().map(|z| z.re)).collect();
    (at_zero, on_grid, w.feedthrough())
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Passivity index of `W` by grid sweep plus golden-section refinement.
pub fn ifp_index(w: &RationalTF) -> Result<IfpCertificate, PassivityError> {
    let w = w.cancel_common_roots(CANCEL_TOL);
    let structure = structural_conditions(&w);
    if let Some(reason) = structure.first_violation {
        return Err(PassivityError::NotCertifiable(reason));
    }

    let grid = certification_grid();
    let (at_zero, on_grid, at_inf) = sample_real_part(&w, &grid);

    let (mut best_omega, mut best) = (f64::INFINITY, at_inf);
    if let Some(v) = at_zero {
        if v < best {
            best = v;
            best_omega = 0.0;
        }
    }
    let mut best_idx = None;
    for (k, v) in on_grid.iter().enumerate() {
        if let Some(v) = *v {
            if v < best {
                best = v;
                best_omega = grid[k];
                best_idx = Some(k);
            }
        }
    }

    if let Some(k) = best_idx {
        let lo = grid[k.saturating_sub(1)].ln();
        let hi = grid[(k + 1).min(grid.len() - 1)].ln();
        let re_at = |u: f64| {
            w.eval_freq(u.exp()).map(|z| z.re).unwrap_or(f64::INFINITY)
        };
        let (u, v) = golden_min(re_at, lo, hi, REFINE_RTOL);
        if v < best {
            best = v;
            best_omega = u.exp();
        }
    }

    Ok(IfpCertificate {
        alpha: (-best).max(0.0),
        omega_star: best_omega,
        method: IfpMethod::GridRefined,
        raw_infimum: best,
    })
}

/// Closed-form index of `1 / (τλ³ + λ² + μλ)`, valid while `μτ < 1/2`:
/// the real part on the axis is minimized at `ω = 0` with value `-1/μ²`.
pub fn vehicle_ifp(tau: f64, mu: f64) -> Result<IfpCertificate, PassivityError> {
    if !(tau > 0.0 && mu > 0.0) || mu * tau >= 0.5 {
        return Err(PassivityError::MuTauViolation { mu, tau });
    }
    let alpha = 1.0 / (mu * mu);
    Ok(IfpCertificate { alpha, omega_star: 0.0, method: IfpMethod::ClosedForm, raw_infimum: -alpha })
}

/// Evaluates the three positive-real conditions for `W` shifted by `alpha`.
pub fn prl_conditions(w: &RationalTF, alpha: f64) -> PrlReport {
    let w = w.cancel_common_roots(CANCEL_TOL);
    let structure = structural_conditions(&w);
    let grid = certification_grid();
    let (at_zero, on_grid, at_inf) = sample_real_part(&w, &grid);
    let freq_condition_ok = at_zero
        .into_iter()
        .chain(on_grid.into_iter().flatten())
        .chain(std::iter::once(at_inf))
        .all(|re| re + alpha >= -FREQ_TOL);
    PrlReport {
        no_unstable_poles: structure.no_unstable_poles,
        imaginary_poles_ok: structure.imaginary_poles_ok,
        freq_condition_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tf(num: &[f64], den: &[f64]) -> RationalTF {
        RationalTF::from_coeffs(num, den).unwrap()
    }

    #[test]
    fn integrator_is_passive() {
        let c = ifp_index(&tf(&[1.], &[0., 1.])).unwrap();
        assert_eq!(c.alpha, 0.0);
        assert_eq!(c.method, IfpMethod::GridRefined);
    }

    #[test]
    fn cubic_index_quarter() {
        // 1/(λ(λ²+2λ+3)): q = 3 > p²/2 = 2, so α = 1/(pq - p³/4) = 1/4
        let c = ifp_index(&tf(&[1.], &[0., 3., 2., 1.])).unwrap();
        assert!((c.alpha - 0.25).abs() < 1e-10, "{c:?}");
        // minimizer at ω² = q - p²/2 = 1
        assert!((c.omega_star - 1.0).abs() < 1e-4, "{c:?}");
    }

    #[test]
    fn vehicle_index() {
        // 1/(0.1λ³ + λ² + 2λ)
        let c = ifp_index(&tf(&[1.], &[0., 2., 1., 0.1])).unwrap();
        assert!((c.alpha - 0.25).abs() < 1e-10, "{c:?}");
        assert!(c.omega_star < 1e-5);
        let closed = vehicle_ifp(0.1, 2.0).unwrap();
        assert_eq!(closed.alpha, 0.25);
        assert!(matches!(vehicle_ifp(0.3, 2.0), Err(PassivityError::MuTauViolation { .. })));
    }

    #[test]
    fn unstable_pole_is_not_certifiable() {
        let err = ifp_index(&tf(&[1.], &[-1., 1.])).unwrap_err();
        assert!(matches!(err, PassivityError::NotCertifiable(NonCertifiable::UnstablePole { .. })));
    }

    #[test]
    fn double_integrator_is_not_certifiable() {
        let err = ifp_index(&tf(&[1.], &[0., 0., 1.])).unwrap_err();
        assert!(matches!(
            err,
            PassivityError::NotCertifiable(NonCertifiable::RepeatedImaginaryPole { .. })
        ));
    }

    #[test]
    fn negative_residue_is_not_certifiable() {
        let err = ifp_index(&tf(&[-1.], &[0., 1.])).unwrap_err();
        assert!(matches!(err, PassivityError::NotCertifiable(NonCertifiable::BadResidue { .. })));
    }

    #[test]
    fn feedthrough_infimum_at_infinity() {
        // -λ/(λ+1): Re W(iω) = -ω²/(1+ω²) decreases towards -1
        let c = ifp_index(&tf(&[0., -1.], &[1., 1.])).unwrap();
        assert_eq!(c.alpha, 1.0);
        assert!(c.omega_star.is_infinite());
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains(r#""omega_star":"inf""#), "{json}");
        let back: IfpCertificate = serde_json::from_str(&json).unwrap();
        assert!(back.omega_star.is_infinite());
    }

    #[test]
    fn strictly_input_passive_clamps_to_zero() {
        // 1 + 1/(λ+1) has Re W ≥ 1
        let c = ifp_index(&tf(&[2., 1.], &[1., 1.])).unwrap();
        assert_eq!(c.alpha, 0.0);
        assert!(c.raw_infimum > 0.99);
    }

    #[test]
    fn prl_examples() {
        let r = prl_conditions(&tf(&[1.], &[0., 1.]), 0.0);
        assert!(r.all_ok());

        let r = prl_conditions(&tf(&[1.], &[-1., 1.]), 10.0);
        assert!(!r.no_unstable_poles);

        // kλ / (λ² + kλ + ω1²), k = ω1 = 1
        let r = prl_conditions(&tf(&[0., 1.], &[1., 1., 1.]), 0.0);
        assert!(r.all_ok(), "{r:?}");

        // cubic with α = 1/4: any smaller shift fails the frequency condition
        let cubic = tf(&[1.], &[0., 3., 2., 1.]);
        assert!(prl_conditions(&cubic, 0.25).freq_condition_ok);
        assert!(!prl_conditions(&cubic, 0.24).freq_condition_ok);
    }

    #[test]
    fn harmonic_oscillator_residues() {
        // λ/(λ²+4): simple poles at ±2i with residue 1/2
        let w = tf(&[0., 1.], &[4., 0., 1.]);
        let r = residue_at(&w, 2.0);
        assert!((r - Complex64::new(0.5, 0.0)).norm() < 1e-9, "{r}");
        assert!(prl_conditions(&w, 0.0).all_ok());
        assert_eq!(ifp_index(&w).unwrap().alpha, 0.0);
    }

    #[test]
    fn grid_shape() {
        let g = certification_grid();
        assert_eq!(g.len(), SWEEP_POINTS);
        assert!((g[0] - SWEEP_MIN).abs() < 1e-18);
        assert!((g[SWEEP_POINTS - 1] / SWEEP_MAX - 1.0).abs() < 1e-12);
    }
}

//! Scalar special functions: log-gamma, gamma ratios, the (log) beta
//! function, the regularized incomplete beta function, and a small adaptive
//! quadrature routine used by the verification suites.
//!
//! All functions are pure and deterministic; nothing here caches state.

use thiserror::Error;

/// Errors from the special-function layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialFnError {
    /// Argument lies outside the function's domain.
    #[error("{0}")]
    Domain(String),
    /// The beta function needs both arguments strictly positive. This is the
    /// failure surfaced when a bound involving `B(1/2, -alpha)` is requested
    /// with `alpha >= 0`.
    #[error("beta function undefined for a={a}, b={b}: both arguments must be > 0")]
    BetaUndefined { a: f64, b: f64 },
    /// The continued fraction hit its iteration budget (internal error).
    #[error("incomplete beta continued fraction did not converge in {0} iterations")]
    NoConvergence(usize),
}

type Result<T> = std::result::Result<T, SpecialFnError>;

// Lanczos approximation, Pugh's variant ("An Analysis of the Lanczos Gamma
// Approximation", G. R. Pugh, 2004, p. 116). Good to ~14 significant digits
// over the positive reals. Coefficients kept verbatim from the publication.
const GAMMA_R: f64 = 10.900511;
#[allow(clippy::excessive_precision)]
const GAMMA_DK: [f64; 11] = [
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];
/// ln(2 * sqrt(e / pi))
const LN_2_SQRT_E_OVER_PI: f64 = 0.6207822376352452223455184457816472122518527279025978;
const LN_PI: f64 = 1.1447298858494001741434273513530587116472948129153;

/// Natural log of the gamma function for `z > 0`.
///
/// Relative error is below `1e-12` across `[0.5, 1e6]`.
pub fn ln_gamma(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(SpecialFnError::Domain(format!(
            "ln_gamma requires z > 0 (got z={z})"
        )));
    }
    Ok(ln_gamma_unchecked(z))
}

fn ln_gamma_unchecked(z: f64) -> f64 {
    if z < 0.5 {
        // Reflection keeps the series argument in its accurate range.
        let s: f64 = GAMMA_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(GAMMA_DK[0], |s, (i, &dk)| s + dk / (i as f64 - z));
        LN_PI
            - (std::f64::consts::PI * z).sin().ln()
            - s.ln()
            - LN_2_SQRT_E_OVER_PI
            - (0.5 - z) * ((0.5 - z + GAMMA_R) / std::f64::consts::E).ln()
    } else {
        let s: f64 = GAMMA_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(GAMMA_DK[0], |s, (i, &dk)| s + dk / (z + i as f64 - 1.0));
        s.ln() + LN_2_SQRT_E_OVER_PI + (z - 0.5) * ((z - 0.5 + GAMMA_R) / std::f64::consts::E).ln()
    }
}

/// The ratio `Gamma(z + 1/2) / Gamma(z)` for `z >= 1/2`.
pub fn gamma_ratio(z: f64) -> Result<f64> {
    if !(z >= 0.5) {
        return Err(SpecialFnError::Domain(format!(
            "gamma_ratio requires z >= 1/2 (got z={z})"
        )));
    }
    Ok((ln_gamma_unchecked(z + 0.5) - ln_gamma_unchecked(z)).exp())
}

/// Envelope for `Gamma(z + 1/2) / Gamma(z)`: the ratio lies in
/// `[e^(-2/3), e^(1/6) * sqrt(z)]` for every `z >= 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRatioBounds {
    pub lower: f64,
    pub upper: f64,
}

impl GammaRatioBounds {
    /// Bounds for the queried `z >= 1/2`.
    pub fn for_argument(z: f64) -> Result<Self> {
        if !(z >= 0.5) {
            return Err(SpecialFnError::Domain(format!(
                "GammaRatioBounds requires z >= 1/2 (got z={z})"
            )));
        }
        Ok(Self {
            lower: (-2.0 / 3.0f64).exp(),
            upper: (1.0 / 6.0f64).exp() * z.sqrt(),
        })
    }

    pub fn contains(&self, ratio: f64) -> bool {
        self.lower <= ratio && ratio <= self.upper
    }
}

/// `ln B(a, b) = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)`.
///
/// Fails with [`SpecialFnError::BetaUndefined`] unless both arguments are
/// strictly positive.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(SpecialFnError::BetaUndefined { a, b });
    }
    Ok(ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b))
}

const BETA_CF_MAX_ITER: usize = 300;
const BETA_CF_TOL: f64 = 1e-14;

/// Regularized incomplete beta function `I_x(a, b)` for `a, b > 0` and
/// `x` in `[0, 1]`.
///
/// Continued fraction (modified Lentz), switching to the symmetric form at
/// `x > (a + 1) / (a + b + 2)` so the fraction always converges quickly.
/// Absolute error is well below `1e-10`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(SpecialFnError::Domain(format!(
            "regularized_incomplete_beta requires a > 0 and b > 0 (got a={a}, b={b})"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(SpecialFnError::Domain(format!(
            "regularized_incomplete_beta requires 0 <= x <= 1 (got x={x})"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }

    // ln of the prefactor x^a (1-x)^b / (a B(a, b)) shared by both branches.
    let ln_bt = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b)?;

    if x < (a + 1.0) / (a + b + 2.0) {
        Ok((ln_bt.exp() / a) * beta_cf(a, b, x)?)
    } else {
        Ok(1.0 - (ln_bt.exp() / b) * beta_cf(b, a, 1.0 - x)?)
    }
}

/// Continued fraction for the incomplete beta function (Lentz's method).
fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64> {
    let fpmin = f64::MIN_POSITIVE / BETA_CF_TOL;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < fpmin {
        d = fpmin;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=BETA_CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        // Even step.
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = 1.0 + aa / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = 1.0 / d;
        h *= d * c;

        // Odd step.
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = 1.0 + aa / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;

        if (del - 1.0).abs() < BETA_CF_TOL {
            return Ok(h);
        }
    }
    Err(SpecialFnError::NoConvergence(BETA_CF_MAX_ITER))
}

const SIMPSON_MAX_DEPTH: u32 = 52;

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute error
/// target `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adapt(&f, a, m, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        // Richardson extrapolation of the two Simpson levels.
        left + right + delta / 15.0
    } else {
        adapt(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adapt(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Quadrature of `f` over `[a, +inf)` with a *relative* error target.
///
/// The half-line is mapped to `[0, 1)` via `x = a + u / (1 - u)`; a coarse
/// pass fixes the scale of the integral and a second pass refines it to
/// `rel_tol`. Intended for integrands decaying at least polynomially with
/// power > 1, such as the Student-t density tails checked by the
/// verification suites.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64) -> f64 {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let om = 1.0 - u;
        f(a + u / om) / (om * om)
    };
    let rough = adaptive_simpson(|u| g(u), 0.0, 1.0, 1e-8);
    if rough == 0.0 {
        return 0.0;
    }
    adaptive_simpson(g, 0.0, 1.0, rough.abs() * rel_tol * 0.5)
}

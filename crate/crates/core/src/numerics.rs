//! Stable hyperbolic kernels, composite Gauss–Legendre quadrature over `[0, π]`
//! and central finite differences.
//!
//! Every thermodynamic-limit observable in this crate is an average of a
//! hyperbolic function over the band `ω ∈ [0, π]`, so the quadrature engine
//! works directly with the normalized measure `(1/π)∫₀^π f(ω) dω`.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes per Gauss–Legendre panel.
pub const GAUSS_ORDER: usize = 20;

/// Tolerances for [`integrate_unit_pi`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub max_panels: usize,
    /// Cluster nodes near `ω = 0` and `ω = π` through the substitution
    /// `ω = u − sin(2πu)/2π` (scaled to `[0, π]`).
    pub endpoint_refinement: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            max_panels: 1 << 12,
            endpoint_refinement: false,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, max_panels: usize, endpoint_refinement: bool) -> Result<Self> {
        if !(abs_tol > 0.0) || !abs_tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "abs_tol must be positive and finite, got {abs_tol}"
            )));
        }
        if max_panels < 1 {
            return Err(Error::InvalidParameter("max_panels must be at least 1".into()));
        }
        Ok(QuadratureSpec {
            abs_tol,
            max_panels,
            endpoint_refinement,
        })
    }

    pub fn with_endpoint_refinement(mut self, on: bool) -> Self {
        self.endpoint_refinement = on;
        self
    }
}

/// Finite-difference formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffScheme {
    /// `(f(x+h) − f(x−h)) / 2h`
    Central,
    /// Central estimates at `h` and `h/2` combined to cancel the `h²` term.
    Richardson,
}

/// How the step `h` is chosen at the evaluation point `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// `h = r · (1 + |x|)`
    Relative(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffSpec {
    pub step: Step,
    pub scheme: DiffScheme,
}

impl Default for DiffSpec {
    fn default() -> Self {
        DiffSpec {
            step: Step::Relative(1e-5),
            scheme: DiffScheme::Richardson,
        }
    }
}

impl DiffSpec {
    pub fn new(step: Step, scheme: DiffScheme) -> Result<Self> {
        let h = match step {
            Step::Relative(h) | Step::Absolute(h) => h,
        };
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "difference step must be positive and finite, got {h}"
            )));
        }
        Ok(DiffSpec { step, scheme })
    }

    pub fn central(step: Step) -> Self {
        DiffSpec {
            step,
            scheme: DiffScheme::Central,
        }
    }

    /// Step actually used at `x`.
    pub fn step_at(&self, x: f64) -> f64 {
        match self.step {
            Step::Relative(r) => r * (1.0 + x.abs()),
            Step::Absolute(h) => h,
        }
    }
}

/// `ln cosh x`, finite for every finite `x`.
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a - LN_2 + (-2.0 * a).exp().ln_1p()
}

/// `(tanh x, sech² x)` with `sech²` evaluated as `4e/(1+e)²`, `e = e^{−2|x|}`.
pub fn tanh_sech2(x: f64) -> (f64, f64) {
    let e = (-2.0 * x.abs()).exp();
    let denom = 1.0 + e;
    (x.tanh(), 4.0 * e / (denom * denom))
}

/// `sech x`, overflow-free.
pub fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Roots of `P_n` by Newton iteration from the Chebyshev-like initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f`, failing on the first non-finite evaluation.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> Result<f64> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let t = mid + half * x;
            let v = f(t);
            if !v.is_finite() {
                return Err(Error::NonFinite { at: t });
            }
            acc += w * v;
        }
        Ok(half * acc)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn default_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(GAUSS_ORDER))
}

/// Composite rule for `(1/π)∫₀^π f` on a fixed number of equal panels.
pub fn composite_unit_pi<F: Fn(f64) -> f64>(f: &F, panels: usize, endpoint_refinement: bool) -> Result<f64> {
    let rule = default_rule();
    if endpoint_refinement {
        // (1/π)∫₀^π f dω = ∫₀¹ f(ω(u)) (1 − cos 2πu) du
        let h = 1.0 / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let a = p as f64 * h;
            acc += rule.integrate(a, a + h, |u| {
                let omega = PI * u - 0.5 * (2.0 * PI * u).sin();
                f(omega) * (1.0 - (2.0 * PI * u).cos())
            })?;
        }
        Ok(acc)
    } else {
        let h = PI / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let a = p as f64 * h;
            acc += rule.integrate(a, a + h, f)?;
        }
        Ok(acc / PI)
    }
}

/// `(1/π)∫₀^π f(ω) dω` by panel doubling.
///
/// The error estimate is the change between successive doublings; the finer
/// of the two values is returned.
pub fn integrate_unit_pi<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    let mut panels = 1;
    let mut prev = composite_unit_pi(&f, panels, spec.endpoint_refinement)?;
    let mut estimate = f64::INFINITY;
    while panels * 2 <= spec.max_panels {
        panels *= 2;
        let cur = composite_unit_pi(&f, panels, spec.endpoint_refinement)?;
        estimate = (cur - prev).abs();
        if estimate <= spec.abs_tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NonConvergent {
        panels,
        estimate,
        abs_tol: spec.abs_tol,
    })
}

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: x })
    }
}

fn central_once<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> Result<f64> {
    Ok((eval(f, x + h)? - eval(f, x - h)?) / (2.0 * h))
}

/// First derivative of `f` at `x`.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, spec: &DiffSpec) -> Result<f64> {
    let h = spec.step_at(x);
    match spec.scheme {
        DiffScheme::Central => central_once(&f, x, h),
        DiffScheme::Richardson => {
            let coarse = central_once(&f, x, h)?;
            let fine = central_once(&f, x, 0.5 * h)?;
            Ok((4.0 * fine - coarse) / 3.0)
        }
    }
}

fn second_once<F: Fn(f64) -> f64>(f: &F, x: f64, f0: f64, h: f64) -> Result<f64> {
    Ok((eval(f, x + h)? - 2.0 * f0 + eval(f, x - h)?) / (h * h))
}

/// Second derivative of `f` at `x` from the three-point stencil.
pub fn second_central_difference<F: Fn(f64) -> f64>(f: F, x: f64, spec: &DiffSpec) -> Result<f64> {
    let h = spec.step_at(x);
    let f0 = eval(&f, x)?;
    match spec.scheme {
        DiffScheme::Central => second_once(&f, x, f0, h),
        DiffScheme::Richardson => {
            let coarse = second_once(&f, x, f0, h)?;
            let fine = second_once(&f, x, f0, 0.5 * h)?;
            Ok((4.0 * fine - coarse) / 3.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite trapezoid over `[0, π]`; spectrally accurate for smooth
    /// functions of `cos ω`.
    fn trapezoid_unit_pi<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
        let h = PI / n as f64;
        let mut acc = 0.5 * (f(0.0) + f(PI));
        for i in 1..n {
            acc += f(i as f64 * h);
        }
        acc * h / PI
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        let rule = GaussLegendre::new(GAUSS_ORDER);
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // exact through degree 2n − 1
        let v = rule.integrate(-1.0, 1.0, |x| x.powi(38)).unwrap();
        assert!((v - 2.0 / 39.0).abs() < 1e-14, "{v}");
    }

    #[test]
    fn constant_and_cosine() {
        let spec = QuadratureSpec::default();
        assert!((integrate_unit_pi(|_| 1.0, &spec).unwrap() - 1.0).abs() < 1e-14);
        assert!(integrate_unit_pi(f64::cos, &spec).unwrap().abs() < 1e-14);
    }

    #[test]
    fn log_cosh_of_two_cos_matches_trapezoid() {
        let f = |w: f64| log_cosh(2.0 * w.cos());
        let oracle = trapezoid_unit_pi(f, 1_000_000);
        // high-precision reference 0.72206045928631672470
        assert!((oracle - 0.722_060_459_286_316_7).abs() < 1e-12);
        let v = integrate_unit_pi(f, &QuadratureSpec::default()).unwrap();
        assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
    }

    #[test]
    fn cosine_powers_are_exact() {
        let spec = QuadratureSpec::default();
        for k in 0..=16 {
            let exact = if k % 2 == 1 {
                0.0
            } else {
                // (1/π)∫ cos^{2j} = C(2j, j) / 4^j
                let j = k / 2;
                let mut c = 1.0;
                for i in 0..j {
                    c *= (2 * j - i) as f64 / (i + 1) as f64;
                }
                c / 4f64.powi(j)
            };
            for refine in [false, true] {
                let v = integrate_unit_pi(|w: f64| w.cos().powi(k), &spec.with_endpoint_refinement(refine)).unwrap();
                assert!((v - exact).abs() <= 1e-12, "k={k} refine={refine}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn non_finite_and_non_convergent() {
        let spec = QuadratureSpec::default();
        assert!(matches!(
            integrate_unit_pi(|w| if w > 1.0 { f64::NAN } else { 0.0 }, &spec),
            Err(Error::NonFinite { .. })
        ));
        let tight = QuadratureSpec::new(1e-15, 4, false).unwrap();
        let r = integrate_unit_pi(|w: f64| (1.0 / (1e-3 + (w - 1.0).abs())).sqrt(), &tight);
        assert!(matches!(r, Err(Error::NonConvergent { .. })), "{r:?}");
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(0.0, 8, false).is_err());
        assert!(QuadratureSpec::new(1e-8, 0, false).is_err());
        assert!(DiffSpec::new(Step::Absolute(-1.0), DiffScheme::Central).is_err());
    }

    #[test]
    fn central_difference_examples() {
        let spec = DiffSpec::default();
        assert!((central_difference(|x| x * x, 1.0, &spec).unwrap() - 2.0).abs() < 1e-9);
        assert!((central_difference(f64::tanh, 0.0, &spec).unwrap() - 1.0).abs() < 1e-9);
        let d = central_difference(log_cosh, 1.0, &spec).unwrap();
        assert!((d - 1f64.tanh()).abs() < 1e-7);
        assert!((d - 0.761_594).abs() < 1e-6);
        let plain = DiffSpec::central(Step::Absolute(1e-5));
        assert!((central_difference(|x| x * x, 1.0, &plain).unwrap() - 2.0).abs() < 1e-9);
        assert!(matches!(
            central_difference(|x: f64| if x > 1.0 { f64::INFINITY } else { x }, 1.0, &spec),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn second_difference_of_log_cosh_is_sech2() {
        for scheme in [DiffScheme::Central, DiffScheme::Richardson] {
            let spec = DiffSpec::new(Step::Relative(1e-4), scheme).unwrap();
            let d2 = second_central_difference(log_cosh, 0.7, &spec).unwrap();
            assert!((d2 - tanh_sech2(0.7).1).abs() < 1e-6, "{scheme:?}: {d2}");
        }
    }

    #[test]
    fn hyperbolic_examples() {
        assert_eq!(log_cosh(0.0), 0.0);
        assert_eq!(log_cosh(-3.25), log_cosh(3.25));
        assert!((log_cosh(1000.0) - (1000.0 - LN_2)).abs() < 1e-12);
        assert!(log_cosh(1e308).is_finite());
        assert_eq!(tanh_sech2(0.0), (0.0, 1.0));
        let (t, s) = tanh_sech2(1.0);
        assert!((t - 0.761_594).abs() < 1e-6);
        assert!((s - 0.419_974).abs() < 1e-6);
        assert_eq!(tanh_sech2(800.0), (1.0, 0.0));
        assert_eq!(tanh_sech2(-800.0), (-1.0, 0.0));
        assert!((sech(1.0) - 0.648_054_273_663_885_4).abs() < 1e-15);
    }

    #[test]
    fn tanh_sech2_saturates_monotonically() {
        let mut last = tanh_sech2(0.0);
        for i in 1..400 {
            let cur = tanh_sech2(i as f64 * 0.1);
            assert!(cur.0 >= last.0 && cur.1 <= last.1);
            last = cur;
        }
    }

    #[test]
    fn identity_on_grid() {
        for i in 0..=10_000 {
            let x = -50.0 + i as f64 * 0.01;
            let (t, s) = tanh_sech2(x);
            assert!((t * t + s - 1.0).abs() <= 1e-12, "x={x}");
        }
    }

    #[test]
    fn log_cosh_is_convex_and_nonnegative() {
        let h = 0.01;
        for i in -2000..2000 {
            let x = i as f64 * h;
            assert!(log_cosh(x) >= 0.0);
            let d2 = log_cosh(x + h) - 2.0 * log_cosh(x) + log_cosh(x - h);
            assert!(d2 >= -1e-10, "x={x}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn richardson_recovers_cosine(x in -20.0f64..20.0) {
                let d = central_difference(f64::sin, x, &DiffSpec::default()).unwrap();
                prop_assert!((d - x.cos()).abs() <= 1e-9);
            }

            #[test]
            fn log_cosh_even(x in -1e3f64..1e3) {
                prop_assert_eq!(log_cosh(x), log_cosh(-x));
            }
        }
    }
}

//! Thermodynamic-limit free energies and normalized observables.
//!
//! All observables are dimensionless. `f_density` is `−F/NkT` (equivalently
//! `ln Z / N`), `m` is the field derivative of `f_density` with respect to the
//! reduced field `C`, and `s` is the second derivative. With this scaling the
//! free-spin ensemble satisfies `m² + s = 1` exactly and the interacting
//! quantum chains satisfy `m² + s ≤ 1`.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::numerics::{central_difference, integrate_unit_pi, log_cosh, tanh_sech2, DiffSpec, QuadratureSpec, Step};

/// Below this minimum dispersion the transverse-Ising integrands are treated
/// as gap-closing and quadrature switches to endpoint refinement.
pub const GAP_SINGULARITY_THRESHOLD: f64 = 1e-8;

/// How the coupling `J` maps onto the reduced coupling `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Convention {
    /// XY chain, `K = J/2kT`.
    Xy,
    /// Transverse-field Ising chain, `K = J/kT`.
    TransverseIsing,
    /// Classical 1D Ising chain, `K = J/kT`.
    Ising,
}

impl Convention {
    /// Factor `a` in `K = J / (a·kT)`.
    pub fn coupling_divisor(self) -> f64 {
        match self {
            Convention::Xy => 2.0,
            Convention::TransverseIsing | Convention::Ising => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::Xy => "XY",
            Convention::TransverseIsing => "TI",
            Convention::Ising => "ISING",
        }
    }
}

/// Dimensional parameters a [`ReducedCouplings`] was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams {
    pub j: f64,
    pub mu: f64,
    pub b: f64,
    pub t: f64,
    /// Boltzmann constant.
    pub k: f64,
}

impl RawParams {
    pub fn kt(&self) -> f64 {
        self.k * self.t
    }
}

/// Dimensionless coupling `K` and field `C = μB/kT`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCouplings {
    pub k: f64,
    pub c: f64,
    pub convention: Convention,
    pub raw: Option<RawParams>,
}

impl ReducedCouplings {
    pub fn new(convention: Convention, k: f64, c: f64) -> Self {
        ReducedCouplings {
            k,
            c,
            convention,
            raw: None,
        }
    }

    pub fn xy(k: f64, c: f64) -> Self {
        Self::new(Convention::Xy, k, c)
    }

    pub fn transverse_ising(k: f64, c: f64) -> Self {
        Self::new(Convention::TransverseIsing, k, c)
    }

    pub fn ising(k: f64, c: f64) -> Self {
        Self::new(Convention::Ising, k, c)
    }

    pub fn from_raw(convention: Convention, raw: RawParams) -> Result<Self> {
        if !(raw.t > 0.0) || !(raw.k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature and Boltzmann constant must be positive (T={}, k={})",
                raw.t, raw.k
            )));
        }
        let kt = raw.kt();
        let k = raw.j / (convention.coupling_divisor() * kt);
        let c = raw.mu * raw.b / kt;
        if !k.is_finite() || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite reduced couplings K={k}, C={c}"
            )));
        }
        Ok(ReducedCouplings {
            k,
            c,
            convention,
            raw: Some(raw),
        })
    }

    /// Same coupling, different reduced field.
    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self.raw = None;
        self
    }

    fn expect(&self, convention: Convention) -> Result<()> {
        if self.convention == convention {
            Ok(())
        } else {
            Err(Error::ConventionMismatch {
                expected: convention.name(),
                got: self.convention.name(),
            })
        }
    }
}

/// `(−F/NkT, m, s)` for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableTriple {
    pub f_density: f64,
    pub m: f64,
    pub s: f64,
}

impl ObservableTriple {
    pub fn complementarity_sum(&self) -> f64 {
        self.m * self.m + self.s
    }
}

/// Independent two-level systems with splitting `±E`, `x = E/kT`.
pub fn free_spin_observables(x: f64) -> ObservableTriple {
    let (m, s) = tanh_sech2(x);
    ObservableTriple {
        f_density: LN_2 + log_cosh(x),
        m,
        s,
    }
}

/// Eigenvalues of the classical Ising transfer matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferEigenvalues {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// `ln λ₊`, the large-N free energy density.
    pub f_density: f64,
}

/// Diagonalizes `[[e^{K+C}, e^{−K}], [e^{−K}, e^{K−C}]]`.
///
/// `λ₊` is the positive (Perron) root. `λ₋ = det/λ₊` avoids the cancellation in
/// the difference form and is negative for antiferromagnetic `K < 0`.
pub fn ising_transfer(rc: &ReducedCouplings) -> Result<TransferEigenvalues> {
    rc.expect(Convention::Ising)?;
    let (k, c) = (rc.k, rc.c);
    if !k.is_finite() || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite couplings K={k}, C={c}")));
    }
    if k.abs() + c.abs() > f64::MAX.ln() {
        return Err(Error::Overflow { k, c });
    }
    let ek = k.exp();
    let emk = (-k).exp();
    let lambda_plus = ek * c.cosh() + (ek * c.sinh()).hypot(emk);
    // det = e^{2K} − e^{−2K}
    let lambda_minus = ek * (ek / lambda_plus) - emk * (emk / lambda_plus);
    Ok(TransferEigenvalues {
        lambda_plus,
        lambda_minus,
        f_density: lambda_plus.ln(),
    })
}

/// Classical Ising observables from `ln λ₊` in closed form.
///
/// `m = sinh C / r` and `s = cosh C · e^{−4K} / r³` with
/// `r = √(sinh² C + e^{−4K})`. Unlike the quantum chains, `s` is unbounded:
/// at `C = 0` it equals `e^{2K}`.
pub fn ising_observables(rc: &ReducedCouplings) -> Result<ObservableTriple> {
    let eig = ising_transfer(rc)?;
    let q = (-2.0 * rc.k).exp();
    let sh = rc.c.sinh();
    let r = sh.hypot(q);
    if r == 0.0 || !r.is_finite() {
        return Err(Error::Overflow { k: rc.k, c: rc.c });
    }
    let m = sh / r;
    let s = rc.c.cosh() * (q / r) * (q / r) / r;
    Ok(ObservableTriple {
        f_density: eig.f_density,
        m,
        s,
    })
}

/// XY chain in the thermodynamic limit, band `C̃(ω) = C − 2K cos ω`.
pub fn xy_observables(rc: &ReducedCouplings, quad: &QuadratureSpec) -> Result<ObservableTriple> {
    rc.expect(Convention::Xy)?;
    let band = |w: f64| rc.c - 2.0 * rc.k * w.cos();
    let f = integrate_unit_pi(|w| log_cosh(band(w)), quad)?;
    let m = integrate_unit_pi(|w| tanh_sech2(band(w)).0, quad)?;
    let s = integrate_unit_pi(|w| tanh_sech2(band(w)).1, quad)?;
    Ok(ObservableTriple {
        f_density: LN_2 + f,
        m,
        s,
    })
}

/// Transverse-Ising point: observables plus the gap diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiObservables {
    pub observables: ObservableTriple,
    /// `min_ω ε(ω)`.
    pub gap: f64,
    /// Set when the gap is below [`GAP_SINGULARITY_THRESHOLD`].
    pub gap_singularity: bool,
}

/// `ε(ω) = √(K² + C² − 2KC cos ω)`, evaluated as the sum of squares
/// `(K−C)² cos²(ω/2) + (K+C)² sin²(ω/2)` so the gap closing at `|K| = |C|`
/// does not cancel.
pub fn ti_dispersion(k: f64, c: f64, w: f64) -> f64 {
    let (sin, cos) = (0.5 * w).sin_cos();
    ((k - c) * cos).hypot((k + c) * sin)
}

/// `tanh(ε)/ε`, continuous through `ε = 0`.
fn tanh_over(e: f64) -> f64 {
    if e < 1e-4 {
        let e2 = e * e;
        1.0 - e2 / 3.0 + 2.0 * e2 * e2 / 15.0
    } else {
        e.tanh() / e
    }
}

/// `∂/∂C ln 2cosh ε(ω) = tanh(ε) · (C − K cos ω) / ε`.
pub fn ti_magnetization_integrand(k: f64, c: f64, w: f64) -> f64 {
    tanh_over(ti_dispersion(k, c, w)) * (c - k * w.cos())
}

/// Transverse-field Ising chain in the thermodynamic limit.
///
/// `m` integrates the analytic `C`-derivative of the free-energy integrand;
/// `s` integrates the central difference in `C` of that derivative, so the
/// numerical differentiation happens pointwise under a single quadrature.
pub fn ti_observables(rc: &ReducedCouplings, quad: &QuadratureSpec, diff: &DiffSpec) -> Result<TiObservables> {
    rc.expect(Convention::TransverseIsing)?;
    let (k, c) = (rc.k, rc.c);
    let gap = (k.abs() - c.abs()).abs();
    let gap_singularity = gap < GAP_SINGULARITY_THRESHOLD;
    let quad = if gap_singularity {
        quad.with_endpoint_refinement(true)
    } else {
        *quad
    };

    let f = integrate_unit_pi(|w| LN_2 + log_cosh(ti_dispersion(k, c, w)), &quad)?;
    let m = integrate_unit_pi(|w| ti_magnetization_integrand(k, c, w), &quad)?;
    // One step for every node, so the quadrature sees a smooth integrand.
    let local = DiffSpec {
        step: Step::Absolute(diff.step_at(c)),
        scheme: diff.scheme,
    };
    let s = integrate_unit_pi(
        |w| central_difference(|cc| ti_magnetization_integrand(k, cc, w), c, &local).unwrap_or(f64::NAN),
        &quad,
    )?;
    Ok(TiObservables {
        observables: ObservableTriple { f_density: f, m, s },
        gap,
        gap_singularity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn trapezoid_unit_pi<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
        let h = PI / n as f64;
        let mut acc = 0.5 * (f(0.0) + f(PI));
        for i in 1..n {
            acc += f(i as f64 * h);
        }
        acc * h / PI
    }

    /// Exhaustive `Σ_σ exp(K Σ σᵢσᵢ₊₁ + C Σ σᵢ)`, periodic.
    fn brute_z(n: usize, k: f64, c: f64) -> f64 {
        (0..1usize << n)
            .map(|cfg| {
                let spin = |i: usize| if cfg >> (i % n) & 1 == 0 { 1.0 } else { -1.0 };
                let e: f64 = (0..n).map(|i| k * spin(i) * spin(i + 1) + c * spin(i)).sum();
                e.exp()
            })
            .sum()
    }

    #[test]
    fn free_spin_examples() {
        let o = free_spin_observables(0.0);
        assert_eq!((o.f_density, o.m, o.s), (LN_2, 0.0, 1.0));
        let o = free_spin_observables(1.0);
        assert!((o.m - 0.761_594).abs() < 1e-6 && (o.s - 0.419_974).abs() < 1e-6);
        for i in -100..=100 {
            let o = free_spin_observables(i as f64 * 0.37);
            assert!((o.complementarity_sum() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn raw_conversion_follows_convention() {
        let raw = RawParams {
            j: 3.0,
            mu: 2.0,
            b: 1.5,
            t: 0.5,
            k: 2.0,
        };
        let xy = ReducedCouplings::from_raw(Convention::Xy, raw).unwrap();
        assert!((xy.k - 3.0 / (2.0 * 2.0 * 0.5)).abs() < 1e-12);
        assert!((xy.c - 3.0).abs() < 1e-12);
        let ti = ReducedCouplings::from_raw(Convention::TransverseIsing, raw).unwrap();
        assert!((ti.k - 3.0).abs() < 1e-12);
        assert!(ReducedCouplings::from_raw(Convention::Ising, RawParams { t: 0.0, ..raw }).is_err());
    }

    #[test]
    fn transfer_matrix_examples() {
        let k = 0.8;
        let e = ising_transfer(&ReducedCouplings::ising(k, 0.0)).unwrap();
        assert!((e.lambda_plus - 2.0 * k.cosh()).abs() < 1e-14);
        assert!((e.lambda_minus - 2.0 * k.sinh()).abs() < 1e-14);
        let c = 0.6;
        let e = ising_transfer(&ReducedCouplings::ising(0.0, c)).unwrap();
        assert!((e.lambda_plus - 2.0 * c.cosh()).abs() < 1e-14);
        assert!(e.lambda_minus.abs() < 1e-15);
        let e = ising_transfer(&ReducedCouplings::ising(0.7, 0.3)).unwrap();
        let z = e.lambda_plus.powi(4) + e.lambda_minus.powi(4);
        let oracle = brute_z(4, 0.7, 0.3);
        assert!(((z - oracle) / oracle).abs() < 1e-13);
        assert!(matches!(
            ising_transfer(&ReducedCouplings::ising(500.0, 300.0)),
            Err(Error::Overflow { .. })
        ));
        assert!(matches!(
            ising_transfer(&ReducedCouplings::xy(1.0, 0.0)),
            Err(Error::ConventionMismatch { .. })
        ));
    }

    #[test]
    fn antiferromagnetic_transfer() {
        let e = ising_transfer(&ReducedCouplings::ising(-0.9, 0.4)).unwrap();
        assert!(e.lambda_minus < 0.0 && e.lambda_plus > e.lambda_minus.abs());
        for n in 3..8 {
            let z = e.lambda_plus.powi(n) + e.lambda_minus.powi(n);
            let oracle = brute_z(n as usize, -0.9, 0.4);
            assert!(((z - oracle) / oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn ising_observables_match_differences() {
        let diff = DiffSpec::default();
        for &(k, c) in &[(0.3, 0.2), (1.0, -0.5), (-0.4, 1.1)] {
            let o = ising_observables(&ReducedCouplings::ising(k, c)).unwrap();
            let fd = |cc: f64| ising_transfer(&ReducedCouplings::ising(k, cc)).unwrap().f_density;
            assert!((central_difference(fd, c, &diff).unwrap() - o.m).abs() < 1e-9);
            let mm = |cc: f64| ising_observables(&ReducedCouplings::ising(k, cc)).unwrap().m;
            assert!((central_difference(mm, c, &diff).unwrap() - o.s).abs() < 1e-8);
        }
        // ferromagnetic zero-field susceptibility exceeds the quantum bound
        let o = ising_observables(&ReducedCouplings::ising(1.0, 0.0)).unwrap();
        assert!((o.s - 2f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn xy_reduces_to_free_spins() {
        let quad = QuadratureSpec::default();
        for i in -10..=10 {
            let c = i as f64 * 0.7;
            let xy = xy_observables(&ReducedCouplings::xy(0.0, c), &quad).unwrap();
            let free = free_spin_observables(c);
            assert!((xy.f_density - free.f_density).abs() < 1e-12);
            assert!((xy.m - free.m).abs() < 1e-12);
            assert!((xy.s - free.s).abs() < 1e-12);
        }
    }

    #[test]
    fn xy_examples() {
        let quad = QuadratureSpec::default();
        let o = xy_observables(&ReducedCouplings::xy(1.3, 0.0), &quad).unwrap();
        assert!(o.m.abs() < 1e-14);
        let o = xy_observables(&ReducedCouplings::xy(1.0, 0.0), &quad).unwrap();
        let oracle = trapezoid_unit_pi(|w| tanh_sech2(2.0 * w.cos()).1, 1_000_000);
        assert!((oracle - 0.356_312_398_989_645_5).abs() < 1e-12);
        assert!((o.s - oracle).abs() < 1e-10);
        // K = 1, C = 1, against mpmath references
        let o = xy_observables(&ReducedCouplings::xy(1.0, 1.0), &quad).unwrap();
        assert!((o.f_density - 1.596_551_770_057_525_2).abs() < 1e-10);
        assert!((o.m - 0.368_414_866_053_147_2).abs() < 1e-10);
        assert!((o.s - 0.388_402_694_894_793_3).abs() < 1e-10);
    }

    #[test]
    fn ti_reduces_to_free_spins() {
        let quad = QuadratureSpec::default();
        let diff = DiffSpec::default();
        for &c in &[-2.5, -0.3, 0.4, 1.0, 3.0] {
            let ti = ti_observables(&ReducedCouplings::transverse_ising(0.0, c), &quad, &diff).unwrap();
            let free = free_spin_observables(c);
            assert!((ti.observables.f_density - free.f_density).abs() < 1e-12);
            assert!((ti.observables.m - free.m).abs() < 1e-12);
            assert!((ti.observables.s - free.s).abs() < 1e-8);
        }
        let ti = ti_observables(&ReducedCouplings::transverse_ising(1.7, 0.0), &quad, &diff).unwrap();
        assert!(ti.observables.m.abs() < 1e-14);
        assert!((ti.gap - 1.7).abs() < 1e-15);
    }

    #[test]
    fn ti_flags_gap_closing() {
        let r = ti_observables(
            &ReducedCouplings::transverse_ising(60.0, 60.0),
            &QuadratureSpec::default(),
            &DiffSpec::default(),
        )
        .unwrap();
        assert!(r.gap_singularity && r.gap == 0.0);
        // zero-temperature limit of m at K = C is 2/π
        assert!((r.observables.m - 2.0 / PI).abs() < 1e-3, "{}", r.observables.m);
        assert!(r.observables.s > 0.0 && r.observables.complementarity_sum() <= 1.0);
    }

    #[test]
    fn ti_free_energy_against_trapezoid() {
        let (k, c) = (1.2, 0.7);
        let r = ti_observables(
            &ReducedCouplings::transverse_ising(k, c),
            &QuadratureSpec::default(),
            &DiffSpec::default(),
        )
        .unwrap();
        let f = trapezoid_unit_pi(|w| LN_2 + log_cosh(ti_dispersion(k, c, w)), 200_000);
        assert!((r.observables.f_density - f).abs() < 1e-11);
    }

    #[test]
    fn ti_magnetization_is_derivative_of_free_energy() {
        let quad = QuadratureSpec::new(1e-13, 1 << 12, false).unwrap();
        let diff = DiffSpec::default();
        for &(k, c) in &[(0.5, 1.5), (2.0, 0.8), (1.0, 3.0)] {
            let r = ti_observables(&ReducedCouplings::transverse_ising(k, c), &quad, &diff).unwrap();
            let f = |cc: f64| {
                ti_observables(&ReducedCouplings::transverse_ising(k, cc), &quad, &diff)
                    .unwrap()
                    .observables
                    .f_density
            };
            let d = central_difference(f, c, &diff).unwrap();
            assert!(((d - r.observables.m) / r.observables.m).abs() < 1e-6);
        }
    }

    #[test]
    fn saturation_at_large_field() {
        let quad = QuadratureSpec::default();
        let diff = DiffSpec::new(Step::Relative(1e-5), crate::numerics::DiffScheme::Richardson).unwrap();
        for k in [0.5, 1.0, 2.0] {
            let xy = xy_observables(&ReducedCouplings::xy(k, 50.0), &quad).unwrap();
            assert!((xy.m - 1.0).abs() < 1e-12 && xy.s < 1e-12);
            let ti = ti_observables(&ReducedCouplings::transverse_ising(k, 50.0), &quad, &diff).unwrap();
            assert!(ti.observables.m > 0.99 && ti.observables.s < 1e-3);
            let ti = ti_observables(&ReducedCouplings::transverse_ising(k, -50.0), &quad, &diff).unwrap();
            assert!(ti.observables.m < -0.99);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn xy_odd_even_and_bounded(k in -3.0f64..3.0, c in -4.0f64..4.0) {
                let quad = QuadratureSpec::default();
                let a = xy_observables(&ReducedCouplings::xy(k, c), &quad).unwrap();
                let b = xy_observables(&ReducedCouplings::xy(k, -c), &quad).unwrap();
                prop_assert!((a.m + b.m).abs() <= 1e-9);
                prop_assert!((a.s - b.s).abs() <= 1e-9);
                prop_assert!(a.m.abs() <= 1.0 && (0.0..=1.0).contains(&a.s));
                prop_assert!(a.complementarity_sum() <= 1.0 + 1e-9);
            }

            #[test]
            fn ti_odd_even_and_bounded(k in -3.0f64..3.0, c in -4.0f64..4.0) {
                let quad = QuadratureSpec::default();
                let diff = DiffSpec::default();
                let a = ti_observables(&ReducedCouplings::transverse_ising(k, c), &quad, &diff).unwrap().observables;
                let b = ti_observables(&ReducedCouplings::transverse_ising(k, -c), &quad, &diff).unwrap().observables;
                prop_assert!((a.m + b.m).abs() <= 1e-9);
                prop_assert!((a.s - b.s).abs() <= 1e-9);
                prop_assert!(a.complementarity_sum() <= 1.0 + 1e-9);
            }

            #[test]
            fn ising_no_degeneracy(k in 1e-3f64..5.0, c in -5.0f64..5.0) {
                let e = ising_transfer(&ReducedCouplings::ising(k, c)).unwrap();
                prop_assert!(e.lambda_plus > e.lambda_minus.abs());
            }
        }
    }
}

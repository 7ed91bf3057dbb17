//! Invariant suite run by `thermoptics verify`.
//!
//! Each group evaluates one family of identities over a deterministic sample
//! and reports its worst residual against a fixed tolerance. Cross-checks
//! against the trapezoid rule use a separate implementation from the
//! Gauss–Legendre engine.

use std::f64::consts::{LN_2, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::duality::{law_inequality_check, law_residual, tanh_solution, LawParams};
use crate::error::Result;
use crate::grid::SweepGrid;
use crate::models::{
    free_spin_observables, ising_transfer, ti_dispersion, ti_observables, xy_observables, ReducedCouplings,
};
use crate::numerics::{log_cosh, tanh_sech2, DiffSpec, GaussLegendre, QuadratureSpec, GAUSS_ORDER};
use crate::observables::{detect_critical_field, ising_interference_ratio, ti_gap};
use crate::optics::{
    double_slit_intensity, slit_array_analog, thermo_slit_map, visibility_predictability, CorrespondenceMap, Phase,
    SlitGeometry, ThermoInput,
};
use crate::oracle::{
    build_hamiltonian, ed_default_diff, ed_observables, enumerate_classical_z, symmetry_residual, ChainModel, ChainSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Reduced samples, exact diagonalization up to `N = 8`.
    Fast,
    /// Full samples, exact diagonalization up to `N = 10`.
    Full,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub level: Level,
    pub quad: QuadratureSpec,
    pub diff: DiffSpec,
}

impl VerifyOptions {
    pub fn new(level: Level) -> Self {
        VerifyOptions {
            level,
            quad: QuadratureSpec::default(),
            diff: DiffSpec::default(),
        }
    }

    fn full(&self) -> bool {
        self.level == Level::Full
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupOutcome {
    pub name: &'static str,
    /// Worst residual observed; infinite when an evaluation failed.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub groups: Vec<GroupOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(|g| g.passed)
    }

    pub fn lines(&self) -> Vec<String> {
        self.groups
            .iter()
            .map(|g| {
                format!(
                    "{} {:<34} worst={:<12.3e} tol={:<8.1e} {:>6.2}s  {}",
                    if g.passed { "PASS" } else { "FAIL" },
                    g.name,
                    g.worst,
                    g.tolerance,
                    g.seconds,
                    g.detail
                )
            })
            .collect()
    }
}

/// Running maximum of a residual; pass iff the maximum stays within tolerance.
struct Worst {
    value: f64,
    detail: String,
    failures: Vec<String>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: 0.0,
            detail: String::new(),
            failures: Vec::new(),
        }
    }

    fn see(&mut self, residual: f64, at: impl FnOnce() -> String) {
        let r = if residual.is_nan() { f64::INFINITY } else { residual };
        if r > self.value || (self.detail.is_empty() && r == self.value) {
            self.value = r;
            self.detail = at();
        }
    }

    fn see_result(&mut self, r: Result<f64>, at: impl FnOnce() -> String) {
        match r {
            Ok(v) => self.see(v, at),
            Err(e) => {
                let where_ = at();
                self.failures.push(format!("{} at {}", e.name(), where_));
                self.see(f64::INFINITY, || where_);
            }
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }
}

fn group(name: &'static str, tolerance: f64, body: impl FnOnce(&mut Worst)) -> GroupOutcome {
    let start = Instant::now();
    let mut w = Worst::new();
    body(&mut w);
    let passed = w.value <= tolerance && w.failures.is_empty();
    let detail = if w.failures.is_empty() {
        if w.detail.is_empty() {
            String::new()
        } else {
            format!("at {}", w.detail)
        }
    } else {
        w.failures.join("; ")
    };
    GroupOutcome {
        name,
        worst: w.value,
        tolerance,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

type Integrand = Box<dyn Fn(f64) -> f64 + Sync>;

/// Composite trapezoid `(1/π)∫₀^π f`; spectrally accurate for smooth
/// functions of `cos ω`.
fn trapezoid_unit_pi<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let h = PI / n as f64;
    let mut acc = 0.5 * (f(0.0) + f(PI));
    for i in 1..n {
        acc += f(i as f64 * h);
    }
    acc * h / PI
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let full = opts.full();
    let quad = opts.quad;
    let diff = opts.diff;
    let mut groups = Vec::new();

    groups.push(group("numerics.tanh_sech2_identity", 1e-12, |w| {
        for x in linspace(-50.0, 50.0, 10_001) {
            let (t, s) = tanh_sech2(x);
            w.see((t * t + s - 1.0).abs(), || format!("x={x}"));
        }
    }));

    groups.push(group("numerics.log_cosh_shape", 1e-10, |w| {
        let h = 0.01;
        for x in linspace(-40.0, 40.0, 8001) {
            w.require(log_cosh(x) == log_cosh(-x), format!("log_cosh not even at {x}"));
            w.require(log_cosh(x) >= 0.0, format!("log_cosh negative at {x}"));
            let d2 = log_cosh(x + h) - 2.0 * log_cosh(x) + log_cosh(x - h);
            w.see(-d2, || format!("x={x}"));
        }
    }));

    groups.push(group("numerics.quadrature_polynomials", 1e-12, |w| {
        for k in 0..=16 {
            let exact = if k % 2 == 1 {
                0.0
            } else {
                let j = k / 2;
                (0..j).fold(1.0, |c, i| c * (2 * j - i) as f64 / (i + 1) as f64) / 4f64.powi(j)
            };
            let v = crate::numerics::integrate_unit_pi(|x: f64| x.cos().powi(k), &quad);
            w.see_result(v.map(|v| (v - exact).abs()), || format!("cos^{k}"));
        }
    }));

    groups.push(group("numerics.quadrature_vs_trapezoid", 1e-9, |w| {
        let n = if full { 400_000 } else { 100_000 };
        let cases: Vec<(&str, Integrand)> = vec![
            ("ln cosh(2cos w)", Box::new(|x: f64| log_cosh(2.0 * x.cos()))),
            ("sech^2(40cos w)", Box::new(|x: f64| tanh_sech2(40.0 * x.cos()).1)),
            ("tanh(3 - 16cos w)", Box::new(|x: f64| (3.0 - 16.0 * x.cos()).tanh())),
            (
                "ln 2cosh eps(60,59.5)",
                Box::new(|x: f64| LN_2 + log_cosh(ti_dispersion(60.0, 59.5, x))),
            ),
        ];
        for (label, f) in &cases {
            let oracle = trapezoid_unit_pi(f, n);
            let v = crate::numerics::integrate_unit_pi(f, &quad);
            w.see_result(v.map(|v| (v - oracle).abs()), || label.to_string());
        }
    }));

    groups.push(group("models.free_complementarity", 1e-12, |w| {
        for x in linspace(-10.0, 10.0, 10_000) {
            w.see((free_spin_observables(x).complementarity_sum() - 1.0).abs(), || {
                format!("x={x}")
            });
        }
    }));

    groups.push(group("models.xy_pointwise_identity", 1e-12, |w| {
        let rule = GaussLegendre::new(GAUSS_ORDER);
        for (k, c) in [(1.0, 1.0), (0.3, -2.0), (5.0, 0.5), (20.0, 3.0)] {
            for panels in [1usize, 4, 16, 64] {
                let h = PI / panels as f64;
                for p in 0..panels {
                    for &node in rule.nodes() {
                        let omega = (p as f64 + 0.5 * (node + 1.0)) * h;
                        let (t, s) = tanh_sech2(c - 2.0 * k * omega.cos());
                        w.see((t * t + s - 1.0).abs(), || format!("K={k} C={c} w={omega}"));
                    }
                }
            }
        }
    }));

    groups.push(group("models.xy_complementarity", 1e-9, |w| {
        let n = if full { 50 } else { 20 };
        let points: Vec<(f64, f64)> = linspace(0.0, 3.0, n)
            .into_iter()
            .flat_map(|k| linspace(-3.0, 3.0, n).into_iter().map(move |c| (k, c)))
            .collect();
        let sums: Vec<_> = points
            .par_iter()
            .map(|&(k, c)| xy_observables(&ReducedCouplings::xy(k, c), &quad).map(|o| o.complementarity_sum() - 1.0))
            .collect();
        for ((k, c), r) in points.iter().zip(sums) {
            w.see_result(r, || format!("K={k} C={c}"));
        }
    }));

    groups.push(group("models.xy_reduction", 1e-10, |w| {
        for c in linspace(-8.0, 8.0, 100) {
            let free = free_spin_observables(c);
            let r = xy_observables(&ReducedCouplings::xy(0.0, c), &quad).map(|o| {
                (o.f_density - free.f_density)
                    .abs()
                    .max((o.m - free.m).abs())
                    .max((o.s - free.s).abs())
            });
            w.see_result(r, || format!("C={c}"));
        }
    }));

    groups.push(group("models.field_symmetry", 1e-9, |w| {
        for (k, c) in [(0.4, 0.9), (1.5, 2.5), (2.0, 0.3), (0.8, 0.8)] {
            let pair = xy_observables(&ReducedCouplings::xy(k, c), &quad)
                .and_then(|a| xy_observables(&ReducedCouplings::xy(k, -c), &quad).map(|b| (a, b)));
            w.see_result(pair.map(|(a, b)| (a.m + b.m).abs().max((a.s - b.s).abs())), || {
                format!("XY K={k} C={c}")
            });
            let pair = ti_observables(&ReducedCouplings::transverse_ising(k, c), &quad, &diff).and_then(|a| {
                ti_observables(&ReducedCouplings::transverse_ising(k, -c), &quad, &diff)
                    .map(|b| (a.observables, b.observables))
            });
            w.see_result(pair.map(|(a, b)| (a.m + b.m).abs().max((a.s - b.s).abs())), || {
                format!("TI K={k} C={c}")
            });
        }
    }));

    groups.push(group("models.saturation", 1e-3, |w| {
        for k in [0.5, 1.0, 2.0] {
            let r = xy_observables(&ReducedCouplings::xy(k, 50.0), &quad).map(|o| (1.0 - o.m).max(o.s));
            w.see_result(r, || format!("XY K={k} C=50"));
            let r = ti_observables(&ReducedCouplings::transverse_ising(k, 50.0), &quad, &diff)
                .map(|o| (1.0 - o.observables.m).max(o.observables.s));
            w.see_result(r, || format!("TI K={k} C=50"));
        }
    }));

    groups.push(group("models.ti_complementarity", 1e-9, |w| {
        let n = if full { 30 } else { 12 };
        let points: Vec<(f64, f64)> = linspace(0.0, 4.0, n)
            .into_iter()
            .flat_map(|k| linspace(-4.0, 4.0, n).into_iter().map(move |c| (k, c)))
            .collect();
        let sums: Vec<_> = points
            .par_iter()
            .map(|&(k, c)| {
                ti_observables(&ReducedCouplings::transverse_ising(k, c), &quad, &diff)
                    .map(|o| o.observables.complementarity_sum() - 1.0)
            })
            .collect();
        for ((k, c), r) in points.iter().zip(sums) {
            w.see_result(r, || format!("K={k} C={c}"));
        }
    }));

    groups.push(group("models.ti_derivative_consistency", 1e-6, |w| {
        let tight = QuadratureSpec {
            abs_tol: quad.abs_tol * 1e-3,
            ..quad
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let count = if full { 200 } else { 40 };
        let mut points = Vec::with_capacity(count);
        while points.len() < count {
            let k: f64 = rng.random_range(0.1..3.0);
            let c: f64 = rng.random_range(0.2..3.0);
            if (k - c).abs() > 0.1 {
                points.push((k, c));
            }
        }
        let rel: Vec<_> = points
            .par_iter()
            .map(|&(k, c)| -> Result<f64> {
                let rc = ReducedCouplings::transverse_ising(k, c);
                let m = ti_observables(&rc, &tight, &diff)?.observables.m;
                let f = |cc: f64| {
                    ti_observables(&rc.with_c(cc), &tight, &diff)
                        .map(|o| o.observables.f_density)
                        .unwrap_or(f64::NAN)
                };
                let d = crate::numerics::central_difference(f, c, &diff)?;
                Ok(((d - m) / m).abs())
            })
            .collect();
        for ((k, c), r) in points.iter().zip(rel) {
            w.see_result(r, || format!("K={k:.4} C={c:.4}"));
        }
    }));

    groups.push(group("ising.transfer_identity", 1e-12, |w| {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 3..=12usize {
            for _ in 0..20 {
                let rc = ReducedCouplings::ising(rng.random_range(-1.0..2.0), rng.random_range(-1.0..1.0));
                let r = ising_transfer(&rc).and_then(|e| {
                    let z = enumerate_classical_z(n, &rc)?;
                    let t = e.lambda_plus.powi(n as i32) + e.lambda_minus.powi(n as i32);
                    Ok(((z - t) / z).abs())
                });
                w.see_result(r, || format!("N={n} K={:.4} C={:.4}", rc.k, rc.c));
            }
        }
    }));

    groups.push(group("ising.no_transition", 1e-3, |w| {
        let rc = ReducedCouplings::ising(1.0, 0.0);
        let mut last = f64::INFINITY;
        for n in 1..=400 {
            match ising_interference_ratio(&rc, n) {
                Ok(d) => {
                    w.require(d.ratio < last, format!("ratio not decreasing at N={n}"));
                    last = d.ratio;
                    if n >= 100 {
                        w.see(d.ratio, || format!("N={n}"));
                    }
                }
                Err(e) => w.require(false, e.to_string()),
            }
        }
    }));

    groups.push(group("optics.complementarity", 1e-12, |w| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let (y, d, sigma) = (
                rng.random_range(-20.0..20.0),
                rng.random_range(0.01..5.0),
                rng.random_range(0.1..4.0),
            );
            let g = SlitGeometry::new(d, sigma).expect("positive geometry");
            let c = visibility_predictability(y, &g);
            w.see(
                (c.sum() - 1.0)
                    .abs()
                    .max((c.probs.predictability() - c.predictability).abs())
                    .max((c.probs.p1 + c.probs.p2 - 1.0).abs()),
                || format!("y={y} d={d} sigma={sigma}"),
            );
        }
    }));

    groups.push(group("optics.intensity_forms", 1e-12, |w| {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (y, d, sigma, kappa): (f64, f64, f64, f64) = (
                rng.random_range(-5.0..5.0),
                rng.random_range(0.1..4.0),
                rng.random_range(0.3..3.0),
                rng.random_range(-10.0..10.0),
            );
            let g = SlitGeometry::with_phase(d, sigma, Phase::Linear(kappa)).expect("positive geometry");
            let s2 = 2.0 * sigma * sigma;
            let a1 = (-(y - 0.5 * d).powi(2) / s2).exp();
            let a2 = (-(y + 0.5 * d).powi(2) / s2).exp();
            let phi = kappa * y;
            let amp = (a1 + a2 * phi.cos()).powi(2) + (a2 * phi.sin()).powi(2);
            w.see((double_slit_intensity(y, &g) - amp).abs() / amp.max(1.0), || {
                format!("y={y} d={d} sigma={sigma}")
            });
        }
    }));

    groups.push(group("optics.thermo_identity", 1e-12, |w| {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let x: f64 = rng.random_range(-10.0..10.0);
            let free = free_spin_observables(x);
            for variant in [CorrespondenceMap::EnergyAsPosition, CorrespondenceMap::RatioAsPosition] {
                let kt: f64 = rng.random_range(0.2..5.0);
                match thermo_slit_map(&ThermoInput::free_spin(x * kt, kt, 1.0), variant) {
                    Ok(p) => {
                        let c = visibility_predictability(p.y, &p.geometry);
                        w.see(
                            (c.predictability - free.m.abs())
                                .abs()
                                .max((c.visibility * c.visibility - free.s).abs()),
                            || format!("x={x} {variant:?}"),
                        );
                    }
                    Err(e) => w.require(false, e.to_string()),
                }
            }
        }
    }));

    groups.push(group("optics.slit_array_analog", 1e-10, |w| {
        for k in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let r = slit_array_analog(k, &quad)
                .and_then(|a| xy_observables(&ReducedCouplings::xy(k, 0.0), &quad).map(|o| (a.s_analog - o.s).abs()));
            w.see_result(r, || format!("K={k}"));
        }
        for k in [1.0, 20.0] {
            let oracle = trapezoid_unit_pi(|x| tanh_sech2(2.0 * k * x.cos()).1, 200_000);
            w.see_result(slit_array_analog(k, &quad).map(|a| (a.s_analog - oracle).abs()), || {
                format!("trapezoid K={k}")
            });
        }
    }));

    groups.push(group("duality.tanh_residual", 1e-9, |w| {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (sets, per) = if full { (100, 50) } else { (30, 20) };
        for _ in 0..sets {
            let p = LawParams::new(
                rng.random_range(0.1..10.0),
                rng.random_range(0.1..4.0),
                rng.random_range(-2.0..2.0),
            )
            .expect("valid law");
            let f = tanh_solution(p);
            for _ in 0..per {
                let x: f64 = rng.random_range(-5.0..5.0);
                w.see_result(law_residual(f, &p, x, &diff).map(f64::abs), || {
                    format!("alpha={:.3} beta={:.3} c={:.3} x={x:.3}", p.alpha, p.beta, p.c)
                });
                let bound = p.beta.sqrt();
                w.require(
                    f(x).abs() <= bound,
                    format!("tanh solution exceeds sqrt(beta) at x={x}"),
                );
            }
        }
    }));

    groups.push(group("duality.xy_inequality", 1e-9, |w| {
        let grid = linspace(-4.0, 4.0, if full { 81 } else { 21 });
        for k in [0.5, 1.0] {
            let m = |c: f64| {
                xy_observables(&ReducedCouplings::xy(k, c), &quad)
                    .map(|o| o.m)
                    .unwrap_or(f64::NAN)
            };
            let r = law_inequality_check(m, 1.0, &grid, &diff);
            w.see(r.worst_violation.max(0.0), || format!("K={k} C={}", r.worst_at));
            w.require(r.pass, format!("XY inequality fails at K={k}"));
        }
    }));

    groups.push(group("observables.ti_gap_zero_set", 1e-12, |w| {
        let axis = linspace(-2.0, 2.0, 100);
        for &k in &axis {
            for &c in &axis {
                match ti_gap(&ReducedCouplings::transverse_ising(k, c)) {
                    Ok(g) => {
                        let expect_zero = (k.abs() - c.abs()).abs() <= 1e-12;
                        w.require(
                            (g <= 1e-12) == expect_zero,
                            format!("gap zero set wrong at K={k} C={c}"),
                        );
                        let brute = (0..=512)
                            .map(|i| ti_dispersion(k, c, PI * i as f64 / 512.0))
                            .fold(f64::INFINITY, f64::min);
                        w.see((g - brute).abs(), || format!("K={k} C={c}"));
                    }
                    Err(e) => w.require(false, e.to_string()),
                }
            }
        }
    }));

    groups.push(group("observables.critical_field", 0.05, |w| {
        let grid = SweepGrid::new("B", 0.0, 6.0, 0.01).expect("valid grid");
        match detect_critical_field(3.0, 0.05, &grid, &quad, &diff) {
            Ok(r) => {
                w.see((r.b_star - 3.0).abs(), || format!("J=3 kT=0.05 b*={:.4}", r.b_star));
                w.require(r.sharp, "low-temperature peak not sharp");
            }
            Err(e) => w.require(false, e.to_string()),
        }
        match detect_critical_field(3.0, 2.0, &grid, &quad, &diff) {
            Ok(r) => w.require(!r.sharp, "kT=2 peak reported sharp"),
            Err(e) => w.require(false, e.to_string()),
        }
        if full {
            for j in [1.0, 2.0, 3.0] {
                let grid = SweepGrid::new("B", 0.0, 2.0 * j, 0.01).expect("valid grid");
                let mut last = f64::INFINITY;
                for kt in [0.2, 0.1, 0.05] {
                    match detect_critical_field(j, kt, &grid, &quad, &diff) {
                        Ok(r) => {
                            let off = (r.b_star - j).abs();
                            w.require(off <= last + 1e-12, format!("|b*-J| grew at J={j} kT={kt}"));
                            last = off;
                        }
                        Err(e) => w.require(false, e.to_string()),
                    }
                }
                w.see(last, || format!("J={j} kT=0.05"));
                w.require(
                    last <= 0.01 + 1e-12,
                    format!("J={j}: final |b*-J|={last} above one grid step"),
                );
            }
        }
    }));

    groups.push(group("oracle.hermiticity", 1e-12, |w| {
        let top = if full { 10 } else { 8 };
        for model in [ChainModel::Xy, ChainModel::TransverseIsing, ChainModel::Free] {
            for n in (2..=top).step_by(2) {
                let r = build_hamiltonian(&ChainSpec::new(model, n, 1.0, 0.37)).map(|h| symmetry_residual(&h));
                w.see_result(r, || format!("{model:?} N={n}"));
            }
        }
    }));

    groups.push(group("oracle.ed_convergence", 0.05, |w| {
        let sizes: &[usize] = if full { &[4, 6, 8, 10] } else { &[4, 6, 8] };
        let ed = ed_default_diff();

        let limit = ti_observables(&ReducedCouplings::transverse_ising(1.0, 0.5), &quad, &diff).map(|o| o.observables);
        let runs: Vec<_> = sizes
            .par_iter()
            .map(|&n| ed_observables(&ChainSpec::new(ChainModel::TransverseIsing, n, 1.0, 0.5), 1.0, &ed))
            .collect();
        check_convergence(w, "TI", limit, runs, sizes, |r, l| {
            (r.f_density - l.f_density).abs() / l.f_density.abs()
        });

        let limit = xy_observables(&ReducedCouplings::xy(0.5, 0.3), &quad);
        let runs: Vec<_> = sizes
            .par_iter()
            .map(|&n| ed_observables(&ChainSpec::new(ChainModel::Xy, n, 1.0, 0.3), 1.0, &ed))
            .collect();
        let runs_m = runs.clone();
        check_convergence(w, "XY", limit.clone(), runs, sizes, |r, l| {
            (r.f_density - l.f_density).abs() / l.f_density.abs()
        });
        if let (Ok(l), Some(Ok(last))) = (limit, runs_m.last()) {
            w.see(((last.m - l.m) / l.m).abs(), || {
                format!("XY m at N={}", sizes[sizes.len() - 1])
            });
        }
    }));

    groups.push(group("oracle.ed_complementarity", 1e-6, |w| {
        let top = if full { 10 } else { 8 };
        let ed = ed_default_diff();
        let cases: Vec<(ChainModel, usize, f64, f64, f64)> =
            [ChainModel::Xy, ChainModel::TransverseIsing, ChainModel::Free]
                .into_iter()
                .flat_map(|model| {
                    [(1.0, 0.5, 1.0), (1.0, 1.0, 0.3), (2.0, 0.2, 0.7)]
                        .into_iter()
                        .flat_map(move |(j, b, kt)| [4, top].into_iter().map(move |n| (model, n, j, b, kt)))
                })
                .collect();
        let sums: Vec<_> = cases
            .par_iter()
            .map(|&(model, n, j, b, kt)| {
                ed_observables(&ChainSpec::new(model, n, j, b), kt, &ed).map(|r| r.m * r.m + r.s - 1.0)
            })
            .collect();
        for ((model, n, j, b, kt), r) in cases.iter().zip(sums) {
            w.see_result(r, || format!("{model:?} N={n} J={j} B={b} kT={kt}"));
        }
    }));

    VerifyReport { groups }
}

fn check_convergence<L: Copy>(
    w: &mut Worst,
    label: &str,
    limit: Result<L>,
    runs: Vec<Result<crate::oracle::SpectrumResult>>,
    sizes: &[usize],
    relative: impl Fn(&crate::oracle::SpectrumResult, &L) -> f64,
) {
    let limit = match limit {
        Ok(l) => l,
        Err(e) => return w.require(false, format!("{label} limit: {e}")),
    };
    let mut last = f64::INFINITY;
    for (&n, run) in sizes.iter().zip(runs) {
        match run {
            Ok(r) => {
                let err = relative(&r, &limit);
                w.require(err < last, format!("{label}: |f_N - f_inf| not decreasing at N={n}"));
                last = err;
            }
            Err(e) => return w.require(false, format!("{label} N={n}: {e}")),
        }
    }
    w.see(last, || format!("{label} f at N={}", sizes[sizes.len() - 1]));
}

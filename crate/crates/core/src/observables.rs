//! Complementarity functionals, the single-slit / double-slit diagnostic and
//! critical-field detection for the transverse-Ising chain.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::SweepGrid;
use crate::models::{ising_transfer, ti_observables, Convention, ObservableTriple, ReducedCouplings};
use crate::numerics::{DiffSpec, QuadratureSpec};

/// Boltzmann-ratio threshold separating the two interference regimes.
pub const DEFAULT_REGIME_THRESHOLD: f64 = 0.01;

/// A peak counts as sharp when it exceeds this multiple of the grid median.
/// Heuristic diagnostic only.
pub const SHARPNESS_FACTOR: f64 = 1.5;

/// `m² + s`.
pub fn complementarity_sum(obs: &ObservableTriple) -> f64 {
    obs.complementarity_sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalScanResult {
    /// Parabola-refined location of the susceptibility maximum, in field units.
    pub b_star: f64,
    pub chi_peak: f64,
    pub grid_resolution: f64,
    /// Peak above [`SHARPNESS_FACTOR`] × median of the sampled `s`.
    pub sharp: bool,
    pub median: f64,
}

/// Scans `s` of the transverse-Ising chain over the field values in `grid`
/// (field measured as `μB`, so `C = B/kT`) at coupling `J` and temperature `kT`.
pub fn detect_critical_field(
    j: f64,
    kt: f64,
    grid: &SweepGrid,
    quad: &QuadratureSpec,
    diff: &DiffSpec,
) -> Result<CriticalScanResult> {
    let fields = grid.values();
    let mut result = scan_fields(j, kt, &fields, quad, diff)?;
    result.grid_resolution = grid.step;
    Ok(result)
}

/// Same as [`detect_critical_field`] over an explicit strictly increasing list.
pub fn scan_fields(
    j: f64,
    kt: f64,
    fields: &[f64],
    quad: &QuadratureSpec,
    diff: &DiffSpec,
) -> Result<CriticalScanResult> {
    if !(kt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got kT={kt}"
        )));
    }
    if fields.len() < 5 {
        return Err(Error::InvalidParameter(
            "critical scan needs at least 5 grid points".into(),
        ));
    }
    if fields.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "critical scan grid must be strictly increasing".into(),
        ));
    }
    if j == 0.0 {
        return Err(Error::DegenerateScan(
            "J = 0: no coupling, s depends only on |B|".into(),
        ));
    }

    let k = j / kt;
    let s: Vec<f64> = fields
        .par_iter()
        .map(|&b| ti_observables(&ReducedCouplings::transverse_ising(k, b / kt), quad, diff).map(|r| r.observables.s))
        .collect::<Result<_>>()?;

    let (lo, hi) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if hi - lo <= 1e-12 * hi.abs().max(1e-300) {
        return Err(Error::DegenerateScan(
            "susceptibility is constant across the grid".into(),
        ));
    }

    let i = s.iter().position(|&v| v == hi).expect("max is sampled");
    let (b_star, chi_peak) = if i > 0 && i + 1 < s.len() {
        refine_parabola([fields[i - 1], fields[i], fields[i + 1]], [s[i - 1], s[i], s[i + 1]])
    } else {
        (fields[i], hi)
    };

    let mut sorted = s.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };

    let resolution = fields.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(CriticalScanResult {
        b_star,
        chi_peak: chi_peak.max(hi),
        grid_resolution: resolution,
        sharp: hi > SHARPNESS_FACTOR * median,
        median,
    })
}

/// Vertex of the parabola through three points whose middle one is the largest.
fn refine_parabola(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d0 = (y[1] - y[0]) / (x[1] - x[0]);
    let d1 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d1 - d0) / (x[2] - x[0]);
    if !(curvature < 0.0) {
        return (x[1], y[1]);
    }
    // p(t) = y0 + d0 (t − x0) + curvature (t − x0)(t − x1)
    let vertex = (0.5 * (x[0] + x[1]) - 0.5 * d0 / curvature).clamp(x[0], x[2]);
    let value = y[0] + d0 * (vertex - x[0]) + curvature * (vertex - x[0]) * (vertex - x[1]);
    (vertex, value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    SingleSlit,
    DoubleSlit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceDiagnostic {
    /// `|λ₋/λ₊|^N`, weight of the subdominant Boltzmann contribution.
    pub ratio: f64,
    /// `ln λ₊ − ln |λ₋|`; infinite when `λ₋ = 0`.
    pub gap: f64,
    pub regime: Regime,
}

pub fn ising_interference_ratio(rc: &ReducedCouplings, n: usize) -> Result<InterferenceDiagnostic> {
    ising_interference_ratio_with_threshold(rc, n, DEFAULT_REGIME_THRESHOLD)
}

pub fn ising_interference_ratio_with_threshold(
    rc: &ReducedCouplings,
    n: usize,
    threshold: f64,
) -> Result<InterferenceDiagnostic> {
    if n < 1 {
        return Err(Error::InvalidParameter("chain length must be at least 1".into()));
    }
    let eig = ising_transfer(rc)?;
    let q = eig.lambda_minus.abs() / eig.lambda_plus;
    let ratio = if q == 0.0 { 0.0 } else { (n as f64 * q.ln()).exp() };
    let gap = eig.lambda_plus.ln() - eig.lambda_minus.abs().ln();
    Ok(InterferenceDiagnostic {
        ratio,
        gap,
        regime: if ratio > threshold {
            Regime::DoubleSlit
        } else {
            Regime::SingleSlit
        },
    })
}

/// Minimum of the transverse-Ising dispersion over the band, `||K| − |C||`.
pub fn ti_gap(rc: &ReducedCouplings) -> Result<f64> {
    if rc.convention != Convention::TransverseIsing {
        return Err(Error::ConventionMismatch {
            expected: Convention::TransverseIsing.name(),
            got: rc.convention.name(),
        });
    }
    Ok((rc.k.abs() - rc.c.abs()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{free_spin_observables, ti_dispersion, xy_observables};

    #[test]
    fn complementarity_sum_examples() {
        let obs = ObservableTriple {
            f_density: 0.0,
            m: 0.0,
            s: 1.0,
        };
        assert_eq!(complementarity_sum(&obs), 1.0);
        assert!((complementarity_sum(&free_spin_observables(2.3)) - 1.0).abs() < 1e-12);
        let xy = xy_observables(&ReducedCouplings::xy(1.0, 1.0), &QuadratureSpec::default()).unwrap();
        let sum = complementarity_sum(&xy);
        assert!(sum > 0.0 && sum <= 1.0);
        assert!((sum - 0.524_132_208_423_751_7).abs() < 1e-10);
    }

    #[test]
    fn parabola_recovers_vertex() {
        let p = |x: f64| 2.0 - 3.0 * (x - 0.37) * (x - 0.37);
        let (v, y) = refine_parabola([0.2, 0.4, 0.7], [p(0.2), p(0.4), p(0.7)]);
        assert!((v - 0.37).abs() < 1e-12 && (y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn critical_field_at_low_temperature() {
        let grid = SweepGrid::new("B", 0.0, 6.0, 0.01).unwrap();
        let r = detect_critical_field(3.0, 0.05, &grid, &QuadratureSpec::default(), &DiffSpec::default()).unwrap();
        assert!((r.b_star - 3.0).abs() <= 0.05, "{r:?}");
        assert!(r.sharp);
        assert_eq!(r.grid_resolution, 0.01);
    }

    #[test]
    fn high_temperature_peak_is_broad() {
        let grid = SweepGrid::new("B", 0.0, 2.0, 0.02).unwrap();
        let r = detect_critical_field(1.0, 1.0, &grid, &QuadratureSpec::default(), &DiffSpec::default()).unwrap();
        assert!(!r.sharp, "{r:?}");
        let grid = SweepGrid::new("B", 0.0, 6.0, 0.05).unwrap();
        let r = detect_critical_field(3.0, 2.0, &grid, &QuadratureSpec::default(), &DiffSpec::default()).unwrap();
        assert!(!r.sharp, "{r:?}");
    }

    #[test]
    fn degenerate_and_invalid_scans() {
        let grid = SweepGrid::new("B", -1.0, 1.0, 0.1).unwrap();
        let q = QuadratureSpec::default();
        let d = DiffSpec::default();
        assert!(matches!(
            detect_critical_field(0.0, 1.0, &grid, &q, &d),
            Err(Error::DegenerateScan(_))
        ));
        assert!(detect_critical_field(1.0, 0.0, &grid, &q, &d).is_err());
        assert!(scan_fields(1.0, 1.0, &[0.0, 1.0, 2.0], &q, &d).is_err());
        assert!(scan_fields(1.0, 1.0, &[0.0, 1.0, 1.0, 2.0, 3.0], &q, &d).is_err());
    }

    #[test]
    fn interference_ratio_examples() {
        let d = ising_interference_ratio(&ReducedCouplings::ising(0.0, 0.4), 10).unwrap();
        assert_eq!(d.ratio, 0.0);
        assert_eq!(d.regime, Regime::SingleSlit);
        assert!(d.gap.is_infinite());
        let d = ising_interference_ratio(&ReducedCouplings::ising(1.0, 0.0), 10).unwrap();
        assert!((d.ratio - 1f64.tanh().powi(10)).abs() < 1e-14);
        assert!((d.ratio - 0.065_650_196_235_694_1).abs() < 1e-12);
        assert_eq!(d.regime, Regime::DoubleSlit);
        let rc = ReducedCouplings::ising(1.0, 0.0);
        let ratios: Vec<f64> = (1..200)
            .map(|n| ising_interference_ratio(&rc, n).unwrap().ratio)
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]));
        assert!(ising_interference_ratio(&rc, 0).is_err());
    }

    #[test]
    fn gap_examples() {
        let g = |k, c| ti_gap(&ReducedCouplings::transverse_ising(k, c)).unwrap();
        assert_eq!(g(1.3, 1.3), 0.0);
        assert_eq!(g(2.5, 0.0), 2.5);
        assert_eq!(g(2.0, 1.0), 1.0);
        assert!(ti_gap(&ReducedCouplings::xy(1.0, 1.0)).is_err());
    }

    #[test]
    fn gap_matches_dispersion_minimum() {
        for i in 0..100 {
            for j in 0..100 {
                let k = -2.0 + 0.04 * i as f64;
                let c = -2.0 + 0.04 * j as f64;
                let gap = ti_gap(&ReducedCouplings::transverse_ising(k, c)).unwrap();
                let brute = (0..=2000)
                    .map(|n| ti_dispersion(k, c, std::f64::consts::PI * n as f64 / 2000.0))
                    .fold(f64::INFINITY, f64::min);
                assert!((gap - brute).abs() < 1e-12, "K={k} C={c}");
                assert_eq!(gap.abs() < 1e-12, (k.abs() - c.abs()).abs() < 1e-12);
            }
        }
    }
}

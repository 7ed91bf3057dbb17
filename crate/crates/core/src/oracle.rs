//! Brute-force ground truth at small `N`.
//!
//! Quantum chains are diagonalized densely in the full `2^N` spin basis;
//! the classical Ising chain is summed over all `2^N` configurations.
//!
//! Basis convention: bit `i` of a basis index is site `i`, with bit value 0
//! meaning `σᶻ = +1`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::models::{Convention, ReducedCouplings};
use crate::numerics::{central_difference, second_central_difference, DiffSpec, Step};

/// Largest chain handled without an explicit override.
pub const DEFAULT_CAP: usize = 10;
/// Absolute upper limit (`2^12 = 4096` basis states).
pub const HARD_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainModel {
    /// `−(J/2) Σ (σˣσˣ + σʸσʸ) − μB Σ σᶻ`
    Xy,
    /// `−J Σ σᶻσᶻ − μB Σ σˣ`
    TransverseIsing,
    /// `−μB Σ σᶻ`
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    pub model: ChainModel,
    pub n: usize,
    pub j: f64,
    /// Product `μB`.
    pub mu_b: f64,
    pub boundary: Boundary,
    pub cap: usize,
}

impl ChainSpec {
    pub fn new(model: ChainModel, n: usize, j: f64, mu_b: f64) -> Self {
        ChainSpec {
            model,
            n,
            j,
            mu_b,
            boundary: Boundary::Periodic,
            cap: DEFAULT_CAP,
        }
    }

    pub fn open(mut self) -> Self {
        self.boundary = Boundary::Open;
        self
    }

    /// Raise the size cap, at most to [`HARD_CAP`].
    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap.min(HARD_CAP);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("chain needs at least one site".into()));
        }
        if self.n > self.cap.min(HARD_CAP) {
            return Err(Error::CapExceeded {
                n: self.n,
                cap: self.cap.min(HARD_CAP),
            });
        }
        Ok(())
    }

    /// Nearest-neighbour bonds. A periodic two-site ring has a single bond.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        let mut bonds: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && n > 2 {
            bonds.push((n - 1, 0));
        }
        bonds
    }
}

fn spin(state: usize, site: usize) -> f64 {
    if state >> site & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Matrix elements `⟨s'|H|s⟩` of one basis column, diagonal first.
///
/// With `rotated`, the transverse-Ising chain is written in the σˣ eigenbasis
/// (`−J Σ σˣσˣ − μB Σ σᶻ`), where the spin-flip parity is diagonal.
fn column(spec: &ChainSpec, bonds: &[(usize, usize)], state: usize, rotated: bool, out: &mut Vec<(usize, f64)>) {
    out.clear();
    let field = -spec.mu_b * (0..spec.n).map(|i| spin(state, i)).sum::<f64>();
    match (spec.model, rotated) {
        (ChainModel::Free, _) => out.push((state, field)),
        (ChainModel::Xy, _) => {
            out.push((state, field));
            for &(a, b) in bonds {
                // σˣσˣ + σʸσʸ = 2(σ⁺σ⁻ + σ⁻σ⁺): only antiparallel pairs hop
                if spin(state, a) != spin(state, b) {
                    out.push((state ^ (1 << a) ^ (1 << b), -spec.j));
                }
            }
        }
        (ChainModel::TransverseIsing, false) => {
            let ising = -spec.j * bonds.iter().map(|&(a, b)| spin(state, a) * spin(state, b)).sum::<f64>();
            out.push((state, ising));
            for i in 0..spec.n {
                out.push((state ^ (1 << i), -spec.mu_b));
            }
        }
        (ChainModel::TransverseIsing, true) => {
            out.push((state, field));
            for &(a, b) in bonds {
                out.push((state ^ (1 << a) ^ (1 << b), -spec.j));
            }
        }
    }
}

/// Dense Hamiltonian in the σᶻ product basis.
pub fn build_hamiltonian(spec: &ChainSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let dim = 1usize << spec.n;
    let bonds = spec.bonds();
    let mut h = DMatrix::zeros(dim, dim);
    let mut col = Vec::new();
    for state in 0..dim {
        column(spec, &bonds, state, false, &mut col);
        for &(row, v) in &col {
            h[(row, state)] += v;
        }
    }
    Ok(h)
}

/// `max |H − Hᵀ|`
pub fn symmetry_residual(h: &DMatrix<f64>) -> f64 {
    (h - h.transpose()).amax()
}

/// Label of the conserved sector a basis state belongs to.
fn sector(model: ChainModel, state: usize) -> usize {
    match model {
        // total σᶻ
        ChainModel::Xy | ChainModel::Free => state.count_ones() as usize,
        // spin-flip parity, diagonal in the rotated basis
        ChainModel::TransverseIsing => (state.count_ones() & 1) as usize,
    }
}

/// Full spectrum, ascending, from block-diagonalizing conserved sectors.
pub fn spectrum(spec: &ChainSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.n;
    let dim = 1usize << n;
    let bonds = spec.bonds();
    let sectors = if spec.model == ChainModel::TransverseIsing {
        2
    } else {
        n + 1
    };
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); sectors];
    for state in 0..dim {
        members[sector(spec.model, state)].push(state);
    }
    let mut index = vec![0usize; dim];
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut col = Vec::new();
    for states in members.iter().filter(|m| !m.is_empty()) {
        for (i, &s) in states.iter().enumerate() {
            index[s] = i;
        }
        let mut block = DMatrix::<f64>::zeros(states.len(), states.len());
        for (i, &s) in states.iter().enumerate() {
            column(spec, &bonds, s, true, &mut col);
            for &(row, v) in &col {
                block[(index[row], i)] += v;
            }
        }
        eigenvalues.extend(block.symmetric_eigenvalues().iter().copied());
    }
    eigenvalues.sort_by(f64::total_cmp);
    Ok(eigenvalues)
}

/// `ln Σ e^{−E/kT}` with the largest exponent factored out.
pub fn log_partition(eigenvalues: &[f64], kt: f64) -> f64 {
    let e0 = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: f64 = eigenvalues.iter().map(|&e| (-(e - e0) / kt).exp()).sum();
    -e0 / kt + sum.ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub log_z: f64,
    pub z: f64,
    /// `ln Z / N`
    pub f_density: f64,
    pub m: f64,
    pub s: f64,
}

/// Derivative step used by [`ed_observables`]: `δB = 1e−4 (1 + |B|)`.
pub fn ed_default_diff() -> DiffSpec {
    DiffSpec::central(Step::Relative(1e-4))
}

/// Finite-`N` thermodynamics from the exact spectrum.
///
/// `m` and `s` are the first and second derivatives of `f_density` in the
/// reduced field `C = μB/kT`; the step in `diff` is applied to `μB`.
pub fn ed_observables(spec: &ChainSpec, kt: f64, diff: &DiffSpec) -> Result<SpectrumResult> {
    if !(kt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got kT={kt}"
        )));
    }
    let eigenvalues = spectrum(spec)?;
    let log_z = log_partition(&eigenvalues, kt);
    let n = spec.n as f64;
    let density = |mu_b: f64| {
        spectrum(&ChainSpec { mu_b, ..*spec })
            .map(|e| log_partition(&e, kt) / n)
            .unwrap_or(f64::NAN)
    };
    let m = kt * central_difference(density, spec.mu_b, diff)?;
    let s = kt * kt * second_central_difference(density, spec.mu_b, diff)?;
    Ok(SpectrumResult {
        eigenvalues,
        log_z,
        z: log_z.exp(),
        f_density: log_z / n,
        m,
        s,
    })
}

/// Largest chain accepted by [`enumerate_classical_z`].
pub const ENUMERATION_CAP: usize = 20;

/// `Σ_{σ ∈ {±1}^N} exp(K Σ σᵢσᵢ₊₁ + C Σ σᵢ)` on a ring of `N` bonds.
///
/// Every site keeps its bond to the next one (site `N` wraps to site 1), so
/// the sum equals `tr Tᴺ` for all `N ≥ 1`.
pub fn enumerate_classical_z(n: usize, rc: &ReducedCouplings) -> Result<f64> {
    if rc.convention != Convention::Ising {
        return Err(Error::ConventionMismatch {
            expected: Convention::Ising.name(),
            got: rc.convention.name(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("chain needs at least one site".into()));
    }
    if n > ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    let z = (0..1usize << n)
        .map(|cfg| {
            let mut exponent = 0.0;
            for i in 0..n {
                let a = spin(cfg, i);
                exponent += rc.k * a * spin(cfg, (i + 1) % n) + rc.c * a;
            }
            exponent.exp()
        })
        .sum();
    Ok(z)
}

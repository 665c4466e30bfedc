//! Diagonal-blockwise-constant (DBC) matrices and the closed-form solutions
//! for the expected graph of a balanced two-block SBM.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::check_expected_params;
use crate::linalg::relative_frobenius;
use crate::nuclear::{solve_nuc, NucConfig};

/// `Z_{2m}(c1, c2, c3)`: `c3` on the diagonal, `c1` elsewhere inside the two
/// `m×m` diagonal blocks, `c2` on the off-diagonal blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbcMatrix {
    pub m: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl DbcMatrix {
    pub fn new(m: usize, c1: f64, c2: f64, c3: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid(format!("DBC half-size must be at least 2, got {m}")));
        }
        Ok(DbcMatrix { m, c1, c2, c3 })
    }

    pub fn n(&self) -> usize {
        2 * self.m
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.m;
        DMatrix::from_fn(2 * m, 2 * m, |i, j| {
            if i == j {
                self.c3
            } else if (i < m) == (j < m) {
                self.c1
            } else {
                self.c2
            }
        })
    }

    /// `(λ1, λ2, λ3)` for eigenvectors `y₁ = 1`, `y₂ = (1ₘ, −1ₘ)` and the
    /// `(2m−2)`-dimensional complement.
    pub fn eigen(&self) -> (f64, f64, f64) {
        let m = self.m as f64;
        let l3 = self.c3 - self.c1;
        (m * (self.c1 + self.c2) + l3, m * (self.c1 - self.c2) + l3, l3)
    }

    pub fn from_eigen(l1: f64, l2: f64, l3: f64, m: usize) -> Result<Self> {
        let mf = m as f64;
        let two_m = 2.0 * mf;
        DbcMatrix::new(
            m,
            (l1 + l2 - 2.0 * l3) / two_m,
            (l1 - l2) / two_m,
            (l1 + l2 + (two_m - 2.0) * l3) / two_m,
        )
    }

    pub fn nuclear_norm(&self) -> f64 {
        let (l1, l2, l3) = self.eigen();
        l1.abs() + l2.abs() + (2 * self.m - 2) as f64 * l3.abs()
    }

    /// Read `(c1, c2, c3)` off a dense matrix, or `None` if it is not DBC to
    /// within `tol` in every region.
    pub fn from_dense(x: &DMatrix<f64>, tol: f64) -> Option<Self> {
        let n = x.nrows();
        if n != x.ncols() || n % 2 != 0 || n < 4 {
            return None;
        }
        let m = n / 2;
        let z = DbcMatrix { m, c1: x[(0, 1)], c2: x[(0, m)], c3: x[(0, 0)] };
        let dev = (x - z.to_dense()).amax();
        (dev <= tol).then_some(z)
    }
}

/// `Σ_{v=1}^{w} λᵛ`.
pub fn geometric_sum(lambda: f64, w: usize) -> f64 {
    if (1.0 - lambda).abs() < 1e-12 {
        let mut total = 0.0;
        let mut p = 1.0;
        for _ in 0..w {
            p *= lambda;
            total += p;
        }
        return total;
    }
    lambda * (1.0 - lambda.powi(w as i32)) / (1.0 - lambda)
}

/// Ergodic-limit coefficients of the expected graph in DBC form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCoefficients {
    pub m: usize,
    /// Within-block, off-diagonal entry of `N̄⁺`.
    pub alpha1: f64,
    /// Cross-block entry of `N̄⁺`.
    pub alpha2: f64,
    /// Diagonal entry of `N̄⁺`.
    pub alpha3: f64,
    /// Every entry of `N̄⁻`.
    pub beta: f64,
    pub lambda2_w: f64,
    pub lambda3_w: f64,
}

impl ExpectedCoefficients {
    pub fn n(&self) -> usize {
        2 * self.m
    }

    pub fn alpha13(&self) -> f64 {
        let m = self.m as f64;
        ((m - 1.0) * self.alpha1 + self.alpha3) / m
    }

    pub fn nu1(&self) -> f64 {
        ((self.alpha13() + self.beta) / (self.alpha2 + self.beta)).ln()
    }

    pub fn positive(&self) -> DbcMatrix {
        DbcMatrix { m: self.m, c1: self.alpha1, c2: self.alpha2, c3: self.alpha3 }
    }

    pub fn negative(&self) -> DbcMatrix {
        DbcMatrix { m: self.m, c1: self.beta, c2: self.beta, c3: self.beta }
    }
}

pub fn expected_coefficients(m: usize, a: f64, b: f64, w: usize, k: usize) -> Result<ExpectedCoefficients> {
    check_expected_params(m, a, b)?;
    if w == 0 || k == 0 {
        return Err(Error::AssumptionViolation("window and negative rate must both be at least 1".into()));
    }
    let mf = m as f64;
    let degree = (mf - 1.0) * a + mf * b;
    let lambda2 = ((mf - 1.0) * a - mf * b) / degree;
    let lambda3 = -a / degree;
    let s2 = geometric_sum(lambda2, w);
    let s3 = geometric_sum(lambda3, w);
    let wf = w as f64;
    let norm = 4.0 * mf * mf;
    Ok(ExpectedCoefficients {
        m,
        alpha1: (wf + s2 - 2.0 * s3) / norm,
        alpha2: (wf - s2) / norm,
        alpha3: (wf + s2 + (2.0 * mf - 2.0) * s3) / norm,
        beta: k as f64 * wf / norm,
        lambda2_w: lambda2,
        lambda3_w: lambda3,
    })
}

/// Unconstrained Gram optimum `Z(ln(α1/β), ln(α2/β), ln(α3/β))`.
pub fn expected_pmi_solution(c: &ExpectedCoefficients) -> DbcMatrix {
    DbcMatrix {
        m: c.m,
        c1: (c.alpha1 / c.beta).ln(),
        c2: (c.alpha2 / c.beta).ln(),
        c3: (c.alpha3 / c.beta).ln(),
    }
}

/// PSD-constrained optimum `Z(ν1, −ν1, ν1)` and `ν1`.
pub fn expected_psd_solution(c: &ExpectedCoefficients) -> (f64, DbcMatrix) {
    let nu1 = c.nu1();
    (nu1, DbcMatrix { m: c.m, c1: nu1, c2: -nu1, c3: nu1 })
}

/// Outcome of solving the trace-bounded problem at `ν = ν0·n` and comparing it
/// with `Z(ν0, −ν0, ν0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub nu0: f64,
    pub nu1: f64,
    pub relative_deviation: f64,
    pub solution_trace: f64,
    pub fw_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn check_conjecture_scaling(c: &ExpectedCoefficients, nu0: f64, solver: &NucConfig) -> Result<ConjectureReport> {
    let nu1 = c.nu1();
    if !(nu0 > 0.0) {
        return Err(Error::invalid("nu0 must be positive"));
    }
    let n = c.n() as f64;
    let cfg = NucConfig { nu: nu0 * n, ..solver.clone() };
    let sol = solve_nuc(&c.positive().to_dense(), &c.negative().to_dense(), &cfg)?;
    let target = DbcMatrix { m: c.m, c1: nu0, c2: -nu0, c3: nu0 }.to_dense();
    Ok(ConjectureReport {
        nu0,
        nu1,
        relative_deviation: relative_frobenius(&sol.gram, &target),
        solution_trace: sol.gram.trace(),
        fw_gap: sol.gap(),
        iterations: sol.trace.len(),
        converged: sol.converged,
    })
}

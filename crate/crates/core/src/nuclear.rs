//! Frank–Wolfe minimization of the Gram objective over the trace-bounded PSD
//! cone `{X ⪰ 0, tr X ≤ ν}`.
//!
//! Atoms are `ν·vvᵀ` and `0`; their convex hull is exactly the feasible set.
//! The iterate is also kept in factored form `X = V C Vᵀ` with orthonormal
//! `V`, which allows optional projected-gradient refinement of `C` on the
//! face spanned by the atoms collected so far.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ergodic::{pmi_from_coefficients, PMI_FLOOR};
use crate::error::{Error, Result};
use crate::linalg::{ensure_symmetric, frobenius_inner, sym_eigen_desc};
use crate::objective::{gradient_unchecked, objective_unchecked, sigmoid_neg};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NucInit {
    #[default]
    Zero,
    /// Clipped PMI solution projected onto the PSD cone, then scaled down to
    /// trace `ν` if needed.
    ScaledPmi,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Exact minimization along the Frank–Wolfe direction.
    #[default]
    LineSearch,
    /// The classic `γ_t = 2/(t+2)` schedule.
    Hazan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NucConfig {
    pub nu: f64,
    pub max_iter: usize,
    /// Absolute gap threshold; `None` means `1e-7` times the initial objective.
    pub gap_tol: Option<f64>,
    pub eig_tol: f64,
    pub init: NucInit,
    pub step: StepRule,
    /// Projected-gradient passes over the current face after every
    /// Frank–Wolfe step. Zero gives the plain method.
    pub face_steps: usize,
    pub seed: u64,
}

impl Default for NucConfig {
    fn default() -> Self {
        NucConfig {
            nu: 1.0,
            max_iter: 1000,
            gap_tol: None,
            eig_tol: 1e-9,
            init: NucInit::Zero,
            step: StepRule::LineSearch,
            face_steps: 50,
            seed: 0,
        }
    }
}

pub const DEFAULT_GAP_FACTOR: f64 = 1e-7;
pub const MAX_MATVECS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NucRecord {
    pub iter: usize,
    pub objective: f64,
    pub fw_gap: f64,
    pub trace_norm: f64,
    /// Smallest eigenvalue of the iterate, read off its factored form.
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct NucSolution {
    pub gram: DMatrix<f64>,
    pub trace: Vec<NucRecord>,
    pub converged: bool,
    pub gap_tol: f64,
}

impl NucSolution {
    pub fn objective(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.objective)
    }

    pub fn gap(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.fw_gap)
    }
}

/// Largest algebraic eigenvalue of a symmetric matrix and a unit eigenvector,
/// by restarted Lanczos with full reorthogonalization. Converged once the
/// residual `‖Mx − θx‖` falls below `tol·‖M‖_F`.
pub fn top_eigenpair(m: &DMatrix<f64>, start: &DVector<f64>, tol: f64, max_matvecs: usize) -> Result<(f64, DVector<f64>)> {
    let n = m.nrows();
    let scale = m.norm();
    let start_norm = start.norm();
    if !(start_norm > 0.0) {
        return Err(Error::invalid("start vector must be nonzero"));
    }
    let mut v = start / start_norm;
    if scale == 0.0 {
        return Ok((0.0, v));
    }
    let krylov = n.min(40);
    let mut matvecs = 0;
    let mut prev_theta = f64::NEG_INFINITY;
    loop {
        let mut basis: Vec<DVector<f64>> = vec![v.clone()];
        let mut alphas = Vec::with_capacity(krylov);
        let mut betas = Vec::with_capacity(krylov);
        let mut exhausted = false;
        for k in 0..krylov {
            let mut w = m * &basis[k];
            matvecs += 1;
            let a = basis[k].dot(&w);
            alphas.push(a);
            // two passes of Gram–Schmidt against the whole basis
            for _ in 0..2 {
                for q in &basis {
                    let c = q.dot(&w);
                    w.axpy(-c, q, 1.0);
                }
            }
            let b = w.norm();
            if b <= 1e-13 * scale {
                exhausted = true;
                break;
            }
            if k + 1 == krylov {
                break;
            }
            betas.push(b);
            basis.push(w / b);
        }
        let p = alphas.len();
        let t = DMatrix::from_fn(p, p, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let top = eig.eigenvalues.imax();
        let theta = eig.eigenvalues[top];
        let y = eig.eigenvectors.column(top);
        let mut x = DVector::zeros(n);
        for (k, q) in basis.iter().take(p).enumerate() {
            x.axpy(y[k], q, 1.0);
        }
        x /= x.norm();
        let residual = (m * &x - &x * theta).norm();
        matvecs += 1;
        if exhausted || residual <= tol * scale || n <= krylov && residual <= 1e-12 * scale {
            return Ok((theta, x));
        }
        // restarting from the Ritz vector never lowers theta; once it stops
        // rising the residual is mixing within a nearly degenerate top cluster
        if theta - prev_theta <= 1e-3 * tol * scale && residual <= tol.sqrt() * scale {
            return Ok((theta, x));
        }
        prev_theta = theta;
        if matvecs >= max_matvecs {
            if residual <= tol.sqrt() * scale {
                return Ok((theta, x));
            }
            return Err(Error::Numerical(format!(
                "eigenvector iteration did not converge after {matvecs} matrix-vector products (residual {residual:e})"
            )));
        }
        v = x;
    }
}

fn start_vector(n: usize, previous: Option<&DVector<f64>>, rng: &mut ChaCha8Rng) -> DVector<f64> {
    // a small random component keeps the Krylov space from being trapped in
    // an invariant subspace of the unperturbed start (all-ones is exactly
    // orthogonal to the community split of a balanced block model)
    let base = match previous {
        Some(v) => v.clone(),
        None => DVector::from_element(n, 1.0 / (n as f64).sqrt()),
    };
    let noise = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)) * (1e-2 / (n as f64).sqrt());
    base + noise
}

fn atom_from_gradient(g: &DMatrix<f64>, start: &DVector<f64>, tol: f64) -> Result<(f64, DVector<f64>)> {
    let neg = -g;
    top_eigenpair(&neg, start, tol, MAX_MATVECS)
}

/// Minimizer of `⟨G, S⟩` over `{S ⪰ 0, tr S ≤ ν}`: `ν·vvᵀ` for the top
/// eigenvector `v` of `−G` when its eigenvalue is positive, else zero.
pub fn frank_wolfe_atom(g: &DMatrix<f64>, nu: f64) -> Result<DMatrix<f64>> {
    ensure_symmetric(g, 1e-9 * g.amax().max(1.0))?;
    if nu < 0.0 {
        return Err(Error::invalid("nu must be nonnegative"));
    }
    let n = g.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (theta, v) = atom_from_gradient(g, &start_vector(n, None, &mut rng), 1e-9)?;
    if theta > 0.0 {
        Ok(&v * v.transpose() * nu)
    } else {
        Ok(DMatrix::zeros(n, n))
    }
}

/// Euclidean projection of `values` onto `{λ ≥ 0, Σλ ≤ ν}`.
fn project_capped_simplex(values: &[f64], nu: f64) -> Vec<f64> {
    let clipped: Vec<f64> = values.iter().map(|&l| l.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= nu {
        return clipped;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - nu) / (k + 1) as f64;
        if s - candidate > 0.0 {
            shift = candidate;
        }
    }
    values.iter().map(|&l| (l - shift).max(0.0)).collect()
}

/// `φ'(γ)` for `φ(γ) = f(X + γD)`.
fn directional_derivative(pos: &DMatrix<f64>, neg: &DMatrix<f64>, x: &DMatrix<f64>, d: &DMatrix<f64>, gamma: f64) -> (f64, f64) {
    let mut first = 0.0;
    let mut second = 0.0;
    for k in 0..x.len() {
        let dk = d[k];
        if dk == 0.0 {
            continue;
        }
        let t = x[k] + gamma * dk;
        let s_neg = sigmoid_neg(t);
        let s_pos = 1.0 - s_neg;
        first += dk * (-pos[k] * s_neg + neg[k] * s_pos);
        second += dk * dk * (pos[k] + neg[k]) * s_neg * s_pos;
    }
    (first, second)
}

/// Exact step on `[0, 1]` by bisection on `φ'`.
fn bisection_step(pos: &DMatrix<f64>, neg: &DMatrix<f64>, x: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    if directional_derivative(pos, neg, x, d, 0.0).0 >= 0.0 {
        return 0.0;
    }
    if directional_derivative(pos, neg, x, d, 1.0).0 <= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if directional_derivative(pos, neg, x, d, mid).0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact step on `[0, 1]` by safeguarded Newton on `φ'`.
fn newton_step(pos: &DMatrix<f64>, neg: &DMatrix<f64>, x: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let (d0, _) = directional_derivative(pos, neg, x, d, 0.0);
    if d0 >= 0.0 {
        return 0.0;
    }
    let (d1, _) = directional_derivative(pos, neg, x, d, 1.0);
    if d1 <= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut gamma = 0.5;
    for _ in 0..60 {
        let (g1, g2) = directional_derivative(pos, neg, x, d, gamma);
        if g1 < 0.0 {
            lo = gamma;
        } else {
            hi = gamma;
        }
        if hi - lo < 1e-14 || g1 == 0.0 {
            break;
        }
        let newton = gamma - g1 / g2;
        let next = if g2 > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - gamma).abs() < 1e-15 {
            break;
        }
        gamma = next;
    }
    gamma
}

/// `X = V C Vᵀ` with orthonormal columns in `V`.
struct Factored {
    v: DMatrix<f64>,
    c: DMatrix<f64>,
}

impl Factored {
    fn zero(n: usize) -> Self {
        Factored { v: DMatrix::zeros(n, 0), c: DMatrix::zeros(0, 0) }
    }

    fn dense(&self) -> DMatrix<f64> {
        let vc = &self.v * &self.c;
        vc * self.v.transpose()
    }

    fn trace(&self) -> f64 {
        self.c.trace()
    }

    fn min_eigenvalue(&self) -> f64 {
        if self.c.ncols() == 0 {
            return 0.0;
        }
        let (values, _) = sym_eigen_desc(&self.c);
        let inner = values.last().copied().unwrap_or(0.0);
        if self.v.ncols() < self.v.nrows() { inner.min(0.0) } else { inner }
    }

    /// `X ← (1−γ)X + γ·ν·aaᵀ` for a unit vector `a` (or `ν = 0`).
    fn fw_update(&mut self, gamma: f64, nu: f64, a: &DVector<f64>) {
        self.c *= 1.0 - gamma;
        if nu == 0.0 || gamma == 0.0 {
            return;
        }
        let mut coords = self.v.transpose() * a;
        let mut resid = a - &self.v * &coords;
        // reorthogonalize once more for accuracy
        let again = self.v.transpose() * &resid;
        resid -= &self.v * &again;
        coords += again;
        let r = resid.norm();
        if r > 1e-10 {
            let k = self.v.ncols();
            self.v = self.v.clone().insert_column(k, 0.0);
            self.v.set_column(k, &(resid / r));
            self.c = self.c.clone().insert_row(k, 0.0).insert_column(k, 0.0);
            coords = coords.insert_row(k, r);
        }
        self.c.ger(gamma * nu, &coords, &coords, 1.0);
    }

    /// Rotate onto the eigenbasis of `C` and drop negligible directions, except
    /// up to `spare` null directions along which `−G` is largest. `gc` is
    /// `VᵀGV` at the current iterate. Dropping every null direction makes the
    /// face forget rotations it has already seen, and Frank–Wolfe then has to
    /// rediscover them one atom at a time.
    fn prune(&mut self, gc: &DMatrix<f64>, spare: usize) {
        if self.c.ncols() == 0 {
            return;
        }
        let (values, vectors) = sym_eigen_desc(&self.c);
        let top = values.first().copied().unwrap_or(0.0).max(0.0);
        let support = values.iter().take_while(|&&l| l > 1e-12 * top.max(1e-300)).count();
        let mut basis = vectors.columns(0, support).into_owned();
        let mut weights: Vec<f64> = values[..support].to_vec();
        let null = vectors.columns(support, values.len() - support).into_owned();
        if spare > 0 && null.ncols() > 0 {
            let (curv, dirs) = sym_eigen_desc(&(null.transpose() * gc * &null));
            // descending, so the most negative curvature comes last
            let keep: Vec<usize> = (0..curv.len()).rev().filter(|&j| curv[j] < 0.0).take(spare).collect();
            for j in keep {
                let k = basis.ncols();
                basis = basis.insert_column(k, 0.0);
                basis.set_column(k, &(&null * dirs.column(j)));
                weights.push(0.0);
            }
        }
        self.v = &self.v * basis;
        self.c = DMatrix::from_diagonal(&DVector::from_vec(weights));
    }
}

/// Null directions kept in the face after each refinement.
const SPARE_DIRECTIONS: usize = 8;

/// Curvature bound of `f` in the Frobenius norm: `σ'' ≤ ¼`.
fn lipschitz(pos: &DMatrix<f64>, neg: &DMatrix<f64>) -> f64 {
    0.25 * pos.zip_map(neg, |a, b| a + b).amax()
}

/// Projected-gradient passes over `{C ⪰ 0, tr C ≤ ν}` with exact steps along
/// the projected direction.
fn refine_face(pos: &DMatrix<f64>, neg: &DMatrix<f64>, state: &mut Factored, nu: f64, steps: usize, lip: f64) -> Result<DMatrix<f64>> {
    let mut x = state.dense();
    if state.c.ncols() == 0 || lip == 0.0 {
        return Ok(x);
    }
    let mut f = objective_unchecked(pos, neg, &x);
    let mut eta = 1.0 / lip;
    for _ in 0..steps {
        let g = gradient_unchecked(pos, neg, &x);
        let gc = state.v.transpose() * &g * &state.v;
        let trial = &state.c - &gc * eta;
        let (values, vectors) = sym_eigen_desc(&trial);
        let projected = project_capped_simplex(&values, nu);
        let target = crate::linalg::reconstruct(&projected, &vectors);
        let dc = &target - &state.c;
        if dc.norm() <= 1e-15 * state.c.norm().max(1e-300) {
            break;
        }
        let dx = &state.v * &dc * state.v.transpose();
        let gamma = newton_step(pos, neg, &x, &dx);
        if gamma == 0.0 {
            break;
        }
        let cand_x = &x + &dx * gamma;
        let cand_f = objective_unchecked(pos, neg, &cand_x);
        if !(cand_f <= f) {
            break;
        }
        state.c += dc * gamma;
        x = cand_x;
        let decrease = f - cand_f;
        f = cand_f;
        // a full step means the curvature bound was conservative here
        eta = if gamma >= 1.0 { eta * 2.0 } else { (eta * 0.5).max(1.0 / lip) };
        if decrease <= 1e-15 * f.abs() {
            break;
        }
    }
    let g = gradient_unchecked(pos, neg, &x);
    state.prune(&(state.v.transpose() * g * &state.v), SPARE_DIRECTIONS);
    Ok(state.dense())
}

fn scaled_pmi_init(pos: &DMatrix<f64>, neg: &DMatrix<f64>, nu: f64) -> Result<Factored> {
    let pmi = pmi_from_coefficients(pos, neg)?;
    let clipped = pmi.clipped(PMI_FLOOR);
    let sym = (&clipped + clipped.transpose()) * 0.5;
    let (values, vectors) = sym_eigen_desc(&sym);
    let keep: Vec<usize> = (0..values.len()).filter(|&k| values[k] > 0.0).collect();
    let total: f64 = keep.iter().map(|&k| values[k]).sum();
    let scale = if total > nu { nu / total } else { 1.0 };
    let n = pos.nrows();
    let v = DMatrix::from_fn(n, keep.len(), |i, j| vectors[(i, keep[j])]);
    let c = DMatrix::from_diagonal(&DVector::from_iterator(keep.len(), keep.iter().map(|&k| values[k] * scale)));
    Ok(Factored { v, c })
}

/// Minimize `f(N⁺, N⁻, X)` over `{X ⪰ 0, tr X ≤ ν}`.
pub fn solve_nuc(pos: &DMatrix<f64>, neg: &DMatrix<f64>, cfg: &NucConfig) -> Result<NucSolution> {
    let n = pos.nrows();
    if pos.ncols() != n {
        return Err(Error::shape((n, n), pos.shape()));
    }
    if neg.shape() != pos.shape() {
        return Err(Error::shape(pos.shape(), neg.shape()));
    }
    if !(cfg.nu >= 0.0) || !cfg.nu.is_finite() {
        return Err(Error::invalid(format!("nu must be finite and nonnegative, got {}", cfg.nu)));
    }
    if cfg.max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    if pos.iter().chain(neg.iter()).any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::invalid("coefficient matrices must be finite and nonnegative"));
    }
    // f only sees the symmetric part of the coefficients through a symmetric X,
    // and a symmetric gradient keeps the eigen-oracle well defined
    let pos = &((pos + pos.transpose()) * 0.5);
    let neg = &((neg + neg.transpose()) * 0.5);

    let mut state = match cfg.init {
        NucInit::Zero => Factored::zero(n),
        NucInit::ScaledPmi => scaled_pmi_init(pos, neg, cfg.nu)?,
    };
    let mut x = state.dense();
    let mut f = objective_unchecked(pos, neg, &x);
    let gap_tol = cfg.gap_tol.unwrap_or(DEFAULT_GAP_FACTOR * f.abs());
    let lip = lipschitz(pos, neg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut previous: Option<DVector<f64>> = None;
    let mut trace = Vec::new();
    let mut converged = false;

    for iter in 0..cfg.max_iter {
        let g = gradient_unchecked(pos, neg, &x);
        let start = start_vector(n, previous.as_ref(), &mut rng);
        let (theta, v) = atom_from_gradient(&g, &start, cfg.eig_tol)?;
        let use_atom = theta > 0.0 && cfg.nu > 0.0;
        // ⟨G, S⟩ = −ν θ for the rank-one atom
        let gap = frobenius_inner(&g, &x) + if use_atom { cfg.nu * theta } else { 0.0 };
        trace.push(NucRecord { iter, objective: f, fw_gap: gap, trace_norm: state.trace(), min_eigenvalue: state.min_eigenvalue() });
        previous = Some(v.clone());
        if !f.is_finite() {
            return Err(Error::Numerical("objective became non-finite".into()));
        }
        if gap <= gap_tol {
            converged = true;
            break;
        }
        if iter + 1 == cfg.max_iter {
            break;
        }

        let atom_nu = if use_atom { cfg.nu } else { 0.0 };
        let mut direction = -&x;
        if use_atom {
            direction.ger(atom_nu, &v, &v, 1.0);
        }
        let gamma = match cfg.step {
            StepRule::LineSearch => bisection_step(pos, neg, &x, &direction),
            StepRule::Hazan => 2.0 / (iter as f64 + 2.0),
        };
        state.fw_update(gamma, atom_nu, &v);
        x = if cfg.face_steps > 0 {
            refine_face(pos, neg, &mut state, cfg.nu, cfg.face_steps, lip)?
        } else {
            state.dense()
        };
        f = objective_unchecked(pos, neg, &x);
    }
    Ok(NucSolution { gram: x, trace, converged, gap_tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn atom_examples() {
        let s = frank_wolfe_atom(&(-DMatrix::identity(3, 3)), 2.0).unwrap();
        assert_abs_diff_eq!(s.trace(), 2.0, epsilon = 1e-12);
        let (values, _) = sym_eigen_desc(&s);
        assert_abs_diff_eq!(values[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(values[1], 0.0, epsilon = 1e-12);
        assert_eq!(frank_wolfe_atom(&DMatrix::identity(3, 3), 2.0).unwrap(), DMatrix::zeros(3, 3));
        let g = DMatrix::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, 1.0]);
        let s = frank_wolfe_atom(&g, 1.5).unwrap();
        assert!((s - DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, 0.0])).amax() < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [3, 10, 60] {
            let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let m = &a + a.transpose();
            let (values, _) = sym_eigen_desc(&m);
            let start = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let (theta, x) = top_eigenpair(&m, &start, 1e-10, MAX_MATVECS).unwrap();
            assert_abs_diff_eq!(theta, values[0], epsilon = 1e-8 * m.norm());
            assert!((&m * &x - &x * theta).norm() <= 1e-9 * m.norm());
        }
    }

    #[test]
    fn capped_simplex_projection() {
        assert_eq!(project_capped_simplex(&[0.2, -1.0], 1.0), vec![0.2, 0.0]);
        let p = project_capped_simplex(&[3.0, 1.0, -1.0], 1.0);
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-15);
        assert_eq!(p[1], 0.0);
        let p = project_capped_simplex(&[1.0, 1.0, 1.0], 1.5);
        assert!(p.iter().all(|&x| (x - 0.5).abs() < 1e-15));
    }

    #[test]
    fn zero_budget_gives_zero_matrix() {
        let pos = DMatrix::from_element(3, 3, 0.4);
        let neg = DMatrix::from_element(3, 3, 0.2);
        let cfg = NucConfig { nu: 0.0, ..Default::default() };
        let sol = solve_nuc(&pos, &neg, &cfg).unwrap();
        assert_eq!(sol.gram, DMatrix::zeros(3, 3));
        assert_abs_diff_eq!(sol.objective(), 2f64.ln() * 0.6 * 9.0, epsilon = 1e-12);
        assert!(solve_nuc(&pos, &neg, &NucConfig { nu: -1.0, ..Default::default() }).is_err());
    }

    #[test]
    fn plain_and_refined_runs_stay_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 6;
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.1..1.0));
        let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.1..1.0));
        let pos = &a + a.transpose();
        let neg = &b + b.transpose();
        for (face_steps, step) in [(0, StepRule::LineSearch), (50, StepRule::LineSearch), (0, StepRule::Hazan)] {
            let cfg = NucConfig { nu: 2.0, max_iter: 200, face_steps, step, ..Default::default() };
            let sol = solve_nuc(&pos, &neg, &cfg).unwrap();
            let (values, _) = sym_eigen_desc(&sol.gram);
            assert!(*values.last().unwrap() >= -1e-9 * values[0].abs());
            assert!(sol.gram.trace() <= 2.0 * (1.0 + 1e-9));
            if step == StepRule::LineSearch {
                for w in sol.trace.windows(2) {
                    assert!(w[1].objective <= w[0].objective + 1e-12 * w[0].objective.abs());
                }
            }
        }
    }

    #[test]
    fn scaled_pmi_init_is_feasible() {
        let pos = DMatrix::from_row_slice(2, 2, &[0.1, 0.9, 0.9, 0.1]);
        let neg = DMatrix::from_element(2, 2, 0.2);
        let cfg = NucConfig { nu: 0.5, init: NucInit::ScaledPmi, max_iter: 1, ..Default::default() };
        let sol = solve_nuc(&pos, &neg, &cfg).unwrap();
        assert!(sol.trace[0].trace_norm <= 0.5 + 1e-12);
    }
}

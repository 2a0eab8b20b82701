//! Eigenvalue analysis of the assembled stability form.
//!
//! The generalized pencil (K − P − B_q) φ = λ M φ is solved twice: over all
//! vertex functions, and restricted to the admissible hyperplane
//! {φ : ∮ φ ds = 0}.  Small problems are reduced densely (Cholesky plus a
//! symmetric eigensolve, with a Householder reflector absorbing the
//! constraint); larger ones go through shift-invert Lanczos at a shift that
//! an LDLᵀ inertia ladder certifies to lie below the lowest eigenvalue.
//!
//! Counts of negative and near-zero eigenvalues are never read off the Ritz
//! window alone: they are certified globally by matrix inertia (Sylvester's
//! law), with the constrained counts obtained from a bordered factorization.

use serde::Serialize;

use crate::discretize::StabilityAssembly;
use crate::error::{Error, Result};
use crate::sparse::{
    eigenvalues_below, lowest_eigenpairs_with_factor, paired_eigenvalues_below, rcm_order, Csr,
    EigenPairs, LanczosOptions, LdlFactor,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityVerdict {
    /// No admissible negative directions and none numerically ambiguous.
    Stable,
    /// At least one admissible direction with certified negative energy.
    Unstable,
    /// No negative directions, but eigenvalues inside the zero band prevent
    /// a sign decision at this resolution.
    Indeterminate,
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions {
    /// Minimum number of eigenpairs to resolve at the bottom of the spectrum.
    pub window: usize,
    /// Problems up to this many unknowns use the dense path.
    pub dense_threshold: usize,
    /// Seed for the Lanczos start vector.
    pub seed: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { window: 12, dense_threshold: 1200, seed: 0x5eed }
    }
}

/// Counts and low-end values for one variant of the eigenproblem.
#[derive(Debug, Clone, Serialize)]
pub struct ModeCounts {
    /// Lowest computed eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Certified number of eigenvalues below −ε (matrix inertia).
    pub negative: usize,
    /// Certified number of eigenvalues in [−ε, ε].
    pub zero_band: usize,
    /// True when the Ritz window reproduces the certified counts.
    pub window_agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub unknowns: usize,
    pub method: String,
    /// Half-width of the numerical zero band.
    pub eps_zero: f64,
    pub unconstrained: ModeCounts,
    pub constrained: ModeCounts,
    /// `constrained.negative`: the Morse index over admissible variations.
    pub morse_index: usize,
    /// [max(k₋ − 1, 0), k₋] from the unconstrained negative count; a rank-one
    /// constraint removes at most one negative direction.
    pub index_bracket: [usize; 2],
    pub bracket_satisfied: bool,
    pub max_relative_residual: f64,
    pub verdict: StabilityVerdict,
}

/// Report plus the eigenvectors behind it (M-orthonormal, ascending).
#[derive(Debug, Clone)]
pub struct SpectrumSolution {
    pub report: SpectrumReport,
    pub unconstrained: EigenPairs,
    pub constrained: EigenPairs,
}

impl SpectrumSolution {
    /// An admissible direction with certified negative energy, if any.
    pub fn instability_witness(&self) -> Option<&[f64]> {
        let v = *self.constrained.values.first()?;
        if v < -self.report.eps_zero {
            Some(&self.constrained.vectors[0])
        } else {
            None
        }
    }
}

/// Solve both eigenproblems for an assembled surface and certify the counts.
pub fn robin_spectrum(asm: &StabilityAssembly, opts: &SpectrumOptions) -> Result<SpectrumSolution> {
    let n = asm.n;
    if n < 4 {
        return Err(Error::argument("problem too small for spectral analysis"));
    }
    let a = asm.q_matrix();
    let m = &asm.mass;
    let c = &asm.constraint;
    if c.iter().all(|&x| x == 0.0) {
        return Err(Error::mesh("wetting constraint vanished: no boundary mass"));
    }
    let perm = rcm_order(&a);

    let (free, tied, method) = if n <= opts.dense_threshold {
        let mut free = dense_window(&a, m, None, n)?;
        let mut tied = dense_window(&a, m, Some(c), n)?;
        // Truncate to the same low-end window the sparse path would resolve,
        // so the zero-band scale ε is read off comparable spectra.
        let total_neg = free.values.iter().filter(|&&v| v < 0.0).count();
        let count = opts.window.max(total_neg + 8).min(n).min(64);
        free.values.truncate(count);
        free.vectors.truncate(count);
        tied.values.truncate(count);
        tied.vectors.truncate(count);
        (free, tied, "dense")
    } else {
        let total_neg = eigenvalues_below(&a, m, 0.0, &perm)?;
        let count = opts.window.max(total_neg + 8).min(n.saturating_sub(2)).min(64);
        let sigma = shift_below_lowest(&a, m, &perm, total_neg)?;
        let lopts = LanczosOptions {
            count,
            max_steps: (6 * count).max(240).min(n.saturating_sub(1)),
            tol: 1e-10,
            seed: opts.seed,
        };
        // One factorization serves both the free and the deflated solve.
        let shifted = Csr::linear_combination(&[(&a, 1.0), (m, -sigma)]);
        let factor = LdlFactor::factor(&shifted, &perm)?;
        let free = lowest_eigenpairs_with_factor(m, sigma, &factor, None, &lopts)?;
        let tied = lowest_eigenpairs_with_factor(m, sigma, &factor, Some(c), &lopts)?;
        (free, tied, "shift_invert")
    };
    if free.values.is_empty() || tied.values.is_empty() {
        return Err(Error::numerical("eigenvalue window came back empty"));
    }

    let vmax = free
        .values
        .iter()
        .chain(tied.values.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let eps = (1e-6 * vmax).max(1e-12);

    let (k_neg, ci) = paired_eigenvalues_below(&a, m, c, -eps, &perm)?;
    let (below_plus, ci_below_plus) = paired_eigenvalues_below(&a, m, c, eps, &perm)?;

    let free_counts = mode_counts(&free, eps, k_neg, below_plus - k_neg, n);
    let tied_counts = mode_counts(&tied, eps, ci, ci_below_plus - ci, n - 1);

    let residual_free = max_relative_residual(&a, m, &free, None);
    let residual_tied = max_relative_residual(&a, m, &tied, Some(c));

    let bracket = [k_neg.saturating_sub(1), k_neg];
    let bracket_ok = ci >= bracket[0] && ci <= bracket[1];
    let verdict = if ci >= 1 {
        StabilityVerdict::Unstable
    } else if tied_counts.zero_band > 0 {
        StabilityVerdict::Indeterminate
    } else {
        StabilityVerdict::Stable
    };

    let report = SpectrumReport {
        unknowns: n,
        method: method.to_string(),
        eps_zero: eps,
        unconstrained: free_counts,
        constrained: tied_counts,
        morse_index: ci,
        index_bracket: bracket,
        bracket_satisfied: bracket_ok,
        max_relative_residual: residual_free.max(residual_tied),
        verdict,
    };
    Ok(SpectrumSolution { report, unconstrained: free, constrained: tied })
}

fn mode_counts(
    pairs: &EigenPairs,
    eps: f64,
    negative: usize,
    zero_band: usize,
    dim: usize,
) -> ModeCounts {
    let win_neg = pairs.values.iter().filter(|&&v| v < -eps).count();
    let win_zero = pairs.values.iter().filter(|&&v| v.abs() <= eps).count();
    // The window can only be checked if it extends past the zero band (or
    // exhausts the whole space).
    let covered = pairs.values.last().map_or(false, |&v| v > eps) || pairs.values.len() >= dim;
    let window_agrees = covered && win_neg == negative && win_zero == zero_band;
    ModeCounts { values: pairs.values.clone(), negative, zero_band, window_agrees }
}

/// Find σ strictly below the lowest pencil eigenvalue by an inertia ladder
/// plus bisection.  Returns a shift with a small stand-off margin.
/// A shift strictly below the lowest eigenvalue, bracketed by inertia
/// counts. `below_zero` is the caller's already-certified count at 0.
fn shift_below_lowest(a: &Csr, m: &Csr, perm: &[usize], below_zero: usize) -> Result<f64> {
    let mut good; // inertia 0: σ ≤ λ_min
    let mut bad; //  inertia > 0: σ > λ_min
    if below_zero > 0 {
        bad = 0.0;
        let mut s = -0.25;
        loop {
            if eigenvalues_below(a, m, s, perm)? == 0 {
                good = s;
                break;
            }
            bad = s;
            s *= 4.0;
            if s < -1e12 {
                return Err(Error::numerical("eigenvalues unbounded below"));
            }
        }
    } else {
        good = 0.0;
        let mut s = 0.25;
        loop {
            if eigenvalues_below(a, m, s, perm)? == 0 {
                good = s;
            } else {
                bad = s;
                break;
            }
            s *= 4.0;
            if s > 1e12 {
                return Err(Error::numerical("spectrum has no finite lower cluster"));
            }
        }
    }
    // Two refinements are enough: the shift only has to sit below λ_min
    // within a factor of a few for the inverted spectrum to stay spread.
    for _ in 0..2 {
        let mid = 0.5 * (good + bad);
        if eigenvalues_below(a, m, mid, perm)? == 0 {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good - 0.5 * (bad - good).abs() - 1e-9)
}

fn infinity_norm(a: &Csr) -> f64 {
    let mut best = 0.0f64;
    for i in 0..a.n {
        let row: f64 = a.vals[a.indptr[i]..a.indptr[i + 1]].iter().map(|v| v.abs()).sum();
        best = best.max(row);
    }
    best
}

/// max over pairs of ‖Aφ − λMφ‖ / ((‖A‖ + |λ|‖M‖)·‖φ‖), with the component
/// along the constraint direction (the Lagrange-multiplier residual) removed
/// for constrained pairs.
fn max_relative_residual(a: &Csr, m: &Csr, pairs: &EigenPairs, constraint: Option<&[f64]>) -> f64 {
    let na = infinity_norm(a);
    let nm = infinity_norm(m);
    let cc = constraint.map(|c| c.iter().map(|x| x * x).sum::<f64>());
    let mut worst = 0.0f64;
    let n = a.n;
    let mut ax = vec![0.0; n];
    let mut mx = vec![0.0; n];
    for (lam, x) in pairs.values.iter().zip(&pairs.vectors) {
        a.matvec(x, &mut ax);
        m.matvec(x, &mut mx);
        let mut r: Vec<f64> = ax.iter().zip(&mx).map(|(p, q)| p - lam * q).collect();
        if let (Some(c), Some(cc)) = (constraint, cc) {
            let cr: f64 = c.iter().zip(&r).map(|(a, b)| a * b).sum();
            for (ri, ci) in r.iter_mut().zip(c) {
                *ri -= cr / cc * ci;
            }
        }
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let denom = (na + lam.abs() * nm) * xn;
        if denom > 0.0 {
            worst = worst.max(rn / denom);
        }
    }
    worst
}

/// Dense reduction: M = LLᵀ, then a symmetric eigensolve of L⁻¹AL⁻ᵀ; the
/// constraint is absorbed by one Householder reflector whose trailing columns
/// span {c}⊥.  Returns all eigenpairs ascending (vectors M-orthonormal).
fn dense_window(a: &Csr, m: &Csr, constraint: Option<&[f64]>, n: usize) -> Result<EigenPairs> {
    use nalgebra::{DMatrix, DVector};
    let mut a_d = DMatrix::<f64>::zeros(n, n);
    let mut m_d = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for k in a.indptr[i]..a.indptr[i + 1] {
            a_d[(i, a.indices[k])] = a.vals[k];
        }
        for k in m.indptr[i]..m.indptr[i + 1] {
            m_d[(i, m.indices[k])] = m.vals[k];
        }
    }

    // Householder vector v with (I − 2vvᵀ)c ∝ e₀.
    let reflector = match constraint {
        Some(c) => {
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::argument("constraint vector is zero"));
            }
            let mut v = DVector::<f64>::from_column_slice(c) / norm;
            v[0] += v[0].signum().max(0.0).mul_add(2.0, -1.0); // v += sign(v0)·e0
            let vn = v.norm();
            if vn == 0.0 {
                return Err(Error::numerical("degenerate constraint reflector"));
            }
            v /= vn;
            Some(v)
        }
        None => None,
    };
    let (mut a_r, mut m_r) = (a_d, m_d);
    if let Some(v) = &reflector {
        reflect_sym(&mut a_r, v);
        reflect_sym(&mut m_r, v);
        a_r = a_r.view((1, 1), (n - 1, n - 1)).into_owned();
        m_r = m_r.view((1, 1), (n - 1, n - 1)).into_owned();
    }
    let dim = a_r.nrows();

    let chol = nalgebra::linalg::Cholesky::new(m_r)
        .ok_or_else(|| Error::numerical("mass matrix is not positive definite"))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&a_r)
        .ok_or_else(|| Error::numerical("singular Cholesky factor"))?;
    let mut b = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::numerical("singular Cholesky factor"))?;
    // Enforce exact symmetry before the eigensolve.
    for i in 0..dim {
        for j in (i + 1)..dim {
            let s = 0.5 * (b[(i, j)] + b[(j, i)]);
            b[(i, j)] = s;
            b[(j, i)] = s;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());

    let lt = l.transpose();
    let mut values = Vec::with_capacity(dim);
    let mut vectors = Vec::with_capacity(dim);
    for &k in &order {
        values.push(eig.eigenvalues[k]);
        let y = eig.eigenvectors.column(k).into_owned();
        let z = lt
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::numerical("singular Cholesky factor"))?;
        let full = match &reflector {
            Some(v) => {
                let mut w = DVector::<f64>::zeros(n);
                w.rows_mut(1, n - 1).copy_from(&z);
                let t = 2.0 * v.dot(&w);
                w - v * t
            }
            None => z,
        };
        // M-normalize with the sparse mass (the reduced solve normalized in
        // the reduced metric, which the reflector preserves; renormalize to
        // guard against roundoff).
        let slice = full.as_slice().to_vec();
        let nrm = m.quadratic(&slice, &slice).sqrt();
        vectors.push(slice.into_iter().map(|t| t / nrm).collect());
    }
    Ok(EigenPairs { values, vectors })
}

/// In-place symmetric Householder application A ← (I−2vvᵀ)A(I−2vvᵀ).
fn reflect_sym(a: &mut nalgebra::DMatrix<f64>, v: &nalgebra::DVector<f64>) {
    let u = &*a * v; // A v
    let s = v.dot(&u);
    let n = a.nrows();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] += 4.0 * s * v[i] * v[j] - 2.0 * (v[i] * u[j] + u[i] * v[j]);
        }
    }
}

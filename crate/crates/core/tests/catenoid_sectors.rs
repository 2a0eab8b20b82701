//! Independent one-dimensional oracle for the catenoid stability spectrum.
//!
//! The critical catenoid is axisymmetric, so separation of variables splits
//! the stability eigenproblem into angular sectors φ = f(t)·{cos, sin}(mϕ)
//! on the profile coordinate t ∈ [−T, T]. In the conformal chart the sector
//! problem is the one-dimensional Robin eigenproblem
//!
//!     −f″ + m² f − (2 / cosh² t) f = λ c² cosh²(t) f,
//!     f′(±T) = ± c cosh(T) f(±T),
//!
//! and the wetting constraint ∮ φ ds = 0 only touches the m = 0 sector,
//! where it reads f(T) + f(−T) = 0. A fine P1 discretization of these
//! sector problems is an oracle entirely independent of the surface mesh,
//! the 2D assembly, and the sparse eigensolver; this test checks the full
//! 2D pipeline against it: negative counts per sector, eigenvalue values,
//! and the effect of the constraint on the Morse index.

use capstab_core::discretize::assemble;
use capstab_core::spectrum::{robin_spectrum, SpectrumOptions};
use capstab_core::surface::{
    build_family, critical_catenoid_parameter, critical_catenoid_waist, SurfaceFamily,
};
use nalgebra::{DMatrix, SymmetricEigen};

/// Three-point Gauss–Legendre nodes and weights on [-1, 1].
const GAUSS3: [(f64, f64); 3] = [
    (-0.7745966692414834, 0.5555555555555556),
    (0.0, 0.8888888888888888),
    (0.7745966692414834, 0.5555555555555556),
];

/// Sorted eigenvalues of the m-sector problem; `constrained` applies the
/// wetting constraint (meaningful only for m = 0).
fn sector_eigenvalues(m: usize, n: usize, constrained: bool) -> Vec<f64> {
    let c = critical_catenoid_waist();
    let t0 = critical_catenoid_parameter();
    let h = 2.0 * t0 / n as f64;
    let dim = n + 1;
    let mut k = DMatrix::<f64>::zeros(dim, dim);
    let mut mass = DMatrix::<f64>::zeros(dim, dim);
    for e in 0..n {
        let a = -t0 + e as f64 * h;
        // P1 shapes on [a, a+h]; quadratics integrated by 3-point Gauss.
        let mut ke = [[0.0f64; 2]; 2];
        let mut me = [[0.0f64; 2]; 2];
        for &(x, w) in &GAUSS3 {
            let t = a + 0.5 * h * (x + 1.0);
            let wt = 0.5 * h * w;
            let shapes = [(a + h - t) / h, (t - a) / h];
            let grads = [-1.0 / h, 1.0 / h];
            let weight = c * c * t.cosh() * t.cosh();
            let potential = 2.0 / (t.cosh() * t.cosh());
            for i in 0..2 {
                for j in 0..2 {
                    ke[i][j] += wt
                        * (grads[i] * grads[j]
                            + ((m * m) as f64 - potential) * shapes[i] * shapes[j]);
                    me[i][j] += wt * weight * shapes[i] * shapes[j];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                k[(e + i, e + j)] += ke[i][j];
                mass[(e + i, e + j)] += me[i][j];
            }
        }
    }
    // Robin terms with q = 1 in the unit ball: −q φ² on both rim circles.
    let rim = c * t0.cosh();
    k[(0, 0)] -= rim;
    k[(n, n)] -= rim;

    let (k, mass) = if constrained {
        // Deflate the constraint f(−T) + f(T) = 0 with a Householder
        // reflection sending the constraint direction to the first axis.
        let mut v = nalgebra::DVector::<f64>::zeros(dim);
        v[0] = 1.0;
        v[n] = 1.0;
        let norm = v.norm();
        v[0] += norm;
        let vv = 2.0 / v.norm_squared();
        let house = DMatrix::<f64>::identity(dim, dim) - (&v * v.transpose()) * vv;
        let z = house.columns(1, dim - 1).into_owned();
        (z.transpose() * &k * &z, z.transpose() * &mass * &z)
    } else {
        (k, mass)
    };

    let chol = nalgebra::linalg::Cholesky::new(mass).expect("mass matrix not positive definite");
    // B = L⁻¹ K L⁻ᵀ shares the pencil's eigenvalues.
    let li_k = chol.l().solve_lower_triangular(&k).unwrap();
    let b = chol.l().solve_lower_triangular(&li_k.transpose()).unwrap();
    let b = (&b + b.transpose()) * 0.5;
    let mut values: Vec<f64> = SymmetricEigen::new(b).eigenvalues.iter().copied().collect();
    values.sort_by(|x, y| x.partial_cmp(y).unwrap());
    values
}

#[test]
fn sector_oracle_matches_the_two_dimensional_solver() {
    let n = 800;
    let m0 = sector_eigenvalues(0, n, false);
    let m0c = sector_eigenvalues(0, n, true);
    let m1 = sector_eigenvalues(1, n, false);
    let m2 = sector_eigenvalues(2, n, false);

    // Sector structure of the negative directions: two axisymmetric, one
    // per tilt orientation, nothing at higher frequency.
    assert!(m0[0] < 0.0 && m0[1] < 0.0 && m0[2] > 0.0, "m0 head: {:?}", &m0[..3]);
    assert!(m1[0] < 0.0, "m1 head: {:?}", &m1[..2]);
    assert!(m2[0] > 0.0, "m2 head: {:?}", &m2[..1]);
    // The rotational zero modes live in the m = 1 sector.
    assert!(m1[1].abs() < 1e-6, "m1 zero mode: {:.3e}", m1[1]);
    // The constraint removes exactly one axisymmetric negative direction.
    assert!(m0c[0] < 0.0 && m0c[1] > 0.0, "constrained m0 head: {:?}", &m0c[..2]);

    // Reassemble the low end of the full spectrum from the sectors: sin and
    // cos copies double every m ≥ 1 eigenvalue.
    let mut expected_unconstrained = vec![m0[0], m0[1], m1[0], m1[0]];
    expected_unconstrained.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut expected_constrained = vec![m0c[0], m1[0], m1[0]];
    expected_constrained.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let imm = build_family(&SurfaceFamily::Catenoid { waist: None }, 2).unwrap();
    let asm = assemble(&imm).unwrap();
    let sol = robin_spectrum(&asm, &SpectrumOptions::default()).unwrap();
    let rep = &sol.report;

    assert_eq!(rep.unconstrained.negative, 4);
    assert_eq!(rep.morse_index, expected_constrained.len());
    for (k, expect) in expected_unconstrained.iter().enumerate() {
        let got = rep.unconstrained.values[k];
        assert!(
            (got - expect).abs() < 0.03 * expect.abs(),
            "unconstrained mode {k}: 2D {got:.6} vs sector oracle {expect:.6}"
        );
    }
    for (k, expect) in expected_constrained.iter().enumerate() {
        let got = rep.constrained.values[k];
        assert!(
            (got - expect).abs() < 0.03 * expect.abs(),
            "constrained mode {k}: 2D {got:.6} vs sector oracle {expect:.6}"
        );
    }
}

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qse_decode::code::StabilizerCode;
use qse_decode::pauli::{PauliString, PauliSum};
use qse_decode::sim::{prepare_logical_state, DensityMatrix};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cmatrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
    let a = random_cmatrix(rng, n, n);
    (&a + a.adjoint()) * c(0.5)
}

/// `ρ = W W† / Tr` with `W` of the given column count, plus the normalized `W`.
pub fn random_density(rng: &mut impl Rng, n_qubits: usize, rank: usize) -> (DensityMatrix, CMatrix) {
    let d = 1 << n_qubits;
    let w = random_cmatrix(rng, d, rank);
    let w = &w / c(w.norm());
    let rho = DensityMatrix::from_matrix(n_qubits, &w * w.adjoint()).unwrap();
    (rho, w)
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_symmetric(mut a: DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() < 1e-15 * a.norm().max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = cs * akp - sn * akq;
                    a[(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = cs * apk - sn * aqk;
                    a[(q, k)] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a Hermitian matrix via its real embedding `[[A, -B], [B, A]]`,
/// in which every eigenvalue appears twice.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let n = h.nrows();
    let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = h[(i, j)];
            big[(i, j)] = v.re;
            big[(i + n, j + n)] = v.re;
            big[(i, j + n)] = -v.im;
            big[(i + n, j)] = v.im;
        }
    }
    jacobi_symmetric(big).into_iter().step_by(2).collect()
}

/// Orthonormal basis of the span of `vectors` under `<x, y> = Σ x̄ y`,
/// dropping directions whose residual norm falls below `tol`.
pub fn gram_schmidt(vectors: &[CVector], tol: f64) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::new();
    for v in vectors {
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&r);
                r -= b * proj;
            }
        }
        let norm = r.norm();
        if norm > tol {
            basis.push(r / c(norm));
        }
    }
    basis
}

pub fn columns(m: &CMatrix) -> Vec<CVector> {
    (0..m.ncols()).map(|j| m.column(j).into_owned()).collect()
}

pub fn from_columns(cols: &[CVector]) -> CMatrix {
    CMatrix::from_columns(cols)
}

/// Independent dense Pauli: Kronecker product with qubit 0 leftmost.
pub fn kron_pauli(label: &str) -> CMatrix {
    let (phase, body) = if let Some(r) = label.strip_prefix("+i") {
        (Complex64::new(0.0, 1.0), r)
    } else if let Some(r) = label.strip_prefix("-i") {
        (Complex64::new(0.0, -1.0), r)
    } else if let Some(r) = label.strip_prefix('-') {
        (c(-1.0), r)
    } else {
        (c(1.0), label.strip_prefix('+').unwrap_or(label))
    };
    let i = Complex64::new(0.0, 1.0);
    let single = |ch: char| match ch {
        'I' => CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(1.0)]),
        'X' => CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        'Y' => CMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
        'Z' => CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
        _ => panic!("bad label {label}"),
    };
    let mut out = CMatrix::from_element(1, 1, phase);
    for ch in body.chars() {
        out = out.kronecker(&single(ch));
    }
    out
}

/// Every unsigned Pauli label on `n` qubits.
pub fn all_labels(n: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..n {
        out = out
            .iter()
            .flat_map(|s| "IXYZ".chars().map(move |ch| format!("{s}{ch}")))
            .collect();
    }
    out
}

pub fn random_logical_density(rng: &mut impl Rng, code: &StabilizerCode) -> DensityMatrix {
    let theta = rng.random_range(0.0..std::f64::consts::PI);
    let phi = rng.random_range(0.0..2.0 * std::f64::consts::PI);
    prepare_logical_state(code, theta, phi).unwrap().to_density()
}

/// Random real combination of logical Paulis times group elements; every
/// term commutes with the full stabilizer group.
pub fn random_commuting_observable(rng: &mut impl Rng, code: &StabilizerCode, terms: usize) -> PauliSum {
    let group = code.hierarchy_group(code.m()).unwrap();
    let logicals = [
        PauliString::identity(code.n()),
        code.logical_x()[0].clone(),
        code.logical_y(0),
        code.logical_z()[0].clone(),
    ];
    let mut obs = PauliSum::zero(code.n());
    for _ in 0..terms {
        let l = &logicals[rng.random_range(0..4)];
        let s = &group[rng.random_range(0..group.len())];
        let op = l.multiply(s).unwrap();
        obs.push(c(rng.random_range(-1.0..1.0)), op).unwrap();
    }
    let obs = obs.canonical();
    if obs.is_empty() {
        PauliSum::from_pauli(&code.logical_z()[0])
    } else {
        obs
    }
}

/// Generalized eigenvalues of the QSE problem by purification: with
/// `ρ = W W†`, the vectors `M_j W` span the trial space and the target acts
/// as `T ⊗ I`, i.e. `X ↦ T X`.
pub fn purified_qse_spectrum(ops: &[PauliString], target: &PauliSum, w: &CMatrix, tol: f64) -> Vec<f64> {
    let t = target.to_dense().unwrap();
    let vecs: Vec<CVector> = ops
        .iter()
        .map(|m| {
            let x = m.to_dense().unwrap() * w;
            CVector::from_column_slice(x.as_slice())
        })
        .collect();
    let basis = gram_schmidt(&vecs, tol);
    let d = w.nrows();
    let k = w.ncols();
    let apply_t = |v: &CVector| {
        let x = CMatrix::from_column_slice(d, k, v.as_slice());
        let y = &t * x;
        CVector::from_column_slice(y.as_slice())
    };
    let r = basis.len();
    let mut h = CMatrix::zeros(r, r);
    for a in 0..r {
        let ta = apply_t(&basis[a]);
        for b in 0..r {
            h[(b, a)] = basis[b].dotc(&ta);
        }
    }
    hermitian_eigenvalues(&((&h + h.adjoint()) * c(0.5)))
}

/// Random rank-`rank` generalized problem of size `n` and the expected
/// spectrum: `V = B G`, `S = V† V`, `H = V† A V`; the answer is the spectrum
/// of `A` compressed to the range of `B`.
pub fn rank_deficient_pair(rng: &mut impl Rng, n: usize, rank: usize, dim: usize) -> (CMatrix, CMatrix, Vec<f64>) {
    let a = random_hermitian(rng, dim);
    let b = random_cmatrix(rng, dim, rank);
    let g = random_cmatrix(rng, rank, n);
    let v = &b * &g;
    let s = v.adjoint() * &v;
    let h = v.adjoint() * &a * &v;
    let q = from_columns(&gram_schmidt(&columns(&b), 1e-12));
    let compressed = q.adjoint() * &a * &q;
    let expected = hermitian_eigenvalues(&((&compressed + compressed.adjoint()) * c(0.5)));
    (h, s, expected)
}

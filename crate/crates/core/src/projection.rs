//! Exact stabilizer projection and projection-with-recovery corrections.
//!
//! Both corrections are ratios of traces. When every observable term commutes
//! with the group, `P Γ P = Γ P`, so the numerator reduces to Pauli
//! expectations `Tr[ρ Γ_j M]` and no dense projector is built.

use num_complex::Complex64;

use crate::code::{StabilizerCode, Syndrome, SyndromeTable};
use crate::error::{check_qubits, Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::sim::{pauli_expectation_action, CMatrix, DensityMatrix};

pub const SUPPORT_CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct CorrectionOptions {
    /// `c` below this is reported as [`Error::NoSupport`].
    pub cutoff: f64,
    /// Evaluate `Tr[P ρ P Γ]` densely so non-commuting terms are allowed.
    pub two_sided: bool,
    /// Also return the normalized corrected state.
    pub materialize_state: bool,
}

impl Default for CorrectionOptions {
    fn default() -> Self {
        CorrectionOptions {
            cutoff: SUPPORT_CUTOFF,
            two_sided: false,
            materialize_state: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorrectionResult {
    /// Corrected `<Γ>`, i.e. `numerator / c`.
    pub value: f64,
    /// Weight of the state in the projected (or recovered) space.
    pub c: f64,
    /// Unnormalized corrected expectation.
    pub numerator: f64,
    pub corrected_state: Option<DensityMatrix>,
}

fn dense_group_sum(n_qubits: usize, terms: &[(f64, PauliString)]) -> Result<CMatrix> {
    let dim = 1usize << n_qubits;
    let mut out = CMatrix::zeros(dim, dim);
    for (w, m) in terms {
        check_qubits(n_qubits, m.n_qubits())?;
        let action = m.basis_action();
        for j in 0..dim {
            out[(j ^ action.flip, j)] += action.coefficient(j) * *w;
        }
    }
    Ok(out)
}

/// Dense `(1/|G|) Σ_{M in G} M` for a group `G` of Pauli strings.
pub fn group_projector(n_qubits: usize, group: &[PauliString]) -> Result<CMatrix> {
    if group.is_empty() {
        return Err(Error::Argument("empty group".into()));
    }
    let w = 1.0 / group.len() as f64;
    let terms: Vec<(f64, PauliString)> = group.iter().map(|m| (w, m.clone())).collect();
    dense_group_sum(n_qubits, &terms)
}

/// Dense projector onto the joint +1 space of the first `l` generators.
pub fn code_projector(code: &StabilizerCode, l: usize) -> Result<CMatrix> {
    group_projector(code.n(), &code.hierarchy_group(l)?)
}

/// Signed group expansion of the projector onto syndrome `s`:
/// `(1/2^m) Σ_χ (-1)^{|χ & s|} S_χ`.
pub fn error_projector_terms(code: &StabilizerCode, s: &Syndrome) -> Result<Vec<(f64, PauliString)>> {
    if s.len() != code.m() {
        return Err(Error::Argument(format!(
            "syndrome has {} bits, code has {} generators",
            s.len(),
            code.m()
        )));
    }
    let group = code.hierarchy_group(code.m())?;
    let w = 1.0 / group.len() as f64;
    Ok(group
        .into_iter()
        .enumerate()
        .map(|(chi, m)| {
            let sign = if (chi as u64 & s.raw()).count_ones().is_multiple_of(2) { w } else { -w };
            (sign, m)
        })
        .collect())
}

pub fn error_projector(code: &StabilizerCode, s: &Syndrome) -> Result<CMatrix> {
    dense_group_sum(code.n(), &error_projector_terms(code, s)?)
}

fn check_observable(gamma: &PauliSum) -> Result<()> {
    if !gamma.is_hermitian() {
        return Err(Error::Contract("observable is not Hermitian".into()));
    }
    Ok(())
}

fn check_commuting(gamma: &PauliSum, group: &[PauliString]) -> Result<()> {
    for (_, g) in gamma.terms() {
        for m in group {
            if !g.commutes(m)? {
                return Err(Error::Contract(format!(
                    "observable term {g} anticommutes with {m}; use the two-sided form"
                )));
            }
        }
    }
    Ok(())
}

fn finish(
    rho: &DensityMatrix,
    numerator: f64,
    c: f64,
    state: Option<CMatrix>,
    opts: &CorrectionOptions,
) -> Result<CorrectionResult> {
    if c < opts.cutoff {
        return Err(Error::NoSupport(c));
    }
    let corrected_state = match state {
        Some(m) => Some(DensityMatrix::from_matrix_unchecked(
            rho.n_qubits(),
            m / Complex64::new(c, 0.0),
        )?),
        None => None,
    };
    Ok(CorrectionResult {
        value: numerator / c,
        c,
        numerator,
        corrected_state,
    })
}

fn dense_trace(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `(P ρ P / c, c)` with `P = (1/|G|) Σ_{M in G} M` and `c = Tr[P ρ]`.
pub fn projected_state(rho: &DensityMatrix, group: &[PauliString], cutoff: f64) -> Result<(DensityMatrix, f64)> {
    let p = group_projector(rho.n_qubits(), group)?;
    let out = &p * rho.data() * &p;
    let c = out.trace().re;
    if c < cutoff {
        return Err(Error::NoSupport(c));
    }
    let state = DensityMatrix::from_matrix_unchecked(rho.n_qubits(), out / Complex64::new(c, 0.0))?;
    Ok((state, c))
}

/// `Tr[P ρ P Γ] / Tr[P ρ]` with `P` the projector of level `l`.
pub fn corrected_expectation(
    rho: &DensityMatrix,
    gamma: &PauliSum,
    code: &StabilizerCode,
    l: usize,
) -> Result<CorrectionResult> {
    let group = code.hierarchy_group(l)?;
    corrected_expectation_with(rho, gamma, &group, &CorrectionOptions::default())
}

/// As [`corrected_expectation`] for an explicit group `G`, `P = (1/|G|) Σ M`.
pub fn corrected_expectation_with(
    rho: &DensityMatrix,
    gamma: &PauliSum,
    group: &[PauliString],
    opts: &CorrectionOptions,
) -> Result<CorrectionResult> {
    check_qubits(rho.n_qubits(), gamma.n_qubits())?;
    check_observable(gamma)?;
    if group.is_empty() {
        return Err(Error::Argument("empty group".into()));
    }
    let w = 1.0 / group.len() as f64;
    let data = rho.data();
    let mut c = 0.0;
    for m in group {
        check_qubits(rho.n_qubits(), m.n_qubits())?;
        c += w * pauli_expectation_action(data, &m.basis_action()).re;
    }

    let need_dense = opts.two_sided || opts.materialize_state;
    let projected = if need_dense {
        let p = group_projector(rho.n_qubits(), group)?;
        Some(&p * data * &p)
    } else {
        None
    };

    let numerator = if opts.two_sided {
        let gd = gamma.to_dense()?;
        dense_trace(projected.as_ref().expect("dense path"), &gd).re
    } else {
        check_commuting(gamma, group)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (coef, g) in gamma.terms() {
            let mut term = Complex64::new(0.0, 0.0);
            for m in group {
                let gm = g.multiply(m)?;
                term += pauli_expectation_action(data, &gm.basis_action());
            }
            acc += coef * term * w;
        }
        acc.re
    };
    let state = if opts.materialize_state { projected } else { None };
    finish(rho, numerator, c, state, opts)
}

/// `Σ_i Tr[R_i P_i ρ P_i R_i† Γ] / Σ_i Tr[P_i ρ]` over the table entries,
/// with `P_i` the projector onto entry `i`'s syndrome.
pub fn recovery_corrected_expectation(
    rho: &DensityMatrix,
    gamma: &PauliSum,
    code: &StabilizerCode,
    table: &SyndromeTable,
) -> Result<CorrectionResult> {
    recovery_corrected_expectation_with(rho, gamma, code, table, &CorrectionOptions::default())
}

pub fn recovery_corrected_expectation_with(
    rho: &DensityMatrix,
    gamma: &PauliSum,
    code: &StabilizerCode,
    table: &SyndromeTable,
    opts: &CorrectionOptions,
) -> Result<CorrectionResult> {
    check_qubits(rho.n_qubits(), gamma.n_qubits())?;
    check_qubits(rho.n_qubits(), code.n())?;
    check_observable(gamma)?;
    let group = code.hierarchy_group(code.m())?;
    if !opts.two_sided {
        check_commuting(gamma, &group)?;
    }
    let data = rho.data();
    let mut c = 0.0;
    let mut numerator = 0.0;
    let need_dense = opts.two_sided || opts.materialize_state;
    let mut recovered = need_dense.then(|| CMatrix::zeros(rho.dim(), rho.dim()));

    for entry in table.entries() {
        let terms = error_projector_terms(code, &entry.syndrome)?;
        for (w, s) in &terms {
            c += w * pauli_expectation_action(data, &s.basis_action()).re;
        }
        if let Some(acc) = recovered.as_mut() {
            let p = dense_group_sum(code.n(), &terms)?;
            let r = entry.recovery.to_dense()?;
            *acc += &r * &p * data * &p * r.adjoint();
        }
        if !opts.two_sided {
            // R† Γ_j R = ±Γ_j and Γ_j commutes with P_i
            let r = &entry.recovery;
            let mut acc = Complex64::new(0.0, 0.0);
            for (coef, g) in gamma.terms() {
                let conj = r.adjoint().multiply(g)?.multiply(r)?;
                for (w, s) in &terms {
                    let op = conj.multiply(s)?;
                    acc += coef * *w * pauli_expectation_action(data, &op.basis_action());
                }
            }
            numerator += acc.re;
        }
    }
    if opts.two_sided {
        let gd = gamma.to_dense()?;
        numerator = dense_trace(recovered.as_ref().expect("dense path"), &gd).re;
    }
    let state = if opts.materialize_state { recovered } else { None };
    finish(rho, numerator, c, state, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{build_syndrome_table, single_qubit_paulis};
    use crate::sim::{apply_pauli, expectation, prepare_logical_state};
    use std::f64::consts::PI;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn code_state() -> (StabilizerCode, DensityMatrix) {
        let code = StabilizerCode::five_one_three();
        let rho = prepare_logical_state(&code, 2.0 * PI / 5.0, PI / 3.0)
            .unwrap()
            .to_density();
        (code, rho)
    }

    fn zbar() -> PauliSum {
        PauliSum::from_pauli(&p("ZZZZZ"))
    }

    #[test]
    fn projector_properties() {
        let code = StabilizerCode::five_one_three();
        let p0 = code_projector(&code, 0).unwrap();
        assert!((&p0 - CMatrix::identity(32, 32)).norm() < 1e-15);
        for l in 0..=4 {
            let pl = code_projector(&code, l).unwrap();
            assert!((&pl * &pl - &pl).norm() < 1e-12);
            assert!((&pl - pl.adjoint()).norm() < 1e-15);
        }
        let full = code_projector(&code, 4).unwrap();
        assert!((full.trace().re - 2.0).abs() < 1e-12);
        assert!(code_projector(&code, 5).is_err());
    }

    #[test]
    fn code_state_is_unchanged() {
        let (code, rho) = code_state();
        let r = corrected_expectation(&rho, &zbar(), &code, 4).unwrap();
        assert!((r.c - 1.0).abs() < 1e-12);
        let raw = expectation(&rho, &zbar()).unwrap().re;
        assert!((r.value - raw).abs() < 1e-12);
    }

    #[test]
    fn single_error_is_removed() {
        let (code, rho) = code_state();
        let e = p("IIYII");
        let noisy = rho.mix(&apply_pauli(&rho, &e).unwrap(), 0.2).unwrap();
        let r = corrected_expectation(&noisy, &zbar(), &code, 4).unwrap();
        let raw = expectation(&rho, &zbar()).unwrap().re;
        assert!((r.value - raw).abs() < 1e-12);
        assert!((r.c - 0.8).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_input() {
        let code = StabilizerCode::five_one_three();
        let rho = DensityMatrix::maximally_mixed(5).unwrap();
        let r = corrected_expectation(&rho, &zbar(), &code, 4).unwrap();
        assert!(r.value.abs() < 1e-14);
        assert!((r.c - 1.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn anticommuting_terms_are_refused() {
        let (code, rho) = code_state();
        let x0 = PauliSum::from_pauli(&p("XIIII"));
        assert!(matches!(
            corrected_expectation(&rho, &x0, &code, 4),
            Err(Error::Contract(_))
        ));
        let group = code.hierarchy_group(4).unwrap();
        let opts = CorrectionOptions {
            two_sided: true,
            ..Default::default()
        };
        let r = corrected_expectation_with(&rho, &x0, &group, &opts).unwrap();
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn no_support_is_reported() {
        let (code, rho) = code_state();
        // X0 flips generator ZXIXZ, which the level-4 projector then rejects
        let flipped = apply_pauli(&rho, &p("XIIII")).unwrap();
        assert!(matches!(
            corrected_expectation(&flipped, &zbar(), &code, 4),
            Err(Error::NoSupport(_))
        ));
    }

    #[test]
    fn materialized_state_matches_dense() {
        let (code, rho) = code_state();
        let noisy = crate::sim::depolarize_all(&rho, 0.2).unwrap();
        let group = code.hierarchy_group(3).unwrap();
        let opts = CorrectionOptions {
            materialize_state: true,
            ..Default::default()
        };
        let r = corrected_expectation_with(&noisy, &zbar(), &group, &opts).unwrap();
        let state = r.corrected_state.unwrap();
        state.validate().unwrap();
        let direct = expectation(&state, &zbar()).unwrap().re;
        assert!((r.value - direct).abs() < 1e-12);
    }

    #[test]
    fn error_projectors() {
        let code = StabilizerCode::five_one_three();
        let zero = error_projector(&code, &Syndrome::zero(4)).unwrap();
        assert!((&zero - code_projector(&code, 4).unwrap()).norm() < 1e-14);
        let mut total = CMatrix::zeros(32, 32);
        for bits in 0..16u64 {
            let s = Syndrome::from_bits(&(0..4).map(|j| bits >> j & 1 == 1).collect::<Vec<_>>());
            let ps = error_projector(&code, &s).unwrap();
            assert!((&ps * &ps - &ps).norm() < 1e-12);
            total += ps;
        }
        assert!((total - CMatrix::identity(32, 32)).norm() < 1e-12);
        assert!(error_projector(&code, &Syndrome::zero(3)).is_err());
    }

    #[test]
    fn recovery_restores_single_errors() {
        let (code, rho) = code_state();
        let mut errs = vec![PauliString::identity(5)];
        errs.extend(single_qubit_paulis(5));
        let table = build_syndrome_table(&code, &errs).unwrap();
        let noisy = rho.mix(&apply_pauli(&rho, &p("XIIII")).unwrap(), 0.3).unwrap();
        let r = recovery_corrected_expectation(&noisy, &zbar(), &code, &table).unwrap();
        let raw = expectation(&rho, &zbar()).unwrap().re;
        assert!((r.c - 1.0).abs() < 1e-12);
        assert!((r.value - raw).abs() < 1e-12);

        let opts = CorrectionOptions {
            two_sided: true,
            materialize_state: true,
            ..Default::default()
        };
        let dense = recovery_corrected_expectation_with(&noisy, &zbar(), &code, &table, &opts).unwrap();
        assert!((dense.value - r.value).abs() < 1e-12);
        dense.corrected_state.unwrap().validate().unwrap();
    }

    #[test]
    fn identity_table_is_strict_projection() {
        let (code, rho) = code_state();
        let noisy = crate::sim::depolarize_all(&rho, 0.15).unwrap();
        let table = build_syndrome_table(&code, &[]).unwrap();
        let a = recovery_corrected_expectation(&noisy, &zbar(), &code, &table).unwrap();
        let b = corrected_expectation(&noisy, &zbar(), &code, 4).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
        assert!((a.c - b.c).abs() < 1e-12);
    }
}

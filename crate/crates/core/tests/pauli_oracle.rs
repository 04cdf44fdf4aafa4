mod common;

use common::{all_labels, c, kron_pauli};
use num_complex::Complex64;
use proptest::prelude::*;

use qse_decode::code::StabilizerCode;
use qse_decode::pauli::{Pauli, PauliString, PauliSum, Phase};

fn max_abs(m: &common::CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn products_match_dense_for_all_small_pairs() {
    for n in 1..=3 {
        let labels = all_labels(n);
        for a in &labels {
            let pa: PauliString = a.parse().unwrap();
            let da = kron_pauli(a);
            assert!(max_abs(&(pa.to_dense().unwrap() - &da)) < 1e-12, "{a}");
            for b in &labels {
                let pb: PauliString = b.parse().unwrap();
                let db = kron_pauli(b);
                let prod = pa.multiply(&pb).unwrap();
                let expected = &da * &db;
                assert!(
                    max_abs(&(kron_pauli(&prod.to_string()) - &expected)) < 1e-12,
                    "{a} * {b} = {prod}"
                );
                let comm = &da * &db - &db * &da;
                assert_eq!(pa.commutes(&pb).unwrap(), max_abs(&comm) < 1e-12, "{a} {b}");
            }
        }
    }
}

#[test]
fn phases_match_dense() {
    for prefix in ["", "-", "+i", "-i"] {
        for body in all_labels(2) {
            let label = format!("{prefix}{body}");
            let p: PauliString = label.parse().unwrap();
            assert!(max_abs(&(p.to_dense().unwrap() - kron_pauli(&label))) < 1e-12);
            assert_eq!(p.to_string(), label);
        }
    }
}

#[test]
fn basis_action_matches_dense_columns() {
    for label in all_labels(3) {
        let p: PauliString = label.parse().unwrap();
        let d = kron_pauli(&label);
        let act = p.basis_action();
        for j in 0..8 {
            let col = d.column(j);
            let (row, _) = col.iter().enumerate().find(|(_, z)| z.norm() > 0.5).unwrap();
            assert_eq!(row, j ^ act.flip);
            assert!((col[row] - act.coefficient(j)).norm() < 1e-12);
        }
    }
}

#[test]
fn dense_limit_is_enforced() {
    let p = PauliString::identity(13);
    assert!(p.to_dense().is_err());
    assert!(p.to_dense_with_limit(13).is_ok());
}

fn pauli_strategy(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(0u8..4, n), 0u8..4).prop_map(|(fs, ph)| {
        let paulis: Vec<Pauli> = fs
            .iter()
            .map(|f| match f {
                0 => Pauli::I,
                1 => Pauli::X,
                2 => Pauli::Y,
                _ => Pauli::Z,
            })
            .collect();
        PauliString::from_paulis(&paulis).with_phase(Phase::from_exponent(ph as i64))
    })
}

fn five_qubit() -> StabilizerCode {
    StabilizerCode::five_one_three()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn multiplication_is_associative(
        a in pauli_strategy(6), b in pauli_strategy(6), c3 in pauli_strategy(6)
    ) {
        let left = a.multiply(&b).unwrap().multiply(&c3).unwrap();
        let right = a.multiply(&b.multiply(&c3).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn commutation_is_symmetric_and_matches_products(a in pauli_strategy(6), b in pauli_strategy(6)) {
        let ab = a.multiply(&b).unwrap();
        let ba = b.multiply(&a).unwrap();
        let commutes = a.commutes(&b).unwrap();
        prop_assert_eq!(commutes, b.commutes(&a).unwrap());
        if commutes {
            prop_assert_eq!(ab, ba);
        } else {
            prop_assert_eq!(ab, ba.negated());
        }
    }

    #[test]
    fn syndrome_is_linear(a in pauli_strategy(5), b in pauli_strategy(5)) {
        let code = five_qubit();
        let sa = code.syndrome(&a).unwrap();
        let sb = code.syndrome(&b).unwrap();
        let sab = code.syndrome(&a.multiply(&b).unwrap()).unwrap();
        prop_assert_eq!(sab, sa.xor(&sb));
    }

    #[test]
    fn labels_round_trip(a in pauli_strategy(8)) {
        let back: PauliString = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn squares_are_scalar(a in pauli_strategy(5)) {
        let sq = a.multiply(&a).unwrap();
        prop_assert!(sq.is_identity());
        let expected = if a.is_hermitian() { Phase::ONE } else { Phase::MINUS_ONE };
        prop_assert_eq!(sq.phase(), expected);
        prop_assert!(a.multiply(&a.adjoint()).unwrap() == PauliString::identity(5));
    }

    #[test]
    fn sum_products_match_dense(
        a in prop::collection::vec((pauli_strategy(2), -1.0f64..1.0), 1..4),
        b in prop::collection::vec((pauli_strategy(2), -1.0f64..1.0), 1..4),
    ) {
        let to_sum = |v: &[(PauliString, f64)]| {
            PauliSum::from_terms(2, v.iter().map(|(p, w)| (c(*w), p.clone()))).unwrap()
        };
        let sa = to_sum(&a);
        let sb = to_sum(&b);
        let prod = sa.multiply(&sb).unwrap();
        let dense = sa.to_dense().unwrap() * sb.to_dense().unwrap();
        prop_assert!(max_abs(&(prod.to_dense().unwrap() - &dense)) < 1e-12);
        let sum = sa.add(&sb).unwrap();
        let dense_sum = sa.to_dense().unwrap() + sb.to_dense().unwrap();
        prop_assert!(max_abs(&(sum.to_dense().unwrap() - dense_sum)) < 1e-12);
        let canon = prod.canonical();
        prop_assert_eq!(canon.canonical(), canon.clone());
        prop_assert!(max_abs(&(canon.to_dense().unwrap() - &dense)) < 1e-12);
        let adj = prod.adjoint().to_dense().unwrap();
        prop_assert!(max_abs(&(adj - dense.adjoint())) < 1e-12);
    }
}

#[test]
fn stabilizers_commute_and_logicals_anticommute() {
    let code = five_qubit();
    let g = code.generators();
    for a in g {
        for b in g {
            assert!(a.commutes(b).unwrap());
        }
        assert!(a.commutes(&code.logical_x()[0]).unwrap());
        assert!(a.commutes(&code.logical_z()[0]).unwrap());
    }
    assert!(!code.logical_x()[0].commutes(&code.logical_z()[0]).unwrap());
    let y = code.logical_y(0);
    let expected = kron_pauli(&code.logical_x()[0].to_string())
        * kron_pauli(&code.logical_z()[0].to_string())
        * Complex64::new(0.0, 1.0);
    assert!(max_abs(&(y.to_dense().unwrap() - expected)) < 1e-12);
}

#[test]
fn hierarchy_groups_are_indexed_by_bit_strings() {
    let code = five_qubit();
    for l in 0..=code.m() {
        let group = code.hierarchy_group(l).unwrap();
        assert_eq!(group.len(), 1 << l);
        for (chi, s) in group.iter().enumerate() {
            let mut expected = PauliString::identity(5);
            for j in 0..l {
                if chi >> j & 1 == 1 {
                    expected = expected.multiply(&code.generators()[j]).unwrap();
                }
            }
            assert_eq!(s, &expected);
            assert!(s.is_hermitian());
        }
    }
}

use std::f64::consts::PI;

use qse_decode::code::{build_syndrome_table, single_qubit_paulis, StabilizerCode};
use qse_decode::pauli::{PauliString, PauliSum};
use qse_decode::projection::{
    corrected_expectation, corrected_expectation_with, recovery_corrected_expectation_with, CorrectionOptions,
};
use qse_decode::sim::{apply_pauli, depolarize_all, fidelity, prepare_logical_state};

fn main() -> qse_decode::Result<()> {
    let code = StabilizerCode::five_one_three();
    let psi = prepare_logical_state(&code, 2.0 * PI / 5.0, PI / 3.0)?;
    let ideal = psi.to_density();
    let zbar = PauliSum::from_pauli(&code.logical_z()[0]);
    let exact = qse_decode::sim::expectation(&ideal, &zbar)?.re;

    let rho = depolarize_all(&ideal, 0.1)?;
    println!("exact <Z_L> = {exact:.6}");
    for l in 0..=code.m() {
        let r = corrected_expectation(&rho, &zbar, &code, l)?;
        println!("l={l}: <Z_L> = {:.6}  c = {:.6}", r.value, r.c);
    }

    // a detected weight-2 error: projection discards it, recovery misreads it
    let table = build_syndrome_table(&code, &single_qubit_paulis(5))?;
    let opts = CorrectionOptions {
        materialize_state: true,
        ..Default::default()
    };
    let e: PauliString = "XXIII".parse()?;
    let noisy = ideal.mix(&apply_pauli(&ideal, &e)?, 0.3)?;
    let group = code.hierarchy_group(4)?;
    let strict = corrected_expectation_with(&noisy, &zbar, &group, &opts)?;
    let rec = recovery_corrected_expectation_with(&noisy, &zbar, &code, &table, &opts)?;
    let f = |r: &qse_decode::projection::CorrectionResult| fidelity(r.corrected_state.as_ref().unwrap(), &psi);
    println!("error {e}: projection F = {:.6} (c = {:.2}), recovery F = {:.6} (c = {:.2})",
        f(&strict)?, strict.c, f(&rec)?, rec.c);
    Ok(())
}

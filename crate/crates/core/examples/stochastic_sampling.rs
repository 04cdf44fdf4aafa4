use std::f64::consts::PI;

use qse_decode::code::{build_syndrome_table, single_qubit_paulis, StabilizerCode};
use qse_decode::pauli::PauliSum;
use qse_decode::projection::{corrected_expectation, recovery_corrected_expectation};
use qse_decode::sampling::{ratio_estimate, SchemeParams};
use qse_decode::sim::{depolarize_all, prepare_logical_state};

fn main() -> qse_decode::Result<()> {
    let code = StabilizerCode::five_one_three();
    let psi = prepare_logical_state(&code, 2.0 * PI / 5.0, PI / 3.0)?;
    let p = 0.1;
    let rho = depolarize_all(&psi.to_density(), p)?;
    let zbar = PauliSum::from_pauli(&code.logical_z()[0]);
    let table = build_syndrome_table(&code, &single_qubit_paulis(5))?;
    let b = table.default_weights();
    let shots = 200_000;

    let strict = corrected_expectation(&rho, &zbar, &code, 4)?.value;
    let recovered = recovery_corrected_expectation(&rho, &zbar, &code, &table)?.value;
    let runs = [
        ("uniform", SchemeParams::Uniform { level: 4 }, strict),
        ("importance", SchemeParams::Importance { level: 4, p_weight: p }, strict),
        ("recovery", SchemeParams::Recovery { table: &table, b: &b }, recovered),
    ];
    for (name, params, exact) in runs {
        let est = ratio_estimate(&rho, &code, &zbar, params, shots, 7, 0)?;
        println!(
            "{name:>10}: {:.5} +- {:.5} (exact {exact:.5}), ESS {:.0}",
            est.value, est.standard_error, est.numerator.effective_sample_size
        );
    }
    Ok(())
}

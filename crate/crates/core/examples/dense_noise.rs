use std::f64::consts::PI;

use qse_decode::code::StabilizerCode;
use qse_decode::pauli::PauliSum;
use qse_decode::sim::{depolarize_all, expectation, fidelity, prepare_logical_state};

fn main() -> qse_decode::Result<()> {
    let code = StabilizerCode::five_one_three();
    let psi = prepare_logical_state(&code, 2.0 * PI / 5.0, PI / 3.0)?;
    let ideal = psi.to_density();
    let zbar = PauliSum::from_pauli(&code.logical_z()[0]);
    println!("{:>6} {:>10} {:>10} {:>10}", "p", "fidelity", "<Z_L>", "purity");
    for p in [0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75] {
        let rho = depolarize_all(&ideal, p)?;
        let purity = (rho.data() * rho.data()).trace().re;
        println!(
            "{p:>6.2} {:>10.6} {:>10.6} {purity:>10.6}",
            fidelity(&rho, &psi)?,
            expectation(&rho, &zbar)?.re
        );
    }
    Ok(())
}

use qse_decode::code::StabilizerCode;
use qse_decode::pauli::{PauliString, PauliSum};
use qse_decode::qse::{encode_logical, two_stage_logical_qse};
use qse_decode::sim::{apply_pauli, prepare_logical_state};

fn main() -> qse_decode::Result<()> {
    let code = StabilizerCode::five_one_three();
    let h = encode_logical(&PauliSum::from_pauli(&"-Z".parse::<PauliString>()?), &code)?;
    let zero = prepare_logical_state(&code, 0.0, 0.0)?.to_density();
    let flipped = apply_pauli(&zero, &code.logical_x()[0])?;
    println!("{:>5} {:>12} {:>12} {:>12}", "p", "code only", "logical ops", "-(1-2p)");
    for p in [0.0, 0.1, 0.25, 0.4, 0.49] {
        let rho = zero.mix(&flipped, p)?;
        let without = two_stage_logical_qse(&rho, &code, &h, false)?;
        let with = two_stage_logical_qse(&rho, &code, &h, true)?;
        println!("{p:>5.2} {:>12.8} {:>12.8} {:>12.8}", without.energy, with.energy, -(1.0 - 2.0 * p));
    }
    Ok(())
}

use qse_decode::experiments::MoleculeSpec;
use qse_decode::pauli::PauliSum;
use qse_decode::qse::{ground_state, symmetry_qse};
use qse_decode::sim::{depolarize_all, expectation, fidelity};

fn main() -> qse_decode::Result<()> {
    let spec = MoleculeSpec::h2();
    let (e0, psi) = ground_state(&spec.hamiltonian)?;
    let ideal = psi.to_density();
    println!("H2 at 1.50 A: {} terms, exact energy {e0:.8}", spec.hamiltonian.len());
    for g in &spec.generators {
        let v = expectation(&ideal, &PauliSum::from_pauli(g))?.re;
        println!("  symmetry {g}: <g> = {v:+.4}");
    }

    let rho = depolarize_all(&ideal, 0.05)?;
    let bare_e = expectation(&rho, &spec.hamiltonian)?.re;
    println!("bare: energy {bare_e:.6}, infidelity {:.6}", 1.0 - fidelity(&rho, &psi)?);
    for l in 0..=spec.generators.len() {
        let r = symmetry_qse(&rho, &spec.generators, &spec.hamiltonian, l, Some(&psi))?;
        println!("l={l}: energy {:.6}, infidelity {:.6}", r.energy, 1.0 - r.fidelity.unwrap());
    }
    Ok(())
}

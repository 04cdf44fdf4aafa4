use std::f64::consts::PI;

use qse_decode::code::StabilizerCode;
use qse_decode::projection::projected_state;
use qse_decode::qse::{code_hamiltonian, qse_correct, QseProblem};
use qse_decode::sim::{depolarize_all, fidelity, prepare_logical_state};

fn main() -> qse_decode::Result<()> {
    let code = StabilizerCode::five_one_three();
    let psi = prepare_logical_state(&code, 2.0 * PI / 5.0, PI / 3.0)?;
    let rho = depolarize_all(&psi.to_density(), 0.15)?;
    let group = code.hierarchy_group(4)?;
    let hc = code_hamiltonian(&code, 4)?;

    let (sol, state) = qse_correct(&QseProblem::new(group.clone(), hc.clone(), rho.clone())?)?;
    let (projected, c) = projected_state(&rho, &group, 1e-12)?;
    println!("ground energy {:.6}, retained rank {}", sol.ground_energy(), sol.retained_rank);
    println!("distance to projected state {:.2e} (c = {c:.4})", state.frobenius_distance(&projected));
    println!("coefficients:");
    for (m, x) in group.iter().zip(sol.coefficients.iter()) {
        println!("  {m:>7} {:+.4}{:+.4}i", x.re, x.im);
    }

    // fewer operators: the relaxation no longer reproduces the projector
    for keep in [16, 12, 8, 4, 2, 1] {
        let ops = group[..keep].to_vec();
        let (_, st) = qse_correct(&QseProblem::new(ops, hc.clone(), rho.clone())?)?;
        println!("{keep:>2} operators: infidelity {:.6}", 1.0 - fidelity(&st, &psi)?);
    }
    Ok(())
}

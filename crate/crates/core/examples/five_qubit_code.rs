use qse_decode::code::{build_syndrome_table, load_code, single_qubit_paulis, FIVE_ONE_THREE};

fn main() -> qse_decode::Result<()> {
    let code = load_code(FIVE_ONE_THREE)?;
    println!("[[{}, {}, {:?}]] code", code.n(), code.k(), code.d());
    for (j, g) in code.generators().iter().enumerate() {
        println!("S{} = {g}", j + 1);
    }
    println!("X_L = {}, Z_L = {}", code.logical_x()[0], code.logical_z()[0]);

    for l in 0..=code.m() {
        let group = code.hierarchy_group(l)?;
        let names: Vec<String> = group.iter().map(|p| p.to_string()).collect();
        println!("S^({l}): {}", names.join(" "));
    }

    let table = build_syndrome_table(&code, &single_qubit_paulis(code.n()))?;
    println!("{} syndromes:", table.len());
    for e in table.entries() {
        println!("  {:?} -> {}", e.syndrome.to_bools().iter().map(|&b| b as u8).collect::<Vec<_>>(), e.recovery);
    }
    Ok(())
}

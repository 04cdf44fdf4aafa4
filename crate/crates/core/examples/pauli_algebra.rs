use qse_decode::pauli::{PauliString, PauliSum};

fn main() -> qse_decode::Result<()> {
    let a: PauliString = "XZZXI".parse()?;
    let b: PauliString = "YIYIZ".parse()?;
    println!("{a} * {b} = {}", a.multiply(&b)?);
    println!("commute: {}", a.commutes(&b)?);

    let y: PauliString = "Y".parse()?;
    let xz = "X".parse::<PauliString>()?.multiply(&"Z".parse()?)?;
    println!("XZ = {xz}, Y = {y}");

    // sparse labels name the qubit of each factor
    let zz = PauliString::parse_on(4, "Z0Z2")?;
    println!("Z0Z2 on 4 qubits: {zz}");

    let h = PauliSum::parse_hamiltonian("ZZ 0.5\nXI -0.25\nIX 0.25\n")?;
    let h2 = h.multiply(&h)?.canonical();
    println!("H has {} terms, H^2 has {}:", h.len(), h2.len());
    for (c, p) in h2.terms() {
        println!("  {:+.4} {p}", c.re);
    }
    Ok(())
}

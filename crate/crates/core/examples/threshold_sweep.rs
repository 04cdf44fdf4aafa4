use qse_decode::experiments::{cmd_threshold, cmd_transversal_x, SweepConfig};

fn main() -> qse_decode::Result<()> {
    let config = SweepConfig {
        steps: 40,
        drop_count: 0,
        ..SweepConfig::default()
    };
    let out = cmd_threshold(&config)?;
    println!("{}", out.table.header[..8].join(","));
    for row in out.table.rows.iter().step_by(8) {
        println!("{}", row[..8].iter().map(|x| format!("{:.5}", x.parse::<f64>().unwrap())).collect::<Vec<_>>().join(","));
    }
    for (l, p) in &out.crossovers {
        println!("memory     l={l}: {}", p.map_or("no crossover".into(), |p| format!("p* = {p:.4}")));
    }
    for (l, p) in &cmd_transversal_x(&config)?.crossovers {
        println!("transversal l={l}: {}", p.map_or("no crossover".into(), |p| format!("p* = {p:.4}")));
    }
    Ok(())
}

//! Noise sweeps behind the `qse-decode` command-line tool.
//!
//! Every sweep evaluates grid points in parallel and returns rows in grid
//! order. Anything random at point `i` draws from stream `i` of the master
//! seed, so the output does not depend on thread scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index;
use rayon::prelude::*;

use crate::code::{build_syndrome_table_with_priors, load_code, StabilizerCode, FIVE_ONE_THREE};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::projection::{
    corrected_expectation, projected_state, recovery_corrected_expectation, CorrectionResult,
    SUPPORT_CUTOFF,
};
use crate::qse::{code_hamiltonian, ground_state, qse_correct, symmetry_qse, QseProblem, QseSolution};
use crate::sampling::{ratio_estimate, rng_for, EstimatorReport, Scheme, SchemeParams};
use crate::sim::{apply_pauli, depolarize_all, expectation, fidelity, prepare_logical_state, CMatrix, DensityMatrix, StateVector};

/// Hydrogen molecule at 1.50 Å, minimal basis, Jordan-Wigner with
/// interleaved spin orbitals.
pub const H2_HAMILTONIAN: &str = include_str!("../data/h2_1.50A.ham");

/// Number-parity symmetries of [`H2_HAMILTONIAN`] and the total X flip.
pub const H2_GENERATORS: [&str; 3] = ["Z0Z2", "Z1Z3", "X0X1X2X3"];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub p_min: f64,
    pub p_max: f64,
    pub steps: usize,
    /// Hierarchy levels to evaluate; `None` means every level.
    pub levels: Option<Vec<usize>>,
    pub theta: f64,
    pub phi: f64,
    /// Code file; `None` selects the bundled five-qubit code.
    pub code_path: Option<PathBuf>,
    pub out_path: Option<PathBuf>,
    pub seed: u64,
    /// Group elements removed in each QSE replica.
    pub drop_count: usize,
    pub drop_trials: usize,
    /// Directory receiving the QSE matrices of every point.
    pub dump_matrices: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            p_min: 0.01,
            p_max: 0.9,
            steps: 60,
            levels: None,
            theta: 2.0 * std::f64::consts::PI / 5.0,
            phi: std::f64::consts::PI / 3.0,
            code_path: None,
            out_path: None,
            seed: 0,
            drop_count: 2,
            drop_trials: 20,
            dump_matrices: None,
        }
    }
}

impl SweepConfig {
    /// Checks the grid and returns its points: log-spaced when `p_min > 0`,
    /// evenly spaced otherwise.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let ok = |p: f64| (0.0..=1.0).contains(&p);
        if !ok(self.p_min) || !ok(self.p_max) || self.p_min > self.p_max {
            return Err(Error::Argument(format!(
                "need 0 <= p_min <= p_max <= 1, got [{}, {}]",
                self.p_min, self.p_max
            )));
        }
        if self.steps < 2 {
            return Err(Error::Argument("steps must be at least 2".into()));
        }
        let last = (self.steps - 1) as f64;
        let mut grid: Vec<f64> = if self.p_min > 0.0 {
            let (a, b) = (self.p_min.ln(), self.p_max.ln());
            (0..self.steps).map(|i| (a + (b - a) * i as f64 / last).exp()).collect()
        } else {
            (0..self.steps)
                .map(|i| self.p_min + (self.p_max - self.p_min) * i as f64 / last)
                .collect()
        };
        grid[0] = self.p_min;
        grid[self.steps - 1] = self.p_max;
        Ok(grid)
    }

    pub fn load_code(&self) -> Result<StabilizerCode> {
        match &self.code_path {
            Some(path) => load_code(&fs::read_to_string(path)?),
            None => load_code(FIVE_ONE_THREE),
        }
    }

    /// Requested levels, or `0..=max` when none were given.
    pub fn levels_up_to(&self, max: usize) -> Result<Vec<usize>> {
        match &self.levels {
            Some(levels) => {
                if let Some(&l) = levels.iter().find(|&&l| l > max) {
                    return Err(Error::Argument(format!("level {l} exceeds the maximum {max}")));
                }
                let mut v = levels.clone();
                v.sort_unstable();
                v.dedup();
                Ok(v)
            }
            None => Ok((0..=max).collect()),
        }
    }
}

/// Rows of a CSV file with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<CsvTable> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Argument("empty CSV".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows = lines
            .filter(|l| !l.is_empty())
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect();
        Ok(CsvTable { header, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Column parsed as numbers; empty cells become NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[i].parse().unwrap_or(f64::NAN))
                .collect(),
        )
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

/// First `p` where `curve` rises from below `reference` to at or above it,
/// interpolating linearly in `ln(curve) - ln(reference)` between neighbouring
/// grid points. Points where either value is not positive are skipped.
pub fn crossover(ps: &[f64], curve: &[f64], reference: &[f64]) -> Option<f64> {
    let points: Vec<(f64, f64)> = ps
        .iter()
        .zip(curve.iter().zip(reference))
        .filter(|(_, (c, r))| **c > 0.0 && **r > 0.0)
        .map(|(p, (c, r))| (*p, c.ln() - r.ln()))
        .collect();
    points.windows(2).find_map(|w| {
        let ((p0, d0), (p1, d1)) = (w[0], w[1]);
        if d0 < 0.0 && d1 >= 0.0 {
            Some(p0 + (p1 - p0) * d0 / (d0 - d1))
        } else {
            None
        }
    })
}

/// Result of a threshold-style sweep.
#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub table: CsvTable,
    /// Crossover with the physical curve for each evaluated level.
    pub crossovers: Vec<(usize, Option<f64>)>,
    pub warnings: Vec<String>,
}

impl SweepOutput {
    pub fn crossover(&self, level: usize) -> Option<f64> {
        self.crossovers
            .iter()
            .find(|(l, _)| *l == level)
            .and_then(|(_, p)| *p)
    }
}

struct PointRow {
    cells: Vec<f64>,
    warnings: Vec<String>,
}

fn gather(rows: Vec<Result<PointRow>>) -> Result<(Vec<Vec<f64>>, Vec<String>)> {
    let mut values = Vec::with_capacity(rows.len());
    let mut warnings = Vec::new();
    for r in rows {
        let r = r?;
        values.push(r.cells);
        warnings.extend(r.warnings);
    }
    Ok((values, warnings))
}

fn recoverable(e: &Error) -> bool {
    matches!(e, Error::NoSupport(_) | Error::EmptySubspace)
}

/// Writes `H` and `S` as `i,j,re,im` rows.
pub fn write_matrices(dir: &Path, stem: &str, sol: &QseSolution) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (suffix, m) in [("h", &sol.h_matrix), ("s", &sol.s_matrix)] {
        fs::write(dir.join(format!("{stem}_{suffix}.csv")), matrix_csv(m))?;
    }
    Ok(())
}

fn matrix_csv(m: &CMatrix) -> String {
    let mut out = String::from("i,j,re,im\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            out.push_str(&format!("{i},{j},{},{}\n", v.re, v.im));
        }
    }
    out
}

/// Levels that still have at least one operator after dropping.
fn drop_levels(config: &SweepConfig, levels: &[usize]) -> Vec<usize> {
    if config.drop_count == 0 || config.drop_trials == 0 {
        return Vec::new();
    }
    levels
        .iter()
        .copied()
        .filter(|&l| (1usize << l) > config.drop_count)
        .collect()
}

fn code_sweep(
    config: &SweepConfig,
    kind: &str,
    prepare: impl Fn(&DensityMatrix, f64) -> Result<DensityMatrix> + Sync,
    transform_reference: impl Fn(&StateVector) -> Result<StateVector>,
) -> Result<SweepOutput> {
    let code = config.load_code()?;
    let grid = config.grid()?;
    let levels = config.levels_up_to(code.m())?;
    let dropped = drop_levels(config, &levels);
    let psi = prepare_logical_state(&code, config.theta, config.phi)?;
    let ideal = psi.to_density();
    let reference = transform_reference(&psi)?;
    let groups: Vec<Vec<PauliString>> = levels
        .iter()
        .map(|&l| code.hierarchy_group(l))
        .collect::<Result<_>>()?;
    let targets: Vec<PauliSum> = levels
        .iter()
        .map(|&l| code_hamiltonian(&code, l))
        .collect::<Result<_>>()?;

    let rows: Vec<Result<PointRow>> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, &p)| {
            let noisy = prepare(&ideal, p)?;
            let mut warnings = Vec::new();
            let mut cells = vec![p, 2.0 * p / 3.0, 1.0 - fidelity(&noisy, &reference)?];
            let mut infid = Vec::new();
            let mut cs = Vec::new();
            for (li, &l) in levels.iter().enumerate() {
                match projected_state(&noisy, &groups[li], SUPPORT_CUTOFF) {
                    Ok((state, c)) => {
                        infid.push(1.0 - fidelity(&state, &reference)?);
                        cs.push(c);
                    }
                    Err(e) if recoverable(&e) => {
                        warnings.push(format!("p={p} l={l}: {e}"));
                        infid.push(f64::NAN);
                        cs.push(f64::NAN);
                    }
                    Err(e) => return Err(e),
                }
                if let Some(dir) = &config.dump_matrices {
                    let prob = QseProblem::new(groups[li].clone(), targets[li].clone(), noisy.clone())?;
                    match qse_correct(&prob) {
                        Ok((sol, _)) => write_matrices(dir, &format!("{kind}_p{idx:03}_l{l}"), &sol)?,
                        Err(e) if recoverable(&e) => warnings.push(format!("p={p} l={l} dump: {e}")),
                        Err(e) => return Err(e),
                    }
                }
            }
            cells.extend(infid);
            cells.extend(cs);

            let mut rng = rng_for(config.seed, idx as u64);
            for &l in &dropped {
                let li = levels.iter().position(|&x| x == l).expect("level present");
                let group = &groups[li];
                let mut trials = Vec::with_capacity(config.drop_trials);
                for _ in 0..config.drop_trials {
                    let removed = index::sample(&mut rng, group.len(), config.drop_count).into_vec();
                    let ops: Vec<PauliString> = group
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !removed.contains(i))
                        .map(|(_, m)| m.clone())
                        .collect();
                    let prob = QseProblem::new(ops, targets[li].clone(), noisy.clone())?;
                    match qse_correct(&prob) {
                        Ok((_, state)) => trials.push(1.0 - fidelity(&state, &reference)?),
                        Err(e) if recoverable(&e) => {
                            warnings.push(format!("p={p} l={l} drop trial: {e}"));
                        }
                        Err(e) => return Err(e),
                    }
                }
                if trials.is_empty() {
                    cells.extend([f64::NAN; 3]);
                } else {
                    let mean = trials.iter().sum::<f64>() / trials.len() as f64;
                    let min = trials.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = trials.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    cells.extend([mean, min, max]);
                }
            }
            Ok(PointRow { cells, warnings })
        })
        .collect();
    let (values, warnings) = gather(rows)?;

    let mut header = vec!["p".to_string(), "physical".to_string(), "bare".to_string()];
    header.extend(levels.iter().map(|l| format!("infidelity_l{l}")));
    header.extend(levels.iter().map(|l| format!("c_l{l}")));
    for l in &dropped {
        for stat in ["mean", "min", "max"] {
            header.push(format!("drop_l{l}_{stat}"));
        }
    }
    let physical: Vec<f64> = values.iter().map(|r| r[1]).collect();
    let crossovers = levels
        .iter()
        .enumerate()
        .map(|(li, &l)| {
            let curve: Vec<f64> = values.iter().map(|r| r[3 + li]).collect();
            (l, crossover(&grid, &curve, &physical))
        })
        .collect();
    let table = CsvTable {
        header,
        rows: values.iter().map(|r| r.iter().map(|&x| num(x)).collect()).collect(),
    };
    if let Some(path) = &config.out_path {
        table.write(path)?;
    }
    Ok(SweepOutput {
        table,
        crossovers,
        warnings,
    })
}

/// Logical state under per-qubit depolarizing noise, corrected at each level.
///
/// Columns: `p`, `physical` (`2p/3`), `bare`, `infidelity_l{l}` and `c_l{l}`
/// per level, then `drop_l{l}_{mean,min,max}` for QSE replicas with
/// `drop_count` group elements removed at random.
pub fn cmd_threshold(config: &SweepConfig) -> Result<SweepOutput> {
    code_sweep(
        config,
        "threshold",
        depolarize_all,
        |psi| Ok(psi.clone()),
    )
}

/// As [`cmd_threshold`] after a transversal X gate: X on every qubit followed
/// by per-qubit depolarizing. Fidelity is taken against `X̄` applied to the
/// ideal state.
pub fn cmd_transversal_x(config: &SweepConfig) -> Result<SweepOutput> {
    let code = config.load_code()?;
    if code.k() != 1 {
        return Err(Error::Argument("transversal sweep needs a single logical qubit".into()));
    }
    let all_x = PauliString::from_paulis(&vec![Pauli::X; code.n()]);
    let logical_x = code.logical_x()[0].clone();
    code_sweep(
        config,
        "transversal",
        |ideal, p| depolarize_all(&apply_pauli(ideal, &all_x)?, p),
        |psi| psi.apply_pauli(&logical_x),
    )
}

#[derive(Clone, Debug)]
pub struct MoleculeOutput {
    pub table: CsvTable,
    pub exact_energy: f64,
    /// Largest bare-to-corrected infidelity ratio at the highest level.
    pub peak_improvement: f64,
    pub warnings: Vec<String>,
}

/// Problem Hamiltonian and symmetry generators for [`cmd_molecule`].
#[derive(Clone, Debug)]
pub struct MoleculeSpec {
    pub hamiltonian: PauliSum,
    pub generators: Vec<PauliString>,
}

impl MoleculeSpec {
    /// The bundled hydrogen Hamiltonian with its three symmetry generators.
    pub fn h2() -> Self {
        let hamiltonian = PauliSum::parse_hamiltonian(H2_HAMILTONIAN).expect("bundled Hamiltonian parses");
        let generators = H2_GENERATORS
            .iter()
            .map(|g| PauliString::parse_on(4, g).expect("bundled generator parses"))
            .collect();
        MoleculeSpec {
            hamiltonian,
            generators,
        }
    }

    pub fn load(hamiltonian_path: Option<&Path>, generators: Option<&[String]>) -> Result<Self> {
        let hamiltonian = match hamiltonian_path {
            Some(p) => PauliSum::parse_hamiltonian(&fs::read_to_string(p)?)?,
            None => PauliSum::parse_hamiltonian(H2_HAMILTONIAN)?,
        };
        let n = hamiltonian.n_qubits();
        let generators = match generators {
            Some(labels) => labels
                .iter()
                .map(|g| PauliString::parse_on(n, g))
                .collect::<Result<_>>()?,
            None if hamiltonian_path.is_none() => MoleculeSpec::h2().generators,
            None => Vec::new(),
        };
        for g in &generators {
            if !g.is_hermitian() {
                return Err(Error::Argument(format!("generator {g} is not Hermitian")));
            }
        }
        Ok(MoleculeSpec {
            hamiltonian,
            generators,
        })
    }
}

/// Exact ground state of the Hamiltonian under per-qubit depolarizing noise,
/// corrected by symmetry QSE at each level.
///
/// Columns: `p`, `exact_energy`, `bare_fidelity`, `bare_infidelity`,
/// `bare_energy`, then `fidelity_l{l}`, `infidelity_l{l}`, `energy_l{l}` per
/// level, and `improvement` (bare over corrected infidelity at the highest
/// level; NaN when the bare infidelity is zero).
pub fn cmd_molecule(config: &SweepConfig, spec: &MoleculeSpec) -> Result<MoleculeOutput> {
    let grid = config.grid()?;
    let levels = config.levels_up_to(spec.generators.len())?;
    let top = *levels.last().expect("at least level 0");
    let (exact_energy, psi) = ground_state(&spec.hamiltonian)?;
    let ideal = psi.to_density();

    let rows: Vec<Result<PointRow>> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, &p)| {
            let noisy = depolarize_all(&ideal, p)?;
            let bare_f = fidelity(&noisy, &psi)?;
            let bare_e = expectation(&noisy, &spec.hamiltonian)?.re;
            let mut cells = vec![p, exact_energy, bare_f, 1.0 - bare_f, bare_e];
            let mut warnings = Vec::new();
            let mut top_infid = f64::NAN;
            for &l in &levels {
                match symmetry_qse(&noisy, &spec.generators, &spec.hamiltonian, l, Some(&psi)) {
                    Ok(r) => {
                        let f = r.fidelity.expect("reference supplied");
                        cells.extend([f, 1.0 - f, r.energy]);
                        if l == top {
                            top_infid = 1.0 - f;
                        }
                        if let Some(dir) = &config.dump_matrices {
                            write_matrices(dir, &format!("molecule_p{idx:03}_l{l}"), &r.solution)?;
                        }
                    }
                    Err(e) if recoverable(&e) => {
                        warnings.push(format!("p={p} l={l}: {e}"));
                        cells.extend([f64::NAN; 3]);
                    }
                    Err(e) => return Err(e),
                }
            }
            let bare_infid = 1.0 - bare_f;
            cells.push(if bare_infid > 0.0 {
                bare_infid / top_infid
            } else {
                f64::NAN
            });
            Ok(PointRow { cells, warnings })
        })
        .collect();
    let (values, warnings) = gather(rows)?;

    let mut header: Vec<String> = ["p", "exact_energy", "bare_fidelity", "bare_infidelity", "bare_energy"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for l in &levels {
        header.push(format!("fidelity_l{l}"));
        header.push(format!("infidelity_l{l}"));
        header.push(format!("energy_l{l}"));
    }
    header.push("improvement".into());
    let peak_improvement = values
        .iter()
        .map(|r| *r.last().expect("improvement column"))
        .filter(|x| !x.is_nan())
        .fold(f64::NAN, f64::max);
    let table = CsvTable {
        header,
        rows: values.iter().map(|r| r.iter().map(|&x| num(x)).collect()).collect(),
    };
    if let Some(path) = &config.out_path {
        table.write(path)?;
    }
    Ok(MoleculeOutput {
        table,
        exact_energy,
        peak_improvement,
        warnings,
    })
}

#[derive(Clone, Debug)]
pub struct EstimateSpec {
    pub scheme: Scheme,
    /// Shots per grid point, split evenly between numerator and `c`.
    pub shots: usize,
    /// Observable on the physical qubits; `None` selects `Z̄`.
    pub observable: Option<PauliSum>,
}

/// Shot-sampled corrected expectations of the noisy logical state across the
/// grid, three rows per point.
///
/// The first seven columns are the estimator report; then `p`, `level`,
/// `quantity` (`numerator`, `normalization` or `corrected`), `oracle` (exact
/// dense value), `standard_error`, `effective_sample_size`. The `corrected`
/// row is the ratio of the other two; its `empirical_variance` is the
/// delta-method variance scaled to one shot.
pub fn cmd_estimate(config: &SweepConfig, spec: &EstimateSpec) -> Result<CsvTable> {
    let code = config.load_code()?;
    let grid = config.grid()?;
    if spec.shots < 2 {
        return Err(Error::Argument("need at least two shots".into()));
    }
    let level = match spec.scheme {
        Scheme::Recovery => code.m(),
        _ => *config.levels_up_to(code.m())?.last().expect("non-empty"),
    };
    let obs = match &spec.observable {
        Some(o) => o.clone(),
        None => PauliSum::from_pauli(&code.logical_z()[0]),
    };
    let table = build_syndrome_table_with_priors(&code, &code.correctable_errors())?;
    let b = table.default_weights();
    let psi = prepare_logical_state(&code, config.theta, config.phi)?;
    let ideal = psi.to_density();

    let rows: Vec<Result<Vec<Vec<String>>>> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, &p)| {
            let noisy = depolarize_all(&ideal, p)?;
            let params = match spec.scheme {
                Scheme::Uniform => SchemeParams::Uniform { level },
                Scheme::Importance => SchemeParams::Importance { level, p_weight: p },
                Scheme::Recovery => SchemeParams::Recovery { table: &table, b: &b },
            };
            let oracle: CorrectionResult = match spec.scheme {
                Scheme::Recovery => recovery_corrected_expectation(&noisy, &obs, &code, &table)?,
                _ => corrected_expectation(&noisy, &obs, &code, level)?,
            };
            let r = ratio_estimate(&noisy, &code, &obs, params, spec.shots, config.seed, idx as u64)?;
            let tail = |rep: &EstimatorReport, quantity: &str, oracle: f64| {
                let mut row: Vec<String> = rep.csv_row().split(',').map(str::to_string).collect();
                row.extend([
                    num(p),
                    level.to_string(),
                    quantity.to_string(),
                    num(oracle),
                    num(rep.standard_error),
                    num(rep.effective_sample_size),
                ]);
                row
            };
            let corrected = vec![
                spec.scheme.to_string(),
                config.seed.to_string(),
                spec.shots.to_string(),
                num(r.value),
                num(spec.shots as f64 * r.standard_error.powi(2) / 4.0),
                String::new(),
                String::new(),
                num(p),
                level.to_string(),
                "corrected".to_string(),
                num(oracle.value),
                num(r.standard_error),
                String::new(),
            ];
            Ok(vec![
                tail(&r.numerator, "numerator", oracle.numerator),
                tail(&r.normalization, "normalization", oracle.c),
                corrected,
            ])
        })
        .collect();
    let mut out_rows = Vec::new();
    for r in rows {
        out_rows.extend(r?);
    }
    let mut header: Vec<String> = EstimatorReport::CSV_HEADER.split(',').map(str::to_string).collect();
    header.extend(
        ["p", "level", "quantity", "oracle", "standard_error", "effective_sample_size"]
            .iter()
            .map(|s| s.to_string()),
    );
    let table = CsvTable {
        header,
        rows: out_rows,
    };
    if let Some(path) = &config.out_path {
        table.write(path)?;
    }
    Ok(table)
}

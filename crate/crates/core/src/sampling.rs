//! Stochastic estimation of corrected expectations from single Pauli shots.
//!
//! The numerator `Tr[P ρ P Γ]` is a weighted sum of Pauli expectations
//! `Tr[ρ Γ_j S_χ]`. Each shot draws a term, simulates one ±1 measurement of
//! it, and rescales the outcome so the sample mean is unbiased.
//!
//! Shot outcomes are drawn from the exact expectation of the sampled operator,
//! which is computed once per operator before sampling starts. Every estimate
//! uses a single ChaCha8 stream; see [`rng_for`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::code::{StabilizerCode, SyndromeTable};
use crate::error::{check_qubits, Error, Result};
use crate::pauli::{Phase, PauliString, PauliSum};
use crate::projection::error_projector_terms;
use crate::sim::{pauli_expectation_action, DensityMatrix};

/// The generator for `(seed, stream)`. Sweeps use the point index as stream.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `Γ = γ̃ Σ_j γ_j Γ_j` with `γ_j ≥ 0`, `Σ γ_j = 1`, signs carried by `Γ_j`.
#[derive(Clone, Debug)]
pub struct SamplingDecomposition {
    gamma_tilde: f64,
    terms: Vec<(f64, PauliString)>,
}

impl SamplingDecomposition {
    pub fn gamma_tilde(&self) -> f64 {
        self.gamma_tilde
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn n_qubits(&self) -> usize {
        self.terms[0].1.n_qubits()
    }

    pub fn reconstruct(&self) -> PauliSum {
        let n = self.n_qubits();
        let mut out = PauliSum::zero(n);
        for (g, op) in &self.terms {
            out.push(Complex64::new(self.gamma_tilde * g, 0.0), op.clone())
                .expect("equal lengths");
        }
        out.canonical()
    }
}

pub fn decompose_for_sampling(obs: &PauliSum) -> Result<SamplingDecomposition> {
    if !obs.is_hermitian() {
        return Err(Error::Contract("observable is not Hermitian".into()));
    }
    let canon = obs.canonical();
    let gamma_tilde: f64 = canon.terms().iter().map(|(c, _)| c.re.abs()).sum();
    if canon.is_empty() || gamma_tilde == 0.0 {
        return Err(Error::Argument("cannot sample the zero operator".into()));
    }
    let terms = canon
        .terms()
        .iter()
        .map(|(c, op)| {
            let phase = if c.re < 0.0 { Phase::MINUS_ONE } else { Phase::ONE };
            (c.re.abs() / gamma_tilde, op.with_phase(op.phase().mul(phase)))
        })
        .collect();
    Ok(SamplingDecomposition { gamma_tilde, terms })
}

#[inline]
fn outcome<R: Rng + ?Sized>(expectation: f64, rng: &mut R) -> f64 {
    if rng.random::<f64>() < 0.5 * (1.0 + expectation) {
        1.0
    } else {
        -1.0
    }
}

fn hermitian_expectation(rho: &DensityMatrix, p: &PauliString) -> Result<f64> {
    if !p.is_hermitian() {
        return Err(Error::Contract(format!("{p} is not Hermitian")));
    }
    Ok(pauli_expectation_action(rho.data(), &p.basis_action()).re)
}

/// One simulated measurement of `p`: `+1` with probability `(1 + Tr[ρ p])/2`.
pub fn sample_pauli_outcome<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    p: &PauliString,
    rng: &mut R,
) -> Result<i8> {
    check_qubits(rho.n_qubits(), p.n_qubits())?;
    let v = hermitian_expectation(rho, p)?;
    Ok(if outcome(v, rng) > 0.0 { 1 } else { -1 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Uniform,
    Importance,
    Recovery,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Uniform => "uniform",
            Scheme::Importance => "importance",
            Scheme::Recovery => "recovery",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Scheme::Uniform),
            "importance" => Ok(Scheme::Importance),
            "recovery" => Ok(Scheme::Recovery),
            other => Err(Error::Argument(format!(
                "unknown scheme {other:?} (expected uniform, importance or recovery)"
            ))),
        }
    }
}

/// Variances use the 0/1-indicator convention: a shot `y = γ̃ w x` with
/// `x = ±1` contributes `Var[y]/4`, which is `γ̃² p₊(1 − p₊)` for unit weights.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorReport {
    pub scheme: Scheme,
    pub seed: u64,
    pub n_samples: usize,
    pub estimate: f64,
    pub empirical_variance: f64,
    /// Exact per-shot variance (indicator convention) of the sampling scheme.
    pub predicted_variance: Option<f64>,
    /// Probability that a shot returns `+1`.
    pub p_plus: Option<f64>,
    /// Standard error of `estimate`.
    pub standard_error: f64,
    /// `(Σw)² / Σw²` over shot weights.
    pub effective_sample_size: f64,
}

impl EstimatorReport {
    pub const CSV_HEADER: &'static str =
        "scheme,seed,n_samples,estimate,empirical_variance,predicted_variance,p_plus";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.scheme,
            self.seed,
            self.n_samples,
            self.estimate,
            self.empirical_variance,
            opt(self.predicted_variance),
            opt(self.p_plus)
        )
    }
}

/// Running moments of shot values and weights.
#[derive(Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
    w_sum: f64,
    w_sq: f64,
}

impl Moments {
    fn push(&mut self, y: f64, w: f64) {
        self.n += 1;
        let delta = y - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (y - self.mean);
        self.w_sum += w;
        self.w_sq += w * w;
    }

    fn report(
        &self,
        scheme: Scheme,
        seed: u64,
        predicted_variance: Option<f64>,
        p_plus: Option<f64>,
    ) -> EstimatorReport {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        EstimatorReport {
            scheme,
            seed,
            n_samples: self.n,
            estimate: self.mean,
            empirical_variance: var / 4.0,
            predicted_variance,
            p_plus,
            standard_error: (var / self.n as f64).sqrt(),
            effective_sample_size: self.w_sum * self.w_sum / self.w_sq,
        }
    }
}

/// One sampled operator: draw probability, shot scale, exact expectation.
struct Term {
    prob: f64,
    scale: f64,
    value: f64,
}

/// Exact `p₊` and indicator variance of `y = scale · x`.
fn exact_statistics(terms: &[Term]) -> (f64, f64) {
    let mut p_plus = 0.0;
    let mut mean = 0.0;
    let mut second = 0.0;
    for t in terms {
        p_plus += t.prob * 0.5 * (1.0 + t.value);
        mean += t.prob * t.scale * t.value;
        second += t.prob * t.scale * t.scale;
    }
    (p_plus, (second - mean * mean).max(0.0) / 4.0)
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples == 0 {
        Err(Error::Argument("n_samples must be positive".into()))
    } else {
        Ok(())
    }
}

fn check_commuting(dec: &SamplingDecomposition, group: &[PauliString]) -> Result<()> {
    for (_, g) in dec.terms() {
        for m in group {
            if !g.commutes(m)? {
                return Err(Error::Contract(format!(
                    "observable term {g} anticommutes with {m}"
                )));
            }
        }
    }
    Ok(())
}

/// `values[χ][j] = Tr[ρ Γ_j S_χ]`.
fn term_values(
    rho: &DensityMatrix,
    group: &[PauliString],
    dec: &SamplingDecomposition,
) -> Result<Vec<Vec<f64>>> {
    check_qubits(rho.n_qubits(), dec.n_qubits())?;
    check_commuting(dec, group)?;
    group
        .iter()
        .map(|s| {
            dec.terms()
                .iter()
                .map(|(_, g)| hermitian_expectation(rho, &g.multiply(s)?))
                .collect()
        })
        .collect()
}

/// Term-sampling scheme and its parameters.
#[derive(Clone, Copy, Debug)]
pub enum SchemeParams<'a> {
    /// `χ` uniform over the level-`l` group.
    Uniform { level: usize },
    /// `χ` drawn with probability proportional to `(1 - p_weight)^{W_χ}`.
    Importance { level: usize, p_weight: f64 },
    /// Entries of `table` drawn with probability `b`; always the full group.
    Recovery { table: &'a SyndromeTable, b: &'a [f64] },
}

impl SchemeParams<'_> {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeParams::Uniform { .. } => Scheme::Uniform,
            SchemeParams::Importance { .. } => Scheme::Importance,
            SchemeParams::Recovery { .. } => Scheme::Recovery,
        }
    }
}

/// Estimates `Tr[P ρ P Γ]` for the level-`l` projector, drawing `χ` uniformly
/// and `j` with probability `γ_j`. With `obs = I` this estimates `c`.
pub fn uniform_estimator(
    rho: &DensityMatrix,
    code: &StabilizerCode,
    l: usize,
    obs: &PauliSum,
    n_samples: usize,
    seed: u64,
) -> Result<EstimatorReport> {
    estimate(rho, code, obs, SchemeParams::Uniform { level: l }, n_samples, seed, 0)
}

/// As [`uniform_estimator`] but drawing `χ` with probability proportional to
/// `(1 - p_weight)^{W_χ}`, `W_χ` the Pauli weight of `S_χ`, and reweighting
/// each shot by the likelihood ratio `2^{-l} / q(χ)`.
pub fn importance_estimator(
    rho: &DensityMatrix,
    code: &StabilizerCode,
    l: usize,
    obs: &PauliSum,
    n_samples: usize,
    seed: u64,
    p_weight: f64,
) -> Result<EstimatorReport> {
    let params = SchemeParams::Importance { level: l, p_weight };
    estimate(rho, code, obs, params, n_samples, seed, 0)
}

/// Estimates `Σ_α Tr[R_α P_α ρ P_α R_α† Γ]` over the table entries, drawing
/// entry `α` with probability `b[α]` and weighting its shots by `1 / b[α]`.
/// The measured operator is `±R_α† Γ_j R_α S_χ` with the syndrome sign of
/// `S_χ` folded in. When `b` has a single nonzero entry no `α` is drawn, so
/// an identity-only distribution reproduces [`uniform_estimator`] at `l = m`
/// shot for shot.
pub fn recovery_estimator(
    rho: &DensityMatrix,
    code: &StabilizerCode,
    obs: &PauliSum,
    table: &SyndromeTable,
    b: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<EstimatorReport> {
    estimate(rho, code, obs, SchemeParams::Recovery { table, b }, n_samples, seed, 0)
}

/// Sampling plan: every operator that can be measured, grouped by the
/// outer draw (`χ`, or `(α, χ)` for recovery) and indexed by `j` within.
struct Plan {
    /// `values[o][j]`: exact expectation of the operator for outer index `o`.
    values: Vec<Vec<f64>>,
    /// Shot weight of outer index `o` (likelihood ratio or `1/b_α`).
    weights: Vec<f64>,
    /// Draw probability of outer index `o`.
    outer_prob: Vec<f64>,
}

fn build_plan(
    rho: &DensityMatrix,
    code: &StabilizerCode,
    dec: &SamplingDecomposition,
    params: &SchemeParams<'_>,
) -> Result<Plan> {
    match *params {
        SchemeParams::Uniform { level } => {
            let group = code.hierarchy_group(level)?;
            let values = term_values(rho, &group, dec)?;
            let n = group.len();
            Ok(Plan {
                values,
                weights: vec![1.0; n],
                outer_prob: vec![1.0 / n as f64; n],
            })
        }
        SchemeParams::Importance { level, p_weight } => {
            if !(0.0..1.0).contains(&p_weight) {
                return Err(Error::Argument(format!("p_weight = {p_weight} outside [0, 1)")));
            }
            let group = code.hierarchy_group(level)?;
            let values = term_values(rho, &group, dec)?;
            let raw: Vec<f64> = group
                .iter()
                .map(|s| (1.0 - p_weight).powi(s.weight() as i32))
                .collect();
            let total: f64 = raw.iter().sum();
            let proposal: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let uniform = 1.0 / group.len() as f64;
            Ok(Plan {
                values,
                weights: proposal.iter().map(|q| uniform / q).collect(),
                outer_prob: proposal,
            })
        }
        SchemeParams::Recovery { table, b } => {
            if b.len() != table.len() {
                return Err(Error::Argument(format!(
                    "{} weights for {} table entries",
                    b.len(),
                    table.len()
                )));
            }
            if b.iter().any(|&x| !(x >= 0.0)) || (b.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::Argument("recovery weights are not a distribution".into()));
            }
            let group = code.hierarchy_group(code.m())?;
            check_qubits(rho.n_qubits(), dec.n_qubits())?;
            check_commuting(dec, &group)?;
            let mut plan = Plan {
                values: Vec::new(),
                weights: Vec::new(),
                outer_prob: Vec::new(),
            };
            let chi_prob = 1.0 / group.len() as f64;
            for (a, entry) in table.entries().iter().enumerate() {
                if b[a] <= 0.0 {
                    continue;
                }
                let signs = error_projector_terms(code, &entry.syndrome)?;
                let r = &entry.recovery;
                for (w, s) in &signs {
                    let sign = if *w < 0.0 { Phase::MINUS_ONE } else { Phase::ONE };
                    let mut row = Vec::with_capacity(dec.terms().len());
                    for (_, g) in dec.terms() {
                        let op = r.adjoint().multiply(g)?.multiply(r)?.multiply(s)?;
                        row.push(hermitian_expectation(rho, &op.with_phase(op.phase().mul(sign)))?);
                    }
                    plan.values.push(row);
                    plan.weights.push(1.0 / b[a]);
                    plan.outer_prob.push(b[a] * chi_prob);
                }
            }
            Ok(plan)
        }
    }
}

/// Runs `n_samples` shots of the scheme on stream `stream` of `seed`.
///
/// Draw order per shot: `χ`, then `j`, then `α` (recovery with more than one
/// supported entry), then the outcome.
pub fn estimate(
    rho: &DensityMatrix,
    code: &StabilizerCode,
    obs: &PauliSum,
    params: SchemeParams<'_>,
    n_samples: usize,
    seed: u64,
    stream: u64,
) -> Result<EstimatorReport> {
    check_samples(n_samples)?;
    let dec = decompose_for_sampling(obs)?;
    let plan = build_plan(rho, code, &dec, &params)?;
    let gt = dec.gamma_tilde();
    let err = |e: rand::distr::weighted::Error| Error::Argument(e.to_string());
    let pick_j = WeightedIndex::new(dec.terms().iter().map(|(g, _)| *g)).map_err(err)?;

    let mut rng = rng_for(seed, stream);
    let mut acc = Moments::default();
    match params {
        SchemeParams::Uniform { .. } => {
            let n_chi = plan.values.len();
            for _ in 0..n_samples {
                let chi = rng.random_range(0..n_chi);
                let j = pick_j.sample(&mut rng);
                acc.push(gt * outcome(plan.values[chi][j], &mut rng), 1.0);
            }
        }
        SchemeParams::Importance { .. } => {
            let pick_chi = WeightedIndex::new(&plan.outer_prob).map_err(err)?;
            for _ in 0..n_samples {
                let chi = pick_chi.sample(&mut rng);
                let j = pick_j.sample(&mut rng);
                let w = plan.weights[chi];
                acc.push(gt * w * outcome(plan.values[chi][j], &mut rng), w);
            }
        }
        SchemeParams::Recovery { b, .. } => {
            let n_chi = 1usize << code.m();
            let support: Vec<f64> = b.iter().copied().filter(|&x| x > 0.0).collect();
            let pick_a = if support.len() > 1 {
                Some(WeightedIndex::new(&support).map_err(err)?)
            } else {
                None
            };
            for _ in 0..n_samples {
                let chi = rng.random_range(0..n_chi);
                let j = pick_j.sample(&mut rng);
                let a = pick_a.as_ref().map_or(0, |d| d.sample(&mut rng));
                let o = a * n_chi + chi;
                let w = plan.weights[o];
                acc.push(gt * w * outcome(plan.values[o][j], &mut rng), w);
            }
        }
    }

    let mut terms = Vec::new();
    for (o, row) in plan.values.iter().enumerate() {
        for (&v, (g, _)) in row.iter().zip(dec.terms()) {
            terms.push(Term {
                prob: plan.outer_prob[o] * g,
                scale: gt * plan.weights[o],
                value: v,
            });
        }
    }
    let (p_plus, predicted) = exact_statistics(&terms);
    Ok(acc.report(params.scheme(), seed, Some(predicted), Some(p_plus)))
}

/// A corrected value estimated as the ratio of independent estimates of the
/// numerator and of `c`, each given half the shot budget.
#[derive(Clone, Debug)]
pub struct RatioEstimate {
    pub value: f64,
    /// First-order (delta method) standard error of `value`.
    pub standard_error: f64,
    pub numerator: EstimatorReport,
    pub normalization: EstimatorReport,
}

/// Ratio estimate for sweep point `point`: the numerator uses stream
/// `2 * point` and `c` uses stream `2 * point + 1` of `seed`. The ratio of two
/// unbiased estimates carries an `O(1/N)` bias.
pub fn ratio_estimate(
    rho: &DensityMatrix,
    code: &StabilizerCode,
    obs: &PauliSum,
    params: SchemeParams<'_>,
    n_samples: usize,
    seed: u64,
    point: u64,
) -> Result<RatioEstimate> {
    if n_samples < 2 {
        return Err(Error::Argument("ratio estimate needs at least two shots".into()));
    }
    let half = n_samples / 2;
    let numerator = estimate(rho, code, obs, params, half, seed, 2 * point)?;
    let identity = PauliSum::identity(rho.n_qubits());
    let normalization = estimate(rho, code, &identity, params, n_samples - half, seed, 2 * point + 1)?;
    let (a, b) = (numerator.estimate, normalization.estimate);
    let value = a / b;
    let var = (numerator.standard_error / b).powi(2)
        + (a * normalization.standard_error / (b * b)).powi(2);
    Ok(RatioEstimate {
        value,
        standard_error: var.sqrt(),
        numerator,
        normalization,
    })
}

/// `Σ_χ p_{χ,j,x}` by enumeration over the level-`l` group, uniform `χ`.
/// Entry `[j][0]` is `x = +1`, `[j][1]` is `x = -1`.
pub fn chi_marginal(
    rho: &DensityMatrix,
    code: &StabilizerCode,
    l: usize,
    dec: &SamplingDecomposition,
) -> Result<Vec<[f64; 2]>> {
    let group = code.hierarchy_group(l)?;
    let values = term_values(rho, &group, dec)?;
    let scale = 1.0 / group.len() as f64;
    let mut out = vec![[0.0; 2]; dec.terms().len()];
    for row in &values {
        for (j, &v) in row.iter().enumerate() {
            let g = dec.terms()[j].0;
            out[j][0] += scale * g * 0.5 * (1.0 + v);
            out[j][1] += scale * g * 0.5 * (1.0 - v);
        }
    }
    Ok(out)
}

/// Closed form of [`chi_marginal`]: `(γ_j / 2)(1 + x Tr[ρ Γ_j P])`.
pub fn chi_marginal_closed_form(
    rho: &DensityMatrix,
    code: &StabilizerCode,
    l: usize,
    dec: &SamplingDecomposition,
) -> Result<Vec<[f64; 2]>> {
    let group = code.hierarchy_group(l)?;
    let values = term_values(rho, &group, dec)?;
    let scale = 1.0 / group.len() as f64;
    Ok(dec
        .terms()
        .iter()
        .enumerate()
        .map(|(j, (g, _))| {
            let proj: f64 = values.iter().map(|row| row[j]).sum::<f64>() * scale;
            [0.5 * g * (1.0 + proj), 0.5 * g * (1.0 - proj)]
        })
        .collect())
}

/// `(1/2)(1 + x Tr[ρ P]) p_{j,x}` with `p_{j,x} = γ_j (1 + x Tr[ρ Γ_j])/2` the
/// direct-measurement distribution.
pub fn chi_marginal_factorized(
    rho: &DensityMatrix,
    code: &StabilizerCode,
    l: usize,
    dec: &SamplingDecomposition,
) -> Result<Vec<[f64; 2]>> {
    let group = code.hierarchy_group(l)?;
    check_qubits(rho.n_qubits(), dec.n_qubits())?;
    let mut c = 0.0;
    for s in &group {
        c += hermitian_expectation(rho, s)?;
    }
    c /= group.len() as f64;
    dec.terms()
        .iter()
        .map(|(g, op)| {
            let v = hermitian_expectation(rho, op)?;
            let plus = g * 0.5 * (1.0 + v);
            let minus = g * 0.5 * (1.0 - v);
            Ok([0.5 * (1.0 + c) * plus, 0.5 * (1.0 - c) * minus])
        })
        .collect()
}

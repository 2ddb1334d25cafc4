//! Simulated-annealing searches over normalized complex amplitude blocks.

use std::io::Write;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antistate::order_of_index;
use crate::correlations::{tensor_entry, PauliTransform};
use crate::error::{Error, Result};
use crate::gme::biproduct_condition;
use crate::linalg::partial_trace;
use crate::state::{Partition, PureState, C64, DEFAULT_MAX_QUBITS};

/// Objective value below which a run counts as converged.
pub const CONVERGENCE_THRESHOLD: f64 = 1e-6;
/// Steps between audits of the fast objective against the word kernel.
pub const AUDIT_INTERVAL: u64 = 1000;
pub const AUDIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnealMode {
    FixedTarget,
    CoAnneal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealConfig {
    pub initial_temperature: f64,
    pub cooling_factor: f64,
    pub steps_per_temperature: u64,
    pub min_temperature: f64,
    /// Norm of a move relative to the temperature.
    pub step_scale: f64,
    pub seed: u64,
    pub mode: AnnealMode,
    /// Rescale moves after each level to keep the acceptance rate between
    /// 0.2 and 0.5.
    pub adapt_step: bool,
    /// Independent chains from fresh random starts; the best is kept.
    pub restarts: u32,
    /// Restarted chains stop at this temperature and only the best one
    /// continues to `min_temperature`. `None` runs every chain to the end.
    pub restart_min_temperature: Option<f64>,
    /// Stop once the best objective drops below this value.
    pub stop_below: Option<f64>,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            initial_temperature: 1.0,
            cooling_factor: 0.98,
            steps_per_temperature: 500,
            min_temperature: 1e-8,
            step_scale: 1.0,
            seed: 0,
            mode: AnnealMode::FixedTarget,
            adapt_step: true,
            restarts: 1,
            restart_min_temperature: None,
            stop_below: None,
        }
    }
}

impl AnnealConfig {
    /// Schedule used for existence evidence: fast cooling to a low floor,
    /// with enough restarts to escape the trapping basins seen for W-type
    /// targets.
    pub fn evidence() -> Self {
        AnnealConfig {
            cooling_factor: 0.8,
            steps_per_temperature: 100,
            min_temperature: 1e-9,
            restarts: 20,
            restart_min_temperature: Some(1e-3),
            stop_below: Some(1e-7),
            ..AnnealConfig::default()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        AnnealConfig { seed, ..self.clone() }
    }

    pub fn with_mode(&self, mode: AnnealMode) -> Self {
        AnnealConfig { mode, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.initial_temperature.is_finite() && self.initial_temperature > 0.0) {
            return bad("initial_temperature must be positive");
        }
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return bad("cooling_factor must lie in (0, 1)");
        }
        if self.steps_per_temperature == 0 {
            return bad("steps_per_temperature must be positive");
        }
        if !(self.min_temperature > 0.0 && self.min_temperature <= self.initial_temperature) {
            return bad("min_temperature must lie in (0, initial_temperature]");
        }
        if !(self.step_scale.is_finite() && self.step_scale > 0.0) {
            return bad("step_scale must be positive");
        }
        if self.restarts == 0 {
            return bad("restarts must be positive");
        }
        if let Some(t) = self.restart_min_temperature {
            if !(t >= self.min_temperature && t <= self.initial_temperature) {
                return bad("restart_min_temperature must lie in [min_temperature, initial_temperature]");
            }
        }
        Ok(())
    }

    fn levels_to(&self, floor: f64) -> u64 {
        let ratio = (floor / self.initial_temperature).ln() / self.cooling_factor.ln();
        (ratio + 1e-9).floor() as u64 + 1
    }

    /// Number of temperature levels of the geometric schedule.
    pub fn levels(&self) -> u64 {
        self.levels_to(self.min_temperature)
    }

    /// Upper bound on the number of moves of one run.
    pub fn total_steps(&self) -> u64 {
        let per_level = self.steps_per_temperature;
        match self.restart_min_temperature {
            Some(floor) => {
                let explore = self.levels_to(floor);
                (self.restarts as u64 * explore + self.levels() - explore) * per_level
            }
            None => self.restarts as u64 * self.levels() * per_level,
        }
    }
}

/// Best objective at the end of one temperature level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub step: u64,
    pub temperature: f64,
    pub objective: f64,
}

pub fn write_trace_csv<W: Write>(trace: &[TracePoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "step,temperature,objective")?;
    for p in trace {
        writeln!(out, "{},{:e},{:e}", p.step, p.temperature, p.objective)?;
    }
    Ok(())
}

/// Shape of the search space: one unit vector per block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSearch {
    pub block_dims: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct BlockResult {
    pub best_blocks: Vec<Vec<C64>>,
    pub best_objective: f64,
    pub trace: Vec<TracePoint>,
    pub steps: u64,
}

/// An objective on unit-vector blocks.
pub trait Objective {
    fn value(&mut self, blocks: &[Vec<C64>]) -> f64;

    /// Periodic consistency hook, given the value just computed.
    fn audit(&mut self, _blocks: &[Vec<C64>], _value: f64) -> Result<()> {
        Ok(())
    }
}

impl<F: FnMut(&[Vec<C64>]) -> f64> Objective for F {
    fn value(&mut self, blocks: &[Vec<C64>]) -> f64 {
        self(blocks)
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn normalize(v: &mut [C64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
}

struct Chain {
    state: Vec<Vec<C64>>,
    value: f64,
    gain: f64,
}

struct Runner<'a, O: Objective> {
    cfg: &'a AnnealConfig,
    objective: O,
    rng: ChaCha8Rng,
    /// Per-coordinate deviation of a move of unit norm.
    unit_sigma: f64,
    proposal: Vec<Vec<C64>>,
    best: Chain,
    trace: Vec<TracePoint>,
    step: u64,
}

impl<O: Objective> Runner<'_, O> {
    fn random_chain(&mut self) -> Result<Chain> {
        let state: Vec<Vec<C64>> = self
            .proposal
            .iter()
            .map(|block| {
                let mut v: Vec<C64> = (0..block.len()).map(|_| gaussian(&mut self.rng)).collect();
                normalize(&mut v);
                v
            })
            .collect();
        let value = self.objective.value(&state);
        self.objective.audit(&state, value)?;
        Ok(Chain { state, value, gain: 1.0 })
    }

    fn record_best(&mut self, chain: &Chain) {
        if chain.value < self.best.value {
            self.best.value = chain.value;
            self.best.state.clone_from(&chain.state);
            self.best.gain = chain.gain;
        }
    }

    fn stopped(&self) -> bool {
        self.cfg.stop_below.is_some_and(|limit| self.best.value < limit)
    }

    /// Runs levels `first..end` of the schedule; returns true on early stop.
    fn run_levels(&mut self, chain: &mut Chain, first: u64, end: u64) -> Result<bool> {
        for level in first..end {
            let temperature = self.cfg.initial_temperature * self.cfg.cooling_factor.powi(level as i32);
            let max_gain = 1.0 / (self.cfg.step_scale * temperature * self.unit_sigma);
            let sigma = self.cfg.step_scale * temperature * chain.gain * self.unit_sigma;
            let mut accepted = 0u64;
            for _ in 0..self.cfg.steps_per_temperature {
                self.step += 1;
                for (p, c) in self.proposal.iter_mut().zip(&chain.state) {
                    for (z, &x) in p.iter_mut().zip(c) {
                        *z = x + gaussian(&mut self.rng) * sigma;
                    }
                    normalize(p);
                }
                let value = self.objective.value(&self.proposal);
                if self.step.is_multiple_of(AUDIT_INTERVAL) {
                    self.objective.audit(&self.proposal, value)?;
                }
                let delta = value - chain.value;
                let u: f64 = self.rng.random();
                if delta <= 0.0 || u < (-delta / temperature).exp() {
                    std::mem::swap(&mut chain.state, &mut self.proposal);
                    chain.value = value;
                    accepted += 1;
                    self.record_best(chain);
                    if self.stopped() {
                        self.trace.push(TracePoint { step: self.step, temperature, objective: self.best.value });
                        return Ok(true);
                    }
                }
            }
            self.trace.push(TracePoint { step: self.step, temperature, objective: self.best.value });
            if self.cfg.adapt_step {
                let rate = accepted as f64 / self.cfg.steps_per_temperature as f64;
                if rate > 0.5 {
                    chain.gain *= 1.5;
                } else if rate < 0.2 {
                    chain.gain /= 1.5;
                }
                chain.gain = chain.gain.min(max_gain / self.cfg.cooling_factor);
            }
        }
        Ok(false)
    }
}

/// Metropolis annealing with geometric cooling over unit vectors. A move
/// adds a complex Gaussian whose expected norm is `step_scale * T` (times
/// the adaptive gain) to the concatenated blocks, then renormalizes each
/// block.
pub fn minimize_blocks<O: Objective>(search: &BlockSearch, cfg: &AnnealConfig, objective: O) -> Result<BlockResult> {
    cfg.validate()?;
    if search.block_dims.is_empty() || search.block_dims.contains(&0) {
        return Err(Error::InvalidConfig("every block needs a positive dimension".into()));
    }
    let total: usize = search.block_dims.iter().sum();
    let mut runner = Runner {
        cfg,
        objective,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        unit_sigma: 1.0 / (2.0 * total as f64).sqrt(),
        proposal: search.block_dims.iter().map(|&d| vec![C64::new(0.0, 0.0); d]).collect(),
        best: Chain { state: Vec::new(), value: f64::INFINITY, gain: 1.0 },
        trace: Vec::new(),
        step: 0,
    };

    let levels = cfg.levels();
    let explore = cfg.restart_min_temperature.map_or(levels, |floor| cfg.levels_to(floor).min(levels));
    'restarts: for _ in 0..cfg.restarts {
        let mut chain = runner.random_chain()?;
        runner.record_best(&chain);
        if runner.trace.is_empty() {
            runner.trace.push(TracePoint { step: 0, temperature: cfg.initial_temperature, objective: chain.value });
        }
        if runner.stopped() || runner.run_levels(&mut chain, 0, explore)? {
            break 'restarts;
        }
    }
    if explore < levels && !runner.stopped() {
        let mut chain = Chain { state: runner.best.state.clone(), value: runner.best.value, gain: runner.best.gain };
        runner.run_levels(&mut chain, explore, levels)?;
    }
    Ok(BlockResult {
        best_blocks: runner.best.state,
        best_objective: runner.best.value,
        trace: runner.trace,
        steps: runner.step,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AnnealResult {
    #[serde(serialize_with = "serialize_state")]
    pub best_candidate: PureState,
    pub best_objective: f64,
    pub converged_to_zero: bool,
    pub seed: u64,
    pub steps: u64,
    pub trace: Vec<TracePoint>,
}

fn serialize_state<S: serde::Serializer>(state: &PureState, s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::state::PureStateFile::from(state).serialize(s)
}

fn block_state(n: usize, block: &[C64]) -> PureState {
    PureState::from_normalized_unchecked(n, DVector::from_column_slice(block))
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > DEFAULT_MAX_QUBITS {
        return Err(Error::QubitCapExceeded { n, cap: DEFAULT_MAX_QUBITS });
    }
    Ok(())
}

/// Word-kernel value of `L(½|a><a| + ½|b><b|)`.
fn mixture_length_by_words(a: &PureState, b: &PureState, transform: &PauliTransform) -> Result<f64> {
    let count = 3usize.pow(a.n_qubits() as u32);
    let mut sum = 0.0;
    for index in 0..count {
        let word = transform.word(index);
        let t = 0.5 * (tensor_entry(a, &word)? + tensor_entry(b, &word)?);
        sum += t * t;
    }
    Ok(sum)
}

/// `L(½|ψ><ψ| + ½|φ><φ|)` with `ψ` fixed.
struct FixedTargetLength {
    target: PureState,
    target_values: Vec<f64>,
    transform: PauliTransform,
}

impl FixedTargetLength {
    fn new(target: &PureState) -> Self {
        let mut transform = PauliTransform::full_order(target.n_qubits());
        let target_values = transform.pure(target.amplitudes().as_slice()).to_vec();
        FixedTargetLength { target: target.clone(), target_values, transform }
    }
}

impl Objective for FixedTargetLength {
    fn value(&mut self, blocks: &[Vec<C64>]) -> f64 {
        let values = self.transform.pure(&blocks[0]);
        0.25 * values.iter().zip(&self.target_values).map(|(a, b)| (a + b) * (a + b)).sum::<f64>()
    }

    fn audit(&mut self, blocks: &[Vec<C64>], value: f64) -> Result<()> {
        let phi = block_state(self.target.n_qubits(), &blocks[0]);
        let reference = mixture_length_by_words(&self.target, &phi, &self.transform)?;
        audit_values(value, reference)
    }
}

fn audit_values(fast: f64, reference: f64) -> Result<()> {
    if (fast - reference).abs() > AUDIT_TOLERANCE {
        return Err(Error::Consistency(format!("fast objective {fast:e} disagrees with word kernel {reference:e}")));
    }
    Ok(())
}

/// Searches for `φ` minimizing the length of correlation of
/// `½|ψ><ψ| + ½|φ><φ|`; a zero is an anti-state of `ψ`.
pub fn anneal_antistate(target: &PureState, cfg: &AnnealConfig) -> Result<AnnealResult> {
    if cfg.mode != AnnealMode::FixedTarget {
        return Err(Error::InvalidConfig("anneal_antistate needs mode fixed_target".into()));
    }
    let n = target.n_qubits();
    check_size(n)?;
    let search = BlockSearch { block_dims: vec![target.dim()] };
    let r = minimize_blocks(&search, cfg, FixedTargetLength::new(target))?;
    Ok(AnnealResult {
        best_candidate: block_state(n, &r.best_blocks[0]),
        best_objective: r.best_objective,
        converged_to_zero: r.best_objective < CONVERGENCE_THRESHOLD,
        seed: cfg.seed,
        steps: r.steps,
        trace: r.trace,
    })
}

/// Independent chains, one per seed, run in parallel; results keep the
/// order of `seeds`.
pub fn anneal_many(target: &PureState, cfg: &AnnealConfig, seeds: &[u64]) -> Result<Vec<AnnealResult>> {
    seeds.par_iter().map(|&seed| anneal_antistate(target, &cfg.with_seed(seed))).collect()
}

/// Per-state product structure across single-qubit cuts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    /// Purity of each single-qubit reduced state of `ψ` and of `φ`.
    pub psi_purities: Vec<f64>,
    pub phi_purities: Vec<f64>,
    /// Fidelity between the single-qubit states of `ψ` and `φ`.
    pub local_fidelities: Vec<f64>,
    /// Bi-product condition on each single-qubit cut for `ψ` and `φ`, to
    /// within `tolerance`.
    pub psi_biproduct: Vec<bool>,
    pub phi_biproduct: Vec<bool>,
    /// Qubits that both states factor off as pure states. The two local
    /// states may be equal or orthogonal; see `local_fidelities`.
    pub common_product_qubits: Vec<usize>,
    pub tolerance: f64,
}

pub const STRUCTURE_TOLERANCE: f64 = 1e-3;

/// Purity and bi-product checks of both states on every `1 : (n - 1)` cut.
pub fn structure_report(psi: &PureState, phi: &PureState, tolerance: f64) -> Result<StructureReport> {
    let n = psi.n_qubits();
    let (rho_psi, rho_phi) = (psi.to_density(), phi.to_density());
    let mut report = StructureReport {
        psi_purities: Vec::new(),
        phi_purities: Vec::new(),
        local_fidelities: Vec::new(),
        psi_biproduct: Vec::new(),
        phi_biproduct: Vec::new(),
        common_product_qubits: Vec::new(),
        tolerance,
    };
    if n < 2 {
        return Ok(report);
    }
    for q in 0..n {
        // Keep qubit q by tracing out everything else.
        let others: Vec<usize> = (0..n).filter(|&k| k != q).collect();
        let trace_out = Partition::from_qubits(n, &others)?;
        let a = partial_trace(&rho_psi, &trace_out)?;
        let b = partial_trace(&rho_phi, &trace_out)?;
        let (pa, pb) = (a.purity(), b.purity());
        let fidelity = (a.matrix().adjoint() * b.matrix()).trace().re;
        report.psi_purities.push(pa);
        report.phi_purities.push(pb);
        report.local_fidelities.push(fidelity);

        let cut = Partition::from_qubits(n, &[q])?;
        let pair = Some((q, if q == 0 { 1 } else { 0 }));
        let cut_pair = |s: &PureState| biproduct_condition(s, &cut, pair).map(|c| (c.lhs - c.rhs).abs() <= tolerance);
        report.psi_biproduct.push(cut_pair(psi)?);
        report.phi_biproduct.push(cut_pair(phi)?);
        if pa > 1.0 - tolerance && pb > 1.0 - tolerance {
            report.common_product_qubits.push(q);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct CoAnnealResult {
    #[serde(serialize_with = "serialize_state")]
    pub psi: PureState,
    #[serde(serialize_with = "serialize_state")]
    pub phi: PureState,
    pub result: AnnealResult,
    /// Present when the run converged.
    pub structure: Option<StructureReport>,
}

struct PairLength {
    n: usize,
    transform: PauliTransform,
}

impl Objective for PairLength {
    fn value(&mut self, blocks: &[Vec<C64>]) -> f64 {
        let a = self.transform.pure(&blocks[0]).to_vec();
        let b = self.transform.pure(&blocks[1]);
        0.25 * a.iter().zip(b).map(|(x, y)| (x + y) * (x + y)).sum::<f64>()
    }

    fn audit(&mut self, blocks: &[Vec<C64>], value: f64) -> Result<()> {
        let psi = block_state(self.n, &blocks[0]);
        let phi = block_state(self.n, &blocks[1]);
        audit_values(value, mixture_length_by_words(&psi, &phi, &self.transform)?)
    }
}

/// Varies both states of the even mixture.
pub fn co_anneal(n: usize, cfg: &AnnealConfig) -> Result<CoAnnealResult> {
    if cfg.mode != AnnealMode::CoAnneal {
        return Err(Error::InvalidConfig("co_anneal needs mode co_anneal".into()));
    }
    check_size(n)?;
    let search = BlockSearch { block_dims: vec![1 << n, 1 << n] };
    let objective = PairLength { n, transform: PauliTransform::full_order(n) };
    let r = minimize_blocks(&search, cfg, objective)?;
    let psi = block_state(n, &r.best_blocks[0]);
    let phi = block_state(n, &r.best_blocks[1]);
    let converged = r.best_objective < CONVERGENCE_THRESHOLD;
    let structure = if converged { Some(structure_report(&psi, &phi, STRUCTURE_TOLERANCE)?) } else { None };
    Ok(CoAnnealResult {
        psi,
        phi: phi.clone(),
        result: AnnealResult {
            best_candidate: phi,
            best_objective: r.best_objective,
            converged_to_zero: converged,
            seed: cfg.seed,
            steps: r.steps,
            trace: r.trace,
        },
        structure,
    })
}

/// `Σ (T(φ) + T(ψ))²` over words of even order `k > 0` and of full order,
/// plus `Σ (T(φ) - T(ψ))²` over words of odd order `k < n`: zero exactly
/// when `φ` flips the even orders and preserves the odd ones.
struct EvenFlipObjective {
    n: usize,
    target: PureState,
    target_values: Vec<f64>,
    /// `+1` to flip, `-1` to preserve, `0` to skip, per word.
    signs: Vec<f64>,
    transform: PauliTransform,
}

fn even_flip_sign(order: usize, n: usize) -> f64 {
    if order == 0 {
        0.0
    } else if order == n || order.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl EvenFlipObjective {
    fn new(target: &PureState) -> Self {
        let n = target.n_qubits();
        let mut transform = PauliTransform::all_orders(n);
        let target_values = transform.pure(target.amplitudes().as_slice()).to_vec();
        let signs = (0..target_values.len()).map(|i| even_flip_sign(order_of_index(i, n), n)).collect();
        EvenFlipObjective { n, target: target.clone(), target_values, signs, transform }
    }
}

impl Objective for EvenFlipObjective {
    fn value(&mut self, blocks: &[Vec<C64>]) -> f64 {
        let values = self.transform.pure(&blocks[0]);
        values
            .iter()
            .zip(&self.target_values)
            .zip(&self.signs)
            .map(|((a, b), s)| {
                let d = a + s * b;
                s.abs() * d * d
            })
            .sum()
    }

    fn audit(&mut self, blocks: &[Vec<C64>], value: f64) -> Result<()> {
        let phi = block_state(self.n, &blocks[0]);
        let mut reference = 0.0;
        for (index, &s) in self.signs.iter().enumerate() {
            if s != 0.0 {
                let word = self.transform.word(index);
                let d = tensor_entry(&phi, &word)? + s * tensor_entry(&self.target, &word)?;
                reference += d * d;
            }
        }
        audit_values(value, reference)
    }
}

/// Searches for a partner that negates every even-order and full-order
/// correlation of `ψ` while keeping the odd orders.
pub fn anneal_even_order_flip(target: &PureState, cfg: &AnnealConfig) -> Result<AnnealResult> {
    if cfg.mode != AnnealMode::FixedTarget {
        return Err(Error::InvalidConfig("anneal_even_order_flip needs mode fixed_target".into()));
    }
    let n = target.n_qubits();
    check_size(n)?;
    let search = BlockSearch { block_dims: vec![target.dim()] };
    let r = minimize_blocks(&search, cfg, EvenFlipObjective::new(target))?;
    Ok(AnnealResult {
        best_candidate: block_state(n, &r.best_blocks[0]),
        best_objective: r.best_objective,
        converged_to_zero: r.best_objective < CONVERGENCE_THRESHOLD,
        seed: cfg.seed,
        steps: r.steps,
        trace: r.trace,
    })
}

//! Exact system-plus-bath evolution and the collision-order reversal
//! experiment.
//!
//! The register holds the system (qubit 0) and one fresh ancilla per collision
//! (qubits `1..=n`, in collision order). Every collision is a unitary, so the
//! joint evolution can always be undone, but only by replaying the machines in
//! the exact reverse order on the right ancillas. The record of that order is
//! the classical key.
//!
//! Two representations are supported:
//!
//! - [`Mode::Exact`]: the joint density matrix with ancillas in `ξ^{⊗n}`
//!   (up to 11 ancillas);
//! - [`Mode::Sampled`]: a pure joint vector with each ancilla drawn from
//!   `|0⟩` (probability `p`) or `|1⟩`, which averages to the exact mode since
//!   `ξ` is diagonal (up to 20 ancillas).
//!
//! Gates act in place on the two affected tensor indices; the full
//! `2^{n+1}`-dimensional unitary is never formed.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{bath_state, BathSpec};
use crate::error::{Error, Result};
use crate::linalg::{fidelity, trace_distance, ComplexMatrix, DensityMatrix};
use crate::machines::{build_machine, MachineParams};

pub const MAX_EXACT_ANCILLAS: usize = 11;
pub const MAX_SAMPLED_ANCILLAS: usize = 20;

/// Wrong-order samples drawn when the permutations are not enumerated.
pub const DEFAULT_WRONG_ORDER_TRIALS: usize = 200;
/// Up to this many collisions every wrong order is enumerated.
pub const ENUMERATE_UP_TO: usize = 5;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Sampled,
}

impl Mode {
    pub fn max_ancillas(self) -> usize {
        match self {
            Mode::Exact => MAX_EXACT_ANCILLAS,
            Mode::Sampled => MAX_SAMPLED_ANCILLAS,
        }
    }
}

/// One collision: which ancilla met the system, through which machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Collision {
    pub ancilla: usize,
    pub machine: MachineParams,
}

/// Ordered list of collisions, plus the sampled ancilla preparations in
/// sampled mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionRecord {
    collisions: Vec<Collision>,
    outcomes: Option<Vec<u8>>,
}

impl CollisionRecord {
    pub fn collisions(&self) -> &[Collision] {
        &self.collisions
    }

    pub fn outcomes(&self) -> Option<&[u8]> {
        self.outcomes.as_deref()
    }

    pub fn len(&self) -> usize {
        self.collisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.collisions.is_empty()
    }

    /// The key: indices of the record in reverse.
    pub fn reverse_order(&self) -> Vec<usize> {
        (0..self.len()).rev().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// Row-major joint density matrix.
    Density(Vec<Complex64>),
    Pure(Vec<Complex64>),
}

/// Joint state of the system and its ancillas.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    qubits: usize,
    repr: Repr,
}

type Gate = [[Complex64; 4]; 4];

fn gate_of(u: &ComplexMatrix) -> Gate {
    let mut g = [[ZERO; 4]; 4];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = u[(i, j)];
        }
    }
    g
}

fn adjoint(g: &Gate) -> Gate {
    let mut a = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            a[i][j] = g[j][i].conj();
        }
    }
    a
}

/// Bit masks of qubits `a`, `b` in a register of `qubits` qubits.
fn masks(qubits: usize, a: usize, b: usize) -> (usize, usize) {
    (1 << (qubits - 1 - a), 1 << (qubits - 1 - b))
}

/// Base indices with both target bits cleared, and the four offsets of the
/// gate basis `|00⟩, |01⟩, |10⟩, |11⟩` (first qubit = `a`).
fn groups(dim: usize, ma: usize, mb: usize) -> impl Iterator<Item = [usize; 4]> {
    (0..dim)
        .filter(move |i| i & (ma | mb) == 0)
        .map(move |base| [base, base | mb, base | ma, base | ma | mb])
}

/// `x ← G x` on the entries `x[offset + stride·idx]`.
fn apply_strided(data: &mut [Complex64], g: &Gate, idx: &[usize; 4], offset: usize, stride: usize) {
    let old = idx.map(|i| data[offset + stride * i]);
    for (r, &i) in idx.iter().enumerate() {
        data[offset + stride * i] = (0..4).map(|c| g[r][c] * old[c]).sum();
    }
}

impl JointState {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn ancillas(&self) -> usize {
        self.qubits - 1
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn mode(&self) -> Mode {
        match self.repr {
            Repr::Density(_) => Mode::Exact,
            Repr::Pure(_) => Mode::Sampled,
        }
    }

    /// `U` on qubits `(a, b)`, `U` written in the basis `|q_a q_b⟩`.
    fn apply_gate(&mut self, a: usize, b: usize, g: &Gate) {
        let dim = self.dim();
        let (ma, mb) = masks(self.qubits, a, b);
        match &mut self.repr {
            Repr::Pure(psi) => {
                for idx in groups(dim, ma, mb) {
                    apply_strided(psi, g, &idx, 0, 1);
                }
            }
            Repr::Density(rho) => {
                // ρ ← U ρ: every column
                for col in 0..dim {
                    for idx in groups(dim, ma, mb) {
                        apply_strided(rho, g, &idx, col, dim);
                    }
                }
                // ρ ← ρ U†: every row, (ρU†)ᵀ = U* ρᵀ
                let gc = g.map(|row| row.map(|z| z.conj()));
                for row in 0..dim {
                    for idx in groups(dim, ma, mb) {
                        apply_strided(rho, &gc, &idx, row * dim, 1);
                    }
                }
            }
        }
    }

    /// Reduced state of a single qubit.
    pub fn reduced(&self, qubit: usize) -> Result<DensityMatrix> {
        if qubit >= self.qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                qubits: self.qubits,
            });
        }
        let dim = self.dim();
        let m = 1 << (self.qubits - 1 - qubit);
        let mut out = [[ZERO; 2]; 2];
        for rest in (0..dim).filter(|i| i & m == 0) {
            for (x, ix) in [rest, rest | m].into_iter().enumerate() {
                for (y, iy) in [rest, rest | m].into_iter().enumerate() {
                    out[x][y] += match &self.repr {
                        Repr::Density(rho) => rho[ix * dim + iy],
                        Repr::Pure(psi) => psi[ix] * psi[iy].conj(),
                    };
                }
            }
        }
        let mat = ComplexMatrix::new(2, &[out[0][0], out[0][1], out[1][0], out[1][1]])?;
        DensityMatrix::new(mat)
    }

    pub fn system(&self) -> DensityMatrix {
        self.reduced(0).expect("system qubit exists")
    }

    pub fn trace(&self) -> f64 {
        let dim = self.dim();
        match &self.repr {
            Repr::Density(rho) => (0..dim).map(|i| rho[i * dim + i].re).sum(),
            Repr::Pure(psi) => psi.iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    /// `Tr(ρ²)` of the joint state.
    pub fn purity(&self) -> f64 {
        match &self.repr {
            Repr::Density(rho) => rho.iter().map(|z| z.norm_sqr()).sum(),
            Repr::Pure(psi) => psi.iter().map(|z| z.norm_sqr()).sum::<f64>().powi(2),
        }
    }

    /// The joint state as a density matrix (small registers only).
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let dim = self.dim();
        let m = match &self.repr {
            Repr::Density(rho) => ComplexMatrix::new(dim, rho)?,
            Repr::Pure(psi) => ComplexMatrix::outer(psi, psi)?,
        };
        DensityMatrix::new(m)
    }
}

fn check_system_state(rho0: &DensityMatrix) -> Result<()> {
    if rho0.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: rho0.dim(),
        });
    }
    Ok(())
}

/// Samples a pure state from the eigen-ensemble of `rho0`.
fn sample_pure<R: Rng + ?Sized>(rho0: &DensityMatrix, rng: &mut R) -> [Complex64; 2] {
    let (values, vectors) = rho0.matrix().hermitian_eigen();
    let u: f64 = rng.random();
    let pick = if u < values[0].max(0.0) { 0 } else { 1 };
    [vectors[pick][0], vectors[pick][1]]
}

fn initial_exact(rho0: &DensityMatrix, n: usize, b: &BathSpec) -> JointState {
    let qubits = n + 1;
    let dim = 1usize << qubits;
    let half = dim / 2;
    let mut rho = vec![ZERO; dim * dim];
    // ξ is diagonal: only entries with equal ancilla bits survive
    for anc in 0..half {
        let weight: f64 = (0..n)
            .map(|k| if anc >> k & 1 == 0 { b.p() } else { b.q() })
            .product();
        if weight == 0.0 {
            continue;
        }
        for s in 0..2 {
            for t in 0..2 {
                rho[(s * half + anc) * dim + t * half + anc] = rho0.matrix()[(s, t)] * weight;
            }
        }
    }
    JointState {
        qubits,
        repr: Repr::Density(rho),
    }
}

fn initial_sampled(sys: [Complex64; 2], bits: &[u8]) -> JointState {
    let qubits = bits.len() + 1;
    let half = 1usize << bits.len();
    let anc = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    let mut psi = vec![ZERO; 2 * half];
    psi[anc] = sys[0];
    psi[half + anc] = sys[1];
    JointState {
        qubits,
        repr: Repr::Pure(psi),
    }
}

fn run_collisions(js: &mut JointState, m: &MachineParams, n: usize) -> CollisionRecord {
    let g = gate_of(&build_machine(m));
    let collisions = (1..=n)
        .map(|k| {
            js.apply_gate(0, k, &g);
            Collision {
                ancilla: k,
                machine: *m,
            }
        })
        .collect();
    CollisionRecord {
        collisions,
        outcomes: None,
    }
}

/// Lets the system collide with `n` fresh ancillas, ancilla `k` at step `k`.
pub fn forward_run(
    rho0: &DensityMatrix,
    n: usize,
    m: &MachineParams,
    b: &BathSpec,
    mode: Mode,
    seed: u64,
) -> Result<(JointState, CollisionRecord)> {
    check_system_state(rho0)?;
    if n > mode.max_ancillas() {
        return Err(Error::InvalidParameter(format!(
            "{n} collisions exceed the {mode:?}-mode limit of {}",
            mode.max_ancillas()
        )));
    }
    match mode {
        Mode::Exact => {
            let mut js = initial_exact(rho0, n, b);
            let rec = run_collisions(&mut js, m, n);
            Ok((js, rec))
        }
        Mode::Sampled => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sys = sample_pure(rho0, &mut rng);
            let bits: Vec<u8> = (0..n).map(|_| u8::from(!rng.random_bool(b.p()))).collect();
            let mut js = initial_sampled(sys, &bits);
            let mut rec = run_collisions(&mut js, m, n);
            rec.outcomes = Some(bits);
            Ok((js, rec))
        }
    }
}

fn check_permutation(order: &[usize], len: usize) -> Result<()> {
    let mut seen = vec![false; len];
    if order.len() != len {
        return Err(Error::InvalidParameter(format!(
            "order has {} entries, record has {len}",
            order.len()
        )));
    }
    for &i in order {
        if i >= len || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter(format!("order {order:?} is not a permutation")));
        }
    }
    Ok(())
}

/// Applies `U†` of the record entries in the given order and returns the
/// joint state.
pub fn reverse_run_joint(js: &JointState, rec: &CollisionRecord, order: &[usize]) -> Result<JointState> {
    check_permutation(order, rec.len())?;
    let mut out = js.clone();
    for &i in order {
        let c = rec.collisions[i];
        if c.ancilla >= out.qubits {
            return Err(Error::QubitOutOfRange {
                index: c.ancilla,
                qubits: out.qubits,
            });
        }
        let g = adjoint(&gate_of(&build_machine(&c.machine)));
        out.apply_gate(0, c.ancilla, &g);
    }
    Ok(out)
}

/// Reduced system state after undoing the collisions in the given order.
pub fn reverse_run(js: &JointState, rec: &CollisionRecord, order: &[usize]) -> Result<DensityMatrix> {
    Ok(reverse_run_joint(js, rec, order)?.system())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityStats {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub std_err: f64,
    pub min: f64,
    pub max: f64,
}

impl FidelityStats {
    pub fn from_samples(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(FidelityStats {
            count: xs.len(),
            mean,
            std_dev: var.sqrt(),
            std_err: (var / n).sqrt(),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WrongOrderTrial {
    pub order: Vec<usize>,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionReport {
    /// Fidelity with the initial state after reversing with the key.
    pub correct_fidelity: f64,
    /// Reversal in other orders; `None` when no other order exists.
    pub wrong_order: Option<FidelityStats>,
    /// Fidelity of the thermalized, unreversed system with the initial state.
    pub no_key_fidelity: f64,
    pub enumerated: bool,
    pub trials: Vec<WrongOrderTrial>,
}

impl ReconstructionReport {
    /// `correct − mean(wrong)`.
    pub fn margin(&self) -> Option<f64> {
        self.wrong_order.map(|w| self.correct_fidelity - w.mean)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Wrong orders: all of them when `n ≤ ENUMERATE_UP_TO`, otherwise `trials`
/// seeded uniform samples (with replacement) that differ from the key.
pub fn wrong_orders(n: usize, trials: usize, seed: u64) -> (Vec<Vec<usize>>, bool) {
    let key: Vec<usize> = (0..n).rev().collect();
    if n <= ENUMERATE_UP_TO {
        let all = permutations(n).into_iter().filter(|p| *p != key).collect();
        return (all, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    while out.len() < trials {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut rng);
        if p != key {
            out.push(p);
        }
    }
    (out, false)
}

/// Thermalizes `psi0` through `n` collisions, then compares reversal with the
/// key, reversal in wrong orders, and no reversal at all.
pub fn reconstruction_experiment(
    psi0: &[Complex64; 2],
    n: usize,
    m: &MachineParams,
    b: &BathSpec,
    mode: Mode,
    trials: usize,
    seed: u64,
) -> Result<ReconstructionReport> {
    let rho0 = DensityMatrix::from_pure(psi0)?;
    let norm = (psi0[0].norm_sqr() + psi0[1].norm_sqr()).sqrt();
    let psi = [psi0[0] / norm, psi0[1] / norm];
    let (js, rec) = forward_run(&rho0, n, m, b, mode, seed)?;

    let correct_fidelity = fidelity(&psi, &reverse_run(&js, &rec, &rec.reverse_order())?);
    let no_key_fidelity = fidelity(&psi, &js.system());

    let (orders, enumerated) = wrong_orders(n, trials, seed.wrapping_add(1));
    let eval = |order: &Vec<usize>| -> Result<WrongOrderTrial> {
        let sys = reverse_run(&js, &rec, order)?;
        Ok(WrongOrderTrial {
            order: order.clone(),
            fidelity: fidelity(&psi, &sys),
        })
    };
    // a cloned joint state per trial; keep the big registers sequential
    let trials: Vec<WrongOrderTrial> = if js.qubits() <= 9 {
        orders.par_iter().map(eval).collect::<Result<_>>()?
    } else {
        orders.iter().map(eval).collect::<Result<_>>()?
    };
    let fids: Vec<f64> = trials.iter().map(|t| t.fidelity).collect();
    Ok(ReconstructionReport {
        correct_fidelity,
        wrong_order: FidelityStats::from_samples(&fids),
        no_key_fidelity,
        enumerated,
        trials,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedStatesReport {
    /// Trace distance of the system from `ξ`.
    pub system_distance: f64,
    /// Trace distance of each ancilla (collision order) from `ξ`.
    pub ancilla_distances: Vec<f64>,
}

pub fn reduced_states_check(js: &JointState, b: &BathSpec) -> Result<ReducedStatesReport> {
    let xi = bath_state(b);
    let system_distance = trace_distance(&js.system(), &xi);
    let ancilla_distances = (1..js.qubits())
        .map(|k| Ok(trace_distance(&js.reduced(k)?, &xi)))
        .collect::<Result<_>>()?;
    Ok(ReducedStatesReport {
        system_distance,
        ancilla_distances,
    })
}

/// How sampled trajectories treat the used ancillas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Keep the full joint vector (at most [`MAX_SAMPLED_ANCILLAS`] steps).
    Joint,
    /// Measure each ancilla in the computational basis once it has left;
    /// the system stays a two-component vector, so any number of steps works.
    /// Measuring a discarded ancilla leaves the averaged system state intact.
    Unravelled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PopulationEstimate {
    pub n: usize,
    pub mean: f64,
    pub std_err: f64,
}

fn unravelled_run(
    psi0: [Complex64; 2],
    g: &Gate,
    b: &BathSpec,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut sys = psi0;
    let mut pops = Vec::with_capacity(steps + 1);
    pops.push(sys[0].norm_sqr());
    for _ in 0..steps {
        let bit = usize::from(!rng.random_bool(b.p()));
        let mut joint = [ZERO; 4];
        joint[bit] = sys[0];
        joint[2 + bit] = sys[1];
        let out: [Complex64; 4] =
            std::array::from_fn(|r| (0..4).map(|c| g[r][c] * joint[c]).sum());
        let p0 = out[0].norm_sqr() + out[2].norm_sqr();
        let outcome = usize::from(rng.random::<f64>() >= p0);
        let norm = if outcome == 0 { p0 } else { 1.0 - p0 }.sqrt();
        sys = [out[outcome] / norm, out[2 + outcome] / norm];
        pops.push(sys[0].norm_sqr());
    }
    pops
}

/// Monte-Carlo estimate of `d⁽ⁿ⁾` from `trajectories` sampled runs of a pure
/// initial state. Trajectory `i` draws from stream `i` of a seeded ChaCha
/// generator, so results do not depend on scheduling.
pub fn monte_carlo_populations(
    psi0: &[Complex64; 2],
    m: &MachineParams,
    b: &BathSpec,
    steps: &[usize],
    trajectories: usize,
    sampling: Sampling,
    seed: u64,
) -> Result<Vec<PopulationEstimate>> {
    let max_n = steps.iter().copied().max().unwrap_or(0);
    if sampling == Sampling::Joint && max_n > MAX_SAMPLED_ANCILLAS {
        return Err(Error::InvalidParameter(format!(
            "{max_n} steps exceed the joint sampled limit of {MAX_SAMPLED_ANCILLAS}"
        )));
    }
    if trajectories < 2 {
        return Err(Error::InvalidParameter("need at least two trajectories".into()));
    }
    let norm = (psi0[0].norm_sqr() + psi0[1].norm_sqr()).sqrt();
    let psi = [psi0[0] / norm, psi0[1] / norm];
    let g = gate_of(&build_machine(m));

    let runs: Vec<Vec<f64>> = (0..trajectories)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            match sampling {
                Sampling::Unravelled => unravelled_run(psi, &g, b, max_n, &mut rng),
                Sampling::Joint => {
                    let bits: Vec<u8> =
                        (0..max_n).map(|_| u8::from(!rng.random_bool(b.p()))).collect();
                    let mut js = initial_sampled(psi, &bits);
                    let mut pops = Vec::with_capacity(max_n + 1);
                    pops.push(js.system().matrix()[(0, 0)].re);
                    for k in 1..=max_n {
                        js.apply_gate(0, k, &g);
                        pops.push(js.system().matrix()[(0, 0)].re);
                    }
                    pops
                }
            }
        })
        .collect();

    Ok(steps
        .iter()
        .map(|&n| {
            let xs: Vec<f64> = runs.iter().map(|r| r[n]).collect();
            let st = FidelityStats::from_samples(&xs).expect("non-empty");
            PopulationEstimate {
                n,
                mean: st.mean,
                std_err: st.std_err,
            }
        })
        .collect())
}

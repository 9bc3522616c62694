//! Command-line experiment runner.
//!
//! Every subcommand resolves its configuration in three layers (built-in
//! defaults, then an optional JSON config file, then flags), validates it,
//! runs, and writes one CSV or JSON document. CSV output starts with a
//! `# config: {...}` line holding the resolved configuration.

use std::ffi::OsString;
use std::f64::consts::TAU;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::channel::{
    bath_state, closed_form_d, closed_form_k, iterate, lambda, BathSpec, IterationMode,
};
use crate::entanglement::{entangling_power, entangling_power_closed, PowerSearch};
use crate::linalg::{bloch_ket, trace_distance, ComplexMatrix, QubitState};
use crate::machines::{
    build_machine, canonical_params, dynamically_equivalent, is_basis_independent, lu_equivalent,
    MachineParams,
};
use crate::thermo::{dissipation, fd_closed_form, fd_series, fit_relaxation, rates_from_machine};
use crate::trajectories::{reconstruction_experiment, Mode};
use crate::verify::run_battery;

/// Upper bound on `--steps` for the single-qubit commands.
pub const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "thermal-machines", version, about = "Qubit collision-model thermalization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Iterate the collision channel; one CSV row per step.
    Thermalize(Flags),
    /// Relaxation times T1, T2, Tpf, with values fitted from a trajectory.
    Rates(Flags),
    /// Fluctuation measure of an observable against its closed form.
    Fd(Flags),
    /// Entangling power over a (phi, theta, p) sweep.
    Entangle(Flags),
    /// Reverse the collisions with and without the order key.
    Irreversibility(Flags),
    /// Compare two machines: equivalence, canonical parameters, basis independence.
    Classify(Flags),
    /// Run the invariant battery; exit code 2 on any failure.
    Verify(Flags),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Debug, Args, Default)]
struct Flags {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Read every angle in degrees.
    #[arg(long)]
    degrees: bool,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Ground-state population of the bath qubits.
    #[arg(long, conflicts_with_all = ["beta", "energy"])]
    p: Option<f64>,
    #[arg(long, requires = "energy")]
    beta: Option<f64>,
    #[arg(long, requires = "beta")]
    energy: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    tau0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Initial ground-state population `⟨0|ρ|0⟩`.
    #[arg(long)]
    d0: Option<f64>,
    /// Initial coherence as `re,im`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k0: Option<Vec<f64>>,
    /// Hermitian observable as `a00,a11,re_a01,im_a01`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    observable: Option<Vec<f64>>,
    /// Sweep values of phi (entangle).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    phis: Option<Vec<f64>>,
    /// Sweep values of theta (entangle).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    thetas: Option<Vec<f64>>,
    /// Sweep values of p (entangle).
    #[arg(long, value_delimiter = ',')]
    ps: Option<Vec<f64>>,
    /// Second machine (classify).
    #[arg(long, allow_hyphen_values = true)]
    phi2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<f64>,
    /// Wrong-order samples (irreversibility) or random bases (classify).
    #[arg(long)]
    trials: Option<usize>,
    /// Initial pure state as Bloch angles `theta,phi` (irreversibility).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    bloch: Option<Vec<f64>>,
    /// Include every wrong-order trial in the irreversibility report.
    #[arg(long)]
    per_trial: bool,
}

/// Contents of a `--config` file. Every field is optional; unknown keys are
/// rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub phi: Option<f64>,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub p: Option<f64>,
    pub beta: Option<f64>,
    pub energy: Option<f64>,
    pub steps: Option<usize>,
    pub tau0: Option<f64>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub degrees: Option<bool>,
    pub d0: Option<f64>,
    pub k0: Option<[f64; 2]>,
    pub observable: Option<[f64; 4]>,
    pub phis: Option<Vec<f64>>,
    pub thetas: Option<Vec<f64>>,
    pub ps: Option<Vec<f64>>,
    pub phi2: Option<f64>,
    pub theta2: Option<f64>,
    pub alpha2: Option<f64>,
    pub trials: Option<usize>,
    pub bloch: Option<[f64; 2]>,
    pub per_trial: Option<bool>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct BathConfig {
    p: f64,
    beta: Option<f64>,
    energy: Option<f64>,
}

/// Fully resolved configuration, angles in radians. This is what the
/// `# config:` line records.
#[derive(Debug, Clone, PartialEq, Serialize)]
struct Resolved {
    experiment: String,
    phi: f64,
    theta: f64,
    alpha: f64,
    bath: BathConfig,
    steps: usize,
    tau0: f64,
    seed: u64,
    mode: Mode,
    format: Format,
    d0: f64,
    k0: [f64; 2],
    observable: [f64; 4],
    phis: Vec<f64>,
    thetas: Vec<f64>,
    ps: Vec<f64>,
    phi2: f64,
    theta2: f64,
    alpha2: f64,
    trials: usize,
    bloch: [f64; 2],
    per_trial: bool,
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Verify,
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

fn invalid<T>(msg: impl Into<String>) -> CmdResult<T> {
    Err(Failure::Validation(msg.into()))
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Thermalize,
    Rates,
    Fd,
    Entangle,
    Irreversibility,
    Classify,
    Verify,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Thermalize => "thermalize",
            Kind::Rates => "rates",
            Kind::Fd => "fd",
            Kind::Entangle => "entangle",
            Kind::Irreversibility => "irreversibility",
            Kind::Classify => "classify",
            Kind::Verify => "verify",
        }
    }

    fn default_steps(self) -> usize {
        match self {
            Kind::Rates => 1000,
            Kind::Fd => 20,
            Kind::Irreversibility => 6,
            _ => 100,
        }
    }

    fn default_trials(self) -> usize {
        match self {
            Kind::Classify => 20,
            _ => crate::trajectories::DEFAULT_WRONG_ORDER_TRIALS,
        }
    }

    fn default_format(self) -> Format {
        match self {
            Kind::Rates | Kind::Irreversibility | Kind::Classify => Format::Json,
            _ => Format::Csv,
        }
    }
}

fn fixed<const N: usize>(v: Option<Vec<f64>>, flag: &str) -> CmdResult<Option<[f64; N]>> {
    v.map(|v| {
        <[f64; N]>::try_from(v.as_slice())
            .map_err(|_| Failure::Validation(format!("--{flag} takes {N} comma-separated values")))
    })
    .transpose()
}

fn resolve(kind: Kind, flags: Flags) -> CmdResult<(Resolved, Option<PathBuf>)> {
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text).map_err(Failure::Validation)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(name) = &file.experiment {
        if name != kind.name() {
            return invalid(format!("config is for '{name}', not '{}'", kind.name()));
        }
    }

    let degrees = flags.degrees || file.degrees.unwrap_or(false);
    let ang = |x: f64| if degrees { x.to_radians() } else { x };
    let angs = |v: Vec<f64>| v.into_iter().map(ang).collect::<Vec<_>>();

    let phi = ang(flags.phi.or(file.phi).unwrap_or(0.1));
    let theta = ang(flags.theta.or(file.theta).unwrap_or(0.05));
    let alpha = ang(flags.alpha.or(file.alpha).unwrap_or(0.0));

    // the bath is one unit: any bath flag replaces the file's bath
    let (p, beta, energy) = if flags.p.is_some() || flags.beta.is_some() {
        (flags.p, flags.beta, flags.energy)
    } else {
        (file.p, file.beta, file.energy)
    };
    let bath = match (p, beta, energy) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return invalid("give either p or beta with energy, not both")
        }
        (_, Some(beta), Some(energy)) => BathConfig {
            p: BathSpec::from_temperature(beta, energy)?.p(),
            beta: Some(beta),
            energy: Some(energy),
        },
        (_, Some(_), None) | (_, None, Some(_)) => return invalid("beta and energy go together"),
        (p, None, None) => BathConfig {
            p: BathSpec::from_population(p.unwrap_or(0.75))?.p(),
            beta: None,
            energy: None,
        },
    };

    let mode = match flags.mode {
        Some(ModeArg::Exact) => Mode::Exact,
        Some(ModeArg::Sampled) => Mode::Sampled,
        None => file.mode.unwrap_or_default(),
    };
    let seed = flags.seed.or(file.seed).unwrap_or(0);
    let bloch = match fixed(flags.bloch, "bloch")?.or(file.bloch) {
        Some([t, f]) => [ang(t), ang(f)],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = (1.0 - 2.0 * rng.random::<f64>()).acos();
            [t, rng.random_range(0.0..TAU)]
        }
    };

    let resolved = Resolved {
        experiment: kind.name().to_string(),
        phi,
        theta,
        alpha,
        bath,
        steps: flags.steps.or(file.steps).unwrap_or(kind.default_steps()),
        tau0: flags.tau0.or(file.tau0).unwrap_or(1e-3),
        seed,
        mode,
        format: flags.format.or(file.format).unwrap_or(kind.default_format()),
        d0: flags.d0.or(file.d0).unwrap_or(0.2),
        k0: fixed(flags.k0, "k0")?.or(file.k0).unwrap_or([0.3, 0.1]),
        observable: fixed(flags.observable, "observable")?
            .or(file.observable)
            .unwrap_or([1.0, -1.0, 0.0, 0.0]),
        phis: flags.phis.or(file.phis).map(angs).unwrap_or_else(|| vec![phi]),
        thetas: flags.thetas.or(file.thetas).map(angs).unwrap_or_else(|| vec![theta]),
        ps: flags.ps.or(file.ps).unwrap_or_else(|| vec![bath.p]),
        phi2: flags.phi2.or(file.phi2).map(ang).unwrap_or(phi),
        theta2: flags.theta2.or(file.theta2).map(ang).unwrap_or(theta),
        alpha2: flags.alpha2.or(file.alpha2).map(ang).unwrap_or(alpha),
        trials: flags.trials.or(file.trials).unwrap_or(kind.default_trials()),
        bloch,
        per_trial: flags.per_trial || file.per_trial.unwrap_or(false),
    };
    validate(kind, &resolved)?;
    Ok((resolved, flags.out.or(file.out)))
}

fn validate(kind: Kind, c: &Resolved) -> CmdResult<()> {
    let finite = [c.phi, c.theta, c.alpha, c.tau0, c.d0, c.phi2, c.theta2, c.alpha2]
        .into_iter()
        .chain(c.k0)
        .chain(c.observable)
        .chain(c.bloch)
        .chain(c.phis.iter().copied())
        .chain(c.thetas.iter().copied())
        .chain(c.ps.iter().copied());
    if finite.into_iter().any(|x| !x.is_finite()) {
        return invalid("non-finite parameter");
    }
    c.machine()?;
    MachineParams::new(c.phi2, c.theta2, c.alpha2)?;
    QubitState::new(c.d0, Complex64::new(c.k0[0], c.k0[1]))?;
    if c.tau0 <= 0.0 {
        return invalid(format!("tau0 = {} must be positive", c.tau0));
    }
    if c.phis.is_empty() || c.thetas.is_empty() || c.ps.is_empty() {
        return invalid("sweep lists must not be empty");
    }
    for &phi in &c.phis {
        MachineParams::new(phi, 0.0, 0.0)?;
    }
    for &p in &c.ps {
        BathSpec::from_population(p)?;
    }
    let limit = match kind {
        Kind::Irreversibility => c.mode.max_ancillas(),
        _ => MAX_STEPS,
    };
    if c.steps > limit {
        return invalid(format!("steps = {} exceeds {limit}", c.steps));
    }
    if c.trials == 0 {
        return invalid("trials must be positive");
    }
    Ok(())
}

impl Resolved {
    fn machine(&self) -> CmdResult<MachineParams> {
        Ok(MachineParams::new(self.phi, self.theta, self.alpha)?)
    }

    fn bath(&self) -> BathSpec {
        match (self.bath.beta, self.bath.energy) {
            (Some(b), Some(e)) => BathSpec::from_temperature(b, e).expect("validated"),
            _ => BathSpec::from_population(self.bath.p).expect("validated"),
        }
    }

    fn initial(&self) -> QubitState {
        QubitState::new(self.d0, Complex64::new(self.k0[0], self.k0[1])).expect("validated")
    }

    fn observable(&self) -> ComplexMatrix {
        let [a00, a11, re, im] = self.observable;
        let off = Complex64::new(re, im);
        ComplexMatrix::new(2, &[Complex64::new(a00, 0.0), off, off.conj(), Complex64::new(a11, 0.0)])
            .expect("2x2")
    }
}

#[derive(Debug, Clone)]
enum Cell {
    Int(usize),
    Num(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => fmt_num(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Num(x) => num(*x),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

/// 17 significant digits; enough for an exact round trip.
fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// JSON number, or a string for values JSON cannot hold.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(fmt_num(x))
    }
}

enum Report {
    Table {
        columns: Vec<&'static str>,
        rows: Vec<Vec<Cell>>,
    },
    Doc(Value),
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::Number(n) => {
            let text = match n.as_f64() {
                Some(x) if n.is_f64() => fmt_num(x),
                _ => n.to_string(),
            };
            out.push((prefix.into(), text))
        }
        Value::String(s) => out.push((prefix.into(), s.clone())),
        Value::Bool(b) => out.push((prefix.into(), b.to_string())),
        Value::Null => out.push((prefix.into(), String::new())),
    }
}

fn render(cfg: &Resolved, report: Report) -> String {
    let cfg_json = serde_json::to_value(cfg).expect("serializable");
    match cfg.format {
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("config".into(), cfg_json);
            match report {
                Report::Table { columns, rows } => {
                    let rows = rows
                        .iter()
                        .map(|r| {
                            Value::Object(
                                columns.iter().zip(r).map(|(c, x)| (c.to_string(), x.json())).collect(),
                            )
                        })
                        .collect();
                    doc.insert("rows".into(), Value::Array(rows));
                }
                Report::Doc(v) => {
                    doc.insert("result".into(), v);
                }
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let (columns, rows): (Vec<String>, Vec<Vec<String>>) = match report {
                Report::Table { columns, rows } => (
                    columns.iter().map(|c| c.to_string()).collect(),
                    rows.iter().map(|r| r.iter().map(Cell::csv).collect()).collect(),
                ),
                Report::Doc(v) => {
                    let mut flat = Vec::new();
                    flatten("", &v, &mut flat);
                    (
                        vec!["key".into(), "value".into()],
                        flat.into_iter().map(|(k, v)| vec![k, v]).collect(),
                    )
                }
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&columns).expect("in-memory write");
            for r in &rows {
                w.write_record(r).expect("in-memory write");
            }
            let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
            format!("# config: {}\n{body}", serde_json::to_string(&cfg_json).expect("serializable"))
        }
    }
}

fn cmd_thermalize(c: &Resolved) -> CmdResult<Report> {
    let m = c.machine()?;
    let b = c.bath();
    let rho0 = c.initial();
    let traj = iterate(&rho0, &m, &b, c.steps, IterationMode::Matrix);
    let xi = bath_state(&b);
    let lam = lambda(b.p(), m.theta(), m.alpha());
    let rows = traj
        .states()
        .iter()
        .enumerate()
        .map(|(n, s)| {
            let k = s.k();
            vec![
                Cell::Int(n),
                Cell::Num(s.d()),
                Cell::Num(k.re),
                Cell::Num(k.im),
                Cell::Num(k.norm()),
                Cell::Num(trace_distance(&s.to_density(), &xi)),
                Cell::Num(closed_form_d(rho0.d(), b.p(), m.phi(), n as u32)),
                Cell::Num(closed_form_k(rho0.k(), lam, m.phi(), n as u32).norm()),
            ]
        })
        .collect();
    Ok(Report::Table {
        columns: vec![
            "n",
            "d",
            "re_k",
            "im_k",
            "abs_k",
            "trace_distance_to_xi",
            "closed_form_d",
            "closed_form_k_mag",
        ],
        rows,
    })
}

fn cmd_rates(c: &Resolved) -> CmdResult<Report> {
    let m = c.machine()?;
    let b = c.bath();
    let r = rates_from_machine(m.phi(), m.theta(), c.tau0, b.p())?;
    let traj = iterate(&c.initial(), &m, &b, c.steps, IterationMode::Analytic);
    let (fit1, fit2) = match fit_relaxation(&traj, &b, c.tau0) {
        Ok((t1, t2)) => (num(t1), num(t2)),
        Err(_) => (Value::Null, Value::Null),
    };
    Ok(Report::Doc(json!({
        "T1": num(r.t1),
        "T2": num(r.t2),
        "Tpf": num(r.tpf),
        "fitted_T1": fit1,
        "fitted_T2": fit2,
        "bound_saturated": r.bound_saturated(),
    })))
}

fn cmd_fd(c: &Resolved) -> CmdResult<Report> {
    let m = c.machine()?;
    let b = c.bath();
    let a = c.observable();
    let sim = fd_series(&m, &b, &a, c.steps)?;
    let rows = sim
        .iter()
        .enumerate()
        .map(|(n, &f)| {
            Ok(vec![
                Cell::Int(n),
                Cell::Num(f),
                Cell::Num(fd_closed_form(&a, &b, m.phi(), n as u32)?),
                Cell::Num(dissipation(m.phi(), n as u32)),
            ])
        })
        .collect::<CmdResult<_>>()?;
    Ok(Report::Table {
        columns: vec!["n", "f_simulated", "f_closed", "dissipation"],
        rows,
    })
}

fn cmd_entangle(c: &Resolved) -> CmdResult<Report> {
    let mut rows = Vec::new();
    for &phi in &c.phis {
        for &theta in &c.thetas {
            for &p in &c.ps {
                let m = MachineParams::new(phi, theta, c.alpha)?;
                let b = BathSpec::from_population(p)?;
                let r = entangling_power(&m, &b, PowerSearch::default())?;
                rows.push(vec![
                    Cell::Num(phi),
                    Cell::Num(theta),
                    Cell::Num(p),
                    Cell::Num(r.value),
                    Cell::Num(entangling_power_closed(p, phi)),
                    Cell::Num(r.bloch_theta),
                    Cell::Num(r.bloch_phi),
                ]);
            }
        }
    }
    Ok(Report::Table {
        columns: vec![
            "phi",
            "theta",
            "p",
            "power_numeric",
            "power_closed",
            "argmax_theta_bloch",
            "argmax_phi_bloch",
        ],
        rows,
    })
}

fn cmd_irreversibility(c: &Resolved) -> CmdResult<Report> {
    let m = c.machine()?;
    let psi = bloch_ket(c.bloch[0], c.bloch[1]);
    let r = reconstruction_experiment(&psi, c.steps, &m, &c.bath(), c.mode, c.trials, c.seed)?;
    let stats = r.wrong_order.map(|w| {
        json!({
            "count": w.count,
            "mean": num(w.mean),
            "std_dev": num(w.std_dev),
            "std_err": num(w.std_err),
            "min": num(w.min),
            "max": num(w.max),
        })
    });
    let mut doc = json!({
        "correct_fidelity": num(r.correct_fidelity),
        "no_key_fidelity": num(r.no_key_fidelity),
        "wrong_order": stats,
        "margin": r.margin().map(num),
        "enumerated": r.enumerated,
    });
    if c.per_trial {
        doc["trials"] = r
            .trials
            .iter()
            .map(|t| json!({ "order": t.order, "fidelity": num(t.fidelity) }))
            .collect();
    }
    Ok(Report::Doc(doc))
}

fn cmd_classify(c: &Resolved) -> CmdResult<Report> {
    let m1 = c.machine()?;
    let m2 = MachineParams::new(c.phi2, c.theta2, c.alpha2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let canon = |m: &MachineParams| {
        let cp = canonical_params(m.phi(), m.theta());
        json!([num(cp.mu_x), num(cp.mu_y), num(cp.mu_z)])
    };
    let b1 = is_basis_independent(&build_machine(&m1), c.trials, 1e-9, &mut rng)?;
    let b2 = is_basis_independent(&build_machine(&m2), c.trials, 1e-9, &mut rng)?;
    Ok(Report::Doc(json!({
        "dynamically_equivalent": dynamically_equivalent(&m1, &m2),
        "lu_equivalent": lu_equivalent(&m1, &m2),
        "canonical_params": [canon(&m1), canon(&m2)],
        "basis_independent": [b1, b2],
    })))
}

fn cmd_verify(c: &Resolved) -> (Report, bool) {
    let report = run_battery(c.seed);
    let rows = report
        .checks
        .iter()
        .map(|k| {
            vec![
                Cell::Text(k.name.to_string()),
                Cell::Bool(k.passed),
                Cell::Num(k.value),
                Cell::Num(k.tolerance),
            ]
        })
        .collect();
    (
        Report::Table {
            columns: vec!["check", "passed", "value", "tolerance"],
            rows,
        },
        report.all_passed(),
    )
}

fn execute(kind: Kind, flags: Flags, stdout: &mut dyn Write) -> CmdResult<()> {
    let (cfg, out) = resolve(kind, flags)?;
    let mut verified = true;
    let report = match kind {
        Kind::Thermalize => cmd_thermalize(&cfg)?,
        Kind::Rates => cmd_rates(&cfg)?,
        Kind::Fd => cmd_fd(&cfg)?,
        Kind::Entangle => cmd_entangle(&cfg)?,
        Kind::Irreversibility => cmd_irreversibility(&cfg)?,
        Kind::Classify => cmd_classify(&cfg)?,
        Kind::Verify => {
            let (r, ok) = cmd_verify(&cfg);
            verified = ok;
            r
        }
    };
    let text = render(&cfg, report);
    match out {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?,
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Validation(format!("stdout: {e}")))?,
    }
    if verified {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code: 0 on success, 1 on invalid input, 2 when `verify`
/// finds a failing invariant.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let (kind, flags) = match cli.command {
        Command::Thermalize(f) => (Kind::Thermalize, f),
        Command::Rates(f) => (Kind::Rates, f),
        Command::Fd(f) => (Kind::Fd, f),
        Command::Entangle(f) => (Kind::Entangle, f),
        Command::Irreversibility(f) => (Kind::Irreversibility, f),
        Command::Classify(f) => (Kind::Classify, f),
        Command::Verify(f) => (Kind::Verify, f),
    };
    match execute(kind, flags, stdout) {
        Ok(()) => 0,
        Err(Failure::Validation(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(Failure::Verify) => {
            let _ = writeln!(stderr, "verify: invariant check failed");
            2
        }
    }
}

use std::collections::BTreeMap;
use std::path::Path;

use qcorr::annealer::{
    anneal_even_order_flip, anneal_many, co_anneal, write_trace_csv, AnnealConfig, AnnealMode, TracePoint,
};
use qcorr::antistate::{antistate_check_with_tolerance, universal_not_attempt_with_tolerance, ANTI_TOLERANCE};
use qcorr::bell::{evaluate_inequality, noise_threshold, refine_spec, BellSpec, NOISE_TOLERANCE};
use qcorr::correlations::{correlation_length, full_tensor, OrderFilter};
use qcorr::gme::{
    biproduct_verdict, certify_dicke_mixture, certify_even_family, ppt_verdict, product_mimic, recognize_dicke,
    recognize_dicke_mixture,
};
use qcorr::state::{DensityMatrixFile, PureStateFile, PSD_TOLERANCE};
use qcorr::statelib::{
    default_phi, dicke, dicke_mixture, even_n_family, format_bits, generalized_anti_w, generalized_w, named_state,
    parse_bits, DickeParams, NamedState, WParams,
};
use qcorr::{DensityMatrix, Error, PureState};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::io::{load_state, parse_json, read_json, to_value, write_text, CliError, CliResult, LoadedState, Outcome};
use crate::{
    AnnealArgs, AnnealObjective, AntiCmd, BellCmd, Cli, Command, Family, GlobalOpts, GmeCmd, GmeMethodArg, Preset,
    StateCmd,
};

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::State(StateCmd::Build { family, params, out }) => state_build(g, *family, params, out.as_deref()),
        Command::Tensor { state, orders } => tensor(g, state, orders),
        Command::Length { state } => length(g, state),
        Command::Anti(AntiCmd::Check { state, candidate }) => anti_check(g, state, candidate),
        Command::Anti(AntiCmd::Unot { state, subset, out }) => anti_unot(g, state, subset, out.as_deref()),
        Command::Anneal(args) => anneal(g, args),
        Command::Gme(GmeCmd::Certify { state, method, family_params }) => {
            gme_certify(g, state, *method, family_params.as_deref())
        }
        Command::Bell(BellCmd::Eval { state, spec, refine }) => bell_eval(g, state, spec.as_deref(), *refine),
        Command::Bell(BellCmd::Noise { state, spec }) => bell_noise(g, state, spec.as_deref()),
    }
}

fn seed(g: &GlobalOpts) -> u64 {
    g.seed.unwrap_or(0)
}

fn outcome(g: &GlobalOpts, result: Value, config: Value) -> CliResult<Outcome> {
    Ok(Outcome { result, config, seed: seed(g) })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightParams {
    alphas: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Coefficients {
    List(Vec<f64>),
    Map(BTreeMap<String, f64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DickeArgs {
    n: usize,
    e: usize,
    coeffs: Option<Coefficients>,
}

impl DickeArgs {
    /// Rescales the given weights to unit norm.
    fn params(&self) -> CliResult<DickeParams> {
        Ok(match &self.coeffs {
            None => DickeParams::uniform(self.n, self.e)?,
            Some(Coefficients::List(w)) => DickeParams::normalized(self.n, self.e, w.clone())?,
            Some(Coefficients::Map(map)) => {
                let norm = map.values().map(|w| w * w).sum::<f64>().sqrt();
                let scaled = map.iter().map(|(k, w)| (k.clone(), w / norm)).collect();
                DickeParams::from_map(self.n, self.e, &scaled)?
            }
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvenArgs {
    alphas: Vec<f64>,
    phi: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SizeArgs {
    n: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BellArgs {
    #[serde(default = "default_bell_kind")]
    kind: String,
}

fn default_bell_kind() -> String {
    "psi_plus".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisArgs {
    pattern: String,
}

fn pure_value(p: &PureState) -> Value {
    to_value(&PureStateFile::from(p))
}

fn mixed_value(r: &DensityMatrix) -> Value {
    to_value(&DensityMatrixFile::from(r))
}

fn state_build(g: &GlobalOpts, family: Family, params: &str, out: Option<&Path>) -> CliResult<Outcome> {
    let raw: Value = parse_json("--params", params)?;
    let from = |what: &str| format!("--params for {what}");
    let mut extra = serde_json::Map::new();
    let state = match family {
        Family::W | Family::Antiw => {
            let a: WeightParams = parse_json(&from("w"), &raw.to_string())?;
            let p = WParams::normalized(a.alphas)?;
            extra.insert("satisfies_hypotheses".into(), json!(p.satisfies_hypotheses()));
            let psi = if family == Family::W { generalized_w(&p) } else { generalized_anti_w(&p) };
            pure_value(&psi)
        }
        Family::Dicke => {
            let a: DickeArgs = parse_json(&from("dicke"), &raw.to_string())?;
            pure_value(&dicke(&a.params()?))
        }
        Family::DickeMixture => {
            let a: DickeArgs = parse_json(&from("dicke-mixture"), &raw.to_string())?;
            mixed_value(&dicke_mixture(&a.params()?)?)
        }
        Family::Even4 => {
            let a: EvenArgs = parse_json(&from("even4"), &raw.to_string())?;
            let p = WParams::normalized(a.alphas)?;
            let phi = a.phi.as_deref().map(parse_bits).transpose()?;
            let fam = even_n_family(&p, phi.as_deref())?;
            extra.insert("phi".into(), json!(format_bits(&fam.phi)));
            extra.insert("satisfies_hypotheses".into(), json!(fam.satisfies_hypotheses()));
            mixed_value(&fam.rho0)
        }
        Family::Ghz => {
            let a: SizeArgs = parse_json(&from("ghz"), &raw.to_string())?;
            pure_value(&named_state(&NamedState::Ghz, a.n)?)
        }
        Family::Bell => {
            let a: BellArgs = parse_json(&from("bell"), &raw.to_string())?;
            let name = match a.kind.as_str() {
                "psi_plus" => NamedState::BellPsiPlus,
                "psi_minus" => NamedState::BellPsiMinus,
                other => {
                    return Err(CliError::Input(format!("unknown Bell state {other:?}; use psi_plus or psi_minus")))
                }
            };
            pure_value(&named_state(&name, 2)?)
        }
        Family::Basis => {
            let a: BasisArgs = parse_json(&from("basis"), &raw.to_string())?;
            let bits = parse_bits(&a.pattern)?;
            pure_value(&named_state(&NamedState::Basis(bits.clone()), bits.len())?)
        }
    };
    if let Some(n) = state.get("n_qubits").and_then(Value::as_u64) {
        if n as usize > g.cap_qubits {
            return Err(Error::QubitCapExceeded { n: n as usize, cap: g.cap_qubits }.into());
        }
    }
    if let Some(path) = out {
        write_text(path, &serde_json::to_string_pretty(&state).expect("JSON values serialize"))?;
    }
    let mut result = state.as_object().cloned().expect("state files are objects");
    result.extend(extra);
    let family_name = to_value(&format!("{family:?}").to_lowercase());
    outcome(g, Value::Object(result), json!({ "family": family_name, "params": raw }))
}

fn tensor(g: &GlobalOpts, state: &Path, orders: &str) -> CliResult<Outcome> {
    let s = load_state(state, g.cap_qubits)?;
    let filter: OrderFilter = orders.parse()?;
    let t = match &s {
        LoadedState::Pure(p) => full_tensor(p, &filter)?,
        LoadedState::Mixed(r) => full_tensor(r, &filter)?,
    };
    outcome(g, to_value(&t.to_file()), json!({ "orders": orders }))
}

fn length(g: &GlobalOpts, state: &Path) -> CliResult<Outcome> {
    let s = load_state(state, g.cap_qubits)?;
    let l = match &s {
        LoadedState::Pure(p) => correlation_length(p)?,
        LoadedState::Mixed(r) => correlation_length(r)?,
    };
    outcome(g, json!({ "n_qubits": s.n_qubits(), "length": l }), json!({}))
}

fn anti_check(g: &GlobalOpts, state: &Path, candidate: &Path) -> CliResult<Outcome> {
    let a = load_state(state, g.cap_qubits)?;
    let b = load_state(candidate, g.cap_qubits)?;
    let tol = g.tolerance.unwrap_or(ANTI_TOLERANCE);
    let report = match (&a, &b) {
        (LoadedState::Pure(x), LoadedState::Pure(y)) => antistate_check_with_tolerance(x, y, tol)?,
        _ => antistate_check_with_tolerance(&a.to_density(), &b.to_density(), tol)?,
    };
    outcome(g, to_value(&report), json!({ "tolerance": tol }))
}

fn anti_unot(g: &GlobalOpts, state: &Path, subset: &[usize], out: Option<&Path>) -> CliResult<Outcome> {
    let rho = load_state(state, g.cap_qubits)?.to_density();
    if let Some(&bad) = subset.iter().find(|&&q| q == 0 || q > rho.n_qubits()) {
        return Err(CliError::Input(format!("subset entry {bad} is outside 1..={}", rho.n_qubits())));
    }
    let zero_based: Vec<usize> = subset.iter().map(|q| q - 1).collect();
    let tol = g.tolerance.unwrap_or(PSD_TOLERANCE);
    let r = universal_not_attempt_with_tolerance(&rho, &zero_based, tol)?;
    let output = r.output();
    let report = match &output {
        Some(o) => Some(antistate_check_with_tolerance(&rho, o, ANTI_TOLERANCE)?),
        None => None,
    };
    if let (Some(path), Some(o)) = (out, &output) {
        write_text(path, &serde_json::to_string_pretty(&mixed_value(o)).expect("JSON values serialize"))?;
    }
    let result = json!({
        "subset": subset,
        "physical": r.physical,
        "min_eigenvalue": r.min_eigenvalue,
        "anti_deviation": r.anti_deviation,
        "report": report,
        "output": output.as_ref().map(mixed_value),
    });
    outcome(g, result, json!({ "subset": subset, "tolerance": tol }))
}

fn anneal(g: &GlobalOpts, args: &AnnealArgs) -> CliResult<Outcome> {
    let mut cfg = match (&args.config, args.preset) {
        (Some(path), _) => read_json::<AnnealConfig>(path)?,
        (None, Some(Preset::Evidence)) => AnnealConfig::evidence(),
        (None, _) => AnnealConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if args.n.is_some() && args.target.is_none() {
        cfg.mode = AnnealMode::CoAnneal;
    }
    cfg.validate()?;
    if args.seeds == 0 {
        return Err(CliError::Input("--seeds must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..args.seeds).map(|i| cfg.seed.wrapping_add(i)).collect();
    let target = args.target.as_deref().map(|p| load_state(p, g.cap_qubits)).transpose()?;
    let target = match target {
        Some(LoadedState::Pure(p)) => Some(p),
        Some(LoadedState::Mixed(_)) => return Err(CliError::Input("the anneal target must be a pure state".into())),
        None => None,
    };

    let (results, best): (Vec<Value>, Vec<(f64, Vec<TracePoint>)>) = match cfg.mode {
        AnnealMode::CoAnneal => {
            let n = match (args.n, &target) {
                (Some(n), _) => n,
                (None, Some(t)) => t.n_qubits(),
                (None, None) => return Err(CliError::Input("co-anneal needs --n or --target".into())),
            };
            if n > g.cap_qubits {
                return Err(Error::QubitCapExceeded { n, cap: g.cap_qubits }.into());
            }
            let runs = seeds.par_iter().map(|&s| co_anneal(n, &cfg.with_seed(s))).collect::<qcorr::Result<Vec<_>>>()?;
            runs.iter().map(|r| (to_value(r), (r.result.best_objective, r.result.trace.clone()))).unzip()
        }
        AnnealMode::FixedTarget => {
            let target = target.ok_or_else(|| CliError::Input("fixed-target mode needs --target".into()))?;
            let runs = match args.objective {
                AnnealObjective::Length => anneal_many(&target, &cfg, &seeds)?,
                AnnealObjective::EvenFlip => seeds
                    .par_iter()
                    .map(|&s| anneal_even_order_flip(&target, &cfg.with_seed(s)))
                    .collect::<qcorr::Result<Vec<_>>>()?,
            };
            runs.iter().map(|r| (to_value(r), (r.best_objective, r.trace.clone()))).unzip()
        }
    };

    let objectives: Vec<f64> = best.iter().map(|(o, _)| *o).collect();
    let best_index =
        (0..objectives.len()).min_by(|&a, &b| objectives[a].total_cmp(&objectives[b])).expect("at least one seed");
    if let Some(path) = &args.emit_trace {
        let mut buf = Vec::new();
        write_trace_csv(&best[best_index].1, &mut buf)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        write_text(path, &String::from_utf8(buf).expect("CSV is ASCII"))?;
    }
    let converged = results
        .iter()
        .filter(|r| r.pointer("/converged_to_zero").or(r.pointer("/result/converged_to_zero")) == Some(&json!(true)))
        .count();
    let summary = json!({
        "seeds": seeds,
        "converged": converged,
        "min_objective": objectives[best_index],
        "max_objective": objectives.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        "best_seed": seeds[best_index],
    });
    let objective = match args.objective {
        AnnealObjective::Length => "length",
        AnnealObjective::EvenFlip => "even_flip",
    };
    let config = json!({ "anneal": to_value(&cfg), "objective": objective, "seeds": args.seeds });
    Ok(Outcome { result: json!({ "results": results, "summary": summary }), config, seed: cfg.seed })
}

fn gme_certify(g: &GlobalOpts, state: &Path, method: GmeMethodArg, family_params: Option<&str>) -> CliResult<Outcome> {
    let s = load_state(state, g.cap_qubits)?;
    let n = s.n_qubits();
    let tol = g.tolerance.unwrap_or(PSD_TOLERANCE);
    let config = json!({ "method": format!("{method:?}").to_lowercase(), "family_params": family_params });

    let family = || -> CliResult<_> {
        let (p, phi) = match family_params {
            Some(text) => {
                let a: EvenArgs = parse_json("--family-params", text)?;
                (WParams::normalized(a.alphas)?, a.phi.as_deref().map(parse_bits).transpose()?)
            }
            None if n % 2 == 0 && n >= 4 => (WParams::uniform(n / 2)?, Some(default_phi(n / 2))),
            None => {
                return Err(CliError::Input(format!(
                    "the subspace method needs an even register of at least 4 qubits, got {n}"
                )))
            }
        };
        Ok(even_n_family(&p, phi.as_deref())?)
    };
    let dicke_cert = |rho: &DensityMatrix| -> CliResult<Option<Value>> {
        Ok(match recognize_dicke_mixture(rho) {
            Some(p) => {
                let cert = certify_dicke_mixture(p.n(), p.e(), p.coeffs(), seed(g))?;
                let mut v = to_value(&cert.verdict);
                v["splits"] = to_value(&cert.splits);
                v["dicke"] = json!({ "n": p.n(), "e": p.e(), "coeffs": p.coeffs() });
                Some(v)
            }
            None => None,
        })
    };
    let subspace = || -> CliResult<Value> {
        let fam = family()?;
        let mut v = to_value(&certify_even_family(&s.to_density(), &fam)?);
        v["family"] = json!({ "alphas": fam.params.alphas(), "phi": format_bits(&fam.phi) });
        Ok(v)
    };

    let result = match method {
        GmeMethodArg::Ppt => to_value(&ppt_verdict(&s.to_density(), tol)?),
        GmeMethodArg::Biproduct => match &s {
            LoadedState::Pure(p) => to_value(&biproduct_verdict(p, seed(g))?),
            LoadedState::Mixed(r) => dicke_cert(r)?.ok_or_else(|| {
                CliError::Domain(Error::Precondition(
                    "the bi-product method needs a pure state or a Dicke mixture".into(),
                ))
            })?,
        },
        GmeMethodArg::Subspace => subspace()?,
        GmeMethodArg::Mimic => {
            let LoadedState::Pure(p) = &s else {
                return Err(Error::Precondition("the mimic test needs a pure symmetric Dicke state".into()).into());
            };
            let params = recognize_dicke(p)
                .filter(|d| d.is_uniform())
                .ok_or_else(|| CliError::Domain(Error::Precondition("state is not a symmetric Dicke state".into())))?;
            let mimic = product_mimic(params.n(), params.e())?;
            let mut v = to_value(&mimic.verdict());
            v["mimic"] = to_value(&mimic);
            v
        }
        GmeMethodArg::Auto => match &s {
            LoadedState::Pure(p) => to_value(&biproduct_verdict(p, seed(g))?),
            LoadedState::Mixed(r) if n == 2 => to_value(&ppt_verdict(r, tol)?),
            LoadedState::Mixed(r) => match dicke_cert(r)? {
                Some(v) => v,
                None => {
                    let in_span = family_params.is_some()
                        || (n % 2 == 0 && n >= 4 && {
                            let fam = family()?;
                            qcorr::gme::support_residual(r, &fam)? <= qcorr::gme::SUPPORT_TOLERANCE
                        });
                    if in_span {
                        subspace()?
                    } else {
                        to_value(&ppt_verdict(r, tol)?)
                    }
                }
            },
        },
    };
    outcome(g, result, config)
}

fn load_spec(path: Option<&Path>, n: usize) -> CliResult<BellSpec> {
    match path {
        Some(p) => read_json(p),
        None => Ok(BellSpec::recipe(n)?),
    }
}

fn bell_eval(g: &GlobalOpts, state: &Path, spec: Option<&Path>, refine: Option<usize>) -> CliResult<Outcome> {
    let rho = load_state(state, g.cap_qubits)?.to_density();
    let mut spec = load_spec(spec, rho.n_qubits())?;
    if let Some(restarts) = refine {
        spec = refine_spec(&rho, &spec, restarts, seed(g))?;
    }
    let value = evaluate_inequality(&rho, &spec)?;
    let mut v = to_value(&value);
    v["spec"] = to_value(&spec);
    outcome(g, v, json!({ "spec": to_value(&spec), "refine": refine }))
}

fn bell_noise(g: &GlobalOpts, state: &Path, spec: Option<&Path>) -> CliResult<Outcome> {
    let rho = load_state(state, g.cap_qubits)?.to_density();
    let spec = load_spec(spec, rho.n_qubits())?;
    let p_star = noise_threshold(&rho, &spec)?;
    let result = json!({ "p_star": p_star, "tolerance": NOISE_TOLERANCE, "spec": to_value(&spec) });
    outcome(g, result, json!({ "spec": to_value(&spec) }))
}

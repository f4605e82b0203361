//! Report assembly. Sections are named after the core modules and are
//! present only when the matching analysis was requested.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use specdamp_core::conditions::evaluate_conditions;
use specdamp_core::krein::{classify_eigenpairs, decompose, max_cross_cluster_product, self_adjointness_defect, Decomposition};
use specdamp_core::model::{BeamSpec, ModelSource, PhaseVector, ValidationReport};
use specdamp_core::semigroup::{log_grid, resolvent_scan, EvolutionMethod, Evolver, ResolventScan};
use specdamp_core::spectrum::{accumulation_experiment, solve_qep, AccumulationReport};
use specdamp_core::{Conditions, Model, Signs, Spectrum, State, ToleranceProfile, Trajectory};

use crate::config::{Analysis, InitialState, RunConfig, SimulateConfig};
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub dim: usize,
    pub source: ModelSource<f64>,
    pub validation: ValidationReport<f64>,
}

impl ModelSection {
    fn new(model: &Model) -> Result<Self, CliError> {
        Ok(Self {
            dim: model.dim(),
            source: model.source().clone(),
            validation: model.validate()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KreinSection {
    pub classification: Signs,
    pub decomposition: Option<Decomposition<f64>>,
    /// Why the decomposition could not be formed.
    pub obstruction: Option<String>,
    pub self_adjointness_defect: f64,
    pub max_cross_cluster_product: f64,
}

/// One row of the condition table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verdict {
    pub condition: String,
    /// `None` when the condition could not be evaluated.
    pub holds: Option<bool>,
    /// Signed distance from the decision threshold; positive means the
    /// condition holds with room to spare.
    pub margin: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsSection {
    pub verdicts: Vec<Verdict>,
    pub all_hold: bool,
    pub report: Conditions,
}

impl ConditionsSection {
    pub fn new(report: Conditions, tol: &ToleranceProfile) -> Self {
        let verdicts = verdicts(&report, tol);
        Self {
            all_hold: report.all_hold(),
            verdicts,
            report,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupSection {
    pub method: EvolutionMethod,
    pub eigenvector_condition: f64,
    pub resolvent: ResolventScan<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub model: ModelSection,
    pub seed: u64,
    pub tolerances: ToleranceProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Spectrum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub krein: Option<KreinSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semigroup: Option<SemigroupSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accumulation: Option<AccumulationReport<f64>>,
}

/// Everything `analyze` computed, including data not serialized into the
/// report but needed for the CSV and plot.
pub struct Bundle {
    pub report: Report,
    pub spectrum: Spectrum,
    pub signs: Signs,
    pub beam: Option<BeamSpec<f64>>,
}

pub fn analyze(cfg: &RunConfig, seed: u64) -> Result<Bundle, CliError> {
    let tol = cfg.tolerances;
    let model = cfg.build_model()?;
    let beam = cfg.beam_spec()?;
    let requested = cfg.requested();
    let spectrum = solve_qep(&model, &tol)?;
    let signs = classify_eigenpairs(&model, &spectrum, &tol)?;

    let krein = if requested.contains(&Analysis::Krein) {
        let (decomposition, obstruction) = match decompose(&model, &spectrum, &signs, &tol) {
            Ok(d) => (Some(d), None),
            Err(e @ specdamp_core::Error::MixedClusterObstruction { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        };
        Some(KreinSection {
            classification: signs.clone(),
            decomposition,
            obstruction,
            self_adjointness_defect: self_adjointness_defect(&model)?,
            max_cross_cluster_product: max_cross_cluster_product(&model, &spectrum, &tol),
        })
    } else {
        None
    };

    let conditions = if requested.contains(&Analysis::Conditions) {
        let report = evaluate_conditions(&model, &spectrum, cfg.essential_spectrum.as_deref(), seed, &tol)?;
        Some(ConditionsSection::new(report, &tol))
    } else {
        None
    };

    let semigroup = if requested.contains(&Analysis::Semigroup) {
        let ev = Evolver::with_spectrum(&model, &spectrum)?;
        let grid_cfg = cfg.resolvent.clone().unwrap_or_default();
        let grid = log_grid(grid_cfg.im_min, grid_cfg.im_max, grid_cfg.count);
        Some(SemigroupSection {
            method: ev.method(),
            eigenvector_condition: ev.eigenvector_condition(),
            resolvent: resolvent_scan(&model, &spectrum, grid_cfg.re_offset, &grid, &tol)?,
        })
    } else {
        None
    };

    let accumulation = match (&beam, requested.contains(&Analysis::Accumulation)) {
        (Some(spec), true) => {
            let (orders, radius) = match &cfg.accumulation {
                Some(a) => (a.orders.clone(), a.radius),
                None => (vec![spec.n, 2 * spec.n, 4 * spec.n], 0.01),
            };
            Some(accumulation_experiment(spec, &orders, radius, &tol)?)
        }
        _ => None,
    };

    let report = Report {
        model: ModelSection::new(&model)?,
        seed,
        tolerances: tol,
        spectrum: requested.contains(&Analysis::Spectrum).then(|| spectrum.clone()),
        krein,
        conditions,
        semigroup,
        accumulation,
    };
    Ok(Bundle {
        report,
        spectrum,
        signs,
        beam,
    })
}

fn verdicts(report: &Conditions, tol: &ToleranceProfile) -> Vec<Verdict> {
    let od = &report.overdamping;
    let mut out = vec![Verdict {
        condition: "(i) overdamping".into(),
        holds: Some(od.holds()),
        margin: Some(od.margin),
        detail: format!(
            "min phi = {:e}, definiteness line search min = {:e}",
            od.margin, od.line_search_min
        ),
    }];
    out.push(match &report.condition_ii {
        Some(list) => {
            let margin = list
                .iter()
                .map(|v| match &v.gram {
                    None => v.nearest_distance - tol.cluster_tol * (1.0 + v.target.abs()),
                    Some(g) => {
                        let (min, scale) = match g {
                            specdamp_core::krein::GramVerdict::Nondegenerate { min_abs_eigenvalue, scale }
                            | specdamp_core::krein::GramVerdict::Degenerate {
                                min_abs_eigenvalue, scale, ..
                            } => (*min_abs_eigenvalue, *scale),
                        };
                        min / scale - tol.neutral_tol
                    }
                })
                .fold(f64::INFINITY, f64::min);
            let tested = list.iter().filter(|v| !v.vacuous()).count();
            Verdict {
                condition: "(ii) nondegeneracy".into(),
                holds: Some(list.iter().all(|v| v.holds)),
                margin: Some(margin),
                detail: format!(
                    "{} candidate(s), {} on the spectrum, {} vacuous",
                    list.len(),
                    tested,
                    list.len() - tested
                ),
            }
        }
        None => not_evaluated("(ii) nondegeneracy"),
    });
    out.push(match &report.condition_iii {
        Some(c) => Verdict {
            condition: "(iii) stiffness bound".into(),
            holds: Some(c.holds),
            margin: Some(c.rhs - c.lhs),
            detail: format!("lhs = {}, rhs = {}", c.lhs, c.rhs),
        },
        None => not_evaluated("(iii) stiffness bound"),
    });
    out
}

fn not_evaluated(name: &str) -> Verdict {
    Verdict {
        condition: name.into(),
        holds: None,
        margin: None,
        detail: "not evaluated: no essential-spectrum proxy".into(),
    }
}

pub fn verdict_table(rows: &[Verdict]) -> String {
    let width = rows.iter().map(|r| r.condition.len()).max().unwrap_or(0).max(9);
    let mut s = format!("{:<width$}  {:<13}  {:>13}  detail\n", "condition", "verdict", "margin");
    for r in rows {
        let verdict = match r.holds {
            Some(true) => "holds",
            Some(false) => "fails",
            None => "not evaluated",
        };
        let margin = r.margin.map_or_else(|| "-".to_string(), |m| format!("{m:.6e}"));
        s.push_str(&format!("{:<width$}  {:<13}  {:>13}  {}\n", r.condition, verdict, margin, r.detail));
    }
    s
}

pub fn check(cfg: &RunConfig, seed: u64) -> Result<ConditionsSection, CliError> {
    let tol = cfg.tolerances;
    let model = cfg.build_model()?;
    let spectrum = solve_qep(&model, &tol)?;
    let report = evaluate_conditions(&model, &spectrum, cfg.essential_spectrum.as_deref(), seed, &tol)?;
    Ok(ConditionsSection::new(report, &tol))
}

#[derive(Serialize)]
struct EigenRow<'a> {
    index: usize,
    re_lambda: f64,
    im_lambda: f64,
    residual: f64,
    sign_type: &'a str,
    jordan_defect: usize,
    gram_min_eig: f64,
}

fn csv_bytes<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::numerical(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::numerical(e.to_string()))
}

pub fn eigenvalue_csv(bundle: &Bundle) -> Result<Vec<u8>, CliError> {
    csv_bytes(bundle.spectrum.eigenpairs.iter().enumerate().map(|(i, p)| {
        let c = bundle.signs.cluster_for(i);
        EigenRow {
            index: i,
            re_lambda: p.value.re,
            im_lambda: p.value.im,
            residual: p.residual,
            sign_type: c.sign_type.as_str(),
            jordan_defect: c.jordan_defect,
            gram_min_eig: c.gram_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }))
}

pub struct Simulation {
    pub config: SimulateConfig,
    pub trajectory: Trajectory,
}

fn initial_state(spectrum: &Spectrum, dim: usize, x0: &InitialState) -> Result<State, CliError> {
    let combine = |weights: &[f64]| {
        let mut acc = vec![Complex::new(0.0, 0.0); 2 * dim];
        for (w, p) in weights.iter().zip(&spectrum.eigenpairs) {
            for (a, z) in acc.iter_mut().zip(p.vector.position.iter().chain(&p.vector.velocity)) {
                *a += z * w;
            }
        }
        PhaseVector::from_stacked(&acc.iter().map(|z| z.re).collect::<Vec<_>>())
    };
    let modes = spectrum.eigenpairs.len();
    match x0 {
        InitialState::Eigenvector(k) if *k < modes => {
            let mut w = vec![0.0; modes];
            w[*k] = 1.0;
            Ok(combine(&w))
        }
        InitialState::Eigenvector(k) => Err(CliError::invalid(format!(
            "eigenvector {k} out of range (model has {modes})"
        ))),
        InitialState::ModalWeights(w) if w.len() == modes => Ok(combine(w)),
        InitialState::ModalWeights(w) => Err(CliError::invalid(format!(
            "expected {modes} modal weights, got {}",
            w.len()
        ))),
        InitialState::Vector(v) if v.len() == 2 * dim && v.iter().all(|x| x.is_finite()) => {
            Ok(PhaseVector::from_stacked(v))
        }
        InitialState::Vector(v) => Err(CliError::invalid(format!(
            "initial vector needs {} finite entries, got {}",
            2 * dim,
            v.len()
        ))),
    }
}

pub fn simulate(cfg: &RunConfig, t_max: Option<f64>, samples: Option<usize>) -> Result<Simulation, CliError> {
    let mut sim = cfg.simulate.clone().unwrap_or(SimulateConfig {
        x0: InitialState::Eigenvector(0),
        t_max: 10.0,
        samples: 201,
    });
    if let Some(t) = t_max {
        sim.t_max = t;
    }
    if let Some(s) = samples {
        sim.samples = s;
    }
    if !(sim.t_max >= 0.0 && sim.t_max.is_finite()) || sim.samples < 2 {
        return Err(CliError::invalid("need a finite t_max ≥ 0 and at least 2 samples"));
    }
    let tol = cfg.tolerances;
    let model = cfg.build_model()?;
    let spectrum = solve_qep(&model, &tol)?;
    let x0 = initial_state(&spectrum, model.dim(), &sim.x0)?;
    let last = (sim.samples - 1) as f64;
    let times: Vec<f64> = (0..sim.samples).map(|k| sim.t_max * k as f64 / last).collect();
    let trajectory = Evolver::with_spectrum(&model, &spectrum)?.evolve(&x0, &times)?;
    Ok(Simulation { config: sim, trajectory })
}

#[derive(Serialize)]
struct EnergyRow<'a> {
    t: f64,
    energy: f64,
    method: &'a str,
}

pub fn energy_csv(sim: &Simulation) -> Result<Vec<u8>, CliError> {
    let method = sim.trajectory.method.as_str();
    csv_bytes(
        sim.trajectory
            .times
            .iter()
            .zip(&sim.trajectory.energies)
            .map(|(&t, &energy)| EnergyRow { t, energy, method }),
    )
}

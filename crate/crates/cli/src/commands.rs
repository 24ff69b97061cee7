//! Pipelines behind each subcommand.

use crate::config::{Command, RunConfig, StudyKind};
use crate::error::CliError;
use meanfield_bose::bogoliubov::{
    build_h0, diagonalize_quadratic, match_quasiparticle_levels, quasifree_groundstate_check, spectral_data,
    CLUSTER_TOL,
};
use meanfield_bose::expansion::{
    expand, expand_level, rdm1_coefficients, remainder_identity_check, taylor_coefficients, torus_rdm1_closed_form,
};
use meanfield_bose::fock::{build_excitation_hamiltonian, build_hn, build_kops, excitation_map, FockBasis, OccupationBasis};
use meanfield_bose::linalg::{eigh, hermiticity_residual, max_abs_diff, re, CMatrix};
use meanfield_bose::model::{build_kernels, hartree_solve, HartreeOptions, HartreeSolution, Kernels};
use meanfield_bose::verify::{
    energy_convergence_study, projector_convergence_study, study_csv, study_summary_json, to_json,
    wavefunction_convergence_study, StudyReport, StudySetup,
};
use serde::Serialize;
use std::sync::Arc;
use std::time::Instant;

/// Printed summary, files for the output directory, and an optional failed check.
pub struct Outcome {
    pub summary: String,
    pub artifacts: Vec<(String, String)>,
    pub failure: Option<String>,
}

impl Outcome {
    fn single(name: &str, json: String) -> Self {
        Outcome {
            summary: json.clone(),
            artifacts: vec![(format!("{name}.json"), json)],
            failure: None,
        }
    }
}

#[derive(Serialize)]
struct Header {
    command: String,
    model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    model_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_seconds: Option<f64>,
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    #[serde(flatten)]
    header: Header,
    #[serde(flatten)]
    body: T,
}

type Pairs = Vec<(f64, f64)>;

fn matrix_pairs(m: &CMatrix) -> Vec<Pairs> {
    m.row_iter().map(|row| row.iter().map(|z| (z.re, z.im)).collect()).collect()
}

struct Context<'a> {
    config: &'a RunConfig,
    start: Instant,
}

impl Context<'_> {
    fn report<T: Serialize>(&self, body: T) -> String {
        self.report_with(body, true)
    }

    /// `with_hash = false` when the body already carries the model hash.
    fn report_with<T: Serialize>(&self, body: T, with_hash: bool) -> String {
        let header = Header {
            command: self.config.command.name(),
            model: self.config.model.name.clone(),
            model_hash: with_hash.then(|| self.config.model.hash()),
            elapsed_seconds: (!self.config.deterministic).then(|| self.start.elapsed().as_secs_f64()),
        };
        to_json(&Report { header, body })
    }

    fn hartree(&self) -> Result<HartreeSolution, CliError> {
        let opts = HartreeOptions {
            seed: self.config.seed,
            ..HartreeOptions::default()
        };
        Ok(hartree_solve(&self.config.model.model, &opts)?)
    }

    fn kernels(&self) -> Result<Kernels, CliError> {
        Ok(build_kernels(&self.hartree()?, &self.config.model.model)?)
    }
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    let ctx = Context {
        config,
        start: Instant::now(),
    };
    match config.command {
        Command::Hartree => hartree(&ctx),
        Command::Bogoliubov => bogoliubov(&ctx),
        Command::Expand => expansion(&ctx),
        Command::Verify { kind } => verify(&ctx, kind),
        Command::Rdm => rdm(&ctx),
        Command::Selftest => selftest(&ctx),
    }
}

#[derive(Serialize)]
struct HartreeBody {
    modes: usize,
    e_h: f64,
    mu_h: f64,
    g_h: f64,
    residual: f64,
    iterations: usize,
    phi: Pairs,
    h_spectrum: Vec<f64>,
    energy_history: Vec<f64>,
}

fn hartree(ctx: &Context) -> Result<Outcome, CliError> {
    let sol = ctx.hartree()?;
    let body = HartreeBody {
        modes: ctx.config.model.model.modes(),
        e_h: sol.e_h,
        mu_h: sol.mu_h,
        g_h: sol.g_h,
        residual: sol.residual,
        iterations: sol.iterations,
        phi: sol.phi.iter().map(|z| (z.re, z.im)).collect(),
        h_spectrum: eigh(&sol.h).0,
        energy_history: sol.energy_history.clone(),
    };
    Ok(Outcome::single("hartree", ctx.report(body)))
}

#[derive(Serialize)]
struct LevelRow {
    energy: f64,
    multiplicity: usize,
    occupations: Vec<usize>,
    predicted: f64,
    deviation: f64,
}

#[derive(Serialize)]
struct BogoliubovBody {
    nmax: usize,
    quasiparticle_energies: Vec<f64>,
    ground_energy: f64,
    relation_residual: f64,
    number_bound_constant: f64,
    reliable_levels: usize,
    levels: Vec<LevelRow>,
}

fn bogoliubov(ctx: &Context) -> Result<Outcome, CliError> {
    let kernels = ctx.kernels()?;
    let q = diagonalize_quadratic(&kernels)?;
    let basis = Arc::new(FockBasis::new(kernels.excitation_modes(), ctx.config.nmax)?);
    let sd = spectral_data(&build_h0(&build_kops(&kernels, &basis)?), 1, CLUSTER_TOL)?;
    let matches = match_quasiparticle_levels(&sd, &q.d, q.e00, sd.reliable, ctx.config.nmax);
    let levels = matches
        .into_iter()
        .map(|m| LevelRow {
            energy: m.energy,
            multiplicity: sd.multiplicity(m.level),
            occupations: m.occupations,
            predicted: m.predicted,
            deviation: m.deviation,
        })
        .collect();
    let body = BogoliubovBody {
        nmax: ctx.config.nmax,
        quasiparticle_energies: q.d.clone(),
        ground_energy: q.e00,
        relation_residual: q.map.relation_residual(),
        number_bound_constant: q.map.number_bound_constant(),
        reliable_levels: sd.reliable,
        levels,
    };
    Ok(Outcome::single("bogoliubov", ctx.report(body)))
}

fn expansion(ctx: &Context) -> Result<Outcome, CliError> {
    let c = ctx.config;
    let kernels = ctx.kernels()?;
    let mut result = expand(&kernels, c.nmax, c.level, c.order)?;
    result.model_hash = Some(c.model.hash());
    let json = ctx.report_with(&result, false);
    let mut artifacts = vec![("expand.json".to_string(), json.clone())];
    for l in 0..=c.order {
        artifacts.push((format!("projector_{l}.txt"), result.projector_operator(l)?.dump()));
    }
    Ok(Outcome {
        summary: json,
        artifacts,
        failure: None,
    })
}

fn study_outcome(ctx: &Context, name: &str, report: &StudyReport) -> Outcome {
    let summary = study_summary_json(report);
    let failure = (!report.pass).then(|| {
        let detail = match (&report.fit, &report.fit_failure) {
            (Some(f), _) => format!("slope {:.3} (r2 {:.4})", f.slope, f.r2),
            (None, Some(reason)) => reason.clone(),
            (None, None) => "no fit".into(),
        };
        format!("{name}: {detail}, expected slope at least {:.2}", report.expected_slope)
    });
    Outcome {
        summary: summary.clone(),
        artifacts: vec![
            (format!("{name}.csv"), study_csv(report)),
            (format!("{name}.json"), summary),
            (format!("{name}_report.json"), ctx.report(report)),
        ],
        failure,
    }
}

fn verify(ctx: &Context, kind: StudyKind) -> Result<Outcome, CliError> {
    let c = ctx.config;
    let setup = StudySetup::with_solution(c.model.model.clone(), ctx.hartree()?, c.nmax)?;
    let name = c.command.name().replace('-', "_");
    let report = match kind {
        StudyKind::Energy => energy_convergence_study(&setup, c.level, c.order, &c.nlist)?,
        StudyKind::Wavefunction => wavefunction_convergence_study(&setup, c.level, c.order, &c.nlist)?,
        StudyKind::Projector => projector_convergence_study(&setup, c.level, c.order, &c.nlist, &[])?.trace_norm,
    };
    Ok(study_outcome(ctx, &name, &report))
}

#[derive(Serialize)]
struct RdmBody {
    level: usize,
    nmax: usize,
    leading: Vec<Pairs>,
    first: Vec<Pairs>,
    first_h_basis: Vec<Pairs>,
    hermiticity: f64,
    trace: f64,
    closed_form_deviation: Option<f64>,
    closed_form_deviation_check: Option<f64>,
}

fn rdm(ctx: &Context) -> Result<Outcome, CliError> {
    let c = ctx.config;
    let kernels = ctx.kernels()?;
    let first_coefficient = |nmax: usize| -> Result<_, CliError> {
        let level = expand_level(&kernels, nmax, c.level, 1)?;
        Ok(rdm1_coefficients(&kernels, &level.basis, &level.projectors[0], &level.projectors[1])?)
    };
    let main = first_coefficient(c.nmax)?;
    let closed = c.model.torus.as_ref().filter(|_| c.level == 0).map(torus_rdm1_closed_form);
    let (deviation, deviation_check) = match &closed {
        Some(g) => (
            Some(max_abs_diff(&main.first, g)),
            Some(max_abs_diff(&first_coefficient(c.nmax + 2)?.first, g)),
        ),
        None => (None, None),
    };
    let hermiticity = hermiticity_residual(&main.first);
    let trace = main.first.trace().norm();
    let body = RdmBody {
        level: c.level,
        nmax: c.nmax,
        leading: matrix_pairs(&main.leading),
        first: matrix_pairs(&main.first),
        first_h_basis: matrix_pairs(&main.first_h_basis),
        hermiticity,
        trace,
        closed_form_deviation: deviation,
        closed_form_deviation_check: deviation_check,
    };
    let mut outcome = Outcome::single("rdm", ctx.report(body));
    if hermiticity > 1e-10 || trace > 1e-9 {
        outcome.failure = Some(format!("density coefficient hermiticity {hermiticity:.2e}, trace {trace:.2e}"));
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

#[derive(Serialize)]
struct SelftestBody {
    nmax: usize,
    checks: Vec<Check>,
    pass: bool,
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Largest excitation cutoff used for the small brute-force identities.
const SMALL_CUTOFF: usize = 6;
const SMALL_DIM: usize = 3000;

fn selftest(ctx: &Context) -> Result<Outcome, CliError> {
    let c = ctx.config;
    let model = &c.model.model;
    let sol = ctx.hartree()?;
    let kernels = build_kernels(&sol, model)?;
    let mut checks = vec![
        Check::at_most("hartree_residual", sol.residual, 1e-8),
        Check {
            name: "hartree_gap".into(),
            value: sol.g_h,
            tolerance: 0.0,
            pass: sol.g_h > 0.0,
        },
    ];

    let q = diagonalize_quadratic(&kernels)?;
    checks.push(Check::at_most("bogoliubov_relations", q.map.relation_residual(), 1e-10));
    let basis = Arc::new(FockBasis::new(kernels.excitation_modes(), c.nmax)?);
    let kops = build_kops(&kernels, &basis)?;
    let sd = spectral_data(&build_h0(&kops), 1, CLUSTER_TOL)?;
    checks.push(Check::at_most("bogoliubov_ground_energy", (sd.energy(0) - q.e00).abs(), 1e-6));
    let gap = sd.levels.get(1).map_or(0.0, |l| l.energy - sd.energy(0));
    checks.push(Check::at_most("bogoliubov_gap", (gap - q.d[0]).abs(), 1e-6));
    let wick = quasifree_groundstate_check(&sd.ground_vector(), &basis)?;
    checks.push(Check::at_most("wick_one_point", wick.max_one_point, 1e-9));
    checks.push(Check::at_most("wick_three_point", wick.max_three_point, 1e-9));
    checks.push(Check::at_most("wick_four_point", wick.max_four_point_residual, 1e-6));

    let small = c.nmax.min(SMALL_CUTOFF);
    let small_basis = Arc::new(FockBasis::new(kernels.excitation_modes(), small)?);
    let small_kops = build_kops(&kernels, &small_basis)?;
    let table = taylor_coefficients(4);
    let remainder = (0..=3)
        .map(|a| remainder_identity_check(&small_kops, &table, a, small).map(|r| r.residual))
        .collect::<Result<Vec<_>, _>>()?;
    checks.push(Check::at_most("remainder_identity", worst(remainder), 1e-10));

    let particles = 5;
    let (nbasis, hn) = build_hn(model, particles)?;
    if nbasis.dim() <= SMALL_DIM {
        let (_, _, u) = excitation_map(&kernels, particles)?;
        let shifted = hn - CMatrix::identity(u.ncols(), u.ncols()) * re(particles as f64 * sol.e_h);
        let conjugated = &u * shifted * u.adjoint();
        let built = build_excitation_hamiltonian(&kernels, particles)?.to_dense();
        checks.push(Check::at_most("excitation_hamiltonian", max_abs_diff(&conjugated, &built), 1e-9));
    }

    let result = expand(&kernels, c.nmax, 0, 2)?;
    let d = &result.diagnostics;
    checks.push(Check::at_most("projector_traces", worst(d.projector_traces.iter().copied()), 1e-9));
    checks.push(Check::at_most("projector_hermiticity", worst(d.projector_hermiticity.iter().copied()), 1e-9));
    checks.push(Check::at_most("projector_convolution", worst(d.convolution.iter().copied()), 1e-9));
    checks.push(Check::at_most("wavefunction_projectors", worst(d.wavefunction_projector.iter().copied()), 1e-9));
    if let Some(x) = d.energy_formula_agreement {
        checks.push(Check::at_most("energy_formulas", x, 1e-9));
    }
    if let Some(x) = d.chi_tilde_agreement {
        checks.push(Check::at_most("wavefunction_recursion", x, 1e-9));
    }
    let odd_alpha = worst(result.alpha.iter().skip(1).step_by(2).map(|&(x, y)| x.hypot(y)));
    checks.push(Check::at_most("odd_alpha", odd_alpha, 1e-12));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let failure = (!failed.is_empty()).then(|| format!("selftest checks failed: {}", failed.join(", ")));
    let body = SelftestBody {
        nmax: c.nmax,
        pass: failure.is_none(),
        checks,
    };
    let mut outcome = Outcome::single("selftest", ctx.report(body));
    outcome.failure = failure;
    Ok(outcome)
}

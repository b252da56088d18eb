use measurement_core::checks::born::{
    born_convergence_curve, check_hoeffding_grid, decreasing_from, first_n_below, hoeffding_grid, ConvergenceRow,
};
use measurement_core::checks::collapse::{
    check_collapse_weights, conditional_factorization_check, sequential_frequency_check,
};
use measurement_core::checks::overlap::{check_generic_orthogonality, overlap_statistics, OverlapParams, OverlapSummary};
use measurement_core::checks::postulate_a::check_postulate_a;
use measurement_core::checks::postulate_b::{check_postulate_b, PostulateBSetup};
use measurement_core::checks::CheckReport;
use measurement_core::engine::{cross_validate, CrossValidationConfig};
use measurement_core::linalg::{random_state, ProjectorFamily, StateVector};
use measurement_core::model::{Apparatus, Microsystem};
use measurement_core::{seed, Error};
use serde_json::json;

use crate::config::{
    non_orthogonal_micro, BornConfig, CollapseConfig, CrossValidateConfig, OverlapConfig, PostulateAConfig,
    PostulateBConfig, RunConfig,
};
use crate::output::OutputDir;
use crate::{CliError, Command, Outcome};

/// Relative slack for the monotonicity of the convergence curve.
pub const MONOTONE_REL_TOL: f64 = 1e-12;
/// Unitarity defect above which the negative control counts as rejected.
pub const REJECTION_THRESHOLD: f64 = 1e-6;

/// A check's report plus any CSV files it produces.
pub struct CheckRun {
    pub name: &'static str,
    pub report: CheckReport,
    pub csv: Vec<(String, String)>,
}

impl CheckRun {
    fn plain(name: &'static str, report: CheckReport) -> Self {
        CheckRun {
            name,
            report,
            csv: Vec::new(),
        }
    }
}

/// Suite members in output order.
pub const SUITE: [&str; 8] = [
    "postulate_a",
    "postulate_a_negative_control",
    "postulate_b",
    "hoeffding_grid",
    "born_convergence",
    "postulate_d",
    "generic_orthogonality",
    "cross_validation",
];

fn run_named(name: &str, cfg: &RunConfig, seed: u64) -> Result<CheckRun, CliError> {
    match name {
        "postulate_a" => Ok(CheckRun::plain("postulate_a", postulate_a(&cfg.postulate_a, seed)?)),
        "postulate_a_negative_control" => Ok(CheckRun::plain(
            "postulate_a_negative_control",
            negative_control(&cfg.postulate_a, seed)?,
        )),
        "postulate_b" => Ok(CheckRun::plain("postulate_b", postulate_b(&cfg.postulate_b, seed)?)),
        "hoeffding_grid" => Ok(CheckRun::plain("hoeffding_grid", hoeffding(&cfg.born)?)),
        "born_convergence" => born_convergence(&cfg.born),
        "postulate_d" => Ok(CheckRun::plain("postulate_d", collapse(&cfg.collapse, seed)?)),
        "generic_orthogonality" => overlap(&cfg.overlap, seed),
        "cross_validation" => Ok(CheckRun::plain(
            "cross_validation",
            cross_validation(&cfg.cross_validate, seed)?,
        )),
        other => unreachable!("unknown check {other}"),
    }
}

/// Runs `command`, writes its files to `out` when given, and returns the
/// reports and the JSON for stdout.
pub fn dispatch(command: Command, cfg: &RunConfig, out: Option<&OutputDir>) -> Result<Outcome, CliError> {
    let names: Vec<&str> = match command {
        Command::PostulateA => vec!["postulate_a"],
        Command::PostulateB => vec!["postulate_b"],
        Command::Born => vec!["hoeffding_grid", "born_convergence"],
        Command::Collapse => vec!["postulate_d"],
        Command::Overlap => vec!["generic_orthogonality"],
        Command::CrossValidate => vec!["cross_validation"],
        Command::Suite => SUITE.to_vec(),
    };
    let mut runs = Vec::with_capacity(names.len());
    for name in names {
        let run = run_named(name, cfg, seed::derive(cfg.seed, name))?;
        if let Some(dir) = out {
            dir.write_json(&format!("{}.json", run.name), &run.report)?;
            for (file, text) in &run.csv {
                dir.write_bytes(file, text.as_bytes())?;
            }
        }
        runs.push(run);
    }
    let reports: Vec<CheckReport> = runs.into_iter().map(|r| r.report).collect();
    let stdout = if command == Command::Suite || reports.len() > 1 {
        let summary = summary(cfg.seed, &reports);
        if let Some(dir) = out {
            dir.write_json("summary.json", &summary)?;
        }
        summary
    } else {
        serde_json::to_value(&reports[0]).expect("reports serialize")
    };
    Ok(Outcome { reports, stdout })
}

fn summary(master_seed: u64, reports: &[CheckReport]) -> serde_json::Value {
    json!({
        "seed": master_seed,
        "pass": reports.iter().all(|r| r.pass),
        "checks": reports.iter().map(|r| json!({
            "check": r.check,
            "pass": r.pass,
            "defect": r.defect,
            "tolerance": r.tolerance,
            "file": format!("{}.json", r.check),
        })).collect::<Vec<_>>(),
    })
}

fn apparatus_for(micro: &Microsystem, macrostate_dim: usize, seed: u64) -> Result<Apparatus, CliError> {
    Ok(Apparatus::with_labels("A", &micro.labels(), macrostate_dim, seed)?)
}

pub fn postulate_a(cfg: &PostulateAConfig, seed: u64) -> Result<CheckReport, CliError> {
    let micro = cfg.micro.build()?;
    let app = apparatus_for(&micro, cfg.macrostate_dim, seed::derive(seed, "apparatus"))?;
    Ok(check_postulate_a(&micro, &app, cfg.trials, seed::derive(seed, "trials"))?)
}

/// Feeds a non-orthogonal micro pair to the measurement builder. The defect
/// is `threshold / observed unitarity defect`, so the check passes iff the
/// construction is rejected with a defect of at least the threshold.
pub fn negative_control(cfg: &PostulateAConfig, seed: u64) -> Result<CheckReport, CliError> {
    let micro = non_orthogonal_micro(cfg.negative_control_overlap)?;
    let app = apparatus_for(&micro, cfg.macrostate_dim, seed::derive(seed, "apparatus"))?;
    let inner = check_postulate_a(&micro, &app, 1, seed::derive(seed, "trials"))?;
    let observed = inner.details.get("unitarity_defect").and_then(|v| v.as_f64());
    let defect = match observed {
        Some(d) if !inner.pass && d > 0.0 => REJECTION_THRESHOLD / d,
        _ => f64::INFINITY,
    };
    let details = json!({
        "micro_overlap": cfg.negative_control_overlap,
        "unitarity_defect": observed,
        "rejection_threshold": REJECTION_THRESHOLD,
        "postulate_a_pass": inner.pass,
    });
    Ok(CheckReport::new("postulate_a_negative_control", defect, 1.0, details))
}

/// Random normalized state inside the span of the outcome subspaces.
fn measurable_state(micro: &Microsystem, seed: u64) -> Result<StateVector, CliError> {
    let raw = random_state(micro.space(), seed);
    let mut acc = StateVector::zeros(micro.space().clone());
    for (label, _) in micro.outcomes() {
        acc = acc.add(&micro.projector(label)?.apply(&raw)?)?;
    }
    Ok(acc.normalized()?)
}

pub fn postulate_b(cfg: &PostulateBConfig, seed: u64) -> Result<CheckReport, CliError> {
    let micro = cfg.micro.build()?;
    let mut worst = 0.0f64;
    let mut per_seed = Vec::with_capacity(cfg.apparatus_seeds);
    for j in 0..cfg.apparatus_seeds as u64 {
        let setup = PostulateBSetup::new(
            micro.clone(),
            cfg.macrostate_dim,
            seed::derive_index(seed::derive(seed, "apparatus"), j),
            seed::derive(seed, "student"),
        )?;
        let mut seed_worst = 0.0f64;
        for i in 0..cfg.inputs as u64 {
            let psi = measurable_state(&micro, seed::derive_index(seed::derive(seed, "inputs"), i))?;
            let r = check_postulate_b(&setup, &psi, seed::derive_index(seed::derive(seed, "ready"), i))?;
            seed_worst = seed_worst.max(r.defect);
        }
        worst = worst.max(seed_worst);
        per_seed.push(json!({ "apparatus_seed_index": j, "max_b_false_weight": seed_worst }));
    }
    let details = json!({
        "inputs_per_seed": cfg.inputs,
        "apparatus_seeds": per_seed,
    });
    Ok(CheckReport::new(
        "postulate_b",
        worst,
        measurement_core::checks::postulate_b::POSTULATE_B_TOL,
        details,
    ))
}

pub fn hoeffding(cfg: &BornConfig) -> Result<CheckReport, CliError> {
    let grid = hoeffding_grid(&cfg.grid_p, &cfg.grid_epsilon, &cfg.grid_n)?;
    let mut report = check_hoeffding_grid(&grid);
    report.details["grid"] = serde_json::to_value(&grid).expect("grid serializes");
    Ok(report)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("N,chi_exact,ln_chi_exact,bound\n");
    for r in rows {
        s.push_str(&format!("{},{:?},{:?},{:?}\n", r.n, r.chi_exact, r.ln_chi_exact, r.bound));
    }
    s
}

/// Tail versus bound along the curve, plus monotone decrease from
/// `N ≥ 2/ε²`.
pub fn born_convergence(cfg: &BornConfig) -> Result<CheckRun, CliError> {
    let rows = born_convergence_curve(cfg.p, cfg.epsilon, &cfg.n_list)?;
    let from_n = 2.0 / (cfg.epsilon * cfg.epsilon);
    let decreasing = decreasing_from(&rows, from_n, MONOTONE_REL_TOL);
    let defect = rows.iter().map(|r| r.chi_exact - r.bound).fold(f64::NEG_INFINITY, f64::max);
    let first: Vec<_> = cfg
        .thresholds
        .iter()
        .map(|&t| json!({ "threshold": t, "first_n": first_n_below(&rows, t) }))
        .collect();
    let details = json!({
        "p": cfg.p,
        "epsilon": cfg.epsilon,
        "monotone_from_n": from_n,
        "decreasing": decreasing,
        "first_n_below": first,
        "rows": rows,
    });
    let mut report = CheckReport::new("born_convergence", defect, 0.0, details);
    report.pass &= decreasing;
    Ok(CheckRun {
        name: "born_convergence",
        report,
        csv: vec![("born_convergence.csv".into(), convergence_csv(&rows))],
    })
}

fn random_families(dim: usize, seed: u64, index: u64) -> Result<(ProjectorFamily, ProjectorFamily), Error> {
    let space = measurement_core::linalg::SpaceLabel::new("s", dim)?;
    let r = 1 + (index as usize % (dim - 1));
    let first = ProjectorFamily::random(space.clone(), &["1", "2"], &[r, dim - r], seed::derive(seed, "first"))?;
    let mut ranks = vec![1; dim.min(3)];
    ranks[0] += dim - ranks.iter().sum::<usize>();
    let labels: Vec<&str> = ["alpha", "beta", "gamma"][..ranks.len()].to_vec();
    let second = ProjectorFamily::random(space, &labels, &ranks, seed::derive(seed, "second"))?;
    Ok((first, second))
}

/// Ledger against direct projector algebra and factorization on the
/// configured state, the same on random instances, and frequency bands.
pub fn collapse(cfg: &CollapseConfig, seed: u64) -> Result<CheckReport, CliError> {
    let psi = cfg.state()?;
    let (first, second) = cfg.families()?;
    let mut parts = vec![
        check_collapse_weights(&psi, &first, &second)?,
        conditional_factorization_check(&psi, &first, &second)?,
    ];
    if cfg.random_instances > 0 {
        if cfg.random_dim < 2 {
            return Err(CliError::Config("collapse.random_dim must be at least 2".into()));
        }
        let base = seed::derive(seed, "random");
        let mut worst_weights = 0.0f64;
        let mut worst_factor = 0.0f64;
        let mut all = true;
        for i in 0..cfg.random_instances as u64 {
            let s = seed::derive_index(base, i);
            let (f, g) = random_families(cfg.random_dim, s, i)?;
            let space = f.ambient().clone();
            let phi = random_state(&space, seed::derive(s, "psi"));
            let w = check_collapse_weights(&phi, &f, &g)?;
            let c = conditional_factorization_check(&phi, &f, &g)?;
            worst_weights = worst_weights.max(w.defect);
            worst_factor = worst_factor.max(c.defect);
            all &= w.pass && c.pass;
        }
        let tol = measurement_core::checks::collapse::COLLAPSE_TOL;
        let details = json!({
            "instances": cfg.random_instances,
            "dim": cfg.random_dim,
            "max_weight_defect": worst_weights,
            "max_factorization_defect": worst_factor,
        });
        let mut r = CheckReport::new("random_instances", worst_weights.max(worst_factor), tol, details);
        r.pass &= all;
        parts.push(r);
    }
    if cfg.samples > 0 {
        parts.push(sequential_frequency_check(
            &psi,
            &first,
            &second,
            cfg.samples,
            seed::derive(seed, "samples"),
        )?);
    }
    Ok(CheckReport::combine("postulate_d", parts))
}

pub fn overlap(cfg: &OverlapConfig, seed: u64) -> Result<CheckRun, CliError> {
    if cfg.dims.is_empty() || cfg.dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config("overlap.dims must be non-empty and strictly ascending".into()));
    }
    let summaries = cfg
        .dims
        .iter()
        .map(|&d| {
            let params = OverlapParams {
                d,
                n_pairs: cfg.n_pairs,
                subspace_dim: cfg.subspace_dim.min(d),
                subspace_pairs: cfg.subspace_pairs,
                bins: cfg.bins,
            };
            overlap_statistics(&params, seed::derive_index(seed, d as u64))
        })
        .collect::<measurement_core::Result<Vec<OverlapSummary>>>()?;
    let mut csv = Vec::new();
    for (i, s) in summaries.iter().enumerate() {
        s.write_histogram_csv(&mut csv, i == 0)?;
    }
    let mut report = check_generic_orthogonality(&summaries);
    report.details["histograms"] = serde_json::to_value(
        summaries
            .iter()
            .map(|s| json!({ "d": s.d, "bins": s.histogram, "overflow": s.overflow }))
            .collect::<Vec<_>>(),
    )
    .expect("histograms serialize");
    Ok(CheckRun {
        name: "generic_orthogonality",
        report,
        csv: vec![(
            "overlap_histogram.csv".into(),
            String::from_utf8(csv).expect("csv is utf-8"),
        )],
    })
}

pub fn cross_validation(cfg: &CrossValidateConfig, seed: u64) -> Result<CheckReport, CliError> {
    if cfg.copies.is_empty() {
        return Err(CliError::Config("cross_validate.copies is empty".into()));
    }
    let mut worst = 0.0f64;
    let mut runs = Vec::new();
    for &copies in &cfg.copies {
        let r = cross_validate(&CrossValidationConfig {
            copies,
            p: cfg.p,
            macrostate_dim: cfg.macrostate_dim,
            seed: seed::derive_index(seed, copies as u64),
            budget: cfg.budget,
        })?;
        worst = worst.max(r.max_discrepancy);
        runs.push(r);
    }
    let details = json!({ "runs": runs });
    Ok(CheckReport::new(
        "cross_validation",
        worst,
        measurement_core::checks::postulate_b::POSTULATE_B_TOL,
        details,
    ))
}

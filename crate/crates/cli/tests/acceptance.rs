//! Acceptance criteria, one pass/fail line each. Run with
//! `cargo test -p measurement-cli --test acceptance`.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use measurement_core::checks::born::*;
use measurement_core::checks::collapse::*;
use measurement_core::checks::overlap::*;
use measurement_core::checks::postulate_a::*;
use measurement_core::checks::postulate_b::*;
use measurement_core::engine::{collapse_branch_ledger, cross_validate, CrossValidationConfig};
use measurement_core::linalg::*;
use measurement_core::model::*;
use measurement_core::{seed, Error};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn qubit() -> Microsystem {
    Microsystem::with_coordinate_outcomes(SpaceLabel::new("s", 2).unwrap(), &[("1", &[0]), ("2", &[1])]).unwrap()
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn hoeffding_bound_grid() -> Verdict {
    let grid = hoeffding_grid(&DEFAULT_P_GRID, &DEFAULT_EPSILON_GRID, &DEFAULT_N_GRID).unwrap();
    let violations = grid.iter().filter(|g| g.chi_exact > g.bound).count();
    let deep = chi_norm_exact(&BornParams::new(0.5, 0.1, 10_000).unwrap());
    verdict(
        grid.len() == 108 && violations == 0 && deep < 1e-80,
        format!("{} grid points, {violations} above the bound; chi(p=0.5, eps=0.1, N=1e4) = {deep:e}", grid.len()),
    )
}

/// Tail by a multiplicative recurrence over m, independent of the
/// saddle-point evaluation.
fn recurrence_tail(p: f64, eps: f64, n: u64) -> f64 {
    let ln_ratio = (p / (1.0 - p)).ln();
    let mut ln_term = n as f64 * (1.0 - p).ln();
    let mut terms = Vec::new();
    for m in 0..=n {
        let x = m as f64 / n as f64;
        if x <= p - eps + 1e-12 || x >= p + eps - 1e-12 {
            terms.push(ln_term);
        }
        if m < n {
            ln_term += ((n - m) as f64).ln() - ((m + 1) as f64).ln() + ln_ratio;
        }
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn born_convergence() -> Verdict {
    let (p, eps) = (0.3, 0.05);
    let mut ns: Vec<u64> = (1..=25).map(|i| 200 * i).collect();
    ns.extend([6000, 8000, 10_000]);
    let rows = born_convergence_curve(p, eps, &ns).unwrap();
    let first = first_n_below(&rows, 1e-3);
    let from = 2.0 / (eps * eps);
    let decreasing = decreasing_from(&rows, from, 1e-12);
    let oracle_gap = rows
        .iter()
        .map(|r| ((r.ln_chi_exact - recurrence_tail(p, eps, r.n)) / r.ln_chi_exact).abs())
        .fold(0.0, f64::max);
    verdict(
        first.is_some_and(|n| n <= 5000) && decreasing && oracle_gap < 1e-9,
        format!(
            "first N with tail < 1e-3: {first:?}; decreasing for N >= {from:.0}: {decreasing}; max relative gap to recurrence oracle {oracle_gap:e}"
        ),
    )
}

fn dense_ledger_equivalence() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut dims = Vec::new();
    for copies in 1..=3 {
        let r = cross_validate(&CrossValidationConfig {
            copies,
            p: 0.3,
            macrostate_dim: 4,
            seed: 5,
            ..Default::default()
        })
        .unwrap();
        worst = worst.max(r.max_discrepancy);
        dims.push(r.joint_dim);
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-9 && secs < 60.0,
        format!("joint dims {dims:?}; max discrepancy {worst:e}; {secs:.2}s"),
    )
}

fn postulate_a() -> Verdict {
    let micro = qubit();
    let app = build_apparatus("A", 2, 4, 21).unwrap();
    let closure = check_outcome_subspace_closure(&micro, &app, 100, 22).unwrap();

    let s = SpaceLabel::new("s", 2).unwrap();
    let v2 = CVector::from_vec(vec![c(0.3), c((1.0f64 - 0.09).sqrt())]);
    let bad = Microsystem::new(
        s.clone(),
        vec![
            ("1".into(), Subspace::coordinate(s.clone(), &[0]).unwrap()),
            ("2".into(), Subspace::from_vectors(s.clone(), &[v2]).unwrap()),
        ],
    )
    .unwrap();
    let asm = ExperimentAssembly::of(&[(bad.space(), SubsystemKind::Micro), (app.space(), SubsystemKind::Apparatus)]).unwrap();
    let rejected = match measurement_step(&asm, &app, &bad) {
        Err(Error::NotUnitary { defect }) => Some(defect),
        _ => None,
    };
    // the same completion assembled by hand, measured in operator norm
    let da = app.space().dim();
    let mut w = CMatrix::zeros(2 * da, 2 * da);
    let mut rest = CMatrix::identity(2, 2);
    for (label, sub) in bad.outcomes() {
        let p = projector_from_subspace(sub);
        rest -= p.matrix();
        w += kron(p.matrix(), &app.transition_unitary(label).unwrap());
    }
    w += kron(&rest, &CMatrix::identity(da, da));
    let norm_defect = operator_norm(&(w.adjoint() * &w - CMatrix::identity(2 * da, 2 * da)));

    verdict(
        closure.pass && closure.defect <= 1e-10 && rejected.is_some_and(|d| d > 1e-6) && norm_defect > 1e-6,
        format!(
            "closure max leak over 100 trials {:e}; negative control rejected with defect {:?}, ||M^H M - I|| = {norm_defect:e}",
            closure.defect, rejected
        ),
    )
}

fn postulate_b() -> Verdict {
    let mut worst = 0.0f64;
    let mut runs = 0;
    for j in 0..5u64 {
        let setup = PostulateBSetup::new(qubit(), 4, seed::derive_index(31, j), 32).unwrap();
        for i in 0..50u64 {
            let psi = random_state(setup.micro.space(), seed::derive_index(33, i));
            let r = check_postulate_b(&setup, &psi, seed::derive_index(34, i)).unwrap();
            worst = worst.max(r.defect);
            runs += 1;
        }
    }
    verdict(worst <= 1e-9, format!("{runs} runs; max B-false weight {worst:e}"))
}

fn postulate_d() -> Verdict {
    let s4 = SpaceLabel::new("s", 4).unwrap();
    let mut weight_gap = 0.0f64;
    let mut total_gap = 0.0f64;
    let mut factor_gap = 0.0f64;
    for i in 0..100u64 {
        let base = seed::derive_index(41, i);
        let r = 1 + (i as usize % 3);
        let first = ProjectorFamily::random(s4.clone(), &["1", "2"], &[r, 4 - r], seed::derive(base, "first")).unwrap();
        let second =
            ProjectorFamily::random(s4.clone(), &["alpha", "beta", "gamma"], &[2, 1, 1], seed::derive(base, "second")).unwrap();
        let psi = random_state(&s4, seed::derive(base, "psi"));
        let ledger = collapse_branch_ledger(&psi, &first, &second).unwrap();
        let direct = collapse_weights_direct(&psi, &first, &second).unwrap();
        for (b, d) in ledger.branches().iter().zip(&direct) {
            weight_gap = weight_gap.max((b.weight - d.weight).abs());
        }
        total_gap = total_gap.max((ledger.total_weight() - 1.0).abs());
        factor_gap = factor_gap.max(conditional_factorization_check(&psi, &first, &second).unwrap().defect);
    }

    let q = SpaceLabel::new("s", 2).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = ProjectorFamily::from_subspaces(
        q.clone(),
        vec![
            ("1".into(), Subspace::coordinate(q.clone(), &[0]).unwrap()),
            ("2".into(), Subspace::coordinate(q.clone(), &[1]).unwrap()),
        ],
    )
    .unwrap();
    let x = ProjectorFamily::from_subspaces(
        q.clone(),
        vec![
            ("alpha".into(), Subspace::from_vectors(q.clone(), &[CVector::from_vec(vec![c(h), c(h)])]).unwrap()),
            ("beta".into(), Subspace::from_vectors(q.clone(), &[CVector::from_vec(vec![c(h), c(-h)])]).unwrap()),
        ],
    )
    .unwrap();
    let psi = StateVector::basis(q, 0).unwrap();
    let mc = sequential_frequency_check(&psi, &z, &x, 100_000, 42).unwrap();
    let targets = [0.5, 0.5, 0.0, 0.0];
    let bands = mc.details["bands"].as_array().unwrap();
    let on_target = bands
        .iter()
        .zip(targets)
        .all(|(b, t)| (b["weight"].as_f64().unwrap() - t).abs() < 1e-12);
    let freqs: Vec<f64> = bands.iter().map(|b| b["frequency"].as_f64().unwrap()).collect();
    verdict(
        weight_gap <= 1e-10 && total_gap <= 1e-10 && factor_gap <= 1e-10 && mc.pass && on_target,
        format!(
            "ledger vs direct {weight_gap:e}; |sum - 1| {total_gap:e}; factorization {factor_gap:e}; qubit frequencies {freqs:?}, worst {:.2} sigma",
            mc.defect
        ),
    )
}

fn generic_orthogonality() -> Verdict {
    let summaries: Vec<OverlapSummary> = [64usize, 1024, 4096]
        .iter()
        .map(|&d| overlap_statistics(&OverlapParams::new(d, 10_000), seed::derive_index(51, d as u64)).unwrap())
        .collect();
    let within = summaries.iter().all(|s| (s.mean - 1.0 / s.d as f64).abs() <= 3.0 * s.std_error);
    let decreasing = summaries.windows(2).all(|w| w[1].mean < w[0].mean);
    let z: Vec<String> = summaries.iter().map(|s| format!("d={} z={:+.2}", s.d, s.z)).collect();
    verdict(within && decreasing, format!("{}; means strictly decreasing: {decreasing}", z.join(", ")))
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_measure-sim");
    let root = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "4"), ("c", "4")] {
        let dir = root.path().join(run);
        let status = Command::new(bin)
            .args(["suite", "--seed", "2024", "--out"])
            .arg(&dir)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        if status.status.code() != Some(0) {
            return verdict(false, format!("suite exited with {:?}", status.status.code()));
        }
        outputs.push(read_dir_bytes(&dir));
    }
    let files = outputs[0].len();
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    verdict(
        same && files >= 10,
        format!("{files} files identical across two runs and 1 vs 4 threads: {same}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("Hoeffding bound over the default grid", hoeffding_bound_grid),
        ("Born convergence at p=0.3, eps=0.05", born_convergence),
        ("dense evolution matches the branch ledger", dense_ledger_equivalence),
        ("outcome subspaces and negative control", postulate_a),
        ("observer attests an allowed outcome", postulate_b),
        ("sequential measurement weights and frequencies", postulate_d),
        ("generic near-orthogonality", generic_orthogonality),
        ("suite output determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        println!("criterion {}: {} [{}] {}", i + 1, name, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

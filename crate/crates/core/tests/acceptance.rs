//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qdf::bayes_tomo::{bloch_ball_grid, convergence_experiment, GridSpec, PriorGrid};
use qdf::classical::{
    anticorrelation_table, enumerated_representation, extension_feasible_classical,
    finite_representation, is_symmetric_dist, limit_convergence_demo, ClassicalCertificate,
    ClassicalVerdict, CountDistribution, CountFamily, LinearFact, OrbitLabel,
};
use qdf::definetti::{
    illegal_probability_growth, induced_sequence_distribution, mix_product_operators,
    mix_product_states, reconstruct_multisystem, witness_from_operator,
};
use qdf::exchange::{
    extension_feasible, ghz_state, is_symmetric, pure_marginal_shortcut, ExtensionVerdict,
    InfeasibilityReason, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use qdf::opalg::tensor_power;
use qdf::random::{random_mixed, random_pure, random_qubit, random_weights};
use qdf::realhilbert::{
    dimension_gap, real_product_span_residual, sigma2_ensemble, sigma2_pair_state,
    validate_real_state, DimensionGap,
};
use qdf::states_povm::{
    born, build_minimal_ic_povm, density_from_bloch, dual_frame, ensemble_to_density,
    reconstruct_operator, tetrahedron_povm, BlochVector, DensityOperator, Ensemble,
};
use qdf::{Operator, Rational};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(
        elapsed.as_secs_f64() < limit_s,
        format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64()),
    )
}

fn bloch(s1: f64, s2: f64, s3: f64) -> DensityOperator<f64> {
    density_from_bloch(BlochVector::new(s1, s2, s3).unwrap())
}

fn ic_povm_construction() -> Outcome {
    let mut worst = 0.0f64;
    for d in 2..=5 {
        let start = Instant::now();
        let povm = build_minimal_ic_povm::<f64>(d).map_err(|e| e.to_string())?;
        ensure(
            povm.len() == d * d,
            format!("d={d}: {} elements", povm.len()),
        )?;
        let min_eig = povm
            .elements()
            .iter()
            .map(|e| e.eig().min_value())
            .fold(f64::INFINITY, f64::min);
        ensure(
            min_eig >= -1e-12,
            format!("d={d}: element eigenvalue {min_eig:e}"),
        )?;
        let res = povm.identity_residual();
        ensure(res <= 1e-9, format!("d={d}: identity residual {res:e}"))?;
        ensure(
            povm.gram_rank() == d * d,
            format!("d={d}: Gram rank {}", povm.gram_rank()),
        )?;
        within(start.elapsed(), 1.0)?;
        worst = worst.max(res);
    }
    Ok(format!(
        "d=2..5 give d^2 PSD elements, max identity residual {worst:.1e}, full Gram rank"
    ))
}

fn informational_completeness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for d in [2, 3] {
        let frame = dual_frame(&build_minimal_ic_povm::<f64>(d).unwrap()).unwrap();
        for i in 0..100 {
            let rho = if i % 2 == 0 {
                random_mixed(d, &mut rng)
            } else {
                random_pure(d, &mut rng)
            };
            let p = born(&rho, frame.povm()).unwrap();
            let back = reconstruct_operator(&p, &frame).unwrap();
            let dist = qdf::states_povm::trace_distance(&back, rho.as_operator());
            worst = worst.max(dist);
        }
    }
    ensure(worst <= 1e-8, format!("trace distance {worst:e}"))?;
    within(start.elapsed(), 5.0)?;
    Ok(format!(
        "200 states (d=2,3) reconstructed, max trace distance {worst:.1e}"
    ))
}

fn half_e3_probabilities() -> Outcome {
    let rho = bloch(0.0, 0.0, 0.5);
    let up = rho.matrix()[(0, 0)];
    ensure(
        (up.re - 0.75).abs() <= 1e-12 && up.im.abs() <= 1e-12,
        format!("<e3|rho|e3> = {up}"),
    )?;
    let r3 = 3f64.sqrt() / 2.0;
    let n_plus = bloch(r3, 0.0, 0.5);
    let n_minus = bloch(-r3, 0.0, 0.5);
    for n in [&n_plus, &n_minus] {
        let overlap = n.matrix()[(0, 0)].re;
        ensure(
            (overlap - 0.75).abs() <= 1e-12,
            format!("|<e3|n>|^2 = {overlap}"),
        )?;
    }
    let eigen = ensemble_to_density(
        &Ensemble::new(
            vec![0.75, 0.25],
            vec![bloch(0.0, 0.0, 1.0), bloch(0.0, 0.0, -1.0)],
        )
        .unwrap(),
    );
    let tilted =
        ensemble_to_density(&Ensemble::new(vec![0.5, 0.5], vec![n_plus, n_minus]).unwrap());
    let diff = eigen.as_operator().max_abs_diff(tilted.as_operator());
    ensure(diff <= 1e-12, format!("decompositions differ by {diff:e}"))?;
    let diff_rho = eigen.as_operator().max_abs_diff(rho.as_operator());
    ensure(
        diff_rho <= 1e-12,
        format!("eigen decomposition differs from rho by {diff_rho:e}"),
    )?;
    Ok(format!(
        "both probabilities 3/4; ensembles agree within {diff:.1e}"
    ))
}

fn tetrahedron_bound() -> Outcome {
    let povm = tetrahedron_povm::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut max_p = 0.0f64;
    for i in 0..10_000 {
        let rho = if i % 2 == 0 {
            random_qubit(&mut rng)
        } else {
            random_pure(2, &mut rng)
        };
        let p = born(&rho, &povm).unwrap();
        max_p = p.iter().copied().fold(max_p, f64::max);
    }
    ensure(max_p <= 0.5 + 1e-12, format!("max probability {max_p}"))?;
    let frame = dual_frame(&povm).unwrap();
    let a = reconstruct_operator(&[0.75, 0.125, 0.0625, 0.0625], &frame).unwrap();
    let tr = a.trace();
    let min = a.eig().min_value();
    ensure((tr - 1.0).abs() <= 1e-12, format!("trace {tr}"))?;
    ensure(min < 0.0, format!("min eigenvalue {min}"))?;
    Ok(format!("max over 10^4 states {max_p:.15}; (3/4,1/8,1/16,1/16) gives trace {tr:.12}, eigenvalue {min:.6}"))
}

fn definetti_round_trip() -> Outcome {
    let start = Instant::now();
    let povm = tetrahedron_povm::<f64>();
    let frame = dual_frame(&povm).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut runs = 0;
    for n in [2, 3] {
        for trial in 0..40 {
            let k = 1 + trial % 4;
            let w = random_weights(k, &mut rng);
            let states = (0..k).map(|_| random_qubit(&mut rng)).collect();
            let state = mix_product_states(&Ensemble::new(w, states).unwrap(), n).unwrap();
            let back = reconstruct_multisystem(
                &induced_sequence_distribution(&state, &povm).unwrap(),
                &frame,
            )
            .unwrap();
            worst = worst.max(back.operator().max_abs_diff(state.operator()));
            runs += 1;
        }
    }
    ensure(worst <= 1e-8, format!("residual {worst:e}"))?;
    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "{runs} ensembles at N=2,3, max residual {worst:.1e}"
    ))
}

fn witness_growth() -> Outcome {
    let a = Operator::from_real_diagonal(&[1.25, -0.25]);
    let w = witness_from_operator(&a).map_err(|e| e.to_string())?;
    ensure(
        (w.lambda - 0.25).abs() <= 1e-12,
        format!("lambda {}", w.lambda),
    )?;
    let rho = DensityOperator::<f64>::maximally_mixed(2).into_operator();
    let (t_a, t_rho) = (a.trace_product(&w.pi), rho.trace_product(&w.pi));
    ensure(
        (t_a - 1.25).abs() <= 1e-12 && (t_rho - 0.5).abs() <= 1e-12,
        "unexpected single-system values",
    )?;
    let weights = [0.1, 0.9];
    let components = [a, rho];
    let n_list: Vec<usize> = (1..=11).map(|k| 2 * k).collect();
    let report = illegal_probability_growth(&weights, &components, &w.pi, &n_list)
        .map_err(|e| e.to_string())?;
    // v(N) = 0.1 a_N + 0.9 r_N with a_N = 1.25 a_(N-1), r_N = 0.5 r_(N-1)
    let mut recurrence = Vec::new();
    let (mut pa, mut pr) = (1.0f64, 1.0f64);
    for _ in 1..=22 {
        pa *= 1.25;
        pr *= 0.5;
        recurrence.push(0.1 * pa + 0.9 * pr);
    }
    let mut first = None;
    for (n, v) in &report.values {
        let scalar = recurrence[n - 1];
        ensure(
            (v - scalar).abs() <= 1e-12,
            format!("N={n}: {v} vs recurrence {scalar}"),
        )?;
        if first.is_none() && scalar > 1.0 {
            first = Some(*n);
        }
        if *n <= 8 {
            let mixed = mix_product_operators(&weights, &components, *n).unwrap();
            let direct = mixed.trace_product(&tensor_power(&w.pi, *n).unwrap());
            ensure(
                (direct - scalar).abs() <= 1e-12,
                format!("N={n}: operator value {direct}"),
            )?;
        }
    }
    ensure(
        report.first_exceeding == first,
        "first exceeding N disagrees with recurrence",
    )?;
    let n = first.ok_or("never exceeds 1 up to N=22")?;
    ensure(n <= 22, format!("first exceeding N = {n}"))?;
    Ok(format!(
        "lambda=0.25, value exceeds 1 first at N={n}; matches recurrence (operator check N<=8)"
    ))
}

fn ghz_counterexample() -> Outcome {
    let start = Instant::now();
    let ghz = ghz_state::<f64>();
    ensure(is_symmetric(&ghz, 1e-12), "GHZ not symmetric")?;
    ensure(
        pure_marginal_shortcut(&ghz, 1) == Some(ExtensionVerdict::Infeasible),
        "shortcut did not fire",
    )?;
    let report =
        extension_feasible(&ghz, 1, DEFAULT_MAX_ITER, DEFAULT_TOL).map_err(|e| e.to_string())?;
    ensure(
        report.verdict == ExtensionVerdict::Infeasible,
        format!("{:?}", report.verdict),
    )?;
    ensure(
        report.reason == Some(InfeasibilityReason::PureMarginal),
        format!("{:?}", report.reason),
    )?;
    within(start.elapsed(), 1.0)?;
    Ok("symmetric; extension to N=4 infeasible via the pure-marginal shortcut".into())
}

fn classical_counterexample() -> Outcome {
    let table = anticorrelation_table::<Rational>();
    let zero = Rational::from_integer(0.into());
    ensure(is_symmetric_dist(&table, &zero), "table not symmetric")?;
    let ext = extension_feasible_classical(&table, 1).map_err(|e| e.to_string())?;
    ensure(
        ext.verdict == ClassicalVerdict::Infeasible,
        "LP reported feasible",
    )?;
    let ClassicalCertificate::Farkas { contradiction, .. } = ext.certificate else {
        return Err("no Farkas certificate".into());
    };
    let c = contradiction.ok_or("propagation found no contradiction")?;
    let q011 = OrbitLabel(vec![0, 1, 1]);
    let q111 = OrbitLabel(vec![1, 1, 1]);
    let one = Rational::from_integer(1.into());
    ensure(
        c.derived == LinearFact::single(q011.clone(), Rational::new(1.into(), 2.into())),
        format!("derived {}", c.derived),
    )?;
    ensure(
        c.violated
            == LinearFact {
                terms: vec![(q011, one.clone()), (q111, one)],
                rhs: zero,
            },
        format!("violated {}", c.violated),
    )?;
    Ok(format!(
        "symmetric, exactly infeasible for M=1: {} and {}",
        c.derived, c.violated
    ))
}

fn appendix_machinery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for big_m in 1..=8 {
        let mut families = vec![CountFamily::Uniform.at::<f64>(big_m).unwrap()];
        families.push(CountDistribution::new(random_weights(big_m + 1, &mut rng)).unwrap());
        for cd in &families {
            for n in 1..=big_m {
                let a = finite_representation(cd, n).unwrap();
                let b = enumerated_representation(cd, n).unwrap();
                let gap = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(gap);
                cases += 1;
            }
        }
        let exact = CountFamily::Uniform.at::<Rational>(big_m).unwrap();
        for n in 1..=big_m {
            ensure(
                finite_representation(&exact, n).unwrap()
                    == enumerated_representation(&exact, n).unwrap(),
                format!("exact mismatch M={big_m}, N={n}"),
            )?;
        }
    }
    ensure(worst <= 1e-12, format!("enumeration gap {worst:e}"))?;
    let rows = limit_convergence_demo::<f64>(&CountFamily::Uniform, 2, &[8, 64, 512]).unwrap();
    let gap512 = rows.last().unwrap().max_gap;
    ensure(gap512 <= 2e-3, format!("gap at M=512 is {gap512:e}"))?;
    Ok(format!("{cases} (M,N) cases match enumeration within {worst:.1e}; gap to 1/3 at M=512 is {gap512:.1e}"))
}

fn real_hilbert_counterexample() -> Outcome {
    let op = sigma2_pair_state::<f64>();
    let verdict = validate_real_state(&op);
    ensure(verdict.valid, format!("{verdict:?}"))?;
    let span = real_product_span_residual(&op, 2).map_err(|e| e.to_string())?;
    ensure(
        (span.residual_norm - 0.5).abs() <= 1e-12,
        format!("residual {}", span.residual_norm),
    )?;
    let gap = dimension_gap(2, 2).map_err(|e| e.to_string())?;
    ensure(
        gap == DimensionGap {
            lhs: 10,
            rhs: 9,
            gap_positive: true,
        },
        format!("{gap:?}"),
    )?;
    let povm = tetrahedron_povm::<f64>();
    let state = mix_product_states(&sigma2_ensemble::<f64>(), 2).unwrap();
    let as_real = op.to_hermitian();
    ensure(
        state.operator().max_abs_diff(&as_real) <= 1e-15,
        "complex mixture differs from real matrix",
    )?;
    let back = reconstruct_multisystem(
        &induced_sequence_distribution(&state, &povm).unwrap(),
        &dual_frame(&povm).unwrap(),
    )
    .unwrap();
    let rt = back.operator().max_abs_diff(state.operator());
    ensure(rt <= 1e-8, format!("complex round trip residual {rt:e}"))?;
    Ok(format!(
        "valid real state, span residual {:.15}, gap (10, 9), complex round trip {rt:.1e}",
        span.residual_norm
    ))
}

fn bayesian_convergence() -> Outcome {
    let start = Instant::now();
    let grid = bloch_ball_grid::<f64>(&GridSpec::default()).unwrap();
    ensure(grid.len() == 200, format!("grid has {} points", grid.len()))?;
    let prior_a = PriorGrid::uniform(grid.clone()).unwrap();
    let prior_b = PriorGrid::mixed_biased(grid).unwrap();
    let truth = bloch(0.0, 0.0, 0.5);
    let trace = convergence_experiment(
        &prior_a,
        &prior_b,
        &truth,
        &tetrahedron_povm(),
        &[0, 100, 1000, 10_000],
        42,
    )
    .map_err(|e| e.to_string())?;
    let last = trace.rows.last().unwrap();
    ensure(last.k == 10_000, "missing K=10^4 row")?;
    ensure(
        last.dist_ab <= 0.05,
        format!("inter-prior distance {}", last.dist_ab),
    )?;
    ensure(
        last.dist_a_true <= 0.05 && last.dist_b_true <= 0.05,
        format!(
            "distances to truth {} / {}",
            last.dist_a_true, last.dist_b_true
        ),
    )?;
    ensure(
        trace.max_normalization_error <= 1e-12,
        format!("normalization error {:e}", trace.max_normalization_error),
    )?;
    within(start.elapsed(), 60.0)?;
    let first = &trace.rows[0];
    Ok(format!(
        "K=0 separation {:.3e}; K=10^4 separation {:.1e}, to truth {:.1e}/{:.1e}",
        first.dist_ab, last.dist_ab, last.dist_a_true, last.dist_b_true
    ))
}

fn run_cli(args: &[&str], env_seed: Option<&str>) -> Result<(String, String), String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qdf"));
    cmd.args(args).env_remove("QDF_SEED");
    if let Some(s) = env_seed {
        cmd.env("QDF_SEED", s);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let envelope: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let payload = serde_json::to_string(&envelope["payload"]).unwrap();
    Ok((payload, text))
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 10] = [
        &["povm", "build", "--d", "3"],
        &["povm", "build", "--tetrahedron"],
        &["definetti", "roundtrip", "--n", "3", "--seed", "7"],
        &["definetti", "roundtrip", "--ensemble", "nonphysical"],
        &["tomo", "run", "--seed", "42"],
        &["counterexample", "ghz"],
        &["counterexample", "real"],
        &["counterexample", "anticorrelation"],
        &["classical", "urn", "--M", "4", "--N", "2"],
        &[
            "classical",
            "limit",
            "--family",
            "uniform",
            "--N",
            "2",
            "--M-list",
            "8,64,512",
        ],
    ];
    for args in commands {
        let (a, _) = run_cli(args, None)?;
        let (b, _) = run_cli(args, None)?;
        ensure(a == b, format!("{args:?} payloads differ"))?;
        let mut csv_args = args.to_vec();
        csv_args.extend(["--format", "csv"]);
        let csv = |args: &[&str]| {
            Command::new(env!("CARGO_BIN_EXE_qdf"))
                .args(args)
                .output()
                .map(|o| o.stdout)
        };
        if args[0] != "counterexample" {
            ensure(
                csv(&csv_args).ok() == csv(&csv_args).ok(),
                format!("{args:?} CSV differs"),
            )?;
        }
    }
    let (flag, _) = run_cli(&["tomo", "run", "--seed", "9", "--k-list", "0,50"], None)?;
    let (env, _) = run_cli(&["tomo", "run", "--k-list", "0,50"], Some("9"))?;
    ensure(flag == env, "QDF_SEED fallback differs from --seed")?;
    Ok(format!(
        "{} commands produce byte-identical payloads; QDF_SEED matches --seed",
        commands.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("IC-POVM construction", ic_povm_construction),
        (
            "informational completeness round trip",
            informational_completeness,
        ),
        (
            "probability values of the S = e3/2 example",
            half_e3_probabilities,
        ),
        (
            "tetrahedron bound and nonphysical reconstruction",
            tetrahedron_bound,
        ),
        ("de Finetti round trip", definetti_round_trip),
        ("witness growth", witness_growth),
        ("GHZ counterexample", ghz_counterexample),
        (
            "classical anticorrelation counterexample",
            classical_counterexample,
        ),
        ("urn representation", appendix_machinery),
        ("real-Hilbert counterexample", real_hilbert_counterexample),
        ("Bayesian convergence", bayesian_convergence),
        ("CLI determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

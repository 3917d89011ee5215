//! Acceptance suite: one test per criterion from the project checklist in
//! the README, each printing a pass line with its measured worst numbers.
//!
//! Run with `cargo test -p qinsdel --test acceptance -- --nocapture` to see
//! the per-criterion lines.

use std::time::Instant;

use qinsdel::channel::spanning_kraus_family;
use qinsdel::code::{parse_code_file, QuantumCode};
use qinsdel::kl::{
    build_recovery, check_insdel_code, sweep_agreement, theorem_sweep, verify_recovery,
    ChannelSpec,
};
use qinsdel::channel::MixtureChannel;
use qinsdel::sampling::Sampler;
use qinsdel::selftest::{self, SelftestConfig, SuiteResult};
use qinsdel::RunConfig;

const KL_TOL: f64 = 1e-10;
const ENUM_CAP: usize = 100_000;

fn bundled_code() -> QuantumCode {
    parse_code_file(include_str!("../../../data/four_qubit_deletion.code"))
        .expect("bundled code file parses")
}

fn assert_suite(suite: &SuiteResult, min_instances: usize) {
    assert!(
        suite.instances >= min_instances,
        "{}: only {} instances, expected at least {min_instances}",
        suite.name,
        suite.instances
    );
    assert!(
        suite.passed(),
        "{}: worst deviation {:.3e} exceeds {:.3e}; counterexample: {:?}",
        suite.name,
        suite.worst_deviation,
        suite.tolerance,
        suite.counterexample
    );
}

fn report(line: &str) {
    println!("{line}");
}

#[test]
fn criterion_1_operator_identity_suites() {
    let started = Instant::now();
    let cfg = SelftestConfig::default();
    assert!(cfg.lemma_instances >= 500);
    let suites = [
        selftest::suite_compose_insertion(&cfg),
        selftest::suite_compose_deletion(&cfg),
        selftest::suite_insertion_swap(&cfg),
        selftest::suite_deletion_swap(&cfg),
        selftest::suite_deletion_insertion_commute(&cfg),
        selftest::suite_insertion_deletion_commute(&cfg),
        selftest::suite_adjoint_pairing(&cfg),
    ];
    let mut worst = 0.0f64;
    for suite in &suites {
        assert_suite(suite, 500);
        assert!(suite.tolerance <= 1e-12, "{} tolerance too loose", suite.name);
        worst = worst.max(suite.worst_deviation);
    }
    // All three commutation cases must actually contract sometimes.
    let commute = &suites[4];
    assert!(commute.contractions > 0, "no same-position contractions hit");
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "operator identity suites took {elapsed:?}, budget 30 s"
    );
    report(&format!(
        "[PASS] criterion 1: operator identities, 7 suites x {} instances, worst deviation {:.3e}, {:.1?}",
        cfg.lemma_instances, worst, elapsed
    ));
}

#[test]
fn criterion_2_channel_form_suites() {
    let cfg = SelftestConfig::default();
    assert!(cfg.channel_instances >= 200);
    let ins = selftest::suite_insertion_channel_kraus(&cfg);
    let del = selftest::suite_deletion_channel_kraus(&cfg);
    let restore = selftest::suite_delete_inserted_identity(&cfg);
    let trace = selftest::suite_trace_preservation(&cfg);
    assert_suite(&ins, 200);
    assert_suite(&del, 200);
    assert_suite(&restore, 200);
    assert_suite(&trace, 200);
    assert!(ins.tolerance <= 1e-12);
    assert!(del.tolerance <= 1e-12);
    assert!(restore.tolerance <= 1e-13);
    assert!(trace.tolerance <= 1e-11);
    report(&format!(
        "[PASS] criterion 2: channel two-path equalities, worst deviations {:.3e} / {:.3e} / {:.3e} / {:.3e}",
        ins.worst_deviation, del.worst_deviation, restore.worst_deviation, trace.worst_deviation
    ));
}

#[test]
fn criterion_3_span_reduction_certificate() {
    let cfg = SelftestConfig::default();
    assert!(cfg.span_instances >= 100);
    let ins = selftest::suite_insertion_span(&cfg);
    let del = selftest::suite_deletion_span(&cfg);
    assert_suite(&ins, 100);
    assert_suite(&del, 100);
    assert!(ins.tolerance <= 1e-10);
    assert!(del.tolerance <= 1e-10);
    report(&format!(
        "[PASS] criterion 3: basis-family span certificate, worst residuals {:.3e} (insertions), {:.3e} (deletions)",
        ins.worst_deviation, del.worst_deviation
    ));
}

#[test]
fn criterion_4_normal_form_suite() {
    let cfg = SelftestConfig::default();
    assert!(cfg.normal_form_instances >= 200);
    let nf = selftest::suite_normal_form(&cfg);
    // 10 splits of the error budget, each with the full instance count.
    assert_suite(&nf, 10 * cfg.normal_form_instances);
    assert!(nf.tolerance <= 1e-12);
    assert!(nf.contractions > 0, "scalar-contraction branch never hit");
    let heavy_d = selftest::suite_regroup_deletion_heavy(&cfg);
    let heavy_i = selftest::suite_regroup_insertion_heavy(&cfg);
    assert_suite(&heavy_d, 6 * (cfg.normal_form_instances / 2));
    assert_suite(&heavy_i, 6 * (cfg.normal_form_instances / 2));
    assert!(heavy_i.contractions > 0);
    report(&format!(
        "[PASS] criterion 4: normal forms over {} products, worst deviation {:.3e}, {} contractions; regroup worst {:.3e} / {:.3e}",
        nf.instances,
        nf.worst_deviation,
        nf.contractions,
        heavy_d.worst_deviation,
        heavy_i.worst_deviation
    ));
}

#[test]
fn criterion_5_equivalence_sweep_end_to_end() {
    let started = Instant::now();
    let code = bundled_code();

    let v01 = check_insdel_code(&code, 0, 1, KL_TOL, ENUM_CAP).unwrap();
    assert!(v01.passed, "single-deletion check failed: {:?}", v01.report.worst_pair);
    let v10 = check_insdel_code(&code, 1, 0, KL_TOL, ENUM_CAP).unwrap();
    assert!(v10.passed, "single-insertion check failed: {:?}", v10.report.worst_pair);

    let sweep1 = theorem_sweep(&code, 1, KL_TOL, ENUM_CAP).unwrap();
    assert!(sweep_agreement(&sweep1), "budget-1 sweep disagrees");
    assert!(sweep1.iter().all(|r| r.verdict.passed));

    let sweep2 = theorem_sweep(&code, 2, KL_TOL, ENUM_CAP).unwrap();
    assert!(sweep_agreement(&sweep2), "budget-2 sweep disagrees");
    assert!(
        sweep2.iter().all(|r| !r.verdict.passed),
        "a 2-dim four-qubit code cannot correct a two-error budget"
    );

    // Negative control: random 2-dim subspaces fail both budget-1 splits.
    let mut sampler = Sampler::new(20_240_817);
    for i in 0..20 {
        let random = sampler.random_code(&format!("random-{i}"), 2, 4, 2);
        let rows = theorem_sweep(&random, 1, KL_TOL, ENUM_CAP).unwrap();
        assert!(
            rows.iter().all(|r| !r.verdict.passed),
            "random subspace {i} unexpectedly passed a budget-1 split"
        );
        assert!(sweep_agreement(&rows));
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "end-to-end sweep took {elapsed:?}, budget 60 s"
    );
    report(&format!(
        "[PASS] criterion 5: bundled code corrects (0,1) and (1,0); budget-1 and budget-2 sweeps agree; 20 random subspaces fail; {:.1?}",
        elapsed
    ));
}

#[test]
fn criterion_6_capability_monotonicity() {
    let code = bundled_code();
    let mut sampler = Sampler::new(61);
    let corpus = vec![
        code,
        sampler.random_code("random-a", 2, 4, 2),
        sampler.random_code("random-b", 2, 3, 2),
    ];
    let mut exceptions = 0usize;
    for code in &corpus {
        let budget_max = 2.min(code.sites() - 1);
        let mut passes = Vec::new();
        for t1 in 0..=budget_max {
            for t2 in 0..=(budget_max - t1) {
                let verdict = check_insdel_code(code, t1, t2, KL_TOL, ENUM_CAP).unwrap();
                passes.push((t1, t2, verdict.passed));
            }
        }
        for &(t1, t2, ok) in &passes {
            if !ok {
                continue;
            }
            for &(s1, s2, sub_ok) in &passes {
                if s1 <= t1 && s2 <= t2 && !sub_ok {
                    exceptions += 1;
                    eprintln!(
                        "{}: passes ({t1},{t2}) but fails ({s1},{s2})",
                        code.label()
                    );
                }
            }
        }
    }
    assert_eq!(exceptions, 0, "capability set is not downward closed");
    report("[PASS] criterion 6: pass set is downward closed over the corpus, zero exceptions");
}

#[test]
fn criterion_7_recovery_channel() {
    let code = bundled_code();
    let family = spanning_kraus_family(4, 2, 0, 1, ENUM_CAP).unwrap();
    let recovery = build_recovery(&code, &family, KL_TOL).unwrap();
    let channel = ChannelSpec::Mixture(MixtureChannel::uniform_deletion(4, 1).unwrap());
    let config = RunConfig {
        samples: 50,
        seed: 7,
        ..RunConfig::default()
    };
    let rep = verify_recovery(&code, &channel, &recovery, &config).unwrap();
    assert_eq!(rep.samples, 50);
    assert!(
        rep.completeness_violation <= 1e-10,
        "recovery completeness violation {:.3e}",
        rep.completeness_violation
    );
    assert!(
        rep.max_deviation <= 1e-8,
        "recovery deviation {:.3e} over {} samples",
        rep.max_deviation,
        rep.samples
    );
    report(&format!(
        "[PASS] criterion 7: recovery corrects uniform single deletion, max deviation {:.3e} over {} states, completeness {:.3e}",
        rep.max_deviation, rep.samples, rep.completeness_violation
    ));
}

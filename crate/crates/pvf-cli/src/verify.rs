//! The `verify` subcommand: the property and adversarial suite at
//! test-profile parameters, one pass/fail line per property.

use anyhow::Result;
use clap::Args;
use pvf_core::orchestrator::{
    run_adversarial_round, run_round, BackendKind, Extension, ForgeTarget, RoundError, TamperSpec,
    ThawSide,
};
use pvf_core::{
    generate_freeze_matrices, generate_inputs, privacy_check, FieldConfig, FieldMatrix,
    PadPolicy, RoundConfig, SecurityProfile, Zp,
};
use std::process::ExitCode;

#[derive(Args)]
pub struct VerifyArgs {
    /// Run a single adversarial round with this tamper kind:
    /// user-inconsistent-freeze, user-wrong-alpha, or server-forge-sum-y.
    #[arg(long)]
    inject: Option<String>,
    /// Extension active during the injected round.
    #[arg(long, default_value = "none")]
    extension: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Trials per randomized property.
    #[arg(long, default_value_t = 25)]
    trials: u64,
}

struct Suite {
    failures: usize,
}

impl Suite {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            println!("PASS {name} ({detail})");
        } else {
            println!("FAIL {name} ({detail})");
            self.failures += 1;
        }
    }
}

fn test_config(
    n: usize,
    m: usize,
    lambda: usize,
    delta: usize,
    backend: BackendKind,
    extension: Extension,
    seed: u64,
) -> RoundConfig {
    let mut cfg = RoundConfig::new(n, m, lambda, delta, seed);
    cfg.backend = backend;
    cfg.extension = extension;
    cfg.profile = SecurityProfile::Test;
    cfg.thaw_side = match (backend, extension) {
        (BackendKind::He, _) | (_, Extension::Rve) => ThawSide::User,
        _ => ThawSide::Server,
    };
    cfg
}

fn parse_tamper(name: &str, seed: u64) -> Result<TamperSpec, String> {
    match name {
        "user-inconsistent-freeze" => {
            Ok(TamperSpec::UserInconsistentFreeze { user: seed as usize })
        }
        "user-wrong-alpha" => Ok(TamperSpec::UserWrongAlpha { user: seed as usize }),
        "server-forge-sum-y" => Ok(TamperSpec::ServerForgeSumY {
            index: seed as usize,
            delta: 1 + seed % 1000,
            target: ForgeTarget::Grave,
        }),
        other => Err(format!("unknown tamper kind {other:?}")),
    }
}

pub fn run(args: VerifyArgs) -> Result<ExitCode> {
    if let Some(kind) = &args.inject {
        return run_injection(kind, &args);
    }

    let mut suite = Suite { failures: 0 };
    let field_cfg = FieldConfig::default();
    let field = field_cfg.field();

    // Matrix invariants.
    let leaky = FieldMatrix::from_rows(&[&[1, 2, 3], &[1, 3, 3]], &field);
    suite.check(
        "privacy-check-rejects-leaky-matrix",
        !privacy_check(&leaky, &field),
        "row-echelon row with a single nonzero entry".into(),
    );
    let mut generated_ok = 0u64;
    for seed in 0..args.trials {
        let set = generate_freeze_matrices(&field_cfg, 3 + (seed % 8) as usize, (seed % 2) as usize, seed);
        match set {
            Ok(set)
                if privacy_check(set.a_check(), &field)
                    && set.a_check().rank(&field) == set.lambda() - set.delta() - 1 =>
            {
                generated_ok += 1
            }
            _ => {}
        }
    }
    suite.check(
        "generated-matrices-pass-privacy-and-rank",
        generated_ok == args.trials,
        format!("{generated_ok}/{} seeds", args.trials),
    );

    // Oracle equivalence across backends, extensions, and thaw sides.
    let mut oracle_ok = 0u64;
    let combos = [
        (BackendKind::Plain, Extension::None),
        (BackendKind::Mask, Extension::None),
        (BackendKind::Mask, Extension::Uce),
        (BackendKind::Mask, Extension::Rve),
        (BackendKind::He, Extension::None),
        (BackendKind::He, Extension::Rve),
    ];
    let mut oracle_total = 0u64;
    for trial in 0..args.trials {
        for (backend, extension) in combos {
            oracle_total += 1;
            let n = 2 + (trial % 6) as usize;
            let m = 1 + (trial % 40) as usize;
            let lambda = [1, 3, 4, 7][(trial % 4) as usize];
            let delta = if lambda > 2 { (trial % (lambda as u64 - 1)) as usize } else { 0 };
            let mut cfg =
                test_config(n, m, lambda, delta, backend, extension, args.seed ^ trial);
            cfg.eta = [0.0, 0.1, 0.3][(trial % 3) as usize];
            let inputs = generate_inputs(&field_cfg, n, m, trial);
            if matches!(run_round(&cfg, &inputs), Ok(r) if r.correctness) {
                oracle_ok += 1;
            }
        }
    }
    suite.check(
        "pipeline-equals-plain-oracle",
        oracle_ok == oracle_total,
        format!("{oracle_ok}/{oracle_total} rounds"),
    );

    // Tamper detection with the matching extension.
    let mut detected = 0u64;
    let mut expected = 0u64;
    for trial in 0..args.trials {
        let n = 3 + (trial % 4) as usize;
        let m = 2 + (trial % 20) as usize;
        let inputs = generate_inputs(&field_cfg, n, m, trial ^ 0xbeef);
        for (tamper, extension) in [
            (
                TamperSpec::UserInconsistentFreeze { user: (trial % n as u64) as usize },
                Extension::Uce,
            ),
            (
                TamperSpec::UserWrongAlpha { user: (trial % n as u64) as usize },
                Extension::Uce,
            ),
            (
                TamperSpec::ServerForgeSumY {
                    index: trial as usize,
                    delta: 1 + trial % 97,
                    target: if trial % 2 == 0 { ForgeTarget::Grave } else { ForgeTarget::Acute },
                },
                Extension::Rve,
            ),
        ] {
            expected += 1;
            let cfg =
                test_config(n, m, 4, (trial % 3) as usize, BackendKind::Mask, extension, trial);
            match run_adversarial_round(&cfg, &inputs, tamper) {
                Err(RoundError::UceRejected { .. }) if extension == Extension::Uce => {
                    detected += 1
                }
                Err(RoundError::RveRejected { .. }) if extension == Extension::Rve => {
                    detected += 1
                }
                _ => {}
            }
        }
    }
    suite.check(
        "tampering-detected-with-matching-extension",
        detected == expected,
        format!("{detected}/{expected} tampered rounds aborted"),
    );

    // Undetected tampering without an extension still corrupts the sum.
    let mut exposed = 0u64;
    for trial in 0..args.trials {
        let cfg = test_config(4, 11, 4, 1, BackendKind::Mask, Extension::None, trial);
        let inputs = generate_inputs(&field_cfg, 4, 11, trial ^ 0xcafe);
        let tamper = TamperSpec::ServerForgeSumY {
            index: trial as usize,
            delta: 1 + trial % 13,
            target: ForgeTarget::Grave,
        };
        if matches!(run_adversarial_round(&cfg, &inputs, tamper), Ok(r) if !r.correctness) {
            exposed += 1;
        }
    }
    suite.check(
        "tampering-unnoticed-without-extension",
        exposed == args.trials,
        format!("{exposed}/{} rounds completed with a wrong sum", args.trials),
    );

    // No false aborts on honest runs with extensions enabled.
    let mut honest_ok = 0u64;
    let mut honest_total = 0u64;
    for trial in 0..args.trials {
        for extension in [Extension::Uce, Extension::Rve] {
            honest_total += 1;
            let cfg = test_config(3, 9, 3, 0, BackendKind::Mask, extension, trial.wrapping_mul(31));
            let inputs = generate_inputs(&field_cfg, 3, 9, trial ^ 0xdead);
            if matches!(run_round(&cfg, &inputs), Ok(r) if r.correctness) {
                honest_ok += 1;
            }
        }
    }
    suite.check(
        "no-false-aborts-on-honest-rounds",
        honest_ok == honest_total,
        format!("{honest_ok}/{honest_total} honest rounds verified"),
    );

    // Worked element-privacy example: the leaky incomplete matrix exposes
    // one element via its echelon form.
    let rref = leaky.rref(&Zp::new_unchecked(field.modulus()));
    suite.check(
        "leaky-matrix-exposes-an-element",
        rref.row(1).iter().filter(|&&v| v != 0).count() == 1,
        "second echelon row pins a single variable".into(),
    );

    println!(
        "{}",
        if suite.failures == 0 {
            "all properties passed".to_string()
        } else {
            format!("{} propert(ies) FAILED", suite.failures)
        }
    );
    Ok(if suite.failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn run_injection(kind: &str, args: &VerifyArgs) -> Result<ExitCode> {
    let tamper = parse_tamper(kind, args.seed).map_err(anyhow::Error::msg)?;
    let extension: Extension = args.extension.parse()?;
    let backend = BackendKind::Mask;
    let cfg = test_config(4, 12, 4, 0, backend, extension, args.seed);
    let field_cfg = FieldConfig::default();
    let inputs = generate_inputs(&field_cfg, cfg.n, cfg.m, args.seed);
    assert_eq!(cfg.pad_policy, PadPolicy::Minimal);
    match run_adversarial_round(&cfg, &inputs, tamper) {
        Err(RoundError::UceRejected { index }) => {
            println!("detected: commitment verification aborted at position {index}");
            Ok(ExitCode::SUCCESS)
        }
        Err(RoundError::RveRejected { index }) => {
            println!("detected: result verification aborted at position {index}");
            Ok(ExitCode::SUCCESS)
        }
        Err(other) => {
            println!("round failed for an unrelated reason: {other}");
            Ok(ExitCode::FAILURE)
        }
        Ok(report) if report.correctness => {
            println!("undetected and harmless: aggregate still matches the oracle");
            Ok(ExitCode::FAILURE)
        }
        Ok(_) => {
            println!("undetected (expected without a matching extension): aggregate is wrong");
            Ok(ExitCode::SUCCESS)
        }
    }
}

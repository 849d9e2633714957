use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use sepauto::decompose::{self as dec, DecomposeConfig, Verdict};
use sepauto::formats::{self, fmt_f64, AutomorphismRecord};
use sepauto::pnr::{support_function, AscentOptions};
use sepauto::states::{ppt_is_exact, ppt_verdict};
use sepauto::superop::{
    depolarizing_direction, determinant_profile, find_safe_t_with, is_trace_annihilating, lemma3_map,
    CanonicalAutomorphism, DeterminantProfile, SafeStep, Superoperator,
};
use sepauto::{rng, Error, TensorShape};

use crate::exit::{Failure, EXIT_AMBIGUOUS, EXIT_IO, EXIT_NOT_PRESERVER, EXIT_OK};
use crate::{DecomposeArgs, GenArgs, GenKind, Lemma3Args, PnrArgs, PptArgs, VerifyArgs};

type Outcome = Result<u8, Failure>;

/// Offsets the seed of the safe-step sampler from the direction sampler.
const SAFE_STEP_STREAM: u64 = 0x7a0_5afe;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn emit<T: Serialize>(out: Option<&Path>, report: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).map_err(Error::from)? + "\n";
    match out {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_shape(text: &str) -> Result<TensorShape, Failure> {
    Ok(text.parse::<TensorShape>()?)
}

fn check_shape(expected: Option<&str>, found: &TensorShape) -> Result<(), Failure> {
    if let Some(text) = expected {
        let shape = parse_shape(text)?;
        if &shape != found {
            return Err(Error::InvalidShape(format!("--shape {shape} does not match file shape {found}")).into());
        }
    }
    Ok(())
}

fn check_dim(shape: &TensorShape, n: usize) -> Result<(), Failure> {
    if shape.total_dim() != n {
        return Err(Error::DimensionMismatch { expected: shape.total_dim(), found: n }.into());
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".answer.json");
    PathBuf::from(name)
}

#[derive(Serialize)]
struct Lemma3Answer<'a> {
    kind: &'static str,
    shape: &'a TensorShape,
    seed: u64,
    t: f64,
    safe_t: SafeStep,
}

pub fn gen(args: &GenArgs) -> Outcome {
    let shape = parse_shape(&args.shape)?;
    let (sop, sidecar) = match args.kind {
        GenKind::Canonical => {
            let auto = CanonicalAutomorphism::random(&shape, &mut rng::seeded(args.seed));
            (auto.superop()?, formats::write_automorphism(&auto)?)
        }
        GenKind::Lemma3 => {
            let l1 = depolarizing_direction(&shape, args.seed);
            let safe_t = find_safe_t_with(&l1, args.samples, args.seed ^ SAFE_STEP_STREAM)?;
            let t = match (args.t, safe_t) {
                (Some(t), _) => t,
                (None, SafeStep::Bounded(tau)) => tau / 2.0,
                (None, SafeStep::Unbounded) => 1.0,
            };
            if !t.is_finite() {
                return Err(Error::Configuration(format!("t must be finite, got {t}")).into());
            }
            let answer = Lemma3Answer { kind: "lemma3", shape: &shape, seed: args.seed, t, safe_t };
            let text = serde_json::to_string_pretty(&answer).map_err(Error::from)? + "\n";
            (lemma3_map(&l1, t), text)
        }
    };
    write(&args.out, &formats::write_superop(&sop)?)?;
    let answer = sidecar_path(&args.out);
    write(&answer, &sidecar)?;
    eprintln!("wrote {} and {}", args.out.display(), answer.display());
    Ok(EXIT_OK)
}

fn load_superop(path: &Path, shape: Option<&str>) -> Result<Superoperator, Failure> {
    let s = formats::read_superop(&read(path)?)?;
    check_shape(shape, s.shape())?;
    Ok(s)
}

#[derive(Serialize)]
struct DecomposeRun<'a> {
    command: &'static str,
    input: String,
    shape: &'a TensorShape,
    settings: &'a DecomposeConfig,
}

#[derive(Serialize)]
struct DecomposeOutput<'a> {
    config: DecomposeRun<'a>,
    verdict: String,
    automorphism: Option<AutomorphismRecord>,
    residual: Option<f64>,
    /// Row = input slot, column = output slot.
    f_matrix: Option<Vec<Vec<f64>>>,
    witnesses: Vec<String>,
}

pub fn decompose(args: &DecomposeArgs) -> Outcome {
    let s = load_superop(&args.input, args.shape.as_deref())?;
    let config = DecomposeConfig {
        samples: args.samples,
        seed: args.seed,
        accept_tol: args.tol_accept,
        reject_tol: args.tol_reject,
        purity_tol: args.tol_purity,
        ..DecomposeConfig::default()
    };
    if !(config.accept_tol > 0.0 && config.accept_tol <= config.reject_tol) {
        return Err(Error::Configuration("need 0 < --tol-accept <= --tol-reject".into()).into());
    }
    let report = dec::decompose(&s, &config)?;
    let output = DecomposeOutput {
        config: DecomposeRun { command: "decompose", input: args.input.display().to_string(), shape: s.shape(), settings: &config },
        verdict: report.verdict.to_string(),
        automorphism: report.auto.as_ref().map(AutomorphismRecord::from),
        residual: report.residual,
        f_matrix: report
            .f_matrix
            .as_ref()
            .map(|m| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()),
        witnesses: report.witnesses.iter().map(ToString::to_string).collect(),
    };
    emit(args.out.as_deref(), &output)?;
    eprintln!("{}", report.verdict);
    Ok(match report.verdict {
        Verdict::Canonical => EXIT_OK,
        Verdict::NotPreserver => EXIT_NOT_PRESERVER,
        Verdict::NumericallyAmbiguous => EXIT_AMBIGUOUS,
    })
}

#[derive(Serialize)]
struct VerifyRun<'a> {
    command: &'static str,
    input: String,
    shape: &'a TensorShape,
    seed: u64,
    samples: usize,
    tol_purity: f64,
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    config: VerifyRun<'a>,
    passed: usize,
    pass_rate: f64,
    witnesses: Vec<String>,
}

pub fn verify(args: &VerifyArgs) -> Outcome {
    let s = load_superop(&args.input, args.shape.as_deref())?;
    if args.samples == 0 {
        return Err(Error::Configuration("--samples must be positive".into()).into());
    }
    let (passed, witnesses) = dec::sample_preservation(&s, args.samples, args.seed, args.tol_purity)?;
    let pass_rate = passed as f64 / args.samples as f64;
    let output = VerifyOutput {
        config: VerifyRun {
            command: "verify",
            input: args.input.display().to_string(),
            shape: s.shape(),
            seed: args.seed,
            samples: args.samples,
            tol_purity: args.tol_purity,
        },
        passed,
        pass_rate,
        witnesses: witnesses.iter().map(ToString::to_string).collect(),
    };
    emit(args.out.as_deref(), &output)?;
    eprintln!("{passed}/{} product pure states preserved ({:.1}%)", args.samples, 100.0 * pass_rate);
    Ok(if passed == args.samples { EXIT_OK } else { EXIT_NOT_PRESERVER })
}

#[derive(Serialize)]
struct PptRun<'a> {
    command: &'static str,
    input: String,
    shape: &'a TensorShape,
}

#[derive(Serialize)]
struct PptOutput<'a> {
    config: PptRun<'a>,
    verdict: String,
    /// PPT decides separability for this shape.
    exact: bool,
    min_eigenvalue: f64,
    /// Minimum eigenvalue after transposing each single slot.
    slot_min_eigenvalues: Vec<f64>,
}

pub fn ppt(args: &PptArgs) -> Outcome {
    let shape = parse_shape(&args.shape)?;
    let x = formats::read_hermitian(&read(&args.input)?)?;
    check_dim(&shape, x.dim())?;
    let decision = ppt_verdict(&x, &shape)?;
    let output = PptOutput {
        config: PptRun { command: "ppt", input: args.input.display().to_string(), shape: &shape },
        verdict: decision.verdict.to_string(),
        exact: ppt_is_exact(&shape),
        min_eigenvalue: decision.min_eigenvalue(),
        slot_min_eigenvalues: decision.min_eigenvalues.clone(),
    };
    emit(args.out.as_deref(), &output)?;
    eprintln!("{}, min PT eigenvalue {:.10}", decision.verdict, decision.min_eigenvalue());
    Ok(EXIT_OK)
}

pub fn pnr(args: &PnrArgs) -> Outcome {
    let shape = parse_shape(&args.shape)?;
    let t = formats::read_matrix(&read(&args.input)?)?;
    check_dim(&shape, t.nrows())?;
    let opts = AscentOptions { starts: args.starts, iters: args.iters, tol: args.tol, seed: args.seed, inner_samples: args.samples };
    if opts.starts == 0 {
        return Err(Error::Configuration("--starts must be positive".into()).into());
    }
    let result = support_function(&t, &shape, args.angles, &opts)?;

    let header = format!(
        "# sepauto pnr input={} shape={shape} angles={} starts={} iters={} tol={:e} samples={} seed={}\n",
        args.input.display(),
        args.angles,
        opts.starts,
        opts.iters,
        opts.tol,
        opts.inner_samples,
        opts.seed
    );
    let mut support = header.clone() + "theta,h\n";
    for (theta, h) in result.thetas.iter().zip(&result.support) {
        let _ = writeln!(support, "{},{}", fmt_f64(*theta), fmt_f64(*h));
    }
    let mut points = header + "re,im\n";
    for z in &result.inner_points {
        let _ = writeln!(points, "{},{}", fmt_f64(z.re), fmt_f64(z.im));
    }
    let points_path = args.points.clone().unwrap_or_else(|| args.out.with_extension("points.csv"));
    write(&args.out, &support)?;
    write(&points_path, &points)?;
    eprintln!("wrote {} and {}", args.out.display(), points_path.display());
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct Lemma3Run<'a> {
    command: &'static str,
    shape: &'a TensorShape,
    seed: u64,
    samples: usize,
    t: &'a [f64],
}

#[derive(Serialize)]
struct Lemma3Output<'a> {
    config: Lemma3Run<'a>,
    trace_annihilating: bool,
    safe_t: SafeStep,
    /// Predicted exponent `N² − 1`.
    expected_exponent: usize,
    profile: DeterminantProfile,
}

pub fn lemma3(args: &Lemma3Args) -> Outcome {
    let shape = parse_shape(&args.shape)?;
    let l1 = depolarizing_direction(&shape, args.seed);
    let safe_t = find_safe_t_with(&l1, args.samples, args.seed ^ SAFE_STEP_STREAM)?;
    let profile = determinant_profile(&l1, &args.t)?;
    let output = Lemma3Output {
        config: Lemma3Run { command: "lemma3", shape: &shape, seed: args.seed, samples: args.samples, t: &args.t },
        trace_annihilating: is_trace_annihilating(&l1, 1e-10),
        safe_t,
        expected_exponent: shape.total_dim().pow(2) - 1,
        profile,
    };
    emit(args.out.as_deref(), &output)?;
    eprintln!("safe t {:e}, fitted exponent {:.6}", safe_t.value(), output.profile.exponent);
    Ok(EXIT_OK)
}

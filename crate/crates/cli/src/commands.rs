use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use blocktri::almostnormal::{certify, ConicCoefficients};
use blocktri::generators::{
    arrow_hermitian_plus_rank_one, auto_starting_block, chebyshev_colleague, companion, curve_normal_plus_rank_one,
    fourier_sum, random_chebyshev_colleague, random_companion, random_unitary_plus_rank_one,
    solve_commutator_equation_small, Curve, Family, GeneratedInstance,
};
use blocktri::interchange::{read_matrix_market, spy_ascii, spy_pgm, write_matrix_market};
use blocktri::lanczos::block_lanczos;
use blocktri::matcore::{hermitian_part, ComplexMatrix};
use blocktri::structure::{off_profile_residual, qr_iteration_tracked, BlockProfile};
use num_complex::Complex64;
use serde::Serialize;

use crate::report::{write_json, Manifest, ManifestFiles, RunReport, SCHEMA_VERSION, TOOL_VERSION};
use crate::{CliError, CurveArg, FamilyArg, GenerateArgs, QrTrackArgs, ReduceArgs, SpyArgs, SpyFormat, VerifyArgs};

type CmdResult = Result<bool, CliError>;

const MANIFEST: &str = "manifest.json";

fn read(path: &Path) -> Result<ComplexMatrix, CliError> {
    match read_matrix_market(path) {
        Ok(m) => Ok(m),
        Err(e @ (blocktri::Error::Io(_) | blocktri::Error::Parse { .. })) => Err(CliError::io(path, e)),
        Err(e) => Err(e.into()),
    }
}

fn write(path: &Path, m: &ComplexMatrix) -> Result<(), CliError> {
    write_matrix_market(path, m).map_err(|e| CliError::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn parse_coeffs(text: &str) -> Result<Vec<Complex64>, CliError> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            Complex64::from_str(t).map_err(|_| CliError::contract(format!("cannot parse coefficient {t:?}")))
        })
        .collect()
}

pub fn generate(args: &GenerateArgs) -> CmdResult {
    ensure_dir(&args.out)?;
    let mut files = ManifestFiles {
        matrix: "A.mtx".into(),
        ..Default::default()
    };
    let (family, n, instance): (Family, usize, Option<GeneratedInstance>) = match args.family {
        FamilyArg::FourierSum => {
            let (h, z) = fourier_sum(args.n, args.seed)?;
            files.matrix = "H.mtx".into();
            files.start = Some("Z.mtx".into());
            write(&args.out.join("H.mtx"), &h)?;
            write(&args.out.join("Z.mtx"), &z)?;
            (Family::FourierSum, args.n, None)
        }
        FamilyArg::Arrow => {
            let inst = arrow_hermitian_plus_rank_one(args.n, args.seed)?;
            (Family::ArrowH1, args.n, Some(inst))
        }
        FamilyArg::Colleague => {
            let inst = match &args.coeffs {
                Some(c) => chebyshev_colleague(&parse_coeffs(c)?)?,
                None => random_chebyshev_colleague(args.n, args.seed)?,
            };
            (Family::ChebyshevColleague, inst.n(), Some(inst))
        }
        FamilyArg::Unitary => {
            let inst = random_unitary_plus_rank_one(args.n, args.seed)?;
            (Family::UnitaryU1, args.n, Some(inst))
        }
        FamilyArg::Companion => {
            let inst = match &args.coeffs {
                Some(c) => companion(&parse_coeffs(c)?)?,
                None => random_companion(args.n, args.seed)?,
            };
            (Family::Companion, inst.n(), Some(inst))
        }
        FamilyArg::Curve => {
            let curve = match args.curve {
                CurveArg::Circle => Curve::Circle,
                CurveArg::Line => Curve::Line,
                CurveArg::ParabolaArc => Curve::ParabolaArc,
            };
            let inst = curve_normal_plus_rank_one(args.n, curve, args.seed)?;
            (Family::CurveNormalH1, args.n, Some(inst))
        }
        FamilyArg::SolvedCommutator => {
            let mut c = ComplexMatrix::zeros(args.n, args.n);
            c[(0, if args.dependent { 0 } else { 1.min(args.n - 1) })] = Complex64::new(1.0, 0.0);
            let inst = solve_commutator_equation_small(&c, args.n, args.seed, args.max_iters)?;
            (Family::SolvedCommutator, args.n, Some(inst))
        }
    };

    let mut manifest = Manifest {
        schema_version: SCHEMA_VERSION.into(),
        tool_version: TOOL_VERSION.into(),
        family,
        n,
        seed: args.seed,
        files: ManifestFiles::default(),
        certificate_residual: None,
        conic: None,
        eigenvalues: None,
    };
    if let Some(inst) = &instance {
        write(&args.out.join("A.mtx"), &inst.matrix)?;
        if family == Family::CurveNormalH1 {
            let uv = ComplexMatrix::hcat(&[&inst.left, &inst.right])?;
            write(&args.out.join("UV.mtx"), &uv)?;
            files.factors = Some("UV.mtx".into());
            manifest.conic = inst.conic.clone();
            manifest.eigenvalues = inst
                .eigenvalues
                .as_ref()
                .map(|ev| ev.iter().map(|z| [z.re, z.im]).collect());
        } else if let Some(cert) = &inst.certificate {
            write(&args.out.join("C.mtx"), &cert.perturbation)?;
            files.perturbation = Some("C.mtx".into());
            manifest.certificate_residual = Some(cert.residual);
        }
    }
    manifest.files = files;
    write_json(&args.out.join(MANIFEST), &manifest)?;
    println!("wrote {} instance (n = {n}) to {}", family, args.out.display());
    Ok(true)
}

struct Loaded {
    matrix_path: PathBuf,
    manifest: Option<(PathBuf, Manifest)>,
}

fn locate_input(input: &Path) -> Result<Loaded, CliError> {
    if input.is_dir() {
        let mpath = input.join(MANIFEST);
        let manifest = load_manifest(&mpath)?;
        return Ok(Loaded {
            matrix_path: input.join(&manifest.files.matrix),
            manifest: Some((input.to_path_buf(), manifest)),
        });
    }
    let dir = input.parent().map(Path::to_path_buf).unwrap_or_default();
    let mpath = dir.join(MANIFEST);
    let manifest = if mpath.is_file() {
        let m = load_manifest(&mpath)?;
        let same = input.file_name().is_some_and(|f| f.to_string_lossy() == m.files.matrix);
        same.then_some((dir, m))
    } else {
        None
    };
    Ok(Loaded {
        matrix_path: input.to_path_buf(),
        manifest,
    })
}

fn load_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
}

pub fn reduce(args: &ReduceArgs) -> CmdResult {
    let started = Instant::now();
    let mut report = RunReport::new(args.tol);
    let loaded = locate_input(&args.input)?;
    let a = read(&loaded.matrix_path)?;
    report.digest(&loaded.matrix_path)?;
    if !a.is_square() {
        return Err(CliError::contract("reduce needs a square matrix"));
    }
    let n = a.rows();

    let mut c: Option<ComplexMatrix> = None;
    let mut factors: Option<ComplexMatrix> = None;
    let mut manifest_start: Option<ComplexMatrix> = None;
    let mut conic: Option<ConicCoefficients> = None;
    let mut family: Option<Family> = None;
    if let Some((dir, m)) = &loaded.manifest {
        family = Some(m.family);
        conic = m.conic.clone();
        for (name, slot) in [
            (&m.files.perturbation, &mut c),
            (&m.files.factors, &mut factors),
            (&m.files.start, &mut manifest_start),
        ] {
            if let Some(name) = name {
                let p = dir.join(name);
                *slot = Some(read(&p)?);
                report.digest(&p)?;
            }
        }
        report.detail("family", m.family);
    }

    let (rotated, theta, start) = if args.start == "auto" {
        let family = family.ok_or_else(|| {
            CliError::contract("--start auto needs a manifest.json naming the family next to the input")
        })?;
        let uv = factors.as_ref().map(|f| (f.columns(0..1), f.columns(1..2)));
        let setup = auto_starting_block(
            family,
            &a,
            c.as_ref(),
            uv.as_ref().map(|(u, v)| (u, v)),
            conic.as_ref(),
            manifest_start.as_ref(),
            args.tol,
        )?;
        (setup.rotated, setup.theta, setup.start)
    } else {
        let p = PathBuf::from(&args.start);
        let z = read(&p)?;
        report.digest(&p)?;
        (a.clone(), 0.0, z)
    };
    report.detail("theta", theta);
    report.detail("start_columns", start.cols());

    let h = hermitian_part(&rotated)?;
    let red = block_lanczos(&h, &start, args.tol)?;
    let anorm = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let a_reduced = red.project(&a);
    let profile = BlockProfile::from_sizes(red.block_sizes.clone());

    report.block_sizes = red.block_sizes.clone();
    report.breakdown_events = red.breakdown_events.clone();
    report.residuals.unitarity = red.unitarity_residual() / (n as f64).sqrt();
    report.residuals.similarity = red.similarity_residual(&h) / anorm;
    report.residuals.off_profile = off_profile_residual(&a_reduced, &profile)? / anorm;
    report.residuals.certificate = match (&c, family) {
        (Some(c), _) => certify(&a, c, 2, args.tol)?.residual,
        (None, Some(Family::CurveNormalH1)) => conic.as_ref().map_or(0.0, |k| k.max_residual),
        (None, Some(Family::FourierSum)) => certify(&a, &ComplexMatrix::zeros(n, n), 0, args.tol)?.residual,
        (None, _) => {
            report.detail("certificate_source", "unavailable");
            0.0
        }
    };

    ensure_dir(&args.out)?;
    write(&args.out.join("U.mtx"), &red.basis)?;
    write(&args.out.join("T.mtx"), &red.trid)?;
    write(&args.out.join("A_reduced.mtx"), &a_reduced)?;
    if let Some(c) = &c {
        write(&args.out.join("C_reduced.mtx"), &red.project(c))?;
    }

    let r = &report.residuals;
    let all = [r.unitarity, r.similarity, r.off_profile, r.certificate];
    report.passed = all.iter().all(|x| x.is_finite() && *x <= args.tol);
    report.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    write_json(&args.out.join("report.json"), &report)?;
    println!(
        "blocks {:?}\nbreakdowns {}\nresiduals: unitarity {:.3e} similarity {:.3e} off_profile {:.3e} certificate {:.3e}",
        report.block_sizes,
        report.breakdown_events.len(),
        r.unitarity,
        r.similarity,
        r.off_profile,
        r.certificate
    );
    Ok(report.passed)
}

pub fn verify(args: &VerifyArgs) -> CmdResult {
    let started = Instant::now();
    let mut report = RunReport::new(args.tol);
    let a = read(&args.matrix)?;
    let c = read(&args.c)?;
    report.digest(&args.matrix)?;
    report.digest(&args.c)?;
    let cert = certify(&a, &c, args.k, args.tol)?;
    println!("residual: {:.6e}", cert.residual);
    println!("rank(C): {}", cert.perturbation_rank);
    println!("dim(S): {}", cert.range_dim);
    if cert.perturbation_rank > args.k {
        println!("note: rank(C) exceeds k = {}", args.k);
    }
    report.residuals.certificate = cert.residual;
    report.passed = cert.residual.is_finite() && cert.residual <= args.tol;
    report.detail("rank_c", cert.perturbation_rank);
    report.detail("dim_s", cert.range_dim);
    report.detail("k", args.k);
    report.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    Ok(report.passed)
}

pub fn spy(args: &SpyArgs) -> CmdResult {
    let t = read(&args.matrix)?;
    match (args.format, &args.out) {
        (SpyFormat::Ascii, None) => print!("{}", spy_ascii(&t, args.tol)),
        (SpyFormat::Ascii, Some(p)) => fs::write(p, spy_ascii(&t, args.tol)).map_err(|e| CliError::io(p, e))?,
        (SpyFormat::Pgm, Some(p)) => fs::write(p, spy_pgm(&t, args.tol)).map_err(|e| CliError::io(p, e))?,
        (SpyFormat::Pgm, None) => return Err(CliError::contract("--format pgm needs --out")),
    }
    Ok(true)
}

#[derive(Serialize)]
struct QrTrackFile<'a> {
    schema_version: &'static str,
    tool_version: &'static str,
    input_digests: std::collections::BTreeMap<String, String>,
    steps: usize,
    tol: f64,
    max_off_profile_rank: usize,
    max_c_residual: f64,
    passed: bool,
    #[serde(flatten)]
    track: &'a blocktri::structure::QrTrackReport,
}

pub fn qr_track(args: &QrTrackArgs) -> CmdResult {
    let mut digests = RunReport::new(args.tol);
    let a = read(&args.matrix)?;
    let c = read(&args.c)?;
    digests.digest(&args.matrix)?;
    digests.digest(&args.c)?;
    let track = qr_iteration_tracked(&a, &c, args.steps, args.tol)?;
    let max_rank = track.max_off_profile_rank();
    let max_c = track.max_c_residual();
    let passed = max_rank <= 2 && max_c <= args.tol;
    write_json(
        &args.out,
        &QrTrackFile {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION,
            input_digests: digests.input_digests,
            steps: args.steps,
            tol: args.tol,
            max_off_profile_rank: max_rank,
            max_c_residual: max_c,
            passed,
            track: &track,
        },
    )?;
    println!(
        "profile {:?}\nmax off-profile rank {max_rank}\nmax C residual {max_c:.3e}\nconverged eigenvalues {}",
        track.initial_profile.block_sizes,
        track.converged_eigenvalues.len()
    );
    Ok(passed)
}

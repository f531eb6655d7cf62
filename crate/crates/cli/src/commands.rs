use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use shiftinv::generators::{riesz_condition, DEFAULT_RIESZ_TOL};
use shiftinv::kernels::interpolation_check;
use shiftinv::reconstruct::{frame_reconstruct_1d, reconstruct_2d, required_window, required_window_2d};
use shiftinv::riesz::{DualMatrix, DualMode};
use shiftinv::schemes::{backward_specs, central_specs, forward_average_specs, forward_specs, mixed_specs};
use shiftinv::{
    apply_operators, apply_operators_2d, biorthogonality_check, invert_scheme, reconstruct_1d, scheme_matrix,
    shannon_kernel, shannon_kernel_2d, zak_kernel, zak_kernel_2d, BaseKernel2d, DualChoice, Generator,
    Generator2d, OperatorSpec, Pipeline1d, Pipeline2d, ReconstructionReport, SamplingKernelSet,
    SamplingKernelSet2d, SchemeMatrix, Signal, Signal2d,
};

use crate::config::{parse, DualConfig, ExperimentConfig, Kernel2dMode, SignalConfig, SCHEMA_VERSION};
use crate::output::{write_csv_1d, write_csv_2d, write_json};
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dimension", rename_all = "camelCase")]
pub enum KernelSetDump {
    #[serde(rename = "1d")]
    OneDim(SamplingKernelSet),
    #[serde(rename = "2d")]
    TwoDim(SamplingKernelSet2d),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KernelDump {
    pub schema_version: u32,
    pub seed: Option<u64>,
    pub scheme: Vec<String>,
    pub second_scheme: Option<Vec<String>>,
    pub grid_size: usize,
    pub kernels: KernelSetDump,
}

enum Experiment {
    One {
        specs: Vec<OperatorSpec>,
        kernels: SamplingKernelSet,
    },
    Two {
        specs: (Vec<OperatorSpec>, Vec<OperatorSpec>),
        kernels: SamplingKernelSet2d,
    },
}

fn dual_choice(cfg: &ExperimentConfig) -> Result<DualChoice, CliError> {
    let q = cfg.scheme.len();
    let p = cfg.period;
    Ok(match &cfg.dual {
        DualConfig::Canonical => DualChoice::Canonical,
        DualConfig::RandomLeftInverse { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            DualChoice::LeftInverse(DMatrix::from_fn(p, q, |_, _| rng.gen_range(-1.0..=1.0)))
        }
        DualConfig::LeftInverse { u } => {
            if u.len() != p || u.iter().any(|r| r.len() != q) {
                return Err(CliError::config(format!("dual.u must be {p}x{q}")));
            }
            let flat: Vec<f64> = u.iter().flatten().copied().collect();
            DualChoice::LeftInverse(DMatrix::from_row_slice(p, q, &flat))
        }
    })
}

fn second_axis(cfg: &ExperimentConfig) -> Option<(Generator, f64, usize, &[String])> {
    cfg.second_axis.as_ref().map(|ax| {
        (
            ax.generator.clone().unwrap_or_else(|| cfg.generator.clone()),
            ax.b,
            ax.period,
            ax.scheme.as_slice(),
        )
    })
}

fn build(cfg: &ExperimentConfig) -> Result<Experiment, CliError> {
    let specs = cfg.specs()?;
    if let Some(path) = &cfg.kernel_file {
        return load_kernels(cfg, path, specs);
    }
    let base = |gen: &Generator, a: f64| -> Result<_, CliError> {
        let zak = zak_kernel(gen, a, cfg.grid_size)?;
        Ok(shannon_kernel(&zak, gen, cfg.radius)?)
    };
    match second_axis(cfg) {
        None => {
            let b = base(&cfg.generator, cfg.a)?;
            let pipe = Pipeline1d::from_base(&b, &specs, cfg.period, &dual_choice(cfg)?)?;
            Ok(Experiment::One {
                specs,
                kernels: pipe.kernels,
            })
        }
        Some((gen2, b, period2, scheme2)) => {
            if cfg.dual != DualConfig::Canonical {
                return Err(CliError::config("two-dimensional experiments use the canonical dual"));
            }
            let specs2 = parse(scheme2)?;
            for s in &specs2 {
                s.validate(period2)?;
            }
            let base2d = match cfg.kernel2d {
                Kernel2dMode::Separable => BaseKernel2d::Separable {
                    first: base(&cfg.generator, cfg.a)?,
                    second: base(&gen2, b)?,
                },
                Kernel2dMode::General => {
                    let g = Generator2d::product(cfg.generator.clone(), gen2);
                    let zak = zak_kernel_2d(&g, cfg.a, b, cfg.grid_size2d)?;
                    BaseKernel2d::General(shannon_kernel_2d(&zak, &g, cfg.radius2d)?)
                }
            };
            let pipe = Pipeline2d::new(&base2d, (&specs, &specs2), (cfg.period, period2))?;
            Ok(Experiment::Two {
                specs: (specs, specs2),
                kernels: pipe.kernels,
            })
        }
    }
}

fn load_kernels(cfg: &ExperimentConfig, path: &Path, specs: Vec<OperatorSpec>) -> Result<Experiment, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let dump: KernelDump = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid kernel file {}: {e}", path.display())))?;
    let mismatch = |what: &str| CliError::config(format!("kernel file {} {what}", path.display()));
    let labels: Vec<String> = specs.iter().map(|s| s.to_string()).collect();
    let dumped: Vec<String> = parse(&dump.scheme)?.iter().map(|s| s.to_string()).collect();
    if labels != dumped {
        return Err(mismatch("was built for a different scheme"));
    }
    match (dump.kernels, second_axis(cfg)) {
        (KernelSetDump::OneDim(kernels), None) => {
            if kernels.period != cfg.period || kernels.base.a != cfg.a {
                return Err(mismatch("does not match the configured period and offset"));
            }
            Ok(Experiment::One { specs, kernels })
        }
        (KernelSetDump::TwoDim(kernels), Some((_, b, period2, scheme2))) => {
            if kernels.periods != (cfg.period, period2) || kernels.base.offsets() != (cfg.a, b) {
                return Err(mismatch("does not match the configured periods and offsets"));
            }
            Ok(Experiment::Two {
                specs: (specs, parse(scheme2)?),
                kernels,
            })
        }
        _ => Err(mismatch("has the wrong dimension")),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffFile1d {
    start: i64,
    coeffs: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffFile2d {
    start: (i64, i64),
    rows: usize,
    cols: usize,
    coeffs: Vec<f64>,
}

fn read_coeffs<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("invalid coefficient file {}: {e}", path.display())))
}

fn random_coeffs(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

fn signal_1d(cfg: &ExperimentConfig, gen: &Generator) -> Result<Signal, CliError> {
    Ok(match &cfg.signal {
        SignalConfig::Random { seed, support } => {
            Signal::new(gen.clone(), -(*support as i64) / 2, random_coeffs(*seed, *support))
        }
        SignalConfig::File { path } => {
            let c: CoeffFile1d = read_coeffs(path)?;
            Signal::new(gen.clone(), c.start, c.coeffs)
        }
    })
}

fn signal_2d(cfg: &ExperimentConfig, gen: Generator2d) -> Result<Signal2d, CliError> {
    Ok(match &cfg.signal {
        SignalConfig::Random { seed, support } => {
            let s = *support;
            let start = -(s as i64) / 2;
            Signal2d::new(gen, (start, start), s, s, random_coeffs(*seed, s * s))?
        }
        SignalConfig::File { path } => {
            let c: CoeffFile2d = read_coeffs(path)?;
            Signal2d::new(gen, c.start, c.rows, c.cols, c.coeffs)?
        }
    })
}

fn coverage_hint(e: shiftinv::Error) -> CliError {
    match e {
        shiftinv::Error::Coverage { need_lo, need_hi, .. } => CliError::config(format!(
            "{e}; set sampleWindow to [{need_lo}, {need_hi}] or remove it"
        )),
        other => other.into(),
    }
}

fn grid_2d(axis: &[f64]) -> Vec<(f64, f64)> {
    axis.iter().flat_map(|&t| axis.iter().map(move |&s| (t, s))).collect()
}

pub fn cmd_kernel(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    if cfg.second_axis.is_none() && cfg.kernel_file.is_none() {
        let zak = zak_kernel(&cfg.generator, cfg.a, cfg.grid_size)?;
        let (lo, hi) = riesz_condition(&zak, DEFAULT_RIESZ_TOL).into_result()?;
        println!("Riesz bounds on the grid: {lo:.6e} <= |K_a| <= {hi:.6e}");
    }
    let exp = build(cfg)?;
    let axis = cfg.evaluation.points();
    let mut files = 0;
    let dump = match exp {
        Experiment::One { kernels, .. } => {
            let s: Vec<f64> = axis.iter().map(|&t| kernels.base.eval(t)).collect();
            write_csv_1d(&out.join("S.csv"), &axis, &s)?;
            for j in 0..kernels.channels() {
                let v: Vec<f64> = axis.iter().map(|&t| kernels.eval(j, t)).collect();
                write_csv_1d(&out.join(format!("T{}.csv", j + 1)), &axis, &v)?;
            }
            files += 1 + kernels.channels();
            KernelSetDump::OneDim(kernels)
        }
        Experiment::Two { specs, kernels } => {
            let pts = grid_2d(&axis);
            let s: Vec<f64> = pts.iter().map(|&(t, s)| kernels.base.eval(t, s)).collect();
            write_csv_2d(&out.join("S.csv"), &pts, &s)?;
            let q1 = specs.1.len();
            for j in 0..kernels.combos.len() {
                let v: Vec<f64> = pts.iter().map(|&(t, s)| kernels.eval(j, t, s)).collect();
                write_csv_2d(&out.join(format!("T{}_{}.csv", j / q1 + 1, j % q1 + 1)), &pts, &v)?;
            }
            files += 1 + kernels.combos.len();
            KernelSetDump::TwoDim(kernels)
        }
    };
    let dump = KernelDump {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed(),
        scheme: cfg.scheme.clone(),
        second_scheme: cfg.second_axis.as_ref().map(|a| a.scheme.clone()),
        grid_size: cfg.grid_size,
        kernels: dump,
    };
    write_json(&out.join("kernels.json"), &dump)?;
    println!("wrote {} kernel CSV files and kernels.json to {}", files, out.display());
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ReportJson {
    schema_version: u32,
    seed: Option<u64>,
    dimension: u8,
    scheme: Vec<String>,
    second_scheme: Option<Vec<String>>,
    max_abs_error: f64,
    l2_error: f64,
    points: usize,
    samples_per_channel: Vec<usize>,
    radius: usize,
    runtime_seconds: f64,
}

pub fn cmd_reconstruct(cfg: &ExperimentConfig, out: &Path) -> Result<ReconstructionReport, CliError> {
    let start = Instant::now();
    let exp = build(cfg)?;
    let axis = cfg.evaluation.points();
    let (report, dimension) = match exp {
        Experiment::One { specs, kernels } => {
            let f = signal_1d(cfg, &kernels.base.generator)?;
            let window = match cfg.sample_window {
                Some((lo, hi)) => lo..=hi,
                None => required_window(&kernels, cfg.evaluation.start, cfg.evaluation.end),
            };
            let samples = apply_operators(&f, &specs, kernels.base.a, kernels.period, window);
            let rec = match kernels.mode {
                DualMode::Basis => reconstruct_1d(&samples, &kernels, &axis),
                DualMode::Frame => frame_reconstruct_1d(&samples, &kernels, &axis),
            }
            .map_err(coverage_hint)?;
            let truth: Vec<f64> = axis.iter().map(|&t| f.eval(t)).collect();
            let err: Vec<f64> = rec.iter().zip(&truth).map(|(r, t)| r - t).collect();
            write_csv_1d(&out.join("reconstruction.csv"), &axis, &rec)?;
            write_csv_1d(&out.join("error.csv"), &axis, &err)?;
            let counts = samples.channels.iter().map(Vec::len).collect();
            (
                ReconstructionReport::compare(&rec, &truth, cfg.evaluation.step, counts, kernels.base.radius),
                1,
            )
        }
        Experiment::Two { specs, kernels } => {
            let f = signal_2d(cfg, kernels.base.generator())?;
            let range = (cfg.evaluation.start, cfg.evaluation.end);
            let windows = match cfg.sample_window {
                Some((lo, hi)) => (lo..=hi, lo..=hi),
                None => required_window_2d(&kernels, range, range),
            };
            let samples = apply_operators_2d(&f, (&specs.0, &specs.1), kernels.base.offsets(), kernels.periods, windows);
            let pts = grid_2d(&axis);
            let rec = reconstruct_2d(&samples, &kernels, &pts).map_err(coverage_hint)?;
            let truth: Vec<f64> = pts.iter().map(|&(t, s)| f.eval(t, s)).collect();
            let err: Vec<f64> = rec.iter().zip(&truth).map(|(r, t)| r - t).collect();
            write_csv_2d(&out.join("reconstruction.csv"), &pts, &rec)?;
            write_csv_2d(&out.join("error.csv"), &pts, &err)?;
            let counts = samples.channels.iter().map(Vec::len).collect();
            let step = cfg.evaluation.step;
            (
                ReconstructionReport::compare(&rec, &truth, step * step, counts, kernels.base.radius().0),
                2,
            )
        }
    };
    let json = ReportJson {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed(),
        dimension,
        scheme: cfg.scheme.clone(),
        second_scheme: cfg.second_axis.as_ref().map(|a| a.scheme.clone()),
        max_abs_error: report.max_abs_error,
        l2_error: report.l2_grid_error,
        points: report.points,
        samples_per_channel: report.samples_per_channel.clone(),
        radius: report.radius,
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&out.join("report.json"), &json)?;
    println!(
        "maxAbsError = {:.3e}, l2Error = {:.3e} over {} points",
        report.max_abs_error, report.l2_grid_error, report.points
    );
    Ok(report)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Check {
    name: String,
    passed: bool,
    deviation: Option<f64>,
    detail: String,
}

impl Check {
    fn measured(name: impl Into<String>, deviation: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            passed: deviation <= tol,
            deviation: Some(deviation),
            detail: format!("deviation {deviation:.3e}, tolerance {tol:.1e}"),
        }
    }

    fn exact(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            deviation: None,
            detail: detail.into(),
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct VerifyJson {
    schema_version: u32,
    seed: Option<u64>,
    passed: bool,
    checks: Vec<Check>,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) as f64
}

fn matrix_from_rows(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>, CliError> {
    let c = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || c == 0 || rows.iter().any(|r| r.len() != c) {
        return Err(CliError::config(format!("fixture {name}: matrix rows must be non-empty and equal length")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), c, &flat))
}

pub fn cmd_verify(cfg: &ExperimentConfig, out: &Path) -> Result<bool, CliError> {
    let v = &cfg.verify;
    let mut checks = Vec::new();

    for p in 1..=v.max_period {
        let m = scheme_matrix(&forward_specs(p), p)?;
        let inv = invert_scheme(&m)?;
        let pascal = DMatrix::from_fn(p, p, binomial);
        let signed = DMatrix::from_fn(p, p, |j, k| if (j + k) % 2 == 0 { 1.0 } else { -1.0 } * binomial(j, k));
        checks.push(Check::exact(
            format!("pascal p={p}"),
            inv.exact && inv.matrix == pascal && m.matrix == signed,
            "forward-difference matrix and its inverse against generated binomials",
        ));
        let b = scheme_matrix(&backward_specs(p), p)?;
        let binv = invert_scheme(&b)?;
        checks.push(Check::exact(
            format!("involution p={p}"),
            &b.matrix * &b.matrix == DMatrix::identity(p, p) && binv.matrix == b.matrix,
            "backward-difference matrix squared against the identity",
        ));
    }

    let zak = zak_kernel(&cfg.generator, cfg.a, cfg.grid_size)?;
    let base = shannon_kernel(&zak, &cfg.generator, cfg.radius)?;
    checks.push(Check::measured(
        "interpolation",
        interpolation_check(&base, v.interpolation_range),
        v.interpolation_tol,
    ));

    let mut schemes: Vec<(String, Vec<OperatorSpec>, usize)> = vec![
        ("forward p=2".into(), forward_specs(2), 2),
        ("forward p=3".into(), forward_specs(3), 3),
        ("backward p=3".into(), backward_specs(3), 3),
        ("mixed p=3".into(), mixed_specs(3), 3),
        ("forward average p=2".into(), forward_average_specs(), 2),
        ("central p=3".into(), central_specs(), 3),
    ];
    let own = cfg.specs()?;
    if own.len() == cfg.period {
        schemes.push(("configured scheme".into(), own, cfg.period));
    }
    for (name, specs, p) in schemes {
        let m = scheme_matrix(&specs, p)?;
        let d = invert_scheme(&m)?;
        let dev = biorthogonality_check(&m, &d, &zak, v.biortho_window)?;
        checks.push(Check::measured(format!("biorthogonality {name}"), dev, v.biortho_tol));
    }

    for fx in &v.fixtures {
        let matrix = matrix_from_rows(&fx.name, &fx.matrix)?;
        let labels = (0..matrix.nrows()).map(|i| format!("{} row {i}", fx.name)).collect();
        let m = SchemeMatrix::new(matrix, fx.window_start, labels)?;
        let dual = match &fx.dual {
            Some(rows) => DualMatrix {
                matrix: matrix_from_rows(&fx.name, rows)?,
                mode: DualMode::Basis,
                determinant: None,
                exact: false,
            },
            None => invert_scheme(&m)?,
        };
        let dev = biorthogonality_check(&m, &dual, &zak, v.biortho_window)?;
        checks.push(Check::measured(format!("biorthogonality fixture {}", fx.name), dev, v.biortho_tol));
    }

    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let passed = checks.iter().all(|c| c.passed);
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {} failed", checks.len(), failed);
    write_json(
        &out.join("verify.json"),
        &VerifyJson {
            schema_version: SCHEMA_VERSION,
            seed: cfg.seed(),
            passed,
            checks,
        },
    )?;
    Ok(passed)
}

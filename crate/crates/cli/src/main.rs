//! `sphere-edit`: conformal edits of equirectangular spherical images.

mod complex;
mod config;
mod pipeline;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sphere_edit::conformal::{LatticeKind, LatticeNormalization, LatticeSpec, LatticeTwist};
use sphere_edit::pattern::generate_test_pattern;
use sphere_edit::rational::fit_rational_auto;
use sphere_edit::resample::{Filter, SampleOptions};

use crate::complex::{parse_complex, parse_complex_list, parse_point};
use crate::config::PipelineConfig;
use crate::pipeline::{Context, Failure};

#[derive(Parser)]
#[command(name = "sphere-edit", version, about = "Conformal edits of equirectangular spherical images")]
struct Cli {
    /// Worker threads for rendering within a frame.
    #[arg(long, global = true, env = "SPHERE_EDIT_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RenderArgs {
    /// INPUT OUTPUT, or just OUTPUT (a directory) with --frames.
    #[arg(required = true, num_args = 1..=2, value_name = "PATHS")]
    paths: Vec<PathBuf>,

    /// Render every image in this directory, in name order.
    #[arg(long, value_name = "DIR")]
    frames: Option<PathBuf>,

    #[arg(long, value_enum)]
    filter: Option<FilterArg>,

    /// Samples per pixel along each axis (1–8).
    #[arg(long)]
    supersample: Option<u32>,

    /// Color for points where the map is undefined, as R,G,B.
    #[arg(long, value_parser = parse_rgb)]
    undefined_color: Option<[u8; 3]>,

    /// Pad inputs whose aspect is not 2:1.
    #[arg(long)]
    allow_nonstandard: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FilterArg {
    Nearest,
    Bilinear,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum LatticeArg {
    Square,
    Hexagonal,
}

impl From<LatticeArg> for LatticeKind {
    fn from(l: LatticeArg) -> Self {
        match l {
            LatticeArg::Square => LatticeKind::Square,
            LatticeArg::Hexagonal => LatticeKind::Hexagonal,
        }
    }
}

fn lattice_name(l: LatticeArg) -> &'static str {
    match l {
        LatticeArg::Square => "square",
        LatticeArg::Hexagonal => "hexagonal",
    }
}

#[derive(Subcommand)]
enum Command {
    /// Pull back by a Möbius map.
    Mobius {
        /// Fixed point (give twice); defaults to 0 and inf.
        #[arg(long, num_args = 1, value_parser = check_point, allow_hyphen_values = true)]
        fix: Vec<String>,
        /// Rotation about the fixed points, in radians.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        angle: f64,
        /// Scale factor at the first fixed point.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Matrix entries a,b,c,d.
        #[arg(long, conflicts_with_all = ["fix", "from"], value_parser = check_complex_list, allow_hyphen_values = true)]
        matrix: Option<String>,
        /// Three source points p,q,r (with --to).
        #[arg(long, requires = "to", allow_hyphen_values = true)]
        from: Option<String>,
        /// Their three images.
        #[arg(long, requires = "from", allow_hyphen_values = true)]
        to: Option<String>,
        /// Pull back by the inverse.
        #[arg(long)]
        invert: bool,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Pull back by z ↦ zⁿ.
    Power {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Pull back by the exponential strip map with scale lambda.
    ExpStrip {
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Straight or twisted Droste effect.
    Droste {
        #[arg(long, default_value = "0", value_parser = check_point, allow_hyphen_values = true)]
        p: String,
        #[arg(long, default_value = "inf", value_parser = check_point, allow_hyphen_values = true)]
        q: String,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        twist: i32,
        #[arg(long, default_value_t = 1.0)]
        inner_radius: f64,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Rational map induced by multiplication on a lattice.
    Twist {
        #[arg(long, value_enum)]
        lattice: LatticeArg,
        #[arg(long, value_parser = check_complex, allow_hyphen_values = true)]
        multiplier: String,
        /// `anchors` or `scaled:E1` with E1 the image of e₁.
        #[arg(long, default_value = "anchors", value_parser = parse_normalization, allow_hyphen_values = true)]
        normalization: LatticeNormalization,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Pull back by an explicit rational map.
    Rational {
        /// Coefficients file written by fit-rational.
        #[arg(long, conflicts_with_all = ["numerator", "denominator"])]
        coeffs: Option<PathBuf>,
        /// Numerator coefficients, highest degree first.
        #[arg(long, requires = "denominator", value_parser = check_complex_list, allow_hyphen_values = true)]
        numerator: Option<String>,
        #[arg(long, requires = "numerator", value_parser = check_complex_list, allow_hyphen_values = true)]
        denominator: Option<String>,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Fit the rational map of a lattice twist and print its coefficients.
    FitRational {
        #[arg(long, value_enum)]
        lattice: LatticeArg,
        #[arg(long, value_parser = check_complex, allow_hyphen_values = true)]
        multiplier: String,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value = "anchors", value_parser = parse_normalization, allow_hyphen_values = true)]
        normalization: LatticeNormalization,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write JSON here instead of standard output.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Schottky group escape rendering.
    Schottky {
        /// Generator pairing the outside of one circle with the inside of
        /// another: C1,R1,C2,R2 (give once or twice).
        #[arg(long, value_parser = check_pair, allow_hyphen_values = true)]
        pair: Vec<String>,
        /// Generator A as a,b,c,d.
        #[arg(long, conflicts_with = "pair", value_parser = check_complex_list, allow_hyphen_values = true)]
        a: Option<String>,
        /// Generator B as a,b,c,d.
        #[arg(long, requires = "a", value_parser = check_complex_list, allow_hyphen_values = true)]
        b: Option<String>,
        /// Region mask: red/green D_a, D_b, optionally white/blue D_A, D_B.
        #[arg(long, requires = "a")]
        mask: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Several sources, each with its own region and map stages.
    Composite {
        /// JSON file with a "sources" list.
        sources: PathBuf,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Write the procedural test pattern.
    TestPattern {
        #[arg(long, default_value_t = 1024)]
        height: usize,
        output: PathBuf,
    },
    /// Check a pipeline config without rendering.
    Validate { config: PathBuf },
    /// Run a pipeline config; flags override its settings.
    Run {
        config: PathBuf,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        frames: Option<PathBuf>,
        #[arg(long, value_enum)]
        filter: Option<FilterArg>,
        #[arg(long)]
        supersample: Option<u32>,
        #[arg(long)]
        allow_nonstandard: bool,
    },
}

fn check_complex(s: &str) -> Result<String, String> {
    parse_complex(s).map(|_| s.to_string())
}

fn check_point(s: &str) -> Result<String, String> {
    parse_point(s).map(|_| s.to_string())
}

fn check_complex_list(s: &str) -> Result<String, String> {
    parse_complex_list(s).map(|_| s.to_string())
}

fn check_pair(s: &str) -> Result<String, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err("expected C1,R1,C2,R2".into());
    }
    parse_complex(parts[0])?;
    parse_complex(parts[2])?;
    for r in [parts[1], parts[3]] {
        r.trim().parse::<f64>().map_err(|_| format!("radius {r:?} is not a number"))?;
    }
    Ok(s.to_string())
}

fn parse_rgb(s: &str) -> Result<[u8; 3], String> {
    let v: Vec<u8> = s.split(',').map(|c| c.trim().parse::<u8>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    v.try_into().map_err(|_| "expected R,G,B".to_string())
}

fn parse_normalization(s: &str) -> Result<LatticeNormalization, String> {
    match s.split_once(':') {
        None if s == "anchors" => Ok(LatticeNormalization::Anchors),
        Some(("scaled", e1)) => Ok(LatticeNormalization::Scaled { e1_image: parse_complex(e1)? }),
        _ => Err(format!("unknown normalization {s:?} (expected anchors or scaled:E1)")),
    }
}

/// Prints a line, treating a closed pipe as success.
fn print_stdout(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn split_list(s: &str) -> Vec<Value> {
    s.split(',').map(|p| Value::from(p.trim())).collect()
}

fn sampling(r: &RenderArgs) -> SampleOptions {
    let mut opts = SampleOptions::default();
    if let Some(f) = r.filter {
        opts.filter = filter(f);
    }
    if let Some(k) = r.supersample {
        opts.supersample = k;
    }
    if let Some(c) = r.undefined_color {
        opts.undefined_color = c;
    }
    opts
}

fn filter(f: FilterArg) -> Filter {
    match f {
        FilterArg::Nearest => Filter::Nearest,
        FilterArg::Bilinear => Filter::Bilinear,
    }
}

/// A one-stage pipeline from render flags.
fn single_stage(stage: Value, r: &RenderArgs) -> Result<PipelineConfig, Failure> {
    let (input, output) = match (r.frames.is_some(), r.paths.as_slice()) {
        (true, [out]) => (None, out.clone()),
        (false, [input, out]) => (Some(input.clone()), out.clone()),
        (true, _) => return Err(Failure::config("with --frames give only the output directory")),
        (false, _) => return Err(Failure::config("expected INPUT and OUTPUT")),
    };
    Ok(PipelineConfig {
        input,
        output: Some(output),
        frames: r.frames.clone(),
        sampling: sampling(r),
        allow_nonstandard: r.allow_nonstandard,
        stages: vec![stage],
    })
}

fn mobius_json(matrix: &Option<String>, from: &Option<String>, to: &Option<String>, fix: &[String], angle: f64, scale: f64) -> Result<Value, Failure> {
    let mut m = json!({});
    if let Some(mat) = matrix {
        m["matrix"] = Value::from(split_list(mat));
    } else if let (Some(f), Some(t)) = (from, to) {
        m["from"] = Value::from(split_list(f));
        m["to"] = Value::from(split_list(t));
    } else {
        match fix.len() {
            0 => {}
            2 => m["fix"] = json!(fix),
            n => return Err(Failure::config(format!("--fix must be given twice, got {n}"))),
        }
        m["angle"] = json!(angle);
        m["scale"] = json!(scale);
    }
    Ok(m)
}

fn load_config(path: &Path) -> Result<(PipelineConfig, Context), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let cfg: PipelineConfig =
        serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let ctx = Context { base_dir, allow_nonstandard: cfg.allow_nonstandard };
    Ok((cfg, ctx))
}

fn run_single(stage: Value, r: &RenderArgs) -> Result<(), Failure> {
    let cfg = single_stage(stage, r)?;
    let ctx = Context { base_dir: PathBuf::new(), allow_nonstandard: cfg.allow_nonstandard };
    pipeline::run(&cfg, &ctx)
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Mobius { fix, angle, scale, matrix, from, to, invert, render } => {
            let mut stage = mobius_json(&matrix, &from, &to, &fix, angle, scale)?;
            stage["type"] = json!("mobius");
            stage["invert"] = json!(invert);
            run_single(stage, &render)
        }
        Command::Power { n, render } => run_single(json!({"type": "power", "n": n}), &render),
        Command::ExpStrip { lambda, render } => run_single(json!({"type": "exp_strip", "lambda": lambda}), &render),
        Command::Droste { p, q, lambda, twist, inner_radius, render } => run_single(
            json!({"type": "droste", "p": p, "q": q, "lambda": lambda, "twist": twist, "inner_radius": inner_radius}),
            &render,
        ),
        Command::Twist { lattice, multiplier, normalization, render } => run_single(
            json!({
                "type": "lattice_twist",
                "lattice": lattice_name(lattice),
                "multiplier": multiplier,
                "normalization": normalization,
            }),
            &render,
        ),
        Command::Rational { coeffs, numerator, denominator, render } => {
            let stage = match (coeffs, numerator, denominator) {
                (Some(path), _, _) => {
                    let path = std::path::absolute(&path).map_err(|e| Failure::io(e.to_string()))?;
                    json!({"type": "rational", "coeffs": path})
                }
                (None, Some(n), Some(d)) => {
                    json!({"type": "rational", "numerator": split_list(&n), "denominator": split_list(&d)})
                }
                _ => return Err(Failure::config("give --coeffs or --numerator with --denominator")),
            };
            run_single(stage, &render)
        }
        Command::FitRational { lattice, multiplier, degree, normalization, seed, emit } => {
            let m = parse_complex(&multiplier).map_err(Failure::config)?;
            let twist = LatticeTwist::new(LatticeSpec::new(lattice.into()), m, normalization)
                .map_err(|e| Failure::from_core("fit-rational", &e))?;
            let fit = fit_rational_auto(&twist, degree, seed).map_err(|e| Failure::from_core("fit-rational", &e))?;
            eprintln!("degree {}, residual {:.2e}, samples {}", fit.map.degree(), fit.residual, fit.samples_used);
            let text = serde_json::to_string_pretty(&fit.map).expect("coefficients serialize");
            match emit {
                Some(path) => std::fs::write(&path, text + "\n").map_err(|e| Failure::io(format!("{}: {e}", path.display()))),
                None => {
                    print_stdout(&text);
                    Ok(())
                }
            }
        }
        Command::Schottky { pair, a, b, mask, max_iter, render } => {
            let mut stage = json!({"type": "schottky", "max_iter": max_iter});
            if !pair.is_empty() {
                let pairs: Vec<Value> = pair
                    .iter()
                    .map(|p| {
                        let v: Vec<&str> = p.split(',').map(str::trim).collect();
                        let r = |s: &str| s.parse::<f64>().expect("checked by the parser");
                        json!({"from": {"center": v[0], "radius": r(v[1])}, "to": {"center": v[2], "radius": r(v[3])}})
                    })
                    .collect();
                stage["pairs"] = Value::from(pairs);
            } else {
                let a = a.ok_or_else(|| Failure::config("give --pair or --a with --mask"))?;
                stage["a"] = json!({"matrix": split_list(&a)});
                if let Some(b) = b {
                    stage["b"] = json!({"matrix": split_list(&b)});
                }
                let mask = mask.ok_or_else(|| Failure::config("--a needs --mask"))?;
                stage["mask"] = json!(std::path::absolute(&mask).map_err(|e| Failure::io(e.to_string()))?);
            }
            run_single(stage, &render)
        }
        Command::Composite { sources, render } => {
            let text = std::fs::read_to_string(&sources).map_err(|e| Failure::io(format!("{}: {e}", sources.display())))?;
            let mut stage: Value =
                serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", sources.display())))?;
            if !stage.is_object() {
                return Err(Failure::config(format!("{}: expected an object with \"sources\"", sources.display())));
            }
            stage["type"] = json!("composite");
            let mut cfg = single_stage(stage, &render)?;
            // paths inside the sources file are relative to it
            let base = sources.parent().map(Path::to_path_buf).unwrap_or_default();
            let cwd = std::env::current_dir().map_err(|e| Failure::io(e.to_string()))?;
            cfg.input = cfg.input.map(|p| cwd.join(p));
            cfg.output = cfg.output.map(|p| cwd.join(p));
            cfg.frames = cfg.frames.map(|p| cwd.join(p));
            let ctx = Context { base_dir: base, allow_nonstandard: cfg.allow_nonstandard };
            pipeline::run(&cfg, &ctx)
        }
        Command::TestPattern { height, output } => {
            let img = generate_test_pattern(height).map_err(|e| Failure::from_core("test-pattern", &e))?;
            img.save(&output).map_err(|e| Failure::from_core(&output.display().to_string(), &e))
        }
        Command::Validate { config } => {
            let (cfg, ctx) = load_config(&config)?;
            let report = pipeline::validate(&cfg, &ctx);
            for f in &report {
                print_stdout(&f.to_string());
            }
            match report.first() {
                Some(f) => Err(Failure { code: f.code, message: format!("{} problem(s) found", report.len()) }),
                None => {
                    eprintln!("{}: {} stage(s) valid", config.display(), cfg.stages.len());
                    Ok(())
                }
            }
        }
        Command::Run { config, input, output, frames, filter: f, supersample, allow_nonstandard } => {
            let (mut cfg, mut ctx) = load_config(&config)?;
            let cwd = std::env::current_dir().map_err(|e| Failure::io(e.to_string()))?;
            if let Some(p) = input {
                cfg.input = Some(cwd.join(p));
                cfg.frames = None;
            }
            if let Some(p) = frames {
                cfg.frames = Some(cwd.join(p));
                cfg.input = None;
            }
            if let Some(p) = output {
                cfg.output = Some(cwd.join(p));
            }
            if let Some(f) = f {
                cfg.sampling.filter = filter(f);
            }
            if let Some(k) = supersample {
                cfg.sampling.supersample = k;
            }
            if allow_nonstandard {
                cfg.allow_nonstandard = true;
                ctx.allow_nonstandard = true;
            }
            pipeline::run(&cfg, &ctx)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(pipeline::EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot start {jobs} workers: {e}");
            return ExitCode::from(pipeline::EXIT_CONFIG);
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}

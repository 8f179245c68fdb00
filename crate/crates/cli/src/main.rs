//! `ortho`: counting experiments for common perpendiculars.
//!
//! Lengths are hyperbolic lengths; bounds on form values are dimensionless.
//! Exit codes: 0 success, 1 failed check, 2 invalid arguments, 3 capacity or
//! stabilisation failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use parse::parse_list;
use ortho_core::constants::{special_constant, Params};
use ortho_core::hermitian::{herm_count_report, Gauss, HermForm};
use ortho_core::orbits::{orbit_ball_report, Ring};
use ortho_core::qforms::{
    count_orbit_irrationals, perp_length, perp_length_geometric, primitive_rep_values, random_sl2, BinaryQF,
};
use ortho_core::report::{emit, fit_power, CountReport, Format, Growth, Row};
use ortho_core::{constants, cusps, quat, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "ortho", version, about = "Counting common perpendiculars in hyperbolic space")]
struct Cli {
    /// Seed for every randomised check.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Integral binary quadratic forms.
    #[command(subcommand)]
    Quad(QuadCmd),
    /// Cusp-to-cusp counts.
    #[command(subcommand)]
    Cusp(CuspCmd),
    /// Orbit points in balls.
    #[command(subcommand)]
    Orbit(OrbitCmd),
    /// Binary Hermitian forms over ℤ[i].
    #[command(subcommand)]
    Herm(HermCmd),
    /// Evaluate a named constant, e.g. `ortho const huber --params g=2`.
    Const {
        name: String,
        /// Comma-separated `key=value` pairs.
        #[arg(long, default_value = "")]
        params: String,
    },
    /// Quaternion checks.
    #[command(subcommand)]
    Quat(QuatCmd),
}

#[derive(Args)]
struct Grid {
    /// Largest parameter value.
    #[arg(long)]
    smax: f64,
    /// Smallest parameter value; the grid excludes it unless `steps` is 0.
    #[arg(long, default_value_t = 0.0)]
    smin: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 10)]
    steps: usize,
}

impl Grid {
    fn points(&self) -> Result<Vec<f64>, Error> {
        if self.steps == 0 || !(self.smax > self.smin) {
            return Err(Error::InvalidArgument("need steps ≥ 1 and smax > smin".into()));
        }
        let h = (self.smax - self.smin) / self.steps as f64;
        Ok((1..=self.steps).map(|i| if i == self.steps { self.smax } else { self.smin + h * i as f64 }).collect())
    }
}

#[derive(Subcommand)]
enum QuadCmd {
    /// Ψ_Q(s): primitive representations with |Q| ≤ s up to automorphs.
    Count {
        /// Coefficients `a,b,c`.
        #[arg(long, allow_hyphen_values = true)]
        form: String,
        #[command(flatten)]
        grid: Grid,
        /// Count all representations (Ψ̃_Q) instead of primitive ones.
        #[arg(long)]
        all: bool,
    },
    /// Compare the closed-form perpendicular length with the geometric route.
    VerifyLength {
        #[arg(long, allow_hyphen_values = true)]
        form: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Quadratic irrationals in the orbit of the roots, with height at most s.
    Irrationals {
        #[arg(long, allow_hyphen_values = true)]
        form: String,
        #[command(flatten)]
        grid: Grid,
    },
}

#[derive(Subcommand)]
enum CuspCmd {
    /// Farey horoballs at distance at most s.
    Mertens {
        #[command(flatten)]
        grid: Grid,
    },
    /// Horoballs of a Bianchi group at distance at most s.
    Bianchi {
        #[arg(long, allow_hyphen_values = true)]
        dk: i64,
        #[command(flatten)]
        grid: Grid,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Group {
    Psl2z,
    Psl2zi,
}

#[derive(Subcommand)]
enum OrbitCmd {
    /// Group elements moving the base point at most s.
    Ball {
        #[arg(long, value_enum)]
        group: Group,
        #[command(flatten)]
        grid: Grid,
    },
}

#[derive(Subcommand)]
enum HermCmd {
    /// Circles of the orbit with |a| ≤ s, modulo translations.
    Count {
        /// Coefficients `a,b_re,b_im,c`.
        #[arg(long, allow_hyphen_values = true)]
        form: String,
        /// Largest bound s.
        #[arg(long)]
        bound: f64,
        /// Pruning slack, at least 1.
        #[arg(long, default_value_t = 2.0)]
        slack: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
}

#[derive(Subcommand)]
enum QuatCmd {
    /// Hurwitz closure, unit group and Dieudonné multiplicativity.
    Selftest {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

mod parse {
    use ortho_core::Error;

    pub fn parse_list(s: &str, n: usize) -> Result<Vec<i64>, Error> {
        let v: Vec<i64> = s
            .split(',')
            .map(|x| x.trim().parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("bad integer list {s:?}: {e}")))?;
        if v.len() != n {
            return Err(Error::InvalidArgument(format!("expected {n} comma-separated integers, got {s:?}")));
        }
        Ok(v)
    }
}

fn parse_form(s: &str) -> Result<BinaryQF, Error> {
    let v = parse_list(s, 3)?;
    Ok(BinaryQF::new(v[0], v[1], v[2]))
}

fn parse_params(s: &str) -> Result<Params, Error> {
    let mut p = Params::new();
    for kv in s.split(',').filter(|x| !x.trim().is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("expected key=value, got {kv:?}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|e| Error::InvalidArgument(format!("bad value for {k}: {e}")))?;
        p.insert(k.trim().to_string(), v);
    }
    Ok(p)
}

enum Output {
    Report(CountReport),
    Text(String, bool),
}

fn quad(cmd: QuadCmd, seed: u64) -> Result<Output, Error> {
    match cmd {
        QuadCmd::Count { form, grid, all } => {
            let q = parse_form(&form)?;
            let d = q.check_indefinite()?;
            let pts = grid.points()?;
            let smax = pts.iter().copied().fold(0.0, f64::max);
            let values = primitive_rep_values(&q, smax.floor() as u64)?;
            let mut c = constants::quadratic_form(d as i64)?;
            if all {
                c *= constants::zeta(2.0);
            }
            let mut r = CountReport::new(if all { "quad-all-reps" } else { "quad-primitive-reps" })
                .param("form", q)
                .param("prediction_constant", c);
            for s in pts {
                let n = if all { values.psi_all(s) } else { values.psi(s) };
                r.push(Row::new(s, n, c * s)?);
            }
            r.fit_with(Growth::Power(1.0))?;
            Ok(Output::Report(r))
        }
        QuadCmd::VerifyLength { form, samples } => {
            let q = parse_form(&form)?;
            q.check_indefinite()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut checked, mut worst, mut tries) = (0usize, 0f64, 0usize);
            while checked < samples {
                tries += 1;
                if tries > 100 * samples.max(1) {
                    return Err(Error::Capacity("too few γ with a positive perpendicular".into()));
                }
                let g = random_sl2(&mut rng, 8);
                let Ok(l) = perp_length(&q, &g) else { continue };
                if l <= 0.0 {
                    continue;
                }
                worst = worst.max((perp_length_geometric(&q, &g)? - l).abs());
                checked += 1;
            }
            let ok = worst < 1e-9;
            Ok(Output::Text(
                format!("form={q}\nsamples={checked}\nmax_abs_err={worst:e}\n{}\n", if ok { "PASS" } else { "FAIL" }),
                ok,
            ))
        }
        QuadCmd::Irrationals { form, grid } => {
            let q = parse_form(&form)?;
            let mut r = CountReport::new("quad-irrationals").param("form", q).param("prediction", "s");
            for s in grid.points()? {
                r.push(Row::new(s, count_orbit_irrationals(&q, s)?, s)?);
            }
            if r.rows.len() >= 2 {
                let (k, _) = fit_power(&r.rows)?;
                r = r.param("fitted_exponent", k);
            }
            r.fit_with(Growth::Power(1.0))?;
            Ok(Output::Report(r))
        }
    }
}

fn cusp(cmd: CuspCmd) -> Result<Output, Error> {
    match cmd {
        CuspCmd::Mertens { grid } => {
            let c = constants::mertens();
            let mut r = CountReport::new("cusp-mertens").param("prediction_constant", c);
            for s in grid.points()? {
                r.push(Row::new(s, cusps::mertens_count(s)?, c * s.exp())?);
            }
            r.fit_with(Growth::Exponential(1.0))?;
            Ok(Output::Report(r))
        }
        CuspCmd::Bianchi { dk, grid } => {
            let c = constants::cosentino_refined(dk)?;
            let density = constants::bianchi_cusp_density(dk)?;
            let mut r = CountReport::new("cusp-bianchi")
                .param("dk", dk)
                .param("prediction_constant", c)
                .param("class_density", density);
            for s in grid.points()? {
                r.push(Row::new(s, cusps::bianchi_cusp_count(dk, s)?, c * (2.0 * s).exp())?);
            }
            r.fit_with(Growth::Exponential(2.0))?;
            Ok(Output::Report(r))
        }
    }
}

fn run(cli: Cli) -> Result<Output, Error> {
    match cli.command {
        Command::Quad(c) => quad(c, cli.seed),
        Command::Cusp(c) => cusp(c),
        Command::Orbit(OrbitCmd::Ball { group, grid }) => {
            let ring = match group {
                Group::Psl2z => Ring::Integers,
                Group::Psl2zi => Ring::Imaginary(-4),
            };
            Ok(Output::Report(orbit_ball_report(ring, &grid.points()?)?))
        }
        Command::Herm(HermCmd::Count { form, bound, slack, steps }) => {
            let v = parse_list(&form, 4)?;
            let f = HermForm::new(v[0], Gauss::new(v[1], v[2]), v[3]);
            let grid = Grid { smax: bound, smin: 0.0, steps };
            Ok(Output::Report(herm_count_report(&f, &grid.points()?, slack)?))
        }
        Command::Const { name, params } => {
            let v = special_constant(&name, &parse_params(&params)?)?;
            Ok(Output::Text(format!("{v}\n"), true))
        }
        Command::Quat(QuatCmd::Selftest { samples }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let lines = quat::selftest(&mut rng, samples);
            let ok = lines.iter().all(|l| l.passed);
            let text: String = lines
                .iter()
                .map(|l| format!("{} {}: {}\n", if l.passed { "PASS" } else { "FAIL" }, l.name, l.detail))
                .collect();
            Ok(Output::Text(text, ok))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::NoPerpendicular(_) => 2,
        Error::Capacity(_) | Error::Stabilization(_) => 3,
        Error::Internal(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let out = cli.out.clone();
    let format = match cli.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    let (bytes, ok) = match run(cli) {
        Ok(Output::Report(r)) => (emit(&r, format), true),
        Ok(Output::Text(t, ok)) => (t.into_bytes(), ok),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let written = match out {
        Some(p) => std::fs::write(&p, &bytes),
        None => std::io::stdout().write_all(&bytes),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

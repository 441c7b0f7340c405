use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use subkernel::envelopes::{Setting, TheoremId};
use subkernel::geometry::{check_boundary_axioms, sample_axiom_tuples, BoundaryFnSpec, Domain, GeometrySpec};
use subkernel::harness::acceptance::factorization_grid;
use subkernel::harness::{
    boundary_layers, fixtures_dir, run_report, run_sweep, sweep, Evaluation, GridPoint, GridSpec, LogRange, PointSpec,
    RatioReport, RunConfig, SweepConfig, TimeScale,
};
use subkernel::kernels::HeatKernelModel;
use subkernel::numeric::{jump_quadrature, McConfig};
use subkernel::quad::QuadratureConfig;
use subkernel::subordinator::SubordinatorSpec;
use subkernel::{Error, Result};

#[derive(Parser)]
#[command(name = "subkernel", version, about = "Two-sided estimates for subordinate killed processes, checked against numerical oracles")]
struct Cli {
    /// Print the accepted theorem ids and exit.
    #[arg(long, global = true)]
    list_theorems: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Tail probabilities of the subordinator against their bounds.
    Tails(Common),
    /// Heat kernel envelope against the subordination integral.
    Hk {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "thm4.3")]
        theorem: String,
    },
    /// Jump kernel envelope against the Lévy-measure integral.
    Jump(Common),
    /// Green function envelope against the time integral.
    Green {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "thm5.6")]
        theorem: String,
    },
    /// Closed form of the boundary factorization against quadrature.
    BpqOracle(Common),
    /// Check the boundary function axioms on random tuples.
    Axioms {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        tuples: usize,
    },
    /// Run the acceptance criteria and sweeps of a config file.
    Report {
        #[command(flatten)]
        common: Common,
        /// Record observed values of frozen checks into the fixtures.
        #[arg(long)]
        freeze: bool,
        /// Fixtures directory (default: the crate's fixtures).
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Full,
    Halfline,
    Interval,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Free,
    Halfline,
    Interval,
    /// The synthetic product envelope for the chosen geometry.
    Synthetic,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    #[arg(long, default_value_t = 0)]
    c0: u8,
    #[arg(long, value_enum, default_value = "halfline")]
    domain: DomainArg,
    /// Interval length.
    #[arg(long = "L", default_value_t = 1.0)]
    length: f64,
    /// Kernel of the underlying process; the default matches `--domain`.
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    /// Times as `lo:hi:n`, log-spaced.
    #[arg(long, default_value = "1e-3:1:7")]
    t_range: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file or, for `report`, directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

impl Common {
    fn domain(&self) -> Domain {
        match self.domain {
            DomainArg::Full => Domain::FullLine,
            DomainArg::Halfline => Domain::HalfLine,
            DomainArg::Interval => Domain::Interval { length: self.length },
        }
    }

    fn geometry(&self) -> Result<GeometrySpec> {
        GeometrySpec::line(self.domain(), self.alpha, self.c0)
    }

    fn kernel(&self) -> Result<HeatKernelModel> {
        let k = self.kernel.unwrap_or(match self.domain {
            DomainArg::Full => KernelArg::Free,
            DomainArg::Halfline => KernelArg::Halfline,
            DomainArg::Interval => KernelArg::Interval,
        });
        match k {
            KernelArg::Free => Ok(HeatKernelModel::FreeBm),
            KernelArg::Halfline => Ok(HeatKernelModel::HalflineBm),
            KernelArg::Interval => HeatKernelModel::interval_bm(self.length),
            KernelArg::Synthetic => {
                HeatKernelModel::synthetic(self.geometry()?, BoundaryFnSpec::new(self.p, self.q)?, 0.25)
            }
        }
    }

    fn sub(&self) -> Result<SubordinatorSpec> {
        SubordinatorSpec::stable(self.beta)
    }

    fn times(&self) -> Result<LogRange> {
        LogRange::parse(&self.t_range)
    }

    fn setting(&self) -> Result<Setting> {
        Setting::new(self.geometry()?, BoundaryFnSpec::new(self.p, self.q)?, self.sub()?)
    }

    fn run_config(&self) -> Result<RunConfig> {
        match &self.config {
            Some(p) => RunConfig::load(p),
            None => Ok(RunConfig {
                seed: self.seed,
                ..RunConfig::default()
            }),
        }
    }

    fn point_grid(&self, kernel: &HeatKernelModel, n: usize) -> Result<GridSpec> {
        let pts = boundary_layers(&kernel.geometry(), n, 1e-3);
        Ok(GridSpec {
            t_range: self.times()?,
            time_scale: TimeScale::Absolute,
            points: PointSpec::Points {
                x: pts.clone(),
                y: pts,
            },
            regimes: None,
        })
    }

    /// A sweep over boundary layers with the kernel's own geometry.
    fn sweep_config(&self, theorem: TheoremId, n: usize) -> Result<SweepConfig> {
        let kernel = self.kernel()?;
        Ok(SweepConfig {
            name: theorem.as_str().replace('.', "_"),
            theorem,
            kernel: Some(kernel),
            geometry: None,
            subordinator: self.sub()?,
            grid: self.point_grid(&kernel, n)?,
            gauss_c: subkernel::envelopes::GAUSS_C_UPPER,
            max_spread: None,
        })
    }
}

fn emit<T: Serialize>(common: &Common, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match &common.out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_report(common: &Common, rep: &RatioReport) -> Result<()> {
    if common.format == Format::Csv {
        let path = common.out.clone().unwrap_or_else(|| PathBuf::from("/dev/stdout"));
        return rep.write_csv(&path);
    }
    emit(common, rep)
}

#[derive(Serialize)]
struct TailRow {
    t: f64,
    s: f64,
    cdf: f64,
    survival: f64,
    left_upper: f64,
    right_estimate: Option<f64>,
}

fn tails(c: &Common) -> Result<()> {
    let sub = c.sub()?;
    let mut rows = Vec::new();
    for t in c.times()?.values() {
        let tau = sub.time_scale(t)?;
        for s in LogRange::new(1e-3 * tau, 1e3 * tau, 25)?.values() {
            rows.push(TailRow {
                t,
                s,
                cdf: sub.cdf(t, s)?,
                survival: sub.survival(t, s)?,
                left_upper: std::f64::consts::E * (-sub.t_h_sigma(t, s)?).exp(),
                right_estimate: sub.right_tail_estimate(t, s).ok(),
            });
        }
    }
    if c.format == Format::Csv {
        let mut w = match &c.out {
            Some(p) => csv::Writer::from_path(p)?,
            None => csv::Writer::from_path("/dev/stdout")?,
        };
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
        return Ok(());
    }
    emit(c, &rows)
}

fn jump(c: &Common) -> Result<()> {
    let kernel = c.kernel()?;
    let geom = kernel.geometry();
    let s = Setting::new(geom, kernel.boundary(), c.sub()?)?;
    let pts = boundary_layers(&geom, 10, 1e-3);
    let mut grid = Vec::new();
    for (i, &x) in pts.iter().enumerate() {
        for &y in &pts[i + 1..] {
            grid.push(GridPoint::at(&geom, 0.0, x, y)?);
        }
    }
    let quad = QuadratureConfig::default();
    let rep = sweep("jump", &grid, |gp| {
        let env = s.jump_envelope(&gp.pd)?;
        let j = jump_quadrature(&kernel, &s.sub, gp.x, gp.y, &quad)?;
        Ok(Evaluation::new(j.value, env.value, env.regime.label()))
    })?;
    emit_report(c, &rep)
}

fn bpq_oracle(c: &Common) -> Result<()> {
    let s = c.setting()?;
    let grid = factorization_grid().build(&s.geom, &s.sub)?;
    let rep = sweep(TheoremId::Factorization.as_str(), &grid, |gp| {
        let env = s.a_pq_closed(gp.t, &gp.pd)?;
        Ok(Evaluation::new(s.a_pq_quadrature(gp.t, &gp.pd)?, env.value, env.regime.label()))
    })?;
    emit_report(c, &rep)
}

fn axioms(c: &Common, n: usize) -> Result<()> {
    let geom = c.geometry()?;
    let tuples = sample_axiom_tuples(&geom, n, c.seed);
    let rep = check_boundary_axioms(&BoundaryFnSpec::new(c.p, c.q)?, &geom, c.beta, &tuples)?;
    emit(c, &rep)
}

fn sweep_cmd(c: &Common, theorem: &str, n: usize) -> Result<()> {
    let id = TheoremId::parse(theorem)?;
    let cfg = c.run_config()?;
    let sc = c.sweep_config(id, n)?;
    let mc = McConfig {
        seed: c.seed,
        ..cfg.monte_carlo
    };
    let rep = run_sweep(&sc, &cfg.quadrature, &mc)?;
    emit_report(c, &rep)
}

fn report(c: &Common, freeze: bool, fixtures: Option<PathBuf>) -> Result<bool> {
    let cfg = c.run_config()?;
    let dir = fixtures.unwrap_or_else(fixtures_dir);
    let rep = run_report(&cfg, &dir, freeze)?;
    for o in &rep.criteria {
        let status = match (o.passed, rep.known_failures.reason(o.id)) {
            (true, _) => "PASS",
            (false, Some(_)) => "FAIL (known)",
            (false, None) => "FAIL",
        };
        eprintln!("criterion {:>2} {status:<12} {:>8.2}s  {}", o.id, o.runtime.as_secs_f64(), o.title);
        for ch in o.failed_checks() {
            eprintln!("    {}: {:e} vs {:e}", ch.name, ch.observed, ch.limit);
        }
    }
    if let Some(out) = c.out.as_ref().or(cfg.out_dir.as_ref()) {
        rep.write(out)?;
    }
    if let Some(f) = &rep.refrozen {
        f.save(&dir)?;
        eprintln!("froze {} values into {}", f.values.len(), dir.display());
    }
    Ok(rep.passed())
}

fn run(cli: Cli) -> Result<bool> {
    if cli.list_theorems {
        for id in TheoremId::ALL {
            println!("{id}");
        }
        return Ok(true);
    }
    let Some(cmd) = cli.command else {
        return Err(Error::Config("no subcommand given; see --help".into()));
    };
    match cmd {
        Command::Tails(c) => tails(&c)?,
        Command::Hk { common, theorem } => sweep_cmd(&common, &theorem, 8)?,
        Command::Jump(c) => jump(&c)?,
        Command::Green { common, theorem } => sweep_cmd(&common, &theorem, 4)?,
        Command::BpqOracle(c) => bpq_oracle(&c)?,
        Command::Axioms { common, tuples } => axioms(&common, tuples)?,
        Command::Report {
            common,
            freeze,
            fixtures,
        } => return report(&common, freeze, fixtures),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

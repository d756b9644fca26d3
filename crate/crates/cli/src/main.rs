use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crowdgame_core::checks::{run_checks, CHECKS};
use crowdgame_core::ess::{
    scan_all_ess, single_shot_ess_with, EssRecord, Mode, ScanConfig, SingleShotGame,
};
use crowdgame_core::game::{parse_rational, rational_to_f64, ChainState, Params, StagePayoffs};
use crowdgame_core::markov::{dot, stationary_exact, FloatKernel, PairPayoffs, PayoffCache};
use crowdgame_core::replicator::{basin_point, BasinPoint, IntegratorConfig, GRID_DIVISIONS};
use crowdgame_core::strategy::{ReactiveStrategy, StrategyIndex};

mod sweep;
use sweep::{grid, point_key, Axis, Sink};

#[derive(Parser)]
#[command(
    name = "crowdgame",
    version,
    about = "Evolutionary analysis of the iterated crowdsourcing dilemma"
)]
struct Cli {
    /// Worker threads for parallel work.
    #[arg(long, global = true, env = "CROWDGAME_WORKERS")]
    workers: Option<usize>,
    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format. Single queries print plain text when omitted.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
    #[value(alias = "screen+confirm")]
    Screen,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
            ModeArg::Screen => Mode::Screen,
        }
    }
}

#[derive(Args, Clone)]
struct Point {
    /// Damage d, as p/q, an integer or a decimal.
    #[arg(long)]
    d: String,
    /// Attack cost q.
    #[arg(long)]
    q: String,
}

impl Point {
    fn params(&self) -> Result<Params> {
        Ok(Params::parse(&self.d, &self.q)?)
    }
}

#[derive(Args, Clone)]
struct Grid {
    /// d axis as start:stop:count.
    #[arg(long, default_value = "1/20:19/20:19")]
    d_grid: Axis,
    /// q axis as start:stop:count.
    #[arg(long, default_value = "1/20:19/20:19")]
    q_grid: Axis,
    /// Offset added to every coordinate to stay off region boundaries.
    #[arg(long, default_value = "1/1000")]
    shift: String,
    /// Ignore any partial output and start over.
    #[arg(long)]
    fresh: bool,
}

impl Grid {
    fn points(&self) -> Result<Vec<Params>> {
        Ok(grid(
            &self.d_grid,
            &self.q_grid,
            &parse_rational(&self.shift)?,
        ))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Long-run payoff of strategy n against strategy m.
    Payoff {
        /// Strategy index (0..4095) or six actions such as CA,CA,CA,CA,CA,SA.
        #[arg(long)]
        n: String,
        #[arg(long)]
        m: String,
        #[command(flatten)]
        point: Point,
        /// Error rate. Required in float mode; optional evaluation point in exact mode.
        #[arg(long)]
        eps: Option<String>,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        /// Highest power of eps in the printed series.
        #[arg(long, default_value_t = 3)]
        series: usize,
    },
    /// Stationary distribution of the chain for the pair (n, m).
    Stationary {
        #[arg(long)]
        n: String,
        #[arg(long)]
        m: String,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
    },
    /// Series in eps of the payoff of n against m (m defaults to n).
    Series {
        #[arg(long)]
        n: String,
        #[arg(long)]
        m: Option<String>,
        #[command(flatten)]
        point: Point,
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
    /// All ESSs among the 4096 strategies at one point.
    EssScan {
        #[command(flatten)]
        point: Point,
        #[arg(long, value_enum, default_value = "screen")]
        mode: ModeArg,
    },
    /// ESS scan over a grid of points, resumable when written to --out.
    PhaseDiagram {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_enum, default_value = "screen")]
        mode: ModeArg,
    },
    /// ESSs of the one-round game, at one point or over a grid.
    SingleShot {
        #[arg(long, requires = "q")]
        d: Option<String>,
        #[arg(long, requires = "d")]
        q: Option<String>,
        #[command(flatten)]
        grid: Grid,
    },
    /// Basin shares of uncond-CA, 12 and 14 at points of region (A).
    Basins {
        #[arg(long, requires = "q")]
        d: Option<String>,
        #[arg(long, requires = "d")]
        q: Option<String>,
        #[command(flatten)]
        grid: Grid,
        /// Error rates used for the payoff matrix.
        #[arg(long, num_args = 1.., default_value = "0.001")]
        eps: Vec<f64>,
        /// Grid resolution for three-strategy basins.
        #[arg(long, default_value_t = GRID_DIVISIONS)]
        divisions: u32,
    },
    /// Run the verification suite.
    Verify {
        /// Run only these checks (repeat or separate with commas).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// List the checks and exit.
        #[arg(long)]
        list: bool,
    },
}

fn strategy(s: &str) -> Result<StrategyIndex> {
    let r: ReactiveStrategy = s.parse().with_context(|| format!("bad strategy {s:?}"))?;
    Ok(r.index())
}

fn describe(i: StrategyIndex) -> String {
    format!("{i} ({})", i.strategy())
}

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

/// Where single-query output goes.
struct Output {
    dest: Box<dyn Write>,
}

impl Output {
    fn new(out: &Option<PathBuf>) -> Result<Self> {
        let dest: Box<dyn Write> = match out {
            Some(p) => Box::new(
                std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
            ),
            None => Box::new(std::io::stdout().lock()),
        };
        Ok(Output { dest })
    }

    fn json<T: Serialize>(&mut self, v: &T) -> Result<()> {
        serde_json::to_writer_pretty(&mut self.dest, v)?;
        writeln!(self.dest)?;
        Ok(())
    }

    fn csv<T: Serialize>(&mut self, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(&mut self.dest);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn text(&mut self, s: &str) -> Result<()> {
        self.dest.write_all(s.as_bytes())?;
        Ok(())
    }
}

#[derive(Serialize)]
struct PayoffRow {
    n: StrategyIndex,
    m: StrategyIndex,
    d: String,
    q: String,
    mode: &'static str,
    epsilon: Option<String>,
    value: String,
    series: String,
}

fn cmd_payoff(
    cli: &Cli,
    n: &str,
    m: &str,
    point: &Point,
    eps: &Option<String>,
    mode: ModeArg,
    order: usize,
) -> Result<()> {
    let (n, m, p) = (strategy(n)?, strategy(m)?, point.params()?);
    let exact = PairPayoffs::compute(n, m)?.first.at(&p);
    let series = exact.taylor(order)?;
    let (value, eps_text) = match mode {
        ModeArg::Exact => match eps {
            None => (exact.to_string(), None),
            Some(e) => {
                let e = parse_rational(e)?;
                let v = exact.eval(&e).context("payoff undefined at this eps")?;
                (v.to_string(), Some(e.to_string()))
            }
        },
        ModeArg::Float | ModeArg::Screen => {
            let e: f64 = eps.as_deref().unwrap_or("0.001").parse().context("--eps")?;
            let v = if e == 0.0 {
                rational_to_f64(&exact.limit_at_zero()?)
            } else {
                let pay = StagePayoffs::new(&p).float;
                dot(
                    &FloatKernel::new(e).stationary(&n.strategy(), &m.strategy())?,
                    &pay,
                )
            };
            (format!("{v}"), Some(e.to_string()))
        }
    };
    let row = PayoffRow {
        n,
        m,
        d: p.d().to_string(),
        q: p.q().to_string(),
        mode: if mode == ModeArg::Exact {
            "exact"
        } else {
            "float"
        },
        epsilon: eps_text.clone(),
        value: value.clone(),
        series: format!("[{}]", join(&series, ", ")),
    };
    let mut o = Output::new(&cli.out)?;
    match cli.format {
        Some(Format::Json) => o.json(&row),
        Some(Format::Csv) => o.csv(&[row]),
        None => o.text(&format!(
            "n: {}\nm: {}\nd: {}\nq: {}\n{}payoff: {value}\nseries: {}\n",
            describe(n),
            describe(m),
            row.d,
            row.q,
            eps_text.map(|e| format!("eps: {e}\n")).unwrap_or_default(),
            row.series
        )),
    }
}

#[derive(Serialize)]
struct StationaryRow {
    state: String,
    limit: String,
    value: String,
}

fn cmd_stationary(cli: &Cli, n: &str, m: &str, eps: Option<f64>, mode: ModeArg) -> Result<()> {
    let (n, m) = (strategy(n)?, strategy(m)?);
    let exact = stationary_exact(n, m)?;
    let limits = exact.limit();
    let values: Vec<String> = match mode {
        ModeArg::Exact => exact.distribution().iter().map(|f| f.to_string()).collect(),
        _ => {
            let e = eps.unwrap_or(1e-3);
            let x = if e == 0.0 {
                limits.clone().map(|r| rational_to_f64(&r))
            } else {
                FloatKernel::new(e).stationary(&n.strategy(), &m.strategy())?
            };
            x.iter().map(|v| format!("{v}")).collect()
        }
    };
    let rows: Vec<StationaryRow> = ChainState::ALL
        .iter()
        .map(|s| StationaryRow {
            state: s.to_string(),
            limit: limits[s.index()].to_string(),
            value: values[s.index()].clone(),
        })
        .collect();
    let mut o = Output::new(&cli.out)?;
    match cli.format {
        Some(Format::Json) => o.json(&rows),
        Some(Format::Csv) => o.csv(&rows),
        None => {
            let mut s = format!("n: {}\nm: {}\n", describe(n), describe(m));
            for r in &rows {
                s.push_str(&format!(
                    "{:<8} limit {:<6} {}\n",
                    r.state, r.limit, r.value
                ));
            }
            o.text(&s)
        }
    }
}

#[derive(Serialize)]
struct SeriesRow {
    n: StrategyIndex,
    m: StrategyIndex,
    d: String,
    q: String,
    power: usize,
    coefficient: String,
}

fn cmd_series(cli: &Cli, n: &str, m: Option<&str>, point: &Point, order: usize) -> Result<()> {
    let n = strategy(n)?;
    let m = m.map(strategy).transpose()?.unwrap_or(n);
    let p = point.params()?;
    let coeffs = PairPayoffs::compute(n, m)?.first.at(&p).taylor(order)?;
    let rows: Vec<SeriesRow> = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| SeriesRow {
            n,
            m,
            d: p.d().to_string(),
            q: p.q().to_string(),
            power: k,
            coefficient: c.to_string(),
        })
        .collect();
    let mut o = Output::new(&cli.out)?;
    match cli.format {
        Some(Format::Json) => o.json(&rows),
        Some(Format::Csv) => o.csv(&rows),
        None => o.text(&format!("[{}]\n", join(&coeffs, ", "))),
    }
}

const PHASE_HEADER: &str = "d,q,ess,efficient,regions";

fn phase_csv(r: &EssRecord) -> String {
    format!(
        "{},{},{},{},{}",
        r.d,
        r.q,
        join(&r.ess, ";"),
        join(&r.efficient, ";"),
        r.regions.join(";")
    )
}

fn cmd_ess_scan(cli: &Cli, point: &Point, mode: ModeArg) -> Result<()> {
    let p = point.params()?;
    let cache = PayoffCache::new();
    let record = scan_all_ess(&p, &cache, ScanConfig::with_mode(mode.into()))?.to_record();
    let mut o = Output::new(&cli.out)?;
    match cli.format {
        Some(Format::Json) => o.json(&record),
        Some(Format::Csv) => o.text(&format!("{PHASE_HEADER}\n{}\n", phase_csv(&record))),
        None => {
            let mut s = format!(
                "d: {}\nq: {}\nregions: {}\nESS:\n",
                record.d,
                record.q,
                record.regions.join(" ")
            );
            for sr in &record.series {
                s.push_str(&format!(
                    "  {}  pi_nn = [{}]{}\n",
                    describe(sr.strategy),
                    sr.coefficients.join(", "),
                    if record.efficient.contains(&sr.strategy) {
                        "  efficient"
                    } else {
                        ""
                    }
                ));
            }
            if !record.degenerate.is_empty() {
                s.push_str(&format!("pointwise-only ties: {:?}\n", record.degenerate));
            }
            o.text(&s)
        }
    }
}

fn sweep_sink(cli: &Cli, header: Option<&str>, keys: &[String], fresh: bool) -> Result<Sink> {
    match &cli.out {
        Some(path) => Sink::file(path, header, keys, fresh),
        None => Sink::stdout(header),
    }
}

fn cmd_phase_diagram(cli: &Cli, g: &Grid, mode: ModeArg) -> Result<()> {
    let points = g.points()?;
    let keys: Vec<String> = points.iter().map(point_key).collect();
    let json = cli.format == Some(Format::Json);
    let sink = sweep_sink(cli, (!json).then_some(PHASE_HEADER), &keys, g.fresh)?;
    let cache = PayoffCache::new();
    let mode: Mode = mode.into();
    sweep::run(&points, &keys, sink, |p| {
        let r = scan_all_ess(p, &cache, ScanConfig::with_mode(mode))?.to_record();
        Ok(vec![if json {
            serde_json::to_string(&r)?
        } else {
            phase_csv(&r)
        }])
    })
}

#[derive(Serialize)]
struct SingleShotRow {
    d: String,
    q: String,
    ess: String,
}

fn cmd_single_shot(cli: &Cli, d: &Option<String>, q: &Option<String>, g: &Grid) -> Result<()> {
    let game = SingleShotGame::new();
    let row = |p: &Params| -> Result<SingleShotRow> {
        let ess = single_shot_ess_with(&game, p)?;
        Ok(SingleShotRow {
            d: p.d().to_string(),
            q: p.q().to_string(),
            ess: join(&ess, ";"),
        })
    };
    let json = cli.format == Some(Format::Json);
    if let (Some(d), Some(q)) = (d, q) {
        let r = row(&Params::parse(d, q)?)?;
        let mut o = Output::new(&cli.out)?;
        return match cli.format {
            Some(Format::Json) => o.json(&r),
            Some(Format::Csv) => o.csv(&[r]),
            None => o.text(&format!("{}\n", r.ess)),
        };
    }
    let points = g.points()?;
    let keys: Vec<String> = points.iter().map(point_key).collect();
    let sink = sweep_sink(cli, (!json).then_some("d,q,ess"), &keys, g.fresh)?;
    sweep::run(&points, &keys, sink, |p| {
        let r = row(p)?;
        Ok(vec![if json {
            serde_json::to_string(&r)?
        } else {
            format!("{},{},{}", r.d, r.q, r.ess)
        }])
    })
}

const BASIN_HEADER: &str = "d,q,epsilon,strategy_index,share,unresolved_fraction";

fn basin_lines(b: &BasinPoint, json: bool) -> Result<Vec<String>> {
    if json {
        return Ok(vec![serde_json::to_string(b)?]);
    }
    Ok(b.strategies
        .iter()
        .zip(&b.shares)
        .map(|(s, share)| {
            format!(
                "{},{},{},{s},{share},{}",
                b.d, b.q, b.epsilon, b.unresolved_fraction
            )
        })
        .collect())
}

fn cmd_basins(
    cli: &Cli,
    d: &Option<String>,
    q: &Option<String>,
    g: &Grid,
    eps: &[f64],
    divisions: u32,
) -> Result<()> {
    let cfg = IntegratorConfig::default();
    let json = cli.format == Some(Format::Json);
    let single = matches!((d, q), (Some(_), Some(_)));
    let points: Vec<Params> = match (d, q) {
        (Some(d), Some(q)) => vec![Params::parse(d, q)?],
        _ => {
            let all = g.points()?;
            let inside: Vec<Params> = all
                .into_iter()
                .filter(|p| crowdgame_core::replicator::region_a_strategies(p).is_ok())
                .collect();
            if inside.is_empty() {
                bail!("no grid point lies inside region (A)");
            }
            inside
        }
    };
    if single {
        crowdgame_core::replicator::region_a_strategies(&points[0])?;
    }
    let jobs: Vec<(Params, f64)> = points
        .iter()
        .flat_map(|p| eps.iter().map(move |&e| (p.clone(), e)))
        .collect();
    let keys: Vec<String> = jobs
        .iter()
        .map(|(p, e)| format!("{},{e}", point_key(p)))
        .collect();
    let sink = sweep_sink(cli, (!json).then_some(BASIN_HEADER), &keys, g.fresh)?;
    sweep::run(&jobs, &keys, sink, |(p, e)| {
        basin_lines(&basin_point(p, *e, divisions, &cfg)?, json)
    })
}

fn cmd_verify(cli: &Cli, only: &[String], list: bool) -> Result<bool> {
    let mut o = Output::new(&cli.out)?;
    if list {
        let mut s = String::new();
        for c in &CHECKS {
            s.push_str(&format!(
                "{:<14} criterion {:>2}  {} ({})\n",
                c.id, c.criterion, c.title, c.anchor
            ));
        }
        o.text(&s)?;
        return Ok(true);
    }
    let mut all_passed = true;
    for id in only {
        if crowdgame_core::checks::info(id).is_none() {
            bail!("unknown check {id:?}; use --list to see the ids");
        }
    }
    let outcomes = run_checks(only)?;
    for r in &outcomes {
        all_passed &= r.passed;
    }
    match cli.format {
        Some(Format::Json) => o.json(&outcomes)?,
        _ => {
            let mut s = String::new();
            for r in &outcomes {
                s.push_str(&r.line());
                s.push('\n');
            }
            s.push_str(&format!(
                "{} of {} checks passed\n",
                outcomes.iter().filter(|r| r.passed).count(),
                outcomes.len()
            ));
            o.text(&s)?;
        }
    }
    Ok(all_passed)
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(w) = cli.workers {
        if w == 0 {
            bail!("--workers must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match &cli.command {
        Command::Payoff {
            n,
            m,
            point,
            eps,
            mode,
            series,
        } => cmd_payoff(cli, n, m, point, eps, *mode, *series)?,
        Command::Stationary { n, m, eps, mode } => cmd_stationary(cli, n, m, *eps, *mode)?,
        Command::Series { n, m, point, order } => cmd_series(cli, n, m.as_deref(), point, *order)?,
        Command::EssScan { point, mode } => cmd_ess_scan(cli, point, *mode)?,
        Command::PhaseDiagram { grid, mode } => cmd_phase_diagram(cli, grid, *mode)?,
        Command::SingleShot { d, q, grid } => cmd_single_shot(cli, d, q, grid)?,
        Command::Basins {
            d,
            q,
            grid,
            eps,
            divisions,
        } => cmd_basins(cli, d, q, grid, eps, *divisions)?,
        Command::Verify { only, list } => return cmd_verify(cli, only, *list),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

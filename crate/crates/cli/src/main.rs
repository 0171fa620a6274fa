//! `swdft`: command-line front end for the sliding window DFT toolkit.
//!
//! Machine-readable output goes to standard output (or `-o FILE`); the resolved
//! configuration and progress notes go to standard error.
//!
//! Exit codes: 0 success, 2 usage or invalid input, 3 numerical failure.

use std::f64::consts::TAU;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use swdft_core::analytic::{compare_closed_form, dirichlet, ClosedFormCase};
use swdft_core::estimation::{estimate_local_signal, EstimateOptions, KSelection, Regression, SearchMode};
use swdft_core::io::{
    comparison_csv, estimate_csv, fmt_f64, grid_csv, parse_composite_spec, parse_signal_csv, signal_csv, xy_csv,
    GridColumns, PhaseUnit, FORMAT_LINE,
};
use swdft_core::montecarlo::{render_tables, run_study, StudyConfig};
use swdft_core::signals::{synth_composite, synth_step, CompositeSpec, LocalSignalSpec, StepSpec};
use swdft_core::transform::{
    frequency_series, swdft_direct, swdft_sliding, view, view_scalar, CoefView, RealSignal, SwdftGrid,
};
use swdft_core::SwdftError;

#[derive(Debug, Parser)]
#[command(name = "swdft", version, about = "Sliding window discrete Fourier transform toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a signal (local periodic components plus noise, or a unit step).
    Synth(SynthArgs),
    /// Transform a signal and write the long-format coefficient grid.
    Compute(ComputeArgs),
    /// Write one coefficient view as a wide k-by-p matrix, or one frequency's time series.
    Views(ViewsArgs),
    /// Sample the Dirichlet kernel on [-2 pi, 2 pi].
    Dirichlet(DirichletArgs),
    /// Compare a closed-form prediction with the direct transform.
    Closedform(ClosedformArgs),
    /// Estimate the parameters of one local periodic signal.
    Estimate(EstimateArgs),
    /// Run the seeded parameter-recovery study.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct OutputArg {
    /// Output path, "-" for standard output.
    #[arg(short, long, default_value = "-")]
    output: String,
}

#[derive(Debug, Args)]
struct InputArg {
    /// Signal CSV path, "-" for standard input.
    #[arg(short, long, default_value = "-")]
    input: String,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Composite spec file (N=, sigma=, seed= lines then an S,L,A,F,phi table).
    #[arg(long, conflicts_with_all = ["start", "length", "amplitude", "frequency", "phase", "step"])]
    spec: Option<PathBuf>,
    /// Signal length N.
    #[arg(long = "len", short = 'N')]
    len: Option<usize>,
    #[arg(long, short = 'S')]
    start: Option<usize>,
    #[arg(long, short = 'L')]
    length: Option<usize>,
    #[arg(long, short = 'A')]
    amplitude: Option<f64>,
    /// Cycles per length-N signal.
    #[arg(long, short = 'F')]
    frequency: Option<f64>,
    /// Radians.
    #[arg(long)]
    phase: Option<f64>,
    /// Emit the unit step that switches on at this index instead.
    #[arg(long, conflicts_with_all = ["start", "length", "amplitude", "frequency", "phase"])]
    step: Option<usize>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Engine {
    Direct,
    Sliding,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ViewArg {
    All,
    Complex,
    Real,
    Imag,
    Mod2,
    Phase,
}

impl ViewArg {
    fn columns(self) -> GridColumns {
        match self {
            ViewArg::All => GridColumns::All,
            ViewArg::Complex => GridColumns::View(CoefView::Complex),
            ViewArg::Real => GridColumns::View(CoefView::RealPart),
            ViewArg::Imag => GridColumns::View(CoefView::ImagPart),
            ViewArg::Mod2 => GridColumns::View(CoefView::SquaredModulus),
            ViewArg::Phase => GridColumns::View(CoefView::Phase),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScalarView {
    Real,
    Imag,
    Mod2,
    Phase,
}

impl From<ScalarView> for CoefView {
    fn from(v: ScalarView) -> Self {
        match v {
            ScalarView::Real => CoefView::RealPart,
            ScalarView::Imag => CoefView::ImagPart,
            ScalarView::Mod2 => CoefView::SquaredModulus,
            ScalarView::Phase => CoefView::Phase,
        }
    }
}

#[derive(Debug, Args)]
struct ComputeArgs {
    #[command(flatten)]
    input: InputArg,
    /// Window size.
    #[arg(short, long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = Engine::Sliding)]
    engine: Engine,
    #[arg(long, value_enum, default_value_t = ViewArg::All)]
    view: ViewArg,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args)]
struct ViewsArgs {
    #[command(flatten)]
    input: InputArg,
    #[arg(short, long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = ScalarView::Mod2)]
    view: ScalarView,
    /// Only this frequency, as a `p,value` series.
    #[arg(short, long)]
    k: Option<usize>,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args)]
struct DirichletArgs {
    #[arg(short, long)]
    n: usize,
    /// Number of evenly spaced points; odd counts include x = 0.
    #[arg(long, default_value_t = 257)]
    grid: usize,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CaseKind {
    Local,
    Global,
    Step,
}

#[derive(Debug, Args)]
struct ClosedformArgs {
    #[arg(long, value_enum)]
    case: CaseKind,
    #[arg(long = "len", short = 'N')]
    len: usize,
    #[arg(short, long)]
    n: usize,
    #[arg(long, short = 'S', required_if_eq("case", "local"))]
    start: Option<usize>,
    #[arg(long, short = 'L', required_if_eq("case", "local"))]
    length: Option<usize>,
    #[arg(long, short = 'A', default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long, short = 'F', required_if_eq_any([("case", "local"), ("case", "global")]))]
    frequency: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    phase: f64,
    /// Step location.
    #[arg(long, short = 'd', required_if_eq("case", "step"))]
    d: Option<usize>,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KSelArg {
    Option1,
    Option2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SearchArg {
    Exhaustive,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PhaseArg {
    Radians,
    Cycles,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArg,
    #[arg(short, long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = KSelArg::Option1)]
    k_selection: KSelArg,
    /// Smallest support length searched.
    #[arg(long = "lmin", default_value_t = 8)]
    lmin: usize,
    #[arg(long, value_enum, default_value_t = SearchArg::Exhaustive)]
    search: SearchArg,
    /// Number of (S, L) cells drawn in random search.
    #[arg(long, default_value_t = 2000)]
    budget: usize,
    /// Seed for random search.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Regress real and imaginary parts jointly.
    #[arg(long)]
    stacked: bool,
    #[arg(long, value_enum, default_value_t = PhaseArg::Radians)]
    phase_units: PhaseArg,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32])]
    n_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0, 1.5, 2.0])]
    sigma_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [8.0, 11.0])]
    f_list: Vec<f64>,
    #[arg(long, default_value_t = 25)]
    reps: usize,
    #[arg(long, default_value_t = StudyConfig::default().master_seed)]
    seed: u64,
    #[arg(long, default_value = "swdft-simulation")]
    out_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

fn read_input(path: &str) -> anyhow::Result<String> {
    let mut s = String::new();
    if path == "-" {
        io::stdin().read_to_string(&mut s).context("reading standard input")?;
    } else {
        s = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    }
    Ok(s)
}

fn write_output(path: &str, text: &str) -> anyhow::Result<()> {
    if path == "-" {
        let mut out = io::stdout().lock();
        out.write_all(text.as_bytes())?;
        out.flush()?;
    } else {
        fs::write(path, text).with_context(|| format!("writing {path}"))?;
    }
    Ok(())
}

fn read_signal(path: &str) -> anyhow::Result<RealSignal> {
    Ok(parse_signal_csv(&read_input(path)?)?)
}

fn transform(x: &RealSignal, n: usize, engine: Engine) -> anyhow::Result<SwdftGrid> {
    Ok(match engine {
        Engine::Direct => swdft_direct(x, n)?,
        Engine::Sliding => swdft_sliding(x, n)?,
    })
}

fn cmd_synth(a: &SynthArgs) -> anyhow::Result<()> {
    let signal = if let Some(path) = &a.spec {
        let mut spec = parse_composite_spec(&read_input(&path.to_string_lossy())?)?;
        if let Some(len) = a.len {
            spec.len = len;
        }
        if let Some(s) = a.noise_sigma {
            spec.sigma = s;
        }
        if let Some(s) = a.seed {
            spec.seed = s;
        }
        spec.validate()?;
        synth_composite(&spec)?
    } else {
        let Some(len) = a.len else {
            bail!(SwdftError::InvalidSpec("--len is required without --spec".into()))
        };
        if let Some(d) = a.step {
            let step = synth_step(&StepSpec { len, d })?;
            if a.noise_sigma.is_some_and(|s| s > 0.0) {
                let noise = synth_composite(&CompositeSpec {
                    components: vec![],
                    len,
                    sigma: a.noise_sigma.unwrap_or(0.0),
                    seed: a.seed.unwrap_or(0),
                })?;
                let samples = step.samples().iter().zip(noise.samples()).map(|(s, e)| s + e).collect();
                RealSignal::new(samples)?
            } else {
                step
            }
        } else {
            let components = match (a.amplitude, a.frequency) {
                (None, None) if a.start.is_none() && a.length.is_none() => vec![],
                _ => vec![LocalSignalSpec::new(
                    a.start.unwrap_or(0),
                    a.length.unwrap_or(len.saturating_sub(a.start.unwrap_or(0))),
                    a.amplitude.unwrap_or(1.0),
                    a.frequency.unwrap_or(0.0),
                    a.phase.unwrap_or(0.0),
                )?],
            };
            synth_composite(&CompositeSpec {
                components,
                len,
                sigma: a.noise_sigma.unwrap_or(0.0),
                seed: a.seed.unwrap_or(0),
            })?
        }
    };
    write_output(&a.out.output, &signal_csv(&signal))
}

fn cmd_compute(a: &ComputeArgs) -> anyhow::Result<()> {
    let x = read_signal(&a.input.input)?;
    let g = transform(&x, a.n, a.engine)?;
    write_output(&a.out.output, &grid_csv(&g, a.view.columns()))
}

fn cmd_views(a: &ViewsArgs) -> anyhow::Result<()> {
    let x = read_signal(&a.input.input)?;
    let g = swdft_sliding(&x, a.n)?;
    let kind: CoefView = a.view.into();
    let mut s = format!("{FORMAT_LINE}\n");
    if let Some(k) = a.k {
        s.push_str("p,value\n");
        for (i, c) in frequency_series(&g, k)?.into_iter().enumerate() {
            let v = view_scalar(c, kind).expect("scalar view");
            s.push_str(&format!("{},{}\n", g.first_position() + i, fmt_f64(v)));
        }
    } else {
        let values = view(&g, kind);
        let values = values.as_real().expect("scalar view");
        s.push('k');
        for p in g.first_position()..g.signal_len() {
            s.push_str(&format!(",p{p}"));
        }
        s.push('\n');
        for (k, row) in values.chunks(g.positions()).enumerate() {
            s.push_str(&k.to_string());
            for v in row {
                s.push(',');
                s.push_str(&fmt_f64(*v));
            }
            s.push('\n');
        }
    }
    write_output(&a.out.output, &s)
}

fn cmd_dirichlet(a: &DirichletArgs) -> anyhow::Result<()> {
    if a.n == 0 {
        bail!(SwdftError::InvalidInput("n must be >= 1".into()));
    }
    if a.grid < 2 {
        bail!(SwdftError::InvalidInput("grid must have at least 2 points".into()));
    }
    let m = a.grid - 1;
    let points: Vec<(f64, f64)> = (0..a.grid)
        .map(|i| {
            // symmetric integer offsets keep the centre exactly at zero
            let x = TAU * (2 * i as i64 - m as i64) as f64 / m as f64;
            (x, dirichlet(a.n, x))
        })
        .collect();
    write_output(&a.out.output, &xy_csv(("x", "D"), &points))
}

fn cmd_closedform(a: &ClosedformArgs) -> anyhow::Result<()> {
    let case = match a.case {
        CaseKind::Local => ClosedFormCase::Local(LocalSignalSpec::new(
            a.start.unwrap_or_default(),
            a.length.unwrap_or_default(),
            a.amplitude,
            a.frequency.unwrap_or_default(),
            a.phase,
        )?),
        CaseKind::Global => ClosedFormCase::Global {
            amplitude: a.amplitude,
            frequency: a.frequency.unwrap_or_default(),
            phase: a.phase,
        },
        CaseKind::Step => ClosedFormCase::Step {
            d: a.d.unwrap_or_default(),
        },
    };
    let rows = compare_closed_form(&case, a.len, a.n)?;
    let worst = rows.iter().map(|r| r.abs_diff()).fold(0.0, f64::max);
    eprintln!("swdft: max |closed - direct| = {worst:e}");
    write_output(&a.out.output, &comparison_csv(&rows))
}

fn cmd_estimate(a: &EstimateArgs) -> anyhow::Result<()> {
    let x = read_signal(&a.input.input)?;
    let g = swdft_sliding(&x, a.n)?;
    let opts = EstimateOptions {
        k_selection: match a.k_selection {
            KSelArg::Option1 => KSelection::Option1,
            KSelArg::Option2 => KSelection::Option2,
        },
        min_length: a.lmin,
        search: match a.search {
            SearchArg::Exhaustive => SearchMode::Exhaustive,
            SearchArg::Random => SearchMode::Randomized {
                budget: a.budget,
                seed: a.seed,
            },
        },
        regression: if a.stacked {
            Regression::Stacked
        } else {
            Regression::RealPart
        },
        parallel: false,
        ..EstimateOptions::default()
    };
    eprintln!("swdft: estimate options {opts:?}");
    let e = estimate_local_signal(&g, &opts)?;
    if e.degenerate {
        eprintln!("swdft: warning: degenerate fit, parameters are not identifiable");
    }
    let unit = match a.phase_units {
        PhaseArg::Radians => PhaseUnit::Radians,
        PhaseArg::Cycles => PhaseUnit::Cycles,
    };
    write_output(&a.out.output, &estimate_csv(&e, unit))
}

fn cmd_simulate(a: &SimulateArgs) -> anyhow::Result<()> {
    let cfg = StudyConfig {
        n_list: a.n_list.clone(),
        sigma_list: a.sigma_list.clone(),
        f_list: a.f_list.clone(),
        reps: a.reps,
        master_seed: a.seed,
        ..StudyConfig::default()
    };
    eprintln!("swdft: study config {cfg:?}");
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.jobs).build()?;
    let report = pool.install(|| run_study(&cfg))?;
    let tables = render_tables(&report)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let write = |name: &str, text: &str| -> anyhow::Result<()> {
        let path: PathBuf = Path::new(&a.out_dir).join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        eprintln!("swdft: wrote {}", path.display());
        Ok(())
    };
    write("report.json", &report.to_json()?)?;
    for t in &tables {
        write(&t.csv_file_name(), &t.csv)?;
        write(&t.text_file_name(), &t.text)?;
    }
    eprintln!(
        "swdft: {} cells, {} failed replicates, {:.1} s",
        report.cells.len(),
        report.metadata.failed_replicates,
        report.metadata.runtime_secs
    );
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<SwdftError>() {
        Some(SwdftError::NumericalFailure(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    eprintln!("swdft: resolved config {:?}", cli.command);
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        other => {
            // everything except the study runs on a single thread
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .expect("thread pool");
            pool.install(|| match other {
                Command::Synth(a) => cmd_synth(a),
                Command::Compute(a) => cmd_compute(a),
                Command::Views(a) => cmd_views(a),
                Command::Dirichlet(a) => cmd_dirichlet(a),
                Command::Closedform(a) => cmd_closedform(a),
                Command::Estimate(a) => cmd_estimate(a),
                Command::Simulate(_) => unreachable!(),
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("swdft: error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

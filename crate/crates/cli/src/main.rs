mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bldl_core::archsim::{schedule_bldl, simulate_traced, Simulation, Trace};
use bldl_core::io::MatrixFile;
use bldl_core::linksim::{
    ber_sweep, sweep_metadata, ChannelKind, ChannelModel, Estimation, Preprocessor, SweepConfig,
};
use bldl_core::prep::{preprocess, ChannelMatrix, FixedEngine, Normalization, Reference};
use bldl_core::{Error, Result};
use clap::{Args, Parser, Subcommand};

use config::{merge, FileConfig, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "bldl", version, about = "Exact LMMSE preprocessing by block-LDL factorization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Invert the regularized Gram matrix of a channel file.
    Preprocess(PreprocessArgs),
    /// Run BER sweeps described by a config file.
    Ber(BerArgs),
    /// Compare the fixed-point model, the architecture model and the reference.
    Compare(CompareArgs),
    /// Dump the BLDL instruction table as CSV.
    Schedule(ScheduleArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// key=value config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bit-accurate fixed-point arithmetic (default)
    #[arg(long, conflicts_with = "float")]
    fixed: bool,
    /// Double-precision reference arithmetic
    #[arg(long)]
    float: bool,
    /// Force the 2×2 block determinants to be real
    #[arg(long)]
    rd: bool,
    /// Channel normalization: row, global or none
    #[arg(long)]
    norm: Option<Normalization>,
    /// Regularizer N0/Es
    #[arg(long)]
    rho: Option<f64>,
    /// Noise variance N0 (with --es)
    #[arg(long)]
    n0: Option<f64>,
    #[arg(long)]
    es: Option<f64>,
    /// Bits per real or imaginary part
    #[arg(long)]
    word_bits: Option<u32>,
    #[arg(long)]
    clock_hz: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn run_config(&self) -> Result<RunConfig> {
        let file = FileConfig::load(self.config.as_deref())?;
        let fixed = if self.float {
            Some(false)
        } else if self.fixed {
            Some(true)
        } else {
            None
        };
        merge(
            &Overrides {
                rho: self.rho,
                n0: self.n0,
                es: self.es,
                fixed,
                rd: self.rd,
                norm: self.norm,
                word_bits: self.word_bits,
                clock_hz: self.clock_hz,
                seed: self.seed,
            },
            &file,
        )
    }
}

#[derive(Args)]
struct PreprocessArgs {
    /// Channel matrix file (B × U)
    input: PathBuf,
    /// Output file for A⁻¹
    #[arg(short, long)]
    output: PathBuf,
    /// Also write L to this file
    #[arg(long)]
    l_out: Option<PathBuf>,
    /// Also write the block-diagonal D⁻¹ to this file
    #[arg(long)]
    dinv_out: Option<PathBuf>,
    /// Run the architecture model and write a cycle report
    #[arg(long)]
    archsim: bool,
    /// Cycle report (key=value); defaults to OUTPUT.cycles
    #[arg(long)]
    report: Option<PathBuf>,
    /// Cycle report as CSV
    #[arg(long)]
    report_csv: Option<PathBuf>,
    /// Per-cycle trace CSV of the architecture model
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BerArgs {
    /// Sweep config (key=value)
    #[arg(long)]
    config: PathBuf,
    /// Directory for the CSV and metadata files
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    input: PathBuf,
    /// Report file; standard output when omitted
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ScheduleArgs {
    /// Number of users U (even)
    #[arg(long, default_value_t = 16)]
    users: usize,
    /// CSV file; standard output when omitted
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Preprocess(a) => cmd_preprocess(&a),
        Command::Ber(a) => cmd_ber(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Schedule(a) => cmd_schedule(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn read_channel(path: &Path) -> Result<ChannelMatrix> {
    ChannelMatrix::new(MatrixFile::read(path)?.to_cmatrix())
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_preprocess(a: &PreprocessArgs) -> Result<()> {
    let cfg = a.common.run_config()?;
    let h = read_channel(&a.input)?;

    if cfg.fixed {
        let engine = FixedEngine::new(cfg.fixed_config()?);
        let p = preprocess(&engine, &h, &cfg.noise, cfg.normalization)?;
        MatrixFile::from_inverse(&p.inverse)?.write(&a.output)?;
        if let Some(path) = &a.l_out {
            MatrixFile::from_l(&p.factors)?.write(path)?;
        }
        if let Some(path) = &a.dinv_out {
            MatrixFile::from_dinv(&p.factors, p.inverse.scale_exp())?.write(path)?;
        }
    } else {
        let engine = Reference { rd_mode: cfg.rd_mode };
        let p = preprocess(&engine, &h, &cfg.noise, cfg.normalization)?;
        MatrixFile::float("inverse", p.inverse.to_dense()).write(&a.output)?;
        if let Some(path) = &a.l_out {
            MatrixFile::float("l", p.factors.l_dense()).write(path)?;
        }
        if let Some(path) = &a.dinv_out {
            MatrixFile::float("dinv", p.factors.dinv_dense()).write(path)?;
        }
    }

    if a.archsim || a.trace.is_some() {
        let trace = if a.trace.is_some() { Trace::enabled() } else { Trace::disabled() };
        let sim = simulate_traced(&h, &cfg.noise, &cfg.arch_config()?, trace)?;
        let report_path = a.report.clone().unwrap_or_else(|| {
            let mut p = a.output.clone().into_os_string();
            p.push(".cycles");
            PathBuf::from(p)
        });
        std::fs::write(report_path, sim.report.to_key_value())?;
        if let Some(path) = &a.report_csv {
            std::fs::write(path, format!("{}\n{}\n", bldl_core::archsim::CycleReport::CSV_HEADER, sim.report.csv_row()))?;
        }
        if let Some(path) = &a.trace {
            std::fs::write(path, sim.trace.to_csv())?;
        }
    }
    Ok(())
}

fn cmd_ber(a: &BerArgs) -> Result<()> {
    let f = FileConfig::load(Some(&a.config))?;
    let snr: Vec<f64> = f
        .get_list("snr_db")?
        .ok_or_else(|| Error::Config("`snr_db` is required".into()))?;
    let backends: Vec<Preprocessor> = f
        .get_named_list("preprocessors")?
        .ok_or_else(|| Error::Config("`preprocessors` is required".into()))?;
    if backends.is_empty() {
        return Err(Error::Config("`preprocessors` lists no backend".into()));
    }
    let trials = a.trials.or(f.get("trials")?).unwrap_or(1000);
    let seed = a.seed.or(f.get("seed")?).unwrap_or(0);
    let kind: ChannelKind = f.get_named("channel")?.unwrap_or(ChannelKind::IidRayleigh);
    let b = f.get("b")?.unwrap_or(64);
    let u = f.get("u")?.unwrap_or(16);
    let model = ChannelModel {
        kind,
        b,
        u,
        min_user_separation_deg: f.get("min_sep_deg")?.unwrap_or(1.0),
        seed,
    };
    let word_bits = f.get("word_bits")?.unwrap_or(bldl_core::fxp::WORD_BITS);

    std::fs::create_dir_all(&a.out_dir)?;
    for backend in backends {
        let mut cfg = SweepConfig::new(snr.clone(), trials, backend, seed);
        cfg.estimation = f.get_named::<Estimation>("estimation")?.unwrap_or(Estimation::PerfectCsi);
        cfg.normalization = f.get_named("norm")?.unwrap_or(Normalization::Global);
        cfg.es = f.get("es")?.unwrap_or(1.0);
        cfg.fixed = bldl_core::prep::FixedConfig::with_word_bits(word_bits)?;
        let curve = ber_sweep(&cfg, &model)?;
        std::fs::write(a.out_dir.join(format!("ber_{backend}.csv")), curve.to_csv())?;
        std::fs::write(a.out_dir.join(format!("ber_{backend}.meta")), sweep_metadata(&cfg, &model))?;
    }
    Ok(())
}

fn outcome<T>(r: &Result<T>) -> Result<String> {
    match r {
        Ok(_) => Ok("ok".into()),
        Err(Error::SingularBlock { block, .. }) => Ok(format!("singular_block={block}")),
        Err(e) => Err(Error::Config(e.to_string())),
    }
}

fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let cfg = a.common.run_config()?;
    let h = read_channel(&a.input)?;
    let engine = FixedEngine::new(cfg.fixed_config()?);
    let golden = preprocess(&engine, &h, &cfg.noise, cfg.normalization);
    let sim: Result<Simulation> = simulate_traced(&h, &cfg.noise, &cfg.arch_config()?, Trace::disabled());
    let reference = preprocess(&Reference { rd_mode: cfg.rd_mode }, &h, &cfg.noise, cfg.normalization);

    let mut r = String::new();
    let (g_status, s_status) = (outcome(&golden)?, outcome(&sim)?);
    let _ = writeln!(r, "golden={g_status}");
    let _ = writeln!(r, "archsim={s_status}");
    let _ = writeln!(r, "reference={}", outcome(&reference)?);
    let consistent = match (&golden, &sim) {
        (Ok(g), Ok(s)) => {
            let exact = g.gram == s.gram && g.factors == s.factors && g.inverse == s.inverse;
            let _ = writeln!(r, "golden_vs_archsim_bit_exact={exact}");
            if let Ok(rf) = &reference {
                let err = g.inverse.to_dense().rel_error(&rf.inverse.to_dense());
                let _ = writeln!(r, "fixed_vs_reference_rel_frobenius={err:e}");
            }
            let _ = writeln!(r, "total_cycles={}", s.report.total_cycles);
            exact
        }
        _ => g_status == s_status,
    };
    let _ = writeln!(r, "consistent={consistent}");
    write_or_print(a.output.as_deref(), &r)?;
    if consistent {
        Ok(())
    } else {
        Err(Error::Hazard("golden model and architecture model disagree".into()))
    }
}

fn cmd_schedule(a: &ScheduleArgs) -> Result<()> {
    let cfg = a.common.run_config()?;
    if a.users < 2 || !a.users.is_multiple_of(2) {
        return Err(Error::Config(format!("U = {} must be even and at least 2", a.users)));
    }
    let s = schedule_bldl(a.users, cfg.latencies);
    s.validate()?;
    let mut out = String::from("cycle,unit,op,operands,result\n");
    for ins in s.by_cycle() {
        let ops: Vec<String> = ins.operands.iter().map(|o| o.to_string()).collect();
        let _ = writeln!(out, "{},{},{},{},{}", ins.issue_cycle, ins.unit(), ins.op, ops.join(" "), ins.result);
    }
    write_or_print(a.output.as_deref(), &out)
}

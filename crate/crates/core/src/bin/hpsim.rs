use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use hpsim::channel::{generate_channel, ArrayGeometry};
use hpsim::metrics::MetricsRecord;
use hpsim::output::{emit_csv, emit_error_curve, write_csv, RunManifest};
use hpsim::precoding::{
    decomposition_error_curve, equivalent_channel, m_max, select_rf_precoder, zf_baseband,
    PrecodingError,
};
use hpsim::sim::{run_trial, sweep_rf_chains, sweep_users, trial_seed, SimError, RETRY_BUDGET};
use hpsim::{ConfigError, Normalization, SinrForm, SystemConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "hpsim",
    version,
    about = "Monte-Carlo simulator for mmWave hybrid precoding with an SVD-split baseband layer"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Flat `key = value` config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed (overrides `master_seed`).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output file; sweeps write CSV plus `<PATH>.manifest`.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Monte-Carlo trials per point (overrides `trials`).
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,
    /// `standard` or `paper_literal`.
    #[arg(long, global = true)]
    sinr_form: Option<SinrForm>,
    /// `power_exact` or `paper_literal`.
    #[arg(long, global = true)]
    normalization: Option<Normalization>,
    /// Config override, repeatable; applied after the file and before the flags above.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one trial at the configured point and print both metric records.
    Single {
        #[arg(long, default_value_t = 0)]
        trial_index: u64,
    },
    /// Sweep the number of users.
    SweepUsers {
        #[arg(long)]
        k_min: usize,
        #[arg(long)]
        k_max: usize,
        #[arg(long, default_value_t = 1)]
        k_step: usize,
    },
    /// Sweep the number of RF chains over a comma-separated list.
    SweepRf {
        #[arg(long, value_delimiter = ',', required = true)]
        list: Vec<usize>,
    },
    /// Truncation error against rank for one channel realization.
    ErrorCurve {
        /// Rank range `a..b` (inclusive); `K` stands for the user count.
        #[arg(long, default_value = "1..K")]
        m: String,
        #[arg(long, default_value_t = 0)]
        trial_index: u64,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(c) => Failure::Config(c.to_string()),
            SimError::AxisRange { .. } => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn resolve_config(g: &GlobalOpts) -> Result<SystemConfig, ConfigError> {
    let mut overrides = g.set.clone();
    if let Some(s) = g.seed {
        overrides.push(format!("master_seed={s}"));
    }
    if let Some(t) = g.trials {
        overrides.push(format!("trials={t}"));
    }
    if let Some(f) = g.sinr_form {
        overrides.push(format!("sinr_form={f}"));
    }
    if let Some(n) = g.normalization {
        overrides.push(format!("normalization={n}"));
    }
    SystemConfig::load(g.config.as_deref(), &overrides)
}

fn parse_m_range(range: &str, k: usize) -> Result<Vec<usize>, ConfigError> {
    let bad = |reason: &str| ConfigError::Value {
        key: "--m".into(),
        value: range.into(),
        reason: reason.into(),
    };
    let bound = |s: &str| -> Result<usize, ConfigError> {
        match s.trim() {
            "K" | "k" => Ok(k),
            t => t.parse().map_err(|_| bad("bounds must be integers or K")),
        }
    };
    let (lo, hi) = match range.split_once("..") {
        Some((a, b)) => (bound(a)?, bound(b.trim_start_matches('='))?),
        None => {
            let v = bound(range)?;
            (v, v)
        }
    };
    if lo < 1 || hi > k || lo > hi {
        return Err(bad(&format!("need 1 <= a <= b <= K = {k}")));
    }
    Ok((lo..=hi).collect())
}

fn record_table(r: &MetricsRecord) -> String {
    let mut s = String::new();
    let sinr: Vec<String> = r.sinr_per_user.iter().map(|x| format!("{x:.6e}")).collect();
    let lines = [
        ("algorithm", r.algorithm.to_string()),
        ("m_used", r.m_used.to_string()),
        ("sinr_per_user", sinr.join(" ")),
        ("throughput_bps", format!("{:.6e}", r.throughput_bps)),
        ("p_pa_w", format!("{:.6}", r.power.p_pa)),
        ("p_ps_network_w", format!("{:.6}", r.power.p_ps_network)),
        ("p_rf_chains_w", format!("{:.6}", r.power.p_rf_chains)),
        ("p_bb_w", format!("{:.6}", r.power.p_bb)),
        ("p_total_w", format!("{:.6}", r.power.p_total)),
        ("ee_bps_per_w", format!("{:.6e}", r.ee_bps_per_w)),
        ("flops.lambda1", r.flops.lambda1.to_string()),
        ("flops.lambda2", r.flops.lambda2.to_string()),
        ("flops.lambda3", r.flops.lambda3.to_string()),
        ("flops.phi", r.flops.phi.to_string()),
        ("flops.delta", r.flops.delta.to_string()),
        ("flops.omega", r.flops.omega.to_string()),
    ];
    for (k, v) in lines {
        s.push_str(&format!("{k:<16} {v}\n"));
    }
    s
}

fn write_text(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    print!("{text}");
    if let Some(path) = out {
        std::fs::write(path, text).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = resolve_config(&cli.global)?;
    let out = cli.global.out.as_ref();
    match cli.command {
        Command::Single { trial_index } => {
            let o = run_trial(&cfg, trial_index)?;
            let mut text = format!(
                "n_tx {}  n_rf {}  n_users {}  trial {}  seed {}\nerror_f2 {:.6e}\ndiscarded {}\n\n",
                cfg.n_tx, cfg.n_rf, cfg.n_users, trial_index, cfg.master_seed, o.error_f2, o.discarded
            );
            text.push_str(&record_table(&o.zf));
            text.push('\n');
            text.push_str(&record_table(&o.svdde));
            write_text(out, &text)
        }
        Command::SweepUsers { k_min, k_max, k_step } => {
            if k_step == 0 || k_min > k_max {
                return Err(Failure::Config(
                    "sweep-users needs k_min <= k_max and k_step >= 1".into(),
                ));
            }
            let ks: Vec<usize> = (k_min..=k_max).step_by(k_step).collect();
            let res = sweep_users(&cfg, &ks)?;
            let cmd = format!("sweep-users --k-min {k_min} --k-max {k_max} --k-step {k_step}");
            finish_sweep(&cfg, &res, &cmd, out)
        }
        Command::SweepRf { list } => {
            let res = sweep_rf_chains(&cfg, &list)?;
            let joined: Vec<String> = list.iter().map(usize::to_string).collect();
            let cmd = format!("sweep-rf --list {}", joined.join(","));
            finish_sweep(&cfg, &res, &cmd, out)
        }
        Command::ErrorCurve { m, trial_index } => {
            let ms = parse_m_range(&m, cfg.n_users)?;
            let curve = single_error_curve(&cfg, trial_index, &ms)?;
            let mut text = String::from("m,err_f2\n");
            for (m, e) in &curve {
                text.push_str(&format!("{m},{}\n", hpsim::output::fmt_float(*e)));
            }
            print!("{text}");
            if let Some(path) = out {
                emit_error_curve(&curve, path).map_err(runtime)?;
                let mut manifest = RunManifest::new(
                    cfg.clone(),
                    format!("error-curve --m {m} --trial-index {trial_index}"),
                );
                manifest.outputs.push(path.clone());
                manifest.write(&RunManifest::path_for(path)).map_err(runtime)?;
            }
            Ok(())
        }
    }
}

fn finish_sweep(
    cfg: &SystemConfig,
    res: &hpsim::sim::SweepResult,
    command: &str,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    write_csv(res, &mut lock).map_err(runtime)?;
    lock.flush().map_err(runtime)?;
    if let Some(path) = out {
        emit_csv(res, &RunManifest::new(cfg.clone(), command), path).map_err(runtime)?;
    }
    Ok(())
}

/// Truncation error curve of the ZF baseband matrix for one realization,
/// drawn with the same seeding and retry rule as a simulation trial.
fn single_error_curve(
    cfg: &SystemConfig,
    trial_index: u64,
    ms: &[usize],
) -> Result<Vec<(usize, f64)>, Failure> {
    let geom = ArrayGeometry::<f64>::from_config(cfg);
    // K = 1 has no admissible rank; report it instead of drawing a channel.
    if cfg.n_users >= 2 {
        m_max(cfg.n_rf, cfg.n_users).map_err(runtime)?;
    }
    for attempt in 0..RETRY_BUDGET {
        let seed = trial_seed(cfg.master_seed, cfg.n_users, cfg.n_rf, trial_index, attempt);
        let chan = generate_channel::<f64, _>(cfg, &mut ChaCha12Rng::seed_from_u64(seed))
            .map_err(runtime)?;
        let rf = select_rf_precoder(&chan, &geom, cfg.n_rf, cfg.codebook_size()).map_err(runtime)?;
        let h_eq = equivalent_channel(&chan, &rf).map_err(runtime)?;
        let zf = match zf_baseband(&h_eq, &rf, cfg.tx_power_w, cfg.normalization) {
            Ok(bb) => bb,
            Err(PrecodingError::RankDeficient(_)) => continue,
            Err(e) => return Err(runtime(e)),
        };
        let errs = decomposition_error_curve(&zf.f_bb, ms).map_err(runtime)?;
        return Ok(ms.iter().copied().zip(errs).collect());
    }
    Err(runtime(SimError::RetriesExhausted { trial_index }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nsm_core::scaling::NsmResidual;
use nsm_harness::{
    run_dir, run_residual_check, run_scaling_check, run_single, run_sweep, DtSpec, HarnessError, RunConfig,
    Snapshot, System,
};

#[derive(Parser)]
#[command(name = "nsm", version, about = "Navier-Stokes-Maxwell and MHD runs on the periodic torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single NSM or MHD simulation.
    Simulate {
        #[arg(long, value_enum)]
        system: Option<SingleSystem>,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Run the NSM family over eps_list against the MHD reference.
    Sweep(Overrides),
    /// Check the diffusive scaling on manufactured fields (eps = 1/m²).
    ScalingCheck(Overrides),
    /// Measure the equation defects of a computed NSM run.
    ResidualCheck(Overrides),
    /// Print the header and field statistics of a snapshot.
    Inspect { snapshot: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum SingleSystem {
    Nsm,
    Mhd,
}

/// Config file plus per-field overrides.
#[derive(Args)]
struct Overrides {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Number or `auto`.
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    sample_every: Option<usize>,
    /// Initial condition name.
    #[arg(long)]
    ic: Option<String>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    magnetic_amplitude: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    decay: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    snapshot_every: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Overrides {
    fn build(self, system: Option<System>) -> Result<RunConfig, HarnessError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = system {
            c.system = s;
        }
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { c.$f = v; })*};
        }
        set!(n, t_end, sample_every, nu, mu, threshold);
        if let Some(dt) = &self.dt {
            c.dt = dt.parse::<DtSpec>()?;
        }
        if let Some(v) = self.ic {
            c.ic.name = v;
        }
        if let Some(v) = self.amplitude {
            c.ic.amplitude = v;
        }
        if self.magnetic_amplitude.is_some() {
            c.ic.magnetic_amplitude = self.magnetic_amplitude;
        }
        if let Some(v) = self.seed {
            c.ic.seed = v;
        }
        if let Some(v) = self.decay {
            c.ic.decay = v;
        }
        for (dst, src) in [(&mut c.eps, self.eps), (&mut c.cutoff, self.cutoff)] {
            if src.is_some() {
                *dst = src;
            }
        }
        if self.eps_list.is_some() {
            c.eps_list = self.eps_list;
        }
        if self.output_dir.is_some() {
            c.output_dir = self.output_dir;
        }
        if self.snapshot_every.is_some() {
            c.snapshot_every = self.snapshot_every;
        }
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        Ok(c)
    }
}

fn simulate(cfg: RunConfig) -> Result<ExitCode, HarnessError> {
    if !matches!(cfg.system, System::Nsm | System::Mhd) {
        return Err(HarnessError::Config(format!(
            "simulate runs `nsm` or `mhd`, config says `{}`",
            cfg.system
        )));
    }
    let dir = run_dir(&cfg);
    let out = run_single(&cfg, &dir)?;
    let s = &out.summary;
    println!("{} run: {} samples, {} steps, t = {}", s.system, s.samples, s.steps, s.t_final);
    println!("output: {}", out.dir.display());
    if let Some(e) = &s.error {
        eprintln!("aborted: {e}");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(mut cfg: RunConfig) -> Result<ExitCode, HarnessError> {
    cfg.system = System::Sweep;
    if cfg.eps_list.is_none() && cfg.eps.is_none() {
        cfg.eps_list = RunConfig::demo_sweep().eps_list;
    }
    let dir = run_dir(&cfg);
    let out = run_sweep(&cfg, &dir)?;
    println!("{:>10} {:>14} {:>14} {:>14} {:>14}", "eps", "sup_h1_u", "sup_h1_b", "vanishing_1", "vanishing_2");
    for r in out.result.records() {
        println!(
            "{:>10.3e} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
            r.eps, r.sup_h1_u, r.sup_h1_b, r.vanishing_1, r.vanishing_2
        );
    }
    let s = &out.summary;
    match (s.order.u, s.order.b) {
        (Some(u), Some(b)) => println!("fitted order: u {u:.3}, B {b:.3}"),
        _ => println!("fitted order: none ({})", s.order.note.as_deref().unwrap_or("")),
    }
    if let (Some(a), Some(b)) = (s.vanishing_slopes.u, s.vanishing_slopes.b) {
        println!("vanishing slopes: {a:.3}, {b:.3}");
    }
    for e in &s.smallness_warnings {
        eprintln!("warning: data exceed the smallness threshold at eps = {e:e}");
    }
    println!("output: {}", out.dir.display());
    if s.failures > 0 {
        for m in s.members.iter().filter(|m| m.error.is_some()) {
            eprintln!("eps = {:e} failed: {}", m.eps, m.error.as_deref().unwrap_or(""));
        }
        return Err(HarnessError::PartialSweep {
            failed: s.failures,
            total: s.members.len(),
        });
    }
    Ok(ExitCode::SUCCESS)
}

fn scaling(mut cfg: RunConfig) -> Result<ExitCode, HarnessError> {
    cfg.system = System::ScalingCheck;
    let rows = run_scaling_check(&cfg, &run_dir(&cfg))?;
    let mut ok = true;
    for r in &rows {
        println!(
            "eps = {:e} (m = {}, band {}): max defect {:.3e} {}",
            r.eps,
            r.m,
            r.band,
            r.max_defect,
            if r.pass { "PASS" } else { "FAIL" }
        );
        ok &= r.pass;
    }
    if ok {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(HarnessError::CheckFailed("scaling defect above tolerance".into()))
    }
}

fn residual(mut cfg: RunConfig) -> Result<ExitCode, HarnessError> {
    cfg.system = System::ResidualCheck;
    let rc = run_residual_check(&cfg, &run_dir(&cfg))?;
    println!("{:>10} {:>14} {:>14} {:>8}", "equation", "dt", "dt/2", "order");
    for (i, name) in NsmResidual::NAMES.iter().enumerate() {
        let p = rc.order[i].map_or("-".to_string(), |p| format!("{p:.2}"));
        println!("{:>10} {:>14.6e} {:>14.6e} {:>8}", name, rc.max_coarse[i], rc.max_fine[i], p);
    }
    Ok(ExitCode::SUCCESS)
}

fn inspect(path: PathBuf) -> Result<ExitCode, HarnessError> {
    let snap = Snapshot::read(&path)?;
    println!("{}", serde_json::to_string_pretty(&snap.header)?);
    println!("{:>6} {:>24} {:>24} {:>24}", "field", "min", "max", "rms");
    for s in snap.stats() {
        println!("{:>6} {:>24.16e} {:>24.16e} {:>24.16e}", s.name, s.min, s.max, s.rms);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { system, opts } => opts
            .build(system.map(|s| match s {
                SingleSystem::Nsm => System::Nsm,
                SingleSystem::Mhd => System::Mhd,
            }))
            .and_then(simulate),
        Command::Sweep(o) => o.build(None).and_then(sweep),
        Command::ScalingCheck(o) => o.build(None).and_then(scaling),
        Command::ResidualCheck(o) => o.build(None).and_then(residual),
        Command::Inspect { snapshot } => inspect(snapshot),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

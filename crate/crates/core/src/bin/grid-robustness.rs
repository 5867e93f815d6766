//! Command-line front end: run campaigns, train the learned attacker,
//! recompute reports and weak-spot maps from saved traces.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use grid_robustness::harness::{
    emit_outputs, load_campaign, recompute_reports, run_campaign, write_reports, Campaign, CampaignConfig,
    FULL_EPISODES, FULL_MAX_STEPS,
};
use grid_robustness::metrics::WeakSpot;
use grid_robustness::perturb::AttackerKind;
use grid_robustness::Error;

#[derive(Parser)]
#[command(name = "grid-robustness", version, about = "Robustness and resilience of a grid operator under sensor attacks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a paired campaign and write reports, series and traces.
    Run(RunArgs),
    /// Train the learned attacker and save its Q-table.
    TrainRlpa(RunArgs),
    /// Recompute reports from the traces of a finished campaign.
    Report(ReadArgs),
    /// Print and write the weak-spot map of a finished campaign.
    Weakmap(ReadArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Full-scale protocol: 35 episodes of 8064 steps.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    perturber: Option<AttackerKind>,
    /// Random attacker: probability of a new perturbation per step.
    #[arg(long)]
    p: Option<f64>,
    /// Random attacker: lognormal sigma for generator readings.
    #[arg(long)]
    sigma_gen: Option<f64>,
    /// Gradient attacker: iterations.
    #[arg(long)]
    w: Option<usize>,
    /// Gradient attacker: relative step size.
    #[arg(long)]
    zeta: Option<f64>,
    /// Gradient and learned attackers: relative perturbation cap.
    #[arg(long)]
    xi: Option<f64>,
    /// Learned attacker: learning rate.
    #[arg(long)]
    alpha: Option<f64>,
    /// Learned attacker: exploration rate while training.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Learned attacker: discount.
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct ReadArgs {
    /// Directory to write to; also read from unless `--from` is given.
    #[arg(long)]
    out: PathBuf,
    /// Campaign directory holding `campaign.json` and `traces/`.
    #[arg(long)]
    from: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<CampaignConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => CampaignConfig::from_file(p)?,
            None => CampaignConfig::default(),
        };
        if self.full {
            cfg.episodes = FULL_EPISODES;
            cfg.max_steps = FULL_MAX_STEPS;
        }
        macro_rules! set {
            ($flag:expr => $($field:expr),+) => {
                if let Some(v) = $flag {
                    $($field = v.clone();)+
                }
            };
        }
        set!(self.seed => cfg.seed);
        set!(self.episodes => cfg.episodes);
        set!(self.max_steps => cfg.max_steps, cfg.rlpa.max_steps);
        set!(&self.out => cfg.output);
        set!(self.perturber => cfg.perturber.kind);
        set!(self.p => cfg.rpa.p);
        set!(self.sigma_gen => cfg.rpa.sigma_gen);
        set!(self.w => cfg.gepa.iterations);
        set!(self.zeta => cfg.gepa.step_size);
        set!(self.xi => cfg.gepa.cap, cfg.rlpa.cap);
        set!(self.alpha => cfg.rlpa.learning_rate);
        set!(self.epsilon => cfg.rlpa.epsilon);
        set!(self.gamma => cfg.rlpa.discount);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(args: &RunArgs) -> Result<(), Error> {
    let cfg = args.config()?;
    let out = cfg.output.clone();
    let result = run_campaign(cfg)?;
    emit_outputs(&result, &out)?;
    for f in &result.failures {
        eprintln!("episode {} failed: {}", f.episode, f.error);
    }
    print!("{}", std::fs::read_to_string(out.join("robustness.txt")).map_err(|e| Error::io(&out, e))?);
    println!("wrote {}", out.display());
    Ok(())
}

fn train(args: &RunArgs) -> Result<(), Error> {
    let mut cfg = args.config()?;
    cfg.perturber.kind = AttackerKind::None;
    let out = cfg.output.clone();
    let campaign = Campaign::new(cfg)?;
    let model = campaign.train_attacker()?;
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let path = out.join("rlpa_q.json");
    model.save(&path)?;
    println!("{} perturbations, {} visited states; wrote {}", model.set.len(), model.q.states().count(), path.display());
    Ok(())
}

fn source(args: &ReadArgs) -> &Path {
    args.from.as_deref().unwrap_or(&args.out)
}

fn report(args: &ReadArgs) -> Result<(), Error> {
    let (stored, traces) = load_campaign(source(args))?;
    let reports = recompute_reports(&stored, &traces)?;
    write_reports(&args.out, &reports, &traces)?;
    print!("{}", grid_robustness::metrics::robustness_table(&[(stored.config.perturber.kind.as_str().into(), &reports.robustness)]));
    Ok(())
}

fn weakmap(args: &ReadArgs) -> Result<(), Error> {
    let (stored, traces) = load_campaign(source(args))?;
    let reports = recompute_reports(&stored, &traces)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    grid_robustness::harness::output::write_weakmap(&args.out.join("weakmap.csv"), &reports.robustness.weak_spots)?;
    let mut spots: Vec<&WeakSpot> = reports.robustness.weak_spots.iter().collect();
    spots.sort_by(|a, b| b.score.unwrap_or(-1.0).total_cmp(&a.score.unwrap_or(-1.0)).then(a.index.cmp(&b.index)));
    println!("{:>5}  {:<8}  {:>9}  {:>7}  score", "index", "sensor", "perturbed", "changed");
    for w in spots {
        let score = w.score.map_or_else(|| "n/a".into(), |s| format!("{s:.3}"));
        println!("{:>5}  {:<8}  {:>9}  {:>7}  {score}", w.index, w.label, w.perturbed_steps, w.changed_steps);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::TrainRlpa(a) => train(a),
        Command::Report(a) => report(a),
        Command::Weakmap(a) => weakmap(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

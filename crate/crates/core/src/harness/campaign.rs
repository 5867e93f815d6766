//! Paired episodes, campaigns and attacker training.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::CampaignConfig;
use super::{derive_seed, SeedRole};
use crate::defender::{GreedyDefender, Policy};
use crate::error::{Error, Result};
use crate::grid::{load_grid, ActionSpace, Chronics, GridEnv, GridModel, Observation};
use crate::metrics::{build_reports, EpisodeTrace, Reports, RunRecord};
use crate::perturb::{
    reduce_action_space, rlpa_train, AttackerKind, GradientPerturber, GridAttackEnv, LearnedPerturber,
    NullPerturber, Perturber, RandomPerturber, RlpaModel,
};

/// Everything a campaign shares across episodes.
pub struct Campaign {
    pub config: CampaignConfig,
    pub model: Arc<GridModel>,
    pub actions: Arc<ActionSpace>,
    pub defender: GreedyDefender,
    /// Trained attacker, for learned-perturbation campaigns.
    pub attacker: Option<Arc<RlpaModel>>,
    replay: Option<Arc<Chronics>>,
}

impl Campaign {
    /// Validates the config and loads the grid, chronics and attacker. A
    /// learned attacker without a saved model is trained here.
    pub fn new(config: CampaignConfig) -> Result<Self> {
        config.validate()?;
        let model = Arc::new(load_grid(&config.grid)?);
        let actions = Arc::new(ActionSpace::enumerate(&model));
        let defender = GreedyDefender::new(Arc::clone(&model), Arc::clone(&actions), config.defender.clone())?;
        let replay = match &config.chronics_file {
            Some(p) => Some(Arc::new(Chronics::from_csv(&model, p)?)),
            None => None,
        };
        let mut campaign = Campaign { config, model, actions, defender, attacker: None, replay };
        if campaign.config.perturber.kind == AttackerKind::Rlpa {
            let attacker = match &campaign.config.perturber.rlpa_model {
                Some(p) => RlpaModel::load(p)?,
                None => campaign.train_attacker()?,
            };
            campaign.attacker = Some(Arc::new(attacker));
        }
        Ok(campaign)
    }

    /// Chronics of evaluation episode `episode`, shared by both runs of the pair.
    pub fn chronics(&self, episode: usize) -> Arc<Chronics> {
        match &self.replay {
            Some(c) => Arc::clone(c),
            None => Arc::new(Chronics::generate(
                &self.model,
                self.config.max_steps + 1,
                derive_seed(self.config.seed, episode as u64, SeedRole::Chronics),
                &self.config.chronics,
            )),
        }
    }

    /// A fresh attacker for evaluation episode `episode`.
    pub fn perturber(&self, episode: usize) -> Result<Box<dyn Perturber>> {
        let seed = derive_seed(self.config.attacker_seed(), episode as u64, SeedRole::Attacker);
        Ok(match self.config.perturber.kind {
            AttackerKind::None => Box::new(NullPerturber),
            AttackerKind::Rpa => Box::new(RandomPerturber::new(
                self.config.rpa.clone(),
                self.model.layout(),
                ChaCha8Rng::seed_from_u64(seed),
            )?),
            AttackerKind::Gepa => Box::new(GradientPerturber::new(self.config.gepa.clone())?),
            AttackerKind::Rlpa => {
                let attacker = self
                    .attacker
                    .as_ref()
                    .ok_or_else(|| Error::Invalid("learned attacker not loaded".into()))?;
                Box::new(LearnedPerturber::new(
                    Arc::clone(&self.model),
                    Arc::clone(attacker),
                    self.config.perturber.rlpa_epsilon,
                    seed,
                ))
            }
        })
    }

    /// Observations for the attacker's action-space reduction, spread evenly
    /// over one unperturbed rollout on training chronics.
    pub fn observation_pool(&self) -> Result<Vec<Observation>> {
        let cfg = &self.config.rlpa;
        let steps = cfg.max_steps.max(1);
        let seed = derive_seed(self.config.attacker_seed(), 0, SeedRole::Pool);
        let chronics = Chronics::generate(&self.model, steps + 1, seed, &self.config.chronics);
        let mut env = GridEnv::reset(Arc::clone(&self.model), Arc::new(chronics))?;
        let stride = (steps / cfg.pool_size.max(1)).max(1);
        let mut pool = Vec::with_capacity(cfg.pool_size);
        let mut obs = env.observe();
        let mut k = 0;
        while pool.len() < cfg.pool_size {
            if k % stride == 0 {
                pool.push(obs.clone());
            }
            let r = env.step(self.actions.get(self.defender.act(&obs)))?;
            obs = r.observation;
            k += 1;
            if r.done {
                break;
            }
        }
        Ok(pool)
    }

    /// Reduces the perturbation space and runs Q-learning against the defender.
    pub fn train_attacker(&self) -> Result<RlpaModel> {
        let cfg = self.config.rlpa.clone();
        cfg.validate()?;
        let pool = self.observation_pool()?;
        let set = reduce_action_space(&pool, &self.defender, cfg.budget)?;
        let mut env = GridAttackEnv::new(
            Arc::clone(&self.model),
            Arc::clone(&self.actions),
            self.config.chronics.clone(),
            cfg.max_steps,
            self.config.attacker_seed(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.config.attacker_seed(), 0, SeedRole::Exploration));
        let q = rlpa_train(&cfg, &set, &mut env, &self.defender, &mut rng)?;
        Ok(RlpaModel { config: cfg, set, q })
    }
}

/// The per-step records of one run.
struct Member {
    run: RunRecord,
    counterfactual: Vec<crate::grid::Action>,
    flagged: Vec<Vec<usize>>,
    changes: Vec<Vec<(usize, f64)>>,
    first_perturbation: Option<usize>,
}

/// Runs one episode with `perturber` between the sensors and the defender.
fn run_member(
    model: &Arc<GridModel>,
    chronics: Arc<Chronics>,
    defender: &dyn Policy,
    perturber: &mut dyn Perturber,
) -> Result<Member> {
    let actions = defender.action_space();
    let mut env = GridEnv::reset(Arc::clone(model), chronics)?;
    let mut m = Member {
        run: RunRecord::default(),
        counterfactual: Vec::new(),
        flagged: Vec::new(),
        changes: Vec::new(),
        first_perturbation: None,
    };
    let mut obs = env.observe();
    while !env.is_done() {
        let p = perturber.perturb(&obs, defender)?;
        let changes: Vec<(usize, f64)> = p
            .values
            .iter()
            .zip(&obs.values)
            .enumerate()
            .filter(|(_, (a, s))| a != s)
            .map(|(i, (a, s))| (i, a - s))
            .collect();
        let (executed, counterfactual) = if changes.is_empty() {
            let a = defender.act(&obs);
            (a, a)
        } else {
            if m.first_perturbation.is_none() {
                m.first_perturbation = Some(m.run.len());
            }
            (defender.act(&obs.with_values(p.values)), defender.act(&obs))
        };
        let r = env.step(actions.get(executed))?;
        m.run.push(obs.values, actions.get(executed).clone(), r.reward, r.legal);
        m.counterfactual.push(actions.get(counterfactual).clone());
        m.flagged.push(p.flagged);
        m.changes.push(changes);
        obs = r.observation;
    }
    Ok(m)
}

/// Runs the unperturbed and perturbed members of evaluation episode
/// `episode` on the same chronics and pairs their records.
pub fn run_paired_episode(campaign: &Campaign, episode: usize) -> Result<EpisodeTrace> {
    let wrap = |e: Error| Error::Episode { episode, source: Box::new(e) };
    let chronics = campaign.chronics(episode);
    let clean = run_member(&campaign.model, Arc::clone(&chronics), &campaign.defender, &mut NullPerturber).map_err(wrap)?;
    let mut perturber = campaign.perturber(episode).map_err(wrap)?;
    let attacked = run_member(&campaign.model, chronics, &campaign.defender, perturber.as_mut()).map_err(wrap)?;
    Ok(EpisodeTrace {
        episode,
        attacker: campaign.config.perturber.kind,
        observation_len: campaign.model.observation_len(),
        unperturbed: clean.run,
        perturbed: attacked.run,
        counterfactual: attacked.counterfactual,
        flagged: attacked.flagged,
        changes: attacked.changes,
        first_perturbation: attacked.first_perturbation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeFailure {
    pub episode: usize,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub version: String,
    pub config: CampaignConfig,
    pub model: Arc<GridModel>,
    pub traces: Vec<EpisodeTrace>,
    pub failures: Vec<EpisodeFailure>,
    pub reports: Reports,
    /// Attacker trained during the campaign, if any.
    pub trained_attacker: Option<Arc<RlpaModel>>,
}

/// Runs every episode in order. Failed episodes are recorded and skipped;
/// the campaign fails only if no episode completes.
pub fn run_campaign(config: CampaignConfig) -> Result<CampaignResult> {
    let trained = config.perturber.kind == AttackerKind::Rlpa && config.perturber.rlpa_model.is_none();
    let campaign = Campaign::new(config)?;
    let mut traces = Vec::new();
    let mut failures = Vec::new();
    for episode in 0..campaign.config.episodes {
        match run_paired_episode(&campaign, episode) {
            Ok(t) => traces.push(t),
            Err(e) => failures.push(EpisodeFailure { episode, error: e.to_string() }),
        }
    }
    if traces.is_empty() {
        let detail = failures.first().map_or(String::new(), |f| format!(": {}", f.error));
        return Err(Error::Invalid(format!("no episode completed{detail}")));
    }
    let reports = build_reports(&campaign.model, &traces, &campaign.config.metrics)?;
    Ok(CampaignResult {
        version: env!("CARGO_PKG_VERSION").into(),
        trained_attacker: if trained { campaign.attacker.clone() } else { None },
        config: campaign.config,
        model: campaign.model,
        traces,
        failures,
        reports,
    })
}

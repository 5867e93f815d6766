//! Learned perturbation agent: tabular Q-learning over a reduced set of
//! perturbations, choosing when and how to attack.
//!
//! The perturbation set holds do-nothing, a budget of sensor overwrites
//! (up to three sensors set to zero or to a very large reading) picked by a
//! greedy search, and one targeted FGSM example per group of defender actions
//! that touch the same substations.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gradient::{fgsm_attack, FD_STEP};
use super::{AttackerKind, Perturbation, Perturber};
use crate::defender::Policy;
use crate::error::{Error, Result};
use crate::grid::{ActionId, Chronics, ChronicsParams, GridEnv, GridModel, Observation, STEPS_PER_DAY};

/// Largest number of sensors a single overwrite touches.
pub const MAX_SET_SIZE: usize = 3;
/// Multiple of the historical maximum used as the "very large" reading.
pub const LARGE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fill {
    Zero,
    Large,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationAction {
    DoNothing,
    SetValues { indices: Vec<usize>, fill: Fill },
    /// FGSM example pushing the defender toward `target`, the representative
    /// of action group `group`.
    AdversarialToward { group: usize, target: ActionId },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RlpaConfig {
    /// Training episodes `H`.
    pub episodes: usize,
    /// Step cap per training episode `K`.
    pub max_steps: usize,
    /// Learning rate `α`.
    pub learning_rate: f64,
    /// Exploration rate `ε` during training.
    pub epsilon: f64,
    /// Discount `γ`.
    pub discount: f64,
    /// FGSM budget `ξ`, relative.
    pub cap: f64,
    /// Bonus added to the attacker reward when the grid fails early.
    pub terminal_bonus: f64,
    /// Number of sensor-overwrite perturbations kept in the set.
    pub budget: usize,
    /// Observations sampled from unperturbed rollouts for the reduction.
    pub pool_size: usize,
}

impl Default for RlpaConfig {
    fn default() -> Self {
        RlpaConfig {
            episodes: 30,
            max_steps: 2016,
            learning_rate: 0.1,
            epsilon: 0.2,
            discount: 0.95,
            cap: 0.10,
            terminal_bonus: 100.0,
            budget: 8,
            pool_size: 64,
        }
    }
}

impl RlpaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config(format!("rlpa learning rate must lie in [0, 1], got {}", self.learning_rate)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("rlpa epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(Error::Config(format!("rlpa discount must lie in (0, 1), got {}", self.discount)));
        }
        if !(self.cap > 0.0) {
            return Err(Error::Config("rlpa cap must be > 0".into()));
        }
        Ok(())
    }
}

/// The reduced perturbation set `P` and the fill values it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSet {
    pub actions: Vec<PerturbationAction>,
    /// Reading used for [`Fill::Large`], per sensor.
    pub large_values: Vec<f64>,
}

impl AttackSet {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Produces the defender's view under perturbation `p`.
    pub fn apply(
        &self,
        p: &PerturbationAction,
        obs: &Observation,
        defender: &dyn Policy,
        cap: f64,
    ) -> Result<Perturbation> {
        match p {
            PerturbationAction::DoNothing => Ok(Perturbation { values: obs.values.clone(), flagged: Vec::new() }),
            PerturbationAction::SetValues { indices, fill } => {
                let mut values = obs.values.clone();
                for &i in indices {
                    values[i] = match fill {
                        Fill::Zero => 0.0,
                        Fill::Large => self.large_values[i],
                    };
                }
                let mut flagged = indices.clone();
                flagged.sort_unstable();
                Ok(Perturbation { values, flagged })
            }
            PerturbationAction::AdversarialToward { target, .. } => {
                if !defender.action_score(obs, *target).is_finite() {
                    return Ok(Perturbation { values: obs.values.clone(), flagged: Vec::new() });
                }
                let mut scratch = obs.clone();
                let values = fgsm_attack(
                    cap,
                    FD_STEP,
                    |x| {
                        scratch.values.copy_from_slice(x);
                        defender.action_score(&scratch, *target)
                    },
                    &obs.values,
                )?;
                let flagged = values
                    .iter()
                    .zip(&obs.values)
                    .enumerate()
                    .filter(|(_, (a, b))| a != b)
                    .map(|(i, _)| i)
                    .collect();
                Ok(Perturbation { values, flagged })
            }
        }
    }
}

/// Discretised attacker state.
pub type StateKey = u32;

const RHO_EDGES: [f64; 4] = [0.8, 0.9, 1.0, 1.2];

/// Max-loading bucket (5) × overloaded-line count bucket (3) × quarter of day (4).
pub fn grid_state_key(model: &GridModel, obs: &Observation) -> StateKey {
    let rho = obs.rho(model);
    let max = rho.iter().copied().fold(0.0, f64::max);
    let rho_bucket = RHO_EDGES.iter().filter(|&&e| max >= e).count() as u32;
    let overloaded = rho.iter().filter(|&&r| r > 1.0).count().min(2) as u32;
    let quarter = ((obs.step % STEPS_PER_DAY) / (STEPS_PER_DAY / 4)) as u32;
    rho_bucket * 12 + overloaded * 4 + quarter
}

/// Readable form of a grid state key, e.g. `rho2-ovl0-q3`.
pub fn describe_state_key(key: StateKey) -> String {
    format!("rho{}-ovl{}-q{}", key / 12, (key % 12) / 4, key % 4)
}

fn parse_state_key(s: &str) -> Option<StateKey> {
    let mut parts = s.split('-');
    let r = parts.next()?.strip_prefix("rho")?.parse::<u32>().ok()?;
    let o = parts.next()?.strip_prefix("ovl")?.parse::<u32>().ok()?;
    let q = parts.next()?.strip_prefix('q')?.parse::<u32>().ok()?;
    (parts.next().is_none() && r < 5 && o < 3 && q < 4).then_some(r * 12 + o * 4 + q)
}

/// Q-table from state key to one value per perturbation. Unseen states read as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QFunction {
    n_actions: usize,
    table: BTreeMap<StateKey, Vec<f64>>,
}

impl QFunction {
    pub fn new(n_actions: usize) -> Self {
        QFunction { n_actions, table: BTreeMap::new() }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn values(&self, key: StateKey) -> Vec<f64> {
        self.table.get(&key).cloned().unwrap_or_else(|| vec![0.0; self.n_actions])
    }

    pub fn get(&self, key: StateKey, action: usize) -> f64 {
        self.table.get(&key).map_or(0.0, |v| v[action])
    }

    pub fn set(&mut self, key: StateKey, action: usize, value: f64) {
        let n = self.n_actions;
        self.table.entry(key).or_insert_with(|| vec![0.0; n])[action] = value;
    }

    pub fn max(&self, key: StateKey) -> f64 {
        self.table
            .get(&key)
            .map_or(0.0, |v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Greedy choice; ties go to index 0 (do-nothing), then the lowest index.
    pub fn argmax(&self, key: StateKey) -> usize {
        let Some(v) = self.table.get(&key) else { return 0 };
        let mut best = 0;
        for (i, &q) in v.iter().enumerate() {
            if q > v[best] {
                best = i;
            }
        }
        best
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = (&StateKey, &Vec<f64>)> {
        self.table.iter()
    }
}

/// Feedback from one environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvFeedback {
    pub observation: Observation,
    /// The defender's reward.
    pub reward: f64,
    pub done: bool,
    /// The episode ended in a failure before the series ran out.
    pub failed: bool,
}

/// Environment the learned attacker trains against.
pub trait AttackEnvironment {
    fn reset(&mut self, episode: usize) -> Result<Observation>;
    fn step(&mut self, action: ActionId) -> Result<EnvFeedback>;
    fn state_key(&self, obs: &Observation) -> StateKey;
}

/// Training environment over freshly generated chronics per episode.
#[derive(Debug, Clone)]
pub struct GridAttackEnv {
    model: Arc<GridModel>,
    actions: Arc<crate::grid::ActionSpace>,
    params: ChronicsParams,
    steps: usize,
    seed: u64,
    env: Option<GridEnv>,
}

impl GridAttackEnv {
    pub fn new(
        model: Arc<GridModel>,
        actions: Arc<crate::grid::ActionSpace>,
        params: ChronicsParams,
        steps: usize,
        seed: u64,
    ) -> Self {
        GridAttackEnv { model, actions, params, steps, seed, env: None }
    }

    /// Seed of the chronics used in training episode `episode`.
    pub fn episode_seed(&self, episode: usize) -> u64 {
        crate::harness::derive_seed(self.seed, episode as u64, crate::harness::SeedRole::Training)
    }
}

impl AttackEnvironment for GridAttackEnv {
    fn reset(&mut self, episode: usize) -> Result<Observation> {
        let chronics = Chronics::generate(&self.model, self.steps + 1, self.episode_seed(episode), &self.params);
        let env = GridEnv::reset(Arc::clone(&self.model), Arc::new(chronics))?;
        let obs = env.observe();
        self.env = Some(env);
        Ok(obs)
    }

    fn step(&mut self, action: ActionId) -> Result<EnvFeedback> {
        let env = self.env.as_mut().ok_or_else(|| Error::Invalid("step before reset".into()))?;
        let r = env.step(self.actions.get(action))?;
        Ok(EnvFeedback { observation: r.observation, reward: r.reward, done: r.done, failed: !r.legal })
    }

    fn state_key(&self, obs: &Observation) -> StateKey {
        grid_state_key(&self.model, obs)
    }
}

/// ε-greedy choice over the perturbation set.
pub fn rlpa_act(q: &QFunction, key: StateKey, epsilon: f64, rng: &mut ChaCha8Rng) -> usize {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        rng.random_range(0..q.n_actions())
    } else {
        q.argmax(key)
    }
}

/// Q-learning of the attacker. The attacker's reward is the negated defender
/// reward plus `terminal_bonus` when the grid fails before the episode ends.
pub fn rlpa_train(
    cfg: &RlpaConfig,
    set: &AttackSet,
    env: &mut dyn AttackEnvironment,
    defender: &dyn Policy,
    rng: &mut ChaCha8Rng,
) -> Result<QFunction> {
    cfg.validate()?;
    let mut q = QFunction::new(set.len());
    for h in 0..cfg.episodes {
        let mut obs = env.reset(h)?;
        let mut s = env.state_key(&obs);
        let mut k = 0;
        while k < cfg.max_steps {
            let p = rlpa_act(&q, s, cfg.epsilon, rng);
            let seen = set.apply(&set.actions[p], &obs, defender, cfg.cap)?;
            let a = defender.act(&obs.with_values(seen.values));
            let fb = env.step(a)?;
            let reward = -fb.reward + if fb.failed { cfg.terminal_bonus } else { 0.0 };
            let s_next = env.state_key(&fb.observation);
            let bootstrap = if fb.done { 0.0 } else { cfg.discount * q.max(s_next) };
            let old = q.get(s, p);
            q.set(s, p, old + cfg.learning_rate * (reward + bootstrap - old));
            s = s_next;
            obs = fb.observation;
            k += 1;
            if fb.done {
                break;
            }
        }
    }
    Ok(q)
}

/// Mean clean-score drop and flip rate of a candidate perturbation over the pool.
fn rate(
    pool: &[PoolEntry],
    indices: &[usize],
    fill: Fill,
    large: &[f64],
    defender: &dyn Policy,
) -> (f64, f64) {
    let mut drop = 0.0;
    let mut flips = 0usize;
    for entry in pool {
        let mut values = entry.obs.values.clone();
        for &i in indices {
            values[i] = match fill {
                Fill::Zero => 0.0,
                Fill::Large => large[i],
            };
        }
        let a = defender.act(&entry.obs.with_values(values));
        if a != entry.clean_action {
            flips += 1;
            let d = entry.clean_scores[entry.clean_action] - entry.clean_scores[a];
            if d.is_finite() {
                drop += d;
            }
        }
    }
    let n = pool.len() as f64;
    (drop / n, flips as f64 / n)
}

struct PoolEntry {
    obs: Observation,
    clean_action: ActionId,
    clean_scores: Vec<f64>,
}

#[derive(Clone)]
struct Candidate {
    indices: Vec<usize>,
    fill: Fill,
    drop: f64,
    flips: f64,
}

fn rank(c: &mut [Candidate]) {
    c.sort_by(|a, b| {
        b.drop
            .total_cmp(&a.drop)
            .then(b.flips.total_cmp(&a.flips))
            .then(a.indices.len().cmp(&b.indices.len()))
            .then(a.fill.cmp(&b.fill))
            .then(a.indices.cmp(&b.indices))
    });
}

/// Builds the perturbation set from a pool of unperturbed observations.
///
/// Every single-sensor overwrite is scored by the mean drop in clean policy
/// score of the action the defender ends up taking; the best singles are
/// greedily grown into pairs and triples; the top `budget` overwrites are
/// kept. Defender actions are grouped by the substations they touch and the
/// lowest id of each group becomes an FGSM target.
pub fn reduce_action_space(pool: &[Observation], defender: &dyn Policy, budget: usize) -> Result<AttackSet> {
    if pool.is_empty() {
        return Err(Error::Invalid("action-space reduction needs a non-empty observation pool".into()));
    }
    let n = pool[0].values.len();
    let large_values: Vec<f64> = (0..n)
        .map(|i| LARGE_FACTOR * pool.iter().map(|o| o.values[i].abs()).fold(1.0, f64::max))
        .collect();
    let entries: Vec<PoolEntry> = pool
        .iter()
        .map(|obs| PoolEntry {
            obs: obs.clone(),
            clean_action: defender.act(obs),
            clean_scores: defender.policy_scores(obs).scores,
        })
        .collect();

    let score = |indices: Vec<usize>, fill: Fill| {
        let (drop, flips) = rate(&entries, &indices, fill, &large_values, defender);
        Candidate { indices, fill, drop, flips }
    };

    let mut all: Vec<Candidate> = Vec::new();
    if budget > 0 {
        let beam = budget.max(2);
        for fill in [Fill::Zero, Fill::Large] {
            let mut singles: Vec<Candidate> = (0..n).map(|i| score(vec![i], fill)).collect();
            rank(&mut singles);
            let seeds: Vec<usize> = singles.iter().take(beam).map(|c| c.indices[0]).collect();
            let mut layer = singles[..beam.min(singles.len())].to_vec();
            all.extend(singles);
            for _size in 2..=MAX_SET_SIZE {
                let mut grown: Vec<Vec<usize>> = Vec::new();
                for c in &layer {
                    for &extra in &seeds {
                        if c.indices.contains(&extra) {
                            continue;
                        }
                        let mut idx = c.indices.clone();
                        idx.push(extra);
                        idx.sort_unstable();
                        if !grown.contains(&idx) {
                            grown.push(idx);
                        }
                    }
                }
                let mut scored: Vec<Candidate> = grown.into_iter().map(|idx| score(idx, fill)).collect();
                rank(&mut scored);
                layer = scored.iter().take(beam).cloned().collect();
                all.extend(scored);
            }
        }
        rank(&mut all);
    }

    let mut actions = vec![PerturbationAction::DoNothing];
    actions.extend(
        all.into_iter()
            .take(budget)
            .map(|c| PerturbationAction::SetValues { indices: c.indices, fill: c.fill }),
    );
    for (group, target) in action_groups(defender).into_iter().enumerate() {
        actions.push(PerturbationAction::AdversarialToward { group, target });
    }
    Ok(AttackSet { actions, large_values })
}

/// Lowest action id per distinct set of affected substations, excluding do-nothing.
fn action_groups(defender: &dyn Policy) -> Vec<ActionId> {
    let space = defender.action_space();
    let model = defender.grid_model();
    let mut seen: BTreeMap<Vec<usize>, ActionId> = BTreeMap::new();
    let mut reps = Vec::new();
    for (id, a) in space.iter() {
        if a.is_do_nothing() {
            continue;
        }
        let key: Vec<usize> = match &model {
            Some(m) => a.substations(m).into_iter().collect(),
            None => vec![id],
        };
        if !seen.contains_key(&key) {
            seen.insert(key, id);
            reps.push(id);
        }
    }
    reps
}

/// Trained attacker ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RlpaModel {
    pub config: RlpaConfig,
    pub set: AttackSet,
    pub q: QFunction,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RlpaFile {
    format: String,
    config: RlpaConfig,
    perturbations: Vec<PerturbationAction>,
    large_values: Vec<f64>,
    q: BTreeMap<String, Vec<f64>>,
}

const FORMAT: &str = "rlpa-q/1";

impl RlpaModel {
    /// JSON document: config, perturbation set, fill values, and a map from
    /// state key (`rho<b>-ovl<c>-q<t>`) to one Q-value per perturbation.
    pub fn to_json(&self) -> String {
        let file = RlpaFile {
            format: FORMAT.into(),
            config: self.config.clone(),
            perturbations: self.set.actions.clone(),
            large_values: self.set.large_values.clone(),
            q: self.q.states().map(|(k, v)| (describe_state_key(*k), v.clone())).collect(),
        };
        serde_json::to_string_pretty(&file).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: RlpaFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.format != FORMAT {
            return Err(Error::Parse(format!("unsupported Q-table format `{}`", file.format)));
        }
        let n = file.perturbations.len();
        let mut q = QFunction::new(n);
        for (k, v) in file.q {
            let key = parse_state_key(&k).ok_or_else(|| Error::Parse(format!("bad state key `{k}`")))?;
            if v.len() != n || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Parse(format!("state `{k}` must hold {n} finite values")));
            }
            q.table.insert(key, v);
        }
        Ok(RlpaModel {
            config: file.config,
            set: AttackSet { actions: file.perturbations, large_values: file.large_values },
            q,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Greedy (ε = 0 by default) evaluation-time attacker.
#[derive(Debug, Clone)]
pub struct LearnedPerturber {
    model: Arc<GridModel>,
    attacker: Arc<RlpaModel>,
    epsilon: f64,
    rng: ChaCha8Rng,
    /// Index into the perturbation set chosen at the last step.
    pub last_choice: Option<usize>,
}

impl LearnedPerturber {
    pub fn new(model: Arc<GridModel>, attacker: Arc<RlpaModel>, epsilon: f64, seed: u64) -> Self {
        LearnedPerturber { model, attacker, epsilon, rng: ChaCha8Rng::seed_from_u64(seed), last_choice: None }
    }
}

impl Perturber for LearnedPerturber {
    fn kind(&self) -> AttackerKind {
        AttackerKind::Rlpa
    }

    fn perturb(&mut self, obs: &Observation, defender: &dyn Policy) -> Result<Perturbation> {
        let key = grid_state_key(&self.model, obs);
        let p = rlpa_act(&self.attacker.q, key, self.epsilon, &mut self.rng);
        self.last_choice = Some(p);
        let set = &self.attacker.set;
        set.apply(&set.actions[p], obs, defender, self.attacker.config.cap)
    }
}

//! Files written by a campaign, and reading them back.
//!
//! ```text
//! campaign.json          version, config echo, grid, completed and failed episodes
//! robustness.json        robustness report
//! resilience.json        resilience report (reward gap and state similarity)
//! episode_metrics.json   per-episode metrics behind both reports
//! robustness.txt         aligned-column tables
//! resilience.txt
//! weakmap.csv            index,element,group,score
//! series/reward_NNN.csv  step,R_u,R_p,delta
//! series/cosine_NNN.csv  step,cosine
//! traces/episode_NNN.json
//! rlpa_q.json            learned attacker, when trained during the campaign
//! ```

use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use super::campaign::{CampaignResult, EpisodeFailure};
use super::config::CampaignConfig;
use crate::error::{Error, Result};
use crate::grid::GridModel;
use crate::metrics::{
    build_reports, resilience_table, robustness_table, state_similarity_series, EpisodeTrace, Reports, WeakSpot,
};

/// Contents of `campaign.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoredCampaign {
    pub version: String,
    pub config: CampaignConfig,
    pub model: GridModel,
    pub completed: Vec<usize>,
    pub failures: Vec<EpisodeFailure>,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialise");
    s.push('\n');
    s
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn mkdir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn trace_path(dir: &Path, episode: usize) -> PathBuf {
    dir.join("traces").join(format!("episode_{episode:03}.json"))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Io { path: path.display().to_string(), source: std::io::Error::other(e) }
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Writes `weakmap.csv`: one row per observation index, score empty when
/// the index was never perturbed.
pub fn write_weakmap(path: &Path, spots: &[WeakSpot]) -> Result<()> {
    write_csv(
        path,
        &["index", "element", "group", "score"],
        spots.iter().map(|w| vec![w.index.to_string(), w.element.to_string(), w.group.clone(), opt(w.score)]),
    )
}

fn write_series(dir: &Path, trace: &EpisodeTrace) -> Result<()> {
    let n = trace.unperturbed_len().max(trace.perturbed_len());
    let at = |r: &[f64], k: usize| r.get(k).copied();
    write_csv(
        &dir.join(format!("reward_{:03}.csv", trace.episode)),
        &["step", "R_u", "R_p", "delta"],
        (0..n).map(|k| {
            let u = at(&trace.unperturbed.rewards, k);
            let p = at(&trace.perturbed.rewards, k);
            let d = u.zip(p).map(|(u, p)| p - u);
            vec![k.to_string(), opt(u), opt(p), opt(d)]
        }),
    )?;
    write_csv(
        &dir.join(format!("cosine_{:03}.csv", trace.episode)),
        &["step", "cosine"],
        state_similarity_series(trace).into_iter().enumerate().map(|(k, c)| vec![k.to_string(), c.to_string()]),
    )
}

/// Writes every report file and per-step series into `dir`.
pub fn write_reports(dir: &Path, reports: &Reports, traces: &[EpisodeTrace]) -> Result<()> {
    mkdir(dir)?;
    let name = reports.robustness.attacker.as_str().to_string();
    write(&dir.join("robustness.json"), &to_json(&reports.robustness))?;
    write(&dir.join("resilience.json"), &to_json(&reports.resilience))?;
    write(&dir.join("episode_metrics.json"), &to_json(&reports.episodes))?;
    write(&dir.join("robustness.txt"), &robustness_table(&[(name.clone(), &reports.robustness)]))?;
    let res = &reports.resilience;
    let text = format!(
        "Reward\n{}\nState similarity\n{}",
        resilience_table(&[(name.clone(), &res.reward)], "reward delta"),
        resilience_table(&[(name, &res.state)], "cosine similarity"),
    );
    write(&dir.join("resilience.txt"), &text)?;
    write_weakmap(&dir.join("weakmap.csv"), &reports.robustness.weak_spots)?;
    let series = dir.join("series");
    mkdir(&series)?;
    for t in traces {
        write_series(&series, t)?;
    }
    Ok(())
}

/// Persists a campaign: config echo, traces, reports and series.
pub fn emit_outputs(result: &CampaignResult, dir: &Path) -> Result<()> {
    mkdir(&dir.join("traces"))?;
    let stored = StoredCampaign {
        version: result.version.clone(),
        config: result.config.clone(),
        model: (*result.model).clone(),
        completed: result.traces.iter().map(|t| t.episode).collect(),
        failures: result.failures.clone(),
    };
    write(&dir.join("campaign.json"), &to_json(&stored))?;
    for t in &result.traces {
        let mut text = serde_json::to_string(t).expect("trace serialises");
        text.push('\n');
        write(&trace_path(dir, t.episode), &text)?;
    }
    if let Some(attacker) = &result.trained_attacker {
        attacker.save(dir.join("rlpa_q.json"))?;
    }
    write_reports(dir, &result.reports, &result.traces)
}

/// Reads `campaign.json` and every completed episode's trace from `dir`.
pub fn load_campaign(dir: &Path) -> Result<(StoredCampaign, Vec<EpisodeTrace>)> {
    let stored: StoredCampaign = read_json(&dir.join("campaign.json"))?;
    let traces = stored
        .completed
        .iter()
        .map(|&e| read_json(&trace_path(dir, e)))
        .collect::<Result<Vec<EpisodeTrace>>>()?;
    Ok((stored, traces))
}

/// Rebuilds the reports of a persisted campaign.
pub fn recompute_reports(stored: &StoredCampaign, traces: &[EpisodeTrace]) -> Result<Reports> {
    build_reports(&stored.model, traces, &stored.config.metrics)
}

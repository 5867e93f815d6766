//! Robustness metrics: how much the defender's decisions and returns move
//! under perturbation.

use std::collections::BTreeSet;

use crate::grid::{Action, GridModel};
use crate::perturb::AttackerKind;

use super::trace::{EpisodeTrace, RunRecord};

/// `Σ R^u - Σ R^p`, each run summed over its own length.
pub fn total_reward_delta(trace: &EpisodeTrace) -> f64 {
    trace.unperturbed.rewards.iter().sum::<f64>() - trace.perturbed.rewards.iter().sum::<f64>()
}

/// Steps of the perturbed run where `a^adv_k != a_k`.
pub fn action_change_count(trace: &EpisodeTrace) -> usize {
    trace.changed_steps().count()
}

/// Similarity of two change-sets with their substation sets.
///
/// `C` rewards identical changes fully and changes to the same element
/// attribute with a different target by half; `V` is the mean overlap of
/// substation sets; the result is `(C + V) / 2`.
pub fn change_set_similarity<K: Ord + Copy, T: Ord + Copy, S: Ord>(
    c1: &BTreeSet<(K, T)>,
    v1: &BTreeSet<S>,
    c2: &BTreeSet<(K, T)>,
    v2: &BTreeSet<S>,
) -> f64 {
    match (c1.is_empty(), c2.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let same = c1.intersection(c2).count() as f64;
    let keys2: BTreeSet<K> = c2.iter().map(|(k, _)| *k).collect();
    let differing = c1.iter().filter(|c| keys2.contains(&c.0) && !c2.contains(c)).count() as f64;
    let c = 0.5 * (same + differing / 2.0) * (1.0 / c1.len() as f64 + 1.0 / c2.len() as f64);
    let shared = v1.intersection(v2).count() as f64;
    let v = if v1.is_empty() || v2.is_empty() {
        0.0
    } else {
        0.5 * (shared / v1.len() as f64 + shared / v2.len() as f64)
    };
    (c + v) / 2.0
}

/// Similarity of two defender actions in `[0, 1]`. Do-nothing matches only
/// itself.
pub fn action_similarity(model: &GridModel, a1: &Action, a2: &Action) -> f64 {
    let key = |a: &Action| -> BTreeSet<_> { a.changes(model).into_iter().map(|c| (c.key(), c.target)).collect() };
    change_set_similarity(&key(a1), &a1.substations(model), &key(a2), &a2.substations(model))
}

/// Mean similarity between executed and counterfactual actions over the
/// steps where they differ; `None` when no action changed.
pub fn similarity_per_changed_action(model: &GridModel, trace: &EpisodeTrace) -> Option<f64> {
    let sims: Vec<f64> = trace
        .changed_steps()
        .map(|k| action_similarity(model, &trace.perturbed.actions[k], &trace.counterfactual[k]))
        .collect();
    (!sims.is_empty()).then(|| sims.iter().sum::<f64>() / sims.len() as f64)
}

/// Steps completed with the grid in a legal state.
pub fn survival_steps(run: &RunRecord) -> usize {
    run.legal.iter().filter(|&&l| l).count()
}

/// Total reward divided by the number of non-do-nothing actions taken;
/// `None` when the defender never acted.
pub fn reward_per_action(run: &RunRecord) -> Option<f64> {
    let acted = run.actions.iter().filter(|a| !a.is_do_nothing()).count();
    (acted > 0).then(|| run.rewards.iter().sum::<f64>() / acted as f64)
}

/// Per-index counts behind the weak-spot map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakSpotTally {
    /// Steps where index `i` counted as perturbed.
    pub perturbed: Vec<u64>,
    /// Of those, steps where the defender's action changed.
    pub changed: Vec<u64>,
}

impl WeakSpotTally {
    pub fn new(n: usize) -> Self {
        WeakSpotTally { perturbed: vec![0; n], changed: vec![0; n] }
    }

    /// Share of perturbed steps that changed the action; `None` for
    /// indices never perturbed.
    pub fn scores(&self) -> Vec<Option<f64>> {
        self.perturbed
            .iter()
            .zip(&self.changed)
            .map(|(&p, &c)| (p > 0).then(|| c as f64 / p as f64))
            .collect()
    }
}

/// Mean and population standard deviation of `s^adv_i - s_i` per index over
/// every perturbed-run step of every trace.
pub fn change_bands(traces: &[EpisodeTrace], n: usize) -> Vec<(f64, f64)> {
    let mut sum = vec![0.0; n];
    let mut sq = vec![0.0; n];
    let mut steps = 0usize;
    for t in traces {
        for step in &t.changes {
            for &(i, d) in step {
                sum[i] += d;
                sq[i] += d * d;
            }
        }
        steps += t.changes.len();
    }
    if steps == 0 {
        return vec![(0.0, 0.0); n];
    }
    let m = steps as f64;
    sum.iter()
        .zip(&sq)
        .map(|(&s, &q)| {
            let mean = s / m;
            (mean, (q / m - mean * mean).max(0.0).sqrt())
        })
        .collect()
}

/// Counts perturbed and action-changing steps per index across `traces`.
///
/// Random and learned attackers report which sensors they touched. For the
/// gradient attacker every sensor moves a little at every step, so an index
/// counts as perturbed only when its change leaves the band `μ_i ± σ_i`
/// computed over all the traces given.
pub fn weak_spot_tally(traces: &[EpisodeTrace], kind: AttackerKind) -> WeakSpotTally {
    let n = traces.first().map_or(0, |t| t.observation_len);
    let mut tally = WeakSpotTally::new(n);
    let bands = (kind == AttackerKind::Gepa).then(|| change_bands(traces, n));
    let mut hit = vec![false; n];
    for t in traces {
        for k in 0..t.perturbed_len() {
            hit.iter_mut().for_each(|h| *h = false);
            match &bands {
                Some(bands) => {
                    for (i, &(mu, sigma)) in bands.iter().enumerate() {
                        let d = t.changes[k].iter().find(|c| c.0 == i).map_or(0.0, |c| c.1);
                        hit[i] = (d - mu).abs() > sigma;
                    }
                }
                None => t.flagged[k].iter().for_each(|&i| hit[i] = true),
            }
            let changed = t.perturbed.actions[k] != t.counterfactual[k];
            for (i, _) in hit.iter().enumerate().filter(|(_, h)| **h) {
                tally.perturbed[i] += 1;
                tally.changed[i] += u64::from(changed);
            }
        }
    }
    tally
}

/// Weak-spot scores of a single trace.
pub fn weak_spot_map(trace: &EpisodeTrace, kind: AttackerKind) -> Vec<Option<f64>> {
    weak_spot_tally(std::slice::from_ref(trace), kind).scores()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::metrics::trace::RunRecord;

    type Set = BTreeSet<(u8, u8)>;

    fn sim(c1: &[(u8, u8)], v1: &[u8], c2: &[(u8, u8)], v2: &[u8]) -> f64 {
        let c1: Set = c1.iter().copied().collect();
        let c2: Set = c2.iter().copied().collect();
        let v1: BTreeSet<u8> = v1.iter().copied().collect();
        let v2: BTreeSet<u8> = v2.iter().copied().collect();
        change_set_similarity(&c1, &v1, &c2, &v2)
    }

    #[test]
    fn worked_example() {
        // line1.or -> bus 1 at sub 1, line2.ex -> bus 2 at sub 2, against the first alone.
        assert_eq!(sim(&[(1, 1), (2, 2)], &[1, 2], &[(1, 1)], &[1]), 0.75);
    }

    #[test]
    fn different_target_counts_half() {
        // C = 1/2 (0 + 1/2)(1 + 1) = 1/2, V = 1.
        assert_eq!(sim(&[(4, 2)], &[3], &[(4, 1)], &[3]), 0.75);
    }

    #[test]
    fn disjoint_is_zero() {
        assert_eq!(sim(&[(1, 1)], &[1], &[(2, 1)], &[2]), 0.0);
    }

    #[test]
    fn do_nothing_convention() {
        assert_eq!(sim(&[], &[], &[], &[]), 1.0);
        assert_eq!(sim(&[], &[], &[(1, 1)], &[1]), 0.0);
    }

    #[test]
    fn real_actions() {
        let model = GridModel::ieee14().unwrap();
        let space = crate::grid::ActionSpace::enumerate(&model);
        let a = space.get(1);
        assert_eq!(action_similarity(&model, a, a), 1.0);
        assert_eq!(action_similarity(&model, a, &Action::DoNothing), 0.0);
        assert_eq!(action_similarity(&model, &Action::DoNothing, &Action::DoNothing), 1.0);
    }

    fn run(rewards: &[f64], acted: &[bool]) -> RunRecord {
        let mut r = RunRecord::default();
        for (&x, &a) in rewards.iter().zip(acted) {
            let act = if a { Action::ReconnectLine { line: 0 } } else { Action::DoNothing };
            r.push(vec![0.0], act, x, true);
        }
        r
    }

    fn trace(u: RunRecord, p: RunRecord) -> EpisodeTrace {
        let k = p.len();
        EpisodeTrace {
            episode: 0,
            attacker: AttackerKind::Rpa,
            observation_len: 1,
            counterfactual: p.actions.clone(),
            unperturbed: u,
            perturbed: p,
            flagged: vec![Vec::new(); k],
            changes: vec![Vec::new(); k],
            first_perturbation: None,
        }
    }

    #[test]
    fn reward_delta_uses_own_lengths() {
        let t = trace(run(&[1.0, 1.0, 1.0], &[false; 3]), run(&[1.0, 0.5], &[false; 2]));
        assert_eq!(total_reward_delta(&t), 1.5);
    }

    #[test]
    fn reward_per_action_convention() {
        assert_eq!(reward_per_action(&run(&[1.0, 1.0], &[true, false])), Some(2.0));
        assert_eq!(reward_per_action(&run(&[1.0, 1.0], &[false, false])), None);
    }

    #[test]
    fn action_changes_counted() {
        let mut t = trace(run(&[1.0; 3], &[false; 3]), run(&[1.0; 3], &[false, true, false]));
        t.counterfactual = vec![Action::DoNothing; 3];
        assert_eq!(action_change_count(&t), 1);
    }

    #[test]
    fn weak_spot_ratio() {
        let mut t = trace(run(&[1.0; 5], &[false; 5]), run(&[1.0; 5], &[true, false, false, false, false]));
        t.observation_len = 2;
        t.counterfactual = vec![Action::DoNothing; 5];
        t.flagged = vec![vec![0], vec![0], vec![0], vec![0], vec![]];
        let map = weak_spot_map(&t, AttackerKind::Rpa);
        assert_eq!(map, vec![Some(0.25), None]);
    }

    #[test]
    fn gradient_weak_spots_use_band() {
        let mut t = trace(run(&[1.0; 4], &[false; 4]), run(&[1.0; 4], &[true, false, false, false]));
        t.counterfactual = vec![Action::DoNothing; 4];
        t.changes = vec![vec![(0, 3.0)], vec![(0, 1.0)], vec![(0, 1.0)], vec![(0, 1.0)]];
        // mean 1.5, std ~0.866: only the first step lies outside.
        assert_eq!(weak_spot_map(&t, AttackerKind::Gepa), vec![Some(1.0)]);
    }

    fn change_set() -> impl Strategy<Value = (Vec<(u8, u8)>, Vec<u8>)> {
        proptest::collection::btree_map(0u8..8, 1u8..3, 0..5).prop_map(|m| {
            let c: Vec<(u8, u8)> = m.into_iter().collect();
            let v = c.iter().map(|(k, _)| k / 3).collect();
            (c, v)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn similarity_symmetric_and_bounded((c1, v1) in change_set(), (c2, v2) in change_set()) {
            let a = sim(&c1, &v1, &c2, &v2);
            let b = sim(&c2, &v2, &c1, &v1);
            prop_assert_eq!(a, b);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert_eq!(sim(&c1, &v1, &c1, &v1), 1.0);
            if a == 1.0 {
                prop_assert_eq!(&c1, &c2);
            }
        }
    }
}

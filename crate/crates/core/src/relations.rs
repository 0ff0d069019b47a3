//! Executable checks of the inequalities linking the Hamming, subset and
//! ranking losses (0/1 measures and their surrogates), plus a seeded fuzz
//! campaign over generated (score, label) pairs.

use std::fmt;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MlcError, Result};
use crate::loss::{
    count_pos, hamming_loss_01, ranking_loss_01, subset_loss_01, surrogate_hamming, surrogate_ranking,
    surrogate_subset, BaseLoss, LabelVector,
};
use crate::model::{oracle_split, sign_labels};

/// A verdict holds when `rhs - lhs` is at least this.
pub const SLACK_TOLERANCE: f64 = -1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Link {
    /// `L_h01(sgn) <= L_s01(sgn)`
    HammingLeSubset01,
    /// `L_s01(sgn) <= L_s`
    Subset01LeSurrogate,
    /// `L_s01(sgn) <= c L_h01(sgn)`
    Subset01LeCHamming01,
    /// `c L_h01(sgn) <= c L_h`
    CHamming01LeCSurrogate,
    /// `L_r01 <= c L_h01(sgn)`
    Ranking01LeCHamming01,
    /// `c L_h01(sgn) <= c L_h`, ranking chain
    RankChainCHamming01LeCSurrogate,
    /// `L_h01(t*) <= c L_r01`
    TstarHamming01LeCRanking01,
    /// `c L_r01 <= c L_r`
    CRanking01LeCSurrogate,
    /// `L_r01 <= (c / min(|Y+|, |Y-|)) L_h01(sgn)`
    Ranking01LeTightHamming01,
    /// `L_h01(t*) <= max(|Y+|, |Y-|) L_r01`
    TstarHamming01LeTightRanking01,
    /// `L_r01 <= L_s01(sgn)`
    Ranking01LeSubset01,
    /// `L_s01(sgn) <= L_s`, ranking chain
    RankChainSubset01LeSurrogate,
    /// `L_s01(t*) <= c^2 L_r01`
    TstarSubset01LeC2Ranking01,
    /// `c^2 L_r01 <= c^2 L_r`
    C2Ranking01LeC2Surrogate,
}

impl Link {
    pub const ALL: [Link; 14] = [
        Link::HammingLeSubset01,
        Link::Subset01LeSurrogate,
        Link::Subset01LeCHamming01,
        Link::CHamming01LeCSurrogate,
        Link::Ranking01LeCHamming01,
        Link::RankChainCHamming01LeCSurrogate,
        Link::TstarHamming01LeCRanking01,
        Link::CRanking01LeCSurrogate,
        Link::Ranking01LeTightHamming01,
        Link::TstarHamming01LeTightRanking01,
        Link::Ranking01LeSubset01,
        Link::RankChainSubset01LeSurrogate,
        Link::TstarSubset01LeC2Ranking01,
        Link::C2Ranking01LeC2Surrogate,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Link::HammingLeSubset01 => "hs.h01_le_s01",
            Link::Subset01LeSurrogate => "hs.s01_le_s",
            Link::Subset01LeCHamming01 => "hs.s01_le_c_h01",
            Link::CHamming01LeCSurrogate => "hs.c_h01_le_c_h",
            Link::Ranking01LeCHamming01 => "hr.r01_le_c_h01",
            Link::RankChainCHamming01LeCSurrogate => "hr.c_h01_le_c_h",
            Link::TstarHamming01LeCRanking01 => "hr.h01tstar_le_c_r01",
            Link::CRanking01LeCSurrogate => "hr.c_r01_le_c_r",
            Link::Ranking01LeTightHamming01 => "hr.r01_le_cmin_h01",
            Link::TstarHamming01LeTightRanking01 => "hr.h01tstar_le_max_r01",
            Link::Ranking01LeSubset01 => "sr.r01_le_s01",
            Link::RankChainSubset01LeSurrogate => "sr.s01_le_s",
            Link::TstarSubset01LeC2Ranking01 => "sr.s01tstar_le_c2_r01",
            Link::C2Ranking01LeC2Surrogate => "sr.c2_r01_le_c2_r",
        }
    }

    pub fn statement(&self) -> &'static str {
        match self {
            Link::HammingLeSubset01 => "L_h01(sgn) <= L_s01(sgn)",
            Link::Subset01LeSurrogate | Link::RankChainSubset01LeSurrogate => "L_s01(sgn) <= L_s",
            Link::Subset01LeCHamming01 => "L_s01(sgn) <= c*L_h01(sgn)",
            Link::CHamming01LeCSurrogate | Link::RankChainCHamming01LeCSurrogate => "c*L_h01(sgn) <= c*L_h",
            Link::Ranking01LeCHamming01 => "L_r01 <= c*L_h01(sgn)",
            Link::TstarHamming01LeCRanking01 => "L_h01(t*) <= c*L_r01",
            Link::CRanking01LeCSurrogate => "c*L_r01 <= c*L_r",
            Link::Ranking01LeTightHamming01 => "L_r01 <= (c/min(|Y+|,|Y-|))*L_h01(sgn)",
            Link::TstarHamming01LeTightRanking01 => "L_h01(t*) <= max(|Y+|,|Y-|)*L_r01",
            Link::Ranking01LeSubset01 => "L_r01 <= L_s01(sgn)",
            Link::TstarSubset01LeC2Ranking01 => "L_s01(t*) <= c^2*L_r01",
            Link::C2Ranking01LeC2Surrogate => "c^2*L_r01 <= c^2*L_r",
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationVerdict {
    pub link: Link,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

impl RelationVerdict {
    fn new(link: Link, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        RelationVerdict {
            link,
            lhs,
            rhs,
            slack,
            holds: slack >= SLACK_TOLERANCE,
        }
    }
}

/// Every quantity the checkers compare, computed once from `(f, y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseValues {
    pub hamming_surrogate: f64,
    pub subset_surrogate: f64,
    /// `None` for degenerate label vectors, as for every ranking quantity.
    pub ranking_surrogate: Option<f64>,
    pub hamming01_sgn: f64,
    pub subset01_sgn: f64,
    pub ranking01: Option<f64>,
    pub hamming01_tstar: f64,
    pub subset01_tstar: f64,
    pub sgn_pred: Vec<i8>,
    pub tstar_pred: Vec<i8>,
    pub n_pos: usize,
    pub n_neg: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CaseInput {
    f: Vec<f64>,
    y: LabelVector,
    base_loss: BaseLoss,
    #[serde(default)]
    allow_non_dominating: bool,
}

/// One (score vector, label vector) pair under a base loss. Serializes with
/// its derived values; deserializing recomputes them from `f`, `y` and the loss.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CaseInput")]
pub struct RelationCase {
    pub f: Vec<f64>,
    pub y: Vec<i8>,
    pub base_loss: BaseLoss,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub allow_non_dominating: bool,
    #[serde(skip_deserializing)]
    pub values: Option<CaseValues>,
}

impl TryFrom<CaseInput> for RelationCase {
    type Error = MlcError;

    fn try_from(c: CaseInput) -> Result<Self> {
        RelationCase::build(c.f, c.y.into_inner(), c.base_loss, c.allow_non_dominating)
    }
}

impl RelationCase {
    /// Rejects base losses that do not upper-bound the 0/1 loss.
    pub fn new(f: Vec<f64>, y: Vec<i8>, base_loss: BaseLoss) -> Result<Self> {
        Self::build(f, y, base_loss, false)
    }

    /// Accepts any base loss; surrogate links may then fail legitimately.
    pub fn new_allowing_any_loss(f: Vec<f64>, y: Vec<i8>, base_loss: BaseLoss) -> Result<Self> {
        Self::build(f, y, base_loss, true)
    }

    fn build(f: Vec<f64>, y: Vec<i8>, base_loss: BaseLoss, allow_non_dominating: bool) -> Result<Self> {
        if !allow_non_dominating && !base_loss.dominates_zero_one() {
            return Err(MlcError::invalid(format!(
                "base loss {} does not upper-bound the 0/1 loss; pass an explicit override",
                base_loss.kind
            )));
        }
        let values = compute_values(&f, &y, &base_loss)?;
        Ok(RelationCase {
            f,
            y,
            base_loss,
            allow_non_dominating,
            values: Some(values),
        })
    }

    pub fn values(&self) -> &CaseValues {
        self.values.as_ref().expect("constructed cases carry values")
    }

    pub fn c(&self) -> usize {
        self.y.len()
    }

    pub fn is_degenerate(&self) -> bool {
        let v = self.values();
        v.n_pos == 0 || v.n_neg == 0
    }
}

fn compute_values(f: &[f64], y: &[i8], loss: &BaseLoss) -> Result<CaseValues> {
    LabelVector::new(y.to_vec())?;
    let sgn_pred = sign_labels(f);
    let (split, _) = {
        // validates f (finite, same length) before the unchecked split
        surrogate_hamming(f, y, loss)?;
        oracle_split(f, y)
    };
    let tstar_pred = split.prediction();
    let n_pos = count_pos(y);
    Ok(CaseValues {
        hamming_surrogate: surrogate_hamming(f, y, loss)?,
        subset_surrogate: surrogate_subset(f, y, loss)?,
        ranking_surrogate: surrogate_ranking(f, y, loss)?,
        hamming01_sgn: hamming_loss_01(&sgn_pred, y)?,
        subset01_sgn: subset_loss_01(&sgn_pred, y)?,
        ranking01: ranking_loss_01(f, y)?,
        hamming01_tstar: hamming_loss_01(&tstar_pred, y)?,
        subset01_tstar: subset_loss_01(&tstar_pred, y)?,
        sgn_pred,
        tstar_pred,
        n_pos,
        n_neg: y.len() - n_pos,
    })
}

pub fn check_hamming_subset(case: &RelationCase) -> Vec<RelationVerdict> {
    let v = case.values();
    let c = case.c() as f64;
    vec![
        RelationVerdict::new(Link::HammingLeSubset01, v.hamming01_sgn, v.subset01_sgn),
        RelationVerdict::new(Link::Subset01LeSurrogate, v.subset01_sgn, v.subset_surrogate),
        RelationVerdict::new(Link::Subset01LeCHamming01, v.subset01_sgn, c * v.hamming01_sgn),
        RelationVerdict::new(Link::CHamming01LeCSurrogate, c * v.hamming01_sgn, c * v.hamming_surrogate),
    ]
}

/// `None` (skipped) for degenerate label vectors.
pub fn check_hamming_ranking(case: &RelationCase) -> Option<Vec<RelationVerdict>> {
    let v = case.values();
    let (r01, r) = (v.ranking01?, v.ranking_surrogate?);
    let c = case.c() as f64;
    let min = v.n_pos.min(v.n_neg) as f64;
    let max = v.n_pos.max(v.n_neg) as f64;
    Some(vec![
        RelationVerdict::new(Link::Ranking01LeCHamming01, r01, c * v.hamming01_sgn),
        RelationVerdict::new(
            Link::RankChainCHamming01LeCSurrogate,
            c * v.hamming01_sgn,
            c * v.hamming_surrogate,
        ),
        RelationVerdict::new(Link::TstarHamming01LeCRanking01, v.hamming01_tstar, c * r01),
        RelationVerdict::new(Link::CRanking01LeCSurrogate, c * r01, c * r),
        RelationVerdict::new(Link::Ranking01LeTightHamming01, r01, c / min * v.hamming01_sgn),
        RelationVerdict::new(Link::TstarHamming01LeTightRanking01, v.hamming01_tstar, max * r01),
    ])
}

/// `None` (skipped) for degenerate label vectors.
pub fn check_subset_ranking(case: &RelationCase) -> Option<Vec<RelationVerdict>> {
    let v = case.values();
    let (r01, r) = (v.ranking01?, v.ranking_surrogate?);
    let c2 = (case.c() * case.c()) as f64;
    Some(vec![
        RelationVerdict::new(Link::Ranking01LeSubset01, r01, v.subset01_sgn),
        RelationVerdict::new(Link::RankChainSubset01LeSurrogate, v.subset01_sgn, v.subset_surrogate),
        RelationVerdict::new(Link::TstarSubset01LeC2Ranking01, v.subset01_tstar, c2 * r01),
        RelationVerdict::new(Link::C2Ranking01LeC2Surrogate, c2 * r01, c2 * r),
    ])
}

/// All verdicts for a case, in checker order.
pub fn check_all(case: &RelationCase) -> Vec<RelationVerdict> {
    let mut out = check_hamming_subset(case);
    out.extend(check_hamming_ranking(case).into_iter().flatten());
    out.extend(check_subset_ranking(case).into_iter().flatten());
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreDist {
    /// Independent standard normal scores.
    Normal,
    /// Scores drawn from a grid around 0 and around the hinge kinks at +-1.
    NearZero,
    /// Scores drawn from two or three shared values, forcing ties.
    Ties,
    /// Each case picks one of the above uniformly.
    Mixed,
}

impl std::str::FromStr for ScoreDist {
    type Err = MlcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(ScoreDist::Normal),
            "near-zero" => Ok(ScoreDist::NearZero),
            "ties" => Ok(ScoreDist::Ties),
            "mixed" => Ok(ScoreDist::Mixed),
            _ => Err(MlcError::Unknown {
                what: "score distribution",
                name: s.to_string(),
            }),
        }
    }
}

const NEAR_ZERO_GRID: [f64; 13] = [
    -1.0 - 1e-9,
    -1.0,
    -1.0 + 1e-9,
    -1e-3,
    -1e-12,
    -0.0,
    0.0,
    1e-12,
    1e-3,
    1.0 - 1e-9,
    1.0,
    1.0 + 1e-9,
    0.5,
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub cases: u64,
    pub c_min: usize,
    pub c_max: usize,
    pub dist: ScoreDist,
    pub seed: u64,
    pub base_loss: BaseLoss,
    pub allow_non_dominating: bool,
    /// Cases per independently seeded chunk; the summary does not depend on
    /// how chunks are spread over workers.
    pub chunk_size: u64,
    /// Failing cases kept in the summary.
    pub max_failures: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            cases: 1_000_000,
            c_min: 1,
            c_max: 12,
            dist: ScoreDist::Normal,
            seed: 7,
            base_loss: BaseLoss::hinge(),
            allow_non_dominating: false,
            chunk_size: 10_000,
            max_failures: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkSummary {
    pub id: String,
    pub statement: String,
    pub checked: u64,
    pub violations: u64,
    /// `None` when the link was never checked.
    pub min_slack: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseFailure {
    pub case: RelationCase,
    pub violated: Vec<RelationVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub config: CampaignConfig,
    pub cases: u64,
    pub violations: u64,
    /// Cases skipped by the ranking checkers.
    pub degenerate_cases: u64,
    pub links: Vec<LinkSummary>,
    /// Largest observed `L_s01(t*) / L_r01` over cases with `L_r01 > 0`.
    pub max_ratio_subset_tstar_over_ranking: Option<f64>,
    pub failures: Vec<CaseFailure>,
}

#[derive(Default)]
struct ChunkStats {
    cases: u64,
    violations: u64,
    degenerate: u64,
    checked: [u64; Link::ALL.len()],
    link_violations: [u64; Link::ALL.len()],
    min_slack: [Option<f64>; Link::ALL.len()],
    max_ratio: Option<f64>,
    failures: Vec<CaseFailure>,
}

fn fmin(a: Option<f64>, b: f64) -> Option<f64> {
    Some(a.map_or(b, |a| a.min(b)))
}

fn fmax(a: Option<f64>, b: f64) -> Option<f64> {
    Some(a.map_or(b, |a| a.max(b)))
}

impl ChunkStats {
    fn record(&mut self, case: RelationCase, max_failures: usize) {
        self.cases += 1;
        if case.is_degenerate() {
            self.degenerate += 1;
        }
        let v = case.values();
        if let Some(r01) = v.ranking01 {
            if r01 > 0.0 {
                self.max_ratio = fmax(self.max_ratio, v.subset01_tstar / r01);
            }
        }
        let verdicts = check_all(&case);
        let mut violated = Vec::new();
        for verdict in verdicts {
            let k = verdict.link as usize;
            self.checked[k] += 1;
            self.min_slack[k] = fmin(self.min_slack[k], verdict.slack);
            if !verdict.holds {
                self.link_violations[k] += 1;
                violated.push(verdict);
            }
        }
        if !violated.is_empty() {
            self.violations += 1;
            if self.failures.len() < max_failures {
                self.failures.push(CaseFailure { case, violated });
            }
        }
    }

    fn merge(&mut self, other: ChunkStats, max_failures: usize) {
        self.cases += other.cases;
        self.violations += other.violations;
        self.degenerate += other.degenerate;
        for k in 0..Link::ALL.len() {
            self.checked[k] += other.checked[k];
            self.link_violations[k] += other.link_violations[k];
            if let Some(s) = other.min_slack[k] {
                self.min_slack[k] = fmin(self.min_slack[k], s);
            }
        }
        if let Some(r) = other.max_ratio {
            self.max_ratio = fmax(self.max_ratio, r);
        }
        let room = max_failures.saturating_sub(self.failures.len());
        self.failures.extend(other.failures.into_iter().take(room));
    }
}

fn draw_scores(rng: &mut ChaCha8Rng, c: usize, dist: ScoreDist) -> Vec<f64> {
    let dist = match dist {
        ScoreDist::Mixed => [ScoreDist::Normal, ScoreDist::NearZero, ScoreDist::Ties][rng.random_range(0..3)],
        d => d,
    };
    match dist {
        ScoreDist::NearZero => (0..c).map(|_| *NEAR_ZERO_GRID.choose(rng).unwrap()).collect(),
        ScoreDist::Ties => {
            let k = rng.random_range(2..=3);
            let pool: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
            (0..c).map(|_| *pool.choose(rng).unwrap()).collect()
        }
        _ => (0..c).map(|_| rng.sample(StandardNormal)).collect(),
    }
}

fn run_chunk(cfg: &CampaignConfig, chunk: u64) -> Result<ChunkStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chunk);
    let start = chunk * cfg.chunk_size;
    let count = cfg.chunk_size.min(cfg.cases - start);
    let mut stats = ChunkStats::default();
    for _ in 0..count {
        let c = rng.random_range(cfg.c_min..=cfg.c_max);
        let y: Vec<i8> = (0..c).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        let f = draw_scores(&mut rng, c, cfg.dist);
        let case = RelationCase::build(f, y, cfg.base_loss, cfg.allow_non_dominating)?;
        stats.record(case, cfg.max_failures);
    }
    Ok(stats)
}

/// Runs the campaign on the current rayon pool. Chunk `k` draws from stream
/// `k` of a ChaCha8 generator seeded with `cfg.seed`, and chunks are merged
/// in index order, so the summary is identical for any worker count.
pub fn fuzz_campaign(cfg: &CampaignConfig) -> Result<CampaignSummary> {
    if cfg.cases == 0 {
        return Err(MlcError::invalid("cases must be >= 1"));
    }
    if cfg.c_min == 0 || cfg.c_min > cfg.c_max {
        return Err(MlcError::invalid(format!("bad label-count range [{}, {}]", cfg.c_min, cfg.c_max)));
    }
    if cfg.chunk_size == 0 {
        return Err(MlcError::invalid("chunk_size must be >= 1"));
    }
    if !cfg.allow_non_dominating && !cfg.base_loss.dominates_zero_one() {
        return Err(MlcError::invalid(format!(
            "base loss {} does not upper-bound the 0/1 loss; pass an explicit override",
            cfg.base_loss.kind
        )));
    }
    let n_chunks = cfg.cases.div_ceil(cfg.chunk_size);
    let chunks: Vec<ChunkStats> = (0..n_chunks)
        .into_par_iter()
        .map(|k| run_chunk(cfg, k))
        .collect::<Result<_>>()?;
    let mut total = ChunkStats::default();
    for chunk in chunks {
        total.merge(chunk, cfg.max_failures);
    }
    let links = Link::ALL
        .iter()
        .map(|&l| {
            let k = l as usize;
            LinkSummary {
                id: l.id().to_string(),
                statement: l.statement().to_string(),
                checked: total.checked[k],
                violations: total.link_violations[k],
                min_slack: total.min_slack[k],
            }
        })
        .collect();
    Ok(CampaignSummary {
        config: cfg.clone(),
        cases: total.cases,
        violations: total.violations,
        degenerate_cases: total.degenerate,
        links,
        max_ratio_subset_tstar_over_ranking: total.max_ratio,
        failures: total.failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::BaseLossKind;

    fn case(f: &[f64], y: &[i8]) -> RelationCase {
        RelationCase::new(f.to_vec(), y.to_vec(), BaseLoss::hinge()).unwrap()
    }

    fn verdict(vs: &[RelationVerdict], link: Link) -> RelationVerdict {
        *vs.iter().find(|v| v.link == link).unwrap()
    }

    #[test]
    fn perfect_sample_has_zero_lhs() {
        let c = case(&[2.0, -2.0, 3.0], &[1, -1, 1]);
        for v in check_all(&c) {
            assert!(v.holds);
            if v.link != Link::RankChainSubset01LeSurrogate
                && v.link != Link::Subset01LeSurrogate
                && v.link != Link::CHamming01LeCSurrogate
                && v.link != Link::RankChainCHamming01LeCSurrogate
                && v.link != Link::CRanking01LeCSurrogate
                && v.link != Link::C2Ranking01LeC2Surrogate
            {
                assert_eq!(v.lhs, 0.0, "{}", v.link);
            }
            if matches!(v.link, Link::HammingLeSubset01 | Link::Subset01LeCHamming01) {
                assert_eq!(v.slack, v.rhs);
            }
        }
    }

    #[test]
    fn single_mismatch_is_tight() {
        for c in 1..=12 {
            let mut f = vec![1.5; c];
            let y = vec![1i8; c];
            f[c - 1] = -0.5;
            let vs = check_hamming_subset(&case(&f, &y));
            assert_eq!(verdict(&vs, Link::Subset01LeCHamming01).slack, 0.0, "c = {c}");
        }
    }

    #[test]
    fn worked_hamming_ranking_chain() {
        let c = case(&[0.5, 0.7, 0.1], &[1, -1, -1]);
        let v = c.values();
        assert_eq!(v.ranking01, Some(0.5));
        assert_eq!(v.sgn_pred, vec![1, 1, 1]);
        assert!((v.hamming01_sgn - 2.0 / 3.0).abs() < 1e-15);
        assert!((v.hamming01_tstar - 1.0 / 3.0).abs() < 1e-15);
        let vs = check_hamming_ranking(&c).unwrap();
        assert!(vs.iter().all(|v| v.holds));
        assert!((verdict(&vs, Link::Ranking01LeCHamming01).rhs - 2.0).abs() < 1e-15);
        assert_eq!(verdict(&vs, Link::TstarHamming01LeCRanking01).rhs, 1.5);
    }

    #[test]
    fn tight_ranking_constant_witness() {
        // c = 2, the irrelevant label outscores the relevant one and both are
        // predicted relevant: L_r01 = 1 = (2 / 1) * (1 / 2).
        let c = case(&[0.2, 0.3], &[1, -1]);
        let vs = check_hamming_ranking(&c).unwrap();
        let v = verdict(&vs, Link::Ranking01LeTightHamming01);
        assert_eq!(v.lhs, 1.0);
        assert!(v.slack.abs() < 1e-15, "{v:?}");
    }

    #[test]
    fn subset_ranking_at_c2() {
        let c = case(&[0.1, 0.4], &[1, -1]);
        let vs = check_subset_ranking(&c).unwrap();
        let v = verdict(&vs, Link::TstarSubset01LeC2Ranking01);
        assert_eq!(v.rhs, 4.0);
        assert!(v.lhs == 0.0 || v.lhs == 1.0);
    }

    #[test]
    fn degenerate_cases_skip_ranking_links() {
        let c = case(&[0.1, 0.4], &[1, 1]);
        assert!(check_hamming_ranking(&c).is_none());
        assert!(check_subset_ranking(&c).is_none());
        assert_eq!(check_all(&c).len(), 4);
    }

    #[test]
    fn non_dominating_loss_needs_override() {
        let ln = BaseLoss::new(BaseLossKind::LogisticLn);
        assert!(RelationCase::new(vec![0.0], vec![1], ln).is_err());
        assert!(RelationCase::new_allowing_any_loss(vec![0.0], vec![1], ln).is_ok());
    }

    #[test]
    fn case_json_round_trip_recomputes() {
        let c = case(&[0.123456789, -3.5e-7, 2.0], &[1, -1, -1]);
        let json = serde_json::to_string(&c).unwrap();
        let back: RelationCase = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        let bare = r#"{"f":[0.5,0.7,0.1],"y":[1,-1,-1],"base_loss":{"kind":"hinge","bound":null}}"#;
        let parsed: RelationCase = serde_json::from_str(bare).unwrap();
        assert_eq!(parsed.values().ranking01, Some(0.5));
    }

    #[test]
    fn small_campaign_is_clean_and_worker_independent() {
        let cfg = CampaignConfig {
            cases: 5_000,
            dist: ScoreDist::Mixed,
            chunk_size: 700,
            ..CampaignConfig::default()
        };
        let a = fuzz_campaign(&cfg).unwrap();
        assert_eq!(a.cases, 5_000);
        assert_eq!(a.violations, 0, "{:?}", a.failures.first());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| fuzz_campaign(&cfg)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

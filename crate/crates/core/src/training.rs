//! Beam selection strategies: exhaustive search over all codebook
//! combinations, the SISO sector sweep on the direct links, and two-stage
//! K-Best (beam-to-omni scores, then MIMO rates for the K best score
//! products).
//!
//! Across all methods ties are broken towards the lexicographically
//! smallest index tuple `(i₁, i₂, j₁, j₂)`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antenna::{Codebook, GaussianPattern};
use crate::channel::OmniChannel;
use crate::effective::{beam_score, BeamSelection, Sampling, Side, TransferCache};
use crate::error::{Error, Result};
use crate::rate::RateConfig;

/// Number of PAAs (and RF chains) per side.
pub const N_PAA: usize = 2;

/// Stage-1 scores: one vector per (side, PAA), each of length ℓ.
///
/// Vectors are ordered TX first: `q_{1,I}, q_{2,I}, …, q_{1,R}, q_{2,R}, …`;
/// Initiator vectors index TX beams and Responder vectors index RX beams,
/// so position `v` of a candidate's index tuple reads vector `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamScoreSet {
    vectors: Vec<Vec<f64>>,
}

impl BeamScoreSet {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::param("scores", "no score vectors"));
        }
        for v in &vectors {
            if v.is_empty() {
                return Err(Error::param("scores", "empty score vector"));
            }
            if let Some(x) = v.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
                return Err(Error::param("scores", format!("score {x} is not a finite non-negative value")));
            }
        }
        Ok(Self { vectors })
    }

    /// Sweeps every codebook beam on each PAA of both sides.
    pub fn measure(ch: &OmniChannel, cb: &Codebook, pat: &GaussianPattern, sampling: Sampling) -> Result<Self> {
        let mut vectors = Vec::with_capacity(2 * N_PAA);
        for side in [Side::Initiator, Side::Responder] {
            for paa in 0..N_PAA {
                let v = (0..cb.len())
                    .map(|b| beam_score(ch, side, paa, b, cb, pat, sampling))
                    .collect::<Result<Vec<f64>>>()?;
                vectors.push(v);
            }
        }
        Self::new(vectors)
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Total number of index tuples.
    pub fn combinations(&self) -> usize {
        self.vectors.iter().map(Vec::len).product()
    }

    /// Product of one entry per vector, multiplied in vector order.
    pub fn joint_score(&self, indices: &[usize]) -> f64 {
        self.vectors.iter().zip(indices).map(|(v, &i)| v[i]).product()
    }

    /// First index of the maximum of each vector.
    pub fn argmax(&self) -> Vec<usize> {
        self.vectors
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .fold((0, v[0]), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
                    .0
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub indices: Vec<usize>,
    pub joint_score: f64,
}

impl Candidate {
    /// Interprets a four-entry tuple as `(i₁, i₂, j₁, j₂)`.
    pub fn selection(&self) -> BeamSelection {
        assert_eq!(self.indices.len(), 2 * N_PAA, "candidate is not a 2×2 selection");
        BeamSelection::new([self.indices[0], self.indices[1]], [self.indices[2], self.indices[3]])
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Frontier {
    score: f64,
    ranks: Vec<usize>,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.ranks.cmp(&self.ranks))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lazy best-first enumeration of index tuples by non-increasing joint
/// score.
///
/// Works in rank space: each vector is sorted descending, the search starts
/// from the all-first-rank tuple and a popped tuple pushes its single-rank
/// successors. Multiplication is monotone, so a successor never outranks its
/// parent and the frontier maximum is always the next-best tuple. Tuples
/// that tie on score are released together, sorted by index tuple, so the
/// order within a tie group is lexicographic.
pub struct TopProducts<'a> {
    scores: &'a BeamScoreSet,
    order: Vec<Vec<usize>>,
    heap: BinaryHeap<Frontier>,
    seen: HashSet<Vec<usize>>,
    ready: VecDeque<Candidate>,
}

impl<'a> TopProducts<'a> {
    pub fn new(scores: &'a BeamScoreSet) -> Self {
        let order: Vec<Vec<usize>> = scores
            .vectors
            .iter()
            .map(|v| {
                let mut idx: Vec<usize> = (0..v.len()).collect();
                idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
                idx
            })
            .collect();
        let mut it = Self {
            scores,
            order,
            heap: BinaryHeap::new(),
            seen: HashSet::new(),
            ready: VecDeque::new(),
        };
        let start = vec![0; scores.vectors.len()];
        it.push(start);
        it
    }

    fn indices(&self, ranks: &[usize]) -> Vec<usize> {
        ranks.iter().zip(&self.order).map(|(&r, o)| o[r]).collect()
    }

    fn push(&mut self, ranks: Vec<usize>) {
        if self.seen.insert(ranks.clone()) {
            let score = self.scores.joint_score(&self.indices(&ranks));
            self.heap.push(Frontier { score, ranks });
        }
    }

    fn expand(&mut self, ranks: &[usize]) {
        for v in 0..ranks.len() {
            if ranks[v] + 1 < self.order[v].len() {
                let mut next = ranks.to_vec();
                next[v] += 1;
                self.push(next);
            }
        }
    }

    fn refill(&mut self) {
        let Some(top) = self.heap.pop() else { return };
        let score = top.score;
        let mut group = vec![top];
        let mut cursor = 0;
        // successors of tied tuples may tie as well
        while cursor < group.len() {
            let ranks = group[cursor].ranks.clone();
            self.expand(&ranks);
            cursor += 1;
            while self.heap.peek().is_some_and(|f| f.score == score) {
                group.push(self.heap.pop().expect("peeked"));
            }
        }
        let mut cands: Vec<Candidate> = group
            .into_iter()
            .map(|f| Candidate { indices: self.indices(&f.ranks), joint_score: f.score })
            .collect();
        cands.sort_by(|a, b| a.indices.cmp(&b.indices));
        self.ready.extend(cands);
    }
}

impl Iterator for TopProducts<'_> {
    type Item = Candidate;

    fn next(&mut self) -> Option<Candidate> {
        if self.ready.is_empty() {
            self.refill();
        }
        self.ready.pop_front()
    }
}

/// The `min(K, ℓ^{2N})` index tuples with the largest joint scores, sorted
/// by non-increasing score.
pub fn top_k_products(scores: &BeamScoreSet, k: usize) -> Result<Vec<Candidate>> {
    if k == 0 {
        return Err(Error::param("k", "K must be at least 1"));
    }
    Ok(TopProducts::new(scores).take(k).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Es,
    Sls,
    Kbest,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Es => "es",
            Method::Sls => "sls",
            Method::Kbest => "kbest",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "es" => Ok(Method::Es),
            "sls" => Ok(Method::Sls),
            "kbest" => Ok(Method::Kbest),
            other => Err(Error::param("methods", format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingResult {
    pub method: Method,
    /// K for K-Best, `None` otherwise.
    pub k: Option<usize>,
    pub selection: BeamSelection,
    pub rate: f64,
    pub n_siso_iter: usize,
    pub n_mimo_iter: usize,
}

impl TrainingResult {
    pub fn total_iter(&self) -> usize {
        self.n_siso_iter + self.n_mimo_iter
    }
}

/// Everything the strategies need for one channel realization, including
/// the transfer-function cache all rate evaluations go through.
pub struct TrainingContext<'a> {
    channel: &'a OmniChannel,
    codebook: &'a Codebook,
    pattern: GaussianPattern,
    sampling: Sampling,
    rate_cfg: RateConfig,
    cache: TransferCache,
}

impl<'a> TrainingContext<'a> {
    pub fn new(
        channel: &'a OmniChannel,
        codebook: &'a Codebook,
        pattern: GaussianPattern,
        sampling: Sampling,
        rate_cfg: RateConfig,
    ) -> Result<Self> {
        if rate_cfg.n_rf != N_PAA {
            return Err(Error::param("n_rf", format!("only {N_PAA} RF chains per side are modelled")));
        }
        let cache = TransferCache::build(channel, codebook, &pattern, sampling, rate_cfg.n_sub)?;
        Ok(Self { channel, codebook, pattern, sampling, rate_cfg, cache })
    }

    pub fn cache(&self) -> &TransferCache {
        &self.cache
    }

    pub fn codebook(&self) -> &Codebook {
        self.codebook
    }

    pub fn rate(&self, sel: &BeamSelection) -> f64 {
        self.cache.rate(sel, &self.rate_cfg)
    }

    pub fn beam_scores(&self) -> Result<BeamScoreSet> {
        BeamScoreSet::measure(self.channel, self.codebook, &self.pattern, self.sampling)
    }

    fn siso_iterations(&self) -> usize {
        2 * self.rate_cfg.n_rf * self.codebook.len()
    }

    fn all_combinations(&self) -> usize {
        self.codebook.len().pow(2 * self.rate_cfg.n_rf as u32)
    }

    fn selection_at(&self, flat: usize) -> BeamSelection {
        let l = self.codebook.len();
        let (j2, rest) = (flat % l, flat / l);
        let (j1, rest) = (rest % l, rest / l);
        let (i2, i1) = (rest % l, rest / l);
        BeamSelection::new([i1, i2], [j1, j2])
    }

    /// Rate of every `(i₁, i₂, j₁, j₂)`; returns the maximizer.
    pub fn exhaustive_search(&self) -> TrainingResult {
        let total = self.all_combinations();
        let (rate, flat) = (0..total)
            .into_par_iter()
            .map(|flat| (self.rate(&self.selection_at(flat)), flat))
            .reduce(|| (f64::NEG_INFINITY, usize::MAX), better);
        TrainingResult {
            method: Method::Es,
            k: None,
            selection: self.selection_at(flat),
            rate,
            n_siso_iter: 0,
            n_mimo_iter: total,
        }
    }

    /// Independent per-link sweeps on the direct links.
    pub fn siso_sls(&self) -> Result<TrainingResult> {
        let scores = self.beam_scores()?;
        let best = scores.argmax();
        let selection = BeamSelection::new([best[0], best[1]], [best[2], best[3]]);
        Ok(TrainingResult {
            method: Method::Sls,
            k: None,
            selection,
            rate: self.rate(&selection),
            n_siso_iter: self.siso_iterations(),
            n_mimo_iter: 1,
        })
    }

    pub fn k_best_training(&self, k: usize) -> Result<TrainingResult> {
        Ok(self.k_best_sweep(&[k])?.pop().expect("one K requested"))
    }

    /// K-Best for several K from a single enumeration. The candidate list
    /// for a smaller K is a prefix of the list for a larger one, so every
    /// result equals a standalone `k_best_training` call.
    pub fn k_best_sweep(&self, ks: &[usize]) -> Result<Vec<TrainingResult>> {
        if let Some(&bad) = ks.iter().find(|&&k| k == 0) {
            return Err(Error::param("k", format!("K must be at least 1, got {bad}")));
        }
        let Some(&k_max) = ks.iter().max() else {
            return Ok(Vec::new());
        };
        let scores = self.beam_scores()?;
        let candidates = top_k_products(&scores, k_max)?;
        let rated: Vec<(f64, BeamSelection)> = candidates
            .par_iter()
            .map(|c| {
                let sel = c.selection();
                (self.rate(&sel), sel)
            })
            .collect();

        // running best over the candidate prefix
        let mut prefix_best = Vec::with_capacity(rated.len());
        let mut best: Option<(f64, BeamSelection)> = None;
        for &(r, sel) in &rated {
            best = match best {
                Some((br, bs)) if br > r || (br == r && bs <= sel) => Some((br, bs)),
                _ => Some((r, sel)),
            };
            prefix_best.push(best.expect("set above"));
        }

        Ok(ks
            .iter()
            .map(|&k| {
                let evaluated = k.min(rated.len());
                let (rate, selection) = prefix_best[evaluated - 1];
                TrainingResult {
                    method: Method::Kbest,
                    k: Some(k),
                    selection,
                    rate,
                    n_siso_iter: self.siso_iterations(),
                    n_mimo_iter: evaluated,
                }
            })
            .collect())
    }
}

/// Higher rate wins; equal rates go to the smaller flat (lexicographic) index.
fn better(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    match a.0.total_cmp(&b.0) {
        Ordering::Greater => a,
        Ordering::Less => b,
        Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

//! Greedy maximum-entropy ranking and the baselines it is compared against.
//!
//! At every step the greedy sampler adds the document whose inclusion brings
//! the pair `(H(O), H(C))` closest to the utopian point `(ln|O|, ln|C|)`,
//! where `|O|` and `|C|` count the distinct organisms and chemicals of the
//! candidate pool. Running the loop to exhaustion yields a ranking of the
//! whole pool plus an entropy trace that is later analysed for knee points
//! and percent-of-maximum coverage.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{stratify, Corpus};
use crate::entropy::{utopian_distance, DistributionPair, DocProfile, EntropyPair};
use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Distances closer than this are treated as ties and resolved by doc id.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Candidate scans at least this large are scored on the rayon pool.
const PARALLEL_THRESHOLD: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSize {
    All,
    #[serde(untagged)]
    Top(usize),
}

impl SampleSize {
    fn resolve(self, available: usize) -> usize {
        match self {
            SampleSize::All => available,
            SampleSize::Top(n) => n.min(available),
        }
    }
}

impl FromStr for SampleSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(SampleSize::All);
        }
        s.parse::<usize>()
            .map(SampleSize::Top)
            .map_err(|_| Error::Usage(format!("sample size must be an integer or `all`, got `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub rank: usize,
    pub doc_id: String,
    pub stratum: String,
    pub h_organisms: f64,
    pub h_chemicals: f64,
    pub distance: f64,
}

impl TraceStep {
    pub fn entropy(&self, curve: Curve) -> f64 {
        match curve {
            Curve::Organisms => self.h_organisms,
            Curve::Chemicals => self.h_chemicals,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplerTrace {
    pub steps: Vec<TraceStep>,
}

#[derive(Serialize, Deserialize)]
struct TraceRow {
    rank: usize,
    doc_id: String,
    stratum: String,
    h_organisms: String,
    h_chemicals: String,
    distance: String,
}

impl SamplerTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn truncated(&self, n: usize) -> SamplerTrace {
        SamplerTrace {
            steps: self.steps.iter().take(n).cloned().collect(),
        }
    }

    /// Ranks are `1..=len` and every distance matches its entropy pair.
    pub fn is_consistent(&self, utopian: (f64, f64)) -> bool {
        self.steps.iter().enumerate().all(|(i, s)| {
            let d = utopian_distance(
                EntropyPair {
                    h_organisms: s.h_organisms,
                    h_chemicals: s.h_chemicals,
                },
                utopian.0,
                utopian.1,
            );
            s.rank == i + 1 && (d - s.distance).abs() < 1e-9
        })
    }

    /// Writes `rank,doc_id,stratum,h_organisms,h_chemicals,distance` with
    /// nine decimals. Several traces can be appended with `write_header`
    /// set only on the first.
    pub fn write_csv(&self, out: impl Write, write_header: bool) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .has_headers(write_header)
            .from_writer(out);
        for s in &self.steps {
            wtr.serialize(TraceRow {
                rank: s.rank,
                doc_id: s.doc_id.clone(),
                stratum: s.stratum.clone(),
                h_organisms: format!("{:.9}", s.h_organisms),
                h_chemicals: format!("{:.9}", s.h_chemicals),
                distance: format!("{:.9}", s.distance),
            })?;
        }
        wtr.flush().map_err(|e| Error::io("<trace>", e))?;
        Ok(())
    }

    /// Reads a trace file; returns one trace per stratum, keeping file order.
    pub fn read_csv(input: impl Read) -> Result<BTreeMap<String, SamplerTrace>> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut out: BTreeMap<String, SamplerTrace> = BTreeMap::new();
        for (i, row) in rdr.deserialize::<TraceRow>().enumerate() {
            let row = row?;
            let line = i as u64 + 2;
            let num = |field: &str, v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .map_err(|e| Error::malformed("trace", line, field, e.to_string()))
            };
            let step = TraceStep {
                rank: row.rank,
                h_organisms: num("h_organisms", &row.h_organisms)?,
                h_chemicals: num("h_chemicals", &row.h_chemicals)?,
                distance: num("distance", &row.distance)?,
                doc_id: row.doc_id,
                stratum: row.stratum,
            };
            out.entry(step.stratum.clone()).or_default().steps.push(step);
        }
        Ok(out)
    }
}

/// Ranked document ids with the entropy trace that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub order: Vec<String>,
    pub trace: SamplerTrace,
    pub utopian: (f64, f64),
}

struct InternedPool {
    profiles: Vec<DocProfile<u32>>,
    /// Position of each document when sorted by id; used for tie-breaks.
    id_rank: Vec<usize>,
    n_organisms: usize,
    n_chemicals: usize,
}

impl InternedPool {
    fn new(corpus: &Corpus) -> Self {
        let mut organisms: HashMap<&str, u32> = HashMap::new();
        let mut chemicals: HashMap<&str, u32> = HashMap::new();
        let mut profiles = Vec::with_capacity(corpus.len());
        for doc in &corpus.documents {
            let pairs: Vec<(u32, u32)> = doc
                .relations
                .iter()
                .map(|r| {
                    let n = organisms.len() as u32;
                    let o = *organisms.entry(r.organism.id.as_str()).or_insert(n);
                    let n = chemicals.len() as u32;
                    let c = *chemicals.entry(r.chemical.id.as_str()).or_insert(n);
                    (o, c)
                })
                .collect();
            profiles.push(DocProfile::from_pairs(pairs.iter().map(|(o, c)| (o, c))));
        }
        let mut by_id: Vec<usize> = (0..corpus.len()).collect();
        by_id.sort_by(|&a, &b| corpus.documents[a].id.cmp(&corpus.documents[b].id));
        let mut id_rank = vec![0; corpus.len()];
        for (rank, &doc) in by_id.iter().enumerate() {
            id_rank[doc] = rank;
        }
        InternedPool {
            profiles,
            id_rank,
            n_organisms: organisms.len(),
            n_chemicals: chemicals.len(),
        }
    }
}

/// Picks the minimum distance; candidates within [`TIE_TOLERANCE`] of it are
/// resolved by the smallest tie key. Independent of candidate order.
fn select_best(candidates: &[usize], distances: &[f64], tie_key: impl Fn(usize) -> usize) -> usize {
    let min = distances.iter().copied().fold(f64::INFINITY, f64::min);
    candidates
        .iter()
        .zip(distances)
        .filter(|(_, &d)| d <= min + TIE_TOLERANCE)
        .map(|(&c, _)| c)
        .min_by_key(|&c| tie_key(c))
        .expect("at least one candidate")
}

/// Greedy maximum-entropy ranking of `corpus`, stopped after `size` picks.
pub fn gme_sample(corpus: &Corpus, size: SampleSize) -> Result<Ranking> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if corpus.documents.iter().any(|d| d.relations.is_empty()) {
        return Err(Error::Data(
            "documents admitted to sampling must report at least one relation".into(),
        ));
    }
    let pool = InternedPool::new(corpus);
    let max_o = (pool.n_organisms as f64).ln();
    let max_c = (pool.n_chemicals as f64).ln();
    let steps = size.resolve(corpus.len());

    let mut sample: DistributionPair<u32> = DistributionPair::new();
    let mut remaining: Vec<usize> = (0..corpus.len()).collect();
    let mut order = Vec::with_capacity(steps);
    let mut trace = SamplerTrace::default();

    let score = |sample: &DistributionPair<u32>, i: usize| -> f64 {
        let h = sample.peek(&pool.profiles[i]).expect("documents are non-empty");
        utopian_distance(h, max_o, max_c)
    };

    for rank in 1..=steps {
        let distances: Vec<f64> = if remaining.len() >= PARALLEL_THRESHOLD {
            remaining.par_iter().map(|&i| score(&sample, i)).collect()
        } else {
            remaining.iter().map(|&i| score(&sample, i)).collect()
        };
        let best = select_best(&remaining, &distances, |i| pool.id_rank[i]);
        remaining.retain(|&i| i != best);

        sample.apply(&pool.profiles[best]);
        let h = sample.entropy()?;
        let doc = &corpus.documents[best];
        trace.steps.push(TraceStep {
            rank,
            doc_id: doc.id.clone(),
            stratum: doc.stratum.clone(),
            h_organisms: h.h_organisms,
            h_chemicals: h.h_chemicals,
            distance: utopian_distance(h, max_o, max_c),
        });
        order.push(doc.id.clone());
    }
    Ok(Ranking {
        order,
        trace,
        utopian: (max_o, max_c),
    })
}

/// Runs the greedy ranking inside every stratum and keeps the top
/// `n_per_stratum` documents of each.
pub fn stratified_gme(corpus: &Corpus, n_per_stratum: usize) -> Result<BTreeMap<String, Ranking>> {
    stratified_gme_with_depth(corpus, n_per_stratum, SampleSize::Top(n_per_stratum))
}

/// Like [`stratified_gme`] but ranks each stratum to `depth` (at least
/// `n_per_stratum`) so that the returned trace can be analysed beyond the
/// retained documents.
pub fn stratified_gme_with_depth(
    corpus: &Corpus,
    n_per_stratum: usize,
    depth: SampleSize,
) -> Result<BTreeMap<String, Ranking>> {
    if n_per_stratum == 0 {
        return Err(Error::Usage("n_per_stratum must be at least 1".into()));
    }
    let depth = match depth {
        SampleSize::Top(d) if d < n_per_stratum => SampleSize::Top(n_per_stratum),
        other => other,
    };
    let mut out = BTreeMap::new();
    for (stratum, part) in stratify(corpus) {
        let mut ranking = gme_sample(&part, depth)?;
        ranking.order.truncate(n_per_stratum);
        out.insert(stratum, ranking);
    }
    Ok(out)
}

/// Uniform sample without replacement inside each stratum, reproducible
/// from `seed`. Ids are returned in corpus order.
pub fn random_sample(corpus: &Corpus, n_per_stratum: usize, seed: u64) -> BTreeMap<String, Vec<String>> {
    stratify(corpus)
        .into_iter()
        .map(|(stratum, part)| {
            let mut rng = rng_for(seed, &["random", &stratum]);
            let amount = n_per_stratum.min(part.len());
            let mut picked = index::sample(&mut rng, part.len(), amount).into_vec();
            picked.sort_unstable();
            let ids = picked
                .into_iter()
                .map(|i| part.documents[i].id.clone())
                .collect();
            (stratum, ids)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopCriterion {
    Organisms,
    Chemicals,
    Relations,
}

/// Documents with the most distinct organisms, chemicals or relations per
/// stratum; ties by ascending doc id.
pub fn top_entity_sample(
    corpus: &Corpus,
    n_per_stratum: usize,
    criterion: TopCriterion,
) -> BTreeMap<String, Vec<String>> {
    stratify(corpus)
        .into_iter()
        .map(|(stratum, part)| {
            let mut scored: Vec<(usize, &str)> = part
                .documents
                .iter()
                .map(|d| {
                    let count = match criterion {
                        TopCriterion::Organisms => d.distinct_organisms(),
                        TopCriterion::Chemicals => d.distinct_chemicals(),
                        TopCriterion::Relations => d.n_relations(),
                    };
                    (count, d.id.as_str())
                })
                .collect();
            scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
            let ids = scored
                .into_iter()
                .take(n_per_stratum)
                .map(|(_, id)| id.to_string())
                .collect();
            (stratum, ids)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    Gme,
    Random,
    TopOrganisms,
    TopChemicals,
    TopRelations,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "gme" => Ok(Strategy::Gme),
            "random" => Ok(Strategy::Random),
            "top_organisms" => Ok(Strategy::TopOrganisms),
            "top_chemicals" => Ok(Strategy::TopChemicals),
            "top_relations" => Ok(Strategy::TopRelations),
            other => Err(Error::Usage(format!("unknown sampling strategy `{other}`"))),
        }
    }
}

/// Per-stratum selection plus, for the greedy strategy, its traces.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StratifiedSample {
    pub ids: BTreeMap<String, Vec<String>>,
    pub traces: BTreeMap<String, SamplerTrace>,
}

impl StratifiedSample {
    /// Ids stratum by stratum, each stratum in selection order.
    pub fn all_ids(&self) -> Vec<String> {
        self.ids.values().flatten().cloned().collect()
    }
}

/// Draws `n_per_stratum` documents per stratum with `strategy`. For the
/// greedy strategy the trace is extended to `trace_depth` steps.
pub fn draw_sample(
    corpus: &Corpus,
    strategy: Strategy,
    n_per_stratum: usize,
    seed: u64,
    trace_depth: SampleSize,
) -> Result<StratifiedSample> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if n_per_stratum == 0 {
        return Err(Error::Usage("n_per_stratum must be at least 1".into()));
    }
    let ids = match strategy {
        Strategy::Gme => {
            let rankings = stratified_gme_with_depth(corpus, n_per_stratum, trace_depth)?;
            let mut out = StratifiedSample::default();
            for (stratum, r) in rankings {
                out.ids.insert(stratum.clone(), r.order);
                out.traces.insert(stratum, r.trace);
            }
            return Ok(out);
        }
        Strategy::Random => random_sample(corpus, n_per_stratum, seed),
        Strategy::TopOrganisms => top_entity_sample(corpus, n_per_stratum, TopCriterion::Organisms),
        Strategy::TopChemicals => top_entity_sample(corpus, n_per_stratum, TopCriterion::Chemicals),
        Strategy::TopRelations => top_entity_sample(corpus, n_per_stratum, TopCriterion::Relations),
    };
    Ok(StratifiedSample {
        ids,
        traces: BTreeMap::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    Organisms,
    Chemicals,
}

impl Curve {
    pub const ALL: [Curve; 2] = [Curve::Organisms, Curve::Chemicals];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KneeReport {
    pub rank: usize,
    pub entropy_at_knee: f64,
    pub curve: Curve,
    pub sensitivity: f64,
}

/// Largest perpendicular distance above the chord joining the first and
/// last points, after min-max normalisation of both axes. Returns the
/// zero-based index of the knee.
pub fn knee_index(xs: &[f64], ys: &[f64]) -> Result<usize> {
    if xs.len() != ys.len() {
        return Err(Error::Usage("knee detection needs as many x as y values".into()));
    }
    if xs.len() < 3 {
        return Err(Error::Usage("knee detection needs at least three points".into()));
    }
    let (x_min, x_max) = min_max(xs);
    let (y_min, y_max) = min_max(ys);
    if x_max - x_min <= 0.0 || y_max - y_min <= 0.0 {
        return Err(Error::NoKnee("curve is flat".into()));
    }
    let nx: Vec<f64> = xs.iter().map(|x| (x - x_min) / (x_max - x_min)).collect();
    let ny: Vec<f64> = ys.iter().map(|y| (y - y_min) / (y_max - y_min)).collect();
    let last = nx.len() - 1;
    let (dx, dy) = (nx[last] - nx[0], ny[last] - ny[0]);
    let chord = dx.hypot(dy);

    let mut best: Option<(usize, f64)> = None;
    for i in 1..last {
        let d = (dx * (ny[i] - ny[0]) - dy * (nx[i] - nx[0])) / chord;
        if best.is_none_or(|(_, bd)| d > bd) {
            best = Some((i, d));
        }
    }
    match best {
        Some((i, d)) if d > 1e-9 => Ok(i),
        _ => Err(Error::NoKnee("no point lies above the endpoint chord".into())),
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Knee of the rank/entropy curve. `sensitivity` is recorded but the raw
/// trace is used without smoothing.
pub fn detect_knee(trace: &SamplerTrace, curve: Curve, sensitivity: f64) -> Result<KneeReport> {
    let xs: Vec<f64> = trace.steps.iter().map(|s| s.rank as f64).collect();
    let ys: Vec<f64> = trace.steps.iter().map(|s| s.entropy(curve)).collect();
    let i = knee_index(&xs, &ys)?;
    Ok(KneeReport {
        rank: trace.steps[i].rank,
        entropy_at_knee: ys[i],
        curve,
        sensitivity,
    })
}

/// `100 · H(at_rank) / max H` over the whole trace.
pub fn percent_of_max(trace: &SamplerTrace, at_rank: usize, curve: Curve) -> Result<f64> {
    if at_rank == 0 || at_rank > trace.len() {
        return Err(Error::Usage(format!(
            "rank {at_rank} outside trace of length {}",
            trace.len()
        )));
    }
    let max = trace
        .steps
        .iter()
        .map(|s| s.entropy(curve))
        .fold(f64::NEG_INFINITY, f64::max);
    if max <= 0.0 {
        return Err(Error::Data("maximum entropy of the trace is zero".into()));
    }
    Ok(100.0 * trace.steps[at_rank - 1].entropy(curve) / max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxEntropy {
    pub value: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveAnalysis {
    pub max: MaxEntropy,
    /// Keyed by rank; ranks beyond the trace are omitted.
    pub percent_of_max: BTreeMap<usize, f64>,
    pub knee: Option<KneeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumAnalysis {
    pub length: usize,
    pub organisms: CurveAnalysis,
    pub chemicals: CurveAnalysis,
}

/// Per-stratum maxima, percent-of-max table and optional knee points.
pub fn analyze_traces(
    traces: &BTreeMap<String, SamplerTrace>,
    ranks: &[usize],
    knee_sensitivity: Option<f64>,
) -> Result<BTreeMap<String, StratumAnalysis>> {
    let mut out = BTreeMap::new();
    for (stratum, trace) in traces {
        if trace.is_empty() {
            continue;
        }
        let analyse = |curve: Curve| -> Result<CurveAnalysis> {
            let (rank, value) = trace
                .steps
                .iter()
                .map(|s| (s.rank, s.entropy(curve)))
                .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
            let mut table = BTreeMap::new();
            for &r in ranks {
                if r >= 1 && r <= trace.len() && value > 0.0 {
                    table.insert(r, percent_of_max(trace, r, curve)?);
                }
            }
            let knee = match knee_sensitivity {
                Some(s) if trace.len() >= 3 => match detect_knee(trace, curve, s) {
                    Ok(k) => Some(k),
                    Err(Error::NoKnee(_)) => None,
                    Err(e) => return Err(e),
                },
                _ => None,
            };
            Ok(CurveAnalysis {
                max: MaxEntropy { value, rank },
                percent_of_max: table,
                knee,
            })
        };
        out.insert(
            stratum.clone(),
            StratumAnalysis {
                length: trace.len(),
                organisms: analyse(Curve::Organisms)?,
                chemicals: analyse(Curve::Chemicals)?,
            },
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_doc;

    fn toy() -> Corpus {
        Corpus::new(vec![
            test_doc("d1", "F", &[("o1", "c1")]),
            test_doc("d2", "F", &[("o2", "c2"), ("o3", "c3")]),
            test_doc("d3", "F", &[("o1", "c2")]),
        ])
    }

    #[test]
    fn toy_order() {
        let r = gme_sample(&toy(), SampleSize::All).unwrap();
        assert_eq!(r.order, ["d2", "d1", "d3"]);
        assert!(r.trace.is_consistent(r.utopian));
        assert!(r.trace.steps[1].distance.abs() < 1e-12);
    }

    #[test]
    fn single_document() {
        let c = Corpus::new(vec![test_doc("only", "F", &[("o", "c")])]);
        let r = gme_sample(&c, SampleSize::All).unwrap();
        assert_eq!(r.order, ["only"]);
        assert_eq!(r.trace.len(), 1);
    }

    #[test]
    fn empty_corpus_errors() {
        assert!(matches!(
            gme_sample(&Corpus::default(), SampleSize::All),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn ties_go_to_smallest_id() {
        let c = Corpus::new(vec![
            test_doc("b", "F", &[("o1", "c1")]),
            test_doc("a", "F", &[("o2", "c2")]),
        ]);
        assert_eq!(gme_sample(&c, SampleSize::All).unwrap().order, ["a", "b"]);
    }

    #[test]
    fn stratified_caps_and_disjoint() {
        let c = Corpus::new(vec![
            test_doc("a", "F", &[("o1", "c1")]),
            test_doc("b", "F", &[("o2", "c2")]),
            test_doc("c", "M", &[("o3", "c3")]),
        ]);
        let out = stratified_gme(&c, 5).unwrap();
        assert_eq!(out["F"].order.len(), 2);
        assert_eq!(out["M"].order, ["c"]);
        let out = stratified_gme_with_depth(&c, 1, SampleSize::All).unwrap();
        assert_eq!(out["F"].order.len(), 1);
        assert_eq!(out["F"].trace.len(), 2);
    }

    #[test]
    fn random_is_seeded() {
        let docs: Vec<_> = (0..30)
            .map(|i| test_doc(&format!("d{i:02}"), if i % 2 == 0 { "F" } else { "M" }, &[("o", "c")]))
            .collect();
        let c = Corpus::new(docs);
        let a = random_sample(&c, 5, 42);
        assert_eq!(a, random_sample(&c, 5, 42));
        assert_ne!(a, random_sample(&c, 5, 43));
        assert_eq!(a["F"].len(), 5);
        assert_eq!(random_sample(&c, 100, 1)["M"].len(), 15);
    }

    #[test]
    fn top_organisms_and_tie_rule() {
        let c = Corpus::new(vec![
            test_doc("x", "F", &[("o1", "c"), ("o2", "c"), ("o3", "c")]),
            test_doc("y", "F", &[("o1", "c")]),
            test_doc("z", "F", &[("o1", "c"), ("o2", "c")]),
        ]);
        assert_eq!(top_entity_sample(&c, 2, TopCriterion::Organisms)["F"], ["x", "z"]);
        let eq = Corpus::new(vec![
            test_doc("b", "F", &[("o", "c1"), ("o", "c2")]),
            test_doc("a", "F", &[("o", "c3"), ("o", "c4")]),
        ]);
        assert_eq!(top_entity_sample(&eq, 2, TopCriterion::Relations)["F"], ["a", "b"]);
    }

    fn trace_of(ys: &[f64]) -> SamplerTrace {
        SamplerTrace {
            steps: ys
                .iter()
                .enumerate()
                .map(|(i, &y)| TraceStep {
                    rank: i + 1,
                    doc_id: format!("d{i}"),
                    stratum: "F".into(),
                    h_organisms: y,
                    h_chemicals: y,
                    distance: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn straight_line_has_no_knee() {
        let t = trace_of(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(matches!(detect_knee(&t, Curve::Organisms, 1.0), Err(Error::NoKnee(_))));
    }

    #[test]
    fn short_trace_is_rejected() {
        let t = trace_of(&[1.0, 2.0]);
        assert!(matches!(detect_knee(&t, Curve::Organisms, 1.0), Err(Error::Usage(_))));
    }

    #[test]
    fn percent_of_max_basics() {
        let t = trace_of(&[1.0, 2.0, 4.0, 3.0]);
        assert_eq!(percent_of_max(&t, 3, Curve::Chemicals).unwrap(), 100.0);
        assert_eq!(percent_of_max(&t, 1, Curve::Chemicals).unwrap(), 25.0);
        assert!(percent_of_max(&t, 5, Curve::Chemicals).is_err());
        assert!(percent_of_max(&trace_of(&[0.0, 0.0]), 1, Curve::Organisms).is_err());
    }

    #[test]
    fn trace_csv_round_trip() {
        let r = gme_sample(&toy(), SampleSize::All).unwrap();
        let mut buf = Vec::new();
        r.trace.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("rank,doc_id,stratum,h_organisms,h_chemicals,distance\n"));
        assert!(text.lines().nth(1).unwrap().ends_with(&format!("{:.9}", r.trace.steps[0].distance)));
        let back = SamplerTrace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back["F"].len(), 3);
        assert_eq!(back["F"].steps[0].doc_id, "d2");
    }

    #[test]
    fn sample_size_parsing() {
        assert_eq!("all".parse::<SampleSize>().unwrap(), SampleSize::All);
        assert_eq!("12".parse::<SampleSize>().unwrap(), SampleSize::Top(12));
        assert!("x".parse::<SampleSize>().is_err());
    }
}

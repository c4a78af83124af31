//! Desk-scale text study: n-gram presence features, marginal I-score gate on
//! the training split, and a classifier trained on gated, random and full
//! feature sets.

use std::fmt;
use std::io::Write;

use ndarray::Array2;
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index::sample;
use rand::Rng;

use crate::dataset::{Document, LabeledDataset, TextCorpus};
use crate::error::{Error, Result};
use crate::metrics::auc;
use crate::neural::ffn::{predict_ffn, train_ffn};
use crate::neural::rnn::{predict_rnn, train_rnn, RnnGates, RnnParams, SequenceSet};
use crate::neural::{LearningCurve, TrainConfig};
use crate::screening::{gate_keep_count, gate_threshold, rank_marginal, GateMask};
use crate::seed;
use crate::textfeat::{build_vocab, concat_grams, encode_corpus, vectorize_encoded, VectorizeConfig};

/// Synthetic two-class corpus: Zipf-distributed filler words with class cue
/// bigrams spliced in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeskCorpusConfig {
    pub documents: usize,
    pub filler_words: usize,
    pub zipf_exponent: f64,
    pub doc_len: usize,
    /// Distinct cue bigrams per class.
    pub cues_per_class: usize,
    /// Cue bigrams spliced into each document.
    pub cues_per_doc: usize,
    /// Probability that a spliced cue comes from the other class.
    pub cue_noise: f64,
    pub seed: u64,
}

impl Default for DeskCorpusConfig {
    fn default() -> Self {
        Self {
            documents: 4000,
            filler_words: 300,
            zipf_exponent: 1.0,
            doc_len: 60,
            cues_per_class: 20,
            cues_per_doc: 2,
            cue_noise: 0.3,
            seed: 0,
        }
    }
}

/// Balanced corpus: even documents are positive, odd ones negative.
pub fn desk_corpus(cfg: &DeskCorpusConfig) -> Result<TextCorpus> {
    if cfg.documents < 2 || cfg.filler_words == 0 || cfg.doc_len == 0 || cfg.cues_per_class == 0 {
        return Err(Error::InvalidArgument("desk corpus needs documents, words and cues".into()));
    }
    if !(0.0..=1.0).contains(&cfg.cue_noise) {
        return Err(Error::InvalidArgument(format!("cue_noise must lie in [0, 1], got {}", cfg.cue_noise)));
    }
    let weights: Vec<f64> = (1..=cfg.filler_words)
        .map(|r| (r as f64).powf(-cfg.zipf_exponent))
        .collect();
    let zipf = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = seed::rng(seed::derive(cfg.seed, "desk-corpus"));
    let mut docs = Vec::with_capacity(cfg.documents);
    for d in 0..cfg.documents {
        let label = u8::from(d % 2 == 0);
        let mut words: Vec<String> = (0..cfg.doc_len).map(|_| format!("w{}", zipf.sample(&mut rng))).collect();
        for _ in 0..cfg.cues_per_doc {
            let class = if rng.gen_bool(cfg.cue_noise) { 1 - label } else { label };
            let tag = if class == 1 { "pos" } else { "neg" };
            let c = rng.gen_range(0..cfg.cues_per_class);
            let at = rng.gen_range(0..=words.len());
            words.splice(at..at, [format!("{tag}a{c}"), format!("{tag}b{c}")]);
        }
        docs.push(Document {
            text: words.join(" "),
            label,
        });
    }
    TextCorpus::new(docs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classifier {
    Ffn,
    /// Recurrent model reading the selected features as a sequence of scalars.
    Rnn,
}

impl Classifier {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ffn" => Ok(Self::Ffn),
            "rnn" => Ok(Self::Rnn),
            other => Err(Error::InvalidArgument(format!("unknown classifier `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextStudyConfig {
    pub orders: Vec<usize>,
    /// Features kept per n-gram order.
    pub max_features: usize,
    pub vocab_size: usize,
    pub max_tokens: usize,
    pub top_fraction: f64,
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub classifier: Classifier,
    pub hidden: usize,
    pub train: TrainConfig,
    pub seed: u64,
}

impl Default for TextStudyConfig {
    fn default() -> Self {
        Self {
            orders: vec![2],
            max_features: 400,
            vocab_size: 5000,
            max_tokens: crate::textfeat::DEFAULT_MAX_TOKENS,
            top_fraction: 0.1,
            train_fraction: 0.6,
            val_fraction: 0.2,
            classifier: Classifier::Ffn,
            hidden: 8,
            train: TrainConfig {
                eta: 2.0,
                epochs: 200,
                seed: 0,
                init_scale: 0.1,
            },
            seed: 0,
        }
    }
}

impl TextStudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() {
            return Err(Error::InvalidArgument("at least one n-gram order is required".into()));
        }
        let test = 1.0 - self.train_fraction - self.val_fraction;
        if !(self.train_fraction > 0.0 && self.val_fraction > 0.0 && test > 0.0) {
            return Err(Error::InvalidArgument(
                "train and validation fractions must be positive and leave a test share".into(),
            ));
        }
        if self.hidden == 0 {
            return Err(Error::InvalidArgument("hidden layer must have at least one unit".into()));
        }
        self.train.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmKind {
    Gated,
    Random,
    Full,
}

impl fmt::Display for ArmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArmKind::Gated => "gated",
            ArmKind::Random => "random",
            ArmKind::Full => "full",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmResult {
    pub kind: ArmKind,
    pub mask: GateMask,
    pub test_auc: f64,
    pub curve: LearningCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextReport {
    pub feature_names: Vec<String>,
    /// Marginal training-split ranking, best first.
    pub ranking: Vec<(usize, f64)>,
    pub arms: Vec<ArmResult>,
}

impl TextReport {
    pub fn arm(&self, kind: ArmKind) -> &ArmResult {
        self.arms.iter().find(|a| a.kind == kind).expect("all arms are run")
    }

    /// `arm,features,test_auc,best_val_epoch`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "arm,features,test_auc,best_val_epoch")?;
        for a in &self.arms {
            let best = a.curve.best_val_epoch().map_or_else(|| "NA".to_owned(), |e| e.to_string());
            writeln!(w, "{},{},{:.6},{best}", a.kind, a.mask.kept(), a.test_auc)?;
        }
        Ok(())
    }

    pub fn write_features<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let gate = &self.arm(ArmKind::Gated).mask;
        writeln!(w, "feature,iscore,gated")?;
        for &(j, s) in &self.ranking {
            writeln!(w, "{},{s},{}", self.feature_names[j], u8::from(gate.passes(j)))?;
        }
        Ok(())
    }
}

fn random_mask(scores: &[f64], keep: usize, seed: u64) -> Result<GateMask> {
    let mut mask = vec![false; scores.len()];
    for i in sample(&mut seed::rng(seed), scores.len(), keep) {
        mask[i] = true;
    }
    GateMask::from_mask(scores.to_vec(), mask)
}

fn kept_sequences(ds: &LabeledDataset<f64>, mask: &GateMask) -> SequenceSet {
    let kept = mask.kept_indices();
    let sequences = (0..ds.n())
        .map(|i| Array2::from_shape_fn((kept.len(), 1), |(t, _)| ds.column(kept[t])[i]))
        .collect();
    SequenceSet {
        sequences,
        labels: ds.response().to_vec(),
    }
}

fn run_arm(
    kind: ArmKind,
    mask: GateMask,
    parts: &[LabeledDataset<f64>; 3],
    cfg: &TextStudyConfig,
) -> Result<ArmResult> {
    let [train, val, test] = parts;
    let tcfg = TrainConfig {
        seed: seed::derive(cfg.seed, "text-init"),
        ..cfg.train
    };
    let (test_pred, curve) = match cfg.classifier {
        Classifier::Ffn => {
            let (p, curve) = train_ffn(train, val, cfg.hidden, &tcfg, Some(&mask))?;
            (predict_ffn(&p, test, Some(&mask))?, curve)
        }
        Classifier::Rnn => {
            if mask.kept() == 0 {
                return Err(Error::InvalidArgument("recurrent arm needs at least one feature".into()));
            }
            let p0 = RnnParams::random(cfg.hidden, 1, tcfg.init_scale, tcfg.seed);
            let (tr, va, te) = (kept_sequences(train, &mask), kept_sequences(val, &mask), kept_sequences(test, &mask));
            let (p, curve) = train_rnn(&p0, &tr, &va, &tcfg, None)?;
            (predict_rnn(&p, &te, &RnnGates::default())?, curve)
        }
    };
    Ok(ArmResult {
        kind,
        mask,
        test_auc: auc(test.response(), &test_pred)?,
        curve,
    })
}

/// Vectorize, rank on the training split, gate, and train the three arms.
pub fn run_text_experiment(corpus: &TextCorpus, cfg: &TextStudyConfig) -> Result<TextReport> {
    cfg.validate()?;
    let vocab = build_vocab(corpus, cfg.vocab_size)?;
    let encoded = encode_corpus(corpus, &vocab, cfg.max_tokens);
    let labels = corpus.labels();
    let sets = cfg
        .orders
        .iter()
        .map(|&n| {
            let v = VectorizeConfig {
                n,
                max_features: cfg.max_features,
                max_tokens: cfg.max_tokens,
            };
            vectorize_encoded(&encoded, &labels, &vocab, &v)
        })
        .collect::<Result<Vec<_>>>()?;
    let ds = concat_grams(&sets)?;

    let mut order: Vec<usize> = (0..ds.n()).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut seed::rng(seed::derive(cfg.seed, "text-split")));
    let n_train = (ds.n() as f64 * cfg.train_fraction).floor() as usize;
    let n_val = (ds.n() as f64 * cfg.val_fraction).floor() as usize;
    if n_train == 0 || n_val == 0 || n_train + n_val >= ds.n() {
        return Err(Error::InvalidArgument(format!("corpus of {} documents is too small to split", ds.n())));
    }
    let parts = [
        ds.select_rows(&order[..n_train]),
        ds.select_rows(&order[n_train..n_train + n_val]),
        ds.select_rows(&order[n_train + n_val..]),
    ];

    let ranking = rank_marginal(&parts[0])?;
    let mut scores = vec![0.0; ds.p()];
    for &(j, s) in &ranking {
        scores[j] = s;
    }
    let gated = gate_threshold(&scores, cfg.top_fraction)?;
    let keep = gate_keep_count(scores.len(), cfg.top_fraction);
    let random = random_mask(&scores, keep, seed::derive(cfg.seed, "text-random"))?;
    let full = GateMask::from_mask(scores.clone(), vec![true; scores.len()])?;

    let arms = [(ArmKind::Gated, gated), (ArmKind::Random, random), (ArmKind::Full, full)]
        .into_iter()
        .map(|(k, m)| run_arm(k, m, &parts, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(TextReport {
        feature_names: ds.column_names().to_vec(),
        ranking,
        arms,
    })
}

use std::io::Write;
use std::path::PathBuf;

use iscore::dagger::{fit_dagger, transform_dagger};
use iscore::dataset::{load_tabular, load_text_corpus, save_tabular, LabeledDataset, SplitSpec};
use iscore::influence::subset_iscore;
use iscore::metrics::{basic_metrics, confusion, roc_auc};
use iscore::neural::{predict_ffn, predict_rnn, train_ffn, train_rnn, RnnGates, RnnParams, SequenceSet, TrainConfig};
use iscore::partition::distinct_count;
use iscore::report::write_file;
use iscore::screening::{
    apply_rule, bda_search, discretize, gate_threshold, join_names, rank_marginal, write_ranking, write_returns,
    write_steps, BdaConfig, GateMask,
};
use iscore::seed;
use iscore::simlab::{desk_corpus, run_text_experiment, Classifier, DeskCorpusConfig, TextStudyConfig, ToyConfig};
use log::info;

use crate::config::{self, RunConfig};
use crate::failure::Failure;
use crate::{Cli, Command, DataArgs, NetArgs};

struct Ctx {
    out: PathBuf,
    seed: u64,
}

impl Ctx {
    fn write(&self, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), Failure> {
        let path = self.out.join(name);
        write_file(&path, body)?;
        info!("wrote {}", path.display());
        Ok(())
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::usage(format!("--{flag} is required (on the command line or in the config file)")))
}

fn load(data: DataArgs, cfg_path: Option<PathBuf>, cfg_no_header: Option<bool>) -> Result<LabeledDataset<f64>, Failure> {
    let path = required(data.data.or(cfg_path), "data")?;
    let no_header = data.no_header || cfg_no_header.unwrap_or(false);
    Ok(load_tabular(&path, !no_header)?)
}

fn train_config(net: &NetArgs, hidden: Option<usize>, eta: Option<f64>, epochs: Option<usize>, init: Option<f64>) -> (Option<usize>, TrainConfig) {
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        eta: net.eta.or(eta).unwrap_or(d.eta),
        epochs: net.epochs.or(epochs).unwrap_or(d.epochs),
        seed: d.seed,
        init_scale: net.init_scale.or(init).unwrap_or(d.init_scale),
    };
    (net.hidden.or(hidden), cfg)
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    let cfg: RunConfig = config::load(cli.config.as_deref())?;
    let ctx = Ctx {
        out: cli.out.or(cfg.global.out.clone()).unwrap_or_else(|| PathBuf::from("out")),
        seed: cli.seed.or(cfg.global.seed).unwrap_or(0),
    };
    match cli.command {
        Command::Iscore { data, subset } => {
            let c = cfg.iscore;
            let ds = load(data, c.data, c.no_header)?;
            cmd_iscore(&ctx, &ds, subset.or(c.columns))
        }
        Command::Discretize { data, columns } => {
            let c = cfg.discretize;
            let ds = load(data, c.data, c.no_header)?;
            cmd_discretize(&ctx, &ds, columns.or(c.columns))
        }
        Command::Bda { data, k, draws } => {
            let c = cfg.bda;
            let ds = load(data, c.data, c.no_header)?;
            let bda = BdaConfig {
                subset_size: k.or(c.k).unwrap_or(3),
                num_draws: draws.or(c.draws).unwrap_or(50),
                seed: seed::derive(ctx.seed, "bda"),
            };
            cmd_bda(&ctx, &ds, &bda)
        }
        Command::Dagger {
            data,
            columns,
            train_rows,
            apply,
        } => {
            let c = cfg.dagger;
            let no_header = data.no_header || c.no_header.unwrap_or(false);
            let ds = load(data, c.data, c.no_header)?;
            let columns = required(columns.or(c.columns), "columns")?;
            let apply = apply.or(c.apply);
            let extra = apply.map(|p| load_tabular(&p, !no_header)).transpose()?;
            cmd_dagger(&ctx, &ds, &columns, train_rows.or(c.train_rows), extra.as_ref())
        }
        Command::Toy { n, p, reps, epsilon } => {
            let c = cfg.toy;
            let d = ToyConfig::default();
            let toy = ToyConfig {
                n: n.or(c.n).unwrap_or(d.n),
                p: p.or(c.p).unwrap_or(d.p),
                reps: reps.or(c.reps).unwrap_or(d.reps),
                epsilon: epsilon.or(c.epsilon).unwrap_or(d.epsilon),
                seed: seed::derive(ctx.seed, "toy"),
            };
            let report = iscore::simlab::run_toy_experiment(&toy)?;
            ctx.write("toy_report.csv", |w| report.write_csv(w))
        }
        Command::Text {
            corpus,
            desk_docs,
            orders,
            max_features,
            vocab_size,
            top_fraction,
            classifier,
            net,
        } => {
            let c = cfg.text;
            let corpus_path = corpus.or(c.corpus);
            let corpus = match corpus_path {
                Some(p) => load_text_corpus(&p)?,
                None => desk_corpus(&DeskCorpusConfig {
                    documents: desk_docs.or(c.desk_docs).unwrap_or(DeskCorpusConfig::default().documents),
                    seed: seed::derive(ctx.seed, "desk"),
                    ..DeskCorpusConfig::default()
                })?,
            };
            let d = TextStudyConfig::default();
            let (hidden, mut train) = train_config(&net, c.hidden, c.eta, c.epochs, c.init_scale);
            // Unset training keys fall back to the study defaults, not the generic ones.
            if net.eta.or(c.eta).is_none() {
                train.eta = d.train.eta;
            }
            if net.epochs.or(c.epochs).is_none() {
                train.epochs = d.train.epochs;
            }
            let classifier = match classifier.or(c.classifier) {
                Some(s) => Classifier::parse(&s)?,
                None => d.classifier,
            };
            let study = TextStudyConfig {
                orders: orders.or(c.orders).unwrap_or(d.orders.clone()),
                max_features: max_features.or(c.max_features).unwrap_or(d.max_features),
                vocab_size: vocab_size.or(c.vocab_size).unwrap_or(d.vocab_size),
                top_fraction: top_fraction.or(c.top_fraction).unwrap_or(d.top_fraction),
                classifier,
                hidden: hidden.unwrap_or(d.hidden),
                train,
                seed: seed::derive(ctx.seed, "text"),
                ..d
            };
            cmd_text(&ctx, &corpus, &study)
        }
        Command::Train {
            data,
            model,
            train_fraction,
            top_fraction,
            net,
        } => {
            let c = cfg.train;
            let ds = load(data, c.data, c.no_header)?;
            let (hidden, tcfg) = train_config(&net, c.hidden, c.eta, c.epochs, c.init_scale);
            let model = model.or(c.model).unwrap_or_else(|| "ffn".to_owned());
            let classifier = Classifier::parse(&model)?;
            let opts = TrainOptions {
                classifier,
                hidden: hidden.unwrap_or(8),
                train_fraction: train_fraction.or(c.train_fraction).unwrap_or(0.6),
                top_fraction: top_fraction.or(c.top_fraction),
                train: TrainConfig {
                    seed: seed::derive(ctx.seed, "train-init"),
                    ..tcfg
                },
            };
            cmd_train(&ctx, &ds, &opts)
        }
    }
}

fn cmd_iscore(ctx: &Ctx, ds: &LabeledDataset<f64>, subset: Option<Vec<String>>) -> Result<(), Failure> {
    let ranking = rank_marginal(ds)?;
    ctx.write("iscore.csv", |w| write_ranking(ds.column_names(), &ranking, w))?;
    if let Some(names) = subset {
        let cols = ds.resolve(&names)?;
        let r = subset_iscore(ds, &cols)?;
        println!("{}: {}", join_names(ds.column_names(), &cols), r.normalized);
        ctx.write("subset.csv", |w| {
            writeln!(w, "subset,raw,normalized,cells")?;
            writeln!(w, "{},{},{},{}", join_names(ds.column_names(), &cols), r.raw, r.normalized, r.cell_count)
        })?;
    }
    Ok(())
}

fn cmd_discretize(ctx: &Ctx, ds: &LabeledDataset<f64>, columns: Option<Vec<String>>) -> Result<(), Failure> {
    let cols = match columns {
        Some(names) => ds.resolve(&names)?,
        None => (0..ds.p()).filter(|&j| distinct_count(ds.column(j)) > 2).collect(),
    };
    let mut out = ds.clone();
    let mut rules = Vec::with_capacity(cols.len());
    for &j in &cols {
        let rule = discretize(ds, j)?;
        out = apply_rule(&out, &rule)?;
        rules.push(rule);
    }
    ctx.write("rules.csv", |w| {
        writeln!(w, "feature,threshold,iscore")?;
        for r in &rules {
            writeln!(w, "{},{},{}", ds.column_names()[r.column], r.threshold, r.iscore_at_best)?;
        }
        Ok(())
    })?;
    let path = ctx.out.join("discretized.csv");
    save_tabular(&out, &path)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn cmd_bda(ctx: &Ctx, ds: &LabeledDataset<f64>, cfg: &BdaConfig) -> Result<(), Failure> {
    let traces = bda_search(ds, cfg)?;
    let names = ds.column_names();
    ctx.write("returns.csv", |w| write_returns(names, &traces, w))?;
    ctx.write("steps.csv", |w| write_steps(names, &traces, w))?;
    let best = &traces[0];
    let line: Vec<&str> = best.return_set.iter().map(|&j| names[j].as_str()).collect();
    println!("{} {}", line.join(","), best.return_score);
    ctx.write("best.txt", |w| writeln!(w, "{}", line.join(",")))
}

fn cmd_dagger(
    ctx: &Ctx,
    ds: &LabeledDataset<f64>,
    columns: &[String],
    train_rows: Option<usize>,
    extra: Option<&LabeledDataset<f64>>,
) -> Result<(), Failure> {
    let subset = ds.resolve(columns)?;
    let rows = train_rows.unwrap_or(ds.n() / 2);
    if rows == 0 || rows > ds.n() {
        return Err(Failure::usage(format!("--train-rows must lie in 1..={}, got {rows}", ds.n())));
    }
    let fit_rows: Vec<usize> = (0..rows).collect();
    let map = fit_dagger(&ds.select_rows(&fit_rows), &subset)?;
    ctx.write("dagger_map.csv", |w| map.write_csv(ds.column_names(), w))?;
    let augmented = ds.with_appended_column("X_dagger", transform_dagger(&map, ds)?)?;
    save_tabular(&augmented, ctx.out.join("augmented.csv"))?;
    if let Some(other) = extra {
        if other.column_names() != ds.column_names() {
            return Err(Failure::usage("--apply file must have the same columns as --data"));
        }
        let applied = other.with_appended_column("X_dagger", transform_dagger(&map, other)?)?;
        save_tabular(&applied, ctx.out.join("applied.csv"))?;
    }
    Ok(())
}

fn cmd_text(ctx: &Ctx, corpus: &iscore::dataset::TextCorpus, cfg: &TextStudyConfig) -> Result<(), Failure> {
    let report = run_text_experiment(corpus, cfg)?;
    ctx.write("text_report.csv", |w| report.write_csv(w))?;
    ctx.write("features.csv", |w| report.write_features(w))?;
    for arm in &report.arms {
        ctx.write(&format!("curves/{}.csv", arm.kind), |w| arm.curve.write_csv(w))?;
    }
    Ok(())
}

struct TrainOptions {
    classifier: Classifier,
    hidden: usize,
    train_fraction: f64,
    top_fraction: Option<f64>,
    train: TrainConfig,
}

fn cmd_train(ctx: &Ctx, ds: &LabeledDataset<f64>, opts: &TrainOptions) -> Result<(), Failure> {
    let (train_idx, rest) = SplitSpec::new(opts.train_fraction, seed::derive(ctx.seed, "train-split"), true)?.indices(ds.n())?;
    let half = rest.len() / 2;
    if half == 0 {
        return Err(Failure::usage("not enough rows left for validation and test"));
    }
    let (train, val, test) = (
        ds.select_rows(&train_idx),
        ds.select_rows(&rest[..half]),
        ds.select_rows(&rest[half..]),
    );
    let mask = match opts.top_fraction {
        Some(q) => {
            let mut scores = vec![0.0; ds.p()];
            for (j, s) in rank_marginal(&train)? {
                scores[j] = s;
            }
            Some(gate_threshold(&scores, q)?)
        }
        None => None,
    };
    let (curve, pred) = match opts.classifier {
        Classifier::Ffn => {
            let (p, curve) = train_ffn(&train, &val, opts.hidden, &opts.train, mask.as_ref())?;
            (curve, predict_ffn(&p, &test, mask.as_ref())?)
        }
        Classifier::Rnn => {
            let p0 = RnnParams::random(opts.hidden, 1, opts.train.init_scale, opts.train.seed);
            let (tr, va, te) = (SequenceSet::from_rows(&train), SequenceSet::from_rows(&val), SequenceSet::from_rows(&test));
            let (p, curve) = train_rnn(&p0, &tr, &va, &opts.train, mask.as_ref())?;
            let gates = RnnGates {
                input: mask.as_ref(),
                hidden: None,
            };
            (curve, predict_rnn(&p, &te, &gates)?)
        }
    };
    ctx.write("curve.csv", |w| curve.write_csv(w))?;
    let y = test.response();
    let hard: Vec<f64> = pred.iter().map(|&p| if p >= 0.5 { 1.0 } else { 0.0 }).collect();
    let metrics = basic_metrics(&confusion(y, &hard)?);
    let roc = roc_auc(y, &pred)?;
    ctx.write("metrics.csv", |w| {
        metrics.write_csv(&mut *w)?;
        writeln!(w, "auc,{}", roc.auc)
    })?;
    ctx.write("roc.csv", |w| roc.write_csv(w))?;
    if let Some(m) = &mask {
        write_gate(ctx, ds, m)?;
    }
    Ok(())
}

fn write_gate(ctx: &Ctx, ds: &LabeledDataset<f64>, m: &GateMask) -> Result<(), Failure> {
    ctx.write("gate.csv", |w| {
        writeln!(w, "feature,iscore,kept")?;
        for (j, name) in ds.column_names().iter().enumerate() {
            writeln!(w, "{name},{},{}", m.scores[j], u8::from(m.passes(j)))?;
        }
        Ok(())
    })
}


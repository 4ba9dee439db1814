use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;

use cws_core::corpus::{read_corpus, read_lines, write_corpus, write_lines, Corpus, Warning};
use cws_core::csc::{corrupt_corpus, load_dict};
use cws_core::model::{load_checkpoint, save_checkpoint, Trainer};
use cws_core::score::score_files;
use cws_core::tensor::Algorithm;
use cws_core::vocab::{VocabBuilder, Vocabulary};
use cws_core::{
    EncodedPair, Error, ModelConfig, OptimizerConfig, RawSentence, Result, SegmentOptions, SegmentedSentence,
    Segmenter, Seq2Seq,
};

use crate::{BuildVocabArgs, CorruptArgs, Optimizer, PostEditArgs, Preset, ScoreArgs, SegmentArgs, TrainArgs};

fn require_input(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Io {
            path: path.to_path_buf(),
            source: io::Error::new(io::ErrorKind::NotFound, "input file not found"),
        })
    }
}

fn require_output(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Error::Io {
            path: dir.to_path_buf(),
            source: io::Error::new(io::ErrorKind::NotFound, "output directory does not exist"),
        }),
        _ => Ok(()),
    }
}

fn report_warnings(path: &Path, corpus: &Corpus) {
    for w in &corpus.warnings {
        match w {
            Warning::BlankLine { line } => eprintln!("{}:{line}: skipped blank line", path.display()),
            Warning::Normalized { line } => eprintln!("{}:{line}: normalized word separators", path.display()),
        }
    }
}

pub fn build_vocab(a: &BuildVocabArgs) -> Result<()> {
    a.corpus.iter().try_for_each(|p| require_input(p))?;
    require_output(&a.out)?;
    let mut builder = VocabBuilder::new();
    for path in &a.corpus {
        let corpus = read_corpus(path)?;
        report_warnings(path, &corpus);
        for s in &corpus.sentences {
            builder.add_sentence(s);
        }
    }
    let vocab = builder.build(a.min_count, a.max_size.unwrap_or(usize::MAX))?;
    vocab.save(&a.out)?;
    eprintln!("wrote {} tokens to {}", vocab.len(), a.out.display());
    Ok(())
}

fn model_config(a: &TrainArgs, vocab_size: usize) -> ModelConfig {
    let mut c = match a.preset {
        Preset::Desk => ModelConfig::desk(vocab_size),
        Preset::Large => ModelConfig::large(vocab_size),
    }
    .with_seed(a.seed);
    if let Some(e) = a.embedding_dim {
        c.embedding_dim = e;
    }
    if let Some(h) = a.hidden_dim {
        c.hidden_dim = h;
    }
    if let Some(f) = a.max_output_factor {
        c.max_output_factor = f;
    }
    c
}

fn optimizer_config(a: &TrainArgs) -> Result<OptimizerConfig> {
    if a.clip.is_nan() || a.clip < 0.0 {
        return Err(Error::Config(format!("--clip must be non-negative, got {}", a.clip)));
    }
    let (algorithm, default_lr) = match a.optimizer {
        Optimizer::Adam => (Algorithm::adam(), 1e-3),
        Optimizer::Sgd => (Algorithm::Sgd, 0.1),
    };
    let config = OptimizerConfig {
        algorithm,
        learning_rate: a.lr.unwrap_or(default_lr),
        clip_norm: (a.clip > 0.0).then_some(a.clip),
    };
    config.validate()?;
    Ok(config)
}

fn training_pairs(a: &TrainArgs, vocab: &Vocabulary) -> Result<Vec<EncodedPair>> {
    let Some(source) = &a.source else {
        let corpus = read_corpus(&a.corpus)?;
        report_warnings(&a.corpus, &corpus);
        return corpus.sentences.iter().map(|s| vocab.encode_pair(s)).collect();
    };
    let raw = read_lines(source)?;
    let gold = read_lines(&a.corpus)?;
    if raw.len() != gold.len() {
        return Err(Error::Data(format!(
            "{} has {} lines but {} has {}",
            source.display(),
            raw.len(),
            a.corpus.display(),
            gold.len()
        )));
    }
    let mut pairs = Vec::with_capacity(gold.len());
    for (i, (r, g)) in raw.iter().zip(&gold).enumerate() {
        let g = SegmentedSentence::parse(g);
        match (RawSentence::from_line(r), g.is_empty()) {
            (None, true) => continue,
            (Some(r), false) => pairs.push(vocab.encode_parallel(&r, &g)?),
            _ => return Err(Error::Data(format!("line {}: only one side of the pair is blank", i + 1))),
        }
    }
    Ok(pairs)
}

fn log_path(a: &TrainArgs) -> PathBuf {
    a.log.clone().unwrap_or_else(|| {
        let mut name = a.out.clone().into_os_string();
        name.push(".train.log");
        PathBuf::from(name)
    })
}

pub fn train(a: &TrainArgs) -> Result<()> {
    require_input(&a.corpus)?;
    if let Some(s) = &a.source {
        require_input(s)?;
    }
    require_input(&a.vocab)?;
    require_output(&a.out)?;
    let log_path = log_path(a);
    require_output(&log_path)?;
    if a.epochs == 0 {
        return Err(Error::Config("--epochs must be at least 1".into()));
    }

    let vocab = Vocabulary::load(&a.vocab)?;
    let config = model_config(a, vocab.len());
    let optimizer = optimizer_config(a)?;
    let pairs = training_pairs(a, &vocab)?;
    let mut model = Seq2Seq::new(config)?;
    eprintln!(
        "training {} weights on {} sentences (embedding {}, hidden {}, vocabulary {})",
        model.params().num_weights(),
        pairs.len(),
        config.embedding_dim,
        config.hidden_dim,
        config.vocab_size
    );

    let file = File::create(&log_path).map_err(|e| Error::Io {
        path: log_path.clone(),
        source: e,
    })?;
    let mut log = BufWriter::new(file);
    let io_err = |e| Error::Io {
        path: log_path.clone(),
        source: e,
    };
    {
        let mut trainer = Trainer::new(&mut model, optimizer, a.seed)?;
        for _ in 0..a.epochs {
            let entry = trainer.run_epoch(&pairs)?;
            writeln!(log, "{entry}").map_err(io_err)?;
            log.flush().map_err(io_err)?;
            eprintln!("epoch {} mean nll {:.6}", entry.epoch, entry.mean_nll);
        }
    }
    save_checkpoint(&model, &vocab, &a.out)?;
    eprintln!("wrote {}", a.out.display());
    Ok(())
}

fn segment_lines(seg: &Segmenter, lines: &[String]) -> Result<Vec<String>> {
    lines
        .iter()
        .map(|l| match RawSentence::from_line(l) {
            Some(raw) => seg.segment(&raw).map(|s| s.to_string()),
            None => Ok(String::new()),
        })
        .collect()
}

pub fn segment(a: &SegmentArgs) -> Result<()> {
    require_input(&a.input)?;
    require_input(&a.model)?;
    require_input(&a.vocab)?;
    require_output(&a.out)?;
    if a.jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let vocab = Vocabulary::load(&a.vocab)?;
    let model = load_checkpoint(&a.model, &vocab)?;
    let options = SegmentOptions {
        beam_width: a.beam,
        post_edit: !a.no_post_edit,
        max_output_factor: a.max_output_factor.unwrap_or(model.config().max_output_factor),
    };
    let seg = Segmenter::new(&model, &vocab, options)?;
    let lines = read_lines(&a.input)?;

    let chunk = lines.len().div_ceil(a.jobs).max(1);
    let out: Vec<String> = thread::scope(|scope| {
        let workers: Vec<_> = lines
            .chunks(chunk)
            .map(|part| scope.spawn(|| segment_lines(&seg, part)))
            .collect();
        workers
            .into_iter()
            .map(|w| w.join().expect("segmentation worker panicked"))
            .collect::<Result<Vec<_>>>()
    })?
    .into_iter()
    .flatten()
    .collect();
    write_lines(&out, &a.out)?;
    eprintln!("segmented {} lines into {}", out.len(), a.out.display());
    Ok(())
}

pub fn score(a: &ScoreArgs) -> Result<()> {
    require_input(&a.pred)?;
    require_input(&a.gold)?;
    println!("{}", score_files(&a.pred, &a.gold)?);
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn corrupt(a: &CorruptArgs) -> Result<()> {
    require_input(&a.corpus)?;
    require_input(&a.dict)?;
    let src = with_suffix(&a.out_prefix, ".src");
    let tgt = with_suffix(&a.out_prefix, ".tgt");
    let records = with_suffix(&a.out_prefix, ".records.tsv");
    require_output(&src)?;

    let corpus = read_corpus(&a.corpus)?;
    report_warnings(&a.corpus, &corpus);
    let (dict, rejected) = load_dict(&a.dict)?;
    for r in &rejected {
        eprintln!("{}:{}: rejected pair: {}", a.dict.display(), r.line, r.reason);
    }
    let out = corrupt_corpus(&corpus.sentences, &dict, a.rate, a.seed)?;
    let raw: Vec<String> = out
        .sentences
        .iter()
        .map(|s| s.raw().map(|r| r.to_string()).unwrap_or_default())
        .collect();
    write_lines(&raw, &src)?;
    write_corpus(&corpus.sentences, &tgt)?;
    write_lines(&out.records, &records)?;
    eprintln!(
        "corrupted {} of {} sentences ({} eligible)",
        out.records.len(),
        corpus.sentences.len(),
        out.eligible
    );
    if out.shortfall() > 0 {
        eprintln!(
            "warning: {} requested sentences had no dictionary word to replace",
            out.shortfall()
        );
    }
    Ok(())
}

pub fn post_edit(a: &PostEditArgs) -> Result<()> {
    require_input(&a.original)?;
    require_input(&a.system)?;
    require_output(&a.out)?;
    let original = read_lines(&a.original)?;
    let system = read_lines(&a.system)?;
    if original.len() != system.len() {
        return Err(Error::Data(format!(
            "{} has {} lines but {} has {}",
            a.original.display(),
            original.len(),
            a.system.display(),
            system.len()
        )));
    }
    let out: Vec<String> = original
        .iter()
        .zip(&system)
        .map(|(o, s)| match RawSentence::from_line(o) {
            Some(raw) => cws_core::post_edit(&raw, &SegmentedSentence::parse(s)).to_string(),
            None => String::new(),
        })
        .collect();
    write_lines(&out, &a.out)
}

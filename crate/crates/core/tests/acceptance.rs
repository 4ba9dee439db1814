//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cws_core::corpus::{write_corpus, RawSentence, SegmentedSentence};
use cws_core::csc::{corrupt_corpus, emit_training_pairs, parse_dict};
use cws_core::decode::{beam_search, greedy_search, greedy_search_traced};
use cws_core::model::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
use cws_core::postedit::{check_labels, post_edit, post_edit_labels, resolve_x, SegLabel};
use cws_core::score::{score_sentence, Counts};
use cws_core::tensor::{log_softmax, ParamId};
use cws_core::vocab::{build_vocab, EOS, SEP, UNK_TEXT};
use cws_core::{CheckpointError, EncodedPair, Error, ModelConfig, OptimizerConfig, Seq2Seq, TokenId, Vocabulary};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn micro_config(seed: u64, vocab_size: usize) -> ModelConfig {
    ModelConfig {
        embedding_dim: 4,
        hidden_dim: 5,
        vocab_size,
        max_output_factor: 2.0,
        seed,
    }
}

fn micro(seed: u64, vocab_size: usize) -> Seq2Seq {
    Seq2Seq::with_init_scale(micro_config(seed, vocab_size), 0.5).unwrap()
}

fn random_pair(rng: &mut ChaCha8Rng, vocab_size: usize, max_len: usize) -> EncodedPair {
    let len = rng.random_range(1..=max_len);
    let chars: Vec<TokenId> = (0..len).map(|_| rng.random_range(4..vocab_size)).collect();
    let mut source = chars.clone();
    source.push(EOS);
    let mut target = Vec::new();
    for (k, &c) in chars.iter().enumerate() {
        if k > 0 && rng.random_bool(0.5) {
            target.push(SEP);
        }
        target.push(c);
    }
    target.push(EOS);
    EncodedPair { source, target }
}

fn loss_of(model: &Seq2Seq, pair: &EncodedPair) -> f64 {
    let mut g = model.graph();
    let v = g.sequence_nll(pair).unwrap();
    g.value(v).data()[0]
}

fn gradient_check() -> Outcome {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for seed in 0..3 {
        let mut model = micro(seed, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let pair = random_pair(&mut rng, 7, 4);

        let mut g = model.graph();
        let loss = g.sequence_nll(&pair).unwrap();
        let tape = g.into_tape();
        model.params_mut().reset_gradients();
        tape.backward(loss, model.params_mut()).unwrap();

        let ids: Vec<ParamId> = model.params().ids().collect();
        for id in ids {
            let analytic = model.params().grad(id).clone();
            for k in 0..analytic.len() {
                let orig = model.params().value(id).data()[k];
                model.params_mut().value_mut(id).data_mut()[k] = orig + h;
                let up = loss_of(&model, &pair);
                model.params_mut().value_mut(id).data_mut()[k] = orig - h;
                let down = loss_of(&model, &pair);
                model.params_mut().value_mut(id).data_mut()[k] = orig;
                let numeric = (up - down) / (2.0 * h);
                let a = analytic.data()[k];
                // Relative error, with the denominator floored so that
                // gradients at finite-difference noise level compare absolutely.
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
                if rel > worst {
                    worst = rel;
                }
                checked += 1;
            }
        }
    }
    ensure(worst < 1e-4, || format!("max relative error {worst:.3e}"))?;
    Ok(format!("{checked} weights, max relative error {worst:.2e}"))
}

fn factorization() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let model = micro(seed, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = random_pair(&mut rng, 7, 4);
        let total = loss_of(&model, &pair);

        // Each factor from its own fresh graph, teacher-forced up to step t.
        let mut oracle = 0.0;
        for t in 0..pair.target.len() {
            let mut g = model.graph();
            let ann = g.encode(&pair.source).unwrap();
            let mut s = g.initial_state(&ann).unwrap();
            let mut prev = EOS;
            for &y in &pair.target[..t] {
                let (_, next) = g.decode_step(prev, &s, &ann).unwrap();
                s = next;
                prev = y;
            }
            let (out, _) = g.decode_step(prev, &s, &ann).unwrap();
            oracle -= log_softmax(g.value(out.logits).data())[pair.target[t]];
        }
        worst = worst.max((total - oracle).abs());
    }
    ensure(worst < 1e-10, || format!("max difference {worst:.3e}"))?;
    Ok(format!("100 models, max |nll - sum of step losses| {worst:.2e}"))
}

fn check_attention(weights: &[f64], len: usize) -> Result<(), String> {
    ensure(weights.len() == len, || format!("length {} != {len}", weights.len()))?;
    ensure(weights.iter().all(|&a| a > 0.0), || format!("non-positive weight in {weights:?}"))?;
    let sum: f64 = weights.iter().sum();
    ensure((sum - 1.0).abs() < 1e-9, || format!("weights sum to {sum}"))
}

fn attention_contract() -> Outcome {
    let mut steps = 0;
    for seed in 0..100 {
        let model = micro(seed, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = random_pair(&mut rng, 9, 8);
        let (_, trace) = greedy_search_traced(&model, &pair.source, 21).unwrap();
        for w in &trace {
            check_attention(w, pair.source.len())?;
            steps += 1;
        }
    }

    for seed in 0..20 {
        let model = micro(seed, 7);
        let mut g = model.graph();
        let ann = g.encode(&[5]).unwrap();
        let s = g.initial_state(&ann).unwrap();
        let (out, next) = g.decode_step(EOS, &s, &ann).unwrap();
        let (out2, _) = g.decode_step(4, &next, &ann).unwrap();
        let h1 = g.value(ann.matrix).row(0).to_vec();
        for o in [out, out2] {
            ensure(g.value(o.attention).data() == [1.0], || "T_x = 1 weights are not [1.0]".into())?;
            ensure(g.value(o.context).data() == h1.as_slice(), || "T_x = 1 context differs from h_1".into())?;
        }
    }
    Ok(format!("{steps} decode steps checked; T_x = 1 exact on 20 models"))
}

fn uniform_loss() -> Outcome {
    let mut worst: f64 = 0.0;
    for v in [5, 7, 30] {
        let model = Seq2Seq::zeros(micro_config(1, v)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(v as u64);
        for _ in 0..10 {
            let pair = random_pair(&mut rng, v, 6);
            let expected = pair.target.len() as f64 * (v as f64).ln();
            worst = worst.max((loss_of(&model, &pair) - expected).abs());
        }
    }
    ensure(worst < 1e-10, || format!("max difference {worst:.3e}"))?;
    Ok(format!("max |nll - T ln V| {worst:.2e}"))
}

fn end_to_end_overfit() -> Outcome {
    let start = Instant::now();
    let gold = common::toy_corpus();
    let vocab = build_vocab(&gold, 1, usize::MAX).unwrap();
    let pairs: Vec<_> = gold.iter().map(|s| vocab.encode_pair(s).unwrap()).collect();
    let sources: Vec<RawSentence> = gold.iter().map(|s| s.raw().unwrap()).collect();
    let config = ModelConfig::desk(vocab.len()).with_seed(1);
    let run = common::overfit(config, OptimizerConfig::default(), &pairs, 300, 10, 0.99, |m| {
        common::corpus_f1(m, &vocab, &sources, &gold)
    })
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let last = run.log.last().map_or(f64::NAN, |l| l.mean_nll);
    ensure(run.f1 >= 0.99, || format!("F = {:.4} after {} epochs", run.f1, run.epochs))?;
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:.1?}"))?;
    Ok(format!(
        "F = {:.4} after {} epochs (final nll {last:.4}), {:.1?}",
        run.f1, run.epochs, elapsed
    ))
}

/// Corrupts a word list: UNK substitutions, deletions and insertions of
/// characters or UNKs, `k ≤ 3` edits in total.
fn fuzz_corrupt(rng: &mut ChaCha8Rng, words: &[String], alphabet: &[char]) -> (Vec<String>, bool) {
    let mut cells: Vec<Vec<String>> = words.iter().map(|w| w.chars().map(String::from).collect()).collect();
    let k = rng.random_range(0..=3);
    let mut only_substitutions = true;
    for _ in 0..k {
        let total: usize = cells.iter().map(Vec::len).sum();
        if total == 0 {
            break;
        }
        let mut pos = rng.random_range(0..total);
        let wi = cells
            .iter()
            .position(|w| {
                if pos < w.len() {
                    true
                } else {
                    pos -= w.len();
                    false
                }
            })
            .unwrap();
        match rng.random_range(0..4) {
            0 => cells[wi][pos] = UNK_TEXT.to_string(),
            1 => {
                cells[wi].remove(pos);
                only_substitutions = false;
            }
            2 => {
                cells[wi].insert(pos, UNK_TEXT.to_string());
                only_substitutions = false;
            }
            _ => {
                cells[wi].insert(pos, alphabet.choose(rng).unwrap().to_string());
                only_substitutions = false;
            }
        }
    }
    let out = cells.into_iter().map(|w| w.concat()).filter(|w| !w.is_empty()).collect();
    (out, only_substitutions)
}

fn post_editor_oracle() -> Outcome {
    use SegLabel::*;
    let alphabet: Vec<char> = "我爱夏天北京大学生活中国人民好的".chars().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut restored = 0;
    let mut substitution_cases = 0;
    for case in 0..1000 {
        let n_words = rng.random_range(1..=8);
        let words: Vec<String> = (0..n_words)
            .map(|_| (0..rng.random_range(1..=4)).map(|_| *alphabet.choose(&mut rng).unwrap()).collect())
            .collect();
        let gold = SegmentedSentence::new(words.clone()).unwrap();
        let ori = gold.raw().unwrap();
        let (sys, only_subs) = fuzz_corrupt(&mut rng, &words, &alphabet);
        let sys = SegmentedSentence::new(sys).unwrap();
        let out = post_edit(&ori, &sys);
        ensure(out.chars().eq(ori.chars().iter().copied()), || {
            format!("case {case}: \"{out}\" does not spell \"{ori}\"")
        })?;
        check_labels(&post_edit_labels(&ori, &sys)).map_err(|e| format!("case {case}: {e}"))?;
        ensure(post_edit(&ori, &out) == out, || format!("case {case}: not idempotent"))?;
        if only_subs {
            substitution_cases += 1;
            ensure(out == gold, || format!("case {case}: UNK substitutions not restored"))?;
        }
        restored += 1;
    }

    let first = resolve_x(&[S, S, B, E, B, X, E]);
    ensure(first[5] == M, || format!("first worked example gave {}", first[5]))?;
    let second = resolve_x(&[S, X, B, E, B, M, E]);
    ensure(second[1] == S, || format!("second worked example gave {}", second[1]))?;

    let ori = RawSentence::new("岛国一超精分的小品《極道の親子》，看完之后我想说，为什么我没有这么“通情达理”的老爸呢？").unwrap();
    let sys = SegmentedSentence::parse("岛国 一 超 精分 的 小品 《 UNK道 UNK UNK子 》 ， 看完 之后 我 想 说 ， 为什么 我 没有 这么 “ 通情达理 ” 的 老爸 呢 ？");
    let gold = SegmentedSentence::parse("岛国 一 超 精分 的 小品 《 極道 の 親子 》 ， 看完 之后 我 想 说 ， 为什么 我 没有 这么 “ 通情达理 ” 的 老爸 呢 ？");
    ensure(post_edit(&ori, &sys) == gold, || "UNK example not reconstructed".into())?;
    Ok(format!(
        "{restored}/1000 fuzzed cases faithful ({substitution_cases} substitution-only cases equal gold); worked examples M, S; UNK row exact"
    ))
}

fn decoder_oracles() -> Outcome {
    for seed in 0..100 {
        let model = micro(seed, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = random_pair(&mut rng, 9, 6);
        let cap = model.output_cap(pair.source.len() - 1);
        let g = greedy_search(&model, &pair.source, cap).unwrap();
        let b = beam_search(&model, &pair.source, 1, cap).unwrap();
        ensure(g == b, || format!("seed {seed}: beam 1 {:?} != greedy {:?}", b.tokens, g.tokens))?;
    }

    let mut cases = 0;
    for v in [5, 6] {
        for seed in 0..25 {
            let model = micro(seed, v);
            let source = [4, v - 1, EOS];
            // Oracle: log-probability of a prefix from the step distributions.
            let lp = |prefix: &[TokenId]| {
                let mut g = model.graph();
                let ann = g.encode(&source).unwrap();
                let mut s = g.initial_state(&ann).unwrap();
                let mut prev = EOS;
                let mut total = 0.0;
                for &y in prefix {
                    let (out, next) = g.decode_step(prev, &s, &ann).unwrap();
                    total += g.value(out.distribution).data()[y].ln();
                    s = next;
                    prev = y;
                }
                total
            };
            let mut best = (vec![EOS], lp(&[EOS]));
            for a in (0..v).filter(|&a| a != EOS) {
                for b in 0..v {
                    let score = lp(&[a, b]) / 2.0;
                    if score > best.1 {
                        best = (vec![a, b], score);
                    }
                }
            }
            for width in [v, v + 2] {
                let h = beam_search(&model, &source, width, 2).unwrap();
                ensure(h.tokens == best.0, || {
                    format!("V {v} seed {seed} width {width}: beam {:?} != exhaustive {:?}", h.tokens, best.0)
                })?;
                ensure((h.score() - best.1).abs() < 1e-9, || "score differs from oracle".into())?;
            }
            cases += 1;
        }
    }
    Ok(format!("beam 1 = greedy on 100 models; exhaustive match on {cases} micro models"))
}

fn random_cut(rng: &mut ChaCha8Rng, chars: &[char]) -> SegmentedSentence {
    let mut words = Vec::new();
    let mut w = String::new();
    for (k, &c) in chars.iter().enumerate() {
        w.push(c);
        if k + 1 == chars.len() || rng.random_bool(0.5) {
            words.push(std::mem::take(&mut w));
        }
    }
    SegmentedSentence::new(words).unwrap()
}

fn scorer_oracle() -> Outcome {
    let alphabet: Vec<char> = "ab我爱".chars().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..1000 {
        let len = rng.random_range(1..=8);
        let chars: Vec<char> = (0..len).map(|_| *alphabet.choose(&mut rng).unwrap()).collect();
        let (p, g) = (random_cut(&mut rng, &chars), random_cut(&mut rng, &chars));
        let positioned = |s: &SegmentedSentence| {
            let mut at = 0;
            s.words()
                .iter()
                .map(|w| {
                    let item = (at, w.clone());
                    at += w.chars().count();
                    item
                })
                .collect::<Vec<_>>()
        };
        let gw = positioned(&g);
        let naive = positioned(&p).iter().filter(|x| gw.contains(x)).count();
        let c = score_sentence(&p, &g).unwrap();
        ensure(c.matched == naive, || format!("case {case}: {} != {naive}", c.matched))?;
    }
    let c = score_sentence(&SegmentedSentence::parse("我 爱 夏 天"), &SegmentedSentence::parse("我 爱 夏天")).unwrap();
    ensure(c == Counts { matched: 2, predicted: 4, gold: 3 }, || format!("{c:?}"))?;
    ensure((c.precision() - 0.5).abs() < 1e-4, || "P".into())?;
    ensure((c.recall() - 2.0 / 3.0).abs() < 1e-4, || "R".into())?;
    ensure((c.f1() - 0.5714).abs() < 1e-4, || "F".into())?;
    Ok(format!(
        "1000 random pairs agree; worked example P={:.4} R={:.4} F={:.4}",
        c.precision(),
        c.recall(),
        c.f1()
    ))
}

const TOY_DICT: &[&str] = &[
    "夏天\t夏夭", "天气\t天汽", "公园\t公圆", "老师\t老帅", "首都\t首部", "厨房\t厨方", "看书\t看节",
    "有趣\t有取", "下雨\t下两", "教室\t教至", "跑步\t跑布", "晚饭\t晚板", "问题\t问提", "好听\t好昕",
    "上班\t上斑", "安静\t安净", "朋友\t朋有", "游戏\t游划", "开会\t开汇", "有名\t有明", "黄色\t黄邑",
    "时间\t时问", "作业\t做业", "发展\t发辰", "英语\t英吾", "学校\t学较", "休息\t休自", "高兴\t高米",
    "中文\t中闻", "白云\t白去", "健康\t建康", "爬山\t爬出", "手机\t手几", "水果\t水裹", "新鲜\t新详",
    "工作\t工做", "睡觉\t睡党", "经济\t经齐", "帮助\t帮肋",
];

fn csc_synthesizer() -> Outcome {
    let (dict, rejected) = parse_dict(TOY_DICT).map_err(|e| e.to_string())?;
    ensure(rejected.is_empty(), || format!("{rejected:?}"))?;
    let toy = common::toy_corpus();

    // 1000 sentences assembled from toy words.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let words: Vec<String> = toy.iter().flat_map(|s| s.words().to_vec()).collect();
    let big: Vec<SegmentedSentence> = (0..1000)
        .map(|_| {
            let n = rng.random_range(2..=6);
            SegmentedSentence::new((0..n).map(|_| words.choose(&mut rng).unwrap().clone())).unwrap()
        })
        .collect();
    let out = corrupt_corpus(&big, &dict, 0.5, 17).map_err(|e| e.to_string())?;
    let expected = 500.min(out.eligible);
    ensure(out.records.len() == expected, || {
        format!("{} records, expected {expected}", out.records.len())
    })?;
    for (i, (a, b)) in big.iter().zip(&out.sentences).enumerate() {
        let changed: Vec<usize> = (0..a.num_words()).filter(|&w| a.words()[w] != b.words()[w]).collect();
        match out.records.iter().find(|r| r.sentence == i) {
            Some(r) => {
                ensure(changed == vec![r.word], || format!("sentence {i}: changed slots {changed:?}"))?;
                ensure(r.correct.chars().count() == r.wrong.chars().count(), || "length changed".into())?;
                ensure(a.char_len() == b.char_len(), || "sentence length changed".into())?;
            }
            None => ensure(a.to_string() == b.to_string(), || format!("sentence {i} modified without record"))?,
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bytes = |tag: &str| -> Result<(Vec<u8>, Vec<u8>), String> {
        let o = corrupt_corpus(&big, &dict, 0.5, 17).map_err(|e| e.to_string())?;
        let src = dir.path().join(format!("{tag}.src"));
        let rec = dir.path().join(format!("{tag}.tsv"));
        write_corpus(&o.sentences, &src).map_err(|e| e.to_string())?;
        cws_core::corpus::write_lines(&o.records, &rec).map_err(|e| e.to_string())?;
        Ok((std::fs::read(src).unwrap(), std::fs::read(rec).unwrap()))
    };
    ensure(bytes("a")? == bytes("b")?, || "same seed produced different bytes".into())?;

    // Joint segmentation and correction on the corrupted toy corpus.
    let start = Instant::now();
    let corrupted = corrupt_corpus(&toy, &dict, 0.5, 3).map_err(|e| e.to_string())?;
    let pairs_text = emit_training_pairs(&corrupted.sentences, &toy).map_err(|e| e.to_string())?;
    let vocab = build_vocab(toy.iter().chain(&corrupted.sentences), 1, usize::MAX).unwrap();
    let pairs: Vec<EncodedPair> = pairs_text
        .iter()
        .map(|(src, tgt)| vocab.encode_parallel(src, tgt).unwrap())
        .collect();
    let sources: Vec<RawSentence> = pairs_text.iter().map(|(s, _)| s.clone()).collect();
    let config = ModelConfig::desk(vocab.len()).with_seed(2);
    let run = common::overfit(config, OptimizerConfig::default(), &pairs, 300, 10, 0.99, |m| {
        common::corpus_f1(m, &vocab, &sources, &toy)
    })
    .map_err(|e| e.to_string())?;
    ensure(run.f1 >= 0.99, || format!("joint model F = {:.4} after {} epochs", run.f1, run.epochs))?;
    Ok(format!(
        "{} of 1000 corrupted ({} eligible), deterministic; joint model on {} corrupted toy sentences F = {:.4} after {} epochs, {:.1?}",
        out.records.len(),
        out.eligible,
        corrupted.records.len(),
        run.f1,
        run.epochs,
        start.elapsed()
    ))
}

fn checkpoint_round_trip() -> Outcome {
    let gold = common::toy_corpus();
    let vocab = build_vocab(&gold, 1, usize::MAX).unwrap();
    let model = Seq2Seq::new(ModelConfig::desk(vocab.len()).with_seed(4)).unwrap();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("toy.ckpt");
    save_checkpoint(&model, &vocab, &path).map_err(|e| e.to_string())?;
    let back = load_checkpoint(&path, &vocab).map_err(|e| e.to_string())?;
    let mut weights = 0;
    for (a, b) in model.params().iter().zip(back.params().iter()) {
        let bits = |t: &cws_core::Tensor| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        ensure(bits(&a.value) == bits(&b.value), || format!("{} differs", a.name))?;
        weights += a.value.len();
    }

    let bytes = write_checkpoint(&model, &vocab.fingerprint());
    ensure(
        matches!(read_checkpoint(&bytes[..bytes.len() - 3]), Err(CheckpointError::Truncated)),
        || "truncation not detected".into(),
    )?;
    let mut bad = bytes.clone();
    bad[..6].copy_from_slice(b"NOTCKP");
    ensure(matches!(read_checkpoint(&bad), Err(CheckpointError::BadMagic)), || "bad magic not detected".into())?;
    let other = Vocabulary::from_chars("我爱夏天".chars());
    ensure(
        matches!(
            load_checkpoint(&path, &other),
            Err(Error::Checkpoint(CheckpointError::VocabMismatch { .. }))
        ),
        || "vocabulary mismatch not detected".into(),
    )?;
    Ok(format!("{weights} weights bit-exact; truncation, bad magic and vocab mismatch rejected"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("gradient correctness", gradient_check),
        ("sequence likelihood factorization", factorization),
        ("attention contract", attention_contract),
        ("uniform-loss anchor", uniform_loss),
        ("end-to-end overfit", end_to_end_overfit),
        ("post-editor oracle", post_editor_oracle),
        ("decoder oracles", decoder_oracles),
        ("scorer oracle", scorer_oracle),
        ("spelling-error synthesizer", csc_synthesizer),
        ("checkpoint round trip", checkpoint_round_trip),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail} [{secs:.1}s]", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {why} [{secs:.1}s]", n + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

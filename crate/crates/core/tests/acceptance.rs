//! Acceptance suite. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use charseg::analysis::{gk_tau, ContingencyTable};
use charseg::chartype::classify_all;
use charseg::cli::{cmd_eval, EvalArgs};
use charseg::corpus::{parse_corpus_str, word_length_coverage, Sentence};
use charseg::crf::{objective_and_gradient, viterbi, Hyper, Lattice};
use charseg::features::{
    boost_preset, compute_species_scales, enumerate_species, interpolate, scales_from_recalls, Family, ShapeKind,
};
use charseg::labels::{decode, LabelScheme};
use charseg::lexicon::Lexicon;
use charseg::model_file;
use charseg::segmenter::{self, SegmenterModel, TrainConfig};
use charseg::synthetic::{self, generate, generate_lexemes, inject_lexemes, SyntheticConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn c1_crf_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let n = 240;
    for k in 0..n {
        let l = rng.gen_range(1..=4);
        let len = rng.gen_range(1..=8);
        let nf = rng.gen_range(1..=6);
        let model = common::random_model(&mut rng, l, nf, Hyper::default());
        let inst = common::random_instance(&mut rng, len, nf);
        let (want_z, want_path) = common::brute_force(&model, &inst);
        let lattice = model.partition(&inst).map_err(|e| e.to_string())?;
        let rel = (lattice.log_z - want_z).abs() / want_z.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        ensure!(rel <= 1e-9, "instance {k}: log Z {} vs brute force {want_z}", lattice.log_z);
        let (path, _) = model.viterbi(&inst);
        ensure!(path == want_path, "instance {k}: viterbi {path:?} vs brute force {want_path:?}");
    }
    // Tie rule: all-zero scores make every path optimal; the lowest labels win.
    let (path, _) = viterbi(&[0.0; 12], &[0.0; 9], 3);
    ensure!(path == vec![0; 4], "tie rule picked {path:?}");
    let lattice = Lattice::new(&[0.0; 12], &[0.0; 9], 3).map_err(|e| e.to_string())?;
    ensure!((lattice.log_z - 4.0 * 3f64.ln()).abs() < 1e-12, "uniform log Z {}", lattice.log_z);
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {}", secs(elapsed));
    Ok(format!("{n} instances, max relative log Z error {worst:.1e}, viterbi exact, {}", secs(elapsed)))
}

fn c2_gradient_check() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (l, nf) = (4, 40);
    let mut model = common::random_model(&mut rng, l, nf, Hyper { l1: 0.0, l2: 0.1 });
    let batch: Vec<_> = (0..6)
        .map(|_| {
            let len = rng.gen_range(2..=7);
            common::random_labeled(&mut rng, len, nf, l)
        })
        .collect();
    let (_, grad) = objective_and_gradient(&model, &batch).map_err(|e| e.to_string())?;
    let base = model.params();
    let mut coords: Vec<usize> = (0..base.len()).collect();
    rand::seq::SliceRandom::shuffle(coords.as_mut_slice(), &mut rng);
    coords.truncate(120);
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for &i in &coords {
        let mut p = base.clone();
        p[i] = base[i] + h;
        model.set_params(&p);
        let up = objective_and_gradient(&model, &batch).map_err(|e| e.to_string())?.0;
        p[i] = base[i] - h;
        model.set_params(&p);
        let down = objective_and_gradient(&model, &batch).map_err(|e| e.to_string())?.0;
        let numeric = (up - down) / (2.0 * h);
        let rel = (grad[i] - numeric).abs() / grad[i].abs().max(numeric.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        ensure!(rel <= 1e-4, "coordinate {i}: analytic {} vs numeric {numeric}", grad[i]);
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {}", secs(elapsed));
    Ok(format!("{} coordinates, max relative error {worst:.1e}, {}", coords.len(), secs(elapsed)))
}

fn c3_label_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let schemes = [LabelScheme::bies(), LabelScheme::b23ies(), LabelScheme::final_design()];
    let n = 1000;
    for k in 0..n {
        let s = common::random_sentence(&mut rng, 30);
        let classes = classify_all(s.chars());
        for scheme in &schemes {
            let labels = scheme.encode(&s, &classes).map_err(|e| e.to_string())?;
            let inventory = scheme.inventory();
            ensure!(labels.iter().all(|l| inventory.contains(l)), "sentence {k}: label outside inventory");
            let back = decode(&labels);
            ensure!(back == s.boundaries(), "sentence {k} under {}: {back:?} vs {:?}", scheme.name(), s.boundaries());
        }
    }
    let size = LabelScheme::final_design().inventory().len();
    ensure!(size == 22, "final inventory has {size} labels");
    Ok(format!("{n} sentences x 3 schemes round-trip, final inventory = {size}"))
}

fn c4_sentence_info() -> Outcome {
    let lex = Lexicon::from_entries(["a", "bad", "dub", "Lu", "!"]);
    let gold = parse_corpus_str("Lubba dub !\n").map_err(|e| e.to_string())?.remove(0);
    let rows = lex.sentence_info(gold.chars(), Some(&gold)).map_err(|e| e.to_string())?;
    let set = |items: &[&str]| items.iter().map(|s| s.to_string()).collect::<BTreeSet<String>>();
    // (C, O, L, T, R, L_R). The lexemes containing 'a' have lengths 1 and 3.
    let expected = [
        ('L', 0, 5, 'L', set(&["Lu"]), "2"),
        ('u', 1, 5, 'L', set(&["dub", "Lu"]), "23"),
        ('b', 2, 5, 'L', set(&["bad", "dub"]), "3"),
        ('b', 3, 5, 'L', set(&["bad", "dub"]), "3"),
        ('a', 4, 5, 'L', set(&["a", "bad"]), "13"),
        ('d', 0, 3, 'L', set(&["bad", "dub"]), "3"),
        ('u', 1, 3, 'L', set(&["dub", "Lu"]), "23"),
        ('b', 2, 3, 'L', set(&["bad", "dub"]), "3"),
        ('!', 0, 1, 'P', set(&["!"]), "1"),
    ];
    ensure!(rows.len() == expected.len(), "{} rows", rows.len());
    for (i, (r, (c, o, l, t, known, lr))) in rows.iter().zip(&expected).enumerate() {
        ensure!(r.c == *c, "row {i}: char {}", r.c);
        ensure!(r.offset == Some(*o) && r.word_len == Some(*l), "row {i}: O/L {:?}/{:?}", r.offset, r.word_len);
        ensure!(r.script.symbol() == *t, "row {i}: T {}", r.script.symbol());
        ensure!(&r.known == known, "row {i}: R {:?}", r.known);
        ensure!(r.known_lengths.symbols() == *lr, "row {i}: L_R {}", r.known_lengths.symbols());
    }
    // S and L_S for rows 0, 1, 4, 5, 6 and 8.
    let printed = [
        (0, set(&["Lu"]), "2"),
        (1, set(&["Lu"]), "2"),
        (4, set(&["a", "bad"]), "13"),
        (5, set(&["bad", "dub"]), "3"),
        (6, set(&["dub"]), "3"),
        (8, set(&["!"]), "1"),
    ];
    for (i, s, ls) in &printed {
        ensure!(rows[*i].covering == *s, "row {i}: S {:?}", rows[*i].covering);
        ensure!(rows[*i].covering_lengths.symbols() == *ls, "row {i}: L_S {}", rows[*i].covering_lengths.symbols());
    }
    // Remaining rows under the covering definition.
    let covering = [(2, set(&[]), ""), (3, set(&["bad"]), "3"), (7, set(&["dub"]), "3")];
    for (i, s, ls) in &covering {
        ensure!(rows[*i].covering == *s, "row {i}: S {:?}", rows[*i].covering);
        ensure!(rows[*i].covering_lengths.symbols() == *ls, "row {i}: L_S {}", rows[*i].covering_lengths.symbols());
    }
    for r in &rows {
        ensure!(r.covering.is_subset(&r.known), "S not a subset of R at {}", r.c);
    }
    Ok("O, L, T, R, L_R on 9 rows; S, L_S on rows 0,1,4,5,6,8; covering rows 2,3,7 = {}, {bad}, {dub}".into())
}

fn c5_species_and_scaling() -> Outcome {
    let all = enumerate_species(&Family::ALL, &ShapeKind::ALL);
    ensure!(all.len() == 45, "{} species", all.len());
    let distinct: BTreeSet<String> = all.iter().map(|s| s.to_string()).collect();
    ensure!(distinct.len() == 45, "duplicate species ids");

    let corpus = generate(&SyntheticConfig { num_lexemes: 60, num_sentences: 240, seed: 55, ..Default::default() });
    let (train, dev) = synthetic::split(&corpus.sentences, 0.25);
    let exclude: BTreeSet<String> = corpus.lexemes.iter().cloned().collect();
    let fresh = generate_lexemes(&mut ChaCha8Rng::seed_from_u64(56), 6, &exclude);
    let dev = inject_lexemes(&dev, &fresh, 3, 57);
    let mut base = TrainConfig::default();
    base.optim.max_iter = 60;
    let lexicon = Lexicon::build_from_corpus(&train);
    let rows = compute_species_scales(&train, &dev, &lexicon, 0.325, &base).map_err(|e| e.to_string())?;
    ensure!(rows.len() == 45, "{} scale rows", rows.len());
    let z: Vec<f64> = rows.iter().map(|r| r.standardized).collect();
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    ensure!(mean.abs() <= 1e-9, "mean {mean:e}");
    ensure!((var - 1.0).abs() <= 1e-9, "variance {var}");

    let recalls: Vec<_> = rows.iter().map(|r| (r.species, r.recall_iv, r.recall_oov, r.zero_oov_support)).collect();
    for r in scales_from_recalls(&recalls, 0.0) {
        ensure!(r.interpolated == r.recall_iv, "alpha 0 gave {} for {}", r.interpolated, r.species);
    }
    for r in scales_from_recalls(&recalls, 1.0) {
        ensure!(r.interpolated == r.recall_oov, "alpha 1 gave {} for {}", r.interpolated, r.species);
    }
    ensure!(interpolate(0.8, 0.4, 0.0) == 0.8 && interpolate(0.8, 0.4, 1.0) == 0.4, "interpolation endpoints");

    let boosted: Vec<(String, f64)> =
        boost_preset().into_iter().filter(|(_, v)| *v != 1.0).map(|(s, v)| (s.to_string(), v)).collect();
    let want = vec![("C:u0".to_string(), 2.0), ("C:b-1".to_string(), 3.0), ("C:b0".to_string(), 3.0)];
    let mut sorted = boosted.clone();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut want_sorted = want.clone();
    want_sorted.sort_by(|a, b| a.0.cmp(&b.0));
    ensure!(sorted == want_sorted, "boost preset {boosted:?}");
    Ok(format!("45 species; standardized mean {mean:.1e}, variance-1 {:.1e}; endpoints exact; boost {{2, 3, 3}}", var - 1.0))
}

fn c6_tau() -> Outcome {
    let tau = |c: Vec<Vec<f64>>| gk_tau(&ContingencyTable::from_counts(c).unwrap());
    let diag = tau(vec![vec![5.0, 0.0, 0.0], vec![0.0, 3.0, 0.0], vec![0.0, 0.0, 7.0]]).map_err(|e| e.to_string())?;
    ensure!((diag - 1.0).abs() < 1e-12, "diagonal {diag}");
    let indep = tau(vec![vec![2.0, 4.0], vec![3.0, 6.0]]).map_err(|e| e.to_string())?;
    ensure!(indep.abs() < 1e-12, "independent {indep}");
    let hand = tau(vec![vec![3.0, 1.0], vec![0.0, 4.0]]).map_err(|e| e.to_string())?;
    ensure!((hand - 0.6).abs() <= 1e-12, "hand table {hand}");

    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut checked, mut undefined) = (0, 0);
    for k in 0..10_000 {
        let rows = rng.gen_range(1..=6);
        let cols = rng.gen_range(1..=6);
        let counts: Vec<Vec<f64>> =
            (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(0..12) as f64).collect()).collect();
        let got = gk_tau(&ContingencyTable::from_counts(counts.clone()).unwrap());
        match (got, common::gini_tau(&counts)) {
            (Ok(t), Some(oracle)) => {
                ensure!((0.0..=1.0).contains(&t), "table {k}: tau {t}");
                ensure!(oracle > -1e-12 && oracle < 1.0 + 1e-12, "table {k}: oracle {oracle}");
                ensure!((t - oracle.clamp(0.0, 1.0)).abs() < 1e-12, "table {k}: {t} vs oracle {oracle}");
                checked += 1;
            }
            (Err(_), None) => undefined += 1,
            (got, oracle) => return Err(format!("table {k}: {got:?} vs oracle {oracle:?}")),
        }
    }
    Ok(format!("fixtures 1.0 / 0.0 / {hand:.12}; {checked} random tables in [0, 1], {undefined} undefined"))
}

struct Synthetic {
    train: Vec<Sentence>,
    test: Vec<Sentence>,
    lexemes: Vec<String>,
}

fn synthetic_split() -> Synthetic {
    let corpus = generate(&SyntheticConfig::default());
    let (train, test) = synthetic::split(&corpus.sentences, 0.1);
    Synthetic { train, test, lexemes: corpus.lexemes }
}

fn c7_end_to_end(data: &Synthetic, model_path: &Path) -> Outcome {
    let start = Instant::now();
    let model = segmenter::train(&data.train, &TrainConfig::default(), &mut |_| {}).map_err(|e| e.to_string())?;
    let trained = start.elapsed();
    model_file::save(&model, model_path).map_err(|e| e.to_string())?;
    let report = charseg::cli::eval_report(&model, &data.test, &model.training_lexicon()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let iv = report.f1_iv().ok_or("no IV words in the test split")?;
    ensure!(iv >= 0.95, "IV word F1 {iv:.4}");
    ensure!(elapsed < Duration::from_secs(15 * 60), "took {}", secs(elapsed));
    Ok(format!(
        "{} train / {} test sentences, {} features; IV word F1 {:.4}, word F1 {:.4}; trained in {}",
        data.train.len(),
        data.test.len(),
        model.crf.dict.len(),
        iv,
        report.word_f1(),
        secs(trained)
    ))
}

fn eval_porcelain(model: &Path, test: &Path, extra: Option<&Path>) -> Result<String, String> {
    let args = EvalArgs {
        model: model.to_path_buf(),
        test: test.to_path_buf(),
        extra_lexicon: extra.map(Path::to_path_buf),
        porcelain: true,
    };
    let mut out = Vec::new();
    cmd_eval(&args, &mut out).map_err(|e| e.to_string())?;
    String::from_utf8(out).map_err(|e| e.to_string())
}

fn porcelain_value(text: &str, key: &str) -> Result<f64, String> {
    let prefix = format!("{key}=");
    let line = text.lines().find(|l| l.starts_with(&prefix)).ok_or(format!("missing {key}"))?;
    line[prefix.len()..].parse().map_err(|_| format!("{key} is {}", &line[prefix.len()..]))
}

fn c8_expansion(data: &Synthetic, model_path: &Path, dir: &Path) -> Outcome {
    let exclude: BTreeSet<String> = data.lexemes.iter().cloned().collect();
    let fresh = generate_lexemes(&mut ChaCha8Rng::seed_from_u64(808), 20, &exclude);
    let test = inject_lexemes(&data.test, &fresh, 3, 809);
    let test_path = dir.join("oov_test.txt");
    std::fs::write(&test_path, charseg::corpus::write_corpus(&test)).map_err(|e| e.to_string())?;
    let lex_path = dir.join("extra.lex");
    std::fs::write(&lex_path, fresh.join("\n") + "\n").map_err(|e| e.to_string())?;

    let bytes_before = std::fs::read(model_path).map_err(|e| e.to_string())?;
    let before = eval_porcelain(model_path, &test_path, None)?;
    let after = eval_porcelain(model_path, &test_path, Some(&lex_path))?;
    let again = eval_porcelain(model_path, &test_path, None)?;
    let bytes_after = std::fs::read(model_path).map_err(|e| e.to_string())?;

    let r_before = porcelain_value(&before, "oov.recall")?;
    let r_after = porcelain_value(&after, "oov.recall")?;
    let oov_gold = porcelain_value(&before, "oov.gold")?;
    ensure!(r_after >= r_before, "OOV recall fell from {r_before} to {r_after}");
    ensure!(bytes_before == bytes_after, "model file changed");
    ensure!(before == again, "evaluation without the extra lexicon changed after expansion");
    Ok(format!(
        "{oov_gold} OOV tokens; recall_oov {r_before:.4} -> {r_after:.4}; model file unchanged ({} bytes)",
        bytes_before.len()
    ))
}

fn c9_sparsity(data: &Synthetic) -> Outcome {
    let train_with = |l1: f64| -> Result<SegmenterModel, String> {
        let config = TrainConfig { hyper: Hyper { l1, ..Hyper::default() }, ..TrainConfig::default() };
        segmenter::train(&data.train, &config, &mut |_| {}).map_err(|e| e.to_string())
    };
    let heavy = train_with(10.0)?;
    let heavy_zero = heavy.crf.zero_fraction();
    ensure!(heavy_zero > 0.10, "lambda1 = 10 left {:.2}% zeros", 100.0 * heavy_zero);
    let plain = train_with(0.0)?;
    let plain_zero = plain.crf.state.iter().chain(&plain.crf.trans).filter(|w| **w == 0.0).count();
    ensure!(plain_zero == 0, "lambda1 = 0 left {plain_zero} exact zeros");
    Ok(format!(
        "lambda1 = 10: {:.2}% exact zeros; lambda1 = 0: {plain_zero} of {} weights zero",
        100.0 * heavy_zero,
        plain.crf.num_params()
    ))
}

fn c10_coverage() -> Outcome {
    let corpus = parse_corpus_str("a b\nab\n").map_err(|e| e.to_string())?;
    let table = word_length_coverage(&corpus, 2).map_err(|e| e.to_string())?;
    let got: Vec<String> = table.rows.values().map(|v| format!("{v:.2}")).collect();
    ensure!(got == ["66.67", "100.00"], "coverage {got:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for k in 0..100 {
        let corpus: Vec<Sentence> = (0..rng.gen_range(1..20)).map(|_| common::random_sentence(&mut rng, 30)).collect();
        let longest = corpus.iter().flat_map(|s| s.spans().map(|(a, b)| b - a)).max().unwrap();
        let table = word_length_coverage(&corpus, longest + 2).map_err(|e| e.to_string())?;
        let values: Vec<f64> = table.rows.values().cloned().collect();
        ensure!(values.windows(2).all(|w| w[0] <= w[1]), "corpus {k}: not monotone {values:?}");
        ensure!((table.rows[&longest] - 100.0).abs() < 1e-9, "corpus {k}: coverage at max length {}", table.rows[&longest]);
    }
    Ok(format!("{{{}}}; monotone on 100 random corpora", got.join(", ")))
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    match &outcome {
        Ok(detail) => println!("PASS  {name}: {detail}"),
        Err(detail) => println!("FAIL  {name}: {detail}"),
    }
    outcome.is_ok()
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let model_path = dir.path().join("synthetic.model");
    let data = synthetic_split();
    let results = [
        run("C1 crf oracle equivalence", c1_crf_oracle),
        run("C2 gradient check", c2_gradient_check),
        run("C3 label round-trip", c3_label_round_trip),
        run("C4 sentence-wise information fixture", c4_sentence_info),
        run("C5 species and scaling", c5_species_and_scaling),
        run("C6 tau fixtures and bounds", c6_tau),
        run("C7 synthetic end-to-end", || c7_end_to_end(&data, &model_path)),
        run("C8 dynamic lexicon expansion", || c8_expansion(&data, &model_path, dir.path())),
        run("C9 l1 sparsity", || c9_sparsity(&data)),
        run("C10 word-length coverage", c10_coverage),
    ];
    let passed = results.iter().filter(|ok| **ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}

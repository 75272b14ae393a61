//! Notes in, aligned spaces out: section split, preprocessing, training on
//! both sides, identical-string anchors, refinement and retrieval.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use termalign::alignment::{extract_anchors, iterative_procrustes, NormalizePolicy, PreparedSpace, Translator};
use termalign::corpus::{build_section_corpora, HeaderSet, PreprocessConfig, RawDocument};
use termalign::embeddings::{train_skipgram, Mode, TrainConfig};
use termalign::evaluation::{neighbor_table, precision_at_k, GoldDictionary};
use termalign::metrics::Metric;

const SHARED: [&str; 8] = ["pain", "chest", "fever", "blood", "pressure", "heart", "sugar", "cough"];
const PRO: [&str; 6] = ["myocardial", "infarction", "hypertension", "febrile", "dyspnea", "hyperglycemia"];
const CON: [&str; 6] = ["attack", "high", "temperature", "breath", "short", "diabetes"];

fn note(rng: &mut ChaCha8Rng, i: usize) -> RawDocument {
    let sentence = |rng: &mut ChaCha8Rng, own: &[&str]| {
        let words: Vec<&str> = (0..9)
            .map(|j| if j % 3 == 0 { *own.choose(rng).unwrap() } else { *SHARED.choose(rng).unwrap() })
            .collect();
        words.join(" ") + "."
    };
    let course: Vec<String> = (0..6).map(|_| sentence(rng, &PRO)).collect();
    let instructions: Vec<String> = (0..6).map(|_| sentence(rng, &CON)).collect();
    RawDocument {
        id: format!("note{i}"),
        text: format!(
            "Chief Complaint:\nsomething\n\nBrief Hospital Course:\n{}\n\nDischarge Instructions:\n{}\n",
            course.join(" "),
            instructions.join(" ")
        ),
    }
}

#[test]
fn notes_to_aligned_spaces() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let docs: Vec<RawDocument> = (0..150).map(|i| note(&mut rng, i)).collect();
    let config = PreprocessConfig {
        stem: false,
        ..PreprocessConfig::default()
    };
    let groups = vec![vec!["Brief hospital course".to_string()], vec!["Discharge instruction".to_string()]];
    let corpora = build_section_corpora(&docs, &HeaderSet::discharge_summary(), &groups, &config);
    assert_eq!(corpora.len(), 2);
    let pro_vocab: Vec<&String> = corpora[0].sentences.iter().flatten().collect();
    assert!(pro_vocab.iter().any(|w| w.as_str() == "myocardial"));
    assert!(!pro_vocab.iter().any(|w| w.as_str() == "diabetes" || w.as_str() == "something"));

    let train = TrainConfig {
        dim: 16,
        window: 3,
        epochs: 3,
        min_count: 1,
        subsample_threshold: 0.0,
        mode: Mode::Subword,
        bucket_count: 50_000,
        seed: 1,
        ..TrainConfig::default()
    };
    let src = train_skipgram(&corpora[0], &train).unwrap().space;
    let tgt = train_skipgram(&corpora[1], &train).unwrap().space;
    let anchors = extract_anchors(&src, &tgt, None);
    assert_eq!(anchors.len(), SHARED.len());

    let (ps, pt) = (PreparedSpace::new(&src, NormalizePolicy::Unit), PreparedSpace::new(&tgt, NormalizePolicy::Unit));
    let w = iterative_procrustes(&ps, &pt, &anchors, 20, 10_000, 5).unwrap();
    assert!(w.orthogonality_error() <= 1e-6);
    assert!(w.iterations_used >= 1 && w.history.len() == w.iterations_used);

    let translator = Translator::new(&w, &ps, &pt, Metric::Csls, 5, 10_000).unwrap();
    let gold = GoldDictionary::new(SHARED.iter().map(|s| (s.to_string(), vec![s.to_string()])).collect()).unwrap();
    let report = precision_at_k(&translator, &gold, &[1, 5, 10], Value::Null).unwrap();
    assert_eq!(report.evaluated, SHARED.len());
    let p: Vec<f64> = report.precision_at.values().copied().collect();
    assert!(p[0] <= p[1] && p[1] <= p[2]);

    // OOV queries still resolve through their character n-grams in subword mode
    let table = neighbor_table(&translator, &["myocardial".into(), "zzzz".into()], 3).unwrap();
    assert_eq!(table.columns.len(), 2);
    assert_eq!(table.columns[0].neighbors.as_ref().unwrap().len(), 3);
}

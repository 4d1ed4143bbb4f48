//! Acceptance suite. Each criterion runs under its own timer and prints one
//! PASS/FAIL line; the process fails if any criterion does.

#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::BufReader;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use distractor_cli::{generate_all, render_mcqs, GenerateArgs};
use distractor_core::annotation::{
    AnnotatedArticle, AnnotatedSentence, EntityTag, Pos, TargetType, TargetWord, Token,
};
use distractor_core::entity::{
    kb_peers, sample_entity_replacements, EntityCategory, EntitySource, KnowledgeBase,
};
use distractor_core::eval::{evaluate, read_labels, read_mcq_questions};
use distractor_core::lexres::{neighborhood, wup, LexicalGraph, VectorTable};
use distractor_core::numeric::{
    perturb, recognize_numeric, render, Magnitude, PerturbStrategy, Rational,
};
use distractor_core::semantic::{edit_distance_score, entropy_rank, passes_filters};
use distractor_core::Mcq;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn open(name: &str) -> BufReader<File> {
    BufReader::new(File::open(fixtures().join(name)).unwrap())
}

fn fixture_args(seed: u64) -> GenerateArgs {
    let fx = fixtures();
    GenerateArgs {
        articles: fx.join("articles.jsonl"),
        qaps: fx.join("qaps.jsonl"),
        vectors: fx.join("vectors.txt"),
        lexgraph: fx.join("lexgraph.json"),
        kb: fx.join("kb.json"),
        config: None,
        seed: Some(seed),
        out: None,
    }
}

fn fixture_mcqs(seed: u64) -> Vec<Mcq> {
    let (mcqs, short) = generate_all(&fixture_args(seed)).unwrap();
    assert!(!short, "fixture run fell short");
    mcqs
}

// 40-digit values of 1 − 1/(1+e^E) from an arbitrary-precision evaluation.
const SD_1: f64 = 0.7310585786300048792511592418218362743651;
const SD_3: f64 = 0.9525741268224332191211518482282477986138;

fn formulas() {
    assert_eq!(edit_distance_score(0, false), 0.5);
    assert!((edit_distance_score(1, false) - SD_1).abs() < 1e-9);
    assert!((edit_distance_score(3, false) - SD_3).abs() < 1e-9);
    assert_eq!(entropy_rank(1.0), 0.0);
    let best = (1..=1000)
        .map(|i| f64::from(i) * 0.001)
        .max_by(|a, b| entropy_rank(*a).total_cmp(&entropy_rank(*b)))
        .unwrap();
    assert!((best - (-1.0f64).exp()).abs() <= 0.0005, "argmax {best}");
}

fn lev(a: &str, b: &str) -> usize {
    fn go(a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() || b.is_empty() {
            return a.len() + b.len();
        }
        if let Some(&d) = memo.get(&(a.len(), b.len())) {
            return d;
        }
        let (ra, rb) = (&a[..a.len() - 1], &b[..b.len() - 1]);
        let sub = usize::from(a[a.len() - 1] != b[b.len() - 1]);
        let d = (go(ra, b, memo) + 1)
            .min(go(a, rb, memo) + 1)
            .min(go(ra, rb, memo) + sub);
        memo.insert((a.len(), b.len()), d);
        d
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    go(&a, &b, &mut HashMap::new())
}

fn oracle_keep(target: &str, candidate: &str) -> bool {
    let t = target.to_lowercase();
    let c = candidate.to_lowercase();
    let tc: Vec<char> = t.chars().collect();
    let cc: Vec<char> = c.chars().collect();
    let same_prefix = tc.len() >= 3 && cc.len() >= 3 && tc[..3] == cc[..3];
    !(c.contains(&t) || (same_prefix && lev(&c, &t) <= 2))
}

fn random_word(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(1..=7);
    (0..len)
        .map(|_| *b"abcAB".choose(rng).unwrap() as char)
        .collect()
}

fn filters() {
    assert!(!passes_filters("news", "breaking news"));
    assert!(!passes_filters("knowledge", "knowladge"));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut removed = 0;
    for _ in 0..200 {
        let t = random_word(&mut rng);
        let c = match rng.gen_range(0..4) {
            0 => random_word(&mut rng),
            1 => format!("{} {t}", random_word(&mut rng)),
            2 => format!(
                "{}{}",
                t.chars().take(3 + rng.gen_range(0..3)).collect::<String>(),
                random_word(&mut rng)
            ),
            _ => t.chars().rev().collect(),
        };
        let keep = oracle_keep(&t, &c);
        removed += usize::from(!keep);
        assert_eq!(passes_filters(&t, &c), keep, "target {t:?} candidate {c:?}");
    }
    assert!(
        (20..=180).contains(&removed),
        "cases cover both outcomes: {removed} removed"
    );
}

struct Dag {
    lemmas: Vec<Vec<usize>>,
    parents: Vec<Vec<usize>>,
}

const LEMMAS: [&str; 6] = ["ash", "birch", "cedar", "dogwood", "elm", "fir"];

fn random_dag(rng: &mut ChaCha8Rng) -> Dag {
    let n = rng.gen_range(1..=10);
    let mut dag = Dag {
        lemmas: Vec::new(),
        parents: Vec::new(),
    };
    for i in 0..n {
        let k = rng.gen_range(1..=2);
        dag.lemmas
            .push(rand::seq::index::sample(rng, LEMMAS.len(), k).into_vec());
        let p = if i == 0 {
            0
        } else {
            rng.gen_range(0..=i.min(3))
        };
        dag.parents
            .push(rand::seq::index::sample(rng, i.max(1), p).into_vec());
    }
    dag
}

fn depth(dag: &Dag, s: usize) -> u32 {
    dag.parents[s]
        .iter()
        .map(|&p| depth(dag, p))
        .min()
        .map_or(1, |d| d + 1)
}

fn ancestors(dag: &Dag, s: usize, out: &mut BTreeSet<usize>) {
    if out.insert(s) {
        for &p in &dag.parents[s] {
            ancestors(dag, p, out);
        }
    }
}

fn brute_wup(dag: &Dag, depths: &[u32], a: usize, b: usize) -> Option<f64> {
    let holders = |l: usize| (0..dag.lemmas.len()).filter(move |&s| dag.lemmas[s].contains(&l));
    let mut best: Option<f64> = None;
    for sa in holders(a) {
        for sb in holders(b) {
            let (mut xa, mut xb) = (BTreeSet::new(), BTreeSet::new());
            ancestors(dag, sa, &mut xa);
            ancestors(dag, sb, &mut xb);
            for &c in xa.intersection(&xb) {
                let s = if sa == sb {
                    1.0
                } else {
                    let raw = 2.0 * f64::from(depths[c]) / f64::from(depths[sa] + depths[sb]);
                    raw.min(1.0 - f64::EPSILON)
                };
                best = Some(best.map_or(s, |b: f64| b.max(s)));
            }
        }
    }
    best
}

fn wup_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let dag = random_dag(&mut rng);
        let synsets: Vec<_> = (0..dag.lemmas.len())
            .map(|i| {
                json!({
                    "id": format!("s{i}"),
                    "pos": "noun",
                    "lemmas": dag.lemmas[i].iter().map(|&l| LEMMAS[l]).collect::<Vec<_>>(),
                    "hypernyms": dag.parents[i].iter().map(|p| format!("s{p}")).collect::<Vec<_>>(),
                })
            })
            .collect();
        let depths: Vec<u32> = (0..dag.lemmas.len()).map(|s| depth(&dag, s)).collect();
        let g = LexicalGraph::from_json_str(&json!({ "synsets": synsets }).to_string()).unwrap();
        for a in 0..LEMMAS.len() {
            let present = dag.lemmas.iter().any(|ls| ls.contains(&a));
            if present {
                assert_eq!(
                    wup(&g, LEMMAS[a], LEMMAS[a]),
                    Some(1.0),
                    "self {}",
                    LEMMAS[a]
                );
            }
            for b in 0..LEMMAS.len() {
                let got = wup(&g, LEMMAS[a], LEMMAS[b]);
                assert_eq!(got, wup(&g, LEMMAS[b], LEMMAS[a]), "symmetry");
                match (got, brute_wup(&dag, &depths, a, b)) {
                    (Some(x), Some(y)) => assert!((x - y).abs() < 1e-12, "{x} vs {y}"),
                    (x, y) => assert_eq!(x, y),
                }
            }
        }
    }
}

fn neighborhood_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for size in [10usize, 100, 1_000, 10_000] {
        let dim = 6;
        let mut rows: Vec<(String, Vec<f64>)> = Vec::with_capacity(size);
        let mut table = VectorTable::new(dim);
        while rows.len() < size {
            // Components in -3..=3 give many parallel vectors and exact ties.
            let v: Vec<f64> = (0..dim)
                .map(|_| f64::from(rng.gen_range(-3i8..=3)))
                .collect();
            if v.iter().all(|&x| x == 0.0) {
                continue;
            }
            let w = format!("w{:05}", rows.len());
            table.insert(&w, v.clone()).unwrap();
            rows.push((w, v));
        }
        for _ in 0..5 {
            let q = rng.gen_range(0..size);
            let lo = rng.gen_range(0.0..0.9);
            let hi = (lo + rng.gen_range(0.05..0.6f64)).min(1.0);
            let qv = &rows[q].1;
            let qn = qv.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut want: Vec<(String, f64)> = rows
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != q)
                .map(|(_, (w, v))| {
                    let dot: f64 = v.iter().zip(qv).map(|(a, b)| a * b).sum();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    (w.clone(), (dot / (n * qn)).clamp(-1.0, 1.0))
                })
                .filter(|(_, s)| lo <= *s && *s <= hi)
                .collect();
            want.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
            let got = neighborhood(&table, &rows[q].0, lo, hi).unwrap();
            assert_eq!(got, want, "size {size}, query {q}, band [{lo}, {hi}]");
        }
    }
}

fn numeric_suite() {
    let friday = recognize_numeric("Friday").unwrap();
    assert_eq!(
        friday.magnitude,
        Magnitude::Point(Rational::from_integer(5))
    );
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let thursday = perturb(&friday, &PerturbStrategy::UnitShift(-1), &mut rng).unwrap();
    assert_eq!(render(&thursday).unwrap(), "Thursday");

    let days = [
        "Monday",
        "Tuesday",
        "Wednesday",
        "Thursday",
        "Friday",
        "Saturday",
        "Sunday",
    ];
    for (i, day) in days.iter().enumerate() {
        let v = recognize_numeric(day).unwrap();
        for d in [-2i64, -1, 1, 2] {
            let w = perturb(&v, &PerturbStrategy::UnitShift(d), &mut rng).unwrap();
            assert_eq!(
                render(&w).unwrap(),
                days[(i as i64 + d).rem_euclid(7) as usize],
                "{day} {d:+}"
            );
        }
    }

    let mcqs = fixture_mcqs(42);
    let by_2020 = mcqs
        .iter()
        .find(|m| m.answer.contains("by 2020"))
        .expect("\"by 2020\" QAP");
    let years: HashSet<&str> = by_2020
        .provenance
        .iter()
        .map(|p| p.replacement.as_str())
        .collect();
    assert_eq!(years.len(), 3, "{years:?}");
    for y in &years {
        assert!(
            *y != "2020" && y.len() == 4 && y.chars().all(|c| c.is_ascii_digit()),
            "{y}"
        );
    }
}

fn person_sentence(words: &[(&str, EntityTag)]) -> AnnotatedSentence {
    let mut text = String::new();
    let mut tokens = Vec::new();
    for (w, tag) in words {
        if !text.is_empty() {
            text.push(' ');
        }
        let start = text.len();
        text.push_str(w);
        tokens.push(Token {
            surface: w.to_string(),
            lemma: w.to_lowercase(),
            pos: if *tag == EntityTag::None {
                Pos::Other
            } else {
                Pos::Noun
            },
            entity: *tag,
            start,
            end: text.len(),
        });
    }
    AnnotatedSentence::new(text, tokens, Vec::new()).unwrap()
}

fn entity_suite() {
    let kb = KnowledgeBase::bundled();
    let peers: HashSet<String> = kb_peers(&kb, EntityCategory::Location, "New York")
        .into_iter()
        .collect();
    for city in ["Boston", "Philadelphia", "Chicago"] {
        assert!(
            peers.contains(city),
            "{city} missing from peers of New York"
        );
    }

    let pool = [
        "Akira", "Kenji", "Yumi", "Hana", "Sora", "Ren", "Mei", "Daichi", "Aoi", "Haruto",
    ];
    let target = TargetWord {
        token_range: 0..1,
        char_span: 0..4,
        surface: "Chie".into(),
        lemma: "chie".into(),
        target_type: TargetType::T2Person,
        role: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let k = rng.gen_range(0..=pool.len());
        let picks = rand::seq::index::sample(&mut rng, pool.len(), k).into_vec();
        let mut words = vec![("Chie", EntityTag::Person)];
        for &p in &picks {
            for _ in 0..rng.gen_range(1..4) {
                words.push(("said", EntityTag::None));
            }
            words.push((pool[p], EntityTag::Person));
        }
        let sentences = words.chunks(5).map(person_sentence).collect();
        let article = AnnotatedArticle::new("rand".into(), sentences).unwrap();
        let n = rng.gen_range(1..=4);
        let out = sample_entity_replacements(&target, &article, &kb, n, &mut rng).unwrap();
        let from_article = out
            .iter()
            .take_while(|r| r.source == EntitySource::Article)
            .count();
        assert_eq!(from_article, n.min(picks.len()), "article pool used first");
        assert!(out[from_article..]
            .iter()
            .all(|r| r.source == EntitySource::KnowledgeBase));
        let picked: HashSet<&str> = picks.iter().map(|&p| pool[p]).collect();
        assert!(out[..from_article]
            .iter()
            .all(|r| picked.contains(r.text.as_str())));
        let distinct: HashSet<&str> = out.iter().map(|r| r.text.as_str()).collect();
        assert_eq!(distinct.len(), out.len());
        assert!(!distinct.contains("Chie"));
    }
}

fn diff_region(answer: &str, distractor: &str) -> (usize, usize) {
    let a: Vec<char> = answer.chars().collect();
    let d: Vec<char> = distractor.chars().collect();
    let p = a.iter().zip(&d).take_while(|(x, y)| x == y).count();
    let max_s = a.len().min(d.len()) - p;
    let s = a
        .iter()
        .rev()
        .zip(d.iter().rev())
        .take(max_s)
        .take_while(|(x, y)| x == y)
        .count();
    (p, a.len() - s)
}

fn end_to_end() {
    let first = fixture_mcqs(42);
    let second = fixture_mcqs(42);
    assert_eq!(first.len(), 10);
    assert_eq!(
        render_mcqs(&first),
        render_mcqs(&second),
        "byte-identical reruns"
    );
    for m in &first {
        assert_eq!(m.distractors.len(), 3, "{}", m.question);
        for (d, p) in m.distractors.iter().zip(&m.provenance) {
            let [lo, hi] = p.span;
            let (start, end) = diff_region(&m.answer, d);
            assert!(
                start + 3 >= lo && end <= hi && start <= end,
                "{d:?} changes more than the target {:?} of {:?}",
                p.target,
                m.answer
            );
        }
    }
}

fn eval_suite() {
    let mcqs = read_mcq_questions(open("eval_mcqs.jsonl")).unwrap();
    let labels = read_labels(open("eval_labels.jsonl")).unwrap();
    let r = evaluate(&mcqs, &labels).unwrap();
    assert_eq!((r.mcqs, r.distractors), (101, 303));
    assert_eq!((r.relevant, r.sufficient, r.adequate_mcqs), (296, 291, 85));
    for (got, want, name) in [
        (r.pct_relevant, 97.7, "relevant"),
        (r.pct_sufficient, 96.0, "sufficient"),
        (r.pct_adequate_mcq, 84.2, "adequate"),
    ] {
        assert!((got - want).abs() <= 0.05, "{name}: {got} vs {want}");
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<String>()
        .cloned()
        .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panic".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn()); 8] = [
        ("formula suite", 1, formulas),
        ("filter suite", 1, filters),
        ("WUP suite", 1, wup_suite),
        ("neighborhood suite", 10, neighborhood_suite),
        ("numeric suite", 1, numeric_suite),
        ("entity suite", 1, entity_suite),
        ("end-to-end fixture", 5, end_to_end),
        ("eval harness", 1, eval_suite),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let limit = Duration::from_secs(limit);
        let verdict = match outcome {
            Err(p) => Err(panic_message(p)),
            Ok(()) if elapsed >= limit => Err("over time limit".to_string()),
            Ok(()) => Ok(()),
        };
        match verdict {
            Ok(()) => println!(
                "PASS  {name:<20} {:>8.3}s (limit {}s)",
                elapsed.as_secs_f64(),
                limit.as_secs()
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "FAIL  {name:<20} {:>8.3}s (limit {}s): {why}",
                    elapsed.as_secs_f64(),
                    limit.as_secs()
                );
            }
        }
    }
    let _ = panic::take_hook();
    println!("{} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

#![allow(clippy::excessive_precision)]

use std::collections::HashMap;

use distractor_core::semantic::{
    combined_score, edit_distance_score, entropy_rank, filter_candidates, levenshtein,
    passes_filters, rank_and_select, Candidate,
};
use proptest::prelude::*;

// 40-digit values of 1 − 1/(1+e^E) and 1/(1+e^E) from an arbitrary-precision
// evaluation.
const SD_1: f64 = 0.7310585786300048792511592418218362743651;
const SD_2: f64 = 0.8807970779778824440597291413023967952064;
const SD_3: f64 = 0.9525741268224332191211518482282477986138;
const SD_5: f64 = 0.9933071490757151444406380196186748196063;
const SD_INV_1: f64 = 0.2689414213699951207488407581781637256349;
const SD_INV_3: f64 = 0.04742587317756678087884815177175220138618;

#[test]
fn edit_distance_score_values() {
    assert_eq!(edit_distance_score(0, false), 0.5);
    assert_eq!(edit_distance_score(0, true), 0.5);
    for (e, want) in [(1, SD_1), (2, SD_2), (3, SD_3), (5, SD_5)] {
        assert!((edit_distance_score(e, false) - want).abs() < 1e-9, "E={e}");
    }
    assert!((edit_distance_score(1, true) - SD_INV_1).abs() < 1e-9);
    assert!((edit_distance_score(3, true) - SD_INV_3).abs() < 1e-9);
}

#[test]
fn edit_distance_score_is_monotone() {
    for e in 0..60 {
        let (a, b) = (
            edit_distance_score(e, false),
            edit_distance_score(e + 1, false),
        );
        assert!(a <= b, "E={e}");
        assert!((0.5..=1.0).contains(&a), "E={e}");
        assert!(edit_distance_score(e + 1, true) <= edit_distance_score(e, true));
    }
}

#[test]
fn entropy_rank_endpoints_and_peak() {
    assert_eq!(entropy_rank(1.0), 0.0);
    let grid: Vec<f64> = (1..=1000).map(|i| f64::from(i) * 0.001).collect();
    let best = grid
        .iter()
        .copied()
        .max_by(|a, b| entropy_rank(*a).total_cmp(&entropy_rank(*b)))
        .unwrap();
    let inv_e = (-1.0f64).exp();
    assert!((best - inv_e).abs() <= 0.0005, "{best}");
    assert!((entropy_rank(inv_e) - inv_e).abs() < 1e-15);
}

#[test]
fn worked_example() {
    let r_prime = combined_score(0.7, 0.5, edit_distance_score(1, false), false);
    assert!((r_prime - 0.6436861928766683).abs() < 1e-12);
    assert!((r_prime - 0.64369).abs() < 5e-6);
    assert!((entropy_rank(r_prime) - 0.2835720578275650).abs() < 1e-12);

    let r_prime = combined_score(0.7, 0.5, edit_distance_score(1, false), true);
    assert!((r_prime - 0.6577646446575012).abs() < 1e-12);
    assert!((entropy_rank(r_prime) - 0.2755429339439514).abs() < 1e-12);
}

#[test]
fn levenshtein_cases() {
    assert_eq!(levenshtein("knowledge", "knowladge"), 1);
    assert_eq!(levenshtein("", "abc"), 3);
    assert_eq!(levenshtein("kitten", "sitting"), 3);
    assert_eq!(levenshtein("café", "cafe"), 1);
}

#[test]
fn filter_worked_cases() {
    assert!(!passes_filters("news", "breaking news"));
    assert!(!passes_filters("knowledge", "knowladge"));
    assert!(passes_filters("profession", "association"));
    assert!(!passes_filters("News", "BREAKING NEWS"));
    assert_eq!(
        filter_candidates(
            "profession",
            vec!["professions", "career", "association", "proffesion"]
        ),
        ["career", "association"]
    );
}

fn oracle_levenshtein(a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if a.is_empty() || b.is_empty() {
        return a.len() + b.len();
    }
    if let Some(&d) = memo.get(&(a.len(), b.len())) {
        return d;
    }
    let (ra, rb) = (&a[..a.len() - 1], &b[..b.len() - 1]);
    let subst = usize::from(a[a.len() - 1] != b[b.len() - 1]);
    let d = (oracle_levenshtein(ra, b, memo) + 1)
        .min(oracle_levenshtein(a, rb, memo) + 1)
        .min(oracle_levenshtein(ra, rb, memo) + subst);
    memo.insert((a.len(), b.len()), d);
    d
}

fn lev(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    oracle_levenshtein(&a, &b, &mut HashMap::new())
}

/// Kept iff the lowercased candidate neither contains the target nor both
/// shares a three-character prefix with it and lies within distance 2.
fn oracle_keep(target: &str, candidate: &str) -> bool {
    let t = target.to_lowercase();
    let c = candidate.to_lowercase();
    let contains = c.contains(&t);
    let tc: Vec<char> = t.chars().collect();
    let cc: Vec<char> = c.chars().collect();
    let same_prefix = tc.len() >= 3 && cc.len() >= 3 && tc[..3] == cc[..3];
    !(contains || (same_prefix && lev(&c, &t) <= 2))
}

fn word() -> impl Strategy<Value = String> {
    // A tiny alphabet so containment, shared prefixes and near misses all occur.
    "[abcAB]{1,7}"
}

fn candidate_for(target: String) -> impl Strategy<Value = (String, String)> {
    let t = target.clone();
    prop_oneof![
        word(),
        word().prop_map(move |w| format!("{w} {t}")),
        (0usize..3, word()).prop_map({
            let t = target.clone();
            move |(cut, w)| format!("{}{}", t.chars().take(3 + cut).collect::<String>(), w)
        }),
        "[abc]".prop_map({
            let t = target.clone();
            move |c| format!("{t}{c}").to_uppercase()
        }),
    ]
    .prop_map(move |c| (target.clone(), c))
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn filter_matches_predicate((target, candidate) in word().prop_flat_map(candidate_for)) {
        prop_assert_eq!(passes_filters(&target, &candidate), oracle_keep(&target, &candidate));
    }

    #[test]
    fn filter_is_idempotent_and_order_preserving(target in word(), cands in prop::collection::vec(word(), 0..12)) {
        let once = filter_candidates(&target, cands.clone());
        let twice = filter_candidates(&target, once.clone());
        prop_assert_eq!(&once, &twice);
        let expected: Vec<String> = cands.into_iter().filter(|c| oracle_keep(&target, c)).collect();
        prop_assert_eq!(once, expected);
    }

    #[test]
    fn levenshtein_matches_recursion(a in "[a-dé]{0,8}", b in "[a-dé]{0,8}") {
        prop_assert_eq!(levenshtein(&a, &b), lev(&a, &b));
        prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
    }

    #[test]
    fn antonym_branch_direction(s_v in 0.0f64..=1.0, s_n in 0.0f64..=1.0, e in 0usize..10) {
        let s_d = edit_distance_score(e, false);
        let plain = combined_score(s_v, s_n, s_d, false);
        let anto = combined_score(s_v, s_n, s_d, true);
        prop_assert!((plain - (s_v + s_n + s_d) / 3.0).abs() < 1e-15);
        prop_assert!((anto - (2.0 * s_v + s_n + s_d) / 4.0).abs() < 1e-15);
        if s_v > (s_n + s_d) / 2.0 + 1e-12 {
            prop_assert!(anto > plain);
        }
    }

    #[test]
    fn entropy_rank_formula(r_prime in 0.0001f64..1.0) {
        let r = entropy_rank(r_prime);
        prop_assert!((r + r_prime * r_prime.ln()).abs() < 1e-15);
        prop_assert!(r >= 0.0 && r <= (-1.0f64).exp() + 1e-15);
    }

    #[test]
    fn rank_and_select_matches_selection(
        raw in prop::collection::vec((0u8..4, 0u8..4, 0u8..4, "[xyz]{1,2}"), 0..20),
        k in 0usize..6,
    ) {
        // Coarse scores force ties on r and s_v.
        let cands: Vec<Candidate> = raw
            .into_iter()
            .map(|(v, n, e, text)| {
                let s_v = f64::from(v) * 0.25;
                let s_n = f64::from(n) * 0.25 + 0.1;
                let s_d = edit_distance_score(usize::from(e), false);
                let r_prime = combined_score(s_v, s_n, s_d, false);
                Candidate { text, s_v, s_n, s_d, antonym: false, r_prime, r: entropy_rank(r_prime) }
            })
            .collect();
        let mut pool = cands.clone();
        let mut expected = Vec::new();
        while expected.len() < k && !pool.is_empty() {
            let mut best = 0;
            for i in 1..pool.len() {
                let (a, b) = (&pool[i], &pool[best]);
                let better = a.r > b.r
                    || (a.r == b.r && (a.s_v > b.s_v || (a.s_v == b.s_v && a.text < b.text)));
                if better {
                    best = i;
                }
            }
            expected.push(pool.remove(best));
        }
        let got = rank_and_select(cands, k);
        let key = |c: &Candidate| (c.text.clone(), c.r.to_bits(), c.s_v.to_bits());
        prop_assert_eq!(got.iter().map(key).collect::<Vec<_>>(), expected.iter().map(key).collect::<Vec<_>>());
    }
}

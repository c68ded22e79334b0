use std::collections::BTreeSet;

use pepr_core::features::{BugFeatures, LineFeatures, NodeType, TestErrorType};
use pepr_core::history::{Counts, FeatureKey, FixStatus, HistoryStore};
use pepr_core::patterns::PatternRegistry;
use pepr_core::ranker::{rank, score_tool, RankerConfig};
use proptest::prelude::*;
use proptest::sample::{select, subsequence};

const TOOLS: [&str; 8] = ["AVATAR", "TBar", "ACS", "Arja", "Recoder", "CURE", "Nopol", "kPAR"];

fn statement() -> impl Strategy<Value = NodeType> {
    select(vec![
        NodeType::Invocation,
        NodeType::Assignment,
        NodeType::Return,
        NodeType::If,
    ])
}

fn children() -> impl Strategy<Value = Vec<NodeType>> {
    subsequence(
        vec![
            NodeType::Cast,
            NodeType::ArrayAccess,
            NodeType::IndexedInvocation,
            NodeType::Literal,
        ],
        0..=4,
    )
}

fn error() -> impl Strategy<Value = Option<TestErrorType>> {
    prop::option::of(select(vec![
        "java.lang.NullPointerException",
        "java.lang.ClassCastException",
    ]))
    .prop_map(|e| e.and_then(TestErrorType::new))
}

fn bug() -> impl Strategy<Value = BugFeatures> {
    (prop::collection::vec((statement(), children()), 1..=5), error()).prop_map(|(lines, err)| BugFeatures {
        bug_id: "b".into(),
        lines: lines
            .into_iter()
            .enumerate()
            .map(|(i, (s, c))| LineFeatures::new(i as u32 + 1, s, c).with_error(err.clone()))
            .collect(),
    })
}

fn counts() -> impl Strategy<Value = Counts> {
    (0u64..10, 0u64..10).prop_map(|(correct, fail)| Counts {
        correct,
        fail,
        overfit: fail / 2,
    })
}

fn keys() -> Vec<FeatureKey> {
    let mut keys: Vec<FeatureKey> = [
        NodeType::Invocation,
        NodeType::Assignment,
        NodeType::Return,
        NodeType::If,
    ]
    .iter()
    .map(FeatureKey::statement)
    .collect();
    for e in ["java.lang.NullPointerException", "java.lang.ClassCastException"] {
        keys.push(FeatureKey::error(&TestErrorType::new(e).unwrap()));
    }
    keys
}

/// A store over `TOOLS` with sparse random counters and pattern sets.
fn store() -> impl Strategy<Value = HistoryStore> {
    let n = TOOLS.len() * keys().len();
    (
        prop::collection::vec(prop::option::weighted(0.5, counts()), n),
        prop::collection::vec(subsequence(vec!["P1", "P3", "P4"], 0..=3), TOOLS.len()),
    )
        .prop_map(|(cells, patterns)| {
            let mut s = HistoryStore::new();
            for (tool, pats) in TOOLS.iter().zip(patterns) {
                s.roster_mut()
                    .register(*tool, pats.into_iter().map(String::from))
                    .unwrap();
            }
            let keys = keys();
            for (i, c) in cells.into_iter().enumerate() {
                if let Some(c) = c {
                    s.set_counts(TOOLS[i / keys.len()], keys[i % keys.len()].clone(), c);
                }
            }
            s
        })
}

fn alpha() -> impl Strategy<Value = f64> {
    select(vec![0.0, 0.3, 0.5, 1.0])
}

proptest! {
    #[test]
    fn ranking_ignores_tool_list_order(
        bug in bug(),
        store in store(),
        alpha in alpha(),
        perm in Just(TOOLS.to_vec()).prop_shuffle(),
    ) {
        let registry = PatternRegistry::builtin();
        let config = RankerConfig::new(alpha).unwrap();
        let a = rank(&bug, TOOLS, &registry, &store, &config).unwrap();
        let b = rank(&bug, perm, &registry, &store, &config).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn top_k_is_a_prefix(bug in bug(), store in store(), alpha in alpha(), k in 0usize..TOOLS.len()) {
        let registry = PatternRegistry::builtin();
        let ranking = rank(&bug, TOOLS, &registry, &store, &RankerConfig::new(alpha).unwrap()).unwrap();
        let shorter = ranking.top_k(k);
        let longer = ranking.top_k(k + 1);
        prop_assert_eq!(&longer[..k], &shorter[..]);
        for w in ranking.entries.windows(2) {
            prop_assert!(w[0].score >= w[1].score);
        }
    }

    #[test]
    fn score_is_zero_exactly_without_history(bug in bug(), store in store(), alpha in alpha()) {
        let registry = PatternRegistry::builtin();
        let config = RankerConfig::new(alpha).unwrap();
        for tool in TOOLS {
            let entry = score_tool(tool, &bug, &registry, &store, &config).unwrap();
            let all_zero = entry.lines.iter().all(|l| l.history == 0.0);
            prop_assert_eq!(entry.score == 0.0, all_zero);
            prop_assert!(entry.score >= 0.0);
        }
    }

    #[test]
    fn more_patterns_never_lower_a_score(
        bug in bug(),
        store in store(),
        alpha in alpha(),
        tool in select(TOOLS.to_vec()),
        added in select(vec!["P1", "P3", "P4"]),
    ) {
        let registry = PatternRegistry::builtin();
        let config = RankerConfig::new(alpha).unwrap();
        let before = score_tool(tool, &bug, &registry, &store, &config).unwrap().score;
        let mut grown = store.clone();
        grown.roster_mut().get_mut(tool).unwrap().patterns.insert(added.to_string());
        let after = score_tool(tool, &bug, &registry, &grown, &config).unwrap().score;
        prop_assert!(after >= before, "{} -> {}", before, after);
    }

    #[test]
    fn update_touches_each_bug_key_once(
        bug in bug(),
        store in store(),
        tool in select(TOOLS.to_vec()),
        status in select(vec![FixStatus::Correct, FixStatus::Overfit, FixStatus::Fail]),
    ) {
        let mut next = store.clone();
        next.update(tool, &bug, status).unwrap();
        let bug_keys: BTreeSet<FeatureKey> = FeatureKey::of_bug(&bug);
        for key in keys() {
            for t in TOOLS {
                let (a, b) = (store.counts(t, &key), next.counts(t, &key));
                if t == tool && bug_keys.contains(&key) {
                    let (dc, df, dov) = match status {
                        FixStatus::Correct => (1, 0, 0),
                        FixStatus::Overfit => (0, 1, 1),
                        FixStatus::Fail => (0, 1, 0),
                    };
                    prop_assert_eq!((b.correct, b.fail, b.overfit), (a.correct + dc, a.fail + df, a.overfit + dov));
                } else {
                    prop_assert_eq!(a, b);
                }
                prop_assert!(b.overfit <= b.fail);
            }
        }
    }

    #[test]
    fn history_json_round_trips(store in store()) {
        let back = HistoryStore::from_json(&store.to_json()).unwrap();
        prop_assert_eq!(back, store);
    }
}

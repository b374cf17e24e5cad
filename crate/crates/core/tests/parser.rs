use std::collections::BTreeSet;
use std::sync::Arc;

use grounded_dialog::agent::{Agent, TRAINING_EPOCHS};
use grounded_dialog::data;
use grounded_dialog::semparse::{
    corpus_examples, oov_candidates, parse_corpus, tokenize, train_on_pairs, world_signature, Category,
    EmbeddingTable, Lexicon, Lf, Parser, ParserConfig, ParserWeights, RootTarget, SemType, TrainingExample,
};
use grounded_dialog::world::standard_fixture;
use proptest::prelude::*;

fn prior_parser() -> Parser {
    let (world, _) = standard_fixture(7).unwrap();
    Parser::new(
        Lexicon::from_json(data::LEXICON_JSON).unwrap(),
        ParserWeights::prior(),
        Arc::new(EmbeddingTable::from_json(data::EMBEDDINGS_JSON).unwrap()),
        Arc::new(world_signature(&world)),
        ParserConfig::default(),
    )
    .unwrap()
}

fn toks(s: &str) -> Vec<String> {
    tokenize(s)
}

/// Every logical form derivable for the whole span by forward and backward
/// application over known lexical entries, with nothing skipped.
fn exhaustive(lexicon: &Lexicon, tokens: &[String], root: &str) -> BTreeSet<Lf> {
    type Item = (Category, Lf);
    let n = tokens.len();
    let mut chart: Vec<Vec<Vec<Item>>> = vec![vec![Vec::new(); n + 1]; n + 1];
    for i in 0..n {
        for j in i + 1..=n {
            for e in lexicon.lookup(&tokens[i..j]) {
                chart[i][j].push((e.category.clone(), e.lf.clone()));
            }
        }
    }
    for len in 2..=n {
        for i in 0..=n - len {
            let j = i + len;
            let mut found = Vec::new();
            for k in i + 1..j {
                for (lc, ll) in &chart[i][k] {
                    for (rc, rl) in &chart[k][j] {
                        if let Category::Fwd(res, arg) = lc {
                            if **arg == *rc {
                                found.push(((**res).clone(), ll.apply_to(rl)));
                            }
                        }
                        if let Category::Bwd(res, arg) = rc {
                            if **arg == *lc {
                                found.push(((**res).clone(), rl.apply_to(ll)));
                            }
                        }
                    }
                }
            }
            found.sort();
            found.dedup();
            chart[i][j].extend(found);
        }
    }
    chart[0][n]
        .iter()
        .filter(|(c, _)| *c == Category::atom(root))
        .map(|(_, l)| l.clone())
        .collect()
}

#[test]
fn tokenizer_examples() {
    assert_eq!(toks("Bring a red can to Bob"), ["bring", "a", "red", "can", "to", "bob"]);
    assert_eq!(toks("Bob's office"), ["bob", "'s", "office"]);
    assert!(toks("").is_empty());
}

#[test]
fn top_parses_match_exhaustive_derivations() {
    let p = prior_parser();
    for (utt, want) in [
        ("go to the lounge", "walk(the(λx.lounge(x)))"),
        ("bring a red can to bob", "deliver(a(λx.(red(x) ∧ can(x))), bob)"),
    ] {
        let t = toks(utt);
        let oracle = exhaustive(p.lexicon(), &t, "S");
        let full: BTreeSet<Lf> = p
            .parse_all(&t, &RootTarget::Command)
            .into_iter()
            .filter(|x| x.skipped.is_empty() && x.oov.is_empty())
            .map(|x| x.lf)
            .collect();
        assert_eq!(full, oracle, "{utt}");
        let top = &p.parse_beam(&t, 10)[0];
        assert_eq!(top.lf.to_string(), want);
        assert!(oracle.contains(&top.lf));
    }
    assert!(p.parse_beam(&toks("xyzzy qwfp"), 10).is_empty());
}

#[test]
fn grab_recovers_through_take() {
    let mut agent = Agent::fixture(7).unwrap();
    agent.parser.remove_word("grab").unwrap();
    assert!(!agent.parser.lexicon().knows("grab"));
    assert!(agent.parser.embeddings().contains("grab"));
    let cands = oov_candidates("grab", agent.parser.lexicon(), agent.parser.embeddings(), 0.40);
    assert!(cands.iter().any(|c| c.known_word == "take"), "{cands:?}");
    let beam = agent.parser.parse_beam(&toks("grab the can for alice"), 10);
    let top = &beam[0];
    assert_eq!(top.lf.to_string(), "deliver(the(λx.can(x)), alice)");
    assert!(top.oov.iter().any(|o| o.token == "grab" && o.known_word == "take"));
    assert!(top.skipped.is_empty());
}

#[test]
fn training_examples() {
    let p = prior_parser();
    assert_eq!(train_on_pairs(&p, &[], 5), *p.weights());

    let items = parse_corpus(data::SEED_CORPUS_JSON).unwrap();
    let ex = corpus_examples(&items);
    let mut trained = p.clone();
    trained.set_weights(train_on_pairs(&p, &ex, TRAINING_EPOCHS));
    let correct = ex
        .iter()
        .filter(|e| trained.parse_beam(&e.tokens, 1).first().is_some_and(|x| x.lf == e.target))
        .count();
    assert!(correct * 10 >= ex.len() * 9, "{correct}/{}", ex.len());

    // A single repeated example whose target the prior ranks second.
    let t = toks("take the red can to alice please");
    let all = p.parse_all(&t, &RootTarget::Command);
    let target = all.iter().rev().find(|x| x.lf != all[0].lf).unwrap().lf.clone();
    let one = vec![
        TrainingExample {
            tokens: t.clone(),
            target: target.clone(),
            root: RootTarget::Command,
        };
        1
    ];
    let mut q = p.clone();
    q.set_weights(train_on_pairs(&p, &one, 3));
    assert_eq!(q.parse_beam(&t, 1)[0].lf, target);
}

#[test]
fn underivable_target_is_skipped() {
    let p = prior_parser();
    let ex = TrainingExample {
        tokens: toks("go to the lounge"),
        target: Lf::parse("(walk r1)").unwrap(),
        root: RootTarget::Command,
    };
    assert_eq!(train_on_pairs(&p, &[ex], 2), *p.weights());
}

#[test]
fn entity_answers_parse() {
    let agent = Agent::fixture(7).unwrap();
    let beam = agent.parser.parse_all(&toks("bob's office"), &RootTarget::Entity(SemType::Room));
    assert_eq!(beam[0].lf.to_string(), "the(λx.(office(x) ∧ possesses(bob, x)))");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn beams_are_prefixes_and_deterministic(idx in 0usize..44, k in 1usize..5) {
        let p = prior_parser();
        let items = parse_corpus(data::SEED_CORPUS_JSON).unwrap();
        let t = toks(&items[idx].utterance);
        let small = p.parse_beam(&t, k);
        let big = p.parse_beam(&t, 5);
        prop_assert!(small.len() <= k);
        prop_assert_eq!(&big[..small.len()], &small[..]);
        prop_assert_eq!(p.parse_beam(&t, 5), big.clone());
        for x in &big {
            prop_assert!(x.lf.is_closed());
            prop_assert_eq!(x.lf.type_of(&p.signature().typer()).unwrap(), SemType::Action);
            // derivation leaves and skips partition the tokens
            let mut covered = x.derivation.covered();
            covered.extend(&x.skipped);
            covered.sort();
            prop_assert_eq!(covered, (0..x.tokens.len()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn fewer_skips_never_score_lower(idx in 0usize..44) {
        let p = prior_parser();
        let items = parse_corpus(data::SEED_CORPUS_JSON).unwrap();
        let mut t = toks(&items[idx].utterance);
        t.insert(0, "um".to_string());
        let all = p.parse_all(&t, &RootTarget::Command);
        for a in &all {
            for b in all.iter().filter(|b| b.lf == a.lf && b.oov == a.oov) {
                if a.skipped.len() < b.skipped.len() {
                    prop_assert!(a.score >= b.score);
                }
            }
        }
    }
}

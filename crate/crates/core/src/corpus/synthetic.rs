//! Seeded generator of SemEval-formatted sentences.
//!
//! Each directed relation is expressed through a small set of cue
//! templates between the two entities, surrounded by random filler. The
//! result is learnable but not trivially separable by a single token, which
//! makes it useful for smoke runs, benchmarks and overfit checks when the
//! official data is not at hand.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{parse_semeval_file, Direction, Family, LabeledSentence, RelationLabel, Span};

const NOUNS: &[&str] = &[
    "storm", "flood", "virus", "engine", "wheel", "box", "bottle", "letter", "river", "village",
    "factory", "company", "student", "teacher", "book", "report", "machine", "pilot", "knife",
    "chef", "tree", "forest", "choir", "singer", "fleet", "ship", "cake", "oven", "apple",
    "basket", "juice", "glass", "lecture", "history", "article", "election", "farmer", "tractor",
    "painter", "brush", "smoke", "fire", "battery", "phone", "coin", "purse", "army", "soldier",
];

const FILLER: &[&str] = &[
    "the", "a", "old", "new", "large", "small", "yesterday", "quickly", "very", "city", "in",
    "morning", "some", "many", "that", "this", "local", "red", "green", "after", "before", "then",
    "finally", "also", "still", "quiet", "busy", "strange",
];

const OTHER_MIDDLE: &[&[&str]] = &[
    &["and", "the"],
    &["near", "a"],
    &["next", "to", "the"],
    &["as", "well", "as"],
    &["while", "the"],
    &["beside", "the"],
    &["or"],
];

fn cues(family: Family, dir: Direction) -> &'static [&'static [&'static str]] {
    use Direction::*;
    use Family::*;
    match (family, dir) {
        (CauseEffect, Forward) => &[&["caused", "the"], &["led", "to"], &["triggered", "a"]],
        (CauseEffect, Reverse) => &[&["was", "caused", "by", "the"], &["resulted", "from"]],
        (ComponentWhole, Forward) => &[&["is", "part", "of", "the"], &["of", "the"]],
        (ComponentWhole, Reverse) => &[&["has", "a"], &["consists", "of"], &["with", "its"]],
        (ContentContainer, Forward) => &[&["was", "in", "a"], &["inside", "the"]],
        (ContentContainer, Reverse) => &[&["contained", "the"], &["was", "full", "of"]],
        (EntityDestination, Forward) => &[&["into", "the"], &["was", "sent", "to"]],
        (EntityDestination, Reverse) => &[&["received", "the"], &["was", "filled", "with"]],
        (EntityOrigin, Forward) => &[&["from", "the"], &["came", "out", "of"]],
        (EntityOrigin, Reverse) => &[&["released", "a"], &["is", "the", "source", "of"]],
        (InstrumentAgency, Forward) => &[&["used", "by", "the"], &["is", "operated", "by"]],
        (InstrumentAgency, Reverse) => &[&["uses", "a"], &["cut", "with", "the"]],
        (MemberCollection, Forward) => &[&["belongs", "to", "the"], &["joined", "the"]],
        (MemberCollection, Reverse) => &[&["of", "many"], &["includes", "a"]],
        (MessageTopic, Forward) => &[&["is", "about", "the"], &["describes", "the"]],
        (MessageTopic, Reverse) => &[&["is", "discussed", "in"], &["was", "the", "subject", "of"]],
        (ProductProducer, Forward) => &[&["was", "made", "by"], &["produced", "by", "a"]],
        (ProductProducer, Reverse) => &[&["built", "the"], &["manufactures", "a"]],
    }
}

fn filler(rng: &mut ChaCha8Rng, max: usize) -> Vec<&'static str> {
    let n = rng.gen_range(0..=max);
    (0..n).map(|_| *FILLER.choose(rng).unwrap()).collect()
}

/// SemEval-format text for `n` synthetic sentences, ids starting at 1.
pub fn synthetic_semeval_text(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for id in 1..=n {
        let label = if rng.gen_bool(0.18) {
            RelationLabel::Other
        } else {
            RelationLabel::from_id(rng.gen_range(0..super::NUM_DIRECTED)).unwrap()
        };
        let middle: &[&str] = match label {
            RelationLabel::Other => OTHER_MIDDLE.choose(&mut rng).unwrap(),
            RelationLabel::Directed(f, d) => cues(f, d).choose(&mut rng).unwrap(),
        };
        let e1 = *NOUNS.choose(&mut rng).unwrap();
        let e2 = loop {
            let c = *NOUNS.choose(&mut rng).unwrap();
            if c != e1 {
                break c;
            }
        };
        let mut words: Vec<String> = filler(&mut rng, 4).iter().map(|s| s.to_string()).collect();
        words.push(format!("<e1>{e1}</e1>"));
        words.extend(middle.iter().map(|s| s.to_string()));
        words.extend(filler(&mut rng, 1).iter().map(|s| s.to_string()));
        words.push(format!("<e2>{e2}</e2>"));
        words.extend(filler(&mut rng, 4).iter().map(|s| s.to_string()));
        let mut sentence = words.join(" ");
        sentence.push('.');
        out.push_str(&format!("{id}\t\"{sentence}\"\n{label}\nComment:\n\n"));
    }
    out
}

pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<LabeledSentence> {
    parse_semeval_file(&synthetic_semeval_text(n, seed)).expect("generator emits valid records")
}

/// Random sentences over the words `w0 .. w{words-1}` with lengths in
/// `min_len..=max_len`, single-token entities and uniformly drawn labels.
pub fn random_sentences(
    n: usize,
    words: usize,
    min_len: usize,
    max_len: usize,
    seed: u64,
) -> Vec<LabeledSentence> {
    assert!(words > 0 && min_len >= 2 && min_len <= max_len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let len = rng.gen_range(min_len..=max_len);
            let tokens = (0..len).map(|_| format!("w{}", rng.gen_range(0..words))).collect();
            let a = rng.gen_range(0..len - 1);
            let b = rng.gen_range(a + 1..len);
            let label = RelationLabel::from_id(rng.gen_range(0..super::NUM_LABELS)).unwrap();
            LabeledSentence::new(i as u64 + 1, tokens, Span::new(a, a), Span::new(b, b), label)
                .expect("valid spans")
        })
        .collect()
}

/// The full word list used by [`random_sentences`].
pub fn random_words(words: usize) -> Vec<String> {
    (0..words).map(|k| format!("w{k}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generates_valid_deterministic_corpora() {
        let a = synthetic_corpus(300, 4);
        assert_eq!(a.len(), 300);
        assert_eq!(a, synthetic_corpus(300, 4));
        assert!(a.iter().any(|s| s.label.is_other()));
        assert!(a.iter().any(|s| s.label.direction() == Some(Direction::Reverse)));
    }

    #[test]
    fn random_sentences_respect_bounds() {
        let s = random_sentences(200, 48, 3, 8, 1);
        assert!(s.iter().all(|x| (3..=8).contains(&x.len()) && x.e1.end < x.e2.start));
        assert_eq!(s, random_sentences(200, 48, 3, 8, 1));
    }
}

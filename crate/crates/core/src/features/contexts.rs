use crate::corpus::LabeledSentence;

/// Token positions of the five sentence regions and the two extended
/// contexts (`left+e1+middle`, `middle+e2+right`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextViews {
    pub left: Vec<usize>,
    pub e1: Vec<usize>,
    pub middle: Vec<usize>,
    pub e2: Vec<usize>,
    pub right: Vec<usize>,
    pub extended_1: Vec<usize>,
    pub extended_2: Vec<usize>,
}

pub fn split_contexts(sentence: &LabeledSentence) -> ContextViews {
    let (e1, e2) = (sentence.e1, sentence.e2);
    let left: Vec<usize> = (0..e1.start).collect();
    let e1v: Vec<usize> = (e1.start..=e1.end).collect();
    let middle: Vec<usize> = (e1.end + 1..e2.start).collect();
    let e2v: Vec<usize> = (e2.start..=e2.end).collect();
    let right: Vec<usize> = (e2.end + 1..sentence.len()).collect();
    let extended_1 = [left.as_slice(), &e1v, &middle].concat();
    let extended_2 = [middle.as_slice(), &e2v, &right].concat();
    ContextViews {
        left,
        e1: e1v,
        middle,
        e2: e2v,
        right,
        extended_1,
        extended_2,
    }
}

impl ContextViews {
    pub fn tokens<'a>(sentence: &'a LabeledSentence, positions: &[usize]) -> Vec<&'a str> {
        positions.iter().map(|&i| sentence.tokens[i].as_str()).collect()
    }
}

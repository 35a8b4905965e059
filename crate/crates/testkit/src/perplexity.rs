//! Reference character n-gram perplexity with add-one smoothing, trained on
//! every given text (no calibration hold-out).

use std::collections::HashMap;

pub struct NaiveNgram {
    order: usize,
    windows: HashMap<Vec<char>, usize>,
    contexts: HashMap<Vec<char>, usize>,
    vocabulary: usize,
}

const PAD: char = '\u{2}';

fn padded(text: &str, order: usize) -> Vec<char> {
    std::iter::repeat_n(PAD, order - 1).chain(text.chars()).collect()
}

impl NaiveNgram {
    pub fn new(training: &[String], order: usize) -> Self {
        let mut windows = HashMap::new();
        let mut contexts = HashMap::new();
        for t in training {
            for w in padded(t, order).windows(order) {
                *windows.entry(w.to_vec()).or_insert(0) += 1;
                *contexts.entry(w[..order - 1].to_vec()).or_insert(0) += 1;
            }
        }
        let mut symbols: Vec<char> = training.iter().flat_map(|t| t.chars()).collect();
        symbols.sort_unstable();
        symbols.dedup();
        Self { order, windows, contexts, vocabulary: symbols.len() + 1 }
    }

    pub fn perplexity(&self, text: &str) -> f64 {
        let chars = padded(text, self.order);
        let windows: Vec<&[char]> = chars.windows(self.order).collect();
        if windows.is_empty() {
            return 1.0;
        }
        let v = self.vocabulary as f64;
        let log_sum: f64 = windows
            .iter()
            .map(|w| {
                let c = self.windows.get(*w).copied().unwrap_or(0);
                let total = self.contexts.get(&w[..self.order - 1]).copied().unwrap_or(0);
                ((c as f64 + 1.0) / (total as f64 + v)).ln()
            })
            .sum();
        (-log_sum / windows.len() as f64).exp()
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

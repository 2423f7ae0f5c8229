#![allow(dead_code)]

// Definitional oracles, quadratic in n.

pub fn auc_oracle(s: &[f64], y: &[bool]) -> f64 {
    let (mut num, mut pairs) = (0.0, 0.0);
    for i in (0..s.len()).filter(|&i| y[i]) {
        for j in (0..s.len()).filter(|&j| !y[j]) {
            pairs += 1.0;
            num += if s[i] > s[j] {
                1.0
            } else if s[i] == s[j] {
                0.5
            } else {
                0.0
            };
        }
    }
    num / pairs
}

pub fn ap_oracle(s: &[f64], y: &[bool]) -> f64 {
    // j is ranked at or above i when its score is higher, or equal with a lower index.
    let above = |j: usize, i: usize| s[j] > s[i] || (s[j] == s[i] && j <= i);
    let positives: Vec<usize> = (0..s.len()).filter(|&i| y[i]).collect();
    let mut total = 0.0;
    for &i in &positives {
        let k = (0..s.len()).filter(|&j| above(j, i)).count();
        let hits = positives.iter().filter(|&&j| above(j, i)).count();
        total += hits as f64 / k as f64;
    }
    total / positives.len() as f64
}

fn f1_from_counts(s: &[f64], y: &[bool], t: f64, positive: bool) -> f64 {
    let pred = |i: usize| (s[i] >= t) == positive;
    let truth = |i: usize| y[i] == positive;
    let tp = (0..s.len()).filter(|&i| pred(i) && truth(i)).count() as f64;
    let predicted = (0..s.len()).filter(|&i| pred(i)).count() as f64;
    let actual = (0..s.len()).filter(|&i| truth(i)).count() as f64;
    if predicted + actual == 0.0 {
        0.0
    } else {
        2.0 * tp / (predicted + actual)
    }
}

pub fn threshold_f1_oracle(vs: &[f64], vy: &[bool], ts: &[f64], ty: &[bool]) -> f64 {
    let mut best: Option<(f64, f64)> = None;
    for &t in vs {
        let f = f1_from_counts(vs, vy, t, true);
        best = match best {
            Some((bf, bt)) if bf > f || (bf == f && bt <= t) => Some((bf, bt)),
            _ => Some((f, t)),
        };
    }
    let t = best.expect("non-empty").1;
    (f1_from_counts(ts, ty, t, true) + f1_from_counts(ts, ty, t, false)) / 2.0
}

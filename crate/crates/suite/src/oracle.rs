//! BLEU, ROUGE and span F1 computed by brute force from their definitions,
//! sharing no code with the crates under test.

/// Occurrences of `gram` in `toks`, by scanning every window.
fn occurrences(toks: &[&str], gram: &[&str]) -> usize {
    if gram.len() > toks.len() {
        return 0;
    }
    (0..=toks.len() - gram.len()).filter(|&i| &toks[i..i + gram.len()] == gram).count()
}

/// Sentence BLEU on whitespace tokens: clipped n-gram precision with the
/// clip taken as the largest count in any single reference, precisions
/// above unigrams smoothed as (m + 1) / (t + 1), a zero unigram match
/// giving 0, and a brevity penalty against the closest reference length
/// (the shorter one on ties).
pub fn bleu(hypothesis: &str, references: &[&str], max_n: usize) -> f64 {
    let hyp: Vec<&str> = hypothesis.split_whitespace().collect();
    let refs: Vec<Vec<&str>> = references.iter().map(|r| r.split_whitespace().collect()).collect();
    if hyp.is_empty() {
        return 0.0;
    }
    let mut product = 1.0f64;
    for n in 1..=max_n {
        let windows = if hyp.len() >= n { hyp.len() - n + 1 } else { 0 };
        let mut seen: Vec<&[&str]> = Vec::new();
        let mut matched = 0usize;
        for i in 0..windows {
            let g = &hyp[i..i + n];
            if seen.contains(&g) {
                continue;
            }
            seen.push(g);
            let mine = occurrences(&hyp, g);
            let best = refs.iter().map(|r| occurrences(r, g)).max().unwrap_or(0);
            matched += mine.min(best);
        }
        let p = if n == 1 {
            if matched == 0 {
                return 0.0;
            }
            matched as f64 / windows as f64
        } else {
            (matched as f64 + 1.0) / (windows as f64 + 1.0)
        };
        product *= p;
    }
    let c = hyp.len();
    let mut r = usize::MAX;
    let mut best_gap = usize::MAX;
    for len in refs.iter().map(|x| x.len()) {
        let gap = if len > c { len - c } else { c - len };
        if gap < best_gap || (gap == best_gap && len < r) {
            best_gap = gap;
            r = len;
        }
    }
    let bp = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    bp * product.powf(1.0 / max_n as f64)
}

/// Mean over texts of BLEU against every other position of the list.
pub fn self_bleu(texts: &[&str], max_n: usize) -> f64 {
    let mut total = 0.0;
    for i in 0..texts.len() {
        let others: Vec<&str> = (0..texts.len()).filter(|&j| j != i).map(|j| texts[j]).collect();
        total += bleu(texts[i], &others, max_n);
    }
    total / texts.len() as f64
}

/// ROUGE-1 and ROUGE-L F1 of one candidate against one reference.
pub fn rouge_pair(candidate: &str, reference: &str) -> (f64, f64) {
    let c: Vec<String> = candidate.split_whitespace().map(|t| t.to_lowercase()).collect();
    let r: Vec<String> = reference.split_whitespace().map(|t| t.to_lowercase()).collect();
    let f = |m: usize| {
        if m == 0 {
            return 0.0;
        }
        let (p, rc) = (m as f64 / c.len() as f64, m as f64 / r.len() as f64);
        2.0 * p * rc / (p + rc)
    };
    let mut used = vec![false; r.len()];
    let mut overlap = 0;
    for t in &c {
        if let Some(k) = (0..r.len()).find(|&k| !used[k] && &r[k] == t) {
            used[k] = true;
            overlap += 1;
        }
    }
    // LCS table
    let mut t = vec![vec![0usize; r.len() + 1]; c.len() + 1];
    for i in 1..=c.len() {
        for j in 1..=r.len() {
            t[i][j] = if c[i - 1] == r[j - 1] { t[i - 1][j - 1] + 1 } else { t[i - 1][j].max(t[i][j - 1]) };
        }
    }
    (f(overlap), f(t[c.len()][r.len()]))
}

/// Exact-match span F1 over (item, label, start, end) tuples.
pub fn span_f1(gold: &[(u64, &str, usize, usize)], predicted: &[(u64, &str, usize, usize)]) -> f64 {
    let tp = predicted.iter().filter(|p| gold.contains(p)).count();
    let (fp, fn_) = (predicted.len() - tp, gold.len() - tp);
    if tp == 0 {
        return 0.0;
    }
    2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
}

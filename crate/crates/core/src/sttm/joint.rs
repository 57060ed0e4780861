use super::SttmModel;
use crate::special::{ln_gamma, ln_rising};

// ln Γ(x + n) - ln Γ(x); exact product form for small n.
fn ln_gamma_ratio(x: f64, n: u32) -> f64 {
    if n <= 32 {
        ln_rising(x, n)
    } else {
        ln_gamma(x + n as f64) - ln_gamma(x)
    }
}

// Log Dirichlet-multinomial marginal of one count row under a symmetric
// prior. An all-zero row contributes exactly 0.
fn dm_row(counts: &[u32], prior: f64) -> f64 {
    let total: u32 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let cells: f64 = counts.iter().filter(|&&n| n > 0).map(|&n| ln_gamma_ratio(prior, n)).sum();
    cells - ln_gamma_ratio(counts.len() as f64 * prior, total)
}

/// Collapsed joint `log p(w, z, s, d | a)` with every multinomial
/// integrated out against its symmetric Dirichlet prior.
pub fn joint_log_prob(model: &SttmModel) -> f64 {
    let h = &model.hyper;
    let c = &model.counts;
    let v = model.vocab_size;
    let words: f64 = c.zw.chunks(v.max(1)).map(|row| dm_row(row, h.beta)).sum();
    let topics: f64 = c.sz.chunks(h.topics).map(|row| dm_row(row, h.alpha)).sum();
    let doc_types: f64 = c.sd.chunks(h.doc_types).map(|row| dm_row(row, h.nu)).sum();
    let transitions: f64 = c.sas.chunks(h.states).map(|row| dm_row(row, h.gamma)).sum();
    words + topics + doc_types + transitions
}

//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use infband::combinat::PairPartition;
use infband::counting::BandGeometry;

/// Counts `η: [2ℓ] → [N]` with every consecutive pair (cyclically) in band
/// and `η(π(i) + 1) = η(i)` for all `i`. Works on the raw partner map, not on
/// the cycle or quotient code.
pub fn brute_force_count(pp: &PairPartition, geom: &BandGeometry) -> u128 {
    let m = pp.size();
    let sigma: Vec<usize> = (1..=m).map(|i| pp.partner(i) % m).collect();
    let mut inverse = vec![0; m];
    for (i, &s) in sigma.iter().enumerate() {
        inverse[s] = i;
    }
    let mut eta = vec![0usize; m];
    fn rec(i: usize, eta: &mut Vec<usize>, sigma: &[usize], inverse: &[usize], geom: &BandGeometry) -> u128 {
        let m = eta.len();
        if i == m {
            let wrap = geom.in_band(eta[m - 1], eta[0]);
            let consistent = (0..m).all(|j| eta[sigma[j]] == eta[j]);
            return u128::from(wrap && consistent);
        }
        let mut total = 0;
        for x in 0..geom.n {
            if i > 0 && !geom.in_band(eta[i - 1], x) {
                continue;
            }
            if sigma[i] < i && eta[sigma[i]] != x {
                continue;
            }
            if inverse[i] < i && eta[inverse[i]] != x {
                continue;
            }
            eta[i] = x;
            total += rec(i + 1, eta, sigma, inverse, geom);
        }
        total
    }
    rec(0, &mut eta, &sigma, &inverse, geom)
}

/// Direct crossing test: blocks `(a, b)`, `(c, d)` cross iff `a < c < b < d`.
pub fn has_crossing(pp: &PairPartition) -> bool {
    let blocks = pp.blocks();
    blocks.iter().any(|&(a, b)| blocks.iter().any(|&(c, d)| a < c && c < b && b < d))
}

pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

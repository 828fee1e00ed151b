//! Quadrature weights for the uniform-grid operators, cached per (order, length).
//!
//! The order-β integral against a piecewise-linear interpolant reduces to a
//! discrete convolution: row n of the integral reads
//!
//!   g_n = h^β / Γ(β+2) * ( first[n] f_0 + sum_{j=1}^{n-1} conv[n-j] f_j + f_n )
//!
//! with first[n] = (n-1)^(β+1) - (n-β-1) n^β and
//! conv[k] = (k+1)^(β+1) - 2 k^(β+1) + (k-1)^(β+1). At β = 1 these collapse to
//! the cumulative trapezoid rule exactly. The L1 slope weights for the Caputo
//! form are l1[k] = k^(1-β) - (k-1)^(1-β).
//!
//! Caches are safe for concurrent readers; writes take the lock briefly.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

pub struct TrapWeights {
    /// conv[k], valid for 1 <= k <= n_max - 1 (index 0 unused).
    pub conv: Vec<f64>,
    /// first[n], valid for 1 <= n <= n_max (index 0 unused).
    pub first: Vec<f64>,
}

type TrapCache = RwLock<HashMap<(u64, usize), Arc<TrapWeights>>>;
type L1Cache = RwLock<HashMap<(u64, usize), Arc<Vec<f64>>>>;

static TRAP_CACHE: OnceLock<TrapCache> = OnceLock::new();
static L1_CACHE: OnceLock<L1Cache> = OnceLock::new();

/// Weights for the piecewise-linear kernel quadrature on rows 0..=n_max.
pub fn trapezoid_weights(beta: f64, n_max: usize) -> Arc<TrapWeights> {
    let cache = TRAP_CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    let key = (beta.to_bits(), n_max);
    if let Some(w) = cache.read().expect("weight cache poisoned").get(&key) {
        return Arc::clone(w);
    }
    let w = Arc::new(compute_trapezoid(beta, n_max));
    let mut map = cache.write().expect("weight cache poisoned");
    Arc::clone(map.entry(key).or_insert(w))
}

/// L1 slope weights l1[k] for rows 0..=n_max (index 0 unused).
pub fn l1_weights(beta: f64, n_max: usize) -> Arc<Vec<f64>> {
    let cache = L1_CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    let key = (beta.to_bits(), n_max);
    if let Some(w) = cache.read().expect("weight cache poisoned").get(&key) {
        return Arc::clone(w);
    }
    let p = 1.0 - beta;
    let mut l1 = vec![0.0; n_max + 1];
    for (k, slot) in l1.iter_mut().enumerate().skip(1) {
        *slot = (k as f64).powf(p) - ((k - 1) as f64).powf(p);
    }
    let w = Arc::new(l1);
    let mut map = cache.write().expect("weight cache poisoned");
    Arc::clone(map.entry(key).or_insert(w))
}

/// L1 table covering histories of up to `min_len` samples, padded to the next
/// power of two so that repeatedly growing histories keep hitting the cache.
pub fn l1_weights_covering(beta: f64, min_len: usize) -> Arc<Vec<f64>> {
    l1_weights(beta, min_len.next_power_of_two().max(64))
}

fn compute_trapezoid(beta: f64, n_max: usize) -> TrapWeights {
    let p = beta + 1.0;
    let mut conv = vec![0.0; n_max.max(1)];
    for (k, slot) in conv.iter_mut().enumerate().skip(1) {
        let k = k as f64;
        *slot = (k + 1.0).powf(p) - 2.0 * k.powf(p) + (k - 1.0).powf(p);
    }
    let mut first = vec![0.0; n_max + 1];
    for (n, slot) in first.iter_mut().enumerate().skip(1) {
        let n = n as f64;
        *slot = (n - 1.0).powf(p) - (n - beta - 1.0) * n.powf(beta);
    }
    TrapWeights { conv, first }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_order_collapses_to_trapezoid() {
        let w = trapezoid_weights(1.0, 16);
        for n in 1..=16 {
            assert!((w.first[n] - 1.0).abs() < 1e-12, "first[{n}] = {}", w.first[n]);
        }
        for k in 1..16 {
            assert!((w.conv[k] - 2.0).abs() < 1e-12, "conv[{k}] = {}", w.conv[k]);
        }
    }

    #[test]
    fn first_row_weight_is_beta() {
        for beta in [0.25, 0.5, 0.75] {
            let w = trapezoid_weights(beta, 4);
            assert!((w.first[1] - beta).abs() < 1e-14);
        }
    }

    #[test]
    fn caches_return_shared_instances() {
        let a = trapezoid_weights(0.5, 32);
        let b = trapezoid_weights(0.5, 32);
        assert!(Arc::ptr_eq(&a, &b));
        let c = l1_weights(0.5, 32);
        let d = l1_weights(0.5, 32);
        assert!(Arc::ptr_eq(&c, &d));
    }

    #[test]
    fn l1_weights_sum_telescopes() {
        let w = l1_weights(0.6, 50);
        let total: f64 = w[1..=50].iter().sum();
        assert!((total - 50f64.powf(0.4)).abs() < 1e-10);
    }
}

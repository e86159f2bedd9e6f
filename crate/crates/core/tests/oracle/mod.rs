//! Independent reference computations used by the integration tests.
#![allow(dead_code)]

/// Timely throughput by walking every per-station, per-slot transmit
/// decision of one frame. `prob(n)` is the transmit probability with `n`
/// active stations.
pub fn brute_force_throughput(delay: u32, stations: u32, prob: &dyn Fn(u32) -> f64) -> f64 {
    fn walk(slots_left: u32, active: u32, prob: &dyn Fn(u32) -> f64) -> f64 {
        if slots_left == 0 || active == 0 {
            return 0.0;
        }
        let n = active.count_ones();
        let p = prob(n);
        let mut expected = 0.0;
        // every subset of the active stations is a possible transmitter set
        let mut tx = active;
        loop {
            let k = tx.count_ones();
            let weight = p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
            if weight > 0.0 {
                let (gain, next) = if k == 1 { (1.0, active & !tx) } else { (0.0, active) };
                expected += weight * (gain + walk(slots_left - 1, next, prob));
            }
            if tx == 0 {
                break;
            }
            tx = (tx - 1) & active;
        }
        expected
    }
    walk(delay, (1_u32 << stations) - 1, prob) / f64::from(delay)
}

/// Distribution of successes in one frame of p-constant ALOHA, by a
/// straight recursion over the number of finished stations.
pub fn frame_success_distribution(delay: u32, stations: u32, p: f64) -> Vec<f64> {
    let n = stations as usize;
    let mut dist = vec![0.0; n + 1];
    dist[0] = 1.0;
    for _ in 0..delay {
        let mut next = vec![0.0; n + 1];
        for m in 0..=n {
            let active = (n - m) as i32;
            let s = if active == 0 { 0.0 } else { f64::from(active) * p * (1.0 - p).powi(active - 1) };
            next[m] += dist[m] * (1.0 - s);
            if active > 0 {
                next[m + 1] += dist[m] * s;
            }
        }
        dist = next;
    }
    dist
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact distribution of the sweep estimate `10 k*` when each block spans
/// whole frames. Entry `k - 1` is `P(k* = k)`; ties go to the smallest `k`.
pub fn exact_estimate_distribution(delay: u32, stations: u32, blocks: u32, block_len: u32, base_p: f64) -> Vec<f64> {
    assert_eq!(block_len % delay, 0);
    let frames = block_len / delay;
    let pmfs: Vec<Vec<f64>> = (1..=blocks)
        .map(|k| {
            let frame = frame_success_distribution(delay, stations, base_p / f64::from(k));
            let mut pmf = vec![1.0];
            for _ in 0..frames {
                pmf = convolve(&pmf, &frame);
            }
            pmf
        })
        .collect();
    let len = pmfs.iter().map(Vec::len).max().unwrap();
    // cdfs[j][s] = P(X_j < s)
    let cdfs: Vec<Vec<f64>> = pmfs
        .iter()
        .map(|pmf| {
            let mut acc = 0.0;
            let mut c = vec![0.0];
            for s in 0..len {
                acc += pmf.get(s).unwrap_or(&0.0);
                c.push(acc);
            }
            c
        })
        .collect();
    (0..blocks as usize)
        .map(|k| {
            (0..len)
                .map(|s| {
                    let mut pr = *pmfs[k].get(s).unwrap_or(&0.0);
                    for (j, c) in cdfs.iter().enumerate() {
                        if j < k {
                            pr *= c[s];
                        } else if j > k {
                            pr *= c[s + 1];
                        }
                    }
                    pr
                })
                .sum()
        })
        .collect()
}

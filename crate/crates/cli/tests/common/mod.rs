//! Hartigan's dip test of unimodality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dip statistic of a sample: the sup-distance from its empirical CDF to the
/// nearest unimodal CDF (Hartigan & Hartigan's algorithm).
pub fn dip(sample: &[f64]) -> f64 {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len();
    if n < 2 || x[0] == x[n - 1] {
        return 0.0;
    }
    // mn[j]: previous vertex of the greatest convex minorant ending at j
    let mut mn = vec![0usize; n];
    for j in 1..n {
        mn[j] = j - 1;
        loop {
            let a = mn[j];
            let b = mn[a];
            if a == 0 || (x[j] - x[a]) * ((a - b) as f64) < (x[a] - x[b]) * ((j - a) as f64) {
                break;
            }
            mn[j] = b;
        }
    }
    // mj[k]: next vertex of the least concave majorant starting at k
    let mut mj = vec![n - 1; n];
    for k in (0..n - 1).rev() {
        mj[k] = k + 1;
        loop {
            let a = mj[k];
            let b = mj[a];
            let lhs = (x[k] - x[a]) * (a as f64 - b as f64);
            if a == n - 1 || lhs < (x[a] - x[b]) * (k as f64 - a as f64) {
                break;
            }
            mj[k] = b;
        }
    }

    let (mut low, mut high) = (0usize, n - 1);
    // distances are in units of 1/n until the end
    let mut dip = 1.0f64;
    loop {
        let mut gcm = vec![high];
        while *gcm.last().unwrap() > low {
            gcm.push(mn[*gcm.last().unwrap()]);
        }
        let mut lcm = vec![low];
        while *lcm.last().unwrap() < high {
            lcm.push(mj[*lcm.last().unwrap()]);
        }
        let l_gcm = gcm.len() - 1;
        let l_lcm = lcm.len() - 1;

        // largest vertical distance between the two hulls, and where
        let mut ig = l_gcm;
        let mut ih = l_lcm;
        let mut d = 0.0f64;
        if l_gcm != 1 || l_lcm != 1 {
            let mut ix = l_gcm - 1;
            let mut iv = 1usize;
            loop {
                let gx = gcm[ix];
                let lv = lcm[iv];
                if gx > lv {
                    let g1 = gcm[ix + 1];
                    let dx = (lv - g1 + 1) as f64 - (x[lv] - x[g1]) * (gx - g1) as f64 / (x[gx] - x[g1]);
                    iv += 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv - 1;
                    }
                } else {
                    let l1 = lcm[iv - 1];
                    let dx = (x[gx] - x[l1]) * (lv - l1) as f64 / (x[lv] - x[l1]) - (gx as f64 - l1 as f64 - 1.0);
                    if dx >= d {
                        d = dx;
                        ig = ix;
                        ih = iv;
                    }
                    if ix == 0 {
                        // stays at the first vertex
                    } else {
                        ix -= 1;
                    }
                }
                if iv > l_lcm {
                    iv = l_lcm;
                }
                if gcm[ix] == lcm[iv] {
                    break;
                }
            }
        } else {
            d = 1.0;
        }
        if d < dip {
            break;
        }

        // dips of the hulls against the empirical CDF on the modal flanks
        let mut dip_l = 0.0f64;
        for j in ig..l_gcm {
            let (jb, je) = (gcm[j + 1], gcm[j]);
            let mut max_t = 1.0f64;
            if je - jb > 1 && x[je] != x[jb] {
                let c = (je - jb) as f64 / (x[je] - x[jb]);
                for jj in jb..=je {
                    max_t = max_t.max((jj - jb + 1) as f64 - (x[jj] - x[jb]) * c);
                }
            }
            dip_l = dip_l.max(max_t);
        }
        let mut dip_u = 0.0f64;
        for j in ih..l_lcm {
            let (jb, je) = (lcm[j], lcm[j + 1]);
            let mut max_t = 1.0f64;
            if je - jb > 1 && x[je] != x[jb] {
                let c = (je - jb) as f64 / (x[je] - x[jb]);
                for jj in jb..=je {
                    max_t = max_t.max((x[jj] - x[jb]) * c - (jj as f64 - jb as f64 - 1.0));
                }
            }
            dip_u = dip_u.max(max_t);
        }
        dip = dip.max(dip_l.max(dip_u));

        if low == gcm[ig] && high == lcm[ih] {
            break;
        }
        low = gcm[ig];
        high = lcm[ih];
    }
    dip / (2.0 * n as f64)
}

/// Monte-Carlo p-value of the dip against the uniform distribution, the
/// least favourable unimodal null.
pub fn dip_p_value(sample: &[f64], resamples: usize, seed: u64) -> (f64, f64) {
    let observed = dip(sample);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = vec![0.0; sample.len()];
    let exceed = (0..resamples)
        .filter(|_| {
            for v in u.iter_mut() {
                *v = rng.random::<f64>();
            }
            dip(&u) >= observed
        })
        .count();
    (observed, (1 + exceed) as f64 / (1 + resamples) as f64)
}

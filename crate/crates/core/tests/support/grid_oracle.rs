//! Brute-force arbitrage oracle.
//!
//! Searches trades directly instead of solving optimality conditions. A trade
//! is described by the log change `x_i` of each fee-adjusted reserve
//! `R_i + gamma * in_i - out_i`; staying on the invariant surface fixes one
//! coordinate from the others. Profit is concave in the free coordinates, so a
//! zooming grid converges to the global maximum. For three assets every choice
//! of dependent coordinate is searched, which keeps each possible untraded
//! asset on an axis-aligned line of the grid.

#![allow(dead_code)]

pub struct OracleTrade {
    pub profit: f64,
    pub delta_in: Vec<f64>,
    pub delta_out: Vec<f64>,
}

/// Tokens in/out and arbitrageur profit for log changes `x`.
pub fn trade_for(x: &[f64], reserves: &[f64], prices: &[f64], gamma: f64) -> OracleTrade {
    let n = x.len();
    let mut delta_in = vec![0.0; n];
    let mut delta_out = vec![0.0; n];
    let mut profit = 0.0;
    for i in 0..n {
        if x[i] > 0.0 {
            delta_in[i] = reserves[i] * x[i].exp_m1() / gamma;
            profit -= prices[i] * delta_in[i];
        } else if x[i] < 0.0 {
            delta_out[i] = -reserves[i] * x[i].exp_m1();
            profit += prices[i] * delta_out[i];
        }
    }
    OracleTrade { profit, delta_in, delta_out }
}

fn profit_at(free: &[f64], dep: usize, reserves: &[f64], weights: &[f64], prices: &[f64], gamma: f64) -> (f64, Vec<f64>) {
    let n = reserves.len();
    let mut x = vec![0.0; n];
    let mut fi = free.iter();
    let mut acc = 0.0;
    for i in 0..n {
        if i != dep {
            x[i] = *fi.next().unwrap();
            acc += weights[i] * x[i];
        }
    }
    x[dep] = -acc / weights[dep];
    (trade_for(&x, reserves, prices, gamma).profit, x)
}

const POINTS: usize = 41;
const START_HALF_WIDTH: f64 = 4.0;
const MIN_HALF_WIDTH: f64 = 1e-13;

/// Best trade for two or three assets; the null trade when nothing beats zero.
pub fn grid_arb(reserves: &[f64], weights: &[f64], prices: &[f64], gamma: f64) -> OracleTrade {
    let n = reserves.len();
    assert!(n == 2 || n == 3, "oracle handles two or three assets");
    let mut best_x = vec![0.0; n];
    let mut best = 0.0;
    for dep in 0..n {
        if n == 2 && dep == 0 {
            continue;
        }
        let dims = n - 1;
        let mut center = vec![0.0; dims];
        let mut half = START_HALF_WIDTH;
        let (mut local_best, mut local_x) = profit_at(&center, dep, reserves, weights, prices, gamma);
        while half > MIN_HALF_WIDTH {
            let step = 2.0 * half / (POINTS - 1) as f64;
            let mut best_center = center.clone();
            let mut idx = vec![0usize; dims];
            loop {
                let point: Vec<f64> = (0..dims)
                    .map(|d| {
                        let off = idx[d] as f64 - ((POINTS - 1) / 2) as f64;
                        // keep the exact center (and so any zero coordinate) on the grid
                        if off == 0.0 { center[d] } else { center[d] + off * step }
                    })
                    .collect();
                let (p, x) = profit_at(&point, dep, reserves, weights, prices, gamma);
                if p > local_best {
                    local_best = p;
                    local_x = x;
                    best_center = point;
                }
                let mut d = 0;
                loop {
                    idx[d] += 1;
                    if idx[d] < POINTS {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                    if d == dims {
                        break;
                    }
                }
                if d == dims {
                    break;
                }
            }
            center = best_center;
            half = 3.0 * step;
        }
        if local_best > best {
            best = local_best;
            best_x = local_x;
        }
    }
    if best <= 0.0 {
        return OracleTrade { profit: 0.0, delta_in: vec![0.0; n], delta_out: vec![0.0; n] };
    }
    trade_for(&best_x, reserves, prices, gamma)
}

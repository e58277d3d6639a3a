#![allow(dead_code)]

use bellman_strip::classes::StepFunction;
use rand::Rng;

/// Random step function with 1..=`max_pieces` pieces of random length.
pub fn step<R: Rng>(rng: &mut R, max_pieces: usize, mut value: impl FnMut(&mut R) -> f64) -> StepFunction {
    let n = rng.gen_range(1..=max_pieces);
    let mut cuts: Vec<f64> = (1..n).map(|_| rng.gen_range(0.02..0.98)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let mut bp = vec![0.0];
    bp.extend(cuts);
    bp.push(1.0);
    let values = (0..bp.len() - 1).map(|_| value(rng)).collect();
    StepFunction::new(bp, values).expect("valid layout")
}

pub fn scaled(phi: &StepFunction, c: f64) -> StepFunction {
    StepFunction::new(phi.breakpoints().to_vec(), phi.values().iter().map(|v| c * v).collect()).unwrap()
}

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Latin hypercube sample of `count` points in `[0, 1)^D`: every axis is cut into
/// `count` strata and each stratum holds exactly one jittered coordinate.
pub fn latin_hypercube<const D: usize>(count: usize, seed: u64) -> Vec<[f64; D]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut axes: Vec<Vec<usize>> = Vec::with_capacity(D);
    for _ in 0..D {
        let mut perm: Vec<usize> = (0..count).collect();
        perm.shuffle(&mut rng);
        axes.push(perm);
    }
    (0..count)
        .map(|k| {
            let mut p = [0.0; D];
            for (d, axis) in axes.iter().enumerate() {
                p[d] = (axis[k] as f64 + rng.gen::<f64>()) / count as f64;
            }
            p
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_per_stratum() {
        let pts = latin_hypercube::<3>(50, 7);
        for d in 0..3 {
            let mut cells: Vec<usize> = pts.iter().map(|p| (p[d] * 50.0) as usize).collect();
            cells.sort();
            assert_eq!(cells, (0..50).collect::<Vec<_>>());
        }
        assert_eq!(pts, latin_hypercube::<3>(50, 7));
    }
}

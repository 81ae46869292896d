//! Scoring math behind replay and parent selection, generic over the
//! scalar width.

use crate::scalar::Scalar;

/// Learnability of a success rate: p(1-p), maximal at p = 0.5.
///
/// Panics outside [0, 1]; success rates are means of booleans, so an
/// out-of-domain input is a caller bug.
pub fn learnability<S: Scalar>(p: S) -> S {
    assert!(
        p >= S::zero() && p <= S::one(),
        "success rate out of [0,1]: {p:?}"
    );
    p * (S::one() - p)
}

/// Rank-prioritized weights: weight 1/rank with rank 1 for the highest
/// score; equal scores rank by ascending position (stable).
pub fn rank_weights<S: Scalar>(scores: &[S]) -> Vec<S> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are not NaN")
            .then(a.cmp(&b))
    });
    let mut weights = vec![S::zero(); scores.len()];
    for (rank0, &i) in order.iter().enumerate() {
        weights[i] = S::one() / S::from_usize_lossy(rank0 + 1);
    }
    weights
}

/// The replay mixture: (1-tau) * rank term + tau * staleness term.
///
/// The rank term raises each 1/rank weight to 1/beta and normalizes; the
/// staleness term is (c - C_i) normalized, falling back to uniform when
/// every node was drawn at the current counter value.
pub fn replay_probs<S: Scalar>(scores: &[S], tau: S, beta: S, c: u64, drawn_at: &[u64]) -> Vec<S> {
    assert_eq!(scores.len(), drawn_at.len());
    assert!(!scores.is_empty(), "need at least one scored node");
    let n = scores.len();

    let mut rank_term = rank_weights(scores);
    for w in &mut rank_term {
        *w = w.powf(S::one() / beta);
    }
    normalize(&mut rank_term);

    let mut staleness: Vec<S> = drawn_at
        .iter()
        .map(|&ci| {
            debug_assert!(ci <= c, "per-node counter ahead of the global counter");
            S::from_u64(c - ci).expect("staleness representable")
        })
        .collect();
    if staleness.iter().all(|s| *s == S::zero()) {
        let uniform = S::one() / S::from_usize_lossy(n);
        staleness = vec![uniform; n];
    } else {
        normalize(&mut staleness);
    }

    rank_term
        .iter()
        .zip(&staleness)
        .map(|(&r, &s)| (S::one() - tau) * r + tau * s)
        .collect()
}

fn normalize<S: Scalar>(v: &mut [S]) {
    let total = v.iter().fold(S::zero(), |a, &b| a + b);
    assert!(total > S::zero(), "cannot normalize a zero vector");
    for x in v.iter_mut() {
        *x = *x / total;
    }
}

/// Draw an index from unnormalized non-negative weights. Zero-total weight
/// sets fall back to uniform (e.g. every candidate at success rate 1.0).
pub fn weighted_draw<S: Scalar, R: rand::Rng>(weights: &[S], rng: &mut R) -> usize {
    assert!(!weights.is_empty());
    let total = weights.iter().fold(S::zero(), |a, &b| a + b);
    if total <= S::zero() {
        return rng.gen_range(0..weights.len());
    }
    let u = S::from_f64(rng.gen::<f64>()).expect("unit uniform") * total;
    let mut acc = S::zero();
    for (i, &w) in weights.iter().enumerate() {
        acc = acc + w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= tol, "got {got:?}, want {want:?}");
        }
    }

    #[test]
    fn learnability_curve() {
        assert_eq!(learnability(0.5), 0.25);
        assert_eq!(learnability(0.0), 0.0);
        assert_eq!(learnability(1.0), 0.0);
        assert_eq!(learnability(0.75), 0.1875);
    }

    #[test]
    #[should_panic(expected = "out of [0,1]")]
    fn learnability_rejects_out_of_domain() {
        learnability(1.5);
    }

    #[test]
    fn ranks_break_ties_by_position() {
        let w = rank_weights(&[0.2, 0.4, 0.2]);
        assert_close(&w, &[0.5, 1.0, 1.0 / 3.0], 1e-12);
    }

    #[test]
    fn mixture_matches_hand_computation() {
        // ranks (1, 3, 2) -> weights (1, 1/3, 1/2) -> (0.54545, 0.18182,
        // 0.27273); staleness (1, 8, 5)/14; mixed at tau = 0.3.
        let p = replay_probs(&[0.25, 0.09, 0.16], 0.3, 1.0, 10, &[9, 2, 5]);
        assert_close(&p, &[0.40325, 0.29870, 0.29805], 1e-4);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tau_zero_is_pure_rank() {
        let p = replay_probs(&[0.25, 0.09, 0.16], 0.0, 1.0, 10, &[9, 2, 5]);
        assert_close(&p, &[6.0 / 11.0, 2.0 / 11.0, 3.0 / 11.0], 1e-12);
    }

    #[test]
    fn tau_one_is_pure_staleness() {
        let p = replay_probs(&[0.25, 0.09, 0.16], 1.0, 1.0, 10, &[9, 2, 5]);
        assert_close(&p, &[1.0 / 14.0, 8.0 / 14.0, 5.0 / 14.0], 1e-12);
    }

    #[test]
    fn degenerate_staleness_goes_uniform() {
        let p = replay_probs(&[0.25, 0.09], 1.0, 1.0, 7, &[7, 7]);
        assert_close(&p, &[0.5, 0.5], 1e-12);
    }

    #[test]
    fn beta_flattens_the_rank_term() {
        // At beta -> large, (1/rank)^(1/beta) -> 1 for every rank.
        let p = replay_probs(&[0.25, 0.09, 0.16], 0.0, 1e9, 0, &[0, 0, 0]);
        assert_close(&p, &[1.0 / 3.0; 3], 1e-6);
    }

    #[test]
    fn f32_and_f64_agree() {
        let p64 = replay_probs(&[0.25f64, 0.09, 0.16], 0.3, 1.0, 10, &[9, 2, 5]);
        let p32 = replay_probs(&[0.25f32, 0.09, 0.16], 0.3, 1.0, 10, &[9, 2, 5]);
        for (a, b) in p64.iter().zip(&p32) {
            assert!((a - f64::from(*b)).abs() < 1e-6);
        }
    }

    #[test]
    fn weighted_draw_zero_total_is_uniform() {
        let mut rng = crate::rngstream::stream(1, "draw", &[]);
        let mut hits = [0u32; 3];
        for _ in 0..3000 {
            hits[weighted_draw(&[0.0, 0.0, 0.0], &mut rng)] += 1;
        }
        for h in hits {
            assert!((700..=1300).contains(&h), "{hits:?}");
        }
    }
}

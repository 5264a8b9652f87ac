use proptest::prelude::*;
use qdibp::layout::Dimensions;
use qdibp::shuffle::{self, Permutation};
use qdibp::{stats, AggregatedVector, BitVec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn aggregated(n: usize, m: usize, raw: &[u64]) -> AggregatedVector {
    let dims = Dimensions::new(n, m).unwrap();
    let ss: Vec<BitVec> = raw.iter().map(|&s| BitVec::from_u64(s, m).unwrap()).collect();
    qdibp::layout::expected_blocks(&ss, dims).unwrap()
}

fn case() -> impl Strategy<Value = (usize, usize, Vec<u64>, u64)> {
    (2usize..=6, 1usize..=3).prop_flat_map(|(n, m)| {
        (Just(n), Just(m), prop::collection::vec(0u64..(1 << m), n), any::<u64>())
    })
}

fn perms(n: usize, seed: u64) -> Vec<Permutation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| shuffle::random_permutation(n, &mut rng).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn shuffle_is_block_permutation((n, m, raw, seed) in case()) {
        let t = aggregated(n, m, &raw);
        let s = shuffle::shuffle_aggregated(&t, &perms(n, seed)).unwrap();
        prop_assert!(s.is_shuffled());
        prop_assert!(shuffle::is_block_permutation(&t, &s).unwrap());
    }

    #[test]
    fn inverse_restores_t((n, m, raw, seed) in case()) {
        let t = aggregated(n, m, &raw);
        let ps = perms(n, seed);
        let s = shuffle::shuffle_aggregated(&t, &ps).unwrap();
        let back = shuffle::unshuffle_aggregated(&s, &ps).unwrap();
        prop_assert_eq!(back.bits(), t.bits());
    }

    #[test]
    fn output_block_k_is_input_block_sigma_k((n, m, raw, seed) in case()) {
        let t = aggregated(n, m, &raw);
        let ps = perms(n, seed);
        let s = shuffle::shuffle_aggregated(&t, &ps).unwrap();
        for (i, sigma) in ps.iter().enumerate() {
            for k in 0..n {
                prop_assert_eq!(s.block(i, k).unwrap(), t.block(i, sigma.apply(k)).unwrap());
            }
        }
    }

    #[test]
    fn permutation_inverse_composes_to_identity(n in 1usize..8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = shuffle::random_permutation(n, &mut rng).unwrap();
        let inv = p.inverse();
        for k in 0..n {
            prop_assert_eq!(inv.apply(p.apply(k)), k);
        }
    }
}

#[test]
fn random_permutations_are_uniform_over_s3() {
    let all: Vec<Permutation> = Permutation::all(3).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut counts = vec![0u64; all.len()];
    for _ in 0..6000 {
        let p = shuffle::random_permutation(3, &mut rng).unwrap();
        counts[all.iter().position(|q| *q == p).unwrap()] += 1;
    }
    let chi = stats::chi_square_uniform(&counts);
    assert!(chi.p_value > 0.01, "{counts:?} p = {}", chi.p_value);
}

#[test]
fn fixed_block_lands_uniformly() {
    // segment 0 of the worked example holds blocks 0, 1, 0 with the 1 at block 1
    let t = aggregated(3, 1, &[1, 0, 1]);
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut counts = [0u64; 3];
    for _ in 0..10_000 {
        let ps: Vec<Permutation> = (0..3).map(|_| shuffle::random_permutation(3, &mut rng).unwrap()).collect();
        let s = shuffle::shuffle_aggregated(&t, &ps).unwrap();
        let seg = s.segment(0).unwrap();
        let pos = (0..3).find(|&k| seg.get(k)).unwrap();
        counts[pos] += 1;
    }
    let chi = stats::chi_square_uniform(&counts);
    assert!(chi.p_value > 0.01, "{counts:?} p = {}", chi.p_value);
}

#[test]
fn published_shuffle_witnesses() {
    let t = aggregated(3, 1, &[1, 0, 1]);
    let dims = Dimensions::new(3, 1).unwrap();
    let published = AggregatedVector::from_bits(BitVec::parse("001 110 100", 9).unwrap(), dims, true).unwrap();
    assert!(shuffle::is_block_permutation(&t, &published).unwrap());
    let other = AggregatedVector::from_bits(BitVec::parse("011 101 010", 9).unwrap(), dims, true).unwrap();
    assert!(!shuffle::is_block_permutation(&t, &other).unwrap());
    assert!(shuffle::shuffle_aggregated(&published, &perms(3, 0)).is_err());
    assert!(Permutation::new(vec![0, 0, 1]).is_err());
}

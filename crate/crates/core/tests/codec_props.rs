mod common;

use ncpt::codec::{encode_generation, rank, CodedPacket, EncodingMatrix, GenerationDecoder, NativePacket};
use ncpt::Gf256;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn generation(h: usize, n: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(any::<u8>(), n), h)
}

fn natives(rows: &[Vec<u8>]) -> Vec<NativePacket> {
    rows.iter()
        .enumerate()
        .map(|(lane, r)| NativePacket {
            generation: 3,
            lane,
            symbols: ncpt::gf256::symbols(r),
        })
        .collect()
}

fn feed(dec: &mut GenerationDecoder, pkts: &[CodedPacket]) {
    for p in pkts {
        dec.receive(p).unwrap();
    }
}

proptest! {
    #[test]
    fn decode_inverts_encode(
        (h, data) in (1usize..=8, 1usize..=40).prop_flat_map(|(h, n)| (Just(h), generation(h, n))),
        seed in any::<u64>(),
        order in any::<u64>(),
    ) {
        let n = data[0].len();
        let x = natives(&data);
        let m = EncodingMatrix::sample(h, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let mut coded = encode_generation(&m, &x).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(order);
        rand::seq::SliceRandom::shuffle(coded.as_mut_slice(), &mut r);
        let mut dec = GenerationDecoder::new(3, h, n);
        feed(&mut dec, &coded);
        prop_assert!(dec.is_complete());
        prop_assert_eq!(dec.decode().unwrap(), x);
    }

    #[test]
    fn redundant_packets_are_not_innovative(
        (h, data) in (2usize..=6, 1usize..=16).prop_flat_map(|(h, n)| (Just(h), generation(h, n))),
        seed in any::<u64>(),
    ) {
        let n = data[0].len();
        let m = EncodingMatrix::sample(h, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let coded = encode_generation(&m, &natives(&data)).unwrap();
        let mut dec = GenerationDecoder::new(3, h, n);
        for (i, p) in coded.iter().enumerate() {
            prop_assert!(dec.receive(p).unwrap());
            prop_assert_eq!(dec.rank(), i + 1);
            prop_assert!(!dec.receive(p).unwrap());
        }
        let extra = CodedPacket {
            generation: 3,
            coeffs: coded[0].coeffs.iter().zip(&coded[1].coeffs).map(|(&a, &b)| a + b).collect(),
            symbols: coded[0].symbols.iter().zip(&coded[1].symbols).map(|(&a, &b)| a + b).collect(),
        };
        prop_assert!(!dec.is_innovative(&extra).unwrap());
    }

    #[test]
    fn rank_matches_oracle(rows in prop::collection::vec(prop::collection::vec(any::<u8>(), 5), 0..7)) {
        let g: Vec<Vec<Gf256>> = rows.iter().map(|r| ncpt::gf256::symbols(r)).collect();
        prop_assert_eq!(rank(g), common::rank_oracle(&rows));
    }
}

#[test]
fn sampled_matrices_are_full_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for h in 1..=8 {
        for _ in 0..200 {
            let m = EncodingMatrix::sample(h, &mut rng).unwrap();
            let rows: Vec<Vec<u8>> = m.rows().map(|r| r.iter().map(|g| g.0).collect()).collect();
            assert_eq!(common::rank_oracle(&rows), h);
        }
    }
}

#[test]
fn incomplete_generation_refuses_to_decode() {
    let m = EncodingMatrix::sample(4, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let coded = encode_generation(&m, &natives(&[vec![1], vec![2], vec![3], vec![4]])).unwrap();
    let mut dec = GenerationDecoder::new(3, 4, 1);
    feed(&mut dec, &coded[..3]);
    assert!(dec.decode().is_err());
}

#[test]
fn wrong_generation_is_an_error() {
    let mut dec = GenerationDecoder::new(3, 1, 1);
    let p = CodedPacket {
        generation: 4,
        coeffs: vec![Gf256::ONE],
        symbols: vec![Gf256(9)],
    };
    assert!(dec.receive(&p).is_err());
}

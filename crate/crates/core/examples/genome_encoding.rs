//! Sample a genome, print its text and JSON forms, and decode it back.

use emnas::search_space::{decode_text, validate, OperatorKind, SearchSpace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let space = SearchSpace::new(4);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let genome = space.random_genome(&mut rng);

    let text = genome.encode_text();
    println!("text:  {text}");
    println!("json:  {}", serde_json::to_string(&genome).unwrap());
    println!("distinct operators: {}", genome.distinct_ops());

    let back = decode_text(&text, 4).expect("canonical text decodes");
    assert_eq!(back, genome);

    let mut broken = genome.clone();
    broken.normal.blocks[0][0].input = 3;
    for v in validate(&broken, 4).unwrap_err() {
        println!("violation: {v}");
    }

    println!("operators:");
    for op in OperatorKind::ALL {
        println!("  {} {:<5} {}", op.code(), op.mnemonic(), op.name());
    }
    println!("space size with 4 blocks: {}", space.size());
    let small = SearchSpace::with_operators(
        2,
        vec![OperatorKind::SkipConnect, OperatorKind::SepConv3x3, OperatorKind::Conv7x7],
    );
    println!("space size with 2 blocks and 3 operators: {}", small.size());
}

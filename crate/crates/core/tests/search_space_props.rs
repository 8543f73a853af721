use emnas::moea::{crossover, mutate, EvolutionParams};
use emnas::search_space::{decode_text, input_range, validate, Chromosome, Genome, OperatorKind, SearchSpace};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn genome(blocks: usize, seed: u64) -> Genome {
    SearchSpace::new(blocks).random_genome(&mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #[test]
    fn text_round_trip(blocks in 1usize..7, seed: u64) {
        let g = genome(blocks, seed);
        prop_assert_eq!(decode_text(&g.encode_text(), blocks).unwrap(), g);
    }

    #[test]
    fn json_round_trip(blocks in 1usize..7, seed: u64) {
        let g = genome(blocks, seed);
        let back: Genome = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn sampled_genomes_are_valid(blocks in 1usize..9, seed: u64) {
        let g = genome(blocks, seed);
        prop_assert!(validate(&g, blocks).is_ok());
        for (k, block) in g.normal.blocks.iter().chain(&g.reduction.blocks).enumerate() {
            for gene in block {
                prop_assert!(gene.input < input_range(k % blocks));
            }
        }
        prop_assert!((1..=10).contains(&g.distinct_ops()));
    }

    #[test]
    fn variation_is_closed(blocks in 1usize..7, seed: u64, pm in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = SearchSpace::new(blocks);
        let a = Chromosome::new("a", space.random_genome(&mut rng));
        let b = Chromosome::new("b", space.random_genome(&mut rng));
        let params = EvolutionParams { mutation_prob: pm, ..Default::default() };
        let (c1, c2) = crossover(&a, &b, ("c1".into(), "c2".into()), &mut rng, &params).unwrap();
        for c in [c1, c2] {
            let m = mutate(&c, c.id.clone(), &OperatorKind::ALL, &mut rng, &params);
            prop_assert!(m.validate(blocks).is_ok());
        }
    }

    #[test]
    fn crossover_children_take_genes_from_parents(blocks in 1usize..7, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = SearchSpace::new(blocks);
        let a = Chromosome::new("a", space.random_genome(&mut rng));
        let b = Chromosome::new("b", space.random_genome(&mut rng));
        let params = EvolutionParams { crossover_prob_range: (1.0, 1.0), ..Default::default() };
        let (c1, c2) = crossover(&a, &b, ("c1".into(), "c2".into()), &mut rng, &params).unwrap();
        for k in 0..blocks {
            let pair = (c1.genome.normal.blocks[k], c2.genome.normal.blocks[k]);
            let from = (a.genome.normal.blocks[k], b.genome.normal.blocks[k]);
            prop_assert!(pair == from || pair == (from.1, from.0));
        }
    }
}

#[test]
fn space_size_matches_enumeration() {
    let ops = vec![OperatorKind::SkipConnect, OperatorKind::SepConv3x3, OperatorKind::Conv7x7];
    let space = SearchSpace::with_operators(2, ops.clone());
    // Enumerate one cell's gene choices, then square for the cell pair.
    let mut per_cell = 0u128;
    for a0 in 0..ops.len() * 2 {
        for b0 in 0..ops.len() * 2 {
            for a1 in 0..ops.len() * 3 {
                for b1 in 0..ops.len() * 3 {
                    let _ = (a0, b0, a1, b1);
                    per_cell += 1;
                }
            }
        }
    }
    assert_eq!(space.size(), per_cell * per_cell);
    assert_eq!(space.size(), 8_503_056);
}

#[test]
fn rejects_out_of_range_inputs() {
    assert!(decode_text("normal|sep3@1+skip@0 reduction|sep3@0+skip@1", 1).is_ok());
    assert!(decode_text("normal|sep3@2+skip@0 reduction|sep3@0+skip@1", 1).is_err());
    let g = genome(3, 1);
    let mut bad = g.clone();
    bad.normal.blocks[0][1].input = 2;
    let v = validate(&bad, 3).unwrap_err();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].block, Some(0));
}

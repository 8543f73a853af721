//! Decode a genome into layers and count parameters and FLOPs.

use emnas::arch_metrics::{build_graph, count_flops, count_params, FidelityConfig, LayerKind};
use emnas::search_space::SearchSpace;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let fidelity = FidelityConfig { cells: 6, ..Default::default() };
    let genome = SearchSpace::new(fidelity.blocks).random_genome(&mut ChaCha8Rng::seed_from_u64(3));
    let graph = build_graph(&genome, &fidelity).unwrap();

    println!("{genome}");
    println!("{:<5} {:<10} {:>6} {:>10}", "cell", "kind", "width", "spatial");
    for (i, c) in graph.cells.iter().enumerate() {
        println!("{i:<5} {:<10} {:>6} {:>10?}", c.kind.to_string(), c.width, c.out_hw);
    }

    let convs = graph.layers.iter().filter(|l| matches!(l.kind, LayerKind::Conv | LayerKind::DepthwiseConv)).count();
    println!("{} layers, {convs} of them convolutions", graph.layers.len());

    let heaviest = graph.layers.iter().max_by_key(|l| l.params()).unwrap();
    println!("largest layer: {} ({} params)", heaviest.scope, heaviest.params());

    let params = count_params(&graph);
    let flops = count_flops(&graph);
    println!("params {params} ({:.3} M)", params as f64 / 1e6);
    println!("flops  {flops} ({:.3} G)", flops as f64 / 1e9);
}

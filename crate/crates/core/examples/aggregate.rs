//! Prototype and exemplar concept vectors from per-image vectors.

use dreamgen::aggregate::{aggregate_instances, exemplar, prototype, AggregationMethod};
use dreamgen::corpus::VectorTable;

fn main() -> dreamgen::Result<()> {
    let instances = VectorTable::new(
        ["owl#1", "owl#2", "owl#3", "kettle#1", "kettle#2"].map(String::from).to_vec(),
        vec![
            vec![1.0, 0.1, 0.0],
            vec![0.9, 0.3, 0.1],
            vec![0.2, 1.0, 0.0],
            vec![0.0, 0.1, 1.0],
            vec![0.1, 0.0, 0.8],
        ],
    )?;

    for method in [AggregationMethod::Prototype, AggregationMethod::Exemplar] {
        let concepts = aggregate_instances(&instances, method)?;
        for (label, v) in concepts.iter() {
            println!("{method:>9} {label:<7} {v:.3?}");
        }
    }

    let owls = [instances.row(0), instances.row(1), instances.row(2)];
    let (idx, _) = exemplar(&owls)?;
    println!("owl exemplar is instance #{}; mean is {:.3?}", idx + 1, prototype(&owls)?);
    Ok(())
}

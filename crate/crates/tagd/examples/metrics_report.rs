//! Build a confusion matrix by hand and derive accuracy/FAR/FRR, both
//! macro-averaged (per class, then averaged) and micro-averaged.

use tagd::metrics::{confusion, metrics, micro_rates};

fn main() -> tagd::Result<()> {
    let truth = [0, 0, 0, 0, 1, 1, 1, 2, 2, 2];
    let preds = [0, 0, 0, 1, 1, 1, 0, 2, 2, 1];
    let cm = confusion(&truth, &preds, 3)?;

    for i in 0..3 {
        let row: Vec<u64> = (0..3).map(|j| cm.at(i, j)).collect();
        println!("true {i}: {row:?}");
    }

    let m = metrics(&cm)?;
    println!("accuracy {:.4}", m.accuracy);
    for c in &m.per_class {
        println!(
            "class {}: FAR {:.4}  FRR {}",
            c.class,
            c.far,
            c.frr.map_or("n/a".into(), |v| format!("{v:.4}"))
        );
    }
    println!("macro: FAR {:.4}  FRR {:.4}", m.far, m.frr);
    let (far, frr) = micro_rates(&cm);
    println!("micro: FAR {far:.4}  FRR {frr:.4}");
    Ok(())
}

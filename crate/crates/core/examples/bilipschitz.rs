//! Local and global Lipschitz ratios of the normalized embedding.

use heatlab::embed::{bilipschitz_report, choose_truncation};
use heatlab::{build_model_space, ModelKind};

fn main() -> heatlab::Result<()> {
    for kind in [ModelKind::circle(), ModelKind::interval()] {
        let s = build_model_space(kind, 513, 200)?;
        let t = 0.01;
        let l = choose_truncation(&s, t, 1e-8)?.l;
        let r = bilipschitz_report(&s, t, l, 0.1, 2000, 3)?;
        println!(
            "{}: local [{:.4}, {:.4}] global [{:.4}, {:.4}] worst local pair at x = {:.4}",
            s.id(),
            r.local.min.ratio,
            r.local.max.ratio,
            r.global.min.ratio,
            r.global.max.ratio,
            s.coords(r.local.min.p).unwrap()[0]
        );
    }
    Ok(())
}

use ckgraph::bhk::KGroups;
use ckgraph::zlattice::{AbelianGroup, Cardinal};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

fn rank(c: Cardinal) -> Value {
    match c {
        Cardinal::Finite(n) => json!(n),
        Cardinal::CountablyInfinite => json!("countable"),
    }
}

fn group(g: &AbelianGroup, with_torsion: bool) -> Value {
    let mut v = json!({ "free": rank(g.free_rank()) });
    if with_torsion {
        let torsion: Vec<Value> = g
            .invariant_factors()
            .iter()
            .map(|d| d.to_u64().map(Value::from).unwrap_or_else(|| Value::from(d.to_string())))
            .collect();
        v["torsion"] = Value::from(torsion);
    }
    v
}

/// `{"k0":{"free":n,"torsion":[..]},"k1":{"free":n}}`; an infinite rank is
/// the string `"countable"`, a torsion order too large for `u64` a decimal
/// string.
pub fn k_groups(k: &KGroups) -> Value {
    json!({ "k0": group(&k.k0, true), "k1": group(&k.k1, false) })
}

use std::collections::BTreeSet;

use lif::constructions::{build_alpha_2n, CliqueSpec, RELATION};
use lif::semantics::{evaluate, Domain, Interpretation, ValuationSpace, Value};

/// Ordered 4-tuples of distinct, pairwise adjacent vertices.
fn ordered_four_cliques(n: i64, adj: &BTreeSet<(Value, Value)>) -> BTreeSet<Vec<Value>> {
    let mut out = BTreeSet::new();
    for a in 1..=n {
        for b in 1..=n {
            for c in 1..=n {
                for d in 1..=n {
                    let t = [a, b, c, d];
                    let ok = (0..4).all(|i| (0..4).all(|j| i == j || adj.contains(&(t[i], t[j]))));
                    if ok {
                        out.insert(t.to_vec());
                    }
                }
            }
        }
    }
    out
}

#[test]
fn alpha_2n_lists_exactly_the_four_cliques_of_every_small_graph() {
    let spec = CliqueSpec::new(2).unwrap();
    let e = build_alpha_2n(&spec);
    let mut graphs = 0;
    for n in 1..=6i64 {
        let space = ValuationSpace::new(spec.universe(), Domain::range(n as usize)).unwrap();
        let slots: Vec<(Value, Value)> = (1..=n).flat_map(|a| ((a + 1)..=n).map(move |b| (a, b))).collect();
        for mask in 0u32..(1 << slots.len()) {
            let adj: BTreeSet<(Value, Value)> = slots
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .flat_map(|(_, &(a, b))| [(a, b), (b, a)])
                .collect();
            let interp = Interpretation::new().with(RELATION, adj.iter().map(|&(a, b)| vec![a, b]));
            let got: BTreeSet<Vec<Value>> = evaluate(&e, &interp, &space)
                .unwrap()
                .pairs()
                .map(|(l, r)| l.0.iter().chain(&r.0).copied().collect())
                .collect();
            assert_eq!(got, ordered_four_cliques(n, &adj), "n={n} edges={adj:?}");
            graphs += 1;
        }
    }
    assert_eq!(graphs, 1 + 2 + 8 + 64 + 1024 + 32768);
}

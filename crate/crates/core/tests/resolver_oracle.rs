use std::collections::BTreeSet;

use mvnlock_core::lockfile::{generate_lockfile, GenerateOptions};
use mvnlock_core::pom::{effective_pom, ParentRef, PomModel};
use mvnlock_core::resolver::ResolveError;
use mvnlock_core::{resolve, LockfileConfig};
use mvnlock_fixtures::universe::{oracle_resolve, OracleNode, Universe};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn effective(model: &PomModel) -> mvnlock_core::EffectivePom {
    effective_pom(model, |_: &ParentRef| Err::<PomModel, _>("universe POMs have no parent")).unwrap()
}

#[allow(clippy::result_large_err)]
fn resolved_set(u: &Universe, include_test: bool) -> Result<BTreeSet<OracleNode>, ResolveError> {
    let tree = resolve(&effective(&u.root_model()), &u.source(), include_test)?;
    Ok(tree
        .flattened
        .iter()
        .map(|n| OracleNode { artifact_id: n.gav.artifact_id.clone(), version: n.gav.version.clone(), scope: n.scope, depth: n.depth })
        .collect())
}

#[test]
fn resolver_matches_oracle_on_random_universes() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for trial in 0..300 {
        let u = Universe::random(&mut rng);
        for include_test in [true, false] {
            let expected: Option<BTreeSet<OracleNode>> = oracle_resolve(&u, include_test).map(|v| v.into_iter().collect());
            let actual = resolved_set(&u, include_test);
            match (expected, actual) {
                (Some(e), Ok(a)) => assert_eq!(a, e, "trial {trial}, include_test {include_test}: {u:#?}"),
                (None, Err(_)) => {}
                (e, a) => panic!("trial {trial}: oracle {e:?} vs resolver {a:?}"),
            }
        }
    }
}

#[test]
fn lockfile_forest_agrees_with_flattened_selection() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for _ in 0..100 {
        let u = Universe::random(&mut rng);
        let source = u.source();
        let pom = effective(&u.root_model());
        let Ok(tree) = resolve(&pom, &source, true) else { continue };
        let mut options = GenerateOptions::new(LockfileConfig::default());
        options.jobs = 3;
        let lockfile = generate_lockfile(&pom, &source, &options).unwrap().lockfile;
        let from_lock: BTreeSet<_> =
            lockfile.selected_entries().iter().map(|d| (d.gav(), d.scope)).collect();
        let from_tree: BTreeSet<_> = tree.flattened.iter().map(|n| (n.gav.clone(), n.scope)).collect();
        assert_eq!(from_lock, from_tree);
        assert_eq!(lockfile.entries().len(), tree.walk().len());
        assert!(lockfile.entries().iter().filter(|e| !e.selected).all(|e| e.children.is_empty()));
    }
}

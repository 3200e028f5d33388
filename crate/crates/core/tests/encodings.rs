mod common;

use common::{check_counts, check_propagation, random_bool_inequality, random_instance, Strength};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use satenc::encoders::brute_force_count;
use satenc::{parse_instance, Config, EncodingName};

fn same_for_both(e: EncodingName) -> Config {
    Config::new(e, e)
}

#[test]
fn random_constraints_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfgs: Vec<Config> = EncodingName::AVAILABLE.iter().map(|&e| same_for_both(e)).collect();
    for _ in 0..200 {
        let inst = random_instance(&mut rng);
        check_counts(&inst, &cfgs).unwrap();
    }
}

#[test]
fn all_config_pairs_agree_on_multi_constraint_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfgs = Config::all_available();
    for _ in 0..12 {
        // merge two or three random instances over disjoint names
        let parts = rng.random_range(2..=3);
        let text: String = (0..parts).map(|p| common::random_text(&mut rng, &format!("p{p}"))).collect();
        let inst = parse_instance("multi", &text).unwrap();
        if inst.assignment_count() > 4096 {
            continue;
        }
        check_counts(&inst, &cfgs).unwrap();
    }
}

#[test]
fn cardinality_has_four_models_everywhere() {
    let inst = parse_instance("card", "bool x1 x2 x3\ncon 1*x1 + 1*x2 + 1*x3 <= 1\n").unwrap();
    assert_eq!(brute_force_count(&inst), 4);
    check_counts(&inst, &Config::all_available()).unwrap();
}

#[test]
fn gac_encodings_propagate_fully() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let gac: Vec<EncodingName> = EncodingName::AVAILABLE.iter().copied().filter(|e| e.is_gac()).collect();
    for _ in 0..60 {
        let inst = random_bool_inequality(&mut rng, 5);
        for &e in &gac {
            check_propagation(&inst, same_for_both(e), Strength::Gac).unwrap();
        }
    }
}

#[test]
fn watchdog_detects_failure() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..60 {
        let inst = random_bool_inequality(&mut rng, 5);
        check_propagation(&inst, same_for_both(EncodingName::Ggpw), Strength::Cc).unwrap();
    }
}

#[test]
fn dimacs_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let inst = random_instance(&mut rng);
        for cfg in [Config::DEFAULT, "MDD_GGPW".parse().unwrap(), "GSWC_RGGT".parse().unwrap()] {
            let a = satenc::encode_instance(&inst, cfg, 1 << 20).unwrap().to_dimacs();
            let b = satenc::encode_instance(&inst, cfg, 1 << 20).unwrap().to_dimacs();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn tree_ignores_amo_side_constraints() {
    let base = "bool b0 b1 b2\ncon 3*b0 + 4*b1 + 5*b2 <= 8\n";
    let with_side = "bool b0 b1 b2\ncon 1*b0 + 1*b1 <= 1\ncon 3*b0 + 4*b1 + 5*b2 <= 8\n";
    let a = satenc::encode_instance(&parse_instance("a", base).unwrap(), Config::DEFAULT, 1000).unwrap();
    let b = satenc::encode_instance(&parse_instance("b", with_side).unwrap(), Config::DEFAULT, 1000).unwrap();
    let main = |f: &satenc::CnfFormula| f.stats.per_constraint.last().unwrap().clone();
    let (sa, sb) = (main(&a), main(&b));
    assert_eq!((sa.vars, sa.clauses), (sb.vars, sb.clauses));
}

#[test]
fn clause_cap_aborts() {
    let inst = parse_instance("t", "int x 0..9\nint y 0..9\nint z 0..9\ncon 3*x + 5*y + 7*z != 40\n").unwrap();
    let err = satenc::encode_instance(&inst, Config::DEFAULT, 10).unwrap_err();
    assert!(err.is_size_abort(), "{err}");
}

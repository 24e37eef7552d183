//! Solver outputs checked against brute-force oracles.

mod common;

use common::*;
use coupled_alloc::harness::match_detections;
use coupled_alloc::lp::{self, LpStatus};
use coupled_alloc::orchestrator::{audit_plan, solve_joint};
use coupled_alloc::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut seen = [0usize; 3];
    for i in 0..150 {
        let program = random_lp(&mut rng);
        let sol = lp::solve(&program).unwrap();
        match (lp_oracle(&program), sol.status) {
            (OracleLp::Optimal(v), LpStatus::Optimal) => {
                let got = sol.objective_value.unwrap();
                assert!((got - v).abs() <= 1e-6, "lp {i}: {got} vs {v}\n{}", lp::dump(&program));
                assert!(program.is_feasible(sol.point.as_ref().unwrap()));
                seen[0] += 1;
            }
            (OracleLp::Infeasible, LpStatus::Infeasible) => seen[1] += 1,
            (OracleLp::Unbounded, LpStatus::Unbounded) => seen[2] += 1,
            (o, s) => panic!("lp {i}: oracle {o:?}, solver {s:?}\n{}", lp::dump(&program)),
        }
    }
    // The generator should exercise every outcome.
    assert!(seen.iter().all(|&c| c > 0), "{seen:?}");
}

#[test]
fn joint_solve_is_no_worse_than_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..4 {
        let (app, infra, couplings, cfg) = random_joint_instance(&mut rng);
        let brute = brute_force_joint(&app, &infra, &couplings, &cfg, 0.25, 0.5);
        match solve_joint(&app, &infra, &couplings, &cfg) {
            Ok(plan) => {
                if let Some(b) = brute {
                    assert!(plan.objective_value <= b + 1e-6, "instance {i}: {} > {b}", plan.objective_value);
                }
                let v = audit_plan(&app, &infra, &couplings, &plan);
                assert!(v.is_empty(), "instance {i}: {v:?}");
            }
            Err(Error::NoFeasiblePlacement | Error::AllPlacementsInfeasible) => {
                assert!(brute.is_none(), "instance {i}: grid found a point the solver missed");
            }
            Err(e) => panic!("instance {i}: {e}"),
        }
    }
}

#[test]
fn matching_is_maximum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..400 {
        let (ng, np) = (rng.gen_range(0..=4), rng.gen_range(0..=4));
        let g = random_boxes(&mut rng, ng);
        let p = random_boxes(&mut rng, np);
        assert_eq!(match_detections(&g, &p, 0.5), max_matching_oracle(&g, &p, 0.5));
        assert_eq!(match_detections(&g, &p, 0.3), max_matching_oracle(&g, &p, 0.3));
    }
}

use calbund_core::catalog;
use calbund_core::constructions::{
    fibre_chart, sample_points, verify, ConstructionKind, SampleGrid, VerifyConfig,
};
use calbund_core::exec::Exec;
use calbund_core::expr::parse;
use calbund_core::immersion::{Domain, Immersion, Mode};
use calbund_core::sampling::{self, FibreGrid};
use proptest::prelude::*;

const KINDS_R4: [ConstructionKind; 5] = [
    ConstructionKind::Conormal { phase: None },
    ConstructionKind::CoassociativeF,
    ConstructionKind::AssociativeE,
    ConstructionKind::CayleyPlus,
    ConstructionKind::CayleyMinus,
];

#[test]
fn execution_strategy_does_not_change_reports() {
    let imm = catalog::lookup_ref("catenoid").unwrap().immersion;
    for kind in KINDS_R4 {
        let run = |exec| {
            let cfg = VerifyConfig {
                samples: 30,
                exec,
                ..VerifyConfig::default()
            };
            verify(&imm, kind, &cfg).unwrap()
        };
        assert_eq!(run(Exec::Sequential), run(Exec::Parallel), "{kind}");
    }
}

#[test]
fn clouds_are_fibre_charts_over_the_base_grid() {
    let imm = catalog::lookup_ref("holomorphic_z2").unwrap().immersion;
    let grid = SampleGrid {
        base_per_axis: 4,
        fibre: FibreGrid {
            per_axis: 3,
            ..FibreGrid::default()
        },
        ..SampleGrid::default()
    };
    for kind in KINDS_R4 {
        let cloud = sample_points(&imm, kind, &grid).unwrap();
        let rank = kind.fibre_rank(2, 4);
        let fibre = grid.fibre.points(rank);
        let bases = sampling::base_grid(imm.domain(), 2, 4).unwrap();
        assert_eq!(cloud.rows.len(), bases.len() * fibre.len());
        for (b, base) in bases.iter().enumerate() {
            let chart = fibre_chart(&imm, kind, base, Mode::Jet).unwrap();
            for (f, t) in fibre.iter().enumerate() {
                let row = &cloud.rows[b * fibre.len() + f];
                assert_eq!(row.len(), cloud.columns.len());
                assert_eq!(row, &chart.at(t), "{kind} base {b} fibre {f}");
            }
        }
    }
}

#[test]
fn finite_differences_agree_with_jets_on_verdicts() {
    for name in ["antiholomorphic_expz", "paraboloid", "rotational"] {
        let imm = catalog::lookup_ref(name).unwrap().immersion;
        for kind in KINDS_R4 {
            let run = |mode| {
                let cfg = VerifyConfig {
                    samples: 20,
                    mode,
                    ..VerifyConfig::default()
                };
                verify(&imm, kind, &cfg).unwrap().verdict
            };
            assert_eq!(run(Mode::Jet), run(Mode::FiniteDifference), "{name} {kind}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Any holomorphic cubic graph is minimal and positively isotropic.
    #[test]
    fn holomorphic_cubics_are_associative_and_cayley(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
        // w = a z^3 + b z^2 + c z with z = u + iv
        let re = format!("({a})*(u^3 - 3*u*v^2) + ({b})*(u^2 - v^2) + ({c})*u");
        let im = format!("({a})*(3*u^2*v - v^3) + ({b})*(2*u*v) + ({c})*v");
        let imm = Immersion::graph(parse(&re).unwrap(), parse(&im).unwrap(), Domain::rect((-1.0, 1.0), (-1.0, 1.0))).unwrap();
        let cfg = VerifyConfig { samples: 12, ..VerifyConfig::default() };
        for kind in [ConstructionKind::AssociativeE, ConstructionKind::CayleyPlus, ConstructionKind::Conormal { phase: None }] {
            let r = verify(&imm, kind, &cfg).unwrap();
            prop_assert!(r.verdict, "{} defect {:e}", kind, r.defect.max);
        }
        let plus = verify(&imm, ConstructionKind::CayleyPlus, &cfg).unwrap();
        prop_assert!(plus.extras.exact_cayley.unwrap().max < 1e-8);
    }
}

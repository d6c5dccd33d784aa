use gpphs_core::control::ReferencePlan;
use gpphs_core::trajectory::Trajectory;
use gpphs_core::DVector;
use gpphs_lab::io;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, -1e-6..1e-6f64, any::<f64>().prop_filter("finite", |v| v.is_finite())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trajectories_round_trip_exactly(
        rows in prop::collection::vec(prop::collection::vec(finite(), 6), 1..20),
        with_outputs in any::<bool>(),
    ) {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("traj.csv");
        let times = (0..rows.len()).map(|k| k as f64 * 0.1).collect();
        let states = rows.iter().map(|r| DVector::from_column_slice(&r[..3])).collect();
        let inputs = rows.iter().map(|r| DVector::from_column_slice(&r[3..5])).collect();
        let outputs = with_outputs.then(|| rows.iter().map(|r| DVector::from_column_slice(&r[4..6])).collect());
        let traj = Trajectory::new(times, states, inputs, outputs).unwrap();
        io::write_trajectory(&path, &traj).unwrap();
        prop_assert_eq!(io::read_trajectory(&path).unwrap(), traj);
    }

    #[test]
    fn plans_round_trip_exactly(
        rows in prop::collection::vec(prop::collection::vec(finite(), 4), 4..20),
    ) {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("plan.csv");
        let times = (0..rows.len()).map(|k| 0.25 * k as f64).collect();
        let states = rows.iter().map(|r| DVector::from_column_slice(&r[..2])).collect();
        let derivs = rows.iter().map(|r| DVector::from_column_slice(&r[2..])).collect();
        let plan = ReferencePlan::from_samples(times, states, derivs).unwrap();
        io::write_plan(&path, &plan).unwrap();
        let back = io::read_plan(&path).unwrap();
        prop_assert_eq!(back.times(), plan.times());
        prop_assert_eq!(back.states(), plan.states());
        prop_assert_eq!(back.derivatives(), plan.derivatives());
    }
}

#[test]
fn malformed_headers_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.csv");
    std::fs::write(&path, "t,x1,x3,u1\n0,1,2,3\n").unwrap();
    assert!(io::read_trajectory(&path).is_err());
    std::fs::write(&path, "t,x1,u1\n0,1,oops\n").unwrap();
    let err = io::read_trajectory(&path).unwrap_err().to_string();
    assert!(err.contains("row 1"), "{err}");
    assert!(io::read_trajectory(&tmp.path().join("absent.csv")).unwrap_err().to_string().contains("missing"));
}

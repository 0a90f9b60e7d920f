use gaitlevels_bench::{cluster_data, table_dataset};

#[test]
fn fixtures_have_expected_shapes() {
    assert_eq!(cluster_data(10).dim(), (30, 9));
    assert_eq!(table_dataset(4).len(), 48);
}

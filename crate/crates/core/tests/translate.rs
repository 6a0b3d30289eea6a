mod common;

use common::*;
use sharpcsp::frame::{eval_frame, is_to_frame, WeightedGraph};

#[test]
fn translations_preserve_counts() {
    ac8().unwrap();
}

#[test]
fn unweighted_triangle() {
    let g = WeightedGraph::unweighted(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
    assert_eq!(oracle_is_sum(&g), 4.into());
    assert_eq!(eval_frame(&is_to_frame(&g)).unwrap(), 4.into());
}

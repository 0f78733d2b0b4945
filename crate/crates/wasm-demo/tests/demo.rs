use advrisk_demo::{expansion_view_json, nash_json, optimal_region_json};
use serde_json::{json, Value};

fn call(f: fn(&str) -> Result<String, String>, req: Value) -> Value {
    serde_json::from_str(&f(&req.to_string()).expect("request succeeds")).unwrap()
}

fn board(eps: Value) -> Value {
    json!({ "width": 3, "height": 1, "norm": "linf", "epsilon": eps })
}

#[test]
fn expansion_of_a_corner() {
    let req = json!({
        "board": { "width": 3, "height": 3, "norm": "l1", "epsilon": 1 },
        "region": [0]
    });
    let v = call(expansion_view_json, req);
    assert_eq!(v["expanded"], json!([0, 1, 3]));
    assert_eq!(v["contracted"], json!([]));
    assert_eq!(v["midpoint_complete"], true);
}

#[test]
fn half_budget_breaks_midpoints() {
    let req = json!({ "board": board(json!("1/2")), "region": [1] });
    let v = call(expansion_view_json, req);
    assert_eq!(v["expanded"], json!([1]));
    assert_eq!(v["midpoint_complete"], false);
    assert_eq!(v["midpoint_witness"], json!([0, 1]));
}

#[test]
fn optimal_region_on_three_cells() {
    let req = json!({ "board": board(json!(1)), "weights0": [1, 0, 0], "weights1": [0, 0, 1], "T": 1 });
    let v = call(optimal_region_json, req);
    assert_eq!(v["value"]["exact"], "1/2");
    assert_eq!(v["bayes"]["exact"], "0");
    assert_eq!(v["witness_risk"], v["value"]);
    assert_eq!(v["witness_certified"], true);
}

#[test]
fn weights_are_normalized_and_regions_scored() {
    let req = json!({
        "board": board(json!(0)), "weights0": [3, 1, 0], "weights1": [0, 1, 3], "T": 1, "region": [2]
    });
    let v = call(optimal_region_json, req);
    assert_eq!(v["value"]["exact"], "1/8");
    assert_eq!(v["region"]["standard"]["exact"], "1/8");
    assert_eq!(v["region"]["adversarial"], v["region"]["standard"]);
}

#[test]
fn nash_pair_meets_in_the_middle() {
    let req = json!({ "board": board(json!(1)), "weights0": [1, 0, 0], "weights1": [0, 0, 1], "T": 1 });
    let v = call(nash_json, req);
    assert_eq!(v["value_supinf"]["exact"], "1/2");
    assert_eq!(v["delta"]["exact"], "0");
    assert_eq!(v["p0_star"], json!([0.0, 1.0, 0.0]));
    assert_eq!(v["p1_star"], json!([0.0, 1.0, 0.0]));
}

#[test]
fn bad_requests_are_reported() {
    let empty = json!({ "board": board(json!(1)), "weights0": [0, 0, 0], "weights1": [0, 0, 1], "T": 1 });
    assert!(nash_json(&empty.to_string()).unwrap_err().contains("class 0"));
    let huge = json!({ "board": { "width": 20, "height": 20, "norm": "l1", "epsilon": 1 }, "region": [] });
    assert!(expansion_view_json(&huge.to_string()).unwrap_err().contains("cells"));
    assert!(optimal_region_json("{").unwrap_err().starts_with("bad request"));
}

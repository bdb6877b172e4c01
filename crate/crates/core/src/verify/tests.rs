use super::*;
use crate::builder::{build_observed, BuilderParams};
use crate::iso::{solve, SolverParams};
use crate::model::{Edge, GridPos, MetricSize, Product, ReferenceNode};
use crate::sim::{corrupt, gen_planogram, gen_scene, render_scene, GroundTruthScene, NoiseParams, TextureRule};
use proptest::prelude::*;

fn pid(s: &str) -> ProductId {
    ProductId::new(s).unwrap()
}

fn row_reference(labels: &str, metric: &[(char, f64, f64)]) -> ReferencePlanogram {
    let mut cat: Vec<char> = labels.chars().collect();
    cat.sort();
    cat.dedup();
    let catalog = cat
        .iter()
        .map(|c| Product {
            id: pid(&c.to_string()),
            metric_size: metric
                .iter()
                .find(|m| m.0 == *c)
                .map(|m| MetricSize { width_mm: m.1, height_mm: m.2 }),
        })
        .collect();
    let nodes = labels
        .chars()
        .enumerate()
        .map(|(c, p)| ReferenceNode { node_id: format!("r{c}"), product: pid(&p.to_string()), grid_pos: GridPos::new(0, c as i32) })
        .collect();
    ReferencePlanogram::new(catalog, nodes, None).unwrap()
}

fn obs_node(id: &str, product: &str, cx: f64, cy: f64, w: f64, h: f64) -> ObservedNode {
    let bbox = BBox::centered(Point::new(cx, cy), w, h).unwrap();
    ObservedNode { node_id: id.into(), detection: Detection::new(id, pid(product), bbox, 1.0).unwrap() }
}

fn pair(r: &str, o: &str) -> Assignment {
    Assignment { ref_node: r.into(), obs_node: o.into(), score: 1.0 }
}

fn both_ways(a: &str, d: Direction, b: &str) -> [Edge; 2] {
    let e = Edge::new(a, d, b);
    [e.reversed(), e]
}

#[test]
fn target_with_most_matched_neighbors() {
    // r1 has neighbors r0 and r2 matched; r3 only r2... and r4 none
    let i = row_reference("ABCDE", &[]);
    let s = Solution::new(vec![pair("r0", "a"), pair("r2", "c")], 0.0, None).unwrap();
    let missing: BTreeSet<String> = ["r1", "r3", "r4"].iter().map(|s| s.to_string()).collect();
    assert_eq!(select_target(&missing, &s, &i).as_deref(), Some("r1"));

    let none_matched: BTreeSet<String> = ["r4", "r3"].iter().map(|s| s.to_string()).collect();
    assert_eq!(select_target(&none_matched, &Solution::empty(), &i).as_deref(), Some("r3"));
    let single: BTreeSet<String> = ["r4".to_string()].into();
    assert_eq!(select_target(&single, &s, &i).as_deref(), Some("r4"));
    assert_eq!(select_target(&BTreeSet::new(), &s, &i), None);
}

#[test]
fn roi_from_one_neighbor() {
    let i = row_reference("AB", &[]);
    let o = ObservedPlanogram::new(
        vec![obs_node("a", "A", 20.0, 20.0, 20.0, 20.0), obs_node("x", "Z", 60.0, 20.0, 20.0, 20.0)],
        both_ways("a", Direction::E, "x").to_vec(),
    )
    .unwrap();
    let s = Solution::new(vec![pair("r0", "a")], 0.0, None).unwrap();
    let roi = estimate_roi("r1", &s, &i, &o, &VerifyParams::default()).unwrap();
    assert_eq!(roi.center(), Point::new(60.0, 20.0));
    assert_eq!((roi.w, roi.h), (40.0, 40.0));
}

#[test]
fn roi_from_symmetric_neighbors() {
    let i = row_reference("ABC", &[]);
    let mut edges = both_ways("a", Direction::E, "x").to_vec();
    edges.extend(both_ways("x", Direction::E, "c"));
    let o = ObservedPlanogram::new(
        vec![
            obs_node("a", "A", 20.0, 20.0, 20.0, 20.0),
            obs_node("x", "Z", 60.0, 20.0, 20.0, 20.0),
            obs_node("c", "C", 100.0, 20.0, 20.0, 20.0),
        ],
        edges,
    )
    .unwrap();
    let s = Solution::new(vec![pair("r0", "a"), pair("r2", "c")], 0.0, None).unwrap();
    let roi = estimate_roi("r1", &s, &i, &o, &VerifyParams::default()).unwrap();
    assert_eq!(roi.center(), Point::new(60.0, 20.0));
}

#[test]
fn roi_size_follows_metric_ratio() {
    let i = row_reference("AB", &[('A', 100.0, 200.0), ('B', 200.0, 100.0)]);
    let o = ObservedPlanogram::new(vec![obs_node("a", "A", 20.0, 40.0, 20.0, 40.0)], vec![]).unwrap();
    let s = Solution::new(vec![pair("r0", "a")], 0.0, None).unwrap();
    let p = VerifyParams { roi_margin: 0.0, ..Default::default() };
    let roi = estimate_roi("r1", &s, &i, &o, &p).unwrap();
    assert_eq!((roi.w, roi.h), (40.0, 20.0));
    // no edges: the step falls back to the neighbor's mean side
    assert_eq!(roi.center(), Point::new(50.0, 40.0));
}

#[test]
fn roi_needs_a_matched_neighbor() {
    let i = row_reference("AB", &[]);
    let o = ObservedPlanogram::new(vec![], vec![]).unwrap();
    assert_eq!(
        estimate_roi("r1", &Solution::empty(), &i, &o, &VerifyParams::default()),
        Err(VerifyError::Unconstrained("r1".into()))
    );
    assert_eq!(
        estimate_roi("zz", &Solution::empty(), &i, &o, &VerifyParams::default()),
        Err(VerifyError::UnknownNode("zz".into()))
    );
}

#[test]
fn proposal_scores() {
    let roi = BBox::new(0.0, 0.0, 60.0, 80.0).unwrap();
    let at = |cx: f64, cy: f64, raw: f64| Proposal { bbox: BBox::centered(Point::new(cx, cy), 10.0, 10.0).unwrap(), raw_score: raw };
    let center = at(30.0, 40.0, 0.7);
    let others = [center, at(10.0, 10.0, 0.2)];
    assert_eq!(score_proposal(&center, &roi, &others, None), 1.0);
    let corner = at(0.0, 0.0, 0.7);
    assert_eq!(score_proposal(&corner, &roi, &[corner], None), 0.5);
    let zero = at(30.0, 40.0, 0.0);
    assert_eq!(score_proposal(&zero, &roi, &[zero], None), 0.5);
    assert_eq!(score_proposal(&center, &roi, &others, Some(1.4)), 0.75);
}

#[test]
fn params_are_checked() {
    assert!(VerifyParams { accept_threshold: 1.5, ..Default::default() }.validate().is_err());
    assert!(VerifyParams { roi_margin: -0.1, ..Default::default() }.validate().is_err());
    assert!(VerifyParams { overlap_iou_max: 2.0, ..Default::default() }.validate().is_err());
    assert!(VerifyParams::default().validate().is_ok());
}

struct Case {
    truth: GroundTruthScene,
    observed: ObservedPlanogram,
    matched: MatchResult,
}

fn case(truth: GroundTruthScene, detections: &[Detection]) -> Case {
    let observed = build_observed(detections, &BuilderParams::default()).unwrap();
    let matched = solve(&truth.planogram, &observed, &SolverParams::default()).unwrap();
    Case { truth, observed, matched }
}

fn exact_detections(truth: &GroundTruthScene, skip: &[&str]) -> Vec<Detection> {
    truth
        .items
        .iter()
        .filter(|i| !skip.contains(&i.node_id.as_str()))
        .map(|i| Detection::new(format!("d-{}", i.node_id), i.product.clone(), i.bbox, 1.0).unwrap())
        .collect()
}

fn full_scene(seed: u64) -> GroundTruthScene {
    let p = gen_planogram(3, 4, 20, seed).unwrap();
    gen_scene(&p, 60.0, 80.0, 0.0, seed).unwrap()
}

#[test]
fn nothing_missing_is_a_no_op() {
    let truth = full_scene(3);
    let c = case(truth.clone(), &exact_detections(&truth, &[]));
    let out = verify_all(&c.truth.planogram, &c.observed, &c.matched, &NoMatcher, &VerifyParams::default()).unwrap();
    assert_eq!(out.observed, c.observed);
    assert_eq!(out.solution, c.matched.solution);
    assert!(out.issues.is_empty() && out.verified.is_empty());
}

#[test]
fn undetected_item_is_recovered() {
    let truth = full_scene(4);
    let c = case(truth.clone(), &exact_detections(&truth, &["r01c01"]));
    assert_eq!(c.matched.missing_ref_nodes.len(), 1);
    let oracle = OracleMatcher::from_scene(&truth);
    let out = verify_all(&truth.planogram, &c.observed, &c.matched, &oracle, &VerifyParams::default()).unwrap();
    assert!(out.issues.is_empty());
    assert_eq!(out.verified.len(), 1);
    assert_eq!(out.solution.obs_for("r01c01"), Some("verify:r01c01"));
    let ix = out.observed.index_of("verify:r01c01").unwrap();
    assert_eq!(out.observed.bbox(ix), &truth.item("r01c01").unwrap().bbox);
    assert_eq!(out.observed.degree(ix), 8);
    assert!(out.observed.validate().is_ok());
}

#[test]
fn void_facing_is_reported() {
    let p = gen_planogram(3, 4, 20, 5).unwrap();
    let mut truth = gen_scene(&p, 60.0, 80.0, 0.0, 5).unwrap();
    let k = truth.items.iter().position(|i| i.node_id == "r02c02").unwrap();
    truth.items.remove(k);
    truth.absent.push("r02c02".into());
    let c = case(truth.clone(), &exact_detections(&truth, &[]));
    let oracle = OracleMatcher::from_scene(&truth);
    let out = verify_all(&truth.planogram, &c.observed, &c.matched, &oracle, &VerifyParams::default()).unwrap();
    assert_eq!(out.issues.len(), 1);
    assert_eq!(out.issues[0].ref_node, "r02c02");
    assert_eq!(out.issues[0].reason, IssueReason::NoProposals);
    assert!(out.issues[0].expected_roi.unwrap().contains(Point::new(150.0, 196.0)));
}

#[test]
fn without_a_matcher_everything_missing_is_an_issue() {
    let truth = full_scene(6);
    let c = case(truth.clone(), &exact_detections(&truth, &["r00c00", "r02c03"]));
    let out = verify_all(&truth.planogram, &c.observed, &c.matched, &NoMatcher, &VerifyParams::default()).unwrap();
    let ids: Vec<&str> = out.issues.iter().map(|i| i.ref_node.as_str()).collect();
    assert_eq!(ids, ["r00c00", "r02c03"]);
}

#[test]
fn unconstrained_targets_have_no_roi() {
    let truth = full_scene(7);
    let c = case(truth.clone(), &[]);
    let out = verify_all(&truth.planogram, &c.observed, &c.matched, &NoMatcher, &VerifyParams::default()).unwrap();
    assert_eq!(out.issues.len(), 12);
    assert!(out.issues.iter().all(|i| i.expected_roi.is_none() && i.reason == IssueReason::NoProposals));
}

/// Proposes one fixed box for every query.
struct Fixed(Proposal, Option<f64>);

impl Matcher for Fixed {
    fn name(&self) -> &str {
        "fixed"
    }

    fn find_proposals(&self, _query: &ProposalQuery<'_>) -> Vec<Proposal> {
        vec![self.0]
    }

    fn max_raw_score(&self) -> Option<f64> {
        self.1
    }
}

#[test]
fn overlapping_and_weak_proposals_are_refused() {
    let truth = full_scene(8);
    let c = case(truth.clone(), &exact_detections(&truth, &["r01c01"]));
    let neighbor = truth.item("r01c02").unwrap().bbox;
    let overlapping = Fixed(Proposal { bbox: neighbor, raw_score: 1.0 }, Some(1.0));
    let out = verify_all(&truth.planogram, &c.observed, &c.matched, &overlapping, &VerifyParams::default()).unwrap();
    assert_eq!(out.issues[0].reason, IssueReason::AllOverlapping);

    let target = truth.item("r01c01").unwrap().bbox;
    let weak = Fixed(Proposal { bbox: target, raw_score: 0.05 }, Some(1.0));
    let strict = VerifyParams { accept_threshold: 0.99, ..Default::default() };
    let out = verify_all(&truth.planogram, &c.observed, &c.matched, &weak, &strict).unwrap();
    assert_eq!(out.issues[0].reason, IssueReason::BestScoreBelowThreshold);
    assert!(out.issues[0].best_score.unwrap() < 0.99);
}

/// With the default threshold the position term alone (up to 0.5) accepts
/// any textured patch centered in the ROI, so template matching needs a
/// stricter cut.
const ZNCC_PARAMS: VerifyParams = VerifyParams { roi_margin: 0.5, accept_threshold: 0.7, overlap_iou_max: 0.3 };

#[test]
fn default_threshold_accepts_a_void_under_template_matching() {
    let p = gen_planogram(3, 4, 20, 10).unwrap();
    let mut truth = gen_scene(&p, 60.0, 80.0, 0.0, 10).unwrap();
    truth.items.retain(|i| i.node_id != "r01c01");
    let rendered = render_scene(&truth, &TextureRule::default(), truth.width, truth.height).unwrap();
    let c = case(truth.clone(), &exact_detections(&truth, &[]));
    let matcher = ZnccMatcher::new(rendered.scene, rendered.templates);
    let out = verify_all(&truth.planogram, &c.observed, &c.matched, &matcher, &VerifyParams::default()).unwrap();
    assert_eq!(out.verified.len(), 1);
    assert!(out.verified[0].score < 0.55);
}

#[test]
fn template_matching_recovers_a_missed_item() {
    let truth = full_scene(9);
    let rendered = render_scene(&truth, &TextureRule::default(), truth.width, truth.height).unwrap();
    let c = case(truth.clone(), &exact_detections(&truth, &["r01c02"]));
    let matcher = ZnccMatcher::new(rendered.scene, rendered.templates);
    let out = verify_all(&truth.planogram, &c.observed, &c.matched, &matcher, &ZNCC_PARAMS).unwrap();
    assert!(out.issues.is_empty(), "{:?}", out.issues);
    let ix = out.observed.index_of("verify:r01c02").unwrap();
    assert!(iou(out.observed.bbox(ix), &truth.item("r01c02").unwrap().bbox) > 0.5);
}

#[test]
fn template_matching_reports_a_void() {
    let p = gen_planogram(3, 4, 20, 10).unwrap();
    let mut truth = gen_scene(&p, 60.0, 80.0, 0.0, 10).unwrap();
    truth.items.retain(|i| i.node_id != "r01c01");
    truth.absent.push("r01c01".into());
    let rendered = render_scene(&truth, &TextureRule::default(), truth.width, truth.height).unwrap();
    let c = case(truth.clone(), &exact_detections(&truth, &[]));
    let matcher = ZnccMatcher::new(rendered.scene, rendered.templates);
    let out = verify_all(&truth.planogram, &c.observed, &c.matched, &matcher, &ZNCC_PARAMS).unwrap();
    assert_eq!(out.issues.len(), 1);
    assert!(matches!(out.issues[0].reason, IssueReason::BestScoreBelowThreshold | IssueReason::NoProposals | IssueReason::AllOverlapping));
}

#[test]
fn roi_contains_true_center_on_clean_scenes() {
    for seed in 0..100 {
        let truth = full_scene(seed);
        let target = &truth.items[(seed as usize * 7) % 12];
        let c = case(truth.clone(), &exact_detections(&truth, &[target.node_id.as_str()]));
        if c.matched.solution.obs_for(&target.node_id).is_some() {
            continue;
        }
        let roi = estimate_roi(&target.node_id, &c.matched.solution, &truth.planogram, &c.observed, &VerifyParams::default())
            .unwrap();
        assert!(roi.contains(target.bbox.center()), "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_verification_partitions_and_is_exact(
        seed in 0u64..10_000,
        miss in 0.0f64..0.5,
        void in 0.0f64..0.3,
        jitter in 0.0f64..2.0,
    ) {
        let p = gen_planogram(3, 4, 40, seed).unwrap();
        let truth = gen_scene(&p, 60.0, 80.0, void, seed).unwrap();
        let dets = corrupt(&truth, &NoiseParams { miss_rate: miss, jitter_sigma: jitter, seed, ..Default::default() }).unwrap();
        let c = case(truth.clone(), &dets);
        let oracle = OracleMatcher::from_scene(&truth);
        let params = VerifyParams::default();
        let out = verify_all(&truth.planogram, &c.observed, &c.matched, &oracle, &params).unwrap();

        // partition
        let mut seen: Vec<String> = out.solution.assignments().iter().map(|a| a.ref_node.clone()).collect();
        seen.extend(out.issues.iter().map(|i| i.ref_node.clone()));
        seen.sort();
        prop_assert_eq!(seen, truth.planogram.node_ids());

        // monotone growth
        for a in c.matched.solution.assignments() {
            prop_assert_eq!(out.solution.obs_for(&a.ref_node), Some(a.obs_node.as_str()));
        }

        // issues are exactly the voids, when matching found every detected item
        let all_detected_matched = c.matched.solution.len() == dets.len();
        if all_detected_matched {
            let mut issues: Vec<String> = out.issues.iter().map(|i| i.ref_node.clone()).collect();
            issues.sort();
            let mut absent = truth.absent.clone();
            absent.sort();
            prop_assert_eq!(issues, absent);
        }
        // no void facing is ever accepted
        for a in &out.verified {
            prop_assert!(!truth.absent.contains(&a.ref_node));
        }
        // accepted boxes never overlap earlier ones
        for a in &out.verified {
            let ix = out.observed.index_of(&a.obs_node).unwrap();
            for b in out.solution.assignments() {
                if b.obs_node == a.obs_node { continue; }
                let jx = out.observed.index_of(&b.obs_node).unwrap();
                prop_assert!(iou(out.observed.bbox(ix), out.observed.bbox(jx)) <= params.overlap_iou_max);
            }
        }
    }
}

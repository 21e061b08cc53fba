//! Scoring: idle-classification confusion metrics, multi-object tracking
//! metrics (MOTA / MOTP / IDF1 family), and detection precision/recall.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::assignment::{min_cost_assignment, CostMatrix};
use crate::bbox::BBox;
use crate::detection::{Detection, TrackId};
use crate::error::{Error, Result};
use crate::idle::{IdleVerdict, MachineState};
use crate::simulator::GroundTruth;
use crate::tracker::TrackedObject;

/// Binary classification scores over idle/active windows, Idle positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdleReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl IdleReport {
    pub fn from_counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> Result<Self> {
        let total = tp + fp + tn + fn_;
        if total == 0 {
            return Err(Error::EmptyEvaluation("no windows to score".to_string()));
        }
        let accuracy = (tp + tn) as f64 / total as f64;
        let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
        let recall = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Ok(IdleReport { accuracy, precision, recall, f1, tp, fp, tn, fn_ })
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// One verdict joined against its oracle label; `truth` is `None` for
/// verdicts on clutter-born tracks (no underlying entity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdleOutcome {
    pub predicted: MachineState,
    pub truth: Option<MachineState>,
}

/// Confusion scores with Idle as the positive class. A clutter verdict is
/// an error by construction: predicted Idle counts as a false positive,
/// predicted Active as a false negative.
pub fn idle_metrics(outcomes: &[IdleOutcome]) -> Result<IdleReport> {
    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for o in outcomes {
        match (o.predicted, o.truth) {
            (MachineState::Idle, Some(MachineState::Idle)) => tp += 1,
            (MachineState::Idle, Some(MachineState::Active)) => fp += 1,
            (MachineState::Active, Some(MachineState::Active)) => tn += 1,
            (MachineState::Active, Some(MachineState::Idle)) => fn_ += 1,
            (MachineState::Idle, None) => fp += 1,
            (MachineState::Active, None) => fn_ += 1,
        }
    }
    IdleReport::from_counts(tp, fp, tn, fn_)
}

/// Multi-object tracking scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotReport {
    pub mota: f64,
    /// Mean IoU over matched pairs.
    pub motp: f64,
    pub idf1: f64,
    pub id_precision: f64,
    pub id_recall: f64,
    pub id_switches: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub matches: u64,
    /// Visible ground-truth boxes over the whole run.
    pub gt_total: u64,
}

/// One side of the per-frame matching: an identity with its box.
pub type IdBox = (u64, BBox);

/// Per-frame box lists for predictions and truth. Lower-level entry point
/// used by both [`mot_metrics`] and self-comparison tests.
pub fn mot_metrics_frames(pred: &[Vec<IdBox>], truth: &[Vec<IdBox>], iou_match: f64) -> MotReport {
    let frames = pred.len().max(truth.len());
    let empty: Vec<IdBox> = Vec::new();

    let mut matches = 0u64;
    let mut switches = 0u64;
    let mut false_positives = 0u64;
    let mut false_negatives = 0u64;
    let mut iou_sum = 0.0f64;
    let mut gt_total = 0u64;
    // last hypothesis matched to each ground-truth id, across gaps
    let mut last_hyp: HashMap<u64, u64> = HashMap::new();
    // per-(gt, hyp) overlap counts for the identity measure
    let mut overlap: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    let mut pred_total = 0u64;

    for f in 0..frames {
        let gt_row = truth.get(f).unwrap_or(&empty);
        let hyp_row = pred.get(f).unwrap_or(&empty);
        gt_total += gt_row.len() as u64;
        pred_total += hyp_row.len() as u64;

        // carry over last frame's correspondence where it still holds,
        // then assign the rest by minimum 1 - IoU
        let mut gt_matched = vec![false; gt_row.len()];
        let mut hyp_matched = vec![false; hyp_row.len()];
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();

        for (gi, (gid, gbox)) in gt_row.iter().enumerate() {
            if let Some(prev_hyp) = last_hyp.get(gid) {
                if let Some(hi) = hyp_row.iter().position(|(hid, _)| hid == prev_hyp) {
                    if !hyp_matched[hi] {
                        let iou = gbox.iou(&hyp_row[hi].1);
                        if iou >= iou_match {
                            gt_matched[gi] = true;
                            hyp_matched[hi] = true;
                            pairs.push((gi, hi, iou));
                        }
                    }
                }
            }
        }

        let free_gt: Vec<usize> = (0..gt_row.len()).filter(|&i| !gt_matched[i]).collect();
        let free_hyp: Vec<usize> = (0..hyp_row.len()).filter(|&i| !hyp_matched[i]).collect();
        if !free_gt.is_empty() && !free_hyp.is_empty() {
            let cost = CostMatrix::from_fn(free_gt.len(), free_hyp.len(), |r, c| {
                1.0 - gt_row[free_gt[r]].1.iou(&hyp_row[free_hyp[c]].1)
            });
            let assignment = min_cost_assignment(&cost, 1.0 - iou_match);
            for (r, c) in assignment.pairs {
                let (gi, hi) = (free_gt[r], free_hyp[c]);
                let iou = gt_row[gi].1.iou(&hyp_row[hi].1);
                gt_matched[gi] = true;
                hyp_matched[hi] = true;
                pairs.push((gi, hi, iou));
            }
        }

        for (gi, hi, iou) in pairs {
            let gid = gt_row[gi].0;
            let hid = hyp_row[hi].0;
            matches += 1;
            iou_sum += iou;
            if let Some(prev) = last_hyp.get(&gid) {
                if *prev != hid {
                    switches += 1;
                }
            }
            last_hyp.insert(gid, hid);
        }
        false_negatives += gt_matched.iter().filter(|m| !**m).count() as u64;
        false_positives += hyp_matched.iter().filter(|m| !**m).count() as u64;

        // identity overlap is independent of the event matching
        for (gid, gbox) in gt_row {
            for (hid, hbox) in hyp_row {
                if gbox.iou(hbox) >= iou_match {
                    *overlap.entry((*gid, *hid)).or_insert(0) += 1;
                }
            }
        }
    }

    let mota = if gt_total > 0 {
        1.0 - (false_negatives + false_positives + switches) as f64 / gt_total as f64
    } else {
        1.0
    };
    let motp = if matches > 0 { iou_sum / matches as f64 } else { 0.0 };

    // IDF1: one-to-one identity mapping maximizing total overlap
    let idtp = max_identity_overlap(&overlap);
    let id_precision = if pred_total > 0 { idtp as f64 / pred_total as f64 } else { 0.0 };
    let id_recall = if gt_total > 0 { idtp as f64 / gt_total as f64 } else { 0.0 };
    let idf1 = if pred_total + gt_total > 0 {
        2.0 * idtp as f64 / (pred_total + gt_total) as f64
    } else {
        0.0
    };

    MotReport {
        mota,
        motp,
        idf1,
        id_precision,
        id_recall,
        id_switches: switches,
        false_positives,
        false_negatives,
        matches,
        gt_total,
    }
}

fn max_identity_overlap(overlap: &BTreeMap<(u64, u64), u64>) -> u64 {
    if overlap.is_empty() {
        return 0;
    }
    let mut gt_ids: Vec<u64> = overlap.keys().map(|(g, _)| *g).collect();
    gt_ids.sort_unstable();
    gt_ids.dedup();
    let mut hyp_ids: Vec<u64> = overlap.keys().map(|(_, h)| *h).collect();
    hyp_ids.sort_unstable();
    hyp_ids.dedup();

    let max_single = *overlap.values().max().expect("nonempty") as f64;
    let cost = CostMatrix::from_fn(gt_ids.len(), hyp_ids.len(), |r, c| {
        let w = overlap.get(&(gt_ids[r], hyp_ids[c])).copied().unwrap_or(0);
        max_single - w as f64 // maximize overlap
    });
    let assignment = min_cost_assignment(&cost, f64::MAX);
    assignment
        .pairs
        .iter()
        .map(|(r, c)| overlap.get(&(gt_ids[*r], hyp_ids[*c])).copied().unwrap_or(0))
        .sum()
}

fn truth_frames(gt: &GroundTruth) -> Vec<Vec<IdBox>> {
    gt.frames
        .iter()
        .map(|row| {
            row.iter()
                .filter(|g| g.visible)
                .map(|g| (g.entity_id as u64, g.bbox))
                .collect()
        })
        .collect()
}

fn tracked_frames(tracked: &[TrackedObject], frame_count: usize) -> Vec<Vec<IdBox>> {
    let last = tracked.iter().map(|t| t.frame as usize + 1).max().unwrap_or(0);
    let mut frames: Vec<Vec<IdBox>> = vec![Vec::new(); frame_count.max(last)];
    for t in tracked {
        frames[t.frame as usize].push((t.track_id.0, t.bbox));
    }
    frames
}

/// Scores a tracked stream against scenario ground truth. Only visible
/// ground-truth boxes count; matching is geometric at `IoU >= iou_match`.
pub fn mot_metrics(tracked: &[TrackedObject], gt: &GroundTruth, iou_match: f64) -> MotReport {
    mot_metrics_frames(
        &tracked_frames(tracked, gt.frames.len()),
        &truth_frames(gt),
        iou_match,
    )
}

/// Maps each track to the entity owning at least half of its matched
/// frames, or `None` for clutter-born tracks.
pub fn track_owners(
    tracked: &[TrackedObject],
    gt: &GroundTruth,
    iou_match: f64,
) -> BTreeMap<TrackId, Option<u32>> {
    // per-track tally of which entity each frame's box overlaps best
    let mut tallies: BTreeMap<TrackId, BTreeMap<u32, u64>> = BTreeMap::new();
    let mut track_ids: Vec<TrackId> = tracked.iter().map(|t| t.track_id).collect();
    track_ids.sort_unstable();
    track_ids.dedup();
    for id in &track_ids {
        tallies.insert(*id, BTreeMap::new());
    }

    let truth = truth_frames(gt);
    let empty: Vec<IdBox> = Vec::new();
    let mut by_frame: BTreeMap<u64, Vec<&TrackedObject>> = BTreeMap::new();
    for t in tracked {
        by_frame.entry(t.frame).or_default().push(t);
    }

    for (frame, rows) in &by_frame {
        let gt_row = truth.get(*frame as usize).unwrap_or(&empty);
        if gt_row.is_empty() {
            continue;
        }
        let cost = CostMatrix::from_fn(rows.len(), gt_row.len(), |r, c| {
            1.0 - rows[r].bbox.iou(&gt_row[c].1)
        });
        let assignment = min_cost_assignment(&cost, 1.0 - iou_match);
        for (r, c) in assignment.pairs {
            let entity = gt_row[c].0 as u32;
            *tallies.get_mut(&rows[r].track_id).expect("prefilled").entry(entity).or_insert(0) +=
                1;
        }
    }

    let mut owners = BTreeMap::new();
    for id in track_ids {
        let tally = &tallies[&id];
        let matched_total: u64 = tally.values().sum();
        let owner = tally
            .iter()
            .max_by_key(|(entity, count)| (**count, std::cmp::Reverse(**entity)))
            .filter(|(_, count)| matched_total > 0 && **count * 2 >= matched_total)
            .map(|(entity, _)| *entity);
        owners.insert(id, owner);
    }
    owners
}

/// Joins verdicts to oracle labels over identical window spans via track
/// ownership. Clutter-born verdicts get `truth = None`.
pub fn idle_outcomes(
    verdicts: &[IdleVerdict],
    owners: &BTreeMap<TrackId, Option<u32>>,
    gt: &GroundTruth,
    eps_v: f64,
) -> Vec<IdleOutcome> {
    verdicts
        .iter()
        .map(|v| {
            let truth = owners.get(&v.track_id).copied().flatten().map(|entity| {
                gt.window_idle_label(entity, v.first_frame, v.last_frame, eps_v)
            });
            IdleOutcome { predicted: v.state, truth }
        })
        .collect()
}

/// Precision/recall/F1 for one class or the whole set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Prf {
    fn from_counts(tp: u64, fp: u64, fn_: u64) -> Prf {
        let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
        let recall = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf { precision, recall, f1, tp, fp, fn_ }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub overall: Prf,
    pub per_class: BTreeMap<u32, Prf>,
}

/// Detection-level scores: per frame and class, predictions are matched
/// one-to-one to visible ground truth, greedily in confidence order, a
/// match requiring `IoU >= iou_thresh`.
pub fn detection_prf(pred: &[Detection], gt: &GroundTruth, iou_thresh: f64) -> DetectionReport {
    let mut counts: BTreeMap<u32, (u64, u64, u64)> = BTreeMap::new(); // tp, fp, fn

    for (frame, gt_row) in gt.frames.iter().enumerate() {
        let mut class_ids: Vec<u32> = gt_row.iter().filter(|g| g.visible).map(|g| g.class.id).collect();
        class_ids.extend(pred.iter().filter(|d| d.frame == frame as u64).map(|d| d.class.id));
        class_ids.sort_unstable();
        class_ids.dedup();

        for class_id in class_ids {
            let truth: Vec<&crate::simulator::GtBox> = gt_row
                .iter()
                .filter(|g| g.visible && g.class.id == class_id)
                .collect();
            let mut preds: Vec<&Detection> = pred
                .iter()
                .filter(|d| d.frame == frame as u64 && d.class.id == class_id)
                .collect();
            preds.sort_by(|a, b| {
                b.confidence.partial_cmp(&a.confidence).expect("finite confidence")
            });

            let mut taken = vec![false; truth.len()];
            let mut tp = 0u64;
            let mut fp = 0u64;
            for d in preds {
                let mut best: Option<(usize, f64)> = None;
                for (i, g) in truth.iter().enumerate() {
                    if taken[i] {
                        continue;
                    }
                    let iou = d.bbox.iou(&g.bbox);
                    if iou >= iou_thresh && best.is_none_or(|(_, b)| iou > b) {
                        best = Some((i, iou));
                    }
                }
                match best {
                    Some((i, _)) => {
                        taken[i] = true;
                        tp += 1;
                    }
                    None => fp += 1,
                }
            }
            let fn_ = taken.iter().filter(|t| !**t).count() as u64;
            let e = counts.entry(class_id).or_insert((0, 0, 0));
            e.0 += tp;
            e.1 += fp;
            e.2 += fn_;
        }
    }

    let per_class: BTreeMap<u32, Prf> = counts
        .iter()
        .map(|(id, (tp, fp, fn_))| (*id, Prf::from_counts(*tp, *fp, *fn_)))
        .collect();
    let (tp, fp, fn_) = counts
        .values()
        .fold((0, 0, 0), |acc, v| (acc.0 + v.0, acc.1 + v.1, acc.2 + v.2));
    DetectionReport { overall: Prf::from_counts(tp, fp, fn_), per_class }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::ClassLabel;

    fn b(x: f64, y: f64) -> BBox {
        BBox::new(x, y, 20.0, 20.0).unwrap()
    }

    #[test]
    fn idle_report_from_counts_example() {
        let r = IdleReport::from_counts(3, 1, 4, 2).unwrap();
        assert!((r.accuracy - 0.7).abs() < 1e-12);
        assert!((r.precision - 0.75).abs() < 1e-12);
        assert!((r.recall - 0.6).abs() < 1e-12);
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-4);
        assert_eq!(r.total(), 10);
    }

    #[test]
    fn idle_metrics_all_correct_and_permutation_invariant() {
        let mut outcomes = vec![
            IdleOutcome { predicted: MachineState::Idle, truth: Some(MachineState::Idle) },
            IdleOutcome { predicted: MachineState::Active, truth: Some(MachineState::Active) },
            IdleOutcome { predicted: MachineState::Idle, truth: Some(MachineState::Idle) },
        ];
        let a = idle_metrics(&outcomes).unwrap();
        assert_eq!((a.accuracy, a.precision, a.recall, a.f1), (1.0, 1.0, 1.0, 1.0));
        outcomes.reverse();
        assert_eq!(idle_metrics(&outcomes).unwrap(), a);
    }

    #[test]
    fn idle_metrics_counts_clutter_as_error() {
        let outcomes = vec![
            IdleOutcome { predicted: MachineState::Idle, truth: None },
            IdleOutcome { predicted: MachineState::Active, truth: None },
            IdleOutcome { predicted: MachineState::Idle, truth: Some(MachineState::Idle) },
        ];
        let r = idle_metrics(&outcomes).unwrap();
        assert_eq!((r.tp, r.fp, r.tn, r.fn_), (1, 1, 0, 1));
    }

    #[test]
    fn idle_metrics_empty_join_errors() {
        assert!(matches!(idle_metrics(&[]), Err(Error::EmptyEvaluation(_))));
    }

    #[test]
    fn mot_ten_boxes_one_miss_one_spurious() {
        // 10 gt boxes over 5 frames (2 entities); one frame misses entity 1,
        // and that frame also carries a spurious box far away
        let mut truth: Vec<Vec<IdBox>> = Vec::new();
        let mut pred: Vec<Vec<IdBox>> = Vec::new();
        for f in 0..5 {
            truth.push(vec![(0, b(0.0, 0.0)), (1, b(100.0, 0.0))]);
            let mut row = vec![(10, b(0.0, 0.0))];
            if f == 2 {
                row.push((99, b(400.0, 400.0))); // spurious
            } else {
                row.push((11, b(100.0, 0.0)));
            }
            pred.push(row);
        }
        let r = mot_metrics_frames(&pred, &truth, 0.5);
        assert_eq!(r.gt_total, 10);
        assert_eq!(r.false_negatives, 1);
        assert_eq!(r.false_positives, 1);
        assert_eq!(r.id_switches, 0);
        assert!((r.mota - 0.8).abs() < 1e-12);
    }

    #[test]
    fn mot_self_comparison_is_perfect() {
        let mut frames: Vec<Vec<IdBox>> = Vec::new();
        for f in 0..20 {
            frames.push(vec![
                (1, b(f as f64 * 3.0, 0.0)),
                (2, b(0.0, 100.0 + f as f64)),
            ]);
        }
        let r = mot_metrics_frames(&frames, &frames, 0.5);
        assert_eq!(r.mota, 1.0);
        assert_eq!(r.motp, 1.0);
        assert_eq!(r.id_switches, 0);
        assert_eq!(r.idf1, 1.0);
    }

    #[test]
    fn one_identity_change_is_one_switch() {
        let mut truth: Vec<Vec<IdBox>> = Vec::new();
        let mut pred: Vec<Vec<IdBox>> = Vec::new();
        for f in 0..10 {
            truth.push(vec![(0, b(0.0, 0.0))]);
            pred.push(vec![(if f < 5 { 10 } else { 11 }, b(0.0, 0.0))]);
        }
        let r = mot_metrics_frames(&pred, &truth, 0.5);
        assert_eq!(r.id_switches, 1);
        assert!(r.idf1 < 1.0);
        assert!((r.idf1 - 0.5).abs() < 1e-12);
        assert_eq!(r.mota, 1.0 - 1.0 / 10.0);
    }

    #[test]
    fn single_mid_scenario_swap_costs_one_switch_and_idf1() {
        // two parallel entities; halfway through, the hypothesis ids swap
        let mut truth: Vec<Vec<IdBox>> = Vec::new();
        let mut pred: Vec<Vec<IdBox>> = Vec::new();
        for f in 0..10 {
            truth.push(vec![(0, b(0.0, 0.0)), (1, b(200.0, 0.0))]);
            if f < 5 {
                pred.push(vec![(10, b(0.0, 0.0)), (11, b(200.0, 0.0))]);
            } else {
                pred.push(vec![(11, b(0.0, 0.0)), (10, b(200.0, 0.0))]);
            }
        }
        let r = mot_metrics_frames(&pred, &truth, 0.5);
        assert_eq!(r.id_switches, 2); // both entities change hypothesis
        assert!(r.idf1 < 1.0);
        assert!((r.idf1 - 0.5).abs() < 1e-12); // best mapping keeps 5 of 10 frames each
        assert_eq!(r.false_negatives, 0);
        assert_eq!(r.false_positives, 0);
    }

    fn toy_gt(entities: &[(f64, f64)], frames: usize) -> GroundTruth {
        let mut gt = GroundTruth {
            frame_width: 640.0,
            frame_height: 640.0,
            fps: 10.0,
            frames: Vec::new(),
            true_boxes: vec![Vec::new(); entities.len()],
            entity_classes: entities.iter().map(|_| ClassLabel::excavator()).collect(),
        };
        for _ in 0..frames {
            let mut row = Vec::new();
            for (e, (x, y)) in entities.iter().enumerate() {
                let bb = b(*x, *y);
                gt.true_boxes[e].push(bb);
                row.push(crate::simulator::GtBox {
                    entity_id: e as u32,
                    class: ClassLabel::excavator(),
                    bbox: bb,
                    visible: true,
                    clipped: false,
                });
            }
            gt.frames.push(row);
        }
        gt
    }

    #[test]
    fn track_ownership_majority_rule() {
        let gt = toy_gt(&[(0.0, 0.0), (300.0, 0.0)], 10);
        let mut tracked = Vec::new();
        for f in 0..10u64 {
            tracked.push(TrackedObject {
                frame: f,
                track_id: TrackId(1),
                class: ClassLabel::excavator(),
                bbox: b(0.0, 0.0),
                confidence: 0.9,
            });
        }
        // clutter track matching nothing
        tracked.push(TrackedObject {
            frame: 0,
            track_id: TrackId(2),
            class: ClassLabel::excavator(),
            bbox: b(500.0, 500.0),
            confidence: 0.9,
        });
        let owners = track_owners(&tracked, &gt, 0.5);
        assert_eq!(owners[&TrackId(1)], Some(0));
        assert_eq!(owners[&TrackId(2)], None);
    }

    #[test]
    fn detection_prf_examples() {
        let gt = toy_gt(&[(0.0, 0.0), (300.0, 0.0)], 4);
        // identical predictions
        let mut pred = Vec::new();
        for f in 0..4u64 {
            for (x, y) in [(0.0, 0.0), (300.0, 0.0)] {
                pred.push(Detection::new(f, b(x, y), 0.9, ClassLabel::excavator()).unwrap());
            }
        }
        let r = detection_prf(&pred, &gt, 0.5);
        assert_eq!((r.overall.precision, r.overall.recall, r.overall.f1), (1.0, 1.0, 1.0));

        // half the objects missed, no clutter
        let pred_half: Vec<Detection> = pred.iter().filter(|d| d.bbox.x == 0.0).cloned().collect();
        let r = detection_prf(&pred_half, &gt, 0.5);
        assert_eq!(r.overall.precision, 1.0);
        assert!((r.overall.recall - 0.5).abs() < 1e-12);
    }
}

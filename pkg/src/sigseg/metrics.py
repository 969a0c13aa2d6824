"""Segmentation comparison metrics.

All metrics compare interior breakpoints only; the shared terminal index T
is a representation artifact, never a change point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .signals import Segmentation


def _check_same_T(truth: Segmentation, pred: Segmentation):
    if truth.T != pred.T:
        raise ValueError(f"mismatched signal lengths: {truth.T} != {pred.T}")


def annotation_error(truth: Segmentation, pred: Segmentation) -> int:
    """Absolute difference between predicted and true change counts."""
    _check_same_T(truth, pred)
    return abs(pred.n_bkps - truth.n_bkps)


def hausdorff(truth: Segmentation, pred: Segmentation) -> int:
    """Greatest distance, in samples, between a change point and its
    nearest counterpart; undefined when either change set is empty."""
    _check_same_T(truth, pred)
    a, b = truth.interior, pred.interior
    if not a or not b:
        raise ValueError("hausdorff undefined for empty change set")

    def directed(src, dst):
        return max(min(abs(s - t) for t in dst) for s in src)

    return max(directed(a, b), directed(b, a))


def rand_index(truth: Segmentation, pred: Segmentation) -> float:
    """Fraction of sample pairs on whose grouping the segmentations agree.

    1 means total agreement.  Computed from segment overlap counts in
    O(K) rather than enumerating the T*(T-1)/2 pairs.
    """
    _check_same_T(truth, pred)
    T = truth.T
    if T < 2:
        raise ValueError("rand index needs T >= 2")

    def pairs_within(seg: Segmentation) -> int:
        return sum((b - a) * (b - a - 1) // 2 for a, b in seg.segments())

    # Consecutive cuts of the merged boundary set delimit the intersection
    # pieces of the two partitions.
    merged = sorted(set(truth.bkps) | set(pred.bkps))
    both = 0
    prev = 0
    for cut in merged:
        n = cut - prev
        both += n * (n - 1) // 2
        prev = cut
    total = T * (T - 1) // 2
    agreements = total - pairs_within(truth) - pairs_within(pred) + 2 * both
    return agreements / total


def precision_recall_f1(truth: Segmentation, pred: Segmentation,
                        margin: int) -> tuple[float, float, float]:
    """Detection accuracy with a tolerance of `margin` samples.

    A true change counts as detected when an unused prediction lies at
    strict distance < margin; matching is one-to-one, greedy nearest in
    increasing index order, so one prediction cannot certify two truths.
    Requires 0 < margin < (minimum spacing of the true changes) and
    nonempty change sets on both sides.
    """
    _check_same_T(truth, pred)
    margin = int(margin)
    if margin <= 0:
        raise ValueError("margin must be > 0")
    true_pts, pred_pts = truth.interior, pred.interior
    if not true_pts or not pred_pts:
        raise ValueError("precision/recall undefined for empty change set")
    if len(true_pts) >= 2:
        spacing = min(b - a for a, b in zip(true_pts, true_pts[1:]))
        if margin >= spacing:
            raise ValueError(f"margin {margin} must be below the true change spacing {spacing}")

    used = [False] * len(pred_pts)
    matched = 0
    for t in true_pts:
        best_j, best_d = -1, margin
        for j, p in enumerate(pred_pts):
            if used[j]:
                continue
            d = abs(p - t)
            if d < best_d:
                best_j, best_d = j, d
        if best_j >= 0:
            used[best_j] = True
            matched += 1

    prec = matched / len(pred_pts)
    rec = matched / len(true_pts)
    f1 = 0.0 if prec + rec == 0 else 2.0 * prec * rec / (prec + rec)
    return prec, rec, f1


@dataclass(frozen=True)
class MetricReport:
    """All metrics for one truth/prediction pair; metrics whose
    preconditions fail are None, with the reason recorded."""

    annotation_error: int | None
    hausdorff: int | None
    rand_index: float | None
    precision: float | None
    recall: float | None
    f1: float | None
    margin: int
    reasons: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "annotation_error": self.annotation_error,
            "hausdorff": self.hausdorff,
            "rand_index": self.rand_index,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "margin": self.margin,
            "reasons": dict(self.reasons),
        }


def compute_metric_report(truth: Segmentation, pred: Segmentation,
                          margin: int) -> MetricReport:
    """Evaluate every metric, turning precondition failures into None plus
    a reason instead of raising."""
    reasons: dict[str, str] = {}

    def attempt(name, fn):
        try:
            return fn()
        except ValueError as exc:
            reasons[name] = str(exc)
            return None

    ann = attempt("annotation_error", lambda: annotation_error(truth, pred))
    hd = attempt("hausdorff", lambda: hausdorff(truth, pred))
    ri = attempt("rand_index", lambda: rand_index(truth, pred))
    prf = attempt("f1", lambda: precision_recall_f1(truth, pred, margin))
    prec, rec, f1 = prf if prf is not None else (None, None, None)
    if prf is None:
        reasons.setdefault("precision", reasons.get("f1", ""))
        reasons.setdefault("recall", reasons.get("f1", ""))
    return MetricReport(ann, hd, ri, prec, rec, f1, margin, reasons)

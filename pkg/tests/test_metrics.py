import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import lt_oracle, st_oracle
from sotrack.errors import LengthMismatch
from sotrack.geometry import BoundingBox
from sotrack.metrics import (CERTAINTY_THRESHOLDS, SUCCESS_THRESHOLDS, event_delays, f_score, lt_metrics,
                             st_metrics)
from sotrack.pipeline import Decision, TrackOutput

GT = BoundingBox(50, 50, 20, 20)


def present(t, box):
    return TrackOutput(t, True, box, Decision.SM)


def absent(t):
    return TrackOutput(t, False, None, Decision.ABSENT)


def box_with_iou(value):
    """Same-height box shifted right so the IoU with GT equals ``value`` exactly enough."""
    if value == 0:
        return BoundingBox(200, 200, 20, 20)
    if value == 1:
        return GT
    # overlap width o over union 40 - o: o = 40 v / (1 + v)
    o = 40 * value / (1 + value)
    return GT.translated(20 - o, 0)


@st.composite
def traces(draw, max_len=20):
    n = draw(st.integers(1, max_len))
    coord = st.floats(0, 60, allow_nan=False)
    size = st.floats(1, 30, allow_nan=False)
    gt, pred, vis, cert = [], [], [], []
    for _ in range(n):
        g = BoundingBox(draw(coord), draw(coord), draw(size), draw(size))
        v = draw(st.booleans()) if gt else True
        emit = draw(st.booleans())
        p = g.translated(draw(st.floats(-15, 15)), draw(st.floats(-15, 15))) if emit else None
        gt.append(g if v else None)
        vis.append(v)
        pred.append(p)
        cert.append(draw(st.sampled_from([0.0, 0.25, 0.5, 1.0])) if emit else 0.0)
    return pred, gt, vis, cert


class TestShortTerm:
    def test_perfect(self):
        outs = [present(t, GT) for t in range(10)]
        r = st_metrics(outs, [GT] * 10)
        assert (r.accuracy, r.robustness, r.tc) == (1.0, 0.0, 1.0)
        assert all(v == 1.0 for th, v in r.success_curve if th < 1)
        assert dict(r.success_curve)[1.0] == 0.0

    def test_total_failure(self):
        outs = [present(t, BoundingBox(300, 300, 5, 5)) for t in range(10)]
        r = st_metrics(outs, [GT] * 10)
        assert (r.accuracy, r.robustness, r.tc) == (0.0, 1.0, 0.0)

    def test_toy_trace(self):
        values = [1, 1, 0, 1, 1, 1, 0, 1, 1, 1]
        outs = [present(t, box_with_iou(v)) for t, v in enumerate(values)]
        r = st_metrics(outs, [GT] * 10, skip_first=False)
        assert r.robustness == pytest.approx(0.2)
        assert r.tc == pytest.approx(0.3)
        assert r.accuracy == 1.0

    def test_fractional_ious(self):
        values = [1.0, 0.5, 0.25, 0.0, 0.75]
        outs = [present(t, box_with_iou(v)) for t, v in enumerate(values)]
        r = st_metrics(outs, [GT] * 5)
        assert r.accuracy == pytest.approx(0.5)
        assert r.robustness == pytest.approx(0.25)
        assert r.tc == pytest.approx(0.5)
        assert dict(r.success_curve)[0.6] == pytest.approx(0.25)

    def test_invisible_frames_not_counted(self):
        outs = [present(0, GT), present(1, GT), absent(2), present(3, GT)]
        r = st_metrics(outs, [GT, GT, None, GT], [True, True, False, True])
        assert r.frames == 2 and r.robustness == 0.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            st_metrics([present(0, GT)], [GT, GT])

    @settings(max_examples=200)
    @given(traces())
    def test_matches_oracle(self, trace):
        pred, gt, vis, _ = trace
        r = st_metrics(pred, gt, vis)
        acc, rob, tc, success = st_oracle(pred, gt, vis)
        assert r.accuracy == pytest.approx(acc, abs=1e-9)
        assert r.robustness == pytest.approx(rob, abs=1e-9)
        assert r.tc == pytest.approx(tc, abs=1e-9)
        assert [v for _, v in r.success_curve] == pytest.approx(success, abs=1e-9)

    @given(traces())
    def test_report_invariants(self, trace):
        pred, gt, vis, _ = trace
        r = st_metrics(pred, gt, vis)
        curve = [v for _, v in r.success_curve]
        assert all(b <= a for a, b in zip(curve, curve[1:]))
        assert 0 <= r.accuracy <= 1 and 0 <= r.robustness <= 1 and 0 <= r.tc <= 1
        if r.frames:
            assert curve[0] == pytest.approx(1 - r.robustness)

    @given(traces(), st.integers(1, 10))
    def test_invariant_to_trailing_absence(self, trace, extra):
        pred, gt, vis, cert = trace
        base_st = st_metrics(pred, gt, vis)
        base_lt = lt_metrics(pred, gt, vis, cert)
        pred2, gt2, vis2 = pred + [None] * extra, gt + [None] * extra, vis + [False] * extra
        assert st_metrics(pred2, gt2, vis2) == base_st
        longer = lt_metrics(pred2, gt2, vis2, cert + [0.0] * extra)
        assert longer.f_curve == base_lt.f_curve and longer.pr_curve == base_lt.pr_curve


class TestLongTerm:
    def test_f_spot_values(self):
        assert f_score(0.5, 0.5) == 0.5
        assert f_score(1.0, 0.0) == 0.0
        assert f_score(0.0, 0.0) == 0.0

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_f_bounds(self, p, r):
        f = f_score(p, r)
        assert f <= min(2 * p, 2 * r) + 1e-12
        assert f <= (p + r) / 2 + 1e-12
        assert f >= 0

    def test_grid(self):
        assert len(CERTAINTY_THRESHOLDS) == 101 and CERTAINTY_THRESHOLDS[-1] == 1.0
        assert len(SUCCESS_THRESHOLDS) == 21

    def test_exit_scenario_two_threshold_oracle(self):
        # visible 0-9, absent 10-19, visible 20-29; tracker late on both transitions
        vis = [t < 10 or t >= 20 for t in range(30)]
        gt = [GT if v else None for v in vis]
        outs = []
        for t in range(30):
            shown = t < 13 or t >= 23
            outs.append(present(t, box_with_iou(0.8) if t % 2 else GT) if shown else absent(t))
        r = lt_metrics(outs, gt, vis)
        pred = [o.box for o in outs]
        cert = [o.certainty for o in outs]
        for tau in (0.0, 1.0):
            p, rec, f = lt_oracle(pred, gt, vis, cert, tau)
            i = CERTAINTY_THRESHOLDS.index(tau)
            assert r.pr_curve[i] == pytest.approx(p, abs=1e-12)
            assert r.re_curve[i] == pytest.approx(rec, abs=1e-12)
            assert r.f_curve[i] == pytest.approx(f, abs=1e-12)
        # zero-one certainty makes the curve flat
        assert len(set(r.f_curve)) == 1

    def test_certainty_override(self):
        outs = [present(t, GT) for t in range(5)]
        r = lt_metrics(outs, [GT] * 5, certainties=[1, 1, 1, 0.3, 0.3])
        i = CERTAINTY_THRESHOLDS.index(0.5)
        assert r.pr_curve[i] == 1.0 and r.re_curve[i] == 0.5
        assert r.f_max == 1.0 and r.tau_star == 0.0

    @settings(max_examples=200)
    @given(traces())
    def test_matches_oracle(self, trace):
        pred, gt, vis, cert = trace
        r = lt_metrics(pred, gt, vis, cert)
        for tau in (0.0, 0.25, 0.3, 0.5, 1.0):
            i = CERTAINTY_THRESHOLDS.index(tau)
            p, rec, f = lt_oracle(pred, gt, vis, cert, tau)
            assert (r.pr_curve[i], r.re_curve[i], r.f_curve[i]) == pytest.approx((p, rec, f), abs=1e-9)
        assert r.f_max == max(r.f_curve)
        assert r.f_curve[CERTAINTY_THRESHOLDS.index(r.tau_star)] == r.f_max

    @given(traces())
    def test_f_matches_harmonic_mean_everywhere(self, trace):
        pred, gt, vis, cert = trace
        r = lt_metrics(pred, gt, vis, cert)
        for p, rec, f in zip(r.pr_curve, r.re_curve, r.f_curve):
            assert f == f_score(p, rec)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            lt_metrics([present(0, GT)], [GT], certainties=[1.0, 1.0])


class TestEvents:
    vis = [True] * 10 + [False] * 10 + [True] * 10

    def test_aligned(self):
        events = event_delays(self.vis, self.vis)
        assert [(e.kind, e.gt_frame, e.delay) for e in events] == [("exit", 10, 0), ("entry", 20, 0)]

    def test_late_entry(self):
        flags = [True] * 10 + [False] * 13 + [True] * 7
        events = event_delays(flags, self.vis)
        assert events[1].kind == "entry" and events[1].delay == 3

    def test_early_exit_negative(self):
        flags = [True] * 8 + [False] * 12 + [True] * 10
        assert event_delays(flags, self.vis)[0].delay == -2

    def test_missed(self):
        long_vis = [True] * 40 + [False] * 40
        events = event_delays([True] * 80, long_vis)
        assert events[0].missed and events[0].delay is None

    def test_beyond_window_is_missed(self):
        long_vis = [True] * 40 + [False] * 60
        flags = [True] * 71 + [False] * 29
        assert event_delays(flags, long_vis)[0].missed
        flags = [True] * 70 + [False] * 30
        assert event_delays(flags, long_vis)[0].delay == 30

    def test_accepts_outputs(self):
        outs = [present(t, GT) if v else absent(t) for t, v in enumerate(self.vis)]
        assert [e.delay for e in event_delays(outs, self.vis)] == [0, 0]

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            event_delays([True], [True, False])

"""PyTorch binding: trace following, resume, checkpointing, clamping."""
import json
import warnings

import pytest

torch = pytest.importorskip("torch")

from uba_torch import UBAScheduler
from uba_torch.core import SpecError, parse_spec, schedule_rates

SPEC = {
    "kind": "UBA",
    "total_steps": 30,
    "eta_min": 0.0,
    "warmup_fraction": 0.2,
    "plan": {"boundaries": [0, 24], "phi": [3.0], "eta_max": [1.0]},
}


def make_opt(lrs):
    groups = [{"params": [torch.nn.Parameter(torch.zeros(2))], "lr": lr}
              for lr in lrs]
    return torch.optim.SGD(groups)


def advance(opt, sched):
    opt.step()
    sched.step()


def test_scheduler_follows_trace():
    rates = schedule_rates(parse_spec(SPEC))
    opt = make_opt([0.5])
    sched = UBAScheduler(opt, SPEC)
    seen = [opt.param_groups[0]["lr"]]
    for _ in range(len(rates) - 1):
        advance(opt, sched)
        seen.append(opt.param_groups[0]["lr"])
    assert seen == pytest.approx(list(rates), rel=1e-12, abs=1e-15)


def test_resume_starts_at_next_row():
    rates = schedule_rates(parse_spec(SPEC))
    opt = make_opt([1.0])
    sched = UBAScheduler(opt, SPEC, last_step=9)
    assert opt.param_groups[0]["lr"] == pytest.approx(rates[9], rel=1e-12)
    advance(opt, sched)
    assert opt.param_groups[0]["lr"] == pytest.approx(rates[10], rel=1e-12)


def test_multi_group_keeps_ratio():
    rates = schedule_rates(parse_spec(SPEC))
    opt = make_opt([0.5, 0.125])
    UBAScheduler(opt, SPEC)
    assert opt.param_groups[0]["lr"] == pytest.approx(rates[0], rel=1e-12)
    assert opt.param_groups[1]["lr"] == pytest.approx(rates[0] * 0.25, rel=1e-12)


def test_state_dict_round_trip():
    opt_a = make_opt([0.5])
    sched_a = UBAScheduler(opt_a, SPEC)
    for _ in range(10):
        advance(opt_a, sched_a)
    opt_b = make_opt([0.5])
    sched_b = UBAScheduler(opt_b, SPEC)
    sched_b.load_state_dict(sched_a.state_dict())
    for _ in range(5):
        advance(opt_a, sched_a)
        advance(opt_b, sched_b)
        assert opt_b.param_groups[0]["lr"] == opt_a.param_groups[0]["lr"]


def test_past_budget_clamps_and_warns_once():
    doc = {"kind": "Cosine", "total_steps": 4, "eta_min": 0.0,
           "warmup_fraction": 0.0, "baseline_params": {"eta0": 1.0}}
    rates = schedule_rates(parse_spec(doc))
    opt = make_opt([1.0])
    sched = UBAScheduler(opt, doc)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        for _ in range(6):
            advance(opt, sched)
    hits = [w for w in rec
            if issubclass(w.category, RuntimeWarning) and "budget" in str(w.message)]
    assert len(hits) == 1
    assert opt.param_groups[0]["lr"] == pytest.approx(rates[-1], rel=1e-12)


def test_zero_anchor_rate_rejected():
    opt = make_opt([0.0])
    with pytest.raises(SpecError):
        UBAScheduler(opt, SPEC)


def test_spec_path_construction(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(SPEC))
    opt = make_opt([1.0])
    sched = UBAScheduler(opt, str(path))
    assert opt.param_groups[0]["lr"] == pytest.approx(
        schedule_rates(parse_spec(SPEC))[0], rel=1e-12)
    assert sched.get_last_lr() == [opt.param_groups[0]["lr"]]

import json
import math

import numpy as np
import pytest

from lpp_lab import analytics as an
from lpp_lab.errors import ConfigError
from lpp_lab.experiments import resolve, run_experiment
from lpp_lab.experiments.biinf import northeast_anchors, southwest_anchors, union_event
from lpp_lab.experiments.config import load_config_file
from lpp_lab.experiments.fixtures import ENV_VAR, load_fixture
from lpp_lab.experiments.oracles import edge_usage_union_bruteforce, shape_corner_mean
from lpp_lab.experiments.parallel import run_replicates, stream_id
from lpp_lab.sampling import RngStream, WeightField, sample_weight_field


def run(name, **kw):
    return run_experiment(resolve(name, kw))


def test_parallel_results_ignore_thread_count():
    task = lambda s, k: float(s.uniform_open()) + k
    a = run_replicates(task, 257, seed=3, threads=1)
    b = run_replicates(task, 257, seed=3, threads=4)
    assert a == b
    assert stream_id(2, 5) == (2 << 32) | 5


def test_config_required_defaults_and_errors(tmp_path):
    with pytest.raises(ConfigError):
        resolve("shape", {})
    with pytest.raises(ConfigError):
        resolve("shape", {"r": 0.25, "reps": 0})
    with pytest.raises(ConfigError):
        resolve("logmgf", {"r": 0.25, "p": 0.2, "q": 0.5})
    cfg = resolve("shape", {"r": 0.25})
    assert cfg.n == 400 and cfg.reps == 100
    f = tmp_path / "c.cfg"
    f.write_text("# comment\nr = 0.3\nn = 12  # trailing\nxi = 1,2\n")
    assert load_config_file(str(f)) == {"r": 0.3, "n": 12, "xi": (1.0, 2.0)}
    f.write_text("bogus = 1\n")
    with pytest.raises(ConfigError):
        load_config_file(str(f))


def test_shape_degenerate_n1_matches_enumeration():
    rep = run("shape", r=0.25, n=1, reps=20_000, seed=1)
    assert rep.verdicts["matches_enumeration_3se"] == "pass"
    e = rep.estimates[0]
    assert abs(e.estimate - shape_corner_mean(0.25)) <= 3 * e.se


def test_shape_small_is_below_gamma():
    rep = run("shape", r=0.25, n=60, reps=30, seed=2, tol=0.3)
    assert rep.estimates[0].estimate < 2.0
    assert rep.verdicts["below_gamma"] == "pass"


def test_logmgf_trivial_and_one_site():
    rep = run("logmgf", r=0.25, p=0.5, q=0.5, m=3, n=3, reps=100)
    assert rep.estimates[0].estimate == 0.0 and rep.status == "pass"
    rep = run("logmgf", r=0.25, p=0.45, q=0.55, m=1, n=0, reps=20_000, seed=4)
    e = rep.estimates[0]
    assert abs(e.estimate - math.log(0.55 / 0.45)) <= 3 * e.se
    assert rep.status == "pass"


def test_logmgf_heavy_tilt_is_flagged():
    rep = run("logmgf", r=0.25, p=0.3, q=0.9, m=2, n=2, reps=500)
    assert rep.warnings and rep.verdicts["closed_form_within_3se"] == "inconclusive"


def test_burke_small_grid():
    rep = run("burke", r=0.25, p=0.5, size=(60,), reps=20, seed=5)
    assert rep.verdicts["recovery_min_IJ_equals_weight"] == "pass"
    assert rep.verdicts["coupled_domination"] == "pass"
    with pytest.raises(ConfigError):
        run("burke", r=0.25, p=0.5, size=(1,), reps=2)


def test_exit_tail_edges():
    rep = run("exit-tail", r=0.25, n=20, s=(0.0, 100.0), reps=200, seed=6)
    ests = [e.estimate for e in rep.estimates]
    assert ests == [1.0, 0.0]
    assert any("pinned" in w for w in rep.warnings)
    with pytest.raises(ConfigError):
        run("exit-tail", r=0.25, p=0.9, n=200, reps=10)


def test_exit_tail_monotone_small():
    rep = run("exit-tail", r=0.25, n=40, reps=2000, seed=7)
    ests = [e.estimate for e in rep.estimates]
    assert all(a > b for a, b in zip(ests, ests[1:]))
    assert "decay_ratio" not in rep.verdicts  # fixture gate only at its own configuration


def test_crossing_full_height_and_monotone():
    m = n = 30
    s_full = n / (m + n) ** (2 / 3)
    rep = run("crossing", r=0.25, n=n, s=(0.5, 1.0, s_full + 0.1), reps=300, seed=8)
    cross = [e.estimate for e in rep.estimates if "cross" in e.label]
    assert cross[-1] == 1.0
    assert all(a <= b for a, b in zip(cross, cross[1:]))


def test_rw_oracle_and_mc():
    rep = run("rw", p=0.5, n=40, reps=20_000, seed=9)
    assert rep.status == "pass", rep.verdicts
    assert rep.statistics["sa_max_abs_diff"] <= 1e-8


def test_rw_boundary_k1_and_directions():
    # zero separation: both half walks have zero drift
    rep = run("rw-boundary", r=0.25, size=(1, 8), reps=4000, seed=10, gap=0.0)
    assert rep.verdicts["exact_K1_N1"] == "pass"
    assert rep.status == "pass", rep.verdicts
    with pytest.raises(ConfigError):
        run("rw-boundary", r=0.25, size=(64,), reps=10, gap=0.5)


def test_biinf_anchor_sets():
    sw = southwest_anchors(8, 0.25)
    ne = northeast_anchors(8, 0.25)
    assert (-8, -2) in sw and (-8, -1) not in sw and (-2, -8) in sw
    assert (8, 2) in ne and (8, 1) not in ne and (2, 8) in ne
    assert len(set(sw)) == len(sw) and len(set(ne)) == len(ne)


@pytest.mark.parametrize("seed", range(20))
def test_biinf_event_matches_enumeration_small(seed):
    N = 4
    f = sample_weight_field(RngStream(seed, 99), (-N, -N), 2 * N + 1, 2 * N + 1, 0.25)
    us, vs = southwest_anchors(N, 0.25), northeast_anchors(N, 0.25)
    assert union_event(f.contiguous(), N, us, vs) == edge_usage_union_bruteforce(f, us, vs)


def test_biinf_constant_field_and_collinear():
    N = 3
    f = WeightField.from_array(np.ones((7, 7), dtype=np.int32), origin=(-N, -N))
    us, vs = southwest_anchors(N, 0.3), northeast_anchors(N, 0.3)
    assert union_event(f.contiguous(), N, us, vs) == edge_usage_union_bruteforce(f, us, vs)
    g = sample_weight_field(RngStream(1), (-N, -N), 7, 7, 0.5)
    assert union_event(g.contiguous(), N, [(-N, 0)], [(N, 0)])


def test_biinf_memory_budget():
    with pytest.raises(ConfigError):
        run("biinf", r=0.25, delta=0.25, size=(20_000,), reps=1)


def test_reports_deterministic_and_serializable():
    a = run("exit-tail", r=0.25, n=20, reps=300, seed=11)
    b = run("exit-tail", r=0.25, n=20, reps=300, seed=11)
    assert a.canonical_bytes() == b.canonical_bytes()
    d = json.loads(a.to_json())
    assert "timing" not in d and d["config"]["seed"] == 11
    for e in d["estimates"]:
        assert 0.0 <= e["estimate"] <= 1.0 and e["n"] == 300
    lines = a.to_csv().splitlines()
    assert lines[0].split(",")[-3:] == ["estimate", "se", "n"] and len(lines) == 5


def test_fixture_override(tmp_path, monkeypatch):
    (tmp_path / "exit_tail.json").write_text(json.dumps({"ratio_threshold": 0.5, "config": {}}))
    monkeypatch.setenv(ENV_VAR, str(tmp_path))
    assert load_fixture("exit_tail")["ratio_threshold"] == 0.5
    with pytest.raises(ConfigError):
        load_fixture("crossing")

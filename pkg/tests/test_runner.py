import json
import math
from dataclasses import replace

import numpy as np
import pytest

from absim.errors import ConfigInvalid, ParseError, ZeroPostselection
from absim.hilbert import apply
from absim.interferometer import build_double_mzi, build_single_mzi, forward_state, port_state, transfer
from absim.runner import (
    BATCH,
    ScenarioConfig,
    accumulated_shift,
    config_to_text,
    dump_json,
    parse_config,
    run_scenario,
    survival_scaling,
    trial_rng,
)
from absim.tsvf import postselect_probability
from oracles import flip_quadrature


# ------------------------------------------------------------------ parsing


def test_minimal_config_defaults():
    cfg = parse_config("scenario = single_mzi\n")
    assert (cfg.g0, cfg.delta, cfg.flux, cfg.trials, cfg.seed) == (0.1, 1.0, 0.0, 10000, 0)
    assert cfg.postselect == "R" and cfg.cut == "mid"
    assert cfg.repetitions_per_trial == 1


def test_double_mzi_defaults_to_first_stage_cut():
    assert parse_config("scenario = double_mzi").cut == "mid1"


@pytest.mark.parametrize("text,value", [("pi", math.pi), ("-pi/2", -math.pi / 2), ("3*pi/4", 0.75 * math.pi), ("2 pi", 2 * math.pi), ("0.5", 0.5)])
def test_pi_sugar(text, value):
    assert parse_config(f"scenario = double_mzi\nflux = {text}").flux == pytest.approx(value, abs=1e-15)


def test_comments_and_outputs():
    cfg = parse_config("# header\nscenario = kicked_qubit  # trailing\nv0 = pi\noutputs = postselection, flips\n")
    assert cfg.v0 == pytest.approx(math.pi)
    assert cfg.outputs == ("postselection", "flips")


@pytest.mark.parametrize(
    "text,field",
    [
        ("scenario = single_mzi\ntrials = 0", "trials"),
        ("scenario = single_mzi\ndelta = -1", "delta"),
        ("scenario = warp_drive", "scenario"),
        ("scenario = single_mzi\ncolour = red", "colour"),
        ("g0 = 0.1", "scenario"),
        ("scenario = double_mzi\ncut = mid7", "cut"),
        ("scenario = double_mzi\npostselect = sx+", "postselect"),
        ("scenario = kicked_qubit\npostselect = up", "postselect"),
        ("scenario = single_mzi\noutputs = everything", "outputs"),
        ("scenario = single_mzi\nseed = -1", "seed"),
        ("scenario = lattice_check\nsites = 8\nsteps = 8", "steps"),
    ],
)
def test_config_invalid_names_field(text, field):
    with pytest.raises(ConfigInvalid) as exc:
        parse_config(text)
    assert exc.value.field == field


@pytest.mark.parametrize(
    "text,line,column",
    [
        ("scenario = single_mzi\nthis line has no equals", 2, 1),
        ("scenario = single_mzi\n  g0 = abc", 2, 8),
        ("scenario = single_mzi\ntrials = 1.5", 2, 10),
        ("scenario = single_mzi\ng0 =", 2, 5),
        ("scenario = single_mzi\nscenario = double_mzi", 2, 1),
    ],
)
def test_parse_error_location(text, line, column):
    with pytest.raises(ParseError) as exc:
        parse_config(text)
    assert (exc.value.line, exc.value.column) == (line, column)


def test_config_text_round_trip():
    cfg = parse_config("scenario = double_mzi\nflux = pi\ng0 = 0.3\nseed = 77\nrepetitions_per_trial = 5")
    assert parse_config(config_to_text(cfg)) == cfg


def test_large_seed_accepted():
    assert parse_config("scenario = single_mzi\nseed = 0xFFFFFFFFFFFFFFFF").seed == 2**64 - 1


# ------------------------------------------------------------------ rng


def test_trial_streams_are_position_independent():
    a = trial_rng(5, 1234).random(4)
    b = trial_rng(5, 1234).random(4)
    c = trial_rng(5, 1235).random(4)
    d = trial_rng(6, 1234).random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)


# ------------------------------------------------------------------ runs


SCENARIO_CFGS = [
    ScenarioConfig("single_mzi", flux=0.7, trials=20000),
    ScenarioConfig("double_mzi", flux=math.pi / 2, trials=20000),
    ScenarioConfig("double_well", v0=math.pi / 3, trials=20000, postselect="sx-"),
    ScenarioConfig("kicked_qubit", v0=math.pi / 3, trials=20000),
]


@pytest.mark.parametrize("cfg", SCENARIO_CFGS, ids=lambda c: c.scenario)
def test_zero_coupling_rate_and_means(cfg):
    rep = run_scenario(replace(cfg, g0=0.0))
    analytic = rep.analytic["postselection_probability"]
    est = rep.postselection_rate
    assert abs(est["value"] - analytic) <= 3 * est["stderr"]
    for name, m in rep.pointer_means.items():
        # readings are pure width-1 noise, centred on zero
        assert abs(m["value"]) <= 3 * m["stderr"]
    assert rep.flips["total"] == 0


def test_zero_coupling_analytic_matches_transfer_product():
    rep = run_scenario(ScenarioConfig("single_mzi", flux=0.7, g0=0.0, trials=100))
    net_p = np.abs(transfer(build_single_mzi(0.7)).entries[1, 0]) ** 2
    assert rep.analytic["postselection_probability"] == pytest.approx(net_p, abs=1e-14)
    assert net_p == pytest.approx(math.cos(0.35) ** 2, abs=1e-14)


def test_kicked_qubit_pi_reverses_sigma_x():
    rep = run_scenario(ScenarioConfig("kicked_qubit", v0=math.pi, g0=0.0, trials=5000, postselect="sx-"))
    assert rep.postselected == rep.trials
    assert rep.analytic["heisenberg_sigma_x"]["sigma_x"] == pytest.approx(-1, abs=1e-12)


def test_zero_postselection():
    with pytest.raises(ZeroPostselection):
        run_scenario(ScenarioConfig("kicked_qubit", v0=math.pi, g0=0.0, trials=500, postselect="sx+"))


def test_double_mzi_flux_pi_means():
    rep = run_scenario(ScenarioConfig("double_mzi", flux=math.pi, trials=20000, seed=3))
    pm = rep.pointer_means
    assert abs(pm["R1"]["value"] - 0.1) <= 3 * pm["R1"]["stderr"]
    assert abs(pm["L1"]["value"]) <= 3 * pm["L1"]["stderr"]
    assert rep.analytic["exact_single_coupling_means"]["R1"] == pytest.approx(0.1, abs=1e-14)


def test_flux_changes_first_stage_means_but_not_l2_occupation():
    means = {}
    for flux in (0.0, math.pi):
        rep = run_scenario(ScenarioConfig("double_mzi", flux=flux, trials=40000, seed=11))
        means[flux] = rep.pointer_means
        assert abs(forward_state(build_double_mzi(flux), "mid2").amps[0]) < 1e-15
    for arm in ("L1", "R1"):
        a, b = means[0.0][arm], means[math.pi][arm]
        assert abs(a["value"] - b["value"]) > 5 * math.hypot(a["stderr"], b["stderr"])


def _two_pointer_conditional_means(flux, g0, delta):
    # both arm pointers couple at mid1; the joint overlap of branches a, b is
    # the product of the two pointers' packet overlaps
    net = build_double_mzi(flux)
    pre = forward_state(net, "mid1").amps
    back = apply(transfer(net, "mid1", "out").dagger, port_state(net, "R")).amps
    amp = back.conj() * pre  # branch a = arm a
    shifts = {"L1": np.array([g0, 0.0]), "R1": np.array([0.0, g0])}
    over = np.ones((2, 2))
    for s in shifts.values():
        over = over * np.exp(-((s[:, None] - s[None, :]) ** 2) / (8 * delta**2))
    w = np.outer(amp, amp.conj()) * over
    z = np.real(w.sum())
    return {arm: float(np.real(np.sum(w * 0.5 * (s[:, None] + s[None, :]))) / z) for arm, s in shifts.items()}


@pytest.mark.slow
def test_conditional_means_converge_at_inverse_root_rate():
    flux, g0 = math.pi / 2, 0.1
    exact = _two_pointer_conditional_means(flux, g0, 1.0)
    rms = {}
    for n in (256, 4096):
        errs = []
        for seed in range(64):
            rep = run_scenario(ScenarioConfig("double_mzi", flux=flux, g0=g0, trials=n, seed=1000 + seed))
            errs.append(rep.pointer_means["R1"]["value"] - exact["R1"])
        rms[n] = math.sqrt(np.mean(np.square(errs)))
    ratio = rms[256] / rms[4096]
    assert abs(ratio - 4) <= 1.5, ratio


def test_two_pointer_oracle_agrees_with_single_coupling_at_flux_pi():
    rep = run_scenario(ScenarioConfig("double_mzi", flux=math.pi, trials=10))
    exact = _two_pointer_conditional_means(math.pi, 0.1, 1.0)
    for arm in ("L1", "R1"):
        assert rep.analytic["exact_single_coupling_means"][arm] == pytest.approx(exact[arm], abs=1e-14)


def test_weak_value_analytic_entries():
    rep = run_scenario(ScenarioConfig("double_mzi", flux=math.pi, trials=10))
    assert rep.analytic["weak_values"]["R1"] == pytest.approx([1, 0], abs=1e-12)
    assert rep.analytic["weak_values"]["L1"] == pytest.approx([0, 0], abs=1e-12)
    assert rep.analytic["predicted_means"]["R1"] == pytest.approx(0.1)


def test_postselection_matches_tsvf_probability():
    cfg = ScenarioConfig("double_mzi", flux=0.4, trials=10)
    net = build_double_mzi(0.4)
    rep = run_scenario(cfg)
    p = postselect_probability(forward_state(net, "mid1"), transfer(net, "mid1", "out"), port_state(net, "R"))
    assert rep.analytic["postselection_probability"] == pytest.approx(p, abs=1e-15)


# ------------------------------------------------------------------ accumulated shift


def test_accumulated_shift_zero_repetitions():
    out = accumulated_shift(ScenarioConfig("double_mzi", flux=math.pi, trials=2000, repetitions_per_trial=0))
    for arm in ("L1", "R1"):
        assert out[arm]["value"] == 0.0
        assert out[arm]["predicted"] == pytest.approx(0.0, abs=1e-15)


def test_accumulated_shift_follows_flux_zero_weak_values():
    out = accumulated_shift(ScenarioConfig("double_mzi", flux=0.0, trials=2000, repetitions_per_trial=50, seed=9))
    assert out["L1"]["predicted"] == pytest.approx(5.0)
    assert out["R1"]["predicted"] == pytest.approx(0.0, abs=1e-12)
    for arm in ("L1", "R1"):
        assert abs(out[arm]["value"] - out[arm]["predicted"]) <= 3 * out[arm]["stderr"]


def test_accumulated_shift_needs_double_mzi():
    with pytest.raises(ConfigInvalid):
        accumulated_shift(ScenarioConfig("single_mzi"))


# ------------------------------------------------------------------ survival


def test_survival_without_coupling():
    for row in survival_scaling(0.0, [1, 4, 16], trials=200):
        assert row["no_flip_fraction"] == 1.0
        assert row["analytic"] == 1.0


def test_survival_validation():
    with pytest.raises(ConfigInvalid):
        survival_scaling(1.5, [4], trials=10)
    with pytest.raises(ConfigInvalid):
        survival_scaling(0.5, [16, 4], trials=10)
    with pytest.raises(ConfigInvalid):
        survival_scaling(0.5, [4], trials=0)


def test_survival_analytic_against_quadrature_product():
    rows = survival_scaling(0.5, [16, 64], trials=10)
    for row in rows:
        expected = (1 - flip_quadrature(0.5, row["delta"])) ** row["N"]
        assert row["analytic"] == pytest.approx(expected, rel=1e-8)


def test_survival_empirical_n64():
    (row,) = survival_scaling(0.5, [64], trials=10000, seed=4)
    assert abs(row["no_flip_fraction"] - row["analytic"]) <= 3 * math.sqrt(row["analytic"] * (1 - row["analytic"]) / 10000)


def test_survival_analytic_monotone_and_bracketed():
    rows = survival_scaling(0.5, [16, 64, 256, 1024], trials=1)
    vals = [r["analytic"] for r in rows]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert all(math.exp(-0.25) <= v <= 1 for v in vals)


# ------------------------------------------------------------------ reports


def test_report_fields_filtered_by_outputs():
    rep = run_scenario(ScenarioConfig("single_mzi", trials=50, outputs=("postselection",)))
    d = rep.as_dict()
    assert "postselection_rate" in d and "pointer_means" not in d and "analytic" not in d


def test_every_estimate_has_stderr():
    d = run_scenario(ScenarioConfig("double_mzi", flux=math.pi, trials=3000)).as_dict()

    def walk(x):
        if isinstance(x, dict):
            if "value" in x:
                assert "stderr" in x
            for v in x.values():
                walk(v)

    walk({k: d[k] for k in ("postselection_rate", "pointer_means", "accumulated_shift", "flips")})


def test_json_floats_keep_seventeen_digits():
    text = dump_json({"x": 0.1, "y": [1 / 3, 2], "z": None, "b": True})
    assert "0.10000000000000001" in text and "0.33333333333333331" in text
    back = json.loads(text)
    assert back["y"][0] == 1 / 3 and back["z"] is None and back["b"] is True


def test_report_json_is_valid_and_ordered():
    d = json.loads(run_scenario(ScenarioConfig("double_mzi", trials=100)).to_json())
    assert list(d)[:4] == ["config", "network", "trials", "postselected"]


def test_trial_records_and_csv(tmp_path):
    rep = run_scenario(ScenarioConfig("double_mzi", trials=40, repetitions_per_trial=3))
    recs = list(rep.trial_records())
    assert len(recs) == 40
    assert all(len(r.readouts) == 3 * 2 for r in recs)
    assert sum(r.postselected for r in recs) == rep.postselected
    path = tmp_path / "t.csv"
    rep.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("trial_index,postselected,flips,q0_L1_0,q0_R1_0")
    assert len(lines) == 41


@pytest.mark.parametrize("cfg", SCENARIO_CFGS + [ScenarioConfig("lattice_check", trials=5, sites=16, steps=4)], ids=lambda c: c.scenario)
def test_byte_identical_across_workers(cfg):
    cfg = replace(cfg, trials=2 * BATCH + 17) if cfg.scenario != "lattice_check" else cfg
    a = run_scenario(cfg, workers=1).to_json()
    b = run_scenario(cfg, workers=3).to_json()
    c = run_scenario(cfg, workers=1).to_json()
    assert a == b == c


def test_lattice_report():
    d = run_scenario(ScenarioConfig("lattice_check", trials=10, sites=32, steps=8)).as_dict()
    assert d["lattice"]["passed"] and d["lattice"]["max_deviation"] <= 1e-10

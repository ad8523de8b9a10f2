"""Scenario configs, seeded Monte Carlo ensembles and JSON/CSV reports.

Per-trial randomness comes from a counter-based Philox stream keyed by the
run seed with counter ``[0, 0, stream, trial_index]``, so trial ``t`` sees
the same numbers whatever the batch layout or worker count.  Trials are
simulated in fixed blocks of ``BATCH`` indices and merged in index order.

Each trial of a pointer scenario draws, in this order, ``2*m + 1``
uniforms (branch choices, flip tests, postselection) and ``m`` standard
normals, where ``m = repetitions_per_trial * (number of pointers)``.
"""
from __future__ import annotations

import csv
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import interferometer as ifm
from .errors import ConfigInvalid, OrthogonalSelection, ParseError, ZeroPostselection
from .hilbert import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    SX_MINUS,
    SX_PLUS,
    SZ_MINUS,
    SZ_PLUS,
    Ket,
    LinOp,
    apply,
)
from .modular import (
    CyclicLattice,
    LatticePotential,
    heisenberg_evolved,
    kicked_qubit_evolution,
    modular_commutator_check,
)
from .pointer import (
    GaussianPointer,
    conditional_pointer_mean,
    couple,
    expected_flip_probability,
    flip_probability,
    readout_batch,
)
from .tsvf import TwoStateVector, postselect_probability, weak_value

SCENARIOS = ("double_well", "single_mzi", "double_mzi", "kicked_qubit", "lattice_check")
OUTPUTS = ("postselection", "pointer_means", "accumulated_shift", "flips", "analytic")
BATCH = 2048
LATTICE_BOUND = 1e-10

_DEFAULT_POST = {
    "double_well": "sz+",
    "single_mzi": "R",
    "double_mzi": "R",
    "kicked_qubit": "sx-",
    "lattice_check": "",
}
_DEFAULT_CUT = {"single_mzi": "mid", "double_mzi": "mid1", "double_well": "kick"}
_QUBIT_STATES = {"sz+": SZ_PLUS, "sz-": SZ_MINUS, "sx+": SX_PLUS, "sx-": SX_MINUS, "R": SZ_PLUS, "L": SZ_MINUS}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    g0: float = 0.1
    delta: float = 1.0
    flux: float = 0.0
    trials: int = 10000
    repetitions_per_trial: int = 1
    seed: int = 0
    postselect: str = ""
    outputs: Tuple[str, ...] = OUTPUTS
    cut: str = ""
    v0: float = 0.0
    sites: int = 32
    steps: int = 1

    def __post_init__(self):
        if not self.postselect and self.scenario in _DEFAULT_POST:
            object.__setattr__(self, "postselect", _DEFAULT_POST[self.scenario])
        if not self.cut and self.scenario in _DEFAULT_CUT:
            object.__setattr__(self, "cut", _DEFAULT_CUT[self.scenario])
        object.__setattr__(self, "outputs", tuple(self.outputs))

    def validate(self) -> "ScenarioConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigInvalid("scenario", f"expected one of {', '.join(SCENARIOS)}")
        for name in ("g0", "delta", "flux", "v0"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigInvalid(name, "must be finite")
        if not self.delta > 0:
            raise ConfigInvalid("delta", "must be positive")
        if self.trials < 1:
            raise ConfigInvalid("trials", "must be at least 1")
        if self.repetitions_per_trial < 0:
            raise ConfigInvalid("repetitions_per_trial", "must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalid("seed", "must be an unsigned 64-bit integer")
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad:
            raise ConfigInvalid("outputs", f"unknown statistic(s) {', '.join(bad)}")
        if self.scenario == "lattice_check":
            if self.sites < 1:
                raise ConfigInvalid("sites", "must be at least 1")
            if abs(self.steps) >= self.sites and self.sites > 1:
                raise ConfigInvalid("steps", "must satisfy |steps| < sites")
            return self
        if self.scenario in ("single_mzi", "double_mzi"):
            net = _network(self)
            if self.postselect not in ("L", "R"):
                raise ConfigInvalid("postselect", "expected an output port, L or R")
            if self.cut not in net.cuts or self.cut in ("in", "out"):
                raise ConfigInvalid("cut", f"unknown cut {self.cut!r}")
        elif self.postselect not in _QUBIT_STATES:
            raise ConfigInvalid("postselect", f"expected one of {', '.join(_QUBIT_STATES)}")
        return self


# ---------------------------------------------------------------- parsing

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_PI_EXPR = re.compile(rf"^([+-]?)\s*(?:({_NUM})\s*\*?\s*)?pi(?:\s*/\s*({_NUM}))?$")
_INT_FIELDS = {"trials", "repetitions_per_trial", "seed", "sites", "steps"}
_FLOAT_FIELDS = {"g0", "delta", "flux", "v0"}


def _parse_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_EXPR.match(text)
    if not m:
        raise ValueError(f"not a number: {text!r}")
    sign, mult, div = m.groups()
    val = math.pi * (float(mult) if mult else 1.0) / (float(div) if div else 1.0)
    return -val if sign == "-" else val


def parse_config(text: str) -> ScenarioConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Numeric fields accept ``pi`` sugar (``pi``, ``-pi/2``, ``3*pi/4``).
    ``outputs`` is a comma-separated list.
    """
    known = {f.name for f in fields(ScenarioConfig)}
    values: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            col = len(line) - len(line.lstrip()) + 1
            raise ParseError(lineno, col, "expected 'key = value'")
        key_part, val_part = line.split("=", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        val_col = len(key_part) + 2 + (len(val_part) - len(val_part.lstrip()))
        value = val_part.strip()
        if not key:
            raise ParseError(lineno, key_col, "missing key")
        if key not in known:
            raise ConfigInvalid(key, f"unknown key on line {lineno}")
        if key in values:
            raise ParseError(lineno, key_col, f"duplicate key {key!r}")
        if not value:
            raise ParseError(lineno, val_col, f"missing value for {key!r}")
        try:
            if key in _INT_FIELDS:
                values[key] = int(value, 0)
            elif key in _FLOAT_FIELDS:
                values[key] = _parse_float(value)
            elif key == "outputs":
                values[key] = tuple(s.strip() for s in value.split(",") if s.strip())
            else:
                values[key] = value
        except ValueError as exc:
            raise ParseError(lineno, val_col, str(exc)) from None
    if "scenario" not in values:
        raise ConfigInvalid("scenario", "missing")
    return ScenarioConfig(**values).validate()


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_to_text(cfg: ScenarioConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name == "outputs":
            v = ",".join(v)
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- plans


@dataclass(frozen=True, eq=False)
class _Plan:
    pre: Ket  # system state at the coupling cut
    observables: Tuple[Tuple[str, LinOp], ...]
    reference: Ket  # undisturbed state; departures from it count as flips
    evolution: LinOp  # cut -> postselection
    post: Ket
    network: Optional[ifm.Network] = None


def _network(cfg: ScenarioConfig) -> ifm.Network:
    if cfg.scenario == "single_mzi":
        return ifm.build_single_mzi(cfg.flux)
    if cfg.scenario == "double_mzi":
        return ifm.build_double_mzi(cfg.flux)
    return ifm.build_double_well(cfg.v0)


def _arms_at(net: ifm.Network, cut: str) -> Tuple[str, str]:
    suffix = {"mid1": "1", "mid2": "2"}.get(cut, "")
    return (f"L{suffix}", f"R{suffix}")


def _plan(cfg: ScenarioConfig) -> _Plan:
    if cfg.scenario in ("single_mzi", "double_mzi"):
        net = _network(cfg)
        pre = ifm.forward_state(net, cfg.cut)
        obs = tuple((arm, ifm.arm_projector(net, arm)) for arm in _arms_at(net, cfg.cut))
        return _Plan(pre, obs, pre, ifm.transfer(net, cfg.cut, "out"), ifm.port_state(net, cfg.postselect), net)
    post = _QUBIT_STATES[cfg.postselect]
    if cfg.scenario == "double_well":
        net = _network(cfg)
        return _Plan(SX_PLUS, (("sigma_z", SIGMA_Z),), SX_PLUS, ifm.transfer(net, cfg.cut, "out"), post, net)
    return _Plan(SX_PLUS, (("sigma_z", SIGMA_Z),), SX_PLUS, kicked_qubit_evolution(cfg.v0), post)


def trial_rng(seed: int, trial_index: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for one trial: Philox(key=seed, counter=[0, 0, stream, trial])."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, stream, trial_index]))


def _simulate_block(cfg: ScenarioConfig, start: int, stop: int):
    plan = _plan(cfg)
    n = stop - start
    reps, k = cfg.repetitions_per_trial, len(plan.observables)
    m = reps * k
    uni = np.empty((n, 2 * m + 1))
    nrm = np.empty((n, m))
    for i, t in enumerate(range(start, stop)):
        rng = trial_rng(cfg.seed, t)
        uni[i] = rng.random(2 * m + 1)
        nrm[i] = rng.standard_normal(m)
    psi = np.tile(plan.pre.amps, (n, 1))
    ref = plan.reference.amps.conj()
    q = np.zeros((n, reps, k))
    flips = np.zeros(n, dtype=np.int64)
    for r in range(reps):
        for j, (_, op) in enumerate(plan.observables):
            col = r * k + j
            q0, psi = readout_batch(psi, op, cfg.g0, cfg.delta, uni[:, col], nrm[:, col])
            pflip = 1.0 - np.abs(psi @ ref) ** 2
            flips += uni[:, m + col] < pflip
            q[:, r, j] = q0
    amp = (psi @ plan.evolution.entries.T) @ plan.post.amps.conj()
    selected = uni[:, 2 * m] < np.abs(amp) ** 2
    return q, flips, selected


def _simulate(cfg: ScenarioConfig, workers: int = 1):
    blocks = [(s, min(s + BATCH, cfg.trials)) for s in range(0, cfg.trials, BATCH)]
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_block, [cfg] * len(blocks), *zip(*blocks)))
    else:
        parts = [_simulate_block(cfg, a, b) for a, b in blocks]
    return tuple(np.concatenate(p) for p in zip(*parts))


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    postselected: bool
    readouts: Tuple[Tuple[str, str, float], ...]  # (cut, observable, q0)
    flips: int


@dataclass
class RunReport:
    config: ScenarioConfig
    trials: int
    postselected: int
    postselection_rate: Optional[dict] = None
    pointer_means: Optional[dict] = None
    accumulated_shift: Optional[dict] = None
    flips: Optional[dict] = None
    analytic: Optional[dict] = None
    lattice: Optional[dict] = None
    network: Optional[dict] = None
    readings: Optional[np.ndarray] = field(default=None, repr=False)
    trial_flips: Optional[np.ndarray] = field(default=None, repr=False)
    selected: Optional[np.ndarray] = field(default=None, repr=False)
    observables: Tuple[str, ...] = ()

    def as_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg["outputs"] = list(self.config.outputs)
        out = {"config": cfg, "network": self.network, "trials": self.trials, "postselected": self.postselected}
        for name in OUTPUTS:
            if name in self.config.outputs:
                key = "postselection_rate" if name == "postselection" else name
                out[key] = getattr(self, key)
        if self.lattice is not None:
            out["lattice"] = self.lattice
        return out

    def to_json(self) -> str:
        return dump_json(self.as_dict()) + "\n"

    def trial_records(self):
        cut = self.config.cut
        for t in range(self.trials):
            reads = tuple(
                (cut, name, float(self.readings[t, r, j]))
                for r in range(self.readings.shape[1])
                for j, name in enumerate(self.observables)
            )
            yield TrialRecord(t, bool(self.selected[t]), reads, int(self.trial_flips[t]))

    def write_csv(self, path) -> None:
        reps = self.readings.shape[1] if self.readings is not None else 0
        header = ["trial_index", "postselected", "flips"] + [
            f"q0_{name}_{r}" for r in range(reps) for name in self.observables
        ]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for t in range(self.trials):
                row = [t, int(self.selected[t]), int(self.trial_flips[t])]
                row += [format(x, ".17g") for x in self.readings[t].ravel()]
                w.writerow(row)


def _num(x) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "null"
    return format(float(x), ".17g")


def dump_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{_json_str(str(k))}: {dump_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ", ".join(dump_json(v, indent, _level + 1) for v in obj) + "]"
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return "null" if obj is None else ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, complex):
        return dump_json([obj.real, obj.imag], indent, _level)
    return _json_str(str(obj))


def _json_str(s: str) -> str:
    import json

    return json.dumps(s)


def _estimate(value, stderr) -> dict:
    return {"value": float(value), "stderr": float(stderr) if np.isfinite(stderr) else None}


def _mean_se(x: np.ndarray) -> Tuple[float, float]:
    if x.size == 0:
        return float("nan"), float("nan")
    se = x.std(ddof=1) / np.sqrt(x.size) if x.size > 1 else float("nan")
    return float(x.mean()), float(se)


def _analytic(cfg: ScenarioConfig, plan: _Plan) -> dict:
    back = apply(plan.evolution.dagger, plan.post)
    tsv = TwoStateVector(plan.pre, back)
    ptr = GaussianPointer(cfg.delta)
    out = {"postselection_probability": postselect_probability(plan.pre, plan.evolution, plan.post)}
    wv, pred, exact = {}, {}, {}
    for name, op in plan.observables:
        try:
            w = weak_value(tsv, op)
        except OrthogonalSelection:
            wv[name] = pred[name] = exact[name] = None
            continue
        wv[name] = [w.real, w.imag]
        pred[name] = cfg.g0 * w.real
        try:
            exact[name] = conditional_pointer_mean(couple(plan.pre, op, cfg.g0, ptr), back)
        except OrthogonalSelection:
            exact[name] = None
    out["weak_values"] = wv
    out["predicted_means"] = pred
    out["exact_single_coupling_means"] = exact
    reps = cfg.repetitions_per_trial
    out["predicted_totals"] = {k: (None if v is None else reps * v) for k, v in pred.items()}
    out["flip_probability_first_readout"] = {
        name: expected_flip_probability(couple(plan.pre, op, cfg.g0, ptr), plan.reference)
        for name, op in plan.observables
    }
    out["flip_probability_sigma_z"] = flip_probability(cfg.g0, cfg.delta)
    out["no_flip_limit"] = math.exp(-(cfg.g0**2))
    out["no_flip_finite"] = (1 - cfg.g0**2 / reps) ** reps if reps > 0 else 1.0
    if cfg.scenario == "kicked_qubit":
        sx = heisenberg_evolved(SIGMA_X, plan.evolution).entries
        out["heisenberg_sigma_x"] = {
            "sigma_x": float(np.real(np.trace(sx @ SIGMA_X.entries)) / 2),
            "sigma_y": float(np.real(np.trace(sx @ SIGMA_Y.entries)) / 2),
        }
    return out


def _lattice_report(cfg: ScenarioConfig) -> RunReport:
    lat = CyclicLattice(cfg.sites)
    devs = []
    for t in range(cfg.trials):
        rng = trial_rng(cfg.seed, t)
        v = LatticePotential(rng.uniform(-1.0, 1.0, cfg.sites))
        devs.append(modular_commutator_check(lat, v, cfg.steps))
    worst = max(devs)
    lattice = {"sites": cfg.sites, "steps": cfg.steps, "potentials": cfg.trials,
               "max_deviation": worst, "bound": LATTICE_BOUND, "passed": worst <= LATTICE_BOUND}
    return RunReport(cfg, cfg.trials, cfg.trials, lattice=lattice)


def run_scenario(cfg: ScenarioConfig, workers: int = 1) -> RunReport:
    """Simulate ``cfg.trials`` pre/postselected runs and summarize them.

    Postselection is rejection sampling on the final Born probability.
    Conditional statistics use only the postselected trials.  The result
    is independent of ``workers``.
    """
    cfg = cfg.validate()
    if cfg.scenario == "lattice_check":
        return _lattice_report(cfg)
    plan = _plan(cfg)
    q, trial_flips, selected = _simulate(cfg, workers)
    n = cfg.trials
    n_sel = int(selected.sum())
    if n_sel == 0:
        raise ZeroPostselection(f"none of {n} trials passed postselection on {cfg.postselect!r}")
    reps = cfg.repetitions_per_trial
    names = tuple(name for name, _ in plan.observables)
    rate = n_sel / n
    report = RunReport(cfg, n, n_sel, readings=q, trial_flips=trial_flips, selected=selected, observables=names)
    report.network = ifm.network_to_dict(plan.network) if plan.network is not None else None
    report.postselection_rate = _estimate(rate, math.sqrt(rate * (1 - rate) / n))
    totals = q[selected].sum(axis=1)  # (n_sel, k)
    report.pointer_means, report.accumulated_shift = {}, {}
    for j, name in enumerate(names):
        mean, se = _mean_se(totals[:, j])
        if reps > 0:
            report.pointer_means[name] = {"cut": cfg.cut, **_estimate(mean / reps, se / reps)}
        else:
            report.pointer_means[name] = None
        report.accumulated_shift[name] = _estimate(mean, se)
    m = reps * len(names)
    if m > 0:
        frac = float(np.mean(trial_flips == 0))
        fmean, fse = _mean_se(trial_flips.astype(float))
        report.flips = {
            "rate_per_readout": _estimate(fmean / m, fse / m),
            "no_flip_fraction": _estimate(frac, math.sqrt(frac * (1 - frac) / n)),
            "total": int(trial_flips.sum()),
        }
    else:
        report.flips = {"rate_per_readout": None, "no_flip_fraction": _estimate(1.0, 0.0), "total": 0}
    report.analytic = _analytic(cfg, plan)
    return report


def accumulated_shift(cfg: ScenarioConfig, workers: int = 1) -> Dict[str, dict]:
    """Per-arm totals of the pointer readings, averaged over postselected trials.

    Each entry carries the Monte Carlo mean, its standard error and the
    weak-value prediction N * g0 * Re(weak value).
    """
    if cfg.scenario != "double_mzi":
        raise ConfigInvalid("scenario", "accumulated_shift needs the double_mzi scenario")
    rep = run_scenario(cfg, workers)
    pred = rep.analytic["predicted_totals"]
    return {arm: {**est, "predicted": pred[arm]} for arm, est in rep.accumulated_shift.items()}


# ---------------------------------------------------------------- survival


def survival_scaling(
    g0: float, n_values: Sequence[int], trials: int = 10000, seed: int = 0
) -> List[dict]:
    """No-flip survival over N weak sigma_z readouts with pointer width sqrt(N).

    Each step couples |sigma_x=+1> to a fresh pointer, samples the reading
    and tests the conditioned state projectively against |sigma_x=+1>; a
    passed test returns the system to |sigma_x=+1>, so the exact survival is
    the product of identical per-step no-flip probabilities.
    """
    if not (abs(g0) <= 1 and math.isfinite(g0)):
        raise ConfigInvalid("g0", "survival scaling needs |g0| <= 1")
    if trials < 1:
        raise ConfigInvalid("trials", "must be at least 1")
    ns = list(n_values)
    if not ns or any(n < 1 for n in ns) or ns != sorted(ns):
        raise ConfigInvalid("n", "N values must be positive and ascending")
    rows = []
    ref = SX_PLUS.amps.conj()
    for n in ns:
        delta = math.sqrt(n)
        survived = 0
        for start in range(0, trials, 1024):
            stop = min(start + 1024, trials)
            uni = np.empty((stop - start, n, 2))
            nrm = np.empty((stop - start, n))
            for i, t in enumerate(range(start, stop)):
                rng = trial_rng(seed, t, stream=n)
                uni[i] = rng.random((n, 2))
                nrm[i] = rng.standard_normal(n)
            alive = np.ones(stop - start, dtype=bool)
            psi0 = np.tile(SX_PLUS.amps, (stop - start, 1))
            for step in range(n):
                _, post = readout_batch(psi0, SIGMA_Z, g0, delta, uni[:, step, 0], nrm[:, step])
                pflip = 1.0 - np.abs(post @ ref) ** 2
                alive &= uni[:, step, 1] >= pflip
            survived += int(alive.sum())
        frac = survived / trials
        analytic = (1.0 - flip_probability(g0, delta)) ** n
        rows.append({
            "N": n,
            "delta": delta,
            "no_flip_fraction": frac,
            "stderr": math.sqrt(frac * (1 - frac) / trials),
            "analytic": analytic,
            "finite_n_form": (1 - g0**2 / n) ** n,
            "limit_reference": math.exp(-(g0**2)),
        })
    return rows

"""Path-basis interferometer networks.

Every network here carries two spatial modes; mode 0 is the left arm/port
and mode 1 the right one.  Arm labels are stage-specific names for those
modes:

    ==========  ======  ===================================
    label       mode    meaning
    ==========  ======  ===================================
    L, R        0, 1    input and output ports
    L1, R1      0, 1    arms of the first MZI (double MZI)
    L2, R2      0, 1    arms of the second MZI (double MZI)
    ==========  ======  ===================================

Beam splitter convention: (1/sqrt 2) [[1, i], [i, 1]] on its two arms.
Phase and flux elements multiply one arm by exp(i value).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from .errors import OrderViolation, UnknownArm, UnknownCut
from .hilbert import Ket, LinOp, apply, basis_ket
from .tsvf import TwoStateVector, make_tsv, weak_value

BEAMSPLITTER = np.array([[1, 1j], [1j, 1]]) / np.sqrt(2)
KINDS = ("beamsplitter", "phase", "flux")


@dataclass(frozen=True)
class Element:
    kind: str
    arms: Tuple[str, ...]
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}")
        n = 2 if self.kind == "beamsplitter" else 1
        if len(self.arms) != n:
            raise ValueError(f"{self.kind} takes {n} arm label(s), got {self.arms}")


@dataclass(frozen=True, eq=False)
class Network:
    """Ordered element list; ``cuts`` maps a name to an element position.

    A cut at position k sits after the first k elements.  Cuts ``in`` and
    ``out`` always exist.
    """

    modes: int
    arms: Dict[str, int]
    elements: Tuple[Element, ...]
    cuts: Dict[str, int] = field(default_factory=dict)
    input_port: str = "L"

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        cuts = {"in": 0, **self.cuts, "out": len(self.elements)}
        object.__setattr__(self, "cuts", cuts)
        object.__setattr__(self, "arms", dict(self.arms))
        for label, mode in self.arms.items():
            if not 0 <= mode < self.modes:
                raise ValueError(f"arm {label!r} points at missing mode {mode}")
        for el in self.elements:
            for a in el.arms:
                if a not in self.arms:
                    raise UnknownArm(a)
            if el.kind == "beamsplitter" and self.arms[el.arms[0]] == self.arms[el.arms[1]]:
                raise ValueError("a beam splitter needs two distinct modes")
        for name, pos in cuts.items():
            if not 0 <= pos <= len(self.elements):
                raise ValueError(f"cut {name!r} at {pos} is outside the element list")
        if self.input_port not in self.arms:
            raise UnknownArm(self.input_port)

    def mode(self, arm: str) -> int:
        try:
            return self.arms[arm]
        except KeyError:
            raise UnknownArm(arm) from None

    def element_matrix(self, el: Element) -> np.ndarray:
        m = np.eye(self.modes, dtype=complex)
        if el.kind == "beamsplitter":
            i, j = (self.mode(a) for a in el.arms)
            m[np.ix_([i, j], [i, j])] = BEAMSPLITTER
        else:
            k = self.mode(el.arms[0])
            m[k, k] = np.exp(1j * el.value)
        return m


def transfer(net: Network, from_cut: str = "in", to_cut: str = "out") -> LinOp:
    """Propagator between two cuts (identity for an empty segment)."""
    for c in (from_cut, to_cut):
        if c not in net.cuts:
            raise UnknownCut(c)
    i, j = net.cuts[from_cut], net.cuts[to_cut]
    if i > j:
        raise OrderViolation(f"cut {from_cut!r} lies after {to_cut!r}")
    m = np.eye(net.modes, dtype=complex)
    for el in net.elements[i:j]:
        m = net.element_matrix(el) @ m
    return LinOp(m)


def port_state(net: Network, port: str) -> Ket:
    return basis_ket(net.modes, net.mode(port))


def input_state(net: Network) -> Ket:
    return port_state(net, net.input_port)


def forward_state(net: Network, cut: str) -> Ket:
    return apply(transfer(net, "in", cut), input_state(net))


def two_state_at(net: Network, cut: str, post_port: str) -> TwoStateVector:
    return make_tsv(input_state(net), transfer(net, "in", cut), port_state(net, post_port), transfer(net, cut, "out"))


def output_probabilities(net: Network) -> np.ndarray:
    return np.abs(forward_state(net, "out").amps) ** 2


def arm_projector(net: Network, arm: str) -> LinOp:
    k = net.mode(arm)
    m = np.zeros((net.modes, net.modes), dtype=complex)
    m[k, k] = 1.0
    return LinOp(m)


def build_single_mzi(flux: float = 0.0, phase: float = 0.0) -> Network:
    """Balanced MZI: BS, internal phase on R, flux on L, BS.

    With zero phase and flux the input port L exits entirely at port R
    (the bright port).
    """
    return Network(
        modes=2,
        arms={"L": 0, "R": 1},
        elements=(
            Element("beamsplitter", ("L", "R")),
            Element("phase", ("R",), phase),
            Element("flux", ("L",), flux),
            Element("beamsplitter", ("L", "R")),
        ),
        cuts={"mid": 1},
    )


def mzi1_tuning_phase() -> float:
    """Phase on arm R1 that sends the whole forward wave into arm R2.

    After BS_a the arm amplitudes are (a, b); a phase e^{i phi} on R1 gives
    an L2 amplitude proportional to a + i b e^{i phi}, which vanishes for
    e^{i phi} = i a / b.
    """
    a, b = BEAMSPLITTER[:, 0]
    return float(np.angle(1j * a / b))


MZI1_PHASE = mzi1_tuning_phase()


def build_double_mzi(flux: float) -> Network:
    """Two MZIs in series; the flux element sits on arm L2 of the second."""
    return Network(
        modes=2,
        arms={"L": 0, "R": 1, "L1": 0, "R1": 1, "L2": 0, "R2": 1},
        elements=(
            Element("beamsplitter", ("L", "R")),
            Element("phase", ("R1",), MZI1_PHASE),
            Element("beamsplitter", ("L1", "R1")),
            Element("flux", ("L2",), flux),
            Element("beamsplitter", ("L2", "R2")),
        ),
        cuts={"mid1": 2, "mid2": 3},
    )


def build_double_well(v0: float = 0.0) -> Network:
    """Two cavities L, R with an impulsive potential felt only in L.

    The kick exp(-i v0 (1 - sigma_z)/2) is a phase -v0 on the left arm; the
    cut ``kick`` sits just before it.
    """
    return Network(
        modes=2,
        arms={"L": 0, "R": 1},
        elements=(Element("phase", ("L",), -v0),),
        cuts={"kick": 0},
    )


def mzi1_weak_trajectory(flux: float, post_port: str = "R") -> Tuple[complex, complex]:
    """Weak values of the L1 and R1 projectors at cut ``mid1``."""
    net = build_double_mzi(flux)
    tsv = two_state_at(net, "mid1", post_port)
    return weak_value(tsv, arm_projector(net, "L1")), weak_value(tsv, arm_projector(net, "R1"))


def network_to_dict(net: Network) -> dict:
    return {
        "modes": net.modes,
        "arms": dict(net.arms),
        "elements": [{"kind": e.kind, "arms": list(e.arms), "value": e.value} for e in net.elements],
        "cuts": dict(net.cuts),
        "input_port": net.input_port,
    }


def network_from_dict(d: dict) -> Network:
    cuts = {k: v for k, v in d.get("cuts", {}).items() if k not in ("in", "out")}
    return Network(
        modes=int(d["modes"]),
        arms={k: int(v) for k, v in d["arms"].items()},
        elements=tuple(Element(e["kind"], tuple(e["arms"]), float(e.get("value", 0.0))) for e in d["elements"]),
        cuts=cuts,
        input_port=d.get("input_port", "L"),
    )

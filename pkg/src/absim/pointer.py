"""Gaussian von Neumann pointers coupled to a finite-dimensional system.

The coupling exp(i g0 A (x) P) translates the pointer wavepacket of each
eigenspace of A by ``+lambda * g0`` (translation convention
exp(iPl)|x> = |x + l>), so a coupled state stays a finite sum of shifted
Gaussians and every integral below is a closed-form Gaussian integral.

Pointer wavefunction: Phi(q) = (2 pi Delta^2)^{-1/4} exp(-(q - c)^2 / 4 Delta^2),
whose density is N(c, Delta^2).  Two such packets centred at ``a`` and ``b``
overlap by exp(-(a - b)^2 / 8 Delta^2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import (
    DimMismatch,
    NonHermitian,
    NonPositiveDelta,
    OrthogonalSelection,
    OutOfRegime,
)
from .hilbert import (
    SX_MINUS,
    SX_PLUS,
    Ket,
    LinOp,
    equal_up_to_phase,
    inner,
    make_ket,
)
from .tsvf import EPS_OVERLAP

_DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class GaussianPointer:
    delta: float
    center: float = 0.0

    def __post_init__(self):
        if not self.delta > 0:
            raise NonPositiveDelta(f"pointer width must be positive, got {self.delta}")

    def wavefunction(self, q):
        q = np.asarray(q, dtype=float)
        return (2 * np.pi * self.delta**2) ** -0.25 * np.exp(-((q - self.center) ** 2) / (4 * self.delta**2))


@dataclass(frozen=True, eq=False)
class Branch:
    ket: Ket
    coeff: complex
    shift: float  # absolute centre of this branch's pointer packet


@dataclass(frozen=True, eq=False)
class PointerCoupledState:
    """sum_b coeff_b |branch_b> (x) Phi(q - shift_b), with shared width ``delta``."""

    delta: float
    branches: Tuple[Branch, ...]

    @property
    def shifts(self) -> np.ndarray:
        return np.array([b.shift for b in self.branches])

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([b.coeff for b in self.branches], dtype=complex)

    def gram(self) -> np.ndarray:
        return gaussian_overlap(self.shifts[:, None], self.shifts[None, :], self.delta)

    def pointer_mean(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2 * self.shifts))

    def marginal_density(self, q):
        """Density of a pointer reading: a Gaussian mixture."""
        q = np.asarray(q, dtype=float)[..., None]
        w = np.abs(self.coeffs) ** 2
        g = np.exp(-((q - self.shifts) ** 2) / (2 * self.delta**2)) / np.sqrt(2 * np.pi * self.delta**2)
        return np.sum(w * g, axis=-1)

    def reduced_density_matrix(self) -> np.ndarray:
        kets = np.array([b.ket.amps for b in self.branches]).T  # (dim, nb)
        c = self.coeffs
        m = np.outer(c, c.conj()) * self.gram()
        return kets @ m @ kets.conj().T

    def system_amplitudes(self, q0: float) -> np.ndarray:
        """Unnormalized system vector conditioned on reading ``q0``."""
        kets = np.array([b.ket.amps for b in self.branches]).T
        w = self.coeffs * posterior_weights(q0, self.shifts, self.delta)
        return kets @ w

    def projected_amplitudes(self, post: Ket) -> np.ndarray:
        """<post|branch_b> coeff_b for every branch."""
        return np.array([inner(post, b.ket) * b.coeff for b in self.branches], dtype=complex)


@dataclass(frozen=True, eq=False)
class FirstOrderState:
    """|+> (x) Phi(q - c) + coeff |-> (x) (q - c) Phi(q - c), unnormalized."""

    delta: float
    center: float
    plus: Ket
    minus: Ket
    coeff: float


@dataclass(frozen=True, eq=False)
class ReadoutRecord:
    q0: float
    post_system: Ket
    flipped: bool
    flip_probability: float  # 1 - |<reference|post_system>|^2


def gaussian_overlap(a, b, delta):
    """<Phi(. - b)|Phi(. - a)> for normalized width-``delta`` packets."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.exp(-((a - b) ** 2) / (8 * delta**2))


def posterior_weights(q0, shifts, delta):
    """Relative branch amplitudes Phi(q0 - shift) after reading ``q0``.

    Scaled so the largest weight is 1; only ratios matter once the
    conditioned state is renormalized.
    """
    e = -((np.asarray(q0)[..., None] - shifts) ** 2) / (4 * delta**2)
    return np.exp(e - e.max(axis=-1, keepdims=True))


def _eigenspaces(op: LinOp):
    w, v = np.linalg.eigh(0.5 * (op.entries + op.entries.conj().T))
    groups = []
    for i, lam in enumerate(w):
        if groups and abs(lam - groups[-1][0]) <= _DEGENERACY_TOL:
            groups[-1][1].append(i)
        else:
            groups.append((lam, [i]))
    return [(float(np.mean(w[idx])), v[:, idx]) for lam, idx in groups]


def couple(system: Ket, meas_op: LinOp, g0: float, ptr: GaussianPointer) -> PointerCoupledState:
    """Exact state after the impulsive coupling exp(i g0 A (x) P).

    Each eigenspace of ``meas_op`` with eigenvalue ``lam`` becomes a branch
    whose pointer packet is centred at ``ptr.center + lam * g0``.  The
    coupling strength is not required to be weak.
    """
    if not meas_op.hermitian:
        raise NonHermitian("the measured observable must be hermitian")
    if meas_op.dim != system.dim:
        raise DimMismatch(f"operator dim {meas_op.dim} vs state dim {system.dim}")
    psi = make_ket(system.amps).amps
    branches = []
    for lam, vecs in _eigenspaces(meas_op):
        proj = vecs @ (vecs.conj().T @ psi)
        weight = np.linalg.norm(proj)
        if weight <= 1e-15:
            continue
        branches.append(Branch(Ket(proj / weight), complex(weight), ptr.center + lam * g0))
    return PointerCoupledState(ptr.delta, tuple(branches))


def first_order_state(system: Ket, g0: float, ptr: GaussianPointer) -> FirstOrderState:
    """Leading-order expansion of a sigma_z coupling applied to |sigma_x=+1>."""
    if not equal_up_to_phase(system, SX_PLUS):
        raise ValueError("the first-order expansion is taken around |sigma_x=+1>")
    if abs(g0) / ptr.delta >= 1:
        raise OutOfRegime(f"g0/delta = {abs(g0) / ptr.delta:g} is not small")
    return FirstOrderState(ptr.delta, ptr.center, SX_PLUS, SX_MINUS, -g0 / (2 * ptr.delta**2))


def fidelity(exact: PointerCoupledState, approx: FirstOrderState) -> float:
    """|<approx|exact>|^2 with both states normalized on system (x) pointer."""
    d, c = approx.delta, approx.center
    if not np.isclose(d, exact.delta, rtol=0, atol=1e-15):
        raise ValueError("pointer widths differ")
    norm0 = np.sqrt(2 * np.pi) * d  # int Phi_unnorm^2 dq
    amp = 0j
    for b in exact.branches:
        ov = norm0 * gaussian_overlap(c, b.shift, d)
        first = ((c + b.shift) / 2 - c) * ov
        amp += b.coeff * (inner(approx.plus, b.ket) * ov + approx.coeff * inner(approx.minus, b.ket) * first)
    amp /= np.sqrt(norm0)
    approx_norm2 = norm0 * (1 + approx.coeff**2 * d**2)
    return float(abs(amp) ** 2 / approx_norm2)


def conditioned_state(st: PointerCoupledState, q0: float) -> Ket:
    """Normalized system state after the pointer reads ``q0``."""
    return make_ket(st.system_amplitudes(q0))


def readout(st: PointerCoupledState, rng: np.random.Generator, reference: Ket = SX_PLUS) -> ReadoutRecord:
    """Sample a pointer reading and the back-acted system state.

    The reading is drawn exactly from the Gaussian mixture (branch by
    |coeff|^2, then a normal draw).  ``flipped`` is the outcome of a
    projective test of the conditioned state against ``reference``: it is
    True with probability 1 - |<reference|post_system>|^2.
    Draw order per call: branch uniform, normal, flip uniform.
    """
    probs = np.abs(st.coeffs) ** 2
    k = int(np.searchsorted(np.cumsum(probs) / probs.sum(), rng.random(), side="right"))
    k = min(k, len(st.branches) - 1)
    q0 = st.branches[k].shift + st.delta * rng.standard_normal()
    post = conditioned_state(st, q0)
    pflip = float(np.clip(1.0 - abs(inner(reference, post)) ** 2, 0.0, 1.0))
    return ReadoutRecord(float(q0), post, bool(rng.random() < pflip), pflip)


def readout_batch(psi, meas_op: LinOp, g0, delta, u_branch, z, center=0.0):
    """Vectorized couple-then-readout for a stack of system states.

    ``psi`` has shape (n, dim), one unit state per row; ``u_branch`` and
    ``z`` are (n,) uniform and standard-normal draws.  Returns the readings
    and the normalized conditioned states.  Works in the eigenvector basis
    of ``meas_op``, which is exact for degenerate spectra as well.
    """
    lam, vecs = np.linalg.eigh(0.5 * (meas_op.entries + meas_op.entries.conj().T))
    shifts = center + lam * g0
    c = psi @ vecs.conj()  # row-wise vecs^dagger psi
    p = np.abs(c) ** 2
    cum = np.cumsum(p, axis=1)
    k = np.sum(cum < (u_branch * cum[:, -1])[:, None], axis=1)
    k = np.minimum(k, lam.size - 1)
    q0 = shifts[k] + delta * z
    c = c * posterior_weights(q0, shifts, delta)
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    return q0, c @ vecs.T


def expected_flip_probability(st: PointerCoupledState, reference: Ket = SX_PLUS) -> float:
    """Average over readings of 1 - |<reference|post(q0)>|^2."""
    a = st.projected_amplitudes(reference)
    keep = float(np.real(a @ st.gram() @ a.conj()))
    return float(np.clip(1.0 - keep, 0.0, 1.0))


def flip_probability(g0: float, delta: float) -> float:
    """Exact flip probability for |sigma_x=+1> read through a sigma_z pointer.

    Closed form (1 - exp(-g0^2 / 2 Delta^2)) / 2, i.e. about g0^2 / 4 Delta^2
    for a weak coupling.
    """
    if not delta > 0:
        raise NonPositiveDelta(f"pointer width must be positive, got {delta}")
    return float(-np.expm1(-(g0**2) / (2 * delta**2)) / 2)


def postselection_probability(st: PointerCoupledState, post: Ket) -> float:
    """Probability that the system passes a projection onto ``post``."""
    a = st.projected_amplitudes(post)
    return float(np.real(a @ st.gram() @ a.conj()))


def conditional_pointer_mean(st: PointerCoupledState, post: Ket) -> float:
    """E[q0 | system found in ``post``], cross terms between branches included."""
    a = st.projected_amplitudes(post)
    s = st.shifts
    m = np.outer(a, a.conj()) * st.gram()
    z = float(np.real(m.sum()))
    if z <= EPS_OVERLAP**2:
        raise OrthogonalSelection(f"postselection probability {z:.3e} is zero")
    mid = 0.5 * (s[:, None] + s[None, :])
    return float(np.real(np.sum(m * mid)) / z)

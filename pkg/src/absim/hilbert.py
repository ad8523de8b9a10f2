"""Finite-dimensional pure states and dense operators.

Basis convention for the two-level system: index 0 is |L> = |sigma_z=-1>,
index 1 is |R> = |sigma_z=+1>.  In that basis ``SIGMA_Z = diag(-1, +1)``,
``SIGMA_X`` is the usual swap and ``SIGMA_Y = i SIGMA_X SIGMA_Z``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
import scipy.linalg

from .errors import DimMismatch, ZeroVector

ATOL = 1e-12


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Ket:
    """A state vector.  Not normalized unless built with :func:`make_ket`."""

    amps: np.ndarray

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amps))
        if amps.size == 0:
            raise ValueError("a Ket needs at least one amplitude")
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "Ket":
        return make_ket(self.amps)

    def __repr__(self):
        return f"Ket({np.array2string(self.amps, precision=6)})"


@dataclass(frozen=True, eq=False)
class LinOp:
    """Dense square matrix; ``hermitian``/``unitary`` are checked at 1e-12."""

    entries: np.ndarray
    hermitian: bool = field(init=False)
    unitary: bool = field(init=False)

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError(f"LinOp needs a non-empty square matrix, got shape {m.shape}")
        object.__setattr__(self, "entries", m)
        herm = bool(np.max(np.abs(m - m.conj().T)) <= ATOL)
        unit = bool(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))) <= ATOL)
        object.__setattr__(self, "hermitian", herm)
        object.__setattr__(self, "unitary", unit)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def dagger(self) -> "LinOp":
        return LinOp(self.entries.conj().T)

    def __matmul__(self, other):
        if isinstance(other, LinOp):
            _check_dims(self.dim, other.dim)
            return LinOp(self.entries @ other.entries)
        if isinstance(other, Ket):
            return apply(self, other)
        return NotImplemented

    def __add__(self, other: "LinOp") -> "LinOp":
        _check_dims(self.dim, other.dim)
        return LinOp(self.entries + other.entries)

    def __sub__(self, other: "LinOp") -> "LinOp":
        _check_dims(self.dim, other.dim)
        return LinOp(self.entries - other.entries)

    def __mul__(self, scalar) -> "LinOp":
        return LinOp(complex(scalar) * self.entries)

    __rmul__ = __mul__

    def __repr__(self):
        return f"LinOp(dim={self.dim}, hermitian={self.hermitian}, unitary={self.unitary})"


def _check_dims(a: int, b: int):
    if a != b:
        raise DimMismatch(f"dimension {a} does not match {b}")


def make_ket(amps: Sequence[complex]) -> Ket:
    """Normalize ``amps`` to a unit Ket.

    Raises ZeroVector when every amplitude is zero.
    """
    v = np.asarray(amps, dtype=complex).ravel()
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ZeroVector("cannot normalize the zero vector")
    return Ket(v / n)


def apply(op: LinOp, s: Ket) -> Ket:
    """Matrix-vector product.  The result is *not* renormalized."""
    _check_dims(op.dim, s.dim)
    return Ket(op.entries @ s.amps)


def inner(a: Ket, b: Ket) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    _check_dims(a.dim, b.dim)
    return complex(np.vdot(a.amps, b.amps))


def expectation(op: LinOp, s: Ket) -> complex:
    return inner(s, apply(op, s))


def tensor(a: Union[Ket, LinOp], b: Union[Ket, LinOp]):
    """Kronecker product, first factor outermost (system, then pointer)."""
    if isinstance(a, Ket) and isinstance(b, Ket):
        return Ket(np.kron(a.amps, b.amps))
    if isinstance(a, LinOp) and isinstance(b, LinOp):
        return LinOp(np.kron(a.entries, b.entries))
    raise TypeError("tensor needs two Kets or two LinOps")


def matrix_exponential(op: LinOp, scale: complex = 1.0) -> LinOp:
    """exp(scale * op).

    Hermitian ``op`` with purely imaginary ``scale`` goes through an
    eigendecomposition so the result is unitary to rounding; everything else
    uses scaling-and-squaring Pade (scipy).
    """
    scale = complex(scale)
    if op.hermitian and scale.real == 0.0:
        w, v = np.linalg.eigh(0.5 * (op.entries + op.entries.conj().T))
        return LinOp((v * np.exp(scale * w)) @ v.conj().T)
    return LinOp(scipy.linalg.expm(scale * op.entries))


def identity(dim: int) -> LinOp:
    return LinOp(np.eye(dim))


def projector(s: Ket) -> LinOp:
    """|s><s| for the normalized version of ``s``."""
    u = make_ket(s.amps).amps
    return LinOp(np.outer(u, u.conj()))


def basis_ket(dim: int, index: int) -> Ket:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return Ket(v)


def equal_up_to_phase(a: Ket, b: Ket, tol: float = ATOL) -> bool:
    return abs(inner(make_ket(a.amps), make_ket(b.amps))) >= 1.0 - tol


def commutator(a: LinOp, b: LinOp) -> LinOp:
    _check_dims(a.dim, b.dim)
    return LinOp(a.entries @ b.entries - b.entries @ a.entries)


def qubit_state(theta: float, phi: float) -> Ket:
    """cos(theta/2)|L> + e^{i phi} sin(theta/2)|R>."""
    return Ket([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


IDENTITY2 = identity(2)
SIGMA_X = LinOp([[0, 1], [1, 0]])
SIGMA_Z = LinOp([[-1, 0], [0, 1]])
SIGMA_Y = LinOp(1j * SIGMA_X.entries @ SIGMA_Z.entries)

KET_L = Ket([1, 0])  # |sigma_z = -1>
KET_R = Ket([0, 1])  # |sigma_z = +1>
SZ_MINUS = KET_L
SZ_PLUS = KET_R
SX_PLUS = make_ket([1, 1])
# phase chosen so that SIGMA_Z @ SX_PLUS == -SX_MINUS
SX_MINUS = make_ket([1, -1])

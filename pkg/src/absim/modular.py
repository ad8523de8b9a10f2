"""Modular variables: translations on a cyclic lattice and the kicked qubit.

Convention: exp(iP l)|x> = |x + l>.  The momentum generator is assembled
from plane waves <x|p> = exp(-i p x)/sqrt(d), p_k = 2 pi k / (d a), which
makes exp(iP l) an exact cyclic shift when l is a multiple of the spacing.
In this convention exp(iP l) V(X) = V(X - l) exp(iP l).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, StepsOutOfRange
from .hilbert import IDENTITY2, SIGMA_Z, LinOp, commutator, matrix_exponential


@dataclass(frozen=True)
class CyclicLattice:
    d: int
    spacing: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("a lattice needs at least one site")
        if not (self.spacing > 0 and self.mass > 0):
            raise ValueError("spacing and mass must be positive")

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.d) * self.spacing

    @property
    def length(self) -> float:
        return self.d * self.spacing


@dataclass(frozen=True, eq=False)
class LatticePotential:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise ValueError("potential values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def operator(self) -> LinOp:
        return LinOp(np.diag(self.values))

    def displaced(self, steps: int) -> "LatticePotential":
        """The function x -> V(x + steps * spacing)."""
        return LatticePotential(np.roll(self.values, -steps))


def momentum_values(lat: CyclicLattice) -> np.ndarray:
    d = lat.d
    k = np.arange(-(d // 2), d - d // 2)
    return 2 * np.pi * k / lat.length


def momentum_op(lat: CyclicLattice) -> LinOp:
    x = lat.positions
    p = momentum_values(lat)
    waves = np.exp(-1j * np.outer(x, p)) / np.sqrt(lat.d)  # columns are |p_k>
    return LinOp((waves * p) @ waves.conj().T)


def hamiltonian(lat: CyclicLattice, v: LatticePotential) -> LinOp:
    """H = P^2 / 2m + V(X)."""
    if v.values.size != lat.d:
        raise DimMismatch(f"potential has {v.values.size} sites, lattice has {lat.d}")
    p = momentum_op(lat).entries
    return LinOp(p @ p / (2 * lat.mass) + np.diag(v.values))


def translation_op(lat: CyclicLattice, steps: int) -> LinOp:
    """exp(iP l) with l = steps * spacing: site j -> site (j + steps) mod d."""
    if abs(steps) >= lat.d and not (lat.d == 1 and steps == 0):
        raise StepsOutOfRange(f"|steps| = {abs(steps)} must be below d = {lat.d}")
    return LinOp(np.roll(np.eye(lat.d), steps, axis=0))


def heisenberg_derivative(a: LinOp, h: LinOp) -> LinOp:
    """-i [A, H]."""
    if a.dim != h.dim:
        raise DimMismatch(f"dims {a.dim} and {h.dim} differ")
    return -1j * commutator(a, h)


def modular_commutator_check(lat: CyclicLattice, v: LatticePotential, steps: int) -> float:
    """Max-norm gap between -i[T, H] and -i[V(X - l) - V(X)] T, T = exp(iP l).

    The kinetic term commutes with T exactly on the cyclic lattice, so the
    gap is pure rounding.
    """
    t = translation_op(lat, steps)
    h = hamiltonian(lat, v)
    lhs = heisenberg_derivative(t, h).entries
    dv = v.displaced(-steps).values - v.values
    rhs = -1j * (dv[:, None] * t.entries)
    return float(np.max(np.abs(lhs - rhs)))


def kicked_qubit_evolution(v0: float) -> LinOp:
    """exp(-i v0 (1 - sigma_z) / 2): a delta kick felt only in the left well."""
    return matrix_exponential(IDENTITY2 - SIGMA_Z, -0.5j * v0)


def heisenberg_evolved(op: LinOp, u: LinOp) -> LinOp:
    """U^dagger A U."""
    return u.dagger @ op @ u

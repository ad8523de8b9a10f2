"""Two-state vectors, weak values and postselection probabilities."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NonUnitary, OrthogonalSelection
from .hilbert import Ket, LinOp, apply, inner

EPS_OVERLAP = 1e-10


@dataclass(frozen=True, eq=False)
class TwoStateVector:
    """Forward-evolved ``pre`` and backward-evolved ``post`` at one cut time."""

    pre: Ket
    post: Ket

    def __post_init__(self):
        if self.pre.dim != self.post.dim:
            raise DimMismatch(f"pre has dim {self.pre.dim}, post has dim {self.post.dim}")

    @property
    def dim(self) -> int:
        return self.pre.dim

    @property
    def overlap(self) -> complex:
        return inner(self.post, self.pre)


def make_tsv(pre0: Ket, forward: LinOp, post1: Ket, backward: LinOp) -> TwoStateVector:
    """Evolve ``pre0`` forward and ``post1`` backward to the common cut.

    ``forward`` maps the preparation time to the cut, ``backward`` maps the
    cut to the postselection time; the postselected state is propagated
    with its adjoint.
    """
    for name, op in (("forward", forward), ("backward", backward)):
        if not op.unitary:
            raise NonUnitary(f"{name} evolution is not unitary")
    return TwoStateVector(apply(forward, pre0), apply(backward.dagger, post1))


def weak_value(tsv: TwoStateVector, a: LinOp) -> complex:
    """<post|A|pre> / <post|pre>."""
    if a.dim != tsv.dim:
        raise DimMismatch(f"operator dim {a.dim} vs state dim {tsv.dim}")
    ov = tsv.overlap
    if abs(ov) <= EPS_OVERLAP:
        raise OrthogonalSelection(f"|<post|pre>| = {abs(ov):.3e} is below {EPS_OVERLAP:g}")
    return inner(tsv.post, apply(a, tsv.pre)) / ov


def postselect_probability(pre: Ket, u: LinOp, post: Ket) -> float:
    """Born probability |<post|U|pre>|^2 for unit ``pre`` and ``post``."""
    if not (pre.dim == u.dim == post.dim):
        raise DimMismatch(f"dims pre={pre.dim}, U={u.dim}, post={post.dim}")
    if not u.unitary:
        raise NonUnitary("evolution is not unitary")
    p = abs(inner(post, apply(u, pre))) ** 2
    return float(np.clip(p, 0.0, 1.0))

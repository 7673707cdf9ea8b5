"""Dense operator container and tensor-product helpers."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

# electronic index 0 -> |theta>, 1 -> |eps>
ELECTRONIC_LABELS = ("theta", "eps")


@dataclass(frozen=True)
class OperatorMatrix:
    """A dense square matrix together with the basis it acts on.

    ``kind`` is one of ``"mode"`` (one Morse or Fock mode), ``"two_mode"``
    (|n1, n2>, n1 slowest) or ``"vibronic"`` (electronic x n1 x n2, electronic
    index slowest). ``dims`` holds the factor dimensions.
    """

    data: np.ndarray
    kind: str
    dims: tuple[int, ...]

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[0] != self.data.shape[1]:
            raise ValueError("operator matrix must be square")
        if int(np.prod(self.dims)) != self.data.shape[0]:
            raise ValueError(f"dims {self.dims} do not match shape {self.data.shape}")

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def hermiticity_error(self) -> float:
        """Max-abs deviation of the matrix from its conjugate transpose."""
        if self.dim == 0:
            return 0.0
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def labels(self) -> list[tuple]:
        ranges = [range(d) for d in self.dims]
        if self.kind == "vibronic":
            return [(ELECTRONIC_LABELS[e], n1, n2)
                    for e, n1, n2 in itertools.product(*ranges)]
        return list(itertools.product(*ranges))


def kron(*factors: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1))
    for f in factors:
        out = np.kron(out, f)
    return out


def on_mode(op: np.ndarray, mode: int) -> np.ndarray:
    """Embed a single-mode operator into the two-mode product space."""
    eye = np.eye(op.shape[0])
    if mode == 1:
        return np.kron(op, eye)
    if mode == 2:
        return np.kron(eye, op)
    raise ValueError("mode must be 1 or 2")


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a

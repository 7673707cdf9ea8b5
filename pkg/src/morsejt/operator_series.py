"""Truncated operator series for d/dy, 1/y and the coordinate x.

Matrices are assembled from the ladder matrices with the e^{+-i xi}
bookkeeping of :mod:`su11_algebra`: e^{+i xi} a+ and e^{-i xi} a- keep the
xi-label of the state they act on, so every power of (2 a0) standing to
their left evaluates to (2 s_n)^m for the *source* state n.  In matrix form
that is a right multiplication by diag((2 s_n)^m), i.e. a column scaling.

Fixed summation order: inner m-sums per column first (index ascending),
then the shift products, then the outer powers as left-to-right matrix
products.  Nothing here substitutes the quadrature oracle when a series
diverges; divergence is reported.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInput
from .morse_core import MorseParams, x_matrix
from .operators import OperatorMatrix
from .su11_algebra import phased_ladder_matrices


@dataclass(frozen=True)
class SeriesTruncation:
    """Truncation of the inner m-sums (0..M_inner) and outer l-sum (1..L_outer)."""

    M_inner: int
    L_outer: int = 1
    resum: bool = False

    def __post_init__(self):
        if self.M_inner < 0:
            raise ValueError("M_inner must be >= 0")
        if self.L_outer < 1:
            raise ValueError("L_outer must be >= 1")


def sigma_spectrum(p: MorseParams, dim: int | None = None) -> np.ndarray:
    """Eigenvalues 2 s_n = nu - 1 - 2n of 2 a0 on the active subspace."""
    dim = p.size if dim is None else dim
    return p.nu - 1.0 - 2.0 * np.arange(dim)


def radius_ok(p: MorseParams, dim: int | None = None) -> bool:
    """True iff the spectral radius of 2 a0 on the active subspace is below 1."""
    return bool(np.all(np.abs(sigma_spectrum(p, dim)) < 1.0))


@dataclass
class SeriesResult:
    matrix: OperatorMatrix
    term_norms: list[float]
    radius_ok: bool
    resummed: np.ndarray  # per-column flag
    partial_sums: list[np.ndarray] = field(default_factory=list)


def _geometric_columns(sigma, M, kind, resum):
    """Inner sums over m = 0..M of the column factors, optionally closed-form.

    kind: 'pow_m1'     sum sigma^(m-1)
          'alt_pow_m1' sum (-1)^m sigma^(m-1)
          'odd_m1'     sum (1 - (-1)^m) sigma^(m-1)
          'pow'        sum sigma^m
          'alt_pow'    sum (-1)^m sigma^m
          'even'       sum (1 + (-1)^m) sigma^m
          'pow2'       sum sigma^(2m)
    """
    out = np.zeros_like(sigma)
    flags = np.zeros(sigma.shape, dtype=bool)
    for j, sg in enumerate(sigma):
        if resum and abs(sg) < 1.0:
            closed = {
                "pow_m1": 1.0 / (sg * (1.0 - sg)),
                "alt_pow_m1": 1.0 / (sg * (1.0 + sg)),
                "odd_m1": 2.0 / (1.0 - sg * sg),
                "pow": 1.0 / (1.0 - sg),
                "alt_pow": 1.0 / (1.0 + sg),
                "even": 2.0 / (1.0 - sg * sg),
                "pow2": 1.0 / (1.0 - sg * sg),
            }[kind]
            out[j] = closed
            flags[j] = True
            continue
        acc = 0.0
        for m in range(M + 1):
            sign = -1.0 if m % 2 else 1.0
            if kind == "pow_m1":
                acc += sg ** (m - 1)
            elif kind == "alt_pow_m1":
                acc += sign * sg ** (m - 1)
            elif kind == "odd_m1":
                acc += (1.0 - sign) * sg ** (m - 1)
            elif kind == "pow":
                acc += sg ** m
            elif kind == "alt_pow":
                acc += sign * sg ** m
            elif kind == "even":
                acc += (1.0 + sign) * sg ** m
            elif kind == "pow2":
                acc += sg ** (2 * m)
        out[j] = acc
    return out, flags


def _ladders(p: MorseParams, dim: int):
    if p.size < 2 or dim < 2:
        z = np.zeros((dim, dim))
        return z, z
    lad = phased_ladder_matrices(p, dim)
    return lad.Aplus, lad.Aminus


def series_operator(p: MorseParams, target: str, t: SeriesTruncation,
                    dim: int | None = None) -> SeriesResult:
    """Truncated series for ``target`` in {'inverse_y', 'd_dy'}.

    1/y  = -sum_m (2a0)^(m-1) {e^{i xi} a+ + (-1)^m e^{-i xi} a- + nu/2 [1 - (-1)^m]}
    d/dy = -1/2 sum_m (2a0)^m {e^{i xi} a+ - (-1)^m e^{-i xi} a- + nu/2 [1 + (-1)^m]}
    """
    dim = p.size if dim is None else dim
    sigma = sigma_spectrum(p, dim)
    ap, am = _ladders(p, dim)
    eye = np.eye(dim)
    nu = p.nu
    term_norms = []
    partials = []
    acc = np.zeros((dim, dim))
    with np.errstate(over="ignore", invalid="ignore"):
        for m in range(t.M_inner + 1):
            sign = -1.0 if m % 2 else 1.0
            if target == "inverse_y":
                brace = ap + sign * am + 0.5 * nu * (1.0 - sign) * eye
                term = -brace * sigma ** (m - 1)
            elif target == "d_dy":
                brace = ap - sign * am + 0.5 * nu * (1.0 + sign) * eye
                term = -0.5 * brace * sigma ** m
            else:
                raise ValueError(f"unknown series target {target!r}")
            acc = acc + term
            term_norms.append(float(np.linalg.norm(term)))
            partials.append(acc.copy())
        resummed = np.zeros(dim, dtype=bool)
        if t.resum:
            if target == "inverse_y":
                c_plus, resummed = _geometric_columns(sigma, t.M_inner, "pow_m1", True)
                c_minus, _ = _geometric_columns(sigma, t.M_inner, "alt_pow_m1", True)
                c_diag, _ = _geometric_columns(sigma, t.M_inner, "odd_m1", True)
                closed = -(ap * c_plus + am * c_minus + 0.5 * nu * eye * c_diag)
            else:
                c_plus, resummed = _geometric_columns(sigma, t.M_inner, "pow", True)
                c_minus, _ = _geometric_columns(sigma, t.M_inner, "alt_pow", True)
                c_diag, _ = _geometric_columns(sigma, t.M_inner, "even", True)
                closed = -0.5 * (ap * c_plus - am * c_minus + 0.5 * nu * eye * c_diag)
            acc = np.where(resummed[None, :], closed, acc)
    return SeriesResult(matrix=OperatorMatrix(acc, "mode", (dim,)), term_norms=term_norms,
                        radius_ok=radius_ok(p, dim), resummed=resummed, partial_sums=partials)


def bracket_matrix(p: MorseParams, t: SeriesTruncation, dim: int | None = None,
                   include_shift: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """The bracket 1 + nu sum (2a0)^(2m) + sum (2a0)^(m-1)[e^{i xi}a+ + (-1)^m e^{-i xi}a-].

    Returns (matrix, resummed column flags).  ``include_shift=False`` drops
    the last (ladder) term, leaving the diagonal part only.
    """
    dim = p.size if dim is None else dim
    sigma = sigma_spectrum(p, dim)
    ap, am = _ladders(p, dim)
    with np.errstate(over="ignore", invalid="ignore"):
        even, flags = _geometric_columns(sigma, t.M_inner, "pow2", t.resum)
        mat = np.diag(1.0 + p.nu * even)
        if include_shift:
            c_plus, _ = _geometric_columns(sigma, t.M_inner, "pow_m1", t.resum)
            c_minus, _ = _geometric_columns(sigma, t.M_inner, "alt_pow_m1", t.resum)
            mat = mat + ap * c_plus + am * c_minus
    return mat, flags


def log_series(bracket: np.ndarray, L: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """sum_{l=1}^{L} bracket^l / l with left-to-right products; also partials."""
    dim = bracket.shape[0]
    power = np.eye(dim)
    acc = np.zeros_like(bracket)
    partials = []
    with np.errstate(over="ignore", invalid="ignore"):
        for l in range(1, L + 1):
            power = power @ bracket
            acc = acc + power / l
            partials.append(acc.copy())
    return acc, partials


def series_x(p: MorseParams, t: SeriesTruncation, dim: int | None = None,
             include_shift: bool = True) -> SeriesResult:
    """x = (1/alpha) {ln nu - sum_l (1/l) [bracket]^l}, truncated."""
    dim = p.size if dim is None else dim
    bracket, flags = bracket_matrix(p, t, dim, include_shift)
    total, partials = log_series(bracket, t.L_outer)
    eye = np.eye(dim)
    with np.errstate(over="ignore", invalid="ignore"):
        mats = [(math.log(p.nu) * eye - s) / p.alpha for s in partials]
    norms = [float(np.linalg.norm(partials[0]))]
    norms += [float(np.linalg.norm(b - a)) for a, b in zip(partials[:-1], partials[1:])]
    return SeriesResult(matrix=OperatorMatrix(mats[-1], "mode", (dim,)), term_norms=norms,
                        radius_ok=radius_ok(p, dim), resummed=flags, partial_sums=mats)


def scalar_log_series(y, terms: int):
    """sum_{n=1}^{terms} (1 - 1/y)^n / n, which tends to ln y for y > 1/2."""
    y = np.asarray(y, dtype=float)
    u = 1.0 - 1.0 / y
    acc = np.zeros_like(u)
    power = np.ones_like(u)
    for n in range(1, terms + 1):
        power = power * u
        acc = acc + power / n
    return acc


def classify(errors: list[float], rtol: float = 1e-12) -> str:
    """'converging', 'diverging' or 'oscillating' for a sequence of errors."""
    e = np.asarray(errors, dtype=float)
    if len(e) < 2:
        return "converging" if np.all(np.isfinite(e)) else "diverging"
    if not np.all(np.isfinite(e)):
        return "diverging"
    diffs = np.diff(e)
    scale = rtol * np.maximum(np.abs(e[:-1]), 1.0)
    if np.all(diffs <= scale):
        return "converging"
    if np.all(diffs >= -scale):
        return "diverging"
    return "diverging" if e[-1] > e[0] else "oscillating"


@dataclass(frozen=True)
class ConvergenceRow:
    M_inner: int
    L_outer: int
    frobenius_error: float
    classification: str


def convergence_report(p: MorseParams, truncations: list[SeriesTruncation],
                       dim: int | None = None) -> list[ConvergenceRow]:
    """Frobenius distance of :func:`series_x` from the quadrature x-matrix."""
    if not truncations:
        raise EmptyInput("convergence_report needs at least one truncation")
    dim = p.size if dim is None else dim
    oracle = x_matrix(p, dim).data
    errors = []
    for t in truncations:
        approx = series_x(p, t, dim).matrix.data
        with np.errstate(over="ignore", invalid="ignore"):
            err = float(np.linalg.norm(approx - oracle))
        errors.append(err if np.isfinite(err) else math.inf)
    label = classify(errors)
    return [ConvergenceRow(t.M_inner, t.L_outer, e, label) for t, e in zip(truncations, errors)]


def report_to_csv(rows: list[ConvergenceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["M_inner", "L_outer", "frobenius_error", "classification"])
    for r in rows:
        w.writerow([r.M_inner, r.L_outer, format(r.frobenius_error, ".17g"), r.classification])
    return buf.getvalue()

"""One-dimensional Morse bound states in the variable y = nu * exp(-alpha x).

All inner products are taken in L^2(R, dx); in y-space the measure is
dy / (alpha y).  Every bound-state integrand has the form
y^a exp(-y) * polynomial(y), so overlaps are integrated exactly by a
generalized Gauss rule for the Gamma(a + 1) density.  Normalization
constants are carried as logarithms because y^s and Gamma(nu) overflow
long before nu ~ 800.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .errors import IndexOutOfBasis, NoBoundStates, NonPositiveArgument, NonPositiveInput
from .operators import OperatorMatrix

# s_n below this (relative to nu) is treated as the non-normalizable threshold state
THRESHOLD_TOL = 1e-12
MIN_ORDER = 48


@dataclass(frozen=True)
class MorseParams:
    """Physical Morse inputs and the derived dimensionless quantities."""

    m: float
    V0: float
    alpha: float
    hbar: float = 1.0
    nu: float = field(init=False)
    Omega: float = field(init=False)
    omega_harm: float = field(init=False)
    N_floor: int = field(init=False)
    N_eff: int = field(init=False)

    def __post_init__(self):
        for name in ("m", "V0", "alpha", "hbar"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise NonPositiveInput(f"{name} must be strictly positive, got {val!r}")
        nu = math.sqrt(8.0 * self.m * self.V0 / (self.alpha ** 2 * self.hbar ** 2))
        if nu <= 1.0:
            raise NoBoundStates(f"nu = {nu:.6g} <= 1: the well holds no bound state")
        half = (nu - 1.0) / 2.0
        n_floor = math.floor(half)
        n_eff = n_floor
        if half - n_floor <= THRESHOLD_TOL * nu:
            n_eff = n_floor - 1
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "Omega", 4.0 * self.V0 / (nu ** 2 * self.hbar))
        object.__setattr__(self, "omega_harm", self.alpha * math.sqrt(2.0 * self.V0 / self.m))
        object.__setattr__(self, "N_floor", n_floor)
        object.__setattr__(self, "N_eff", n_eff)

    @property
    def hbar_Omega(self) -> float:
        return self.hbar * self.Omega

    @property
    def size(self) -> int:
        """Number of normalizable bound states, N_eff + 1."""
        return self.N_eff + 1

    @property
    def x_scale(self) -> float:
        """Harmonic length sqrt(hbar / (2 m omega_harm))."""
        return math.sqrt(self.hbar / (2.0 * self.m * self.omega_harm))

    def s(self, n):
        return (self.nu - 1.0) / 2.0 - n

    @classmethod
    def from_reduced(cls, nu: float, hbar_Omega: float, alpha: float = 1.0,
                     hbar: float = 1.0) -> "MorseParams":
        """Build parameters from (nu, hbar*Omega) at fixed alpha and hbar."""
        if not (nu > 0 and hbar_Omega > 0 and alpha > 0 and hbar > 0):
            raise NonPositiveInput("nu, hbar_Omega, alpha and hbar must be positive")
        V0 = hbar_Omega * nu ** 2 / 4.0
        m = nu ** 2 * alpha ** 2 * hbar ** 2 / (8.0 * V0)
        return cls(m=m, V0=V0, alpha=alpha, hbar=hbar)


def derive_params(m: float, V0: float, alpha: float, hbar: float = 1.0) -> MorseParams:
    return MorseParams(m=m, V0=V0, alpha=alpha, hbar=hbar)


def _check_index(p: MorseParams, n: int) -> None:
    if not (0 <= n <= p.N_eff) or int(n) != n:
        raise IndexOutOfBasis(f"state index {n} outside bound basis 0..{p.N_eff}")


def energy_level(p: MorseParams, n: int) -> float:
    _check_index(p, n)
    return -p.hbar_Omega * p.s(n) ** 2


def levels(p: MorseParams) -> np.ndarray:
    return -p.hbar_Omega * p.s(np.arange(p.size)) ** 2


# ---------------------------------------------------------------- quadrature


@dataclass(frozen=True)
class QuadratureGrid:
    """Gauss rule for the normalized density y^a e^{-y} / Gamma(a+1).

    ``weights`` sum to one; multiply by ``exp(log_mass)`` = Gamma(a+1) to
    recover the unnormalized weight y^a e^{-y}.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    exponent: float

    @property
    def log_mass(self) -> float:
        return float(gammaln(self.exponent + 1.0))

    def expect(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


@lru_cache(maxsize=512)
def gauss_rule(exponent: float, order: int) -> QuadratureGrid:
    """Gauss rule for the generalized Laguerre weight y^a e^{-y}, a > -1.

    Nodes are the Jacobi-matrix eigenvalues; weights come from
    1 / sum_k p_k(node)^2 over the orthonormal polynomials, which keeps full
    relative accuracy for the tiny weights far out in the tail (the
    eigenvector formula does not).
    """
    if exponent <= -1.0:
        raise ValueError(f"weight exponent {exponent} must exceed -1")
    k = np.arange(order, dtype=float)
    diag = 2.0 * k + exponent + 1.0
    off = np.sqrt(k[1:] * (k[1:] + exponent))
    nodes = eigh_tridiagonal(diag, off, eigvals_only=True)
    p_prev = np.zeros_like(nodes)
    p_cur = np.ones_like(nodes)
    total = np.ones_like(nodes)
    # per-node rescaling keeps the recurrence finite far out in the tail
    log_scale = np.zeros_like(nodes)
    for j in range(order - 1):
        p_next = ((nodes - diag[j]) * p_cur - (off[j - 1] if j else 0.0) * p_prev) / off[j]
        p_prev, p_cur = p_cur, p_next
        total += p_cur * p_cur
        big = total > 1e200
        if np.any(big):
            p_prev[big] *= 1e-100
            p_cur[big] *= 1e-100
            total[big] *= 1e-200
            log_scale[big] += 200.0 * math.log(10.0)
    weights = np.exp(-np.log(total) - log_scale)
    weights = weights / weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureGrid(nodes=nodes, weights=weights, order=order, exponent=exponent)


def default_order(dim: int) -> int:
    return max(4 * dim, MIN_ORDER)


def confluent_f(n: int, b: float, y) -> np.ndarray:
    """Terminating 1F1(-n; b; y) via the generalized-Laguerre recurrence.

    Uses 1F1(-n; b; y) = L_n^{(b-1)}(y) / binom(n + b - 1, n).
    """
    y = np.asarray(y, dtype=float)
    if n == 0:
        return np.ones_like(y)
    a = b - 1.0
    prev = np.ones_like(y)
    cur = 1.0 + a - y
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + a - y) * cur - (k + a) * prev) / (k + 1)
    log_binom = gammaln(n + a + 1.0) - gammaln(n + 1.0) - gammaln(a + 1.0)
    return cur * math.exp(-log_binom)


def confluent_f_series(n: int, b: float, y) -> np.ndarray:
    """Direct finite-sum evaluation of 1F1(-n; b; y); reference for small n."""
    y = np.asarray(y, dtype=float)
    term = np.ones_like(y)
    total = np.ones_like(y)
    for k in range(n):
        term = term * (-(n - k)) * y / ((b + k) * (k + 1))
        total = total + term
    return total


def confluent_f_derivative(n: int, b: float, y) -> np.ndarray:
    """d/dy 1F1(-n; b; y) = (-n / b) 1F1(-n+1; b+1; y)."""
    y = np.asarray(y, dtype=float)
    if n == 0:
        return np.zeros_like(y)
    return (-n / b) * confluent_f(n - 1, b + 1.0, y)


# ---------------------------------------------------------------- states


@dataclass(frozen=True)
class MorseState:
    """Bound state n with both normalization constants, stored as logs."""

    n: int
    s: float
    log_c_closed: float
    log_c_numeric: float

    @property
    def c_closed(self) -> float:
        return math.exp(self.log_c_closed)

    @property
    def c_numeric(self) -> float:
        return math.exp(self.log_c_numeric)

    @property
    def closed_ratio(self) -> float:
        """c_closed / c_numeric."""
        return math.exp(self.log_c_closed - self.log_c_numeric)


def log_c_closed(p: MorseParams, n: int) -> float:
    # 1/Gamma(nu - 2n) * sqrt(Gamma(nu - n) / n!)
    return (-gammaln(p.nu - 2 * n)
            + 0.5 * (gammaln(p.nu - n) - gammaln(n + 1.0)))


@lru_cache(maxsize=4096)
def _log_c_numeric(nu: float, alpha: float, n: int, order: int) -> float:
    s = (nu - 1.0) / 2.0 - n
    rule = gauss_rule(2.0 * s - 1.0, order)
    f = confluent_f(n, 2.0 * s + 1.0, rule.nodes)
    norm = rule.expect(f * f)
    # 1 = c^2 / alpha * Gamma(2s) * E[F^2]
    return -0.5 * (rule.log_mass - math.log(alpha) + math.log(norm))


def morse_state(p: MorseParams, n: int, order: int | None = None) -> MorseState:
    _check_index(p, n)
    order = order or default_order(n + 1)
    return MorseState(n=n, s=p.s(n), log_c_closed=log_c_closed(p, n),
                      log_c_numeric=_log_c_numeric(p.nu, p.alpha, n, order))


def eval_eigenfunction(p: MorseParams, n: int, y, normalization: str = "numeric"):
    """psi_n(y) = c y^s e^{-y/2} F(-n, 2s+1, y).

    ``normalization`` selects c_numeric (unit norm under dy/(alpha y)) or the
    closed-form c_closed.
    """
    st = morse_state(p, n)
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr <= 0):
        raise NonPositiveArgument("eigenfunctions are defined for y > 0 only")
    log_c = st.log_c_numeric if normalization == "numeric" else st.log_c_closed
    f = confluent_f(n, 2.0 * st.s + 1.0, y_arr)
    out = np.exp(log_c + st.s * np.log(y_arr) - 0.5 * y_arr) * f
    return out if out.ndim else float(out)


def eval_eigenfunction_x(p: MorseParams, n: int, x, normalization: str = "numeric"):
    """psi_n as a function of the displacement x."""
    y = p.nu * np.exp(-p.alpha * np.asarray(x, dtype=float))
    return eval_eigenfunction(p, n, y, normalization)


def y_of_x(p: MorseParams, x):
    return p.nu * np.exp(-p.alpha * np.asarray(x, dtype=float))


def x_of_y(p: MorseParams, y):
    return (math.log(p.nu) - np.log(np.asarray(y, dtype=float))) / p.alpha


# ---------------------------------------------------------------- matrix elements


def _pair_prefactor(p: MorseParams, n: int, n2: int, shift: float, order: int):
    """Gauss rule and log-prefactor for <n| y^shift g(y) |n2>.

    Returns (rule, log_pref) such that the element equals
    exp(log_pref) * E_rule[F_n F_n2 g]; rule is None if the integral diverges.
    """
    sn, sm = p.s(n), p.s(n2)
    a = sn + sm - 1.0 + shift
    if a <= -1.0:
        return None, math.inf
    rule = gauss_rule(a, order)
    log_pref = (_log_c_numeric(p.nu, p.alpha, n, order)
                + _log_c_numeric(p.nu, p.alpha, n2, order)
                - math.log(p.alpha) + rule.log_mass)
    return rule, log_pref


def _polynomial_parts(p: MorseParams, n: int, n2: int, y):
    return (confluent_f(n, 2.0 * p.s(n) + 1.0, y),
            confluent_f(n2, 2.0 * p.s(n2) + 1.0, y))


def overlap(p: MorseParams, n: int, n2: int, order: int | None = None) -> float:
    """<n|n2> under dy/(alpha y); exact up to rounding for the Gauss rule."""
    _check_index(p, n)
    _check_index(p, n2)
    order = order or default_order(max(n, n2) + 1)
    rule, log_pref = _pair_prefactor(p, n, n2, 0.0, order)
    fn, fm = _polynomial_parts(p, n, n2, rule.nodes)
    return math.exp(log_pref) * rule.expect(fn * fm)


def overlap_matrix(p: MorseParams, dim: int | None = None) -> np.ndarray:
    dim = p.size if dim is None else dim
    _check_dim(p, dim)
    order = default_order(dim)
    g = np.empty((dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            g[i, j] = g[j, i] = overlap(p, i, j, order)
    return g


def _check_dim(p: MorseParams, dim: int) -> None:
    if not (1 <= dim <= p.size):
        raise IndexOutOfBasis(f"dimension {dim} outside 1..{p.size}")


def log_grid(exponent: float, degree: int) -> tuple[np.ndarray, float]:
    """Uniform grid in t = ln y for integrals of y^a e^{-y} poly(y) g(y) dy.

    In t the integrand exp((a+1) t - e^t) poly(e^t) g(e^t) is analytic and
    decays exponentially on both sides, so the trapezoid rule converges
    geometrically in the step.  Returns (t_nodes, step).
    """
    c = exponent + 1.0
    t_peak = math.log(c + degree)
    step = min(0.1, 0.6 / math.sqrt(c + degree))
    t_lo = math.log(c) - 1.0 - 60.0 / c
    t_hi = math.log(c + degree + 60.0 + 15.0 * math.sqrt(c + degree))
    t_lo = min(t_lo, t_peak - 2.0)
    count = int(math.ceil((t_hi - t_lo) / step)) + 1
    return t_lo + step * np.arange(count), step


def weighted_log_integral(p: MorseParams, n: int, n2: int, g) -> float:
    """<n| g(y) |n2> for smooth non-polynomial g, by the t = ln y trapezoid."""
    sn, sm = p.s(n), p.s(n2)
    a = sn + sm - 1.0
    order = default_order(max(n, n2) + 1)
    t, step = log_grid(a, n + n2)
    y = np.exp(t)
    log_pref = (_log_c_numeric(p.nu, p.alpha, n, order)
                + _log_c_numeric(p.nu, p.alpha, n2, order) - math.log(p.alpha))
    fn, fm = _polynomial_parts(p, n, n2, y)
    # y^a e^{-y} dy = exp((a+1) t - e^t) dt
    vals = np.exp(log_pref + (a + 1.0) * t - y) * fn * fm * g(y)
    return float(step * math.fsum(vals))


def log_y_element(p: MorseParams, n: int, n2: int) -> float:
    """<n| ln y |n2>."""
    return weighted_log_integral(p, n, n2, np.log)


def x_matrix(p: MorseParams, dim: int | None = None) -> OperatorMatrix:
    """Exact <n|x|n2> with x = (ln nu - ln y) / alpha, symmetric by construction."""
    dim = p.size if dim is None else dim
    _check_dim(p, dim)
    order = default_order(dim)
    gram = overlap_matrix(p, dim)
    logs = np.empty((dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            logs[i, j] = logs[j, i] = log_y_element(p, i, j)
    x = (math.log(p.nu) * gram - logs) / p.alpha
    return OperatorMatrix(x, "mode", (dim,))


def inverse_y_matrix(p: MorseParams, dim: int | None = None) -> OperatorMatrix:
    """<n|1/y|n2>; entries whose integral diverges (s_n + s_n2 <= 1) are inf."""
    dim = p.size if dim is None else dim
    _check_dim(p, dim)
    order = default_order(dim)
    out = np.empty((dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            rule, log_pref = _pair_prefactor(p, i, j, -1.0, order)
            if rule is None:
                out[i, j] = out[j, i] = math.inf
                continue
            fn, fm = _polynomial_parts(p, i, j, rule.nodes)
            out[i, j] = out[j, i] = math.exp(log_pref) * rule.expect(fn * fm)
    return OperatorMatrix(out, "mode", (dim,))


def d_dy_matrix(p: MorseParams, dim: int | None = None) -> OperatorMatrix:
    """<n| d/dy |n2> under dy/(alpha y); diverging entries are inf."""
    dim = p.size if dim is None else dim
    _check_dim(p, dim)
    order = default_order(dim)
    out = np.empty((dim, dim))
    for i in range(dim):
        for j in range(dim):
            rule, log_pref = _pair_prefactor(p, i, j, -1.0, order)
            if rule is None:
                out[i, j] = math.inf
                continue
            y = rule.nodes
            sj = p.s(j)
            b = 2.0 * sj + 1.0
            fi = confluent_f(i, 2.0 * p.s(i) + 1.0, y)
            # y * d/dy [y^s e^{-y/2} F] / (y^s e^{-y/2}) = (s - y/2) F + y F'
            dj = (sj - 0.5 * y) * confluent_f(j, b, y) + y * confluent_f_derivative(j, b, y)
            out[i, j] = math.exp(log_pref) * rule.expect(fi * dj)
    return OperatorMatrix(out, "mode", (dim,))


def sign_changes(values: np.ndarray, rel_floor: float = 1e-10) -> int:
    """Count sign changes, ignoring samples below a relative magnitude floor."""
    v = np.asarray(values, dtype=float)
    keep = np.abs(v) > rel_floor * np.max(np.abs(v))
    signs = np.sign(v[keep])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def node_count(p: MorseParams, n: int, samples: int = 20001) -> int:
    """Nodes of psi_n on (0, inf), counted on a dense log-spaced y grid."""
    y = np.geomspace(1e-8, 40.0 * p.nu + 200.0, samples)
    return sign_changes(eval_eigenfunction(p, n, y))

"""Electronic doublet, Jahn-Teller couplings, anharmonic coherent states and
first-order perturbation energies.

Basis ordering throughout: electronic index (theta, eps) slowest, then n1,
then n2.  H_e is taken as zero, so the unperturbed Hamiltonian is
I_2 (x) H_v.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (BasisTooSmall, DegenerateBlockUnresolved, IndexOutOfBasis,
                     MissingTruncation, NotAnEigenstate, NphiTooSmall)
from .morse_core import MorseParams, x_matrix
from .operator_series import SeriesTruncation, bracket_matrix, log_series, series_x
from .operators import OperatorMatrix, kron
from .su11_algebra import phased_ladder_matrices, vibrational_hamiltonian

DEGENERACY_TOL = 1e-9  # in units of hbar*Omega
FORMS = ("harmonic_eq3", "morse_eq8", "morse_eq9_series", "morse_structural")

D_THETA = np.diag([-1.0, 1.0])
D_EPS = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class ElectronicDoublet:
    """D_theta, D_eps and the electronic operator standing in for (mu+ mu)^(E)."""

    Melec: np.ndarray = field(default_factory=lambda: D_THETA.copy())

    def __post_init__(self):
        m = np.asarray(self.Melec)
        if m.shape != (2, 2):
            raise ValueError("Melec must be 2x2")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("Melec must be Hermitian")

    @property
    def Dtheta(self) -> np.ndarray:
        return D_THETA

    @property
    def Deps(self) -> np.ndarray:
        return D_EPS

    @classmethod
    def named(cls, name: str) -> "ElectronicDoublet":
        table = {"Dtheta": D_THETA, "Deps": D_EPS, "identity": np.eye(2)}
        if name not in table:
            raise ValueError(f"unknown Melec {name!r}; choose from {sorted(table)}")
        return cls(table[name].copy())


@dataclass(frozen=True)
class BranchState:
    branch: str
    phi: float
    coeffs: np.ndarray


def branch_vectors(phi):
    """(|l>, |u>) coefficient arrays over (theta, eps); vectorized in phi."""
    c, s = np.cos(np.asarray(phi) / 2.0), np.sin(np.asarray(phi) / 2.0)
    lower = np.stack([c, -s], axis=-1)
    upper = np.stack([s, c], axis=-1)
    return lower, upper


def branch_states(phi: float) -> tuple[BranchState, BranchState]:
    lower, upper = branch_vectors(float(phi))
    return BranchState("l", float(phi), lower), BranchState("u", float(phi), upper)


def branch_expectation(e: ElectronicDoublet, beta: str, phi: float = 0.0) -> float:
    """<beta|Melec|beta> at angle phi."""
    lower, upper = branch_vectors(phi)
    vec = lower if beta == "l" else upper
    return float(np.real(vec.conj() @ e.Melec @ vec))


# ---------------------------------------------------------------- H_JT


def _basis_dim(p: MorseParams, dim: int | None) -> int:
    dim = p.size if dim is None else int(dim)
    if not 1 <= dim <= p.size:
        raise IndexOutOfBasis(f"dimension {dim} outside 1..{p.size}")
    return dim


def harmonic_ladder(dim: int) -> np.ndarray:
    """Fock annihilation operator a on dim states."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def harmonic_h0(p: MorseParams, dim: int) -> OperatorMatrix:
    """I_2 (x) hbar*omega_harm (n1 + n2 + 1) on the same product basis."""
    n = np.arange(dim, dtype=float)
    diag = p.hbar * p.omega_harm * (n[:, None] + n[None, :] + 1.0).ravel()
    return OperatorMatrix(np.kron(np.eye(2), np.diag(diag)), "vibronic", (2, dim, dim))


def morse_h0(p: MorseParams, dim: int | None = None) -> OperatorMatrix:
    dim = _basis_dim(p, dim)
    hv = vibrational_hamiltonian(p, dim).data
    return OperatorMatrix(np.kron(np.eye(2), hv), "vibronic", (2, dim, dim))


def unperturbed_hamiltonian(p: MorseParams, form: str, dim: int | None = None) -> OperatorMatrix:
    """H_e + H_v matching a coupling form (harmonic oscillator for harmonic_eq3)."""
    dim = _basis_dim(p, dim)
    if form == "harmonic_eq3":
        return harmonic_h0(p, dim)
    return morse_h0(p, dim)


def build_hjt(p: MorseParams, kappa: float, form: str, e: ElectronicDoublet | None = None,
              t: SeriesTruncation | None = None, dim: int | None = None) -> OperatorMatrix:
    """Jahn-Teller coupling on the electronic (x) n1 (x) n2 basis.

    harmonic_eq3      K [D_theta (x) (a+a^dag) (x) 1 + D_eps (x) 1 (x) (a+a^dag)], K = kappa hbar Omega
    morse_eq8         kappa hbar Omega Melec (x) (x1 + x2), x from quadrature
    morse_eq9_series  kappa hbar Omega Melec (x) (S1 + S2), S the truncated series for x
    morse_structural  (kappa hbar Omega / x_scale) [D_theta (x) x1 + D_eps (x) x2]
    """
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    e = e or ElectronicDoublet()
    dim = _basis_dim(p, dim)
    strength = kappa * p.hbar_Omega
    eye = np.eye(dim)
    if form == "harmonic_eq3":
        if dim < 2:
            raise BasisTooSmall("harmonic coupling needs at least two states per mode")
        a = harmonic_ladder(dim)
        q = a + a.T
        h = strength * (kron(D_THETA, q, eye) + kron(D_EPS, eye, q))
    elif form in ("morse_eq8", "morse_structural"):
        x = x_matrix(p, dim).data
        if form == "morse_eq8":
            h = strength * np.kron(e.Melec, np.kron(x, eye) + np.kron(eye, x))
        else:
            h = strength / p.x_scale * (kron(D_THETA, x, eye) + kron(D_EPS, eye, x))
    elif form == "morse_eq9_series":
        if t is None:
            raise MissingTruncation("form morse_eq9_series needs a SeriesTruncation")
        sx = series_x(p, t, dim).matrix.data
        with np.errstate(over="ignore", invalid="ignore"):
            h = strength * np.kron(e.Melec, np.kron(sx, eye) + np.kron(eye, sx))
    else:
        raise ValueError(f"unknown coupling form {form!r}; choose from {FORMS}")
    return OperatorMatrix(h, "vibronic", (2, dim, dim))


def last_term_deviation(p: MorseParams, truncations: list[SeriesTruncation],
                        dim: int | None = None) -> list[dict]:
    """Diagonal contribution of the ladder (last) term of the bracket series.

    For each truncation reports the max diagonal entry of the linear ladder
    term itself and the max change of the diagonal of sum_l (1/l) T^l when
    that term is included versus dropped.
    """
    dim = _basis_dim(p, dim)
    rows = []
    for t in truncations:
        full, _ = bracket_matrix(p, t, dim, include_shift=True)
        diag_only, _ = bracket_matrix(p, t, dim, include_shift=False)
        linear = full - diag_only
        s_full, _ = log_series(full, t.L_outer)
        s_diag, _ = log_series(diag_only, t.L_outer)
        with np.errstate(over="ignore", invalid="ignore"):
            dev = np.abs(np.diag(s_full) - np.diag(s_diag))
            rel = dev / np.maximum(np.abs(np.diag(s_diag)), 1e-300)
        rows.append({
            "M_inner": t.M_inner, "L_outer": t.L_outer,
            "linear_term_diagonal": float(np.max(np.abs(np.diag(linear)))),
            "series_diagonal_deviation": float(np.max(dev)),
            "relative_deviation": float(np.max(rel)),
        })
    return rows


# ---------------------------------------------------------------- coherent states


@dataclass(frozen=True)
class CoherentSpec:
    beta: str = "l"
    n: int = 0
    z: float = 0.0
    kappa: float = 0.0
    Nphi: int = 64

    def __post_init__(self):
        if self.beta not in ("l", "u"):
            raise ValueError("beta must be 'l' or 'u'")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.n < 0:
            raise IndexOutOfBasis("n must be >= 0")
        if self.Nphi < 8 or self.Nphi % 2:
            raise NphiTooSmall(f"Nphi must be even and >= 8, got {self.Nphi}")
        if 2 * self.z != round(2 * self.z):
            raise ValueError("z must be an integer or half-integer")


@dataclass
class VibronicState:
    coeffs: np.ndarray
    dims: tuple[int, int, int]
    meta: CoherentSpec | None = None
    norm_factor: float = 1.0
    info: dict = field(default_factory=dict)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def normalized(self) -> "VibronicState":
        nrm = self.norm
        if nrm == 0.0:
            raise ValueError("cannot normalize a zero state")
        return replace(self, coeffs=self.coeffs / nrm, norm_factor=self.norm_factor * nrm)

    def labels(self) -> list[tuple]:
        n = int(np.prod(self.dims))
        return OperatorMatrix(np.zeros((n, n)), "vibronic", self.dims).labels()

    def to_json(self) -> dict:
        return {
            "labels": [list(lab) for lab in self.labels()],
            "real": [float(v) for v in self.coeffs.real],
            "imag": [float(v) for v in self.coeffs.imag],
            "norm_factor": self.norm_factor,
        }


def phi_rule(Nphi: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on [0, 4 pi) and weights integrating over [0, 2 pi).

    The integrand e^{i z phi} |beta(phi)> (a+(phi))^p is a trigonometric
    polynomial in phi/2.  Sampling at phi_j = 4 pi j / N resolves its
    half-frequency Fourier coefficients c_k exactly for |k| < N/2, and
    int_0^{2pi} e^{i k phi/2} dphi equals 2 pi (k=0), 0 (k even) or 4i/k
    (k odd).  Folding these into the DFT gives real weights.
    """
    if Nphi < 8 or Nphi % 2:
        raise NphiTooSmall(f"Nphi must be even and >= 8, got {Nphi}")
    j = np.arange(Nphi)
    nodes = 4.0 * math.pi * j / Nphi
    weights = np.full(Nphi, 2.0 * math.pi)
    for k in range(1, Nphi // 2, 2):
        weights += 8.0 * np.sin(k * nodes / 2.0) / k
    return nodes, weights / Nphi


def phi_bandwidth(p_max: int, z: float) -> int:
    """Largest |k| in the half-frequency expansion of the integrand."""
    return 2 * p_max + 1 + int(round(2 * abs(z)))


def _raise_two_mode(ap: np.ndarray, phi: float):
    """v -> (cos(phi) a+ (x) 1 + sin(phi) 1 (x) a+) v without forming the Kronecker product."""
    dim = ap.shape[0]
    c, s = math.cos(phi), math.sin(phi)

    def apply(v):
        m = v.reshape(dim, dim)
        return (c * (ap @ m) + s * (m @ ap.T)).ravel()
    return apply


def _ground(dim: int) -> np.ndarray:
    v = np.zeros(dim * dim, dtype=complex)
    v[0] = 1.0
    return v


def _phi_integrate(p: MorseParams, spec: CoherentSpec, vib_of_phi) -> np.ndarray:
    """int_0^{2pi} dphi |beta(phi)> e^{i z phi} (x) vib_of_phi(phi)."""
    nodes, weights = phi_rule(spec.Nphi)
    lower, upper = branch_vectors(nodes)
    bvec = lower if spec.beta == "l" else upper
    out = None
    for j, phi in enumerate(nodes):
        vib = vib_of_phi(phi)
        term = weights[j] * np.exp(1j * spec.z * phi) * np.kron(bvec[j], vib)
        out = term if out is None else out + term
    return out


def basis_coherent_states(p: MorseParams, spec: CoherentSpec, p_max: int | None = None,
                          dim: int | None = None) -> list[np.ndarray]:
    """|beta p z>_0 = int dphi |beta> e^{i z phi} (a+)^p |0 0> for p = 0..p_max."""
    dim = _basis_dim(p, dim)
    p_max = dim - 1 if p_max is None else p_max
    ap = phased_ladder_matrices(p, dim).Aplus if dim >= 2 else np.zeros((1, 1))
    nodes, weights = phi_rule(spec.Nphi)
    lower, upper = branch_vectors(nodes)
    bvec = lower if spec.beta == "l" else upper
    out = [np.zeros(2 * dim * dim, dtype=complex) for _ in range(p_max + 1)]
    for j, phi in enumerate(nodes):
        raise_op = _raise_two_mode(ap, phi)
        vib = _ground(dim)
        pref = weights[j] * np.exp(1j * spec.z * phi)
        for q in range(p_max + 1):
            out[q] += pref * np.kron(bvec[j], vib)
            vib = raise_op(vib)
    return out


def laguerre_weight(n: int, p: int, kappa: float) -> float:
    """n! kappa^(p-n) L_n^(p-n)(kappa^2) / p!, finite also for p < n.

    Uses L_n^(a)(x) = sum_k (-1)^k C(n+a, n-k) x^k / k!, so that every term
    carries a non-negative power of kappa.
    """
    total = 0.0
    for k in range(max(0, n - p), n + 1):
        power = p - n + 2 * k
        term = (-1) ** k * math.comb(p, n - k) / math.factorial(k)
        total += term * (kappa ** power if power else 1.0)
    return math.factorial(n) / math.factorial(p) * total


def expansion_coefficient(n: int, p: int, kappa: float, convention: str = "laguerre") -> complex:
    """Coefficient of |beta p z>_0.

    ``laguerre``: (-i)^p n! kappa^(p-n) L_n^(p-n)(kappa^2) / p!, the Laguerre closed form.
    ``exact``: the coefficient of a+^p in exp(i kappa a+)(a+ - kappa)^n,
    sum_q C(n,q) (-kappa)^q (i kappa)^(p-n+q) / (p-n+q)!.
    """
    if convention == "laguerre":
        return (-1j) ** p * laguerre_weight(n, p, kappa)
    if convention == "exact":
        total = 0j
        for q in range(n + 1):
            r = p - n + q
            if r < 0:
                continue
            total += (math.comb(n, q) * (-kappa) ** q * (1j * kappa) ** r / math.factorial(r))
        return total
    raise ValueError(f"unknown convention {convention!r}")


def coherent_state(p: MorseParams, spec: CoherentSpec, convention: str = "laguerre",
                   dim: int | None = None) -> VibronicState:
    """Laguerre-expanded coherent state truncated at p = N_eff, normalized.

    The normalization factor (norm of the raw expansion) is recorded.
    """
    dim = _basis_dim(p, dim)
    if spec.n > p.N_eff:
        raise IndexOutOfBasis(f"n = {spec.n} exceeds N_eff = {p.N_eff}")
    p_max = dim - 1
    basis = basis_coherent_states(p, spec, p_max, dim)
    raw = np.zeros(2 * dim * dim, dtype=complex)
    coeffs = []
    for q in range(p_max + 1):
        c = expansion_coefficient(spec.n, q, spec.kappa, convention)
        coeffs.append(c)
        raw += c * basis[q]
    state = VibronicState(raw, (2, dim, dim), meta=spec,
                          info={"expansion": coeffs, "convention": convention,
                                "phi_exact": spec.Nphi / 2 > phi_bandwidth(p_max, spec.z)})
    return state.normalized()


def occupation_mask(dim: int, p_max: int) -> np.ndarray:
    n = np.arange(dim)
    tot = (n[:, None] + n[None, :]).ravel()
    return np.tile(tot <= p_max, 2)


def coherent_state_operator(p: MorseParams, spec: CoherentSpec, dim: int | None = None,
                            p_max: int | None = None) -> VibronicState:
    """Direct build: int dphi |beta> e^{izphi} exp(i kappa a+)(a+ - kappa)^n |0 0>.

    The exponential is summed as a finite power series (a+ is nilpotent on
    the truncated basis), then the result is projected on total occupation
    <= p_max (default N_eff) to match the Laguerre truncation.
    """
    dim = _basis_dim(p, dim)
    p_max = dim - 1 if p_max is None else p_max
    ap = phased_ladder_matrices(p, dim).Aplus if dim >= 2 else np.zeros((1, 1))

    def vib(phi):
        raise_op = _raise_two_mode(ap, phi)
        v = _ground(dim)
        for _ in range(spec.n):
            v = raise_op(v) - spec.kappa * v
        out = np.zeros_like(v)
        term = v
        for k in range(2 * dim):
            out = out + term
            term = (1j * spec.kappa / (k + 1)) * raise_op(term)
            if not np.any(term):
                break
        return out

    raw = _phi_integrate(p, spec, vib)
    raw = np.where(occupation_mask(dim, p_max), raw, 0.0)
    return VibronicState(raw, (2, dim, dim), meta=spec).normalized()


def state_fidelity(a: VibronicState, b: VibronicState) -> float:
    """|<a|b>| / (|a| |b|), insensitive to a global phase."""
    return float(abs(np.vdot(a.coeffs, b.coeffs)) / (a.norm * b.norm))


# ---------------------------------------------------------------- perturbation theory


@dataclass
class PTResult:
    E0: float
    EJT: float
    E: float
    psi1: VibronicState
    block_indices: np.ndarray
    block_ejt: np.ndarray
    block_vectors: np.ndarray
    unresolved: bool


def pt_first_order(p: MorseParams, kappa: float, form: str, e: ElectronicDoublet | None,
                   state: VibronicState, t: SeriesTruncation | None = None,
                   strict: bool = False, tol: float = 1e-8) -> PTResult:
    """First-order (degenerate) perturbation theory around H_e + H_v."""
    dim = state.dims[1]
    h0 = unperturbed_hamiltonian(p, form, dim).data
    hjt = build_hjt(p, kappa, form, e, t, dim).data
    psi = state.coeffs / state.norm
    h0psi = h0 @ psi
    e0 = float(np.real(np.vdot(psi, h0psi)))
    if np.linalg.norm(h0psi - e0 * psi) > tol * max(p.hbar_Omega, abs(e0)):
        raise NotAnEigenstate("state is not an eigenvector of H_e + H_v")
    diag = np.real(np.diag(h0))
    block = np.flatnonzero(np.abs(diag - e0) < DEGENERACY_TOL * p.hbar_Omega)
    sub = hjt[np.ix_(block, block)]
    block_ejt, block_vecs = np.linalg.eigh(0.5 * (sub + sub.conj().T))
    unresolved = bool(np.max(np.abs(sub)) < 1e-14 * max(1.0, kappa * p.hbar_Omega)) if len(block) > 1 else False
    if unresolved and strict and kappa > 0:
        raise DegenerateBlockUnresolved("H_JT vanishes on the degenerate block")
    ejt = float(np.real(np.vdot(psi, hjt @ psi)))
    psi1 = psi.astype(complex).copy()
    outside = np.setdiff1d(np.arange(len(psi)), block)
    coupling = hjt @ psi
    psi1[outside] -= coupling[outside] / (diag[outside] - e0)
    return PTResult(E0=e0, EJT=ejt, E=e0 + ejt,
                    psi1=VibronicState(psi1, state.dims, meta=state.meta),
                    block_indices=block, block_ejt=block_ejt, block_vectors=block_vecs,
                    unresolved=unresolved)


def basis_state(dims: tuple[int, int, int], elec: int, n1: int, n2: int) -> VibronicState:
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    v[(elec * dims[1] + n1) * dims[2] + n2] = 1.0
    return VibronicState(v, dims)


def expectation(op: OperatorMatrix | np.ndarray, state: VibronicState) -> complex:
    mat = np.asarray(op)
    psi = state.coeffs
    return complex(np.vdot(psi, mat @ psi) / np.vdot(psi, psi))


# ---------------------------------------------------------------- closed form


@dataclass(frozen=True)
class ClosedFormResult:
    value: float
    diverged: bool
    inner_diverged: bool
    outer_diverged: bool
    per_p_bracket: tuple[float, ...]


def ejt_closed_form(p: MorseParams, spec: CoherentSpec, e: ElectronicDoublet | None,
                    t: SeriesTruncation, phi: float = 0.0) -> ClosedFormResult:
    """Double Laguerre sum for E_JT with the bracket log-series from l = 1.

    bracket_p = 2 ln nu - 2 sum_{l=1}^{L} (1/l) w_p^l,  w_p = 1 + nu sum_m (nu-1-2p)^(2m);
    the m-sum is resummed as 1/(1 - sigma^2) when |sigma| < 1 and t.resum is set.
    """
    e = e or ElectronicDoublet()
    if spec.n > p.N_eff:
        raise IndexOutOfBasis(f"n = {spec.n} exceeds N_eff = {p.N_eff}")
    if spec.kappa == 0.0:
        return ClosedFormResult(0.0, False, False, False, ())
    nu = p.nu
    inner_div = outer_div = False
    brackets = []
    weights = []
    for q in range(p.N_eff + 1):
        sigma = nu - 1.0 - 2.0 * q
        if abs(sigma) >= 1.0:
            inner_div = True
        if t.resum and abs(sigma) < 1.0:
            geo = 1.0 / (1.0 - sigma * sigma)
        else:
            geo = math.fsum(sigma ** (2 * m) for m in range(t.M_inner + 1))
        w = 1.0 + nu * geo
        if abs(w) >= 1.0:
            outer_div = True
        with np.errstate(over="ignore"):
            log_part = math.fsum(float(np.float64(w) ** l) / l for l in range(1, t.L_outer + 1))
        brackets.append(2.0 * math.log(nu) - 2.0 * log_part)
        weights.append(laguerre_weight(spec.n, q, spec.kappa))
    total = 0.0
    for q1 in range(p.N_eff + 1):
        for q2 in range(p.N_eff + 1):
            total += (-1) ** q1 * weights[q1] * weights[q2] * brackets[q1]
    melec = branch_expectation(e, spec.beta, phi)
    value = spec.kappa * p.hbar_Omega / p.alpha * melec * total
    return ClosedFormResult(float(value), inner_div or outer_div, inner_div, outer_div,
                            tuple(brackets))

"""Dense diagonalization oracles, harmonic references and scaling scans."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .errors import EmptyInput, NoBoundStates, NotHermitian
from .morse_core import MorseParams, energy_level, eval_eigenfunction_x, x_matrix
from .operators import OperatorMatrix
from .su11_algebra import phased_ladder_matrices
from .vibronic import (ElectronicDoublet, basis_state, build_hjt, harmonic_ladder,
                       pt_first_order, unperturbed_hamiltonian)

GROUP_TOL = 1e-8  # degeneracy grouping, in units of hbar*Omega
FOCK_DIM = 40


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    vectors: np.ndarray
    degeneracy_groups: list[list[int]]

    def eigenvector(self, i: int) -> np.ndarray:
        return self.vectors[:, i]

    def degeneracy(self, i: int) -> int:
        for g in self.degeneracy_groups:
            if i in g:
                return len(g)
        raise IndexError(i)


def group_degenerate(values: np.ndarray, tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and abs(v - values[groups[-1][0]]) < tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def diagonalize(H: OperatorMatrix | np.ndarray, energy_scale: float = 1.0,
                herm_tol: float = 1e-10) -> SpectrumResult:
    """Full spectrum of a Hermitian matrix; groups levels within 1e-8 * energy_scale."""
    mat = np.asarray(H)
    if mat.size and np.max(np.abs(mat - mat.conj().T)) > herm_tol * max(1.0, np.max(np.abs(mat))):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    if not np.all(np.isfinite(mat)):
        raise NotHermitian("matrix has non-finite entries")
    vals, vecs = eigh(0.5 * (mat + mat.conj().T))
    return SpectrumResult(vals, vecs, group_degenerate(vals, GROUP_TOL * energy_scale))


def full_hamiltonian(p: MorseParams, kappa: float, form: str, e: ElectronicDoublet | None = None,
                     dim: int | None = None) -> OperatorMatrix:
    h0 = unperturbed_hamiltonian(p, form, dim)
    hjt = build_hjt(p, kappa, form, e, dim=dim)
    return OperatorMatrix(h0.data + hjt.data, "vibronic", h0.dims)


def weyl_check(p: MorseParams, kappa: float, delta: float, form: str,
               e: ElectronicDoublet | None = None) -> tuple[float, float]:
    """(max eigenvalue shift, spectral norm of the coupling change)."""
    a = diagonalize(full_hamiltonian(p, kappa, form, e), p.hbar_Omega).eigenvalues
    b = diagonalize(full_hamiltonian(p, kappa + delta, form, e), p.hbar_Omega).eigenvalues
    dh = build_hjt(p, kappa + delta, form, e).data - build_hjt(p, kappa, form, e).data
    return float(np.max(np.abs(a - b))), float(np.linalg.norm(dh, 2))


# ---------------------------------------------------------------- harmonic reference


@dataclass(frozen=True)
class HarmonicReference:
    """Truncated Fock-space oscillator at frequency omega."""

    omega: float
    hbar: float = 1.0
    mass: float = 1.0
    fock_dim: int = FOCK_DIM

    @property
    def a(self) -> np.ndarray:
        return harmonic_ladder(self.fock_dim)

    @property
    def adag(self) -> np.ndarray:
        return self.a.T

    def K(self, E_JT: float) -> float:
        return math.sqrt(self.hbar * self.omega * E_JT)

    @property
    def x_scale(self) -> float:
        return math.sqrt(self.hbar / (2.0 * self.mass * self.omega))

    def glauber(self, rho: complex) -> np.ndarray:
        """|G(rho)> = e^{-|rho|^2/2} sum_n rho^n / sqrt(n!) |n>, truncated."""
        n = np.arange(self.fock_dim)
        logf = np.array([0.5 * math.lgamma(k + 1) for k in n])
        mags = np.exp(n * math.log(abs(rho)) - logf - 0.5 * abs(rho) ** 2) if rho != 0 else (n == 0) * 1.0
        return mags * np.exp(1j * n * np.angle(rho))

    def glauber_residual(self, rho: complex) -> float:
        """|a G - rho G| excluding the truncated top component."""
        g = self.glauber(rho)
        r = self.a @ g - rho * g
        return float(np.linalg.norm(r[:-1]))

    def tail_weight(self, rho: complex) -> float:
        """Poisson weight lost above the Fock truncation."""
        g = self.glauber(rho)
        return float(max(0.0, 1.0 - np.sum(np.abs(g) ** 2)))

    def wavefunction(self, n: int, x: np.ndarray) -> np.ndarray:
        """Normalized Hermite function phi_n(x) centred at x = 0."""
        length = math.sqrt(self.hbar / (self.mass * self.omega))
        xi = np.asarray(x) / length
        prev = np.zeros_like(xi)
        cur = np.pi ** -0.25 * np.exp(-xi * xi / 2.0)
        for k in range(n):
            prev, cur = cur, math.sqrt(2.0 / (k + 1)) * xi * cur - math.sqrt(k / (k + 1)) * prev
        return cur / math.sqrt(length)


# ---------------------------------------------------------------- PT vs exact


def pt_ground(p: MorseParams, kappa: float, form: str, e: ElectronicDoublet | None = None,
              dim: int | None = None) -> float:
    """E0 + lowest degenerate-block EJT for the unperturbed ground level."""
    dim = dim or p.size
    res = pt_first_order(p, kappa, form, e, basis_state((2, dim, dim), 0, 0, 0))
    return res.E0 + float(np.min(res.block_ejt))


def compare_pt_vs_exact(p: MorseParams, form: str, e: ElectronicDoublet | None,
                        kappas: list[float], dim: int | None = None) -> dict:
    if not kappas:
        raise EmptyInput("compare_pt_vs_exact needs at least one kappa")
    rows = []
    for k in kappas:
        exact = diagonalize(full_hamiltonian(p, k, form, e, dim), p.hbar_Omega).eigenvalues[0]
        pt = pt_ground(p, k, form, e, dim)
        rows.append({"kappa": k, "exact": float(exact), "pt": pt, "deviation": abs(exact - pt)})
    devs = np.array([r["deviation"] for r in rows])
    slope = math.nan
    positive = devs > 0
    if np.count_nonzero(positive) >= 2:
        ks = np.asarray(kappas, dtype=float)[positive]
        slope = float(np.polyfit(np.log(ks), np.log(devs[positive]), 1)[0])
    return {"form": form, "nu": p.nu, "rows": rows, "slope": slope}


def block_splitting(p: MorseParams, kappa: float, form: str,
                    e: ElectronicDoublet | None = None) -> dict:
    """Exact vs degenerate-PT splitting of the unperturbed ground doublet."""
    dim = p.size
    res = pt_first_order(p, kappa, form, e, basis_state((2, dim, dim), 0, 0, 0))
    spec = diagonalize(full_hamiltonian(p, kappa, form, e), p.hbar_Omega).eigenvalues
    sub = build_hjt(p, kappa, form, e).data[np.ix_(res.block_indices, res.block_indices)]
    direct = np.linalg.eigvalsh(sub)
    k = len(res.block_indices)
    return {"pt": res.block_ejt, "direct_2x2": direct,
            "exact": spec[:k] - res.E0, "block_indices": res.block_indices}


# ---------------------------------------------------------------- harmonic limit


def morse_coherent_wavefunction(p: MorseParams, kappa: float, x: np.ndarray,
                                p_max: int | None = None) -> np.ndarray:
    """Single-mode exp(i kappa A+)|0> on a position grid, truncated at p_max."""
    p_max = min(p.N_eff, 60) if p_max is None else p_max
    ap = phased_ladder_matrices(p, p_max + 1).Aplus
    coeff = np.zeros(p_max + 1, dtype=complex)
    term = np.zeros(p_max + 1, dtype=complex)
    term[0] = 1.0
    for k in range(p_max + 1):
        coeff += term
        term = (1j * kappa / (k + 1)) * (ap @ term)
    psi = np.zeros_like(x, dtype=complex)
    for n in range(p_max + 1):
        psi += coeff[n] * eval_eigenfunction_x(p, n, x)
    return psi


def kappa_for_rho(p: MorseParams, rho_abs: float) -> float:
    """Coupling whose Glauber partner has |rho| = rho_abs at this nu."""
    return rho_abs / math.sqrt(p.nu - 1.0)


def glauber_overlap(p: MorseParams, kappa: float, points: int = 8001) -> float:
    """|<Morse coherent|Glauber>| with rho = i kappa sqrt(nu - 1), on a common x grid."""
    ref = HarmonicReference(p.omega_harm, p.hbar, p.m)
    rho = 1j * kappa * math.sqrt(p.nu - 1.0)
    length = math.sqrt(p.hbar / (p.m * p.omega_harm))
    span = 12.0 * length * (1.0 + abs(rho))
    x = np.linspace(-span, span, points)
    dx = x[1] - x[0]
    morse = morse_coherent_wavefunction(p, kappa, x)
    g = ref.glauber(rho)
    harm = np.zeros_like(x, dtype=complex)
    for n in range(ref.fock_dim):
        if abs(g[n]) > 1e-18:
            harm += g[n] * ref.wavefunction(n, x)
    ov = np.sum(np.conj(morse) * harm) * dx
    nm = math.sqrt(np.sum(np.abs(morse) ** 2) * dx)
    nh = math.sqrt(np.sum(np.abs(harm) ** 2) * dx)
    return float(abs(ov) / (nm * nh))


def _jt_ground_shift(p: MorseParams, form: str, coupling: float, dim: int) -> float:
    # coupling is K / (hbar omega_harm); convert to kappa = K / (hbar Omega)
    kappa = coupling * p.omega_harm / p.Omega
    e0 = diagonalize(unperturbed_hamiltonian(p, form, dim).data, p.hbar_Omega).eigenvalues[0]
    e1 = diagonalize(full_hamiltonian(p, kappa, form, dim=dim), p.hbar_Omega).eigenvalues[0]
    return float(e1 - e0)


def harmonic_limit_scan(nus: list[float], observable: str, coupling: float = 0.1,
                        max_dim: int = 8) -> dict:
    """Relative deviation of an observable from its harmonic value versus nu.

    level_gap        (E(1) - E(0)) / hbar omega_harm  vs 1
    x01_element      <0|x|1>                          vs sqrt(hbar / 2 m omega_harm)
    jt_ground_shift  ground shift, morse_structural vs harmonic_eq3 at K = coupling * hbar omega
    The fitted order is the slope of log(deviation) against log(1/nu).
    """
    if not nus:
        raise EmptyInput("harmonic_limit_scan needs at least one nu")
    rows = []
    for nu in nus:
        if nu <= 1.0:
            raise NoBoundStates(f"nu = {nu} holds no bound state")
        p = MorseParams.from_reduced(nu, 0.5)
        if p.size < 2:
            raise NoBoundStates(f"nu = {nu} has fewer than two bound states")
        if observable == "level_gap":
            value = (energy_level(p, 1) - energy_level(p, 0)) / (p.hbar * p.omega_harm)
            harmonic = 1.0
        elif observable == "x01_element":
            value = float(x_matrix(p, 2).data[0, 1])
            harmonic = p.x_scale
        elif observable == "jt_ground_shift":
            dim = min(p.size, max_dim)
            value = _jt_ground_shift(p, "morse_structural", coupling, dim)
            harmonic = _jt_ground_shift(p, "harmonic_eq3", coupling, dim)
        else:
            raise ValueError(f"unknown observable {observable!r}")
        rows.append({"nu": nu, "value": value, "harmonic": harmonic,
                     "deviation": abs(value - harmonic) / abs(harmonic)})
    devs = np.array([r["deviation"] for r in rows])
    order = math.nan
    if len(rows) >= 2 and np.all(devs > 0):
        order = float(np.polyfit(np.log(1.0 / np.asarray(nus)), np.log(devs), 1)[0])
    return {"observable": observable, "rows": rows, "order": order}

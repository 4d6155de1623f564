"""Ergotropy: the largest energy a cyclic unitary can extract from a state.

Two closed-form evaluations are provided (energy minus passive energy, and
the overlap double sum) together with a randomized search over the unitary
orbit that serves as an independent check of the passive minimum.

All functions accept single 4x4 matrices or stacks ``(..., 4, 4)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import CONSTRUCTION_TOL, POPULATION_FLOOR
from .errors import ConfigError, NotAState
from .qmat import (
    IDENTITY4,
    SpectralDecomposition,
    _orthonormalize,
    as_hermitian,
    dagger,
    expectation,
    hermitian_eig,
    random_unitaries,
)

SAMPLE_CHUNK = 512
ANGLE_START = 0.3
ANGLE_STOP = 1e-4
# key word reserved for the refinement stream of the oracle generator
_REFINE_STREAM = 2**64 - 1
_PAIRS = tuple((i, j) for i in range(4) for j in range(i + 1, 4))


@dataclass(frozen=True)
class PopulationSpectrum:
    """Eigenvalues of a density matrix, non-increasing, with eigenvectors."""

    populations: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class ErgotropyReport:
    energy: float
    passive_energy: float
    ergotropy: float
    oracle_min_energy: float | None = None

    @property
    def oracle_gap(self):
        if self.oracle_min_energy is None:
            return None
        return self.oracle_min_energy - self.passive_energy


def _as_state(rho) -> np.ndarray:
    try:
        rho = as_hermitian(rho)
    except ConfigError as exc:
        raise NotAState(str(exc)) from None
    tr = np.trace(rho, axis1=-2, axis2=-1)
    if np.any(np.abs(tr - 1.0) > CONSTRUCTION_TOL):
        raise NotAState("density matrix does not have unit trace")
    return rho


def population_spectrum(rho) -> PopulationSpectrum:
    """Eigendecomposition of ``rho`` sorted by decreasing population.

    Round-off negatives down to -1e-10 are clamped to zero and the
    populations renormalized; anything more negative is not a state.
    """
    rho = _as_state(rho)
    spec = hermitian_eig(rho)
    pops = spec.eigenvalues[..., ::-1]
    vecs = spec.eigenvectors[..., ::-1]
    if np.any(pops < POPULATION_FLOOR):
        raise NotAState(f"density matrix has eigenvalue {pops.min():.3g} below {POPULATION_FLOOR}")
    pops = np.clip(pops, 0.0, None)
    pops = pops / np.sum(pops, axis=-1, keepdims=True)
    return PopulationSpectrum(pops, vecs)


def passive_state(pops: PopulationSpectrum, spec: SpectralDecomposition) -> np.ndarray:
    """``sum_n r_n |e_n><e_n|``: largest population on the lowest level.

    Within a degenerate energy level the pairing follows the eigensolver's
    order (eigenvalue, then original index); the passive energy does not
    depend on it.
    """
    v = spec.eigenvectors
    return (v * pops.populations[..., None, :]) @ dagger(v)


def _report(energy, passive, oracle=None):
    if np.ndim(energy) == 0:
        return ErgotropyReport(float(energy), float(passive), float(energy - passive), oracle)
    return ErgotropyReport(energy, passive, energy - passive, oracle)


def ergotropy_trace(rho, h) -> ErgotropyReport:
    """Ergotropy as ``tr(H rho) - tr(H xi)`` with ``xi`` the passive state."""
    h = as_hermitian(h)
    pops = population_spectrum(rho)
    xi = passive_state(pops, hermitian_eig(h))
    return _report(expectation(h, _as_state(rho)), expectation(h, xi))


def ergotropy_double_sum(rho, h):
    """``sum_{n,m} r_n e_m (|<r_n|e_m>|^2 - delta_nm)`` over sorted spectra."""
    h = as_hermitian(h)
    pops = population_spectrum(rho)
    spec = hermitian_eig(h)
    overlaps = np.abs(dagger(pops.vectors) @ spec.eigenvectors) ** 2
    terms = overlaps - np.eye(4)
    w = np.einsum("...n,...m,...nm->...", pops.populations, spec.eigenvalues, terms)
    return float(w) if np.ndim(w) == 0 else w


def ergotropy_from_populations(populations, energies):
    """Ergotropy of a state diagonal in the energy eigenbasis.

    ``populations[..., k]`` sits on the level with energy ``energies[..., k]``
    (ascending).  Returns ``(energy, passive_energy)``.
    """
    populations = np.asarray(populations, float)
    energies = np.asarray(energies, float)
    energy = np.sum(populations * energies, axis=-1)
    ordered = -np.sort(-populations, axis=-1)
    passive = np.sum(ordered * energies, axis=-1)
    return energy, passive


def _orbit_energies(h, rho, us):
    m = us @ rho @ dagger(us)
    return np.einsum("ij,...ji->...", h, m).real


def sample_min_energy(rho, h, seed: int, start: int, stop: int):
    """Lowest ``tr(H U rho U^dag)`` over sample streams ``start..stop-1``.

    Returns ``(energy, stream)``.  Ties go to the smallest stream, so the
    minimum over a split range equals the minimum over the whole range.
    """
    best_e, best_k = np.inf, -1
    for lo in range(start, stop, SAMPLE_CHUNK):
        hi = min(stop, lo + SAMPLE_CHUNK)
        e = _orbit_energies(h, rho, random_unitaries(seed, hi - lo, lo))
        i = int(np.argmin(e))
        if e[i] < best_e:
            best_e, best_k = float(e[i]), lo + i
    return best_e, best_k


def _refinement_moves(seed: int, steps: int, frame: np.ndarray) -> np.ndarray:
    """Small random unitaries with rotation angle decaying geometrically.

    Even steps are Cayley rotations along a random Hermitian direction,
    applied on the left.  Odd steps are Givens rotations in a random
    2-plane of ``frame`` (the eigenbasis of rho), applied on the right:
    they trade population between two eigenvectors without disturbing the
    others, which keeps near-pure states from stalling the search.
    """
    key = np.array([seed % 2**64, _REFINE_STREAM], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    frac = np.arange(steps) / max(steps - 1, 1)
    angle = ANGLE_START * (ANGLE_STOP / ANGLE_START) ** frac

    a = rng.standard_normal((steps, 4, 4)) + 1j * rng.standard_normal((steps, 4, 4))
    k = 0.5 * (a + dagger(a))
    k /= np.sqrt(np.sum(np.abs(k) ** 2, axis=(-2, -1)))[:, None, None]
    gen = 0.5j * angle[:, None, None] * k
    moves = np.linalg.solve(IDENTITY4 - gen, IDENTITY4 + gen)

    pairs = rng.integers(0, len(_PAIRS), steps)
    phases = np.exp(1j * rng.uniform(0.0, 2 * np.pi, steps))
    odd = np.arange(1, steps, 2)
    g = np.broadcast_to(IDENTITY4, (len(odd), 4, 4)).copy()
    c, sn = np.cos(angle[odd]), np.sin(angle[odd])
    for n, step in enumerate(odd):
        i, j = _PAIRS[pairs[step]]
        g[n, i, i] = g[n, j, j] = c[n]
        g[n, i, j] = sn[n] * phases[step]
        g[n, j, i] = -sn[n] * np.conj(phases[step])
    moves[odd] = frame @ g @ dagger(frame)
    return moves


def oracle_search(rho, h, n_samples: int = 2000, seed: int = 0, refine_steps: int = 5000):
    """Random search over the unitary orbit followed by greedy refinement.

    The best of ``n_samples`` Haar unitaries is refined by small random
    rotations of decaying angle (see :func:`_refinement_moves`), each accepted
    only when it lowers the energy; a rejected move is retried once inverted.
    Returns ``(min_energy, U)``.
    """
    if n_samples < 1:
        raise ConfigError("n_samples must be >= 1", "n_samples")
    if refine_steps < 0:
        raise ConfigError("refine_steps must be >= 0", "refine_steps")
    h = as_hermitian(h)
    rho = _as_state(rho)
    energy, k = sample_min_energy(rho, h, seed, 0, n_samples)
    u = random_unitaries(seed, 1, k)[0]
    if refine_steps:
        ht = h.T
        moves = _refinement_moves(seed, refine_steps, population_spectrum(rho).vectors)
        for i, r in enumerate(moves):
            for step in (r, r.conj().T):
                cand = step @ u if i % 2 == 0 else u @ step
                e = float(np.sum(ht * (cand @ rho @ cand.conj().T)).real)
                if e < energy:
                    energy, u = e, cand
                    break
            if i % 256 == 255:
                u = _orthonormalize(u[None])[0][0]
                energy = float(_orbit_energies(h, rho, u))
    return energy, u


def oracle_min_energy(rho, h, n_samples: int = 2000, seed: int = 0, refine_steps: int = 5000) -> float:
    return oracle_search(rho, h, n_samples, seed, refine_steps)[0]


def ergotropy_report(rho, h, oracle: bool = False, n_samples: int = 2000, seed: int = 0, refine_steps: int = 5000):
    """:func:`ergotropy_trace`, optionally with the orbit-search minimum attached."""
    rep = ergotropy_trace(rho, h)
    if not oracle:
        return rep
    return ErgotropyReport(rep.energy, rep.passive_energy, rep.ergotropy, oracle_min_energy(rho, h, n_samples, seed, refine_steps))

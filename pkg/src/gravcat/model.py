"""Two-qubit gravitational cat model and its thermal states.

The Hamiltonian is

    H = (omega / 2) (Z x I + I x Z) - coupling (X x X)

with level splitting ``omega`` and gravitational coupling ``coupling``
(written Omega in output files).  Units are natural: k_B = 1, and the
default energy scale is omega = 1.

Thermal states are assembled from populations on the analytic eigenbasis.
Three population rules are available, see :class:`Convention`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .constants import G_CODATA, MAX_EXPONENT
from .errors import ConfigError, NegativeCoupling, NotAState, Overflow
from .qmat import IDENTITY2, SIGMA_X, SIGMA_Z, dagger, hermitian_eig, kron2

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class Convention(str, enum.Enum):
    """Population rule used to build a thermal state.

    GIBBS          p_n ~ exp(-beta e_n), the equilibrium state.
    INVERTED       p_n ~ exp(+beta e_n), i.e. exp(+H/T) / Z.
    PAPER_LITERAL  the element formulas as printed for the cat model:
                   exp(-beta Omega) on |e1>, exp(+beta Delta) on |e2>,
                   exp(-beta Delta) on |e3>, exp(+beta Omega) on |e4>.
    """

    GIBBS = "gibbs"
    INVERTED = "inverted"
    PAPER_LITERAL = "paper_literal"

    @classmethod
    def parse(cls, value) -> "Convention":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(c.value for c in cls)
            raise ConfigError(f"unknown convention {value!r} (expected one of {names})", "convention") from None


def _check_finite(name, value, positive=True, allow_zero=False):
    if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
        raise ConfigError(f"{name} must be a finite real number, got {value!r}", name)
    if positive and (value < 0 or (value == 0 and not allow_zero)):
        bound = ">= 0" if allow_zero else "> 0"
        raise ConfigError(f"{name} must be {bound}, got {value!r}", name)


@dataclass(frozen=True)
class ModelParams:
    omega: float = 1.0
    coupling: float = 0.0

    def __post_init__(self):
        _check_finite("omega", self.omega)
        _check_finite("coupling", self.coupling, allow_zero=True)

    @property
    def delta(self) -> float:
        return math.hypot(self.coupling, self.omega)


@dataclass(frozen=True)
class ThermalSpec:
    T: float
    convention: Convention = Convention.GIBBS

    def __post_init__(self):
        _check_finite("T", self.T)
        object.__setattr__(self, "convention", Convention.parse(self.convention))

    @property
    def beta(self) -> float:
        return 1.0 / self.T


@dataclass(frozen=True)
class GeometryParams:
    """Two masses ``m`` whose separation is ``d`` (same minimum) or ``d_prime``."""

    m: float
    d: float
    d_prime: float
    G: float = G_CODATA

    def __post_init__(self):
        for name in ("m", "d", "d_prime", "G"):
            _check_finite(name, getattr(self, name))


@dataclass(frozen=True)
class GravCatSpectrum:
    delta: float
    phi_plus: float
    phi_minus: float
    eigenvalues: np.ndarray
    eigenstates: np.ndarray  # columns |e1>..|e4> in the ee, eg, ge, gg basis


def build_hamiltonian(p: ModelParams) -> np.ndarray:
    zsum = kron2(SIGMA_Z, IDENTITY2) + kron2(IDENTITY2, SIGMA_Z)
    return 0.5 * p.omega * zsum - p.coupling * kron2(SIGMA_X, SIGMA_X)


def _mixing_angles(omega, coupling):
    delta = np.hypot(coupling, omega)
    phi_plus = np.arctan(coupling / (omega + delta))
    # arctan(coupling / (omega - delta)) rewritten with omega - delta = -coupling**2 / (omega + delta);
    # stays finite at coupling = 0, where it takes its limit -pi/2
    phi_minus = -np.arctan2(omega + delta, coupling)
    return delta, phi_plus, phi_minus


def _eigen_arrays(omega, coupling):
    omega, coupling = np.broadcast_arrays(np.asarray(omega, float), np.asarray(coupling, float))
    delta, fp, fm = _mixing_angles(omega, coupling)
    evals = np.stack([-delta, -coupling, coupling, delta], axis=-1)
    vecs = np.zeros(omega.shape + (4, 4))
    vecs[..., 0, 0] = np.sin(fp)
    vecs[..., 3, 0] = np.cos(fp)
    vecs[..., 1, 1] = _INV_SQRT2
    vecs[..., 2, 1] = _INV_SQRT2
    vecs[..., 1, 2] = -_INV_SQRT2
    vecs[..., 2, 2] = _INV_SQRT2
    vecs[..., 0, 3] = np.sin(fm)
    vecs[..., 3, 3] = np.cos(fm)
    return delta, fp, fm, evals, vecs


def analytic_spectrum(p: ModelParams) -> GravCatSpectrum:
    delta, fp, fm, evals, vecs = _eigen_arrays(p.omega, p.coupling)
    return GravCatSpectrum(float(delta), float(fp), float(fm), evals, vecs.astype(complex))


def omega_from_geometry(g: GeometryParams) -> float:
    """Coupling ``G m^2 / 2 (1/d - 1/d')`` in energy units (J when SI inputs)."""
    if g.d > g.d_prime:
        raise NegativeCoupling(f"d = {g.d} exceeds d_prime = {g.d_prime}; coupling would be negative", "d")
    eta = g.G * g.m * g.m
    return 0.5 * eta * (1.0 / g.d - 1.0 / g.d_prime)


def _log_weights(evals, delta, coupling, beta, convention):
    beta = np.asarray(beta, float)[..., None]
    if convention is Convention.GIBBS:
        return -beta * evals
    if convention is Convention.INVERTED:
        return beta * evals
    d = np.asarray(delta)
    c = np.asarray(coupling)
    return beta * np.stack(np.broadcast_arrays(-c, d, -d, c), axis=-1)


def _log_partition(delta, coupling, beta):
    # the four exponents are +-beta*Delta, +-beta*Omega for every convention
    top = beta * delta
    return top + np.log1p(np.exp(-2.0 * top) + np.exp(beta * (coupling - delta)) + np.exp(-beta * (coupling + delta)))


def log_partition_function(p: ModelParams, t: ThermalSpec) -> float:
    return float(_log_partition(p.delta, p.coupling, t.beta))


def partition_function(p: ModelParams, t: ThermalSpec) -> float:
    """``2 cosh(beta Delta) + 2 cosh(beta Omega)``, evaluated directly.

    Raises Overflow once ``beta * Delta`` exceeds 700; use
    :func:`log_partition_function` in that regime.
    """
    x = t.beta * p.delta
    if x > MAX_EXPONENT:
        raise Overflow(f"beta*Delta = {x:.6g} is too large for direct evaluation")
    return 2.0 * math.cosh(x) + 2.0 * math.cosh(t.beta * p.coupling)


def populations(p: ModelParams, t: ThermalSpec) -> np.ndarray:
    """Normalized populations of |e1>..|e4> for the chosen convention."""
    delta, _, _, evals, _ = _eigen_arrays(p.omega, p.coupling)
    return _normalize(_log_weights(evals, delta, p.coupling, t.beta, t.convention))


def _normalize(logw):
    logw = logw - np.max(logw, axis=-1, keepdims=True)
    w = np.exp(logw)
    return w / np.sum(w, axis=-1, keepdims=True)


def thermal_states(omega, coupling, T, convention=Convention.GIBBS):
    """Vectorized thermal states over broadcast arrays of parameters.

    Returns ``(rho, log_Z)`` with ``rho`` of shape ``(..., 4, 4)``.
    """
    convention = Convention.parse(convention)
    omega, coupling, T = np.broadcast_arrays(*(np.asarray(x, float) for x in (omega, coupling, T)))
    beta = 1.0 / T
    delta, _, _, evals, vecs = _eigen_arrays(omega, coupling)
    pops = _normalize(_log_weights(evals, delta, coupling, beta, convention))
    rho = (vecs * pops[..., None, :]) @ np.swapaxes(vecs, -1, -2)
    return rho.astype(complex), _log_partition(delta, coupling, beta)


def thermal_state(p: ModelParams, t: ThermalSpec) -> np.ndarray:
    """Density matrix ``sum_n p_n |e_n><e_n|`` on the analytic eigenbasis.

    Weights are shifted by their maximum before exponentiation, so the state
    stays finite far below the temperature where Z itself overflows.
    """
    rho, _ = thermal_states(p.omega, p.coupling, t.T, t.convention)
    return rho


def closed_form_gibbs_elements(p: ModelParams, t: ThermalSpec) -> np.ndarray:
    """Equilibrium X-state assembled element by element.

    Each eigenvalue's Boltzmann factor is attached to its own eigenvector:
    the ee/gg block carries e1, e4 and the eg/ge block carries e2, e3.
    """
    s = analytic_spectrum(p)
    e1, e2, e3, e4 = s.eigenvalues
    log_z = log_partition_function(p, t)
    w1, w2, w3, w4 = (math.exp(-t.beta * e - log_z) for e in (e1, e2, e3, e4))
    fp, fm = s.phi_plus, s.phi_minus

    rho11 = w1 * math.sin(fp) ** 2 + w4 * math.sin(fm) ** 2
    rho14 = 0.5 * (w1 * math.sin(2 * fp) + w4 * math.sin(2 * fm))
    rho22 = 0.5 * (w2 + w3)
    rho23 = 0.5 * (w2 - w3)
    rho44 = w1 * math.cos(fp) ** 2 + w4 * math.cos(fm) ** 2
    return np.array(
        [
            [rho11, 0, 0, rho14],
            [0, rho22, rho23, 0],
            [0, rho23, rho22, 0],
            [rho14, 0, 0, rho44],
        ],
        dtype=complex,
    )


def check_density_matrix(rho, tol: float = 1e-12, floor: float = -1e-10) -> None:
    """Raise NotAState unless ``rho`` is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho, dtype=complex)
    if np.any(np.abs(rho - dagger(rho)) > tol):
        raise NotAState("density matrix is not Hermitian")
    tr = np.trace(rho, axis1=-2, axis2=-1)
    if np.any(np.abs(tr - 1.0) > tol):
        raise NotAState("density matrix does not have unit trace")
    if np.any(hermitian_eig(rho).eigenvalues < floor):
        raise NotAState("density matrix has negative eigenvalues")

"""Parameter sweeps and grid scans producing long-form CSV records."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError
from .ergotropy import ergotropy_trace, oracle_min_energy
from .model import Convention, ModelParams, build_hamiltonian, thermal_states
from .qmat import SIGMA_X, kron2

CSV_HEADER = (
    "omega",
    "Omega",
    "T",
    "ln_T",
    "convention",
    "energy",
    "passive_energy",
    "ergotropy",
    "partition",
    "oracle_min_energy",
)

# points per evaluation chunk; fixed so the output never depends on --jobs
CHUNK = 2048

VARIABLES = ("temperature", "coupling")
SCALES = ("linear", "log")


@dataclass(frozen=True)
class OracleSpec:
    n_samples: int = 2000
    refine_steps: int = 5000
    seed: int = 0


@dataclass(frozen=True)
class Range:
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def validate(self, name: str, positive: bool = False) -> None:
        if isinstance(self.points, bool) or not isinstance(self.points, (int, np.integer)) or self.points < 2:
            raise ConfigError(f"points must be an integer >= 2, got {self.points!r}", "points")
        if self.scale not in SCALES:
            raise ConfigError(f"scale must be one of {SCALES}, got {self.scale!r}", "scale")
        for key in ("start", "stop"):
            v = getattr(self, key)
            if not isinstance(v, (int, float, np.number)) or not math.isfinite(v):
                raise ConfigError(f"{name} {key} must be a finite number, got {v!r}", key)
        if not self.start < self.stop:
            raise ConfigError(f"{name} range needs start < stop, got {self.start} >= {self.stop}", "start")
        if (positive or self.scale == "log") and self.start <= 0:
            raise ConfigError(f"{name} start must be > 0, got {self.start}", "start")
        if self.start < 0:
            raise ConfigError(f"{name} start must be >= 0, got {self.start}", "start")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional scan of temperature or coupling at fixed other parameters."""

    variable: str
    range: Range
    omega: float = 1.0
    coupling: float | None = None
    temperature: float | None = None
    conventions: tuple = (Convention.GIBBS,)
    oracle: OracleSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "conventions", tuple(Convention.parse(c) for c in self.conventions))

    def validate(self) -> None:
        if self.variable not in VARIABLES:
            raise ConfigError(f"variable must be one of {VARIABLES}, got {self.variable!r}", "variable")
        self.range.validate(self.variable, positive=self.variable == "temperature")
        _check_scalar("omega", self.omega, strict=True)
        if self.variable == "temperature":
            _check_scalar("coupling", self.coupling, strict=False)
        else:
            _check_scalar("temperature", self.temperature, strict=True)
        if not self.conventions:
            raise ConfigError("conventions must name at least one convention", "conventions")
        _check_oracle(self.oracle)

    def parameter_arrays(self):
        x = self.range.values()
        if self.variable == "temperature":
            return np.full_like(x, self.coupling), x
        return x, np.full_like(x, self.temperature)


def _check_scalar(name, value, strict):
    if value is None:
        raise ConfigError(f"{name} is required", name)
    if not isinstance(value, (int, float, np.number)) or not math.isfinite(value) or value < 0 or (strict and value == 0):
        raise ConfigError(f"{name} must be a finite number {'> 0' if strict else '>= 0'}, got {value!r}", name)


def _check_oracle(oracle):
    if oracle is None:
        return
    if oracle.n_samples < 1:
        raise ConfigError("samples must be >= 1", "samples")
    if oracle.refine_steps < 0:
        raise ConfigError("refine must be >= 0", "refine")


@dataclass(frozen=True)
class OutputRecord:
    omega: float
    Omega: float
    T: float
    ln_T: float
    convention: str
    energy: float
    passive_energy: float
    ergotropy: float
    partition: float
    oracle_min_energy: float | None = None

    def row(self) -> list[str]:
        return [format_value(getattr(self, f.name)) for f in fields(self)]


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    # repr of a Python float is the shortest string that round-trips
    return repr(float(v))


def point_seed(run_seed: int, index: int) -> int:
    """Oracle seed for one grid point, a pure function of (run seed, index)."""
    ss = np.random.SeedSequence([run_seed % 2**64, index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def evaluate_points(omega, couplings, temperatures, convention, oracle=None, first_index=0):
    """Records for a batch of (coupling, T) points under one convention.

    ``first_index`` is the position of the first point in the whole run and
    only feeds the oracle seeds.
    """
    convention = Convention.parse(convention)
    couplings = np.asarray(couplings, float)
    temperatures = np.asarray(temperatures, float)
    rho, log_z = thermal_states(omega, couplings, temperatures, convention)
    h = _hamiltonians(omega, couplings)
    rep = ergotropy_trace(rho, h)
    with np.errstate(over="ignore"):
        partition = np.exp(log_z)
    out = []
    for i in range(len(couplings)):
        oracle_e = None
        if oracle is not None:
            oracle_e = oracle_min_energy(
                rho[i], h[i], oracle.n_samples, point_seed(oracle.seed, first_index + i), oracle.refine_steps
            )
        out.append(
            OutputRecord(
                omega=float(omega),
                Omega=float(couplings[i]),
                T=float(temperatures[i]),
                ln_T=math.log(temperatures[i]),
                convention=convention.value,
                energy=float(rep.energy[i]),
                passive_energy=float(rep.passive_energy[i]),
                ergotropy=float(rep.ergotropy[i]),
                partition=float(partition[i]),
                oracle_min_energy=oracle_e,
            )
        )
    return out


def _hamiltonians(omega, couplings):
    free = build_hamiltonian(ModelParams(omega, 0.0))
    return free - np.asarray(couplings)[:, None, None] * kron2(SIGMA_X, SIGMA_X)


def _evaluate_task(task):
    return evaluate_points(*task)


def _run_tasks(tasks, jobs):
    if jobs is None or jobs <= 1 or len(tasks) <= 1:
        results = [_evaluate_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_task, tasks))
    return [rec for chunk in results for rec in chunk]


def _tasks_for(omega, couplings, temperatures, conventions, oracle):
    tasks = []
    n = len(couplings)
    for c_idx, conv in enumerate(conventions):
        for lo in range(0, n, CHUNK):
            hi = min(n, lo + CHUNK)
            tasks.append((omega, couplings[lo:hi], temperatures[lo:hi], conv, oracle, c_idx * n + lo))
    return tasks


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[OutputRecord]:
    """One record per (grid point, convention), convention-major."""
    spec.validate()
    couplings, temps = spec.parameter_arrays()
    return _run_tasks(_tasks_for(spec.omega, couplings, temps, spec.conventions, spec.oracle), jobs)


@dataclass(frozen=True)
class GridResult:
    temperatures: np.ndarray
    couplings: np.ndarray
    ergotropy: np.ndarray  # shape (len(temperatures), len(couplings))
    records: list = field(repr=False)


def run_grid(
    omega: float,
    T_range: Range,
    Omega_range: Range,
    convention=Convention.GIBBS,
    oracle: OracleSpec | None = None,
    jobs: int = 1,
) -> GridResult:
    """Ergotropy on a temperature x coupling grid (T outer, coupling inner)."""
    _check_scalar("omega", omega, strict=True)
    T_range.validate("temperature", positive=True)
    Omega_range.validate("coupling")
    _check_oracle(oracle)
    convention = Convention.parse(convention)
    ts = T_range.values()
    cs = Omega_range.values()
    tt, cc = np.meshgrid(ts, cs, indexing="ij")
    records = _run_tasks(_tasks_for(omega, cc.ravel(), tt.ravel(), (convention,), oracle), jobs)
    w = np.array([r.ergotropy for r in records]).reshape(len(ts), len(cs))
    return GridResult(ts, cs, w, records)


def write_csv(records, stream, header: bool = True) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    if header:
        writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow(r.row())


def to_csv(records) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def read_csv(stream) -> list[OutputRecord]:
    reader = csv.DictReader(stream)
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ConfigError(f"unexpected CSV header {reader.fieldnames}", "header")
    out = []
    for row in reader:
        vals = {}
        for name in CSV_HEADER:
            raw = row[name]
            if name == "convention":
                vals[name] = raw
            elif name == "oracle_min_energy" and raw == "":
                vals[name] = None
            else:
                vals[name] = float(raw)
        out.append(OutputRecord(**vals))
    return out


# Figure presets.  Ranges are chosen to cover the plotted regimes; omega = 1.
PRESET_CONVENTIONS = (Convention.PAPER_LITERAL, Convention.GIBBS)
FIG2_COUPLINGS = (0.1, 0.5, 1.0, 2.0)
FIG2_RANGE = Range(1e-2, 1e3, 200, "log")
FIG3_TEMPERATURES = (0.1, 0.5, 1.0, 5.0)
FIG3_RANGE = Range(0.0, 2.0, 200, "linear")
FIG4_T_RANGE = Range(1e-2, 1e3, 100, "log")
FIG4_OMEGA_RANGE = Range(0.0, 2.0, 100, "linear")
PRESETS = ("fig2", "fig3", "fig4")


def preset_sweeps(name: str, conventions=PRESET_CONVENTIONS, oracle=None) -> list[SweepSpec]:
    if name == "fig2":
        return [
            SweepSpec("temperature", FIG2_RANGE, coupling=c, conventions=conventions, oracle=oracle)
            for c in FIG2_COUPLINGS
        ]
    if name == "fig3":
        return [
            SweepSpec("coupling", FIG3_RANGE, temperature=t, conventions=conventions, oracle=oracle)
            for t in FIG3_TEMPERATURES
        ]
    raise ConfigError(f"unknown sweep preset {name!r} (expected fig2 or fig3)", "preset")


def run_preset(name: str, conventions=PRESET_CONVENTIONS, oracle=None, jobs: int = 1) -> list[OutputRecord]:
    """Concatenated records of a figure preset."""
    if name == "fig4":
        out = []
        for conv in conventions:
            out.extend(run_grid(1.0, FIG4_T_RANGE, FIG4_OMEGA_RANGE, conv, oracle, jobs).records)
        return out
    out = []
    for spec in preset_sweeps(name, conventions, oracle):
        out.extend(run_sweep(spec, jobs))
    return out


def monotonicity_findings(records, tol: float = 0.0):
    """Points where ergotropy rises with temperature at fixed (convention, omega, Omega).

    Returns ``(convention, Omega, T)`` triples naming the upper temperature
    of each increasing step.
    """
    groups = {}
    for r in records:
        groups.setdefault((r.convention, r.omega, r.Omega), []).append(r)
    findings = []
    for (conv, _, coupling), rows in groups.items():
        rows = sorted(rows, key=lambda r: r.T)
        for prev, cur in zip(rows, rows[1:]):
            if cur.ergotropy > prev.ergotropy + tol:
                findings.append((conv, coupling, cur.T))
    return findings

"""Command-line interface: ``gravcat <subcommand> [options]``.

Every option can also be given in a flat ``key=value`` file passed with
``--config``; flags win over the file.  Exit status is 0 on success, 1 for
invalid input or configuration and 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys

from . import __version__
from .constants import G_CODATA
from .errors import ConfigError, NumericalError
from .model import (
    Convention,
    GeometryParams,
    ModelParams,
    ThermalSpec,
    analytic_spectrum,
    build_hamiltonian,
    log_partition_function,
    omega_from_geometry,
    thermal_state,
)
from .qmat import BASIS_LABELS, hermitian_eig
from .sweep import (
    PRESET_CONVENTIONS,
    OracleSpec,
    Range,
    SweepSpec,
    evaluate_points,
    format_value,
    monotonicity_findings,
    preset_sweeps,
    run_grid,
    run_preset,
    run_sweep,
    write_csv,
)

SEED_ENV = "GRAVCAT_SEED"


def _conventions(text):
    return tuple(Convention.parse(c) for c in str(text).split(",") if c.strip())


def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text):
    return int(str(text).strip(), 0)


# dest -> (type, default, help); shared across subcommands
OPTIONS = {
    "omega": (float, 1.0, "level splitting omega"),
    "coupling": (float, None, "gravitational coupling Omega"),
    "temperature": (float, None, "temperature T (k_B = 1)"),
    "convention": (_conventions, None, "gibbs, inverted or paper_literal, comma list for sweeps (default gibbs; presets: paper_literal,gibbs)"),
    "oracle": (_bool, False, "also run the random unitary-orbit search"),
    "samples": (_int, 2000, "oracle random samples"),
    "refine": (_int, 5000, "oracle refinement steps"),
    "seed": (_int, None, f"oracle seed (default ${SEED_ENV} or 0)"),
    "output": (str, None, "write CSV here instead of standard output"),
    "jobs": (_int, 1, "worker processes"),
    "var": (str, None, "swept variable: temperature or coupling"),
    "scale": (str, None, "linear or log"),
    "start": (float, None, "range start"),
    "stop": (float, None, "range stop"),
    "points": (_int, None, "number of grid points"),
    "preset": (str, None, "figure preset"),
    "t_start": (float, 1e-2, "temperature range start"),
    "t_stop": (float, 1e3, "temperature range stop"),
    "t_points": (_int, 100, "temperature points"),
    "t_scale": (str, "log", "temperature scale"),
    "coupling_start": (float, 0.0, "coupling range start"),
    "coupling_stop": (float, 2.0, "coupling range stop"),
    "coupling_points": (_int, 100, "coupling points"),
    "coupling_scale": (str, "linear", "coupling scale"),
    "mass": (float, None, "particle mass m [kg]"),
    "d": (float, None, "separation at the same minimum [m]"),
    "d_prime": (float, None, "separation at different minima [m]"),
    "G": (float, G_CODATA, "gravitational constant [m^3 kg^-1 s^-2]"),
    "numeric": (_bool, False, "also print eigenvalues from the Jacobi solver"),
}

_ORACLE = ("oracle", "samples", "refine", "seed")
COMMANDS = {
    "spectrum": ("analytic spectrum of the Hamiltonian", ("omega", "coupling", "numeric")),
    "state": ("thermal density matrix", ("omega", "coupling", "temperature", "convention")),
    "ergotropy": ("ergotropy of one thermal state", ("omega", "coupling", "temperature", "convention", "output") + _ORACLE),
    "sweep": (
        "1-D sweep over temperature or coupling",
        ("preset", "var", "scale", "start", "stop", "points", "omega", "coupling", "temperature", "convention", "output", "jobs")
        + _ORACLE,
    ),
    "grid": (
        "temperature x coupling grid",
        ("preset", "omega", "t_start", "t_stop", "t_points", "t_scale", "coupling_start", "coupling_stop",
         "coupling_points", "coupling_scale", "convention", "output", "jobs") + _ORACLE,
    ),
    "geometry": ("coupling from masses and distances", ("mass", "d", "d_prime", "G")),
}
_FLAG_ONLY = {"oracle", "numeric"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gravcat", description="Ergotropy of the gravitational cat two-qubit model.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (help_text, dests) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="flat key=value configuration file")
        for dest in dests:
            _, default, h = OPTIONS[dest]
            flag = "--" + dest.replace("_", "-")
            if dest in _FLAG_ONLY:
                p.add_argument(flag, dest=dest, action="store_const", const=True, default=None, help=h)
            else:
                p.add_argument(flag, dest=dest, default=None, metavar=dest.upper(), help=h if default is None else f"{h} (default: {default})")
    return parser


def read_config(path: str, allowed) -> dict:
    """Parse a ``key=value`` file; blank lines and ``#`` comments are skipped."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", "config") from None
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value", "config")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in allowed:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}", key)
        values[key] = value
    return values


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags, config file, environment and defaults into typed values."""
    dests = COMMANDS[args.command][1]
    config = read_config(args.config, dests) if args.config else {}
    out = {}
    for dest in dests:
        conv, default, _ = OPTIONS[dest]
        raw = getattr(args, dest)
        if raw is None:
            raw = config.get(dest)
        if raw is None and dest == "seed":
            raw = os.environ.get(SEED_ENV)
        if raw is None:
            out[dest] = default
            continue
        try:
            out[dest] = conv(raw)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid value for {dest}: {raw!r}", dest) from None
    if "seed" in out and out["seed"] is None:
        out["seed"] = 0
    return out


def _require(opts, *names):
    for n in names:
        if opts.get(n) is None:
            raise ConfigError(f"--{n.replace('_', '-')} is required", n)


def _convention_list(opts, preset=False):
    if opts["convention"] is None:
        return PRESET_CONVENTIONS if preset else (Convention.GIBBS,)
    return opts["convention"]


def _single_convention(opts):
    convs = _convention_list(opts)
    if len(convs) != 1:
        raise ConfigError("exactly one convention is expected here", "convention")
    return convs[0]


def _oracle(opts):
    if not opts.get("oracle"):
        return None
    return OracleSpec(opts["samples"], opts["refine"], opts["seed"])


@contextlib.contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def cmd_spectrum(opts, out):
    _require(opts, "coupling")
    p = ModelParams(opts["omega"], opts["coupling"])
    s = analytic_spectrum(p)
    print(f"Delta={format_value(s.delta)}", file=out)
    print(f"phi_plus={format_value(s.phi_plus)}", file=out)
    print(f"phi_minus={format_value(s.phi_minus)}", file=out)
    print("eigenvalues=" + ",".join(format_value(e) for e in s.eigenvalues), file=out)
    if opts["numeric"]:
        num = hermitian_eig(build_hamiltonian(p)).eigenvalues
        print("numeric_eigenvalues=" + ",".join(format_value(e) for e in num), file=out)
    for k in range(4):
        amps = ",".join(format_value(a.real) for a in s.eigenstates[:, k])
        print(f"state_{k + 1}={amps}", file=out)


def cmd_state(opts, out):
    _require(opts, "coupling", "temperature")
    p = ModelParams(opts["omega"], opts["coupling"])
    t = ThermalSpec(opts["temperature"], _single_convention(opts))
    rho = thermal_state(p, t)
    print("basis," + ",".join(BASIS_LABELS), file=out)
    for label, row in zip(BASIS_LABELS, rho):
        # states built on the analytic eigenbasis are real
        print(label + "," + ",".join(format_value(v.real) for v in row), file=out)
    print(f"# ln_Z={format_value(log_partition_function(p, t))}", file=out)


def cmd_ergotropy(opts, out):
    _require(opts, "coupling", "temperature")
    ModelParams(opts["omega"], opts["coupling"])
    conv = _single_convention(opts)
    ThermalSpec(opts["temperature"], conv)
    recs = evaluate_points(opts["omega"], [opts["coupling"]], [opts["temperature"]], conv, _oracle(opts))
    with _sink(opts["output"]) as fh:
        write_csv(recs, fh)


def _report_findings(records):
    rows = [r for r in records if r.convention != Convention.GIBBS.value]
    for conv, coupling, t in monotonicity_findings(rows):
        print(f"finding: ergotropy increases with T (convention={conv}, Omega={coupling!r}, T={t!r})", file=sys.stderr)


def cmd_sweep(opts, out):
    oracle = _oracle(opts)
    if opts["preset"]:
        specs = preset_sweeps(opts["preset"], _convention_list(opts, preset=True), oracle)
    else:
        _require(opts, "var", "start", "stop", "points")
        var = opts["var"]
        scale = opts["scale"] or ("log" if var == "temperature" else "linear")
        specs = [
            SweepSpec(
                var,
                Range(opts["start"], opts["stop"], opts["points"], scale),
                omega=opts["omega"],
                coupling=opts["coupling"],
                temperature=opts["temperature"],
                conventions=_convention_list(opts),
                oracle=oracle,
            )
        ]
    for spec in specs:
        spec.validate()
    records = []
    for spec in specs:
        records.extend(run_sweep(spec, opts["jobs"]))
    if all(s.variable == "temperature" for s in specs):
        _report_findings(records)
    with _sink(opts["output"]) as fh:
        write_csv(records, fh)


def cmd_grid(opts, out):
    oracle = _oracle(opts)
    if opts["preset"]:
        if opts["preset"] != "fig4":
            raise ConfigError(f"unknown grid preset {opts['preset']!r} (expected fig4)", "preset")
        records = run_preset("fig4", _convention_list(opts, preset=True), oracle, opts["jobs"])
    else:
        t_range = Range(opts["t_start"], opts["t_stop"], opts["t_points"], opts["t_scale"])
        c_range = Range(opts["coupling_start"], opts["coupling_stop"], opts["coupling_points"], opts["coupling_scale"])
        records = []
        for conv in _convention_list(opts):
            records.extend(run_grid(opts["omega"], t_range, c_range, conv, oracle, opts["jobs"]).records)
    with _sink(opts["output"]) as fh:
        write_csv(records, fh)


def cmd_geometry(opts, out):
    _require(opts, "mass", "d", "d_prime")
    g = GeometryParams(opts["mass"], opts["d"], opts["d_prime"], opts["G"])
    print(f"Omega={format_value(omega_from_geometry(g))}", file=out)


HANDLERS = {
    "spectrum": cmd_spectrum,
    "state": cmd_state,
    "ergotropy": cmd_ergotropy,
    "sweep": cmd_sweep,
    "grid": cmd_grid,
    "geometry": cmd_geometry,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        opts = resolve(args)
        HANDLERS[args.command](opts, sys.stdout)
    except SystemExit as exc:  # --help / --version
        return exc.code if isinstance(exc.code, int) else 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

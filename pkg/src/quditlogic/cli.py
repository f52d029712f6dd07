"""Command-line front end.

Every subcommand prints ``key=value`` lines on stdout and exits with

    0  success
    2  unreadable or malformed input
    3  verification failure (including non-unitary input)
    4  unsupported configuration
    5  control solve did not converge
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from .circuit import dumps_circuit, loads_circuit, simulate, verify_synthesis
from .core import QuditSystem, dumps_unitary, loads_unitary, pair_to_complex, random_unitary
from .errors import (
    ConvergenceError,
    DimensionError,
    FormatError,
    NonUnitaryError,
    NormalizationError,
    PhononLeakageError,
    QuditError,
    UnsupportedConfigurationError,
)
from .iontrap.model import LevelScheme, PulseProgram, TrapConfig, dumps_program
from .iontrap.protocol import gamma2_protocol
from .iontrap.solvers import OptimizerConfig, solve_x_controls, solve_z_controls, two_pi_phase_pulse
from .synthesis import SynthesisOptions, estimate_resources, synthesize_unitary

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VERIFY = 3
EXIT_UNSUPPORTED = 4
EXIT_CONVERGENCE = 5

log = logging.getLogger("quditlogic")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def emit(**pairs) -> None:
    for k, v in pairs.items():
        print(f"{k}={_fmt(v)}")


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the target directory, then rename over the target."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {path}: {exc.strerror}") from exc


def _load_unitary(path: str) -> tuple[QuditSystem, np.ndarray]:
    return loads_unitary(_read(path))


def _load_coefficients(path: str) -> np.ndarray:
    try:
        doc = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    if isinstance(doc, dict):
        doc = doc.get("coefficients")
    if not isinstance(doc, list) or len(doc) < 2:
        raise FormatError("coefficient file needs a list of at least two [re, im] pairs")
    return np.array([pair_to_complex(p) for p in doc])


# -- subcommands ------------------------------------------------------------------


def cmd_decompose(args: argparse.Namespace) -> int:
    sys_, U = _load_unitary(args.unitary)
    if args.d is not None and args.d != sys_.d or args.n is not None and args.n != sys_.n:
        raise DimensionError(f"file holds d={sys_.d}, n={sys_.n}; flags ask for d={args.d}, n={args.n}")
    opts = SynthesisOptions(tol=args.tol, lower_to_two_qudit=not args.no_lower, seed=args.seed)
    circuit, report = synthesize_unitary(U, sys_, opts)
    if args.out:
        write_atomic(args.out, dumps_circuit(circuit))
    for line in report.lines():
        print(line)
    emit(lowered=not args.no_lower)
    return EXIT_OK if report.matches else EXIT_VERIFY


def cmd_verify(args: argparse.Namespace) -> int:
    sys_, U = _load_unitary(args.unitary)
    circuit = loads_circuit(_read(args.circuit))
    if circuit.sys != sys_:
        raise DimensionError(f"circuit acts on d={circuit.sys.d}, n={circuit.sys.n}; unitary on d={sys_.d}, n={sys_.n}")
    report = verify_synthesis(U, circuit, args.tol)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.matches else EXIT_VERIFY


def cmd_estimate(args: argparse.Namespace) -> int:
    ds = args.d or [2, 3, 4, 8]
    for N in args.N:
        for d in ds:
            est = estimate_resources(N, d)
            emit(N=N, d=d, n=est.n, n2=est.n2, time_ratio=est.time_ratio)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    circuit = loads_circuit(_read(args.circuit))
    N = circuit.sys.N
    if not 0 <= args.basis < N:
        raise DimensionError(f"basis index {args.basis} outside 0..{N - 1}")
    state = np.zeros(circuit.dim, dtype=complex)
    state[args.basis * circuit.sys.d**circuit.aux] = 1.0
    out = simulate(circuit, state)
    emit(dim=circuit.dim, norm=float(np.linalg.norm(out)))
    for k in np.flatnonzero(np.abs(out) > args.cutoff):
        print(f"amp_{k}={out[k].real:.17g},{out[k].imag:.17g}")
    return EXIT_OK


def cmd_random_unitary(args: argparse.Namespace) -> int:
    if args.d is None or args.n is None:
        raise CliError(EXIT_PARSE, "random-unitary needs --d and --n")
    sys_ = QuditSystem(args.d, args.n)
    text = dumps_unitary(random_unitary(sys_.N, args.seed), sys_)
    if args.out:
        write_atomic(args.out, text)
    else:
        print(text)
    return EXIT_OK


def _optimizer(args: argparse.Namespace) -> OptimizerConfig:
    return OptimizerConfig(starts=args.budget, seed=args.seed)


def cmd_pulse(args: argparse.Namespace) -> int:
    if (args.coeffs is None) == (args.phase is None):
        raise CliError(EXIT_PARSE, "pulse needs exactly one of --coeffs FILE or --phase PHI")
    trap = TrapConfig(n_max=args.nmax)
    if args.coeffs is not None:
        coeffs = _load_coefficients(args.coeffs)
        d, kind, params = coeffs.size, "Z", coeffs
    else:
        d, kind, params = args.d or 3, "X", args.phase
    if args.d is not None and args.d != d:
        raise DimensionError(f"coefficient file has d={d}, flag asks for d={args.d}")
    scheme = LevelScheme.default(d)

    if args.protocol:
        try:
            result = gamma2_protocol(scheme, trap, kind, params, opts=_optimizer(args))
        except PhononLeakageError as exc:
            raise CliError(EXIT_VERIFY, str(exc)) from exc
        match = result.compare(args.tol)
        if args.out:
            write_atomic(args.out, dumps_program(result.program))
        emit(
            kind=f"gamma2_{kind}",
            d=d,
            segments=len(result.program.segments),
            matches=match.matches,
            global_phase=match.phase,
            max_deviation=match.max_dev,
            leakage=result.leakage,
            cutoff_population=result.cutoff_population,
            y_infidelity=result.y_infidelity,
        )
        return EXIT_OK if match.matches else EXIT_VERIFY

    if kind == "Z":
        sol = solve_z_controls(params, _optimizer(args), scheme=scheme)
        meta = {"gate": "Z", "method": sol.method, "infidelity": sol.infidelity, "converged": sol.converged}
        program = PulseProgram(d, scheme, trap, (sol.segment,), metadata=meta)
        if args.out:
            write_atomic(args.out, dumps_program(program))
        emit(kind="Z", d=d, method=sol.method, infidelity=sol.infidelity, converged=sol.converged, t=sol.segment.t)
        return EXIT_OK if sol.converged else EXIT_CONVERGENCE

    seg = solve_x_controls(d, params, scheme)
    realized = two_pi_phase_pulse(seg.rabi[0], seg.detuning).phase if seg.t > 0 else 0.0
    err = abs(math.remainder(realized - params, 2 * math.pi))
    meta = {"gate": "X", "phase": params, "phase_error": err}
    program = PulseProgram(d, scheme, trap, (seg,), metadata=meta)
    if args.out:
        write_atomic(args.out, dumps_program(program))
    emit(kind="X", d=d, detuning=seg.detuning, t=seg.t, realized_phase=realized, phase_error=err)
    return EXIT_OK if err <= args.tol else EXIT_VERIFY


# -- wiring -----------------------------------------------------------------------------


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive, default=1e-8, help="verification tolerance (default 1e-8)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--d", type=int, default=None, help="qudit dimension")
    common.add_argument("--n", type=int, default=None, help="number of qudits")
    common.add_argument("--out", default=None, help="output file (written atomically)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="quditlogic", description="Qudit unitary synthesis and ion-trap pulse tools.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("decompose", parents=[common], help="synthesize a circuit for a unitary file")
    s.add_argument("unitary")
    s.add_argument("--no-lower", action="store_true", help="keep multi-controlled gates")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("verify", parents=[common], help="check a circuit file against a unitary file")
    s.add_argument("unitary")
    s.add_argument("circuit")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("estimate", help="qudit counts and gate-count advantage")
    s.add_argument("--N", type=int, nargs="+", required=True, help="Hilbert-space dimensions")
    s.add_argument("--d", type=int, nargs="+", default=None, help="qudit dimensions (default 2 3 4 8)")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("simulate", parents=[common], help="run a circuit on a computational basis state")
    s.add_argument("circuit")
    s.add_argument("--basis", type=int, default=0)
    s.add_argument("--cutoff", type=float, default=1e-12, help="hide amplitudes below this modulus")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("random-unitary", parents=[common], help="write a seeded Haar-random unitary")
    s.set_defaults(func=cmd_random_unitary)

    s = sub.add_parser("pulse", parents=[common], help="solve laser controls for Z (coefficients) or X (phase)")
    s.add_argument("--coeffs", default=None, help="JSON list of [re, im] coefficients")
    s.add_argument("--phase", type=float, default=None, help="phase of X_d")
    s.add_argument("--protocol", action="store_true", help="emit the full two-ion controlled-gate program")
    s.add_argument("--nmax", type=int, default=3, help="phonon cutoff (default 3)")
    s.add_argument("--budget", type=int, default=8, help="optimizer starts (default 8)")
    s.set_defaults(func=cmd_pulse)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (FormatError, DimensionError, NormalizationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NonUnitaryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except UnsupportedConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except QuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point ``weaklevy``.

Exit codes: 0 success, 1 usage error, 2 invalid model or input, 3 numerical
failure, 4 statistical test failure (``validate`` only).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import _threads

_threads.prepare()

from .core import NumericalError, SpecError, SubordinatorSpec, is_psd  # noqa: E402
from .io import ModelSpecDocument, write_csv  # noqa: E402

EXIT_OK, EXIT_USAGE, EXIT_SPEC, EXIT_NUMERICAL, EXIT_STAT = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _load_json(path, what):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise SpecError(f"cannot read {what}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{what} is not valid JSON: {exc}") from None


def _vectors(obj, m, what) -> np.ndarray:
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise SpecError(f"{what} must be a list of numeric vectors") from None
    if arr.ndim == 1 and m == 1:
        arr = arr[:, None]
    if arr.ndim == 1 and arr.size == m:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != m or not np.all(np.isfinite(arr)):
        raise SpecError(f"{what} must be a list of finite vectors of length {m}")
    return arr


def _write_json(path, obj) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_charfn(args) -> int:
    from .charfn import weak_pair_exponent

    doc = ModelSpecDocument.load(args.model)
    T, B = doc.pair()
    n = B.dim
    m = 2 * n if args.joint else n
    grid = _vectors(_load_json(args.theta_grid, "theta grid"), m, "theta grid")
    rows = []
    for th in grid:
        t1, t2 = (th[:n], th[n:]) if args.joint else (np.zeros(n), th)
        psi = weak_pair_exponent(t1, t2, T, B)
        rows.append([*th, psi.real, psi.imag])
    names = [f"theta{k + 1}" for k in range(m)]
    write_csv(args.out, names + ["re", "im"], rows)
    return EXIT_OK


def cmd_density(args) -> int:
    from .measure import rays_to_thorin, vggc_levy_density

    doc = ModelSpecDocument.load(args.model)
    T, B = doc.pair()
    if T.atoms:
        raise SpecError("jump atoms give no Lévy density")
    _, U = rays_to_thorin(T)
    pts = _vectors(_load_json(args.points, "points"), B.dim, "points")
    rows = []
    for y in pts:
        J = np.flatnonzero(y)
        if J.size == 0:
            raise SpecError("the Lévy density is not defined at the origin")
        rows.append([*y, vggc_levy_density(y, J, B, U)])
    write_csv(args.out, [f"y{k + 1}" for k in range(B.dim)] + ["density"], rows)
    return EXIT_OK


def cmd_moments(args) -> int:
    from .moments import weak_bm_moments, wvag_moments

    doc = ModelSpecDocument.load(args.model)
    rep = wvag_moments(doc.wvag()) if doc.kind == "wvag" else weak_bm_moments(*doc.pair())
    _write_json(args.out, rep.to_dict())
    return EXIT_OK


def cmd_simulate(args) -> int:
    from . import simulate as sim
    from .io import path_csv_header, path_csv_rows, write_binary

    doc = ModelSpecDocument.load(args.model)
    T, B = doc.pair()
    if not args.t_max > 0 or args.steps < 1:
        raise SpecError("--t-max must be positive and --steps at least 1")
    grid = np.linspace(0.0, args.t_max, args.steps + 1)
    if args.scheme != sim.MARKED and args.epsilon is not None:
        raise SpecError("--epsilon only applies to the marked scheme")
    if args.scheme == sim.SUPERPOSITION:
        sample = sim.sample_superposition(T, B, grid, args.paths, args.seed)
    elif args.scheme == sim.MARKED:
        sample = sim.sample_weak_marked(T, B, grid, args.paths, args.epsilon, args.seed)
    else:
        sample = sim.sample_strong(T, B, grid, args.paths, args.seed)
    if args.out.endswith(".bin"):
        write_binary(args.out, sample, doc.sha256())
    else:
        write_csv(args.out, path_csv_header(B.dim), path_csv_rows(sample))
    return EXIT_OK


def _load_paths(path, n):
    from .io import read_binary, read_csv

    if str(path).endswith(".bin"):
        data, meta = read_binary(path)
        t_final = meta["time_grid"][-1]
        if data.shape[2] != 2 * n:
            raise SpecError("path file dimension does not match the model")
        return data[:, -1, :], t_final, meta
    header, data = read_csv(path)
    if len(header) != 2 + 2 * n:
        raise SpecError("path file dimension does not match the model")
    t_final = data[:, 1].max()
    final = data[data[:, 1] == t_final]
    return final[:, 2:], float(t_final), {}


def cmd_validate(args) -> int:
    from .charfn import weak_pair_exponent
    from .moments import weak_bm_moments
    from .validate import ecf_test, moment_test, standard_grid

    doc = ModelSpecDocument.load(args.model)
    T, B = doc.pair()
    n = B.dim
    samples, t, meta = _load_paths(args.paths, n)
    if meta and meta.get("params_sha256") != doc.sha256():
        raise SpecError("path file was generated from a different model")
    ecf_rep = ecf_test(samples, lambda th: weak_pair_exponent(th[:n], th[n:], T, B), t,
                       standard_grid(2 * n), args.threshold)
    mom_rep = moment_test(samples, weak_bm_moments(T, B), t, args.threshold)
    passed = ecf_rep.passed and mom_rep.passed
    _write_json(args.out, {
        "pass": passed, "time": t, "n_paths": int(samples.shape[0]),
        "ecf": ecf_rep.to_dict(), "moments": mom_rep.to_dict(),
    })
    return EXIT_OK if passed else EXIT_STAT


def cmd_classify(args) -> int:
    from .measure import classify_variation, rays_to_thorin

    doc = ModelSpecDocument.load(args.model)
    T, B = doc.pair()
    # jump atoms are compound Poisson and never change the class
    U = rays_to_thorin(SubordinatorSpec(T.drift, T.rays))[1]
    invertible = is_psd(B.sigma) and np.linalg.cond(B.sigma) < 1e12
    label = classify_variation(T.drift, U, invertible)
    _write_json(args.out, {"class": label})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="weaklevy", description="Weakly subordinated Lévy processes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("charfn", help="characteristic exponent on a θ grid")
    c.add_argument("--model", required=True)
    c.add_argument("--theta-grid", required=True)
    c.add_argument("--joint", action="store_true", help="grid rows are (θ_T, θ_Y) of length 2n")
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_charfn)

    c = sub.add_parser("density", help="Lévy density at points")
    c.add_argument("--model", required=True)
    c.add_argument("--points", required=True)
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_density)

    c = sub.add_parser("moments", help="per-unit-time moment report")
    c.add_argument("--model", required=True)
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_moments)

    c = sub.add_parser("simulate", help="sample paths")
    c.add_argument("--model", required=True)
    c.add_argument("--t-max", type=float, default=1.0)
    c.add_argument("--steps", type=int, default=1)
    c.add_argument("--paths", type=int, default=100000)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--scheme", choices=("superposition", "marked", "strong"), default="superposition")
    c.add_argument("--epsilon", type=float, default=None)
    c.add_argument("--out", required=True, help="*.bin for binary with JSON sidecar, otherwise CSV")
    c.set_defaults(func=cmd_simulate)

    c = sub.add_parser("validate", help="ECF and moment tests of simulated paths")
    c.add_argument("--model", required=True)
    c.add_argument("--paths", required=True)
    c.add_argument("--threshold", type=float, default=4.0)
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_validate)

    c = sub.add_parser("classify", help="path-variation class")
    c.add_argument("--model", required=True)
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_classify)
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SpecError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SPEC
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except ValueError as exc:
        # e.g. a malformed WEAKLEVY_THREADS
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SPEC


def main() -> None:
    sys.exit(run_cli())


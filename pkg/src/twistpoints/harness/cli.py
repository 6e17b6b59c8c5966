"""Command-line front end.

Exit codes: 0 every check passed, 1 a check failed, 2 the input was unusable.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from ..errors import ScenarioError, TwistPointsError
from ..symplectic import classify_eigenvalues, diamond, standard_j, symplectic_residual

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


# ---------------------------------------------------------------- input parsing


def parse_block(spec):
    """Block spec string to a NormalFormBlock.

    ``R theta`` | ``N1 lam b`` | ``Nm lam b1,b2,...`` | ``M lam [m]`` |
    ``Q rho theta [m]``.
    """
    from ..normal_forms import NormalFormBlock
    parts = spec.split()
    if not parts:
        raise InputError("empty block spec")
    head, args = parts[0], parts[1:]
    try:
        if head == "R" and len(args) == 1:
            return NormalFormBlock.rtheta(float(args[0]))
        if head == "N1" and len(args) == 2:
            return NormalFormBlock.n1(float(args[0]), int(args[1]))
        if head == "Nm" and len(args) == 2:
            return NormalFormBlock.nm(float(args[0]), [float(x) for x in args[1].split(",")])
        if head == "M" and len(args) in (1, 2):
            return NormalFormBlock.mm(float(args[0]), int(args[1]) if len(args) > 1 else 1)
        if head == "Q" and len(args) in (2, 3):
            return NormalFormBlock.quad(float(args[0]), float(args[1]),
                                        int(args[2]) if len(args) > 2 else 1)
    except ValueError as exc:
        raise InputError(f"block spec {spec!r}: {exc}") from None
    raise InputError(f"cannot read block spec {spec!r}")


def read_matrix_text(text, name="<matrix>"):
    """Whitespace or comma separated rows; '#' starts a comment."""
    rows = []
    width = None
    for ln, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        row = []
        for m in re.finditer(r"[^\s,]+", body):
            try:
                row.append(float(m.group()))
            except ValueError:
                raise InputError(f"{name}: line {ln}, column {m.start() + 1}: "
                                 f"not a number: {m.group()!r}") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InputError(f"{name}: line {ln}, column 1: expected {width} entries, "
                             f"found {len(row)}")
        rows.append(row)
    if not rows:
        raise InputError(f"{name}: line 1, column 1: no matrix rows")
    M = np.array(rows)
    if M.shape[0] != M.shape[1] or M.shape[0] % 2:
        raise InputError(f"{name}: matrix must be square of even size, got {M.shape}")
    return M


def read_matrix_file(path):
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return read_matrix_text(text, str(path))


def parse_small_matrix(text):
    """``I2`` | ``diag(a,b,..)`` | ``[[..],[..]]``."""
    t = text.strip()
    m = re.fullmatch(r"I(\d+)", t)
    if m:
        return np.eye(int(m.group(1)))
    m = re.fullmatch(r"diag\(([^)]*)\)", t)
    if m:
        try:
            return np.diag([float(x) for x in m.group(1).split(",")])
        except ValueError:
            raise InputError(f"cannot read {text!r}") from None
    try:
        A = np.array(json.loads(t), float)
    except (ValueError, TypeError):
        raise InputError(f"cannot read matrix {text!r}") from None
    if A.ndim != 2:
        raise InputError(f"matrix {text!r} is not two-dimensional")
    return A


def parse_path(spec):
    """``exp S=<matrix>`` (path e^{t J0 S}) or ``gen X=<matrix>`` (path e^{t X})."""
    from ..index.paths import SymplecticPath
    m = re.fullmatch(r"\s*(exp|gen)\s+([SX])\s*=\s*(.+)", spec)
    if not m:
        raise InputError(f"cannot read path spec {spec!r}")
    A = parse_small_matrix(m.group(3))
    if A.shape[0] != A.shape[1] or A.shape[0] % 2:
        raise InputError("path matrix must be square of even size")
    n = A.shape[0] // 2
    X = standard_j(n) @ A if m.group(1) == "exp" else A
    return SymplecticPath.exponential(X)


def _matrix_from_args(args):
    from ..normal_forms import build_normal_form
    if args.matrix:
        return read_matrix_file(args.matrix), None
    if args.block:
        blocks = [parse_block(b) for b in args.block]
        return diamond(*[build_normal_form(b) for b in blocks]), blocks
    raise InputError("give --matrix FILE or at least one --block SPEC")


# ---------------------------------------------------------------- commands

def cmd_normal_form(args):
    M, blocks = _matrix_from_args(args)
    tol = args.tol or 1e-8
    print(f"symplectic residual {symplectic_residual(M):.3e}")
    for c in classify_eigenvalues(M, tol=tol):
        print(str(c))
    if args.exp:
        from ..matrix_log import exp_representation
        rep = exp_representation(M, blocks=blocks)
        print(f"exp representation: signs {list(rep.signs)}, half dims {list(rep.half_dims)}, "
              f"residual {rep.residual(M):.3e}")
    return EXIT_PASS


def cmd_log(args):
    import scipy.linalg as sla

    from ..matrix_log import exp_representation
    from ..symplectic import infinitesimal_residual
    M, blocks = _matrix_from_args(args)
    rep = exp_representation(M, blocks=blocks)
    print(f"signs {list(rep.signs)}")
    if all(s > 0 for s in rep.signs):
        X = rep.generator()
        np.set_printoptions(precision=12, suppress=True)
        print(X)
        print(f"|exp(X) - M| / |M| = {np.linalg.norm(sla.expm(X) - M) / np.linalg.norm(M):.3e}")
        print(f"Hamiltonian residual {infinitesimal_residual(X):.3e}")
    else:
        print(f"reconstruction residual {rep.residual(M):.3e}")
    return EXIT_PASS


def cmd_index(args):
    from ..index.cz import index_report
    from ..spectral import rotation_function
    from .report import csv_text
    path = parse_path(args.path)
    rep = index_report(path)
    if not rep.nondegenerate:
        w = np.linalg.eigvals(path.monodromy)
        print("degenerate endpoint: 1 is an eigenvalue")
        print("spectrum:", " ".join(f"{z.real:.6g}{z.imag:+.6g}j" for z in w))
        return EXIT_FAIL
    print(f"cz {rep.cz}")
    err = f" +- {rep.mean_error:.3g}" if rep.mean_error else ""
    print(f"mean {rep.mean + 0.0:.12g}{err}")
    print(f"nondegenerate {rep.nondegenerate}")
    print("theta_j " + " ".join(f"{a:.12g}" for a in rep.unit_angles))
    if args.out:
        import scipy.linalg as sla
        ts = np.linspace(0.0, 1.0, 65)
        X = path.generator[1]
        mats = [sla.expm(t * X) for t in ts]
        ph = np.unwrap([np.angle(rotation_function(M)) for M in mats])
        rows = [(t, (p - ph[0]) / np.pi, float(np.min(np.abs(np.linalg.eigvals(M) - 1.0))))
                for t, p, M in zip(ts, ph, mats)]
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "index_path.csv").write_text(csv_text("index_path", rows), encoding="utf-8",
                                            newline="\n")
    return EXIT_PASS


def cmd_primes(args):
    from ..errors import ParameterError
    from ..index.primes import prime_sequence
    try:
        seq = prime_sequence(args.start, args.count)
    except ParameterError as exc:
        raise InputError(str(exc)) from exc
    print("primes " + " ".join(map(str, seq.primes)))
    print("gaps " + " ".join(map(str, seq.gaps)))
    print(f"max gap ratio {seq.max_gap_ratio:.6g}")
    return EXIT_PASS


def cmd_orbit_search(args):
    from ..calculus.orbits import find_periodic_points, seed_grid
    from .scenario import build_hamiltonian, load_scenario
    sc = load_scenario(args.scenario)
    if args.seed is not None:
        sc.seed = args.seed
    _, H = build_hamiltonian(sc)
    R = args.radius
    if R is None:
        R = (H.h.support_radius + 0.5) if not H.h.is_zero else 1.0
    seeds = seed_grid(sc.n, R, args.grid, sc.seed)
    res = find_periodic_points(H, args.k, seeds, tol=args.tol or 1e-10)
    out = {"scenario": sc.name, "k": args.k, "seeds": res.seeds, "failures": res.failures,
           "orbits": [o.as_dict() for o in res.orbits]}
    text = json.dumps(out, sort_keys=True, indent=2) + "\n"
    if args.out:
        p = Path(args.out)
        p.mkdir(parents=True, exist_ok=True)
        (p / "orbits.json").write_text(text, encoding="utf-8", newline="\n")
    sys.stdout.write(text)
    return EXIT_PASS


def cmd_verify(args):
    from .report import write_outputs
    from .scenario import load_scenario
    from .suites import verify
    sc = load_scenario(args.scenario)
    if args.seed is not None:
        sc.seed = args.seed
    if args.tol is not None:
        sc.tolerances["newton"] = args.tol
    report, plots = verify(sc, args.suite, args.threads)
    for r in report.records:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{mark} {r.suite} {r.check}: {r.value} (tol {r.tol})")
    print(f"verdict: {'pass' if report.passed else 'fail'}")
    if args.out:
        for p in write_outputs(report, plots, args.out):
            print(f"wrote {p}")
    return EXIT_PASS if report.passed else EXIT_FAIL


# ---------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="twistpoints",
                                description="Symplectic normal forms, indices and verification suites.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(q):
        q.add_argument("--out", help="output directory")
        q.add_argument("--seed", type=int, help="override the scenario seed")
        q.add_argument("--tol", type=float, help="classification / Newton tolerance")
        q.add_argument("--threads", type=int, default=1, help="worker threads")

    q = sub.add_parser("normal-form", help="classify the spectrum of a symplectic matrix")
    q.add_argument("--matrix", help="matrix file")
    q.add_argument("--block", action="append", help="block spec, e.g. 'R 0.5'")
    q.add_argument("--exp", action="store_true", help="also print the exp representation")
    common(q)
    q.set_defaults(fn=cmd_normal_form)

    q = sub.add_parser("log", help="Hamiltonian logarithm of a symplectic matrix")
    q.add_argument("--matrix")
    q.add_argument("--block", action="append")
    common(q)
    q.set_defaults(fn=cmd_log)

    q = sub.add_parser("index", help="Conley-Zehnder and mean index of a path")
    q.add_argument("path", help="'exp S=<matrix>' or 'gen X=<matrix>'")
    common(q)
    q.set_defaults(fn=cmd_index)

    q = sub.add_parser("primes", help="consecutive primes and their gaps")
    q.add_argument("--start", type=int, default=3)
    q.add_argument("--count", type=int, default=20)
    common(q)
    q.set_defaults(fn=cmd_primes)

    q = sub.add_parser("orbit-search", help="periodic points of a scenario Hamiltonian")
    q.add_argument("--scenario", required=True)
    q.add_argument("--k", type=int, default=1)
    q.add_argument("--grid", type=int, default=21)
    q.add_argument("--radius", type=float)
    common(q)
    q.set_defaults(fn=cmd_orbit_search)

    q = sub.add_parser("verify", help="run verification suites on a scenario")
    q.add_argument("--scenario", required=True, help="scenario file or bundled name")
    q.add_argument("--suite", action="append", help="suite to run (repeatable)")
    common(q)
    q.set_defaults(fn=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    try:
        return args.fn(args)
    except (InputError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TwistPointsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

"""Batch command-line front end.

Problem specs are JSON files; complex numbers are [re, im] pairs and
matrices are row-major.  Structured output is JSON with a deterministic
`result` block and a separate `metadata` block (timestamps live there).

Exit codes: 0 success, 2 validation failure, 3 numerical failure,
4 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .fuchsian import (build_octagon_group, developing_monodromy,
                       automorphy_residual, theta_series)
from .mobius import MobiusMap, classify
from .path_ode import (DEFAULT_TOL, CoefficientField, ContourError, Loop,
                       Path, StiffnessError, integrate_pair, monodromy)
from .jets import RationalFn
from .matrizant import compute_series
from .variation import verify_monodromy_family

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_INTERNAL = 4


class SpecError(ValueError):
    """Malformed problem spec; the message points at the offending field."""


def _c(pair, where):
    try:
        re, im = pair
        return complex(float(re), float(im))
    except (TypeError, ValueError):
        raise SpecError(f"{where}: expected a [re, im] pair, got {pair!r}") from None


def _rational(d, where):
    if not isinstance(d, dict) or "num" not in d or "den" not in d:
        raise SpecError(f"{where}: expected {{'num': [...], 'den': [...]}}")
    try:
        return RationalFn.from_dict(d)
    except Exception as exc:
        raise SpecError(f"{where}: {exc}") from None


def _field(d, where="field"):
    if not isinstance(d, dict):
        raise SpecError(f"{where}: expected an object")
    r = _rational(d.get("r", {"num": [[0.0, 0.0]], "den": [[1.0, 0.0]]}),
                  f"{where}.r")
    basis = [_rational(q, f"{where}.basis[{i}]")
             for i, q in enumerate(d.get("basis", []))]
    return CoefficientField(r, basis)


def _geometry(d, where="geometry"):
    if not isinstance(d, dict):
        raise SpecError(f"{where}: expected an object")
    try:
        return Path.from_dict(d)
    except (KeyError, ValueError) as exc:
        raise SpecError(f"{where}: {exc}") from None


@dataclass(frozen=True)
class ProblemSpec:
    field: CoefficientField
    geometry: Path
    N: int
    tol: float
    h_grid: tuple
    options: dict


def parse_problem_spec(doc, overrides=None) -> ProblemSpec:
    """Validate a spec document (already JSON-decoded) into a ProblemSpec.
    `overrides` are command-line values taking precedence."""
    if not isinstance(doc, dict):
        raise SpecError("top level: expected a JSON object")
    overrides = overrides or {}
    field = _field(doc.get("field", {}))
    geometry = _geometry(doc.get("geometry"))
    t0 = doc.get("t0")
    if t0 is not None and abs(_c(t0, "t0") - geometry.t0) > 1e-12:
        raise SpecError("t0: does not match the geometry basepoint")

    N = overrides.get("order")
    if N is None:
        N = doc.get("order", 1)
    if not isinstance(N, int) or N < 0:
        raise SpecError(f"order: expected a nonnegative integer, got {N!r}")

    tol = overrides.get("tol")
    if tol is None:
        tol = doc.get("tol", DEFAULT_TOL)
    if not (isinstance(tol, (int, float)) and tol > 0):
        raise SpecError(f"tol: expected a positive real, got {tol!r}")

    raw_grid = overrides.get("h_grid")
    if raw_grid is None:
        raw_grid = doc.get("h_grid", [])
    h_grid = []
    for i, entry in enumerate(raw_grid):
        if isinstance(entry, (int, float)):
            h_grid.append(np.full(max(field.d, 1), complex(entry)))
        else:
            if not isinstance(entry, list):
                raise SpecError(f"h_grid[{i}]: expected a number or a list")
            if len(entry) != field.d:
                raise SpecError(
                    f"h_grid[{i}]: {len(entry)} components for a field "
                    f"with {field.d} basis directions")
            h_grid.append(np.array([_c(x, f"h_grid[{i}]") for x in entry]))
    return ProblemSpec(field=field, geometry=geometry, N=N, tol=float(tol),
                       h_grid=tuple(h_grid), options=doc.get("options", {}))


def _cpair(z):
    return [float(np.real(z)), float(np.imag(z))]


def _cmat(m):
    m = np.asarray(m)
    return [[_cpair(x) for x in row] for row in m]


def cmd_monodromy(spec: ProblemSpec):
    loop = spec.geometry
    if not loop.is_closed():
        raise SpecError("geometry: monodromy needs a closed loop")
    if not isinstance(loop, Loop):
        loop = Loop(loop.t0, loop.segments)
    M = monodromy(spec.field, None, loop, spec.tol)
    eigs = np.linalg.eigvals(M.mat)
    trivial = bool(np.linalg.norm(M.mat - np.eye(2)) < 1e-8)
    result = {
        "matrix": _cmat(M.mat),
        "eigenvalues": [_cpair(e) for e in sorted(eigs, key=lambda z: (z.real, z.imag))],
        "trace": _cpair(M.trace()),
        "det_residual": float(abs(M.det() - 1.0)),
        "classification": classify(MobiusMap(M.normalize())),
    }
    if trivial:
        result["note"] = "trivial monodromy"
    return result, EXIT_OK


def cmd_variation(spec: ProblemSpec):
    series = compute_series(spec.field, spec.geometry, spec.N, spec.tol)
    result = {"series": series.to_dict(),
              "radius_estimate": (None if not np.isfinite(series.radius_estimate())
                                  else float(series.radius_estimate()))}
    omegas = []
    for h in spec.h_grid:
        omegas.append({"h": [_cpair(x) for x in h],
                       "omega": _cmat(series.evaluate_omega(h))})
    result["omega_at_grid"] = omegas

    status = EXIT_OK
    if spec.N > 0 and spec.h_grid and spec.geometry.is_closed():
        loop = spec.geometry if isinstance(spec.geometry, Loop) else \
            Loop(spec.geometry.t0, spec.geometry.segments)
        report = verify_monodromy_family(spec.field, loop, spec.N,
                                         spec.h_grid, spec.tol)
        result["convergence"] = report.to_dict()
        if not report.passed():
            status = EXIT_NUMERICAL
    return result, status


def cmd_fuchsian_demo(order, tol):
    group = build_octagon_group()
    result = {
        "circumradius": group.circumradius,
        "relation_residual": float(group.relation_residual()),
        "generators": {name: _cmat(lift.mat) for name, lift
                       in zip(group.GENERATOR_LABELS, group.lifts)},
    }

    seed = [0.0, 0.0, 1.0]  # p(t) = t^2
    automorphy_table = []
    for n in range(2, max(order, 2) + 1):
        theta = theta_series(group, seed, n)
        automorphy_table.append({
            "N": n,
            "terms": theta.n_terms,
            "automorphy_residual": float(automorphy_residual(theta)),
            "sup_norm_estimate": float(theta.sup_norm_estimate()),
        })
    result["automorphy_vs_N"] = automorphy_table

    if order == 0:
        result["note"] = ("zero-order theta truncation of an odd-symmetric "
                          "seed: trivial developing map (identity chart)")
        return result, EXIT_OK

    theta = theta_series(group, seed, order)
    letters = "abcd"
    basepoints = {"ab": 0.15 + 0.6j, "ba": -0.15 + 0.6j,
                  "cd": -0.15 - 0.6j, "dc": 0.15 - 0.6j}
    rho = {}
    table = []
    for w1 in letters:
        for w2 in letters:
            word = w1 + w2
            t0 = basepoints.get(word)
            row = {"pair": word}
            if t0 is None:
                row["status"] = "image basepoint outside the evaluation disc"
            else:
                try:
                    for w in (w1, w2, word):
                        if w not in rho or rho[w][1] != t0:
                            rho[w] = (developing_monodromy(
                                group, theta, w, t0=t0, tol=tol)[0], t0)
                    prod = rho[w1][0] @ rho[w2][0]
                    row["status"] = "ok"
                    row["residual"] = float(rho[word][0].dist(prod))
                except (ValueError, ContourError, StiffnessError) as exc:
                    row["status"] = f"failed: {exc}"
            table.append(row)
    result["homomorphism_table"] = table
    return result, EXIT_OK


def _format_table(result, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(result, dict):
        for k, v in result.items():
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}{k}:")
                lines.append(_format_table(v, indent + 1))
            else:
                lines.append(f"{pad}{k}\t{v}")
    elif isinstance(result, list):
        for v in result:
            if isinstance(v, (dict, list)):
                lines.append(_format_table(v, indent))
                lines.append("")
            else:
                lines.append(f"{pad}{v}")
    else:
        lines.append(f"{pad}{result}")
    return "\n".join(line for line in lines if line is not None)


def _emit(result, status, fmt, out):
    doc = {
        "metadata": {"version": __version__,
                     "generated": datetime.now(timezone.utc).isoformat()},
        "result": result,
        "status": status,
    }
    if fmt == "structured":
        text = json.dumps(doc, indent=2, sort_keys=True)
    else:
        text = _format_table(result)
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def build_parser():
    p = argparse.ArgumentParser(prog="monodromy-lab",
                                description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report to this file")
    common.add_argument("--tol", type=float, help="integration tolerance")
    common.add_argument("--format", choices=("table", "structured"),
                        default="structured", dest="fmt")

    pm = sub.add_parser("monodromy", parents=[common],
                        help="monodromy matrix of a closed loop")
    pm.add_argument("--spec", required=True, help="JSON problem spec")

    pv = sub.add_parser("variation", parents=[common],
                        help="perturbation series and convergence audit")
    pv.add_argument("--spec", required=True, help="JSON problem spec")
    pv.add_argument("--order", type=int, help="series truncation order")
    pv.add_argument("--h-grid", dest="h_grid",
                    help="comma-separated parameter magnitudes")

    pf = sub.add_parser("fuchsian-demo", parents=[common],
                        help="octagon group, theta series, and homomorphism audit")
    pf.add_argument("--order", type=int, default=3,
                    help="theta-series truncation word length")
    return p


def _load_spec(args):
    try:
        with open(args.spec) as f:
            doc = json.load(f)
    except OSError as exc:
        raise SpecError(f"cannot read spec: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec is not valid JSON (line {exc.lineno})") from None
    overrides = {"tol": args.tol}
    if getattr(args, "order", None) is not None:
        overrides["order"] = args.order
    if getattr(args, "h_grid", None):
        try:
            overrides["h_grid"] = [float(x) for x in args.h_grid.split(",")]
        except ValueError:
            raise SpecError("--h-grid: expected comma-separated reals") from None
    return parse_problem_spec(doc, overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "monodromy":
            result, status = cmd_monodromy(_load_spec(args))
        elif args.command == "variation":
            result, status = cmd_variation(_load_spec(args))
        else:
            result, status = cmd_fuchsian_demo(
                args.order, args.tol or DEFAULT_TOL)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ContourError, StiffnessError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    _emit(result, status, args.fmt, args.out)
    return status


if __name__ == "__main__":
    sys.exit(main())

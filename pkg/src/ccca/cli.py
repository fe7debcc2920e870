"""
Command-line front end.

Subcommands: ``train-regression``, ``synth``, ``separate`` and ``cos``.
Signals are CSV files with one channel per row and one sample per column.
Exit status is 0 when every requested run converged, 2 when a run stopped
without converging, and 1 on usage or data errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from . import __version__
from ._backend import BACKEND
from .copulas import CopulaFamily, CopulaModel, sample_copula
from .empirical import cos_matrix
from .exceptions import CCCAError, DataFormatError, SingularMatrixError
from .metrics import isr, snr_db
from .regression import (
    DEFAULT_GRID_POINTS,
    DEFAULT_SAMPLES,
    TRAINING_RANGES,
    read_coefficients,
    train_all,
    write_coefficients,
)
from .separation import AlphaUpdate, SeparationConfig, cca_separate, ccca_separate, validate_signals

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNCONVERGED = 2

REPORT_FORMAT_VERSION = 1
DEFAULT_MIXING = "1,0.8,0.8,1"
TRACE_COLUMNS = ("method", "iteration", "kl", "cos_12", "cos_21", "alpha", "step_norm", "snr_1", "snr_2", "isr")


class UsageError(CCCAError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for "not converged".
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------


def read_matrix_csv(path, header: bool = False) -> np.ndarray:
    """Read a channels x samples matrix; ``header`` skips the first line."""
    path = Path(path)
    rows = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if header and lineno == 1:
                    continue
                if not row or all(not c.strip() for c in row):
                    continue
                values = []
                for col, cell in enumerate(row, start=1):
                    try:
                        val = float(cell)
                    except ValueError:
                        raise DataFormatError(
                            f"{path}: line {lineno}, column {col}: non-numeric value {cell.strip()!r}"
                        ) from None
                    if not math.isfinite(val):
                        raise DataFormatError(f"{path}: line {lineno}, column {col}: non-finite value {cell.strip()!r}")
                    values.append(val)
                if rows and len(values) != len(rows[0][1]):
                    raise DataFormatError(
                        f"{path}: line {lineno}: expected {len(rows[0][1])} columns, found {len(values)}"
                    )
                rows.append((lineno, values))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from exc
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return np.array([v for _, v in rows], dtype=float)


def write_matrix_csv(path, M) -> None:
    """Write a matrix row by row with shortest round-trip float formatting."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for row in M:
                w.writerow([repr(float(x)) for x in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------


def parse_mixing(text: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"--mixing must be four comma-separated numbers, got {text!r}") from None
    if len(vals) != 4 or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"--mixing must be four finite comma-separated numbers, got {text!r}")
    A = np.array(vals).reshape(2, 2)
    if abs(np.linalg.det(A)) <= 1e-12:
        raise UsageError(f"mixing matrix {A.tolist()} is singular")
    return A


def _families(text):
    if not text:
        return list(TRAINING_RANGES)
    fams = [CopulaFamily.parse(t) for t in text.split(",") if t.strip()]
    for f in fams:
        if f not in TRAINING_RANGES:
            raise UsageError(f"family {f.value!r} has no regression (it has no parameter)")
    return fams


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_coeffs(path, family: CopulaFamily):
    """Return (coefficients, file info dict) or (None, None) when not needed."""
    if family is CopulaFamily.INDEPENDENCE:
        return None, None
    if path is None:
        raise UsageError(f"--coeffs is required for CCCA with the {family.value} family")
    table = read_coefficients(path)
    if family not in table:
        raise DataFormatError(f"{path}: no coefficients for family {family.value!r}")
    rc = table[family]
    info = {
        "path": str(path),
        "sha256": _sha256(path),
        "a1": rc.a1,
        "a2": rc.a2,
        "a3": rc.a3,
        "alpha_min": rc.alpha_min,
        "alpha_max": rc.alpha_max,
        "seed": rc.seed,
    }
    return rc, info


def _config(args, family, coeffs) -> SeparationConfig:
    return SeparationConfig(
        family=family,
        coeffs=coeffs,
        mu=args.mu,
        epsilon=args.epsilon,
        max_iter=args.max_iter,
        fd_step=args.fd_step,
        alpha_update=AlphaUpdate(args.alpha_update),
    )


# ---------------------------------------------------------------------------
# Running and reporting
# ---------------------------------------------------------------------------


def _num(x):
    """JSON-safe float (NaN/inf become null)."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _run_method(method, X, config, sources=None, mixing=None):
    fn = ccca_separate if method == "ccca" else cca_separate
    try:
        W, Y, trace = fn(X, config, sources=sources, mixing=mixing)
        error = None
    except SingularMatrixError as exc:
        trace = getattr(exc, "trace", None)
        if trace is None or not trace.records:
            raise
        trace.best_iteration = int(np.argmin(trace.kl))
        W = trace.records[trace.best_iteration].W.copy()
        Y = W @ X
        error = str(exc)
    return W, Y, trace, error


def _run_summary(method, X, W, Y, trace, error, sources=None, mixing=None):
    last = trace.records[-1]
    out = {
        "method": method,
        "status": trace.status,
        "converged": bool(trace.converged),
        "iterations": len(trace),
        "best_iteration": trace.best_iteration,
        "final_kl": _num(trace.records[trace.best_iteration].kl),
        "final_alpha": _num(trace.records[trace.best_iteration].alpha),
        "final_cos": [_num(c) for c in last.cos],
        "wall_time_s": trace.wall_time,
        "W": W.tolist(),
    }
    if error:
        out["error"] = error
    if sources is not None:
        snr_out = snr_db(Y, sources)
        snr_in = snr_db(X, sources)
        out["snr_db"] = snr_out.tolist()
        out["input_snr_db"] = snr_in.tolist()
        out["snr_improvement_db"] = (snr_out - snr_in).tolist()
    if mixing is not None:
        out["isr"] = isr(W @ mixing)
        out["G"] = (W @ mixing).tolist()
    if sources is None:
        out["cos_estimates"] = cos_matrix(Y).tolist()
    out["trace"] = [
        {
            "iteration": r.iteration,
            "kl": _num(r.kl),
            "cos": [_num(c) for c in r.cos],
            "alpha": _num(r.alpha),
            "step_norm": _num(r.step_norm),
            **({"snr_db": r.snr_db.tolist()} if r.snr_db is not None else {}),
            **({"isr": _num(r.isr)} if r.isr is not None else {}),
        }
        for r in trace.records
    ]
    return out


def _write_trace(path, runs) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for run in runs:
                for r in run["trace"]:
                    snr = r.get("snr_db", [None, None])
                    w.writerow(
                        [run["method"], r["iteration"], r["kl"], r["cos"][0], r["cos"][1], r["alpha"],
                         r["step_norm"], snr[0], snr[1], r.get("isr")]
                    )
    except OSError as exc:
        raise OSError(f"cannot write trace {path}: {exc.strerror}") from exc


def _emit(args, report) -> int:
    runs = report["runs"]
    if args.report:
        try:
            Path(args.report).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write report {args.report}: {exc.strerror}") from exc
    if args.trace:
        _write_trace(args.trace, runs)
    for run in runs:
        line = f"{run['method']}: {run['status']} after {run['iterations']} iterations, KL {run['final_kl']:.5g}"
        if "snr_db" in run:
            line += ", SNR " + " / ".join(f"{v:.2f}" for v in run["snr_db"]) + " dB"
        if "isr" in run:
            line += f", ISR {run['isr']:.4g}"
        print(line)
    return EXIT_OK if all(r["converged"] for r in runs) else EXIT_UNCONVERGED


def _methods(choice):
    return ["ccca", "cca"] if choice == "both" else [choice]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_train_regression(args) -> int:
    fams = _families(args.families)
    coeffs = train_all(fams, args.grid_points, args.samples_per_point, args.seed)
    write_coefficients(coeffs, args.output)
    for fam, rc in coeffs.items():
        print(f"{fam.value}: alpha = {rc.a1:.6g} c^2 + {rc.a2:.6g} c + {rc.a3:.6g}")
    print(f"wrote {args.output}")
    return EXIT_OK


def synth_sources(family, alpha, T, seed, margins="uniform") -> np.ndarray:
    """Seeded 2 x T sources with the given copula, standardised to zero mean and unit variance."""
    model = CopulaModel(family, alpha)
    U = sample_copula(model, T, seed).T
    if margins == "gaussian":
        U = ndtri(U)
    return (U - U.mean(axis=1, keepdims=True)) / U.std(axis=1, ddof=1, keepdims=True)


def cmd_synth(args) -> int:
    family = CopulaFamily.parse(args.family)
    if args.samples < 10:
        raise UsageError(f"--samples must be at least 10, got {args.samples}")
    if not args.noise_std >= 0:
        raise UsageError(f"--noise-std must be >= 0, got {args.noise_std}")
    A = parse_mixing(args.mixing)
    methods = _methods(args.method)
    coeffs, cinfo = (None, None)
    if "ccca" in methods:
        coeffs, cinfo = _load_coeffs(args.coeffs, family)
    alpha = 0.0 if family is CopulaFamily.INDEPENDENCE else args.alpha
    if alpha is None:
        raise UsageError(f"--alpha is required for the {family.value} family")
    S = synth_sources(family, alpha, args.samples, args.seed, args.margins)
    X = A @ S
    if args.noise_std > 0:
        X = X + np.random.default_rng([args.seed, 1]).normal(0.0, args.noise_std, size=X.shape)
    if args.save_observations:
        write_matrix_csv(args.save_observations, X)
    if args.save_sources:
        write_matrix_csv(args.save_sources, S)

    runs = []
    for m in methods:
        config = _config(args, family, coeffs if m == "ccca" else None)
        W, Y, trace, err = _run_method(m, X, config, sources=S, mixing=A)
        runs.append(_run_summary(m, X, W, Y, trace, err, sources=S, mixing=A))
    report = {
        "format_version": REPORT_FORMAT_VERSION,
        "command": "synth",
        "version": __version__,
        "backend": BACKEND,
        "seed": args.seed,
        "spec": {
            "family": family.value,
            "alpha": alpha,
            "samples": args.samples,
            "mixing": A.tolist(),
            "noise_std": args.noise_std,
            "margins": args.margins,
            "method": args.method,
        },
        "config": _config(args, family, None).as_dict(),
        "coefficients": cinfo,
        "runs": runs,
    }
    return _emit(args, report)


def cmd_separate(args) -> int:
    family = CopulaFamily.parse(args.family)
    X = read_matrix_csv(args.input, args.header)
    if X.shape[0] != 2:
        raise UsageError(
            f"{args.input}: unsupported dimension p={X.shape[0]}; only 2-channel separation is "
            "implemented, run channel pairs separately"
        )
    X = validate_signals(X)
    S = None
    A = None
    if args.truth:
        S = read_matrix_csv(args.truth, args.header)
        if S.shape != X.shape:
            raise DataFormatError(f"{args.truth}: truth has shape {S.shape}, observations {X.shape}")
        S = validate_signals(S, "truth")
        A = parse_mixing(args.mixing) if args.mixing else X @ np.linalg.pinv(S)
    methods = _methods(args.method)
    coeffs, cinfo = (None, None)
    if "ccca" in methods:
        coeffs, cinfo = _load_coeffs(args.coeffs, family)
    runs = []
    for m in methods:
        config = _config(args, family, coeffs if m == "ccca" else None)
        W, Y, trace, err = _run_method(m, X, config, sources=S, mixing=A)
        runs.append(_run_summary(m, X, W, Y, trace, err, sources=S, mixing=A))
        if args.output:
            out = Path(args.output)
            target = out if len(methods) == 1 else out.with_name(f"{out.stem}_{m}{out.suffix}")
            write_matrix_csv(target, Y)
    report = {
        "format_version": REPORT_FORMAT_VERSION,
        "command": "separate",
        "version": __version__,
        "backend": BACKEND,
        "seed": None,
        "input": {"path": str(args.input), "sha256": _sha256(args.input), "channels": 2, "samples": X.shape[1]},
        "truth": {"path": str(args.truth), "sha256": _sha256(args.truth)} if args.truth else None,
        "mixing": A.tolist() if A is not None else None,
        "config": _config(args, family, None).as_dict(),
        "coefficients": cinfo,
        "cos_observations": cos_matrix(X).tolist(),
        "runs": runs,
    }
    return _emit(args, report)


def cmd_cos(args) -> int:
    X = read_matrix_csv(args.input, args.header)
    if X.shape[0] < 2:
        raise UsageError(f"{args.input}: need at least 2 channels, got {X.shape[0]}")
    M = cos_matrix(X)
    for row in M:
        print(" ".join(f"{v:.6f}" for v in row))
    if args.output:
        write_matrix_csv(args.output, M)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_separation_flags(p):
    p.add_argument("--family", required=True, help="source copula family")
    p.add_argument("--coeffs", help="coefficients file from train-regression (needed for ccca)")
    p.add_argument("--method", choices=["ccca", "cca", "both"], default="ccca")
    p.add_argument("--mu", type=float, default=0.1, help="gradient step size")
    p.add_argument("--epsilon", type=float, default=1e-3, help="stopping tolerance on ||W_k+1 - W_k||_F")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--fd-step", type=float, default=1e-4, help="finite-difference step, scaled by max(1, ||W||_inf)")
    p.add_argument("--alpha-update", choices=[a.value for a in AlphaUpdate], default=AlphaUpdate.PER_ITERATION.value)
    p.add_argument("--report", help="write a JSON report here")
    p.add_argument("--trace", help="write the per-iteration trace CSV here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ccca", description="Copula component analysis for dependent sources.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train-regression", help="fit the CoS -> alpha regression for each family")
    p.add_argument("--families", help="comma-separated list (default: gumbel,clayton,frank,gaussian)")
    p.add_argument("--output", default="coefficients.ini")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-points", type=int, default=DEFAULT_GRID_POINTS)
    p.add_argument("--samples-per-point", type=int, default=DEFAULT_SAMPLES)
    p.set_defaults(func=cmd_train_regression)

    p = sub.add_parser("synth", help="simulate mixed copula sources and separate them")
    _add_separation_flags(p)
    p.add_argument("--alpha", type=float, help="true copula parameter")
    p.add_argument("--samples", type=int, default=500, help="number of samples T")
    p.add_argument("--mixing", default=DEFAULT_MIXING, help="a11,a12,a21,a22")
    p.add_argument("--noise-std", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--margins", choices=["uniform", "gaussian"], default="uniform")
    p.add_argument("--save-observations", help="write the mixtures X as CSV")
    p.add_argument("--save-sources", help="write the sources S as CSV")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("separate", help="separate a recorded 2-channel mixture")
    p.add_argument("input", help="observations CSV, one channel per row")
    _add_separation_flags(p)
    p.add_argument("--truth", help="true sources CSV; enables SNR and ISR")
    p.add_argument("--mixing", help="known mixing a11,a12,a21,a22 for ISR (default: least squares from truth)")
    p.add_argument("--header", action="store_true", help="skip the first line of each CSV")
    p.add_argument("--output", help="write the separated signals as CSV")
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("cos", help="pairwise CoS matrix of the rows of a CSV")
    p.add_argument("input")
    p.add_argument("--header", action="store_true")
    p.add_argument("--output", help="also write the matrix as CSV")
    p.set_defaults(func=cmd_cos)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CCCAError, ValueError, OSError) as exc:
        print(f"ccca: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

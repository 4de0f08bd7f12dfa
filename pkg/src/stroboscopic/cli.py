"""Command-line front end.

Exit codes: 0 success, 2 bad input, 3 domain invariant violated,
4 observability or time-grid condition not met (or other numerical failure).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from stroboscopic.algebra import SIGMA1, SIGMA2, SIGMA3, Superoperator
from stroboscopic.channels import KrausFamilySpec, Model
from stroboscopic.config import Tolerances
from stroboscopic.errors import InvariantViolation, NumericalError, RankDeficientError
from stroboscopic.generators import (
    check_hermiticity_preservation,
    check_trace_preservation,
    model_generator,
    parameter_sweep,
    spectrum_report,
)
from stroboscopic.jsonio import ParseError, decode_matrix, dumps, encode_matrix, parse_model, read_json
from stroboscopic.observability import (
    AlphaFunctions,
    ObservableSet,
    is_reconstructible,
    krylov_dims,
    suggest_observables,
    validate_time_grid,
)
from stroboscopic.reconstruction import (
    MeasurementRecord,
    bloch_to_density,
    check_density_matrix,
    dephasing_closed_form,
    reconstruct_alpha,
    reconstruct_direct,
    simulate_measurements,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INVARIANT = 3
EXIT_MATH = 4


def fmt_c(z) -> str:
    z = complex(z)
    re = 0.0 if abs(z.real) < 5e-13 else z.real
    if abs(z.imag) < 5e-13:
        return f"{re:.6g}"
    return f"{re:.6g}{z.imag:+.6g}j"


def _pair(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParseError(f"expected comma-separated numbers, got {text!r}") from None


def _tolerances(args) -> Tolerances:
    return Tolerances(args.tol_cluster, args.tol_rank, args.tol_det)


def _load_model(path) -> tuple[Superoperator, KrausFamilySpec | None]:
    return parse_model(read_json(path))


def _load_observables(path) -> ObservableSet:
    data = read_json(path)
    if isinstance(data, dict):
        data = data.get("observables")
    if not isinstance(data, list) or not data:
        raise ParseError("observables file must be a non-empty list of matrices (or an object with 'observables')")
    return ObservableSet(tuple(decode_matrix(q) for q in data))


def _load_state(path) -> np.ndarray:
    data = read_json(path)
    if isinstance(data, dict):
        if "bloch" in data:
            s = np.asarray(data["bloch"], dtype=float)
            if s.shape != (3,):
                raise ParseError("bloch must have three components")
            rho = bloch_to_density(s)
        elif "matrix" in data:
            rho = decode_matrix(data["matrix"])
        else:
            raise ParseError("state file needs 'matrix' or 'bloch'")
    else:
        rho = decode_matrix(data)
    return check_density_matrix(rho)


def _describe(spec: KrausFamilySpec | None, l: Superoperator) -> str:
    if spec is None:
        return f"custom generator, N={l.hilbert_dim}"
    extra = f", a={spec.a:g}" if spec.a is not None else ""
    return f"{spec.model.value} (gamma={spec.gamma:g}{extra}), N={l.hilbert_dim}"


def _emit(args, payload: dict, text: str):
    print(dumps(payload) if args.json else text)


def cmd_analyze(args) -> int:
    l, spec = _load_model(args.model)
    tol = _tolerances(args)
    report = spectrum_report(l, tol.cluster_rel, tol.rank)
    tp_ok, tp_defect = check_trace_preservation(l)
    hp_ok, hp_defect = check_hermiticity_preservation(l)
    payload = {
        "clusters": [
            {"eigenvalue": _pair(c.eigenvalue), "algebraic_mult": c.algebraic_mult, "geometric_mult": c.geometric_mult}
            for c in report.clusters
        ],
        "eta": report.eta,
        "mu": report.mu,
        "degenerate": report.degenerate,
        "minimal_polynomial": [_pair(c) for c in report.minimal_polynomial],
        "trace_preserving": {"ok": tp_ok, "defect": tp_defect},
        "hermiticity_preserving": {"ok": hp_ok, "defect": hp_defect},
    }
    lines = [f"generator: {_describe(spec, l)}", "eigenvalue clusters (algebraic / geometric):"]
    lines += [f"  {fmt_c(c.eigenvalue):>14}   {c.algebraic_mult} / {c.geometric_mult}" for c in report.clusters]
    lines += [
        f"index of cyclicity eta = {report.eta}",
        f"minimal polynomial degree mu = {report.mu}",
        f"degenerate spectrum: {'yes' if report.degenerate else 'no'}",
        f"trace preserving: {'ok' if tp_ok else 'VIOLATED'} (defect {tp_defect:.2e})",
        f"hermiticity preserving: {'ok' if hp_ok else 'VIOLATED'} (defect {hp_defect:.2e})",
    ]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if tp_ok and hp_ok else EXIT_INVARIANT


def cmd_observables(args) -> int:
    l, _ = _load_model(args.model)
    tol = _tolerances(args)
    if args.suggest:
        qs = suggest_observables(l, seed=args.seed, tol_rank=tol.rank)
    else:
        qs = _load_observables(args.check)
    if qs.dim != l.hilbert_dim:
        raise ParseError(f"observables act on N={qs.dim}, generator on N={l.hilbert_dim}")
    check = is_reconstructible(l, qs, tol.rank)
    dims = krylov_dims(l, qs, tol.rank)
    payload = {
        "observables": [encode_matrix(q) for q in qs],
        "ok": check.ok,
        "achieved_dim": check.achieved_dim,
        "required_dim": check.required_dim,
        "krylov_dims": dims,
    }
    lines = [f"{'suggested' if args.suggest else 'checked'} {len(qs)} observable(s):"]
    for i, q in enumerate(qs, 1):
        lines.append(f"  Q{i} = " + np.array2string(np.round(q, 6), separator=", ").replace("\n", "\n       "))
    lines += [
        f"reconstructible: {'yes' if check.ok else 'no'} ({check.achieved_dim}/{check.required_dim} dimensions spanned)",
        "Krylov dimensions (instants needed per observable): " + ", ".join(map(str, dims)),
    ]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if check.ok else EXIT_MATH


def cmd_plan(args) -> int:
    l, _ = _load_model(args.model)
    tol = _tolerances(args)
    times = _floats(args.times)
    alphas = AlphaFunctions(l, tol.cluster_rel, tol.rank)
    try:
        cert = validate_time_grid(l, times, tol.det, alphas)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    payload = {
        "times": list(cert.times),
        "alpha_matrix": cert.alpha_matrix.tolist(),
        "determinant": cert.determinant,
        "valid": cert.valid,
    }
    lines = [f"times: {', '.join(f'{t:g}' for t in cert.times)}", "alpha matrix [alpha_k(t_j)] (rows: t_j):"]
    lines += ["  " + "  ".join(f"{x: .6e}" for x in row) for row in cert.alpha_matrix]
    lines += [f"determinant: {cert.determinant:.6e}", f"valid: {'yes' if cert.valid else 'no'}"]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if cert.valid else EXIT_MATH


def cmd_simulate(args) -> int:
    l, _ = _load_model(args.model)
    rho0 = _load_state(args.state)
    qs = _load_observables(args.observables)
    record = simulate_measurements(l, rho0, qs, _floats(args.times), args.noise, args.seed)
    text = dumps(record.to_dict())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _closed_form(spec: KrausFamilySpec | None, record: MeasurementRecord):
    if spec is None or spec.model is not Model.DEPHASING:
        raise ParseError("closed-form reconstruction needs the built-in dephasing model")
    qs = record.observables
    if len(qs) != 2 or np.abs(qs[0] - SIGMA1).max() > 1e-12 or np.abs(qs[1] - (SIGMA2 + SIGMA3)).max() > 1e-12:
        raise ParseError("closed-form reconstruction needs observables [sigma1, sigma2 + sigma3]")
    if len(record.times) < 2:
        raise ParseError("closed-form reconstruction needs two instants")
    t1, t2 = record.times[:2]
    m = record.values
    return dephasing_closed_form(spec.gamma, t1, t2, m[0, 0], m[1, 0], m[1, 1])


def cmd_reconstruct(args) -> int:
    l, spec = _load_model(args.model)
    tol = _tolerances(args)
    record = MeasurementRecord.from_dict(read_json(args.record))
    if record.observables.dim != l.hilbert_dim:
        raise ParseError(f"record observables act on N={record.observables.dim}, generator on N={l.hilbert_dim}")
    if args.method == "alpha":
        result = reconstruct_alpha(l, record, tol.rank, tol.det)
    elif args.method == "direct":
        result = reconstruct_direct(l, record, tol.rank)
    else:
        result = _closed_form(spec, record)
    payload = result.to_dict()
    lines = [f"method: {result.method.value}"]
    if result.rho0.shape == (2, 2):
        lines.append("Bloch vector: (" + ", ".join(f"{x:.10g}" for x in result.bloch) + ")")
    lines.append("rho(0) =\n  " + np.array2string(result.rho0, precision=10, separator=", ").replace("\n", "\n  "))
    lines += [f"residual: {result.residual:.3e}", f"condition: {result.condition:.3e}"]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def _a_range(text: str) -> list[float]:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise ParseError(f"--a-range expects lo:hi:step or a single value, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise ParseError("--a-range needs step > 0 and hi >= lo")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 12) for k in range(count)]


def cmd_sweep(args) -> int:
    _, spec = _load_model(args.model)
    if spec is None or spec.model is not Model.ONE_PARAMETRIC:
        raise ParseError("sweep needs a one_parametric model file")
    values = _a_range(args.a_range)
    if any(not 0 <= a <= 2 for a in values):
        raise ParseError("a values must lie in [0, 2]")
    tol = _tolerances(args)
    rows = parameter_sweep(spec.gamma, values, tol.cluster_rel, tol.rank)
    payload = {
        "gamma": spec.gamma,
        "rows": [
            {
                "a": a,
                "eigenvalues": [_pair(c.eigenvalue) for c in r.clusters for _ in range(c.algebraic_mult)],
                "eta": r.eta,
                "mu": r.mu,
                "degenerate": r.degenerate,
            }
            for a, r in rows
        ],
    }
    lines = [f"one_parametric sweep, gamma={spec.gamma:g}   (* = degenerate)", f"{'a':>8}  {'eta':>3}  {'mu':>2}  eigenvalues"]
    for a, r in rows:
        eig = ", ".join(fmt_c(c.eigenvalue) + (f" (x{c.algebraic_mult})" if c.algebraic_mult > 1 else "") for c in r.clusters)
        lines.append(f"{a:>8.4g}  {r.eta:>3}  {r.mu:>2}  {eig}{'  *' if r.degenerate else ''}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_demo(args) -> int:
    spec = KrausFamilySpec(Model.DEPHASING, args.gamma)
    l = model_generator(spec)
    report = spectrum_report(l)
    qs = ObservableSet((SIGMA1, SIGMA2 + SIGMA3))
    check = is_reconstructible(l, qs)
    dims = krylov_dims(l, qs)
    alphas = AlphaFunctions(l)
    t1, t2 = args.t1, args.t2
    cert = validate_time_grid(l, [t1, t2], alphas=alphas)
    rho0 = bloch_to_density(_floats(args.bloch))
    record = simulate_measurements(l, rho0, qs, [t1, t2])
    closed = dephasing_closed_form(args.gamma, t1, t2, record.values[0, 0], record.values[1, 0], record.values[1, 1])
    general = reconstruct_alpha(l, record)
    payload = {
        "generator": encode_matrix(l.matrix),
        "eta": report.eta,
        "mu": report.mu,
        "minimal_polynomial": [_pair(c) for c in report.minimal_polynomial],
        "observables": [encode_matrix(q) for q in qs],
        "reconstructible": check.ok,
        "krylov_dims": dims,
        "alpha": {str(t): alphas(t).tolist() for t in (t1, t2)},
        "determinant": cert.determinant,
        "record": record.to_dict(),
        "closed_form_bloch": closed.bloch.tolist(),
        "alpha_pipeline_bloch": general.bloch.tolist(),
        "true_bloch": [float(x) for x in _floats(args.bloch)],
    }
    g = args.gamma
    lines = [
        f"dephasing, gamma = {g:g}",
        "generator L = -gamma diag(0, 1, 1, 0):",
        "  " + np.array2string(l.matrix.real + 0.0, separator=", ").replace("\n", "\n  "),
        "spectrum: " + ", ".join(f"{fmt_c(c.eigenvalue)} ({c.algebraic_mult}/{c.geometric_mult})" for c in report.clusters),
        f"index of cyclicity eta = {report.eta}, minimal polynomial degree mu = {report.mu}",
        "minimal polynomial: " + " ".join(fmt_c(c) for c in report.minimal_polynomial) + "  (L^2 + gamma L = 0)",
        f"observables Q1 = sigma1, Q2 = sigma2 + sigma3: reconstructible = {check.ok}, Krylov dims = {dims}",
        f"alpha(t) = (1, (1 - exp(-gamma t)) / gamma): alpha({t1:g}) = {alphas(t1).round(10).tolist()}, "
        f"alpha({t2:g}) = {alphas(t2).round(10).tolist()}",
        f"time grid ({t1:g}, {t2:g}): det = {cert.determinant:.10g}, valid = {cert.valid}",
        f"record: m1(t1) = {record.values[0, 0]:.10g}, m2(t1) = {record.values[1, 0]:.10g}, m2(t2) = {record.values[1, 1]:.10g}",
        "closed-form Bloch vector:   (" + ", ".join(f"{x:.10g}" for x in closed.bloch) + ")",
        "alpha-pipeline Bloch vector: (" + ", ".join(f"{x:.10g}" for x in general.bloch) + ")",
    ]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable JSON output")
    common.add_argument("--tol-cluster", type=float, default=Tolerances.cluster_rel, help="relative eigenvalue clustering tolerance")
    common.add_argument("--tol-rank", type=float, default=Tolerances.rank, help="relative numerical rank tolerance")
    common.add_argument("--tol-det", type=float, default=Tolerances.det, help="relative time-grid determinant tolerance")

    parser = argparse.ArgumentParser(prog="stroboscopic", description="Stroboscopic tomography of open quantum systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="spectrum, eta and mu of a generator")
    p.add_argument("model")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("observables", parents=[common], help="suggest or check an observable set")
    p.add_argument("model")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--suggest", action="store_true")
    g.add_argument("--check", metavar="FILE")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_observables)

    p = sub.add_parser("plan", parents=[common], help="certify a time grid")
    p.add_argument("model")
    p.add_argument("--times", required=True, help="comma-separated instants, exactly mu of them")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", parents=[common], help="simulate a measurement record")
    p.add_argument("model")
    p.add_argument("--state", required=True)
    p.add_argument("--observables", required=True)
    p.add_argument("--times", required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", parents=[common], help="reconstruct rho(0) from a record")
    p.add_argument("model")
    p.add_argument("--record", required=True, help="record JSON file, or - for stdin")
    p.add_argument("--method", choices=["alpha", "direct", "closed-form"], default="alpha")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("sweep", parents=[common], help="spectrum of the one-parametric family over a")
    p.add_argument("model")
    p.add_argument("--a-range", required=True, help="lo:hi:step (inclusive) or a single value")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("demo", parents=[common], help="worked examples")
    p.add_argument("example", choices=["dephasing"])
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--t1", type=float, default=0.5)
    p.add_argument("--t2", type=float, default=1.0)
    p.add_argument("--bloch", default="0.3,0.4,0.5")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"error: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ParseError, ValueError, KeyError, TypeError) as exc:
        print(f"error: bad input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RankDeficientError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())

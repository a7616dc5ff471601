"""Command-line entry point: ``zzc <command> ...``.

Exit codes: 0 success, 1 usage error, 2 data error (bad/missing files, schema
violations, unreachable estimation targets).  Output directories default to
``$ZZCOMPILER_OUT`` (or ``./zzc-out``) when ``--out`` is omitted.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    COHERENT_CHANNELS,
    STOCHASTIC_CHANNELS,
    RateEstimate,
    estimate_coherent_rate,
    estimate_stochastic_rate,
    h_aware,
    h_unaware,
    hellinger_infidelity,
    offloading_category,
    offloading_ratio,
    running_mean,
    sweep,
    wilson_lower,
)
from .circuit import SchemaError, circuit_to_dict, load_circuit
from .noisysim import NoiseSpec, OutputDistribution, ideal_distribution, sample
from .pipeline import CompileOptions, ErrorMatrix, compile_circuit, reduction_ratio
from .qvgen import generate_many

ENV_OUT = "ZZCOMPILER_OUT"
ARMS = ("fixed", "parameterized", "mirror", "ranked", "approx")
BUILTIN_MATRICES = ("bad_pairs", "bad_qubit")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# --------------------------------------------------------------------------
# file helpers


def _out_dir(arg) -> Path:
    out = Path(arg or os.environ.get(ENV_OUT, "zzc-out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(path: Path, doc) -> None:
    _write_atomic(path, json.dumps(doc, indent=1))


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    _write_atomic(path, buf.getvalue())


def _read_json(path: Path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None


def _inputs(path) -> tuple[list[str], list[Path]]:
    """Ids and files from a manifest directory, a manifest file or a single file."""
    p = Path(path)
    if p.is_dir():
        p = p / "manifest.json"
    if not p.exists():
        raise DataError(f"{path}: no such file or directory")
    doc = _read_json(p)
    if isinstance(doc, dict) and "items" in doc:
        return [it["id"] for it in doc["items"]], [p.parent / it["file"] for it in doc["items"]]
    return [p.stem], [p]


def _load_circuits(path):
    ids, files = _inputs(path)
    circuits = []
    for f in files:
        try:
            circuits.append(load_circuit(f))
        except FileNotFoundError:
            raise DataError(f"{f}: no such file") from None
        except SchemaError as exc:
            raise DataError(f"{f}: {exc}") from None
    return ids, circuits


def _load_counts(path):
    ids, files = _inputs(path)
    dists = []
    for f in files:
        doc = _read_json(f)
        try:
            dists.append(OutputDistribution.from_counts(doc))
        except (ValueError, TypeError) as exc:
            raise DataError(f"{f}: {exc}") from None
    return ids, dists


def _manifest(kind: str, items, **meta) -> dict:
    return {"kind": kind, **meta, "items": items}


def load_error_matrix(spec: str) -> ErrorMatrix:
    """A built-in name (``bad_pairs``, ``bad_qubit``) or a path to a JSON file."""
    try:
        if spec in BUILTIN_MATRICES:
            text = resources.files("zzcompiler.data").joinpath(f"{spec}.json").read_text(encoding="utf-8")
            return ErrorMatrix.from_dict(json.loads(text))
        return ErrorMatrix.from_dict(_read_json(Path(spec)))
    except SchemaError as exc:
        raise DataError(f"{spec}: {exc}") from None


def arm_options(arm: str, error_matrix: ErrorMatrix | None = None, theta_min: float = 0.10,
                strategy: str = "brute_force") -> CompileOptions:
    if arm == "fixed":
        return CompileOptions(gateset="fixed")
    if arm == "parameterized":
        return CompileOptions()
    if arm == "mirror":
        return CompileOptions(mirror=True)
    if arm == "ranked":
        if error_matrix is None:
            raise UsageError("the ranked arm needs --error-matrix")
        return CompileOptions(mirror=True, ranking=error_matrix, assignment_strategy=strategy)
    if arm == "approx":
        return CompileOptions(mirror=True, theta_min=theta_min)
    raise UsageError(f"unknown arm {arm!r}; choose from {ARMS}")


# --------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    if args.count < 0:
        raise UsageError("--count must be >= 0")
    out = _out_dir(args.out)
    items = []
    for i, c in enumerate(generate_many(args.n, args.count, args.seed, args.depth)):
        name = f"qv_{i:04d}.json"
        _write_json(out / name, circuit_to_dict(c))
        items.append({"id": f"qv_{i:04d}", "file": name})
    depth = args.depth if args.depth is not None else args.n
    _write_json(out / "manifest.json", _manifest("circuits", items, n=args.n, depth=depth, seed=args.seed))
    print(f"wrote {len(items)} circuits to {out}")
    return 0


def _compile_options(args) -> CompileOptions:
    em = load_error_matrix(args.error_matrix) if args.error_matrix else None
    if args.options:
        doc = _read_json(Path(args.options))
        try:
            return CompileOptions(
                gateset=doc.get("gateset", "parameterized"),
                mirror=bool(doc.get("mirror", False)),
                theta_min=float(doc.get("theta_min", 0.0)),
                ranking=em,
                assignment_strategy=doc.get("assignment_strategy", "brute_force"),
                drop_diagonals=bool(doc.get("drop_diagonals", True)),
            )
        except (ValueError, TypeError) as exc:
            raise DataError(f"{args.options}: {exc}") from None
    return arm_options(args.arm, em, args.theta_min, args.strategy)


def cmd_compile(args) -> int:
    opts = _compile_options(args)
    ids, circuits = _load_circuits(args.inp)
    out = _out_dir(args.out)
    items = []
    for cid, c in zip(ids, circuits):
        try:
            rep = compile_circuit(c, opts)
        except ValueError as exc:
            raise DataError(f"{cid}: {exc}") from None
        _write_json(out / f"{cid}.json", circuit_to_dict(rep.circuit))
        _write_json(out / f"{cid}.report.json", rep.to_dict())
        items.append({"id": cid, "file": f"{cid}.json", "report": f"{cid}.report.json"})
    meta = {"gateset": opts.gateset, "mirror": opts.mirror, "theta_min": opts.theta_min,
            "ranked": opts.ranking is not None}
    _write_json(out / "manifest.json", _manifest("circuits", items, options=meta))
    print(f"compiled {len(items)} circuits into {out}")
    return 0


def _noise_from_args(args) -> NoiseSpec:
    if args.noise:
        try:
            noise = NoiseSpec.load(args.noise)
        except FileNotFoundError:
            raise DataError(f"{args.noise}: no such file") from None
        except (SchemaError, ValueError, json.JSONDecodeError) as exc:
            raise DataError(f"{args.noise}: {exc}") from None
    else:
        noise = NoiseSpec()
    if args.seed is not None:
        noise = NoiseSpec(noise.stochastic, noise.eps, noise.coherent, noise.t_zz, noise.t_1q, args.seed)
    return noise


def cmd_simulate(args) -> int:
    if args.shots < 1:
        raise UsageError("--shots must be >= 1")
    noise = _noise_from_args(args)
    ids, circuits = _load_circuits(args.inp)
    out = _out_dir(args.out)
    items = []
    for i, (cid, c) in enumerate(zip(ids, circuits)):
        try:
            d = sample(c, noise, args.shots, i)
        except ValueError as exc:
            raise DataError(f"{cid}: {exc}") from None
        _write_atomic(out / f"{cid}.counts.json", d.to_json())
        if args.csv:
            _write_atomic(out / f"{cid}.counts.csv", d.to_csv())
        items.append({"id": cid, "file": f"{cid}.counts.json"})
    _write_json(out / "manifest.json", _manifest("counts", items, shots=args.shots, noise=noise.to_dict()))
    print(f"simulated {len(items)} circuits into {out}")
    return 0


def _reports(path, ids):
    """Report dicts for ``ids`` from a compile manifest directory."""
    p = Path(path)
    mf = _read_json(p / "manifest.json" if p.is_dir() else p)
    base = p if p.is_dir() else p.parent
    by_id = {it["id"]: it for it in mf.get("items", [])}
    out = []
    for cid in ids:
        if cid not in by_id or "report" not in by_id[cid]:
            raise DataError(f"{path}: no compile report for circuit {cid}")
        out.append(_read_json(base / by_id[cid]["report"]))
    return out


def _bad_angle(report: dict, bad_pairs) -> float:
    keys = {frozenset(p) for p in bad_pairs}
    return sum(r["theta"] for r in report["theta_by_pair"] if frozenset((r["q1"], r["q2"])) in keys)


def analyze(ids, measured, circuits, out: Path, reports=None, reference=None, bad_pairs=None, z=2.0):
    """Write per-circuit, aggregate and running-mean CSVs; return the aggregate dict."""
    if len(ids) != len(measured) or len(measured) != len(circuits):
        raise DataError("counts and circuit manifests list different numbers of circuits")
    ideals = [ideal_distribution(c) for c in circuits]
    header = ["circuit_id", "theta", "theta_bad", "zz_count", "h_u", "h_a", "i_h"]
    if reference is not None:
        header += ["gamma_theta", "gamma_ol", "offload_category"]
    rows, hu, ha, ih = [], [], [], []
    for k, (cid, m, s) in enumerate(zip(ids, measured, ideals)):
        if m.n != s.n:
            raise DataError(f"{cid}: counts over {m.n} qubits but circuit has {s.n}")
        u, a, i = h_unaware(m), h_aware(m, s), hellinger_infidelity(s, m).i_h
        hu.append(u)
        ha.append(a)
        ih.append(i)
        rep = reports[k] if reports else None
        theta = rep["theta_total"] if rep else ""
        bad = _bad_angle(rep, bad_pairs) if (rep and bad_pairs) else ""
        zz = rep["zz_count"] if rep else ""
        row = [cid, theta, bad, zz, u, a, i]
        if reference is not None:
            ref = reference[k]
            g = reduction_ratio(ref["theta_total"], rep["theta_total"]) if ref["theta_total"] > 0 else ""
            if bad_pairs:
                before = _bad_angle(ref, bad_pairs)
                cat = offloading_category(before, bad)
                gol = offloading_ratio(before, bad) if cat != "none" else ""
            else:
                cat, gol = "", ""
            row += [g, gol, cat]
        rows.append(row)
    _write_csv(out / "per_circuit.csv", header, rows)
    n = len(ha)
    agg = {
        "N": n,
        "mean_h_u": float(np.mean(hu)),
        "mean_h_a": float(np.mean(ha)),
        "mean_i_h": float(np.mean(ih)),
        "wilson_lower_h_a": wilson_lower(float(np.clip(np.mean(ha), 0, 1)), n, z),
        "wilson_lower_h_u": wilson_lower(float(np.clip(np.mean(hu), 0, 1)), n, z),
    }
    _write_csv(
        out / "aggregate.csv",
        ["metric", "mean", "wilson_lower", "N"],
        [
            ["h_u", agg["mean_h_u"], agg["wilson_lower_h_u"], n],
            ["h_a", agg["mean_h_a"], agg["wilson_lower_h_a"], n],
            ["i_h", agg["mean_i_h"], "", n],
        ],
    )
    mu, lu = running_mean(hu, z)
    ma, la = running_mean(ha, z)
    _write_csv(
        out / "running_mean.csv",
        ["index", "circuit_id", "mean_h_u", "lower_h_u", "mean_h_a", "lower_h_a"],
        [[k + 1, cid, mu[k], lu[k], ma[k], la[k]] for k, cid in enumerate(ids)],
    )
    return agg


def cmd_analyze(args) -> int:
    ids, measured = _load_counts(args.counts)
    cids, circuits = _load_circuits(args.ideal)
    if ids != cids:
        raise DataError("counts and circuit manifests list different circuit ids")
    out = _out_dir(args.out)
    reports = _reports(args.ideal, ids) if args.reports or args.reference else None
    reference = _reports(args.reference, ids) if args.reference else None
    bad = None
    if args.bad_pairs:
        em = load_error_matrix(args.bad_pairs)
        bad = em.worst_pairs(args.n_bad)
    agg = analyze(ids, measured, circuits, out, reports, reference, bad)
    _write_json(out / "aggregate.json", agg)
    print(json.dumps(agg))
    return 0


def _parse_rates(text: str) -> list[float]:
    try:
        rates = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad --rates list {text!r}") from None
    if not rates or min(rates) < 0:
        raise UsageError("--rates needs non-negative numbers")
    return rates


def cmd_sweep(args) -> int:
    rates = _parse_rates(args.rates)
    ids, circuits = _load_circuits(args.inp)
    rows = sweep(circuits, args.channel, rates, args.shots, args.seed)
    out = _out_dir(args.out)
    _write_csv(
        out / f"sweep_{args.channel}.csv",
        ["channel", "rate", "mean_h_u", "mean_h_a"],
        [[args.channel, r["rate"], r["mean_h_u"], r["mean_h_a"]] for r in rows],
    )
    for r in rows:
        print(f"{args.channel} {r['rate']:.6g} h_u={r['mean_h_u']:.4f} h_a={r['mean_h_a']:.4f}")
    return 0


def _measured_value(args, circuits, aware: bool) -> float:
    try:
        return float(args.measured)
    except ValueError:
        pass
    ids, dists = _load_counts(args.measured)
    if len(dists) != len(circuits):
        raise DataError("measured counts and circuits differ in length")
    if aware:
        return float(np.mean([h_aware(m, ideal_distribution(c)) for m, c in zip(dists, circuits)]))
    return float(np.mean([h_unaware(m) for m in dists]))


def cmd_estimate(args) -> int:
    ids, circuits = _load_circuits(args.inp)
    try:
        if args.channel in STOCHASTIC_CHANNELS:
            target = _measured_value(args, circuits, aware=False)
            est = estimate_stochastic_rate(target, circuits, args.channel, args.shots, args.seed)
        else:
            target = _measured_value(args, circuits, aware=True)
            bg = None
            if args.stochastic_channel:
                bg = RateEstimate(args.stochastic_channel, args.stochastic_eps, 0.0, float("nan"))
            est = estimate_coherent_rate(target, circuits, args.channel, bg, args.shots, args.seed)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    out = _out_dir(args.out)
    doc = est.to_dict() | {"shots": args.shots, "seed": args.seed}
    _write_json(out / f"estimate_{args.channel}.json", doc)
    print(f"{args.channel}: eps_hat={est.eps_hat:.6g} residual={est.residual:.3g}")
    return 0


def cmd_experiment(args) -> int:
    cfg = _read_json(Path(args.config))
    try:
        qv = cfg["qv"]
        n, count, seed = int(qv["n"]), int(qv["n_circuits"]), int(qv.get("seed", 0))
        depth = qv.get("depth")
        arms = list(cfg["arms"])
        shots = int(cfg.get("shots", 200))
        noise = NoiseSpec.from_dict(cfg.get("noise", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{args.config}: bad experiment config ({exc})") from None
    if not arms:
        raise DataError(f"{args.config}: need at least one arm")
    em = load_error_matrix(cfg["error_matrix"]) if cfg.get("error_matrix") else None
    theta_min = float(cfg.get("theta_min", 0.10))
    opts = {}
    for arm in arms:
        try:
            opts[arm] = arm_options(arm, em, theta_min)
        except UsageError as exc:
            raise DataError(str(exc)) from None
    out = _out_dir(args.out or cfg.get("out"))
    circuits = generate_many(n, count, seed, depth)
    ids = [f"qv_{i:04d}" for i in range(count)]
    results = {arm: {"reports": [], "counts": [], "compiled": []} for arm in arms}
    # circuit-major, arm-minor; circuit i of every arm shares the stream (seed, i)
    for i, c in enumerate(circuits):
        for arm in arms:
            rep = compile_circuit(c, opts[arm])
            d = sample(rep.circuit, noise, shots, i)
            results[arm]["reports"].append(rep.to_dict())
            results[arm]["counts"].append(d)
            results[arm]["compiled"].append(rep.circuit)
    bad = em.worst_pairs(int(cfg.get("n_bad_pairs", 2))) if em else None
    reference_arm = cfg.get("reference_arm")
    summary = {}
    for arm in arms:
        adir = out / arm
        adir.mkdir(parents=True, exist_ok=True)
        for cid, comp, rep, d in zip(ids, results[arm]["compiled"], results[arm]["reports"], results[arm]["counts"]):
            _write_json(adir / f"{cid}.json", circuit_to_dict(comp))
            _write_json(adir / f"{cid}.report.json", rep)
            _write_atomic(adir / f"{cid}.counts.json", d.to_json())
        ref = results[reference_arm]["reports"] if reference_arm in results and reference_arm != arm else None
        summary[arm] = analyze(ids, results[arm]["counts"], circuits, adir, results[arm]["reports"], ref, bad)
    manifest = {"config": cfg, "seed": seed, "arms": summary}
    _write_json(out / "manifest.json", manifest)
    for arm, agg in summary.items():
        print(f"{arm}: h_u={agg['mean_h_u']:.4f} h_a={agg['mean_h_a']:.4f} "
              f"wilson={agg['wilson_lower_h_a']:.4f} i_h={agg['mean_i_h']:.4f}")
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="zzc", description="Noise-aware ZZ-gateset compiler and QV benchmarking toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("generate", help="generate quantum-volume model circuits")
    g.add_argument("--n", type=int, required=True, help="qubit count (>= 2)")
    g.add_argument("--depth", type=int, default=None, help="layer count (default: n)")
    g.add_argument("--count", type=int, default=200, help="number of circuits (default 200)")
    g.add_argument("--seed", type=int, default=0, help="top-level seed; circuit i uses stream (seed, i)")
    g.add_argument("--out", help=f"output directory (default ${ENV_OUT} or ./zzc-out)")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("compile", help="compile circuits for the native gateset")
    c.add_argument("--in", dest="inp", required=True, help="circuit file, manifest file or manifest directory")
    c.add_argument("--arm", choices=ARMS, default="parameterized", help="named compile variant")
    c.add_argument("--options", help="JSON file with CompileOptions fields (overrides --arm)")
    c.add_argument("--error-matrix", help="ErrorMatrix JSON path or built-in name (bad_pairs, bad_qubit)")
    c.add_argument("--theta-min", type=float, default=0.10, help="threshold for the approx arm (rad)")
    c.add_argument("--strategy", choices=("brute_force", "greedy"), default="brute_force",
                   help="qubit assignment strategy for the ranked arm")
    c.add_argument("--out", help="output directory")
    c.set_defaults(func=cmd_compile)

    s = sub.add_parser("simulate", help="sample circuits under a noise model")
    s.add_argument("--in", dest="inp", required=True, help="circuit file or manifest")
    s.add_argument("--noise", help="NoiseSpec JSON (default: noiseless)")
    s.add_argument("--shots", type=int, default=200, help="shots per circuit (default 200)")
    s.add_argument("--seed", type=int, default=None, help="overrides the NoiseSpec seed")
    s.add_argument("--csv", action="store_true", help="also write counts as CSV")
    s.add_argument("--out", help="output directory")
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("analyze", help="heavy-output, Hellinger and Wilson statistics")
    a.add_argument("--counts", required=True, help="counts manifest (from simulate)")
    a.add_argument("--ideal", required=True, help="circuit manifest the counts were sampled from")
    a.add_argument("--reports", action="store_true", help="add Θ columns from compile reports in --ideal")
    a.add_argument("--reference", help="compile manifest of a reference arm, for Γ_Θ / Γ_ol columns")
    a.add_argument("--bad-pairs", help="ErrorMatrix whose worst pairs define Θ_<")
    a.add_argument("--n-bad", type=int, default=2, help="number of worst pairs counted as bad (default 2)")
    a.add_argument("--out", help="output directory")
    a.set_defaults(func=cmd_analyze)

    w = sub.add_parser("sweep", help="mean h_U / h_A versus the rate of one noise channel")
    w.add_argument("--in", dest="inp", required=True, help="compiled circuit manifest")
    w.add_argument("--channel", required=True, choices=STOCHASTIC_CHANNELS + COHERENT_CHANNELS)
    w.add_argument("--rates", required=True, help="comma-separated rates, e.g. 0,1e-3,1e-2")
    w.add_argument("--shots", type=int, default=200)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--out", help="output directory")
    w.set_defaults(func=cmd_sweep)

    e = sub.add_parser("estimate", help="fit an error rate to a measured heavy-output mean")
    e.add_argument("--in", dest="inp", required=True, help="compiled circuit manifest")
    e.add_argument("--measured", required=True,
                   help="measured mean (h_U for stochastic, h_A for coherent channels) or a counts manifest")
    e.add_argument("--channel", required=True, choices=STOCHASTIC_CHANNELS + COHERENT_CHANNELS)
    e.add_argument("--stochastic-channel", choices=STOCHASTIC_CHANNELS,
                   help="fixed stochastic background for coherent fits")
    e.add_argument("--stochastic-eps", type=float, default=0.0, help="rate of the stochastic background")
    e.add_argument("--shots", type=int, default=200)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", help="output directory")
    e.set_defaults(func=cmd_estimate)

    x = sub.add_parser("experiment", help="generate -> compile -> simulate -> analyze from one config")
    x.add_argument("--config", required=True, help="ExperimentConfig JSON")
    x.add_argument("--out", help="output directory (overrides the config)")
    x.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: reproducible, file-based experiments.

Every subcommand writes its artifacts into --outdir with names derived
from a hash of the effective configuration, plus a report.json recording
each checked assertion with its measured value and tolerance.  Re-running
the same command yields byte-identical artifacts.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile

import numpy as np

from . import families, harmonic, measures, dtn as dtn_mod, haar as haar_mod
from .families import TreeFamilySpec, CounterexampleSpec
from .graph import validate
from .partition import (canonical_nested_partitions, tree_boundary_set,
                        graph_boundary_set)


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _atomic_write(path: str, text: str):
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _config_hash(args: argparse.Namespace) -> str:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    blob = json.dumps(cfg, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _csv(rows) -> str:
    return "\n".join(",".join(str(c) for c in row) for row in rows) + "\n"


class Reporter:
    def __init__(self, args):
        self.outdir = args.outdir
        self.prefix = f"{args.command}-{_config_hash(args)}"
        self.checks = []
        self.artifacts = []

    def artifact(self, suffix: str, text: str) -> str:
        path = os.path.join(self.outdir, f"{self.prefix}-{suffix}")
        _atomic_write(path, text)
        self.artifacts.append(path)
        return path

    def check(self, name: str, value: float, tol: float, passed: bool):
        self.checks.append({"name": name, "value": value, "tolerance": tol,
                            "passed": bool(passed)})

    def check_le(self, name: str, value: float, tol: float):
        self.check(name, float(value), tol, abs(value) <= tol)

    def finish(self) -> int:
        ok = all(c["passed"] for c in self.checks)
        report = {"config": self.prefix, "artifacts": self.artifacts,
                  "checks": self.checks, "ok": ok}
        _atomic_write(os.path.join(self.outdir, "report.json"),
                      json.dumps(report, indent=2, sort_keys=True) + "\n")
        for c in self.checks:
            status = "pass" if c["passed"] else "FAIL"
            print(f"[{status}] {c['name']}: {c['value']:.3e} (tol {c['tolerance']:.1e})")
        for a in self.artifacts:
            print(f"wrote {a}")
        return 0 if ok else 1


def _add_family_flags(p: argparse.ArgumentParser):
    p.add_argument("--family", choices=["kary", "counterexample"], default="kary")
    p.add_argument("--arity", type=int, default=2)
    p.add_argument("--ratio", type=float, default=0.25)
    p.add_argument("--base-length", type=float, default=1.0)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--spine", type=int, default=10)
    p.add_argument("--pendant-exponent", type=float, default=2.0)


def _tree_spec(args) -> TreeFamilySpec:
    return TreeFamilySpec(arity=args.arity, ratio=args.ratio,
                          base_length=args.base_length, depth=args.depth)


def _family_graph(args):
    if args.family == "kary":
        g, _ = families.build_kary_tree(_tree_spec(args))
        return g
    return families.build_counterexample(
        CounterexampleSpec(spine=args.spine, pendant_exponent=args.pendant_exponent))


def _load_or_build(args):
    if getattr(args, "graph", None):
        with open(args.graph) as fh:
            return families.load_graph(fh.read())
    return _family_graph(args)


def _parse_depths(text: str):
    if ":" in text:
        a, b = text.split(":")
        return list(range(int(a), int(b) + 1))
    return [int(x) for x in text.split(",")]


def cmd_gen(args):
    rep = Reporter(args)
    g = _family_graph(args)
    rep.artifact("graph.json", families.save_graph(g))
    rep.check("validate", float(len(validate(g))), 0.0, not validate(g))
    return rep.finish()


def cmd_partitions(args):
    rep = Reporter(args)
    if getattr(args, "graph", None) or args.family == "counterexample":
        b = graph_boundary_set(_load_or_build(args))
    else:
        b = tree_boundary_set(_tree_spec(args))
    tree = canonical_nested_partitions(b)
    rows = [("level", "cell", "jump", "diameter", "members")]
    for level, part in enumerate(tree.levels):
        alpha = "" if level == 0 else _fmt(tree.jumps[level - 1][0])
        for ci, cell in enumerate(part.cells):
            idx = [b.index[x] for x in cell]
            diam = float(b.dist[np.ix_(idx, idx)].max()) if len(idx) > 1 else 0.0
            rows.append((level, ci, alpha, _fmt(diam), ";".join(cell)))
    rep.artifact("cells.csv", _csv(rows))
    fine = tree.mesh
    rep.check("mesh nonincreasing", 0.0, 0.0,
              all(b <= a + 1e-15 for a, b in zip(fine, fine[1:])))
    return rep.finish()


def cmd_solve(args):
    rep = Reporter(args)
    g = _load_or_build(args)
    with open(args.boundary_values) as fh:
        F = json.load(fh)
    f = harmonic.solve_dirichlet(g, F)
    rows = [("vertex", "value")] + [(v, _fmt(f.values[v])) for v in g.vertices]
    rep.artifact("values.csv", _csv(rows))
    chk = harmonic.check_harmonic(f)
    rep.check_le("kirchhoff residual", chk["max_residual"], 1e-10)
    rep.check("maximum principle", 0.0, 0.0, chk["max_principle"])
    return rep.finish()


def _write_dtn(rep, tag, D: dtn_mod.DtNMatrix):
    rows = [("basis",) + D.basis]
    for i, b in enumerate(D.basis):
        rows.append((b,) + tuple(_fmt(x) for x in D.matrix[i]))
    rep.artifact(f"{tag}.csv", _csv(rows))
    inv = D.check_invariants()
    rep.check_le("dtn symmetry", inv["symmetry_error"], 1e-10)
    rep.check_le("dtn kernel", inv["kernel_error"], 1e-10)
    rep.check("dtn psd", inv["min_eigenvalue"], 1e-10,
              inv["min_eigenvalue"] >= -1e-10)


def cmd_dtn(args):
    rep = Reporter(args)
    g = _load_or_build(args)
    mu = None
    if args.mu:
        with open(args.mu) as fh:
            mu = json.load(fh)
    D = dtn_mod.dtn_matrix(g, mu)
    _write_dtn(rep, "matrix", D)
    return rep.finish()


def cmd_dtn_limit(args):
    rep = Reporter(args)
    res = dtn_mod.compressed_dtn_limit(_tree_spec(args), args.level,
                                       _parse_depths(args.depths), args.tol)
    _write_dtn(rep, "matrix", res.dtn)
    rows = [("depth", "change")] + [(d, _fmt(c)) for d, c in res.trace]
    rep.artifact("trace.csv", _csv(rows))
    final = res.trace[-1][1] if res.trace else float("inf")
    rep.check("dtn limit converged", final, args.tol, res.converged)
    return rep.finish()


def cmd_exit_measure(args):
    rep = Reporter(args)
    res = measures.exit_measure_limit(_tree_spec(args), args.level,
                                      _parse_depths(args.depths), args.tol,
                                      w=args.source_vertex)
    masses = res.masses / res.masses.sum() if args.normalize else res.masses
    rows = [("cell", "mass")] + [
        (p if p else "(root)", _fmt(m)) for p, m in zip(res.cells, masses)]
    rep.artifact("measure.csv", _csv(rows))
    rows = [("depth", "change")] + [(d, _fmt(c)) for d, c in res.trace]
    rep.artifact("trace.csv", _csv(rows))
    final = res.trace[-1][1] if res.trace else float("inf")
    rep.check("exit measure converged", final, args.tol, res.converged)
    rep.check("exit measure positive", float(np.min(masses)), 0.0,
              bool(np.min(masses) > 0))
    return rep.finish()


def _build_basis(args):
    spec = _tree_spec(args)
    tree = canonical_nested_partitions(tree_boundary_set(spec))
    if args.measure == "rho":
        mu = measures.equal_split_measure(tree)
    elif args.measure == "counting":
        mu = measures.counting_measure(tree)
    else:
        g, _ = families.build_kary_tree(spec)
        pm = measures.exit_measure_point_masses(g, families.ROOT)
        mu = measures.cell_measure_from_point_masses(tree, pm)
    return tree, mu, haar_mod.build_haar_basis(tree, mu)


def cmd_haar(args):
    rep = Reporter(args)
    tree, _, basis = _build_basis(args)
    finest = tree.levels[tree.finest]
    rows = [("function", "level") + tuple(c[0] for c in finest.cells)]
    for k in range(len(basis)):
        rows.append((k, int(basis.levels[k]))
                    + tuple(_fmt(x) for x in basis.functions[k]))
    rep.artifact("basis.csv", _csv(rows))
    if args.check:
        gram = basis.gram_matrix()
        err = float(np.max(np.abs(gram - np.eye(len(basis)))))
        rep.check_le("gram identity", err, 1e-10)
    return rep.finish()


def cmd_haar_apply(args):
    rep = Reporter(args)
    _, _, basis = _build_basis(args)
    with open(args.function) as fh:
        lines = [ln.strip().split(",") for ln in fh if ln.strip()]
    table = {k: float(v) for k, v in lines}
    finest = basis.tree.levels[basis.tree.finest]
    if args.op == "analyze":
        F = np.array([table[c[0]] for c in finest.cells])
        out = haar_mod.analyze(basis, F)
        rows = [("coefficient", "value")] + [(k, _fmt(v)) for k, v in enumerate(out)]
    elif args.op == "operator":
        F = np.array([table[c[0]] for c in finest.cells])
        out = haar_mod.multiresolution_operator(basis, F)
        rows = [("cell", "value")] + [
            (c[0], _fmt(v)) for c, v in zip(finest.cells, out)]
    else:  # synthesize: input column holds coefficients indexed 0..K-1
        coeffs = np.array([table[str(k)] for k in range(len(basis))])
        out = haar_mod.synthesize(basis, coeffs)
        rows = [("cell", "value")] + [
            (c[0], _fmt(v)) for c, v in zip(finest.cells, out)]
    rep.artifact("result.csv", _csv(rows))
    return rep.finish()


def cmd_counterexample(args):
    rep = Reporter(args)
    spec = CounterexampleSpec(spine=args.spine, pendant_exponent=args.pendant_exponent)
    res = harmonic.counterexample_recurrence(spec)
    rows = [("n", "f", "spine_flux")]
    for n, v in enumerate(res.values, start=1):
        flux = _fmt(res.fluxes[n - 1]) if n - 1 < len(res.fluxes) else ""
        rows.append((n, _fmt(v), flux))
    rep.artifact("spine.csv", _csv(rows))
    increasing = all(b > a for a, b in zip(res.values, res.values[1:]))
    rep.check("f strictly increasing", 0.0, 0.0, increasing)
    if res.overflow_index is not None:
        rep.check("overflow index (divergence evidence)",
                  float(res.overflow_index), 0.0, True)
    return rep.finish()


def cmd_check(args):
    """Deterministic invariant suite over built-in fixtures."""
    rep = Reporter(args)
    spec = TreeFamilySpec(arity=2, ratio=0.25, depth=5)
    b = tree_boundary_set(spec)
    tree = canonical_nested_partitions(b)
    r = spec.ratio
    expected = [2 * r ** (a + 1) * (1 - r ** (5 - a)) / (1 - r) for a in range(5)]
    err = max(abs(j[0] - e) for j, e in zip(tree.jumps, expected))
    rep.check_le("tree jump closed form", err, 1e-12)

    rho = measures.equal_split_measure(tree)
    rep.check_le("rho additivity", rho.check_additivity(), 1e-10)

    basis = haar_mod.build_haar_basis(tree, rho)
    gram_err = float(np.max(np.abs(basis.gram_matrix() - np.eye(len(basis)))))
    rep.check_le("haar gram identity", gram_err, 1e-10)

    g, _ = families.build_kary_tree(spec)
    D = dtn_mod.dtn_matrix(g)
    S = dtn_mod.schur_complement_dtn(g)
    rep.check_le("dtn vs schur oracle", float(np.max(np.abs(D.matrix - S.matrix))), 1e-9)
    inv = D.check_invariants()
    rep.check_le("dtn symmetry", inv["symmetry_error"], 1e-10)
    rep.check_le("dtn kernel", inv["kernel_error"], 1e-10)
    rep.check("dtn psd", inv["min_eigenvalue"], 1e-10, inv["min_eigenvalue"] >= -1e-10)

    lim = measures.exit_measure_limit(spec, 0, range(4, 13), 1e-8)
    rep.check_le("exit measure total vs (2-r)/r",
                 float(lim.masses.sum() - (2 - r) / r), 1e-8)

    res = harmonic.counterexample_recurrence(CounterexampleSpec(spine=40))
    rep.check("counterexample divergence", res.values[-1], 0.0,
              res.values[-1] > 1e3)
    return rep.finish()


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="mgbound",
                                 description="boundary structure of metric graphs")
    ap.add_argument("--outdir", default="out")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="emit a family graph as JSON")
    _add_family_flags(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("partitions", help="canonical nested boundary partition")
    _add_family_flags(p)
    p.add_argument("--graph")
    p.set_defaults(func=cmd_partitions)

    p = sub.add_parser("solve", help="Dirichlet solve on a graph")
    _add_family_flags(p)
    p.add_argument("--graph")
    p.add_argument("--boundary-values", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("dtn", help="Dirichlet-to-Neumann matrix")
    _add_family_flags(p)
    p.add_argument("--graph")
    p.add_argument("--mu", help="JSON file: boundary vertex -> weight")
    p.set_defaults(func=cmd_dtn)

    p = sub.add_parser("dtn-limit", help="compressed DtN truncation limit")
    _add_family_flags(p)
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--depths", default="4:14")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_dtn_limit)

    p = sub.add_parser("exit-measure", help="exit measure truncation limit")
    _add_family_flags(p)
    p.add_argument("--source-vertex", default=families.ROOT)
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--depths", default="4:14")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--normalize", action="store_true")
    p.set_defaults(func=cmd_exit_measure)

    p = sub.add_parser("haar", help="generalized Haar basis")
    _add_family_flags(p)
    p.add_argument("--measure", choices=["rho", "counting", "exit"], default="rho")
    p.add_argument("--check", action="store_true")
    p.set_defaults(func=cmd_haar)

    p = sub.add_parser("haar-apply", help="analyze/synthesize/operator on a function")
    _add_family_flags(p)
    p.add_argument("--measure", choices=["rho", "counting", "exit"], default="rho")
    p.add_argument("--function", required=True, help="CSV: cell,value (no header)")
    p.add_argument("--op", choices=["analyze", "synthesize", "operator"],
                   default="analyze")
    p.set_defaults(func=cmd_haar_apply)

    p = sub.add_parser("counterexample", help="spine recurrence of the divergent example")
    p.add_argument("--spine", type=int, default=50)
    p.add_argument("--pendant-exponent", type=float, default=2.0)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("check", help="run the built-in invariant suite")
    p.set_defaults(func=cmd_check)

    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # machine-readable failure
        err = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

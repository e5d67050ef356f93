"""Command line entry point: generate, color, verify, oracle, bench."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import graph as gcore
from .coloring import ColoringError, dump_coloring, explain_violation, from_colors, parse_coloring
from .oracles import exact_index
from .pipeline import PipelineError, run

log = logging.getLogger("vdsd")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vdsd", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, mode=True):
        if mode:
            sp.add_argument("--mode", choices=["vd", "sd"], default="vd")
        sp.add_argument("--json", action="store_true", help="structured report instead of text")
        sp.add_argument("--no-timestamps", action="store_true", help="omit timings (byte-stable output)")

    g = sub.add_parser("generate", help="write a random d-regular graph")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--family", choices=["regular", "complete", "complete-minus-matching"], default="regular")
    g.add_argument("--output", type=Path)

    c = sub.add_parser("color", help="run the construction on a graph")
    common(c)
    c.add_argument("--input", type=Path, help="graph file; otherwise a random graph from --n/--d/--seed")
    c.add_argument("--n", type=int)
    c.add_argument("--d", type=int)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--epsilon", type=float, default=0.05)
    c.add_argument("--fallback", type=_on_off, default=True, metavar="{on,off}")
    c.add_argument("--output", type=Path, help="write the coloring file here")
    c.add_argument("--report", type=Path, help="write the report here instead of stdout")

    v = sub.add_parser("verify", help="re-check a coloring file against a graph file")
    common(v)
    v.add_argument("--input", type=Path, required=True, help="graph file")
    v.add_argument("--coloring", type=Path, required=True)

    o = sub.add_parser("oracle", help="exact chromatic index of a tiny graph")
    common(o, mode=False)
    o.add_argument("--mode", choices=["proper", "vd", "sd"], default="vd")
    src = o.add_mutually_exclusive_group(required=True)
    src.add_argument("--complete", type=int, metavar="N", help="use K_N")
    src.add_argument("--input", type=Path)
    o.add_argument("--budget", type=int, default=10**9)

    b = sub.add_parser("bench", help="sweep a grid of (n, d, seed) and aggregate bound checks")
    common(b)
    b.add_argument("--n", type=int, nargs="+", required=True)
    b.add_argument("--d", type=int, nargs="*", help="degrees; default: smallest admissible for the mode")
    b.add_argument("--seeds", type=int, default=3)
    b.add_argument("--epsilon", type=float, default=0.05)
    b.add_argument("--fallback", type=_on_off, default=True, metavar="{on,off}")
    return p


def _read_graph(path: Path) -> gcore.MultiGraph:
    try:
        return gcore.read_graph(path.read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except gcore.GraphError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _emit(text: str, path: Path | None = None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def min_degree_for(mode: str, n: int, epsilon: float) -> int:
    if mode == "sd":
        d = math.ceil(2 * n / 3)
    else:
        d = math.floor((1 + epsilon) * n / 2) + 1
    return min(d, n - 1)


def cmd_generate(args) -> int:
    if args.family == "complete":
        g = gcore.complete_graph(args.n)
    elif args.family == "complete-minus-matching":
        g = gcore.complete_minus_perfect_matching(args.n)
    else:
        try:
            g = gcore.random_regular(args.n, args.d, args.seed)
        except gcore.GraphError as exc:
            raise UsageError(str(exc)) from exc
    _emit(gcore.write_graph(g), args.output)
    return EXIT_OK


def _config(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("verbose",):
            continue
        out[k] = str(v) if isinstance(v, Path) else v
    return out


def cmd_color(args) -> int:
    if args.input is not None:
        g = _read_graph(args.input)
    elif args.n is not None and args.d is not None:
        try:
            g = gcore.random_regular(args.n, args.d, args.seed)
        except gcore.GraphError as exc:
            raise UsageError(str(exc)) from exc
    else:
        raise UsageError("color needs --input or both --n and --d")
    try:
        pc, report = run(args.mode, g, seed=args.seed, epsilon=args.epsilon, fallback=args.fallback)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    report.config = _config(args)
    stamps = not args.no_timestamps
    if args.json:
        text = json.dumps(report.to_dict(stamps), indent=2, sort_keys=True) + "\n"
    else:
        text = "config: " + json.dumps(report.config, sort_keys=True) + "\n" + report.to_text(stamps)
    _emit(text, args.report)
    if args.output is not None:
        args.output.write_text(dump_coloring(pc))
    if not report.passed:
        print(f"error: verdict failed: {report.verdict}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify(args) -> int:
    g = _read_graph(args.input)
    try:
        cf = parse_coloring(args.coloring.read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {args.coloring}: {exc}") from exc
    except ColoringError as exc:
        raise UsageError(f"{args.coloring}: {exc}") from exc
    problems = []
    if cf.n != g.n or cf.m != g.m:
        problems.append(f"shape: coloring has n={cf.n} m={cf.m}, graph has n={g.n} m={g.m}")
    elif any(set(a) != set(b) for a, b in zip(cf.edges, g.edges)):
        bad = next(i for i, (a, b) in enumerate(zip(cf.edges, g.edges)) if set(a) != set(b))
        problems.append(f"shape: edge {bad} differs from the graph file")
    verdict = {"proper": False, args.mode: False}
    if not problems:
        try:
            pc = from_colors(g, cf.colors, k=max(cf.k, max(cf.colors, default=0)))
        except ColoringError as exc:
            pc = None
            problems.append(f"proper: {exc}")
        if pc is not None:
            why = explain_violation(pc, args.mode)
            if why is None and max(cf.colors, default=0) > cf.k:
                why = f"palette: colors exceed the declared k={cf.k}"
            if why is not None:
                problems.append(why)
            verdict["proper"] = why is None or not why.startswith(("proper", "uncolored", "palette"))
            verdict[args.mode] = why is None
            verdict["colors_used"] = len({c for c in cf.colors if c})
    result = {"verdict": verdict, "problems": problems}
    if args.json:
        _emit(json.dumps(result, indent=2, sort_keys=True) + "\n")
    else:
        _emit(f"verdict: {' '.join(f'{k}={v}' for k, v in verdict.items())}\n")
    for p in problems:
        print(f"violation: {p}", file=sys.stderr)
    return EXIT_OK if not problems else EXIT_FAIL


def cmd_oracle(args) -> int:
    g = gcore.complete_graph(args.complete) if args.complete is not None else _read_graph(args.input)
    if g.m > 21:
        log.warning("oracle on %d edges may not finish", g.m)
    res = exact_index(g, args.mode, budget=args.budget)
    if args.json:
        _emit(json.dumps(res.to_dict(), indent=2, sort_keys=True) + "\n")
    elif res.value is None:
        _emit(f"unknown (lower bound {res.lower}, budget exhausted)\n")
    else:
        _emit(f"{res.value}\n")
    return EXIT_OK if res.value is not None else EXIT_FAIL


def cmd_bench(args) -> int:
    rows = []
    bound_tally: dict[str, list[int]] = {}
    fb_tally: dict[str, int] = {}
    for n in args.n:
        degrees = args.d or [min_degree_for(args.mode, n, args.epsilon)]
        for d in degrees:
            for seed in range(args.seeds):
                t0 = time.perf_counter()
                try:
                    g = gcore.random_regular(n, d, seed)
                    _, rep = run(args.mode, g, seed=seed, epsilon=args.epsilon, fallback=args.fallback)
                except (gcore.GraphError, PipelineError) as exc:
                    rows.append({"n": n, "d": d, "seed": seed, "passed": False, "error": str(exc)})
                    continue
                for st in rep.steps:
                    for b in st.bounds:
                        t = bound_tally.setdefault(f"{st.name}/{b.name}", [0, 0])
                        t[0] += b.ok
                        t[1] += 1
                for f in rep.fallbacks:
                    fb_tally[f] = fb_tally.get(f, 0) + 1
                row = {"n": n, "d": d, "seed": seed, "passed": rep.passed, "fallbacks": rep.fallbacks}
                if not args.no_timestamps:
                    row["seconds"] = round(time.perf_counter() - t0, 3)
                rows.append(row)
    passed = sum(r["passed"] for r in rows)
    summary = {
        "mode": args.mode,
        "runs": len(rows),
        "passed": passed,
        "bounds": {k: {"ok": v[0], "total": v[1]} for k, v in sorted(bound_tally.items())},
        "fallbacks": dict(sorted(fb_tally.items())),
        "rows": rows,
    }
    if args.json:
        _emit(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    else:
        out = [f"mode={args.mode} runs={len(rows)} passed={passed}"]
        for r in rows:
            extra = f" {r['seconds']}s" if "seconds" in r else ""
            out.append(f"n={r['n']} d={r['d']} seed={r['seed']} passed={r['passed']}{extra} "
                       f"fallbacks={','.join(r.get('fallbacks', [])) or 'none'}{' error=' + r['error'] if 'error' in r else ''}")
        out.append("bound checks:")
        for k, v in summary["bounds"].items():
            out.append(f"  {k}: {v['ok']}/{v['total']}")
        _emit("\n".join(out) + "\n")
    return EXIT_OK if passed == len(rows) else EXIT_FAIL


COMMANDS = {
    "generate": cmd_generate,
    "color": cmd_color,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

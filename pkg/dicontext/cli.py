"""dicontext command line.

Usage
-----
    dicontext validate dS1 --allow-loops
    dicontext homset swiss-flag --from a --to b --svg swiss-ab.svg
    dicontext check dicontext/data/swiss-flag.cert.json
    dicontext glue dicontext/data/b-vs-c.glue.json --complex-out B.json
    dicontext paper-suite --only swiss-flag --out suite.json

Reports are JSON on stdout (or `--out`); status lines go to stderr. Exit
codes: 0 pass, 1 analytic failure, 2 input error. When DICONTEXT_OUTPUT_DIR
is set (in the environment or a `.env` file), relative `--out`, `--svg` and
`--complex-out` paths are written under it.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Sequence

from dotenv import load_dotenv

from .complex import complex_to_json, validate_complex
from .documents import (
    DATA_DIR,
    glue_report,
    load_certificate,
    load_homotopy_doc,
    load_map,
    load_space,
    pushout_report,
)
from .errors import DicontextError, UnknownNameError
from .fundcat import enumerate_dipaths, hom_set
from .plmaps import check_context_preserving, check_dihomotopy, check_dimap, verify_equivalence_certificate
from .render import PALETTE, Figure, RenderStyle, render_complex, write_svg
from .reports import canonical_json, write_json
from .suite import GROUPS, run_suite, suite_report

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
OUTPUT_DIR_VAR = "DICONTEXT_OUTPUT_DIR"


@dataclass(frozen=True)
class RunConfig:
    """Where a command reads from and writes to."""

    command: str
    inputs: tuple[str, ...] = ()
    out: Path | None = None
    svg: Path | None = None
    complex_out: Path | None = None
    max_len: int | None = None
    style: RenderStyle = RenderStyle()


def _place(p: Path | None) -> Path | None:
    output_dir = os.environ.get(OUTPUT_DIR_VAR)
    if p is None or not output_dir or p.is_absolute():
        return p
    return Path(output_dir) / p


def _emit(report: Any, cfg: RunConfig) -> None:
    if cfg.out is None:
        sys.stdout.write(canonical_json(report))
        return
    write_json(report, cfg.out)
    print(f"[ok] wrote report to {cfg.out}", file=sys.stderr)


def _svg(text: str, cfg: RunConfig) -> None:
    if cfg.svg is not None:
        write_svg(text, cfg.svg)
        print(f"[ok] wrote {cfg.svg}", file=sys.stderr)


def _vertex(space: Any, name: str | None, flag: str) -> str:
    if name is None:
        raise UnknownNameError(f"{flag} is required")
    vid = space.marking.get(name, name)
    if not space.complex.has_vertex(vid):
        raise UnknownNameError(f"{name!r} is neither a context vertex nor a vertex of {space.name or 'the space'}")
    return vid


# ───── subcommands ─────


def cmd_validate(args: argparse.Namespace, cfg: RunConfig) -> int:
    space = load_space(cfg.inputs[0])
    report = validate_complex(space.complex)
    _emit(report.to_json(), cfg)
    if report.ok(args.allow_loops):
        print(f"[ok] {space.name or 'complex'} is valid", file=sys.stderr)
        return EXIT_OK
    reason = "has directed cycles" if not report.acyclic else "; ".join(report.problems) or "is malformed"
    print(f"[error] {space.name or 'complex'} {reason}", file=sys.stderr)
    return EXIT_FAIL


def cmd_homset(args: argparse.Namespace, cfg: RunConfig) -> int:
    space = load_space(cfg.inputs[0])
    x, y = _vertex(space, args.source, "--from"), _vertex(space, args.target, "--to")
    h = hom_set(space.complex, x, y, cfg.max_len)
    _emit(h.to_json(), cfg)
    print(f"[info] {len(h.classes)} classes over {h.path_count} dipaths", file=sys.stderr)
    if cfg.svg is not None:
        figure = Figure([k.representative.edges for k in h.classes], {"from": x, "to": y}, f"hom({x}, {y})")
        _svg(render_complex(space.complex, figure, cfg.style), cfg)
    return EXIT_OK


def cmd_paths(args: argparse.Namespace, cfg: RunConfig) -> int:
    space = load_space(cfg.inputs[0])
    x, y = _vertex(space, args.source, "--from"), _vertex(space, args.target, "--to")
    paths = enumerate_dipaths(space.complex, x, y, cfg.max_len)
    _emit({"source": x, "target": y, "count": len(paths), "paths": [list(p.edges) for p in paths]}, cfg)
    return EXIT_OK


def cmd_check_map(args: argparse.Namespace, cfg: RunConfig) -> int:
    m = load_map(cfg.inputs[0])
    verdict = check_dimap(m)
    if verdict.ok and args.rel:
        if len(args.rel) != 2:
            raise UnknownNameError("--rel takes the marked source and target spaces")
        b, c = (load_space(r).contexted_space for r in args.rel)
        verdict = check_context_preserving(m, b, c)
    return _verdict(verdict, cfg)


def cmd_check_homotopy(args: argparse.Namespace, cfg: RunConfig) -> int:
    doc = load_homotopy_doc(cfg.inputs[0])
    verdict = check_dihomotopy(doc.homotopy, doc.source, doc.target, doc.rel, args.method or doc.method)
    return _verdict(verdict, cfg)


def cmd_check(args: argparse.Namespace, cfg: RunConfig) -> int:
    cert = load_certificate(cfg.inputs[0])
    return _verdict(verify_equivalence_certificate(cert), cfg)


def _verdict(verdict: Any, cfg: RunConfig) -> int:
    _emit(verdict.to_json(), cfg)
    if verdict.ok:
        print(f"[ok] {verdict.status.value}", file=sys.stderr)
        return EXIT_OK
    print(f"[error] {verdict.status.value} at {verdict.stage}: {verdict.premise} {verdict.detail}".rstrip(), file=sys.stderr)
    return EXIT_FAIL


def cmd_glue(args: argparse.Namespace, cfg: RunConfig) -> int:
    glued, report = glue_report(cfg.inputs[0])
    c = glued.result.complex
    _emit(report, cfg)
    if cfg.complex_out is not None:
        write_json(complex_to_json(c), cfg.complex_out)
        print(f"[ok] wrote {c.name or 'glued complex'} to {cfg.complex_out}", file=sys.stderr)
    if glued.result.geometry_dropped:
        print("[warn] identified vertices disagree on coordinates; the glued complex has no embedding", file=sys.stderr)
    if cfg.svg is not None and c.embedded:
        _svg(render_complex(c, style=cfg.style), cfg)
    return EXIT_OK


def cmd_pushout(args: argparse.Namespace, cfg: RunConfig) -> int:
    result, report = pushout_report(cfg.inputs[0])
    _emit(report, cfg)
    if cfg.complex_out is not None:
        write_json(complex_to_json(result.complex), cfg.complex_out)
        print(f"[ok] wrote {result.complex.name or 'pushout'} to {cfg.complex_out}", file=sys.stderr)
    if result.geometry_dropped:
        print("[warn] the pushout identifies points with different coordinates; it has no embedding", file=sys.stderr)
    changed = report.get("homDiff", {}).get("changed", 0)
    if changed:
        print(f"[info] {changed} watched hom-sets changed", file=sys.stderr)
    return EXIT_OK


def cmd_render(args: argparse.Namespace, cfg: RunConfig) -> int:
    space = load_space(cfg.inputs[0])
    paths: list[Sequence[str]] = []
    if args.source is not None or args.target is not None:
        x, y = _vertex(space, args.source, "--from"), _vertex(space, args.target, "--to")
        paths = [k.representative.edges for k in hom_set(space.complex, x, y, cfg.max_len).classes]
    text = render_complex(space.complex, Figure(paths, dict(space.marking), space.name), cfg.style)
    if cfg.svg is None:
        sys.stdout.write(text)
    else:
        _svg(text, cfg)
    return EXIT_OK


def cmd_paper_suite(args: argparse.Namespace, cfg: RunConfig) -> int:
    rows = run_suite(args.data_dir or DATA_DIR, args.only)
    for row in rows:
        tag = "[ok]" if row.match else "[error]"
        print(f"{tag} {row.group} / {row.name}: expected {row.expected!r}, got {row.computed!r}", file=sys.stderr)
    report = suite_report(rows)
    _emit(report, cfg)
    return EXIT_OK if report["failed"] == 0 else EXIT_FAIL


COMMANDS = {
    "validate": cmd_validate,
    "homset": cmd_homset,
    "paths": cmd_paths,
    "check-map": cmd_check_map,
    "check-homotopy": cmd_check_homotopy,
    "check": cmd_check,
    "glue": cmd_glue,
    "pushout": cmd_pushout,
    "render": cmd_render,
    "paper-suite": cmd_paper_suite,
}


# ───── argument parsing ─────


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="Write the JSON report here instead of stdout")

    p = argparse.ArgumentParser(prog="dicontext", description="Directed spaces, their fundamental categories and equivalence certificates.")
    p.set_defaults(inputs=[], svg=None, complex_out=None, max_len=None, stroke_width=None, class_colors=None)
    sub = p.add_subparsers(dest="command", required=True)

    def command(name: str, summary: str, inputs: str | None = None) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=summary, parents=[common])
        if inputs:
            sp.add_argument("inputs", nargs=1, metavar=inputs.upper(), help=inputs)
        return sp

    def endpoints(sp: argparse.ArgumentParser, required: bool) -> None:
        sp.add_argument("--from", dest="source", required=required, help="Context name or vertex id")
        sp.add_argument("--to", dest="target", required=required, help="Context name or vertex id")
        sp.add_argument("--max-len", type=int, help="Bound on dipath length for cyclic complexes")

    def drawing(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--svg", type=Path, help="Write an SVG drawing here")
        sp.add_argument("--stroke-width", type=float, help="Edge stroke width")
        sp.add_argument("--class-colors", help=f"Comma-separated class colours (default: {','.join(PALETTE[:3])},...)")

    sp = command("validate", "Check a complex: acyclicity, face closure, monotone embedding", "space")
    sp.add_argument("--allow-loops", action="store_true", help="Accept directed cycles (local pospaces)")

    sp = command("homset", "Dihomotopy classes of dipaths between two vertices", "space")
    endpoints(sp, required=True)
    drawing(sp)

    sp = command("paths", "List the dipaths between two vertices", "space")
    endpoints(sp, required=True)

    sp = command("check-map", "Check that a PL map is a dimap", "map")
    sp.add_argument("--rel", nargs=2, metavar=("B", "C"), help="Marked source and target spaces the map must respect")

    sp = command("check-homotopy", "Check a dihomotopy document", "homotopy")
    sp.add_argument("--method", choices=("auto", "lemma", "general"), help="Override the method named in the document")

    command("check", "Replay an equivalence certificate", "certificate")

    sp = command("glue", "Glue complexes and diff watched hom-sets", "glue-spec")
    sp.add_argument("--complex-out", type=Path, help="Write the glued complex here")
    drawing(sp)

    sp = command("pushout", "Push a cellular map out along a glued part", "pushout-spec")
    sp.add_argument("--complex-out", type=Path, help="Write the pushout complex here")

    sp = command("render", "Draw a complex, optionally with the classes between two vertices", "space")
    endpoints(sp, required=False)
    drawing(sp)

    sp = command("paper-suite", "Replay the worked examples")
    sp.add_argument("--only", choices=GROUPS, help="Run one group of examples")
    sp.add_argument("--data-dir", type=Path, help="Read example documents from here instead of the shipped data")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    style = RenderStyle()
    if args.stroke_width is not None:
        style = replace(style, stroke_width=args.stroke_width)
    if args.class_colors:
        style = replace(style, class_colors=tuple(args.class_colors.split(",")))
    cfg = RunConfig(args.command, tuple(args.inputs), _place(args.out), _place(args.svg), _place(args.complex_out), args.max_len, style)
    try:
        return COMMANDS[cfg.command](args, cfg)
    except DicontextError as exc:
        print(f"[error] {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

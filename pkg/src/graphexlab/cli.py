"""Command-line front end.

Configs and kernel files are JSON; step kernels are written as
``{"boundaries": [...], "values": [[...]]}``.  Every CSV ends with a
``# seed=..., version=..., config_hash=...`` comment line.  Exit codes are 0
on success, 1 for invalid input and 2 when a cap or budget is exceeded; in
the error cases a single JSON line is written to stderr.
"""

import argparse
import csv
from dataclasses import dataclass, field
import hashlib
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from ._canon import CanonicalizationError
from .core import (
    CapExceededError,
    Graphex,
    GraphexError,
    LabelledGraph,
    RectangleUnion,
    StepKernel,
    ValidationError,
    validate_graphex,
)
from .convergence import (
    empirical_convergence_curves,
    jump_sequence_comparison,
    relabel_convergence_test,
)
from .empirical import empirical_graphon
from .metrics import SearchBudget, cut_distance, cut_distance_stretched, cut_norm
from .oracle import enumerate_classes, poissonized_graph_probability
from .sampler import coupled_indicators, sample_labelled

COMMANDS = (
    "validate",
    "sample",
    "empirical",
    "cutnorm",
    "dcut",
    "dcut-stretched",
    "converge-empirical",
    "converge-relabel",
    "jump-seq",
    "coupling-check",
    "oracle",
)
STOCHASTIC = {"sample", "empirical", "converge-empirical", "converge-relabel", "jump-seq", "coupling-check"}


def _num(x):
    return format(float(x), ".17g")


@dataclass
class ExperimentConfig:
    """Everything a command needs besides the CLI flags.

    ``graphex``/``graphex2`` are graphexes, ``kernel``/``kernel2`` step
    kernels, ``params`` holds command parameters (``s``, ``s_grid``,
    ``replicates``, ``budget``, ...).  ``to_dict``/``from_dict`` are inverse
    to each other.
    """

    graphex: Graphex = None
    graphex2: Graphex = None
    kernel: StepKernel = None
    kernel2: StepKernel = None
    params: dict = field(default_factory=dict)
    seed: int = None
    out: str = None

    def to_dict(self):
        d = {}
        for name in ("graphex", "graphex2", "kernel", "kernel2"):
            v = getattr(self, name)
            if v is not None:
                d[name] = v.to_dict()
        if self.params:
            d["params"] = dict(self.params)
        if self.seed is not None:
            d["seed"] = self.seed
        if self.out is not None:
            d["out"] = self.out
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ValidationError("config must be a JSON object")
        unknown = set(d) - {"graphex", "graphex2", "kernel", "kernel2", "params", "seed", "out"}
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(
                graphex=Graphex.from_dict(d["graphex"]) if "graphex" in d else None,
                graphex2=Graphex.from_dict(d["graphex2"]) if "graphex2" in d else None,
                kernel=StepKernel.from_dict(d["kernel"]) if "kernel" in d else None,
                kernel2=StepKernel.from_dict(d["kernel2"]) if "kernel2" in d else None,
                params=dict(d.get("params", {})),
                seed=d.get("seed"),
                out=d.get("out"),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ValidationError):
                raise
            raise ValidationError(f"malformed config: {e}") from e

    @classmethod
    def load(cls, path):
        return cls.from_dict(_read_json(path))

    def hash(self, command):
        blob = json.dumps({"command": command, **self.to_dict()}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _read_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path} is not valid JSON: {e}") from e


def load_kernel(path):
    return StepKernel.from_dict(_read_json(path))


def write_kernel(kernel, stream):
    json.dump(kernel.to_dict(), stream, indent=1)
    stream.write("\n")


def read_edges(path):
    """Edge list CSV with columns ``x,y``; ``#`` lines are comments."""
    try:
        with open(path) as f:
            lines = [ln for ln in f if ln.strip() and not ln.startswith("#")]
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e.strerror}") from e
    rows = list(csv.reader(lines))
    if not rows or [c.strip() for c in rows[0]] != ["x", "y"]:
        raise ValidationError("edge list needs a header row 'x,y'")
    try:
        return LabelledGraph.from_edges([(float(a), float(b)) for a, b in rows[1:]])
    except ValueError as e:
        raise ValidationError(f"bad edge row: {e}") from e


class CsvTable:
    def __init__(self, header):
        self.header = list(header)
        self.rows = []

    def add(self, *row):
        self.rows.append([_num(v) if isinstance(v, (float, np.floating)) else str(v) for v in row])

    def render(self, seed, config_hash):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self.rows)
        buf.write(f"# seed={seed}, version={__version__}, config_hash={config_hash}\n")
        return buf.getvalue()


def svg_curves(curves, title=""):
    """Standalone SVG line chart; ``s`` on a log axis."""
    W, H, L, R, T, B = 640, 400, 70, 20, 30, 50
    s = np.array([x for c in curves for x in c.s_values], dtype=float)
    ys = np.array([y for c in curves for y in c.q75 + c.distances if not math.isnan(y)] or [0.0])
    lx0, lx1 = math.log10(s.min()), math.log10(s.max())
    if lx1 == lx0:
        lx0, lx1 = lx0 - 0.5, lx1 + 0.5
    y1 = max(float(ys.max()) * 1.1, 1e-9)

    def px(v):
        return L + (math.log10(v) - lx0) / (lx1 - lx0) * (W - L - R)

    def py(v):
        return H - B - v / y1 * (H - T - B)

    colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.1f}" y="18" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{L}" y1="{H - B}" x2="{W - R}" y2="{H - B}" stroke="black"/>',
        f'<line x1="{L}" y1="{T}" x2="{L}" y2="{H - B}" stroke="black"/>',
        f'<text x="{(W + L - R) / 2:.1f}" y="{H - 10}" text-anchor="middle" font-size="12">s (log scale)</text>',
        f'<text x="15" y="{(H - B + T) / 2:.1f}" font-size="12" '
        f'transform="rotate(-90 15 {(H - B + T) / 2:.1f})" text-anchor="middle">distance</text>',
    ]
    for v in sorted(set(s.tolist())):
        x = px(v)
        out.append(f'<line x1="{x:.2f}" y1="{H - B}" x2="{x:.2f}" y2="{H - B + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{H - B + 18}" text-anchor="middle" font-size="11">{v:g}</text>')
    for k in range(6):
        v = y1 * k / 5
        out.append(f'<line x1="{L - 5}" y1="{py(v):.2f}" x2="{L}" y2="{py(v):.2f}" stroke="black"/>')
        out.append(f'<text x="{L - 8}" y="{py(v) + 4:.2f}" text-anchor="end" font-size="11">{v:.3g}</text>')
    for i, c in enumerate(curves):
        col = colours[i % len(colours)]
        pts = [(px(x), py(y)) for x, y in zip(c.s_values, c.distances) if not math.isnan(y)]
        for x, lo, hi in zip(c.s_values, c.q25, c.q75):
            if not math.isnan(lo):
                out.append(
                    f'<line x1="{px(x):.2f}" y1="{py(lo):.2f}" x2="{px(x):.2f}" y2="{py(hi):.2f}" '
                    f'stroke="{col}" stroke-width="2" opacity="0.5"/>'
                )
        if pts:
            path = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{col}" stroke-width="1.5"/>')
            out += [f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{col}"/>' for x, y in pts]
        out.append(
            f'<text x="{W - R - 5}" y="{T + 15 * (i + 1)}" text-anchor="end" font-size="12" '
            f'fill="{col}">{c.metric_tag}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _need(cfg, name, cmd):
    v = getattr(cfg, name)
    if v is None:
        raise ValidationError(f"{cmd} needs '{name}' in the config")
    return v


def _param(cfg, args, name, default=None, cast=float):
    v = getattr(args, name, None)
    if v is None:
        v = cfg.params.get(name, default)
    if v is None:
        raise ValidationError(f"missing parameter '{name}'")
    try:
        return cast(v)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"bad value for '{name}': {v!r}") from e


def _budget(cfg):
    b = cfg.params.get("budget", {})
    try:
        return SearchBudget(**b)
    except TypeError as e:
        raise ValidationError(f"bad budget: {e}") from e


def _kernel_arg(args, cfg, which):
    path = getattr(args, which)
    if path:
        return load_kernel(path)
    return _need(cfg, which, args.command)


def _emit(args, text):
    if args.out:
        with open(args.out, "w", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args, cfg):
    g = _need(cfg, "graphex", "validate")
    report = validate_graphex(g)
    print(report.summary())
    return 0 if report.valid else 1


def cmd_sample(args, cfg):
    g = _need(cfg, "graphex", "sample")
    s = _param(cfg, args, "s")
    lab = sample_labelled(g, s, np.random.default_rng(args.seed))
    t = CsvTable(["x", "y"])
    for x, y in lab.sorted_edges():
        t.add(x, y)
    _emit(args, t.render(args.seed, cfg.hash("sample")))
    return 0


def cmd_empirical(args, cfg):
    s = _param(cfg, args, "s")
    if args.edges:
        lab = read_edges(args.edges)
    else:
        lab = sample_labelled(_need(cfg, "graphex", "empirical"), s, np.random.default_rng(args.seed))
    w = empirical_graphon(lab, s)
    buf = io.StringIO()
    write_kernel(w, buf)
    _emit(args, buf.getvalue())
    return 0


def cmd_cutnorm(args, cfg):
    k = _kernel_arg(args, cfg, "kernel")
    r = cut_norm(k, rng=args.seed)
    _emit(
        args,
        f"cut_norm {_num(r.value)}\nexact {r.exact}\n"
        f"T {' '.join(map(str, r.witness_T))}\nU {' '.join(map(str, r.witness_U))}\n",
    )
    return 0


def _dcut(args, cfg, fn):
    a = _kernel_arg(args, cfg, "kernel")
    b = _kernel_arg(args, cfg, "kernel2")
    r = fn(a, b, _budget(cfg))
    _emit(
        args,
        f"distance {_num(r.value)}\nexact {r.exact}\nrefinement_size {r.refinement_size}\n"
        f"projection_error {_num(r.projection_error)}\n"
        f"alignment {' '.join(map(str, r.alignment))}\n",
    )
    return 0


def cmd_dcut(args, cfg):
    return _dcut(args, cfg, cut_distance)


def cmd_dcut_stretched(args, cfg):
    return _dcut(args, cfg, cut_distance_stretched)


def cmd_converge_empirical(args, cfg):
    g = _need(cfg, "graphex", "converge-empirical")
    grid = cfg.params.get("s_grid", [5, 10, 20, 40])
    metrics = cfg.params.get("metrics", ["dcut", "dcut_stretched"])
    curves, rows = empirical_convergence_curves(
        g,
        grid,
        _param(cfg, args, "replicates", 20, int),
        _budget(cfg),
        seed=args.seed,
        metrics=metrics,
        growing=bool(cfg.params.get("growing", False)),
        workers=args.workers,
        time_budget=cfg.params.get("time_budget"),
    )
    if args.format == "svg":
        _emit(args, svg_curves([curves[m] for m in metrics], "cut distance to the target graphon"))
    else:
        t = CsvTable(["s", "replicate", "metric", "value", "exact_flag"])
        for s, rep, m, v, flag in rows:
            t.add(float(s), rep, m, float(v), flag)
        _emit(args, t.render(args.seed, cfg.hash("converge-empirical")))
    if not all(c.complete for c in curves.values()):
        print(json.dumps({"error": "budget", "message": "time budget exhausted; partial curve"}), file=sys.stderr)
        return 2
    return 0


def _rectangles(cfg, r):
    rects = cfg.params.get("rectangles")
    if rects is None:
        return RectangleUnion.box(0.0, r)
    try:
        return RectangleUnion(tuple(tuple(float(v) for v in rc) for rc in rects))
    except (TypeError, ValueError) as e:
        raise ValidationError(f"bad rectangles: {e}") from e


def cmd_converge_relabel(args, cfg):
    g = _need(cfg, "graphex", "converge-relabel")
    r = _param(cfg, args, "r", 1.0)
    rep = relabel_convergence_test(
        g,
        r,
        _rectangles(cfg, r),
        cfg.params.get("s_grid", [2, 8, 32]),
        _param(cfg, args, "k_max", 10, int),
        _param(cfg, args, "n_relabel", 10000, int),
        _param(cfg, args, "n_reference", 10000, int),
        np.random.default_rng(args.seed),
    )
    t = CsvTable(["s", "tv", "n_vertices"])
    for s, tv, n in zip(rep.s_values, rep.tv, rep.n_vertices):
        t.add(float(s), float(tv), n)
    _emit(args, t.render(args.seed, cfg.hash("converge-relabel")))
    return 0


def cmd_jump_seq(args, cfg):
    g1 = _need(cfg, "graphex", "jump-seq")
    g2 = _need(cfg, "graphex2", "jump-seq")
    rep = jump_sequence_comparison(
        g1,
        g2,
        _param(cfg, args, "k", 2, int),
        _param(cfg, args, "n_samples", 2000, int),
        np.random.default_rng(args.seed),
    )
    t = CsvTable(["class", "count1", "count2"])
    for key, (a, b) in rep.class_table.items():
        t.add(key, a, b)
    t.add("tv", _num(rep.statistic), "")
    t.add("noise_bound", _num(rep.noise_bound), "")
    t.add("p_value_proxy", _num(rep.p_value_proxy), "")
    _emit(args, t.render(args.seed, cfg.hash("jump-seq")))
    return 0


def cmd_coupling_check(args, cfg):
    p = _param(cfg, args, "p", 0.1)
    trials = _param(cfg, args, "trials", 1_000_000, int)
    i, y = coupled_indicators(p, trials, np.random.default_rng(args.seed))
    sel = i == 1
    n1 = int(sel.sum())
    est = float((y[sel] != 1).mean()) if n1 else float("nan")
    se = math.sqrt(est * (1 - est) / n1) if n1 else float("nan")
    exact = 1.0 - math.exp(-p)
    stated = 2.0 * exact
    bound = 2.0 * p
    ok = est <= bound + 3 * se
    _emit(
        args,
        f"p {_num(p)}\ntrials {trials}\n"
        f"empirical P(Y!=I|I=1) {_num(est)} (se {_num(se)})\n"
        f"1-exp(-p) {_num(exact)}\n2(1-exp(-p)) {_num(stated)}\n"
        f"bound 2p {_num(bound)}\n{'PASS' if ok else 'FAIL'}\n",
    )
    return 0 if ok else 1


def _cache_path(key):
    root = os.environ.get("GRAPHEXLAB_CACHE")
    if not root:
        return None
    os.makedirs(root, exist_ok=True)
    return os.path.join(root, f"oracle-{key}.csv")


def cmd_oracle(args, cfg):
    g = _need(cfg, "graphex", "oracle")
    if not g.is_pure_graphon() or g.loops:
        raise ValidationError("the oracle handles loop-free pure graphons only")
    s = _param(cfg, args, "s", 1.0)
    n = _param(cfg, args, "max_class_vertices", 4, int)
    max_vertices = _param(cfg, args, "max_vertices", 7, int)
    key = cfg.hash("oracle")
    path = _cache_path(key)
    if path and os.path.exists(path):
        with open(path) as f:
            _emit(args, f.read())
        return 0
    t = CsvTable(["class", "probability", "truncation_error"])
    for h in enumerate_classes(n):
        r = poissonized_graph_probability(g.graphon, s, h, max_vertices=max_vertices)
        t.add(h.key, float(r.probability), float(r.truncation_error))
    text = t.render(args.seed, key)
    if path:
        with open(path, "w") as f:
            f.write(text)
    _emit(args, text)
    return 0


HANDLERS = {
    "validate": cmd_validate,
    "sample": cmd_sample,
    "empirical": cmd_empirical,
    "cutnorm": cmd_cutnorm,
    "dcut": cmd_dcut,
    "dcut-stretched": cmd_dcut_stretched,
    "converge-empirical": cmd_converge_empirical,
    "converge-relabel": cmd_converge_relabel,
    "jump-seq": cmd_jump_seq,
    "coupling-check": cmd_coupling_check,
    "oracle": cmd_oracle,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--seed", type=int, help="seed (required by stochastic commands)")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "svg"), default="csv")

    parser = argparse.ArgumentParser(prog="graphexlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name in ("sample", "empirical", "oracle"):
            p.add_argument("--s", type=float)
        if name == "empirical":
            p.add_argument("--edges", help="edge list CSV instead of sampling")
        if name in ("cutnorm", "dcut", "dcut-stretched"):
            p.add_argument("--kernel")
        if name in ("dcut", "dcut-stretched"):
            p.add_argument("--kernel2")
        if name == "converge-empirical":
            p.add_argument("--replicates", type=int)
        if name == "coupling-check":
            p.add_argument("--p", type=float)
            p.add_argument("--trials", type=int)
    return parser


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        if args.seed is None:
            args.seed = cfg.seed
        if args.out is None:
            args.out = cfg.out
        needs_seed = args.command in STOCHASTIC and not (args.command == "empirical" and args.edges)
        if needs_seed and args.seed is None:
            raise ValidationError(f"{args.command} needs --seed")
        if args.workers < 1:
            raise ValidationError("--workers must be at least 1")
        return HANDLERS[args.command](args, cfg)
    except (CapExceededError, CanonicalizationError) as e:
        print(json.dumps({"error": "cap", "message": str(e)}), file=sys.stderr)
        return 2
    except (ValidationError, GraphexError) as e:
        print(json.dumps({"error": "validation", "message": str(e)}), file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line front-end.

Every subcommand emits either human-readable text or a JSON document
with a fixed schema version; errors become structured objects and map
to exit codes (2 for precondition violations, 3 for resource caps).
Reports are deterministic for a fixed seed and configuration, and any
subcommand with a --plot option renders a matplotlib figure to the
given file alongside the delimited output.
"""
from __future__ import annotations

import json
import os
import sys
from fractions import Fraction

import click

from qtdyn.dioph import IntersectionInstance, bounded_intersections
from qtdyn.heights import (
    Enclosure,
    LocalHeightResult,
    ResourceCapError,
    global_height,
    local_height,
)
from qtdyn.itinerary import build_family, realize_itinerary, target_alpha
from qtdyn.lattes import (
    lattes_local_height,
    tent_orbit,
    tent_orbit_table,
)
from qtdyn.maps import FactoredMap, UnfactoredError, parse_map
from qtdyn.puiseux import format_puiseux
from qtdyn.qt_arith import FFElem, Place, parse_ffelem
from qtdyn.quadratic import classify
from qtdyn.spine import build_spine

SCHEMA = 1
EXIT_PRECONDITION = 2
EXIT_RESOURCE = 3

DEFAULT_CUTOFF = int(os.environ.get("QTDYN_CUTOFF", "0")) or None


def _parse_place(text: str) -> Place:
    text = text.strip()
    if text in ("inf", "infinity", "oo"):
        return Place.infinity()
    if text == "t":
        return Place.at_t()
    elem = parse_ffelem(text)
    if elem.den.degree > 0:
        raise ValueError("a finite place is a polynomial in t")
    return Place(elem.num)


def _frac(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _value_json(value):
    if isinstance(value, Enclosure):
        return {"lo": _frac(value.lo), "hi": _frac(value.hi)}
    return {"exact": _frac(value)}


def _emit(payload: dict, fmt: str, text_lines):
    payload = {"schema": SCHEMA, **payload}
    if fmt == "json":
        click.echo(json.dumps(payload, sort_keys=True,
                              separators=(",", ":")))
    else:
        for line in text_lines:
            click.echo(line)


def _fail(exc: BaseException, fmt: str):
    code = (EXIT_RESOURCE if isinstance(exc, ResourceCapError)
            else EXIT_PRECONDITION)
    err = {"type": type(exc).__name__, "message": str(exc)}
    if fmt == "json":
        click.echo(json.dumps({"schema": SCHEMA, "error": err},
                              sort_keys=True, separators=(",", ":")))
    else:
        click.echo(f"error ({err['type']}): {err['message']}", err=True)
    sys.exit(code)


def _guarded(fn, fmt):
    try:
        fn()
    except ResourceCapError as exc:
        _fail(exc, fmt)
    except (ValueError, ZeroDivisionError, UnfactoredError,
            NotImplementedError) as exc:
        _fail(exc, fmt)


def _save_plot(fig, path: str):
    fig.savefig(path, dpi=120, bbox_inches="tight")


def _new_figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt.figure()


fmt_option = click.option("--format", "fmt",
                          type=click.Choice(["json", "text"]),
                          default="json", show_default=True)
place_option = click.option("--place", default="t", show_default=True,
                            help="'t', 'inf', or a monic irreducible in t")
plot_option = click.option("--plot", "plot_file", type=click.Path(),
                           default=None, help="render a figure to this file")


@click.group()
def main():
    """Exact canonical-height computations for rational maps over Q(t)."""


@main.command("height-local")
@click.option("--map", "map_text", required=True)
@click.option("--point", "point_text", required=True)
@place_option
@click.option("--depth", type=int, default=None,
              help="strict digit count (errors when the cap interferes)")
@click.option("--max-iter", type=int, default=30, show_default=True)
@click.option("--cap", type=int, default=32, show_default=True)
@fmt_option
@plot_option
def height_local(map_text, point_text, place, depth, max_iter, cap, fmt,
                 plot_file):
    """Local canonical height of a point with certificate."""

    def run():
        res = local_height(parse_map(map_text), parse_ffelem(point_text),
                           _parse_place(place), max_iter=max_iter,
                           depth=depth, cap=cap)
        if plot_file:
            _plot_digits(res, plot_file)
        _emit({"height_local": res.to_json()}, fmt, _local_text(res))

    _guarded(run, fmt)


def _local_text(res: LocalHeightResult):
    if res.is_exact():
        head = f"local height = {_frac(res.value)} (exact)"
    else:
        head = (f"local height in [{_frac(res.value.lo)}, "
                f"{_frac(res.value.hi)}]")
    return [head,
            f"certificate: {res.certificate.to_json()}",
            f"digits: {[int(s) for s in res.digits]}"]


def _plot_digits(res: LocalHeightResult, path: str):
    fig = _new_figure()
    ax = fig.add_subplot()
    digits = [int(s) for s in res.digits]
    ax.bar(range(len(digits)), digits)
    ax.set_xlabel("iterate")
    ax.set_ylabel("order digit")
    ax.set_title("order digits along the orbit")
    _save_plot(fig, path)


@main.command("height-global")
@click.option("--map", "map_text", required=True)
@click.option("--point", "point_text", required=True)
@fmt_option
@plot_option
def height_global(map_text, point_text, fmt, plot_file):
    """Degree-weighted global canonical height over all places."""

    def run():
        value, per_place = global_height(parse_map(map_text),
                                         parse_ffelem(point_text))
        places = {}
        for pl, res in sorted(per_place.items(), key=lambda kv: repr(kv[0])):
            if isinstance(res, LocalHeightResult):
                places[repr(pl)] = res.to_json()
            else:
                places[repr(pl)] = {"value": _value_json(res)}
        if plot_file:
            _plot_places(per_place, plot_file)
        _emit({"height_global": {"value": _value_json(value),
                                 "places": places}},
              fmt,
              [f"global height: {_value_json(value)}"]
              + [f"  {k}: {v['value']}" for k, v in places.items()])

    _guarded(run, fmt)


def _plot_places(per_place, path: str):
    fig = _new_figure()
    ax = fig.add_subplot()
    labels, values = [], []
    for pl, res in sorted(per_place.items(), key=lambda kv: repr(kv[0])):
        labels.append(repr(pl))
        v = res.value if isinstance(res, LocalHeightResult) else res
        if isinstance(v, Enclosure):
            v = (v.lo + v.hi) / 2
        values.append(float(v))
    ax.bar(range(len(values)), values)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=7)
    ax.set_ylabel("local height")
    ax.set_title("local contributions to the global height")
    _save_plot(fig, path)


@main.command("spine")
@click.option("--map", "map_text", required=True)
@place_option
@fmt_option
@plot_option
def spine_cmd(map_text, place, fmt, plot_file):
    """Spine tree of a map whose zeros and poles are rational."""

    def run():
        tree = build_spine(FactoredMap.from_text(map_text),
                           _parse_place(place))
        if plot_file:
            _plot_spine(tree, plot_file)
        data = tree.to_json()
        lines = [f"spine with {len(data['vertices'])} vertices"]
        for i, v in enumerate(data["vertices"]):
            lines.append(f"  [{i}] chart={v['chart']} center={v['center']} "
                         f"rho={v['rho']} sigma={v['sigma']}")
        for e in data["edges"]:
            lines.append(f"  edge {e['from']} -> {e['to']} "
                         f"slope {e['slope']}")
        _emit({"spine": data}, fmt, lines)

    _guarded(run, fmt)


def _plot_spine(tree, path: str):
    fig = _new_figure()
    ax = fig.add_subplot()
    xs = {}
    # place leaves left to right, parents midway; depth = rho
    order = [i for i in range(len(tree.vertices))]
    for k, i in enumerate(order):
        xs[i] = k
    for p, c, _s in tree.edges:
        zp, sp = tree.vertices[p]
        zc, sc = tree.vertices[c]
        ax.plot([xs[p], xs[c]], [float(zp.rho), float(zc.rho)], "k-")
    for i, (zeta, sig) in enumerate(tree.vertices):
        ax.plot([xs[i]], [float(zeta.rho)], "o")
        ax.annotate(f"sigma={sig}", (xs[i], float(zeta.rho)),
                    textcoords="offset points", xytext=(4, 4), fontsize=7)
    ax.set_ylabel("rho (disk radius exponent)")
    ax.invert_yaxis()
    ax.set_title("spine vertices")
    _save_plot(fig, path)


@main.command("classify")
@click.option("--map", "map_text", required=True)
@place_option
@click.option("--seed", type=int, default=0, show_default=True)
@fmt_option
def classify_cmd(map_text, place, seed, fmt):
    """Trichotomy class of a degree-2 map at a place."""

    def run():
        got = classify(parse_map(map_text), _parse_place(place), seed=seed)
        data = got.to_json()
        line = f"class: {data['class']}"
        if "kiwi_case" in data:
            line += f" (subcase {data['kiwi_case']})"
        _emit({"classify": data}, fmt, [line])

    _guarded(run, fmt)


@main.command("lattes")
@click.option("--point", "point_text", default=None,
              help="compute the exact local height at t of this point")
@click.option("--tent", "tent_text", default=None,
              help="tent-map orbit data for a rational in [0, 1]")
@click.option("--table", "table_q", type=int, default=None,
              help="tent orbit table for all p/q with this q")
@fmt_option
@plot_option
def lattes_cmd(point_text, tent_text, table_q, fmt, plot_file):
    """Height and tent-dynamics queries for the Legendre family map."""

    def run():
        out = {}
        lines = []
        if point_text is not None:
            res = lattes_local_height(parse_ffelem(point_text))
            out["height"] = res.to_json()
            lines += _local_text(res)
        if tent_text is not None:
            pre, per = tent_orbit(Fraction(tent_text))
            out["tent_orbit"] = {"preperiod": pre, "period": per}
            lines.append(f"tent orbit: preperiod {pre}, period {per}")
        if table_q is not None:
            table = tent_orbit_table(table_q)
            out["tent_table"] = [{"preperiod": a, "period": b}
                                 for a, b in table]
            lines.append(f"tent table for denominator {table_q}: "
                         f"{len(table)} entries")
            if plot_file:
                _plot_tent_table(table, plot_file)
        if not out:
            raise ValueError("nothing to do: pass --point, --tent, "
                             "or --table")
        _emit({"lattes": out}, fmt, lines)

    _guarded(run, fmt)


def _plot_tent_table(table, path: str):
    fig = _new_figure()
    ax = fig.add_subplot()
    n = len(table)
    ax.plot([Fraction(p, n) for p in range(n)],
            [a + b for a, b in table], ".")
    ax.set_xlabel("point p/q")
    ax.set_ylabel("preperiod + period")
    ax.set_title("tent-map orbit lengths")
    _save_plot(fig, path)


@main.command("itinerary")
@click.option("--bits", "bits_text", default=None,
              help="0/1 string to realize as an order itinerary")
@click.option("--alpha", default=None,
              help="target local height in [-1, 0]")
@click.option("--depth", type=int, default=16, show_default=True)
@click.option("--g", "g_text", default="z + 1", show_default=True,
              help="the degree d-1 factor over Q of the family map")
@click.option("--cutoff", type=int, default=DEFAULT_CUTOFF,
              help="series cutoff exponent (env QTDYN_CUTOFF)")
@fmt_option
@plot_option
def itinerary_cmd(bits_text, alpha, depth, g_text, cutoff, fmt, plot_file):
    """Realize an order itinerary, or target a rational height value."""

    def run():
        f = build_family(g_text)
        if (bits_text is None) == (alpha is None):
            raise ValueError("pass exactly one of --bits or --alpha")
        if bits_text is not None:
            bits = [int(c) for c in bits_text]
            chain, point = realize_itinerary(f, bits, cutoff=cutoff)
            out = {"digits": [_frac(d) for d in chain.digits],
                   "point": format_puiseux(point),
                   "radius_valuations": [_frac(r)
                                         for r in chain.radius_valuations]}
            lines = [f"point: {out['point']}",
                     f"digits: {out['digits']}"]
        else:
            chain, point, enc = target_alpha(Fraction(alpha), depth, f)
            out = {"alpha": _frac(Fraction(alpha)),
                   "digits": [_frac(d) for d in chain.digits],
                   "point": format_puiseux(point),
                   "enclosure": _value_json(enc)}
            lines = [f"point: {out['point']}",
                     f"height enclosure: {out['enclosure']}"]
        if plot_file:
            _plot_chain(chain, plot_file)
        _emit({"itinerary": out}, fmt, lines)

    _guarded(run, fmt)


def _plot_chain(chain, path: str):
    fig = _new_figure()
    ax = fig.add_subplot()
    ax.step(range(len(chain.radius_valuations)),
            [float(r) for r in chain.radius_valuations], where="post")
    ax.set_xlabel("step")
    ax.set_ylabel("radius valuation")
    ax.set_title("nested-disk contraction schedule")
    _save_plot(fig, path)


@main.command("orbit-intersect")
@click.option("--h1", required=True)
@click.option("--h2", required=True)
@click.option("-d", "deg_d", type=int, required=True)
@click.option("-e", "deg_e", type=int, required=True)
@click.option("-C", "--gap-bound", "gap", default="0", show_default=True)
@click.option("-q", "--offset", default="0", show_default=True)
@fmt_option
@plot_option
def orbit_intersect(h1, h2, deg_d, deg_e, gap, offset, fmt, plot_file):
    """Pairs (m, n) with |d^m h1 - e^n h2| within the gap bound."""

    def run():
        inst = IntersectionInstance(Fraction(h1), Fraction(h2),
                                    deg_d, deg_e, c=Fraction(gap),
                                    q=Fraction(offset))
        res = bounded_intersections(inst)
        out = {
            "solutions": [list(s) for s in res.solutions],
            "attained": [_frac(v) for v in res.attained],
            "m_star": res.m_star,
            "n_star": res.n_star,
            "bound_proved": res.bound_proved,
            "offset_matches": [list(s) for s in res.offset_matches],
        }
        if plot_file:
            _plot_solutions(res, plot_file)
        _emit({"orbit_intersect": out}, fmt,
              [f"{len(res.solutions)} solutions up to m* = {res.m_star}"
               f" (bound {'proved' if res.bound_proved else 'heuristic'})",
               f"solutions: {out['solutions']}"])

    _guarded(run, fmt)


def _plot_solutions(res, path: str):
    fig = _new_figure()
    ax = fig.add_subplot()
    if res.solutions:
        ms, ns = zip(*res.solutions)
        ax.plot(ms, ns, "o")
    ax.set_xlabel("m")
    ax.set_ylabel("n")
    ax.set_title("orbit intersection indices")
    _save_plot(fig, path)


if __name__ == "__main__":
    main()

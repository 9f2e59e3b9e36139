"""Type II points and the spine of a rational map.

A Type II point is a disk D(c, |pi|^rho) at the working place, held in
one of two charts (the unit disk or the neighborhood of infinity, via
y = 1/z).  The spine is the smallest closed connected set containing
the Gauss point and its full preimage; for maps whose zeros and poles
are rational over Q(t) it is computed exactly as the hull of the Gauss
point and the zeros/poles, pruned where the order function sigma stops
increasing.

sigma restricted to a root-directed path is concave and piecewise
linear: each linear piece is the minimum of two lines whose slopes
count the zeros and poles sitting beyond the current disk.  Once the
slope reaches 0 it stays 0, which is what makes pruning sound.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from qtdyn.maps import (
    INF_POINT,
    FactoredMap,
    HomogPair,
    HPoly,
    format_point,
    residue_coeff_lists,
)
from qtdyn.qt_arith import (
    INFINITY,
    FFElem,
    Place,
    Poly,
    format_ffelem,
    valuation,
)


class TypeII:
    """The disk D(center, |pi|^rho) in the given chart.

    rho = 0 is the Gauss point in either chart.  The center is given in
    chart coordinates (y = 1/z in the infinity chart) and must satisfy
    v(center) >= 0 there.
    """

    __slots__ = ("chart", "center", "rho")

    def __init__(self, center, rho, chart: str = "unit"):
        if chart not in ("unit", "infinity"):
            raise ValueError("chart must be 'unit' or 'infinity'")
        if not isinstance(center, FFElem):
            center = FFElem.from_rational(center)
        rho = Fraction(rho)
        if rho < 0:
            raise ValueError("rho must be >= 0")
        self.chart = chart
        self.center = center
        self.rho = rho

    @staticmethod
    def gauss() -> "TypeII":
        return TypeII(FFElem.zero(), 0)

    def is_gauss(self) -> bool:
        return self.rho == 0

    def same_point(self, other: "TypeII", place: Place) -> bool:
        """Whether the two disks coincide at the place."""
        if self.rho != other.rho:
            return False
        if self.rho == 0:
            # the Gauss point is shared between the charts
            return (self.chart == other.chart
                    or valuation(self.center, place) >= 0
                    and valuation(other.center, place) >= 0)
        if self.chart != other.chart:
            return False
        return valuation(self.center - other.center, place) >= self.rho

    def __repr__(self) -> str:
        return (f"TypeII({format_ffelem(self.center)}, {self.rho}, "
                f"{self.chart!r})")


# ---------------------------------------------------------------------------
# sigma at Type II points
# ---------------------------------------------------------------------------


def _chart_targets(fm: FactoredMap, place: Place, chart: str):
    """Zeros and poles visible in the chart, in chart coordinates.

    Returns two lists [(coordinate, mult)] for zeros and poles; a point
    belongs to the unit chart when v >= 0 and to the infinity chart
    when v < 0 (infinity itself maps to coordinate 0 there).
    """
    out = ([], [])
    for idx, side in enumerate((fm.zeros, fm.poles)):
        for x, m in side:
            if chart == "unit":
                if x is not INF_POINT and valuation(x, place) >= 0:
                    out[idx].append((x, m))
            else:
                if x is INF_POINT:
                    out[idx].append((FFElem.zero(), m))
                elif valuation(x, place) < 0:
                    out[idx].append((FFElem.one() / x, m))
    return out


def _sigma_lines(fm: FactoredMap, place: Place, chart: str, center: FFElem):
    """Constant parts and target distances for the two sigma lines.

    sigma(D(center, rho)) = min over the (zeros, poles) sides of
      v(lead) + sum mult * min(dist_i, rho),
    dist_i = v(center - target_i).  Returns (vc, zero_dists, vu,
    pole_dists) with dists as [(dist, mult)].
    """
    zeros, poles = _chart_targets(fm, place, chart)
    vc = valuation(fm.c, place)
    vu = valuation(fm.u, place)
    zdist = [(valuation(center - x, place), m) for x, m in zeros]
    pdist = [(valuation(center - x, place), m) for x, m in poles]
    return vc, zdist, vu, pdist


def sigma_on_typeII(fm: FactoredMap, zeta: TypeII, place: Place) -> Fraction:
    """Exact sigma of the normalized pair at a Type II point."""
    fmn = fm.normalized_at(place)
    vc, zdist, vu, pdist = _sigma_lines(fmn, place, zeta.chart, zeta.center)
    rho = zeta.rho

    def side(v0, dists):
        total = Fraction(v0)
        for dist, m in dists:
            total += m * (rho if dist == INFINITY else min(Fraction(dist),
                                                           rho))
        return total

    return min(side(vc, zdist), side(vu, pdist))


# ---------------------------------------------------------------------------
# Spine trees
# ---------------------------------------------------------------------------


class SpineTree:
    """Rooted tree of Type II points with sigma at each vertex.

    vertices[i] = (TypeII, sigma); edges = (parent, child, slope) with
    the root at index 0 (the Gauss point, sigma 0).
    """

    def __init__(self):
        self.vertices: list[tuple[TypeII, Fraction]] = []
        self.edges: list[tuple[int, int, Fraction]] = []

    def add_vertex(self, zeta: TypeII, sig: Fraction) -> int:
        self.vertices.append((zeta, Fraction(sig)))
        return len(self.vertices) - 1

    def add_edge(self, parent: int, child: int, slope: Fraction):
        self.edges.append((parent, child, Fraction(slope)))

    def children(self, i: int):
        return [(c, s) for p, c, s in self.edges if p == i]

    def parent_edge(self, i: int):
        for p, c, s in self.edges:
            if c == i:
                return (p, s)
        return None

    def contract_degree_two(self):
        """Remove interior vertices where the slope does not change."""
        changed = True
        while changed:
            changed = False
            for i in range(1, len(self.vertices)):
                kids = self.children(i)
                pe = self.parent_edge(i)
                if pe is None or len(kids) != 1:
                    continue
                (p, s_in) = pe
                (c, s_out) = kids[0]
                if s_in == s_out:
                    self.edges = [e for e in self.edges
                                  if e[1] != i and e[0] != i]
                    self.edges.append((p, c, s_in))
                    self.vertices[i] = None
                    changed = True
                    break
        # compact the index space
        remap = {}
        new_vertices = []
        for i, v in enumerate(self.vertices):
            if v is not None:
                remap[i] = len(new_vertices)
                new_vertices.append(v)
        self.vertices = new_vertices
        self.edges = sorted((remap[p], remap[c], s) for p, c, s in self.edges)

    def max_sigma(self) -> Fraction:
        return max(s for _, s in self.vertices)

    def to_json(self) -> dict:
        verts = []
        for zeta, sig in self.vertices:
            verts.append({
                "chart": zeta.chart,
                "center": format_ffelem(zeta.center),
                "rho": f"{zeta.rho.numerator}/{zeta.rho.denominator}",
                "sigma": f"{sig.numerator}/{sig.denominator}",
            })
        edges = [{"from": p, "to": c,
                  "slope": f"{s.numerator}/{s.denominator}"}
                 for p, c, s in self.edges]
        return {"vertices": verts, "edges": edges, "root": 0}


def build_spine(fm: FactoredMap, place: Place) -> SpineTree:
    """The spine: hull of the Gauss point and the zeros/poles, pruned
    to the region where sigma strictly increases away from the root."""
    fmn = fm.normalized_at(place)
    tree = SpineTree()
    root = tree.add_vertex(TypeII.gauss(), Fraction(0))
    for chart in ("unit", "infinity"):
        zeros, poles = _chart_targets(fmn, place, chart)
        targets = ([(x, m, True) for x, m in zeros]
                   + [(x, m, False) for x, m in poles])
        targets.sort(key=lambda it: format_ffelem(it[0]))
        _descend(tree, fmn, place, chart, root, FFElem.zero(), Fraction(0),
                 targets)
    tree.contract_degree_two()
    return tree


def _descend(tree, fmn, place, chart, vertex_idx, center, rho, members):
    """Explore the direction classes below the disk D(center, rho)."""
    classes = _direction_classes(members, rho, place)
    for cls in classes:
        rep = cls[0][0]
        rho1 = _class_radius(cls, place)
        _walk_edge(tree, fmn, place, chart, vertex_idx, rep, rho, rho1, cls)


def _direction_classes(members, rho, place):
    """Partition targets by v(x - y) > rho."""
    classes = []
    for item in members:
        x = item[0]
        for cls in classes:
            if valuation(x - cls[0][0], place) > rho:
                cls.append(item)
                break
        else:
            classes.append([item])
    return classes


def _class_radius(cls, place):
    """Radius of the next branch vertex: min pairwise distance."""
    best = INFINITY
    for i in range(len(cls)):
        for j in range(i + 1, len(cls)):
            d = valuation(cls[i][0] - cls[j][0], place)
            if d < best:
                best = d
    return best


def _walk_edge(tree, fmn, place, chart, vertex_idx, rep, rho0, rho1, cls):
    """Follow sigma along D(rep, rho) for rho in (rho0, rho1].

    On the open segment sigma = min of two lines; concavity means at
    most one slope change.  The walk stops early (a tip) as soon as the
    slope reaches 0; otherwise it recurses at rho1 on refined classes.
    """
    vc, zdist, vu, pdist = _sigma_lines(fmn, place, chart, rep)

    def line(v0, dists, in_class_mult):
        const = Fraction(v0)
        for dist, m in dists:
            if dist == INFINITY or Fraction(dist) > rho0:
                continue
            const += m * Fraction(dist)
        return const, Fraction(in_class_mult)

    mz = sum(m for _, m, is_zero in cls if is_zero)
    mp = sum(m for _, m, is_zero in cls if not is_zero)
    c1, s1 = line(vc, zdist, mz)
    c2, s2 = line(vu, pdist, mp)

    # active line just after rho0: the lower one, ties to smaller slope
    v1, v2 = c1 + s1 * rho0, c2 + s2 * rho0
    if v1 < v2 or (v1 == v2 and s1 <= s2):
        ca, sa, cb, sb = c1, s1, c2, s2
    else:
        ca, sa, cb, sb = c2, s2, c1, s1

    if sa == 0:
        return  # sigma is flat into this class; nothing to add

    # crossing with the other line inside the segment?
    cross = None
    if sb < sa:
        x = (ca - cb) / (sb - sa)
        if rho0 < x and (rho1 == INFINITY or x < Fraction(rho1)):
            cross = x

    if cross is not None:
        sig_cross = ca + sa * cross
        idx = tree.add_vertex(TypeII(rep, cross, chart), sig_cross)
        tree.add_edge(vertex_idx, idx, sa)
        if sb == 0:
            return  # tip: sigma is constant beyond the crossing
        _continue_to_branch(tree, fmn, place, chart, idx, rep, cross, rho1,
                            cls, sb, cb)
        return

    _continue_to_branch(tree, fmn, place, chart, vertex_idx, rep, rho0, rho1,
                        cls, sa, ca)


def _continue_to_branch(tree, fmn, place, chart, from_idx, rep, rho_from,
                        rho1, cls, slope, const):
    if rho1 == INFINITY:
        # a single target point with positive slope and no crossing
        # would mean sigma is unbounded, contradicting the order bound
        raise AssertionError("unbounded sigma segment")
    rho1 = Fraction(rho1)
    sig1 = const + slope * rho1
    idx = tree.add_vertex(TypeII(rep, rho1, chart), sig1)
    tree.add_edge(from_idx, idx, slope)
    _descend(tree, fmn, place, chart, idx, rep, rho1, cls)


# ---------------------------------------------------------------------------
# sigma profiles along a path
# ---------------------------------------------------------------------------


class SigmaProfile:
    """Piecewise-linear sigma along a monotone path of disks.

    breakpoints: [(rho, sigma)] including both endpoints; slopes[i] is
    the slope between breakpoints i and i+1.
    """

    def __init__(self, breakpoints, slopes):
        self.breakpoints = breakpoints
        self.slopes = slopes

    def to_json(self) -> dict:
        return {
            "breakpoints": [
                {"rho": f"{r.numerator}/{r.denominator}",
                 "sigma": f"{s.numerator}/{s.denominator}"}
                for r, s in self.breakpoints],
            "slopes": [f"{s.numerator}/{s.denominator}" for s in self.slopes],
        }


def sigma_profile(fm: FactoredMap, start: TypeII, end: TypeII, place: Place,
                  samples: int = 0) -> SigmaProfile:
    """sigma along the path of disks D(end.center, rho), rho from
    start.rho to end.rho.

    The start disk must contain the end disk (a root-directed path in
    one chart).  With samples > 0, the profile is cross-checked against
    direct sigma evaluation at that many interior points.
    """
    if start.chart != end.chart and not start.is_gauss():
        raise ValueError("path endpoints must live in one chart")
    if start.rho > end.rho:
        raise ValueError("path must be directed away from the root")
    if (not start.is_gauss()
            and valuation(start.center - end.center, place) < start.rho):
        raise ValueError("start disk does not contain the end disk")

    fmn = fm.normalized_at(place)
    chart = end.chart
    vc, zdist, vu, pdist = _sigma_lines(fmn, place, chart, end.center)

    def side(v0, dists, rho):
        tot = Fraction(v0)
        for dist, m in dists:
            tot += m * (rho if dist == INFINITY else min(Fraction(dist), rho))
        return tot

    def value(rho):
        return min(side(vc, zdist, rho), side(vu, pdist, rho))

    lo, hi = start.rho, end.rho
    cands = {lo, hi}
    for dist, _ in zdist + pdist:
        if dist != INFINITY and lo < Fraction(dist) < hi:
            cands.add(Fraction(dist))
    base = sorted(cands)
    # each side is a single line inside each piece; a kink of the min
    # can only be their crossing
    extra = set()
    for a, b in zip(base, base[1:]):
        p_a, p_b = side(vc, zdist, a), side(vc, zdist, b)
        q_a, q_b = side(vu, pdist, a), side(vu, pdist, b)
        sp = (p_b - p_a) / (b - a)
        sq = (q_b - q_a) / (b - a)
        if sp != sq:
            x = a + (q_a - p_a) / (sp - sq)
            if a < x < b:
                extra.add(x)
    pts = sorted(cands | extra)
    bps = [(r, value(r)) for r in pts]
    slopes = []
    cleaned = [bps[0]]
    for (r0, s0), (r1, s1) in zip(bps, bps[1:]):
        sl = (s1 - s0) / (r1 - r0)
        if slopes and slopes[-1] == sl:
            cleaned[-1] = (r1, s1)
        else:
            slopes.append(sl)
            cleaned.append((r1, s1))
    if samples:
        for k in range(1, samples + 1):
            r = lo + (hi - lo) * Fraction(k, samples + 1)
            assert value(r) == sigma_on_typeII(
                fm, TypeII(end.center, r, chart), place)
    return SigmaProfile(cleaned, slopes)


# ---------------------------------------------------------------------------
# Gauss-point preimage certification
# ---------------------------------------------------------------------------


class GaussPreimageResult:
    """Outcome of testing whether a disk maps onto the Gauss point.

    certified: the reduction of the rescaled map has degree >= 1, which
    proves f(zeta) is the Gauss point; the reduced map is (num/den) in
    the direction variable.  Otherwise witness holds the constant value
    ("inf" for the infinite direction) the whole disk reduces to.
    """

    def __init__(self, certified, degree, num: Optional[Poly],
                 den: Optional[Poly], witness):
        self.certified = certified
        self.degree = degree
        self.num = num
        self.den = den
        self.witness = witness

    def to_json(self) -> dict:
        out = {"certified": self.certified, "degree": self.degree}
        if self.certified:
            out["reduced_num"] = [str(c) for c in self.num.coeffs]
            out["reduced_den"] = [str(c) for c in self.den.coeffs]
        else:
            out["witness"] = str(self.witness)
        return out


def gauss_preimage_verify(pair: HomogPair, zeta: TypeII,
                          place: Place) -> GaussPreimageResult:
    """Certify or refute f(zeta) = Gauss point for a Type II disk.

    Conjugates the disk to the Gauss point (integral rho only), reduces
    the normalized composite, and reads off the degree.
    """
    if zeta.rho.denominator != 1:
        raise ValueError("only integral rho is supported")
    rho = zeta.rho.numerator
    u = place.uniformizer() ** rho
    c = zeta.center
    if zeta.chart == "unit":
        l1 = HPoly([c, u], 1)                 # z -> pi^rho z + c w
        l2 = HPoly([FFElem.one(), FFElem.zero()], 1)
    else:
        # z = 1/y with y = pi^rho s + c
        l1 = HPoly([FFElem.one(), FFElem.zero()], 1)
        l2 = HPoly([c, u], 1)
    comp = HomogPair(pair.P.compose(l1, l2), pair.Q.compose(l1, l2),
                     check=False)
    pbar, qbar = residue_coeff_lists(comp.normalized_at(place), place)
    d = pair.d
    p_poly = Poly(pbar)
    q_poly = Poly(qbar)
    if p_poly.is_zero():
        return GaussPreimageResult(False, 0, None, None, Fraction(0))
    if q_poly.is_zero():
        return GaussPreimageResult(False, 0, None, None, "inf")
    g = p_poly.gcd(q_poly)
    num = p_poly // g
    den = q_poly // g
    degree = max(num.degree, den.degree)
    if degree >= 1:
        return GaussPreimageResult(True, degree, num, den, None)
    witness = num.coeffs[0] / den.coeffs[0]
    return GaussPreimageResult(False, 0, None, None, witness)

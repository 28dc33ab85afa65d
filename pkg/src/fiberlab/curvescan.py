"""Components of plane-curve fibers ``p(x, y) = t`` inside a box, and how they move with ``t``.

Two extraction methods are provided:

``sweep`` (default)
    Exact critical-value sweep.  With ``r`` the variable of lower degree
    and ``s`` the other one, the topology of ``{p = t}`` restricted to the
    box can only change at the real roots of ``Res_r(p - t, dp/dr)`` and
    of ``p(s, r_edge) - t`` for the two box edges ``r_edge``.  Those are
    isolated exactly (Sturm sequences over Q), the curve is sampled on
    rows of constant ``s`` between them, and the branches are joined at
    each critical value according to the local picture there (fold or
    edge crossing).
``grid``
    Marching squares on a uniform grid, saddle cells resolved by the sign
    at the cell centre.  Adequate for well-separated curves; used as an
    independent cross-check.

For a nonsingular curve every component is a line or a circle, so the
Euler characteristic of the fiber equals the number of boundary arcs.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import univariate as uv
from .exactpoly import ExactPoly

BOUNDARY_ARC = "BoundaryArc"
CLOSED_LOOP = "ClosedLoop"
ROW_OFFSETS = (1e-9, 1e-7, 1e-5, 1e-3, 1e-2, 0.1, 0.3)
T_NUDGE = 1e-12


class ScanError(ValueError):
    pass


class ResolutionError(ScanError):
    """The grid is too coarse for a component."""


class SingularFiberError(ScanError):
    """The fiber has a singular point (or a tangency the scan cannot resolve)."""


@dataclass(frozen=True)
class GridSpec:
    box: tuple
    resolution: int = 2048
    refinement: int = 1

    def __post_init__(self):
        box = tuple(float(v) for v in self.box)
        if len(box) != 4 or not (box[0] < box[1] and box[2] < box[3]):
            raise ValueError(f"degenerate box {self.box}")
        if self.resolution < 64:
            raise ValueError("resolution must be at least 64")
        if self.refinement < 0:
            raise ValueError("refinement must be nonnegative")
        object.__setattr__(self, "box", box)

    @property
    def cell(self) -> tuple[float, float]:
        x0, x1, y0, y1 = self.box
        return (x1 - x0) / self.resolution, (y1 - y0) / self.resolution

    def shrunk(self, fraction: float) -> tuple:
        """Concentric box whose sides are ``fraction`` of the original ones."""
        x0, x1, y0, y1 = self.box
        cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
        hx, hy = (x1 - x0) * fraction / 2, (y1 - y0) * fraction / 2
        return (cx - hx, cx + hx, cy - hy, cy + hy)

    def as_dict(self) -> dict:
        return {"box": list(self.box), "resolution": self.resolution, "refinement": self.refinement}


@dataclass
class CurveComponent:
    id: int
    chains: list
    kind: str

    @property
    def points(self) -> np.ndarray:
        return np.vstack(self.chains)

    def as_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "n_points": int(sum(len(c) for c in self.chains))}


@dataclass
class FiberScanReport:
    t: float
    components: list
    chi: int
    singular_warnings: int
    grid: GridSpec
    method: str = "sweep"
    t_used: float | None = None
    critical_values: list = field(default_factory=list)

    def __post_init__(self):
        arcs = sum(c.kind == BOUNDARY_ARC for c in self.components)
        if self.chi != arcs:
            raise AssertionError(f"chi {self.chi} differs from the boundary-arc count {arcs}")

    @property
    def n_components(self) -> int:
        return len(self.components)

    def as_dict(self) -> dict:
        return {
            "t": self.t, "t_used": self.t if self.t_used is None else self.t_used,
            "method": self.method, "grid": self.grid.as_dict(),
            "n_components": self.n_components, "chi": self.chi,
            "singular_warnings": self.singular_warnings,
            "components": [c.as_dict() for c in self.components],
            "critical_values": [float(v) for v in self.critical_values],
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["component", "chain", "x", "y"])
            for c in self.components:
                for k, chain in enumerate(c.chains):
                    for x, y in chain:
                        w.writerow([c.id, k, repr(float(x)), repr(float(y))])

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.as_dict(), fh, indent=2, sort_keys=True)


def _exact(t) -> Fraction:
    if isinstance(t, Fraction):
        return t
    if isinstance(t, int):
        return Fraction(t)
    return Fraction(repr(float(t)))


def extract_level_set(p: ExactPoly, t, grid: GridSpec, method: str = "sweep") -> FiberScanReport:
    """Components of ``{p = t}`` inside ``grid.box``."""
    if len(p.variables) != 2:
        raise ValueError("extract_level_set needs a polynomial in exactly two variables")
    if p.field == "complex":
        raise ValueError("curve scanning needs real coefficients")
    if method == "sweep":
        return _Sweep(p, _exact(t), grid).run(float(t))
    if method == "grid":
        return _marching_squares(p, float(t), grid)
    raise ValueError(f"unknown method {method!r}")


# -- exact sweep ---------------------------------------------------------------

def _coeff_table(P: ExactPoly, s_idx: int, r_idx: int) -> list:
    """``P = sum_k c_k(s) r^k`` as a list of univariate polynomials ``c_k``."""
    d = P.degree_in(P.variables[r_idx])
    rows = [dict() for _ in range(d + 1)]
    for c, e in P.terms:
        rows[e[r_idx]][e[s_idx]] = c
    return [uv.trim([row.get(j, 0) for j in range(max(row, default=-1) + 1)]) for row in rows]


def _at_r(table: list, r: Fraction) -> list:
    """``P(s, r)`` as a polynomial in ``s`` for fixed ``r``."""
    out: list = []
    rk = Fraction(1)
    for c in table:
        out = uv.add(out, uv.scale(c, rk))
        rk *= r
    return out


def _table_deriv_r(table: list) -> list:
    return [uv.scale(c, k) for k, c in enumerate(table)][1:] or [[]]


def _table_deriv_s(table: list) -> list:
    return [uv.deriv(c) for c in table]


class _IntTable:
    """Integer form of a coefficient table for fast exact evaluation at dyadic ``s``."""

    def __init__(self, table: list):
        den = 1
        for c in table:
            for q in c:
                den = den * q.denominator // math.gcd(den, q.denominator)
        self.ints = [[int(q * den) for q in c] for c in table]
        self.n = max((len(c) - 1 for c in table), default=0)

    def at(self, s: float) -> list[int]:
        """Values ``c_k(s)`` times a common positive factor."""
        m, q = float(s).as_integer_ratio()
        n = self.n
        qp = [1]
        for _ in range(n):
            qp.append(qp[-1] * q)
        out = []
        for c in self.ints:
            acc = 0
            mp = 1
            for j, a in enumerate(c):
                if a:
                    acc += a * mp * qp[n - j]
                mp *= m
            out.append(acc)
        return out


def _int_floats(vals: Sequence[int]) -> list[float]:
    """Convert integers sharing a scale to floats without overflow."""
    big = max((abs(v).bit_length() for v in vals), default=0)
    shift = max(big - 1000, 0)
    return [float(v >> shift) if v >= 0 else -float((-v) >> shift) for v in vals]


def _fsqrt(n: int) -> float:
    if n.bit_length() < 1000:
        return math.sqrt(n)
    k = (n.bit_length() - 900) // 2
    return math.sqrt(n >> (2 * k)) * 2.0 ** k


def _horner(coeffs: Sequence[float], r: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * r + c
    return acc


def _row_roots_float(vals: list[int]) -> list[float] | None:
    """Real roots of ``sum vals[k] r^k`` (ints); None when the polynomial vanishes."""
    d = len(vals) - 1
    while d >= 0 and vals[d] == 0:
        d -= 1
    if d < 0:
        return None
    if d == 0:
        return []
    if d == 1:
        return [-vals[0] / vals[1]]
    if d == 2:
        c, b, a = vals[0], vals[1], vals[2]
        disc = b * b - 4 * a * c
        if disc < 0:
            return []
        fa, fb, fc = _int_floats([a, b, c])
        if disc == 0:
            return [-fb / (2 * fa)]
        shift = max(max(abs(a).bit_length(), abs(b).bit_length(), abs(c).bit_length()) - 1000, 0)
        sq = _fsqrt(disc) / 2.0 ** shift
        q = -0.5 * (fb + math.copysign(sq, fb if fb != 0 else 1.0))
        r1, r2 = q / fa, (fc / q if q != 0 else 0.0)
        return sorted([r1, r2])
    f = _int_floats(vals[: d + 1])
    roots = np.roots(f[::-1])
    df = [k * c for k, c in enumerate(f)][1:]
    out = []
    for z in roots:
        if abs(z.imag) > 1e-7 * (1 + abs(z)):
            continue
        r = float(z.real)
        for _ in range(4):
            dv = _horner(df, r)
            if dv == 0:
                break
            step = _horner(f, r) / dv
            r -= step
            if abs(step) <= 1e-16 * (1 + abs(r)):
                break
        out.append(r)
    return sorted(out)


@dataclass
class _Branch:
    rows: list  # list of (s, r)
    pre: tuple | None = None
    post: tuple | None = None


class _Sweep:
    def __init__(self, p: ExactPoly, t: Fraction, grid: GridSpec):
        self.p, self.t, self.grid = p, t, grid
        self.warnings = 0
        P = p - t
        x0, x1, y0, y1 = grid.box
        # roots in the variable of lower degree; fall back if the other
        # choice contains lines of constant sweep value
        order = [(0, 1), (1, 0)]
        if P.degree_in(p.variables[1]) > P.degree_in(p.variables[0]):
            order.reverse()
        last_err = None
        for s_idx, r_idx in order:
            try:
                self._setup(P, s_idx, r_idx, (x0, x1, y0, y1))
                return
            except _Degenerate as exc:
                last_err = exc
        raise ScanError(f"cannot sweep this fiber: {last_err}")

    def _setup(self, P, s_idx, r_idx, box):
        lo = (box[0], box[2])
        hi = (box[1], box[3])
        self.s_idx, self.r_idx = s_idx, r_idx
        self.smin, self.smax = lo[s_idx], hi[s_idx]
        self.rmin, self.rmax = lo[r_idx], hi[r_idx]
        table = _coeff_table(P, s_idx, r_idx)
        if all(not c for c in table):
            raise ScanError("p - t vanishes identically")
        content = []
        for c in table:
            content = uv.gcd(content, c) if content else uv.monic(c) if c else []
        if uv.deg(content) >= 1:
            if uv.isolate_real_roots(content, Fraction(self.smin) - 1, Fraction(self.smax) + 1):
                raise _Degenerate("fiber contains a line of constant sweep value")
            table = [uv.exact_div(c, content) if c else [] for c in table]
        if len(table) < 2:
            raise _Degenerate("fiber has no dependence on the root variable")
        self.table = table
        self.dr = _table_deriv_r(table)
        self.ds = _table_deriv_s(table)
        self.drr = _table_deriv_r(self.dr)
        self.itab = _IntTable(table)
        self.abs_table = [[abs(float(c)) for c in row] for row in table]
        self.abs_ds = [[abs(float(c)) for c in row] for row in self.ds]
        res = uv.resultant(table, self.dr)
        if not res:
            raise ScanError("p - t has a repeated factor; scan its square-free part instead")
        self.sources = [("fold", res)]
        for name, r in (("edge_min", self.rmin), ("edge_max", self.rmax)):
            e = _at_r(table, Fraction(r))
            if not e:
                raise _Degenerate(f"fiber contains the box edge at {r}")
            self.sources.append((name, e))

    # exact/float evaluation helpers
    def _vals(self, tab, s: Fraction) -> list[Fraction]:
        return [uv.evaluate(c, s) for c in tab]

    @staticmethod
    def _magnitude(abs_tab, s: float, r: float) -> float:
        """Sum of absolute term values, the scale for cancellation tests."""
        return _horner([_horner(row, abs(s)) for row in abs_tab], abs(r))

    def _critical_values(self) -> list[tuple[float, set]]:
        lo, hi = Fraction(self.smin), Fraction(self.smax)
        found = []
        for name, poly in self.sources:
            sf = uv.squarefree(poly)
            if uv.deg(sf) < 1:
                continue
            for a, b in uv.isolate_real_roots(sf, lo, hi):
                v = float(uv.refine_root(sf, a, b))
                if self.smin < v < self.smax:
                    found.append((v, name))
        found.sort()
        tol = 1e-12 * (self.smax - self.smin)
        merged: list[tuple[float, set]] = []
        for v, name in found:
            if merged and v - merged[-1][0] <= tol:
                merged[-1][1].add(name)
            else:
                merged.append((v, {name}))
        return merged

    def _count(self, a: float, b: float) -> int:
        mid = Fraction((a + b) / 2).limit_denominator(2 ** 40)
        if not (a < mid < b):
            mid = Fraction((a + b) / 2)
        row = uv.trim(self._vals(self.table, mid))
        if uv.deg(row) < 1:
            return 0
        sf = uv.squarefree(row)
        seq = uv.sturm_sequence(sf)
        n = uv.count_roots(seq, Fraction(self.rmin), Fraction(self.rmax))
        if uv.evaluate(sf, Fraction(self.rmax)) == 0:
            n -= 1
        return n

    def _roots(self, s: float, n: int) -> list[float] | None:
        rs = _row_roots_float(self.itab.at(s))
        if rs is not None:
            rs = [r for r in rs if self.rmin < r < self.rmax]
            if len(rs) == n:
                return rs
        row = uv.trim(self._vals(self.table, Fraction(s)))
        if not row:
            return None
        rs = [r for r in uv.real_roots(row, Fraction(self.rmin), Fraction(self.rmax)) if r < self.rmax]
        return rs if len(rs) == n else None

    def _interval_rows(self, a: float, b: float, n: int, at_start: bool, at_end: bool):
        width = b - a
        s_vals = set()
        g = np.linspace(self.smin, self.smax, self.grid.resolution + 1)
        s_vals.update(float(v) for v in g[(g > a) & (g < b)])
        for d in ROW_OFFSETS:
            s_vals.add(a + width * d)
            s_vals.add(b - width * d)
        s_vals.add(a + width / 2)
        if at_start:
            s_vals.add(a)
        if at_end:
            s_vals.add(b)
        rows = {}
        for s in sorted(s_vals):
            if (a < s < b) or (at_start and s == a) or (at_end and s == b):
                rs = self._roots(s, n)
                if rs is not None:
                    rows[s] = rs
                else:
                    self.warnings += 1
        if n == 0:
            return sorted(rows.items())
        # refine where consecutive rows jump further than a couple of cells
        cx, cy = self.grid.cell
        step = 2 * math.hypot(cx, cy)
        keys = sorted(rows)
        budget = 40 * self.grid.resolution
        i = 0
        while i < len(keys) - 1 and budget > 0:
            s0, s1 = keys[i], keys[i + 1]
            jump = max(math.hypot(s1 - s0, r1 - r0) for r0, r1 in zip(rows[s0], rows[s1]))
            if jump > step and s1 - s0 > 1e-13 * (self.smax - self.smin):
                sm = 0.5 * (s0 + s1)
                rs = self._roots(sm, n)
                budget -= 1
                if rs is not None:
                    rows[sm] = rs
                    keys.insert(i + 1, sm)
                    continue
                self.warnings += 1
            i += 1
        return [(s, rows[s]) for s in keys]

    def _events(self, s_star: float, names: set, nL: int, nR: int, L: list, R: list):
        """Return (edge ends, fold pairs, continuation pairs) at a critical value.

        Edge ends are (side, index, point); fold pairs are (side, i, j, point);
        side is -1 for the left interval and +1 for the right one.
        """
        S = Fraction(s_star)
        vals = [float(v) for v in self._vals(self.table, S)]
        d_r = [float(v) for v in self._vals(self.dr, S)]
        d_s = [float(v) for v in self._vals(self.ds, S)]
        d_rr = [float(v) for v in self._vals(self.drr, S)]
        Lrem = list(range(nL))
        Rrem = list(range(nR))
        edges, folds = [], []
        for name, edge in (("edge_min", self.rmin), ("edge_max", self.rmax)):
            if name not in names:
                continue
            pr, ps = _horner(d_r, edge), _horner(d_s, edge)
            if pr == 0 or ps == 0:
                self.warnings += 1
                raise SingularFiberError(f"curve tangent to the box edge at s={s_star:.12g}")
            drds = -ps / pr
            inside_right = drds > 0 if name == "edge_min" else drds < 0
            side = 1 if inside_right else -1
            rem = Rrem if side > 0 else Lrem
            if not rem:
                raise ScanError(f"edge event at s={s_star:.12g} has no branch to end")
            idx = rem.pop(0) if name == "edge_min" else rem.pop()
            edges.append((side, idx, (s_star, edge)))
        if "fold" in names and len(d_r) >= 1:
            for rc in self._fold_points(s_star, vals, d_r):
                ps, prr = _horner(d_s, rc), _horner(d_rr, rc)
                scale = max(self._magnitude(self.abs_ds, s_star, rc), 1e-300)
                if abs(ps) <= 1e-10 * scale or prr == 0:
                    self.warnings += 1
                    raise SingularFiberError(f"singular point of the fiber near s={s_star:.12g}, r={rc:.12g}")
                side = 1 if -ps * prr > 0 else -1
                rem, roots = (Rrem, R) if side > 0 else (Lrem, L)
                best = None
                for a_, b_ in zip(rem, rem[1:]):
                    d = abs(0.5 * (roots[a_] + roots[b_]) - rc)
                    if best is None or d < best[0]:
                        best = (d, a_, b_)
                if best is None:
                    raise ScanError(f"fold at s={s_star:.12g} has no branch pair")
                rem.remove(best[1])
                rem.remove(best[2])
                folds.append((side, best[1], best[2], (s_star, rc)))
        if len(Lrem) != len(Rrem):
            raise ScanError(f"unresolved topology change at s={s_star:.12g}: "
                            f"{nL} branches on the left, {nR} on the right")
        return edges, folds, list(zip(Lrem, Rrem))

    def _fold_points(self, s_star: float, vals: list[float], d_r: list[float]) -> list[float]:
        deg = len(d_r) - 1
        while deg >= 0 and d_r[deg] == 0:
            deg -= 1
        if deg <= 0:
            return []
        cand = [-d_r[0] / d_r[1]] if deg == 1 else \
            [float(z.real) for z in np.roots(d_r[: deg + 1][::-1]) if abs(z.imag) <= 1e-7 * (1 + abs(z))]
        out = []
        for r in cand:
            if not (self.rmin < r < self.rmax):
                continue
            if abs(_horner(vals, r)) <= 1e-8 * max(self._magnitude(self.abs_table, s_star, r), 1e-300):
                out.append(r)
        return out

    def run(self, t_float: float) -> FiberScanReport:
        crit = self._critical_values()
        cuts = [self.smin] + [v for v, _ in crit] + [self.smax]
        names = [set()] + [n for _, n in crit] + [set()]
        branches: list[_Branch] = []
        first_ids, last_ids, counts, last_rows, first_rows = [], [], [], [], []
        for j in range(len(cuts) - 1):
            a, b = cuts[j], cuts[j + 1]
            n = self._count(a, b)
            rows = self._interval_rows(a, b, n, j == 0, j == len(cuts) - 2)
            if n and not rows:
                raise ResolutionError(f"no usable sample rows in ({a}, {b})")
            ids = list(range(len(branches), len(branches) + n))
            for k in range(n):
                branches.append(_Branch([(s, rs[k]) for s, rs in rows]))
            first_ids.append(ids)
            last_ids.append(ids)
            counts.append(n)
            first_rows.append(rows[0][1] if rows else [])
            last_rows.append(rows[-1][1] if rows else [])
        # end-node partner table: node 2*b is the start (small s), 2*b+1 the stop
        partner = [-1] * (2 * len(branches))
        for j in range(1, len(cuts) - 1):
            left, right = last_ids[j - 1], first_ids[j]
            edges, folds, conts = self._events(cuts[j], names[j], counts[j - 1], counts[j],
                                               last_rows[j - 1], first_rows[j])
            for side, idx, pt in edges:
                br = right[idx] if side > 0 else left[idx]
                if side > 0:
                    branches[br].pre = pt
                else:
                    branches[br].post = pt
            for side, i1, i2, pt in folds:
                if side > 0:
                    n1, n2 = 2 * right[i1], 2 * right[i2]
                    branches[right[i1]].pre = pt
                else:
                    n1, n2 = 2 * left[i1] + 1, 2 * left[i2] + 1
                    branches[left[i1]].post = pt
                partner[n1], partner[n2] = n2, n1
            for i1, i2 in conts:
                n1, n2 = 2 * left[i1] + 1, 2 * right[i2]
                partner[n1], partner[n2] = n2, n1
        comps = self._assemble(branches, partner)
        return FiberScanReport(
            t=t_float, components=comps, chi=sum(c.kind == BOUNDARY_ARC for c in comps),
            singular_warnings=self.warnings, grid=self.grid, method="sweep", t_used=t_float,
            critical_values=[v for v, _ in crit])

    def _points(self, br: _Branch, forward: bool) -> np.ndarray:
        pts = ([br.pre] if br.pre else []) + br.rows + ([br.post] if br.post else [])
        arr = np.array(pts, dtype=float).reshape(-1, 2)
        if not forward:
            arr = arr[::-1]
        return arr[:, [1, 0]] if self.s_idx == 1 else arr

    def _assemble(self, branches: list[_Branch], partner: list[int]) -> list[CurveComponent]:
        seen = [False] * len(branches)
        comps: list[CurveComponent] = []

        def walk(node: int) -> tuple[list[np.ndarray], bool]:
            pieces = []
            while True:
                b = node // 2
                if seen[b]:
                    return pieces, True
                seen[b] = True
                forward = node % 2 == 0
                pieces.append(self._points(branches[b], forward))
                nxt = partner[node ^ 1]
                if nxt < 0:
                    return pieces, False
                node = nxt

        terminals = [nd for nd in range(2 * len(branches)) if partner[nd] < 0]
        for nd in terminals:
            if not seen[nd // 2]:
                pieces, _ = walk(nd)
                comps.append(CurveComponent(len(comps), [np.vstack(pieces)], BOUNDARY_ARC))
        for b in range(len(branches)):
            if not seen[b]:
                pieces, _ = walk(2 * b)
                chain = np.vstack(pieces)
                chain = np.vstack([chain, chain[:1]])
                comps.append(CurveComponent(len(comps), [chain], CLOSED_LOOP))
        return comps


class _Degenerate(Exception):
    pass


# -- marching squares ----------------------------------------------------------

def _marching_squares(p: ExactPoly, t: float, grid: GridSpec) -> FiberScanReport:
    f = p.to_numpy()
    x0, x1, y0, y1 = grid.box
    n = grid.resolution
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    X, Y = np.meshgrid(xs, ys)  # [i, j] = (ys[i], xs[j])
    F0 = f(X, Y)
    t_used = t
    while np.any(F0 - t_used == 0):
        t_used += T_NUDGE
    V = F0 - t_used
    S = V > 0

    fx, fy = p.diff(p.variables[0]).to_numpy(), p.diff(p.variables[1]).to_numpy()
    diag = math.hypot(*grid.cell)

    def refine(ax, ay, bx, by, va, vb):
        # Illinois regula falsi on the edge parameter, keeping a sign-change bracket,
        # until the residual is far inside the 1e-3 |grad| * cell-diagonal bound
        lo, hi = np.zeros_like(va), np.ones_like(va)
        flo, fhi = va.copy(), vb.copy()
        lam = flo / (flo - fhi)
        side = np.zeros(len(va), dtype=int)
        active = np.arange(len(va))
        for it in range(100):
            if not len(active):
                break
            a = active
            px, py = ax[a] + lam[a] * (bx[a] - ax[a]), ay[a] + lam[a] * (by[a] - ay[a])
            fm = f(px, py) - t_used
            tol = 1e-5 * np.hypot(fx(px, py), fy(px, py)) * diag
            done = (np.abs(fm) <= tol) | (hi[a] - lo[a] <= 1e-15)
            if it < grid.refinement:
                done[:] = False
            same = np.sign(fm) == np.sign(flo[a])
            lo[a] = np.where(same, lam[a], lo[a])
            hi[a] = np.where(same, hi[a], lam[a])
            new_flo = np.where(same, fm, flo[a])
            new_fhi = np.where(same, fhi[a], fm)
            # Illinois step: halve the stale end value when the same end is kept twice
            new_fhi = np.where(same & (side[a] == 1), new_fhi / 2, new_fhi)
            new_flo = np.where(~same & (side[a] == -1), new_flo / 2, new_flo)
            side[a] = np.where(same, 1, -1)
            flo[a], fhi[a] = new_flo, new_fhi
            nxt = lo[a] + (hi[a] - lo[a]) * flo[a] / (flo[a] - fhi[a])
            lam[a] = np.where(done, lam[a], nxt)
            active = a[~done]
        return ax + lam * (bx - ax), ay + lam * (by - ay)

    # horizontal edges (i, j)-(i, j+1) and vertical edges (i, j)-(i+1, j)
    hcross = S[:, :-1] != S[:, 1:]
    vcross = S[:-1, :] != S[1:, :]
    hi_, hj = np.nonzero(hcross)
    vi, vj = np.nonzero(vcross)
    hid = -np.ones(hcross.shape, dtype=np.int64)
    vid = -np.ones(vcross.shape, dtype=np.int64)
    hid[hi_, hj] = np.arange(len(hi_))
    vid[vi, vj] = np.arange(len(vi)) + len(hi_)
    hx, hy = refine(xs[hj], ys[hi_], xs[hj + 1], ys[hi_], V[hi_, hj], V[hi_, hj + 1])
    vx, vy = refine(xs[vj], ys[vi], xs[vj], ys[vi + 1], V[vi, vj], V[vi + 1, vj])
    pts = np.concatenate([np.stack([hx, hy], 1), np.stack([vx, vy], 1)])
    on_boundary = np.concatenate([(hi_ == 0) | (hi_ == n), (vj == 0) | (vj == n)])

    bottom, top = hid[:-1, :], hid[1:, :]
    left, right = vid[:, :-1], vid[:, 1:]
    s00, s01, s10, s11 = S[:-1, :-1], S[:-1, 1:], S[1:, :-1], S[1:, 1:]
    ncross = (bottom >= 0).astype(int) + (top >= 0) + (left >= 0) + (right >= 0)
    segs = []
    two = ncross == 2
    ids = np.stack([bottom[two], top[two], left[two], right[two]], 1)
    ids = np.sort(ids, axis=1)[:, 2:]
    segs.append(ids)
    four = np.nonzero(ncross == 4)
    if len(four[0]):
        ci, cj = four
        cx = 0.5 * (xs[cj] + xs[cj + 1])
        cy = 0.5 * (ys[ci] + ys[ci + 1])
        centre = (f(cx, cy) - t_used) > 0
        with_00 = centre == s00[ci, cj]
        b, tp, l, r = bottom[ci, cj], top[ci, cj], left[ci, cj], right[ci, cj]
        segs.append(np.stack([b, np.where(with_00, r, l)], 1))
        segs.append(np.stack([np.where(with_00, l, tp), np.where(with_00, tp, r)], 1))
    segs = np.concatenate(segs) if segs else np.zeros((0, 2), dtype=np.int64)

    grad = _gradient_norm(p, pts)
    singular = int(np.sum(grad < 1e-8))
    if singular > 0.01 * max(len(pts), 1) and singular > 10:
        raise SingularFiberError(f"{singular} crossings with vanishing gradient")

    m = len(pts)
    adj = coo_matrix((np.ones(len(segs)), (segs[:, 0], segs[:, 1])), shape=(m, m))
    ncomp, labels = connected_components(adj, directed=False)
    nbrs = [[] for _ in range(m)]
    for a, b in segs:
        nbrs[a].append(b)
        nbrs[b].append(a)
    comps = []
    order = sorted(range(ncomp), key=lambda c: int(np.min(np.nonzero(labels == c)[0])))
    for c in order:
        members = np.nonzero(labels == c)[0]
        if len(members) < 3:
            raise ResolutionError("a component spans fewer than two cells; increase the resolution")
        ends = [k for k in members if on_boundary[k]]
        start = ends[0] if ends else members[0]
        chain = [start]
        prev, cur = -1, start
        while True:
            nxt = [k for k in nbrs[cur] if k != prev]
            if not nxt or (nxt[0] == start):
                break
            prev, cur = cur, nxt[0]
            chain.append(cur)
        poly = pts[chain]
        if ends:
            comps.append(CurveComponent(len(comps), [poly], BOUNDARY_ARC))
        else:
            comps.append(CurveComponent(len(comps), [np.vstack([poly, poly[:1]])], CLOSED_LOOP))
    return FiberScanReport(t=t, components=comps, chi=sum(c.kind == BOUNDARY_ARC for c in comps),
                           singular_warnings=singular, grid=grid, method="grid", t_used=t_used)


def _gradient_norm(p: ExactPoly, pts: np.ndarray) -> np.ndarray:
    if len(pts) == 0:
        return np.zeros(0)
    gx = p.diff(p.variables[0]).to_numpy()(pts[:, 0], pts[:, 1])
    gy = p.diff(p.variables[1]).to_numpy()(pts[:, 0], pts[:, 1])
    return np.hypot(np.broadcast_to(gx, len(pts)), np.broadcast_to(gy, len(pts)))


# -- Euler characteristic and tracking ---------------------------------------

@dataclass(frozen=True)
class ChiConstancy:
    constant: bool
    first_violation: int | None
    values: tuple

    def __bool__(self):
        return self.constant


def chi_constancy(reports: Sequence[FiberScanReport]) -> ChiConstancy:
    if len(reports) < 2:
        raise ValueError("need at least two reports")
    vals = tuple(r.chi for r in reports)
    for k in range(1, len(vals)):
        if vals[k] != vals[0]:
            return ChiConstancy(False, k, vals)
    return ChiConstancy(True, None, vals)


@dataclass(frozen=True)
class TrackFlag:
    kind: str  # VANISHING | SPLITTING
    step: int  # between t_k and t_{k+1}
    component: int  # id at t_k
    children: tuple = ()  # component ids at t_{k+1}
    window: tuple = ()
    pieces: tuple = ()  # matched (component, window piece) pairs at t_{k+1}

    def as_dict(self) -> dict:
        return {"kind": self.kind, "step": self.step, "component": self.component,
                "children": list(self.children), "window": list(self.window),
                "pieces": [list(pc) for pc in self.pieces]}


@dataclass
class SequenceDiagnosis:
    t_values: list
    correspondence: list  # per step: list of (child component, child piece, parent component, parent piece, distance)
    flags: list
    warnings: list
    window_fraction: float
    window: tuple

    @property
    def vanishing(self) -> list:
        return [f for f in self.flags if f.kind == "VANISHING"]

    @property
    def splitting(self) -> list:
        return [f for f in self.flags if f.kind == "SPLITTING"]

    def as_dict(self) -> dict:
        return {"t_values": list(self.t_values), "window_fraction": self.window_fraction,
                "window": list(self.window),
                "flags": [f.as_dict() for f in self.flags], "warnings": list(self.warnings),
                "n_vanishing": len(self.vanishing), "n_splitting": len(self.splitting)}


def _densify(chain: np.ndarray, step: float) -> np.ndarray:
    seg = np.diff(chain, axis=0)
    lens = np.hypot(seg[:, 0], seg[:, 1])
    k = np.maximum(np.ceil(lens / step).astype(int), 1)
    out = [chain[:1]]
    for a, d, m in zip(chain[:-1], seg, k):
        s = (np.arange(1, m + 1) / m)[:, None]
        out.append(a + s * d)
    return np.vstack(out)


def _window_pieces(comp: CurveComponent, window: tuple, step: float) -> list[np.ndarray]:
    x0, x1, y0, y1 = window
    pieces = []
    for chain in comp.chains:
        pts = _densify(chain, step)
        inside = (pts[:, 0] >= x0) & (pts[:, 0] <= x1) & (pts[:, 1] >= y0) & (pts[:, 1] <= y1)
        if not inside.any():
            continue
        idx = np.flatnonzero(np.diff(np.concatenate([[0], inside.astype(int), [0]])))
        for a, b in zip(idx[::2], idx[1::2]):
            if b - a >= 2:
                pieces.append(pts[a:b])
    return pieces


def track_components(seq: Sequence[FiberScanReport], window_fraction: float = 0.2,
                     densify_cells: float = 1.0) -> SequenceDiagnosis:
    """Follow fiber components through ``t_0, t_1, ...`` inside a central window.

    Each piece of a component inside the window at ``t_{k+1}`` is matched to
    the piece at ``t_k`` with the smallest mean one-sided distance from it
    (the average of point-to-curve distances; the maximum, i.e. the
    Hausdorff distance, is dominated by tips that move far in one step).
    A piece with two or more matched pieces is flagged SPLITTING; a
    component that had a window part but loses it (while still present in
    the box, or having left it) is flagged VANISHING.
    """
    if len(seq) < 2:
        raise ValueError("need at least two reports")
    grid = seq[0].grid
    for r in seq[1:]:
        if r.grid.box != grid.box:
            raise ValueError("reports must share the scanning box")
    window = grid.shrunk(window_fraction)
    step = densify_cells * min(window[1] - window[0], window[3] - window[2]) / 400
    pieces = [[(c.id, k, pc) for c in r.components for k, pc in enumerate(_window_pieces(c, window, step))]
              for r in seq]
    flags, warns, corr = [], [], []
    win_meta = (window_fraction,) + tuple(window)
    for k in range(len(seq) - 1):
        parents, children = pieces[k], pieces[k + 1]
        trees = [cKDTree(pc) for _, _, pc in parents]
        step_corr = []
        kids: dict[tuple, list] = {}
        for cid, ck, pc in children:
            if not parents:
                break
            dists = [float(np.mean(tr.query(pc)[0])) for tr in trees]
            order = np.argsort(dists, kind="stable")
            best = int(order[0])
            if len(order) > 1 and dists[int(order[1])] - dists[best] <= 1e-6:
                warns.append(f"step {k}: ambiguous match for component {cid} piece {ck}")
                tied = [i for i in order if dists[i] - dists[best] <= 1e-6]
                best = min(tied, key=lambda i: (parents[i][0], parents[i][1]))
            pid, pk, _ = parents[best]
            step_corr.append((cid, ck, pid, pk, dists[best]))
            kids.setdefault((pid, pk), []).append((cid, ck))
        corr.append(step_corr)
        for (pid, pk), matched_pieces in sorted(kids.items()):
            if len(matched_pieces) >= 2:
                flags.append(TrackFlag("SPLITTING", k, pid, tuple(sorted({c for c, _ in matched_pieces})),
                                       win_meta, tuple(sorted(matched_pieces))))
        had = sorted({pid for pid, _, _ in parents})
        matched = {pid for (pid, _) in kids}
        with_window = {cid for cid, _, _ in children}
        for pid in had:
            if pid in matched:
                continue
            successor = _nearest_component(seq[k].components[pid], seq[k + 1].components)
            if successor is None or successor not in with_window:
                flags.append(TrackFlag("VANISHING", k, pid,
                                       () if successor is None else (successor,), win_meta))
    return SequenceDiagnosis(list(r.t for r in seq), corr, flags, warns, window_fraction, window)


def _nearest_component(comp: CurveComponent, candidates: Sequence[CurveComponent]) -> int | None:
    if not candidates:
        return None
    tree = cKDTree(comp.points)
    best = min(candidates, key=lambda c: (float(np.max(tree.query(c.points)[0])), c.id))
    return best.id


def diagnose_bifurcation(diag: SequenceDiagnosis, chi) -> dict:
    """Evidence verdict combining Euler characteristic and vanishing flags."""
    chi_const = bool(chi)
    vanish = len(diag.vanishing)
    if not chi_const or vanish:
        reasons = []
        if not chi_const:
            reasons.append("Euler characteristic changes")
        if vanish:
            reasons.append(f"{vanish} vanishing component(s)")
        verdict = "NOT-TRIVIAL-EVIDENCE"
    else:
        reasons = ["no Euler characteristic change and no vanishing components detected (not a proof)"]
        verdict = "NO-OBSTRUCTION-FOUND"
    return {"verdict": verdict, "reasons": reasons, "chi_constant": chi_const,
            "n_vanishing": vanish, "n_splitting": len(diag.splitting)}

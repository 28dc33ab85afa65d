"""Discrete loops, winding numbers and homotopy verdicts in punctured model spaces.

Loops are sampled at ``theta_k = 2 pi k / n`` and implicitly closed (the
last sample joins the first).  Two loops are told apart only by winding
numbers around punctures, and declared homotopic only through an explicit
straight-line homotopy whose clearance from every puncture is checked.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fibermodel import (
    RealScenarioParams,
    complex_fiber_residual,
    h_complex_array,
    model_to_fiber_real_array,
    real_fiber_residual,
)
from .tolerances import CYLINDER_TOL, FIBER_RESIDUAL, LOOP_SAMPLES, WINDING_CLEARANCE, WINDING_ROUNDING

MIN_SAMPLES = 16
HOMOTOPY_STEPS = 64


class LoopTooCloseError(ValueError):
    """The loop passes within the clearance tolerance of the winding center."""


class UndersampledLoopError(ValueError):
    pass


@dataclass(frozen=True)
class DiscreteLoop:
    samples: np.ndarray
    label: str = ""
    closed: bool = True

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim == 1:
            s = s[:, None]
        if len(s) < MIN_SAMPLES:
            raise ValueError(f"a loop needs at least {MIN_SAMPLES} samples, got {len(s)}")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.samples)

    @property
    def theta(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n) / self.n

    def planar(self) -> np.ndarray:
        """The loop as a 1-d complex array (a single complex coordinate)."""
        if self.dim != 1:
            raise ValueError("loop is not planar (one complex coordinate)")
        return self.samples[:, 0].astype(complex)

    def coordinate(self, i: int, label: str | None = None) -> "DiscreteLoop":
        return DiscreteLoop(self.samples[:, i], label or f"{self.label}[{i}]")

    def to_csv(self, path) -> None:
        header = ["theta"]
        cols = [self.theta]
        for i in range(self.dim):
            c = self.samples[:, i]
            if self.is_complex:
                header += [f"re{i}", f"im{i}"]
                cols += [c.real, c.imag]
            else:
                header.append(f"c{i}")
                cols.append(c)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in zip(*cols):
                w.writerow([repr(float(v)) for v in row])


def loop_from_function(fn: Callable[[np.ndarray], np.ndarray], n: int = LOOP_SAMPLES,
                       label: str = "") -> DiscreteLoop:
    """Sample ``fn(theta)`` (returning shape ``(n,)`` or ``(n, d)``) on the uniform grid."""
    if n < MIN_SAMPLES:
        raise ValueError(f"a loop needs at least {MIN_SAMPLES} samples, got {n}")
    theta = 2 * np.pi * np.arange(n) / n
    return DiscreteLoop(np.asarray(fn(theta)), label)


@dataclass(frozen=True)
class PuncturedPlane:
    punctures: tuple = ()

    def __post_init__(self):
        p = tuple(complex(z) for z in self.punctures)
        if len(set(p)) != len(p):
            raise ValueError("punctures must be distinct")
        object.__setattr__(self, "punctures", p)


@dataclass(frozen=True)
class CylinderDomain:
    """Unit cylinder ``{u^2 + v^2 = 1} x R`` minus the points ``(0, 1, a0)``."""
    heights: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "heights", tuple(float(a) for a in self.heights))

    def plane(self) -> PuncturedPlane:
        """Image under :func:`cylinder_to_plane`: the origin plus ``e^{a0} i``."""
        return PuncturedPlane((0j,) + tuple(1j * math.exp(a) for a in self.heights))


@dataclass(frozen=True)
class HomotopyVerdict:
    kind: str  # "Distinct" | "Equivalent" | "Inconclusive"
    invariant: str = ""
    values: tuple = ()
    description: str = ""
    margin: float | None = None
    reason: str = ""

    def __post_init__(self):
        if self.kind == "Distinct":
            if len(self.values) != 2 or self.values[0] == self.values[1]:
                raise ValueError("Distinct needs two unequal invariant values")
        elif self.kind == "Equivalent":
            if self.margin is None or not self.margin > 0:
                raise ValueError("Equivalent needs a positive clearance margin")
        elif self.kind != "Inconclusive":
            raise ValueError(f"unknown verdict kind {self.kind!r}")

    def as_dict(self) -> dict:
        return {"kind": self.kind, "invariant": self.invariant,
                "values": [list(v) if isinstance(v, tuple) else v for v in self.values],
                "description": self.description, "margin": self.margin, "reason": self.reason}


# -- the model loops -----------------------------------------------------------

def sample_model_loop(kind: str, n: int = LOOP_SAMPLES) -> DiscreteLoop:
    """``(cos t, sin t, 1)`` for ``gamma`` and ``(cos t, sin t, -1)`` for ``gamma_tilde``."""
    heights = {"gamma": 1.0, "gamma_tilde": -1.0}
    if kind not in heights:
        raise ValueError(f"unknown loop kind {kind!r}")
    h = heights[kind]
    return loop_from_function(
        lambda t: np.stack([np.cos(t), np.sin(t), np.full_like(t, h)], axis=1), n, kind)


def complex_model_loop(which: int, n: int = LOOP_SAMPLES) -> DiscreteLoop:
    """``(s + e^{it}, (s + e^{it})^2 - 1)`` with ``s = +1`` (which=1) or ``-1`` (which=2)."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    s = 1.0 if which == 1 else -1.0

    def fn(t):
        u = s + np.exp(1j * t)
        return np.stack([u, u * u - 1], axis=1)
    return loop_from_function(fn, n, f"gamma_{which}")


def complex_limit_loop(which: int, b: complex = 1.0, n: int = LOOP_SAMPLES) -> DiscreteLoop:
    """Closed form ``(b / (e^{it}(e^{it} +- 2)), +-1 + e^{it}, 0, 0)`` of the complex loops at ``l = 0``."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    s = 1.0 if which == 1 else -1.0

    def fn(t):
        e = np.exp(1j * t)
        zero = np.zeros_like(e)
        return np.stack([b / (e * (e + 2 * s)), s + e, zero, zero], axis=1)
    return loop_from_function(fn, n, f"gamma_{which},0")


def pushforward_loop(loop: DiscreteLoop, case: str, lam, b=1.0, f=None) -> DiscreteLoop:
    """Image of a model loop in the fiber over ``(b, lam)``.

    ``case="real"`` maps cylinder samples ``(u, v, a)`` with the real
    model map; ``case="complex"`` maps ``(u, v)`` samples with the complex
    one.  Every output sample is checked against the fiber equation.
    """
    if case == "real":
        params = RealScenarioParams(b, lam) if f is None else RealScenarioParams(b, lam, f)
        pts = model_to_fiber_real_array(loop.samples, params)
        res = real_fiber_residual(pts, b, params.f)
    elif case == "complex":
        pts = h_complex_array(loop.samples[:, 0], loop.samples[:, 1], lam, b)
        res = complex_fiber_residual(pts, b)
    else:
        raise ValueError(f"unknown case {case!r}")
    worst = float(np.max(res))
    if worst > FIBER_RESIDUAL:
        raise ArithmeticError(f"pushforward sample off the fiber: residual {worst:.3e}")
    return DiscreteLoop(pts, f"{case} image of {loop.label}")


# -- invariants ----------------------------------------------------------------

def _segment_distances(z: np.ndarray, c: complex) -> np.ndarray:
    """Distance from ``c`` to each closing segment ``z[k] -> z[k+1]``."""
    a = z - c
    d = np.roll(z, -1) - z
    dd = np.abs(d) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(dd > 0, -(a.real * d.real + a.imag * d.imag) / dd, 0.0)
    s = np.clip(s, 0.0, 1.0)
    return np.abs(a + s * d)


def loop_clearance(loop: DiscreteLoop, center: complex) -> float:
    return float(np.min(_segment_distances(loop.planar(), complex(center))))


def winding_number(loop: DiscreteLoop, center: complex = 0j) -> int:
    """Total turning of ``loop - center`` divided by ``2 pi``, as an integer."""
    z = loop.planar() - complex(center)
    clearance = float(np.min(_segment_distances(z, 0j)))
    if clearance <= WINDING_CLEARANCE:
        raise LoopTooCloseError(f"loop passes within {clearance:.3e} of {center}")
    steps = np.angle(np.roll(z, -1) / z)
    if np.max(np.abs(steps)) > np.pi / 2:
        raise UndersampledLoopError("angle step exceeds pi/2; refine the loop sampling")
    turns = math.fsum(steps) / (2 * np.pi)
    k = round(turns)
    if abs(turns - k) >= WINDING_ROUNDING:
        raise UndersampledLoopError(f"winding {turns:.4f} is not near an integer")
    return int(k)


def sup_distance(a: DiscreteLoop, b: DiscreteLoop) -> float:
    if a.samples.shape != b.samples.shape:
        raise ValueError(f"loop shapes differ: {a.samples.shape} vs {b.samples.shape}")
    return float(np.max(np.linalg.norm(a.samples - b.samples, axis=1)))


def cylinder_to_plane(m):
    """``(u, v, a) -> e^a (u + i v)``; accepts a point, an ``(n, 3)`` array or a loop."""
    if isinstance(m, DiscreteLoop):
        return DiscreteLoop(cylinder_to_plane(m.samples), f"plane image of {m.label}")
    if hasattr(m, "u"):
        arr = np.array([m.u, m.v, m.a], dtype=float)
    else:
        arr = np.asarray(m, dtype=float)
    off = np.abs(arr[..., 0] ** 2 + arr[..., 1] ** 2 - 1)
    if np.any(off > CYLINDER_TOL):
        raise ValueError(f"point off the unit cylinder by {float(np.max(off)):.3e}")
    z = np.exp(arr[..., 2]) * (arr[..., 0] + 1j * arr[..., 1])
    return complex(z) if np.ndim(z) == 0 else z


# -- homotopies ----------------------------------------------------------------

def _homotopy_sheet(a: DiscreteLoop, b: DiscreteLoop, domain) -> tuple[np.ndarray, PuncturedPlane]:
    """Plane images of the straight-line homotopy, shape ``(steps + 1, n)``."""
    s = np.linspace(0.0, 1.0, HOMOTOPY_STEPS + 1)[:, None, None]
    if isinstance(domain, CylinderDomain):
        if a.dim != 3 or b.dim != 3:
            raise ValueError("cylinder mode needs (u, v, a) loops")
        mix = (1 - s) * a.samples[None] + s * b.samples[None]
        r = np.hypot(mix[..., 0], mix[..., 1])
        if np.min(r) <= 1e-9:
            return None, domain.plane()
        mix[..., 0] /= r
        mix[..., 1] /= r
        return np.exp(mix[..., 2]) * (mix[..., 0] + 1j * mix[..., 1]), domain.plane()
    if isinstance(domain, PuncturedPlane):
        za, zb = a.planar()[None], b.planar()[None]
        return ((1 - s[..., 0]) * za + s[..., 0] * zb), domain
    raise TypeError("domain must be a PuncturedPlane or CylinderDomain")


def _sheet_clearance(sheet: np.ndarray, c: complex) -> float:
    """Clearance of a sampled homotopy from ``c``.

    Minimum distance to the sheet's segments in both the loop and time
    directions, less half the largest cell diagonal to cover cell interiors.
    """
    w = sheet - c
    along = np.roll(w, -1, axis=1) - w
    ds = np.abs(along) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.clip(np.where(ds > 0, -(w.real * along.real + w.imag * along.imag) / ds, 0.0), 0, 1)
    d_loop = np.abs(w + s * along)
    up = w[1:] - w[:-1]
    du = np.abs(up) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.clip(np.where(du > 0, -(w[:-1].real * up.real + w[:-1].imag * up.imag) / du, 0.0), 0, 1)
    d_time = np.abs(w[:-1] + s * up)
    diag = np.abs(np.roll(sheet[1:], -1, axis=1) - sheet[:-1])
    return float(min(d_loop.min(), d_time.min()) - 0.5 * diag.max())


def straight_line_homotopy_certify(a: DiscreteLoop, b: DiscreteLoop, domain,
                                   margin: float = 1e-3) -> HomotopyVerdict:
    """Try to certify ``a ~ b`` by the straight-line homotopy; never answers Distinct."""
    if a.samples.shape != b.samples.shape:
        raise ValueError("loops must be sampled identically")
    if not margin > 0:
        raise ValueError("margin must be positive")
    sheet, plane = _homotopy_sheet(a, b, domain)
    if sheet is None:
        return HomotopyVerdict("Inconclusive", reason="interpolation passes through the cylinder axis")
    clear = min((_sheet_clearance(sheet, c) for c in plane.punctures), default=math.inf)
    mode = "cylinder" if isinstance(domain, CylinderDomain) else "plane"
    if clear >= margin:
        return HomotopyVerdict(
            "Equivalent", margin=clear,
            description=f"straight-line homotopy in {mode} mode, {HOMOTOPY_STEPS} time steps, "
                        f"clearance {clear:.6g} from punctures {list(map(_cfmt, plane.punctures))}")
    return HomotopyVerdict("Inconclusive",
                           reason=f"straight-line homotopy clearance {clear:.3e} below margin {margin:g}")


def _cfmt(z: complex) -> str:
    return f"{z.real:.6g}{z.imag:+.6g}i"


def homotopy_verdict(domain, a: DiscreteLoop, b: DiscreteLoop, margin: float = 1e-3) -> HomotopyVerdict:
    """Distinct by winding numbers, else Equivalent by certification, else Inconclusive."""
    if isinstance(domain, CylinderDomain):
        plane = domain.plane()
        pa, pb = cylinder_to_plane(a), cylinder_to_plane(b)
    else:
        plane, pa, pb = domain, a, b
    wa = tuple(winding_number(pa, c) for c in plane.punctures)
    wb = tuple(winding_number(pb, c) for c in plane.punctures)
    if wa != wb:
        return HomotopyVerdict("Distinct", invariant="winding numbers around "
                               + ", ".join(map(_cfmt, plane.punctures)), values=(wa, wb))
    v = straight_line_homotopy_certify(a, b, domain, margin)
    if v.kind == "Inconclusive":
        return HomotopyVerdict("Inconclusive", values=(), reason=f"equal windings {wa}; {v.reason}")
    return v

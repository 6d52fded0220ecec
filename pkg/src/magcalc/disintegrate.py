"""Measure disintegrations: boundary measures induced by measures on chains.

Each registered complex level ships one hand-built map. Decomposability is
decided by measure class:

* ``interval1d`` level 1: ``k·lebesgue`` becomes ``k·counting`` on the endpoints;
* ``rect2d`` level 2: ``k·area`` becomes ``k·arclength`` on the edges;
* ``rect2d`` level 1: ``k·arclength`` becomes ``k·counting`` on the corners;
* ``graph`` level 1: uniform edge weight ``k`` becomes ``k·counting`` on vertices.

The zero measure is decomposable everywhere and maps to the zero measure.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .chain import Chain, ChainComplex, GraphComplex, Interval1DComplex, Rect2DComplex, reduce_chain
from .region import (
    Arclength,
    Counting,
    EdgeWeights,
    Lebesgue,
    Measure,
    RestrictedMeasure,
    SumMeasure,
    ZeroMeasure,
    subspace_algebra,
)


class NotDecomposable(ValueError):
    pass


@dataclass(frozen=True)
class Decomposability:
    ok: bool
    reason: str

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class Disintegration:
    """``π_n``: (n-chain, decomposable measure) ↦ measure on the boundary base set."""

    complex_kind: str
    level: int
    image: Callable[[Measure], Optional[Measure]]
    description: str = ""

    def decomposable(self, mu: Measure) -> Decomposability:
        if isinstance(mu, ZeroMeasure):
            return Decomposability(True, "zero measure")
        if isinstance(mu, SumMeasure):
            left, right = self.decomposable(mu.mu), self.decomposable(mu.nu)
            if left and right:
                return Decomposability(True, "sum of decomposable measures")
            return left if not left else right
        if isinstance(mu, RestrictedMeasure):
            return self.decomposable(mu.mu)
        img = self.image(mu)
        if img is None:
            return Decomposability(False, f"{mu.name} is outside the decomposable class ({self.description})")
        return Decomposability(True, self.description)

    def _image(self, mu: Measure) -> Measure:
        if isinstance(mu, ZeroMeasure):
            return ZeroMeasure(mu.codomain)
        if isinstance(mu, SumMeasure):
            return SumMeasure(self._image(mu.mu), self._image(mu.nu))
        if isinstance(mu, RestrictedMeasure):
            # the restriction lives on the chain's own base set; the image is re-restricted
            return self._image(mu.mu)
        img = self.image(mu)
        if img is None:
            raise NotDecomposable(f"{mu.name}: {self.decomposable(mu).reason}")
        return img

    def __call__(self, cx: ChainComplex, c: Chain, mu: Measure) -> Measure:
        return disintegrate(self, cx, c, mu)


def disintegrate(d: Disintegration, cx: ChainComplex, c: Chain, mu: Measure) -> Measure:
    """Image measure restricted to the subspace algebra of ``base_set(∂c)``."""
    if c.level != d.level:
        raise ValueError(f"disintegration acts on {d.level}-chains, got a {c.level}-chain")
    img = d._image(mu)
    base = cx.boundary(c).base_set()
    if base is None or base.is_empty():
        return ZeroMeasure(img.codomain)
    out = RestrictedMeasure(img, base)
    out.space = subspace_algebra(base, cx.space)
    return out


def decomposable_check(d: Disintegration, mu: Measure) -> Decomposability:
    return d.decomposable(mu)


def _lebesgue_to_counting(mu: Measure) -> Optional[Measure]:
    if type(mu) is Lebesgue and mu.dim == 1:
        return Counting(mu.scale, mu.codomain)
    return None


def _area_to_arclength(mu: Measure) -> Optional[Measure]:
    if type(mu) is Lebesgue and mu.dim == 2:
        return Arclength(mu.scale, mu.codomain)
    return None


def _arclength_to_counting(mu: Measure) -> Optional[Measure]:
    if type(mu) is Arclength:
        return Counting(mu.scale, mu.codomain)
    return None


def _uniform_weights_to_counting(mu: Measure) -> Optional[Measure]:
    if type(mu) is EdgeWeights:
        ws = set(mu.weights.values())
        if len(ws) <= 1:
            return Counting(ws.pop() if ws else mu.default, mu.codomain)
    return None


_REGISTRY: dict[tuple[str, int], Disintegration] = {
    ("interval1d", 1): Disintegration("interval1d", 1, _lebesgue_to_counting, "k·lebesgue ↦ k·counting on endpoints"),
    ("rect2d", 2): Disintegration("rect2d", 2, _area_to_arclength, "k·area ↦ k·arclength on edges"),
    ("rect2d", 1): Disintegration("rect2d", 1, _arclength_to_counting, "k·arclength ↦ k·counting on corners"),
    ("graph", 1): Disintegration("graph", 1, _uniform_weights_to_counting, "uniform edge weight k ↦ k·vertex counting"),
}


def complex_kind(cx: ChainComplex) -> str:
    if isinstance(cx, Interval1DComplex):
        return "interval1d"
    if isinstance(cx, Rect2DComplex):
        return "rect2d"
    if isinstance(cx, GraphComplex):
        return "graph"
    raise KeyError(f"no disintegrations registered for {cx.name}")


def get_disintegration(cx: ChainComplex, level: int) -> Disintegration:
    key = (complex_kind(cx), level)
    if key not in _REGISTRY:
        raise KeyError(f"no disintegration registered for {cx.name} at level {level}")
    return _REGISTRY[key]


def measured_image(cx: ChainComplex, c: Chain, mu: Measure) -> Measure:
    """Disintegrate with the registered map of ``c``'s level."""
    return disintegrate(get_disintegration(cx, c.level), cx, c, mu)


def compose_twice(cx: ChainComplex, c: Chain, mu: Measure) -> tuple[Chain, Measure]:
    """``(π_{n-1} ∘ π_n)(c, μ)``: chain ``∂∂c`` (reduced) and its measure.

    The reduced second boundary is empty for every registered complex, so the
    measure lives on the subspace algebra of ∅ and is the zero measure there.
    """
    first = measured_image(cx, c, mu)
    bc = cx.boundary(c)
    bbc = reduce_chain(cx.boundary(bc))
    if bbc.is_empty():
        return bbc, ZeroMeasure(first.codomain)
    second = measured_image(cx, bc, first)
    return bbc, second

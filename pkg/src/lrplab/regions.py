"""Vertex regions of the box: balls, cubes, annuli, explicit masks.

Geometric regions follow the conventions used throughout the package:
B_r(x) is the closed Euclidean ball of radius r, V_r(x) the cube of
side r centered at x (|v_m - x_m| <= r/2 per axis), and the annulus
A_{r,s}(x) = B_r(x) \\ B_s(x) keeps s < |v - x| <= r.  Membership is a
pure function of the vertex, so masks are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class Region:
    def mask(self, graph) -> np.ndarray:
        """Boolean membership array over the linearized box."""
        raise NotImplementedError

    def complement(self) -> "Region":
        return Complement(self)


def _all_coords(graph) -> np.ndarray:
    return graph.coords(np.arange(graph.n_vertices))


@dataclass(frozen=True)
class Ball(Region):
    center: tuple
    radius: float

    def mask(self, graph):
        diff = _all_coords(graph) - np.asarray(self.center, dtype=float)
        return (diff ** 2).sum(axis=-1) <= self.radius ** 2 + 1e-12


@dataclass(frozen=True)
class Cube(Region):
    center: tuple
    side: float

    def mask(self, graph):
        diff = np.abs(_all_coords(graph) - np.asarray(self.center,
                                                      dtype=float))
        return (diff <= self.side / 2.0 + 1e-12).all(axis=-1)


@dataclass(frozen=True)
class Annulus(Region):
    """s < |v - center| <= r (outer radius r, inner radius s)."""

    center: tuple
    r_outer: float
    r_inner: float

    def mask(self, graph):
        d2 = ((_all_coords(graph) - np.asarray(self.center, dtype=float))
              ** 2).sum(axis=-1)
        return (d2 <= self.r_outer ** 2 + 1e-12) & \
               (d2 > self.r_inner ** 2 + 1e-12)


@dataclass(frozen=True)
class Complement(Region):
    inner: Region

    def mask(self, graph):
        return ~self.inner.mask(graph)


class MaskRegion(Region):
    """Explicit bitmask region."""

    def __init__(self, mask: np.ndarray):
        self._mask = np.asarray(mask, dtype=bool)

    def mask(self, graph):
        if self._mask.size != graph.n_vertices:
            raise ValueError("mask size does not match box")
        return self._mask


def resolve_mask(graph, region) -> np.ndarray | None:
    """None, a Region, or a raw boolean array -> mask (or None = whole box)."""
    if region is None:
        return None
    if isinstance(region, Region):
        return region.mask(graph)
    arr = np.asarray(region, dtype=bool)
    if arr.size != graph.n_vertices:
        raise ValueError("mask size does not match box")
    return arr

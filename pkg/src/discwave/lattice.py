"""Finite-support scalar fields on Z^d and L1-ball geometry.

A :class:`LatticeField` stores a dense box of float64 values together with the
lattice coordinate of the box's lower corner.  Sites outside the box read as
exactly ``0.0``.  The outermost layer of the box is a zero halo so that stencil
reads one cell beyond the support never leave the array.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

MAX_DIM = 4
_INT64_MAX = 2**63 - 1

Site = tuple[int, ...]


def _check_dim(d: int) -> None:
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")


def l1_norm(i: Sequence[int]) -> int:
    return int(sum(abs(int(c)) for c in i))


@lru_cache(maxsize=None)
def _count_slices(d: int, R: int) -> int:
    # enumerate the first coordinate, recurse on the remaining d-1
    if R < 0:
        return 0
    if d == 0:
        return 1
    return sum(_count_slices(d - 1, R - abs(k)) for k in range(-R, R + 1))


def l1_ball_bound(d: int, R: int) -> int:
    """Upper bound ``2**(2d+1) * R**d`` on the number of points with ||i||_1 <= R."""
    _check_dim(d)
    if R < 1:
        raise ValueError(f"the counting bound needs R >= 1, got {R}")
    bound = 2 ** (2 * d + 1) * R**d
    if bound > _INT64_MAX:
        raise OverflowError(f"bound for d={d}, R={R} exceeds the 64-bit range")
    return bound


def count_l1_ball(d: int, R: int) -> int:
    """Exact number of lattice points in the closed L1 ball of radius ``R`` in Z^d."""
    _check_dim(d)
    if R < 0:
        raise ValueError(f"radius must be nonnegative, got {R}")
    # (2R+1)^d dominates the count; refuse anything that could leave int64
    if (2 * R + 1) ** d > _INT64_MAX:
        raise OverflowError(f"count for d={d}, R={R} may exceed the 64-bit range")
    return _count_slices(d, R)


@dataclass(frozen=True)
class L1Ball:
    """The set {i in Z^d : ||i||_1 <= radius}, iterated in lexicographic order."""

    dim: int
    radius: int

    def __post_init__(self):
        _check_dim(self.dim)
        if self.radius < 0:
            raise ValueError(f"radius must be nonnegative, got {self.radius}")

    def __iter__(self) -> Iterator[Site]:
        yield from _ball_points(self.dim, self.radius)

    def __len__(self) -> int:
        return count_l1_ball(self.dim, self.radius)

    def __contains__(self, site) -> bool:
        return len(site) == self.dim and l1_norm(site) <= self.radius


def _ball_points(d: int, r: int) -> Iterator[Site]:
    if d == 1:
        for k in range(-r, r + 1):
            yield (k,)
        return
    for k in range(-r, r + 1):
        for rest in _ball_points(d - 1, r - abs(k)):
            yield (k,) + rest


class LatticeField:
    """Real-valued field on Z^d with finite support, stored as a dense box.

    ``values[idx]`` holds the value at site ``box_lo + idx``.  Every nonzero value
    must sit strictly inside the box (one zero cell of halo on each face).
    """

    __slots__ = ("values", "box_lo")

    def __init__(self, values: np.ndarray, box_lo: Sequence[int]):
        values = np.ascontiguousarray(values, dtype=np.float64)
        box_lo = tuple(int(c) for c in box_lo)
        if values.ndim != len(box_lo):
            raise ValueError("box_lo length must match the array rank")
        if not 1 <= values.ndim <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {values.ndim}")
        if min(values.shape) < 1:
            raise ValueError("box must contain at least one site")
        self.values = values
        self.box_lo = box_lo

    # construction -----------------------------------------------------------

    @classmethod
    def zeros(cls, dim: int, radius: int) -> "LatticeField":
        """Zero field on the symmetric box [-radius-1, radius+1]^dim."""
        if not 1 <= dim <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {dim}")
        m = radius + 1
        return cls(np.zeros((2 * m + 1,) * dim), (-m,) * dim)

    @classmethod
    def from_sites(cls, dim: int, sites: Mapping[Sequence[int], float]) -> "LatticeField":
        radius = max((max(abs(int(c)) for c in s) for s in sites), default=0)
        field = cls.zeros(dim, radius)
        for s, v in sites.items():
            if len(s) != dim:
                raise ValueError(f"site {tuple(s)} does not have {dim} coordinates")
            field.values[field._index(s)] = float(v)
        return field

    def copy(self) -> "LatticeField":
        return LatticeField(self.values.copy(), self.box_lo)

    def embedded(self, half_width: int) -> "LatticeField":
        """Copy of this field on the symmetric box [-half_width, half_width]^d."""
        out = LatticeField(np.zeros((2 * half_width + 1,) * self.dim), (-half_width,) * self.dim)
        nz = np.nonzero(self.values)
        if nz[0].size:
            lo = np.array(self.box_lo)
            coords = np.stack(nz, axis=1) + lo
            if np.abs(coords).max() >= half_width:
                raise ValueError("target box too small for the field's support plus halo")
            dst = tuple((coords + half_width).T)
            out.values[dst] = self.values[nz]
        return out

    # geometry ---------------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def box_hi(self) -> Site:
        return tuple(lo + n - 1 for lo, n in zip(self.box_lo, self.values.shape))

    def _index(self, site: Sequence[int]) -> tuple[int, ...]:
        return tuple(int(c) - lo for c, lo in zip(site, self.box_lo))

    def __getitem__(self, site: Sequence[int]) -> float:
        if len(site) != self.dim:
            raise ValueError(f"site {tuple(site)} does not have {self.dim} coordinates")
        idx = self._index(site)
        if any(k < 0 or k >= n for k, n in zip(idx, self.values.shape)):
            return 0.0
        return float(self.values[idx])

    def nonzero_sites(self) -> Iterator[tuple[Site, float]]:
        """Nonzero sites with their values, in lexicographic order."""
        for idx in zip(*np.nonzero(self.values)):
            site = tuple(int(k) + lo for k, lo in zip(idx, self.box_lo))
            yield site, float(self.values[idx])

    def validate(self) -> None:
        """Raise ``ValueError`` if a nonzero value touches the halo layer."""
        v = self.values
        for axis in range(v.ndim):
            for edge in (0, v.shape[axis] - 1):
                if np.any(np.take(v, edge, axis=axis)):
                    raise ValueError("nonzero value on the box boundary (halo must stay zero)")

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatticeField) or other.dim != self.dim:
            return NotImplemented
        return dict(self.nonzero_sites()) == dict(other.nonzero_sites())

    def __repr__(self) -> str:
        return f"LatticeField(dim={self.dim}, box_lo={self.box_lo}, box_hi={self.box_hi})"


def neighbor_sum(field: LatticeField, site: Sequence[int]) -> float:
    """Sum over axes j of u(i - e_j) + u(i + e_j), axes in increasing order."""
    site = tuple(int(c) for c in site)
    total = 0.0
    for j in range(field.dim):
        lo = site[:j] + (site[j] - 1,) + site[j + 1 :]
        hi = site[:j] + (site[j] + 1,) + site[j + 1 :]
        total += field[lo] + field[hi]
    return total


def support_radius(field: LatticeField) -> int | None:
    """Largest L1 norm among nonzero sites, or ``None`` when the field is zero."""
    nz = np.nonzero(field.values)
    if nz[0].size == 0:
        return None
    norms = np.zeros(nz[0].size, dtype=np.int64)
    for axis, lo in zip(nz, field.box_lo):
        norms += np.abs(axis + lo)
    return int(norms.max())


# snapshot files ---------------------------------------------------------------


def write_snapshot(field: LatticeField, path: str | Path) -> None:
    """One row per nonzero site: i_1..i_d, value.  The header fixes the dimension."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"i_{j + 1}" for j in range(field.dim)] + ["value"])
        for site, value in field.nonzero_sites():
            w.writerow(list(site) + [repr(value)])


def read_snapshot(path: str | Path) -> LatticeField:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty snapshot file")
    header = [c.strip() for c in rows[0]]
    expected = [f"i_{j + 1}" for j in range(len(header) - 1)] + ["value"]
    if len(header) < 2 or header != expected:
        raise ValueError(f"{path}: header must read i_1,...,i_d,value; got {header}")
    dim = len(header) - 1
    sites: dict[Site, float] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != dim + 1:
            raise ValueError(f"{path}:{lineno}: expected {dim + 1} columns")
        site = tuple(int(c) for c in row[:dim])
        if site in sites:
            raise ValueError(f"{path}:{lineno}: duplicate site {site}")
        sites[site] = float(row[dim])
    return LatticeField.from_sites(dim, sites)


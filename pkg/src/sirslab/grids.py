"""Uniform grids, field containers, and second-order discrete calculus.

Two grid families are used throughout:

* :class:`CellGrid` — the periodicity cell ``[0, 1)^n`` with ``resolution``
  points per axis.  Every cell-level operator (eigenvalues, steady states)
  lives here.
* :class:`DomainGrid` — a large truncated domain ``[-L, L)^n`` with spacing
  ``h``, periodic (default) or reflecting boundary, used by the time
  integrator.  ``1/h`` and ``L/h`` must be integers so domain points land
  exactly on cell points modulo the period.

Fields are flat float arrays tied to their grid; the array is copied on
construction and frozen, so fields can be shared without defensive copies.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import numpy.typing as npt
from scipy import sparse
from scipy.linalg import solve_banded
from scipy.sparse.linalg import splu

from .errors import ValidationError

PERIODIC = "periodic"
NEUMANN = "neumann"

_BOUNDARIES = (PERIODIC, NEUMANN)


@dataclass(frozen=True)
class CellGrid:
    """Uniform grid on the periodicity cell [0, 1)^n (always periodic)."""

    dimension: int
    resolution: int

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2):
            raise ValidationError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.resolution < 16:
            raise ValidationError(
                f"cell resolution must be at least 16, got {self.resolution}"
            )

    @property
    def spacing(self) -> float:
        return 1.0 / self.resolution

    @property
    def boundary(self) -> str:
        return PERIODIC

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.resolution,) * self.dimension

    @property
    def num_points(self) -> int:
        return self.resolution**self.dimension

    @property
    def measure(self) -> float:
        """Volume of the region covered by the grid."""
        return 1.0

    def axis_coordinates(self) -> npt.NDArray[np.float64]:
        return np.arange(self.resolution) * self.spacing

    def points(self) -> npt.NDArray[np.float64]:
        """All grid points as an (num_points, dimension) array, C order."""
        return _mesh_points(self.axis_coordinates(), self.dimension)


@dataclass(frozen=True)
class DomainGrid:
    """Uniform grid on the truncated domain [-L, L)^n.

    Periodic boundaries identify -L with L (the right endpoint is not
    stored); reflecting ("neumann") boundaries store both endpoints.
    """

    dimension: int
    half_width: float
    step: float
    boundary: str = PERIODIC

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2):
            raise ValidationError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.boundary not in _BOUNDARIES:
            raise ValidationError(
                f"boundary must be one of {_BOUNDARIES}, got {self.boundary!r}"
            )
        if not self.step > 0:
            raise ValidationError(f"domain step must be positive, got {self.step}")
        if not self.half_width > 0:
            raise ValidationError(
                f"domain half width must be positive, got {self.half_width}"
            )
        if not _is_integer(1.0 / self.step):
            raise ValidationError(
                f"1/step must be an integer so the domain grid is commensurate "
                f"with the periodicity cell, got step={self.step}"
            )
        if not _is_integer(self.half_width / self.step):
            raise ValidationError(
                f"half_width/step must be an integer so the origin lies on the "
                f"grid, got half_width={self.half_width}, step={self.step}"
            )

    @property
    def spacing(self) -> float:
        return self.step

    @property
    def points_per_axis(self) -> int:
        n = round(2 * self.half_width / self.step)
        return n if self.boundary == PERIODIC else n + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dimension

    @property
    def num_points(self) -> int:
        return self.points_per_axis**self.dimension

    @property
    def measure(self) -> float:
        return (2.0 * self.half_width) ** self.dimension

    def axis_coordinates(self) -> npt.NDArray[np.float64]:
        return np.arange(self.points_per_axis) * self.step - self.half_width

    def points(self) -> npt.NDArray[np.float64]:
        return _mesh_points(self.axis_coordinates(), self.dimension)


Grid = CellGrid | DomainGrid


def _is_integer(x: float, tol: float = 1e-9) -> bool:
    return abs(x - round(x)) <= tol * max(1.0, abs(x))


def _mesh_points(axis: np.ndarray, dimension: int) -> npt.NDArray[np.float64]:
    if dimension == 1:
        return axis[:, None].copy()
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


class Field:
    """A scalar field sampled on a grid: flat values plus the owning grid.

    The value array is copied and made read-only at construction; use
    :meth:`with_values` to derive a new field on the same grid.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values: npt.ArrayLike) -> None:
        array = np.array(values, dtype=float).ravel()
        if array.size != grid.num_points:
            raise ValidationError(
                f"field has {array.size} values but grid has {grid.num_points} points"
            )
        if not np.all(np.isfinite(array)):
            raise ValidationError("field contains non-finite values")
        array.flags.writeable = False
        self.grid = grid
        self.values = array

    def with_values(self, values: npt.ArrayLike) -> "Field":
        return Field(self.grid, values)

    def shaped(self) -> np.ndarray:
        """Values reshaped to the grid's n-dimensional layout (read-only view)."""
        return self.values.reshape(self.grid.shape)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"Field(grid={self.grid!r}, min={self.values.min():.6g}, "
            f"max={self.values.max():.6g})"
        )


def constant_field(grid: Grid, value: float) -> Field:
    return Field(grid, np.full(grid.num_points, float(value)))


# ---------------------------------------------------------------------------
# Stencil application (second order)
# ---------------------------------------------------------------------------


def _laplacian_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    v = values.reshape(grid.shape)
    h2 = grid.spacing**2
    out = np.zeros_like(v)
    for axis in range(grid.dimension):
        if grid.boundary == PERIODIC:
            out += (np.roll(v, -1, axis=axis) + np.roll(v, 1, axis=axis) - 2.0 * v) / h2
        else:
            pad = [(0, 0)] * grid.dimension
            pad[axis] = (1, 1)
            vp = np.pad(v, pad, mode="reflect")
            sl_hi = [slice(None)] * grid.dimension
            sl_lo = [slice(None)] * grid.dimension
            sl_hi[axis] = slice(2, None)
            sl_lo[axis] = slice(None, -2)
            out += (vp[tuple(sl_hi)] + vp[tuple(sl_lo)] - 2.0 * v) / h2
    return out.ravel()


def apply_laplacian(f: Field) -> Field:
    """Second-order Laplacian stencil; periodic wrap or reflecting ghosts."""
    return f.with_values(_laplacian_values(f.values, f.grid))


def apply_gradient_dot(rho: Sequence[float], f: Field) -> Field:
    """Centered first difference approximation of rho . grad(f).

    Only defined on periodic grids (the drift operator lives on the cell).
    """
    grid = f.grid
    if grid.boundary != PERIODIC:
        raise ValidationError("apply_gradient_dot requires a periodic grid")
    rho_arr = np.asarray(rho, dtype=float).ravel()
    if rho_arr.size != grid.dimension:
        raise ValidationError(
            f"rho has {rho_arr.size} components, grid dimension is {grid.dimension}"
        )
    v = f.shaped()
    out = np.zeros_like(v)
    two_h = 2.0 * grid.spacing
    for axis in range(grid.dimension):
        if rho_arr[axis] == 0.0:
            continue
        out += rho_arr[axis] * (np.roll(v, -1, axis=axis) - np.roll(v, 1, axis=axis)) / two_h
    return f.with_values(out.ravel())


# ---------------------------------------------------------------------------
# Integrals and norms
# ---------------------------------------------------------------------------


def integral(f: Field) -> float:
    """Integral over the grid's region (trapezoid; plain sum when periodic)."""
    grid = f.grid
    hn = grid.spacing**grid.dimension
    if grid.boundary == PERIODIC:
        return hn * float(f.values.sum())
    v = f.shaped().copy()
    for axis in range(grid.dimension):
        w = np.ones(grid.shape[axis])
        w[0] = w[-1] = 0.5
        shape = [1] * grid.dimension
        shape[axis] = -1
        v *= w.reshape(shape)
    return hn * float(v.sum())


def cell_average(f: Field) -> float:
    """Area average of the field over its grid's region."""
    return integral(f) / f.grid.measure


def l2_norm(f: Field) -> float:
    """L2 norm with the region's volume element (cell fields: sqrt(mean(f^2)))."""
    return float(np.sqrt(integral(f.with_values(f.values**2))))


def sup_norm(f: Field) -> float:
    return float(np.max(np.abs(f.values)))


# ---------------------------------------------------------------------------
# Sparse operator matrices (flattened C order, matching the stencils above)
# ---------------------------------------------------------------------------


def _laplacian_1d(n: int, h: float, boundary: str) -> sparse.csr_matrix:
    main = np.full(n, -2.0)
    off = np.ones(n - 1)
    mat = sparse.diags([off, main, off], [-1, 0, 1], format="lil")
    if boundary == PERIODIC:
        mat[0, n - 1] = 1.0
        mat[n - 1, 0] = 1.0
    else:
        mat[0, 1] = 2.0
        mat[n - 1, n - 2] = 2.0
    return (mat / h**2).tocsr()


def _gradient_1d(n: int, h: float) -> sparse.csr_matrix:
    off = np.full(n - 1, 1.0)
    mat = sparse.diags([-off, off], [-1, 1], format="lil")
    mat[0, n - 1] = -1.0
    mat[n - 1, 0] = 1.0
    return (mat / (2.0 * h)).tocsr()


def laplacian_matrix(grid: Grid) -> sparse.csr_matrix:
    """Sparse matrix of :func:`apply_laplacian` on flattened fields."""
    n = grid.shape[0]
    lap1 = _laplacian_1d(n, grid.spacing, grid.boundary)
    if grid.dimension == 1:
        return lap1
    eye = sparse.identity(n, format="csr")
    return (sparse.kron(lap1, eye) + sparse.kron(eye, lap1)).tocsr()


def gradient_matrix(grid: Grid, axis: int) -> sparse.csr_matrix:
    """Sparse matrix of the centered difference along one axis (periodic)."""
    if grid.boundary != PERIODIC:
        raise ValidationError("gradient_matrix requires a periodic grid")
    n = grid.shape[0]
    grad1 = _gradient_1d(n, grid.spacing)
    if grid.dimension == 1:
        return grad1
    eye = sparse.identity(n, format="csr")
    if axis == 0:
        return sparse.kron(grad1, eye).tocsr()
    return sparse.kron(eye, grad1).tocsr()


# ---------------------------------------------------------------------------
# Implicit diffusion solves
# ---------------------------------------------------------------------------


class DiffusionSolver:
    """Factorization of (I - c * Laplacian) reused across implicit steps.

    One-dimensional periodic problems use the banded Thomas solver with a
    Sherman-Morrison correction for the two wrap-around corner entries;
    everything else goes through a cached sparse LU factorization.
    """

    def __init__(self, grid: Grid, c: float) -> None:
        if not c > 0:
            raise ValidationError(f"diffusion factor must be positive, got {c}")
        self.grid = grid
        self.c = c
        self._banded: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None
        self._lu = None
        if grid.dimension == 1 and grid.boundary == PERIODIC:
            self._init_banded(grid.shape[0], c / grid.spacing**2)
        else:
            mat = sparse.identity(grid.num_points, format="csc") - c * laplacian_matrix(grid)
            self._lu = splu(mat.tocsc())

    def _init_banded(self, n: int, r: float) -> None:
        # (I - c*Lap) has diagonal 1+2r, off-diagonals -r, corners -r.
        # Sherman-Morrison: A = A' + u v^T with u = (g, 0, .., 0, -r)^T,
        # v = (1, 0, .., 0, -r/g)^T and A' tridiagonal with modified ends.
        gamma = -(1.0 + 2.0 * r)
        diag = np.full(n, 1.0 + 2.0 * r)
        diag[0] -= gamma
        diag[-1] -= r * r / gamma
        lower = np.full(n, -r)
        upper = np.full(n, -r)
        ab = np.zeros((3, n))
        ab[0, 1:] = upper[:-1]
        ab[1] = diag
        ab[2, :-1] = lower[1:]
        u = np.zeros(n)
        u[0] = gamma
        u[-1] = -r
        v = np.zeros(n)
        v[0] = 1.0
        v[-1] = -r / gamma
        z = solve_banded((1, 1), ab, u)
        self._banded = (ab, v, z)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve (I - c*Lap) x = rhs; rhs may be (n,) or (n, k)."""
        if self._banded is not None:
            ab, v, z = self._banded
            y = solve_banded((1, 1), ab, rhs)
            correction = (v @ y) / (1.0 + v @ z)
            if y.ndim == 1:
                return y - correction * z
            return y - z[:, None] * correction
        return self._lu.solve(np.ascontiguousarray(rhs))


# ---------------------------------------------------------------------------
# Delimited export
# ---------------------------------------------------------------------------

_COORD_NAMES = ("x", "y")


def write_table(
    path: Path | str,
    header: Sequence[str],
    columns: Sequence[np.ndarray],
) -> None:
    """Write tab-separated columns with a header row (full float precision)."""
    if len(header) != len(columns):
        raise ValidationError("header and column counts differ")
    data = np.column_stack([np.asarray(col, dtype=float) for col in columns])
    np.savetxt(
        path,
        data,
        fmt="%.17g",
        delimiter="\t",
        header="\t".join(header),
        comments="",
    )


def read_table(path: Path | str) -> tuple[list[str], np.ndarray]:
    """Read a table written by :func:`write_table`; returns (header, data)."""
    with open(path, "r", encoding="utf-8") as handle:
        header = handle.readline().strip().split("\t")
    data = np.loadtxt(path, delimiter="\t", skiprows=1, ndmin=2)
    return header, data


def write_fields(path: Path | str, fields: dict[str, Field]) -> None:
    """Export named fields on a common grid, one row per grid point.

    Columns are the point coordinates followed by one column per field;
    rows are in flat C order (lexicographic by grid index).
    """
    grids = {id(f.grid) for f in fields.values()}
    if len(grids) > 1:
        raise ValidationError("all exported fields must share one grid")
    first = next(iter(fields.values()))
    pts = first.grid.points()
    header = list(_COORD_NAMES[: first.grid.dimension]) + list(fields)
    columns = [pts[:, a] for a in range(first.grid.dimension)]
    columns += [f.values for f in fields.values()]
    write_table(path, header, columns)


def read_fields(path: Path | str, grid: Grid) -> dict[str, Field]:
    """Inverse of :func:`write_fields` for a known grid."""
    header, data = read_table(path)
    ncoord = grid.dimension
    out: dict[str, Field] = {}
    for j, name in enumerate(header[ncoord:], start=ncoord):
        out[name] = Field(grid, data[:, j])
    return out

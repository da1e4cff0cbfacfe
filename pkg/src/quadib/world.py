"""Occupancy ingestion, cell priors, and finest-resolution world assembly.

The world model couples a per-cell prior p(x) with a per-cell conditional
p(y|x) over a power-of-two grid.  Inputs of arbitrary size are padded up to
the next power of two with zero-mass cells, which are provably inert for
everything downstream.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np


class ParseError(ValueError):
    """Malformed input data (map files, CSVs, tree documents)."""


class ConfigError(ValueError):
    """Structurally valid input with unusable content."""


@dataclass(frozen=True)
class OutcomeSpace:
    """Ordered outcomes of the relevance variable."""

    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) < 2:
            raise ValueError("an outcome space needs at least two outcomes")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("outcome labels must be unique")
        if any(not label for label in self.labels):
            raise ValueError("outcome labels must be non-empty")

    @property
    def size(self) -> int:
        return len(self.labels)


OCCUPANCY_OUTCOMES = OutcomeSpace(("free", "occupied"))

ROW_SUM_ATOL = 1e-6  # conditional rows further off than this are rejected
_EXACT_ATOL = 1e-12  # below this, skip renormalization so assembly is idempotent


@dataclass(frozen=True, eq=False)
class OccupancyField:
    """Per-cell conditional p(y|x) on a width x height grid."""

    width: int
    height: int
    cond: np.ndarray  # (height, width, n_outcomes)
    outcomes: OutcomeSpace = OCCUPANCY_OUTCOMES

    def __post_init__(self):
        cond = np.ascontiguousarray(np.asarray(self.cond, dtype=np.float64))
        if cond.shape != (self.height, self.width, self.outcomes.size):
            raise ValueError(
                f"cond has shape {cond.shape}, expected "
                f"({self.height}, {self.width}, {self.outcomes.size})"
            )
        if np.any(cond < 0):
            raise ValueError("conditional probabilities must be non-negative")
        sums = cond.sum(axis=-1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise ValueError("every per-cell conditional must sum to 1")
        cond.setflags(write=False)
        object.__setattr__(self, "cond", cond)

    def occupied_prob(self) -> np.ndarray:
        """The occupied-outcome slice, for rendering and round trips."""
        idx = self.outcomes.labels.index("occupied")
        return self.cond[..., idx]


_WHITESPACE = b" \t\r\n\x0b\x0c"


def _pgm_token(data: bytes, pos: int) -> tuple[bytes, int, int]:
    n = len(data)
    while pos < n:
        byte = data[pos]
        if byte in _WHITESPACE:
            pos += 1
        elif byte == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    if pos >= n:
        raise ParseError(f"unexpected end of PGM data at byte {n}")
    start = pos
    while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
        pos += 1
    return data[start:pos], start, pos


def _pgm_int(data: bytes, pos: int, what: str) -> tuple[int, int, int]:
    token, start, pos = _pgm_token(data, pos)
    try:
        value = int(token)
    except ValueError:
        raise ParseError(
            f"invalid {what} {token!r} at byte {start}"
        ) from None
    return value, start, pos


def load_occupancy_pgm(data: bytes) -> OccupancyField:
    """Parse a PGM image (plain P2 or binary P5) as occupancy probabilities.

    Pixel value / maxval is read as p(y=occupied | x); header comments are
    allowed and maxval may be up to 65535 (two-byte big-endian samples in
    P5).  Malformed input raises ParseError naming the byte offset.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("load_occupancy_pgm expects raw bytes")
    data = bytes(data)
    magic, start, pos = _pgm_token(data, 0)
    if magic not in (b"P2", b"P5"):
        raise ParseError(f"unsupported PGM magic {magic!r} at byte {start}")
    width, size_at, pos = _pgm_int(data, pos, "width")
    height, _, pos = _pgm_int(data, pos, "height")
    if width < 1 or height < 1:
        raise ParseError(f"degenerate image size {width}x{height} at byte {size_at}")
    maxval, maxval_at, pos = _pgm_int(data, pos, "maxval")
    if maxval == 0:
        raise ParseError(f"zero maxval at byte {maxval_at}")
    if not 1 <= maxval <= 65535:
        raise ParseError(f"maxval {maxval} out of range [1, 65535] at byte {maxval_at}")

    count = width * height
    if magic == b"P5":
        if pos >= len(data) or data[pos] not in _WHITESPACE:
            raise ParseError(f"expected whitespace after maxval at byte {pos}")
        raster = pos + 1
        itemsize = 2 if maxval > 255 else 1
        need = count * itemsize
        if len(data) - raster < need:
            raise ParseError(
                f"truncated pixel data at byte {len(data)}: "
                f"need {need} bytes, have {len(data) - raster}"
            )
        dtype = ">u2" if itemsize == 2 else np.uint8
        values = np.frombuffer(data, dtype=dtype, count=count, offset=raster)
        values = values.astype(np.int64)
        over = np.nonzero(values > maxval)[0]
        if over.size:
            offset = raster + int(over[0]) * itemsize
            raise ParseError(
                f"pixel value {int(values[over[0]])} exceeds maxval {maxval} "
                f"at byte {offset}"
            )
    else:
        values = np.empty(count, dtype=np.int64)
        for i in range(count):
            try:
                token, start, pos = _pgm_token(data, pos)
            except ParseError:
                raise ParseError(
                    f"truncated pixel data at byte {len(data)}: "
                    f"expected {count} values, got {i}"
                ) from None
            try:
                value = int(token)
            except ValueError:
                raise ParseError(
                    f"invalid pixel value {token!r} at byte {start}"
                ) from None
            if value < 0 or value > maxval:
                raise ParseError(
                    f"pixel value {value} exceeds maxval {maxval} at byte {start}"
                )
            values[i] = value

    occupied = values.reshape(height, width) / float(maxval)
    cond = np.stack([1.0 - occupied, occupied], axis=-1)
    return OccupancyField(width=width, height=height, cond=cond)


def load_occupancy_csv(text: str) -> OccupancyField:
    """Parse a rectangular CSV of p(y=occupied | x) values in [0, 1]."""
    lines = text.split("\n")
    while lines and lines[-1].strip() == "":
        lines.pop()
    if not lines:
        raise ParseError("empty CSV input")
    rows = []
    width = None
    for r, line in enumerate(lines):
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(
                f"row {r}: expected {width} columns, got {len(cells)}"
            )
        row = []
        for c, cell in enumerate(cells):
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(
                    f"row {r}, column {c}: not a number: {cell.strip()!r}"
                ) from None
            if not 0.0 <= value <= 1.0:
                raise ParseError(
                    f"row {r}, column {c}: value {value} outside [0, 1]"
                )
            row.append(value)
        rows.append(row)
    occupied = np.array(rows, dtype=np.float64)
    cond = np.stack([1.0 - occupied, occupied], axis=-1)
    return OccupancyField(width=width, height=len(rows), cond=cond)


def load_weight_csv(text: str) -> np.ndarray:
    """Parse a rectangular CSV of non-negative weights (used by explicit priors)."""
    lines = text.split("\n")
    while lines and lines[-1].strip() == "":
        lines.pop()
    if not lines:
        raise ParseError("empty weight CSV")
    rows = []
    width = None
    for r, line in enumerate(lines):
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(f"row {r}: expected {width} columns, got {len(cells)}")
        row = []
        for c, cell in enumerate(cells):
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(
                    f"row {r}, column {c}: not a number: {cell.strip()!r}"
                ) from None
            if not math.isfinite(value) or value < 0:
                raise ParseError(
                    f"row {r}, column {c}: weight {value} must be finite and >= 0"
                )
            row.append(value)
        rows.append(row)
    return np.array(rows, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class PriorSpec:
    """Cell-prior recipe: uniform, gaussian (mean/cov in cell units), or explicit weights."""

    kind: str
    mean: np.ndarray | None = None
    cov: np.ndarray | None = None
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "uniform":
            pass
        elif self.kind == "gaussian":
            mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
            if mean.shape != (2,):
                raise ConfigError("gaussian prior needs a 2-vector mean")
            cov = np.asarray(self.cov, dtype=np.float64)
            if cov.shape != (2, 2):
                raise ConfigError("gaussian prior needs a 2x2 covariance")
            if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
                raise ConfigError("gaussian covariance must be symmetric")
            try:
                np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                raise ConfigError(
                    "gaussian covariance must be positive definite"
                ) from None
            object.__setattr__(self, "mean", mean)
            object.__setattr__(self, "cov", cov)
        elif self.kind == "explicit":
            weights = np.asarray(self.weights, dtype=np.float64)
            if weights.ndim != 2:
                raise ConfigError("explicit prior weights must form a 2-D grid")
            if np.any(~np.isfinite(weights)) or np.any(weights < 0):
                raise ConfigError("explicit prior weights must be finite and >= 0")
            if not weights.sum() > 0:
                raise ConfigError("explicit prior weights must not all be zero")
            object.__setattr__(self, "weights", weights)
        else:
            raise ConfigError(f"unknown prior kind {self.kind!r}")

    @classmethod
    def from_json(cls, source: str | dict, base_dir: str = ".") -> "PriorSpec":
        """Build a spec from the JSON config form.

        `source` may be the JSON text itself or an already-decoded object.
        An explicit prior's "path" is resolved relative to `base_dir`.
        """
        if isinstance(source, str):
            try:
                obj = json.loads(source)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid prior JSON: {exc}") from None
        else:
            obj = source
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ConfigError('prior config must be an object with a "kind" key')
        kind = obj["kind"]
        if kind == "uniform":
            return cls(kind="uniform")
        if kind == "gaussian":
            if "mean" not in obj or "cov" not in obj:
                raise ConfigError('gaussian prior config needs "mean" and "cov"')
            return cls(kind="gaussian", mean=obj["mean"], cov=obj["cov"])
        if kind == "explicit":
            if "path" not in obj:
                raise ConfigError('explicit prior config needs a "path"')
            path = os.path.join(base_dir, obj["path"])
            try:
                with open(path, "r", encoding="ascii") as handle:
                    weights = load_weight_csv(handle.read())
            except OSError as exc:
                raise ConfigError(f"cannot read prior weights {path!r}: {exc}") from None
            return cls(kind="explicit", weights=weights)
        raise ConfigError(f"unknown prior kind {kind!r}")


GAUSSIAN_MASS_FLOOR = 1e-12  # normalized cell masses at or below this are zeroed


def build_prior(spec: PriorSpec, width: int, height: int) -> np.ndarray:
    """Evaluate a prior spec on a width x height grid; returns weights summing to 1.

    The gaussian kind evaluates the bivariate normal density at cell centers
    (col + 0.5, row + 0.5) and normalizes; cells whose normalized mass does
    not exceed GAUSSIAN_MASS_FLOOR are then made exactly massless, so the
    far tail is inert rather than carrying denormal-sized crumbs.  Uniform
    puts 1/(width*height) everywhere.
    """
    if width < 1 or height < 1:
        raise ConfigError(f"grid {width}x{height} is degenerate")
    if spec.kind == "uniform":
        return np.full((height, width), 1.0 / (width * height))
    if spec.kind == "gaussian":
        cols, rows = np.meshgrid(
            np.arange(width) + 0.5, np.arange(height) + 0.5
        )
        centered = np.stack([cols - spec.mean[0], rows - spec.mean[1]], axis=-1)
        chol = np.linalg.cholesky(spec.cov)
        solved = np.linalg.solve(chol, centered.reshape(-1, 2).T)
        quad = np.sum(solved * solved, axis=0).reshape(height, width)
        density = np.exp(-0.5 * quad)
        total = density.sum()
        if not total > 0:
            raise ConfigError(
                "gaussian prior underflows to zero everywhere on the grid"
            )
        density = density / total
        density[density <= GAUSSIAN_MASS_FLOOR] = 0.0
        return density / density.sum()
    if spec.kind == "explicit":
        if spec.weights.shape != (height, width):
            raise ConfigError(
                f"explicit prior weights have shape {spec.weights.shape}, "
                f"expected ({height}, {width})"
            )
        return spec.weights / spec.weights.sum()
    raise ConfigError(f"unknown prior kind {spec.kind!r}")


@dataclass(frozen=True, eq=False)
class WorldModel:
    """Finest-resolution joint model on a 2^depth x 2^depth grid.

    prior holds p(x) (zero exactly on padded cells), cond holds p(y|x); the
    joint is p(x, y) = p(y|x) p(x).  Instances are immutable and safe to
    share across workers.
    """

    depth: int
    side: int
    prior: np.ndarray  # (side, side)
    cond: np.ndarray  # (side, side, n_outcomes)
    outcomes: OutcomeSpace

    def __post_init__(self):
        if self.side != 1 << self.depth:
            raise ValueError(f"side {self.side} is not 2^{self.depth}")
        if self.prior.shape != (self.side, self.side):
            raise ValueError("prior shape does not match the grid")
        if self.cond.shape != (self.side, self.side, self.outcomes.size):
            raise ValueError("cond shape does not match the grid")
        if np.any(self.prior < 0):
            raise ValueError("prior must be non-negative")
        if abs(float(self.prior.sum()) - 1.0) > 1e-9:
            raise ValueError("prior must sum to 1")
        if np.any(np.abs(self.cond.sum(axis=-1) - 1.0) > 1e-9):
            raise ValueError("every conditional row must sum to 1")

    @property
    def n_cells(self) -> int:
        return self.side * self.side

    @classmethod
    def from_grids(
        cls,
        prior: np.ndarray,
        cond: np.ndarray,
        outcomes: OutcomeSpace = OCCUPANCY_OUTCOMES,
    ) -> "WorldModel":
        """Validate and normalize square power-of-two grids into a model.

        Prior and conditional rows already within 1e-12 of normalized are
        left untouched, so re-assembling a model reproduces it byte for
        byte; rows further than 1e-6 from 1 are rejected instead of being
        silently rescaled.
        """
        prior = np.ascontiguousarray(np.asarray(prior, dtype=np.float64))
        cond = np.ascontiguousarray(np.asarray(cond, dtype=np.float64))
        if prior.ndim != 2 or prior.shape[0] != prior.shape[1]:
            raise ConfigError("prior grid must be square")
        side = prior.shape[0]
        if side & (side - 1) or side < 1:
            raise ConfigError(f"side {side} is not a power of two")
        if np.any(prior < 0) or np.any(~np.isfinite(prior)):
            raise ConfigError("prior weights must be finite and >= 0")
        total = float(prior.sum())
        if not total > 0:
            raise ConfigError("prior has no mass")
        if abs(total - 1.0) > _EXACT_ATOL:
            prior = prior / total
        if cond.shape[:2] != (side, side):
            raise ConfigError("conditional grid does not match the prior grid")
        if np.any(cond < 0) or np.any(~np.isfinite(cond)):
            raise ConfigError("conditional probabilities must be finite and >= 0")
        sums = cond.sum(axis=-1)
        worst = int(np.argmax(np.abs(sums - 1.0)))
        if abs(sums.flat[worst] - 1.0) > ROW_SUM_ATOL:
            r, c = divmod(worst, side)
            raise ConfigError(
                f"conditional at cell ({r}, {c}) sums to {sums.flat[worst]!r}, "
                f"more than {ROW_SUM_ATOL} away from 1"
            )
        scale = np.where(np.abs(sums - 1.0) > _EXACT_ATOL, sums, 1.0)
        cond = cond / scale[..., None]
        prior.setflags(write=False)
        cond.setflags(write=False)
        depth = side.bit_length() - 1
        return cls(depth=depth, side=side, prior=prior, cond=cond, outcomes=outcomes)


def assemble_world(occ: OccupancyField, prior: np.ndarray) -> WorldModel:
    """Pad to the next power of two and assemble the finest world model.

    Padded cells get p(x) = 0 exactly and a uniform conditional; the prior
    is renormalized over the original cells.
    """
    prior = np.asarray(prior, dtype=np.float64)
    if prior.shape != (occ.height, occ.width):
        raise ConfigError(
            f"prior grid {prior.shape} does not match the "
            f"{occ.height}x{occ.width} occupancy field"
        )
    if np.any(prior < 0) or np.any(~np.isfinite(prior)):
        raise ConfigError("prior weights must be finite and >= 0")
    if not prior.sum() > 0:
        raise ConfigError("prior has no mass on the occupancy grid")
    longest = max(occ.width, occ.height)
    depth = max(longest - 1, 0).bit_length()
    side = 1 << depth
    n = occ.outcomes.size
    padded_prior = np.zeros((side, side))
    padded_prior[: occ.height, : occ.width] = prior
    padded_cond = np.full((side, side, n), 1.0 / n)
    padded_cond[: occ.height, : occ.width] = occ.cond
    return WorldModel.from_grids(padded_prior, padded_cond, occ.outcomes)


def write_pgm(occupied: np.ndarray, maxval: int = 255) -> bytes:
    """Encode occupied-probabilities in [0, 1] as a binary (P5) PGM."""
    occupied = np.asarray(occupied, dtype=np.float64)
    if occupied.ndim != 2:
        raise ValueError("expected a 2-D grid of occupied probabilities")
    if not 1 <= maxval <= 65535:
        raise ValueError("maxval must be in [1, 65535]")
    quantized = np.rint(np.clip(occupied, 0.0, 1.0) * maxval).astype(np.int64)
    height, width = occupied.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    dtype = ">u2" if maxval > 255 else np.uint8
    return header + quantized.astype(dtype).tobytes()

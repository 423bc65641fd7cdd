"""Orthogonal 2D discrete wavelet transform (Haar and Daubechies db2).

Conventions, fixed so results are bit-reproducible:

- Boundary handling is periodic (circular) extension, the only mode that
  keeps the transform exactly orthogonal; perfect reconstruction and energy
  conservation then hold to rounding error rather than approximately.
- 1D analysis is circular convolution followed by downsampling that keeps
  even output indices: y[n] = sum_k h[k] * x[(2n - k) mod N].
- 2D analysis filters rows first (along each row, i.e. the column axis),
  then columns. Subbands: cA = (lo, lo), cH = (lo rows, hi cols), cV =
  (hi rows, lo cols), cD = (hi, hi); cH carries horizontal-edge detail.
- Synthesis is the exact adjoint of analysis (equivalently: upsample by 2,
  filter with the time-reversed reconstruction filters, sum branches).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DataError
from .imgio import crop, pad_to_block


class WaveletKind(str, Enum):
    HAAR = "haar"
    DB2 = "db2"


@dataclass(frozen=True)
class FilterBank:
    """Decomposition/reconstruction filter quadruple of an orthogonal wavelet."""

    lo_d: np.ndarray
    hi_d: np.ndarray
    lo_r: np.ndarray
    hi_r: np.ndarray

    @property
    def length(self) -> int:
        return self.lo_d.size


_SQRT3 = math.sqrt(3.0)
_HAAR_LO = np.array([1.0, 1.0]) / math.sqrt(2.0)
_DB2_LO = np.array([1.0 + _SQRT3, 3.0 + _SQRT3, 3.0 - _SQRT3, 1.0 - _SQRT3]) / (
    4.0 * math.sqrt(2.0)
)


def filter_bank(kind: WaveletKind) -> FilterBank:
    """Return the filter bank for a wavelet kind.

    The high-pass is the quadrature mirror of the low-pass,
    hi_d[k] = (-1)^k * lo_d[L-1-k], and the reconstruction filters are the
    time-reverses of the decomposition filters.
    """
    kind = WaveletKind(kind)
    lo_d = _HAAR_LO if kind is WaveletKind.HAAR else _DB2_LO
    n = lo_d.size
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    hi_d = signs * lo_d[::-1]
    return FilterBank(lo_d=lo_d, hi_d=hi_d, lo_r=lo_d[::-1].copy(), hi_r=hi_d[::-1].copy())


def _analyze_axis(a, lo, hi, axis):
    """Circular convolve with both filters along one axis, keep even phases."""
    n = a.shape[axis]
    if n % 2:
        raise DataError(f"axis {axis} has odd length {n}; pad to even dims first")
    take = [slice(None), slice(None)]
    take[axis] = slice(0, None, 2)
    take = tuple(take)
    shape = list(a.shape)
    shape[axis] //= 2
    out_lo = np.zeros(shape)
    out_hi = np.zeros(shape)
    for k in range(lo.size):
        evens = np.roll(a, k, axis=axis)[take]
        out_lo += lo[k] * evens
        out_hi += hi[k] * evens
    return out_lo, out_hi


def _synthesize_axis(c_lo, c_hi, lo, hi, axis):
    """Adjoint of _analyze_axis: scatter to even phases, roll back, sum taps."""
    shape = list(c_lo.shape)
    shape[axis] *= 2
    put = [slice(None), slice(None)]
    put[axis] = slice(0, None, 2)
    put = tuple(put)
    out = np.zeros(shape)
    branch = np.zeros(shape)
    for k in range(lo.size):
        branch[put] = lo[k] * c_lo + hi[k] * c_hi
        out += np.roll(branch, -k, axis=axis)
    return out


@dataclass
class SubbandSet:
    """One decomposition level: approximation plus three detail grids."""

    cA: np.ndarray
    cH: np.ndarray
    cV: np.ndarray
    cD: np.ndarray

    def __post_init__(self):
        dims = {g.shape for g in (self.cA, self.cH, self.cV, self.cD)}
        if len(dims) != 1:
            raise DataError(f"mismatched subband dims: {sorted(dims)}")
        for name, g in zip("cA cH cV cD".split(), (self.cA, self.cH, self.cV, self.cD)):
            if not np.all(np.isfinite(g)):
                raise DataError(f"non-finite entries in {name}")

    @property
    def dims(self) -> tuple[int, int]:
        return self.cA.shape


@dataclass
class DetailTriple:
    cH: np.ndarray
    cV: np.ndarray
    cD: np.ndarray

    @property
    def dims(self) -> tuple[int, int]:
        return self.cH.shape

    def grids(self):
        return (self.cH, self.cV, self.cD)


@dataclass
class DecompositionTree:
    """Multi-level decomposition: deepest approximation plus per-level details.

    ``details[0]`` is the finest level (level 1), ``details[-1]`` the
    coarsest (level L). ``original_dims`` are the image dims before padding,
    used by :func:`reconstruct` to crop the synthesized image.
    """

    wavelet: WaveletKind
    deepest_approx: np.ndarray
    details: list[DetailTriple] = field(default_factory=list)
    original_dims: tuple[int, int] = (0, 0)

    @property
    def levels(self) -> int:
        return len(self.details)

    def coefficient_count(self) -> int:
        return self.deepest_approx.size + sum(
            g.size for d in self.details for g in d.grids()
        )


def dwt2(img: np.ndarray, kind: WaveletKind) -> SubbandSet:
    """Single-level 2D analysis. Requires even dims (caller pads first)."""
    img = np.asarray(img, dtype=np.float64)
    fb = filter_bank(kind)
    lo_x, hi_x = _analyze_axis(img, fb.lo_d, fb.hi_d, axis=1)
    cA, cH = _analyze_axis(lo_x, fb.lo_d, fb.hi_d, axis=0)
    cV, cD = _analyze_axis(hi_x, fb.lo_d, fb.hi_d, axis=0)
    return SubbandSet(cA=cA, cH=cH, cV=cV, cD=cD)


def idwt2(sb: SubbandSet, kind: WaveletKind) -> np.ndarray:
    """Single-level 2D synthesis, the exact inverse of :func:`dwt2`."""
    fb = filter_bank(kind)
    lo_x = _synthesize_axis(sb.cA, sb.cH, fb.lo_d, fb.hi_d, axis=0)
    hi_x = _synthesize_axis(sb.cV, sb.cD, fb.lo_d, fb.hi_d, axis=0)
    return _synthesize_axis(lo_x, hi_x, fb.lo_d, fb.hi_d, axis=1)


def decompose(
    img: np.ndarray, kind: WaveletKind, levels: int, pad: bool = True
) -> DecompositionTree:
    """Iterate dwt2 on successive approximations down to ``levels``.

    With ``pad=True`` (default) the image is first padded by edge
    replication so its dims divide 2^levels; the pre-padding dims are
    recorded so reconstruction can crop back. With ``pad=False`` the dims
    must already be divisible.
    """
    if levels < 1:
        raise DataError(f"levels must be >= 1, got {levels}")
    img = np.asarray(img, dtype=np.float64)
    block = 2**levels
    if pad:
        padded, original_dims = pad_to_block(img, block)
    else:
        if img.shape[0] % block or img.shape[1] % block:
            raise DataError(
                f"dims {img.shape} not divisible by 2^{levels} = {block}"
            )
        padded, original_dims = img, img.shape
    kind = WaveletKind(kind)
    details: list[DetailTriple] = []
    approx = padded
    for _ in range(levels):
        sb = dwt2(approx, kind)
        details.append(DetailTriple(cH=sb.cH, cV=sb.cV, cD=sb.cD))
        approx = sb.cA
    return DecompositionTree(
        wavelet=kind,
        deepest_approx=approx,
        details=details,
        original_dims=original_dims,
    )


def reconstruct(tree: DecompositionTree) -> np.ndarray:
    """Invert :func:`decompose`: synthesize level by level, crop to original dims."""
    approx = tree.deepest_approx
    for det in reversed(tree.details):
        if det.dims != approx.shape:
            raise DataError(
                f"inconsistent tree dims: approx {approx.shape} vs details {det.dims}"
            )
        approx = idwt2(SubbandSet(cA=approx, cH=det.cH, cV=det.cV, cD=det.cD), tree.wavelet)
    rows, cols = tree.original_dims
    if rows > approx.shape[0] or cols > approx.shape[1]:
        raise DataError(
            f"inconsistent tree dims: original {tree.original_dims} exceeds "
            f"synthesized {approx.shape}"
        )
    return crop(approx, tree.original_dims)


def export_tree(tree: DecompositionTree, out_dir) -> Path:
    """Write a tree as ``tree.json`` plus per-subband little-endian f64 files.

    Files are named ``L<level>_<cA|cH|cV|cD>.f64`` (row-major); cA exists
    only at the deepest level.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "levels": tree.levels,
        "wavelet": tree.wavelet.value,
        "original_dims": list(tree.original_dims),
        "subbands": {},
    }

    def _write(name: str, grid: np.ndarray):
        (out / f"{name}.f64").write_bytes(np.ascontiguousarray(grid, dtype="<f8").tobytes())
        meta["subbands"][name] = list(grid.shape)

    _write(f"L{tree.levels}_cA", tree.deepest_approx)
    for level, det in enumerate(tree.details, start=1):
        for sub, grid in zip(("cH", "cV", "cD"), det.grids()):
            _write(f"L{level}_{sub}", grid)
    (out / "tree.json").write_text(json.dumps(meta, indent=2) + "\n")
    return out

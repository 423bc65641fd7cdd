"""Coefficient-level fusion of two wavelet decompositions.

Two same-shape decompositions are merged grid by grid with a per-coefficient
selection rule, then the merged tree is synthesized back into an image. The
default policy keeps the larger-magnitude approximation coefficient and the
smaller-magnitude detail coefficient; where magnitudes tie, the first
(thermal) input wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DataError
from .wavelet import DecompositionTree, DetailTriple, WaveletKind, decompose, reconstruct


class FusionRule(str, Enum):
    MAX_ABS = "maxabs"
    MIN_ABS = "minabs"
    AVERAGE = "average"


@dataclass(frozen=True)
class FusionPolicy:
    """Which rule applies to the approximation grid and which to detail grids."""

    approx_rule: FusionRule = FusionRule.MAX_ABS
    detail_rule: FusionRule = FusionRule.MIN_ABS

    def __post_init__(self):
        object.__setattr__(self, "approx_rule", FusionRule(self.approx_rule))
        object.__setattr__(self, "detail_rule", FusionRule(self.detail_rule))


def fuse_coeffs(a: np.ndarray, b: np.ndarray, rule: FusionRule) -> np.ndarray:
    """Fuse two equal-shape coefficient grids element by element."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DataError(f"coefficient grid dims differ: {a.shape} vs {b.shape}")
    rule = FusionRule(rule)
    if rule is FusionRule.AVERAGE:
        return (a + b) / 2.0
    if rule is FusionRule.MAX_ABS:
        return np.where(np.abs(a) >= np.abs(b), a, b)
    return np.where(np.abs(a) <= np.abs(b), a, b)


def fuse_trees(
    t: DecompositionTree, v: DecompositionTree, policy: FusionPolicy | None = None
) -> DecompositionTree:
    """Fuse two decompositions of identical wavelet, depth, and grid dims."""
    policy = policy or FusionPolicy()
    if t.wavelet != v.wavelet:
        raise DataError(f"wavelet mismatch: {t.wavelet.value} vs {v.wavelet.value}")
    if t.levels != v.levels:
        raise DataError(f"level mismatch: {t.levels} vs {v.levels}")
    if t.deepest_approx.shape != v.deepest_approx.shape:
        raise DataError(
            f"approximation dims differ: {t.deepest_approx.shape} vs "
            f"{v.deepest_approx.shape}"
        )
    details = []
    for lt, lv in zip(t.details, v.details):
        if lt.dims != lv.dims:
            raise DataError(f"detail dims differ: {lt.dims} vs {lv.dims}")
        details.append(
            DetailTriple(
                cH=fuse_coeffs(lt.cH, lv.cH, policy.detail_rule),
                cV=fuse_coeffs(lt.cV, lv.cV, policy.detail_rule),
                cD=fuse_coeffs(lt.cD, lv.cD, policy.detail_rule),
            )
        )
    if t.original_dims != v.original_dims:
        raise DataError(
            f"original dims differ: {t.original_dims} vs {v.original_dims}"
        )
    return DecompositionTree(
        wavelet=t.wavelet,
        deepest_approx=fuse_coeffs(t.deepest_approx, v.deepest_approx, policy.approx_rule),
        details=details,
        original_dims=t.original_dims,
    )


def fuse_images(
    thermal: np.ndarray,
    visual: np.ndarray,
    kind: WaveletKind = WaveletKind.DB2,
    levels: int = 5,
    policy: FusionPolicy | None = None,
) -> np.ndarray:
    """Decompose both images, fuse the trees, and synthesize the fused image.

    The inputs must share dims; both are padded identically when the dims do
    not divide 2^levels, and the result is cropped back to the input dims.
    """
    thermal = np.asarray(thermal, dtype=np.float64)
    visual = np.asarray(visual, dtype=np.float64)
    if thermal.shape != visual.shape:
        raise DataError(f"image dims differ: {thermal.shape} vs {visual.shape}")
    t = decompose(thermal, kind, levels)
    v = decompose(visual, kind, levels)
    return reconstruct(fuse_trees(t, v, policy))

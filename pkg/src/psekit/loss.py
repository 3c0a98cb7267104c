"""Training-objective arithmetic: dice, OHEM masking, and the balanced total.

Pure numpy reference implementations intended to verify (or stand in
for) the loss arithmetic of a training pipeline. Everything is
stateless and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class OhemMask:
    """Training mask from online hard example mining."""

    mask: np.ndarray  # (H, W) uint8
    positives_kept: int
    negatives_kept: int


@dataclass
class LossReport:
    """Loss breakdown for one score stack.

    `dice_per_scale` holds the W-masked dice of the n-1 shrunk scales in
    order, followed by the OHEM-masked full-scale dice.
    """

    total: float
    l_c: float
    l_s: float
    lam: float
    dice_per_scale: list[float] = field(default_factory=list)


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def dice(s, g) -> float:
    """Dice coefficient 2*sum(s*g) / (sum(s^2) + sum(g^2)).

    Two identically-zero maps agree perfectly on absence, so the 0/0
    case returns 1 instead of propagating a NaN.
    """
    s = np.asarray(s, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    _check_same_shape(s, g)
    denom = float((s * s).sum() + (g * g).sum())
    if denom == 0.0:
        return 1.0
    return 2.0 * float((s * g).sum()) / denom


def dice_gradient(s, g, mask=None) -> np.ndarray:
    """Analytic gradient of the dice coefficient with respect to `s`.

    With N = 2*sum(s*g) and E = sum(s^2)+sum(g^2):
    dD/ds = (2*g*E - 2*N*s) / E^2. When `mask` is given the dice is
    taken over the masked maps and the gradient is zero off-mask.
    """
    s = np.asarray(s, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    _check_same_shape(s, g)
    if mask is not None:
        mask = np.asarray(mask, dtype=np.float64)
        _check_same_shape(s, mask)
        s = s * mask
        g = g * mask
    num = 2.0 * float((s * g).sum())
    denom = float((s * s).sum() + (g * g).sum())
    if denom == 0.0:
        return np.zeros_like(s)
    grad = (2.0 * g * denom - 2.0 * num * s) / (denom * denom)
    if mask is not None:
        grad *= mask
    return grad


def ohem_mask(s_n, g_n, ignore=None, ratio: float = 3.0) -> OhemMask:
    """Keep all positives plus the hardest negatives at a fixed ratio.

    Hard negatives are the non-text pixels with the highest predicted
    text score; at most floor(ratio * positives) of them survive. Ties
    at the score cutoff break in row-major order. Ignored pixels are
    excluded from both sides, and zero positives means an empty mask
    (no positives, no negative budget).
    """
    s_n = np.asarray(s_n, dtype=np.float64)
    g_n = np.asarray(g_n)
    _check_same_shape(s_n, g_n)
    if ratio <= 0:
        raise ValueError(f"negative-positive ratio must be > 0, got {ratio}")
    if ignore is None:
        excluded = np.zeros(s_n.shape, dtype=bool)
    else:
        ignore = np.asarray(ignore)
        _check_same_shape(s_n, ignore)
        excluded = ignore.astype(bool)
    pos = g_n.astype(bool) & ~excluded
    n_pos = int(pos.sum())
    mask = np.zeros(s_n.shape, dtype=np.uint8)
    if n_pos == 0:
        return OhemMask(mask, 0, 0)
    mask[pos] = 1
    neg_idx = np.flatnonzero(~g_n.astype(bool).ravel() & ~excluded.ravel())
    budget = min(int(math.floor(ratio * n_pos)), neg_idx.size)
    if budget > 0:
        order = np.argsort(-s_n.ravel()[neg_idx], kind="stable")
        mask.ravel()[neg_idx[order[:budget]]] = 1
    return OhemMask(mask, n_pos, budget)


def loss_complete(s_n, g_n, m) -> float:
    """Full-scale text/non-text loss: 1 - dice over the OHEM-masked maps."""
    mask = m.mask if isinstance(m, OhemMask) else m
    s_n = np.asarray(s_n, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    g_n = np.asarray(g_n, dtype=np.float64)
    _check_same_shape(s_n, g_n)
    _check_same_shape(s_n, mask)
    return 1.0 - dice(s_n * mask, g_n * mask)


def shrunk_weight_mask(s_n) -> np.ndarray:
    """Mask of pixels the shrunk-scale loss attends to: S_n score >= 0.5."""
    return (np.asarray(s_n) >= 0.5).astype(np.uint8)


def loss_shrunk(scores, label_masks) -> float:
    """Shrunk-kernel loss over scales 1..n-1, weighted by the S_n mask.

    Non-text pixels of the full-scale prediction are masked out; the
    loss averages the masked dice over the n-1 shrunk scales. An
    all-empty weight mask makes every dice 1 by the 0/0 convention, so
    the loss degenerates to 0.
    """
    stack = np.asarray(scores, dtype=np.float64)
    gts = np.asarray(label_masks, dtype=np.float64)
    if stack.ndim != 3 or stack.shape[0] < 2:
        raise ValueError(f"need an (n>=2, H, W) score stack, got shape {stack.shape}")
    _check_same_shape(stack, gts)
    w = shrunk_weight_mask(stack[-1]).astype(np.float64)
    n = stack.shape[0]
    total = sum(dice(stack[i] * w, gts[i] * w) for i in range(n - 1))
    return 1.0 - total / (n - 1)


def total_loss(l_c: float, l_s: float, lam: float) -> float:
    """Balance the complete and shrunk losses: lam*l_c + (1-lam)*l_s."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"loss balance must be in [0, 1], got {lam}")
    return lam * l_c + (1.0 - lam) * l_s


def loss_report(scores, label_masks, ignore=None, lam: float = 0.7,
                ohem_ratio: float = 3.0) -> LossReport:
    """Full loss breakdown for a score stack against its label stack.

    With a single scale there is no shrunk loss; l_s is 0 and the
    balance is forced to 1.
    """
    stack = np.asarray(scores, dtype=np.float64)
    gts = np.asarray(label_masks, dtype=np.float64)
    if stack.ndim != 3 or stack.shape[0] < 1:
        raise ValueError(f"expected a non-empty (n, H, W) stack, got shape {stack.shape}")
    _check_same_shape(stack, gts)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"loss balance must be in [0, 1], got {lam}")
    n = stack.shape[0]
    m = ohem_mask(stack[-1], gts[-1], ignore=ignore, ratio=ohem_ratio)
    mf = m.mask.astype(np.float64)
    l_c = loss_complete(stack[-1], gts[-1], m)
    per_scale: list[float] = []
    if n == 1:
        l_s, lam_eff = 0.0, 1.0
    else:
        w = shrunk_weight_mask(stack[-1]).astype(np.float64)
        per_scale = [dice(stack[i] * w, gts[i] * w) for i in range(n - 1)]
        l_s = 1.0 - sum(per_scale) / (n - 1)
        lam_eff = lam
    per_scale.append(dice(stack[-1] * mf, gts[-1] * mf))
    return LossReport(
        total=total_loss(l_c, l_s, lam_eff),
        l_c=l_c,
        l_s=l_s,
        lam=lam_eff,
        dice_per_scale=per_scale,
    )

"""Spatial derivatives on adaptive grids.

Each masked point is differentiated with the antisymmetric filter of
its filter bank, applied at the tap spacing selected by the point's
density level, and scaled by the physical grid step at that level.
Taps outside the array or outside the mask read zero; the grid closure
activates every tap that matters beforehand, so zero reads only occur
deep in the far field where the field itself is negligible.
"""

import numpy as np

from .filters import FilterBank
from .grid import GridSpec


def _diff(field, mask, levels, spec: GridSpec, bank: FilterBank,
          domain_length: float, axis: int) -> np.ndarray:
    values = np.where(mask, np.asarray(field, dtype=float), 0.0)
    out = np.zeros_like(values)
    coeffs = bank.deriv_filter
    limit = spec.n - 1

    if mask.all() and np.all(levels == spec.j_max):
        # Uniform classical stencil, vectorized along the whole axis.
        pad = bank.deriv_halfwidth
        width = [(0, 0), (0, 0)]
        width[axis] = (pad, pad)
        vp = np.pad(values, width)
        acc = np.zeros_like(values)
        for i, c in enumerate(coeffs, start=1):
            fwd = np.roll(vp, -i, axis=axis)
            bwd = np.roll(vp, i, axis=axis)
            diff = fwd - bwd
            sl = [slice(None), slice(None)]
            sl[axis] = slice(pad, pad + spec.n)
            acc += c * diff[tuple(sl)]
        return acc * (2.0**spec.j_max / domain_length)

    for j0 in range(spec.j_min, spec.j_max + 1):
        rows, cols = np.nonzero(mask & (levels == j0))
        if rows.size == 0:
            continue
        step = spec.stride(j0)
        moving = rows if axis == 0 else cols
        acc = np.zeros(rows.size)
        for i, c in enumerate(coeffs, start=1):
            for sign in (1, -1):
                shifted = moving + sign * i * step
                ok = (shifted >= 0) & (shifted <= limit)
                taps = np.zeros(rows.size)
                if axis == 0:
                    taps[ok] = values[shifted[ok], cols[ok]]
                else:
                    taps[ok] = values[rows[ok], shifted[ok]]
                acc += sign * c * taps
        out[rows, cols] = acc * (2.0**j0 / domain_length)
    return out


def diff_x(field, mask, levels, spec: GridSpec, bank: FilterBank,
           domain_length: float) -> np.ndarray:
    """d(field)/dx (first array axis) at masked points, zero elsewhere."""
    return _diff(field, mask, levels, spec, bank, domain_length, axis=0)


def diff_z(field, mask, levels, spec: GridSpec, bank: FilterBank,
           domain_length: float) -> np.ndarray:
    """d(field)/dz (second array axis) at masked points, zero elsewhere."""
    return _diff(field, mask, levels, spec, bank, domain_length, axis=1)

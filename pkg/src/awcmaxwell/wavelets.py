"""Lifted interpolating wavelet transforms on masked dyadic grids.

The transform operates in place on a single (2^j_max + 1) square array.
After a forward transform the array is a coefficient pyramid: scaling
coefficients sit on the coarsest lattice and each finer position holds
the detail coefficient born at that position (odd-even detail along x,
even-odd along z, odd-odd mixed).  Coefficients are normalized so that
scaling values equal field point values and detail magnitudes are
comparable across levels, which lets a single threshold act uniformly.

Any stencil tap that falls outside the array or outside the active mask
reads zero.  Masked transforms therefore require the mask to be closed
under the prediction stencils (see grid.require_closed); the background
of the array is kept at exactly zero so gathers never need per-point
guards.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .filters import FilterBank
from .grid import GridSpec, require_closed

PHYSICAL = "physical"
WAVELET = "wavelet"


@dataclass
class CoeffPyramid:
    """Field samples or transform coefficients in the in-place layout."""

    data: np.ndarray
    spec: GridSpec
    state: str = PHYSICAL

    def __post_init__(self):
        n = self.spec.n
        if self.data.shape != (n, n):
            raise ValueError(
                f"data shape {self.data.shape} does not match grid "
                f"({n}, {n})"
            )
        if self.state not in (PHYSICAL, WAVELET):
            raise ValueError(f"unknown pyramid state {self.state!r}")

    @property
    def j_min(self) -> int:
        return self.spec.j_min

    @property
    def j_max(self) -> int:
        return self.spec.j_max

    @classmethod
    def from_field(cls, field_values, spec: GridSpec, mask=None):
        """Pyramid in physical state; values outside the mask become 0."""
        data = np.array(field_values, dtype=float)
        if mask is not None:
            data = np.where(mask, data, 0.0)
        return cls(data, spec, PHYSICAL)


def _check_level(level: int, spec: GridSpec, what: str):
    if not spec.j_min <= level <= spec.j_max - 1:
        raise ValueError(
            f"{what} level {level} outside [{spec.j_min}, {spec.j_max - 1}]"
        )


def _gather(vp, pad, rows, cols, offsets, weights, axis):
    """Sum_l w_l * vp[rows + t_l, cols] (axis 0) or cols + t_l (axis 1),
    evaluated at the listed points of the padded array."""
    out = np.zeros(rows.size)
    r, c = pad + rows, pad + cols
    for t, w in zip(offsets, weights):
        if axis == 0:
            out += w * vp[r + t, c]
        else:
            out += w * vp[r, c + t]
    return out


def _gather2(vp, pad, rows, cols, offsets, weights):
    """Tensor sum_l sum_k w_l w_k * vp[rows + t_l, cols + t_k] at points."""
    out = np.zeros(rows.size)
    r, c = pad + rows, pad + cols
    for tr, wr in zip(offsets, weights):
        rr = r + tr
        for tc, wc in zip(offsets, weights):
            out += wr * wc * vp[rr, c + tc]
    return out


def _masked_kinds(mv):
    """Masked positions of a sublattice mask as index lists, split into
    the three detail parities plus the even-even scaling block."""
    d1 = np.zeros_like(mv)
    d1[1::2, 0::2] = mv[1::2, 0::2]
    d2 = np.zeros_like(mv)
    d2[0::2, 1::2] = mv[0::2, 1::2]
    d3 = np.zeros_like(mv)
    d3[1::2, 1::2] = mv[1::2, 1::2]
    ee = np.zeros_like(mv)
    ee[0::2, 0::2] = mv[0::2, 0::2]
    return np.nonzero(d1), np.nonzero(d2), np.nonzero(d3), np.nonzero(ee)


def fwt_step(pyramid: CoeffPyramid, level: int, mask, bank: FilterBank):
    """One forward level: split level-(level+1) values into details and
    level-(level) scaling coefficients, in place.

    Details and update sums are evaluated only at masked positions, so
    the work per level scales with the active point count there.  Entries
    off the mask are expected to hold zero (fwt_full zeroes them at
    entry); a level without masked details is the identity and is
    skipped.
    """
    _check_level(level, pyramid.spec, "fwt")
    h = pyramid.spec.stride(level + 1)
    v = pyramid.data[::h, ::h]
    (m1, n1), (m2, n2), (m3, n3), (me, ne) = _masked_kinds(mask[::h, ::h])
    if m1.size == 0 and m2.size == 0 and m3.size == 0:
        return pyramid
    pad = 2 * bank.order - 1
    p_off = 2 * bank.predict_offsets - 1
    u_off = 2 * bank.update_offsets + 1
    pw, uw = bank.predict_weights, bank.update_weights

    # Detail passes read the untouched level-(level+1) values.
    vp = np.pad(v, pad)
    d1 = 0.5 * (
        vp[pad + m1, pad + n1] - _gather(vp, pad, m1, n1, p_off, pw, axis=0)
    )
    d2 = 0.5 * (
        vp[pad + m2, pad + n2] - _gather(vp, pad, m2, n2, p_off, pw, axis=1)
    )
    d3 = 0.25 * (
        vp[pad + m3, pad + n3]
        - _gather(vp, pad, m3, n3, p_off, pw, axis=0)
        - _gather(vp, pad, m3, n3, p_off, pw, axis=1)
        + _gather2(vp, pad, m3, n3, p_off, pw)
    )
    v[m1, n1] = d1
    v[m2, n2] = d2
    v[m3, n3] = d3

    # Scaling update reads the freshly written details.
    vp = np.pad(v, pad)
    v[me, ne] += (
        _gather(vp, pad, me, ne, u_off, uw, axis=0)
        + _gather(vp, pad, me, ne, u_off, uw, axis=1)
        + _gather2(vp, pad, me, ne, u_off, uw)
    )
    return pyramid


def iwt_step(pyramid: CoeffPyramid, level: int, mask, bank: FilterBank):
    """One inverse level: exact inverse of fwt_step on the same mask."""
    _check_level(level, pyramid.spec, "iwt")
    h = pyramid.spec.stride(level + 1)
    v = pyramid.data[::h, ::h]
    (m1, n1), (m2, n2), (m3, n3), (me, ne) = _masked_kinds(mask[::h, ::h])
    if m1.size == 0 and m2.size == 0 and m3.size == 0:
        return pyramid
    pad = 2 * bank.order - 1
    p_off = 2 * bank.predict_offsets - 1
    u_off = 2 * bank.update_offsets + 1
    pw, uw = bank.predict_weights, bank.update_weights

    # Undo the scaling update (reads the stored details).
    vp = np.pad(v, pad)
    v[me, ne] -= (
        _gather(vp, pad, me, ne, u_off, uw, axis=0)
        + _gather(vp, pad, me, ne, u_off, uw, axis=1)
        + _gather2(vp, pad, me, ne, u_off, uw)
    )

    # Rebuild the singly odd points from the restored even-even values.
    vp = np.pad(v, pad)
    v[m1, n1] = 2.0 * v[m1, n1] + _gather(vp, pad, m1, n1, p_off, pw, axis=0)
    v[m2, n2] = 2.0 * v[m2, n2] + _gather(vp, pad, m2, n2, p_off, pw, axis=1)

    # Rebuild the odd-odd points from the values rebuilt above.
    vp = np.pad(v, pad)
    v[m3, n3] = (
        4.0 * v[m3, n3]
        + _gather(vp, pad, m3, n3, p_off, pw, axis=0)
        + _gather(vp, pad, m3, n3, p_off, pw, axis=1)
        - _gather2(vp, pad, m3, n3, p_off, pw)
    )
    return pyramid


def fwt_full(pyramid: CoeffPyramid, mask, bank: FilterBank, *, check=True):
    """Forward transform down to the coarsest level, physical -> wavelet.

    check=False skips the stencil-closure validation of the mask; callers
    holding a mask straight out of the closure operations may do so, since
    those guarantee the property by construction.
    """
    if pyramid.state != PHYSICAL:
        raise ValueError(f"fwt_full requires physical state, got {pyramid.state}")
    if check:
        require_closed(mask, pyramid.spec, bank, "fwt_full")
    pyramid.data = np.where(mask, pyramid.data, 0.0)
    for level in range(pyramid.j_max - 1, pyramid.j_min - 1, -1):
        fwt_step(pyramid, level, mask, bank)
    pyramid.state = WAVELET
    return pyramid


def iwt_full(pyramid: CoeffPyramid, mask, bank: FilterBank, *, check=True):
    """Inverse transform up to the finest level, wavelet -> physical.

    check has the same meaning as in fwt_full.
    """
    if pyramid.state != WAVELET:
        raise ValueError(f"iwt_full requires wavelet state, got {pyramid.state}")
    if check:
        require_closed(mask, pyramid.spec, bank, "iwt_full")
    pyramid.data = np.where(mask, pyramid.data, 0.0)
    for level in range(pyramid.j_min, pyramid.j_max):
        iwt_step(pyramid, level, mask, bank)
    pyramid.state = PHYSICAL
    return pyramid


def threshold_coeffs(pyramid: CoeffPyramid, zeta: float, mask=None):
    """Zero details with |d| < zeta; return (pyramid, thinned mask).

    The thinned mask keeps the whole coarsest lattice plus the positions
    of surviving details.  Scaling coefficients are never dropped, and
    zeta = 0 drops nothing.
    """
    if zeta < 0:
        raise ConfigError(f"threshold must be nonnegative, got {zeta}")
    if pyramid.state != WAVELET:
        raise ValueError(
            f"threshold_coeffs requires wavelet state, got {pyramid.state}"
        )
    spec = pyramid.spec
    base = spec.detail if mask is None else (mask & spec.detail)
    if zeta == 0:
        survivors = base
    else:
        dropped = base & (np.abs(pyramid.data) < zeta)
        pyramid.data[dropped] = 0.0
        survivors = base & ~dropped
    return pyramid, spec.coarse_mask() | survivors


def interpolate_missing(field_values, old_mask, new_mask, spec: GridSpec,
                        bank: FilterBank, *, check=True):
    """Field on new_mask: old values kept bitwise, new points interpolated.

    Transforms the field on old_mask, drops coefficients outside
    new_mask, reconstructs on new_mask, then copies the original values
    back onto the overlap so points present in both masks are untouched.
    check has the same meaning as in fwt_full and covers both masks.
    """
    if np.array_equal(old_mask, new_mask):
        # Copy-back would restore every masked point anyway.
        return np.where(new_mask, np.asarray(field_values, dtype=float), 0.0)
    pyramid = CoeffPyramid.from_field(field_values, spec, mask=old_mask)
    fwt_full(pyramid, old_mask, bank, check=check)
    pyramid.data[~new_mask] = 0.0
    iwt_full(pyramid, new_mask, bank, check=check)
    keep = old_mask & new_mask
    out = pyramid.data
    out[keep] = np.asarray(field_values)[keep]
    return np.where(new_mask, out, 0.0)

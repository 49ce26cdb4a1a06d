"""Filter banks for interpolating wavelets of Deslauriers-Dubuc type.

The scheme of order N interpolates the value at a dyadic midpoint from its
2N nearest neighbours on the coarser lattice with symmetric Lagrange
weights, which makes the prediction exact for polynomials up to degree
2N - 1.  Three coefficient sets belong together:

- ``predict_weights``: weights w_l, l = -(N-1)..N, applied to the even
  neighbours 2m + 2l when predicting the odd point 2m + 1,
- ``update_weights``: weights u_l, l = -N..N-1, applied to the detail
  coefficients d_{m+l} when lifting the even (scaling) coefficient at m;
  with the half-normalized details used here the two value lists coincide,
- ``deriv_filter``: the antisymmetric first-derivative filter DD'_N(i),
  i = 1..2(N-1), of the order-N interpolating scaling function, with
  DD'_N(0) = 0 and DD'_N(-i) = -DD'_N(i).  Its consistency order is 2N.

All coefficients are built as exact rationals and converted to float once.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConfigError

SUPPORTED_ORDERS = (2, 3, 4)

# First-derivative filter values DD'_N(i) for i = 1..2(N-1), exact.
_DERIV_FILTERS = {
    2: (Fraction(2, 3), Fraction(-1, 12)),
    3: (
        Fraction(272, 365),
        Fraction(-53, 365),
        Fraction(16, 1095),
        Fraction(1, 2920),
    ),
    4: (
        Fraction(39296, 49553),
        Fraction(-76113, 396424),
        Fraction(1664, 49553),
        Fraction(-2645, 1189272),
        Fraction(-128, 743295),
        Fraction(1, 1189272),
    ),
}


def _lagrange_midpoint_fractions(order: int) -> list[Fraction]:
    """Exact Lagrange weights for interpolation at x = 1/2.

    Nodes are the integers l = -(order-1)..order; the returned weight list
    satisfies sum_l w_l * q(l) = q(1/2) for every polynomial q of degree
    <= 2*order - 1.
    """
    nodes = list(range(-(order - 1), order + 1))
    weights = []
    for li in nodes:
        w = Fraction(1)
        for k in nodes:
            if k != li:
                w *= Fraction(1, 2) - k
                w /= li - k
        weights.append(w)
    return weights


def lagrange_midpoint_weights(order: int) -> np.ndarray:
    """Midpoint interpolation weights of the order-``order`` scheme.

    Parameters
    ----------
    order:
        Half the stencil width; any integer >= 1.

    Returns
    -------
    ndarray of shape (2*order,), the weights for nodes -(order-1)..order.
    """
    if order < 1:
        raise ConfigError(f"interpolation order must be >= 1, got {order}")
    return np.array([float(w) for w in _lagrange_midpoint_fractions(order)])


@dataclass(frozen=True)
class FilterBank:
    """Coefficient sets of one interpolating-wavelet order.

    ``predict_offsets`` / ``update_offsets`` give the integer tap offsets
    that the corresponding weights belong to (see module docstring).
    """

    order: int
    predict_weights: np.ndarray
    update_weights: np.ndarray
    deriv_filter: np.ndarray
    predict_offsets: np.ndarray = field(init=False)
    update_offsets: np.ndarray = field(init=False)

    def __post_init__(self):
        n = self.order
        object.__setattr__(self, "predict_offsets", np.arange(-(n - 1), n + 1))
        object.__setattr__(self, "update_offsets", np.arange(-n, n))

    @property
    def deriv_halfwidth(self) -> int:
        """Number of one-sided derivative taps, 2*(order-1)."""
        return len(self.deriv_filter)

    @property
    def deriv_abs_sum(self) -> float:
        """sum_i |DD'(i)|, the quantity entering the CFL bound."""
        return float(np.sum(np.abs(self.deriv_filter)))


def build_filter_bank(order: int) -> FilterBank:
    """Build the filter bank for ``order`` in {2, 3, 4}.

    Raises
    ------
    ConfigError
        If the order is not supported.
    """
    if order not in SUPPORTED_ORDERS:
        raise ConfigError(
            f"unsupported wavelet order {order}; supported orders are "
            f"{', '.join(str(o) for o in SUPPORTED_ORDERS)}"
        )
    predict = _lagrange_midpoint_fractions(order)
    # The lifting update on the raw interpolation residual uses predict/2;
    # Eq.-style half-normalized details absorb that factor, so the weights
    # applied to stored detail coefficients equal the predict values
    # (shifted from offsets -(N-1)..N to -N..N-1 so they stay centred on
    # the even target point).
    update = list(predict)
    return FilterBank(
        order=order,
        predict_weights=np.array([float(w) for w in predict]),
        update_weights=np.array([float(w) for w in update]),
        deriv_filter=np.array([float(v) for v in _DERIV_FILTERS[order]]),
    )

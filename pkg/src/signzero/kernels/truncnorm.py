"""Standard normal CDF / quantile and the inverse-CDF truncated normal draw.

These run inside compiled loops, so they use only ``math``.  The quantile is
Wichura's AS 241 (PPND16) rational approximation followed by one Newton step
on the matching tail CDF.
"""
import math

from .._jit import njit

_SQRT1_2 = 0.7071067811865476
_INV_SQRT_2PI = 0.3989422804014327


@njit
def norm_cdf(x):
    return 0.5 * math.erfc(-x * _SQRT1_2)


@njit
def norm_sf(x):
    return 0.5 * math.erfc(x * _SQRT1_2)


@njit
def _ppnd16(p):
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2509.0809287301226727 * r + 33430.575583588128105) * r
                    + 67265.770927008700853) * r + 45921.953931549871457) * r
                  + 13731.693765509461125) * r + 1971.5909503065514427) * r
                + 133.14166789178437745) * r + 3.387132872796366608)
        den = (((((((5226.495278852545925 * r + 28729.085735721942674) * r
                    + 39307.89580009271061) * r + 21213.794301586595867) * r
                  + 5394.1960214247511077) * r + 687.1870074920579083) * r
                + 42.313330701600911252) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r
                    + 0.24178072517745061177) * r + 1.27045825245236838258) * r
                  + 3.64784832476320460504) * r + 5.7694972214606914055) * r
                + 4.6303378461565452959) * r + 1.42343711074968357734)
        den = (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r
                    + 0.0151986665636164571966) * r + 0.14810397642748007459) * r
                  + 0.68976733498510000455) * r + 1.6763848301838038494) * r
                + 2.05319162663775882187) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 0.0012426609473880784386) * r + 0.026532189526576123093) * r
                  + 0.29656057182850489123) * r + 1.7848265399172913358) * r
                + 5.4637849111641143699) * r + 6.6579046435011037772)
        den = (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r
                    + 1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r
                  + 0.0148753612908506148525) * r + 0.13692988092273580531) * r
                + 0.59983220655588793769) * r + 1.0)
    x = num / den
    return -x if q < 0.0 else x


@njit
def norm_ppf(p):
    """Quantile of the standard normal; +-inf at the endpoints."""
    if p <= 0.0:
        return -math.inf
    if p >= 1.0:
        return math.inf
    x = _ppnd16(p)
    # Newton refinement against whichever tail keeps full relative precision
    dens = _INV_SQRT_2PI * math.exp(-0.5 * x * x)
    if dens > 0.0:
        if x < 0.0:
            x -= (norm_cdf(x) - p) / dens
        else:
            x += (norm_sf(x) - (1.0 - p)) / dens
    return x


@njit
def norm_isf(p):
    """Inverse survival function, accurate for tiny ``p``."""
    if p <= 0.0:
        return math.inf
    if p >= 1.0:
        return -math.inf
    if p < 0.5:
        return -norm_ppf(p)
    return norm_ppf(1.0 - p)


@njit
def _exp_tail(a, b, u):
    # density ~ exp(-a (x - a)) once the normal tail mass underflows
    width = b - a
    if width == math.inf:
        return a - math.log1p(-u) / a
    return a - math.log1p(-u * -math.expm1(-a * width)) / a


@njit
def truncnorm_draw(a, b, u):
    """Inverse-CDF draw from N(0, 1) truncated to (a, b), given u in (0, 1).

    Returns NaN when ``a >= b``.  For intervals inside the upper tail the same
    quantile is evaluated through the survival function, and mirrored for the
    lower tail, so the map u -> x is unchanged but keeps full precision.
    """
    if not a < b:
        return math.nan
    if a > 0.0:
        pa = norm_sf(a)
        if pa == 0.0:
            x = _exp_tail(a, b, u)
        else:
            pb = norm_sf(b)
            x = norm_isf(pa - u * (pa - pb))
    elif b < 0.0:
        pb = norm_cdf(b)
        if pb == 0.0:
            x = -_exp_tail(-b, -a, 1.0 - u)
        else:
            pa = norm_cdf(a)
            x = norm_ppf(pa + u * (pb - pa))
    else:
        pa = norm_cdf(a)
        pb = norm_cdf(b)
        x = norm_ppf(pa + u * (pb - pa))
    if x < a:
        x = a
    elif x > b:
        x = b
    return x

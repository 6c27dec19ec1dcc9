"""
Precision contexts and number plumbing for the pi pipeline.

BigReal / BigComplex are mpmath ``mpf`` / ``mpc`` values, Rat is
``fractions.Fraction`` and Int is the builtin ``int``. Every transcendental
evaluation in the other modules happens inside ``PrecisionCtx.scope()``.
"""

import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

import mpmath
from mpmath import mpc, mpf
from pydantic import BaseModel, ConfigDict, Field

from errors import DomainError
from settings import Settings, get_settings

# Optional fast integer backend
try:
    import gmpy2
    GMPY2_AVAILABLE = True
except ImportError:
    GMPY2_AVAILABLE = False

logger = logging.getLogger(__name__)

Rat = Fraction
BigReal = mpf
BigComplex = mpc
Number = Union[int, float, complex, str, Fraction, mpf, mpc]


class PrecisionCtx(BaseModel):
    """
    Working precision for a computation.

    ``bits`` is the precision results are promised to, ``guard_bits`` are
    carried on top of it while computing.
    """
    model_config = ConfigDict(frozen=True)

    bits: int = Field(256, ge=64)
    guard_bits: int = Field(16, ge=0)

    @property
    def working_bits(self) -> int:
        return self.bits + self.guard_bits

    @property
    def eps(self) -> mpf:
        return mpmath.ldexp(mpf(1), -self.bits)

    def scope(self):
        """Context manager running mpmath at ``working_bits``."""
        return mpmath.workprec(self.working_bits)

    def extended(self, extra_bits: int) -> 'PrecisionCtx':
        return PrecisionCtx(bits=self.bits + max(0, int(extra_bits)), guard_bits=self.guard_bits)

    @classmethod
    def for_digits(cls, digits: int, guard_bits: int = 64) -> 'PrecisionCtx':
        bits = max(64, math.ceil(digits * math.log2(10)))
        return cls(bits=bits, guard_bits=guard_bits)

    @classmethod
    def from_settings(cls, settings: Optional[Settings] = None) -> 'PrecisionCtx':
        settings = settings or get_settings()
        return cls(bits=settings.precision_bits, guard_bits=settings.guard_bits)


def to_mpf(x: Number) -> mpf:
    """Convert a real number (Fraction included) at the current precision."""
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


def to_mpc(x: Number) -> mpc:
    """Convert any supported number to mpc at the current precision."""
    if isinstance(x, Fraction):
        return mpc(to_mpf(x))
    if isinstance(x, tuple):
        return mpc(to_mpf(x[0]), to_mpf(x[1]))
    return mpc(x)


def rat_to_mpf(value: Fraction, ctx: PrecisionCtx) -> mpf:
    with ctx.scope():
        return to_mpf(value)


def _arccot_fixed(x: int, unity):
    """arccot(x) * unity by the alternating Gregory series in fixed point."""
    power = unity // x
    total = power
    x_sq = x * x
    divisor = 3
    sign = -1
    while power:
        power //= x_sq
        total += sign * (power // divisor)
        sign = -sign
        divisor += 2
    return total


@lru_cache(maxsize=32)
def _machin_pi(bits: int) -> mpf:
    extra = 32 + bits.bit_length()
    scale = bits + extra
    unity = gmpy2.mpz(1) << scale if GMPY2_AVAILABLE else 1 << scale
    fixed = 4 * (4 * _arccot_fixed(5, unity) - _arccot_fixed(239, unity))
    logger.debug("machin pi filled at %d bits", bits)
    with mpmath.workprec(bits):
        return mpmath.ldexp(mpf(int(fixed)), -scale)


def ref_pi(ctx: PrecisionCtx) -> mpf:
    """
    Reference pi from Machin's arctangent formula.

    Independent of every series in the formula catalog and of mpmath's own
    pi constant.
    """
    return _machin_pi(ctx.working_bits)


def principal_sqrt(x: Number, ctx: PrecisionCtx) -> mpc:
    """Square root with Re(w) > 0, or Re(w) = 0 and Im(w) >= 0."""
    with ctx.scope():
        w = mpmath.sqrt(to_mpc(x))
        if w.real < 0 or (w.real == 0 and w.imag < 0):
            w = -w
        return w


def exp_c(z: Number, ctx: PrecisionCtx) -> mpc:
    with ctx.scope():
        return mpc(mpmath.exp(to_mpc(z)))


def exp_r(x: Number, ctx: PrecisionCtx) -> mpf:
    """Exponential of a real argument, kept as mpf so it stays comparable."""
    with ctx.scope():
        return mpmath.exp(to_mpf(x))


def sin_c(z: Number, ctx: PrecisionCtx) -> mpc:
    with ctx.scope():
        return mpc(mpmath.sin(to_mpc(z)))


def cos_c(z: Number, ctx: PrecisionCtx) -> mpc:
    with ctx.scope():
        return mpc(mpmath.cos(to_mpc(z)))


def root_c(z: Number, n: int, ctx: PrecisionCtx) -> mpc:
    """Principal n-th root: arg in (-pi/n, pi/n]."""
    if n < 1:
        raise DomainError(f"root_c needs n >= 1, got {n}")
    with ctx.scope():
        return mpc(mpmath.root(to_mpc(z), n))


def ln_r(x: Number, ctx: PrecisionCtx) -> mpf:
    """Natural log of a positive real."""
    with ctx.scope():
        if isinstance(x, (complex, mpc)):
            if x.imag != 0:
                raise DomainError(f"ln_r needs a real argument, got {x}")
            x = x.real
        value = to_mpf(x)
        if value <= 0:
            raise DomainError(f"ln_r needs x > 0, got {value}")
        return mpmath.log(value)


def nearest_int(x: Number) -> int:
    return int(mpmath.nint(x))


def isqrt_exact(n: int) -> Optional[int]:
    """Integer square root of n if n is a perfect square, else None."""
    if n < 0:
        return None
    if GMPY2_AVAILABLE:
        root, rem = gmpy2.isqrt_rem(gmpy2.mpz(n))
        return int(root) if rem == 0 else None
    root = math.isqrt(n)
    return root if root * root == n else None


def relative_residual(a: Number, b: Number) -> mpf:
    """|a - b| / max(|a|, |b|), 0 when both vanish."""
    scale = max(abs(a), abs(b))
    if scale == 0:
        return mpf(0)
    return abs(a - b) / scale


def format_fixed(x: Number, places: int) -> str:
    """Fixed-point decimal string of a real value, rounded to ``places`` decimals."""
    scaled = int(mpmath.nint(to_mpf(x) * 10 ** places))
    sign = '-' if scaled < 0 else ''
    text = str(abs(scaled)).rjust(places + 1, '0')
    if places == 0:
        return sign + text
    return f"{sign}{text[:-places]}.{text[-places:]}"

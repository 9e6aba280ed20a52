"""Fixed-point money helpers.

Money is a ``Decimal`` quantised to four places. Floats are converted through
their shortest repr so that a rate like 0.05 enters as exactly 0.05.
"""

from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal

from dinsim.shared.constants import MONEY_PLACES

Money = Decimal
Number = int | float | str | Decimal

QUANTUM: Decimal = Decimal(1).scaleb(-MONEY_PLACES)
ZERO: Decimal = Decimal(0).quantize(QUANTUM)


def D(value: Number) -> Decimal:
    """Convert to Decimal without binary float noise."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        return Decimal(repr(value))
    return Decimal(value)


def to_money(value: Number) -> Money:
    """Quantise any number to a Money amount."""
    amount = D(value).quantize(QUANTUM, rounding=ROUND_HALF_EVEN)
    return amount if amount != 0 else ZERO


def mul_rate(amount: Number, rate: Number) -> Money:
    """Money × rate, quantised once at the end."""
    return to_money(D(amount) * D(rate))


def format_money(amount: Money) -> str:
    return str(to_money(amount))

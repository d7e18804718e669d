"""Step kinds and the per-step table of (delta chi, delta gamma, delta kappa)."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional


class StepKind(str, Enum):
    DA = "DA"
    TB1 = "TB1"
    TB2 = "TB2"
    BR = "BR"
    S3S3_1 = "3S3-1"
    S3S3_2G = "3S3-2G"
    S3S3_3G = "3S3-3G"
    S3S3_4G = "3S3-4G"
    S3S3_5G = "3S3-5G"
    D3D3_1 = "3D3-1"
    D3D3_2G = "3D3-2G"
    D3D3_3G = "3D3-3G"
    D3D3_4G = "3D3-4G"
    D3D3_5G = "3D3-5G"
    D3D3_6G = "3D3-6G"
    D3D4G = "3D4G"
    S3S2G = "3S2G"
    R3_1 = "3R-1"
    R3_2G = "3R-2G"
    R2_1 = "2R-1"
    R2_2G = "2R-2G"
    R2_3 = "2R-3"
    R2_4 = "2R-4"
    R2_5 = "2R-5"

    @classmethod
    def parse(cls, text: str) -> "StepKind":
        try:
            return cls(text)
        except ValueError:
            try:
                return cls[text]
            except KeyError:
                raise ValueError(f"unknown step kind {text!r}") from None

    @property
    def is_good(self) -> bool:
        """Kinds whose name carries the G suffix."""
        return self.value.endswith("G")


K = StepKind

S3S3_KINDS = (K.S3S3_1, K.S3S3_2G, K.S3S3_3G, K.S3S3_4G, K.S3S3_5G)
D3D3_KINDS = (K.D3D3_1, K.D3D3_2G, K.D3D3_3G, K.D3D3_4G, K.D3D3_5G, K.D3D3_6G)
INJECTING = (K.S3S3_3G, K.D3D3_3G)


@dataclass(frozen=True)
class TableRow:
    chi: frozenset  # admissible delta chi values
    inc_denominator: int  # gamma increment is 1/(k(d-1)); 0 means no increment
    kappa: int

    def increment(self, d: int) -> Fraction:
        return Fraction(0) if not self.inc_denominator else Fraction(1, self.inc_denominator * (d - 1))


def _row(chi, k, kappa):
    return TableRow(frozenset(chi), k, kappa)


TABLE: dict[StepKind, TableRow] = {
    K.S3S3_1: _row({-2}, 0, -1),
    K.S3S3_2G: _row({-2}, 6, -2),
    K.S3S3_3G: _row({-1}, 6, -1),
    K.S3S3_4G: _row({-3, -2}, 6, -2),
    K.S3S3_5G: _row({-3, -2}, 6, -2),
    K.D3D3_1: _row({-2}, 0, -1),
    K.D3D3_2G: _row({-2}, 4, -2),
    K.D3D3_3G: _row({-1}, 4, -1),
    K.D3D3_4G: _row({-2}, 4, -2),
    K.D3D3_5G: _row({-2}, 4, -2),
    K.D3D3_6G: _row({-5, -4}, 6, -4),
    K.D3D4G: _row({-3}, 4, -2),
    K.S3S2G: _row({-2}, 4, -2),
    K.R3_1: _row({-2}, 0, -1),
    K.R3_2G: _row({-5, -4}, 4, -4),
    K.R2_1: _row({-1}, 0, -1),
    K.R2_2G: _row({-1}, 3, -1),
    K.R2_3: _row({-1}, 0, -1),
    K.R2_4: _row({-1}, 0, -1),
    K.R2_5: _row({-1}, 0, -1),
}

# kinds without a checkable row: DA has undefined symbols, BR and the TB steps are absent
UNCHECKED = frozenset({K.DA, K.BR, K.TB1, K.TB2})


def table_values(kind: StepKind, delta_chi: int, d: int) -> tuple[Fraction, Fraction, bool]:
    """(delta gamma, delta kappa, table_checked) for a step with the given computed delta chi."""
    row: Optional[TableRow] = TABLE.get(kind)
    if row is None:
        return Fraction(delta_chi), Fraction(0), False
    return Fraction(delta_chi) + row.increment(d), Fraction(row.kappa), True


def classify(delta_chi: int, delta_gamma: Fraction, d: int) -> Optional[str]:
    """``"normal"``, ``"good"`` or None when the step is neither."""
    gap = Fraction(delta_gamma) - delta_chi
    if gap == 0:
        return "normal"
    if gap >= Fraction(1, 6 * (d - 1)):
        return "good"
    return None

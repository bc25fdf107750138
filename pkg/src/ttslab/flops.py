"""Arithmetic-operation counters used by the scaling benchmarks.

Counts are multiply-accumulate equivalents: a matmul of shapes (m,k)x(k,n)
contributes m*n*k, elementwise passes contribute one unit per element, and
pure copies (embedding rows, upsampling, padding) contribute nothing.
Counters are keyed by operation kind so quadratic and linear contributions
of an encoder can be separated after the fact.
"""

from collections import Counter

_ACTIVE: list["FlopCounter"] = []


class FlopCounter:
    """Context manager that accumulates op counts while active.

    Nested counters each receive every count recorded in their scope.
    """

    def __init__(self):
        self.by_kind: Counter[str] = Counter()

    @property
    def total(self) -> int:
        return sum(self.by_kind.values())

    def of(self, *kinds: str) -> int:
        return sum(self.by_kind[k] for k in kinds)

    def __enter__(self) -> "FlopCounter":
        _ACTIVE.append(self)
        return self

    def __exit__(self, *exc):
        _ACTIVE.remove(self)
        return False


def add(kind: str, count: int) -> None:
    """Record `count` operations of `kind` on every active counter."""
    for counter in _ACTIVE:
        counter.by_kind[kind] += count


def counting() -> bool:
    return bool(_ACTIVE)

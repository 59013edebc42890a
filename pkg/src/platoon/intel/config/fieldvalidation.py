"""
Config field validation
-----------------------

A validator turns whatever a YAML/JSON file or a CLI flag supplied into the
value a config record holds, and back into the value written to artifacts:

record value  <-->  json value

The two coincide for scalars. Lists become tuples in the record (records are
immutable) and nested lists again in JSON.

Validation runs an ordered pipeline of named checks. Each check takes the
current value and returns it, possibly converted, or raises ValueError.
"""

from __future__ import annotations

import bisect
import math
from typing import Any, Callable, NamedTuple, Optional

__all__ = [
    "FieldValidator",
    "AnyField",
    "EnumeratedField",
    "BoolField",
    "IntField",
    "FloatField",
    "ListField",
    "CellListField",
]

# Check order. Conversions run before bounds, bounds before lengths.
CONVERT, RANGE, LENGTH = 5, 10, 20


class Check(NamedTuple):
    order: int
    name: str
    apply: Callable[[Any], Any]


class FieldValidator:
    """Validate and convert one configuration value.

    ``None`` never reaches the pipeline: it is accepted as is for nullable
    validators and rejected otherwise. Errors other than ValueError raised by a
    check (e.g. ``int(object())``) are reported as ValueError naming the check.
    """

    def __init__(
        self,
        *,
        nullable: bool = False,
        minimum_value: Any = None,
        maximum_value: Any = None,
        exclusive_minimum: bool = False,
        minimum_len: Optional[int] = None,
        maximum_len: Optional[int] = None,
    ):
        self.pipeline: list[Check] = []
        self.nullable = nullable
        self.minimum_value = minimum_value
        self.maximum_value = maximum_value
        self.exclusive_minimum = exclusive_minimum
        self.minimum_len = minimum_len
        self.maximum_len = maximum_len

        if minimum_value is not None or maximum_value is not None:
            self.add_check("range", self.check_range, RANGE)
        if minimum_len is not None or maximum_len is not None:
            self.add_check("length", self.check_length, LENGTH)

    def add_check(self, name: str, func: Callable[[Any], Any], order: int):
        """Insert a check; checks of equal order run in insertion order."""
        bisect.insort_right(self.pipeline, Check(order, name, func), key=lambda c: c.order)

    @property
    def check_names(self) -> list[str]:
        return [c.name for c in self.pipeline]

    def check_range(self, value):
        low, high = self.minimum_value, self.maximum_value
        if low is not None:
            if self.exclusive_minimum and value <= low:
                raise ValueError(f"{value} must be greater than {low}")
            if value < low:
                raise ValueError(f"{value} is below the minimum {low}")
        if high is not None and value > high:
            raise ValueError(f"{value} is above the maximum {high}")
        return value

    def check_length(self, value):
        n = len(value)
        if self.minimum_len is not None and n < self.minimum_len:
            raise ValueError(f"{n} items, at least {self.minimum_len} required")
        if self.maximum_len is not None and n > self.maximum_len:
            raise ValueError(f"{n} items, at most {self.maximum_len} allowed")
        return value

    def validate(self, value):
        if value is None:
            if self.nullable:
                return None
            raise ValueError("a value is required (got null)")
        for check in self.pipeline:
            try:
                value = check.apply(value)
            except ValueError:
                raise
            except Exception as e:
                raise ValueError(f"Bad value {value!r} in check '{check.name}'") from e
        return value

    def to_json(self, value):
        return value

    def from_json(self, value):
        return self.validate(value)

    def type_name(self) -> str:
        return "Any"

    def constraints(self) -> list[str]:
        """Human-readable constraints, used to document config fields."""
        out = ["nullable" if self.nullable else "not null"]

        match self.minimum_len, self.maximum_len:
            case None, None:
                pass
            case low, None:
                out.append(f"{low} <= length")
            case None, high:
                out.append(f"length <= {high}")
            case low, high:
                out.append(f"{low} <= length <= {high}")

        op = "<" if self.exclusive_minimum else "<="
        match self.minimum_value, self.maximum_value:
            case None, None:
                pass
            case low, None:
                out.append(f"{low} {op} value")
            case None, high:
                out.append(f"value <= {high}")
            case low, high:
                out.append(f"{low} {op} value <= {high}")
        return out


class AnyField(FieldValidator):
    """Accepts any non-null value (or null, when nullable)."""

    def __init__(self, type_name="Any", **kwargs):
        super().__init__(**kwargs)
        self._type_name = type_name

    def type_name(self) -> str:
        return self._type_name


class EnumeratedField(AnyField):
    """One of a fixed set of names, e.g. an activation or a mechanism."""

    def __init__(self, values, **kwargs):
        super().__init__(**kwargs)
        self.values = list(values)
        self.add_check("choice", self.check_choice, CONVERT)

    def check_choice(self, value):
        if value not in self.values:
            raise ValueError(f"{value!r} is not one of {self.values}")
        return value

    def type_name(self) -> str:
        return "|".join(self.values)


class ScalarField(AnyField):
    """Converts to a Python scalar type before bounds are checked."""

    scalar: type = object

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.add_check(self.scalar.__name__, self.convert, CONVERT)

    def convert(self, value):
        return self.scalar(value)

    def type_name(self) -> str:
        return self.scalar.__name__


class IntField(ScalarField):
    """Integers; integral floats (``2.0`` from YAML) are accepted, bools are not."""

    scalar = int

    def convert(self, value):
        if isinstance(value, bool):
            raise ValueError("expected an integer, got a bool")
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"expected an integer, got {value}")
        return int(value)


class FloatField(ScalarField):
    """Finite floats."""

    scalar = float

    def convert(self, value):
        if isinstance(value, bool):
            raise ValueError("expected a number, got a bool")
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"{value} is not finite")
        return value


class BoolField(ScalarField):
    """Booleans, also spelled true/false, yes/no, on/off or 1/0 in strings."""

    scalar = bool
    SPELLINGS = {
        "true": True, "yes": True, "on": True, "1": True,
        "false": False, "no": False, "off": False, "0": False,
    }

    def convert(self, value):
        if isinstance(value, str):
            try:
                return self.SPELLINGS[value.strip().lower()]
            except KeyError:
                raise ValueError(f"cannot read {value!r} as a bool") from None
        return bool(value)


class ListField(AnyField):
    """A sequence whose items share one validator; held as a tuple."""

    def __init__(self, item: FieldValidator | None = None, **kwargs):
        super().__init__(**kwargs)
        self.item = item if item is not None else AnyField()
        self.add_check("items", self.convert_items, CONVERT)

    def convert_items(self, value):
        if isinstance(value, (str, bytes)) or not hasattr(value, "__iter__"):
            raise ValueError(f"expected a list, got {type(value).__name__}")
        return tuple(self.item.validate(v) for v in value)

    def to_json(self, value):
        if value is None:
            return None
        return [self.item.to_json(v) for v in value]

    def type_name(self) -> str:
        return f"list[{self.item.type_name()}]"


class CellListField(ListField):
    """Grid cells ``(x, y)`` with non-negative integer coordinates."""

    def __init__(self, **kwargs):
        cell = ListField(IntField(minimum_value=0), minimum_len=2, maximum_len=2)
        super().__init__(item=cell, **kwargs)

    def type_name(self) -> str:
        return "list[(x, y)]"

from __future__ import annotations

from typing import TYPE_CHECKING, Any

from .exceptions import ConfigError
from .fieldvalidation import AnyField, FieldValidator

if TYPE_CHECKING:
    from .schema import ConfigRecord

REQUIRED = ...


class Field:
    """Descriptor for one value of a configuration record.

    A field knows its validator, its JSON key, its default and its
    documentation. Reading it on a record returns the validated value;
    assignment is refused because records are immutable.
    """

    def __init__(
        self,
        validator: FieldValidator | type | None = None,
        *,
        default: Any = REQUIRED,
        json_name: str | None = None,
        doc: str | None = None,
    ):
        """
        Args:
            validator: a validator instance or class (default: accept anything).
            default: the value used when a config omits this field; without one
                the field is required.
            json_name: the key in config files and artifacts, if it differs from
                the attribute name (e.g. ``N`` for ``bidders``).
            doc: one line describing the field.
        """
        match validator:
            case None:
                self.validator = AnyField()
            case type():
                self.validator = validator()
            case _:
                self.validator = validator
        self.default = default
        self.json_name = json_name
        self.doc = doc
        self.owner = self.name = None

    def __set_name__(self, owner, name):
        self.owner = owner
        self.name = name
        if self.json_name is None:
            self.json_name = name
        self.__doc__ = self.describe()

    def describe(self) -> str:
        """One-line summary: type, doc, constraints, default and JSON key."""
        constraints = self.validator.constraints()
        typespec = self.validator.type_name()
        if "nullable" in constraints:
            typespec += " | None"
        parts = [f"{typespec}: {self.doc or f'the {self.name} setting'}"]
        parts += [c for c in constraints if c not in ("nullable", "not null")]
        if not self.required:
            parts.append(f"default {self.default!r}")
        if self.json_name != self.name:
            parts.append(f"key '{self.json_name}'")
        return "; ".join(parts)

    @property
    def qualname(self):
        return f"{self.owner.__name__}.{self.name}"

    @property
    def required(self) -> bool:
        return self.default is REQUIRED

    def _error(self, e: ValueError) -> ConfigError:
        return ConfigError(f"{self.qualname} ({self.json_name}): {e}")

    def validate(self, value):
        try:
            return self.validator.validate(value)
        except ValueError as e:
            raise self._error(e) from e

    def from_json(self, raw: dict) -> Any:
        """Extract and validate this field from a config mapping.

        The JSON key wins over the attribute name when both are present.
        """
        for key in (self.json_name, self.name):
            if key in raw:
                try:
                    return self.validator.from_json(raw[key])
                except ValueError as e:
                    raise self._error(e) from e
        if self.required:
            raise ConfigError(f"{self.qualname}: missing required key '{self.json_name}'")
        return None if self.default is None else self.validate(self.default)

    def to_json(self, record: ConfigRecord) -> Any:
        value = self.__get__(record)
        return None if value is None else self.validator.to_json(value)

    def __get__(self, obj, objtype=None):
        if obj is None:
            return self
        return obj._values[self.name]

    def __set__(self, obj, value):
        raise AttributeError(
            f"Field '{self.name}' is read-only; use merged() to derive a new record"
        )

    def __repr__(self):
        return f"<Field {self.qualname}>"

    def __str__(self):
        return self.qualname

from __future__ import annotations

from typing import Any, Mapping

from .exceptions import ConfigError
from .field import Field

# ----------------------------------------------------------
#  Config Schema
#
#  A collection of fields defined for a config record.
#  Each field is an instance of Field and
#  contains metadata related to this field.
#
#  Subclasses of ConfigRecord are either records or 'abstract'.
#  Abstract subclasses are not instantiated directly.
#  Records cannot inherit other records. However, they
#  can inherit abstract classes, in which case they
#  inherit their fields.
#
# ----------------------------------------------------------


def inheritance_for_record_class(cls: type):
    # Helper for schema initialization.
    # Collects fields of abstract bases first, so that
    # declaration order runs from the root to the leaf.

    abstract_bases = []
    fields = {}

    for sc in reversed(cls.__mro__[1:]):
        if issubclass(sc, ConfigRecord) and sc is not ConfigRecord:
            if "config_schema" in sc.__dict__:
                raise TypeError(f"Record {cls.__name__} inherits from record {sc.__name__}")
            abstract_bases.append(sc)
            for name, f in sc.__dict__.items():
                if isinstance(f, Field):
                    fields[name] = f

    for name, f in cls.__dict__.items():
        if isinstance(f, Field):
            fields[name] = f

    return abstract_bases, fields


class Schema:
    """A class that holds all information related to a config record class.
    This includes the ordered list of fields and the JSON key index.
    """

    # Declare attributes
    fields: dict[str, Field]

    @property
    def class_name(self):
        return self.cls.__name__

    def __init__(self, cls):
        self.cls = cls
        self.abstract_base_classes, self.fields = inheritance_for_record_class(cls)
        self.json_keys = {}
        for name, f in self.fields.items():
            if f.json_name in self.json_keys:
                raise TypeError(
                    f"Duplicate JSON key '{f.json_name}' in {cls.__qualname__}"
                )
            self.json_keys[f.json_name] = f

    def accepted_keys(self) -> set[str]:
        return set(self.json_keys) | set(self.fields)

    def parse(self, raw: Mapping[str, Any]) -> dict[str, Any]:
        """Validate a JSON-like mapping into a dict of field values."""
        if not isinstance(raw, Mapping):
            raise ConfigError(
                f"{self.class_name}: expected a mapping, got {type(raw).__name__}"
            )
        unknown = set(raw) - self.accepted_keys()
        if unknown:
            raise ConfigError(f"{self.class_name}: unknown keys {sorted(unknown)}")
        return {name: f.from_json(raw) for name, f in self.fields.items()}


class ConfigRecord:
    """Base class for immutable, validated configuration records.

    Subclasses declare `Field` attributes. Passing `record=False` in the class
    statement declares an abstract base whose fields are inherited by records.
    """

    config_schema: Schema

    def __init_subclass__(cls, record=True, **kwargs):
        super().__init_subclass__(**kwargs)
        if record:
            cls.config_schema = Schema(cls)

    def __init__(self, **values):
        if "config_schema" not in type(self).__dict__:
            raise TypeError(f"{type(self).__name__} is an abstract config class")
        self._values = self.config_schema.parse(values)
        self.check()

    def check(self):
        """Cross-field validation hook; raise ConfigError on violation."""
        pass

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any] | None):
        return cls(**dict(raw or {}))

    def to_dict(self) -> dict[str, Any]:
        return {f.json_name: f.to_json(self) for f in self.config_schema.fields.values()}

    def merged(self, overrides: Mapping[str, Any] | None = None, **kwargs):
        """Return a new record with every non-None override applied."""
        updates = {k: v for k, v in {**(overrides or {}), **kwargs}.items() if v is not None}
        base = self.to_dict()
        for key, value in updates.items():
            f = self.config_schema.fields.get(key)
            base[f.json_name if f is not None else key] = value
        return type(self).from_dict(base)

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((type(self).__name__, repr(self.to_dict())))

    def __repr__(self):
        body = ", ".join(f"{k}={v!r}" for k, v in self._values.items())
        return f"{type(self).__name__}({body})"

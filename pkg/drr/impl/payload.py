"""Payload object impl."""

from __future__ import annotations

import typing
from abc import ABC, abstractmethod

import orjson
from loguru import logger
from typing_extensions import Self

from drr.errors import ParseError, ValidationError

__all__ = ("PayloadMappingT", "PayloadObject", "reject_unknown_keys")

PayloadMappingT: typing.TypeAlias = (
    typing.Mapping[str, typing.Any] | str | bytes
)
"""Payload Mapping Type.

Supports string, bytes, or a mapping.
"""


def _ensure_payload(payload: typing.Any) -> typing.Any:
    if isinstance(payload, str | bytes):
        try:
            return orjson.loads(payload)
        except orjson.JSONDecodeError as e:
            raise ParseError(e.msg, line=e.lineno, column=e.colno) from e

    return payload


def reject_unknown_keys(
    payload: typing.Mapping[str, typing.Any],
    allowed: typing.Collection[str],
    *,
    where: str | None = None,
) -> None:
    """Reject any key that is not part of the schema.

    Parameters
    ----------
    payload
        The mapping to check.
    allowed
        The accepted keys.
    where
        The dotted path of the mapping, used in the error.

    Raises
    ------
    ParseError
        Raised when an unknown key is present, or the payload is not a mapping.
    """
    if not isinstance(payload, typing.Mapping):
        raise ParseError("Expected an object.", field=where)

    for key in payload:
        if key not in allowed:
            field = key if where is None else f"{where}.{key}"
            raise ParseError("Unknown key.", field=field)


class PayloadObject(ABC):
    """Object can build from a JSON payload."""

    @classmethod
    @abstractmethod
    def _from_payload(cls, payload: typing.Any) -> Self:
        """Build object instance from payload."""

    @classmethod
    def from_payload(cls, payload: typing.Any) -> Self:
        """Build object instance from payload.

        Parameters
        ----------
        payload
            A decoded JSON value, or the JSON text itself.

        Raises
        ------
        ParseError
            Raised when the payload is malformed, has unknown keys or misses a required value.
        ValidationError
            Raised when the built object violates one of its invariants.
        """
        data = _ensure_payload(payload)
        try:
            return cls._from_payload(data)
        except (ParseError, ValidationError):
            raise
        except KeyError as e:
            logger.debug("Missing key while building {}: {}", cls.__name__, e)
            raise ParseError("Missing required key.", field=str(e.args[0])) from e
        except TypeError as e:
            logger.debug("Bad value while building {}: {}", cls.__name__, e)
            raise ParseError(f"Bad value for {cls.__name__}: {e}") from e
        except ValueError as e:
            logger.debug("Invalid {}: {}", cls.__name__, e)
            raise ValidationError(str(e), field=cls.__name__) from e

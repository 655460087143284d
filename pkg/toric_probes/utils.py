from dataclasses import field
from fractions import Fraction
import io
from pathlib import Path
import re
from typing import Callable, Concatenate, ParamSpec, TypeVar, Union


P = ParamSpec("P")
R = TypeVar("R")

T_Stream = Union[str, Path, io.TextIOBase]

RATIONAL_PATTERN = re.compile(r"[+-]?\d+(?:/\d+)?")


def hidden_field(default=None, **kwargs):
    """A dataclass field left out of __init__, __repr__ and comparisons, for lazily built caches."""
    return field(default=default, init=False, repr=False, compare=False, **kwargs)


def use_read_file(source: T_Stream, action: Callable[Concatenate[io.TextIOBase, P], R],
                  *args: P.args, **kwargs: P.kwargs) -> R:
    """
    Runs `action` on an open text stream: a filename or Path is opened as UTF-8 and closed
    afterwards, a stream is passed through.

    Raises:
        TypeError: If the source is neither a path nor a text stream.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as f:
            return action(f, *args, **kwargs)
    if isinstance(source, io.TextIOBase):
        return action(source, *args, **kwargs)
    raise TypeError(f"Cannot read from {type(source).__name__}: expected a filename, Path, or text stream")


def use_write_file(target: T_Stream, action: Callable[Concatenate[io.TextIOBase, P], R],
                   *args: P.args, **kwargs: P.kwargs) -> R:
    """The writing counterpart of `use_read_file`; files are truncated."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as f:
            return action(f, *args, **kwargs)
    if isinstance(target, io.TextIOBase):
        return action(target, *args, **kwargs)
    raise TypeError(f"Cannot write to {type(target).__name__}: expected a filename, Path, or text stream")


def parse_rational(value: Union[str, int, Fraction]) -> Fraction:
    """
    Parses an exact rational number.

    Args:
        value: Either an integer, a Fraction, or a string of the form "p/q" or "p".

    Returns:
        The parsed rational in canonical form.

    Raises:
        ValueError: If the value is not an exact rational (decimals are rejected) or has a zero denominator.
    """
    if isinstance(value, bool):
        raise ValueError(f"Not an exact rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if not isinstance(value, str) or not RATIONAL_PATTERN.fullmatch(value.strip()):
        raise ValueError(f"Not an exact rational: {value!r}")
    try:
        return Fraction(value.strip())
    except ZeroDivisionError as e:
        raise ValueError(f"Zero denominator in rational: {value!r}") from e


def format_rational(value: Union[int, Fraction]) -> str:
    """Formats an exact rational as "p/q", or "p" when the denominator is 1."""
    return str(Fraction(value))

"""Parsing and formatting of complex numbers written as ``re+imi``."""
from __future__ import annotations

import re
from fractions import Fraction

from .errors import DomainError

_NUM = r"[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?"
_IMAG = re.compile(rf"^(?P<im>[+-]?(?:{_NUM})?)i$")
_FULL = re.compile(rf"^\s*(?P<re>[+-]?{_NUM})?(?:(?P<im>[+-]?(?:{_NUM})?)i)?\s*$")


def parse_complex(text) -> complex:
    """Accepts ``1.5``, ``-2i``, ``0.5+3i``, ``1e-3-2.5e2i``, ``i``; ``j`` is accepted for ``i``."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip().replace("j", "i").replace(" ", "")
    m = _IMAG.match(s) or _FULL.match(s)
    if not s or m is None or (m.groupdict().get("re") is None and m.group("im") is None):
        raise DomainError(f"cannot parse complex number {text!r}", "complex grammar re+imi", text=str(text))
    re_part = float(m.group("re")) if m.groupdict().get("re") else 0.0
    im = m.group("im")
    if im is None:
        im_part = 0.0
    elif im in ("", "+"):
        im_part = 1.0
    elif im == "-":
        im_part = -1.0
    else:
        im_part = float(im)
    return complex(re_part, im_part)


def parse_exact(text) -> Fraction:
    """A rational number given as int, ``p/q`` or a terminating decimal string."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, float):
        raise DomainError("exact mode needs rationals given as strings or integers", "rational input",
                          value=text)
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot parse rational {text!r}", "rational input", text=str(text)) from exc


def format_complex(z) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 or z.imag != z.imag else '-'}{abs(z.imag)!r}i"

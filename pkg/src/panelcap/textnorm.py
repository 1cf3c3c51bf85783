"""Deterministic text normalization, tokenization, stemming and n-gram helpers.

Attribute equality everywhere in this package is defined as equality of
``normalize_attribute`` outputs, so the rules here are deliberately small and
frozen: Unicode NFC, lowercase, punctuation stripped (internal hyphens
survive), whitespace collapsed.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field


def _is_word_char(ch: str) -> bool:
    cat = unicodedata.category(ch)
    return cat[0] in ("L", "N")


def normalize_attribute(raw: str) -> str:
    """Canonical form of an attribute string.

    NFC, lowercase, punctuation and symbols replaced by spaces except
    hyphens between word characters ("night-sky" stays intact), apostrophes
    dropped, runs of whitespace collapsed, ends trimmed. Whitespace-only
    input normalizes to the empty string; callers decide whether to drop it.
    Idempotent by construction.
    """
    text = unicodedata.normalize("NFC", raw).lower()
    out: list[str] = []
    for i, ch in enumerate(text):
        if _is_word_char(ch):
            out.append(ch)
        elif ch in ("'", "’"):
            continue
        elif ch == "-":
            prev_ok = i > 0 and _is_word_char(text[i - 1])
            next_ok = i + 1 < len(text) and _is_word_char(text[i + 1])
            out.append("-" if prev_ok and next_ok else " ")
        else:
            out.append(" ")
    return " ".join("".join(out).split())


@dataclass(frozen=True)
class NormalizedText:
    """Tokenized view of a normalized string, keeping the source around."""

    tokens: tuple[str, ...]
    original: str = ""


def tokenize(text: str) -> NormalizedText:
    """Whitespace tokenization of the normalized form. Never yields empty tokens."""
    return NormalizedText(tokens=tuple(normalize_attribute(text).split()), original=text)


def ngrams(tokens: list[str] | tuple[str, ...], n: int) -> Counter:
    """Multiset of all contiguous n-grams; size is max(0, len - n + 1)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


# ---------------------------------------------------------------------------
# Porter stemmer (classic 1980 algorithm, ported from the reference
# implementation; no third-party stemmer ships on this toolchain).
# ---------------------------------------------------------------------------

_VOWELS = "aeiou"


class _PorterState:
    __slots__ = ("b",)

    def __init__(self, word: str):
        self.b = word

    def _is_cons(self, i: int) -> bool:
        ch = self.b[i]
        if ch in _VOWELS:
            return False
        if ch == "y":
            return True if i == 0 else not self._is_cons(i - 1)
        return True

    def measure(self, j: int) -> int:
        """Number of VC sequences in b[:j+1]."""
        n = 0
        i = 0
        while True:
            if i > j:
                return n
            if not self._is_cons(i):
                break
            i += 1
        i += 1
        while True:
            while True:
                if i > j:
                    return n
                if self._is_cons(i):
                    break
                i += 1
            i += 1
            n += 1
            while True:
                if i > j:
                    return n
                if not self._is_cons(i):
                    break
                i += 1
            i += 1

    def vowel_in_stem(self, j: int) -> bool:
        return any(not self._is_cons(i) for i in range(j + 1))

    def double_cons(self, j: int) -> bool:
        return j >= 1 and self.b[j] == self.b[j - 1] and self._is_cons(j)

    def cvc(self, i: int) -> bool:
        if i < 2 or not self._is_cons(i) or self._is_cons(i - 1) or not self._is_cons(i - 2):
            return False
        return self.b[i] not in "wxy"

    def ends(self, suffix: str) -> bool:
        return self.b.endswith(suffix)

    def stem_j(self, suffix: str) -> int:
        return len(self.b) - len(suffix) - 1

    def set_to(self, suffix: str, replacement: str) -> None:
        self.b = self.b[: len(self.b) - len(suffix)] + replacement

    def replace_m0(self, suffix: str, replacement: str) -> None:
        if self.measure(self.stem_j(suffix)) > 0:
            self.set_to(suffix, replacement)

    def replace_m1(self, suffix: str, replacement: str) -> None:
        if self.measure(self.stem_j(suffix)) > 1:
            self.set_to(suffix, replacement)


def _step1ab(s: _PorterState) -> None:
    if s.ends("sses"):
        s.set_to("sses", "ss")
    elif s.ends("ies"):
        s.set_to("ies", "i")
    elif not s.ends("ss") and s.ends("s"):
        s.set_to("s", "")

    trimmed = False
    if s.ends("eed"):
        if s.measure(s.stem_j("eed")) > 0:
            s.set_to("eed", "ee")
    elif s.ends("ed"):
        if s.vowel_in_stem(s.stem_j("ed")):
            s.set_to("ed", "")
            trimmed = True
    elif s.ends("ing"):
        if s.vowel_in_stem(s.stem_j("ing")):
            s.set_to("ing", "")
            trimmed = True
    if trimmed:
        if s.ends("at"):
            s.set_to("at", "ate")
        elif s.ends("bl"):
            s.set_to("bl", "ble")
        elif s.ends("iz"):
            s.set_to("iz", "ize")
        elif s.double_cons(len(s.b) - 1):
            if s.b[-1] not in "lsz":
                s.b = s.b[:-1]
        elif s.measure(len(s.b) - 1) == 1 and s.cvc(len(s.b) - 1):
            s.b += "e"


def _step1c(s: _PorterState) -> None:
    if s.ends("y") and s.vowel_in_stem(len(s.b) - 2):
        s.b = s.b[:-1] + "i"


_STEP2 = (
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
)

_STEP3 = (
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
)

_STEP4 = (
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
)


def _apply_table(s: _PorterState, table, action) -> None:
    # Longest matching suffix wins; its condition decides, nothing else fires.
    best = None
    for suffix, repl in table:
        if s.ends(suffix) and (best is None or len(suffix) > len(best[0])):
            best = (suffix, repl)
    if best is not None:
        action(*best)


def _step4(s: _PorterState) -> None:
    best = None
    for suffix in _STEP4:
        if s.ends(suffix) and (best is None or len(suffix) > len(best)):
            best = suffix
    if best is None:
        return
    j = s.stem_j(best)
    if s.measure(j) > 1:
        if best == "ion" and s.b[j] not in "st":
            return
        s.set_to(best, "")


def _step5(s: _PorterState) -> None:
    if s.ends("e"):
        j = len(s.b) - 2
        m = s.measure(j)
        if m > 1 or (m == 1 and not s.cvc(j)):
            s.b = s.b[:-1]
    if s.b.endswith("ll") and s.measure(len(s.b) - 1) > 1:
        s.b = s.b[:-1]


def stem_token(token: str) -> str:
    """Porter stem of a single normalized token. Stable across runs."""
    if len(token) <= 2 or not token.isalpha():
        return token
    s = _PorterState(token)
    _step1ab(s)
    _step1c(s)
    _apply_table(s, _STEP2, s.replace_m0)
    _apply_table(s, _STEP3, s.replace_m0)
    _step4(s)
    _step5(s)
    return s.b

"""Free-monoid words, finite presentations, and the word grammar.

Letters are signed integers: generator with index i (0-based) appears as
+(i+1), its inverse as -(i+1).  A Word is an immutable tuple of letters, so
words hash, slice and compare like tuples.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

_BAD_NAME_CHARS = set("^[],-()|<>#")


class WordError(ValueError):
    """Malformed word expression or presentation text."""


class NotARetraction(ValueError):
    """Killing the given generators does not define a retraction."""

    def __init__(self, relator: "Word", image: "Word", rendered: str):
        self.relator = relator
        self.image = image
        super().__init__(rendered)


@dataclass(frozen=True)
class Generator:
    name: str
    index: int

    def __repr__(self):
        return f"Generator({self.name!r}, {self.index})"


class Word(tuple):
    """A word over some alphabet, stored as signed 1-based generator ints."""

    def __new__(cls, letters=()):
        w = super().__new__(cls, letters)
        if any(not isinstance(x, int) or x == 0 for x in w):
            raise WordError("letters must be nonzero integers")
        return w

    def __repr__(self):
        return "Word(%s)" % (",".join(str(x) for x in self),)

    def __mul__(self, other):
        return Word(tuple(self) + tuple(other))

    def __getitem__(self, key):
        item = tuple.__getitem__(self, key)
        return Word(item) if isinstance(key, slice) else item


EMPTY = Word()


def invert(w: Word) -> Word:
    """Reverse the word and flip every sign."""
    return Word(tuple(-x for x in reversed(w)))


def free_reduce(w: Word) -> Word:
    """The unique freely reduced form of w (remove xx^-1 pairs to a fixed point)."""
    out: list[int] = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return Word(out)


def cyclically_reduce(w: Word) -> tuple[Word, Word]:
    """Return (core, conjugator) with w freely equal to g * core * g^-1.

    The core is cyclically reduced; the conjugator g collects the stripped
    prefix.
    """
    v = free_reduce(w)
    i, j = 0, len(v)
    while j - i >= 2 and v[i] == -v[j - 1]:
        i += 1
        j -= 1
    return Word(v[i:j]), Word(v[:i])


def rotate(w: Word, k: int) -> Word:
    if not w:
        return w
    k %= len(w)
    return Word(tuple(w[k:]) + tuple(w[:k]))


def min_rotation(w: Word) -> Word:
    """Lexicographically least cyclic rotation (canonical form for FFL states)."""
    if len(w) <= 1:
        return w
    return min(rotate(w, k) for k in range(len(w)))


def exponent_sum(w: Word, g: "Generator | int") -> int:
    """(# occurrences of +g) - (# occurrences of -g)."""
    v = g.index + 1 if isinstance(g, Generator) else g
    return sum(1 if x == v else -1 if x == -v else 0 for x in w)


# ---------------------------------------------------------------------------
# word expression parser
#
# Grammar (whitespace separates tokens, otherwise ignored):
#   seq    := item*
#   item   := '-'? atom suffix*
#   suffix := '^' '-'? (INT | atom suffix*)     power if INT, else conjugation
#           | '-' INT                           postfix power, e.g. a-1
#   atom   := NAME | '(' seq ')' | '[' seq ',' seq ']'
#
# x^y = y^-1 x y;  x^-y = (x^y)^-1;  '-' before an atom inverts that atom.
# Bare juxtaposed positive exponents (a4) are invalid.
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s+|(\d+)|([\^\[\](),|<>-])")


def _tokenize(text: str, names: list[str]) -> list[object]:
    """Tokens: ints, single-char symbols, and generator names (longest match)."""
    byname = sorted(names, key=len, reverse=True)
    tokens: list[object] = []
    i = 0
    n = len(text)
    while i < n:
        m = _TOKEN_RE.match(text, i)
        if m:
            if m.group(1) is not None:
                tokens.append(int(m.group(1)))
            elif m.group(2) is not None:
                tokens.append(m.group(2))
            i = m.end()
            continue
        for name in byname:
            if text.startswith(name, i):
                tokens.append(("gen", name))
                i += len(name)
                break
        else:
            raise WordError(f"unknown symbol at position {i}: {text[i:i+12]!r}")
    return tokens


class _WordParser:
    def __init__(self, tokens: list[object], p: "Presentation"):
        self.tokens = tokens
        self.pos = 0
        self.p = p

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        t = self.peek()
        self.pos += 1
        return t

    def expect(self, sym: str):
        t = self.take()
        if t != sym:
            raise WordError(f"expected {sym!r}, got {t!r} at token {self.pos - 1}")

    def parse_seq(self, stop=()) -> Word:
        out = EMPTY
        while True:
            t = self.peek()
            if t is None or t in stop:
                return out
            out = out * self.parse_item()

    def parse_item(self) -> Word:
        neg = False
        if self.peek() == "-":
            self.take()
            neg = True
            if not self._at_atom():
                raise WordError(f"'-' must precede an atom (token {self.pos})")
        w = self.parse_atom()
        if neg:
            w = invert(w)
        return self.parse_suffixes(w)

    def _at_atom(self) -> bool:
        t = self.peek()
        return t in ("(", "[") or (isinstance(t, tuple) and t[0] == "gen")

    def parse_suffixes(self, w: Word) -> Word:
        while True:
            t = self.peek()
            if t == "^":
                self.take()
                neg = False
                if self.peek() == "-":
                    self.take()
                    neg = True
                t2 = self.peek()
                if isinstance(t2, int):
                    self.take()
                    w = _power(w, t2)
                elif self._at_atom():
                    u = self.parse_suffixes(self.parse_atom())
                    w = invert(u) * w * u
                else:
                    raise WordError(f"malformed exponent at token {self.pos}")
                if neg:
                    w = invert(w)
            elif t == "-" and isinstance(self.tokens[self.pos + 1] if self.pos + 1 < len(self.tokens) else None, int):
                self.take()
                k = self.take()
                w = invert(_power(w, k))
            else:
                return w

    def parse_atom(self) -> Word:
        t = self.take()
        if isinstance(t, tuple) and t[0] == "gen":
            return Word((self.p.letter(t[1]),))
        if t == "(":
            w = self.parse_seq(stop=(")",))
            self.expect(")")
            return w
        if t == "[":
            x = self.parse_seq(stop=(",",))
            self.expect(",")
            y = self.parse_seq(stop=("]",))
            self.expect("]")
            return invert(x) * invert(y) * x * y
        raise WordError(f"unexpected token {t!r} at token {self.pos - 1}")


def _power(w: Word, k: int) -> Word:
    return Word(tuple(w) * k)


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("#", 1)[0] for line in text.splitlines())


class Presentation:
    """A finite presentation: alphabet plus cyclically reduced relators.

    The rotation table lists every cyclic rotation of every relator and of
    its inverse, tagged with (relator index, rotation offset, inverted flag);
    relator-application moves are enumerated against it.
    """

    def __init__(self, names: list[str], relators: list[Word]):
        seen = set()
        for name in names:
            if not name or set(name) & _BAD_NAME_CHARS or any(c.isdigit() or c.isspace() for c in name):
                raise WordError(f"invalid generator name {name!r}")
            if name in seen:
                raise WordError(f"duplicate generator {name!r}")
            seen.add(name)
        self.alphabet = tuple(Generator(nm, i) for i, nm in enumerate(names))
        self._index = {g.name: g.index for g in self.alphabet}
        cores = []
        for r in relators:
            core, _ = cyclically_reduce(r)
            if not core:
                raise WordError(f"relator {self.render(r) or repr(r)!r} reduces to the empty word")
            if any(abs(x) > len(names) for x in core):
                raise WordError("relator uses letters outside the alphabet")
            cores.append(core)
        self.relators = tuple(cores)
        table: list[tuple[Word, int, int, bool]] = []
        seen_rot: set[Word] = set()
        for ridx, r in enumerate(self.relators):
            for inv in (False, True):
                base = invert(r) if inv else r
                for k in range(len(base)):
                    rho = rotate(base, k)
                    if rho not in seen_rot:
                        seen_rot.add(rho)
                        table.append((rho, ridx, k, inv))
        self.rotation_table = tuple(table)
        self.rotation_set = frozenset(seen_rot)
        self.max_relator_length = max((len(r) for r in self.relators), default=0)

    # -- basic queries ------------------------------------------------------

    def letter(self, name: str) -> int:
        if name not in self._index:
            raise WordError(f"unknown generator {name!r}")
        return self._index[name] + 1

    def generator_of(self, letter: int) -> Generator:
        return self.alphabet[abs(letter) - 1]

    def rotation(self, ridx: int, k: int, inv: bool) -> Word:
        base = invert(self.relators[ridx]) if inv else self.relators[ridx]
        return rotate(base, k)

    @property
    def names(self) -> list[str]:
        return [g.name for g in self.alphabet]

    # -- parsing / rendering -------------------------------------------------

    def parse(self, text: str) -> Word:
        tokens = _tokenize(_strip_comments(text), self.names)
        parser = _WordParser(tokens, self)
        w = parser.parse_seq()
        if parser.pos != len(parser.tokens):
            raise WordError(f"trailing tokens at {parser.pos}")
        return w

    def render(self, w: Word) -> str:
        parts = []
        for x in w:
            g = self.generator_of(x)
            parts.append(g.name if x > 0 else g.name + "-1")
        return " ".join(parts)

    def text(self) -> str:
        rels = ", ".join(self.render(r) for r in self.relators)
        return f"< {','.join(self.names)} | {rels} >"

    def digest(self) -> str:
        return hashlib.sha256(self.text().encode()).hexdigest()[:16]

    def __repr__(self):
        return f"Presentation({self.text()})"

    def __eq__(self, other):
        return isinstance(other, Presentation) and self.names == other.names and self.relators == other.relators

    def __hash__(self):
        return hash((tuple(self.names), self.relators))


def parse_presentation(text: str) -> Presentation:
    """Parse '< gens | relators >' (relators comma-separated, may be empty)."""
    stripped = _strip_comments(text).strip()
    m = re.fullmatch(r"<(.*)\|(.*)>", stripped, re.DOTALL)
    if not m:
        raise WordError("presentation must look like '< gens | relators >'")
    gen_part, rel_part = m.group(1), m.group(2)
    names = [nm.strip() for nm in gen_part.split(",") if nm.strip()]
    if not names:
        raise WordError("no generators given")
    proto = Presentation(names, [])
    relators = []
    depth = 0
    chunk = ""
    for ch in rel_part + ",":
        if ch == "," and depth == 0:
            if chunk.strip():
                relators.append(proto.parse(chunk))
            chunk = ""
        else:
            if ch in "[(":
                depth += 1
            elif ch in "])":
                depth -= 1
            chunk += ch
    return Presentation(names, relators)


def parse_word(text: str, p: Presentation) -> Word:
    return p.parse(text)


# ---------------------------------------------------------------------------
# retractions
# ---------------------------------------------------------------------------


def retract(p: Presentation, kill: set[str]):
    """Retraction killing the named generators.

    Succeeds iff every relator, after deleting killed letters and freely
    reducing, is empty or a cyclic conjugate of a surviving relator or its
    inverse.  Returns (target presentation, word map).
    """
    unknown = kill - set(p.names)
    if unknown:
        raise WordError(f"cannot kill unknown generators {sorted(unknown)}")
    keep = [g.name for g in p.alphabet if g.name not in kill]
    target_proto = Presentation(keep, [])
    old_to_new = {}
    for g in p.alphabet:
        if g.name not in kill:
            old_to_new[g.index + 1] = target_proto.letter(g.name)

    def word_map(w: Word) -> Word:
        return Word(tuple(old_to_new[x] if x > 0 else -old_to_new[-x] for x in w if abs(x) in old_to_new))

    survivors = [r for r in p.relators if all(abs(x) in old_to_new for x in r)]
    survivor_images = [word_map(r) for r in survivors]
    surviving_rots = set()
    for img in survivor_images:
        for inv in (False, True):
            base = invert(img) if inv else img
            for k in range(len(base)):
                surviving_rots.add(rotate(base, k))
    for r in p.relators:
        img = free_reduce(word_map(r))
        if img and img not in surviving_rots:
            raise NotARetraction(r, img, f"relator {p.render(r)} maps to nontrivial {target_proto.render(img)}")
    target = Presentation(keep, survivor_images)
    return target, word_map


# ---------------------------------------------------------------------------
# preset presentations and the word families
# ---------------------------------------------------------------------------

BS_TEXT = "< a,b | a^b a^-2 >"
RST_TEXT = "< a,b,r,s,t | a^b a^-2, [t,a], [r,a t], [r,s], [s,t] >"
Z2_TEXT = "< a,t | [a,t] >"


def presentation_bs() -> Presentation:
    """The Baumslag-Solitar presentation < a,b | a^b = a^2 >."""
    return parse_presentation(BS_TEXT)


def presentation_rst() -> Presentation:
    """BS(1,2) extended by three stable letters r, s, t."""
    return parse_presentation(RST_TEXT)


def presentation_z2() -> Presentation:
    """< a,t | [a,t] >, the rank-2 free abelian group."""
    return parse_presentation(Z2_TEXT)


def word_w(n: int, p: Presentation | None = None) -> Word:
    """The commutator family [s, a^(-b^n) r a^(b^n)]; length 8n+8."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    p = p or presentation_rst()
    a, b, r, s = (p.letter(x) for x in "abrs")
    conj = Word((-b,) * n + (a,) + (b,) * n)     # a^(b^n)
    conj_inv = invert(conj)                      # a^(-b^n)
    x = conj_inv * Word((r,)) * conj
    return invert(Word((s,))) * invert(x) * Word((s,)) * x


def word_w_prime(n: int, p: Presentation | None = None) -> Word:
    """The two-peak family [s, a^(-b^n) r a^(b^n) r a^(b^n) r^-1 a^(-b^n)]; length 16n+16."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    p = p or presentation_rst()
    a, b, r, s = (p.letter(x) for x in "abrs")
    conj = Word((-b,) * n + (a,) + (b,) * n)
    conj_inv = invert(conj)
    y = conj_inv * Word((r,)) * conj * Word((r,)) * conj * Word((-r,)) * conj_inv
    return invert(Word((s,))) * invert(y) * Word((s,)) * y

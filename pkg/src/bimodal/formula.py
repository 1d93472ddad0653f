"""Bimodal formulas: AST, concrete syntax, subformulas and derived operators.

Formulas are hash-consed: building the same tree twice returns the same
object, so structural equality is identity and hashing is O(1).  Only the
primitive node kinds exist; every other connective is expanded by the
builders below into its textbook definition.
"""

from __future__ import annotations

import re
from typing import Callable, Iterable, Iterator

__all__ = [
    "Formula", "Var", "Top", "Bot", "Neg", "And", "Dia0", "Dia1",
    "TOP", "BOT", "ParseError",
    "neg", "conj", "disj", "imp", "iff", "dia", "box", "dia_plus", "box_plus",
    "dia_eq1", "box_upto", "next_step", "derived",
    "parse", "to_text", "subformulas", "subformula_list", "variables",
    "modal_depth", "size", "normalize", "substitute", "VarDictionary", "random_formula",
]


class Formula:
    """Base class of all formula nodes (immutable, interned)."""

    __slots__ = ("_hash", "__weakref__")
    _table: dict = {}

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __ne__(self, other):
        return self is not other

    def __str__(self):
        return to_text(self)

    # small operator vocabulary for writing encodings compactly
    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return Neg(self)

    def __rshift__(self, other):
        return imp(self, other)

    def children(self) -> tuple:
        return ()


def _intern(cls, key, init):
    obj = Formula._table.get(key)
    if obj is None:
        obj = object.__new__(cls)
        init(obj)
        obj._hash = hash(key)
        Formula._table[key] = obj
    return obj


class Var(Formula):
    __slots__ = ("name",)

    def __new__(cls, name: str):
        def init(o):
            o.name = name
        return _intern(cls, ("var", name), init)

    def __reduce__(self):
        return (Var, (self.name,))

    def __repr__(self):
        return f"Var({self.name!r})"


class Top(Formula):
    __slots__ = ()

    def __new__(cls):
        return _intern(cls, ("top",), lambda o: None)

    def __reduce__(self):
        return (Top, ())

    def __repr__(self):
        return "Top()"


class Bot(Formula):
    __slots__ = ()

    def __new__(cls):
        return _intern(cls, ("bot",), lambda o: None)

    def __reduce__(self):
        return (Bot, ())

    def __repr__(self):
        return "Bot()"


class _Unary(Formula):
    __slots__ = ("child",)
    _tag = ""

    def __new__(cls, child: Formula):
        if not isinstance(child, Formula):
            raise TypeError(f"{cls.__name__} expects a Formula, got {child!r}")

        def init(o):
            o.child = child
        return _intern(cls, (cls._tag, child), init)

    def __reduce__(self):
        return (type(self), (self.child,))

    def children(self):
        return (self.child,)

    def __repr__(self):
        return f"{type(self).__name__}({self.child!r})"


class Neg(_Unary):
    __slots__ = ()
    _tag = "neg"


class Dia0(_Unary):
    __slots__ = ()
    _tag = "dia0"


class Dia1(_Unary):
    __slots__ = ()
    _tag = "dia1"


class And(Formula):
    __slots__ = ("left", "right")

    def __new__(cls, left: Formula, right: Formula):
        if not (isinstance(left, Formula) and isinstance(right, Formula)):
            raise TypeError("And expects two Formulas")

        def init(o):
            o.left = left
            o.right = right
        return _intern(cls, ("and", left, right), init)

    def __reduce__(self):
        return (And, (self.left, self.right))

    def children(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"And({self.left!r}, {self.right!r})"


TOP = Top()
BOT = Bot()
_DIA = {0: Dia0, 1: Dia1}


# ---------------------------------------------------------------- builders

def neg(a: Formula) -> Formula:
    return Neg(a)


def conj(parts: Iterable[Formula]) -> Formula:
    """Left-folded conjunction; the empty conjunction is true."""
    out = None
    for p in parts:
        out = p if out is None else And(out, p)
    return TOP if out is None else out


def disj(*args) -> Formula:
    """Disjunction ~(~a & ~b), left-folded; accepts an iterable or varargs."""
    parts = list(args[0]) if len(args) == 1 and not isinstance(args[0], Formula) else list(args)
    out = None
    for p in parts:
        out = p if out is None else Neg(And(Neg(out), Neg(p)))
    return BOT if out is None else out


def imp(a: Formula, b: Formula) -> Formula:
    return Neg(And(a, Neg(b)))


def iff(a: Formula, b: Formula) -> Formula:
    return And(imp(a, b), imp(b, a))


def dia(i: int, a: Formula) -> Formula:
    return _DIA[i](a)


def box(i: int, a: Formula) -> Formula:
    return Neg(_DIA[i](Neg(a)))


def dia_plus(i: int, a: Formula) -> Formula:
    return disj(a, dia(i, a))


def box_plus(i: int, a: Formula) -> Formula:
    return And(a, box(i, a))


def dia_eq1(a: Formula) -> Formula:
    """Exactly-one along the vertical axis: <1>+ (a & [1] ~a)."""
    return dia_plus(1, And(a, box(1, Neg(a))))


def box_upto(i: int, n: int, a: Formula) -> Formula:
    """Conjunction of the k-fold boxes for k = 0..n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    parts, cur = [], a
    for _ in range(n + 1):
        parts.append(cur)
        cur = box(i, cur)
    return conj(parts)


def next_step(a: Formula, n_name: str = "@N", s_name: str = "@S") -> Formula:
    """Horizontal next along the staircase: [1](N -> [0](S -> a))."""
    return box(1, imp(Var(n_name), box(0, imp(Var(s_name), a))))


def derived(kind: str, *args) -> Formula:
    """Dispatch by name: dia+, box+, dia=1, box<=, X."""
    table: dict[str, Callable] = {
        "dia+": dia_plus, "box+": box_plus, "dia=1": dia_eq1,
        "box<=": box_upto, "X": next_step,
    }
    if kind not in table:
        raise ValueError(f"unknown derived operator {kind!r}")
    return table[kind](*args)


# ---------------------------------------------------------------- analysis

def subformula_list(phi: Formula) -> list[Formula]:
    """Distinct subformulas, children before parents."""
    seen: set = set()
    out: list = []
    stack = [(phi, False)]
    while stack:
        node, expanded = stack.pop()
        if node in seen:
            continue
        if expanded:
            seen.add(node)
            out.append(node)
        else:
            stack.append((node, True))
            for c in node.children():
                if c not in seen:
                    stack.append((c, False))
    return out


def subformulas(phi: Formula) -> set[Formula]:
    return set(subformula_list(phi))


def variables(phi: Formula) -> list[str]:
    """Variable names in first-occurrence order (deterministic)."""
    out = []
    for s in subformula_list(phi):
        if isinstance(s, Var):
            out.append(s.name)
    return out


def modal_depth(phi: Formula) -> int:
    depth: dict = {}
    for s in subformula_list(phi):
        if isinstance(s, (Dia0, Dia1)):
            depth[s] = depth[s.child] + 1
        else:
            depth[s] = max((depth[c] for c in s.children()), default=0)
    return depth[phi]


def size(phi: Formula) -> int:
    """Number of nodes of the tree (shared subtrees counted repeatedly)."""
    memo: dict = {}
    for s in subformula_list(phi):
        memo[s] = 1 + sum(memo[c] for c in s.children())
    return memo[phi]


def _rebuild(phi: Formula, leaf: Callable, node: Callable) -> Formula:
    memo: dict = {}
    for s in subformula_list(phi):
        if isinstance(s, (Var, Top, Bot)):
            memo[s] = leaf(s)
        else:
            memo[s] = node(s, [memo[c] for c in s.children()])
    return memo[phi]


def _remake(s: Formula, kids: list) -> Formula:
    if isinstance(s, And):
        return And(kids[0], kids[1])
    return type(s)(kids[0])


def substitute(phi: Formula, mapping: dict) -> Formula:
    """Replace variables by formulas (names absent from mapping are kept)."""
    def leaf(s):
        if isinstance(s, Var) and s.name in mapping:
            m = mapping[s.name]
            return Var(m) if isinstance(m, str) else m
        return s
    return _rebuild(phi, leaf, _remake)


def normalize(phi: Formula) -> Formula:
    """Remove double negations and fold true/false constants."""
    def node(s, k):
        if isinstance(s, Neg):
            c = k[0]
            if isinstance(c, Neg):
                return c.child
            if c is TOP:
                return BOT
            if c is BOT:
                return TOP
            return Neg(c)
        if isinstance(s, And):
            a, b = k
            if a is BOT or b is BOT:
                return BOT
            if a is TOP:
                return b
            if b is TOP:
                return a
            return And(a, b)
        c = k[0]
        if c is BOT:
            return BOT
        return type(s)(c)
    return _rebuild(phi, lambda s: s, node)


# ---------------------------------------------------------------- syntax

class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{msg} at line {line}, column {col}")
        self.line, self.col = line, col


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<op><->|->|<1>=1|<[01]>\+|\[[01]\]\+|<[01]>|\[[01]\]|[~&|()])
  | (?P<ident>@?[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)


def tokenize(text: str, extra: re.Pattern | None = None) -> list[tuple[str, str, int, int]]:
    """Split into (kind, value, line, col) tokens; `extra` adds operator tokens."""
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        col = pos - line_start + 1
        m = extra.match(text, pos) if extra is not None else None
        if m:
            toks.append(("op", m.group(0), line, col))
        else:
            m = _TOKEN_RE.match(text, pos)
            if not m:
                raise ParseError(f"unknown token {text[pos]!r}", line, col)
            kind = m.lastgroup
            if kind != "ws":
                toks.append((kind, m.group(0), line, col))
        chunk = m.group(0)
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    toks.append(("eof", "", line, pos - line_start + 1))
    return toks


class Parser:
    """Precedence-climbing parser; subclassed by the FOLTL front end."""

    KEYWORDS = {"true", "false", "X"}

    def __init__(self, text: str, names: dict | None = None, extra=None):
        self.toks = tokenize(text, extra)
        self.i = 0
        self.names = {"N": "@N", "S": "@S", **(names or {})}

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        t = tok or self.peek()
        where = "end of input" if t[0] == "eof" else repr(t[1])
        raise ParseError(f"{msg} (found {where})", t[2], t[3])

    def expect(self, value):
        t = self.peek()
        if t[1] != value or t[0] == "eof":
            self.fail(f"expected {value!r}")
        return self.take()

    def parse_all(self):
        phi = self.parse_iff()
        if self.peek()[0] != "eof":
            self.fail("unexpected token")
        return phi

    def parse_iff(self):
        left = self.parse_imp()
        while self.peek()[1] == "<->":
            self.take()
            left = iff(left, self.parse_imp())
        return left

    def parse_imp(self):
        left = self.parse_or()
        if self.peek()[1] == "->":
            self.take()
            return imp(left, self.parse_imp())
        return left

    def parse_or(self):
        left = self.parse_and()
        while self.peek()[1] == "|":
            self.take()
            left = disj(left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_unary()
        while self.peek()[1] == "&":
            self.take()
            left = And(left, self.parse_unary())
        return left

    def parse_unary(self):
        kind, val, _, _ = self.peek()
        if kind == "op":
            prefix = {
                "~": Neg,
                "<0>": Dia0, "<1>": Dia1,
                "[0]": lambda a: box(0, a), "[1]": lambda a: box(1, a),
                "<0>+": lambda a: dia_plus(0, a), "<1>+": lambda a: dia_plus(1, a),
                "[0]+": lambda a: box_plus(0, a), "[1]+": lambda a: box_plus(1, a),
                "<1>=1": dia_eq1,
            }
            if val in prefix:
                self.take()
                return prefix[val](self.parse_unary())
        if kind == "ident" and val == "X":
            self.take()
            return next_step(self.parse_unary(), self.names["N"], self.names["S"])
        return self.parse_atom()

    def parse_atom(self):
        kind, val, _, _ = self.peek()
        if kind == "op" and val == "(":
            self.take()
            phi = self.parse_iff()
            self.expect(")")
            return phi
        if kind == "ident":
            self.take()
            if val == "true":
                return TOP
            if val == "false":
                return BOT
            return Var(val)
        self.fail("expected a formula")


def parse(text: str, names: dict | None = None) -> Formula:
    """Parse formula source; `names` maps N and S for the X operator."""
    return Parser(text, names).parse_all()


# printer precedence levels
_IFF, _IMP, _OR, _AND, _UNARY = 1, 2, 3, 4, 5


def _match_box(f):
    if isinstance(f, Neg) and isinstance(f.child, (Dia0, Dia1)) and isinstance(f.child.child, Neg):
        return (0 if isinstance(f.child, Dia0) else 1), f.child.child.child
    return None


def _match_dia_plus(f):
    # ~(~a & ~<i>a)
    if isinstance(f, Neg) and isinstance(f.child, And):
        l, r = f.child.left, f.child.right
        if isinstance(l, Neg) and isinstance(r, Neg) and isinstance(r.child, (Dia0, Dia1)) \
                and r.child.child is l.child:
            return (0 if isinstance(r.child, Dia0) else 1), l.child
    return None


def _match_dia_eq1(f):
    m = _match_dia_plus(f)
    if m and m[0] == 1:
        y = m[1]
        if isinstance(y, And):
            b = _match_box(y.right)
            if b and b[0] == 1 and b[1] is Neg(y.left):
                return y.left
    return None


def _match_iff(f):
    if isinstance(f, And) and isinstance(f.left, Neg) and isinstance(f.right, Neg):
        a, b = f.left.child, f.right.child
        if isinstance(a, And) and isinstance(b, And) and isinstance(a.right, Neg) \
                and isinstance(b.right, Neg) and a.left is b.right.child and b.left is a.right.child:
            return a.left, a.right.child
    return None


def _match_or(f):
    if isinstance(f, Neg) and isinstance(f.child, And) and isinstance(f.child.left, Neg) \
            and isinstance(f.child.right, Neg):
        return f.child.left.child, f.child.right.child
    return None


def _match_imp(f):
    if isinstance(f, Neg) and isinstance(f.child, And) and isinstance(f.child.right, Neg):
        return f.child.left, f.child.right.child
    return None


def to_text(phi: Formula, sugar: bool = True) -> str:
    """Print in the concrete syntax; parse(to_text(phi)) is phi.

    With sugar=True the printer recognises the exact shapes produced by the
    derived-operator builders and prints them back as sugar.
    """
    memo: dict = {}

    def go(f, level):
        key = (f, level)
        if key in memo:
            return memo[key]
        text, own = render(f)
        if own < level:
            text = f"({text})"
        memo[key] = text
        return text

    def render(f):
        if isinstance(f, Var):
            return f.name, 6
        if f is TOP:
            return "true", 6
        if f is BOT:
            return "false", 6
        if sugar:
            m = _match_dia_eq1(f)
            if m is not None:
                return "<1>=1 " + go(m, _UNARY), _UNARY
            m = _match_dia_plus(f)
            if m is not None:
                return f"<{m[0]}>+ " + go(m[1], _UNARY), _UNARY
            if isinstance(f, And):
                b = _match_box(f.right)
                if b is not None and b[1] is f.left:
                    return f"[{b[0]}]+ " + go(f.left, _UNARY), _UNARY
                m = _match_iff(f)
                if m is not None:
                    return go(m[0], _IFF) + " <-> " + go(m[1], _IFF + 1), _IFF
            m = _match_box(f)
            if m is not None:
                return f"[{m[0]}] " + go(m[1], _UNARY), _UNARY
            m = _match_or(f)
            if m is not None:
                return go(m[0], _OR) + " | " + go(m[1], _OR + 1), _OR
            m = _match_imp(f)
            if m is not None:
                return go(m[0], _IMP + 1) + " -> " + go(m[1], _IMP), _IMP
        if isinstance(f, Neg):
            return "~" + go(f.child, _UNARY), _UNARY
        if isinstance(f, Dia0):
            return "<0> " + go(f.child, _UNARY), _UNARY
        if isinstance(f, Dia1):
            return "<1> " + go(f.child, _UNARY), _UNARY
        if isinstance(f, And):
            return go(f.left, _AND) + " & " + go(f.right, _AND + 1), _AND
        raise TypeError(f)

    # iterative warm-up to avoid deep recursion on long chains
    for s in subformula_list(phi):
        go(s, 0)
    return go(phi, 0)


# ---------------------------------------------------------------- dictionary

class VarDictionary:
    """Injective role -> variable-name map with collision-free fresh names.

    Roles are strings ("S", "N", "end", ...) or tuples such as ("S_q", q),
    ("C+", i), ("I", op) or ("P", psi).
    """

    def __init__(self, avoid: Iterable[str] = (), entries: dict | None = None):
        self.avoid = set(avoid)
        self._map: dict = {}
        self._names: set = set()
        for role, name in (entries or {}).items():
            self._put(role, name)

    def _put(self, role, name):
        if name in self._names and self._map.get(role) != name:
            raise ValueError(f"name {name!r} already used")
        self._map[role] = name
        self._names.add(name)

    @staticmethod
    def default_name(role) -> str:
        if isinstance(role, str):
            return "@" + {"S*": "Sstar"}.get(role, role)
        head, *rest = role
        arg = rest[0] if rest else ""
        if head == "S_q":
            return f"@S_{arg}"
        if head == "C+":
            return f"@C{arg}p"
        if head == "C-":
            return f"@C{arg}m"
        if head == "C":
            return f"@C{arg}"
        if head == "C-'":
            return f"@C{arg}m'"
        if head == "I":
            return f"@I_{arg}"
        if head == "P":
            return f"@P{arg}"
        if head == "prime":
            return arg + "'"
        return "@" + "_".join(str(x) for x in role)

    def name(self, role) -> str:
        """Return the name for role, creating a fresh one on first use."""
        if role in self._map:
            return self._map[role]
        base = self.default_name(role)
        cand, k = base, 1
        while cand in self._names or cand in self.avoid:
            cand = f"{base}{k}"
            k += 1
        self._put(role, cand)
        return cand

    def var(self, role) -> Var:
        return Var(self.name(role))

    __getitem__ = name

    def __contains__(self, role):
        return role in self._map

    def items(self):
        return self._map.items()

    def roles(self):
        return list(self._map)

    def names(self) -> set:
        return set(self._names)

    def role_of(self, name: str):
        for r, n in self._map.items():
            if n == name:
                return r
        raise KeyError(name)

    def copy(self) -> "VarDictionary":
        d = VarDictionary(self.avoid)
        for r, n in self._map.items():
            d._put(r, n)
        return d

    def __len__(self):
        return len(self._map)

    def __iter__(self) -> Iterator:
        return iter(self._map)

    def __repr__(self):
        return f"VarDictionary({self._map!r})"


def random_formula(rng, names=("P", "Q"), depth: int = 3, constants: bool = True) -> Formula:
    """Random primitive-syntax formula of modal depth at most `depth`."""
    def go(d):
        r = rng.random()
        if d == 0 or r < 0.2:
            if constants and rng.random() < 0.08:
                return rng.choice([TOP, BOT])
            return Var(rng.choice(names))
        if r < 0.35:
            return Neg(go(d))
        if r < 0.55:
            return And(go(d - 1), go(d - 1))
        if r < 0.75:
            return Dia0(go(d - 1))
        return Dia1(go(d - 1))
    return go(depth)

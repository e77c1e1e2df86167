"""Discrete Bayesian networks: BIF text format, ancestral sampling, and the
dataset container used by the tests and the learner.

The BIF subset covers ``network``, discrete ``variable`` and ``probability``
blocks; ``property`` entries are ignored. Conditional tables use one row per
parent configuration, ``table`` rows give the flat distribution (for nodes
with parents, configurations vary row-major with the first parent slowest
and the child state fastest).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graphs import Dag


class BifParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


class NetworkValidationError(ValueError):
    pass


_PUNCT = set("{}(),;|[]")


def _tokenize(text: str):
    tokens = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        # // comments run to end of line
        cut = line.find("//")
        if cut >= 0:
            line = line[:cut]
        col = 0
        n = len(line)
        while col < n:
            ch = line[col]
            if ch.isspace():
                col += 1
                continue
            if ch in _PUNCT:
                tokens.append((ch, lineno, col + 1))
                col += 1
                continue
            if ch == '"':
                end = line.find('"', col + 1)
                if end < 0:
                    raise BifParseError("unterminated string", lineno, col + 1)
                tokens.append((line[col + 1:end], lineno, col + 1))
                col = end + 1
                continue
            start = col
            while col < n and not line[col].isspace() and line[col] not in _PUNCT:
                col += 1
            tokens.append((line[start:col], lineno, start + 1))
    return tokens


class _TokenStream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        if self.pos >= len(self.tokens):
            return None
        return self.tokens[self.pos][0]

    def next(self):
        if self.pos >= len(self.tokens):
            last = self.tokens[-1] if self.tokens else ("", 1, 1)
            raise BifParseError("unexpected end of input", last[1], last[2])
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, want: str):
        tok, line, col = self.next()
        if tok != want:
            raise BifParseError(f"expected {want!r}, found {tok!r}", line, col)
        return tok

    def error(self, message: str):
        if self.pos < len(self.tokens):
            _, line, col = self.tokens[self.pos]
        elif self.tokens:
            _, line, col = self.tokens[-1]
        else:
            line, col = 1, 1
        raise BifParseError(message, line, col)


class DiscreteBayesNet:
    """Nodes with named states, parent lists, and one conditional table per
    node (rows indexed by parent configuration, first parent slowest)."""

    def __init__(self, nodes: Sequence[str], states: dict[str, Sequence[str]],
                 parents: dict[str, Sequence[str]], cpt: dict[str, np.ndarray]):
        self.nodes = tuple(nodes)
        self.states = {n: tuple(states[n]) for n in self.nodes}
        self.parents = {n: tuple(parents.get(n, ())) for n in self.nodes}
        self.cpt = {}
        for n in self.nodes:
            table = np.asarray(cpt[n], dtype=np.float64)
            k = len(self.states[n])
            n_cfg = int(np.prod([len(self.states[p]) for p in self.parents[n]], dtype=np.int64)) \
                if self.parents[n] else 1
            if table.shape != (n_cfg, k):
                raise NetworkValidationError(
                    f"{n}: CPT shape {table.shape} != ({n_cfg}, {k})")
            self.cpt[n] = table
        self._validate()

    def _validate(self) -> None:
        for n in self.nodes:
            for p in self.parents[n]:
                if p not in self.states:
                    raise NetworkValidationError(f"{n}: unknown parent {p}")
            sums = self.cpt[n].sum(axis=1)
            if np.any(np.abs(sums - 1.0) > 1e-6):
                bad = int(np.argmax(np.abs(sums - 1.0)))
                raise NetworkValidationError(
                    f"{n}: CPT row {bad} sums to {sums[bad]!r}, not 1")
            if np.any(self.cpt[n] < 0):
                raise NetworkValidationError(f"{n}: negative probability")
        # Acyclicity comes for free from the Dag constructor.
        try:
            self.dag()
        except ValueError as exc:
            raise NetworkValidationError(str(exc)) from exc

    def card(self, node: str) -> int:
        return len(self.states[node])

    def dag(self) -> Dag:
        edges = [(p, n) for n in self.nodes for p in self.parents[n]]
        return Dag(self.nodes, edges)

    def __eq__(self, other) -> bool:
        return (isinstance(other, DiscreteBayesNet)
                and self.nodes == other.nodes
                and self.states == other.states
                and self.parents == other.parents
                and all(np.array_equal(self.cpt[n], other.cpt[n])
                        for n in self.nodes))

    def __repr__(self) -> str:
        n_edges = sum(len(p) for p in self.parents.values())
        return f"DiscreteBayesNet(nodes={len(self.nodes)}, edges={n_edges})"


def _parse_float(tok: str, line: int, col: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise BifParseError(f"expected a number, found {tok!r}", line, col) from None


def _parse_value_list(ts: _TokenStream) -> list[float]:
    values = []
    while True:
        tok, line, col = ts.next()
        if tok == ";":
            if not values:
                raise BifParseError("empty probability list", line, col)
            return values
        if tok == ",":
            continue
        values.append(_parse_float(tok, line, col))


def parse_bif(text: str) -> DiscreteBayesNet:
    """Parse BIF text into a network.

    Raises BifParseError (with line/column) on grammar problems and
    NetworkValidationError on semantic ones (rows not summing to one,
    cyclic parents, missing configurations).
    """
    ts = _TokenStream(_tokenize(text))
    order: list[str] = []
    states: dict[str, tuple[str, ...]] = {}
    parents: dict[str, tuple[str, ...]] = {}
    tables: dict[str, np.ndarray] = {}
    filled: dict[str, np.ndarray] = {}

    def skip_block():
        ts.expect("{")
        depth = 1
        while depth:
            tok, _, _ = ts.next()
            if tok == "{":
                depth += 1
            elif tok == "}":
                depth -= 1

    while ts.peek() is not None:
        tok, line, col = ts.next()
        if tok == "network":
            ts.next()  # name
            skip_block()
        elif tok == "variable":
            name, line, col = ts.next()
            if name in states:
                raise BifParseError(f"duplicate variable {name!r}", line, col)
            ts.expect("{")
            var_states: tuple[str, ...] | None = None
            while ts.peek() != "}":
                inner, iline, icol = ts.next()
                if inner == "type":
                    kind, kline, kcol = ts.next()
                    if kind != "discrete":
                        raise BifParseError(
                            f"unsupported variable type {kind!r}", kline, kcol)
                    ts.expect("[")
                    count_tok, cline, ccol = ts.next()
                    try:
                        count = int(count_tok)
                    except ValueError:
                        raise BifParseError("expected a state count",
                                            cline, ccol) from None
                    ts.expect("]")
                    ts.expect("{")
                    names = []
                    while ts.peek() != "}":
                        s, _, _ = ts.next()
                        if s != ",":
                            names.append(s)
                    ts.expect("}")
                    ts.expect(";")
                    if len(names) != count:
                        raise BifParseError(
                            f"{name}: declared {count} states, found {len(names)}",
                            cline, ccol)
                    var_states = tuple(names)
                elif inner == "property":
                    while ts.peek() != ";":
                        ts.next()
                    ts.expect(";")
                else:
                    raise BifParseError(f"unexpected token {inner!r} in "
                                        f"variable block", iline, icol)
            ts.expect("}")
            if var_states is None:
                raise BifParseError(f"variable {name!r} has no type", line, col)
            order.append(name)
            states[name] = var_states
        elif tok == "probability":
            ts.expect("(")
            child, cline, ccol = ts.next()
            if child not in states:
                raise BifParseError(f"unknown variable {child!r}", cline, ccol)
            par: list[str] = []
            nxt, nline, ncol = ts.next()
            if nxt == "|":
                while True:
                    p, pline, pcol = ts.next()
                    if p == ",":
                        continue
                    if p == ")":
                        break
                    if p not in states:
                        raise BifParseError(f"unknown parent {p!r}", pline, pcol)
                    par.append(p)
            elif nxt != ")":
                raise BifParseError(f"expected '|' or ')', found {nxt!r}",
                                    nline, ncol)
            parents[child] = tuple(par)
            k = len(states[child])
            cfg_cards = [len(states[p]) for p in par]
            n_cfg = int(np.prod(cfg_cards, dtype=np.int64)) if par else 1
            table = np.full((n_cfg, k), np.nan)
            fill = np.zeros(n_cfg, dtype=bool)

            ts.expect("{")
            while ts.peek() != "}":
                row_tok, rline, rcol = ts.next()
                if row_tok == "table":
                    values = _parse_value_list(ts)
                    if len(values) != n_cfg * k:
                        raise BifParseError(
                            f"{child}: table has {len(values)} values, "
                            f"expected {n_cfg * k}", rline, rcol)
                    table = np.asarray(values).reshape(n_cfg, k)
                    fill[:] = True
                elif row_tok == "(":
                    labels = []
                    while True:
                        s, sline, scol = ts.next()
                        if s == ",":
                            continue
                        if s == ")":
                            break
                        labels.append((s, sline, scol))
                    if len(labels) != len(par):
                        raise BifParseError(
                            f"{child}: row names {len(labels)} parent states, "
                            f"expected {len(par)}", rline, rcol)
                    idx = 0
                    for (s, sline, scol), p in zip(labels, par):
                        try:
                            si = states[p].index(s)
                        except ValueError:
                            raise BifParseError(
                                f"{child}: {s!r} is not a state of {p}",
                                sline, scol) from None
                        idx = idx * len(states[p]) + si
                    values = _parse_value_list(ts)
                    if len(values) != k:
                        raise BifParseError(
                            f"{child}: row has {len(values)} values, "
                            f"expected {k}", rline, rcol)
                    table[idx] = values
                    fill[idx] = True
                elif row_tok == "property":
                    while ts.peek() != ";":
                        ts.next()
                    ts.expect(";")
                else:
                    raise BifParseError(
                        f"unexpected token {row_tok!r} in probability block",
                        rline, rcol)
            ts.expect("}")
            if not fill.all():
                missing = int(np.flatnonzero(~fill)[0])
                raise NetworkValidationError(
                    f"{child}: parent configuration {missing} has no row")
            tables[child] = table
        else:
            raise BifParseError(f"unexpected token {tok!r}", line, col)

    for name in order:
        if name not in tables:
            raise NetworkValidationError(f"{name}: no probability block")
    return DiscreteBayesNet(order, states, parents, tables)


def load_bif(path) -> DiscreteBayesNet:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_bif(fh.read())


def serialize_bif(net: DiscreteBayesNet, name: str = "unknown") -> str:
    """Render a network back to BIF text; parse(serialize(net)) == net."""
    out = [f"network {name} {{", "}"]
    for n in net.nodes:
        out.append(f"variable {n} {{")
        out.append(f"  type discrete [ {net.card(n)} ] "
                   f"{{ {', '.join(net.states[n])} }};")
        out.append("}")
    for n in net.nodes:
        par = net.parents[n]
        if not par:
            out.append(f"probability ( {n} ) {{")
            out.append("  table " + ", ".join(repr(float(v)) for v in net.cpt[n][0]) + ";")
        else:
            out.append(f"probability ( {n} | {', '.join(par)} ) {{")
            cards = [net.card(p) for p in par]
            for idx in range(net.cpt[n].shape[0]):
                labels = []
                rem = idx
                for c in reversed(cards):
                    labels.append(rem % c)
                    rem //= c
                labels.reverse()
                tag = ", ".join(net.states[p][s] for p, s in zip(par, labels))
                row = ", ".join(repr(float(v)) for v in net.cpt[n][idx])
                out.append(f"  ({tag}) {row};")
        out.append("}")
    return "\n".join(out) + "\n"


def save_bif(net: DiscreteBayesNet, path, name: str = "unknown") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_bif(net, name))


@dataclass
class Dataset:
    """Rectangular table of 0-based state indices."""

    names: tuple[str, ...]
    cards: tuple[int, ...]
    rows: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        self.names = tuple(self.names)
        self.cards = tuple(int(c) for c in self.cards)
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != len(self.names):
            raise ValueError("rows must be 2-D with one column per variable")
        if len(self.cards) != len(self.names):
            raise ValueError("cards and names must align")
        if rows.size:
            if rows.min() < 0:
                raise ValueError("negative state index")
            if np.any(rows.max(axis=0) >= np.asarray(self.cards)):
                raise ValueError("state index exceeds cardinality")
        self.rows = rows

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(self.names) + "\n")
            for row in self.rows:
                fh.write(",".join(str(int(v)) for v in row) + "\n")

    @classmethod
    def from_csv(cls, path, cards: Sequence[int] | None = None) -> "Dataset":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            if not header:
                raise ValueError("empty dataset file")
            names = tuple(header.split(","))
            data = []
            for lineno, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                if len(parts) != len(names):
                    raise ValueError(f"line {lineno}: expected {len(names)} "
                                     f"columns, found {len(parts)}")
                try:
                    data.append([int(v) for v in parts])
                except ValueError:
                    raise ValueError(f"line {lineno}: non-integer state index") from None
        rows = np.asarray(data, dtype=np.int64) if data else \
            np.empty((0, len(names)), dtype=np.int64)
        if cards is None:
            # Cardinalities are not stored in the CSV; infer from the data.
            cards = tuple(int(rows[:, i].max()) + 1 if rows.size else 1
                          for i in range(len(names)))
        return cls(names=names, cards=tuple(cards), rows=rows)


def forward_sample(net: DiscreteBayesNet, n: int,
                   seed: int | np.random.Generator) -> Dataset:
    """Draw ``n`` ancestral samples, deterministic given the seed.

    Nodes are sampled in topological order, one vectorized categorical draw
    per node, so the stream consumption is fixed by the network alone.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    order = net.dag().topological_order()
    col_of = {name: i for i, name in enumerate(net.nodes)}
    rows = np.zeros((n, len(net.nodes)), dtype=np.int64)
    for name in order:
        par = net.parents[name]
        if par:
            cfg = np.zeros(n, dtype=np.int64)
            for p in par:
                cfg = cfg * net.card(p) + rows[:, col_of[p]]
        else:
            cfg = np.zeros(n, dtype=np.int64)
        cum = np.cumsum(net.cpt[name], axis=1)
        u = rng.random(n)
        drawn = (u[:, None] > cum[cfg]).sum(axis=1)
        rows[:, col_of[name]] = np.minimum(drawn, net.card(name) - 1)
    seed_val = seed if isinstance(seed, int) else None
    return Dataset(names=net.nodes,
                   cards=tuple(net.card(x) for x in net.nodes),
                   rows=rows, seed=seed_val)
